//! Complex-operation counts for ML detection on QF-UCA, UCA and ULA links.
//!
//! With `S = N K` streams and alphabet size `V`:
//!
//! | architecture | additions            | multiplications                |
//! |--------------|----------------------|--------------------------------|
//! | QF-UCA, UCA  | `S log2 S + S V`     | `(S/2) log2 S + S (V + 1)`     |
//! | ULA          | `S^2 V^S`            | `S^2 + S V^S`                  |
//!
//! `V^S` overflows any fixed-width integer quickly, so counts are exact
//! big integers.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Qfuca,
    Uca,
    Ula,
}

/// Multiplication ratio ULA / QF-UCA at `N=4, K=8, V=8` as commonly quoted.
/// The closed forms give about 6.89e27 instead.
pub const QUOTED_MULTIPLICATION_RATIO: f64 = 1.89e27;

/// Addition ratio ULA / QF-UCA at `N=4, K=8, V=8` as commonly quoted.
pub const QUOTED_ADDITION_RATIO: f64 = 1.95e29;

fn as_decimal<S: Serializer>(value: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&value.to_str_radix(10))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub architecture: Architecture,
    pub cells: usize,
    pub slots: usize,
    pub alphabet: usize,
    /// Exact count of complex additions, as a decimal string.
    #[serde(serialize_with = "as_decimal")]
    pub additions: BigUint,
    /// Exact count of complex multiplications, as a decimal string.
    #[serde(serialize_with = "as_decimal")]
    pub multiplications: BigUint,
    pub log10_additions: f64,
    pub log10_multiplications: f64,
}

/// `log10` of an arbitrarily large integer.
pub fn log10_big(value: &BigUint) -> f64 {
    if value.is_zero() {
        return f64::NEG_INFINITY;
    }
    if let Some(v) = value.to_f64().filter(|v| v.is_finite()) {
        return v.log10();
    }
    let digits = value.to_str_radix(10);
    let lead: f64 = digits[..17].parse().expect("decimal digits");
    lead.log10() + (digits.len() - 17) as f64
}

pub fn complexity_table(cells: usize, slots: usize, alphabet: usize, architecture: Architecture) -> Result<ComplexityReport> {
    if cells == 0 || slots == 0 {
        return Err(Error::Domain("N and K must be positive".into()));
    }
    if alphabet < 2 {
        return Err(Error::Domain(format!("alphabet size V must be >= 2, got {alphabet}")));
    }
    let s = cells * slots;
    let big = |x: usize| BigUint::from(x);
    let (additions, multiplications) = match architecture {
        Architecture::Qfuca | Architecture::Uca => {
            if !s.is_power_of_two() {
                return Err(Error::Domain(format!(
                    "NK must be a power of two for the log2(NK) terms, got NK = {s}"
                )));
            }
            let log = s.trailing_zeros() as usize;
            (
                big(s) * big(log) + big(s) * big(alphabet),
                big(s) * big(log) / big(2) + big(s) * big(alphabet + 1),
            )
        }
        Architecture::Ula => {
            let hypotheses = big(alphabet).pow(s as u32);
            (big(s * s) * &hypotheses, big(s * s) + big(s) * &hypotheses)
        }
    };
    Ok(ComplexityReport {
        architecture,
        cells,
        slots,
        alphabet,
        log10_additions: log10_big(&additions),
        log10_multiplications: log10_big(&multiplications),
        additions,
        multiplications,
    })
}

/// All three architectures side by side, with the ULA/QF-UCA ratios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityComparison {
    pub qfuca: ComplexityReport,
    pub uca: ComplexityReport,
    pub ula: ComplexityReport,
    pub ula_over_qfuca_additions: f64,
    pub ula_over_qfuca_multiplications: f64,
    pub notes: Vec<String>,
}

impl ComplexityComparison {
    pub fn new(cells: usize, slots: usize, alphabet: usize) -> Result<Self> {
        let qfuca = complexity_table(cells, slots, alphabet, Architecture::Qfuca)?;
        let uca = complexity_table(cells, slots, alphabet, Architecture::Uca)?;
        let ula = complexity_table(cells, slots, alphabet, Architecture::Ula)?;
        let ratio = |a: f64, b: f64| 10f64.powf(a - b);
        let add = ratio(ula.log10_additions, qfuca.log10_additions);
        let mul = ratio(ula.log10_multiplications, qfuca.log10_multiplications);
        let mut notes = Vec::new();
        if (cells, slots, alphabet) == (4, 8, 8) {
            let flag = |what: &str, computed: f64, quoted: f64| {
                let rel = (computed - quoted).abs() / quoted;
                if rel > 0.01 {
                    format!(
                        "FLAG: {what} ratio from the closed forms is {computed:.3e}, \
                         the quoted reference value is {quoted:.3e} ({:.0}% apart)",
                        100.0 * rel
                    )
                } else {
                    format!("{what} ratio {computed:.3e} agrees with the quoted {quoted:.3e} within 1%")
                }
            };
            notes.push(flag("addition", add, QUOTED_ADDITION_RATIO));
            notes.push(flag("multiplication", mul, QUOTED_MULTIPLICATION_RATIO));
        }
        Ok(ComplexityComparison {
            qfuca,
            uca,
            ula,
            ula_over_qfuca_additions: add,
            ula_over_qfuca_multiplications: mul,
            notes,
        })
    }
}
