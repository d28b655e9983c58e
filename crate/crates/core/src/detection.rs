//! Symbol detection and BER Monte Carlo over the full chain.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    build_physical_channel, freespace_gain, idealize_bccb, lift_to_logical, LinkConfig, LogicalChannel,
};
use crate::dft::{unitary_dft_matrix, Direction};
use crate::error::{check_len, Error, Result};
use crate::geometry::{build_layout, transform_layout, LayoutSpec, RigidTransform};
use crate::rng::substream;
use crate::transceiver::{Chain, Demodulated, NoiseMode, SymbolGrid, DEFAULT_EQ_TOLERANCE};

/// Largest hypothesis count the exhaustive detector will enumerate.
pub const JOINT_ML_LIMIT: u128 = 1 << 16;

/// Trials per independently seeded work unit.
const CHUNK: u64 = 4096;

/// `V`-PSK with Gray-coded labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
}

impl Constellation {
    /// Points `exp(j 2 pi v / V)`, `V` a power of two.
    pub fn psk(order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::Domain(format!("PSK order V must be a power of two >= 2, got {order}")));
        }
        let points = (0..order)
            .map(|v| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * v as f64 / order as f64))
            .collect();
        Ok(Constellation { points })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> u32 {
        self.points.len().trailing_zeros()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Gray label of point `index`.
    pub fn label(&self, index: usize) -> usize {
        index ^ (index >> 1)
    }

    pub fn bit_errors(&self, sent: usize, decided: usize) -> u32 {
        (self.label(sent) ^ self.label(decided)).count_ones()
    }

    /// Nearest point; ties go to the lowest index.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }
}

/// Per-stream decisions; `None` on streams that carry no data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decisions {
    pub cells: usize,
    pub slots: usize,
    pub indices: Vec<Option<usize>>,
}

impl Decisions {
    /// Decided symbols, 0 on inactive streams.
    pub fn grid(&self, c: &Constellation) -> SymbolGrid {
        let values = self
            .indices
            .iter()
            .map(|i| i.map_or(Complex64::new(0.0, 0.0), |i| c.point(i)))
            .collect();
        SymbolGrid::new(self.cells, self.slots, values).expect("decision grid shape")
    }
}

/// Independent nearest-point decision on every active stream.
pub fn detect_symbolwise(est: &Demodulated, c: &Constellation) -> Decisions {
    let indices = est
        .grid
        .values()
        .iter()
        .zip(&est.active)
        .map(|(z, &on)| on.then(|| c.nearest(*z)))
        .collect();
    Decisions {
        cells: est.grid.cells(),
        slots: est.grid.slots(),
        indices,
    }
}

/// `A = H F^H`: maps symbol grids straight to logical receive samples.
fn symbol_matrix(ch: &LogicalChannel) -> DMatrix<Complex64> {
    ch.matrix() * unitary_dft_matrix(ch.cells(), ch.slots(), Direction::Inverse)
}

/// Zero-forcing: pseudo-inverse of the full logical channel composed with
/// the modulator, then nearest point on active streams.
pub fn detect_zero_forcing(ch: &LogicalChannel, r: &[Complex64], active: &[bool], c: &Constellation) -> Result<Decisions> {
    check_len("zero-forcing input", ch.size(), r.len())?;
    check_len("active mask", ch.size(), active.len())?;
    let a = symbol_matrix(ch);
    let tol = crate::channel::RANK_TOLERANCE * a.norm();
    let pinv = a
        .pseudo_inverse(tol)
        .map_err(|e| Error::Precondition(format!("pseudo-inverse failed: {e}")))?;
    let s = pinv * DVector::from_column_slice(r);
    let indices = s.iter().zip(active).map(|(z, &on)| on.then(|| c.nearest(*z))).collect();
    Ok(Decisions {
        cells: ch.cells(),
        slots: ch.slots(),
        indices,
    })
}

/// Exhaustive ML over every grid of `c`: `argmin_s |r - H modulate(s)|^2`.
/// Ties go to the lexicographically smallest index grid.
pub fn detect_joint_ml(ch: &LogicalChannel, r: &[Complex64], c: &Constellation) -> Result<Decisions> {
    detect_joint_ml_active(ch, r, &vec![true; ch.size()], c)
}

/// Joint ML with inactive streams pinned to 0.
pub fn detect_joint_ml_active(ch: &LogicalChannel, r: &[Complex64], active: &[bool], c: &Constellation) -> Result<Decisions> {
    check_len("joint ML input", ch.size(), r.len())?;
    check_len("active mask", ch.size(), active.len())?;
    let live: Vec<usize> = (0..ch.size()).filter(|&i| active[i]).collect();
    let hypotheses = (c.order() as u128).checked_pow(live.len() as u32).unwrap_or(u128::MAX);
    if hypotheses > JOINT_ML_LIMIT {
        return Err(Error::SizeGuard {
            what: "joint ML hypotheses V^(NK)",
            value: hypotheses,
            limit: JOINT_ML_LIMIT,
        });
    }
    let a = symbol_matrix(ch);
    let size = ch.size();
    let mut digits = vec![0usize; live.len()];
    let mut best = digits.clone();
    let mut best_metric = f64::INFINITY;
    loop {
        let mut metric = 0.0;
        for (row, &rv) in r.iter().enumerate() {
            let mut y = Complex64::new(0.0, 0.0);
            for (d, &col) in digits.iter().zip(&live) {
                y += a[(row, col)] * c.point(*d);
            }
            metric += (rv - y).norm_sqr();
        }
        if metric < best_metric {
            best_metric = metric;
            best.clone_from(&digits);
        }
        // odometer with the first stream most significant
        let mut pos = digits.len();
        loop {
            if pos == 0 {
                let mut indices = vec![None; size];
                for (d, &col) in best.iter().zip(&live) {
                    indices[col] = Some(*d);
                }
                return Ok(Decisions {
                    cells: ch.cells(),
                    slots: ch.slots(),
                    indices,
                });
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < c.order() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionScheme {
    #[default]
    SymbolwiseMl,
    ZeroForcing,
    JointMl,
}

/// Which channel the transmitted signal actually traverses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    /// Element-level free-space channel with combiner and splitter.
    Exact,
    /// BCCB idealization of the lifted exact channel.
    #[default]
    Idealized,
    /// Identity logical channel.
    UnitGain,
}

/// Monte Carlo parameters independent of the channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerRun {
    /// PSK order `V`.
    pub alphabet: usize,
    #[serde(default)]
    pub noise_mode: NoiseMode,
    /// `P / sigma^2` per receive element, dB; `inf` means noise-free.
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub scheme: DetectionScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerScenario {
    pub layout: LayoutSpec,
    pub link: LinkConfig,
    pub channel: ChannelKind,
    /// Reference SNR to the boresight path gain at the link distance.
    pub normalize_path_loss: bool,
    /// Pose error of the receive array.
    pub rx_transform: RigidTransform,
    pub eq_tolerance: f64,
    pub run: BerRun,
}

impl BerScenario {
    pub fn new(layout: LayoutSpec, run: BerRun) -> Self {
        BerScenario {
            layout,
            link: LinkConfig::default(),
            channel: ChannelKind::default(),
            normalize_path_loss: true,
            rx_transform: RigidTransform::identity(),
            eq_tolerance: DEFAULT_EQ_TOLERANCE,
            run,
        }
    }

    pub fn chain(&self) -> Result<Chain> {
        let tx = build_layout(&self.layout)?;
        let rx = transform_layout(&tx, &self.rx_transform);
        let power = self.link.total_power;
        let chain = match self.channel {
            ChannelKind::UnitGain => {
                Chain::logical(LogicalChannel::identity(tx.cells(), tx.slots()), power, Some(rx))?
            }
            kind => {
                let mut phys = build_physical_channel(&tx, &rx, &self.link)?;
                if self.normalize_path_loss {
                    let g = freespace_gain(self.link.link_distance, self.link.wavelength())?;
                    phys = phys.normalized(g.norm());
                }
                if kind == ChannelKind::Exact {
                    Chain::physical(phys, power)?
                } else {
                    let ideal = idealize_bccb(&lift_to_logical(&phys)?);
                    Chain::logical(ideal, power, Some(phys.rx_layout().clone()))?
                }
            }
        };
        Ok(chain.with_eq_tolerance(self.eq_tolerance))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits_sent: u64,
    /// Absent when no bits were sent.
    pub ber: Option<f64>,
    /// 95% normal-approximation binomial half-width.
    pub ci_halfwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerCurve {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<BerScenario>,
    pub run: BerRun,
    pub active_streams: usize,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    /// CSV `snr_db,ber,ci_halfwidth,bits` (empty fields when undefined).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["snr_db", "ber", "ci_halfwidth", "bits"])?;
        for p in &self.points {
            out.write_record([
                p.snr_db.to_string(),
                p.ber.map(|v| v.to_string()).unwrap_or_default(),
                p.ci_halfwidth.map(|v| v.to_string()).unwrap_or_default(),
                p.bits_sent.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn validate_run(run: &BerRun, streams: usize) -> Result<Constellation> {
    let c = Constellation::psk(run.alphabet)?;
    if run.trials == 0 {
        return Err(Error::Domain("trials must be >= 1".into()));
    }
    if let Some(bad) = run.snr_db.iter().find(|v| v.is_nan() || **v == f64::NEG_INFINITY) {
        return Err(Error::Domain(format!("SNR points must be numbers above -inf dB, got {bad}")));
    }
    if run.scheme == DetectionScheme::JointMl {
        let hypotheses = (run.alphabet as u128).checked_pow(streams as u32).unwrap_or(u128::MAX);
        if hypotheses > JOINT_ML_LIMIT {
            return Err(Error::SizeGuard {
                what: "joint ML hypotheses V^(NK)",
                value: hypotheses,
                limit: JOINT_ML_LIMIT,
            });
        }
    }
    Ok(c)
}

/// Trials `[first, first + count)` of SNR point `snr_index`.
#[allow(clippy::too_many_arguments)]
fn run_chunk(
    chain: &Chain,
    truth: &LogicalChannel,
    c: &Constellation,
    run: &BerRun,
    active: &[bool],
    noise_power: f64,
    stream: u64,
    count: u64,
) -> Result<(u64, u64)> {
    let mut rng = substream(run.seed, stream);
    let (cells, slots) = (chain.cells(), chain.slots());
    let mut errors = 0u64;
    let mut bits = 0u64;
    let mut sent = vec![0usize; active.len()];
    for _ in 0..count {
        let mut values = vec![Complex64::new(0.0, 0.0); active.len()];
        for (i, &on) in active.iter().enumerate() {
            if on {
                sent[i] = rng.random_range(0..c.order());
                values[i] = c.point(sent[i]);
            }
        }
        let s = SymbolGrid::new(cells, slots, values)?;
        let r = chain.transmit(&s, run.noise_mode, noise_power, &mut rng)?;
        let decided = match run.scheme {
            DetectionScheme::SymbolwiseMl => detect_symbolwise(&chain.demodulate(&r)?, c),
            DetectionScheme::ZeroForcing => detect_zero_forcing(truth, &r, active, c)?,
            DetectionScheme::JointMl => detect_joint_ml_active(truth, &r, active, c)?,
        };
        for (i, d) in decided.indices.iter().enumerate() {
            if let Some(d) = d {
                errors += c.bit_errors(sent[i], *d) as u64;
                bits += c.bits_per_symbol() as u64;
            }
        }
    }
    Ok((errors, bits))
}

/// BER curve of a prepared chain. Noise power per point is `P / rho`.
pub fn simulate_ber(chain: &Chain, run: &BerRun) -> Result<BerCurve> {
    let c = validate_run(run, chain.streams())?;
    let active = chain.active();
    // ZF and joint ML see the true channel including the combiner amplitude
    let truth = chain.logical_channel()?.scaled(chain.gain());
    let chunks = run.trials.div_ceil(CHUNK);
    let units: Vec<(usize, u64)> = (0..run.snr_db.len()).flat_map(|i| (0..chunks).map(move |k| (i, k))).collect();
    let tallies: Vec<(u64, u64)> = units
        .par_iter()
        .map(|&(i, k)| {
            let count = CHUNK.min(run.trials - k * CHUNK);
            let noise = chain.total_power() / 10f64.powf(run.snr_db[i] / 10.0);
            run_chunk(chain, &truth, &c, run, &active, noise, ((i as u64) << 32) | k, count)
        })
        .collect::<Result<_>>()?;
    let points = run
        .snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let (bit_errors, bits_sent) = tallies[i * chunks as usize..(i + 1) * chunks as usize]
                .iter()
                .fold((0, 0), |(e, b), (de, db)| (e + de, b + db));
            let ber = (bits_sent > 0).then(|| bit_errors as f64 / bits_sent as f64);
            let ci_halfwidth = ber.map(|p| 1.96 * (p * (1.0 - p) / bits_sent as f64).sqrt());
            BerPoint {
                snr_db,
                bit_errors,
                bits_sent,
                ber,
                ci_halfwidth,
            }
        })
        .collect();
    Ok(BerCurve {
        scenario: None,
        run: run.clone(),
        active_streams: active.iter().filter(|&&a| a).count(),
        points,
    })
}

pub fn run_ber(sc: &BerScenario) -> Result<BerCurve> {
    let chain = sc.chain()?;
    let mut curve = simulate_ber(&chain, &sc.run)?;
    curve.scenario = Some(sc.clone());
    Ok(curve)
}
