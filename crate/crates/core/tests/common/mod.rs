//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's DFT or closed-form helpers.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qfuca::geometry::{build_layout, LayoutCase, LayoutSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut impl Rng) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Unitary 2D DFT matrix `F[(n,k),(m,l)] = exp(-j2pi(nm/N + kl/K)) / sqrt(NK)`,
/// built entry by entry.
pub fn dft_matrix(cells: usize, slots: usize) -> DMatrix<Complex64> {
    let size = cells * slots;
    let scale = 1.0 / (size as f64).sqrt();
    DMatrix::from_fn(size, size, |i, j| {
        let (n, k) = (i / slots, i % slots);
        let (m, l) = (j / slots, j % slots);
        let phase = -2.0 * PI * ((n * m) as f64 / cells as f64 + (k * l) as f64 / slots as f64);
        Complex64::from_polar(scale, phase)
    })
}

/// BCCB matrix from its first column by the index identity.
pub fn bccb(column: &[Complex64], cells: usize, slots: usize) -> DMatrix<Complex64> {
    let size = cells * slots;
    DMatrix::from_fn(size, size, |i, j| {
        let (n, k) = (i / slots, i % slots);
        let (m, l) = (j / slots, j % slots);
        column[((n + cells - m) % cells) * slots + (k + slots - l) % slots]
    })
}

/// Closed-form element counts written out per case.
pub fn formula_count(case: LayoutCase, n: usize, k: usize, m: Option<usize>) -> usize {
    match case {
        LayoutCase::NoSharing => n * k,
        LayoutCase::OneShared => n * (k - 1),
        LayoutCase::TwoShared => n * (k - 2),
        LayoutCase::Chain => n * (k - m.unwrap()),
        LayoutCase::CenterShared => n * (k - 2) + 1,
    }
}

/// Every spec over `N in 1..=8, K in 3..=12` (chain lengths 2..N-1) that the
/// library agrees to build.
pub fn buildable_specs(max_streams: usize) -> Vec<LayoutSpec> {
    let mut out = Vec::new();
    for case in LayoutCase::ALL {
        for n in 1..=8 {
            for k in 3..=12 {
                if n * k > max_streams {
                    continue;
                }
                let chains: Vec<Option<usize>> = if case == LayoutCase::Chain {
                    (2..n).map(Some).collect()
                } else {
                    vec![None]
                };
                for m in chains {
                    let mut spec = LayoutSpec::new(case, n, k, 1.0);
                    spec.chain = m;
                    if build_layout(&spec).is_ok() {
                        out.push(spec);
                    }
                }
            }
        }
    }
    out
}

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / 2f64.sqrt())
}

/// Greedy nearest matching of two multisets; largest mismatch relative to
/// the largest magnitude.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst / scale
}

pub fn frobenius_off_diagonal_ratio(g: &DMatrix<Complex64>) -> f64 {
    let total: f64 = g.iter().map(|z| z.norm_sqr()).sum();
    let mut off = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            if i != j {
                off += g[(i, j)].norm_sqr();
            }
        }
    }
    off / total
}
