//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are reported but do not fail the run;
//! pass `--strict` to make them count.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use qfuca::analysis::{
    effective_rank, eigen_spectrum, eigen_spectrum_dense, stream_sir, ComplexityComparison, SIR_CAP_DB,
};
use qfuca::channel::{
    build_physical_channel, estimate_bccb_csi, idealize_bccb, lift_to_logical, matrix_rank, LinkConfig,
    LogicalChannel, Provenance,
};
use qfuca::detection::{detect_joint_ml, detect_symbolwise, simulate_ber, BerRun, Constellation, DetectionScheme};
use qfuca::geometry::{build_layout, element_count, transform_layout, LayoutCase, LayoutSpec, RigidTransform};
use qfuca::rng::complex_gaussian;
use qfuca::transceiver::{modulate_2d, Chain, NoiseMode, SymbolGrid};
use rand::Rng;

const KNOWN_RED: &[u8] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(limit: Duration, start: Instant) -> bool {
    start.elapsed() < limit
}

fn link() -> LinkConfig {
    LinkConfig::default()
}

fn exact_lift(spec: &LayoutSpec, rx: &RigidTransform) -> LogicalChannel {
    let tx = build_layout(spec).unwrap();
    let placed = transform_layout(&tx, rx);
    lift_to_logical(&build_physical_channel(&tx, &placed, &link()).unwrap()).unwrap()
}

fn idealized(spec: &LayoutSpec) -> LogicalChannel {
    idealize_bccb(&exact_lift(spec, &RigidTransform::identity()))
}

fn fig3_specs() -> Vec<LayoutSpec> {
    vec![
        LayoutSpec::single_loop(4, 1.0),
        LayoutSpec::new(LayoutCase::NoSharing, 2, 4, 1.0),
        LayoutSpec::new(LayoutCase::OneShared, 4, 4, 1.0),
        LayoutSpec::new(LayoutCase::TwoShared, 4, 8, 1.0),
        LayoutSpec::new(LayoutCase::Chain, 4, 8, 1.0).with_chain(2),
        LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0),
        LayoutSpec::new(LayoutCase::CenterShared, 4, 8, 1.0),
    ]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut built = 0;
    let mut bad = Vec::new();
    for case in LayoutCase::ALL.into_iter().skip(1) {
        for n in 2..=8 {
            for k in 3..=12 {
                let chains: Vec<Option<usize>> = if case == LayoutCase::Chain {
                    (2..n).filter(|&m| m < k).map(Some).collect()
                } else {
                    vec![None]
                };
                for m in chains {
                    let mut spec = LayoutSpec::new(case, n, k, 1.0);
                    spec.chain = m;
                    let expected = formula_count(case, n, k, m);
                    checked += 1;
                    if element_count(&spec).ok() != Some(expected) {
                        bad.push(format!("{case} N={n} K={k} formula"));
                    }
                    if let Ok(layout) = build_layout(&spec) {
                        built += 1;
                        if layout.element_count() != expected {
                            bad.push(format!("{case} N={n} K={k} built {}", layout.element_count()));
                        }
                    }
                }
            }
        }
    }
    let pass = bad.is_empty() && within(Duration::from_secs(10), start);
    outcome(
        pass,
        format!("{checked} specs, {built} buildable, mismatches {bad:?}, {:.2?}", start.elapsed()),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (k, u, s) in [(4, 9, 16), (8, 25, 32)] {
        let layout = build_layout(&LayoutSpec::new(LayoutCase::CenterShared, 4, k, 1.0)).unwrap();
        pass &= layout.element_count() == u && layout.streams() == s;
        parts.push(format!("N=4 K={k}: U={} streams={}", layout.element_count(), layout.streams()));
    }
    pass &= within(Duration::from_secs(1), start);
    outcome(pass, format!("{}, {:.2?}", parts.join("; "), start.elapsed()))
}

fn criterion_3() -> Outcome {
    let specs: Vec<LayoutSpec> = buildable_specs(usize::MAX)
        .into_iter()
        .filter(|s| s.case == LayoutCase::TwoShared)
        .collect();
    let bad: Vec<String> = specs
        .iter()
        .filter(|s| s.streams() - build_layout(s).unwrap().element_count() != 2 * s.cells)
        .map(|s| format!("N={} K={}", s.cells, s.slots))
        .collect();
    outcome(
        bad.is_empty() && !specs.is_empty(),
        format!("{} case-3 layouts, NK - U = 2N violated by {bad:?}", specs.len()),
    )
}

fn criterion_4() -> Outcome {
    let specs = buildable_specs(64);
    let mut worst_off: f64 = 0.0;
    for spec in &specs {
        let h = idealized(spec);
        let f = dft_matrix(spec.cells, spec.slots);
        let g = &f * h.matrix() * f.adjoint();
        worst_off = worst_off.max(frobenius_off_diagonal_ratio(&g));
    }
    let mut r = rng(4);
    let mut worst_eig: f64 = 0.0;
    let shapes = [(1, 3), (1, 8), (2, 3), (2, 4), (3, 4), (4, 4), (2, 8), (3, 5), (4, 8), (8, 8)];
    let mut instances = 0;
    for _ in 0..2 {
        for &(n, k) in &shapes {
            let column: Vec<Complex64> = (0..n * k).map(|_| random_complex(&mut r)).collect();
            let ch = LogicalChannel::new(bccb(&column, n, k), n, k, Provenance::IdealizedBccb).unwrap();
            let fft = eigen_spectrum(&ch).unwrap();
            let dense = eigen_spectrum_dense(&ch).unwrap();
            worst_eig = worst_eig.max(multiset_distance(fft.values(), dense.values()));
            instances += 1;
        }
    }
    outcome(
        worst_off < 1e-10 && worst_eig < 1e-9 && instances >= 20,
        format!(
            "{} idealized layouts, max off-diagonal energy {worst_off:.2e}; {instances} random BCCB, max fft/dense gap {worst_eig:.2e}",
            specs.len()
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut over = Vec::new();
    let sharing: Vec<LayoutSpec> = buildable_specs(64)
        .into_iter()
        .filter(|s| s.case != LayoutCase::NoSharing)
        .collect();
    for spec in &sharing {
        let u = build_layout(spec).unwrap().element_count();
        let rank = effective_rank(&eigen_spectrum(&idealized(spec)).unwrap(), 1e-10).unwrap();
        if rank > u {
            over.push(format!("{} N={} K={}: rank {rank} > U {u}", spec.case, spec.cells, spec.slots));
        }
    }
    let spec = LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0);
    let spectrum = eigen_spectrum(&idealized(&spec)).unwrap();
    let max = spectrum.max_magnitude();
    let small = spectrum.values().iter().filter(|v| v.norm() < 1e-10 * max).count();
    let min_ratio = spectrum.values().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min) / max;
    let exact_rank = matrix_rank(exact_lift(&spec, &RigidTransform::identity()).matrix(), 1e-10);
    outcome(
        over.is_empty() && small >= 7,
        format!(
            "{} of {} sharing layouts exceed U (first: {:?}); case-5 N=4 K=4 idealized spectrum has {small}/16 \
             eigenvalues below 1e-10 max (min |lambda|/max = {min_ratio:.3}); exact-lift rank {exact_rank} <= U=9; \
             orthogonal-stream claim: 16 streams from 9 elements",
            over.len(),
            sharing.len(),
            over.first()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    let mut parseval: f64 = 0.0;
    for spec in fig3_specs() {
        let chain = Chain::logical(idealized(&spec), 1.0, None).unwrap();
        for _ in 0..100 {
            let values: Vec<Complex64> = (0..spec.streams()).map(|_| random_complex(&mut r)).collect();
            let s = SymbolGrid::new(spec.cells, spec.slots, values).unwrap();
            let x = modulate_2d(&s);
            let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            parseval = parseval.max((ex - s.energy()).abs() / s.energy());
            let rx = chain.transmit(&s, NoiseMode::Logical, 0.0, &mut r).unwrap();
            let out = chain.demodulate(&rx).unwrap();
            let scale = s.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (i, &on) in out.active.iter().enumerate() {
                if on {
                    worst = worst.max((out.grid.values()[i] - s.values()[i]).norm() / scale);
                }
            }
        }
    }
    outcome(
        worst < 1e-10 && parseval < 1e-12,
        format!("7 layouts x 100 grids: max relative recovery error {worst:.2e}, Parseval {parseval:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0;
    for (n, k) in [(1, 2), (1, 4), (2, 2), (2, 4), (4, 4), (2, 8)] {
        for v in [2u128, 4, 8] {
            let s = (n * k) as u128;
            let log = s.trailing_zeros() as u128;
            let report = ComplexityComparison::new(n, k, v as usize).unwrap();
            let qf_add = s * log + s * v;
            let qf_mul = s * log / 2 + s * (v + 1);
            let ula_add = s * s * v.pow(s as u32);
            let ula_mul = s * s + s * v.pow(s as u32);
            let got = |b: &num_bigint::BigUint| b.to_string();
            if got(&report.qfuca.additions) != qf_add.to_string()
                || got(&report.qfuca.multiplications) != qf_mul.to_string()
                || got(&report.ula.additions) != ula_add.to_string()
                || got(&report.ula.multiplications) != ula_mul.to_string()
            {
                mismatches += 1;
            }
        }
    }
    let report = ComplexityComparison::new(4, 8, 8).unwrap();
    let ula_add: u128 = 1 << 106;
    let ula_mul: u128 = (1 << 101) + 1024;
    let exact = report.qfuca.additions.to_string() == "416"
        && report.qfuca.multiplications.to_string() == "368"
        && report.ula.additions.to_string() == ula_add.to_string()
        && report.ula.multiplications.to_string() == ula_mul.to_string();
    let ratio = report.ula_over_qfuca_additions;
    let flagged = report
        .notes
        .iter()
        .any(|n| n.starts_with("FLAG") && n.contains("multiplication") && n.contains("1.890e27"));
    let pass = mismatches == 0 && exact && (ratio / 1.95e29 - 1.0).abs() < 0.01 && flagged && within(Duration::from_secs(1), start);
    outcome(
        pass,
        format!(
            "closed-form mismatches {mismatches}; (4,8,8) addition ratio {ratio:.4e}, multiplication ratio {:.3e} flagged: {flagged}, {:.2?}",
            report.ula_over_qfuca_multiplications,
            start.elapsed()
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let (n, k) = (2, 2);
    let lambdas = [c(1.0, 0.2), c(-0.7, 0.5), c(0.3, -0.9), c(1.2, 0.1)];
    let f = dft_matrix(n, k);
    let h = f.adjoint() * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&lambdas)) * &f;
    let g = &f * &h * f.adjoint();
    let diagonal = frobenius_off_diagonal_ratio(&g) < 1e-28;
    let ch = LogicalChannel::new(h, n, k, Provenance::IdealizedBccb).unwrap();
    // total power NK makes the combiner amplitude 1
    let chain = Chain::logical(ch.clone(), 4.0, None).unwrap();
    let bpsk = Constellation::psk(2).unwrap();
    let grid = |idx: usize| {
        let values = (0..4).map(|b| bpsk.point((idx >> (3 - b)) & 1)).collect();
        SymbolGrid::new(n, k, values).unwrap()
    };
    let mut r = rng(8);
    let mut disagreements = 0;
    let mut sweep = 0;
    for tx in 0..16 {
        let clean = chain.transmit(&grid(tx), NoiseMode::Logical, 0.0, &mut r).unwrap();
        for probe in 0..16 {
            let offset = ch.apply(&modulate_2d(&grid(probe))).unwrap();
            let rv: Vec<Complex64> = clean.iter().zip(&offset).map(|(a, b)| a + 0.45 * b).collect();
            let sw = detect_symbolwise(&chain.demodulate(&rv).unwrap(), &bpsk);
            let ml = detect_joint_ml(&ch, &rv, &bpsk).unwrap();
            disagreements += (sw != ml) as usize;
            sweep += 1;
        }
    }
    for _ in 0..10_000 {
        let tx = r.random_range(0..16);
        let rv = chain.transmit(&grid(tx), NoiseMode::Logical, 1.0, &mut r).unwrap();
        let sw = detect_symbolwise(&chain.demodulate(&rv).unwrap(), &bpsk);
        let ml = detect_joint_ml(&ch, &rv, &bpsk).unwrap();
        disagreements += (sw != ml) as usize;
    }

    let unit = Chain::logical(LogicalChannel::identity(1, 1), 1.0, None).unwrap();
    let run = BerRun {
        alphabet: 2,
        noise_mode: NoiseMode::Logical,
        snr_db: vec![2.0, 4.0, 6.0],
        trials: 1_000_000,
        seed: 8,
        scheme: DetectionScheme::SymbolwiseMl,
    };
    let curve = simulate_ber(&unit, &run).unwrap();
    let mut ber_ok = true;
    let mut parts = Vec::new();
    for p in &curve.points {
        let gamma = 10f64.powf(p.snr_db / 10.0);
        let theory = q_function((2.0 * gamma).sqrt());
        let sigma = (theory * (1.0 - theory) / p.bits_sent as f64).sqrt();
        let ber = p.ber.unwrap();
        ber_ok &= (ber - theory).abs() <= 3.0 * sigma;
        parts.push(format!("{} dB {ber:.5} vs {theory:.5} ({:.1} sigma)", p.snr_db, (ber - theory) / sigma));
    }
    let pass = diagonal && disagreements == 0 && ber_ok && within(Duration::from_secs(300), start);
    outcome(
        pass,
        format!(
            "{sweep} sweep vectors + 1e4 noisy trials, {disagreements} symbolwise/joint-ML disagreements; BPSK {}, {:.2?}",
            parts.join(", "),
            start.elapsed()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut noiseless: f64 = 0.0;
    let mut monotone = true;
    let mut curves = Vec::new();
    for spec in fig3_specs() {
        let h = idealized(&spec);
        let size = spec.streams();
        let mut impulse = vec![c(0.0, 0.0); size];
        impulse[0] = c(1.0, 0.0);
        let pilot = h.apply(&impulse).unwrap();
        let est = estimate_bccb_csi(&pilot, spec.cells, spec.slots).unwrap();
        noiseless = noiseless.max((est.matrix() - h.matrix()).norm() / h.matrix().norm());

        let signal = pilot.iter().map(|v| v.norm_sqr()).sum::<f64>() / size as f64;
        let mut errors = Vec::new();
        for snr_db in [20.0, 25.0, 30.0, 35.0, 40.0] {
            let noise = signal / 10f64.powf(snr_db / 10.0);
            let mut total = 0.0;
            for seed in 0..100 {
                let mut r = rng(9_000 + seed);
                let noisy: Vec<Complex64> = pilot.iter().map(|v| v + complex_gaussian(&mut r, noise)).collect();
                let est = estimate_bccb_csi(&noisy, spec.cells, spec.slots).unwrap();
                total += (est.matrix() - h.matrix()).norm() / h.matrix().norm();
            }
            errors.push(total / 100.0);
        }
        monotone &= errors.windows(2).all(|w| w[1] < w[0]);
        curves.push(format!("{:.1e}->{:.1e}", errors[0], errors[4]));
    }
    outcome(
        noiseless < 1e-12 && monotone,
        format!(
            "noiseless max error {noiseless:.1e}; mean error 20->40 dB per layout {}",
            curves.join(" ")
        ),
    )
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let header = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_qfuca"))
            .args(["figure3", "--seed", "11", "--output-dir"])
            .arg(d.path())
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("figure3 failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
    }
    let names = ["uca_9.csv", "uca_16.csv", "uca_25.csv", "uca_32.csv", "qfuca_9.csv", "qfuca_25.csv"];
    let mut pass = true;
    let mut parts = Vec::new();
    for name in names {
        let path = dirs[0].path().join(name);
        if !path.exists() {
            return outcome(false, format!("{name} missing"));
        }
        let (_, rows) = read_csv(&path);
        let ep: Vec<f64> = rows.iter().map(|r| r[1]).collect();
        let wf: Vec<f64> = rows.iter().map(|r| r[2]).collect();
        let increasing = ep.windows(2).all(|w| w[1] > w[0]) && wf.windows(2).all(|w| w[1] > w[0]);
        let dominates = ep.iter().zip(&wf).all(|(e, w)| w >= e);
        pass &= increasing && dominates && rows.len() == 16;
        parts.push(format!("{name} {:.1}->{:.1}", ep[0], ep[ep.len() - 1]));
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dirs[0].path().join("manifest.json")).unwrap()).unwrap();
    let fig = &manifest["config"]["figure3"];
    pass &= fig["carrier_frequency"] == 3e9 && fig["bandwidth"] == 1e6 && fig["policy"] == "equal_power";
    let mut identical = true;
    for name in names.iter().chain(&["manifest.json"]) {
        identical &= std::fs::read(dirs[0].path().join(name)).unwrap() == std::fs::read(dirs[1].path().join(name)).unwrap();
    }
    pass &= identical && within(Duration::from_secs(60), start);
    outcome(
        pass,
        format!(
            "six curves (bits/s/Hz, 0 -> 30 dB): {}; byte-identical reruns: {identical}, {:.2?}",
            parts.join(", "),
            start.elapsed()
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in [
        LayoutSpec::new(LayoutCase::NoSharing, 2, 4, 1.0),
        LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0),
    ] {
        let angle = 2.0 * std::f64::consts::PI / (4 * spec.streams()) as f64;
        let aligned = stream_sir(&exact_lift(&spec, &RigidTransform::identity())).mean_sir_db.unwrap();
        let rotated = stream_sir(&exact_lift(&spec, &RigidTransform::rotation(angle))).mean_sir_db.unwrap();
        pass &= rotated < SIR_CAP_DB;
        parts.push(format!(
            "{} N={} K={}: aligned {aligned:.3} dB, rotated {rotated:.3} dB",
            spec.case, spec.cells, spec.slots
        ));
    }
    let single = LayoutSpec::single_loop(4, 1.0);
    let rotated = stream_sir(&exact_lift(&single, &RigidTransform::rotation(std::f64::consts::PI / 8.0)))
        .mean_sir_db
        .unwrap();
    parts.push(format!("(info) single loop K=4 rotated: {rotated:.1} dB"));
    outcome(pass, format!("{} (cap {SIR_CAP_DB} dB)", parts.join("; ")))
}

type Criterion = (u8, &'static str, fn() -> Outcome);

fn main() {
    let strict = std::env::args().any(|a| a == "--strict");
    let criteria: [Criterion; 11] = [
        (1, "count formulas", criterion_1),
        (2, "figure configurations", criterion_2),
        (3, "2N more identity", criterion_3),
        (4, "diagonalization", criterion_4),
        (5, "rank bound", criterion_5),
        (6, "transceiver identity", criterion_6),
        (7, "complexity table", criterion_7),
        (8, "detection equivalence", criterion_8),
        (9, "CSI estimation", criterion_9),
        (10, "figure3 subcommand", criterion_10),
        (11, "misalignment SIR", criterion_11),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        let o = check();
        let known = KNOWN_RED.contains(&id);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} {tag}: {name}: {}", o.detail);
        if !o.pass && (strict || !known) {
            failed.push(id);
        }
        if o.pass && known {
            println!("criterion {id:>2} now passes; remove it from KNOWN_RED");
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: ok");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
