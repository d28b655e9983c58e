mod common;

use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use qfuca::analysis::{EigenSpectrum, SpectrumSource};
use qfuca::channel::{build_physical_channel, idealize_bccb, lift_to_logical, LinkConfig, LogicalChannel};
use qfuca::detection::Constellation;
use qfuca::geometry::{build_layout, LayoutCase, LayoutSpec};
use qfuca::rng::{complex_gaussian, substream};
use qfuca::transceiver::{
    combine_to_elements, demodulate_2d, modulate_2d, power_scale, split_to_logical, Chain, NoiseMode, SymbolGrid,
    DEFAULT_EQ_TOLERANCE,
};
use rand::Rng;

fn random_grid(n: usize, k: usize, r: &mut impl Rng) -> SymbolGrid {
    SymbolGrid::new(n, k, (0..n * k).map(|_| random_complex(r)).collect()).unwrap()
}

proptest! {
    #[test]
    fn modulation_is_the_inverse_dft_oracle(n in 1usize..5, k in 1usize..7, seed in any::<u64>()) {
        let s = random_grid(n, k, &mut rng(seed));
        let x = modulate_2d(&s);
        let f = dft_matrix(n, k);
        let expect = f.adjoint() * nalgebra::DVector::from_column_slice(s.values());
        for (a, b) in x.iter().zip(expect.iter()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        let energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((energy - s.energy()).abs() <= 1e-12 * s.energy());
    }

    #[test]
    fn demodulation_inverts_modulation(n in 1usize..5, k in 1usize..7, seed in any::<u64>()) {
        let s = random_grid(n, k, &mut rng(seed));
        let unit = EigenSpectrum::new(vec![c(1.0, 0.0); n * k], n, k, SpectrumSource::Fft).unwrap();
        let out = demodulate_2d(&modulate_2d(&s), &unit, DEFAULT_EQ_TOLERANCE).unwrap();
        for (a, b) in out.grid.values().iter().zip(s.values()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn radiated_power_averages_to_total_power() {
    let qpsk = Constellation::psk(4).unwrap();
    for spec in [
        LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0),
        LayoutSpec::new(LayoutCase::OneShared, 4, 8, 1.0),
        LayoutSpec::single_loop(9, 1.0),
    ] {
        let layout = build_layout(&spec).unwrap();
        let mut r = rng(3);
        let total = 2.5;
        let draws = 100_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            let values = (0..spec.streams()).map(|_| qpsk.point(r.random_range(0..4))).collect();
            let s = SymbolGrid::new(spec.cells, spec.slots, values).unwrap();
            sum += combine_to_elements(&modulate_2d(&s), &layout, total).unwrap().power();
        }
        let mean = sum / draws as f64;
        assert!((mean / total - 1.0).abs() < 0.01, "{}: {mean}", spec.case);
    }
    assert_eq!(power_scale(16.0, 16), 1.0);
}

#[test]
fn complex_noise_has_the_requested_variance() {
    let mut r = substream(5, 0);
    let variance = 0.7;
    let draws = 1_000_000;
    let (mut re2, mut im2, mut mean) = (0.0, 0.0, c(0.0, 0.0));
    for _ in 0..draws {
        let z = complex_gaussian(&mut r, variance);
        re2 += z.re * z.re;
        im2 += z.im * z.im;
        mean += z;
    }
    let total = (re2 + im2) / draws as f64;
    assert!((total / variance - 1.0).abs() < 0.01, "{total}");
    assert!((re2 / im2 - 1.0).abs() < 0.01);
    assert!((mean / draws as f64).norm() < 0.005);
}

#[test]
fn substreams_are_independent_of_order() {
    let a: Vec<u64> = (0..4).map(|_| substream(9, 3).random()).collect();
    let mut s = substream(9, 3);
    let b: Vec<u64> = (0..4).map(|_| s.random()).collect();
    assert_eq!(a[0], b[0]);
    assert_ne!(substream(9, 3).random::<u64>(), substream(9, 4).random::<u64>());
}

#[test]
fn physical_chain_recovers_grids_on_a_circulant_link() {
    // single loops are exactly circulant
    let layout = build_layout(&LayoutSpec::single_loop(8, 1.0)).unwrap();
    let phys = build_physical_channel(&layout, &layout, &LinkConfig::default()).unwrap();
    let chain = Chain::physical(phys.normalized(1e-3), 1.0).unwrap();
    let mut r = rng(12);
    for _ in 0..100 {
        let s = random_grid(1, 8, &mut r);
        let rx = chain.transmit(&s, NoiseMode::Physical, 0.0, &mut r).unwrap();
        let out = chain.demodulate(&rx).unwrap();
        let scale = s.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (i, &on) in out.active.iter().enumerate() {
            assert!(on);
            assert!((out.grid.values()[i] - s.values()[i]).norm() < 1e-10 * scale);
        }
    }
}

#[test]
fn logical_chain_recovers_grids_on_idealized_links() {
    for spec in buildable_specs(32) {
        let layout = build_layout(&spec).unwrap();
        let phys = build_physical_channel(&layout, &layout, &LinkConfig::default()).unwrap();
        let ideal = idealize_bccb(&lift_to_logical(&phys).unwrap());
        let chain = Chain::logical(ideal, 3.0, None).unwrap();
        let mut r = rng(spec.streams() as u64);
        for _ in 0..20 {
            let s = random_grid(spec.cells, spec.slots, &mut r);
            let out = chain.demodulate(&chain.transmit(&s, NoiseMode::Logical, 0.0, &mut r).unwrap()).unwrap();
            let scale = s.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (i, &on) in out.active.iter().enumerate() {
                if on {
                    assert!((out.grid.values()[i] - s.values()[i]).norm() < 1e-10 * scale);
                }
            }
        }
    }
}

#[test]
fn physical_noise_is_shared_across_split_slots() {
    let layout = build_layout(&LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0)).unwrap();
    let chain = Chain::logical(LogicalChannel::identity(4, 4), 1.0, Some(layout.clone())).unwrap();
    let zero = SymbolGrid::zeros(4, 4);
    let map = layout.slot_map();
    let shared = |r: &[Complex64]| {
        (0..16).all(|a| (0..16).all(|b| map[a] != map[b] || r[a] == r[b]))
    };
    let physical = chain.transmit(&zero, NoiseMode::Physical, 1.0, &mut rng(1)).unwrap();
    assert!(shared(&physical));
    let logical = chain.transmit(&zero, NoiseMode::Logical, 1.0, &mut rng(1)).unwrap();
    assert!(!shared(&logical));
    let no_layout = Chain::logical(LogicalChannel::identity(4, 4), 1.0, None).unwrap();
    assert!(no_layout.transmit(&zero, NoiseMode::Physical, 1.0, &mut rng(1)).is_err());
}

#[test]
fn splitter_and_combiner_are_adjoint() {
    let layout = build_layout(&LayoutSpec::new(LayoutCase::TwoShared, 4, 8, 1.0)).unwrap();
    let mut r = rng(2);
    let x: Vec<Complex64> = (0..32).map(|_| random_complex(&mut r)).collect();
    let y: Vec<Complex64> = (0..layout.element_count()).map(|_| random_complex(&mut r)).collect();
    let t = combine_to_elements(&x, &layout, 32.0).unwrap();
    let lhs: Complex64 = t.samples.iter().zip(&y).map(|(a, b)| a * b.conj()).sum();
    let rhs: Complex64 = x.iter().zip(split_to_logical(&y, &layout).unwrap()).map(|(a, b)| a * b.conj()).sum();
    assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
}

#[test]
fn frame_csv_has_slot_coordinates() {
    let s = SymbolGrid::impulse(2, 3, 1, 2);
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("n,k,re,im\n"));
    assert!(text.contains("1,2,1,0\n"));
}
