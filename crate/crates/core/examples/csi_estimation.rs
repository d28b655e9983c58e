//! Estimate a block circulant channel from one pilot and see how the error tracks SNR.

use qfuca::channel::{build_physical_channel, estimate_bccb_csi, idealize_bccb, lift_to_logical, LinkConfig};
use qfuca::geometry::{build_layout, LayoutCase, LayoutSpec};
use qfuca::rng::{complex_gaussian, substream};

fn main() -> qfuca::Result<()> {
    let spec = LayoutSpec::new(LayoutCase::CenterShared, 4, 8, 1.0);
    let layout = build_layout(&spec)?;
    let h = idealize_bccb(&lift_to_logical(&build_physical_channel(&layout, &layout, &LinkConfig::default())?)?);
    // response to an impulse in slot (0, 0)
    let pilot = h.first_column();
    let signal = pilot.iter().map(|v| v.norm_sqr()).sum::<f64>() / pilot.len() as f64;
    println!("{:>8} {:>12}", "snr dB", "rel error");
    for snr_db in [0.0, 10.0, 20.0, 30.0, 40.0] {
        let noise = signal / 10f64.powf(snr_db / 10.0);
        let mut rng = substream(3, snr_db as u64);
        let noisy: Vec<_> = pilot.iter().map(|v| v + complex_gaussian(&mut rng, noise)).collect();
        let est = estimate_bccb_csi(&noisy, spec.cells, spec.slots)?;
        let err = (est.matrix() - h.matrix()).norm() / h.matrix().norm();
        println!("{snr_db:>8.0} {err:>12.3e}");
    }
    Ok(())
}
