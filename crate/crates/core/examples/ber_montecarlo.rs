//! Seeded Monte-Carlo BER for 8-PSK on an idealized QF-UCA link.

use qfuca::detection::{run_ber, BerRun, BerScenario, DetectionScheme};
use qfuca::geometry::{LayoutCase, LayoutSpec};
use qfuca::transceiver::NoiseMode;

fn main() -> qfuca::Result<()> {
    let run = BerRun {
        alphabet: 8,
        noise_mode: NoiseMode::Physical,
        snr_db: (0..=6).map(|i| 4.0 * i as f64).collect(),
        trials: 2000,
        seed: 1,
        scheme: DetectionScheme::SymbolwiseMl,
    };
    let scenario = BerScenario::new(LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0), run);
    let curve = run_ber(&scenario)?;
    println!("{} active streams", curve.active_streams);
    curve.write_csv(std::io::stdout())?;
    Ok(())
}
