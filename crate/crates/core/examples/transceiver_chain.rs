//! Send QPSK frames through the physical chain: modulate, combine, propagate, split, demodulate.
//! A single loop is exactly circulant; the shared-element QF-UCA leaves residual interference.

use qfuca::channel::{build_physical_channel, freespace_gain, LinkConfig};
use qfuca::detection::{detect_symbolwise, Constellation};
use qfuca::geometry::{build_layout, LayoutCase, LayoutSpec};
use qfuca::rng::substream;
use qfuca::transceiver::{Chain, NoiseMode, SymbolGrid};

fn main() -> qfuca::Result<()> {
    let link = LinkConfig::default();
    let path = freespace_gain(link.link_distance, link.wavelength())?.norm();
    let qpsk = Constellation::psk(4)?;
    for spec in [LayoutSpec::single_loop(16, 2.0), LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0)] {
        let layout = build_layout(&spec)?;
        let phys = build_physical_channel(&layout, &layout, &link)?.normalized(path);
        let chain = Chain::physical(phys, 1.0)?;
        let mut rng = substream(7, 0);
        println!("case {} N={} K={}: {} active streams", spec.case.id(), spec.cells, spec.slots, chain.streams());
        for snr_db in [40.0, 20.0, 10.0] {
            let noise = 10f64.powf(-snr_db / 10.0);
            let mut wrong = 0;
            for frame in 0..100 {
                let sent: Vec<usize> = (0..spec.streams()).map(|i| (i * 3 + frame) % 4).collect();
                let grid = SymbolGrid::new(spec.cells, spec.slots, sent.iter().map(|&i| qpsk.point(i)).collect())?;
                let out = chain.demodulate(&chain.transmit(&grid, NoiseMode::Physical, noise, &mut rng)?)?;
                let decided = detect_symbolwise(&out, &qpsk);
                wrong += decided.indices.iter().zip(&sent).filter(|(d, s)| d.is_some_and(|d| d != **s)).count();
            }
            println!("  snr {snr_db:>4} dB: {wrong} symbol errors in {}", 100 * spec.streams());
        }
    }
    Ok(())
}
