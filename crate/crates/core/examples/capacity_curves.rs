//! Spectral efficiency of a QF-UCA against single-loop UCAs under both power policies.

use qfuca::analysis::{capacity_curve, eigen_spectrum, PowerPolicy};
use qfuca::channel::{build_physical_channel, freespace_gain, idealize_bccb, lift_to_logical, LinkConfig};
use qfuca::geometry::{build_layout, LayoutCase, LayoutSpec};

fn main() -> qfuca::Result<()> {
    let link = LinkConfig::default();
    let snr: Vec<f64> = (0..=6).map(|i| 5.0 * i as f64).collect();
    let path = freespace_gain(link.link_distance, link.wavelength())?.norm();
    let arrays = [
        ("UCA 9", LayoutSpec::single_loop(9, 2.0)),
        ("UCA 16", LayoutSpec::single_loop(16, 2.0)),
        ("QF-UCA 9 (4x4)", LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0)),
        ("QF-UCA 25 (4x8)", LayoutSpec::new(LayoutCase::CenterShared, 4, 8, 1.0)),
    ];
    print!("{:<18}", "bits/s/Hz");
    snr.iter().for_each(|s| print!("{s:>8.0}"));
    println!();
    for (name, spec) in arrays {
        let layout = build_layout(&spec)?;
        let phys = build_physical_channel(&layout, &layout, &link)?.normalized(path);
        let spectrum = eigen_spectrum(&idealize_bccb(&lift_to_logical(&phys)?))?;
        let curve = capacity_curve(&spectrum, &snr, PowerPolicy::EqualPower, link.bandwidth);
        for (tag, policy) in [("EP", PowerPolicy::EqualPower), ("WF", PowerPolicy::WaterFilling)] {
            print!("{:<18}", format!("{name} {tag}"));
            curve.efficiency(policy).iter().for_each(|c| print!("{c:>8.2}"));
            println!();
        }
    }
    Ok(())
}
