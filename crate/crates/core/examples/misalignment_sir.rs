//! Per-stream SIR of the exact channel as the receiver rotates or slides off axis.

use qfuca::analysis::stream_sir;
use qfuca::channel::{build_physical_channel, lift_to_logical, LinkConfig};
use qfuca::geometry::{build_layout, transform_layout, LayoutCase, LayoutSpec, RigidTransform};

fn main() -> qfuca::Result<()> {
    let link = LinkConfig::default();
    let tx = build_layout(&LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0))?;
    let poses = [
        ("aligned", RigidTransform::default()),
        ("rotate 0.5 deg", RigidTransform::rotation(0.5f64.to_radians())),
        ("rotate 5 deg", RigidTransform::rotation(5f64.to_radians())),
        ("shift 5 cm", RigidTransform::lateral(0.05, 0.0)),
        ("shift 50 cm", RigidTransform::lateral(0.5, 0.0)),
    ];
    println!("{:<16} {:>10} {:>10} {:>10}", "pose", "mean dB", "min dB", "no signal");
    for (name, pose) in poses {
        let rx = transform_layout(&tx, &pose);
        let report = stream_sir(&lift_to_logical(&build_physical_channel(&tx, &rx, &link)?)?);
        let values: Vec<f64> = report.streams.iter().filter_map(|s| s.sir_db).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = report.mean_sir_db.map_or("-".into(), |m| format!("{m:.2}"));
        println!(
            "{name:<16} {mean:>10} {min:>10.2} {:>10}",
            report.streams.len() - values.len()
        );
    }
    Ok(())
}
