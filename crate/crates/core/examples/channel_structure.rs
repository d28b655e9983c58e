//! How close the exact logical channel is to block circulant, and what idealizing does to its rank.

use qfuca::channel::{bccb_deviation, build_physical_channel, idealize_bccb, lift_to_logical, LinkConfig, RANK_TOLERANCE};
use qfuca::geometry::{build_layout, LayoutCase, LayoutSpec};

fn main() -> qfuca::Result<()> {
    let specs = [
        LayoutSpec::single_loop(16, 1.0),
        LayoutSpec::new(LayoutCase::NoSharing, 4, 4, 1.0),
        LayoutSpec::new(LayoutCase::TwoShared, 4, 8, 1.0),
        LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0),
        LayoutSpec::new(LayoutCase::CenterShared, 4, 8, 1.0),
    ];
    println!("{:<26} {:>4} {:>9} {:>10} {:>10}", "layout", "U", "deviation", "exact rank", "ideal rank");
    for spec in specs {
        let layout = build_layout(&spec)?;
        let mut row = Vec::new();
        for d in [50.0, 500.0] {
            let link = LinkConfig { link_distance: d, ..LinkConfig::default() };
            let logical = lift_to_logical(&build_physical_channel(&layout, &layout, &link)?)?;
            row.push((
                bccb_deviation(&logical)?,
                logical.rank(RANK_TOLERANCE),
                idealize_bccb(&logical).rank(RANK_TOLERANCE),
            ));
        }
        for (d, (dev, exact, ideal)) in [50, 500].iter().zip(row) {
            println!(
                "{:<26} {:>4} {dev:>9.2e} {exact:>10} {ideal:>10}",
                format!("case {} N={} K={} D={d}m", spec.case.id(), spec.cells, spec.slots),
                layout.element_count()
            );
        }
    }
    Ok(())
}
