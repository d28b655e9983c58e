//! Build each sharing pattern, print its element budget and validation, and dump one layout.

use qfuca::geometry::{build_layout, element_count, shared_between, validate_layout, LayoutCase, LayoutSpec};

fn main() -> qfuca::Result<()> {
    println!("{:<14} {:>2} {:>2} {:>8} {:>8}  status", "case", "N", "K", "streams", "elements");
    for case in LayoutCase::ALL {
        let mut spec = LayoutSpec::new(case, 4, 8, 1.0);
        if case == LayoutCase::Chain {
            spec = spec.with_chain(2);
        }
        let status = match build_layout(&spec) {
            Ok(layout) => {
                let report = validate_layout(&layout);
                format!(
                    "valid={} shared(0,1)={}",
                    report.passed(),
                    shared_between(&layout, 0, 1)
                )
            }
            Err(e) => e.to_string(),
        };
        println!(
            "{:<14} {:>2} {:>2} {:>8} {:>8}  {status}",
            format!("{case:?}"),
            spec.cells,
            spec.slots,
            spec.streams(),
            element_count(&spec)?
        );
    }

    let layout = build_layout(&LayoutSpec::new(LayoutCase::CenterShared, 4, 4, 1.0))?;
    println!("\ncase 5, N=4, K=4:");
    layout.write_csv(std::io::stdout())?;
    Ok(())
}
