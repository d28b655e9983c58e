//! Exact detection operation counts for QF-UCA, UCA and ULA receivers.

use qfuca::analysis::ComplexityComparison;

fn main() -> qfuca::Result<()> {
    for (n, k, v) in [(4, 4, 4), (4, 8, 8)] {
        let c = ComplexityComparison::new(n, k, v)?;
        println!("N={n} K={k} V={v}");
        for r in [&c.qfuca, &c.uca, &c.ula] {
            println!(
                "  {:<6} additions 10^{:<7.2} multiplications 10^{:.2}",
                format!("{:?}", r.architecture),
                r.log10_additions,
                r.log10_multiplications
            );
        }
        println!(
            "  ULA / QF-UCA: additions {:.3e}, multiplications {:.3e}",
            c.ula_over_qfuca_additions, c.ula_over_qfuca_multiplications
        );
        for note in &c.notes {
            println!("  {note}");
        }
    }
    Ok(())
}
