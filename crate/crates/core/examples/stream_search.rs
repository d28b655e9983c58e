//! Most streams for a given element budget across all sharing patterns.

use qfuca::analysis::{search_max_streams, SearchSpace};
use qfuca::geometry::LayoutCase;

fn main() -> qfuca::Result<()> {
    for budget in [9, 16, 25, 40] {
        let space = SearchSpace {
            element_budget: budget,
            cases: LayoutCase::ALL.to_vec(),
            cells: [1, 8],
            slots: [3, 16],
            inter_radius: 1.0,
        };
        let result = search_max_streams(&space)?;
        match result.best {
            Some(b) => println!(
                "budget {budget:>3}: case {} N={} K={} -> {} streams on {} elements ({} candidates)",
                b.case.id(),
                b.cells,
                b.slots,
                b.streams,
                b.elements,
                result.candidates.len()
            ),
            None => println!("budget {budget:>3}: nothing fits"),
        }
    }
    Ok(())
}
