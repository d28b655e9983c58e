use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_layout, element_count, LayoutCase, LayoutSpec};

/// Bounds of a maximum-stream layout search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpace {
    pub element_budget: usize,
    pub cases: Vec<LayoutCase>,
    /// Inclusive `[min, max]` range of `N`.
    pub cells: [usize; 2],
    /// Inclusive `[min, max]` range of `K`.
    pub slots: [usize; 2],
    #[serde(default = "default_radius")]
    pub inter_radius: f64,
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchCandidate {
    pub case: LayoutCase,
    pub cells: usize,
    pub slots: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<usize>,
    pub streams: usize,
    pub elements: usize,
}

impl SearchCandidate {
    fn rank_key(&self) -> (std::cmp::Reverse<usize>, usize, usize, LayoutCase, usize, Option<usize>) {
        (
            std::cmp::Reverse(self.streams),
            self.elements,
            self.cells,
            self.case,
            self.slots,
            self.chain,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutSearchResult {
    pub element_budget: usize,
    pub best: Option<SearchCandidate>,
    /// Every buildable candidate within budget, best first.
    pub candidates: Vec<SearchCandidate>,
}

fn enumerate(space: &SearchSpace) -> Vec<LayoutSpec> {
    let mut specs = Vec::new();
    for &case in &space.cases {
        for n in space.cells[0]..=space.cells[1] {
            for k in space.slots[0]..=space.slots[1] {
                let chains: Vec<Option<usize>> = if case == LayoutCase::Chain {
                    (2..n).map(Some).collect()
                } else {
                    vec![None]
                };
                for chain in chains {
                    let mut spec = LayoutSpec::new(case, n, k, space.inter_radius);
                    spec.chain = chain;
                    specs.push(spec);
                }
            }
        }
    }
    specs
}

/// Find the buildable layout with the most streams within the element
/// budget. Ties go to fewer elements, then fewer cells.
pub fn search_max_streams(space: &SearchSpace) -> Result<LayoutSearchResult> {
    if space.element_budget < 3 {
        return Err(Error::Domain(format!("element budget must be >= 3, got {}", space.element_budget)));
    }
    let mut candidates: Vec<SearchCandidate> = enumerate(space)
        .into_par_iter()
        .filter_map(|spec| {
            let elements = element_count(&spec).ok()?;
            if elements > space.element_budget {
                return None;
            }
            let layout = build_layout(&spec).ok()?;
            Some(SearchCandidate {
                case: spec.case,
                cells: spec.cells,
                slots: spec.slots,
                chain: spec.chain,
                streams: spec.streams(),
                elements: layout.element_count(),
            })
        })
        .collect();
    candidates.sort_by_key(|c| c.rank_key());
    Ok(LayoutSearchResult {
        element_budget: space.element_budget,
        best: candidates.first().cloned(),
        candidates,
    })
}
