//! Quasi-fractal UCA layouts.
//!
//! A layout is `N` inner UCAs ("cells") of `K` slots each, whose centers sit
//! on an inter-UCA of radius `R`. Cells may share physical elements; the
//! five sharing cases differ in the inner radius and in which slots of
//! neighbouring cells coincide.
//!
//! Coordinates: the array axis is `z`, the transverse plane is `xy`, and the
//! array center is the origin. Cell `n` is centered at azimuth
//! `phi_n = 2 pi n / N` and its slot `k` sits at azimuth
//! `delta0 + phi_n + 2 pi k / K` around that center, so rotating the whole
//! array by `2 pi / N` maps slot `(n, k)` onto slot `(n + 1, k)`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five sharing patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum LayoutCase {
    /// No element shared between cells.
    NoSharing,
    /// Adjacent cells touch in one shared element.
    OneShared,
    /// Adjacent cells intersect in two shared elements.
    TwoShared,
    /// Overlapping cells share chains of elements.
    Chain,
    /// Every cell passes through the array center, which all of them share.
    CenterShared,
}

impl LayoutCase {
    pub const ALL: [LayoutCase; 5] = [
        LayoutCase::NoSharing,
        LayoutCase::OneShared,
        LayoutCase::TwoShared,
        LayoutCase::Chain,
        LayoutCase::CenterShared,
    ];

    pub fn id(self) -> u8 {
        match self {
            LayoutCase::NoSharing => 1,
            LayoutCase::OneShared => 2,
            LayoutCase::TwoShared => 3,
            LayoutCase::Chain => 4,
            LayoutCase::CenterShared => 5,
        }
    }
}

impl TryFrom<u8> for LayoutCase {
    type Error = String;

    fn try_from(value: u8) -> std::result::Result<Self, Self::Error> {
        match value {
            1 => Ok(LayoutCase::NoSharing),
            2 => Ok(LayoutCase::OneShared),
            3 => Ok(LayoutCase::TwoShared),
            4 => Ok(LayoutCase::Chain),
            5 => Ok(LayoutCase::CenterShared),
            other => Err(format!("layout case must be 1..=5, got {other}")),
        }
    }
}

impl From<LayoutCase> for u8 {
    fn from(case: LayoutCase) -> u8 {
        case.id()
    }
}

impl fmt::Display for LayoutCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.id())
    }
}

/// Parameters of a QF-UCA layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub case: LayoutCase,
    /// Number of inner-UCA cells, `N`.
    pub cells: usize,
    /// Slots per cell, `K`.
    pub slots: usize,
    /// Cells sharing a chain of elements, `M` (case 4 only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<usize>,
    /// Inter-UCA radius `R` in meters. For a single cell this is the UCA radius.
    pub inter_radius: f64,
    /// Inner radius override in meters (case 1 only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_radius: Option<f64>,
    /// Coincidence tolerance in meters; defaults to `1e-9 * inter_radius`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dedup_tolerance: Option<f64>,
}

impl LayoutSpec {
    pub fn new(case: LayoutCase, cells: usize, slots: usize, inter_radius: f64) -> Self {
        LayoutSpec {
            case,
            cells,
            slots,
            chain: None,
            inter_radius,
            inner_radius: None,
            dedup_tolerance: None,
        }
    }

    /// Single-loop UCA of `elements` elements and the given radius.
    pub fn single_loop(elements: usize, radius: f64) -> Self {
        LayoutSpec::new(LayoutCase::NoSharing, 1, elements, radius)
    }

    pub fn with_chain(mut self, chain: usize) -> Self {
        self.chain = Some(chain);
        self
    }

    pub fn with_inner_radius(mut self, radius: f64) -> Self {
        self.inner_radius = Some(radius);
        self
    }

    pub fn with_dedup_tolerance(mut self, tolerance: f64) -> Self {
        self.dedup_tolerance = Some(tolerance);
        self
    }

    /// Logical stream slots, `N * K`.
    pub fn streams(&self) -> usize {
        self.cells * self.slots
    }

    pub fn tolerance(&self) -> f64 {
        self.dedup_tolerance.unwrap_or(1e-9 * self.inter_radius)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if !(self.inter_radius.is_finite() && self.inter_radius > 0.0) {
            return bad(format!("inter_radius must be positive, got {}", self.inter_radius));
        }
        if self.slots < 3 {
            return bad(format!("slots K must be >= 3, got {}", self.slots));
        }
        let min_cells = if self.case == LayoutCase::NoSharing { 1 } else { 2 };
        if self.cells < min_cells {
            return bad(format!(
                "cells N must be >= {min_cells} for {}, got {}",
                self.case, self.cells
            ));
        }
        match (self.case, self.chain) {
            (LayoutCase::Chain, None) => return bad("case 4 requires chain M".into()),
            (LayoutCase::Chain, Some(m)) => {
                if m < 2 || m >= self.cells {
                    return bad(format!("chain M must satisfy 2 <= M < N, got M={m}, N={}", self.cells));
                }
                if m >= self.slots {
                    return bad(format!("chain M must be < K, got M={m}, K={}", self.slots));
                }
            }
            (_, Some(_)) => return bad(format!("chain M is only allowed for case 4, not {}", self.case)),
            _ => {}
        }
        if let Some(r) = self.inner_radius {
            if self.case != LayoutCase::NoSharing {
                return bad(format!("inner_radius override is only allowed for case 1, not {}", self.case));
            }
            if !(r.is_finite() && r > 0.0) {
                return bad(format!("inner_radius must be positive, got {r}"));
            }
        }
        if let Some(t) = self.dedup_tolerance {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("dedup_tolerance must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

/// Closed-form element count for each sharing case.
pub fn element_count(spec: &LayoutSpec) -> Result<usize> {
    spec.validate()?;
    let (n, k) = (spec.cells, spec.slots);
    Ok(match spec.case {
        LayoutCase::NoSharing => n * k,
        LayoutCase::OneShared => n * (k - 1),
        LayoutCase::TwoShared => n * (k - 2),
        LayoutCase::Chain => n * (k - spec.chain.expect("validated")),
        LayoutCase::CenterShared => n * (k - 2) + 1,
    })
}

/// Rotation about the array axis followed by a translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidTransform {
    /// Radians, counter-clockwise about `+z`.
    #[serde(default)]
    pub rotation_about_axis: f64,
    /// Transverse `(x, y)` shift in meters.
    #[serde(default)]
    pub lateral_offset: [f64; 2],
    /// Shift along the array axis in meters.
    #[serde(default)]
    pub axial_offset: f64,
}

impl Default for RigidTransform {
    fn default() -> Self {
        RigidTransform::identity()
    }
}

impl RigidTransform {
    pub const fn identity() -> Self {
        RigidTransform {
            rotation_about_axis: 0.0,
            lateral_offset: [0.0, 0.0],
            axial_offset: 0.0,
        }
    }

    pub fn rotation(angle: f64) -> Self {
        RigidTransform {
            rotation_about_axis: angle,
            ..RigidTransform::identity()
        }
    }

    pub fn lateral(dx: f64, dy: f64) -> Self {
        RigidTransform {
            lateral_offset: [dx, dy],
            ..RigidTransform::identity()
        }
    }

    pub fn is_identity(&self) -> bool {
        self.rotation_about_axis == 0.0 && self.lateral_offset == [0.0, 0.0] && self.axial_offset == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.rotation_about_axis.is_finite()
            && self.lateral_offset.iter().all(|v| v.is_finite())
            && self.axial_offset.is_finite()
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        if self.is_identity() {
            return p;
        }
        let (s, c) = self.rotation_about_axis.sin_cos();
        [
            c * p[0] - s * p[1] + self.lateral_offset[0],
            s * p[0] + c * p[1] + self.lateral_offset[1],
            p[2] + self.axial_offset,
        ]
    }

    pub fn inverse(&self) -> Self {
        let (s, c) = (-self.rotation_about_axis).sin_cos();
        let [tx, ty] = self.lateral_offset;
        RigidTransform {
            rotation_about_axis: -self.rotation_about_axis,
            lateral_offset: [-(c * tx - s * ty), -(s * tx + c * ty)],
            axial_offset: -self.axial_offset,
        }
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &RigidTransform) -> Self {
        let moved = self.apply([first.lateral_offset[0], first.lateral_offset[1], first.axial_offset]);
        RigidTransform {
            rotation_about_axis: first.rotation_about_axis + self.rotation_about_axis,
            lateral_offset: [moved[0], moved[1]],
            axial_offset: moved[2],
        }
    }
}

/// A built layout: deduplicated element positions plus the slot association.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrayLayout {
    spec: LayoutSpec,
    inner_radius: f64,
    azimuth_offset: f64,
    pose: RigidTransform,
    positions: Vec<[f64; 3]>,
    slot_map: Vec<usize>,
}

impl ArrayLayout {
    /// Assemble a layout from raw parts without checking it; run
    /// [`validate_layout`] on the result.
    pub fn from_parts(
        spec: LayoutSpec,
        inner_radius: f64,
        azimuth_offset: f64,
        positions: Vec<[f64; 3]>,
        slot_map: Vec<usize>,
    ) -> Self {
        ArrayLayout {
            spec,
            inner_radius,
            azimuth_offset,
            pose: RigidTransform::identity(),
            positions,
            slot_map,
        }
    }

    pub fn spec(&self) -> &LayoutSpec {
        &self.spec
    }

    pub fn cells(&self) -> usize {
        self.spec.cells
    }

    pub fn slots(&self) -> usize {
        self.spec.slots
    }

    pub fn streams(&self) -> usize {
        self.spec.streams()
    }

    /// Number of distinct physical elements, `U`.
    pub fn element_count(&self) -> usize {
        self.positions.len()
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    /// `delta0`: azimuth of slot 0 in cell 0, relative to the cell's radial direction.
    pub fn azimuth_offset(&self) -> f64 {
        self.azimuth_offset
    }

    /// Accumulated rigid motion applied since construction.
    pub fn pose(&self) -> &RigidTransform {
        &self.pose
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    /// Element index for every slot, row-major (`n` outer, `k` inner).
    pub fn slot_map(&self) -> &[usize] {
        &self.slot_map
    }

    pub fn element_of(&self, cell: usize, slot: usize) -> usize {
        self.slot_map[cell * self.spec.slots + slot]
    }

    /// Slots mapped onto each element.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut counts = vec![0; self.positions.len()];
        for &e in &self.slot_map {
            if e < counts.len() {
                counts[e] += 1;
            }
        }
        counts
    }

    /// Position of a slot in the layout's own (untransformed) frame.
    pub fn nominal_position(&self, cell: usize, slot: usize) -> [f64; 3] {
        slot_position(&self.spec, self.inner_radius, self.azimuth_offset, cell, slot)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&LayoutExport::from(self))?)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &LayoutExport::from(self))?;
        Ok(())
    }

    /// CSV with header `element_index,x_m,y_m,z_m`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["element_index", "x_m", "y_m", "z_m"])?;
        for (i, p) in self.positions.iter().enumerate() {
            out.write_record([i.to_string(), p[0].to_string(), p[1].to_string(), p[2].to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct LayoutExport<'a> {
    spec: &'a LayoutSpec,
    units: &'static str,
    inner_radius: f64,
    azimuth_offset: f64,
    element_count: usize,
    positions: &'a [[f64; 3]],
    slot_map: Vec<[usize; 3]>,
}

impl<'a> From<&'a ArrayLayout> for LayoutExport<'a> {
    fn from(layout: &'a ArrayLayout) -> Self {
        let k = layout.slots();
        LayoutExport {
            spec: &layout.spec,
            units: "meters",
            inner_radius: layout.inner_radius,
            azimuth_offset: layout.azimuth_offset,
            element_count: layout.element_count(),
            positions: &layout.positions,
            slot_map: layout
                .slot_map
                .iter()
                .enumerate()
                .map(|(i, &e)| [i / k, i % k, e])
                .collect(),
        }
    }
}

fn cell_center(spec: &LayoutSpec, cell: usize) -> [f64; 2] {
    if spec.cells == 1 {
        return [0.0, 0.0];
    }
    let phi = 2.0 * PI * cell as f64 / spec.cells as f64;
    [spec.inter_radius * phi.cos(), spec.inter_radius * phi.sin()]
}

fn slot_position(spec: &LayoutSpec, inner_radius: f64, offset: f64, cell: usize, slot: usize) -> [f64; 3] {
    let c = cell_center(spec, cell);
    let phi = 2.0 * PI * cell as f64 / spec.cells as f64;
    let theta = offset + phi + 2.0 * PI * slot as f64 / spec.slots as f64;
    [c[0] + inner_radius * theta.cos(), c[1] + inner_radius * theta.sin(), 0.0]
}

fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Place every slot and merge coincident ones, keeping the lowest index.
fn place(spec: &LayoutSpec, inner_radius: f64, offset: f64) -> ArrayLayout {
    let tol = spec.tolerance();
    let mut positions: Vec<[f64; 3]> = Vec::new();
    let mut slot_map = Vec::with_capacity(spec.streams());
    for n in 0..spec.cells {
        for k in 0..spec.slots {
            let p = slot_position(spec, inner_radius, offset, n, k);
            let idx = match positions.iter().position(|q| distance(q, &p) <= tol) {
                Some(i) => i,
                None => {
                    positions.push(p);
                    positions.len() - 1
                }
            };
            slot_map.push(idx);
        }
    }
    ArrayLayout::from_parts(spec.clone(), inner_radius, offset, positions, slot_map)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// `true` when `K (N - 2) / (2N)` is an integer: the two points that an
/// adjacent-cell construction requires land on both cells' slot grids.
fn grid_alignment_holds(cells: usize, slots: usize) -> bool {
    (slots * (cells - 2)).is_multiple_of(2 * cells)
}

fn reduce_to_grid_step(angle: f64, slots: usize) -> f64 {
    let step = 2.0 * PI / slots as f64;
    let r = angle.rem_euclid(step);
    // rem_euclid can return `step` itself after rounding
    if (step - r).abs() < 1e-12 { 0.0 } else { r }
}

/// A candidate inner radius together with the analytic slot offset it implies.
struct Construction {
    inner_radius: f64,
    offset: Option<f64>,
}

fn constructions(spec: &LayoutSpec) -> Vec<Construction> {
    let (n, k) = (spec.cells as f64, spec.slots as f64);
    let r_big = spec.inter_radius;
    let aligned = spec.cells >= 2 && grid_alignment_holds(spec.cells, spec.slots);
    let analytic = |angle: f64| aligned.then(|| reduce_to_grid_step(angle, spec.slots));
    match spec.case {
        LayoutCase::NoSharing => {
            let default = if spec.cells == 1 { r_big } else { r_big / 4.0 };
            vec![Construction {
                inner_radius: spec.inner_radius.unwrap_or(default),
                offset: Some(0.0),
            }]
        }
        LayoutCase::OneShared => vec![Construction {
            inner_radius: r_big * (PI / n).sin(),
            offset: analytic(PI / 2.0 + PI / n),
        }],
        LayoutCase::TwoShared => vec![Construction {
            inner_radius: r_big * (PI / n).sin() / (PI / k).cos(),
            offset: analytic(PI / 2.0 + PI / n - PI / k),
        }],
        LayoutCase::Chain => (1..)
            .take_while(|&m| 2 * m < spec.slots)
            .map(|m| {
                let half = PI * m as f64 / k;
                Construction {
                    inner_radius: r_big * (PI / n).sin() / half.cos(),
                    offset: analytic(PI / 2.0 + PI / n - half),
                }
            })
            .collect(),
        LayoutCase::CenterShared => vec![Construction {
            inner_radius: r_big,
            offset: analytic(PI),
        }],
    }
}

/// Offsets tried after the analytic one: multiples of `pi / lcm(2N, 2K)`
/// spanning one slot step.
fn rational_offsets(spec: &LayoutSpec) -> impl Iterator<Item = f64> {
    let denom = lcm(2 * spec.cells, 2 * spec.slots);
    let count = 2 * denom / spec.slots;
    (0..count).map(move |i| PI * i as f64 / denom as f64)
}

/// Build the layout for `spec`, solving the slot offsets so that shared
/// slots coincide.
pub fn build_layout(spec: &LayoutSpec) -> Result<ArrayLayout> {
    let target = element_count(spec)?;
    let mut tried = 0usize;
    for construction in constructions(spec) {
        let analytic = construction.offset.into_iter();
        let offsets = analytic.chain(rational_offsets(spec));
        for offset in offsets {
            tried += 1;
            let layout = place(spec, construction.inner_radius, offset);
            if layout.element_count() == target && validate_layout(&layout).passed() {
                return Ok(layout);
            }
        }
    }
    Err(Error::InfeasibleGeometry(format!(
        "{} with N={}, K={}{}: no slot-offset assignment among {tried} candidates yields {target} \
         elements with the required sharing pattern (grid condition K(N-2)/(2N) integral: {})",
        spec.case,
        spec.cells,
        spec.slots,
        spec.chain.map(|m| format!(", M={m}")).unwrap_or_default(),
        spec.cells >= 2 && grid_alignment_holds(spec.cells, spec.slots),
    )))
}

/// Rigidly move a layout; slot association and spec are unchanged.
pub fn transform_layout(layout: &ArrayLayout, t: &RigidTransform) -> ArrayLayout {
    if t.is_identity() {
        return layout.clone();
    }
    let mut out = layout.clone();
    out.positions = layout.positions.iter().map(|&p| t.apply(p)).collect();
    out.pose = t.after(&layout.pose);
    out
}

/// One invariant check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured deviation in meters, where the check measures one.
    pub deviation: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ValidationCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&ValidationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Check every layout invariant and report the worst deviations.
pub fn validate_layout(layout: &ArrayLayout) -> ValidationReport {
    let spec = &layout.spec;
    let tol = spec.tolerance();
    let mut checks = Vec::new();

    // slot map totality and surjectivity
    let u = layout.positions.len();
    let total = layout.slot_map.len() == spec.streams() && layout.slot_map.iter().all(|&e| e < u);
    let unused = layout.multiplicities().iter().filter(|&&m| m == 0).count();
    checks.push(ValidationCheck {
        name: "slot_map",
        passed: total && unused == 0,
        deviation: None,
        detail: format!(
            "{} slots for {} expected, {unused} unused elements",
            layout.slot_map.len(),
            spec.streams()
        ),
    });
    if !total {
        return ValidationReport { checks };
    }

    let mut min_sep = f64::INFINITY;
    for i in 0..u {
        for j in i + 1..u {
            min_sep = min_sep.min(distance(&layout.positions[i], &layout.positions[j]));
        }
    }
    checks.push(ValidationCheck {
        name: "distinct_positions",
        passed: min_sep > tol,
        deviation: min_sep.is_finite().then_some(min_sep),
        detail: format!("minimum element separation {min_sep:e} m, tolerance {tol:e} m"),
    });

    // Every slot should sit on its element, measured in the layout's own frame.
    let to_local = layout.pose.inverse();
    let local: Vec<[f64; 3]> = layout.positions.iter().map(|&p| to_local.apply(p)).collect();
    let mut coincidence = 0.0f64;
    for n in 0..spec.cells {
        for k in 0..spec.slots {
            let e = layout.element_of(n, k);
            coincidence = coincidence.max(distance(&layout.nominal_position(n, k), &local[e]));
        }
    }
    checks.push(ValidationCheck {
        name: "coincidence",
        passed: coincidence <= tol,
        deviation: Some(coincidence),
        detail: "max distance between a slot's nominal position and its element".into(),
    });

    let step = RigidTransform::rotation(2.0 * PI / spec.cells as f64);
    let mut symmetry = 0.0f64;
    for n in 0..spec.cells {
        for k in 0..spec.slots {
            let here = local[layout.element_of(n, k)];
            let next = local[layout.element_of((n + 1) % spec.cells, k)];
            symmetry = symmetry.max(distance(&step.apply(here), &next));
        }
    }
    checks.push(ValidationCheck {
        name: "rotational_symmetry",
        passed: symmetry <= tol,
        deviation: Some(symmetry),
        detail: "max |rot(2pi/N) p(n,k) - p(n+1,k)|".into(),
    });

    if let Ok(expected) = element_count(spec) {
        checks.push(ValidationCheck {
            name: "element_count",
            passed: expected == u,
            deviation: None,
            detail: format!("{u} elements, closed form {expected}"),
        });
    }

    let (passed, detail) = sharing_pattern(layout);
    checks.push(ValidationCheck {
        name: "sharing_pattern",
        passed,
        deviation: None,
        detail,
    });

    ValidationReport { checks }
}

/// Elements shared by each unordered pair of cells.
pub fn shared_between(layout: &ArrayLayout, a: usize, b: usize) -> usize {
    let k = layout.slots();
    let first: Vec<usize> = (0..k).map(|s| layout.element_of(a, s)).collect();
    let mut shared: Vec<usize> = (0..k)
        .map(|s| layout.element_of(b, s))
        .filter(|e| first.contains(e))
        .collect();
    shared.sort_unstable();
    shared.dedup();
    shared.len()
}

fn sharing_pattern(layout: &ArrayLayout) -> (bool, String) {
    let n = layout.cells();
    let adjacent = |a: usize, b: usize| {
        let d = (b + n - a) % n;
        d == 1 || d == n - 1
    };
    let (adjacent_share, others_share) = match layout.spec.case {
        LayoutCase::NoSharing => (Some(0), Some(0)),
        LayoutCase::OneShared => (Some(1), Some(0)),
        LayoutCase::TwoShared => (Some(2), Some(0)),
        LayoutCase::Chain => (None, None),
        // non-adjacent cells share only the center
        LayoutCase::CenterShared => (Some(2), Some(1)),
    };
    for a in 0..n {
        for b in a + 1..n {
            let shared = shared_between(layout, a, b);
            let expected = if adjacent(a, b) { adjacent_share } else { others_share };
            if let Some(e) = expected {
                if shared != e {
                    return (false, format!("cells {a} and {b} share {shared} elements, expected {e}"));
                }
            }
        }
    }
    if layout.spec.case == LayoutCase::CenterShared {
        let center = layout.positions.iter().position(|p| distance(p, &layout.pose.apply([0.0; 3])) <= layout.spec.tolerance());
        let all_share = center.is_some_and(|c| (0..n).all(|cell| (0..layout.slots()).any(|s| layout.element_of(cell, s) == c)));
        if !all_share {
            return (false, "array center is not an element shared by every cell".into());
        }
    }
    (true, format!("{n} cells, pairwise sharing as expected for {}", layout.spec.case))
}
