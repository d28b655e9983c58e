//! Free-space LOS channels between layouts, their lift to logical stream
//! slots, BCCB idealization and impulse-pilot CSI estimation.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::ArrayLayout;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// Hz.
    pub carrier_frequency: f64,
    /// Axial separation of the array centers, meters.
    pub link_distance: f64,
    /// Watts per receive element.
    pub noise_power: f64,
    /// Watts.
    pub total_power: f64,
    /// Hz.
    pub bandwidth: f64,
}

impl Default for LinkConfig {
    /// 3 GHz carrier, 1 MHz bandwidth, 50 m link, unit power and noise.
    fn default() -> Self {
        LinkConfig {
            carrier_frequency: 3e9,
            link_distance: 50.0,
            noise_power: 1.0,
            total_power: 1.0,
            bandwidth: 1e6,
        }
    }
}

impl LinkConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("carrier_frequency", self.carrier_frequency),
            ("link_distance", self.link_distance),
            ("noise_power", self.noise_power),
            ("total_power", self.total_power),
            ("bandwidth", self.bandwidth),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Domain(format!("link {name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Friis amplitude with propagation phase: `lambda / (4 pi d) * exp(-j 2 pi d / lambda)`.
pub fn freespace_gain(distance: f64, wavelength: f64) -> Result<Complex64> {
    if !(distance > 0.0 && distance.is_finite()) {
        return Err(Error::Domain(format!("distance must be positive, got {distance}")));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
    }
    let magnitude = wavelength / (4.0 * PI * distance);
    // reduce the phase in cycles first so large d/lambda keeps its precision
    let cycles = (distance / wavelength).fract();
    Ok(Complex64::from_polar(magnitude, -2.0 * PI * cycles))
}

/// Element-level channel, `U_rx x U_tx`.
#[derive(Debug, Clone)]
pub struct PhysicalChannel {
    matrix: DMatrix<Complex64>,
    tx: ArrayLayout,
    rx: ArrayLayout,
}

impl PhysicalChannel {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn tx_layout(&self) -> &ArrayLayout {
        &self.tx
    }

    /// The receive layout as placed in the common frame (axially shifted).
    pub fn rx_layout(&self) -> &ArrayLayout {
        &self.rx
    }

    /// Divide every entry by `scale`. Used to reference SNR to the
    /// boresight path gain.
    pub fn normalized(mut self, scale: f64) -> Self {
        self.matrix.iter_mut().for_each(|z| *z /= scale);
        self
    }
}

/// Channel from every transmit element to every receive element. The
/// receive layout is shifted by `link.link_distance` along the array axis.
pub fn build_physical_channel(tx: &ArrayLayout, rx: &ArrayLayout, link: &LinkConfig) -> Result<PhysicalChannel> {
    link.validate()?;
    let reach = tx.spec().inter_radius.max(rx.spec().inter_radius);
    if link.link_distance <= reach {
        return Err(Error::Domain(format!(
            "link_distance {} m must exceed the inter radius {reach} m of both arrays",
            link.link_distance
        )));
    }
    let placed = crate::geometry::transform_layout(
        rx,
        &crate::geometry::RigidTransform {
            axial_offset: link.link_distance,
            ..Default::default()
        },
    );
    let lambda = link.wavelength();
    let (t, r) = (tx.positions(), placed.positions());
    let mut matrix = DMatrix::zeros(r.len(), t.len());
    for (v, pr) in r.iter().enumerate() {
        for (u, pt) in t.iter().enumerate() {
            let d = ((pr[0] - pt[0]).powi(2) + (pr[1] - pt[1]).powi(2) + (pr[2] - pt[2]).powi(2)).sqrt();
            matrix[(v, u)] = freespace_gain(d, lambda)?;
        }
    }
    Ok(PhysicalChannel {
        matrix,
        tx: tx.clone(),
        rx: placed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    IdealizedBccb,
    Estimated,
}

/// `NK x NK` channel over logical slots, index `n * K + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogicalChannel {
    matrix: DMatrix<Complex64>,
    cells: usize,
    slots: usize,
    provenance: Provenance,
}

impl LogicalChannel {
    pub fn new(matrix: DMatrix<Complex64>, cells: usize, slots: usize, provenance: Provenance) -> Result<Self> {
        let size = cells * slots;
        check_len("logical channel rows", size, matrix.nrows())?;
        check_len("logical channel columns", size, matrix.ncols())?;
        Ok(LogicalChannel {
            matrix,
            cells,
            slots,
            provenance,
        })
    }

    pub fn identity(cells: usize, slots: usize) -> Self {
        let size = cells * slots;
        LogicalChannel {
            matrix: DMatrix::identity(size, size),
            cells,
            slots,
            provenance: Provenance::IdealizedBccb,
        }
    }

    /// The BCCB matrix whose first column is `column`:
    /// `H[(n,k),(n',k')] = column[((n-n') mod N, (k-k') mod K)]`.
    pub fn bccb_from_first_column(column: &[Complex64], cells: usize, slots: usize, provenance: Provenance) -> Result<Self> {
        let size = cells * slots;
        check_len("BCCB first column", size, column.len())?;
        let matrix = DMatrix::from_fn(size, size, |i, j| {
            let (n, k) = (i / slots, i % slots);
            let (np, kp) = (j / slots, j % slots);
            column[((n + cells - np) % cells) * slots + (k + slots - kp) % slots]
        });
        Ok(LogicalChannel {
            matrix,
            cells,
            slots,
            provenance,
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn size(&self) -> usize {
        self.cells * self.slots
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn first_column(&self) -> Vec<Complex64> {
        self.matrix.column(0).iter().copied().collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.matrix.iter_mut().for_each(|z| *z *= factor);
        out
    }

    pub fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len("logical channel input", self.size(), x.len())?;
        Ok((0..self.size())
            .map(|i| (0..self.size()).map(|j| self.matrix[(i, j)] * x[j]).sum())
            .collect())
    }

    /// Numerical rank via SVD, counting singular values above
    /// `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        matrix_rank(&self.matrix, rel_tol)
    }

    /// CSV `row,col,re,im` (dimensionless amplitude gains).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["row", "col", "re", "im"])?;
        for i in 0..self.size() {
            for j in 0..self.size() {
                let z = self.matrix[(i, j)];
                out.write_record([i.to_string(), j.to_string(), z.re.to_string(), z.im.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_export(&self) -> ChannelExport {
        let entries = (0..self.size())
            .flat_map(|i| (0..self.size()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let z = self.matrix[(i, j)];
                (i, j, z.re, z.im)
            })
            .collect();
        ChannelExport {
            cells: self.cells,
            slots: self.slots,
            provenance: self.provenance,
            units: "dimensionless amplitude gain",
            entries,
        }
    }
}

/// JSON form of a logical channel.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelExport {
    pub cells: usize,
    pub slots: usize,
    pub provenance: Provenance,
    pub units: &'static str,
    /// `(row, col, re, im)`.
    pub entries: Vec<(usize, usize, f64, f64)>,
}

pub fn matrix_rank(matrix: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    let sv = matrix.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Re-index the element channel onto logical slots; slots sharing an
/// element get duplicated rows/columns.
pub fn lift_to_logical(phys: &PhysicalChannel) -> Result<LogicalChannel> {
    let (tx, rx) = (&phys.tx, &phys.rx);
    check_len("receive cells", tx.cells(), rx.cells())?;
    check_len("receive slots", tx.slots(), rx.slots())?;
    let size = tx.streams();
    let (tx_map, rx_map) = (tx.slot_map(), rx.slot_map());
    let matrix = DMatrix::from_fn(size, size, |i, j| phys.matrix[(rx_map[i], tx_map[j])]);
    LogicalChannel::new(matrix, tx.cells(), tx.slots(), Provenance::Exact)
}

/// BCCB completion anchored on the first row:
/// `H'[(n,k),(n',k')] = H[(0,0),((n'-n) mod N,(k'-k) mod K)]`.
pub fn idealize_bccb(logical: &LogicalChannel) -> LogicalChannel {
    let (cells, slots) = (logical.cells, logical.slots);
    let size = logical.size();
    let row = logical.matrix.row(0);
    let matrix = DMatrix::from_fn(size, size, |i, j| {
        let (n, k) = (i / slots, i % slots);
        let (np, kp) = (j / slots, j % slots);
        row[((np + cells - n) % cells) * slots + (kp + slots - k) % slots]
    });
    LogicalChannel {
        matrix,
        cells,
        slots,
        provenance: Provenance::IdealizedBccb,
    }
}

/// `||H - idealize(H)||_F / ||H||_F`.
pub fn bccb_deviation(logical: &LogicalChannel) -> Result<f64> {
    let norm = logical.matrix.norm();
    if norm == 0.0 {
        return Err(Error::Domain("BCCB deviation of a zero matrix is undefined".into()));
    }
    Ok((&logical.matrix - idealize_bccb(logical).matrix).norm() / norm)
}

/// Treat the response to an impulse on slot `(0,0)` as the first column of
/// a BCCB channel and complete it. `NK` samples determine all `(NK)^2`
/// entries.
pub fn estimate_bccb_csi(pilot_response: &[Complex64], cells: usize, slots: usize) -> Result<LogicalChannel> {
    LogicalChannel::bccb_from_first_column(pilot_response, cells, slots, Provenance::Estimated)
}
