use std::io::Write;

use nalgebra::linalg::Schur;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{LogicalChannel, Provenance};
use crate::dft::{dft_2d, Direction};
use crate::error::{Error, Result};

/// Largest `NK` the dense eigensolver accepts.
pub const DENSE_SIZE_LIMIT: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    Fft,
    Dense,
}

/// Eigenvalues of a logical channel. For the FFT source, entry `n * K + k`
/// belongs to the 2D frequency pair `(n, k)`; the dense source has no
/// frequency ordering.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSpectrum {
    values: Vec<Complex64>,
    cells: usize,
    slots: usize,
    source: SpectrumSource,
}

impl EigenSpectrum {
    pub fn new(values: Vec<Complex64>, cells: usize, slots: usize, source: SpectrumSource) -> Result<Self> {
        crate::error::check_len("spectrum", cells * slots, values.len())?;
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("spectrum entries must be finite".into()));
        }
        Ok(EigenSpectrum {
            values,
            cells,
            slots,
            source,
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, n: usize, k: usize) -> Complex64 {
        self.values[n * self.slots + k]
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    pub fn max_magnitude(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        EigenSpectrum {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Values sorted by magnitude, then phase; the canonical order for
    /// comparing spectra as multisets.
    pub fn sorted_values(&self) -> Vec<Complex64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.arg().total_cmp(&b.arg())));
        v
    }

    /// CSV `n,k,re,im,magnitude` (dimensionless).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "k", "re", "im", "magnitude"])?;
        for (i, v) in self.values.iter().enumerate() {
            out.write_record([
                (i / self.slots).to_string(),
                (i % self.slots).to_string(),
                v.re.to_string(),
                v.im.to_string(),
                v.norm().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Eigenvalues of a BCCB channel as the unnormalized 2D DFT of its first
/// column: `lambda(n,k) = sum_{m,l} H[(m,l),(0,0)] exp(-j 2 pi (nm/N + kl/K))`.
pub fn eigen_spectrum(ch: &LogicalChannel) -> Result<EigenSpectrum> {
    if ch.provenance() == Provenance::Exact {
        return Err(Error::Precondition(
            "eigen_spectrum needs a BCCB channel; idealize the exact channel first".into(),
        ));
    }
    let values = dft_2d(&ch.first_column(), ch.cells(), ch.slots(), Direction::Forward);
    EigenSpectrum::new(values, ch.cells(), ch.slots(), SpectrumSource::Fft)
}

/// Eigenvalues from a general dense (complex Schur) decomposition.
pub fn eigen_spectrum_dense(ch: &LogicalChannel) -> Result<EigenSpectrum> {
    let size = ch.size();
    if size > DENSE_SIZE_LIMIT {
        return Err(Error::SizeGuard {
            what: "NK for dense eigendecomposition",
            value: size as u128,
            limit: DENSE_SIZE_LIMIT as u128,
        });
    }
    let schur = Schur::new(ch.matrix().clone());
    let values = schur
        .eigenvalues()
        .ok_or_else(|| Error::Domain("Schur decomposition did not reach triangular form".into()))?;
    EigenSpectrum::new(values.iter().copied().collect(), ch.cells(), ch.slots(), SpectrumSource::Dense)
}

/// Count of eigenvalues with `|lambda| > rel_tol * max |lambda|`.
pub fn effective_rank(spectrum: &EigenSpectrum, rel_tol: f64) -> Result<usize> {
    if spectrum.is_empty() {
        return Err(Error::Domain("effective rank of an empty spectrum".into()));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::Domain(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let threshold = rel_tol * spectrum.max_magnitude();
    Ok(spectrum.values.iter().filter(|v| v.norm() > threshold).count())
}
