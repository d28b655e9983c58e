//! Two-dimension IDFT modulation, power combining onto shared elements,
//! propagation, power splitting and 2D DFT demodulation with per-stream
//! equalization.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::spectrum::{eigen_spectrum, EigenSpectrum};
use crate::channel::{idealize_bccb, lift_to_logical, LogicalChannel, PhysicalChannel, Provenance};
use crate::dft::{unitary_dft_2d, Direction};
use crate::error::{check_len, Error, Result};
use crate::geometry::ArrayLayout;
use crate::rng::{complex_gaussian, substream};

/// Streams whose eigenvalue magnitude falls below this fraction of the
/// largest are switched off rather than equalized.
pub const DEFAULT_EQ_TOLERANCE: f64 = 1e-8;

/// `N x K` modulation symbols, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    cells: usize,
    slots: usize,
    values: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn new(cells: usize, slots: usize, values: Vec<Complex64>) -> Result<Self> {
        check_len("symbol grid", cells * slots, values.len())?;
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("symbol grid entries must be finite".into()));
        }
        Ok(SymbolGrid { cells, slots, values })
    }

    pub fn zeros(cells: usize, slots: usize) -> Self {
        SymbolGrid {
            cells,
            slots,
            values: vec![Complex64::new(0.0, 0.0); cells * slots],
        }
    }

    pub fn impulse(cells: usize, slots: usize, n: usize, k: usize) -> Self {
        let mut g = SymbolGrid::zeros(cells, slots);
        g.values[n * slots + k] = Complex64::new(1.0, 0.0);
        g
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        self.values[n * self.slots + k]
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// CSV `n,k,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_frame(w, self.slots, &self.values)
    }
}

/// CSV `n,k,re,im` dump of a logical frame.
pub fn write_frame<W: Write>(w: W, slots: usize, frame: &[Complex64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "k", "re", "im"])?;
    for (i, v) in frame.iter().enumerate() {
        out.write_record([(i / slots).to_string(), (i % slots).to_string(), v.re.to_string(), v.im.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Unitary 2D inverse DFT:
/// `x[(p,q)] = (NK)^-1/2 sum_{n,k} s[n,k] exp(+j 2 pi (np/N + kq/K))`.
pub fn modulate_2d(s: &SymbolGrid) -> Vec<Complex64> {
    unitary_dft_2d(&s.values, s.cells, s.slots, Direction::Inverse)
}

/// Combiner amplitude `sqrt(P / NK)`: unit-variance white symbols stay
/// white after the unitary IDFT, so the expected radiated power is `P`
/// whatever the sharing pattern.
pub fn power_scale(total_power: f64, streams: usize) -> f64 {
    (total_power / streams as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmitVector {
    pub samples: Vec<Complex64>,
}

impl TransmitVector {
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Each element radiates the scaled sum of the slots mapped onto it.
pub fn combine_to_elements(x: &[Complex64], layout: &ArrayLayout, total_power: f64) -> Result<TransmitVector> {
    check_len("combiner input", layout.streams(), x.len())?;
    let beta = power_scale(total_power, layout.streams());
    let mut samples = vec![Complex64::new(0.0, 0.0); layout.element_count()];
    for (slot, &e) in layout.slot_map().iter().enumerate() {
        samples[e] += x[slot];
    }
    samples.iter_mut().for_each(|v| *v *= beta);
    Ok(TransmitVector { samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// One noise sample per receive element, shared by the slots split from it.
    #[default]
    Physical,
    /// Independent noise per logical slot.
    Logical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub mode: NoiseMode,
    /// Watts.
    pub noise_power: f64,
    pub seed: u64,
}

/// `y = H t + w`. Noise is added here only in physical mode; logical-mode
/// noise belongs after the splitter (see [`add_logical_noise`]).
pub fn propagate(tx: &TransmitVector, phys: &PhysicalChannel, noise: &NoiseConfig) -> Result<Vec<Complex64>> {
    let mut rng = substream(noise.seed, 0);
    let power = match noise.mode {
        NoiseMode::Physical => noise.noise_power,
        NoiseMode::Logical => 0.0,
    };
    propagate_with(tx, phys, power, &mut rng)
}

pub fn propagate_with<R: Rng + ?Sized>(
    tx: &TransmitVector,
    phys: &PhysicalChannel,
    noise_power: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let h = phys.matrix();
    check_len("propagate input", h.ncols(), tx.samples.len())?;
    if noise_power < 0.0 {
        return Err(Error::Domain(format!("noise power must be >= 0, got {noise_power}")));
    }
    let mut y: Vec<Complex64> = (0..h.nrows())
        .map(|v| (0..h.ncols()).map(|u| h[(v, u)] * tx.samples[u]).sum())
        .collect();
    if noise_power > 0.0 {
        y.iter_mut().for_each(|v| *v += complex_gaussian(rng, noise_power));
    }
    Ok(y)
}

/// Every slot receives the sample of the element it maps to.
pub fn split_to_logical(y: &[Complex64], layout: &ArrayLayout) -> Result<Vec<Complex64>> {
    check_len("splitter input", layout.element_count(), y.len())?;
    Ok(layout.slot_map().iter().map(|&e| y[e]).collect())
}

pub fn add_logical_noise<R: Rng + ?Sized>(r: &mut [Complex64], noise_power: f64, rng: &mut R) {
    if noise_power > 0.0 {
        r.iter_mut().for_each(|v| *v += complex_gaussian(rng, noise_power));
    }
}

/// Demodulated symbols with the equalization gate applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Demodulated {
    pub grid: SymbolGrid,
    /// `false` where the stream's eigenvalue was gated off; those entries are 0.
    pub active: Vec<bool>,
}

pub fn active_streams(spectrum: &EigenSpectrum, eq_tolerance: f64) -> Vec<bool> {
    let threshold = eq_tolerance * spectrum.max_magnitude();
    spectrum.values().iter().map(|v| v.norm() > threshold && v.norm() > 0.0).collect()
}

/// Unitary 2D DFT of the logical samples, then division of stream
/// `(n,k)` by its eigenvalue when it clears the gate.
pub fn demodulate_2d(r: &[Complex64], spectrum: &EigenSpectrum, eq_tolerance: f64) -> Result<Demodulated> {
    let (cells, slots) = (spectrum.cells(), spectrum.slots());
    check_len("demodulator input", cells * slots, r.len())?;
    let raw = unitary_dft_2d(r, cells, slots, Direction::Forward);
    let active = active_streams(spectrum, eq_tolerance);
    let values = raw
        .iter()
        .zip(spectrum.values())
        .zip(&active)
        .map(|((z, lambda), &on)| if on { z / lambda } else { Complex64::new(0.0, 0.0) })
        .collect();
    Ok(Demodulated {
        grid: SymbolGrid { cells, slots, values },
        active,
    })
}

/// How the excitation reaches the receive slots.
#[derive(Debug, Clone)]
pub enum ChannelPath {
    /// combine -> element channel -> split.
    Physical(PhysicalChannel),
    /// Logical channel applied directly; `rx` is needed only for
    /// physical-mode noise.
    Logical { channel: LogicalChannel, rx: Option<ArrayLayout> },
}

/// The complete link: transmit chain, channel and receiver model.
#[derive(Debug, Clone)]
pub struct Chain {
    path: ChannelPath,
    total_power: f64,
    cells: usize,
    slots: usize,
    /// Receiver's eigenvalue model, scaled by the combiner amplitude.
    receiver: EigenSpectrum,
    eq_tolerance: f64,
}

impl Chain {
    /// Physical link; the receiver models it by the BCCB idealization of
    /// the lifted channel.
    pub fn physical(channel: PhysicalChannel, total_power: f64) -> Result<Self> {
        let logical = lift_to_logical(&channel)?;
        let model = eigen_spectrum(&idealize_bccb(&logical))?;
        Chain::assemble(ChannelPath::Physical(channel), total_power, model)
    }

    /// Logical link. Exact channels are idealized for the receiver model.
    pub fn logical(channel: LogicalChannel, total_power: f64, rx: Option<ArrayLayout>) -> Result<Self> {
        let model = match channel.provenance() {
            Provenance::Exact => eigen_spectrum(&idealize_bccb(&channel))?,
            _ => eigen_spectrum(&channel)?,
        };
        if let Some(layout) = &rx {
            check_len("receive layout streams", channel.size(), layout.streams())?;
        }
        Chain::assemble(ChannelPath::Logical { channel, rx }, total_power, model)
    }

    fn assemble(path: ChannelPath, total_power: f64, model: EigenSpectrum) -> Result<Self> {
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(Error::Domain(format!("total power must be positive, got {total_power}")));
        }
        let (cells, slots) = (model.cells(), model.slots());
        let beta = power_scale(total_power, cells * slots);
        Ok(Chain {
            path,
            total_power,
            cells,
            slots,
            receiver: model.scaled(beta),
            eq_tolerance: DEFAULT_EQ_TOLERANCE,
        })
    }

    /// Replace the receiver's (unscaled) eigenvalue model, e.g. with an
    /// estimated one.
    pub fn with_receiver_model(mut self, model: EigenSpectrum) -> Result<Self> {
        check_len("receiver model", self.streams(), model.len())?;
        self.receiver = model.scaled(self.gain());
        Ok(self)
    }

    pub fn with_eq_tolerance(mut self, eq_tolerance: f64) -> Self {
        self.eq_tolerance = eq_tolerance;
        self
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn streams(&self) -> usize {
        self.cells * self.slots
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    /// Combiner amplitude `beta`.
    pub fn gain(&self) -> f64 {
        power_scale(self.total_power, self.streams())
    }

    pub fn path(&self) -> &ChannelPath {
        &self.path
    }

    /// Receiver eigenvalue model including `beta`.
    pub fn receiver_spectrum(&self) -> &EigenSpectrum {
        &self.receiver
    }

    pub fn active(&self) -> Vec<bool> {
        active_streams(&self.receiver, self.eq_tolerance)
    }

    /// The true logical channel from slot excitation to slot samples,
    /// without the combiner amplitude.
    pub fn logical_channel(&self) -> Result<LogicalChannel> {
        match &self.path {
            ChannelPath::Physical(phys) => lift_to_logical(phys),
            ChannelPath::Logical { channel, .. } => Ok(channel.clone()),
        }
    }

    /// Symbols to noisy logical receive samples.
    pub fn transmit<R: Rng + ?Sized>(
        &self,
        s: &SymbolGrid,
        mode: NoiseMode,
        noise_power: f64,
        rng: &mut R,
    ) -> Result<Vec<Complex64>> {
        check_len("symbol grid", self.streams(), s.values.len())?;
        let x = modulate_2d(s);
        let mut r = match (&self.path, mode) {
            (ChannelPath::Physical(phys), _) => {
                let t = combine_to_elements(&x, phys.tx_layout(), self.total_power)?;
                let element_noise = if mode == NoiseMode::Physical { noise_power } else { 0.0 };
                let y = propagate_with(&t, phys, element_noise, rng)?;
                split_to_logical(&y, phys.rx_layout())?
            }
            (ChannelPath::Logical { channel, rx }, _) => {
                let beta = self.gain();
                let mut r = channel.apply(&x)?;
                r.iter_mut().for_each(|v| *v *= beta);
                if mode == NoiseMode::Physical && noise_power > 0.0 {
                    let layout = rx.as_ref().ok_or_else(|| {
                        Error::Precondition("physical-mode noise on a logical path needs the receive layout".into())
                    })?;
                    let w: Vec<Complex64> =
                        (0..layout.element_count()).map(|_| complex_gaussian(rng, noise_power)).collect();
                    for (slot, &e) in layout.slot_map().iter().enumerate() {
                        r[slot] += w[e];
                    }
                }
                r
            }
        };
        if mode == NoiseMode::Logical {
            add_logical_noise(&mut r, noise_power, rng);
        }
        Ok(r)
    }

    pub fn demodulate(&self, r: &[Complex64]) -> Result<Demodulated> {
        demodulate_2d(r, &self.receiver, self.eq_tolerance)
    }
}
