use std::io::Write;

use serde::Serialize;

use crate::channel::LogicalChannel;
use crate::dft::conjugate_by_dft;
use crate::error::Result;

pub const SIR_CAP_DB: f64 = 200.0;

/// Entries of `F H F^H` below this fraction of the largest are rounding noise.
const NUMERICAL_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamSir {
    pub n: usize,
    pub k: usize,
    /// `None` for a stream with no signal path (zero diagonal gain).
    pub sir_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SirReport {
    pub streams: Vec<StreamSir>,
    /// Mean of the per-stream dB values over streams that carry signal.
    pub mean_sir_db: Option<f64>,
    pub cap_db: f64,
}

impl SirReport {
    /// CSV `n,k,sir_db` (empty field for streams without signal).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["n", "k", "sir_db"])?;
        for s in &self.streams {
            out.write_record([
                s.n.to_string(),
                s.k.to_string(),
                s.sir_db.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Per-stream SIR after the 2D DFT combiner: with `G = F H F^H`,
/// `SIR_i = |G_ii|^2 / sum_{j != i} |G_ij|^2`, capped at 200 dB.
pub fn stream_sir(ch: &LogicalChannel) -> SirReport {
    let g = conjugate_by_dft(ch.matrix(), ch.cells(), ch.slots());
    let size = ch.size();
    let floor = NUMERICAL_FLOOR * g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let power = |i: usize, j: usize| {
        let z = g[(i, j)].norm();
        if z <= floor { 0.0 } else { z * z }
    };
    let mut streams = Vec::with_capacity(size);
    for i in 0..size {
        let signal = power(i, i);
        let interference: f64 = (0..size).filter(|&j| j != i).map(|j| power(i, j)).sum();
        let sir_db = (signal > 0.0).then(|| {
            if interference == 0.0 {
                SIR_CAP_DB
            } else {
                (10.0 * (signal / interference).log10()).min(SIR_CAP_DB)
            }
        });
        streams.push(StreamSir {
            n: i / ch.slots(),
            k: i % ch.slots(),
            sir_db,
        });
    }
    let active: Vec<f64> = streams.iter().filter_map(|s| s.sir_db).collect();
    let mean_sir_db = (!active.is_empty()).then(|| active.iter().sum::<f64>() / active.len() as f64);
    SirReport {
        streams,
        mean_sir_db,
        cap_db: SIR_CAP_DB,
    }
}
