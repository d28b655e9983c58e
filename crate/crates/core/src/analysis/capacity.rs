use std::io::Write;

use serde::{Deserialize, Serialize};

use super::spectrum::EigenSpectrum;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerPolicy {
    #[default]
    EqualPower,
    WaterFilling,
}

/// Shannon capacity of a stream spectrum over an SNR sweep.
///
/// `snr_db` is `P / sigma^2` per receive element. Both power policies are
/// always evaluated; `policy` selects which one feeds `throughput_bps`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityCurve {
    pub snr_db: Vec<f64>,
    /// bits/s/Hz
    pub equal_power: Vec<f64>,
    /// bits/s/Hz
    pub water_filling: Vec<f64>,
    pub policy: PowerPolicy,
    /// Hz
    pub bandwidth: f64,
    /// bits/s
    pub throughput_bps: Vec<f64>,
}

impl CapacityCurve {
    pub fn efficiency(&self, policy: PowerPolicy) -> &[f64] {
        match policy {
            PowerPolicy::EqualPower => &self.equal_power,
            PowerPolicy::WaterFilling => &self.water_filling,
        }
    }

    /// CSV `snr_db,efficiency_ep_bps_per_hz,efficiency_wf_bps_per_hz,throughput_bps`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["snr_db", "efficiency_ep_bps_per_hz", "efficiency_wf_bps_per_hz", "throughput_bps"])?;
        for i in 0..self.snr_db.len() {
            out.write_record([
                self.snr_db[i].to_string(),
                self.equal_power[i].to_string(),
                self.water_filling[i].to_string(),
                self.throughput_bps[i].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Water-filling allocation of `total` power over channel power gains
/// `gains[i] = |lambda_i|^2`, maximizing `sum log2(1 + p_i g_i)`.
pub fn water_filling(gains: &[f64], total: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    let mut power = vec![0.0; gains.len()];
    if total <= 0.0 || order.is_empty() {
        return power;
    }
    // Shrink the active set until the weakest active stream sits below the water level.
    let mut active = order.len();
    let mut level = 0.0;
    while active > 0 {
        let inverse_sum: f64 = order[..active].iter().map(|&i| 1.0 / gains[i]).sum();
        level = (total + inverse_sum) / active as f64;
        if level > 1.0 / gains[order[active - 1]] {
            break;
        }
        active -= 1;
    }
    for &i in &order[..active] {
        power[i] = (level - 1.0 / gains[i]).max(0.0);
    }
    power
}

fn equal_power_efficiency(gains: &[f64], rho: f64) -> f64 {
    let per_stream = rho / gains.len() as f64;
    gains.iter().map(|g| (1.0 + per_stream * g).log2()).sum()
}

fn water_filling_efficiency(gains: &[f64], rho: f64) -> f64 {
    water_filling(gains, rho)
        .iter()
        .zip(gains)
        .map(|(p, g)| (1.0 + p * g).log2())
        .sum()
}

/// Capacity curve of a spectrum. Equal power gives every one of the `NK`
/// streams `rho / NK`; water filling distributes `rho` optimally.
pub fn capacity_curve(spectrum: &EigenSpectrum, snr_db: &[f64], policy: PowerPolicy, bandwidth: f64) -> CapacityCurve {
    let gains: Vec<f64> = spectrum.values().iter().map(|v| v.norm_sqr()).collect();
    let mut equal_power = Vec::with_capacity(snr_db.len());
    let mut water = Vec::with_capacity(snr_db.len());
    for &db in snr_db {
        let rho = db_to_linear(db);
        let ep = equal_power_efficiency(&gains, rho);
        let wf = water_filling_efficiency(&gains, rho).max(ep);
        equal_power.push(ep);
        water.push(wf);
    }
    let throughput_bps = match policy {
        PowerPolicy::EqualPower => &equal_power,
        PowerPolicy::WaterFilling => &water,
    }
    .iter()
    .map(|c| c * bandwidth)
    .collect();
    CapacityCurve {
        snr_db: snr_db.to_vec(),
        equal_power,
        water_filling: water,
        policy,
        bandwidth,
        throughput_bps,
    }
}
