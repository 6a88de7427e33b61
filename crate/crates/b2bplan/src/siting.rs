//! Connection-point selection: rank candidate buses by the weighted sum of
//! voltage-sensitivity impact and conductor distance to the major DER plants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{
    column_sensitivity_sum, electrical_distance, FeederNetwork, SensitivityMatrices,
};

/// How the magnitude-adjustment coefficient for the distance term is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[derive(Default)]
pub enum RMode {
    /// max(p_sums) / max(dist_sums), so both objective terms share a scale.
    #[default]
    Auto,
    Explicit(f64),
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SitingConfig {
    /// Weight of the voltage-sensitivity term.
    pub alpha: f64,
    /// Weight of the DER-distance term; alpha + beta = 1.
    pub beta: f64,
    /// Buses hosting the major DER plants.
    pub der_buses: Vec<usize>,
    pub r_mode: RMode,
    pub excluded_buses: Vec<usize>,
}

impl Default for SitingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
            der_buses: Vec::new(),
            r_mode: RMode::Auto,
            excluded_buses: Vec::new(),
        }
    }
}

impl SitingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidConfig(format!(
                "alpha and beta must be in [0, 1], got ({}, {})",
                self.alpha, self.beta
            )));
        }
        if (self.alpha + self.beta - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "alpha + beta must equal 1, got {}",
                self.alpha + self.beta
            )));
        }
        if self.beta > 0.0 && self.der_buses.is_empty() {
            return Err(Error::InvalidConfig(
                "der_buses must be nonempty when beta > 0".into(),
            ));
        }
        if let RMode::Explicit(r) = self.r_mode {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "explicit r must be finite and nonnegative, got {r}"
                )));
            }
        }
        Ok(())
    }
}

/// Objective breakdown for one candidate bus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BusObjective {
    pub bus_id: usize,
    pub p_sum: f64,
    pub dist_sum_km: f64,
    pub c_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SitingResult {
    /// Candidates in ascending bus-id order.
    pub per_bus: Vec<BusObjective>,
    pub selected_bus: usize,
    pub r_used: f64,
}

/// Signed voltage change at bus `a` caused by a real-power change at bus `l`.
pub fn voltage_change_at(
    m: &SensitivityMatrices,
    a: usize,
    l: usize,
    delta_p_kw: f64,
) -> Result<f64> {
    Ok(m.vlsmp_entry(a, l)? * delta_p_kw)
}

/// Magnitude of the feeder-wide voltage change for a power change at bus `l`:
/// the absolute column sum times |delta P|.
pub fn total_voltage_change(m: &SensitivityMatrices, l: usize, delta_p_kw: f64) -> Result<f64> {
    Ok(column_sensitivity_sum(m, l)? * delta_p_kw.abs())
}

/// Scale coefficient that brings the distance sums to the level of the
/// sensitivity sums: max(p_sums) / max(dist_sums).
pub fn magnitude_ratio(p_sums: &[f64], dist_sums: &[f64]) -> Result<f64> {
    if p_sums.is_empty() || dist_sums.is_empty() {
        return Err(Error::InvalidInput("magnitude ratio needs nonempty sequences".into()));
    }
    let max_p = p_sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let max_d = dist_sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max_d.is_nan() || max_d <= 0.0 {
        return Err(Error::InvalidInput(
            "all DER distances are zero; distance term cannot be scaled".into(),
        ));
    }
    Ok(max_p / max_d)
}

/// Evaluates C(l) = alpha * p_sum(l) + beta * r * sum of distances to the DER
/// buses for every candidate bus and selects the minimizer (lowest bus id on
/// ties). The source bus is never a candidate.
pub fn site_connection_point(
    net: &FeederNetwork,
    m: &SensitivityMatrices,
    cfg: &SitingConfig,
) -> Result<SitingResult> {
    cfg.validate()?;
    for id in cfg.der_buses.iter().chain(&cfg.excluded_buses) {
        net.bus_index(*id)?;
    }

    let mut candidate_ids: Vec<usize> = net
        .buses()
        .iter()
        .map(|b| b.id)
        .filter(|id| *id != net.source_id() && !cfg.excluded_buses.contains(id))
        .collect();
    candidate_ids.sort_unstable();
    if candidate_ids.is_empty() {
        return Err(Error::InvalidInput("no candidate buses for siting".into()));
    }

    let mut p_sums = Vec::with_capacity(candidate_ids.len());
    let mut dist_sums = Vec::with_capacity(candidate_ids.len());
    for &l in &candidate_ids {
        p_sums.push(column_sensitivity_sum(m, l)?);
        let mut d = 0.0;
        for &b in &cfg.der_buses {
            d += electrical_distance(net, b, l)?;
        }
        dist_sums.push(d);
    }

    let r_used = match cfg.r_mode {
        RMode::Explicit(r) => r,
        RMode::Auto if cfg.beta > 0.0 => magnitude_ratio(&p_sums, &dist_sums)?,
        RMode::Auto => 0.0,
    };

    let mut per_bus = Vec::with_capacity(candidate_ids.len());
    let mut selected = None;
    for (i, &bus_id) in candidate_ids.iter().enumerate() {
        let c_value = cfg.alpha * p_sums[i] + cfg.beta * r_used * dist_sums[i];
        per_bus.push(BusObjective {
            bus_id,
            p_sum: p_sums[i],
            dist_sum_km: dist_sums[i],
            c_value,
        });
        match selected {
            Some(best) => {
                if c_value < per_bus[best as usize].c_value {
                    selected = Some(i as u32);
                }
            }
            None => selected = Some(i as u32),
        }
    }
    let selected_bus = per_bus[selected.unwrap() as usize].bus_id;

    Ok(SitingResult {
        per_bus,
        selected_bus,
        r_used,
    })
}
