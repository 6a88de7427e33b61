//! Converter power-transfer simulation between two feeders and the
//! savings-vs-size sweep.

use crate::error::{Error, Result};
use crate::profiles::{net_load, FeederProfile, TimeSeries};

/// Converter rating and real-power transfer efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverterSpec {
    size_kva: f64,
    efficiency: f64,
}

impl ConverterSpec {
    pub fn new(size_kva: f64, efficiency: f64) -> Result<Self> {
        if !size_kva.is_finite() || size_kva < 0.0 {
            return Err(Error::InvalidInput(format!(
                "size_kva must be nonnegative, got {size_kva}"
            )));
        }
        if efficiency.is_nan() || efficiency <= 0.0 || efficiency > 1.0 {
            return Err(Error::InvalidInput(format!(
                "efficiency must be in (0, 1], got {efficiency}"
            )));
        }
        Ok(Self { size_kva, efficiency })
    }

    pub fn size_kva(&self) -> f64 {
        self.size_kva
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }
}

/// Real-power transfer cap in kW: efficiency times rating, with kVA treated
/// as kW for real-power transfer.
pub fn transfer_limit(spec: &ConverterSpec) -> f64 {
    spec.efficiency * spec.size_kva
}

/// How per-step savings are derived from the transferred power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SavingsMode {
    /// save(t) = max(0, P_c(t) - P_limit). Power below the back-feed limit
    /// was never at curtailment risk, so savings are clamped at zero.
    #[default]
    LiteralClamp,
    /// save(t) = max(0, min(P_c(t), |P_net_donor(t)| - P_limit)): savings
    /// additionally capped by the amount that would have been curtailed.
    CurtailmentCap,
}

/// Per-step traces and accumulated energy savings of one transfer simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferResult {
    pub p_c_12: TimeSeries,
    pub p_c_21: TimeSeries,
    pub net1_after: TimeSeries,
    pub net2_after: TimeSeries,
    pub save1: TimeSeries,
    pub save2: TimeSeries,
    pub e_save1_kwh: f64,
    pub e_save2_kwh: f64,
}

/// Simulates the converter between two aligned feeders at every time step.
///
/// When one feeder has excess generation (net < 0) and the other has uncovered
/// load (net > 0), the excess under the converter limit is transferred; the
/// same quantity is added to the donor's net and subtracted from the
/// recipient's, so the step sum is conserved.
pub fn simulate_transfer(
    p1: &FeederProfile,
    p2: &FeederProfile,
    spec: &ConverterSpec,
) -> Result<TransferResult> {
    simulate_transfer_with(p1, p2, spec, SavingsMode::LiteralClamp)
}

pub fn simulate_transfer_with(
    p1: &FeederProfile,
    p2: &FeederProfile,
    spec: &ConverterSpec,
    mode: SavingsMode,
) -> Result<TransferResult> {
    if p1.len() != p2.len() || p1.step_hours() != p2.step_hours() {
        return Err(Error::MisalignedProfiles(format!(
            "feeder 1 has {} steps of {} h, feeder 2 has {} steps of {} h",
            p1.len(),
            p1.step_hours(),
            p2.len(),
            p2.step_hours()
        )));
    }

    let limit = transfer_limit(spec);
    let net1 = net_load(p1);
    let net2 = net_load(p2);
    let n = net1.len();

    let mut pc12 = vec![0.0; n];
    let mut pc21 = vec![0.0; n];
    let mut net1_after = Vec::with_capacity(n);
    let mut net2_after = Vec::with_capacity(n);
    let mut save1 = vec![0.0; n];
    let mut save2 = vec![0.0; n];

    for t in 0..n {
        let n1 = net1.values()[t];
        let n2 = net2.values()[t];
        if n1 < 0.0 && n2 > 0.0 {
            let pc = n1.abs().min(n2).min(limit);
            pc12[t] = pc;
            net1_after.push(n1 + pc);
            net2_after.push(n2 - pc);
            save1[t] = step_savings(pc, n1.abs(), p1.backfeed_limit_kw(), mode);
        } else if n1 > 0.0 && n2 < 0.0 {
            let pc = n1.min(n2.abs()).min(limit);
            pc21[t] = pc;
            net1_after.push(n1 - pc);
            net2_after.push(n2 + pc);
            save2[t] = step_savings(pc, n2.abs(), p2.backfeed_limit_kw(), mode);
        } else {
            net1_after.push(n1);
            net2_after.push(n2);
        }
    }

    let dt = p1.step_hours();
    let e1: f64 = save1.iter().map(|s| s * dt).sum();
    let e2: f64 = save2.iter().map(|s| s * dt).sum();

    let label = net1.start_label().to_string();
    let mk = |values: Vec<f64>| TimeSeries::new(label.clone(), dt, values);
    Ok(TransferResult {
        p_c_12: mk(pc12)?,
        p_c_21: mk(pc21)?,
        net1_after: mk(net1_after)?,
        net2_after: mk(net2_after)?,
        save1: mk(save1)?,
        save2: mk(save2)?,
        e_save1_kwh: e1,
        e_save2_kwh: e2,
    })
}

fn step_savings(pc: f64, donor_excess: f64, backfeed_limit: f64, mode: SavingsMode) -> f64 {
    match mode {
        SavingsMode::LiteralClamp => (pc - backfeed_limit).max(0.0),
        SavingsMode::CurtailmentCap => pc.min(donor_excess - backfeed_limit).max(0.0),
    }
}

/// Total energy savings over the simulated period, per feeder, in kWh.
pub fn annual_savings(r: &TransferResult) -> (f64, f64) {
    let dt = r.save1.step_hours();
    let e1 = r.save1.values().iter().map(|s| s * dt).sum();
    let e2 = r.save2.values().iter().map(|s| s * dt).sum();
    (e1, e2)
}

/// Energy savings per feeder as a function of converter size.
#[derive(Debug, Clone, PartialEq)]
pub struct SavingsCurve {
    sizes_kva: Vec<f64>,
    f1_kwh: Vec<f64>,
    f2_kwh: Vec<f64>,
    e_save1_max_kwh: f64,
    e_save2_max_kwh: f64,
}

impl SavingsCurve {
    pub fn new(sizes_kva: Vec<f64>, f1_kwh: Vec<f64>, f2_kwh: Vec<f64>) -> Result<Self> {
        validate_grid(&sizes_kva)?;
        if f1_kwh.len() != sizes_kva.len() || f2_kwh.len() != sizes_kva.len() {
            return Err(Error::InvalidGrid(format!(
                "savings sequences must match the grid length {}",
                sizes_kva.len()
            )));
        }
        for f in [&f1_kwh, &f2_kwh] {
            if f.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                return Err(Error::InvalidGrid("savings must be finite and nonnegative".into()));
            }
            if f.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidGrid(
                    "savings must be nondecreasing in converter size".into(),
                ));
            }
        }
        let e1 = f1_kwh.iter().cloned().fold(0.0, f64::max);
        let e2 = f2_kwh.iter().cloned().fold(0.0, f64::max);
        Ok(Self {
            sizes_kva,
            f1_kwh,
            f2_kwh,
            e_save1_max_kwh: e1,
            e_save2_max_kwh: e2,
        })
    }

    pub fn sizes_kva(&self) -> &[f64] {
        &self.sizes_kva
    }

    pub fn f1_kwh(&self) -> &[f64] {
        &self.f1_kwh
    }

    pub fn f2_kwh(&self) -> &[f64] {
        &self.f2_kwh
    }

    pub fn e_save1_max_kwh(&self) -> f64 {
        self.e_save1_max_kwh
    }

    pub fn e_save2_max_kwh(&self) -> f64 {
        self.e_save2_max_kwh
    }
}

pub(crate) fn validate_grid(sizes: &[f64]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::InvalidGrid(format!(
            "size grid needs at least 2 points, got {}",
            sizes.len()
        )));
    }
    if sizes.iter().any(|s| *s < 0.0 || !s.is_finite()) {
        return Err(Error::InvalidGrid("sizes must be finite and nonnegative".into()));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("size grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Sweeps the size grid, simulating the transfer per size, and records the
/// per-feeder savings functions f1 and f2.
pub fn savings_curve(
    p1: &FeederProfile,
    p2: &FeederProfile,
    sizes_kva: &[f64],
    efficiency: f64,
) -> Result<SavingsCurve> {
    savings_curve_with(p1, p2, sizes_kva, efficiency, SavingsMode::LiteralClamp)
}

pub fn savings_curve_with(
    p1: &FeederProfile,
    p2: &FeederProfile,
    sizes_kva: &[f64],
    efficiency: f64,
    mode: SavingsMode,
) -> Result<SavingsCurve> {
    validate_grid(sizes_kva)?;
    let mut f1 = Vec::with_capacity(sizes_kva.len());
    let mut f2 = Vec::with_capacity(sizes_kva.len());
    for &size in sizes_kva {
        let spec = ConverterSpec::new(size, efficiency)?;
        let r = simulate_transfer_with(p1, p2, &spec, mode)?;
        f1.push(r.e_save1_kwh);
        f2.push(r.e_save2_kwh);
    }
    SavingsCurve::new(sizes_kva.to_vec(), f1, f2)
}
