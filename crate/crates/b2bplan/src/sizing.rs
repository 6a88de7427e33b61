//! Net-revenue economics over the size grid, candidate extraction via
//! discrete derivatives and payback analysis, and the final size selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transfer::{validate_grid, SavingsCurve};

/// Prices, horizon, and value-retention limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EconomicParams {
    /// Energy price in $/kWh.
    pub lambda_pv: f64,
    /// Converter capital cost in $/kVA.
    pub lambda_c: f64,
    /// Maintenance cost in $/year.
    pub lambda_cm: f64,
    /// Planning horizon in years.
    pub n_yr: f64,
    /// Minimum retained portion of feeder 1's maximum net revenue, in (0, 1].
    pub p1_limit: f64,
    /// Minimum retained portion of feeder 2's maximum net revenue, in (0, 1].
    pub p2_limit: f64,
}

impl Default for EconomicParams {
    fn default() -> Self {
        Self {
            lambda_pv: 0.1,
            lambda_c: 100.0,
            lambda_cm: 0.0,
            n_yr: 10.0,
            p1_limit: 0.8,
            p2_limit: 0.8,
        }
    }
}

impl EconomicParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_pv", self.lambda_pv),
            ("lambda_c", self.lambda_c),
            ("lambda_cm", self.lambda_cm),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be nonnegative, got {v}")));
            }
        }
        if self.n_yr.is_nan() || self.n_yr < 1.0 {
            return Err(Error::InvalidConfig(format!("n_yr must be at least 1, got {}", self.n_yr)));
        }
        for (name, v) in [("p1_limit", self.p1_limit), ("p2_limit", self.p2_limit)] {
            if v.is_nan() || v <= 0.0 || v > 1.0 {
                return Err(Error::InvalidConfig(format!("{name} must be in (0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Capital and maintenance cost split between the feeders; the feeder that
/// gains more savings pays the larger share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostSplit {
    gamma1: f64,
    gamma2: f64,
}

impl CostSplit {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma1) || !(0.0..=1.0).contains(&gamma2) {
            return Err(Error::InvalidInput(format!(
                "cost shares must be in [0, 1], got ({gamma1}, {gamma2})"
            )));
        }
        if (gamma1 + gamma2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "cost shares must sum to 1, got {}",
                gamma1 + gamma2
            )));
        }
        Ok(Self { gamma1, gamma2 })
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }
}

/// Splits costs proportionally to each feeder's maximum achievable savings.
pub fn cost_split(curve: &SavingsCurve) -> Result<CostSplit> {
    let e1 = curve.e_save1_max_kwh();
    let e2 = curve.e_save2_max_kwh();
    let total = e1 + e2;
    if total <= 0.0 {
        return Err(Error::NoExchangeableEnergy);
    }
    let gamma1 = e1 / total;
    CostSplit::new(gamma1, 1.0 - gamma1)
}

/// Net revenue over the size grid: combined and per feeder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetRevenueCurve {
    sizes_kva: Vec<f64>,
    nr: Vec<f64>,
    nr1: Vec<f64>,
    nr2: Vec<f64>,
}

impl NetRevenueCurve {
    pub fn sizes_kva(&self) -> &[f64] {
        &self.sizes_kva
    }

    pub fn nr(&self) -> &[f64] {
        &self.nr
    }

    pub fn nr1(&self) -> &[f64] {
        &self.nr1
    }

    pub fn nr2(&self) -> &[f64] {
        &self.nr2
    }
}

/// NR(S) = n_yr * lambda_pv * (f1 + f2) - lambda_c * S - n_yr * lambda_cm,
/// with the per-feeder cost term gamma_i * (lambda_c * S + n_yr * lambda_cm).
pub fn net_revenue_curves(
    curve: &SavingsCurve,
    econ: &EconomicParams,
    split: &CostSplit,
) -> Result<NetRevenueCurve> {
    econ.validate()?;
    let sizes = curve.sizes_kva().to_vec();
    let mut nr = Vec::with_capacity(sizes.len());
    let mut nr1 = Vec::with_capacity(sizes.len());
    let mut nr2 = Vec::with_capacity(sizes.len());
    let maint = econ.n_yr * econ.lambda_cm;
    for (i, &s) in sizes.iter().enumerate() {
        let f1 = curve.f1_kwh()[i];
        let f2 = curve.f2_kwh()[i];
        let cost = econ.lambda_c * s + maint;
        nr.push(econ.n_yr * econ.lambda_pv * (f1 + f2) - cost);
        nr1.push(econ.n_yr * econ.lambda_pv * f1 - split.gamma1() * cost);
        nr2.push(econ.n_yr * econ.lambda_pv * f2 - split.gamma2() * cost);
    }
    for i in 0..sizes.len() {
        let sum = nr1[i] + nr2[i];
        debug_assert!(
            (sum - nr[i]).abs() <= 1e-9 * nr[i].abs().max(1.0),
            "per-feeder revenues must decompose the total"
        );
    }
    Ok(NetRevenueCurve { sizes_kva: sizes, nr, nr1, nr2 })
}

/// Forward differences of a per-size value sequence, orders 1 to 3.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeSet {
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

impl DerivativeSet {
    pub fn d1(&self) -> &[f64] {
        &self.d1
    }

    pub fn d2(&self) -> &[f64] {
        &self.d2
    }

    pub fn d3(&self) -> &[f64] {
        &self.d3
    }
}

pub fn discrete_derivatives(values: &[f64]) -> Result<DerivativeSet> {
    if values.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 values for third differences, got {}",
            values.len()
        )));
    }
    let diff = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).collect::<Vec<f64>>();
    let d1 = diff(values);
    let d2 = diff(&d1);
    let d3 = diff(&d2);
    Ok(DerivativeSet { d1, d2, d3 })
}

/// Grid size at the global maximum of a net-revenue sequence; the discrete
/// argmax is where the first difference crosses zero. Ties break toward the
/// smaller size.
pub fn find_s_max(nr: &[f64], grid: &[f64]) -> Result<f64> {
    Ok(grid[argmax_first(nr, grid)?])
}

fn argmax_first(values: &[f64], grid: &[f64]) -> Result<usize> {
    if values.is_empty() || values.len() != grid.len() {
        return Err(Error::InvalidInput(format!(
            "curve length {} must match grid length {} and be nonempty",
            values.len(),
            grid.len()
        )));
    }
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Grid sizes where the second or third difference attains a strict local
/// extremum, mapped back to the size each difference is indexed by;
/// deduplicated and ascending.
pub fn turning_points(d: &DerivativeSet, grid: &[f64]) -> Result<Vec<f64>> {
    if grid.len() != d.d1.len() + 1 {
        return Err(Error::InvalidInput(format!(
            "grid length {} does not match derivative set of base length {}",
            grid.len(),
            d.d1.len() + 1
        )));
    }
    let mut sizes = Vec::new();
    // d2[j] is indexed by grid[j + 2], d3[j] by grid[j + 3].
    collect_strict_extrema(&d.d2, 2, grid, &mut sizes);
    collect_strict_extrema(&d.d3, 3, grid, &mut sizes);
    sizes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sizes.dedup();
    Ok(sizes)
}

fn collect_strict_extrema(seq: &[f64], offset: usize, grid: &[f64], out: &mut Vec<f64>) {
    for j in 1..seq.len().saturating_sub(1) {
        let (prev, cur, next) = (seq[j - 1], seq[j], seq[j + 1]);
        let strict_min = cur < prev && cur < next;
        let strict_max = cur > prev && cur > next;
        if strict_min || strict_max {
            out.push(grid[j + offset]);
        }
    }
}

/// Payback-time analysis: time of return, value of return, their scale
/// ratio, and the scaled difference whose argmax is the payback candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnAnalysis {
    /// Years to pay back capital from annual savings revenue; +inf where the
    /// feeder saves nothing at that size.
    tor_years: Vec<f64>,
    vol_dollars: Vec<f64>,
    ratio_vt: f64,
    dvt: Vec<f64>,
}

impl ReturnAnalysis {
    pub fn tor_years(&self) -> &[f64] {
        &self.tor_years
    }

    pub fn vol_dollars(&self) -> &[f64] {
        &self.vol_dollars
    }

    pub fn ratio_vt(&self) -> f64 {
        self.ratio_vt
    }

    pub fn dvt(&self) -> &[f64] {
        &self.dvt
    }

    /// Index of the finite maximum of the scaled value-minus-time series;
    /// sizes where the feeder saves nothing are excluded. Ties break toward
    /// the smaller size.
    pub fn opt_tor_index(&self) -> usize {
        let mut best: Option<usize> = None;
        for (i, v) in self.dvt.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            match best {
                Some(b) if self.dvt[b] >= *v => {}
                _ => best = Some(i),
            }
        }
        best.expect("construction guarantees at least one finite entry")
    }

    pub fn opt_tor_kva(&self, grid: &[f64]) -> f64 {
        grid[self.opt_tor_index()]
    }
}

/// Time of return ToR(S) = lambda_c * S / (lambda_pv * f(S)) in years (annual
/// revenue pays back capital, so the horizon does not appear), value of
/// return Vol(S) = n_yr * lambda_pv * f(S), and their scaled difference.
pub fn return_analysis(f: &[f64], grid: &[f64], econ: &EconomicParams) -> Result<ReturnAnalysis> {
    econ.validate()?;
    if f.len() != grid.len() || f.is_empty() {
        return Err(Error::InvalidInput(format!(
            "savings length {} must match grid length {} and be nonempty",
            f.len(),
            grid.len()
        )));
    }
    if f.iter().all(|v| *v <= 0.0) {
        return Err(Error::InvalidInput(
            "all savings are zero; time of return is undefined".into(),
        ));
    }
    if econ.lambda_pv <= 0.0 {
        return Err(Error::InvalidInput(
            "time of return undefined with a zero energy price".into(),
        ));
    }

    let tor: Vec<f64> = f
        .iter()
        .zip(grid)
        .map(|(fi, s)| {
            if *fi > 0.0 {
                econ.lambda_c * s / (econ.lambda_pv * fi)
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let vol: Vec<f64> = f.iter().map(|fi| econ.n_yr * econ.lambda_pv * fi).collect();

    let max_vol = vol.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_tor = tor
        .iter()
        .filter(|t| t.is_finite())
        .fold(0.0f64, |m, t| m.max(t.abs()));
    if max_tor <= 0.0 {
        return Err(Error::InvalidInput(
            "all finite times of return are zero; scale ratio undefined".into(),
        ));
    }
    let ratio_vt = max_vol / max_tor;
    let dvt: Vec<f64> = vol.iter().zip(&tor).map(|(v, t)| v / ratio_vt - t).collect();

    Ok(ReturnAnalysis { tor_years: tor, vol_dollars: vol, ratio_vt, dvt })
}

/// Smallest grid size, on the ascending approach to the feeder's revenue
/// maximum, that still retains `p_limit` of that maximum.
pub fn per_feeder_min_size(nr: &[f64], grid: &[f64], p_limit: f64, feeder: u8) -> Result<f64> {
    let m = argmax_first(nr, grid)?;
    let nr_max = nr[m];
    if nr_max <= 0.0 {
        return Err(Error::Uneconomic { feeder, nr_max });
    }
    let threshold = p_limit * nr_max;
    for (k, v) in nr.iter().enumerate().take(m + 1) {
        if *v >= threshold {
            return Ok(grid[k]);
        }
    }
    Ok(grid[m])
}

/// Combined minimum size: the larger of the two per-feeder minimum sizes.
pub fn min_sizes(nr1: &[f64], nr2: &[f64], grid: &[f64], econ: &EconomicParams) -> Result<f64> {
    let s1 = per_feeder_min_size(nr1, grid, econ.p1_limit, 1)?;
    let s2 = per_feeder_min_size(nr2, grid, econ.p2_limit, 2)?;
    Ok(s1.max(s2))
}

/// Candidate sizes collected from the derivative and payback analyses,
/// bracketed by the combined minimum and the per-feeder revenue maxima.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeOptionTable {
    pub s_min_kva: f64,
    pub opt_j1_kva: Vec<f64>,
    pub opt_j2_kva: Vec<f64>,
    pub opt_tor1_kva: f64,
    pub opt_tor2_kva: f64,
    /// Feeder 1's own revenue-maximum size; caps feeder 1's candidates.
    pub s1_max_kva: f64,
    /// Feeder 2's own revenue-maximum size; caps feeder 2's candidates.
    pub s2_max_kva: f64,
    /// Combined maximum, max(s1_max, s2_max).
    pub s_max_kva: f64,
}

impl SizeOptionTable {
    pub fn new(
        s_min_kva: f64,
        opt_j1_kva: Vec<f64>,
        opt_j2_kva: Vec<f64>,
        opt_tor1_kva: f64,
        opt_tor2_kva: f64,
        s1_max_kva: f64,
        s2_max_kva: f64,
    ) -> Result<Self> {
        let s_max_kva = s1_max_kva.max(s2_max_kva);
        if s_min_kva > s_max_kva {
            return Err(Error::InvalidInput(format!(
                "minimum size {s_min_kva} exceeds maximum size {s_max_kva}"
            )));
        }
        Ok(Self {
            s_min_kva,
            opt_j1_kva,
            opt_j2_kva,
            opt_tor1_kva,
            opt_tor2_kva,
            s1_max_kva,
            s2_max_kva,
            s_max_kva,
        })
    }
}

/// Which selection rule produced the decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Every candidate fell below the minimum size; the minimum is selected.
    AllBelowMin,
    /// Minimum over the per-option maxima of the surviving candidates.
    MinOfMaxes,
}

/// The option table after filtering: only candidates between the combined
/// minimum and their own feeder's maximum survive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeOptionSubset {
    pub opt_j1_kva: Vec<f64>,
    pub opt_j2_kva: Vec<f64>,
    pub opt_tor1_kva: Option<f64>,
    pub opt_tor2_kva: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizingDecision {
    pub s_opt_kva: f64,
    pub rule_applied: SelectionRule,
    pub subset: SizeOptionSubset,
    pub audit: Vec<String>,
}

/// Selects the optimal size from the option table.
///
/// Candidates survive when strictly above the combined minimum and strictly
/// below their own feeder's revenue-maximum size. If no candidate survives,
/// the minimum size is selected; otherwise the result is the smallest of the
/// surviving options' per-group maxima (the two payback candidates form one
/// group).
pub fn select_optimal(table: &SizeOptionTable) -> SizingDecision {
    let mut audit = Vec::new();
    audit.push(format!(
        "bounds: min {} kVA, feeder maxima {} / {} kVA (combined {} kVA)",
        table.s_min_kva, table.s1_max_kva, table.s2_max_kva, table.s_max_kva
    ));

    let keep = |c: f64, own_max: f64| c > table.s_min_kva && c < own_max;
    let filter_list = |list: &[f64], own_max: f64, name: &str, audit: &mut Vec<String>| {
        let survivors: Vec<f64> = list.iter().cloned().filter(|c| keep(*c, own_max)).collect();
        audit.push(format!("{name}: candidates {list:?} -> survivors {survivors:?}"));
        survivors
    };

    let g1 = filter_list(&table.opt_j1_kva, table.s1_max_kva, "derivative candidates, feeder 1", &mut audit);
    let g2 = filter_list(&table.opt_j2_kva, table.s2_max_kva, "derivative candidates, feeder 2", &mut audit);
    let mut g_tor = Vec::new();
    for (c, own_max, name) in [
        (table.opt_tor1_kva, table.s1_max_kva, "payback candidate, feeder 1"),
        (table.opt_tor2_kva, table.s2_max_kva, "payback candidate, feeder 2"),
    ] {
        let kept = keep(c, own_max);
        audit.push(format!("{name}: {c} kVA -> {}", if kept { "kept" } else { "dropped" }));
        if kept {
            g_tor.push(c);
        }
    }

    let max_of = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let subset = SizeOptionSubset {
        opt_j1_kva: g1.clone(),
        opt_j2_kva: g2.clone(),
        opt_tor1_kva: keep(table.opt_tor1_kva, table.s1_max_kva).then_some(table.opt_tor1_kva),
        opt_tor2_kva: keep(table.opt_tor2_kva, table.s2_max_kva).then_some(table.opt_tor2_kva),
    };

    if g1.is_empty() && g2.is_empty() && g_tor.is_empty() {
        audit.push(format!(
            "no candidate survived; selecting the minimum size {} kVA",
            table.s_min_kva
        ));
        return SizingDecision {
            s_opt_kva: table.s_min_kva,
            rule_applied: SelectionRule::AllBelowMin,
            subset,
            audit,
        };
    }

    let mut group_maxima = Vec::new();
    for (g, name) in [(&g1, "feeder 1 derivative"), (&g2, "feeder 2 derivative"), (&g_tor, "payback")] {
        if !g.is_empty() {
            let m = max_of(g);
            audit.push(format!("{name} group maximum: {m} kVA"));
            group_maxima.push(m);
        }
    }
    let s_opt = group_maxima.iter().cloned().fold(f64::INFINITY, f64::min);
    audit.push(format!("smallest group maximum: {s_opt} kVA"));

    SizingDecision {
        s_opt_kva: s_opt,
        rule_applied: SelectionRule::MinOfMaxes,
        subset,
        audit,
    }
}

/// Everything the full size-selection workflow produces, from the savings
/// curve to the decision.
#[derive(Debug, Clone)]
pub struct SizingAnalysis {
    pub curve: SavingsCurve,
    pub split: CostSplit,
    pub revenue: NetRevenueCurve,
    pub derivatives1: DerivativeSet,
    pub derivatives2: DerivativeSet,
    pub turning_points1: Vec<f64>,
    pub turning_points2: Vec<f64>,
    pub return1: ReturnAnalysis,
    pub return2: ReturnAnalysis,
    pub table: SizeOptionTable,
    pub decision: SizingDecision,
}

/// Runs the complete size-selection chain on a savings curve.
pub fn analyze_sizing(curve: &SavingsCurve, econ: &EconomicParams) -> Result<SizingAnalysis> {
    econ.validate()?;
    let grid = curve.sizes_kva();
    validate_grid(grid)?;
    if grid.len() < 4 {
        return Err(Error::InvalidGrid(format!(
            "size grid needs at least 4 points for third differences, got {}",
            grid.len()
        )));
    }

    let split = cost_split(curve)?;
    let revenue = net_revenue_curves(curve, econ, &split)?;

    let derivatives1 = discrete_derivatives(revenue.nr1())?;
    let derivatives2 = discrete_derivatives(revenue.nr2())?;
    let turning_points1 = turning_points(&derivatives1, grid)?;
    let turning_points2 = turning_points(&derivatives2, grid)?;

    let return1 = return_analysis(curve.f1_kwh(), grid, econ)?;
    let return2 = return_analysis(curve.f2_kwh(), grid, econ)?;

    let s1_max = find_s_max(revenue.nr1(), grid)?;
    let s2_max = find_s_max(revenue.nr2(), grid)?;
    let s1_min = per_feeder_min_size(revenue.nr1(), grid, econ.p1_limit, 1)?;
    let s2_min = per_feeder_min_size(revenue.nr2(), grid, econ.p2_limit, 2)?;
    let s_min = s1_min.max(s2_min);

    let table = SizeOptionTable::new(
        s_min,
        turning_points1.clone(),
        turning_points2.clone(),
        return1.opt_tor_kva(grid),
        return2.opt_tor_kva(grid),
        s1_max,
        s2_max,
    )?;
    let decision = select_optimal(&table);

    Ok(SizingAnalysis {
        curve: curve.clone(),
        split,
        revenue,
        derivatives1,
        derivatives2,
        turning_points1,
        turning_points2,
        return1,
        return2,
        table,
        decision,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn econ() -> EconomicParams {
        EconomicParams {
            lambda_pv: 0.1,
            lambda_c: 100.0,
            lambda_cm: 0.0,
            n_yr: 10.0,
            p1_limit: 0.8,
            p2_limit: 0.8,
        }
    }

    fn curve(sizes: &[f64], f1: &[f64], f2: &[f64]) -> SavingsCurve {
        SavingsCurve::new(sizes.to_vec(), f1.to_vec(), f2.to_vec()).unwrap()
    }

    #[test]
    fn cost_split_cases() {
        let c = curve(&[100.0, 200.0], &[100.0, 300.0], &[50.0, 100.0]);
        let s = cost_split(&c).unwrap();
        assert_eq!((s.gamma1(), s.gamma2()), (0.75, 0.25));

        let c = curve(&[100.0, 200.0], &[0.0, 100.0], &[0.0, 100.0]);
        let s = cost_split(&c).unwrap();
        assert_eq!((s.gamma1(), s.gamma2()), (0.5, 0.5));

        let c = curve(&[100.0, 200.0], &[1.0, 1.0], &[0.0, 0.0]);
        let s = cost_split(&c).unwrap();
        assert_eq!((s.gamma1(), s.gamma2()), (1.0, 0.0));

        let c = curve(&[100.0, 200.0], &[0.0, 0.0], &[0.0, 0.0]);
        assert!(matches!(cost_split(&c), Err(Error::NoExchangeableEnergy)));
    }

    #[test]
    fn net_revenue_hand_arithmetic() {
        // 10 yr * 0.1 $/kWh * 60000 kWh - 100 $/kVA * 400 kVA = 20000 $
        let c = curve(&[200.0, 400.0], &[20000.0, 30000.0], &[20000.0, 30000.0]);
        let split = cost_split(&c).unwrap();
        let r = net_revenue_curves(&c, &econ(), &split).unwrap();
        assert_relative_eq!(r.nr()[1], 20000.0);
        for i in 0..2 {
            assert_relative_eq!(r.nr1()[i] + r.nr2()[i], r.nr()[i], max_relative = 1e-9);
        }
    }

    #[test]
    fn net_revenue_zero_size_is_maintenance_only() {
        let mut e = econ();
        e.lambda_cm = 5.0;
        let c = curve(&[0.0, 400.0], &[0.0, 1000.0], &[0.0, 1000.0]);
        let split = cost_split(&c).unwrap();
        let r = net_revenue_curves(&c, &e, &split).unwrap();
        assert_relative_eq!(r.nr()[0], -50.0);
    }

    #[test]
    fn derivatives_linear_and_quadratic() {
        let d = discrete_derivatives(&[0.0, 10.0, 20.0, 30.0]).unwrap();
        assert_eq!(d.d1(), &[10.0, 10.0, 10.0]);
        assert_eq!(d.d2(), &[0.0, 0.0]);
        assert_eq!(d.d3(), &[0.0]);

        let d = discrete_derivatives(&[0.0, 1.0, 4.0, 9.0, 16.0]).unwrap();
        assert_eq!(d.d2(), &[2.0, 2.0, 2.0]);
        assert_eq!(d.d3(), &[0.0, 0.0]);

        assert!(discrete_derivatives(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn find_s_max_boundary_and_ties() {
        let grid = [100.0, 200.0, 300.0];
        assert_eq!(find_s_max(&[30.0, 20.0, 10.0], &grid).unwrap(), 100.0);
        assert_eq!(find_s_max(&[10.0, 30.0, 30.0], &grid).unwrap(), 200.0);
    }

    #[test]
    fn turning_points_hand_case() {
        // d1 = {100, 90, 70, 40, 20}, d2 = {-10, -20, -30, -20},
        // d3 = {-10, -10, 10}. Only d2[2] = -30 is a strict extremum,
        // indexed by grid[4] = 300.
        let grid = [100.0, 150.0, 200.0, 250.0, 300.0, 350.0];
        let nr = [0.0, 100.0, 190.0, 260.0, 300.0, 320.0];
        let d = discrete_derivatives(&nr).unwrap();
        assert_eq!(turning_points(&d, &grid).unwrap(), vec![300.0]);
    }

    #[test]
    fn turning_points_empty_for_linear_curve() {
        let grid = [100.0, 150.0, 200.0, 250.0, 300.0];
        let nr = [0.0, 10.0, 20.0, 30.0, 40.0];
        let d = discrete_derivatives(&nr).unwrap();
        assert!(turning_points(&d, &grid).unwrap().is_empty());
    }

    #[test]
    fn return_analysis_hand_arithmetic() {
        // ToR = 100 * 400 / (0.1 * 50000) = 8 years; Vol = 10 * 0.1 * 50000.
        let grid = [200.0, 400.0];
        let f = [20000.0, 50000.0];
        let r = return_analysis(&f, &grid, &econ()).unwrap();
        assert_relative_eq!(r.tor_years()[1], 8.0);
        assert_relative_eq!(r.vol_dollars()[1], 50000.0);
    }

    #[test]
    fn return_analysis_zero_savings_points_are_excluded() {
        let grid = [100.0, 200.0, 300.0];
        let f = [0.0, 40000.0, 50000.0];
        let r = return_analysis(&f, &grid, &econ()).unwrap();
        assert!(r.tor_years()[0].is_infinite());
        assert!(r.dvt()[0] == f64::NEG_INFINITY);
        let idx = r.opt_tor_index();
        assert!(idx > 0, "infinite-ToR point must not win the argmax");

        assert!(return_analysis(&[0.0, 0.0], &[100.0, 200.0], &econ()).is_err());
    }

    #[test]
    fn min_sizes_triangle_curve() {
        let grid = [100.0, 200.0, 300.0, 400.0];
        let nr = [50.0, 80.0, 100.0, 90.0];
        assert_eq!(per_feeder_min_size(&nr, &grid, 0.8, 1).unwrap(), 200.0);
        assert_eq!(per_feeder_min_size(&nr, &grid, 1.0, 1).unwrap(), 300.0);
        let neg = [-10.0, -5.0, -1.0, -2.0];
        assert!(matches!(
            per_feeder_min_size(&neg, &grid, 0.8, 2),
            Err(Error::Uneconomic { feeder: 2, .. })
        ));
    }

    fn case1_table() -> SizeOptionTable {
        SizeOptionTable::new(350.0, vec![500.0], vec![400.0, 450.0], 600.0, 350.0, 700.0, 450.0)
            .unwrap()
    }

    fn case2_table() -> SizeOptionTable {
        SizeOptionTable::new(550.0, vec![400.0, 600.0, 700.0], vec![400.0], 700.0, 450.0, 900.0, 550.0)
            .unwrap()
    }

    #[test]
    fn select_optimal_case1_is_400() {
        let d = select_optimal(&case1_table());
        assert_eq!(d.s_opt_kva, 400.0);
        assert_eq!(d.rule_applied, SelectionRule::MinOfMaxes);
        assert_eq!(d.subset.opt_j2_kva, vec![400.0]);
    }

    #[test]
    fn select_optimal_case2_is_700() {
        let d = select_optimal(&case2_table());
        assert_eq!(d.s_opt_kva, 700.0);
        assert_eq!(d.rule_applied, SelectionRule::MinOfMaxes);
        assert_eq!(d.subset.opt_j1_kva, vec![600.0, 700.0]);
        assert!(d.subset.opt_j2_kva.is_empty());
    }

    #[test]
    fn select_optimal_fallback_to_min() {
        let t = SizeOptionTable::new(500.0, vec![300.0], vec![200.0], 400.0, 100.0, 800.0, 600.0)
            .unwrap();
        let d = select_optimal(&t);
        assert_eq!(d.s_opt_kva, 500.0);
        assert_eq!(d.rule_applied, SelectionRule::AllBelowMin);
    }

    proptest! {
        #[test]
        fn derivative_prefix_sum_inverse(values in proptest::collection::vec(-1e6f64..1e6, 4..64)) {
            let d = discrete_derivatives(&values).unwrap();
            let mut rebuilt = vec![values[0]];
            for step in d.d1() {
                rebuilt.push(rebuilt.last().unwrap() + step);
            }
            // Cumulative summation of the first difference recovers the
            // curve exactly: each d1 entry is the exact rounding of
            // values[i+1] - values[i], and adding it back is exact only in
            // real arithmetic, so compare with a tight relative bound.
            for (a, b) in rebuilt.iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
        }

        #[test]
        fn selection_stays_in_bounds(
            s_min in 100.0f64..500.0,
            extra in 0.0f64..500.0,
            cands in proptest::collection::vec(50.0f64..1200.0, 0..6),
            tor1 in 50.0f64..1200.0,
            tor2 in 50.0f64..1200.0,
        ) {
            let s1_max = s_min + extra;
            let s2_max = s_min + extra * 0.5;
            let t = SizeOptionTable::new(
                s_min,
                cands.clone(),
                cands,
                tor1,
                tor2,
                s1_max,
                s2_max,
            ).unwrap();
            let d = select_optimal(&t);
            prop_assert!(d.s_opt_kva >= t.s_min_kva && d.s_opt_kva <= t.s_max_kva);
        }
    }
}
