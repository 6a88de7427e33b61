//! Machine-readable reports: JSON with a schema version plus plot-ready CSV.
//! Output is deterministic byte-for-byte for fixed inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::PlanConfig;
use crate::error::{Error, Result};
use crate::pairing::{PairScore, ScenarioStudy};
use crate::profiles::TimeSeries;
use crate::siting::SitingResult;
use crate::sizing::{SizingAnalysis, SizingDecision};
use crate::transfer::TransferResult;

pub const SCHEMA_VERSION: u32 = 1;

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Sizing run outcome serialized into the JSON report.
#[derive(Debug, Serialize)]
pub struct SizeReport<'a> {
    pub schema_version: u32,
    pub status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub feeder1: String,
    pub feeder2: String,
    pub config: &'a PlanConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<SizeReportBody>,
}

#[derive(Debug, Serialize)]
pub struct SizeReportBody {
    pub s_opt_kva: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub e_save1_max_kwh: f64,
    pub e_save2_max_kwh: f64,
    pub turning_points1_kva: Vec<f64>,
    pub turning_points2_kva: Vec<f64>,
    pub opt_tor1_kva: f64,
    pub opt_tor2_kva: f64,
    pub table: crate::sizing::SizeOptionTable,
    pub decision: SizingDecision,
    /// First/second/third revenue differences per feeder. Sizes where a
    /// feeder saves nothing serialize their payback entries as null.
    pub derivatives1: crate::sizing::DerivativeSet,
    pub derivatives2: crate::sizing::DerivativeSet,
    pub return1: crate::sizing::ReturnAnalysis,
    pub return2: crate::sizing::ReturnAnalysis,
}

pub fn size_report_body(analysis: &SizingAnalysis) -> SizeReportBody {
    let grid = analysis.curve.sizes_kva();
    SizeReportBody {
        s_opt_kva: analysis.decision.s_opt_kva,
        gamma1: analysis.split.gamma1(),
        gamma2: analysis.split.gamma2(),
        e_save1_max_kwh: analysis.curve.e_save1_max_kwh(),
        e_save2_max_kwh: analysis.curve.e_save2_max_kwh(),
        turning_points1_kva: analysis.turning_points1.clone(),
        turning_points2_kva: analysis.turning_points2.clone(),
        opt_tor1_kva: analysis.return1.opt_tor_kva(grid),
        opt_tor2_kva: analysis.return2.opt_tor_kva(grid),
        table: analysis.table.clone(),
        decision: analysis.decision.clone(),
        derivatives1: analysis.derivatives1.clone(),
        derivatives2: analysis.derivatives2.clone(),
        return1: analysis.return1.clone(),
        return2: analysis.return2.clone(),
    }
}

pub fn write_size_report(path: impl AsRef<Path>, report: &SizeReport) -> Result<()> {
    write_json(path.as_ref(), report)
}

/// Companion CSV with every curve the sizing analysis produced.
pub fn write_sizing_curves_csv(path: impl AsRef<Path>, analysis: &SizingAnalysis) -> Result<()> {
    let mut out = String::from("size_kva,nr,nr1,nr2,f1_kwh,f2_kwh,tor1,tor2,dvt1,dvt2\n");
    let grid = analysis.curve.sizes_kva();
    for (i, size) in grid.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            size,
            analysis.revenue.nr()[i],
            analysis.revenue.nr1()[i],
            analysis.revenue.nr2()[i],
            analysis.curve.f1_kwh()[i],
            analysis.curve.f2_kwh()[i],
            analysis.return1.tor_years()[i],
            analysis.return2.tor_years()[i],
            analysis.return1.dvt()[i],
            analysis.return2.dvt()[i],
        )
        .expect("writing to string cannot fail");
    }
    write_text(path.as_ref(), &out)
}

pub fn write_pair_rank_csv(path: impl AsRef<Path>, scores: &[PairScore]) -> Result<()> {
    let mut out = String::from("feeder_a,feeder_b,std_sum_kw,pratio,rank\n");
    for (i, s) in scores.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{},{}",
            s.pair_id.0,
            s.pair_id.1,
            s.std_sum_kw,
            s.pratio,
            i + 1
        )
        .expect("writing to string cannot fail");
    }
    write_text(path.as_ref(), &out)
}

/// Scenario study CSV: the fixed reference size in the header comment, the
/// rank correlation in the footer.
pub fn write_scenario_study_csv(path: impl AsRef<Path>, study: &ScenarioStudy) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "# reference_size_kva={}", study.reference_size_kva).unwrap();
    writeln!(out, "# seed={}", study.seed).unwrap();
    out.push_str("area,pratio,std_sum_kw,annual_savings_kwh\n");
    for row in &study.rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.area, row.pratio, row.std_sum_kw, row.annual_savings_kwh
        )
        .unwrap();
    }
    match study.spearman_rho {
        Some(rho) => writeln!(out, "# spearman_rho={rho}").unwrap(),
        None => writeln!(out, "# spearman_rho=degenerate").unwrap(),
    }
    write_text(path.as_ref(), &out)
}

pub fn write_siting_csv(path: impl AsRef<Path>, result: &SitingResult) -> Result<()> {
    let mut out = String::from("bus_id,p_sum,dist_sum_km,c_value,selected\n");
    for b in &result.per_bus {
        writeln!(
            out,
            "{},{},{},{},{}",
            b.bus_id,
            b.p_sum,
            b.dist_sum_km,
            b.c_value,
            b.bus_id == result.selected_bus
        )
        .unwrap();
    }
    write_text(path.as_ref(), &out)
}

#[derive(Debug, Serialize)]
pub struct SitingSummary<'a> {
    pub schema_version: u32,
    pub network: String,
    pub alpha: f64,
    pub beta: f64,
    pub r_used: f64,
    pub selected_bus: usize,
    pub per_bus: &'a [crate::siting::BusObjective],
}

pub fn write_siting_summary(path: impl AsRef<Path>, summary: &SitingSummary) -> Result<()> {
    write_json(path.as_ref(), summary)
}

/// Raw per-step transfer traces.
pub fn write_transfer_csv(
    path: impl AsRef<Path>,
    net1: &TimeSeries,
    net2: &TimeSeries,
    r: &TransferResult,
) -> Result<()> {
    let mut out = String::from(
        "index,p_net1_kw,p_net2_kw,p_c_12_kw,p_c_21_kw,p_net1_after_kw,p_net2_after_kw,p_save1_kw,p_save2_kw\n",
    );
    for t in 0..net1.len() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            t,
            net1.values()[t],
            net2.values()[t],
            r.p_c_12.values()[t],
            r.p_c_21.values()[t],
            r.net1_after.values()[t],
            r.net2_after.values()[t],
            r.save1.values()[t],
            r.save2.values()[t],
        )
        .unwrap();
    }
    write_text(path.as_ref(), &out)
}
