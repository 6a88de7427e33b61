//! Subcommand orchestration behind the `b2bplan` binary.
//!
//! Exit codes are a stable scripting contract: 0 success, 1 input or usage
//! error, 2 uneconomic result, 3 numerical failure.

use std::path::{Path, PathBuf};

use crate::config::PlanConfig;
use crate::error::{Error, Result};
use crate::network::{compute_vlsm, load_network_json, write_vlsm_csv};
use crate::pairing::{rank_pairs, scenario_grid_study, StudyConfig};
use crate::profiles::{load_profile_csv, net_load, FeederProfile};
use crate::report;
use crate::siting::site_connection_point;
use crate::sizing::analyze_sizing;
use crate::transfer::{savings_curve_with, simulate_transfer_with, ConverterSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNECONOMIC: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Maps an error to the documented exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NoExchangeableEnergy | Error::Uneconomic { .. } => EXIT_UNECONOMIC,
        Error::PowerFlowDiverged { .. } => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Seed override for pairing runs; set `B2BPLAN_SEED` to replace the config
/// seed.
pub const SEED_ENV: &str = "B2BPLAN_SEED";

fn effective_seed(config_seed: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .parse::<u64>()
            .map_err(|_| Error::InvalidConfig(format!("{SEED_ENV} must be an unsigned integer, got `{raw}`"))),
        Err(_) => Ok(config_seed),
    }
}

fn load_config(path: Option<&Path>) -> Result<PlanConfig> {
    match path {
        Some(p) => PlanConfig::load(p),
        None => Ok(PlanConfig::default()),
    }
}

fn load_feeder_pair(
    feeder1: &Path,
    feeder2: &Path,
    cfg: &PlanConfig,
) -> Result<(FeederProfile, FeederProfile)> {
    let p1 = load_profile_csv(feeder1)?.with_backfeed_limit(cfg.backfeed_limits.feeder1_kw)?;
    let p2 = load_profile_csv(feeder2)?.with_backfeed_limit(cfg.backfeed_limits.feeder2_kw)?;
    Ok((p1, p2))
}

/// Companion CSV path: the report path with a `_curves.csv` suffix.
pub fn curves_path(report: &Path) -> PathBuf {
    let stem = report.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    report.with_file_name(format!("{stem}_curves.csv"))
}

/// Full size-selection workflow: savings sweep, economics, candidate
/// extraction, final selection, JSON report plus curve CSV.
pub fn cmd_size(feeder1: &Path, feeder2: &Path, config: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let (p1, p2) = load_feeder_pair(feeder1, feeder2, &cfg)?;
    let grid = cfg.converter.size_grid.expand()?;

    let curve = savings_curve_with(&p1, &p2, &grid, cfg.converter.efficiency, cfg.savings_mode)?;
    let analysis = match analyze_sizing(&curve, &cfg.economics) {
        Ok(a) => a,
        Err(e @ (Error::NoExchangeableEnergy | Error::Uneconomic { .. })) => {
            // Still explain the outcome in the report before failing.
            let report = report::SizeReport {
                schema_version: report::SCHEMA_VERSION,
                status: "uneconomic",
                reason: Some(e.to_string()),
                feeder1: feeder1.display().to_string(),
                feeder2: feeder2.display().to_string(),
                config: &cfg,
                result: None,
            };
            report::write_size_report(out, &report)?;
            return Err(e);
        }
        Err(e) => return Err(e),
    };

    let report_value = report::SizeReport {
        schema_version: report::SCHEMA_VERSION,
        status: "ok",
        reason: None,
        feeder1: feeder1.display().to_string(),
        feeder2: feeder2.display().to_string(),
        config: &cfg,
        result: Some(report::size_report_body(&analysis)),
    };
    report::write_size_report(out, &report_value)?;
    report::write_sizing_curves_csv(curves_path(out), &analysis)?;
    println!(
        "selected converter size: {} kVA (report: {})",
        analysis.decision.s_opt_kva,
        out.display()
    );
    Ok(())
}

/// Ranks all profile pairs found in a directory; optionally runs the
/// 24-scenario validation study alongside.
pub fn cmd_pair(dir: &Path, top_k: usize, study: bool, out: &Path, config: Option<&Path>) -> Result<()> {
    let cfg = load_config(config)?;
    let seed = effective_seed(cfg.pairing.seed)?;

    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("csv"))
        .collect();
    paths.sort();

    let mut candidates = Vec::new();
    for path in &paths {
        let label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        candidates.push((label, load_profile_csv(path)?));
    }
    if candidates.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 profile CSVs in {}, found {}",
            dir.display(),
            candidates.len()
        )));
    }

    let ranked = rank_pairs(&candidates, top_k)?;
    report::write_pair_rank_csv(out, &ranked)?;
    println!("ranked {} pairs (top {}): {}", ranked.len(), top_k, out.display());

    if study {
        let study_cfg = StudyConfig {
            seed,
            reference_size_kva: cfg.pairing.reference_size_kva,
            efficiency: cfg.converter.efficiency,
            ..StudyConfig::default()
        };
        let result = scenario_grid_study(&study_cfg)?;
        let study_path = out
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("scenario_study.csv");
        report::write_scenario_study_csv(&study_path, &result)?;
        match result.spearman_rho {
            Some(rho) => println!("scenario study: spearman rho = {rho:.4} ({})", study_path.display()),
            None => println!("scenario study: correlation degenerate ({})", study_path.display()),
        }
    }
    Ok(())
}

/// Computes the sensitivity matrices and ranks every candidate bus as the
/// connection point.
pub fn cmd_site(
    network: &Path,
    config: Option<&Path>,
    out: &Path,
    vlsm_out: Option<&Path>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let net = load_network_json(network)?;
    let m = compute_vlsm(&net, cfg.vlsm.delta_p_kw, cfg.vlsm.delta_q_kvar)?;
    let result = site_connection_point(&net, &m, &cfg.siting)?;

    report::write_siting_csv(out, &result)?;
    let summary = report::SitingSummary {
        schema_version: report::SCHEMA_VERSION,
        network: network.display().to_string(),
        alpha: cfg.siting.alpha,
        beta: cfg.siting.beta,
        r_used: result.r_used,
        selected_bus: result.selected_bus,
        per_bus: &result.per_bus,
    };
    report::write_siting_summary(out.with_extension("json"), &summary)?;
    if let Some(vlsm_path) = vlsm_out {
        write_vlsm_csv(&m, m.vlsmp(), vlsm_path)?;
    }
    println!("selected connection bus: {} ({})", result.selected_bus, out.display());
    Ok(())
}

/// Raw transfer simulation at one converter size; emits the per-step traces.
pub fn cmd_simulate(
    feeder1: &Path,
    feeder2: &Path,
    size_kva: f64,
    config: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let cfg = load_config(config)?;
    let (p1, p2) = load_feeder_pair(feeder1, feeder2, &cfg)?;
    let spec = ConverterSpec::new(size_kva, cfg.converter.efficiency)?;
    let r = simulate_transfer_with(&p1, &p2, &spec, cfg.savings_mode)?;
    let n1 = net_load(&p1);
    let n2 = net_load(&p2);
    report::write_transfer_csv(out, &n1, &n2, &r)?;
    println!(
        "simulated {} steps: savings {} + {} kWh ({})",
        p1.len(),
        r.e_save1_kwh,
        r.e_save2_kwh,
        out.display()
    );
    Ok(())
}
