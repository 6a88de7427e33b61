//! Planning toolkit for medium-voltage back-to-back (MVB2B) converters that
//! join two distribution feeders.
//!
//! The library answers three planning questions:
//!
//! 1. **Sizing** — sweep converter sizes over a year of feeder data, turn the
//!    energy savings into net-revenue curves, and pick the size that balances
//!    retained value against payback time ([`sizing`], [`transfer`]).
//! 2. **Pairing** — score candidate feeder pairs by the standard deviation of
//!    their head load profiles, the fast proxy for the value a connection can
//!    unlock ([`pairing`]).
//! 3. **Siting** — solve the radial power flow, build voltage-load
//!    sensitivity matrices by perturbation, and rank each bus as the
//!    connection point by weighted voltage impact and DER distance
//!    ([`network`], [`siting`]).
//!
//! Each capability has a runnable demo under `examples/`; the `b2bplan`
//! binary exposes the same workflows as subcommands.

pub mod cli;
pub mod config;
pub mod error;
pub mod network;
pub mod pairing;
pub mod profiles;
pub mod report;
pub mod siting;
pub mod sizing;
pub mod transfer;

pub use config::{PlanConfig, SizeGrid};
pub use error::{Error, Result};
pub use network::{
    compute_vlsm, electrical_distance, load_network_json, solve_power_flow, FeederNetwork,
    PowerFlowSolution, SensitivityMatrices,
};
pub use pairing::{rank_pairs, scenario_grid_study, std_criterion, PairScore, StudyConfig};
pub use profiles::{
    load_profile_csv, net_load, peak_ratio, profile_stats, synth_profile, write_profile_csv,
    FeederProfile, LoadClass, ProfileStats, TimeSeries,
};
pub use siting::{site_connection_point, SitingConfig, SitingResult};
pub use sizing::{
    analyze_sizing, cost_split, discrete_derivatives, find_s_max, min_sizes, net_revenue_curves,
    return_analysis, select_optimal, turning_points, EconomicParams, SizeOptionTable,
    SizingDecision,
};
pub use transfer::{
    annual_savings, savings_curve, simulate_transfer, transfer_limit, ConverterSpec, SavingsCurve,
    SavingsMode, TransferResult,
};
