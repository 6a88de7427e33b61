//! End-to-end converter sizing for a synthetic residential/commercial feeder
//! pair: savings sweep, net-revenue economics, candidate extraction, and the
//! final size decision.
//!
//! ```sh
//! cargo run --example size_selection
//! ```

use b2bplan::profiles::{synth_profile, LoadClass};
use b2bplan::sizing::analyze_sizing;
use b2bplan::transfer::savings_curve;
use b2bplan::{EconomicParams, SizeGrid};

fn main() -> b2bplan::Result<()> {
    // One year at 30-minute resolution; residential peak is 80% of the
    // commercial peak. The residential feeder is PV-saturated and exports at
    // midday, the commercial feeder still has weekday load to absorb it.
    let residential = synth_profile(LoadClass::Residential, 800.0, 365, 0.5, 900.0, 11)?;
    let commercial = synth_profile(LoadClass::Commercial, 1000.0, 365, 0.5, 750.0, 12)?;

    let grid = SizeGrid { min_kva: 50.0, max_kva: 1500.0, step_kva: 50.0 }.expand()?;
    let curve = savings_curve(&residential, &commercial, &grid, 1.0)?;

    let econ = EconomicParams::default();
    let analysis = analyze_sizing(&curve, &econ)?;

    println!(
        "cost split: feeder 1 pays {:.1}%, feeder 2 pays {:.1}%",
        100.0 * analysis.split.gamma1(),
        100.0 * analysis.split.gamma2()
    );
    println!(
        "revenue maxima: feeder 1 at {} kVA, feeder 2 at {} kVA",
        analysis.table.s1_max_kva, analysis.table.s2_max_kva
    );
    println!(
        "size window: [{}, {}] kVA",
        analysis.table.s_min_kva, analysis.table.s_max_kva
    );
    println!("derivative candidates, feeder 1: {:?}", analysis.turning_points1);
    println!("derivative candidates, feeder 2: {:?}", analysis.turning_points2);
    println!(
        "payback candidates: {} kVA and {} kVA",
        analysis.table.opt_tor1_kva, analysis.table.opt_tor2_kva
    );
    println!();
    for line in &analysis.decision.audit {
        println!("  {line}");
    }
    println!();
    println!(
        "selected size: {} kVA ({:?})",
        analysis.decision.s_opt_kva, analysis.decision.rule_applied
    );
    Ok(())
}
