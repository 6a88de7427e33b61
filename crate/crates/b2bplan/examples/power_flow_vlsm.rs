//! Solves the bundled 10-bus feeder and builds its voltage-load sensitivity
//! matrices by perturbation.
//!
//! ```sh
//! cargo run --example power_flow_vlsm
//! ```

use b2bplan::network::{
    column_sensitivity_sum, compute_vlsm, load_network_json, solve_power_flow, write_vlsm_csv,
};

fn main() -> b2bplan::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ten_bus_feeder.json");
    let net = load_network_json(&path)?;

    let flow = solve_power_flow(&net);
    println!(
        "power flow: converged={} after {} iterations (max mismatch {:.3e} kW)",
        flow.converged, flow.iterations, flow.max_mismatch_kw
    );
    for (bus, v) in net.buses().iter().zip(&flow.v_pu) {
        println!("  bus {:>2}: {:.5} pu", bus.id, v);
    }

    let m = compute_vlsm(&net, 1.0, 1.0)?;
    println!("\nvoltage impact of adding 1 kW at each bus (column |sums|, pu/kW):");
    for bus in net.buses() {
        println!(
            "  bus {:>2}: {:.3e}",
            bus.id,
            column_sensitivity_sum(&m, bus.id)?
        );
    }

    let out = std::env::temp_dir().join("ten_bus_vlsmp.csv");
    write_vlsm_csv(&m, m.vlsmp(), &out)?;
    println!("\nreal-power sensitivity matrix written to {}", out.display());
    Ok(())
}
