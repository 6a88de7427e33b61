//! Picks the converter connection bus on the bundled 10-bus feeder with
//! three PV plants, weighting voltage impact and plant distance equally.
//!
//! ```sh
//! cargo run --example site_selection
//! ```

use b2bplan::network::{compute_vlsm, load_network_json};
use b2bplan::siting::{site_connection_point, RMode, SitingConfig};

fn main() -> b2bplan::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ten_bus_feeder.json");
    let net = load_network_json(&path)?;
    let m = compute_vlsm(&net, 1.0, 1.0)?;

    let cfg = SitingConfig {
        alpha: 0.5,
        beta: 0.5,
        der_buses: vec![5, 7, 10],
        r_mode: RMode::Auto,
        excluded_buses: Vec::new(),
    };
    let result = site_connection_point(&net, &m, &cfg)?;

    println!("PV plants at buses 5, 7, 10; alpha = beta = 0.5; r = {:.4e}", result.r_used);
    println!();
    println!("{:>6} {:>12} {:>12} {:>12}  ", "bus", "p_sum", "dist_km", "C");
    for b in &result.per_bus {
        println!(
            "{:>6} {:>12.4e} {:>12.2} {:>12.4e}  {}",
            b.bus_id,
            b.p_sum,
            b.dist_sum_km,
            b.c_value,
            if b.bus_id == result.selected_bus { "<- selected" } else { "" }
        );
    }
    Ok(())
}
