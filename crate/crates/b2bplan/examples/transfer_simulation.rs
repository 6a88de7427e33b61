//! Step-by-step converter transfer on a two-day toy profile pair, showing the
//! donor/recipient branching and the back-feed savings clamp.
//!
//! ```sh
//! cargo run --example transfer_simulation
//! ```

use b2bplan::profiles::{net_load, FeederProfile, TimeSeries};
use b2bplan::transfer::{annual_savings, simulate_transfer, transfer_limit, ConverterSpec};

fn main() -> b2bplan::Result<()> {
    // Feeder 1: midday PV surplus. Feeder 2: steady load, no DER.
    let load1 = vec![220.0, 180.0, 120.0, 100.0, 110.0, 150.0, 240.0, 260.0];
    let der1 = vec![0.0, 90.0, 320.0, 430.0, 380.0, 160.0, 20.0, 0.0];
    let load2 = vec![300.0, 280.0, 260.0, 250.0, 255.0, 270.0, 310.0, 330.0];
    let der2 = vec![0.0; 8];

    let p1 = FeederProfile::new(
        TimeSeries::new("day-0", 3.0, load1)?,
        TimeSeries::new("day-0", 3.0, der1)?,
        50.0, // back-feeding allowance before curtailment starts
    )?;
    let p2 = FeederProfile::new(
        TimeSeries::new("day-0", 3.0, load2)?,
        TimeSeries::new("day-0", 3.0, der2)?,
        0.0,
    )?;

    let spec = ConverterSpec::new(200.0, 0.97)?;
    println!("converter: 200 kVA at 97% efficiency -> {} kW cap", transfer_limit(&spec));
    println!();

    let n1 = net_load(&p1);
    let n2 = net_load(&p2);
    let r = simulate_transfer(&p1, &p2, &spec)?;

    println!(
        "{:>4} {:>9} {:>9} {:>8} {:>8} {:>10} {:>10} {:>8}",
        "step", "net1", "net2", "c12", "c21", "net1'", "net2'", "save1"
    );
    for t in 0..p1.len() {
        println!(
            "{:>4} {:>9.1} {:>9.1} {:>8.1} {:>8.1} {:>10.1} {:>10.1} {:>8.1}",
            t,
            n1.values()[t],
            n2.values()[t],
            r.p_c_12.values()[t],
            r.p_c_21.values()[t],
            r.net1_after.values()[t],
            r.net2_after.values()[t],
            r.save1.values()[t],
        );
    }

    let (e1, e2) = annual_savings(&r);
    println!();
    println!("energy saved over the window: {e1:.1} kWh (feeder 1), {e2:.1} kWh (feeder 2)");
    Ok(())
}
