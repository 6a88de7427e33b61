//! Writes a pair of synthetic year-long feeder profile CSVs for trying the
//! CLI: a PV-saturated residential feeder and a commercial feeder with
//! daytime headroom.
//!
//! ```sh
//! cargo run --example make_demo_profiles -- /tmp/demo
//! b2bplan size --feeder1 /tmp/demo/residential.csv --feeder2 /tmp/demo/commercial.csv --out report.json
//! ```

use b2bplan::profiles::{synth_profile, write_profile_csv, LoadClass};

fn main() -> b2bplan::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| ".".to_string());
    let dir = std::path::Path::new(&dir);
    std::fs::create_dir_all(dir).expect("output directory");

    let residential = synth_profile(LoadClass::Residential, 800.0, 365, 0.5, 900.0, 11)?;
    let commercial = synth_profile(LoadClass::Commercial, 1000.0, 365, 0.5, 750.0, 12)?;
    let f1 = dir.join("residential.csv");
    let f2 = dir.join("commercial.csv");
    write_profile_csv(&residential, &f1)?;
    write_profile_csv(&commercial, &f2)?;
    println!("wrote {} and {}", f1.display(), f2.display());
    Ok(())
}
