//! Ranks a small synthetic feeder portfolio by the load-profile
//! standard-deviation criterion.
//!
//! ```sh
//! cargo run --example pair_ranking
//! ```

use b2bplan::pairing::rank_pairs;
use b2bplan::profiles::{synth_profile, LoadClass};

fn main() -> b2bplan::Result<()> {
    let portfolio = [
        ("north-commercial", LoadClass::Commercial, 1100.0, 61),
        ("east-residential", LoadClass::Residential, 520.0, 62),
        ("south-commercial", LoadClass::Commercial, 760.0, 63),
        ("west-residential", LoadClass::Residential, 880.0, 64),
        ("depot-commercial", LoadClass::Commercial, 430.0, 65),
    ];

    let mut candidates = Vec::new();
    for (name, kind, peak_kw, seed) in portfolio {
        let profile = synth_profile(kind, peak_kw, 28, 0.5, 0.0, seed)?;
        candidates.push((name.to_string(), profile));
    }

    let ranked = rank_pairs(&candidates, 10)?;
    println!("{:<4} {:<36} {:>12} {:>8}", "rank", "pair", "std_sum_kw", "pratio");
    for (i, score) in ranked.iter().enumerate() {
        println!(
            "{:<4} {:<36} {:>12.1} {:>8.2}",
            i + 1,
            format!("{} + {}", score.pair_id.0, score.pair_id.1),
            score.std_sum_kw,
            score.pratio,
        );
    }
    Ok(())
}
