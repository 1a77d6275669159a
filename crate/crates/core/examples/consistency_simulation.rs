//! Runs one of the canned Monte Carlo scenarios and prints its accuracy table.
//!
//! ```text
//! cargo run --release --example consistency_simulation -- gaussian-2comp 50
//! ```

use mixorder::simulation::{run_consistency, scenario, scenario_names};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "gaussian-2comp".to_string());
    let mut cfg = scenario(&name)?;
    if let Some(r) = args.next() {
        cfg.replicates = r.parse()?;
    }
    println!("scenario {name} ({} replicates); others: {}", cfg.replicates, scenario_names().join(", "));

    let start = std::time::Instant::now();
    let table = run_consistency(&cfg)?;
    println!("{:<16} {:>6} {:>9} {:>7} {:>6} {:>6} {:>10}", "criterion", "n", "accuracy", "mean_k", "under", "over", "hellinger");
    for row in &table.rows {
        println!(
            "{:<16} {:>6} {:>9.3} {:>7.3} {:>6} {:>6} {:>10}",
            row.criterion,
            row.n,
            row.accuracy,
            row.mean_k,
            row.under,
            row.over,
            row.median_hellinger.map_or("-".to_string(), |h| format!("{h:.4}")),
        );
    }
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
    Ok(())
}
