//! Penalty magnitudes: where ν-BIC and ε-BIC part ways with BIC, and a
//! finite-grid look at the two conditions a consistent penalty must meet.

use mixorder::criteria::{check_b1_b2, eps_thresholds, nu_thresholds, penalty, CriterionSpec};

fn main() -> mixorder::Result<()> {
    for nu in [2, 3, 4] {
        let r = nu_thresholds(nu)?;
        let t: Vec<&str> = r.thresholds.iter().map(|t| t.magnitude.as_str()).collect();
        println!("{:<14} equals BIC up to n = {}, within 10% up to n = {}", r.criterion, t[0], t[1]);
    }
    for eps in [0.5, 0.1, 0.02] {
        let r = eps_thresholds(eps)?;
        println!("{:<14} within 10% of BIC up to n = {}", r.criterion, r.thresholds[0].magnitude);
    }

    let m = 2;
    let specs = [CriterionSpec::aic(), CriterionSpec::bic(), CriterionSpec::nu_bic(3)?, CriterionSpec::eps_bic(0.02)?];
    println!("\npenalty at k = 2, m = {m}");
    for n in [100u64, 10_000, 1_000_000, 100_000_000] {
        let row: Vec<String> = specs.iter().map(|s| format!("{}={:.3e}", s.label(), penalty(s, 2, m, n))).collect();
        println!("  n = {n:>9}: {}", row.join("  "));
    }

    let grid: Vec<u64> = (2..=12).map(|e| 10u64.pow(e)).collect();
    println!("\nconditions on n = 1e2..1e12");
    for s in &specs {
        let r = check_b1_b2(s, 5, m, &grid)?;
        println!("  {:<14} vanishing: {:<5} gap diverging: {}", s.label(), r.b1_pass, r.b2_pass);
    }
    Ok(())
}
