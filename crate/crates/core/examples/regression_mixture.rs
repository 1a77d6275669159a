//! Mixture of two regression lines; the order is chosen from the conditional
//! likelihood of y given x alone.

use mixorder::prelude::*;
use mixorder::selector::criterion_path;
use rand::Rng;

fn main() -> Result<()> {
    let space = ParamSpace::new(100.0, 100.0)?;
    let truth = MixtureParams::new(
        vec![0.5, 0.5],
        vec![RegressionParams::new(vec![0.0, 2.0], 0.5)?.into(), RegressionParams::new(vec![0.0, -2.0], 0.5)?.into()],
        space,
    )?;
    let mut rng = rng_from_seed(21);
    let (data, _) = truth.sample_conditional(1000, |r: &mut mixorder::rng::Rng| vec![1.0, r.random_range(-1.0..1.0)], &mut rng)?;

    let cfg = FitConfig { restarts: 4, ..FitConfig::default() };
    let report = select_conditional(&data, 4, &CriterionSpec::bic(), &cfg, &space)?;
    println!("selected k = {} ({} mode)", report.selected, serde_json::to_string(&report.mode).expect("serializable"));
    for row in criterion_path(&report) {
        println!("  k={}  risk {:.5}  penalty {:.5}  value {:.5}", row.k, row.risk, row.penalty, row.value);
    }
    for c in report.selected_fit().params.components() {
        if let ComponentParams::Regression(r) = c {
            println!("  line {:?}, noise sd {:.3}", r.coefficients(), r.noise_sd());
        }
    }
    Ok(())
}
