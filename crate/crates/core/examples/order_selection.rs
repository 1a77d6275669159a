//! One dataset, four criteria. BIC and ν-BIC(3) share every penalty below
//! n ≈ 3.8 million; AIC tends to keep spurious components.

use mixorder::prelude::*;
use mixorder::selector::select_many;

fn main() -> Result<()> {
    let space = ParamSpace::new(100.0, 100.0)?;
    let truth = MixtureParams::new(
        vec![0.3, 0.4, 0.3],
        vec![
            GaussianParams::univariate(-4.0, 1.0)?.into(),
            GaussianParams::univariate(0.0, 0.5)?.into(),
            GaussianParams::univariate(5.0, 2.0)?.into(),
        ],
        space,
    )?;
    let (data, _) = truth.sample(1200, &mut rng_from_seed(8))?;

    let specs = [CriterionSpec::aic(), CriterionSpec::bic(), CriterionSpec::nu_bic(3)?, CriterionSpec::eps_bic(0.02)?];
    let cfg = FitConfig { restarts: 4, ..FitConfig::default() };
    let reports = select_many(&data, &Family::Gaussian { dim: 1 }, 6, &specs, &cfg, &space)?;

    print!("{:>3} {:>10}", "k", "risk");
    for r in &reports {
        print!(" {:>14}", r.criterion_label);
    }
    println!();
    for (i, fit) in reports[0].fits.iter().enumerate() {
        print!("{:>3} {:>10.5}", fit.k, fit.risk);
        for r in &reports {
            print!(" {:>14.5}", r.fits[i].value);
        }
        println!();
    }
    for r in &reports {
        println!("{:>14}: k = {}", r.criterion_label, r.selected);
    }
    Ok(())
}
