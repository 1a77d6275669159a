//! Fits a two-component bivariate Gaussian mixture by constrained EM.

use mixorder::prelude::*;
use nalgebra::DMatrix;

fn main() -> Result<()> {
    let space = ParamSpace::new(50.0, 50.0)?;
    let truth = MixtureParams::new(
        vec![0.35, 0.65],
        vec![
            GaussianParams::new(vec![0.0, 0.0], DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]))?.into(),
            GaussianParams::new(vec![4.0, -1.0], DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]))?.into(),
        ],
        space,
    )?;
    let (data, _) = truth.sample(1500, &mut rng_from_seed(11))?;

    let cfg = FitConfig { restarts: 5, base_seed: 3, ..FitConfig::default() };
    let result = fit(&data, &Family::Gaussian { dim: 2 }, 2, &space, &cfg)?;

    println!("risk {:.5} (truth {:.5})", result.risk, truth.empirical_risk(&data)?);
    println!("iterations {}, converged {}, best restart {}", result.iterations, result.converged, result.best_restart);
    for (w, c) in result.params.weights().iter().zip(result.params.components()) {
        if let ComponentParams::Gaussian(g) = c {
            println!("  weight {w:.3}  mean {:?}  covariance {:?}", g.mean(), g.covariance().as_slice());
        }
    }
    Ok(())
}
