//! Laplace mixtures: the location update is a weighted median, so EM needs
//! no gradient even though the density has a kink at its location.

use mixorder::densities::weighted_mstep;
use mixorder::prelude::*;

fn main() -> Result<()> {
    // A single weighted M-step: location = weighted median, rate = 1 / weighted mean absolute deviation.
    let data = Dataset::univariate(vec![0.0, 1.0, 3.0, 10.0])?;
    let theta = weighted_mstep(&Family::Laplace, &data, &[1.0, 1.0, 2.0, 0.5], &ParamSpace::default())?;
    println!("weighted M-step: {}", serde_json::to_string(&theta).expect("serializable"));

    let space = ParamSpace::new(100.0, 100.0)?;
    let truth = MixtureParams::new(
        vec![0.4, 0.6],
        vec![LaplaceParams::new(-2.0, 1.0)?.into(), LaplaceParams::new(5.0, 0.5)?.into()],
        space,
    )?;
    let (sample, _) = truth.sample(2000, &mut rng_from_seed(5))?;
    let result = fit(&sample, &Family::Laplace, 2, &space, &FitConfig::default())?;
    for (w, c) in result.params.weights().iter().zip(result.params.components()) {
        if let ComponentParams::Laplace(l) = c {
            println!("weight {w:.3}  location {:.3}  rate {:.3}", l.location(), l.rate());
        }
    }
    println!("risk {:.5}, {} iterations", result.risk, result.iterations);
    Ok(())
}
