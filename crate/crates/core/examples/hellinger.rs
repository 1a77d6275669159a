//! Hellinger distance between the fitted and the true density shrinks as the
//! sample grows.

use mixorder::prelude::*;
use mixorder::simulation::hellinger_1d;

fn main() -> Result<()> {
    let normal = |mu: f64| MixtureParams::new(vec![1.0], vec![GaussianParams::univariate(mu, 1.0).unwrap().into()], ParamSpace::default());
    for mu in [0.5, 1.0, 2.0, 4.0] {
        let h = hellinger_1d(&normal(0.0)?, &normal(mu)?)?;
        println!("N(0,1) vs N({mu},1): quadrature {h:.8}, closed form {:.8}", (1.0 - (-mu * mu / 8.0f64).exp()).sqrt());
    }

    let space = ParamSpace::new(100.0, 100.0)?;
    let truth = MixtureParams::new(
        vec![0.5, 0.5],
        vec![LaplaceParams::new(0.0, 1.0)?.into(), LaplaceParams::new(6.0, 1.0)?.into()],
        space,
    )?;
    let cfg = FitConfig { restarts: 3, ..FitConfig::default() };
    for n in [100, 1000, 10_000] {
        let (data, _) = truth.sample(n, &mut rng_from_seed(n as u64))?;
        let fitted = fit(&data, &Family::Laplace, 2, &space, &cfg)?;
        println!("n = {n:>6}: 𝔥(fit, truth) = {:.4}", hellinger_1d(&fitted.params, &truth)?);
    }
    Ok(())
}
