use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use super::poisson::overlap;
use crate::error::{Error, Result};
use crate::rng::derived_rng;

const BLOCK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    /// Binomial standard deviation of the error rate.
    pub sd: f64,
    /// Three standard deviations.
    pub half_width: f64,
    /// Wilson score upper limit at three standard deviations.
    pub upper_limit: f64,
    pub eta: f64,
    /// eta^4 / 2, the floor every test must respect.
    pub floor: f64,
    pub floor_respected: bool,
}

enum Sampler {
    Zero,
    Poisson(Poisson<f64>),
}

impl Sampler {
    fn new(rate: f64) -> Self {
        if rate > 0.0 {
            Sampler::Poisson(Poisson::new(rate).expect("positive rate"))
        } else {
            Sampler::Zero
        }
    }

    fn draw(&self, rng: &mut crate::rng::Rng) -> u64 {
        match self {
            Sampler::Zero => 0,
            Sampler::Poisson(d) => d.sample(rng) as u64,
        }
    }
}

/// Monte Carlo error of the likelihood-ratio test that decides whether the
/// pairs `(X1, Y1)` and `(Y2, X2)` have `X ~ Poisson(lambda1)`,
/// `Y ~ Poisson(lambda2)` or the reverse, under a fair prior.
///
/// The log-likelihood ratio is `ln(lambda2/lambda1) (X1 + X2 - Y1 - Y2)`, so
/// the test compares the two sums and flips a coin on ties. Trials run in
/// blocks with their own derived streams; the count does not depend on the
/// thread count.
pub fn distinguishing_game(lambda1: f64, lambda2: f64, trials: u64, seed: u64) -> Result<GameReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("the game needs at least one trial".into()));
    }
    for l in [lambda1, lambda2] {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::InvalidParams(format!("rate {l} must be finite and non-negative")));
        }
    }
    let d1 = Sampler::new(lambda1);
    let d2 = Sampler::new(lambda2);
    let order = lambda2.partial_cmp(&lambda1).expect("finite rates");
    let blocks = trials.div_ceil(BLOCK);
    let errors: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = derived_rng(seed, b);
            let len = BLOCK.min(trials - b * BLOCK);
            let mut errs = 0u64;
            for _ in 0..len {
                // swapped: the first coordinates come from lambda2.
                let swapped: bool = rng.random();
                let (dx, dy) = if swapped { (&d2, &d1) } else { (&d1, &d2) };
                let x1 = dx.draw(&mut rng);
                let y1 = dy.draw(&mut rng);
                let y2 = dy.draw(&mut rng);
                let x2 = dx.draw(&mut rng);
                let coin: bool = rng.random();
                let (sx, sy) = (x1 + x2, y1 + y2);
                let guess = match order {
                    std::cmp::Ordering::Greater if sx != sy => sx > sy,
                    std::cmp::Ordering::Less if sx != sy => sx < sy,
                    _ => coin,
                };
                errs += (guess != swapped) as u64;
            }
            errs
        })
        .sum();
    let error_rate = errors as f64 / trials as f64;
    let sd = (error_rate * (1.0 - error_rate) / trials as f64).sqrt();
    let eta = if lambda1 == lambda2 {
        1.0
    } else if lambda1 > 0.0 && lambda2 > 0.0 {
        overlap(lambda1, lambda2)?
    } else {
        // One rate is zero: the maximal coupling agrees only at 0.
        (-lambda1.max(lambda2)).exp()
    };
    let floor = eta.powi(4) / 2.0;
    let upper_limit = wilson_upper(errors, trials, 3.0);
    Ok(GameReport {
        lambda1,
        lambda2,
        trials,
        errors,
        error_rate,
        sd,
        half_width: 3.0 * sd,
        upper_limit,
        eta,
        floor,
        floor_respected: upper_limit >= floor,
    })
}

fn wilson_upper(successes: u64, trials: u64, z: f64) -> f64 {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let centre = p + z2 / (2.0 * n);
    let spread = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre + spread) / (1.0 + z2 / n)).min(1.0)
}
