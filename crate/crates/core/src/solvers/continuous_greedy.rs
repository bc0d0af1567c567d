//! Discretized continuous greedy over a scaled packing polytope.

use serde::{Deserialize, Serialize};

use super::lp::{PackingPolytope, SupportLp};
use crate::error::{Error, Result};
use crate::oracle::{gradient, FractionalPoint, GainMethod, ValueOracle, EXACT_MULTILINEAR_MAX_N};
use crate::rng::seeded;

pub const DEFAULT_STEPS: usize = 100;
pub const DEFAULT_MC_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuousGreedy {
    pub steps: usize,
    pub mc_samples: usize,
    /// `None` picks exact gradients for `n <= 20` and Monte Carlo otherwise.
    #[serde(default)]
    pub method: Option<GainMethod>,
}

impl Default for ContinuousGreedy {
    fn default() -> Self {
        ContinuousGreedy {
            steps: DEFAULT_STEPS,
            mc_samples: DEFAULT_MC_SAMPLES,
            method: None,
        }
    }
}

impl ContinuousGreedy {
    pub fn with_method(mut self, method: GainMethod) -> Self {
        self.method = Some(method);
        self
    }

    pub fn resolved_method(&self, n: usize) -> GainMethod {
        self.method.unwrap_or(if n <= EXACT_MULTILINEAR_MAX_N {
            GainMethod::Exact
        } else {
            GainMethod::MonteCarlo {
                samples: self.mc_samples,
            }
        })
    }

    pub fn solve(&self, oracle: &ValueOracle, polytope: &PackingPolytope<'_>, seed: u64) -> Result<FractionalPoint> {
        continuous_greedy(oracle, polytope, self, seed)
    }
}

/// Starts at `x = 0` and takes `steps` steps of size `1/steps` towards the
/// LP maximizer of the current gradient of `F`.
pub fn continuous_greedy(
    oracle: &ValueOracle,
    polytope: &PackingPolytope<'_>,
    config: &ContinuousGreedy,
    seed: u64,
) -> Result<FractionalPoint> {
    if config.steps == 0 {
        return Err(Error::input("continuous greedy needs at least one step"));
    }
    let n = oracle.n();
    if polytope.dim().is_some_and(|d| d != n) {
        return Err(Error::input("polytope dimension does not match the oracle"));
    }
    let support = polytope.support();
    if support.is_empty() {
        return Ok(FractionalPoint::zeros(n));
    }
    let method = config.resolved_method(n);
    let mut rng = seeded(seed);
    let delta = 1.0 / config.steps as f64;
    let mut x = vec![0.0; n];
    let mut lp = SupportLp::new(polytope);
    for _ in 0..config.steps {
        let point = FractionalPoint::from_clamped(x.clone());
        let grad = gradient(oracle, &point, support, method, &mut rng)?;
        for (&j, y) in support.iter().zip(lp.solve(&grad)) {
            x[j] += delta * y;
        }
    }
    Ok(FractionalPoint::from_clamped(x))
}
