//! Multilinear extension `F(x) = E[v(R)]`, where `R` contains each item `j`
//! independently with probability `x_j`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Accumulator, Family, ValueOracle};
use crate::error::{Error, Result};

/// Largest ground set for exact enumeration of `F`.
pub const EXACT_MULTILINEAR_MAX_N: usize = 20;

/// A point of the unit cube `[0,1]^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FractionalPoint(Vec<f64>);

impl FractionalPoint {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        for (j, &v) in x.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::input(format!("coordinate {j} = {v} is outside [0, 1]")));
            }
        }
        Ok(FractionalPoint(x))
    }

    pub fn zeros(n: usize) -> Self {
        FractionalPoint(vec![0.0; n])
    }

    /// Indicator vector of `set`.
    pub fn indicator(n: usize, set: &[usize]) -> Result<Self> {
        let mut x = vec![0.0; n];
        for &j in set {
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, n });
            }
            x[j] = 1.0;
        }
        Ok(FractionalPoint(x))
    }

    pub(crate) fn from_clamped(mut x: Vec<f64>) -> Self {
        for v in &mut x {
            *v = v.clamp(0.0, 1.0);
        }
        FractionalPoint(x)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_dim(oracle: &ValueOracle, x: &FractionalPoint) -> Result<()> {
    if x.len() != oracle.n() {
        return Err(Error::input(format!(
            "point has dimension {} but the ground set has {} items",
            x.len(),
            oracle.n()
        )));
    }
    Ok(())
}

/// Split coordinates into items that are surely in `R` and the genuinely
/// random ones.
fn partition(x: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut sure = Vec::new();
    let mut random = Vec::new();
    for (j, &p) in x.iter().enumerate() {
        if p >= 1.0 {
            sure.push(j);
        } else if p > 0.0 {
            random.push(j);
        }
    }
    (sure, random)
}

/// Visit every outcome of the random coordinates with its probability.
fn enumerate_outcomes<F>(acc: &mut Accumulator<'_>, x: &[f64], random: &[usize], prob: f64, visit: &mut F)
where
    F: FnMut(&Accumulator<'_>, f64),
{
    match random.split_first() {
        None => visit(acc, prob),
        Some((&j, rest)) => {
            enumerate_outcomes(acc, x, rest, prob * (1.0 - x[j]), visit);
            acc.push(j);
            enumerate_outcomes(acc, x, rest, prob * x[j], visit);
            acc.pop();
        }
    }
}

/// `F(x)` by full enumeration of subsets (`n <= 20`).
pub fn multilinear_exact(oracle: &ValueOracle, x: &FractionalPoint) -> Result<f64> {
    check_dim(oracle, x)?;
    if oracle.n() > EXACT_MULTILINEAR_MAX_N {
        return Err(Error::Budget {
            what: "exact multilinear extension",
            size: oracle.n() as u128,
            limit: EXACT_MULTILINEAR_MAX_N as u128,
        });
    }
    let x = x.as_slice();
    let (sure, random) = partition(x);
    let mut acc = oracle.accumulator();
    for &j in &sure {
        acc.push(j);
    }
    let mut total = 0.0;
    enumerate_outcomes(&mut acc, x, &random, 1.0, &mut |acc, p| total += p * acc.value());
    Ok(total)
}

/// Sample mean of `v(R)` and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

fn sample_into<R: Rng + ?Sized>(acc: &mut Accumulator<'_>, sure: &[usize], random: &[usize], x: &[f64], rng: &mut R) {
    acc.clear();
    for &j in sure {
        acc.push(j);
    }
    for &j in random {
        if rng.random::<f64>() < x[j] {
            acc.push(j);
        }
    }
}

/// Monte Carlo estimate of `F(x)` from `samples` independent random sets.
pub fn multilinear_mc(oracle: &ValueOracle, x: &FractionalPoint, samples: usize, seed: u64) -> Result<McEstimate> {
    check_dim(oracle, x)?;
    if samples == 0 {
        return Err(Error::input("samples must be at least 1"));
    }
    let mut rng = crate::rng::seeded(seed);
    let xs = x.as_slice();
    let (sure, random) = partition(xs);
    let mut acc = oracle.accumulator();
    // Welford
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        sample_into(&mut acc, &sure, &random, xs, &mut rng);
        let v = acc.value();
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let stderr = if samples > 1 {
        (m2 / (samples - 1) as f64 / samples as f64).sqrt()
    } else {
        0.0
    };
    Ok(McEstimate { estimate: mean, stderr })
}

/// Closed form of `F` for families that admit one (coverage and modular).
pub fn multilinear_closed_form(oracle: &ValueOracle, x: &FractionalPoint) -> Result<Option<f64>> {
    check_dim(oracle, x)?;
    let x = x.as_slice();
    Ok(match oracle.family().base() {
        Family::Modular { weights } => Some(weights.iter().zip(x).map(|(w, p)| w * p).sum()),
        Family::Coverage {
            covers,
            element_weights,
        } => {
            let miss = uncovered_probabilities(covers, element_weights.len(), x);
            Some(element_weights.iter().zip(&miss).map(|(w, q)| w * (1.0 - q)).sum())
        }
        _ => None,
    })
}

fn uncovered_probabilities(covers: &[Vec<usize>], universe: usize, x: &[f64]) -> Vec<f64> {
    let mut miss = vec![1.0; universe];
    for (i, cov) in covers.iter().enumerate() {
        if x[i] > 0.0 {
            for &u in cov {
                miss[u] *= 1.0 - x[i];
            }
        }
    }
    miss
}

/// How to compute the gradient of `F`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum GainMethod {
    /// Enumerate the random coordinates (`n <= 20`).
    Exact,
    /// Average over `samples` random sets shared by all coordinates.
    MonteCarlo { samples: usize },
    /// Closed form; coverage and modular families only.
    ClosedForm,
}

/// Partial derivatives `dF/dx_j = E[v(R + j) - v(R - j)]` for each `j` in
/// `support`, in the order of `support`.
///
/// Since `F` is multilinear this equals `F(x | x_j=1) - F(x | x_j=0)`; the
/// marginal gain `F(x ∨ 1_j) - F(x)` is `(1 - x_j)` times this value.
pub fn gradient<R: Rng + ?Sized>(
    oracle: &ValueOracle,
    x: &FractionalPoint,
    support: &[usize],
    method: GainMethod,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_dim(oracle, x)?;
    for &j in support {
        oracle.ground().check(j)?;
    }
    let xs = x.as_slice();
    let (sure, random) = partition(xs);
    let mut grad = vec![0.0; support.len()];
    match method {
        GainMethod::Exact => {
            if oracle.n() > EXACT_MULTILINEAR_MAX_N {
                return Err(Error::Budget {
                    what: "exact multilinear gradient",
                    size: oracle.n() as u128,
                    limit: EXACT_MULTILINEAR_MAX_N as u128,
                });
            }
            let mut acc = oracle.accumulator();
            for &j in &sure {
                acc.push(j);
            }
            enumerate_outcomes(&mut acc, xs, &random, 1.0, &mut |acc, p| {
                if p == 0.0 {
                    return;
                }
                for (g, &j) in grad.iter_mut().zip(support) {
                    *g += p * acc.contribution(j);
                }
            });
        }
        GainMethod::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(Error::input("samples must be at least 1"));
            }
            let mut acc = oracle.accumulator();
            for _ in 0..samples {
                sample_into(&mut acc, &sure, &random, xs, rng);
                for (g, &j) in grad.iter_mut().zip(support) {
                    *g += acc.contribution(j);
                }
            }
            let inv = 1.0 / samples as f64;
            for g in &mut grad {
                *g *= inv;
            }
        }
        GainMethod::ClosedForm => match oracle.family().base() {
            Family::Modular { weights } => {
                for (g, &j) in grad.iter_mut().zip(support) {
                    *g = weights[j];
                }
            }
            Family::Coverage {
                covers,
                element_weights,
            } => {
                // per element: product of the nonzero (1 - x_i) factors and
                // the number of zero factors, so one factor can be divided out
                let mut prod = vec![1.0; element_weights.len()];
                let mut zeros = vec![0u32; element_weights.len()];
                for (i, cov) in covers.iter().enumerate() {
                    let keep = 1.0 - xs[i];
                    if keep >= 1.0 {
                        continue;
                    }
                    for &u in cov {
                        if keep <= 0.0 {
                            zeros[u] += 1;
                        } else {
                            prod[u] *= keep;
                        }
                    }
                }
                for (g, &j) in grad.iter_mut().zip(support) {
                    let keep = 1.0 - xs[j];
                    *g = covers[j]
                        .iter()
                        .map(|&u| {
                            let others = if keep <= 0.0 {
                                if zeros[u] == 1 {
                                    prod[u]
                                } else {
                                    0.0
                                }
                            } else if zeros[u] == 0 {
                                prod[u] / keep
                            } else {
                                0.0
                            };
                            element_weights[u] * others
                        })
                        .sum();
                }
            }
            other => {
                return Err(Error::input(format!(
                    "no closed-form multilinear extension for the {} family",
                    other.tag()
                )))
            }
        },
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ConcaveShape;

    fn coverage() -> ValueOracle {
        ValueOracle::coverage(
            vec![vec![0, 1, 2], vec![0, 1], vec![2, 3], vec![4]],
            vec![1.0, 2.0, 0.5, 3.0, 1.5],
        )
        .unwrap()
    }

    // Independent oracle: plain sum over all 2^n bitmasks.
    fn brute_f(o: &ValueOracle, x: &[f64]) -> f64 {
        let n = x.len();
        (0..1usize << n)
            .map(|mask| {
                let set: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
                let p: f64 = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { x[i] } else { 1.0 - x[i] })
                    .product();
                p * o.eval_uncached(&set).unwrap()
            })
            .sum()
    }

    #[test]
    fn indicator_and_zero() {
        let o = coverage();
        for set in [vec![], vec![0], vec![1, 3], vec![0, 1, 2, 3]] {
            let x = FractionalPoint::indicator(4, &set).unwrap();
            assert_eq!(multilinear_exact(&o, &x).unwrap(), o.eval(&set).unwrap());
            let mc = multilinear_mc(&o, &x, 17, 5).unwrap();
            assert_eq!(mc.estimate, o.eval(&set).unwrap());
            assert_eq!(mc.stderr, 0.0);
        }
        assert_eq!(multilinear_exact(&o, &FractionalPoint::zeros(4)).unwrap(), 0.0);
    }

    #[test]
    fn exact_matches_brute_sum() {
        let o = coverage();
        let x = [0.3, 0.9, 0.5, 0.1];
        let f = multilinear_exact(&o, &FractionalPoint::new(x.to_vec()).unwrap()).unwrap();
        assert!((f - brute_f(&o, &x)).abs() < 1e-12);
        let cf = multilinear_closed_form(&o, &FractionalPoint::new(x.to_vec()).unwrap())
            .unwrap()
            .unwrap();
        assert!((cf - f).abs() < 1e-12);
    }

    #[test]
    fn modular_is_linear() {
        let w = vec![5.0, 3.0, 2.0];
        let o = ValueOracle::modular(w.clone()).unwrap();
        let x = FractionalPoint::new(vec![0.2, 0.7, 0.5]).unwrap();
        let expected: f64 = w.iter().zip(x.as_slice()).map(|(a, b)| a * b).sum();
        assert!((multilinear_exact(&o, &x).unwrap() - expected).abs() < 1e-12);
        let mc = multilinear_mc(&o, &x, 100_000, 42).unwrap();
        assert!((mc.estimate - expected).abs() <= 4.0 * mc.stderr);
    }

    #[test]
    fn mc_within_four_stderr() {
        let o = ValueOracle::concave_over_modular(vec![1.0, 2.0, 3.0, 4.0, 0.5], ConcaveShape::Sqrt).unwrap();
        let x = FractionalPoint::new(vec![0.5, 0.25, 0.6, 0.1, 0.9]).unwrap();
        let exact = multilinear_exact(&o, &x).unwrap();
        let mc = multilinear_mc(&o, &x, 100_000, 8).unwrap();
        assert!((mc.estimate - exact).abs() <= 4.0 * mc.stderr, "{mc:?} vs {exact}");
        assert!(mc.stderr > 0.0);
    }

    #[test]
    fn gradient_agrees_with_finite_differences() {
        let o = coverage();
        let x = FractionalPoint::new(vec![0.3, 0.0, 0.5, 1.0]).unwrap();
        let support = [0, 1, 2, 3];
        let mut rng = crate::rng::seeded(1);
        let exact = gradient(&o, &x, &support, GainMethod::Exact, &mut rng).unwrap();
        let closed = gradient(&o, &x, &support, GainMethod::ClosedForm, &mut rng).unwrap();
        let mc = gradient(&o, &x, &support, GainMethod::MonteCarlo { samples: 20_000 }, &mut rng).unwrap();
        for (i, &j) in support.iter().enumerate() {
            // F is multilinear, so the difference of the two faces is exact
            let mut up = x.as_slice().to_vec();
            let mut down = up.clone();
            up[j] = 1.0;
            down[j] = 0.0;
            let finite = brute_f(&o, &up) - brute_f(&o, &down);
            assert!((exact[i] - finite).abs() < 1e-12, "{i}: {} vs {finite}", exact[i]);
            assert!((closed[i] - finite).abs() < 1e-12, "{i}: {} vs {finite}", closed[i]);
            assert!((mc[i] - finite).abs() < 0.1);
        }
        // item 3 sits at x=1 and covers element 4 alone
        assert_eq!(exact[3], 1.5);
    }

    #[test]
    fn closed_form_unavailable_for_concave() {
        let o = ValueOracle::concave_over_modular(vec![1.0, 2.0], ConcaveShape::Cap { c: 2.0 }).unwrap();
        let x = FractionalPoint::zeros(2);
        assert_eq!(multilinear_closed_form(&o, &x).unwrap(), None);
        let mut rng = crate::rng::seeded(0);
        assert!(gradient(&o, &x, &[0], GainMethod::ClosedForm, &mut rng).is_err());
    }

    #[test]
    fn input_checks() {
        assert!(FractionalPoint::new(vec![0.5, 1.5]).is_err());
        assert!(FractionalPoint::new(vec![f64::NAN]).is_err());
        let o = coverage();
        assert!(multilinear_exact(&o, &FractionalPoint::zeros(3)).is_err());
        assert!(multilinear_mc(&o, &FractionalPoint::zeros(4), 0, 1).is_err());
        let big = ValueOracle::modular(vec![1.0; 21]).unwrap();
        assert!(matches!(
            multilinear_exact(&big, &FractionalPoint::zeros(21)),
            Err(Error::Budget { .. })
        ));
    }
}
