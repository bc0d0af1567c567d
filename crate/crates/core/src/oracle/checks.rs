//! Monotonicity and diminishing-returns checkers.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ValueOracle;
use crate::error::{Error, Result};
use crate::rng;

/// Largest ground set for exhaustive property checks.
pub const EXHAUSTIVE_CHECK_MAX_N: usize = 12;

/// Default number of sampled triples in randomized mode.
pub const DEFAULT_CHECK_TRIALS: usize = 10_000;

const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Submodular,
    Monotone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum CheckMode {
    Exhaustive,
    Randomized { trials: usize, seed: u64 },
}

/// A violating triple. For monotonicity `t = s + {x}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub x: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub trials_checked: u64,
}

impl PropertyReport {
    /// Re-evaluate the witness against `oracle`; true when it still violates
    /// the property.
    pub fn witness_reproduces(&self, oracle: &ValueOracle) -> Result<bool> {
        let Some(w) = &self.witness else {
            return Ok(false);
        };
        match self.property {
            Property::Submodular => {
                let ms = oracle.marginal(w.x, &w.s)?;
                let mt = oracle.marginal(w.x, &w.t)?;
                Ok(violates_dr(ms, mt, oracle.eval(&with(&w.t, w.x))?))
            }
            Property::Monotone => {
                let small = oracle.eval(&w.s)?;
                let big = oracle.eval(&w.t)?;
                Ok(violates_mono(small, big))
            }
        }
    }
}

fn with(set: &[usize], x: usize) -> Vec<usize> {
    let mut v = set.to_vec();
    v.push(x);
    v
}

#[inline]
fn tol(scale: f64) -> f64 {
    CHECK_TOLERANCE * scale.abs().max(1.0)
}

#[inline]
fn violates_dr(ms: f64, mt: f64, scale: f64) -> bool {
    ms < mt - tol(scale)
}

#[inline]
fn violates_mono(small: f64, big: f64) -> bool {
    big < small - tol(small)
}

fn mask_items(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|&i| mask >> i & 1 == 1).collect()
}

fn value_table(oracle: &ValueOracle) -> Result<Vec<f64>> {
    let n = oracle.n();
    if n > EXHAUSTIVE_CHECK_MAX_N {
        return Err(Error::Budget {
            what: "exhaustive property check",
            size: n as u128,
            limit: EXHAUSTIVE_CHECK_MAX_N as u128,
        });
    }
    (0..1usize << n)
        .map(|mask| oracle.eval_uncached(&mask_items(mask)))
        .collect()
}

/// Check `v(S + x) - v(S) >= v(T + x) - v(T)` for `S ⊆ T`, `x ∉ T`.
///
/// Exhaustive mode visits every triple (`n <= 12`) in the order: `x`
/// ascending, then `T` by bitmask, then `S` by ascending submask; the first
/// violation found is the witness.
pub fn check_submodular(oracle: &ValueOracle, mode: CheckMode) -> Result<PropertyReport> {
    let n = oracle.n();
    let mut report = PropertyReport {
        property: Property::Submodular,
        passed: true,
        witness: None,
        trials_checked: 0,
    };
    match mode {
        CheckMode::Exhaustive => {
            let v = value_table(oracle)?;
            let full = (1usize << n) - 1;
            for x in 0..n {
                let xb = 1usize << x;
                for t in 0..=full {
                    if t & xb != 0 {
                        continue;
                    }
                    let mt = v[t | xb] - v[t];
                    let mut s = 0usize;
                    loop {
                        report.trials_checked += 1;
                        let ms = v[s | xb] - v[s];
                        if violates_dr(ms, mt, v[t | xb]) {
                            report.passed = false;
                            report.witness = Some(Witness {
                                s: mask_items(s),
                                t: mask_items(t),
                                x,
                            });
                            return Ok(report);
                        }
                        if s == t {
                            break;
                        }
                        // next submask of t in ascending order
                        s = ((s | !t).wrapping_add(1)) & t;
                    }
                }
            }
        }
        CheckMode::Randomized { trials, seed } => {
            let mut rng = rng::seeded(seed);
            for _ in 0..trials {
                let mut t: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
                let outside: Vec<usize> = (0..n).filter(|j| !t.contains(j)).collect();
                let x = if outside.is_empty() {
                    t.swap_remove(rng.random_range(0..t.len()))
                } else {
                    outside[rng.random_range(0..outside.len())]
                };
                t.sort_unstable();
                let s: Vec<usize> = t.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
                report.trials_checked += 1;
                let ms = oracle.marginal(x, &s)?;
                let mt = oracle.marginal(x, &t)?;
                if violates_dr(ms, mt, oracle.eval(&with(&t, x))?) {
                    report.passed = false;
                    report.witness = Some(Witness { s, t, x });
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// Check `v(S) <= v(S + x)` over pairs `(S, S + x)`.
pub fn check_monotone(oracle: &ValueOracle, mode: CheckMode) -> Result<PropertyReport> {
    let n = oracle.n();
    let mut report = PropertyReport {
        property: Property::Monotone,
        passed: true,
        witness: None,
        trials_checked: 0,
    };
    let fail = |report: &mut PropertyReport, s: Vec<usize>, x: usize| {
        report.passed = false;
        let mut t = with(&s, x);
        t.sort_unstable();
        report.witness = Some(Witness { s, t, x });
    };
    match mode {
        CheckMode::Exhaustive => {
            let v = value_table(oracle)?;
            for s in 0..1usize << n {
                for x in 0..n {
                    if s >> x & 1 == 1 {
                        continue;
                    }
                    report.trials_checked += 1;
                    if violates_mono(v[s], v[s | 1 << x]) {
                        fail(&mut report, mask_items(s), x);
                        return Ok(report);
                    }
                }
            }
        }
        CheckMode::Randomized { trials, seed } => {
            let mut rng = rng::seeded(seed);
            for _ in 0..trials {
                let x = rng.random_range(0..n);
                let s: Vec<usize> = (0..n).filter(|&j| j != x && rng.random_bool(0.5)).collect();
                report.trials_checked += 1;
                let small = oracle.eval(&s)?;
                let big = oracle.eval(&with(&s, x))?;
                if violates_mono(small, big) {
                    fail(&mut report, s, x);
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ConcaveShape;

    fn crafted_supermodular() -> ValueOracle {
        // v(∅)=0, v({0})=v({1})=1, v({0,1})=3
        ValueOracle::table(vec![0.0, 1.0, 1.0, 3.0]).unwrap()
    }

    #[test]
    fn coverage_passes_both() {
        let o = ValueOracle::coverage(
            vec![vec![0, 1], vec![1, 2], vec![2, 3, 4], vec![0, 4]],
            vec![1.0, 2.0, 0.5, 1.5, 3.0],
        )
        .unwrap();
        for mode in [CheckMode::Exhaustive, CheckMode::Randomized { trials: 2000, seed: 1 }] {
            let r = check_submodular(&o, mode).unwrap();
            assert!(r.passed);
            assert!(r.trials_checked > 0);
            assert!(check_monotone(&o, mode).unwrap().passed);
        }
    }

    #[test]
    fn crafted_violation_witness() {
        let o = crafted_supermodular();
        let r = check_submodular(&o, CheckMode::Exhaustive).unwrap();
        assert!(!r.passed);
        assert_eq!(
            r.witness,
            Some(Witness {
                s: vec![],
                t: vec![1],
                x: 0
            })
        );
        assert!(r.witness_reproduces(&o).unwrap());
    }

    #[test]
    fn crafted_non_monotone() {
        // v({0,1}) = 0.5 < v({0}) = 2
        let o = ValueOracle::table(vec![0.0, 2.0, 1.0, 0.5]).unwrap();
        let r = check_monotone(&o, CheckMode::Exhaustive).unwrap();
        assert!(!r.passed);
        assert!(r.witness_reproduces(&o).unwrap());
        let r = check_monotone(&o, CheckMode::Randomized { trials: 500, seed: 3 }).unwrap();
        assert!(!r.passed);
        assert!(r.witness_reproduces(&o).unwrap());
    }

    #[test]
    fn modular_passes() {
        let o = ValueOracle::modular(vec![5.0, 3.0, 2.0, 0.0, 7.5]).unwrap();
        assert!(check_submodular(&o, CheckMode::Exhaustive).unwrap().passed);
        assert!(check_monotone(&o, CheckMode::Exhaustive).unwrap().passed);
    }

    #[test]
    fn concave_passes_randomized() {
        let o = ValueOracle::concave_over_modular((0..30).map(|i| (i % 7) as f64 + 0.5).collect(), ConcaveShape::Sqrt)
            .unwrap();
        let mode = CheckMode::Randomized {
            trials: DEFAULT_CHECK_TRIALS,
            seed: 9,
        };
        assert!(check_submodular(&o, mode).unwrap().passed);
        assert!(check_monotone(&o, mode).unwrap().passed);
    }

    #[test]
    fn exhaustive_budget() {
        let o = ValueOracle::modular(vec![1.0; 13]).unwrap();
        assert!(matches!(
            check_submodular(&o, CheckMode::Exhaustive),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn exhaustive_triple_count() {
        // sum over x of sum over T ⊆ U-x of 2^|T| = n * 3^(n-1)
        let o = ValueOracle::modular(vec![1.0; 5]).unwrap();
        let r = check_submodular(&o, CheckMode::Exhaustive).unwrap();
        assert_eq!(r.trials_checked, 5 * 81);
    }
}
