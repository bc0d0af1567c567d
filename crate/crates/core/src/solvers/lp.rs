//! Linear maximization over a scaled packing polytope.
//!
//! Dense bounded-variable primal simplex. Structural variables live in
//! `[0, 1]` and are handled as bounds rather than rows, so the tableau has one
//! row per packing constraint. Entering and leaving variables follow Bland's
//! smallest-index rule, which rules out cycling on degenerate vertices.

use crate::error::{Error, Result};
use crate::oracle::FractionalPoint;

const EPS: f64 = 1e-9;
const PIVOT_EPS: f64 = 1e-12;

/// `P(scale, S) = { x ∈ [0,1]^n : A x <= scale * b, x_j = 0 for j ∉ S }`.
#[derive(Debug, Clone)]
pub struct PackingPolytope<'a> {
    a: &'a [Vec<f64>],
    b: &'a [f64],
    scale: f64,
    support: Vec<usize>,
}

impl<'a> PackingPolytope<'a> {
    pub fn new(a: &'a [Vec<f64>], b: &'a [f64], scale: f64, support: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::input(format!(
                "{} constraint rows but {} capacities",
                a.len(),
                b.len()
            )));
        }
        let n = a.first().map_or(usize::MAX, Vec::len);
        if a.iter().any(|row| row.len() != n) {
            return Err(Error::input("constraint rows have different lengths"));
        }
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::input(format!("scale {scale} is outside (0, 1]")));
        }
        let mut support = support.to_vec();
        support.sort_unstable();
        support.dedup();
        if let Some(&j) = support.iter().find(|&&j| j >= n) {
            return Err(Error::IndexOutOfRange { index: j, n });
        }
        Ok(PackingPolytope { a, b, scale, support })
    }

    /// Number of columns, or `None` for a polytope without constraint rows.
    pub fn dim(&self) -> Option<usize> {
        self.a.first().map(Vec::len)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Membership up to `tol` slack on the packing rows.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if let Some(n) = self.dim() {
            if x.len() != n {
                return false;
            }
        }
        let mut on_support = vec![false; x.len()];
        for &j in &self.support {
            if j < x.len() {
                on_support[j] = true;
            }
        }
        let box_ok = x
            .iter()
            .enumerate()
            .all(|(j, &v)| (0.0..=1.0).contains(&v) && (on_support[j] || v == 0.0));
        box_ok
            && self.a.iter().zip(self.b).all(|(row, &bi)| {
                let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
                lhs <= self.scale * bi + tol
            })
    }
}

/// `argmax c·x` over the polytope; `c` has one entry per column.
pub fn lp_maximize(c: &[f64], polytope: &PackingPolytope<'_>) -> Result<FractionalPoint> {
    if let Some(n) = polytope.dim() {
        if c.len() != n {
            return Err(Error::input(format!(
                "objective has {} entries but the polytope has {n} columns",
                c.len()
            )));
        }
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("objective must be finite"));
    }
    let mut lp = SupportLp::new(polytope);
    let cols: Vec<f64> = polytope.support.iter().map(|&j| c[j]).collect();
    let mut x = vec![0.0; c.len()];
    for (&j, v) in polytope.support.iter().zip(lp.solve(&cols)) {
        x[j] = v;
    }
    Ok(FractionalPoint::from_clamped(x))
}

/// Constraint data restricted to the support columns. Successive solves
/// start from the previous optimal basis.
pub(crate) struct SupportLp {
    simplex: BoundedSimplex,
}

impl SupportLp {
    pub(crate) fn new(polytope: &PackingPolytope<'_>) -> Self {
        let rows: Vec<Vec<f64>> = polytope
            .a
            .iter()
            .map(|row| polytope.support.iter().map(|&j| row[j]).collect())
            .collect();
        let rhs: Vec<f64> = polytope.b.iter().map(|&bi| polytope.scale * bi).collect();
        SupportLp {
            simplex: BoundedSimplex::new(&rows, &rhs, polytope.support.len()),
        }
    }

    /// Maximizer for an objective given on the support columns, in support
    /// order.
    pub(crate) fn solve(&mut self, c: &[f64]) -> Vec<f64> {
        self.simplex.set_objective(c);
        self.simplex.optimize();
        self.simplex.values()
    }
}

/// `max c·x  s.t.  R x + s = rhs,  0 <= x <= 1,  s >= 0` with `rhs >= 0`.
struct BoundedSimplex {
    m: usize,
    p: usize,
    // m rows of B^-1 [R | I]
    tableau: Vec<Vec<f64>>,
    // reduced costs for all p + m columns
    reduced: Vec<f64>,
    basis: Vec<usize>,
    beta: Vec<f64>,
    in_basis: Vec<Option<usize>>,
    at_upper: Vec<bool>,
}

impl BoundedSimplex {
    fn new(rows: &[Vec<f64>], rhs: &[f64], p: usize) -> Self {
        let m = rows.len();
        let tableau = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut t = row.clone();
                t.extend((0..m).map(|r| if r == i { 1.0 } else { 0.0 }));
                t
            })
            .collect();
        let mut in_basis = vec![None; p + m];
        for i in 0..m {
            in_basis[p + i] = Some(i);
        }
        BoundedSimplex {
            m,
            p,
            tableau,
            reduced: vec![0.0; p + m],
            basis: (p..p + m).collect(),
            beta: rhs.to_vec(),
            in_basis,
            at_upper: vec![false; p + m],
        }
    }

    fn upper(&self, col: usize) -> f64 {
        if col < self.p {
            1.0
        } else {
            f64::INFINITY
        }
    }

    fn entering(&self, from: usize) -> Option<usize> {
        (from..self.p + self.m).find(|&q| {
            self.in_basis[q].is_none()
                && ((!self.at_upper[q] && self.reduced[q] > EPS) || (self.at_upper[q] && self.reduced[q] < -EPS))
        })
    }

    /// Reduced costs `c_j - c_B B^-1 a_j` for the current basis.
    fn set_objective(&mut self, c: &[f64]) {
        let cost = |col: usize| if col < self.p { c[col] } else { 0.0 };
        for q in 0..self.p + self.m {
            self.reduced[q] = match self.in_basis[q] {
                Some(_) => 0.0,
                None => {
                    cost(q)
                        - (0..self.m)
                            .map(|r| cost(self.basis[r]) * self.tableau[r][q])
                            .sum::<f64>()
                }
            };
        }
    }

    fn optimize(&mut self) {
        // a bound flip leaves reduced costs unchanged, so the smallest
        // eligible index can only move forward until the next pivot
        let mut from = 0;
        while let Some(q) = self.entering(from) {
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };
            // ratio test; None means the entering variable flips bounds
            let mut step = self.upper(q);
            let mut leave: Option<(usize, bool)> = None;
            for r in 0..self.m {
                let alpha = dir * self.tableau[r][q];
                let (limit, to_upper) = if alpha > PIVOT_EPS {
                    (self.beta[r].max(0.0) / alpha, false)
                } else if alpha < -PIVOT_EPS {
                    let ub = self.upper(self.basis[r]);
                    if ub.is_infinite() {
                        continue;
                    }
                    ((ub - self.beta[r]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit < step,
                    Some((lr, _)) => limit < step || (limit == step && self.basis[r] < self.basis[lr]),
                };
                if better {
                    step = limit;
                    leave = Some((r, to_upper));
                }
            }
            for r in 0..self.m {
                self.beta[r] -= dir * step * self.tableau[r][q];
            }
            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                    from = q + 1;
                }
                Some((r, to_upper)) => {
                    from = 0;
                    let entering_value = if self.at_upper[q] { 1.0 - step } else { step };
                    let old = self.basis[r];
                    self.in_basis[old] = None;
                    self.at_upper[old] = to_upper;
                    self.pivot(r, q);
                    self.basis[r] = q;
                    self.in_basis[q] = Some(r);
                    self.at_upper[q] = false;
                    self.beta[r] = entering_value;
                }
            }
            for r in 0..self.m {
                let ub = self.upper(self.basis[r]);
                self.beta[r] = self.beta[r].clamp(0.0, ub);
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        (0..self.p)
            .map(|j| match self.in_basis[j] {
                Some(r) => self.beta[r],
                None if self.at_upper[j] => 1.0,
                None => 0.0,
            })
            .collect()
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let piv = self.tableau[r][q];
        for v in &mut self.tableau[r] {
            *v /= piv;
        }
        let pivot_row = self.tableau[r].clone();
        for (i, row) in self.tableau.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.reduced[q];
        for (v, pv) in self.reduced.iter_mut().zip(&pivot_row) {
            *v -= f * pv;
        }
    }
}
