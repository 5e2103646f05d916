//! Exact-rational simplex for covering programs `min cᵀx, Ax ≥ b, x ≥ 0`
//! with `c ≥ 0`.
//!
//! The engine works on the dual `max bᵀy, Aᵀy ≤ c, y ≥ 0`: with `c ≥ 0` the
//! all-slack basis is feasible, so no phase one is needed, and adding a
//! primal row later is just adding a dual column, which keeps the current
//! basis feasible (warm start for row generation). Pivoting follows Bland's
//! rule. The primal solution is read off the slack prices and is basic.

use crate::rational::Rational;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimplexOutcome {
    Optimal,
    /// The dual is unbounded, so the primal rows are infeasible.
    PrimalInfeasible,
}

pub struct DualSimplex {
    n: usize,
    /// Row-major tableau, `n` rows; columns `0..n` are slacks, `n + i` is the
    /// dual variable of primal row `i`.
    tab: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    /// Reduced costs `d_j` of the maximisation objective.
    reduced: Vec<Rational>,
    pivots: usize,
}

impl DualSimplex {
    /// `cost` is the primal objective `c`, one entry per primal variable.
    pub fn new(cost: &[Rational]) -> Self {
        assert!(cost.iter().all(|c| !c.is_negative()), "objective must be non-negative");
        let n = cost.len();
        let tab = (0..n)
            .map(|r| (0..n).map(|c| if r == c { Rational::from_integer(1.into()) } else { Rational::zero() }).collect())
            .collect();
        DualSimplex {
            n,
            tab,
            rhs: cost.to_vec(),
            basis: (0..n).collect(),
            reduced: vec![Rational::zero(); n],
            pivots: 0,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.reduced.len() - self.n
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Adds the primal row `Σ coeffs·x ≥ rhs` as a new dual column.
    pub fn add_row(&mut self, coeffs: &[(usize, Rational)], rhs: &Rational) {
        let mut d = rhs.clone();
        for (j, a) in coeffs {
            if !self.reduced[*j].is_zero() {
                d += &self.reduced[*j] * a;
            }
        }
        for r in 0..self.n {
            let mut v = Rational::zero();
            for (j, a) in coeffs {
                let t = &self.tab[r][*j];
                if !t.is_zero() {
                    v += t * a;
                }
            }
            self.tab[r].push(v);
        }
        self.reduced.push(d);
    }

    pub fn solve(&mut self) -> SimplexOutcome {
        loop {
            let Some(q) = self.reduced.iter().position(|d| d.is_positive()) else {
                return SimplexOutcome::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.n {
                let a = &self.tab[r][q];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((p, _)) = best else {
                return SimplexOutcome::PrimalInfeasible;
            };
            self.pivot(p, q);
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        self.pivots += 1;
        let piv = self.tab[p][q].clone();
        if piv != Rational::from_integer(1.into()) {
            for v in self.tab[p].iter_mut() {
                if !v.is_zero() {
                    *v /= &piv;
                }
            }
            self.rhs[p] /= &piv;
        }
        let prow = std::mem::take(&mut self.tab[p]);
        let nz: Vec<usize> = (0..prow.len()).filter(|&j| !prow[j].is_zero()).collect();
        for r in 0..self.n {
            if r == p {
                continue;
            }
            let f = self.tab[r][q].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.tab[r];
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
            let delta = &f * &self.rhs[p];
            self.rhs[r] -= delta;
        }
        let f = self.reduced[q].clone();
        for &j in &nz {
            self.reduced[j] -= &f * &prow[j];
        }
        self.tab[p] = prow;
        self.basis[p] = q;
    }

    /// Primal values `x_j = −d_{slack j}`.
    pub fn primal(&self) -> Vec<Rational> {
        (0..self.n).map(|j| -self.reduced[j].clone()).collect()
    }

    /// Dual values, one per added row.
    pub fn dual(&self) -> Vec<Rational> {
        let mut y = vec![Rational::zero(); self.num_rows()];
        for (r, &b) in self.basis.iter().enumerate() {
            if b >= self.n {
                y[b - self.n] = self.rhs[r].clone();
            }
        }
        y
    }

    /// Current dual objective `bᵀy`, equal to the primal optimum at the end.
    pub fn objective(&self, b: &[Rational]) -> Rational {
        self.dual().iter().zip(b).map(|(y, b)| y * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn row(c: &[(usize, i64)]) -> Vec<(usize, Rational)> {
        c.iter().map(|&(j, v)| (j, int(v))).collect()
    }

    #[test]
    fn triangle_cover_is_half_integral() {
        // min x0+x1+x2, x0+x1 ≥ 1, x0+x2 ≥ 1, x1+x2 ≥ 1
        let mut s = DualSimplex::new(&[int(1), int(1), int(1)]);
        for r in [row(&[(0, 1), (1, 1)]), row(&[(0, 1), (2, 1)]), row(&[(1, 1), (2, 1)])] {
            s.add_row(&r, &int(1));
        }
        assert_eq!(s.solve(), SimplexOutcome::Optimal);
        assert_eq!(s.primal(), vec![ratio(1, 2); 3]);
        assert_eq!(s.objective(&[int(1), int(1), int(1)]), ratio(3, 2));
    }

    #[test]
    fn warm_start_after_new_row() {
        let mut s = DualSimplex::new(&[int(1), int(1), int(1)]);
        for r in [row(&[(0, 1), (1, 1)]), row(&[(0, 1), (2, 1)]), row(&[(1, 1), (2, 1)])] {
            s.add_row(&r, &int(1));
        }
        s.solve();
        s.add_row(&row(&[(0, 1), (1, 1), (2, 1)]), &int(2));
        assert_eq!(s.solve(), SimplexOutcome::Optimal);
        let x = s.primal();
        assert_eq!(x.iter().sum::<Rational>(), int(2));
    }

    #[test]
    fn detects_infeasible_rows() {
        let mut s = DualSimplex::new(&[int(1)]);
        s.add_row(&[], &int(1));
        assert_eq!(s.solve(), SimplexOutcome::PrimalInfeasible);
    }

    #[test]
    fn equality_via_two_inequalities() {
        // min x0 + 2 x1, x0 + x1 ≥ 1, x1 = 1
        let mut s = DualSimplex::new(&[int(1), int(2)]);
        s.add_row(&row(&[(0, 1), (1, 1)]), &int(1));
        s.add_row(&row(&[(1, 1)]), &int(1));
        s.add_row(&row(&[(1, -1)]), &int(-1));
        assert_eq!(s.solve(), SimplexOutcome::Optimal);
        assert_eq!(s.primal(), vec![int(0), int(1)]);
    }
}
