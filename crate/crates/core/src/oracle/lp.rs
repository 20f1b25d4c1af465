//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Variables are non-negative. Problems are tiny (a handful of rows), so the
//! tableau is kept dense and every pivot is exact.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::rate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// `maximize objective . x` subject to `constraints`, `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> Rational {
        self.rows[r][self.width]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        if !p.is_one() {
            for v in self.rows[r].iter_mut() {
                *v /= p;
            }
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[col];
            if f.is_zero() {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= f * pv;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Maximizes `cost` over the columns flagged in `allowed`.
    /// Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        loop {
            // reduced cost of column j: c_B B^-1 A_j - c_j
            let entering = (0..self.width)
                .find(|&j| allowed[j] && !self.basis.contains(&j) && self.reduced_cost(cost, j).is_negative());
            let Some(col) = entering else { return true };

            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][col];
                if a.is_positive() {
                    let ratio = self.rhs(r) / a;
                    let better = match &best {
                        None => true,
                        Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }

    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut z = -cost[j];
        for (r, &b) in self.basis.iter().enumerate() {
            let a = self.rows[r][j];
            if !a.is_zero() && !cost[b].is_zero() {
                z += cost[b] * a;
            }
        }
        z
    }

    fn objective_value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .map(|(r, &b)| cost[b] * self.rhs(r))
            .fold(Rational::zero(), |a, b| a + b)
    }
}

/// Solves `lp` exactly.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.num_vars;
    let m = lp.constraints.len();
    let slack_count = lp.constraints.iter().filter(|c| c.relation != Relation::Eq).count();
    let art_start = n + slack_count;

    // normalize rhs >= 0
    let normalized: Vec<(Vec<Rational>, Relation, Rational)> = lp
        .constraints
        .iter()
        .map(|c| {
            debug_assert_eq!(c.coefficients.len(), n);
            if c.rhs.is_negative() {
                let flipped = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coefficients.iter().map(|v| -v).collect(), flipped, -c.rhs)
            } else {
                (c.coefficients.clone(), c.relation, c.rhs)
            }
        })
        .collect();
    let art_count = normalized.iter().filter(|c| c.1 != Relation::Le).count();
    let width = art_start + art_count;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut slack, mut art) = (n, art_start);
    for (coeffs, rel, rhs) in &normalized {
        let mut row = vec![Rational::zero(); width + 1];
        row[..n].copy_from_slice(coeffs);
        row[width] = *rhs;
        match rel {
            Relation::Le => {
                row[slack] = Rational::one();
                basis.push(slack);
                slack += 1;
            }
            Relation::Ge => {
                row[slack] = -Rational::one();
                slack += 1;
                row[art] = Rational::one();
                basis.push(art);
                art += 1;
            }
            Relation::Eq => {
                row[art] = Rational::one();
                basis.push(art);
                art += 1;
            }
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis, width };

    if art_count > 0 {
        let mut phase1 = vec![Rational::zero(); width];
        for c in phase1.iter_mut().skip(art_start) {
            *c = -Rational::one();
        }
        let all = vec![true; width];
        t.optimize(&phase1, &all);
        if t.objective_value(&phase1).is_negative() {
            return LpOutcome::Infeasible;
        }
        // drive zero-valued artificials out of the basis, dropping redundant rows
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                match (0..art_start).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(col) => {
                        t.pivot(r, col);
                        r += 1;
                    }
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let mut cost = vec![Rational::zero(); width];
    cost[..n].copy_from_slice(&lp.objective);
    let allowed: Vec<bool> = (0..width).map(|j| j < art_start).collect();
    if !t.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut point = vec![Rational::zero(); n];
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            point[b] = t.rhs(r);
        }
    }
    LpOutcome::Optimal {
        value: t.objective_value(&cost),
        point,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    fn le(coeffs: &[i128], rhs: i128) -> Constraint {
        Constraint {
            coefficients: coeffs.iter().map(|&c| r(c)).collect(),
            relation: Relation::Le,
            rhs: r(rhs),
        }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![r(3), r(5)],
            constraints: vec![le(&[1, 0], 4), le(&[0, 2], 12), le(&[3, 2], 18)],
        };
        assert_eq!(
            solve(&lp),
            LpOutcome::Optimal {
                value: r(36),
                point: vec![r(2), r(6)]
            }
        );
    }

    #[test]
    fn fractional_optimum() {
        // max x + y, 2x + y <= 2, x + 2y <= 2 -> 4/3
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![r(1), r(1)],
            constraints: vec![le(&[2, 1], 2), le(&[1, 2], 2)],
        };
        assert_eq!(solve(&lp).value(), Some(Rational::new(4, 3)));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = LinearProgram {
            num_vars: 1,
            objective: vec![r(1)],
            constraints: vec![
                le(&[1], 1),
                Constraint {
                    coefficients: vec![r(1)],
                    relation: Relation::Ge,
                    rhs: r(2),
                },
            ],
        };
        assert_eq!(solve(&infeasible), LpOutcome::Infeasible);

        let unbounded = LinearProgram {
            num_vars: 2,
            objective: vec![r(1), r(0)],
            constraints: vec![le(&[-1, 1], 1)],
        };
        assert_eq!(solve(&unbounded), LpOutcome::Unbounded);
    }

    #[test]
    fn equalities_with_redundant_rows() {
        // x + y = 1 stated twice, negative rhs form, minimize x via max -x
        let lp = LinearProgram {
            num_vars: 2,
            objective: vec![r(-1), r(0)],
            constraints: vec![
                Constraint {
                    coefficients: vec![r(1), r(1)],
                    relation: Relation::Eq,
                    rhs: r(1),
                },
                Constraint {
                    coefficients: vec![r(-1), r(-1)],
                    relation: Relation::Eq,
                    rhs: r(-1),
                },
            ],
        };
        assert_eq!(
            solve(&lp),
            LpOutcome::Optimal {
                value: r(0),
                point: vec![r(0), r(1)]
            }
        );
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under Dantzig's rule; Bland terminates at 1/20.
        let q = |n, d| Rational::new(n, d);
        let lp = LinearProgram {
            num_vars: 4,
            objective: vec![q(3, 4), r(-150), q(1, 50), r(-6)],
            constraints: vec![
                Constraint {
                    coefficients: vec![q(1, 4), r(-60), q(-1, 25), r(9)],
                    relation: Relation::Le,
                    rhs: r(0),
                },
                Constraint {
                    coefficients: vec![q(1, 2), r(-90), q(-1, 50), r(3)],
                    relation: Relation::Le,
                    rhs: r(0),
                },
                Constraint {
                    coefficients: vec![r(0), r(0), r(1), r(0)],
                    relation: Relation::Le,
                    rhs: r(1),
                },
            ],
        };
        assert_eq!(solve(&lp).value(), Some(q(1, 20)));
    }
}
