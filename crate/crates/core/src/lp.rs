//! Dense two-phase simplex over exact rationals.
//!
//! Problems are in equality form: minimize `c·x` subject to `A x = b`,
//! `x ≥ 0`. The entering column is the most negative reduced cost until a
//! run of degenerate pivots is seen; from then on Bland's rule (smallest
//! eligible index enters, ratio ties broken by smallest basic index) is
//! used, which cannot cycle, so the method always terminates.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    pub cost: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(rows: Vec<Vec<Rational>>, rhs: Vec<Rational>, cost: Vec<Rational>) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::Lp(alloc::format!("{} rows but {} right-hand sides", rows.len(), rhs.len())));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != cost.len()) {
            return Err(Error::Lp(alloc::format!("row of width {} for {} variables", r.len(), cost.len())));
        }
        Ok(Self { rows, rhs, cost })
    }

    pub fn variables(&self) -> usize {
        self.cost.len()
    }

    pub fn solve(&self) -> LpSolution {
        Tableau::new(self).run(&self.cost)
    }

    /// Any `x ≥ 0` with `A x = b` (phase one only).
    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        let mut t = Tableau::new(self);
        if !t.phase_one() {
            return None;
        }
        Some(t.solution())
    }

    /// Checks `A x = b` and `x ≥ 0` exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.variables()
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| {
                row.iter().zip(x).fold(Rational::zero(), |acc, (a, v)| acc + a * v) == *b
            })
    }
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

struct Tableau {
    n: usize,
    // each row: n structural columns, then one artificial per original row, then rhs
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    // reduced costs over all columns, last entry is minus the objective value
    obj: Vec<Rational>,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.variables();
        let m = lp.rows.len();
        let width = n + m + 1;
        let mut rows = Vec::with_capacity(m);
        for (i, (row, b)) in lp.rows.iter().zip(&lp.rhs).enumerate() {
            let flip = b.is_negative();
            let mut t = vec![Rational::zero(); width];
            for (j, a) in row.iter().enumerate() {
                t[j] = if flip { -a } else { a.clone() };
            }
            t[n + i] = Rational::from_integer(1.into());
            t[width - 1] = if flip { -b } else { b.clone() };
            rows.push(t);
        }
        // phase-one costs: 1 on each artificial; reduced costs are minus the column sums
        let mut obj = vec![Rational::zero(); width];
        for row in &rows {
            for j in 0..n {
                obj[j] -= &row[j];
            }
            obj[width - 1] -= &row[width - 1];
        }
        Self { n, rows, basis: (n..n + m).collect(), obj }
    }

    fn width(&self) -> usize {
        self.obj.len()
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width();
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v /= &p;
            }
        }
        let pivot_row = core::mem::take(&mut self.rows[r]);
        let nonzero: Vec<usize> = (0..w).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |target: &mut Vec<Rational>| {
            let f = target[col].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nonzero {
                let delta = &f * &pivot_row[j];
                target[j] -= delta;
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = pivot_row;
        self.basis[r] = col;
    }

    /// Pivots over columns `< limit` until optimal. Returns false if
    /// unbounded.
    fn iterate(&mut self, limit: usize) -> bool {
        let rhs = self.width() - 1;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            let entering = if bland {
                (0..limit).find(|&j| self.obj[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..limit {
                    if self.obj[j].is_negative() && best.is_none_or(|b| self.obj[j] < self.obj[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(col) = entering else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col].is_positive() {
                    let ratio = &row[rhs] / &row[col];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        degenerate_run += 1;
                        if degenerate_run > DEGENERATE_LIMIT {
                            bland = true;
                        }
                    } else {
                        degenerate_run = 0;
                    }
                    self.pivot(r, col);
                }
                None => return false,
            }
        }
    }

    /// Phase one; on success the basis holds no artificial column and
    /// redundant rows have been dropped.
    fn phase_one(&mut self) -> bool {
        let limit = self.width() - 1;
        self.iterate(limit);
        if !self.obj[limit].is_zero() {
            return false;
        }
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.n {
                match (0..self.n).find(|&j| !self.rows[r][j].is_zero()) {
                    Some(col) => self.pivot(r, col),
                    None => {
                        self.rows.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        true
    }

    fn solution(&self) -> Vec<Rational> {
        let rhs = self.width() - 1;
        let mut x = vec![Rational::zero(); self.n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n {
                x[b] = row[rhs].clone();
            }
        }
        x
    }

    fn run(mut self, cost: &[Rational]) -> LpSolution {
        if !self.phase_one() {
            return LpSolution::Infeasible;
        }
        let w = self.width();
        let mut obj = vec![Rational::zero(); w];
        obj[..self.n].clone_from_slice(cost);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..w {
                if !row[j].is_zero() {
                    obj[j] -= cb * &row[j];
                }
            }
        }
        self.obj = obj;
        if !self.iterate(self.n) {
            return LpSolution::Unbounded;
        }
        let x = self.solution();
        let value = x.iter().zip(cost).fold(Rational::zero(), |acc, (v, c)| acc + v * c);
        LpSolution::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn r(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let lp = LinearProgram::new(vec![r(&[1, 2, 1, 0]), r(&[3, 1, 0, 1])], r(&[4, 6]), r(&[-1, -1, 0, 0])).unwrap();
        match lp.solve() {
            LpSolution::Optimal { x, value } => {
                assert_eq!(value, ratio(-14, 5));
                assert_eq!(x[0], ratio(8, 5));
                assert_eq!(x[1], ratio(6, 5));
                assert!(lp.is_feasible(&x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram::new(vec![r(&[1, 1]), r(&[1, 1])], r(&[1, 2]), r(&[0, 0])).unwrap();
        assert_eq!(lp.solve(), LpSolution::Infeasible);
        assert_eq!(lp.feasible_point(), None);
        // min -x s.t. x - y = 1
        let lp = LinearProgram::new(vec![r(&[1, -1])], r(&[1]), r(&[-1, 0])).unwrap();
        assert_eq!(lp.solve(), LpSolution::Unbounded);
    }

    #[test]
    fn redundant_rows_and_negative_rhs() {
        // x + y = 1 twice, -x = -1/2
        let lp = LinearProgram::new(
            vec![r(&[1, 1]), r(&[1, 1]), r(&[-1, 0])],
            vec![int(1), int(1), ratio(-1, 2)],
            r(&[0, 1]),
        )
        .unwrap();
        let x = lp.feasible_point().unwrap();
        assert_eq!(x, vec![ratio(1, 2), ratio(1, 2)]);
        assert!(matches!(lp.solve(), LpSolution::Optimal { value, .. } if value == ratio(1, 2)));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's cycling example in equality form; Bland's rule terminates.
        let lp = LinearProgram::new(
            vec![
                vec![ratio(1, 4), int(-60), ratio(-1, 25), int(9), int(1), int(0), int(0)],
                vec![ratio(1, 2), int(-90), ratio(-1, 50), int(3), int(0), int(1), int(0)],
                vec![int(0), int(0), int(1), int(0), int(0), int(0), int(1)],
            ],
            vec![int(0), int(0), int(1)],
            vec![ratio(-3, 4), int(150), ratio(-1, 50), int(6), int(0), int(0), int(0)],
        )
        .unwrap();
        match lp.solve() {
            LpSolution::Optimal { value, .. } => assert_eq!(value, ratio(-1, 20)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        assert!(LinearProgram::new(vec![r(&[1])], vec![], r(&[1])).is_err());
        assert!(LinearProgram::new(vec![r(&[1, 2])], r(&[1]), r(&[1])).is_err());
    }
}
