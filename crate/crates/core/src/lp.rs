//! Exact rational linear programming.
//!
//! Problems arrive in the form
//!
//! ```text
//!   maximize  c^T x
//!   s.t.      A x = b
//!             x_j >= 0   for designated j
//! ```
//!
//! (free variables are split internally). A two-phase simplex with Bland's
//! anti-cycling rule runs entirely over `BigRational`, so the returned
//! solutions and certificates are exact and re-checkable by substitution.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal {
        value: BigRational,
        solution: Vec<BigRational>,
    },
    /// Farkas certificate y: y^T A_j <= 0 for nonnegative variables,
    /// y^T A_j = 0 for free variables, and y^T b > 0.
    Infeasible { certificate: Vec<BigRational> },
    /// `ray` is a feasible improving direction: A ray = 0, ray >= 0 on
    /// designated variables, c^T ray > 0.
    Unbounded {
        solution: Vec<BigRational>,
        ray: Vec<BigRational>,
    },
}

pub struct LpProblem {
    /// maximize objective^T x
    pub objective: Vec<BigRational>,
    /// equality constraint matrix A
    pub equalities: RationalMatrix,
    /// right-hand side b
    pub rhs: Vec<BigRational>,
    /// nonnegative[j] == true forces x_j >= 0; false leaves x_j free
    pub nonnegative: Vec<bool>,
}

pub fn lp_solve(problem: &LpProblem) -> Result<LpOutcome> {
    let n = problem.objective.len();
    if problem.equalities.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: problem.equalities.cols(),
        });
    }
    if problem.equalities.rows() != problem.rhs.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.equalities.rows(),
            got: problem.rhs.len(),
        });
    }
    if problem.nonnegative.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: problem.nonnegative.len(),
        });
    }

    // Standard form: split each free variable into a difference of two
    // nonnegative ones. std_cols[j] = (column of x_j, column of the negative
    // part or usize::MAX).
    let mut std_cols: Vec<(usize, usize)> = Vec::with_capacity(n);
    let mut width = 0usize;
    for &nn in &problem.nonnegative {
        if nn {
            std_cols.push((width, usize::MAX));
            width += 1;
        } else {
            std_cols.push((width, width + 1));
            width += 2;
        }
    }
    let rows = problem.equalities.rows();
    let mut a = RationalMatrix::zero(rows, width);
    let mut c = vec![BigRational::zero(); width];
    for j in 0..n {
        let (pos, neg) = std_cols[j];
        for i in 0..rows {
            a[(i, pos)] = problem.equalities[(i, j)].clone();
        }
        c[pos] = problem.objective[j].clone();
        if neg != usize::MAX {
            for i in 0..rows {
                a[(i, neg)] = -&problem.equalities[(i, j)];
            }
            c[neg] = -&problem.objective[j];
        }
    }
    // Make b >= 0, tracking row sign flips for the certificate.
    let mut b = problem.rhs.clone();
    let mut row_sign = vec![BigRational::one(); rows];
    for i in 0..rows {
        if b[i].is_negative() {
            b[i] = -std::mem::take(&mut b[i]);
            row_sign[i] = -BigRational::one();
            for j in 0..width {
                a[(i, j)] = -std::mem::take(&mut a[(i, j)]);
            }
        }
    }

    let mut tableau = Tableau::new(a, b, width);
    match tableau.phase_one() {
        PhaseOneResult::Feasible => {}
        PhaseOneResult::Infeasible { dual } => {
            // dual is y for the sign-flipped system; undo the flips.
            let certificate: Vec<BigRational> = dual
                .into_iter()
                .zip(&row_sign)
                .map(|(y, s)| y * s)
                .collect();
            return Ok(LpOutcome::Infeasible { certificate });
        }
    }
    let merge = |x: &[BigRational]| -> Vec<BigRational> {
        std_cols
            .iter()
            .map(|&(pos, neg)| {
                if neg == usize::MAX {
                    x[pos].clone()
                } else {
                    &x[pos] - &x[neg]
                }
            })
            .collect()
    };
    match tableau.phase_two(&c) {
        PhaseTwoResult::Optimal => {
            let x = tableau.solution();
            let solution = merge(&x);
            let value = problem
                .objective
                .iter()
                .zip(&solution)
                .map(|(ci, xi)| ci * xi)
                .sum();
            Ok(LpOutcome::Optimal { value, solution })
        }
        PhaseTwoResult::Unbounded { ray } => {
            let x = tableau.solution();
            Ok(LpOutcome::Unbounded {
                solution: merge(&x),
                ray: merge(&ray),
            })
        }
    }
}

struct Tableau {
    /// rows x (structural + artificial + rhs)
    t: RationalMatrix,
    basis: Vec<usize>,
    structural: usize,
    artificial_base: usize,
    rows: usize,
}

enum PhaseOneResult {
    Feasible,
    Infeasible { dual: Vec<BigRational> },
}

enum PhaseTwoResult {
    Optimal,
    Unbounded { ray: Vec<BigRational> },
}

impl Tableau {
    fn new(a: RationalMatrix, b: Vec<BigRational>, structural: usize) -> Self {
        let rows = a.rows();
        let total = structural + rows + 1;
        let mut t = RationalMatrix::zero(rows, total);
        for i in 0..rows {
            for j in 0..structural {
                t[(i, j)] = a[(i, j)].clone();
            }
            t[(i, structural + i)] = BigRational::one();
            t[(i, total - 1)] = b[i].clone();
        }
        let basis = (0..rows).map(|i| structural + i).collect();
        Tableau {
            t,
            basis,
            structural,
            artificial_base: structural,
            rows,
        }
    }

    fn rhs_col(&self) -> usize {
        self.t.cols() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.t[(row, col)].recip();
        for j in 0..self.t.cols() {
            let x = &self.t[(row, j)] * &inv;
            self.t[(row, j)] = x;
        }
        for i in 0..self.rows {
            if i != row && !self.t[(i, col)].is_zero() {
                let factor = self.t[(i, col)].clone();
                for j in 0..self.t.cols() {
                    let x = &self.t[(i, j)] - &factor * &self.t[(row, j)];
                    self.t[(i, j)] = x;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs the simplex with Bland's rule on the given costs (maximization).
    /// `allowed` limits the entering candidates.
    fn run(&mut self, cost: &[BigRational], allowed: usize) -> Option<Vec<BigRational>> {
        loop {
            // y = c_B^T B^{-1}: accumulate from basic costs and rows.
            // Reduced cost of column j: c_j - sum_i c_{basis[i]} * t[i][j].
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut reduced = cost[j].clone();
                for i in 0..self.rows {
                    let cb = &cost[self.basis[i]];
                    if !cb.is_zero() && !self.t[(i, j)].is_zero() {
                        reduced -= cb * &self.t[(i, j)];
                    }
                }
                if reduced.is_positive() {
                    entering = Some(j);
                    break; // Bland: smallest eligible index
                }
            }
            let Some(col) = entering else {
                return None; // optimal
            };
            // Ratio test, Bland tie-break on smallest basis index.
            let rhs = self.rhs_col();
            let mut leaving: Option<(usize, BigRational)> = None;
            for i in 0..self.rows {
                if self.t[(i, col)].is_positive() {
                    let ratio = &self.t[(i, rhs)] / &self.t[(i, col)];
                    match &leaving {
                        Some((li, lr)) => {
                            if ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]) {
                                leaving = Some((i, ratio));
                            }
                        }
                        None => leaving = Some((i, ratio)),
                    }
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => {
                    // Unbounded: build the ray over structural+artificial vars.
                    let mut ray = vec![BigRational::zero(); self.t.cols() - 1];
                    ray[col] = BigRational::one();
                    for i in 0..self.rows {
                        ray[self.basis[i]] = -&self.t[(i, col)];
                    }
                    return Some(ray);
                }
            }
        }
    }

    fn phase_one(&mut self) -> PhaseOneResult {
        let total = self.t.cols() - 1;
        let mut cost = vec![BigRational::zero(); total];
        for j in self.artificial_base..total {
            cost[j] = -BigRational::one();
        }
        let unbounded = self.run(&cost, total);
        debug_assert!(unbounded.is_none(), "phase one objective is bounded");
        let rhs = self.rhs_col();
        let infeasibility: BigRational = (0..self.rows)
            .filter(|&i| self.basis[i] >= self.artificial_base)
            .map(|i| self.t[(i, rhs)].clone())
            .sum();
        if !infeasibility.is_zero() {
            // y_i = (c_B^T B^{-1})_i read off the artificial columns; the
            // Farkas certificate for the original system is -y.
            let dual: Vec<BigRational> = (0..self.rows)
                .map(|i| {
                    let mut y = BigRational::zero();
                    for r in 0..self.rows {
                        let cb = &cost[self.basis[r]];
                        if !cb.is_zero() {
                            y += cb * &self.t[(r, self.artificial_base + i)];
                        }
                    }
                    -y
                })
                .collect();
            return PhaseOneResult::Infeasible { dual };
        }
        // Drive leftover artificials out of the basis.
        for row in 0..self.rows {
            if self.basis[row] >= self.artificial_base {
                if let Some(col) = (0..self.structural).find(|&j| !self.t[(row, j)].is_zero()) {
                    self.pivot(row, col);
                }
                // A fully zero structural row is redundant; the artificial
                // stays basic at value zero and never re-enters play because
                // phase two only considers structural columns.
            }
        }
        PhaseOneResult::Feasible
    }

    fn phase_two(&mut self, structural_cost: &[BigRational]) -> PhaseTwoResult {
        let total = self.t.cols() - 1;
        let mut cost = vec![BigRational::zero(); total];
        cost[..self.structural].clone_from_slice(structural_cost);
        match self.run(&cost, self.structural) {
            None => PhaseTwoResult::Optimal,
            Some(ray) => PhaseTwoResult::Unbounded {
                ray: ray[..self.structural].to_vec(),
            },
        }
    }

    fn solution(&self) -> Vec<BigRational> {
        let rhs = self.rhs_col();
        let mut x = vec![BigRational::zero(); self.structural];
        for (i, &bj) in self.basis.iter().enumerate() {
            if bj < self.structural {
                x[bj] = self.t[(i, rhs)].clone();
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numutil::int;

    fn nn(n: usize) -> Vec<bool> {
        vec![true; n]
    }

    #[test]
    fn bounded_box() {
        // maximize x s.t. x + s = 1, x,s >= 0
        let p = LpProblem {
            objective: vec![int(1), int(0)],
            equalities: RationalMatrix::from_i64_rows(&[&[1, 1]]),
            rhs: vec![int(1)],
            nonnegative: nn(2),
        };
        match lp_solve(&p).unwrap() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, int(1));
                assert_eq!(solution[0], int(1));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_ray() {
        // maximize x with no constraints beyond x >= 0
        let p = LpProblem {
            objective: vec![int(1)],
            equalities: RationalMatrix::zero(0, 1),
            rhs: vec![],
            nonnegative: nn(1),
        };
        match lp_solve(&p).unwrap() {
            LpOutcome::Unbounded { ray, .. } => {
                assert!(ray[0].is_positive());
            }
            other => panic!("expected unbounded, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_certificate() {
        // x = 1 and x = 2 with x >= 0
        let p = LpProblem {
            objective: vec![int(0)],
            equalities: RationalMatrix::from_i64_rows(&[&[1], &[1]]),
            rhs: vec![int(1), int(2)],
            nonnegative: nn(1),
        };
        match lp_solve(&p).unwrap() {
            LpOutcome::Infeasible { certificate } => {
                // y^T A_j <= 0 for the nonnegative variable, y^T b > 0
                let ya = &certificate[0] + &certificate[1];
                assert!(!ya.is_positive());
                let yb = certificate[0].clone() + &certificate[1] * int(2);
                assert!(yb.is_positive());
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn free_variable_and_negative_rhs() {
        // maximize t s.t. x - t = -3, x >= 0, t free -> optimum t = 3 at x = 0?
        // x = t - 3 >= 0 means t >= 3... objective unbounded upward; flip:
        // maximize -t: t >= 3 gives optimum t = 3.
        let p = LpProblem {
            objective: vec![int(0), int(-1)],
            equalities: RationalMatrix::from_i64_rows(&[&[1, -1]]),
            rhs: vec![int(-3)],
            nonnegative: vec![true, false],
        };
        match lp_solve(&p).unwrap() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, int(-3));
                assert_eq!(solution[1], int(3));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn optimal_solution_satisfies_constraints_exactly() {
        // small random-ish instance, re-check by substitution
        let a = RationalMatrix::from_i64_rows(&[&[2, 1, 1, 0], &[1, 3, 0, 1]]);
        let p = LpProblem {
            objective: vec![int(3), int(2), int(0), int(0)],
            equalities: a,
            rhs: vec![int(10), int(15)],
            nonnegative: nn(4),
        };
        match lp_solve(&p).unwrap() {
            LpOutcome::Optimal { solution, .. } => {
                let lhs0 = &solution[0] * int(2) + &solution[1] + &solution[2];
                let lhs1 = solution[0].clone() + &solution[1] * int(3) + &solution[3];
                assert_eq!(lhs0, int(10));
                assert_eq!(lhs1, int(15));
                assert!(solution.iter().all(|x| !x.is_negative()));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }
}
