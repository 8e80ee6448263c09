//! Exact rational linear algebra: matrices, pivoted LDL^T, definiteness
//! classification with integer witnesses, and affine system solving.
//!
//! No floating-point value ever influences a result here; everything is
//! `BigRational` all the way down.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numutil::primitive_integer_vector;

/// Dense matrix of arbitrary-precision rationals, stored row-major.
/// `num_rational` keeps every entry in lowest terms with a positive
/// denominator, which gives us the representation invariant for free.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigRational>,
}

impl std::fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "RationalMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

impl RationalMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut m = Self::zero(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        RationalMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&x| BigRational::from_integer(BigInt::from(x)))
                        .collect()
                })
                .collect(),
        )
    }

    /// Symmetric constructor; rejects asymmetric input with the offending
    /// entry pair.
    pub fn symmetric_from_rows(rows: Vec<Vec<BigRational>>) -> Result<Self> {
        let m = Self::from_rows(rows);
        if m.rows != m.cols {
            return Err(Error::DimensionMismatch {
                expected: m.rows,
                got: m.cols,
            });
        }
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn row(&self, i: usize) -> &[BigRational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = BigRational::zero();
            for k in 0..self.cols {
                if !self[(i, k)].is_zero() && !other[(k, j)].is_zero() {
                    acc += &self[(i, k)] * &other[(k, j)];
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = BigRational::zero();
                for k in 0..self.cols {
                    if !self[(i, k)].is_zero() && !v[k].is_zero() {
                        acc += &self[(i, k)] * &v[k];
                    }
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    /// v^T M w for rational vectors.
    pub fn bilinear(&self, v: &[BigRational], w: &[BigRational]) -> BigRational {
        let mw = self.mul_vec(w);
        v.iter().zip(&mw).map(|(a, b)| a * b).sum()
    }

    /// v^T M v for an integer vector.
    pub fn quadratic_int(&self, v: &[BigInt]) -> BigRational {
        assert_eq!(self.cols, v.len());
        let mut acc = BigRational::zero();
        for i in 0..self.rows {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..self.cols {
                if v[j].is_zero() {
                    continue;
                }
                acc += &self[(i, j)] * BigRational::from_integer(&v[i] * &v[j]);
            }
        }
        acc
    }

    /// Row echelon form via exact Gaussian elimination. Returns the echelon
    /// matrix together with the pivot column indices. Deterministic: pivots
    /// are the first nonzero entry in each column, scanning left to right.
    pub fn row_echelon(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let x = &m[(r, j)] * &inv;
                m[(r, j)] = x;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let factor = m[(i, c)].clone();
                    for j in c..m.cols {
                        let x = &m[(i, j)] - &factor * &m[(r, j)];
                        m[(i, j)] = x;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.row_echelon().1.len()
    }

    /// Basis of the right kernel, in reduced echelon convention
    /// (deterministic across runs).
    pub fn kernel_basis(&self) -> Vec<Vec<BigRational>> {
        let (ech, pivots) = self.row_echelon();
        let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![BigRational::zero(); self.cols];
                v[fc] = BigRational::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -&ech[(r, fc)];
                }
                v
            })
            .collect()
    }

    pub fn det(&self) -> BigRational {
        assert!(self.is_square());
        let mut m = self.clone();
        let n = m.rows;
        let mut det = BigRational::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m[(i, c)].is_zero()) else {
                return BigRational::zero();
            };
            if p != c {
                m.swap_rows(c, p);
                det = -det;
            }
            det *= &m[(c, c)];
            let inv = m[(c, c)].recip();
            for i in (c + 1)..n {
                if !m[(i, c)].is_zero() {
                    let factor = &m[(i, c)] * &inv;
                    for j in c..n {
                        let x = &m[(i, j)] - &factor * &m[(c, j)];
                        m[(i, j)] = x;
                    }
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square());
        let n = self.rows;
        let mut aug = Self::zero(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = BigRational::one();
        }
        let (ech, pivots) = aug.row_echelon();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| ech[(i, n + j)].clone()))
    }
}

/// Pivoted LDL^T factorization of a symmetric matrix.
///
/// With `perm` the recorded pivot order, let `M~[i][j] = M[perm[i]][perm[j]]`.
/// When `completed_rank == d` we have `M~ = L D L^T` exactly. Elimination
/// stops early when every remaining diagonal entry is zero; the residual
/// block then decides between semidefiniteness and indefiniteness.
#[derive(Clone, Debug)]
pub struct LdltResult {
    pub pivots: Vec<BigRational>,
    pub unit_lower: RationalMatrix,
    pub permutation: Vec<usize>,
    pub completed_rank: usize,
    /// Residual block left when elimination stalled on an all-zero diagonal
    /// (indexed in permuted coordinates, rows/cols `completed_rank..d`).
    /// Empty when the factorization completed or the residual vanished.
    residual: RationalMatrix,
}

/// Definiteness classification with an exact integer witness for the
/// non-positive-definite cases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Definiteness {
    PositiveDefinite,
    /// Witness v satisfies M v = 0 (and hence v^T M v = 0).
    PositiveSemidefinite { kernel_vector: Vec<BigInt> },
    /// Witness v satisfies v^T M v < 0.
    Indefinite { negative_vector: Vec<BigInt> },
}

/// Pivoted LDL^T. Pivot rule: greatest absolute value among the remaining
/// diagonal entries, first index on ties.
pub fn ldlt(m: &RationalMatrix) -> Result<LdltResult> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            got: m.cols(),
        });
    }
    for i in 0..m.rows() {
        for j in (i + 1)..m.cols() {
            if m[(i, j)] != m[(j, i)] {
                return Err(Error::NotSymmetric(i, j));
            }
        }
    }
    let d = m.rows();
    // work = current residual in original indices; alive tracks unpivoted rows
    let mut work = m.clone();
    let mut perm: Vec<usize> = Vec::with_capacity(d);
    let mut remaining: Vec<usize> = (0..d).collect();
    let mut pivots: Vec<BigRational> = Vec::new();
    // l_cols[k][i] = multiplier of original row i against pivot k
    let mut l_cols: Vec<Vec<(usize, BigRational)>> = Vec::new();

    while !remaining.is_empty() {
        // choose max |diagonal| among remaining
        let mut best: Option<(usize, BigRational)> = None;
        for &i in &remaining {
            let v = work[(i, i)].abs();
            match &best {
                Some((_, b)) if v <= *b => {}
                _ => best = Some((i, v)),
            }
        }
        let (p, pabs) = best.unwrap();
        if pabs.is_zero() {
            break; // all remaining diagonals zero
        }
        let pivot = work[(p, p)].clone();
        let inv = pivot.recip();
        remaining.retain(|&i| i != p);
        let mut col = Vec::new();
        for &i in &remaining {
            let factor = &work[(i, p)] * &inv;
            if !factor.is_zero() {
                for &j in &remaining {
                    // symmetric rank-1 update
                    let x = &work[(i, j)] - &factor * &work[(p, j)];
                    work[(i, j)] = x;
                }
            }
            col.push((i, factor));
        }
        perm.push(p);
        pivots.push(pivot);
        l_cols.push(col);
    }

    let completed_rank = perm.len();
    // Residual in permuted coordinates (remaining rows, in `remaining` order).
    let residual = RationalMatrix::from_fn(remaining.len(), remaining.len(), |i, j| {
        work[(remaining[i], remaining[j])].clone()
    });
    perm.extend(remaining.iter().copied());

    // Assemble unit lower triangular L in permuted coordinates.
    let pos: Vec<usize> = {
        let mut pos = vec![0usize; d];
        for (k, &orig) in perm.iter().enumerate() {
            pos[orig] = k;
        }
        pos
    };
    let mut unit_lower = RationalMatrix::identity(d);
    for (k, col) in l_cols.iter().enumerate() {
        for (orig_row, factor) in col {
            unit_lower[(pos[*orig_row], k)] = factor.clone();
        }
    }

    Ok(LdltResult {
        pivots,
        unit_lower,
        permutation: perm,
        completed_rank,
        residual,
    })
}

impl LdltResult {
    pub fn dim(&self) -> usize {
        self.permutation.len()
    }

    /// Reconstructs L·D·L^T (D padded with the residual block) in permuted
    /// coordinates; equals M[perm[i]][perm[j]] entrywise.
    pub fn reconstruct(&self) -> RationalMatrix {
        let d = self.dim();
        let r = self.completed_rank;
        let mut middle = RationalMatrix::zero(d, d);
        for (k, p) in self.pivots.iter().enumerate() {
            middle[(k, k)] = p.clone();
        }
        for i in 0..(d - r) {
            for j in 0..(d - r) {
                middle[(r + i, r + j)] = self.residual[(i, j)].clone();
            }
        }
        self.unit_lower
            .mul(&middle)
            .mul(&self.unit_lower.transpose())
    }

    pub fn is_positive_definite(&self) -> bool {
        self.completed_rank == self.dim() && self.pivots.iter().all(|p| p.is_positive())
    }

    /// Solves L^T y = e_k in permuted coordinates and maps back to original
    /// coordinates; the result x satisfies x^T M x = pivots[k].
    fn pivot_direction(&self, k: usize) -> Vec<BigRational> {
        let d = self.dim();
        // back substitution on the unit upper triangular L^T
        let mut y = vec![BigRational::zero(); d];
        y[k] = BigRational::one();
        for i in (0..k).rev() {
            // (L^T y)_i = y_i + sum_{j>i} L[j][i] y_j = 0 for i != k
            let mut acc = BigRational::zero();
            for j in (i + 1)..=k {
                if !self.unit_lower[(j, i)].is_zero() && !y[j].is_zero() {
                    acc += &self.unit_lower[(j, i)] * &y[j];
                }
            }
            y[i] = -acc;
        }
        let mut x = vec![BigRational::zero(); d];
        for (permuted, &orig) in self.permutation.iter().enumerate() {
            x[orig] = y[permuted].clone();
        }
        x
    }
}

/// Classifies a symmetric matrix as positive definite, positive semidefinite
/// (with an exact kernel vector) or indefinite (with an integer vector of
/// negative norm). Witnesses are integer, content 1.
pub fn definiteness(m: &RationalMatrix) -> Result<Definiteness> {
    let f = ldlt(m)?;
    let d = f.dim();
    if f.is_positive_definite() {
        return Ok(Definiteness::PositiveDefinite);
    }
    // A negative pivot gives a negative direction directly.
    if let Some(k) = f.pivots.iter().position(|p| p.is_negative()) {
        let x = f.pivot_direction(k);
        let witness = primitive_integer_vector(&x);
        debug_assert!(m.quadratic_int(&witness).is_negative());
        return Ok(Definiteness::Indefinite {
            negative_vector: witness,
        });
    }
    // All pivots positive but elimination stalled: every remaining diagonal
    // entry of the residual is zero. A nonzero off-diagonal entry a at (i,j)
    // gives the 2x2 block [[0,a],[a,0]], indefinite.
    let r = f.completed_rank;
    let rd = d - r;
    for i in 0..rd {
        for j in (i + 1)..rd {
            if !f.residual[(i, j)].is_zero() {
                // residual-coordinate direction e_i - sign(a) e_j has norm -2|a|
                let mut w = vec![BigRational::zero(); d];
                w[r + i] = BigRational::one();
                w[r + j] = if f.residual[(i, j)].is_positive() {
                    -BigRational::one()
                } else {
                    BigRational::one()
                };
                // Map through L^{-T}: solve L^T y = w, then unpermute.
                let x = solve_unit_upper(&f.unit_lower, &w);
                let mut orig = vec![BigRational::zero(); d];
                for (permuted, &o) in f.permutation.iter().enumerate() {
                    orig[o] = x[permuted].clone();
                }
                let witness = primitive_integer_vector(&orig);
                debug_assert!(m.quadratic_int(&witness).is_negative());
                return Ok(Definiteness::Indefinite {
                    negative_vector: witness,
                });
            }
        }
    }
    // Residual vanished: positive semidefinite with a rank defect.
    let kernel = m.kernel_basis();
    let v = kernel
        .first()
        .expect("rank defect implies a nontrivial kernel");
    let witness = primitive_integer_vector(v);
    debug_assert!(m.mul_vec(&witness.iter().map(|x| BigRational::from_integer(x.clone())).collect::<Vec<_>>()).iter().all(|x| x.is_zero()));
    Ok(Definiteness::PositiveSemidefinite {
        kernel_vector: witness,
    })
}

/// Solves L^T y = w with L unit lower triangular.
fn solve_unit_upper(l: &RationalMatrix, w: &[BigRational]) -> Vec<BigRational> {
    let d = l.rows();
    let mut y = vec![BigRational::zero(); d];
    for i in (0..d).rev() {
        let mut acc = w[i].clone();
        for j in (i + 1)..d {
            if !l[(j, i)].is_zero() && !y[j].is_zero() {
                acc -= &l[(j, i)] * &y[j];
            }
        }
        y[i] = acc;
    }
    y
}

/// Affine solution set of M x = b: a particular solution plus a kernel
/// basis, or an infeasibility certificate y with y^T M = 0, y^T b != 0.
#[derive(Clone, Debug)]
pub enum AffineSolution {
    Solvable {
        particular: Vec<BigRational>,
        kernel: Vec<Vec<BigRational>>,
    },
    Infeasible {
        certificate: Vec<BigRational>,
    },
}

pub fn solve(m: &RationalMatrix, b: &[BigRational]) -> AffineSolution {
    assert_eq!(m.rows(), b.len());
    let rows = m.rows();
    let cols = m.cols();
    // Augment with b and an identity to track row operations for the
    // certificate.
    let mut aug = RationalMatrix::zero(rows, cols + 1 + rows);
    for i in 0..rows {
        for j in 0..cols {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, cols)] = b[i].clone();
        aug[(i, cols + 1 + i)] = BigRational::one();
    }
    // Eliminate on the first `cols` columns only.
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !aug[(i, c)].is_zero()) else {
            continue;
        };
        aug.swap_rows(r, p);
        let inv = aug[(r, c)].recip();
        for j in 0..aug.cols() {
            let x = &aug[(r, j)] * &inv;
            aug[(r, j)] = x;
        }
        for i in 0..rows {
            if i != r && !aug[(i, c)].is_zero() {
                let factor = aug[(i, c)].clone();
                for j in 0..aug.cols() {
                    let x = &aug[(i, j)] - &factor * &aug[(r, j)];
                    aug[(i, j)] = x;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    // Any zero row of the coefficient part with nonzero rhs is infeasible.
    for i in r..rows {
        if !aug[(i, cols)].is_zero() {
            let certificate: Vec<BigRational> =
                (0..rows).map(|j| aug[(i, cols + 1 + j)].clone()).collect();
            return AffineSolution::Infeasible { certificate };
        }
    }
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut particular = vec![BigRational::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        particular[pc] = aug[(row, cols)].clone();
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_set.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&fc| {
            let mut v = vec![BigRational::zero(); cols];
            v[fc] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -&aug[(row, fc)];
            }
            v
        })
        .collect();
    AffineSolution::Solvable { particular, kernel }
}
