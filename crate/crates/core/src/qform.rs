//! Quadratic-form semantics: arithmetical minima and minimal vectors
//! (exact Fincke-Pohst), perfection, eutaxy, extremeness, the Hermite
//! invariant, and the catalog of classical root forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{self, Definiteness, RationalMatrix};
use crate::lp::{lp_solve, LpOutcome, LpProblem};
use crate::numutil::{canonical_sign, ceil_of_neg_sqrt_shifted, floor_of_sqrt_shifted};
use crate::polycone::SymCoordinates;

/// A positive definite quadratic form, identified with its symmetric Gram
/// matrix. Immutable after construction.
#[derive(Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    gram: RationalMatrix,
}

impl std::fmt::Debug for QuadraticForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "QuadraticForm({:?})", self.gram)
    }
}

/// The arithmetical minimum together with the antipodally reduced set of
/// minimal vectors: one representative per pair {v, -v}, first nonzero
/// coordinate positive, sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalVectorSet {
    pub minimum: BigRational,
    pub vectors: Vec<Vec<BigInt>>,
}

impl MinimalVectorSet {
    /// |Min(A)|, counting both vectors of each antipodal pair.
    pub fn full_count(&self) -> usize {
        2 * self.vectors.len()
    }
}

/// gamma(A)^d = lambda(A)^d / det(A), kept as a power so it stays rational.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HermitePower(pub BigRational);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogForm {
    A(usize),
    D(usize),
    E6,
    E7,
    E8,
    Identity(usize),
}

impl QuadraticForm {
    pub fn new(gram: RationalMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::DimensionMismatch {
                expected: gram.rows(),
                got: gram.cols(),
            });
        }
        for i in 0..gram.rows() {
            for j in (i + 1)..gram.cols() {
                if gram[(i, j)] != gram[(j, i)] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        Ok(QuadraticForm { gram })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::new(RationalMatrix::from_i64_rows(rows))
    }

    pub fn dim(&self) -> usize {
        self.gram.rows()
    }

    pub fn gram(&self) -> &RationalMatrix {
        &self.gram
    }

    pub fn norm(&self, v: &[BigInt]) -> BigRational {
        self.gram.quadratic_int(v)
    }

    pub fn det(&self) -> BigRational {
        self.gram.det()
    }

    /// Errors with the definiteness witness when the form is not PD.
    pub fn ensure_positive_definite(&self) -> Result<()> {
        match linalg::definiteness(&self.gram)? {
            Definiteness::PositiveDefinite => Ok(()),
            Definiteness::PositiveSemidefinite { kernel_vector } => {
                Err(Error::NotPositiveDefinite {
                    witness: kernel_vector,
                })
            }
            Definiteness::Indefinite { negative_vector } => Err(Error::NotPositiveDefinite {
                witness: negative_vector,
            }),
        }
    }

    /// Exact arithmetical minimum and complete antipodal-reduced Min(A).
    /// The search bound starts at the smallest diagonal entry (attained by a
    /// unit vector) and shrinks as shorter vectors are found.
    pub fn minimal_vectors(&self) -> Result<MinimalVectorSet> {
        let initial = (0..self.dim())
            .map(|i| self.gram[(i, i)].clone())
            .min()
            .expect("positive dimension");
        let mut best = initial.clone();
        let found = self.enumerate_up_to_dynamic(&initial, Some(&mut best))?;
        let vectors = found
            .into_iter()
            .filter(|(_, norm)| *norm == best)
            .map(|(v, _)| v)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(MinimalVectorSet {
            minimum: best,
            vectors,
        })
    }

    /// All antipodal-reduced vectors with v^T A v <= bound, with norms.
    pub fn vectors_up_to(&self, bound: &BigRational) -> Result<Vec<(Vec<BigInt>, BigRational)>> {
        let raw = self.enumerate_up_to_dynamic(bound, None)?;
        let set: BTreeSet<(Vec<BigInt>, BigRational)> = raw
            .into_iter()
            .map(|(v, n)| (v, n))
            .collect();
        Ok(set.into_iter().collect())
    }

    /// Fincke-Pohst over the exact LDL^T of the Gram matrix. When `shrink`
    /// is given, the bound is tightened to the best norm seen so far.
    fn enumerate_up_to_dynamic(
        &self,
        bound: &BigRational,
        mut shrink: Option<&mut BigRational>,
    ) -> Result<Vec<(Vec<BigInt>, BigRational)>> {
        self.ensure_positive_definite()?;
        let f = linalg::ldlt(&self.gram)?;
        debug_assert!(f.is_positive_definite());
        let d = self.dim();
        // q(v) = sum_k pivots[k] * (vt_k + c_k)^2 with vt the permuted vector
        // and c_k = sum_{i>k} L[i][k] * vt_i.
        let l = &f.unit_lower;
        let mut out: Vec<(Vec<BigInt>, BigRational)> = Vec::new();
        let mut vt = vec![BigInt::zero(); d];

        // Depth-first over permuted coordinates d-1 .. 0.
        struct Frame<'a> {
            pivots: &'a [BigRational],
            l: &'a RationalMatrix,
        }
        fn descend(
            fr: &Frame,
            level: usize,
            partial: &BigRational,
            vt: &mut Vec<BigInt>,
            bound: &mut BigRational,
            shrink: &mut Option<&mut BigRational>,
            out: &mut Vec<(Vec<BigInt>, BigRational)>,
        ) {
            let room = &*bound - partial;
            if room.is_negative() {
                return;
            }
            let c: BigRational = ((level + 1)..vt.len())
                .map(|i| &fr.l[(i, level)] * BigRational::from_integer(vt[i].clone()))
                .sum();
            let b = &room / &fr.pivots[level];
            let lo = ceil_of_neg_sqrt_shifted(&b, &c);
            let hi = floor_of_sqrt_shifted(&b, &c);
            let mut n = lo;
            while n <= hi {
                vt[level] = n.clone();
                let y = BigRational::from_integer(n.clone()) + &c;
                let term = &fr.pivots[level] * &y * &y;
                let total = partial + &term;
                if total <= *bound {
                    if level == 0 {
                        if vt.iter().any(|x| !x.is_zero()) && !total.is_zero() {
                            if let Some(best) = shrink {
                                if total < **best {
                                    **best = total.clone();
                                    *bound = total.clone();
                                }
                            }
                            out.push((vt.clone(), total));
                        }
                    } else {
                        descend(fr, level - 1, &total, vt, bound, shrink, out);
                    }
                }
                n += BigInt::one();
            }
            vt[level] = BigInt::zero();
        }

        let mut dyn_bound = bound.clone();
        let frame = Frame {
            pivots: &f.pivots,
            l,
        };
        descend(
            &frame,
            d - 1,
            &BigRational::zero(),
            &mut vt,
            &mut dyn_bound,
            &mut shrink,
            &mut out,
        );

        // Map back from permuted to original coordinates and canonicalize.
        let mut result = Vec::with_capacity(out.len());
        for (vt, norm) in out {
            if norm > dyn_bound {
                continue; // sharpened bound invalidated earlier finds
            }
            let mut v = vec![BigInt::zero(); d];
            for (k, &orig) in f.permutation.iter().enumerate() {
                v[orig] = vt[k].clone();
            }
            canonical_sign(&mut v);
            debug_assert_eq!(self.norm(&v), norm);
            result.push((v, norm));
        }
        Ok(result)
    }

    /// True iff {v v^T : v in Min(A)} spans the whole space of symmetric
    /// matrices (dimension d(d+1)/2).
    pub fn is_perfect(&self) -> Result<bool> {
        let min = self.minimal_vectors()?;
        Ok(self.perfection_rank(&min) == SymCoordinates::new(self.dim()).flat_dim())
    }

    /// Rank of the flattened rank-1 projections of the minimal vectors.
    pub fn perfection_rank(&self, min: &MinimalVectorSet) -> usize {
        let coords = SymCoordinates::new(self.dim());
        let rows: Vec<Vec<BigRational>> = min
            .vectors
            .iter()
            .map(|v| coords.ray_coords_int(v))
            .collect();
        RationalMatrix::from_rows(rows).rank()
    }

    /// Eutaxy via the LP  max t  s.t.  sum_v x_v (v v^T) = A^{-1},
    /// x_v >= t  over antipodal representatives. Returns the coefficient
    /// vector (indexed like `min.vectors`) when the optimum is positive.
    pub fn eutaxy_certificate(&self) -> Result<Option<Vec<BigRational>>> {
        self.ensure_positive_definite()?;
        let min = self.minimal_vectors()?;
        let n = min.vectors.len();
        let coords = SymCoordinates::new(self.dim());
        let m = coords.flat_dim();
        let inv = self.gram.inverse().expect("positive definite");
        // variables: x_0..x_{n-1} (free), t (free), s_0..s_{n-1} (>= 0)
        // constraints: sum_v x_v * entry_coords(v v^T) = entry_coords(A^{-1})
        //              x_v - t - s_v = 0
        let cols = 2 * n + 1;
        let mut eq = RationalMatrix::zero(m + n, cols);
        let mut rhs = Vec::with_capacity(m + n);
        for row in 0..m {
            for (j, v) in min.vectors.iter().enumerate() {
                eq[(row, j)] = coords.entry_coords_int_at(v, row);
            }
            rhs.push(coords.entry_coords_at(&inv, row));
        }
        for j in 0..n {
            eq[(m + j, j)] = BigRational::one();
            eq[(m + j, n)] = -BigRational::one();
            eq[(m + j, n + 1 + j)] = -BigRational::one();
            rhs.push(BigRational::zero());
        }
        let mut objective = vec![BigRational::zero(); cols];
        objective[n] = BigRational::one();
        let mut nonnegative = vec![false; cols];
        for item in nonnegative.iter_mut().skip(n + 1) {
            *item = true;
        }
        let outcome = lp_solve(&LpProblem {
            objective,
            equalities: eq,
            rhs,
            nonnegative,
        })?;
        match outcome {
            LpOutcome::Optimal { value, solution } if value.is_positive() => {
                Ok(Some(solution[..n].to_vec()))
            }
            _ => Ok(None),
        }
    }

    pub fn is_eutactic(&self) -> Result<bool> {
        Ok(self.eutaxy_certificate()?.is_some())
    }

    /// Perfect and eutactic (Voronoi's characterization of extremeness).
    pub fn is_extreme(&self) -> Result<bool> {
        Ok(self.is_perfect()? && self.is_eutactic()?)
    }

    pub fn hermite_power(&self) -> Result<HermitePower> {
        self.ensure_positive_definite()?;
        let min = self.minimal_vectors()?;
        let mut p = BigRational::one();
        for _ in 0..self.dim() {
            p *= &min.minimum;
        }
        Ok(HermitePower(p / self.det()))
    }

    /// Rescales to arithmetical minimum 2, the catalog convention.
    pub fn normalize_scale(&self) -> Result<QuadraticForm> {
        let min = self.minimal_vectors()?;
        let factor = BigRational::from_integer(BigInt::from(2)) / &min.minimum;
        Ok(QuadraticForm {
            gram: self.gram.scale(&factor),
        })
    }

    /// B = P^T A P.
    pub fn transform(&self, p: &RationalMatrix) -> QuadraticForm {
        QuadraticForm {
            gram: p.transpose().mul(&self.gram).mul(p),
        }
    }

    pub fn catalog(which: CatalogForm) -> Result<QuadraticForm> {
        let gram = match which {
            CatalogForm::A(n) => {
                if n == 0 {
                    return Err(Error::UnknownCatalogForm("A_0".into()));
                }
                tridiagonal(n)
            }
            CatalogForm::D(n) => match n {
                0 | 1 => return Err(Error::UnknownCatalogForm(format!("D_{n}"))),
                2 => RationalMatrix::from_i64_rows(&[&[2, 0], &[0, 2]]),
                _ => {
                    // chain 0..n-2, branch node n-1 attached to node n-3
                    let mut m = tridiagonal(n);
                    let minus_one = -BigRational::one();
                    m[(n - 1, n - 2)] = BigRational::zero();
                    m[(n - 2, n - 1)] = BigRational::zero();
                    m[(n - 1, n - 3)] = minus_one.clone();
                    m[(n - 3, n - 1)] = minus_one;
                    m
                }
            },
            CatalogForm::E6 => e_series(6, 2),
            CatalogForm::E7 => e_series(7, 3),
            CatalogForm::E8 => e_series(8, 4),
            CatalogForm::Identity(n) => {
                if n == 0 {
                    return Err(Error::UnknownCatalogForm("Identity_0".into()));
                }
                RationalMatrix::identity(n)
            }
        };
        Ok(QuadraticForm { gram })
    }

    pub fn catalog_by_name(name: &str) -> Result<QuadraticForm> {
        let which = parse_catalog_name(name)?;
        Self::catalog(which)
    }
}

fn parse_catalog_name(name: &str) -> Result<CatalogForm> {
    let bad = || Error::UnknownCatalogForm(name.to_string());
    match name.to_ascii_uppercase().as_str() {
        "E6" | "E_6" => return Ok(CatalogForm::E6),
        "E7" | "E_7" => return Ok(CatalogForm::E7),
        "E8" | "E_8" => return Ok(CatalogForm::E8),
        _ => {}
    }
    let split = name.find(|c: char| c == '_' || c.is_ascii_digit()).ok_or_else(bad)?;
    let (family, num) = name.split_at(split);
    let n: usize = num.trim_start_matches('_').parse().map_err(|_| bad())?;
    match family.to_ascii_uppercase().as_str() {
        "A" => Ok(CatalogForm::A(n)),
        "D" => Ok(CatalogForm::D(n)),
        "IDENTITY" | "I" => Ok(CatalogForm::Identity(n)),
        _ => Err(bad()),
    }
}

/// Gram matrix of A_n: 2 on the diagonal, -1 on the first off-diagonals.
fn tridiagonal(n: usize) -> RationalMatrix {
    RationalMatrix::from_fn(n, n, |i, j| {
        if i == j {
            BigRational::from_integer(BigInt::from(2))
        } else if i.abs_diff(j) == 1 {
            -BigRational::one()
        } else {
            BigRational::zero()
        }
    })
}

/// E_n as a T-shaped Dynkin diagram: a chain of n-1 nodes with the last
/// node attached to the chain at `branch_at`.
fn e_series(n: usize, branch_at: usize) -> RationalMatrix {
    let mut m = tridiagonal(n);
    let minus_one = -BigRational::one();
    m[(n - 1, n - 2)] = BigRational::zero();
    m[(n - 2, n - 1)] = BigRational::zero();
    m[(n - 1, branch_at)] = minus_one.clone();
    m[(branch_at, n - 1)] = minus_one;
    m
}

/// Parses the form file format: line 1 holds the dimension, the next d
/// lines hold d space-separated rationals ("p/q" or integers), row-major.
pub fn parse_form(text: &str) -> Result<QuadraticForm> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
    let d: usize = first.trim().parse().map_err(|_| Error::Parse {
        line: 1,
        message: format!("expected a dimension, got {first:?}"),
    })?;
    if d == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "dimension must be positive".into(),
        })?;
    }
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(d);
    for _ in 0..d {
        let (idx, line) = lines.next().ok_or_else(|| Error::Parse {
            line: rows.len() + 2,
            message: format!("expected {d} matrix rows"),
        })?;
        let mut row = Vec::with_capacity(d);
        for (col, token) in line.split_whitespace().enumerate() {
            row.push(parse_rational(token).map_err(|m| Error::Parse {
                line: idx + 1,
                message: format!("column {}: {m}", col + 1),
            })?);
        }
        if row.len() != d {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {d} entries, got {}", row.len()),
            });
        }
        rows.push(row);
    }
    let gram = RationalMatrix::from_rows(rows);
    for i in 0..d {
        for j in (i + 1)..d {
            if gram[(i, j)] != gram[(j, i)] {
                return Err(Error::Parse {
                    line: i + 2,
                    message: format!(
                        "matrix is not symmetric: entries ({},{}) and ({},{}) differ",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    ),
                });
            }
        }
    }
    QuadraticForm::new(gram)
}

pub fn parse_rational(token: &str) -> std::result::Result<BigRational, String> {
    if let Some((num, den)) = token.split_once('/') {
        let n: BigInt = num
            .parse()
            .map_err(|_| format!("bad numerator in {token:?}"))?;
        let d: BigInt = den
            .parse()
            .map_err(|_| format!("bad denominator in {token:?}"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in {token:?}"));
        }
        Ok(BigRational::new(n, d))
    } else {
        let n: BigInt = token.parse().map_err(|_| format!("bad number {token:?}"))?;
        Ok(BigRational::from_integer(n))
    }
}

pub fn format_form(form: &QuadraticForm) -> String {
    let d = form.dim();
    let mut out = format!("{d}\n");
    for i in 0..d {
        let row: Vec<String> = (0..d)
            .map(|j| {
                let x = &form.gram()[(i, j)];
                if x.is_integer() {
                    x.numer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numutil::rat;

    fn catalog_min(which: CatalogForm) -> MinimalVectorSet {
        QuadraticForm::catalog(which).unwrap().minimal_vectors().unwrap()
    }

    /// Independent oracle: scan the integer box [-4, 4]^d for the minimum
    /// and count antipodal classes attaining it.
    fn box_oracle(form: &QuadraticForm) -> (BigRational, usize) {
        let d = form.dim();
        let mut best: Option<BigRational> = None;
        let mut count = 0usize;
        let mut v = vec![-4i64; d];
        loop {
            if v.iter().any(|&x| x != 0) {
                let w: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
                let n = form.norm(&w);
                match &best {
                    Some(b) if n > *b => {}
                    Some(b) if n == *b => count += 1,
                    _ => {
                        best = Some(n);
                        count = 1;
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == d {
                    return (best.unwrap(), count / 2);
                }
                v[k] += 1;
                if v[k] <= 4 {
                    break;
                }
                v[k] = -4;
                k += 1;
            }
        }
    }

    #[test]
    fn minimal_vectors_match_box_oracle() {
        for which in [
            CatalogForm::A(2),
            CatalogForm::A(3),
            CatalogForm::D(4),
            CatalogForm::Identity(3),
        ] {
            let form = QuadraticForm::catalog(which).unwrap();
            let min = form.minimal_vectors().unwrap();
            let (oracle_min, oracle_classes) = box_oracle(&form);
            assert_eq!(min.minimum, oracle_min);
            assert_eq!(min.vectors.len(), oracle_classes);
            for v in &min.vectors {
                assert_eq!(form.norm(v), min.minimum);
                assert!(v.iter().find(|x| !x.is_zero()).unwrap().is_positive());
            }
            let mut sorted = min.vectors.clone();
            sorted.sort();
            sorted.dedup();
            assert_eq!(sorted, min.vectors);
        }
    }

    #[test]
    fn catalog_minimal_vector_counts() {
        // root systems: A_d has d(d+1) roots, D_n has 2n(n-1),
        // E6/E7/E8 have 72/126/240
        for d in 1..=6 {
            assert_eq!(catalog_min(CatalogForm::A(d)).full_count(), d * (d + 1));
        }
        for n in 3..=6 {
            assert_eq!(catalog_min(CatalogForm::D(n)).full_count(), 2 * n * (n - 1));
        }
        assert_eq!(catalog_min(CatalogForm::E6).full_count(), 72);
        assert_eq!(catalog_min(CatalogForm::E7).full_count(), 126);
        assert_eq!(catalog_min(CatalogForm::E8).full_count(), 240);
        for d in 1..=5 {
            assert_eq!(catalog_min(CatalogForm::Identity(d)).full_count(), 2 * d);
        }
    }

    #[test]
    fn hermite_powers_of_known_maximizers() {
        let cases: [(CatalogForm, i64, i64); 5] = [
            (CatalogForm::A(2), 4, 3),
            (CatalogForm::A(3), 2, 1),
            (CatalogForm::D(4), 4, 1),
            (CatalogForm::A(4), 16, 5),
            (CatalogForm::E8, 256, 1),
        ];
        for (which, p, q) in cases {
            let form = QuadraticForm::catalog(which).unwrap();
            assert_eq!(form.hermite_power().unwrap(), HermitePower(rat(p, q)));
        }
    }

    #[test]
    fn perfection_and_eutaxy_of_catalog_forms() {
        for which in [
            CatalogForm::A(2),
            CatalogForm::A(3),
            CatalogForm::A(4),
            CatalogForm::D(4),
            CatalogForm::D(5),
            CatalogForm::E6,
        ] {
            let form = QuadraticForm::catalog(which).unwrap();
            assert!(form.is_perfect().unwrap(), "{which:?} perfect");
            assert!(form.is_extreme().unwrap(), "{which:?} extreme");
        }
        for d in 2..=4 {
            let id = QuadraticForm::catalog(CatalogForm::Identity(d)).unwrap();
            assert!(!id.is_perfect().unwrap());
            // Z^d is eutactic: A^{-1} = sum over +-e_i with weight 1/2
            assert!(id.is_eutactic().unwrap());
            assert!(!id.is_extreme().unwrap());
        }
    }

    #[test]
    fn eutaxy_certificate_reconstructs_inverse() {
        for which in [CatalogForm::A(2), CatalogForm::D(4), CatalogForm::A(4)] {
            let form = QuadraticForm::catalog(which).unwrap();
            let min = form.minimal_vectors().unwrap();
            let x = form.eutaxy_certificate().unwrap().expect("eutactic");
            assert_eq!(x.len(), min.vectors.len());
            let d = form.dim();
            let mut sum = RationalMatrix::zero(d, d);
            for (xv, v) in x.iter().zip(&min.vectors) {
                assert!(xv.is_positive());
                for i in 0..d {
                    for j in 0..d {
                        sum[(i, j)] += xv
                            * BigRational::from_integer(&v[i] * &v[j]);
                    }
                }
            }
            assert_eq!(sum, form.gram().inverse().unwrap());
        }
    }

    #[test]
    fn perfection_rank_spans_for_perfect_forms() {
        let a3 = QuadraticForm::catalog(CatalogForm::A(3)).unwrap();
        assert_eq!(a3.perfection_rank(&a3.minimal_vectors().unwrap()), 6);
        let id3 = QuadraticForm::catalog(CatalogForm::Identity(3)).unwrap();
        assert_eq!(id3.perfection_rank(&id3.minimal_vectors().unwrap()), 3);
    }

    #[test]
    fn vectors_up_to_collects_shells() {
        let id2 = QuadraticForm::catalog(CatalogForm::Identity(2)).unwrap();
        let got = id2.vectors_up_to(&rat(2, 1)).unwrap();
        // norm 1: e1, e2; norm 2: (1,1), (1,-1) -- antipodal classes
        assert_eq!(got.len(), 4);
        for (v, n) in &got {
            assert_eq!(&id2.norm(v), n);
            assert!(*n <= rat(2, 1));
        }
    }

    #[test]
    fn normalize_scale_sets_minimum_two() {
        let scaled = QuadraticForm::new(
            QuadraticForm::catalog(CatalogForm::A(2)).unwrap().gram().scale(&rat(5, 3)),
        )
        .unwrap();
        let normalized = scaled.normalize_scale().unwrap();
        assert_eq!(normalized.minimal_vectors().unwrap().minimum, rat(2, 1));
        assert_eq!(normalized.gram(), QuadraticForm::catalog(CatalogForm::A(2)).unwrap().gram());
    }

    #[test]
    fn transform_is_congruence() {
        let a3 = QuadraticForm::catalog(CatalogForm::A(3)).unwrap();
        let p = RationalMatrix::from_i64_rows(&[&[1, 1, 0], &[0, 1, 0], &[1, 0, 1]]);
        let b = a3.transform(&p);
        assert_eq!(*b.gram(), p.transpose().mul(a3.gram()).mul(&p));
        assert_eq!(b.det(), a3.det());
        assert_eq!(
            b.minimal_vectors().unwrap().minimum,
            a3.minimal_vectors().unwrap().minimum
        );
    }

    #[test]
    fn indefinite_form_rejected_with_witness() {
        let f = QuadraticForm::from_i64_rows(&[&[1, 2], &[2, 1]]).unwrap();
        match f.ensure_positive_definite() {
            Err(Error::NotPositiveDefinite { witness }) => {
                assert!(!f.norm(&witness).is_positive());
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
        assert!(f.minimal_vectors().is_err());
        let g = QuadraticForm::from_i64_rows(&[&[1, 0], &[0, 0]]).unwrap();
        match g.ensure_positive_definite() {
            Err(Error::NotPositiveDefinite { witness }) => {
                assert!(g.norm(&witness).is_zero());
            }
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn asymmetric_gram_rejected() {
        match QuadraticForm::from_i64_rows(&[&[2, 1], &[0, 2]]) {
            Err(Error::NotSymmetric(0, 1)) => {}
            other => panic!("expected NotSymmetric, got {other:?}"),
        }
    }

    #[test]
    fn catalog_by_name_variants() {
        for (name, which) in [
            ("A2", CatalogForm::A(2)),
            ("A_2", CatalogForm::A(2)),
            ("a2", CatalogForm::A(2)),
            ("D5", CatalogForm::D(5)),
            ("E_6", CatalogForm::E6),
            ("E7", CatalogForm::E7),
            ("Identity_3", CatalogForm::Identity(3)),
            ("I3", CatalogForm::Identity(3)),
        ] {
            assert_eq!(
                QuadraticForm::catalog_by_name(name).unwrap().gram(),
                QuadraticForm::catalog(which).unwrap().gram(),
                "{name}"
            );
        }
        assert!(QuadraticForm::catalog_by_name("E9").is_err());
        assert!(QuadraticForm::catalog_by_name("Q3").is_err());
        assert!(QuadraticForm::catalog(CatalogForm::A(0)).is_err());
    }

    #[test]
    fn form_text_roundtrip() {
        let e6 = QuadraticForm::catalog(CatalogForm::E6).unwrap();
        assert_eq!(parse_form(&format_form(&e6)).unwrap().gram(), e6.gram());
        let half = QuadraticForm::new(e6.gram().scale(&rat(1, 2))).unwrap();
        assert_eq!(parse_form(&format_form(&half)).unwrap().gram(), half.gram());
    }

    #[test]
    fn parse_form_reports_line_numbers() {
        match parse_form("2\n2 1\n1\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("expected row-width error, got {other:?}"),
        }
        match parse_form("2\n2 1\n0 2\n") {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("expected symmetry error, got {other:?}"),
        }
        match parse_form("x\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected header error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rational_tokens() {
        assert_eq!(parse_rational("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rational("-7").unwrap(), rat(-7, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
    }
}
