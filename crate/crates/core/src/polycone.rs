//! Exact polyhedral cone engine.
//!
//! Cones live in the flattened space of symmetric matrices (dimension
//! m = d(d+1)/2) or any plain rational space. The dual description runs the
//! incremental double description method over integers; faces, ridges and
//! gift-wrapping to adjacent facets back the adjacency decomposition method.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;
use crate::lp::{lp_solve, LpOutcome, LpProblem};
use crate::numutil::{primitive_integer_vector, primitive_of_integers};

/// Coordinates on the space of symmetric d x d matrices.
///
/// Functionals store (F_ii; F_ij, i<j); rays of the form v v^T store
/// (v_i^2; 2 v_i v_j, i<j), so the plain dot product of the two coordinate
/// vectors equals v^T F v.
#[derive(Clone, Copy, Debug)]
pub struct SymCoordinates {
    d: usize,
}

impl SymCoordinates {
    pub fn new(d: usize) -> Self {
        SymCoordinates { d }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn flat_dim(&self) -> usize {
        self.d * (self.d + 1) / 2
    }

    /// Index positions: 0..d are diagonal entries, then pairs (i,j), i<j,
    /// in lexicographic order.
    pub fn position(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if i == j {
            i
        } else {
            // offset of pair (i,j) among i<j pairs
            self.d + i * self.d - i * (i + 1) / 2 + (j - i - 1)
        }
    }

    pub fn entry_of_position(&self, pos: usize) -> (usize, usize) {
        if pos < self.d {
            return (pos, pos);
        }
        let mut rest = pos - self.d;
        for i in 0..self.d {
            let row_len = self.d - i - 1;
            if rest < row_len {
                return (i, i + rest + 1);
            }
            rest -= row_len;
        }
        unreachable!("position out of range")
    }

    /// Ray coordinates of v v^T for an integer vector v: (v_i^2; 2 v_i v_j).
    pub fn ray_coords_of_vector(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.d);
        let mut out = Vec::with_capacity(self.flat_dim());
        for i in 0..self.d {
            out.push(&v[i] * &v[i]);
        }
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                out.push(BigInt::from(2) * &v[i] * &v[j]);
            }
        }
        out
    }

    /// Same as [`Self::ray_coords_of_vector`] but rational-valued.
    pub fn ray_coords_int(&self, v: &[BigInt]) -> Vec<BigRational> {
        self.ray_coords_of_vector(v)
            .into_iter()
            .map(BigRational::from_integer)
            .collect()
    }

    /// Ray coordinates of a symmetric rational matrix: (S_ii; 2 S_ij).
    pub fn ray_coords_of_matrix(&self, s: &RationalMatrix) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(self.flat_dim());
        for i in 0..self.d {
            out.push(s[(i, i)].clone());
        }
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                out.push(&s[(i, j)] * BigRational::from_integer(BigInt::from(2)));
            }
        }
        out
    }

    /// Functional coordinates of a symmetric matrix: (F_ii; F_ij).
    pub fn func_coords_of_matrix(&self, f: &RationalMatrix) -> Vec<BigRational> {
        let mut out = Vec::with_capacity(self.flat_dim());
        for i in 0..self.d {
            out.push(f[(i, i)].clone());
        }
        for i in 0..self.d {
            for j in (i + 1)..self.d {
                out.push(f[(i, j)].clone());
            }
        }
        out
    }

    /// Inverse of [`Self::func_coords_of_matrix`].
    pub fn matrix_of_func_coords_int(&self, f: &[BigInt]) -> RationalMatrix {
        assert_eq!(f.len(), self.flat_dim());
        RationalMatrix::from_fn(self.d, self.d, |i, j| {
            BigRational::from_integer(f[self.position(i, j)].clone())
        })
    }

    /// Plain matrix entry (v v^T)_{position} for an integer vector.
    pub fn entry_coords_int_at(&self, v: &[BigInt], pos: usize) -> BigRational {
        let (i, j) = self.entry_of_position(pos);
        BigRational::from_integer(&v[i] * &v[j])
    }

    /// Plain matrix entry at a coordinate position.
    pub fn entry_coords_at(&self, m: &RationalMatrix, pos: usize) -> BigRational {
        let (i, j) = self.entry_of_position(pos);
        m[(i, j)].clone()
    }
}

/// Cone given by generators: integer, content-1, duplicate-free rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeV {
    ambient_dim: usize,
    rays: Vec<Vec<BigInt>>,
}

/// Cone given by facet functionals (integer, content 1, sorted).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeH {
    ambient_dim: usize,
    facets: Vec<Vec<BigInt>>,
}

/// A face encoded by the sorted index set of incident rays plus a
/// supporting functional: zero on exactly those rays, positive on all
/// others.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub incidence: Vec<usize>,
    pub functional: Vec<BigInt>,
}

pub fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConeV {
    pub fn new(ambient_dim: usize, rays: Vec<Vec<BigInt>>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(rays.len());
        for (idx, r) in rays.into_iter().enumerate() {
            if r.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    got: r.len(),
                });
            }
            if r.iter().all(|x| x.is_zero()) {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "zero vector is not a ray".into(),
                });
            }
            let p = primitive_of_integers(&r);
            if !seen.insert(p.clone()) {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "duplicate ray".into(),
                });
            }
            normalized.push(p);
        }
        Ok(ConeV {
            ambient_dim,
            rays: normalized,
        })
    }

    pub fn from_rational_rays(ambient_dim: usize, rays: Vec<Vec<BigRational>>) -> Result<Self> {
        Self::new(
            ambient_dim,
            rays.iter().map(|r| primitive_integer_vector(r)).collect(),
        )
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rays(&self) -> &[Vec<BigInt>] {
        &self.rays
    }

    pub fn ray_count(&self) -> usize {
        self.rays.len()
    }

    fn ray_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_rows(
            self.rays
                .iter()
                .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
                .collect(),
        )
    }

    /// Errors with a hyperplane witness unless the rays span the ambient
    /// space.
    pub fn ensure_full_dimensional(&self) -> Result<()> {
        let m = self.ray_matrix();
        if m.rank() == self.ambient_dim {
            return Ok(());
        }
        let kernel = m.kernel_basis();
        let witness = primitive_integer_vector(&kernel[0]);
        Err(Error::NotFullDimensional { witness })
    }
}

impl ConeH {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn facets(&self) -> &[Vec<BigInt>] {
        &self.facets
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }
}

/// Insertion order for the double description: increasing coordinate sum,
/// then lexicographic.
fn insertion_order(rays: &[Vec<BigInt>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rays.len()).collect();
    order.sort_by(|&a, &b| {
        let sa: BigInt = rays[a].iter().sum();
        let sb: BigInt = rays[b].iter().sum();
        sa.cmp(&sb).then_with(|| rays[a].cmp(&rays[b]))
    });
    order
}

struct DdRay {
    coords: Vec<BigInt>,
    /// zero_pattern[i] == true iff constraint i (primal ray i) vanishes here
    zero_pattern: Vec<bool>,
}

impl DdRay {
    fn new(coords: Vec<BigInt>, constraints: &[Vec<BigInt>]) -> Self {
        let coords = primitive_of_integers(&coords);
        let zero_pattern = constraints
            .iter()
            .map(|c| dot(c, &coords).is_zero())
            .collect();
        DdRay {
            coords,
            zero_pattern,
        }
    }
}

/// Complete irredundant facet list of a full-dimensional pointed cone,
/// via the incremental double description method run on the dual side
/// (each primal ray is a linear inequality on functionals).
pub fn dual_description(cone: &ConeV) -> Result<ConeH> {
    let faces = facets_with_incidence(cone)?;
    let mut facets: Vec<Vec<BigInt>> = faces.into_iter().map(|f| f.functional).collect();
    facets.sort();
    Ok(ConeH {
        ambient_dim: cone.ambient_dim(),
        facets,
    })
}

/// Facets together with their incidence sets, sorted by functional.
pub fn facets_with_incidence(cone: &ConeV) -> Result<Vec<Face>> {
    cone.ensure_full_dimensional()?;
    let m = cone.ambient_dim();
    let constraints = cone.rays();
    let order = insertion_order(constraints);

    // Greedily select m linearly independent constraints for the initial
    // simplicial dual cone.
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis_rows: Vec<Vec<BigRational>> = Vec::new();
    for &i in &order {
        if chosen.len() == m {
            break;
        }
        let mut candidate = basis_rows.clone();
        candidate.push(
            constraints[i]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect(),
        );
        if RationalMatrix::from_rows(candidate.clone()).rank() == chosen.len() + 1 {
            chosen.push(i);
            basis_rows = candidate;
        }
    }
    debug_assert_eq!(chosen.len(), m, "full-dimensional check already passed");

    // Initial rays: columns of the inverse of the chosen constraint matrix.
    let a_b = RationalMatrix::from_rows(basis_rows);
    let inv = a_b.inverse().expect("rows are independent");
    let mut rays: Vec<DdRay> = (0..m)
        .map(|j| {
            let col: Vec<BigRational> = (0..m).map(|i| inv[(i, j)].clone()).collect();
            DdRay::new(primitive_integer_vector(&col), constraints)
        })
        .collect();

    let mut inserted = vec![false; constraints.len()];
    for &i in &chosen {
        inserted[i] = true;
    }

    for &ci in &order {
        if inserted[ci] {
            continue;
        }
        let a = &constraints[ci];
        let signs: Vec<BigInt> = rays.iter().map(|r| dot(a, &r.coords)).collect();
        let neg: Vec<usize> = (0..rays.len())
            .filter(|&k| signs[k].is_negative())
            .collect();
        if neg.is_empty() {
            inserted[ci] = true;
            continue;
        }
        let pos: Vec<usize> = (0..rays.len())
            .filter(|&k| signs[k].is_positive())
            .collect();
        let mut new_rays: Vec<DdRay> = Vec::new();
        for &p in &pos {
            for &n in &neg {
                if !dd_adjacent(&rays[p], &rays[n], &inserted, constraints, m) {
                    continue;
                }
                let coords: Vec<BigInt> = rays[p]
                    .coords
                    .iter()
                    .zip(&rays[n].coords)
                    .map(|(rp, rn)| &signs[p] * rn - &signs[n] * rp)
                    .collect();
                new_rays.push(DdRay::new(coords, constraints));
            }
        }
        let mut kept: Vec<DdRay> = Vec::new();
        for (k, r) in rays.into_iter().enumerate() {
            if !signs[k].is_negative() {
                kept.push(r);
            }
        }
        kept.extend(new_rays);
        rays = kept;
        inserted[ci] = true;
    }

    // Pointedness of the primal cone = full-dimensionality of the dual:
    // the computed functionals must span.
    let functional_matrix = RationalMatrix::from_rows(
        rays.iter()
            .map(|r| {
                r.coords
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect(),
    );
    if functional_matrix.rank() < m {
        let kernel = functional_matrix.kernel_basis();
        let witness = primitive_integer_vector(&kernel[0]);
        return Err(Error::NotPointed { witness });
    }

    let mut faces: Vec<Face> = rays
        .into_iter()
        .map(|r| {
            let incidence: Vec<usize> = r
                .zero_pattern
                .iter()
                .enumerate()
                .filter_map(|(i, &z)| z.then_some(i))
                .collect();
            Face {
                incidence,
                functional: r.coords,
            }
        })
        .collect();
    faces.sort_by(|a, b| a.functional.cmp(&b.functional));
    Ok(faces)
}

/// Algebraic adjacency test inside the double description loop: the
/// constraints vanishing on both rays must span a space of rank m - 2.
fn dd_adjacent(
    r: &DdRay,
    s: &DdRay,
    inserted: &[bool],
    constraints: &[Vec<BigInt>],
    m: usize,
) -> bool {
    if m < 3 {
        // a pointed 2-dimensional dual cone has at most one positive /
        // negative ray pair, which is always adjacent
        return true;
    }
    let common: Vec<usize> = (0..constraints.len())
        .filter(|&i| inserted[i] && r.zero_pattern[i] && s.zero_pattern[i])
        .collect();
    if common.len() < m - 2 {
        return false;
    }
    let rows: Vec<Vec<BigRational>> = common
        .iter()
        .map(|&i| {
            constraints[i]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    RationalMatrix::from_rows(rows).rank() == m - 2
}

impl Face {
    /// Checks the face invariants against a cone: functional zero exactly on
    /// the incident rays and positive elsewhere.
    pub fn is_valid_for(&self, cone: &ConeV) -> bool {
        let mut idx = 0usize;
        for (i, ray) in cone.rays().iter().enumerate() {
            let v = dot(&self.functional, ray);
            let on_face = idx < self.incidence.len() && self.incidence[idx] == i;
            if on_face {
                if !v.is_zero() {
                    return false;
                }
                idx += 1;
            } else if !v.is_positive() {
                return false;
            }
        }
        idx == self.incidence.len()
    }

    pub fn incidence_number(&self) -> usize {
        self.incidence.len()
    }
}

/// One facet of the cone, found by exact LP: first a functional strictly
/// positive on every ray, then rotated onto rays until its zero set has
/// rank m - 1.
pub fn initial_facet(cone: &ConeV) -> Result<Face> {
    cone.ensure_full_dimensional()?;
    let m = cone.ambient_dim();
    let n = cone.ray_count();
    // LP: maximize t s.t. f . a_i - t - s_i = 0 (s_i >= 0),
    //                     f_k + u_k = 1, f_k - w_k = -1 (u, w >= 0).
    // f bounded in the unit box, so the optimum exists; it is positive iff
    // the cone is pointed.
    let cols = m + 1 + n + 2 * m; // f, t, s, u, w
    let mut eq = RationalMatrix::zero(n + 2 * m, cols);
    let mut rhs = Vec::new();
    for (i, a) in cone.rays().iter().enumerate() {
        for k in 0..m {
            eq[(i, k)] = BigRational::from_integer(a[k].clone());
        }
        eq[(i, m)] = -BigRational::one();
        eq[(i, m + 1 + i)] = -BigRational::one();
        rhs.push(BigRational::zero());
    }
    for k in 0..m {
        eq[(n + 2 * k, k)] = BigRational::one();
        eq[(n + 2 * k, m + 1 + n + k)] = BigRational::one();
        rhs.push(BigRational::one());
        eq[(n + 2 * k + 1, k)] = BigRational::one();
        eq[(n + 2 * k + 1, m + 1 + n + m + k)] = -BigRational::one();
        rhs.push(-BigRational::one());
    }
    let mut objective = vec![BigRational::zero(); cols];
    objective[m] = BigRational::one();
    let mut nonnegative = vec![true; cols];
    for item in nonnegative.iter_mut().take(m + 1) {
        *item = false;
    }
    let outcome = lp_solve(&LpProblem {
        objective,
        equalities: eq,
        rhs,
        nonnegative,
    })?;
    let f0 = match outcome {
        LpOutcome::Optimal { value, solution } if value.is_positive() => {
            solution[..m].to_vec()
        }
        _ => {
            let witness = lineality_witness(cone)?;
            return Err(Error::NotPointed { witness });
        }
    };

    // Rotate f towards the boundary until m - 1 independent rays vanish.
    let mut f: Vec<BigRational> = f0;
    loop {
        let values: Vec<BigRational> = cone
            .rays()
            .iter()
            .map(|a| {
                a.iter()
                    .zip(&f)
                    .map(|(x, y)| BigRational::from_integer(x.clone()) * y)
                    .sum()
            })
            .collect();
        let zero_idx: Vec<usize> = (0..n).filter(|&i| values[i].is_zero()).collect();
        let zero_rows: Vec<Vec<BigRational>> = zero_idx
            .iter()
            .map(|&i| {
                cone.rays()[i]
                    .iter()
                    .map(|x| BigRational::from_integer(x.clone()))
                    .collect()
            })
            .collect();
        let rank = if zero_rows.is_empty() {
            0
        } else {
            RationalMatrix::from_rows(zero_rows.clone()).rank()
        };
        if rank == m - 1 {
            let functional = primitive_integer_vector(&f);
            return Ok(Face {
                incidence: zero_idx,
                functional,
            });
        }
        // Pick a direction vanishing on the current zero set, independent
        // of f.
        let kernel = if zero_rows.is_empty() {
            (0..m)
                .map(|k| {
                    let mut v = vec![BigRational::zero(); m];
                    v[k] = BigRational::one();
                    v
                })
                .collect()
        } else {
            RationalMatrix::from_rows(zero_rows).kernel_basis()
        };
        let mut g = None;
        for cand in &kernel {
            let two = RationalMatrix::from_rows(vec![f.clone(), cand.clone()]);
            if two.rank() == 2 {
                g = Some(cand.clone());
                break;
            }
        }
        let mut g = g.expect("zero-set rank < m-1 leaves an independent direction");
        let g_vals = |g: &[BigRational]| -> Vec<BigRational> {
            cone.rays()
                .iter()
                .map(|a| {
                    a.iter()
                        .zip(g)
                        .map(|(x, y)| BigRational::from_integer(x.clone()) * y)
                        .sum()
                })
                .collect()
        };
        let mut gv = g_vals(&g);
        if !gv.iter().any(|x| x.is_positive()) {
            for x in &mut g {
                *x = -std::mem::take(x);
            }
            gv = g_vals(&g);
        }
        let t_star = (0..n)
            .filter(|&i| gv[i].is_positive())
            .map(|i| &values[i] / &gv[i])
            .min()
            .expect("full-dimensional cone meets any nonzero functional");
        for k in 0..m {
            let x = &f[k] - &t_star * &g[k];
            f[k] = x;
        }
    }
}

/// A ray of the lineality space (reported when a pointedness check fails).
fn lineality_witness(cone: &ConeV) -> Result<Vec<BigInt>> {
    // maximize sum lambda_i s.t. sum lambda_i v_i = 0, 0 <= lambda_i <= 1
    let n = cone.ray_count();
    let m = cone.ambient_dim();
    let cols = 2 * n; // lambda, slack for lambda <= 1
    let mut eq = RationalMatrix::zero(m + n, cols);
    let mut rhs = Vec::new();
    for k in 0..m {
        for (i, r) in cone.rays().iter().enumerate() {
            eq[(k, i)] = BigRational::from_integer(r[k].clone());
        }
        rhs.push(BigRational::zero());
    }
    for i in 0..n {
        eq[(m + i, i)] = BigRational::one();
        eq[(m + i, n + i)] = BigRational::one();
        rhs.push(BigRational::one());
    }
    let objective: Vec<BigRational> = (0..cols)
        .map(|j| {
            if j < n {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect();
    let outcome = lp_solve(&LpProblem {
        objective,
        equalities: eq,
        rhs,
        nonnegative: vec![true; cols],
    })?;
    match outcome {
        LpOutcome::Optimal { value, solution } if value.is_positive() => {
            let i = (0..n)
                .find(|&i| solution[i].is_positive())
                .expect("positive objective has a positive coordinate");
            Ok(cone.rays()[i].clone())
        }
        _ => Err(Error::InvalidState(
            "lineality witness requested for a pointed cone".into(),
        )),
    }
}

/// The rays incident to a face, rewritten in a deterministic rational basis
/// of the face's hyperplane, so recursion works in dimension m - 1.
/// Returns the subcone; local ray k corresponds to global ray
/// `face.incidence[k]`.
pub fn facet_subcone(cone: &ConeV, face: &Face) -> Result<ConeV> {
    if !face.is_valid_for(cone) {
        return Err(Error::NotAFace);
    }
    let m = cone.ambient_dim();
    // Deterministic basis of {x : f . x = 0} from the echelon kernel.
    let f_row = RationalMatrix::from_rows(vec![face
        .functional
        .iter()
        .map(|x| BigRational::from_integer(x.clone()))
        .collect()]);
    let basis = f_row.kernel_basis();
    debug_assert_eq!(basis.len(), m - 1);
    // Solve B x = ray for each incident ray (B has the basis as columns).
    let b_mat = RationalMatrix::from_rows(basis).transpose();
    let local_rays: Vec<Vec<BigRational>> = face
        .incidence
        .iter()
        .map(|&i| {
            let ray: Vec<BigRational> = cone.rays()[i]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            match crate::linalg::solve(&b_mat, &ray) {
                crate::linalg::AffineSolution::Solvable { particular, .. } => particular,
                crate::linalg::AffineSolution::Infeasible { .. } => {
                    unreachable!("incident rays lie in the face hyperplane")
                }
            }
        })
        .collect();
    ConeV::from_rational_rays(m - 1, local_rays)
}

/// Gift-wrapping step: given a facet F and a ridge H inside it, returns the
/// unique other facet F' with F cap F' containing H.
pub fn adjacent_facet(cone: &ConeV, facet: &Face, ridge: &[usize]) -> Result<Face> {
    if !facet.is_valid_for(cone) {
        return Err(Error::NotAFace);
    }
    let m = cone.ambient_dim();
    if !ridge.iter().all(|i| facet.incidence.contains(i)) {
        return Err(Error::BadRidge);
    }
    let ridge_rows: Vec<Vec<BigRational>> = ridge
        .iter()
        .map(|&i| {
            cone.rays()[i]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    if ridge_rows.is_empty() {
        return Err(Error::BadRidge);
    }
    let ridge_matrix = RationalMatrix::from_rows(ridge_rows);
    if ridge_matrix.rank() != m - 2 {
        return Err(Error::BadRidge);
    }
    let kernel = ridge_matrix.kernel_basis();
    debug_assert_eq!(kernel.len(), 2);
    let f1 = primitive_integer_vector(&kernel[0]);
    let f2 = primitive_integer_vector(&kernel[1]);

    // 2-d coordinates of each ray constraint in the (f1, f2) functional
    // plane.
    let w: Vec<(BigInt, BigInt)> = cone
        .rays()
        .iter()
        .map(|a| (dot(&f1, a), dot(&f2, a)))
        .collect();
    // Candidate generators of {alpha : alpha . w_j >= 0}: rotations of the
    // constraint normals.
    let mut candidates: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
    for (a, b) in &w {
        if a.is_zero() && b.is_zero() {
            continue;
        }
        for cand in [(b.clone(), -a.clone()), (-b.clone(), a.clone())] {
            if w.iter().all(|(x, y)| (&cand.0 * x + &cand.1 * y) >= BigInt::zero()) {
                let p = primitive_of_integers(&[cand.0, cand.1]);
                candidates.insert((p[0].clone(), p[1].clone()));
            }
        }
    }
    // The feasible region is a pointed 2-d cone; its two edges are the
    // extremes of the candidates under the rotational order.
    let cross = |u: &(BigInt, BigInt), v: &(BigInt, BigInt)| -> BigInt {
        &u.0 * &v.1 - &u.1 * &v.0
    };
    let cands: Vec<(BigInt, BigInt)> = candidates.into_iter().collect();
    if cands.len() < 2 {
        return Err(Error::BadRidge);
    }
    let mut lo = cands[0].clone();
    let mut hi = cands[0].clone();
    for c in &cands[1..] {
        if cross(c, &lo).is_positive() {
            lo = c.clone();
        }
        if cross(&hi, c).is_positive() {
            hi = c.clone();
        }
    }
    for alpha in [lo, hi] {
        let functional: Vec<BigInt> = (0..m)
            .map(|k| &alpha.0 * &f1[k] + &alpha.1 * &f2[k])
            .collect();
        let functional = primitive_of_integers(&functional);
        let incidence: Vec<usize> = cone
            .rays()
            .iter()
            .enumerate()
            .filter_map(|(i, a)| dot(&functional, a).is_zero().then_some(i))
            .collect();
        if incidence != facet.incidence {
            let candidate = Face {
                incidence,
                functional,
            };
            if candidate.is_valid_for(cone) {
                return Ok(candidate);
            }
        }
    }
    Err(Error::BadRidge)
}

/// Balinski early-stop criterion: with fewer than m - 1 facets left in
/// unfinished orbits, the facet-ridge graph's (m-1)-connectivity rules out
/// undiscovered facets.
pub fn balinski_stop(ambient_dim: usize, unfinished_facet_total: usize) -> bool {
    unfinished_facet_total < ambient_dim - 1
}

/// Parses the cone exchange format: "V m N" or "H m M" on the first line,
/// followed by integer/rational vectors.
pub fn parse_cone(text: &str) -> Result<(char, usize, Vec<Vec<BigRational>>)> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty cone file".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || (parts[0] != "V" && parts[0] != "H") {
        return Err(Error::Parse {
            line: 1,
            message: "expected header \"V m N\" or \"H m M\"".into(),
        });
    }
    let kind = parts[0].chars().next().unwrap();
    let m: usize = parts[1].parse().map_err(|_| Error::Parse {
        line: 1,
        message: format!("bad ambient dimension {:?}", parts[1]),
    })?;
    let count: usize = parts[2].parse().map_err(|_| Error::Parse {
        line: 1,
        message: format!("bad vector count {:?}", parts[2]),
    })?;
    let mut vectors = Vec::with_capacity(count);
    for _ in 0..count {
        let (idx, line) = lines.next().ok_or_else(|| Error::Parse {
            line: vectors.len() + 2,
            message: format!("expected {count} vectors"),
        })?;
        let mut v = Vec::with_capacity(m);
        for (col, token) in line.split_whitespace().enumerate() {
            v.push(
                crate::qform::parse_rational(token).map_err(|msg| Error::Parse {
                    line: idx + 1,
                    message: format!("column {}: {msg}", col + 1),
                })?,
            );
        }
        if v.len() != m {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {m} coordinates, got {}", v.len()),
            });
        }
        vectors.push(v);
    }
    Ok((kind, m, vectors))
}

pub fn format_cone_v(cone: &ConeV) -> String {
    let mut out = format!("V {} {}\n", cone.ambient_dim(), cone.ray_count());
    for r in cone.rays() {
        let row: Vec<String> = r.iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn format_cone_h(cone: &ConeH) -> String {
    let mut out = format!("H {} {}\n", cone.ambient_dim(), cone.facet_count());
    for f in cone.facets() {
        let row: Vec<String> = f.iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
