//! Group-theoretic machinery: characteristic edge-weighted graphs of vector
//! families, canonical labeling, restricted isomorphism/automorphism,
//! arithmetic equivalence and automorphism groups of forms, and
//! permutation-group queries (BSGS, set stabilizers/transporters, orbit
//! splitting under subgroups).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;
use crate::numutil::canonical_sign;
use crate::qform::QuadraticForm;

/// A duplicate-free family of integer vectors. `antipodal_classes` marks
/// families holding one representative per pair {v, -v} (Min sets); the
/// automorphism search then allows sign flips per vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorFamily {
    dim: usize,
    vectors: Vec<Vec<BigInt>>,
    antipodal_classes: bool,
}

impl VectorFamily {
    pub fn new(dim: usize, vectors: Vec<Vec<BigInt>>) -> Result<Self> {
        Self::build(dim, vectors, false)
    }

    /// Family of antipodal-class representatives (e.g. Min(A)/±).
    pub fn from_min_classes(dim: usize, vectors: Vec<Vec<BigInt>>) -> Result<Self> {
        Self::build(dim, vectors, true)
    }

    fn build(dim: usize, vectors: Vec<Vec<BigInt>>, antipodal: bool) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if !seen.insert(v.clone()) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "duplicate vector in family".into(),
                });
            }
        }
        Ok(VectorFamily {
            dim,
            vectors,
            antipodal_classes: antipodal,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[Vec<BigInt>] {
        &self.vectors
    }

    pub fn is_antipodal_classes(&self) -> bool {
        self.antipodal_classes
    }

    /// The symmetrized family {±v}: index 2k is v_k, index 2k+1 is -v_k.
    pub fn symmetrized(&self) -> VectorFamily {
        let mut vectors = Vec::with_capacity(2 * self.len());
        for v in &self.vectors {
            vectors.push(v.clone());
            vectors.push(v.iter().map(|x| -x).collect());
        }
        VectorFamily {
            dim: self.dim,
            vectors,
            antipodal_classes: false,
        }
    }

    pub fn rank(&self) -> usize {
        self.as_matrix().rank()
    }

    fn as_matrix(&self) -> RationalMatrix {
        RationalMatrix::from_rows(
            self.vectors
                .iter()
                .map(|v| v.iter().map(|x| BigRational::from_integer(x.clone())).collect())
                .collect(),
        )
    }

    /// Q = sum over the family of v v^T.
    pub fn gram_sum(&self) -> RationalMatrix {
        let d = self.dim;
        RationalMatrix::from_fn(d, d, |i, j| {
            self.vectors
                .iter()
                .map(|v| BigRational::from_integer(&v[i] * &v[j]))
                .sum()
        })
    }
}

/// Complete edge-weighted graph on a vector family. The rational weight
/// pairs are coded to small integers; two graphs can only be isomorphic if
/// their sorted distinct weight lists agree, so codes align across graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicGraph {
    n: usize,
    codes: Vec<u32>,
    weight_values: Vec<(BigRational, BigRational)>,
}

impl CharacteristicGraph {
    fn from_weights(n: usize, weight: impl Fn(usize, usize) -> (BigRational, BigRational)) -> Self {
        let mut raw: Vec<(BigRational, BigRational)> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                raw.push(weight(i, j));
            }
        }
        let mut weight_values: Vec<(BigRational, BigRational)> =
            raw.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        weight_values.sort();
        let index: BTreeMap<&(BigRational, BigRational), u32> = weight_values
            .iter()
            .enumerate()
            .map(|(k, w)| (w, k as u32))
            .collect();
        let codes = raw.iter().map(|w| index[w]).collect();
        CharacteristicGraph {
            n,
            codes,
            weight_values,
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> &(BigRational, BigRational) {
        &self.weight_values[self.codes[i * self.n + j] as usize]
    }

    /// Multiset of primary weights (used in form fingerprints), sorted, with
    /// each unordered pair i <= j counted once.
    pub fn weight_multiset(&self) -> Vec<BigRational> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i..self.n {
                out.push(self.weight(i, j).0.clone());
            }
        }
        out.sort();
        out
    }
}

/// Characteristic graph with weights c_ij = v_i^T Q^{-1} v_j, Q = sum v v^T.
pub fn characteristic_graph(family: &VectorFamily) -> Result<CharacteristicGraph> {
    let q = family.gram_sum();
    let qinv = q.inverse().ok_or_else(|| Error::RankDeficientFamily {
        rank: family.rank(),
        dim: family.dim(),
    })?;
    Ok(graph_with_matrices(family, &qinv, None))
}

/// Characteristic graph with explicit weight matrices: primary weight
/// v_i^T P v_j, optional secondary v_i^T S v_j (used for Gram-compatibility
/// pruning in form comparisons).
pub fn graph_with_matrices(
    family: &VectorFamily,
    primary: &RationalMatrix,
    secondary: Option<&RationalMatrix>,
) -> CharacteristicGraph {
    let vs = family.vectors();
    let rat = |v: &[BigInt]| -> Vec<BigRational> {
        v.iter().map(|x| BigRational::from_integer(x.clone())).collect()
    };
    let rvs: Vec<Vec<BigRational>> = vs.iter().map(|v| rat(v)).collect();
    CharacteristicGraph::from_weights(vs.len(), |i, j| {
        let p = primary.bilinear(&rvs[i], &rvs[j]);
        let s = match secondary {
            Some(m) => m.bilinear(&rvs[i], &rvs[j]),
            None => BigRational::zero(),
        };
        (p, s)
    })
}

/// Output of canonical labeling: a key equal across graphs iff they are
/// isomorphic, the canonical vertex order, and generators of the graph's
/// automorphism group discovered during the search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalLabeling {
    pub key: Vec<u8>,
    pub order: Vec<usize>,
    pub automorphisms: Vec<Vec<usize>>,
}

/// Canonical labeling by iterated weight-partition refinement plus
/// backtracking over the first non-singleton cell; the key is the
/// lexicographically minimal relabeled weight matrix. Exhaustive up to
/// pruning by discovered automorphisms, so key equality is exactly
/// isomorphism.
pub fn canonical_key(graph: &CharacteristicGraph) -> CanonicalLabeling {
    let n = graph.n;
    if n == 0 {
        return CanonicalLabeling {
            key: b"0|".to_vec(),
            order: vec![],
            automorphisms: vec![],
        };
    }
    let mut search = CanonSearch {
        n,
        codes: &graph.codes,
        first_key: None,
        first_perm: vec![],
        first_path: vec![],
        best_key: None,
        best_perm: vec![],
        path: vec![],
        autos: vec![],
        auto_set: HashSet::new(),
    };
    search.node(vec![0; n]);
    let best_key = search.best_key.expect("search visits at least one leaf");
    let mut key = format!("{}|", n).into_bytes();
    for (p, s) in &graph.weight_values {
        key.extend_from_slice(format!("{p},{s};").as_bytes());
    }
    key.push(b'|');
    for c in &best_key {
        key.extend_from_slice(&c.to_be_bytes());
    }
    CanonicalLabeling {
        key,
        order: search.best_perm,
        automorphisms: search.autos,
    }
}

struct CanonSearch<'a> {
    n: usize,
    codes: &'a [u32],
    /// first leaf reached (zeta): the fixed reference for automorphism
    /// discovery, never replaced
    first_key: Option<Vec<u32>>,
    first_perm: Vec<usize>,
    first_path: Vec<usize>,
    /// lexicographically smallest certificate seen (the canonical labeling)
    best_key: Option<Vec<u32>>,
    /// position -> vertex at the best leaf
    best_perm: Vec<usize>,
    path: Vec<usize>,
    autos: Vec<Vec<usize>>,
    auto_set: HashSet<Vec<usize>>,
}

impl CanonSearch<'_> {
    /// Refines until stable: the signature of a vertex is its color, its
    /// loop weight, and the multiset of (neighbor color, edge weight).
    fn refine(&self, colors: &mut [u32]) {
        let n = self.n;
        loop {
            let before = distinct_count(colors);
            let mut sigs: Vec<(u32, u32, Vec<(u32, u32)>, usize)> = (0..n)
                .map(|v| {
                    let mut nb: Vec<(u32, u32)> = (0..n)
                        .filter(|&u| u != v)
                        .map(|u| (colors[u], self.codes[v * n + u]))
                        .collect();
                    nb.sort_unstable();
                    (colors[v], self.codes[v * n + v], nb, v)
                })
                .collect();
            sigs.sort_unstable();
            let mut color = 0u32;
            for k in 0..n {
                if k > 0 && (sigs[k].0, sigs[k].1, &sigs[k].2) != (sigs[k - 1].0, sigs[k - 1].1, &sigs[k - 1].2) {
                    color += 1;
                }
                colors[sigs[k].3] = color;
            }
            if distinct_count(colors) == before {
                return;
            }
        }
    }

    /// Returns a backjump target (path length) when an automorphism makes
    /// further siblings below that level redundant.
    fn node(&mut self, mut colors: Vec<u32>) -> Option<usize> {
        let n = self.n;
        self.refine(&mut colors);
        if distinct_count(&colors) == n {
            // Discrete: position i is the vertex with color i.
            let mut perm = vec![0usize; n];
            for (v, &c) in colors.iter().enumerate() {
                perm[c as usize] = v;
            }
            let key: Vec<u32> = (0..n * n)
                .map(|k| self.codes[perm[k / n] * n + perm[k % n]])
                .collect();
            let Some(first) = &self.first_key else {
                self.first_key = Some(key.clone());
                self.first_perm = perm.clone();
                self.first_path = self.path.clone();
                self.best_key = Some(key);
                self.best_perm = perm;
                return None;
            };
            if key == *first {
                // Certificate equality with the fixed first leaf: an
                // automorphism. Siblings deeper than the common ancestor
                // yield only products of automorphisms already found.
                self.record_automorphism(&self.first_perm.clone(), &perm);
                let common = self
                    .path
                    .iter()
                    .zip(&self.first_path)
                    .take_while(|(a, b)| a == b)
                    .count();
                return Some(common);
            }
            match &self.best_key {
                Some(best) if key < *best => {
                    self.best_key = Some(key);
                    self.best_perm = perm;
                }
                Some(best) if key == *best => {
                    self.record_automorphism(&self.best_perm.clone(), &perm);
                }
                _ => {}
            }
            return None;
        }
        // First non-singleton cell in color order.
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for &c in &colors {
            *counts.entry(c).or_insert(0) += 1;
        }
        let target = (0..n as u32)
            .find(|c| counts.get(c).copied().unwrap_or(0) >= 2)
            .expect("non-discrete coloring has a non-singleton cell");
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        let fresh = colors.iter().max().unwrap() + 1;
        let mut processed: Vec<usize> = Vec::new();
        for &v in &cell {
            if self.pruned_by_automorphism(v, &processed) {
                continue;
            }
            let mut next = colors.clone();
            next[v] = fresh;
            self.path.push(v);
            let jump = self.node(next);
            self.path.pop();
            processed.push(v);
            if let Some(t) = jump {
                if self.path.len() > t {
                    return Some(t);
                }
            }
        }
        None
    }

    /// phi maps the leaf labeled by `from` to the leaf labeled by `to`.
    fn record_automorphism(&mut self, from: &[usize], to: &[usize]) {
        let mut phi = vec![0usize; self.n];
        for i in 0..self.n {
            phi[from[i]] = to[i];
        }
        if phi.iter().enumerate().any(|(i, &x)| i != x) && !self.auto_set.contains(&phi) {
            self.auto_set.insert(phi.clone());
            self.autos.push(phi);
        }
    }

    /// True when a discovered automorphism fixing the current path maps v
    /// into an already-explored sibling's orbit.
    fn pruned_by_automorphism(&self, v: usize, processed: &[usize]) -> bool {
        if processed.is_empty() || self.autos.is_empty() {
            return false;
        }
        let fixing: Vec<&Vec<usize>> = self
            .autos
            .iter()
            .filter(|a| self.path.iter().all(|&p| a[p] == p))
            .collect();
        if fixing.is_empty() {
            return false;
        }
        let mut orbit: BTreeSet<usize> = BTreeSet::new();
        orbit.insert(v);
        let mut queue: VecDeque<usize> = VecDeque::new();
        queue.push_back(v);
        while let Some(x) = queue.pop_front() {
            for a in &fixing {
                for y in [a[x], a.iter().position(|&z| z == x).unwrap()] {
                    if orbit.insert(y) {
                        queue.push_back(y);
                    }
                }
            }
        }
        processed.iter().any(|p| orbit.contains(p))
    }
}

fn distinct_count(colors: &[u32]) -> usize {
    let mut seen: Vec<bool> = vec![false; colors.len()];
    let mut count = 0;
    for &c in colors {
        if !seen[c as usize] {
            seen[c as usize] = true;
            count += 1;
        }
    }
    count
}

/// The unique linear map extending a vertex bijection of characteristic
/// graphs: solved on a spanning subfamily, then verified on every vector.
fn linear_map_for(
    f1: &[Vec<BigInt>],
    f2: &[Vec<BigInt>],
    sigma: &[usize],
    dim: usize,
) -> Option<RationalMatrix> {
    let rows: Vec<Vec<BigRational>> = f1
        .iter()
        .map(|v| v.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut basis: Vec<usize> = Vec::new();
    let mut staged: Vec<Vec<BigRational>> = Vec::new();
    for i in 0..f1.len() {
        if basis.len() == dim {
            break;
        }
        let mut trial = staged.clone();
        trial.push(rows[i].clone());
        if RationalMatrix::from_rows(trial.clone()).rank() == basis.len() + 1 {
            basis.push(i);
            staged = trial;
        }
    }
    if basis.len() != dim {
        return None;
    }
    // M V1 = V2 with the basis vectors as columns.
    let v1 = RationalMatrix::from_fn(dim, dim, |r, c| {
        BigRational::from_integer(f1[basis[c]][r].clone())
    });
    let v2 = RationalMatrix::from_fn(dim, dim, |r, c| {
        BigRational::from_integer(f2[sigma[basis[c]]][r].clone())
    });
    let m = v2.mul(&v1.inverse()?);
    for i in 0..f1.len() {
        let image = m.mul_vec(&rows[i]);
        let want = &f2[sigma[i]];
        if image
            .iter()
            .zip(want.iter())
            .any(|(x, y)| *x != BigRational::from_integer(y.clone()))
        {
            return None;
        }
    }
    Some(m)
}

/// Restricted isomorphism of two full-rank families: a rational matrix M
/// with M v_i = v'_sigma(i), found by matching canonical labelings.
pub fn restricted_isomorphism(
    f1: &VectorFamily,
    f2: &VectorFamily,
) -> Result<Option<(RationalMatrix, Vec<usize>)>> {
    let g1 = characteristic_graph(f1)?;
    let g2 = characteristic_graph(f2)?;
    Ok(graph_matching_map(f1.vectors(), f2.vectors(), &g1, &g2, f1.dim()))
}

/// Shared engine: match canonical labelings of the two graphs and extend the
/// vertex bijection to a linear map; on failure, retry composed with the
/// automorphisms discovered for the second graph.
fn graph_matching_map(
    f1: &[Vec<BigInt>],
    f2: &[Vec<BigInt>],
    g1: &CharacteristicGraph,
    g2: &CharacteristicGraph,
    dim: usize,
) -> Option<(RationalMatrix, Vec<usize>)> {
    if f1.len() != f2.len() || g1.weight_values != g2.weight_values {
        return None;
    }
    let l1 = canonical_key(g1);
    let l2 = canonical_key(g2);
    if l1.key != l2.key {
        return None;
    }
    let n = f1.len();
    let mut inv1 = vec![0usize; n];
    for (pos, &v) in l1.order.iter().enumerate() {
        inv1[v] = pos;
    }
    let base_sigma: Vec<usize> = (0..n).map(|i| l2.order[inv1[i]]).collect();
    let mut candidates = vec![base_sigma.clone()];
    for a in &l2.automorphisms {
        candidates.push(base_sigma.iter().map(|&j| a[j]).collect());
    }
    for sigma in candidates {
        if let Some(m) = linear_map_for(f1, f2, &sigma, dim) {
            return Some((m, sigma));
        }
    }
    None
}

/// Restricted automorphism group of a family: permutations sigma realized
/// by linear maps with M v_i = v_sigma(i) (for antipodal-class families,
/// M v_i = ±v_sigma(i): the action on classes).
#[derive(Clone, Debug)]
pub struct RestrictedAutGroup {
    /// action on family indices (class indices for antipodal families)
    pub group: PermutationGroup,
    /// one realizing linear map per group generator
    pub matrix_generators: Vec<RationalMatrix>,
    /// order of the full matrix group (counts ±1 sign actions separately
    /// for antipodal families)
    pub matrix_group_order: u128,
}

pub fn restricted_automorphism_group(family: &VectorFamily) -> Result<RestrictedAutGroup> {
    let q = family.gram_sum();
    let qinv = q.inverse().ok_or_else(|| Error::RankDeficientFamily {
        rank: family.rank(),
        dim: family.dim(),
    })?;
    restricted_automorphism_group_with(family, &qinv, None)
}

/// Same, with explicit weight matrices (Gram-compatibility weights for
/// forms).
pub fn restricted_automorphism_group_with(
    family: &VectorFamily,
    primary: &RationalMatrix,
    secondary: Option<&RationalMatrix>,
) -> Result<RestrictedAutGroup> {
    if family.rank() != family.dim() {
        return Err(Error::RankDeficientFamily {
            rank: family.rank(),
            dim: family.dim(),
        });
    }
    let work = if family.is_antipodal_classes() {
        family.symmetrized()
    } else {
        family.clone()
    };
    let graph = graph_with_matrices(&work, primary, secondary);
    let labeling = canonical_key(&graph);
    let vectors = work.vectors();
    let mut perms: Vec<Vec<usize>> = Vec::new();
    let mut mats: Vec<RationalMatrix> = Vec::new();
    for a in &labeling.automorphisms {
        let m = linear_map_for(vectors, vectors, a, family.dim())
            .expect("graph automorphisms of full-rank families extend uniquely");
        perms.push(a.clone());
        mats.push(m);
    }
    let full_group = PermutationGroup::from_generators(vectors.len(), perms.clone());
    let matrix_group_order = full_group.order();
    let group = if family.is_antipodal_classes() {
        // project the action {±v_k} -> class index k
        let class_perms: Vec<Vec<usize>> = perms
            .iter()
            .map(|p| (0..family.len()).map(|k| p[2 * k] / 2).collect())
            .collect();
        PermutationGroup::from_generators(family.len(), class_perms)
    } else {
        full_group
    };
    Ok(RestrictedAutGroup {
        group,
        matrix_generators: mats,
        matrix_group_order,
    })
}

fn full_min_family(a: &QuadraticForm) -> Result<VectorFamily> {
    let min = a.minimal_vectors()?;
    let classes = VectorFamily::from_min_classes(a.dim(), min.vectors)?;
    Ok(classes.symmetrized())
}

/// Family used for form comparison: the full Min set for perfect forms, the
/// full characteristic set (all vectors up to the maximum diagonal entry)
/// otherwise.
fn comparison_family(a: &QuadraticForm) -> Result<VectorFamily> {
    if a.is_perfect()? {
        return full_min_family(a);
    }
    let bound = (0..a.dim())
        .map(|i| a.gram()[(i, i)].clone())
        .max()
        .expect("positive dimension");
    let reps: Vec<Vec<BigInt>> = a.vectors_up_to(&bound)?.into_iter().map(|(v, _)| v).collect();
    let classes = VectorFamily::from_min_classes(a.dim(), reps)?;
    Ok(classes.symmetrized())
}

/// P in GL_d(Z) with B = P^T A P, or None. Matches characteristic graphs of
/// the comparison families with weights (v^T Q^{-1} w, v^T A w), Q the
/// family's gram sum; both pairings are equivalence-invariant (A^{-1} is
/// not: it only transforms correctly under automorphisms). Any graph
/// isomorphism extends to a linear M carrying Min(A) onto Min(B) with
/// A = M^T B M, so P = M^{-1}; the witness is then verified exactly.
pub fn arithmetic_equivalence(
    a: &QuadraticForm,
    b: &QuadraticForm,
) -> Result<Option<RationalMatrix>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    a.ensure_positive_definite()?;
    b.ensure_positive_definite()?;
    let min_a = a.minimal_vectors()?;
    let min_b = b.minimal_vectors()?;
    if min_a.minimum != min_b.minimum || min_a.vectors.len() != min_b.vectors.len() {
        return Ok(None);
    }
    let fa = comparison_family(a)?;
    let fb = comparison_family(b)?;
    if fa.len() != fb.len() {
        return Ok(None);
    }
    let qa_inv = fa.gram_sum().inverse().ok_or_else(|| Error::RankDeficientFamily {
        rank: fa.rank(),
        dim: fa.dim(),
    })?;
    let qb_inv = fb.gram_sum().inverse().ok_or_else(|| Error::RankDeficientFamily {
        rank: fb.rank(),
        dim: fb.dim(),
    })?;
    let ga = graph_with_matrices(&fa, &qa_inv, Some(a.gram()));
    let gb = graph_with_matrices(&fb, &qb_inv, Some(b.gram()));
    let found = graph_matching_map(fa.vectors(), fb.vectors(), &ga, &gb, a.dim());
    let Some((m, _)) = found else {
        return Ok(None);
    };
    // M carries the family of A onto the family of B preserving v^T A w on
    // a spanning set, so A = M^T B M and P = M^{-1} is the change of basis.
    // It still must be integral and unimodular to witness arithmetic
    // equivalence.
    let Some(p) = m.inverse() else {
        return Ok(None);
    };
    if is_unimodular(&p) && p.transpose().mul(a.gram()).mul(&p) == *b.gram() {
        return Ok(Some(p));
    }
    Ok(None)
}

pub fn is_unimodular(p: &RationalMatrix) -> bool {
    if !p.is_square() {
        return false;
    }
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            if !p[(i, j)].is_integer() {
                return false;
            }
        }
    }
    let det = p.det();
    det == BigRational::one() || det == -BigRational::one()
}

/// Aut(A) = {P in GL_d(Z) : P^T A P = A}, computed from the full Min set.
#[derive(Clone, Debug)]
pub struct FormAutGroup {
    /// matrix generators, each verified exactly
    pub matrix_generators: Vec<RationalMatrix>,
    /// faithful action on Min(A)/± class indices
    pub class_action: PermutationGroup,
    /// |Aut(A)| (the action on the full Min set is faithful)
    pub order: u128,
}

pub fn aut_group(a: &QuadraticForm) -> Result<FormAutGroup> {
    a.ensure_positive_definite()?;
    let family = if a.is_perfect()? {
        let min = a.minimal_vectors()?;
        VectorFamily::from_min_classes(a.dim(), min.vectors)?
    } else {
        let bound = (0..a.dim())
            .map(|i| a.gram()[(i, i)].clone())
            .max()
            .expect("positive dimension");
        let reps: Vec<Vec<BigInt>> =
            a.vectors_up_to(&bound)?.into_iter().map(|(v, _)| v).collect();
        VectorFamily::from_min_classes(a.dim(), reps)?
    };
    // Weights (v^T Q^{-1} w, v^T A w), Q the family gram sum: both pairings
    // are Aut(A)-invariant (A^{-1} is not: M^T A M = A does not force
    // M^T A^{-1} M = A^{-1}).
    let q_inv = family
        .gram_sum()
        .inverse()
        .ok_or_else(|| Error::RankDeficientFamily {
            rank: family.rank(),
            dim: family.dim(),
        })?;
    let aut = restricted_automorphism_group_with(&family, &q_inv, Some(a.gram()))?;
    let mut matrix_generators = Vec::new();
    for m in &aut.matrix_generators {
        // M carries Min(A) onto itself preserving v^T A w on a spanning set,
        // so M^T A M = A; still verified exactly before use.
        if !(is_unimodular(m) && m.transpose().mul(a.gram()).mul(m) == *a.gram()) {
            return Err(Error::InvalidState(
                "automorphism candidate failed exact verification".into(),
            ));
        }
        matrix_generators.push(m.clone());
    }
    Ok(FormAutGroup {
        matrix_generators,
        class_action: aut.group,
        order: aut.matrix_group_order,
    })
}

/// Permutation action of a list of matrices on an indexed list of antipodal
/// class representatives (used for domain rays): matrix M maps index i to
/// the index of the class of M v_i.
pub fn class_permutations(
    matrices: &[RationalMatrix],
    classes: &[Vec<BigInt>],
) -> Result<Vec<Vec<usize>>> {
    let index: BTreeMap<&Vec<BigInt>, usize> =
        classes.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut out = Vec::with_capacity(matrices.len());
    for (gi, m) in matrices.iter().enumerate() {
        let mut perm = Vec::with_capacity(classes.len());
        for (ci, v) in classes.iter().enumerate() {
            let rv: Vec<BigRational> =
                v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            let image = m.mul_vec(&rv);
            if image.iter().any(|x| !x.is_integer()) {
                return Err(Error::GroupDoesNotAct {
                    generator: gi,
                    ray: ci,
                });
            }
            let mut iv: Vec<BigInt> = image.iter().map(|x| x.to_integer()).collect();
            canonical_sign(&mut iv);
            match index.get(&iv) {
                Some(&k) => perm.push(k),
                None => {
                    return Err(Error::GroupDoesNotAct {
                        generator: gi,
                        ray: ci,
                    })
                }
            }
        }
        out.push(perm);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Permutation groups (BSGS / Schreier-Sims)
// ---------------------------------------------------------------------------

pub type Perm = Vec<usize>;

pub fn perm_identity(degree: usize) -> Perm {
    (0..degree).collect()
}

pub fn perm_is_identity(p: &Perm) -> bool {
    p.iter().enumerate().all(|(i, &x)| i == x)
}

/// (p o q)(x) = p(q(x))
pub fn perm_compose(p: &Perm, q: &Perm) -> Perm {
    q.iter().map(|&x| p[x]).collect()
}

pub fn perm_inverse(p: &Perm) -> Perm {
    let mut inv = vec![0usize; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

#[derive(Clone, Debug)]
struct ChainLevel {
    point: usize,
    /// orbit in BFS discovery order
    orbit: Vec<usize>,
    /// coset representative u with u(point) = orbit element
    transversal: HashMap<usize, Perm>,
}

/// Permutation group with a base and strong generating set (deterministic
/// incremental Schreier-Sims; every Schreier generator is sifted, so the
/// chain is verified, not probabilistic).
#[derive(Clone, Debug)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Perm>,
    base: Vec<usize>,
    strong: Vec<Perm>,
    levels: Vec<ChainLevel>,
}

impl PermutationGroup {
    pub fn trivial(degree: usize) -> Self {
        PermutationGroup {
            degree,
            generators: vec![],
            base: vec![],
            strong: vec![],
            levels: vec![],
        }
    }

    pub fn from_generators(degree: usize, gens: Vec<Perm>) -> Self {
        Self::with_base_hint(degree, gens, &[])
    }

    /// Builds the chain preferring base points from `hint` (useful before
    /// set-stabilizer searches).
    pub fn with_base_hint(degree: usize, gens: Vec<Perm>, hint: &[usize]) -> Self {
        let mut seen = HashSet::new();
        let mut generators = Vec::new();
        for g in gens {
            assert_eq!(g.len(), degree, "generator degree mismatch");
            if !perm_is_identity(&g) && seen.insert(g.clone()) {
                generators.push(g);
            }
        }
        let mut group = PermutationGroup {
            degree,
            generators: generators.clone(),
            base: vec![],
            strong: vec![],
            levels: vec![],
        };
        if generators.is_empty() {
            return group;
        }
        group.strong = generators;
        for g in group.strong.clone() {
            group.extend_base_for(&g, hint);
        }
        group.rebuild_levels();
        group.schreier_sims(hint);
        group
    }

    fn extend_base_for(&mut self, g: &Perm, hint: &[usize]) {
        if self.base.iter().any(|&b| g[b] != b) {
            return;
        }
        for &h in hint {
            if g[h] != h {
                self.base.push(h);
                return;
            }
        }
        let moved = (0..self.degree).find(|&x| g[x] != x).expect("non-identity");
        self.base.push(moved);
    }

    fn gens_at(&self, level: usize) -> Vec<&Perm> {
        self.strong
            .iter()
            .filter(|g| self.base[..level].iter().all(|&b| g[b] == b))
            .collect()
    }

    fn rebuild_level(&mut self, level: usize) {
        let point = self.base[level];
        let gens: Vec<Perm> = self.gens_at(level).into_iter().cloned().collect();
        let mut orbit = vec![point];
        let mut transversal = HashMap::new();
        transversal.insert(point, perm_identity(self.degree));
        let mut queue: VecDeque<usize> = VecDeque::new();
        queue.push_back(point);
        while let Some(x) = queue.pop_front() {
            let ux = transversal[&x].clone();
            for g in &gens {
                let y = g[x];
                if !transversal.contains_key(&y) {
                    transversal.insert(y, perm_compose(g, &ux));
                    orbit.push(y);
                    queue.push_back(y);
                }
            }
        }
        let lvl = ChainLevel {
            point,
            orbit,
            transversal,
        };
        if level < self.levels.len() {
            self.levels[level] = lvl;
        } else {
            debug_assert_eq!(level, self.levels.len());
            self.levels.push(lvl);
        }
    }

    fn rebuild_levels(&mut self) {
        self.levels.clear();
        for level in 0..self.base.len() {
            self.rebuild_level(level);
        }
    }

    /// Sift from `from_level`; returns the residue and the level reached.
    fn sift_from(&self, mut g: Perm, from_level: usize) -> (Perm, usize) {
        for level in from_level..self.levels.len() {
            let lvl = &self.levels[level];
            let image = g[lvl.point];
            match lvl.transversal.get(&image) {
                Some(u) => g = perm_compose(&perm_inverse(u), &g),
                None => return (g, level),
            }
        }
        (g, self.levels.len())
    }

    fn schreier_sims(&mut self, hint: &[usize]) {
        if self.base.is_empty() {
            return;
        }
        let mut i = self.base.len() - 1;
        'outer: loop {
            let lvl = self.levels[i].clone();
            let gens: Vec<Perm> = self.gens_at(i).into_iter().cloned().collect();
            for &beta in &lvl.orbit {
                let u_beta = &lvl.transversal[&beta];
                for x in &gens {
                    let image = x[beta];
                    let u_img = &lvl.transversal[&image];
                    let schreier =
                        perm_compose(&perm_inverse(u_img), &perm_compose(x, u_beta));
                    if perm_is_identity(&schreier) {
                        continue;
                    }
                    let (residue, _) = self.sift_from(schreier, i + 1);
                    if perm_is_identity(&residue) {
                        continue;
                    }
                    // The residue fixes base[0..i]; it becomes a strong
                    // generator for levels i+1..=f where f is the first base
                    // point it moves (extending the base if it moves none).
                    self.extend_base_for(&residue, hint);
                    self.strong.push(residue.clone());
                    let f = self
                        .base
                        .iter()
                        .position(|&b| residue[b] != b)
                        .expect("residue is non-identity and moves a base point");
                    debug_assert!(f > i);
                    for level in (i + 1)..=f {
                        self.rebuild_level(level);
                    }
                    i = f;
                    continue 'outer;
                }
            }
            if i == 0 {
                break;
            }
            i -= 1;
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn order(&self) -> u128 {
        self.levels
            .iter()
            .map(|l| l.orbit.len() as u128)
            .product()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        assert_eq!(g.len(), self.degree);
        if perm_is_identity(g) {
            return true;
        }
        let (residue, _) = self.sift_from(g.clone(), 0);
        perm_is_identity(&residue)
    }

    /// Orbit of a point under the group.
    pub fn point_orbit(&self, point: usize) -> Vec<usize> {
        orbit_of_point(point, &self.generators)
    }
}

fn orbit_of_point(point: usize, gens: &[Perm]) -> Vec<usize> {
    let mut orbit = vec![point];
    let mut seen: HashSet<usize> = HashSet::from([point]);
    let mut queue: VecDeque<usize> = VecDeque::from([point]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = g[x];
            if seen.insert(y) {
                orbit.push(y);
                queue.push_back(y);
            }
        }
    }
    orbit
}

fn apply_to_set(g: &Perm, s: &BTreeSet<usize>) -> BTreeSet<usize> {
    s.iter().map(|&x| g[x]).collect()
}

/// Full G-orbit of a set, BFS discovery order.
pub fn set_orbit(group: &PermutationGroup, s: &BTreeSet<usize>) -> Vec<BTreeSet<usize>> {
    let mut orbit = vec![s.clone()];
    let mut seen: HashSet<BTreeSet<usize>> = HashSet::from([s.clone()]);
    let mut queue: VecDeque<BTreeSet<usize>> = VecDeque::from([s.clone()]);
    while let Some(x) = queue.pop_front() {
        for g in group.generators() {
            let y = apply_to_set(g, &x);
            if seen.insert(y.clone()) {
                orbit.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    orbit
}

/// Partition of the given sets into G-orbits; each group lists indices into
/// `sets`, first index being the representative.
pub fn orbits_on_sets(group: &PermutationGroup, sets: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let mut by_value: HashMap<&BTreeSet<usize>, Vec<usize>> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        by_value.entry(s).or_default().push(i);
    }
    let mut grouped = vec![false; sets.len()];
    let mut out = Vec::new();
    for i in 0..sets.len() {
        if grouped[i] {
            continue;
        }
        let orbit = set_orbit(group, &sets[i]);
        let mut members = Vec::new();
        for s in &orbit {
            if let Some(idxs) = by_value.get(s) {
                for &k in idxs {
                    if !grouped[k] {
                        grouped[k] = true;
                        members.push(k);
                    }
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Backtracking over the stabilizer chain for set stabilizers and
/// transporters. Base points inside S1 are forced into S2, points outside
/// are forced outside (valid because |S1| = |S2| and group elements are
/// bijections).
struct SetSearch<'a> {
    group: &'a PermutationGroup,
    s1: &'a BTreeSet<usize>,
    s2: &'a BTreeSet<usize>,
    collect_all: bool,
    found: Vec<Perm>,
    witness: Option<Perm>,
}

impl SetSearch<'_> {
    fn run(&mut self) {
        if self.group.levels.is_empty() {
            // trivial group
            let id = perm_identity(self.group.degree);
            if apply_to_set(&id, self.s1) == *self.s2 {
                if self.collect_all {
                    self.found.push(id);
                } else {
                    self.witness = Some(id);
                }
            }
            return;
        }
        let id = perm_identity(self.group.degree);
        self.descend(0, &id);
    }

    fn descend(&mut self, level: usize, partial: &Perm) -> bool {
        if !self.collect_all && self.witness.is_some() {
            return true;
        }
        if level == self.group.levels.len() {
            if apply_to_set(partial, self.s1) == *self.s2 {
                if self.collect_all {
                    if !perm_is_identity(partial) {
                        self.found.push(partial.clone());
                    }
                } else {
                    self.witness = Some(partial.clone());
                    return true;
                }
            }
            return false;
        }
        let lvl = &self.group.levels[level];
        let base_in_s1 = self.s1.contains(&lvl.point);
        let mut processed_root: Vec<usize> = Vec::new();
        for &delta in &lvl.orbit {
            let image = partial[delta];
            if base_in_s1 != self.s2.contains(&image) {
                continue;
            }
            // At the root of a stabilizer search, skip candidates already
            // reachable from a processed candidate via the found subgroup:
            // each coset needs one representative only.
            if self.collect_all && level == 0 && !processed_root.is_empty() {
                let orbit = orbit_of_point(delta, &self.found);
                if orbit.iter().any(|x| processed_root.contains(x)) {
                    continue;
                }
            }
            let next = perm_compose(partial, &lvl.transversal[&delta]);
            let stop = self.descend(level + 1, &next);
            if level == 0 {
                processed_root.push(delta);
            }
            if stop {
                return true;
            }
        }
        false
    }
}

/// Subgroup of G fixing S setwise.
pub fn set_stabilizer(group: &PermutationGroup, s: &BTreeSet<usize>) -> PermutationGroup {
    // Rebase with S first so the set-pruning bites early.
    let hint: Vec<usize> = s.iter().copied().collect();
    let based = PermutationGroup::with_base_hint(group.degree, group.generators.clone(), &hint);
    let mut search = SetSearch {
        group: &based,
        s1: s,
        s2: s,
        collect_all: true,
        found: vec![],
        witness: None,
    };
    search.run();
    PermutationGroup::from_generators(group.degree, search.found)
}

/// Some g in G with g(S1) = S2, if any.
pub fn set_transporter(
    group: &PermutationGroup,
    s1: &BTreeSet<usize>,
    s2: &BTreeSet<usize>,
) -> Option<Perm> {
    if s1.len() != s2.len() {
        return None;
    }
    let hint: Vec<usize> = s1.iter().copied().collect();
    let based = PermutationGroup::with_base_hint(group.degree, group.generators.clone(), &hint);
    let mut search = SetSearch {
        group: &based,
        s1,
        s2,
        collect_all: false,
        found: vec![],
        witness: None,
    };
    search.run();
    search.witness
}

/// Representatives of the U-orbits inside the G-orbit of `rep`: the
/// double-coset decomposition realized by explicit orbit traversal with
/// U-orbit absorption.
pub fn split_orbit_under_subgroup(
    group: &PermutationGroup,
    sub: &PermutationGroup,
    rep: &BTreeSet<usize>,
) -> Result<Vec<BTreeSet<usize>>> {
    for (i, g) in sub.generators().iter().enumerate() {
        if !group.contains(g) {
            return Err(Error::NotASubgroup(i));
        }
    }
    let orbit = set_orbit(group, rep);
    let mut absorbed: HashSet<BTreeSet<usize>> = HashSet::new();
    let mut reps = Vec::new();
    for s in orbit {
        if absorbed.contains(&s) {
            continue;
        }
        for t in set_orbit(sub, &s) {
            absorbed.insert(t);
        }
        reps.push(s);
    }
    Ok(reps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numutil::int;
    use crate::qform::CatalogForm;
    use num_traits::ToPrimitive;

    fn iv(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn perm(p: &[usize]) -> Perm {
        p.to_vec()
    }

    #[test]
    fn characteristic_graph_orthonormal() {
        let fam = VectorFamily::new(2, vec![iv(&[1, 0]), iv(&[0, 1])]).unwrap();
        let g = characteristic_graph(&fam).unwrap();
        assert_eq!(*g.weight(0, 0), (int(1), int(0)));
        assert_eq!(*g.weight(0, 1), (int(0), int(0)));
    }

    #[test]
    fn characteristic_graph_a2_trace_identity() {
        // Min(Q_{A2})/± = {(1,0), (0,1), (1,1)}
        let fam =
            VectorFamily::new(2, vec![iv(&[1, 0]), iv(&[0, 1]), iv(&[1, 1])]).unwrap();
        let g = characteristic_graph(&fam).unwrap();
        let trace: BigRational = (0..3).map(|i| g.weight(i, i).0.clone()).sum();
        assert_eq!(trace, int(2));
        for i in 0..3 {
            assert_eq!(g.weight(i, i).0, crate::numutil::rat(2, 3));
        }
    }

    #[test]
    fn characteristic_graph_rejects_rank_deficient() {
        let fam = VectorFamily::new(2, vec![iv(&[1, 0]), iv(&[2, 0])]).unwrap();
        match characteristic_graph(&fam) {
            Err(Error::RankDeficientFamily { rank: 1, dim: 2 }) => {}
            other => panic!("expected rank-deficient error, got {other:?}"),
        }
    }

    #[test]
    fn characteristic_graph_scaled_diagonal() {
        let fam = VectorFamily::new(2, vec![iv(&[2, 0]), iv(&[0, 1])]).unwrap();
        let g = characteristic_graph(&fam).unwrap();
        assert_eq!(g.weight(0, 0).0, int(1));
    }

    #[test]
    fn canonical_key_invariant_under_relabeling() {
        let fam1 =
            VectorFamily::new(2, vec![iv(&[1, 0]), iv(&[0, 1]), iv(&[1, 1])]).unwrap();
        let fam2 =
            VectorFamily::new(2, vec![iv(&[1, 1]), iv(&[1, 0]), iv(&[0, 1])]).unwrap();
        let k1 = canonical_key(&characteristic_graph(&fam1).unwrap());
        let k2 = canonical_key(&characteristic_graph(&fam2).unwrap());
        assert_eq!(k1.key, k2.key);
    }

    #[test]
    fn canonical_key_separates_structures() {
        // a path-weighted graph vs a triangle-like one
        let g1 = CharacteristicGraph::from_weights(3, |i, j| {
            (int(if i == j { 1 } else { 0 }), int(0))
        });
        let g2 = CharacteristicGraph::from_weights(3, |i, j| {
            (int(if i == j { 1 } else { 2 }), int(0))
        });
        assert_ne!(canonical_key(&g1).key, canonical_key(&g2).key);
    }

    #[test]
    fn restricted_isomorphism_on_permuted_family() {
        let f1 =
            VectorFamily::new(2, vec![iv(&[1, 0]), iv(&[0, 1]), iv(&[1, 1])]).unwrap();
        let f2 =
            VectorFamily::new(2, vec![iv(&[0, 1]), iv(&[1, 1]), iv(&[1, 0])]).unwrap();
        let (m, sigma) = restricted_isomorphism(&f1, &f2).unwrap().unwrap();
        for (i, v) in f1.vectors().iter().enumerate() {
            let rv: Vec<BigRational> =
                v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            let img = m.mul_vec(&rv);
            let want: Vec<BigRational> = f2.vectors()[sigma[i]]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect();
            assert_eq!(img, want);
        }
    }

    #[test]
    fn restricted_isomorphism_after_unimodular_transform() {
        // images under P = [[1,1],[0,1]]
        let f1 =
            VectorFamily::new(2, vec![iv(&[1, 0]), iv(&[0, 1]), iv(&[1, 1])]).unwrap();
        let p = RationalMatrix::from_i64_rows(&[&[1, 1], &[0, 1]]);
        let images: Vec<Vec<BigInt>> = f1
            .vectors()
            .iter()
            .map(|v| {
                let rv: Vec<BigRational> =
                    v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
                p.mul_vec(&rv).iter().map(|x| x.to_integer()).collect()
            })
            .collect();
        let f2 = VectorFamily::new(2, images).unwrap();
        assert!(restricted_isomorphism(&f1, &f2).unwrap().is_some());
    }

    #[test]
    fn restricted_automorphisms_of_unit_vectors() {
        // {e1, e2} without -e_i: only the swap
        let fam = VectorFamily::new(2, vec![iv(&[1, 0]), iv(&[0, 1])]).unwrap();
        let aut = restricted_automorphism_group(&fam).unwrap();
        assert_eq!(aut.group.order(), 2);
    }

    #[test]
    fn restricted_automorphisms_of_a2_classes() {
        let a = QuadraticForm::catalog(CatalogForm::A(2)).unwrap();
        let min = a.minimal_vectors().unwrap();
        let fam = VectorFamily::from_min_classes(2, min.vectors).unwrap();
        let aut = restricted_automorphism_group(&fam).unwrap();
        // class action is the full S3; the matrix group has order 12
        assert_eq!(aut.group.order(), 6);
        assert_eq!(aut.matrix_group_order, 12);
    }

    #[test]
    fn aut_group_of_scaled_identity_2() {
        let a = QuadraticForm::from_i64_rows(&[&[2, 0], &[0, 2]]).unwrap();
        let aut = aut_group(&a).unwrap();
        // brute-force oracle: all integer matrices with entries in {-1,0,1}
        let mut count = 0u32;
        for e in 0..81 {
            let mut digits = [0i64; 4];
            let mut x = e;
            for item in digits.iter_mut() {
                *item = (x % 3) as i64 - 1;
                x /= 3;
            }
            let p = RationalMatrix::from_i64_rows(&[
                &[digits[0], digits[1]],
                &[digits[2], digits[3]],
            ]);
            if p.transpose().mul(a.gram()).mul(&p) == *a.gram() {
                count += 1;
            }
        }
        assert_eq!(count, 8);
        assert_eq!(aut.order, 8);
    }

    #[test]
    fn aut_group_of_a2_matches_brute_force() {
        let a = QuadraticForm::catalog(CatalogForm::A(2)).unwrap();
        let aut = aut_group(&a).unwrap();
        // brute-force over entries in {-2..2}
        let mut count = 0u32;
        for e in 0..625 {
            let mut digits = [0i64; 4];
            let mut x = e;
            for item in digits.iter_mut() {
                *item = (x % 5) as i64 - 2;
                x /= 5;
            }
            let p = RationalMatrix::from_i64_rows(&[
                &[digits[0], digits[1]],
                &[digits[2], digits[3]],
            ]);
            if p.transpose().mul(a.gram()).mul(&p) == *a.gram() {
                count += 1;
            }
        }
        assert_eq!(count, 12);
        assert_eq!(aut.order, 12);
        for p in &aut.matrix_generators {
            assert!(is_unimodular(p));
            assert_eq!(p.transpose().mul(a.gram()).mul(p), *a.gram());
        }
    }

    #[test]
    fn arithmetic_equivalence_identity_and_conjugate() {
        let a = QuadraticForm::catalog(CatalogForm::A(2)).unwrap();
        assert!(arithmetic_equivalence(&a, &a).unwrap().is_some());
        let p = RationalMatrix::from_i64_rows(&[&[1, 2], &[1, 1]]);
        let b = a.transform(&p);
        let witness = arithmetic_equivalence(&a, &b).unwrap().unwrap();
        assert!(is_unimodular(&witness));
        assert_eq!(witness.transpose().mul(a.gram()).mul(&witness), *b.gram());
    }

    #[test]
    fn arithmetic_equivalence_separates_a4_d4() {
        let a4 = QuadraticForm::catalog(CatalogForm::A(4)).unwrap();
        let d4 = QuadraticForm::catalog(CatalogForm::D(4)).unwrap();
        assert!(arithmetic_equivalence(&a4, &d4).unwrap().is_none());
    }

    #[test]
    fn bsgs_order_of_s4() {
        // S4 = <(0 1), (0 1 2 3)>
        let g = PermutationGroup::from_generators(
            4,
            vec![perm(&[1, 0, 2, 3]), perm(&[1, 2, 3, 0])],
        );
        assert_eq!(g.order(), 24);
        assert!(g.contains(&perm(&[3, 2, 1, 0])));
    }

    #[test]
    fn bsgs_order_matches_brute_force_on_random_groups() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let degree = rng.gen_range(3..=7);
            let mut gens = Vec::new();
            for _ in 0..2 {
                let mut p: Vec<usize> = (0..degree).collect();
                p.shuffle(&mut rng);
                gens.push(p);
            }
            let g = PermutationGroup::from_generators(degree, gens.clone());
            // brute-force closure
            let mut elems: HashSet<Perm> = HashSet::from([perm_identity(degree)]);
            let mut queue: Vec<Perm> = vec![perm_identity(degree)];
            while let Some(x) = queue.pop() {
                for gen in &gens {
                    let y = perm_compose(gen, &x);
                    if elems.insert(y.clone()) {
                        queue.push(y);
                    }
                }
            }
            assert_eq!(g.order(), elems.len() as u128);
            for e in elems.iter().take(50) {
                assert!(g.contains(e));
            }
        }
    }

    #[test]
    fn orbits_on_sets_examples() {
        let trivial = PermutationGroup::trivial(3);
        let sets: Vec<BTreeSet<usize>> = vec![
            BTreeSet::from([0]),
            BTreeSet::from([1]),
            BTreeSet::from([2]),
        ];
        assert_eq!(orbits_on_sets(&trivial, &sets).len(), 3);

        let c3 = PermutationGroup::from_generators(3, vec![perm(&[1, 2, 0])]);
        let pairs: Vec<BTreeSet<usize>> = vec![
            BTreeSet::from([0, 1]),
            BTreeSet::from([0, 2]),
            BTreeSet::from([1, 2]),
        ];
        assert_eq!(orbits_on_sets(&c3, &pairs).len(), 1);

        let s3 = PermutationGroup::from_generators(3, vec![perm(&[1, 0, 2]), perm(&[1, 2, 0])]);
        assert_eq!(orbits_on_sets(&s3, &sets).len(), 1);
    }

    #[test]
    fn set_stabilizer_examples() {
        let s3 = PermutationGroup::from_generators(3, vec![perm(&[1, 0, 2]), perm(&[1, 2, 0])]);
        assert_eq!(set_stabilizer(&s3, &BTreeSet::from([0])).order(), 2);

        let s4 = PermutationGroup::from_generators(
            4,
            vec![perm(&[1, 0, 2, 3]), perm(&[1, 2, 3, 0])],
        );
        assert_eq!(set_stabilizer(&s4, &BTreeSet::from([0, 1])).order(), 4);
    }

    #[test]
    fn orbit_stabilizer_identity_on_random_groups() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let degree = rng.gen_range(4..=7);
            let mut gens = Vec::new();
            for _ in 0..2 {
                let mut p: Vec<usize> = (0..degree).collect();
                p.shuffle(&mut rng);
                gens.push(p);
            }
            let g = PermutationGroup::from_generators(degree, gens);
            let size = rng.gen_range(1..=degree / 2);
            let s: BTreeSet<usize> = (0..size).collect();
            let orbit_len = set_orbit(&g, &s).len() as u128;
            let stab = set_stabilizer(&g, &s);
            assert_eq!(orbit_len * stab.order(), g.order());
        }
    }

    #[test]
    fn set_transporter_examples() {
        let s3 = PermutationGroup::from_generators(3, vec![perm(&[1, 0, 2]), perm(&[1, 2, 0])]);
        let t = set_transporter(&s3, &BTreeSet::from([0]), &BTreeSet::from([1])).unwrap();
        assert_eq!(t[0], 1);
        let id_ok =
            set_transporter(&s3, &BTreeSet::from([0, 1]), &BTreeSet::from([0, 1])).unwrap();
        assert_eq!(apply_to_set(&id_ok, &BTreeSet::from([0, 1])), BTreeSet::from([0, 1]));

        let c2 = PermutationGroup::from_generators(3, vec![perm(&[1, 0, 2])]);
        assert!(set_transporter(&c2, &BTreeSet::from([0]), &BTreeSet::from([2])).is_none());
    }

    #[test]
    fn split_orbit_examples() {
        let s3 = PermutationGroup::from_generators(3, vec![perm(&[1, 0, 2]), perm(&[1, 2, 0])]);
        // U = G: one representative
        assert_eq!(
            split_orbit_under_subgroup(&s3, &s3, &BTreeSet::from([0]))
                .unwrap()
                .len(),
            1
        );
        // U trivial: one per orbit element
        assert_eq!(
            split_orbit_under_subgroup(&s3, &PermutationGroup::trivial(3), &BTreeSet::from([0]))
                .unwrap()
                .len(),
            3
        );
        // U = <(0 1)>: {{0},{1}} and {{2}}
        let u = PermutationGroup::from_generators(3, vec![perm(&[1, 0, 2])]);
        let reps = split_orbit_under_subgroup(&s3, &u, &BTreeSet::from([0])).unwrap();
        assert_eq!(reps.len(), 2);
    }

    #[test]
    fn split_orbit_rejects_non_subgroup() {
        let c3 = PermutationGroup::from_generators(3, vec![perm(&[1, 2, 0])]);
        let u = PermutationGroup::from_generators(3, vec![perm(&[1, 0, 2])]);
        match split_orbit_under_subgroup(&c3, &u, &BTreeSet::from([0])) {
            Err(Error::NotASubgroup(0)) => {}
            other => panic!("expected subgroup rejection, got {other:?}"),
        }
    }

    #[test]
    fn split_orbit_covers_and_separates_at_small_degree() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let degree = rng.gen_range(4..=8);
            let mut p: Vec<usize> = (0..degree).collect();
            p.shuffle(&mut rng);
            let mut q: Vec<usize> = (0..degree).collect();
            q.shuffle(&mut rng);
            let g = PermutationGroup::from_generators(degree, vec![p.clone(), q]);
            let u = PermutationGroup::from_generators(degree, vec![p]);
            let rep: BTreeSet<usize> = BTreeSet::from([0, 1]);
            let reps = split_orbit_under_subgroup(&g, &u, &rep).unwrap();
            let full: HashSet<BTreeSet<usize>> = set_orbit(&g, &rep).into_iter().collect();
            let mut covered: HashSet<BTreeSet<usize>> = HashSet::new();
            for (i, r) in reps.iter().enumerate() {
                let u_orbit: HashSet<BTreeSet<usize>> = set_orbit(&u, r).into_iter().collect();
                for (j, r2) in reps.iter().enumerate() {
                    if i != j {
                        assert!(!u_orbit.contains(r2), "representatives not U-inequivalent");
                    }
                }
                covered.extend(u_orbit);
            }
            assert_eq!(covered, full);
        }
    }

    #[test]
    fn trace_identity_on_random_families() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = rng.gen_range(2..=4);
            let n = rng.gen_range(d..=d + 3);
            let mut vectors: Vec<Vec<BigInt>> = Vec::new();
            while vectors.len() < n {
                let v: Vec<BigInt> =
                    (0..d).map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect();
                if v.iter().all(|x| x.is_zero()) || vectors.contains(&v) {
                    continue;
                }
                vectors.push(v);
            }
            let fam = VectorFamily::new(d, vectors).unwrap();
            if fam.rank() < d {
                continue;
            }
            let g = characteristic_graph(&fam).unwrap();
            let trace: BigRational = (0..n).map(|i| g.weight(i, i).0.clone()).sum();
            assert_eq!(trace.to_integer().to_i64().unwrap() as usize, d);
            assert!(trace.is_integer());
        }
    }

    #[test]
    fn restricted_isomorphism_iff_equal_keys_small_dims() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=4usize {
            let a = QuadraticForm::catalog(CatalogForm::A(d)).unwrap();
            let min = a.minimal_vectors().unwrap();
            let f1 = VectorFamily::from_min_classes(d, min.vectors.clone()).unwrap();
            // random unimodular image (product of elementary matrices)
            let mut p = RationalMatrix::identity(d);
            for _ in 0..4 {
                let i = rng.gen_range(0..d);
                let mut j = rng.gen_range(0..d);
                while j == i {
                    j = rng.gen_range(0..d);
                }
                let mut e = RationalMatrix::identity(d);
                e[(i, j)] = int(rng.gen_range(-2i64..=2));
                p = p.mul(&e);
            }
            let images: Vec<Vec<BigInt>> = min
                .vectors
                .iter()
                .map(|v| {
                    let rv: Vec<BigRational> =
                        v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
                    let mut iv: Vec<BigInt> =
                        p.mul_vec(&rv).iter().map(|x| x.to_integer()).collect();
                    canonical_sign(&mut iv);
                    iv
                })
                .collect();
            let f2 = VectorFamily::new(d, images).unwrap();
            let f1_plain = VectorFamily::new(d, f1.vectors().to_vec()).unwrap();
            let keys_equal = canonical_key(&characteristic_graph(&f1_plain).unwrap()).key
                == canonical_key(&characteristic_graph(&f2).unwrap()).key;
            let iso = restricted_isomorphism(&f1_plain, &f2).unwrap().is_some();
            assert_eq!(keys_equal, iso);
        }
    }
}
