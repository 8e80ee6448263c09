//! Adjacency Decomposition Method: facet enumeration of a pointed cone
//! modulo a symmetry group, with incidence-ordered orbit scheduling, the
//! Balinski early stop, recursion into hard facets and a banking system for
//! isomorphic faces.

use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::error::{Error, Result};
use crate::linalg::RationalMatrix;
use crate::numutil::primitive_integer_vector;
use crate::polycone::{
    adjacent_facet, balinski_stop, facet_subcone, facets_with_incidence, initial_facet, ConeV,
    Face,
};
use crate::symmetry::{
    canonical_key, characteristic_graph, orbits_on_sets, restricted_automorphism_group,
    restricted_isomorphism, set_stabilizer, set_transporter, split_orbit_under_subgroup,
    perm_compose, perm_inverse, Perm, PermutationGroup, VectorFamily,
};

#[derive(Clone, Debug)]
pub struct AdmPolicy {
    /// recurse into a facet when its incidence exceeds factor * m
    pub recursion_incidence_factor: usize,
    /// hand the whole cone to plain dual description when the ray count is
    /// at most factor * m (used by callers, e.g. facetOrbits)
    pub plain_dd_ray_factor: usize,
    /// recursion depth budget; exhaustion falls back to plain dual
    /// description
    pub max_depth: usize,
    pub use_bank: bool,
    /// compute the full automorphism group of a face instead of keeping the
    /// inherited stabilizer
    pub full_aut_on_faces: bool,
    /// orbits larger than this are deduplicated by transporter queries
    /// instead of explicit expansion
    pub orbit_expansion_cap: usize,
}

impl Default for AdmPolicy {
    fn default() -> Self {
        AdmPolicy {
            recursion_incidence_factor: 2,
            plain_dd_ray_factor: 2,
            max_depth: 4,
            use_bank: true,
            full_aut_on_faces: false,
            orbit_expansion_cap: 200_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct AdmStats {
    pub dual_description_calls: usize,
    pub bank_hits: usize,
    pub bank_misses: usize,
    pub balinski_stops: usize,
    pub orbits_processed: usize,
    pub recursive_calls: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitStatus {
    Open,
    Closed,
}

#[derive(Clone, Debug)]
pub struct FacetOrbitRecord {
    pub representative: Face,
    pub stabilizer: PermutationGroup,
    pub orbit_size: u128,
    pub incidence: usize,
    pub status: OrbitStatus,
}

/// Bank entry: dual description results for a face, keyed by the canonical
/// key of its ray family, reusable through restricted isomorphisms.
#[derive(Clone, Debug)]
pub struct BankEntry {
    pub family: Vec<Vec<BigInt>>,
    pub stored_group: PermutationGroup,
    pub facet_orbits: Vec<BTreeSet<usize>>,
}

#[derive(Debug, Default)]
pub struct Bank {
    entries: HashMap<Vec<u8>, BankEntry>,
}

impl Bank {
    pub fn new() -> Self {
        Bank::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Checks that every generator of G is compatible with a linear symmetry of
/// the ray family: it must preserve the characteristic weights
/// c_ij = v_i^T Q^{-1} v_j.
fn verify_group_action(cone: &ConeV, group: &PermutationGroup) -> Result<()> {
    let n = cone.ray_count();
    if group.degree() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: group.degree(),
        });
    }
    if group.is_trivial() {
        return Ok(());
    }
    let v = RationalMatrix::from_rows(
        cone.rays()
            .iter()
            .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
            .collect(),
    );
    let q = v.transpose().mul(&v);
    let qinv = q.inverse().ok_or_else(|| Error::RankDeficientFamily {
        rank: v.rank(),
        dim: cone.ambient_dim(),
    })?;
    let c = v.mul(&qinv).mul(&v.transpose());
    for (gi, g) in group.generators().iter().enumerate() {
        for i in 0..n {
            for j in i..n {
                if c[(g[i], g[j])] != c[(i, j)] {
                    return Err(Error::GroupDoesNotAct {
                        generator: gi,
                        ray: i,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Orbit lookup table: small orbits are expanded fully for O(1) membership,
/// large ones fall back to transporter queries.
struct OrbitIndex {
    expanded: HashMap<BTreeSet<usize>, usize>,
    unexpanded: Vec<(usize, BTreeSet<usize>)>,
    cap: usize,
}

impl OrbitIndex {
    fn new(cap: usize) -> Self {
        OrbitIndex {
            expanded: HashMap::new(),
            unexpanded: Vec::new(),
            cap,
        }
    }

    fn locate(&self, group: &PermutationGroup, set: &BTreeSet<usize>) -> Option<usize> {
        if let Some(&id) = self.expanded.get(set) {
            return Some(id);
        }
        for (id, rep) in &self.unexpanded {
            if rep.len() == set.len() && set_transporter(group, set, rep).is_some() {
                return Some(*id);
            }
        }
        None
    }

    fn insert(&mut self, group: &PermutationGroup, set: BTreeSet<usize>, id: usize) {
        // capped BFS expansion of the set orbit
        let mut seen: HashSet<BTreeSet<usize>> = HashSet::from([set.clone()]);
        let mut queue: VecDeque<BTreeSet<usize>> = VecDeque::from([set.clone()]);
        while let Some(x) = queue.pop_front() {
            if seen.len() > self.cap {
                self.unexpanded.push((id, set));
                return;
            }
            for g in group.generators() {
                let y: BTreeSet<usize> = x.iter().map(|&p| g[p]).collect();
                if seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        for s in seen {
            self.expanded.insert(s, id);
        }
    }
}

/// Projects the setwise stabilizer of a facet to a permutation group on the
/// facet's local ray indices.
fn project_to_local(stab: &PermutationGroup, incidence: &[usize]) -> PermutationGroup {
    let pos: HashMap<usize, usize> = incidence.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let gens: Vec<Perm> = stab
        .generators()
        .iter()
        .map(|g| incidence.iter().map(|&r| pos[&g[r]]).collect())
        .collect();
    PermutationGroup::from_generators(incidence.len(), gens)
}

/// The supporting functional of a facet given by its incidence set.
fn functional_for_incidence(cone: &ConeV, incidence: &BTreeSet<usize>) -> Result<Face> {
    let m = cone.ambient_dim();
    let rows: Vec<Vec<BigRational>> = incidence
        .iter()
        .map(|&i| {
            cone.rays()[i]
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    if rows.is_empty() && m != 1 {
        return Err(Error::NotAFace);
    }
    let functional = if rows.is_empty() {
        // 1-dimensional cone: the positive functional on its single ray
        vec![BigInt::from(if cone.rays()[0][0] > BigInt::from(0) { 1 } else { -1 })]
    } else {
        let kernel = RationalMatrix::from_rows(rows).kernel_basis();
        if kernel.len() != 1 {
            return Err(Error::NotAFace);
        }
        let mut f = primitive_integer_vector(&kernel[0]);
        // orient nonnegative on the cone
        let sign = cone
            .rays()
            .iter()
            .map(|r| crate::polycone::dot(&f, r))
            .find(|v| !num_traits::Zero::is_zero(v))
            .ok_or(Error::NotAFace)?;
        if sign < BigInt::from(0) {
            for x in &mut f {
                *x = -std::mem::take(x);
            }
        }
        f
    };
    let face = Face {
        incidence: incidence.iter().copied().collect(),
        functional,
    };
    if !face.is_valid_for(cone) {
        return Err(Error::NotAFace);
    }
    Ok(face)
}

/// Facet orbit representatives of a cone under a permutation group acting on
/// its rays.
pub fn adm(
    cone: &ConeV,
    group: &PermutationGroup,
    policy: &AdmPolicy,
    bank: &mut Bank,
    stats: &mut AdmStats,
) -> Result<Vec<FacetOrbitRecord>> {
    adm_at_depth(cone, group, policy, bank, stats, 0)
}

fn adm_at_depth(
    cone: &ConeV,
    group: &PermutationGroup,
    policy: &AdmPolicy,
    bank: &mut Bank,
    stats: &mut AdmStats,
    depth: usize,
) -> Result<Vec<FacetOrbitRecord>> {
    verify_group_action(cone, group)?;
    let m = cone.ambient_dim();
    if m <= 2 {
        // base case: no ridge structure worth traversing
        stats.dual_description_calls += 1;
        let faces = facets_with_incidence(cone)?;
        let reps = orbit_reps(faces, group);
        return Ok(reps
            .into_iter()
            .map(|face| {
                let set: BTreeSet<usize> = face.incidence.iter().copied().collect();
                let stabilizer = set_stabilizer(group, &set);
                let orbit_size = group.order() / stabilizer.order();
                FacetOrbitRecord {
                    incidence: face.incidence.len(),
                    representative: face,
                    stabilizer,
                    orbit_size,
                    status: OrbitStatus::Closed,
                }
            })
            .collect());
    }
    let mut records: Vec<FacetOrbitRecord> = Vec::new();
    let mut index = OrbitIndex::new(policy.orbit_expansion_cap);

    let insert = |records: &mut Vec<FacetOrbitRecord>,
                      index: &mut OrbitIndex,
                      face: Face|
     -> Result<()> {
        let set: BTreeSet<usize> = face.incidence.iter().copied().collect();
        if index.locate(group, &set).is_some() {
            return Ok(());
        }
        let stabilizer = set_stabilizer(group, &set);
        let orbit_size = group.order() / stabilizer.order();
        let id = records.len();
        index.insert(group, set, id);
        records.push(FacetOrbitRecord {
            incidence: face.incidence.len(),
            representative: face,
            stabilizer,
            orbit_size,
            status: OrbitStatus::Open,
        });
        Ok(())
    };

    insert(&mut records, &mut index, initial_facet(cone)?)?;

    loop {
        let next = records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.status == OrbitStatus::Open)
            .min_by_key(|(idx, r)| (r.incidence, *idx))
            .map(|(idx, _)| idx);
        let Some(i) = next else { break };
        // Balinski stop: only sound once at least one orbit is finished
        // (the ridge graph is (m-1)-connected, so fewer than m-1 unfinished
        // facets cannot separate the finished ones from anything new).
        let has_closed = records.iter().any(|r| r.status == OrbitStatus::Closed);
        if has_closed {
            let open_total: u128 = records
                .iter()
                .filter(|r| r.status == OrbitStatus::Open)
                .map(|r| r.orbit_size)
                .sum();
            let open_count = usize::try_from(open_total).unwrap_or(usize::MAX);
            if balinski_stop(m, open_count) {
                stats.balinski_stops += 1;
                for r in &mut records {
                    r.status = OrbitStatus::Closed;
                }
                break;
            }
        }

        let facet = records[i].representative.clone();
        let stab = records[i].stabilizer.clone();
        let sub = facet_subcone(cone, &facet)?;
        let local_group = project_to_local(&stab, &facet.incidence);
        let ridge_reps: Vec<Face> = if facet.incidence.len() > policy.recursion_incidence_factor * m
            && depth < policy.max_depth
        {
            stats.recursive_calls += 1;
            recursive_adm(&sub, &local_group, bank, policy, stats, depth + 1)?
        } else {
            stats.dual_description_calls += 1;
            let faces = facets_with_incidence(&sub)?;
            orbit_reps(faces, &local_group)
        };
        for ridge in &ridge_reps {
            let global_ridge: Vec<usize> =
                ridge.incidence.iter().map(|&k| facet.incidence[k]).collect();
            let neighbor = adjacent_facet(cone, &facet, &global_ridge)?;
            insert(&mut records, &mut index, neighbor)?;
        }
        records[i].status = OrbitStatus::Closed;
        stats.orbits_processed += 1;
    }
    Ok(records)
}

/// One representative per group orbit of the given faces, in first-seen
/// order of the (deterministically sorted) input.
fn orbit_reps(faces: Vec<Face>, group: &PermutationGroup) -> Vec<Face> {
    if group.is_trivial() {
        return faces;
    }
    let sets: Vec<BTreeSet<usize>> = faces
        .iter()
        .map(|f| f.incidence.iter().copied().collect())
        .collect();
    orbits_on_sets(group, &sets)
        .into_iter()
        .map(|members| faces[members[0]].clone())
        .collect()
}

/// Facet orbit representatives of a face cone, computed with ADM
/// recursively and the bank. Representatives are reduced modulo `group`.
pub fn recursive_adm(
    cone: &ConeV,
    group: &PermutationGroup,
    bank: &mut Bank,
    policy: &AdmPolicy,
    stats: &mut AdmStats,
    depth: usize,
) -> Result<Vec<Face>> {
    if depth >= policy.max_depth || cone.ambient_dim() <= 2 {
        stats.dual_description_calls += 1;
        let faces = facets_with_incidence(cone)?;
        return Ok(orbit_reps(faces, group));
    }
    // Optionally compute under the face's full automorphism group, then
    // split the answer back down to the requested group (the double-coset
    // step).
    let work_group = if policy.full_aut_on_faces {
        let family = VectorFamily::new(cone.ambient_dim(), cone.rays().to_vec())?;
        match restricted_automorphism_group(&family) {
            Ok(aut) => {
                let mut gens = aut.group.generators().to_vec();
                gens.extend(group.generators().iter().cloned());
                PermutationGroup::from_generators(cone.ray_count(), gens)
            }
            Err(_) => group.clone(),
        }
    } else {
        group.clone()
    };

    let reps_under_work = if policy.use_bank {
        recursive_adm_banked(cone, &work_group, bank, policy, stats, depth)?
    } else {
        let records = adm_at_depth(cone, &work_group, policy, bank, stats, depth)?;
        records.into_iter().map(|r| r.representative).collect()
    };

    let mut out: Vec<Face> = Vec::new();
    if policy.full_aut_on_faces {
        for face in &reps_under_work {
            let set: BTreeSet<usize> = face.incidence.iter().copied().collect();
            for split in split_orbit_under_subgroup(&work_group, group, &set)? {
                out.push(functional_for_incidence(cone, &split)?);
            }
        }
    } else {
        out = reps_under_work;
    }
    out.sort_by(|a, b| a.functional.cmp(&b.functional));
    Ok(out)
}

fn recursive_adm_banked(
    cone: &ConeV,
    group: &PermutationGroup,
    bank: &mut Bank,
    policy: &AdmPolicy,
    stats: &mut AdmStats,
    depth: usize,
) -> Result<Vec<Face>> {
    let family = VectorFamily::new(cone.ambient_dim(), cone.rays().to_vec())?;
    let graph = characteristic_graph(&family)?;
    let key = canonical_key(&graph).key;

    if let Some(entry) = bank.entries.get(&key).cloned() {
        let stored = VectorFamily::new(cone.ambient_dim(), entry.family.clone())?;
        if let Some((_, sigma)) = restricted_isomorphism(&stored, &family)? {
            stats.bank_hits += 1;
            return transport_bank_entry(cone, group, bank, &key, entry, &sigma);
        }
        // canonical keys match exactly for isomorphic families; a failed
        // confirmation means the entry is unusable here
    }
    stats.bank_misses += 1;
    let records = adm_at_depth(cone, group, policy, bank, stats, depth)?;
    let reps: Vec<Face> = records.into_iter().map(|r| r.representative).collect();
    bank.entries.insert(
        key,
        BankEntry {
            family: cone.rays().to_vec(),
            stored_group: group.clone(),
            facet_orbits: reps
                .iter()
                .map(|f| f.incidence.iter().copied().collect())
                .collect(),
        },
    );
    Ok(reps)
}

/// Applies the isomorphism from a stored bank entry to the requesting copy,
/// enlarging the stored group when the requesting group is not contained in
/// it, then splits stored orbits to the requesting group.
fn transport_bank_entry(
    cone: &ConeV,
    group: &PermutationGroup,
    bank: &mut Bank,
    key: &[u8],
    entry: BankEntry,
    sigma: &Perm,
) -> Result<Vec<Face>> {
    let n = cone.ray_count();
    let sigma_inv = perm_inverse(sigma);
    let conj = |g: &Perm| -> Perm { perm_compose(sigma, &perm_compose(g, &sigma_inv)) };
    let conj_back = |g: &Perm| -> Perm { perm_compose(&sigma_inv, &perm_compose(g, sigma)) };

    let mut h_gens: Vec<Perm> = entry.stored_group.generators().iter().map(conj).collect();
    let mut orbits: Vec<BTreeSet<usize>> = entry
        .facet_orbits
        .iter()
        .map(|o| o.iter().map(|&i| sigma[i]).collect())
        .collect();
    let mut h = PermutationGroup::from_generators(n, h_gens.clone());

    if !group.generators().iter().all(|g| h.contains(g)) {
        // group enlargement: H' = <H, group>, merge orbits, store back
        h_gens.extend(group.generators().iter().cloned());
        h = PermutationGroup::from_generators(n, h_gens);
        let mut merged: Vec<BTreeSet<usize>> = Vec::new();
        for o in orbits {
            if !merged
                .iter()
                .any(|r| r.len() == o.len() && set_transporter(&h, &o, r).is_some())
            {
                merged.push(o);
            }
        }
        orbits = merged;
        bank.entries.insert(
            key.to_vec(),
            BankEntry {
                family: entry.family,
                stored_group: PermutationGroup::from_generators(
                    n,
                    h.generators().iter().map(conj_back).collect(),
                ),
                facet_orbits: orbits
                    .iter()
                    .map(|o| o.iter().map(|&i| sigma_inv[i]).collect())
                    .collect(),
            },
        );
    }

    let mut out = Vec::new();
    for o in &orbits {
        for split in split_orbit_under_subgroup(&h, group, o)? {
            out.push(functional_for_incidence(cone, &split)?);
        }
    }
    out.sort_by(|a, b| a.functional.cmp(&b.functional));
    Ok(out)
}

/// Expands orbit representatives into the full facet list (for oracle
/// comparisons with plain dual description).
pub fn expand_orbits(
    cone: &ConeV,
    group: &PermutationGroup,
    records: &[FacetOrbitRecord],
) -> Result<Vec<Face>> {
    let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    let mut out = Vec::new();
    for r in records {
        let set: BTreeSet<usize> = r.representative.incidence.iter().copied().collect();
        for s in crate::symmetry::set_orbit(group, &set) {
            let face = functional_for_incidence(cone, &s)?;
            if seen.insert(face.functional.clone()) {
                out.push(face);
            }
        }
    }
    out.sort_by(|a, b| a.functional.cmp(&b.functional));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycone::dual_description;

    fn iv(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn simplicial(m: usize) -> ConeV {
        let rays: Vec<Vec<BigInt>> = (0..m)
            .map(|i| (0..m).map(|j| BigInt::from(if i == j { 1 } else { 0 })).collect())
            .collect();
        ConeV::new(m, rays).unwrap()
    }

    #[test]
    fn simplicial_cone_trivial_group() {
        let cone = simplicial(3);
        let mut bank = Bank::new();
        let mut stats = AdmStats::default();
        let records = adm(
            &cone,
            &PermutationGroup::trivial(3),
            &AdmPolicy::default(),
            &mut bank,
            &mut stats,
        )
        .unwrap();
        assert_eq!(records.len(), 3);
        assert!(records.iter().all(|r| r.orbit_size == 1));
        assert!(records.iter().all(|r| r.status == OrbitStatus::Closed));
    }

    #[test]
    fn simplicial_cone_with_full_symmetry() {
        let cone = simplicial(4);
        let s4 = PermutationGroup::from_generators(
            4,
            vec![vec![1, 0, 2, 3], vec![1, 2, 3, 0]],
        );
        let mut bank = Bank::new();
        let mut stats = AdmStats::default();
        let records = adm(&cone, &s4, &AdmPolicy::default(), &mut bank, &mut stats).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].orbit_size, 4);
    }

    #[test]
    fn group_not_acting_rejected() {
        // swapping the first two rays while fixing the third is not induced
        // by any linear symmetry: the characteristic weights differ
        let cone = ConeV::new(
            2,
            vec![iv(&[1, 0]), iv(&[0, 1]), iv(&[2, 1])],
        )
        .unwrap();
        let bad = PermutationGroup::from_generators(3, vec![vec![1, 0, 2]]);
        let mut bank = Bank::new();
        let mut stats = AdmStats::default();
        match adm(&cone, &bad, &AdmPolicy::default(), &mut bank, &mut stats) {
            Err(Error::GroupDoesNotAct { .. }) => {}
            other => panic!("expected action violation, got {other:?}"),
        }
    }

    fn mirrored_cone_and_group(seed: u64) -> (ConeV, PermutationGroup) {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // rays with positive first coordinate (pointedness) paired under the
        // swap of the last two coordinates
        loop {
            let mut rays: Vec<Vec<BigInt>> = Vec::new();
            while rays.len() < 8 {
                let v = vec![
                    BigInt::from(rng.gen_range(1i64..=3)),
                    BigInt::from(rng.gen_range(-3i64..=3)),
                    BigInt::from(rng.gen_range(-3i64..=3)),
                    BigInt::from(rng.gen_range(-3i64..=3)),
                ];
                let mut w = v.clone();
                w.swap(2, 3);
                let vp = crate::numutil::primitive_of_integers(&v);
                let wp = crate::numutil::primitive_of_integers(&w);
                if rays.contains(&vp) || rays.contains(&wp) {
                    continue;
                }
                if vp == wp {
                    continue;
                }
                rays.push(vp);
                rays.push(wp);
            }
            let Ok(cone) = ConeV::new(4, rays.clone()) else {
                continue;
            };
            if cone.ensure_full_dimensional().is_err() {
                continue;
            }
            // index permutation induced by the coordinate swap
            let perm: Vec<usize> = (0..8).map(|i| if i % 2 == 0 { i + 1 } else { i - 1 }).collect();
            let group = PermutationGroup::from_generators(8, vec![perm]);
            return (cone, group);
        }
    }

    #[test]
    fn adm_matches_plain_dual_description_on_mirrored_cones() {
        for seed in 0..8u64 {
            let (cone, group) = mirrored_cone_and_group(seed);
            let mut bank = Bank::new();
            let mut stats = AdmStats::default();
            let records =
                adm(&cone, &group, &AdmPolicy::default(), &mut bank, &mut stats).unwrap();
            let expanded = expand_orbits(&cone, &group, &records).unwrap();
            let expanded_functionals: Vec<Vec<BigInt>> =
                expanded.iter().map(|f| f.functional.clone()).collect();
            let plain = dual_description(&cone).unwrap();
            assert_eq!(expanded_functionals, plain.facets().to_vec(), "seed {seed}");
            let total: u128 = records.iter().map(|r| r.orbit_size).sum();
            assert_eq!(total as usize, plain.facet_count(), "seed {seed}");
        }
    }

    #[test]
    fn orbit_stabilizer_invariant_on_records() {
        let (cone, group) = mirrored_cone_and_group(42);
        let mut bank = Bank::new();
        let mut stats = AdmStats::default();
        let records = adm(&cone, &group, &AdmPolicy::default(), &mut bank, &mut stats).unwrap();
        for r in &records {
            assert_eq!(r.orbit_size * r.stabilizer.order(), group.order());
        }
    }

    #[test]
    fn bank_hit_skips_dual_description() {
        // two isomorphic cones; the second recursive call must be a bank hit
        let cone1 = simplicial(3);
        // a relabeled copy (rays permuted)
        let cone2 = ConeV::new(
            3,
            vec![iv(&[0, 1, 0]), iv(&[0, 0, 1]), iv(&[1, 0, 0])],
        )
        .unwrap();
        let mut bank = Bank::new();
        let mut stats = AdmStats::default();
        let policy = AdmPolicy::default();
        let g = PermutationGroup::trivial(3);
        let r1 = recursive_adm(&cone1, &g, &mut bank, &policy, &mut stats, 1).unwrap();
        let calls_after_first = stats.dual_description_calls;
        assert_eq!(stats.bank_misses, 1);
        let r2 = recursive_adm(&cone2, &g, &mut bank, &policy, &mut stats, 1).unwrap();
        assert_eq!(stats.bank_hits, 1);
        assert_eq!(stats.dual_description_calls, calls_after_first);
        assert_eq!(r1.len(), 3);
        assert_eq!(r2.len(), 3);
        for f in &r2 {
            assert!(f.is_valid_for(&cone2));
        }
    }

    #[test]
    fn bank_miss_on_different_weight_multiset() {
        // two cones over quadrilaterals; stretching one vertex changes the
        // characteristic weights, so the bank may not identify them
        let cone1 = ConeV::new(
            3,
            vec![iv(&[1, 0, 1]), iv(&[0, 1, 1]), iv(&[-1, 0, 1]), iv(&[0, -1, 1])],
        )
        .unwrap();
        let cone2 = ConeV::new(
            3,
            vec![iv(&[1, 0, 1]), iv(&[0, 1, 1]), iv(&[-2, 0, 1]), iv(&[0, -1, 1])],
        )
        .unwrap();
        let mut bank = Bank::new();
        let mut stats = AdmStats::default();
        let policy = AdmPolicy::default();
        let g = PermutationGroup::trivial(4);
        recursive_adm(&cone1, &g, &mut bank, &policy, &mut stats, 1).unwrap();
        recursive_adm(&cone2, &g, &mut bank, &policy, &mut stats, 1).unwrap();
        assert_eq!(stats.bank_hits, 0);
        assert_eq!(stats.bank_misses, 2);
    }

    #[test]
    fn bank_group_enlargement_merges_orbits() {
        // store with the trivial group, request with S3: the stored three
        // facet orbits of the simplicial cone merge into one
        let cone = simplicial(3);
        let mut bank = Bank::new();
        let mut stats = AdmStats::default();
        let policy = AdmPolicy::default();
        let trivial = PermutationGroup::trivial(3);
        let first = recursive_adm(&cone, &trivial, &mut bank, &policy, &mut stats, 1).unwrap();
        assert_eq!(first.len(), 3);
        let s3 = PermutationGroup::from_generators(3, vec![vec![1, 0, 2], vec![1, 2, 0]]);
        let second = recursive_adm(&cone, &s3, &mut bank, &policy, &mut stats, 1).unwrap();
        assert_eq!(stats.bank_hits, 1);
        assert_eq!(second.len(), 1);
        // and the bank entry was enlarged in place
        let third = recursive_adm(&cone, &s3, &mut bank, &policy, &mut stats, 1).unwrap();
        assert_eq!(third.len(), 1);
    }

    #[test]
    fn shared_ridge_computed_once_with_bank() {
        // force recursion on every facet of a cone whose facets are all
        // isomorphic: after the first subcone, every later one is a bank hit
        let cone = simplicial(4);
        let mut policy = AdmPolicy::default();
        policy.recursion_incidence_factor = 0; // recurse always
        let mut bank = Bank::new();
        let mut stats = AdmStats::default();
        let records = adm(
            &cone,
            &PermutationGroup::trivial(4),
            &policy,
            &mut bank,
            &mut stats,
        )
        .unwrap();
        assert_eq!(records.len(), 4);
        assert!(stats.bank_hits >= 1, "expected bank reuse: {stats:?}");
    }
}
