//! Voronoi's algorithm: the perfect domain, the flip across a facet, and
//! the graph traversal that enumerates all perfect forms of a dimension up
//! to arithmetic equivalence.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::admethod::{adm, AdmPolicy, AdmStats, Bank, FacetOrbitRecord, OrbitStatus};
use crate::error::{Error, Result};
use crate::linalg::{definiteness, Definiteness, RationalMatrix};
use crate::numutil::simplest_rational_between;
use crate::polycone::{facets_with_incidence, ConeV, Face, SymCoordinates};
use crate::qform::{parse_rational, CatalogForm, HermitePower, MinimalVectorSet, QuadraticForm};
use crate::symmetry::{
    arithmetic_equivalence, aut_group, orbits_on_sets, set_stabilizer, FormAutGroup,
    PermutationGroup, VectorFamily,
};

// ---------------------------------------------------------------------------
// Perfect domain
// ---------------------------------------------------------------------------

/// Dom(A): the polyhedral cone in flattened symmetric coordinates spanned
/// by the rays v v^T, one per antipodal class of Min(A). Ray i corresponds
/// to the i-th class representative of the returned minimal vector set.
/// Full-dimensional (and hence usable for facet enumeration) exactly when
/// A is perfect.
pub fn perfect_domain(a: &QuadraticForm) -> Result<(ConeV, MinimalVectorSet)> {
    a.ensure_positive_definite()?;
    let min = a.minimal_vectors()?;
    let coords = SymCoordinates::new(a.dim());
    let m = coords.flat_dim();
    let rank = a.perfection_rank(&min);
    if rank < m {
        return Err(Error::NotPerfect { rank, full: m });
    }
    let rays: Vec<Vec<BigInt>> = min
        .vectors
        .iter()
        .map(|v| coords.ray_coords_of_vector(v))
        .collect();
    let cone = ConeV::new(m, rays)?;
    Ok((cone, min))
}

/// Facet orbit decomposition of Dom(A) under Aut(A).
#[derive(Clone, Debug)]
pub struct FacetOrbits {
    pub cone: ConeV,
    pub min: MinimalVectorSet,
    pub aut: FormAutGroup,
    /// Aut(A) acting on the ray indices of `cone`.
    pub ray_action: PermutationGroup,
    pub orbits: Vec<FacetOrbitRecord>,
}

/// One representative facet per Aut(A)-orbit. Small domains (ray count at
/// most `plain_dd_ray_factor * m`) go through a plain dual description plus
/// orbit reduction; larger ones through the adjacency decomposition method.
pub fn facet_orbits(
    a: &QuadraticForm,
    policy: &AdmPolicy,
    bank: &mut Bank,
    stats: &mut AdmStats,
) -> Result<FacetOrbits> {
    let (cone, min) = perfect_domain(a)?;
    let aut = aut_group(a)?;
    // class_action is indexed by min.vectors, which is exactly the ray order
    let ray_action = aut.class_action.clone();
    let m = cone.ambient_dim();
    let orbits = if cone.ray_count() <= policy.plain_dd_ray_factor * m {
        stats.dual_description_calls += 1;
        let faces = facets_with_incidence(&cone)?;
        let sets: Vec<BTreeSet<usize>> = faces
            .iter()
            .map(|f| f.incidence.iter().copied().collect())
            .collect();
        let mut records = Vec::new();
        for members in orbits_on_sets(&ray_action, &sets) {
            let rep = members[0];
            let stabilizer = set_stabilizer(&ray_action, &sets[rep]);
            records.push(FacetOrbitRecord {
                representative: faces[rep].clone(),
                orbit_size: ray_action.order() / stabilizer.order(),
                stabilizer,
                incidence: faces[rep].incidence.len(),
                status: OrbitStatus::Closed,
            });
        }
        records
    } else {
        adm(&cone, &ray_action, policy, bank, stats)?
    };
    Ok(FacetOrbits {
        cone,
        min,
        aut,
        ray_action,
        orbits,
    })
}

// ---------------------------------------------------------------------------
// Flip
// ---------------------------------------------------------------------------

/// Crosses the facet of Dom(A) into the neighboring perfect domain and
/// returns its perfect form A' = A + l U, where U is the symmetric matrix
/// of the facet functional and l > 0 is the last parameter at which the
/// arithmetical minimum is still lambda(A).
///
/// The bracketing works on [l, u]: l always satisfies lambda(A + l U) =
/// lambda(A), u always satisfies lambda(A + u U) < lambda(A) once phase one
/// ends. Probes that leave the positive definite cone only shrink u, so
/// every minimal vector computation stays well defined.
///
/// The result is verified post hoc: the new form must be perfect, the
/// functional must be nonpositive on Min(A') with kernel exactly the facet
/// classes; any violation reports `FlipFacetMismatch`.
pub fn flip(
    a: &QuadraticForm,
    cone: &ConeV,
    min: &MinimalVectorSet,
    facet: &Face,
) -> Result<QuadraticForm> {
    if !facet.is_valid_for(cone) {
        return Err(Error::NotAFace);
    }
    let coords = SymCoordinates::new(a.dim());
    let u_mat = coords.matrix_of_func_coords_int(&facet.functional);
    let lambda = min.minimum.clone();
    let min_classes: BTreeSet<&Vec<BigInt>> = min.vectors.iter().collect();

    let probe = |t: &BigRational| -> Result<Option<MinimalVectorSet>> {
        let gram = a.gram().add(&u_mat.scale(t));
        match definiteness(&gram)? {
            Definiteness::PositiveDefinite => Ok(Some(QuadraticForm::new(gram)?.minimal_vectors()?)),
            _ => Ok(None),
        }
    };

    // phase one: find u with A + uU positive definite and minimum < lambda
    let two = BigRational::from_integer(BigInt::from(2));
    let mut lo = BigRational::zero();
    let mut up = BigRational::one();
    loop {
        match probe(&up)? {
            Some(mu) if mu.minimum < lambda => break,
            Some(_) => {
                lo = up.clone();
                up = &up * &two;
            }
            None => {
                up = simplest_rational_between(&lo, &up);
            }
        }
    }

    // phase two: raise lo to the exact crossing parameter
    loop {
        let at_lo = probe(&lo)?.expect("lower bracket stays positive definite");
        debug_assert_eq!(at_lo.minimum, lambda);
        if !at_lo.vectors.iter().all(|v| min_classes.contains(v)) {
            break;
        }
        let gamma = simplest_rational_between(&lo, &up);
        let at_gamma = probe(&gamma)?.expect("interior of the bracket is positive definite");
        if at_gamma.minimum >= lambda {
            lo = gamma;
        } else {
            // every vector that dipped below lambda jumps the upper bound
            // down to the parameter where its norm equals lambda
            let mut new_up = gamma.clone();
            for v in &at_gamma.vectors {
                let fv = u_mat.quadratic_int(v);
                if fv.is_negative() {
                    let cand = (&lambda - a.norm(v)) / fv;
                    if cand < new_up {
                        new_up = cand;
                    }
                }
            }
            up = new_up;
            if let Some(at_up) = probe(&up)? {
                if at_up.minimum == lambda {
                    lo = up.clone();
                }
            }
        }
    }

    let flipped = QuadraticForm::new(a.gram().add(&u_mat.scale(&lo)))?;
    verify_flip(a, min, facet, &u_mat, &lambda, &flipped)?;
    Ok(flipped)
}

fn verify_flip(
    a: &QuadraticForm,
    min: &MinimalVectorSet,
    facet: &Face,
    u_mat: &RationalMatrix,
    lambda: &BigRational,
    flipped: &QuadraticForm,
) -> Result<()> {
    if flipped == a || !flipped.is_perfect()? {
        return Err(Error::FlipFacetMismatch);
    }
    let new_min = flipped.minimal_vectors()?;
    if &new_min.minimum != lambda {
        return Err(Error::FlipFacetMismatch);
    }
    let facet_classes: BTreeSet<&Vec<BigInt>> =
        facet.incidence.iter().map(|&i| &min.vectors[i]).collect();
    let mut shared = 0usize;
    for v in &new_min.vectors {
        let fv = u_mat.quadratic_int(v);
        if fv.is_zero() {
            if !facet_classes.contains(v) {
                return Err(Error::FlipFacetMismatch);
            }
            shared += 1;
        } else if fv.is_positive() {
            return Err(Error::FlipFacetMismatch);
        }
    }
    if shared != facet_classes.len() {
        return Err(Error::FlipFacetMismatch);
    }
    Ok(())
}

/// Outcome of the superseded doubling flip, kept as a regression fixture.
#[derive(Clone, Debug, PartialEq)]
pub enum DoublingFlipOutcome {
    Form(QuadraticForm),
    /// A probe parameter left the positive definite cone, where minimal
    /// vectors are undefined; the procedure cannot continue.
    LeftPositiveDefiniteCone(BigRational),
    Stalled,
}

/// Superseded flip variant retained to document why `flip` brackets instead.
/// It normalizes the facet functional so a chosen outside minimal vector has
/// value one, doubles the step until a foreign minimal vector appears, then
/// repeatedly equalizes the current shortest vector with a facet vector.
/// Doubling probes the form at parameters that can overshoot the boundary of
/// the positive definite cone, at which point the procedure breaks down.
pub fn doubling_flip(
    a: &QuadraticForm,
    cone: &ConeV,
    min: &MinimalVectorSet,
    facet: &Face,
    outside_choice: usize,
    step_cap: usize,
) -> Result<DoublingFlipOutcome> {
    if !facet.is_valid_for(cone) {
        return Err(Error::NotAFace);
    }
    let coords = SymCoordinates::new(a.dim());
    let base = coords.matrix_of_func_coords_int(&facet.functional);
    let incident: BTreeSet<usize> = facet.incidence.iter().copied().collect();
    let outside: Vec<usize> = (0..min.vectors.len())
        .filter(|i| !incident.contains(i))
        .collect();
    let v0 = &min.vectors[outside[outside_choice % outside.len()]];
    let u_mat = base.scale(&(BigRational::one() / base.quadratic_int(v0)));
    let lambda = min.minimum.clone();
    let min_classes: BTreeSet<&Vec<BigInt>> = min.vectors.iter().collect();

    let probe = |t: &BigRational| -> Result<Option<MinimalVectorSet>> {
        let gram = a.gram().add(&u_mat.scale(t));
        match definiteness(&gram)? {
            Definiteness::PositiveDefinite => Ok(Some(QuadraticForm::new(gram)?.minimal_vectors()?)),
            _ => Ok(None),
        }
    };

    let two = BigRational::from_integer(BigInt::from(2));
    let mut t = BigRational::one();
    let mut steps = 0usize;
    loop {
        let Some(mv) = probe(&t)? else {
            return Ok(DoublingFlipOutcome::LeftPositiveDefiniteCone(t));
        };
        if !mv.vectors.iter().all(|v| min_classes.contains(v)) {
            break;
        }
        t = &t * &two;
        steps += 1;
        if steps > step_cap {
            return Ok(DoublingFlipOutcome::Stalled);
        }
    }
    for _ in 0..step_cap {
        let Some(mv) = probe(&t)? else {
            return Ok(DoublingFlipOutcome::LeftPositiveDefiniteCone(t));
        };
        if mv.minimum == lambda {
            return Ok(DoublingFlipOutcome::Form(QuadraticForm::new(
                a.gram().add(&u_mat.scale(&t)),
            )?));
        }
        let shortest = &mv.vectors[0];
        let fv = u_mat.quadratic_int(shortest);
        if !fv.is_negative() {
            return Ok(DoublingFlipOutcome::Stalled);
        }
        t = (&lambda - a.norm(shortest)) / fv;
    }
    Ok(DoublingFlipOutcome::Stalled)
}

// ---------------------------------------------------------------------------
// Normalization and fingerprints
// ---------------------------------------------------------------------------

/// The unique positive rescaling with integer entries of content one: the
/// canonical representative of the ray {cA : c > 0}.
pub fn canonical_integer_form(a: &QuadraticForm) -> QuadraticForm {
    let g = a.gram();
    let d = g.rows();
    let mut denom_lcm = BigInt::one();
    for i in 0..d {
        for j in 0..d {
            denom_lcm = denom_lcm.lcm(g[(i, j)].denom());
        }
    }
    let mut content = BigInt::zero();
    for i in 0..d {
        for j in 0..d {
            let scaled = g[(i, j)].numer() * &denom_lcm / g[(i, j)].denom();
            content = content.gcd(&scaled);
        }
    }
    let factor = BigRational::new(denom_lcm, content);
    QuadraticForm::new(g.scale(&factor)).expect("positive rescaling stays positive definite")
}

/// Cheap arithmetic-equivalence invariant used to bucket candidate forms.
/// Meaningful only on the canonical integer representative, whose scale is
/// unique within an equivalence class: equivalent forms get equal
/// fingerprints, so only fingerprint collisions need an exact equivalence
/// test.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fingerprint {
    /// |Min(A)|, both vectors of each antipodal pair
    pub min_count: usize,
    /// lambda^d / det
    pub hermite: BigRational,
    /// sorted multiset of |v^T Q^{-1} w| over unordered pairs of minimal
    /// classes, Q = sum of v v^T over the classes (sign depends on the
    /// class representative, so only the absolute value is invariant)
    pub weights: Vec<BigRational>,
}

pub fn fingerprint(a: &QuadraticForm) -> Result<Fingerprint> {
    let min = a.minimal_vectors()?;
    let family = VectorFamily::from_min_classes(a.dim(), min.vectors.clone())?;
    let q_inv = family.gram_sum().inverse().ok_or_else(|| Error::RankDeficientFamily {
        rank: family.rank(),
        dim: family.dim(),
    })?;
    let classes: Vec<Vec<BigRational>> = min
        .vectors
        .iter()
        .map(|v| v.iter().map(|x| BigRational::from_integer(x.clone())).collect())
        .collect();
    let mut weights = Vec::with_capacity(classes.len() * (classes.len() + 1) / 2);
    for i in 0..classes.len() {
        for j in i..classes.len() {
            let mut w = q_inv.bilinear(&classes[i], &classes[j]);
            if w.is_negative() {
                w = -w;
            }
            weights.push(w);
        }
    }
    weights.sort();
    Ok(Fingerprint {
        min_count: min.full_count(),
        hermite: a.hermite_power()?.0,
        weights,
    })
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// One arithmetic equivalence class of perfect forms, represented by the
/// first canonical integer Gram matrix the traversal reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerfectFormRecord {
    pub id: usize,
    pub form: QuadraticForm,
    pub fingerprint: Fingerprint,
    pub minimum: BigRational,
    pub min_full_count: usize,
    pub hermite: HermitePower,
    pub aut_order: u128,
    pub extreme: bool,
    /// number of facet orbits of Dom(form); None until processed
    pub facet_orbit_count: Option<usize>,
    /// (facet orbit index, record id of the neighbor across it)
    pub neighbors: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instrumentation {
    pub adm: AdmStats,
    pub flips: usize,
    pub equivalence_tests: usize,
}

pub const STATE_VERSION: u32 = 1;

/// Complete or partial traversal of the Voronoi graph in one dimension.
/// Serializable, resumable, and deterministic: a resumed run produces the
/// same state as an uninterrupted one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationState {
    pub version: u32,
    pub dimension: usize,
    pub records: Vec<PerfectFormRecord>,
    /// record ids whose facets have not been enumerated yet
    pub open: VecDeque<usize>,
    pub complete: bool,
    pub instrumentation: Instrumentation,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub policy: AdmPolicy,
    /// stop expanding once this many classes are known
    pub max_forms: Option<usize>,
    pub time_budget: Option<Duration>,
    pub workers: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            policy: AdmPolicy::default(),
            max_forms: None,
            time_budget: None,
            workers: 1,
        }
    }
}

fn make_record(id: usize, form: QuadraticForm, fingerprint: Fingerprint) -> Result<PerfectFormRecord> {
    let min = form.minimal_vectors()?;
    let full = form.dim() * (form.dim() + 1) / 2;
    let rank = form.perfection_rank(&min);
    if rank < full {
        return Err(Error::NotPerfect { rank, full });
    }
    let aut = aut_group(&form)?;
    let extreme = form.is_extreme()?;
    Ok(PerfectFormRecord {
        id,
        minimum: min.minimum.clone(),
        min_full_count: min.full_count(),
        hermite: form.hermite_power()?,
        aut_order: aut.order,
        extreme,
        facet_orbit_count: None,
        neighbors: Vec::new(),
        fingerprint,
        form,
    })
}

/// Fresh traversal state holding only the seed class of `seed` (normalized
/// to its canonical integer representative).
pub fn seed_state(dimension: usize, seed: &QuadraticForm) -> Result<ClassificationState> {
    if seed.dim() != dimension {
        return Err(Error::DimensionMismatch {
            expected: dimension,
            got: seed.dim(),
        });
    }
    let form = canonical_integer_form(seed);
    let fp = fingerprint(&form)?;
    let record = make_record(0, form, fp)?;
    Ok(ClassificationState {
        version: STATE_VERSION,
        dimension,
        records: vec![record],
        open: VecDeque::from([0]),
        complete: false,
        instrumentation: Instrumentation::default(),
    })
}

/// Enumerates all perfect forms of the dimension, seeded at A_d.
pub fn classify(dimension: usize, options: &ClassifyOptions) -> Result<ClassificationState> {
    let seed = QuadraticForm::catalog(CatalogForm::A(dimension))?;
    let mut state = seed_state(dimension, &seed)?;
    classify_resume(&mut state, options)?;
    Ok(state)
}

/// Continues a traversal until the open queue empties or a limit is hit.
/// Limits leave `complete == false` with a resumable state.
///
/// The facet bank is scoped to a single record so that results do not
/// depend on which records were processed earlier; this is what makes a
/// killed-and-resumed run reproduce the uninterrupted one exactly.
pub fn classify_resume(state: &mut ClassificationState, options: &ClassifyOptions) -> Result<()> {
    if state.version != STATE_VERSION {
        return Err(Error::InvalidState(format!(
            "state version {} (expected {})",
            state.version, STATE_VERSION
        )));
    }
    let start = Instant::now();
    let mut buckets: BTreeMap<Fingerprint, Vec<usize>> = BTreeMap::new();
    for r in &state.records {
        buckets.entry(r.fingerprint.clone()).or_default().push(r.id);
    }
    while let Some(&id) = state.open.front() {
        if let Some(max) = options.max_forms {
            if state.records.len() >= max {
                state.complete = false;
                return Ok(());
            }
        }
        if let Some(budget) = options.time_budget {
            if start.elapsed() >= budget {
                state.complete = false;
                return Ok(());
            }
        }
        state.open.pop_front();
        let form = state.records[id].form.clone();
        let mut bank = Bank::new();
        let fo = facet_orbits(&form, &options.policy, &mut bank, &mut state.instrumentation.adm)?;
        state.records[id].facet_orbit_count = Some(fo.orbits.len());
        let reps: Vec<&Face> = fo.orbits.iter().map(|o| &o.representative).collect();
        let flipped: Vec<Result<QuadraticForm>> = if options.workers > 1 {
            use rayon::prelude::*;
            reps.par_iter().map(|f| flip(&form, &fo.cone, &fo.min, f)).collect()
        } else {
            reps.iter().map(|f| flip(&form, &fo.cone, &fo.min, f)).collect()
        };
        for (k, res) in flipped.into_iter().enumerate() {
            state.instrumentation.flips += 1;
            let neighbor = canonical_integer_form(&res?);
            let fp = fingerprint(&neighbor)?;
            let mut found = None;
            if let Some(ids) = buckets.get(&fp) {
                for &cid in ids {
                    state.instrumentation.equivalence_tests += 1;
                    if arithmetic_equivalence(&state.records[cid].form, &neighbor)?.is_some() {
                        found = Some(cid);
                        break;
                    }
                }
            }
            let nid = match found {
                Some(cid) => cid,
                None => {
                    let nid = state.records.len();
                    let record = make_record(nid, neighbor, fp.clone())?;
                    buckets.entry(fp).or_default().push(nid);
                    state.records.push(record);
                    state.open.push_back(nid);
                    nid
                }
            };
            state.records[id].neighbors.push((k, nid));
        }
    }
    state.complete = true;
    Ok(())
}

/// Record id of the class maximizing the Hermite constant (smallest id on
/// ties).
pub fn hermite_maximizer(state: &ClassificationState) -> Option<usize> {
    state
        .records
        .iter()
        .max_by(|a, b| a.hermite.cmp(&b.hermite).then(b.id.cmp(&a.id)))
        .map(|r| r.id)
}

/// Edges of the Voronoi graph: (record, facet orbit index, neighbor record).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContiguityReport {
    pub complete: bool,
    pub edges: Vec<(usize, usize, usize)>,
}

pub fn contiguity_report(state: &ClassificationState) -> ContiguityReport {
    let mut edges = Vec::new();
    for r in &state.records {
        for &(k, nid) in &r.neighbors {
            edges.push((r.id, k, nid));
        }
    }
    ContiguityReport {
        complete: state.complete,
        edges,
    }
}

// ---------------------------------------------------------------------------
// State serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct StateFile {
    version: u32,
    dimension: usize,
    complete: bool,
    records: Vec<RecordFile>,
    open: Vec<usize>,
    instrumentation: Instrumentation,
}

#[derive(Serialize, Deserialize)]
struct RecordFile {
    id: usize,
    gram: Vec<Vec<String>>,
    minimum: String,
    min_full_count: usize,
    hermite: String,
    fingerprint_weights: Vec<String>,
    aut_order: String,
    extreme: bool,
    facet_orbit_count: Option<usize>,
    neighbors: Vec<(usize, usize)>,
}

fn record_to_file(r: &PerfectFormRecord) -> RecordFile {
    let g = r.form.gram();
    RecordFile {
        id: r.id,
        gram: (0..g.rows())
            .map(|i| (0..g.cols()).map(|j| g[(i, j)].to_string()).collect())
            .collect(),
        minimum: r.minimum.to_string(),
        min_full_count: r.min_full_count,
        hermite: r.hermite.0.to_string(),
        fingerprint_weights: r.fingerprint.weights.iter().map(|w| w.to_string()).collect(),
        aut_order: r.aut_order.to_string(),
        extreme: r.extreme,
        facet_orbit_count: r.facet_orbit_count,
        neighbors: r.neighbors.clone(),
    }
}

fn bad(message: impl Into<String>) -> Error {
    Error::InvalidState(message.into())
}

fn parse_state_rational(token: &str, what: &str) -> Result<BigRational> {
    parse_rational(token).map_err(|e| bad(format!("{what}: {e}")))
}

fn record_from_file(f: &RecordFile, dimension: usize) -> Result<PerfectFormRecord> {
    if f.gram.len() != dimension || f.gram.iter().any(|row| row.len() != dimension) {
        return Err(bad(format!("record {}: gram is not {dimension}x{dimension}", f.id)));
    }
    let mut rows = Vec::with_capacity(dimension);
    for row in &f.gram {
        let mut out = Vec::with_capacity(dimension);
        for entry in row {
            out.push(parse_state_rational(entry, "gram entry")?);
        }
        rows.push(out);
    }
    let form = QuadraticForm::new(RationalMatrix::from_rows(rows))
        .map_err(|e| bad(format!("record {}: {e}", f.id)))?;
    if canonical_integer_form(&form) != form {
        return Err(bad(format!("record {}: gram is not the canonical integer representative", f.id)));
    }
    // revalidate everything derivable; a corrupted or hand-edited file must
    // not poison a resumed run
    let fp = fingerprint(&form).map_err(|e| bad(format!("record {}: {e}", f.id)))?;
    if !form.is_perfect().map_err(|e| bad(format!("record {}: {e}", f.id)))? {
        return Err(bad(format!("record {}: form is not perfect", f.id)));
    }
    let minimum = parse_state_rational(&f.minimum, "minimum")?;
    let hermite = parse_state_rational(&f.hermite, "hermite")?;
    let weights = f
        .fingerprint_weights
        .iter()
        .map(|w| parse_state_rational(w, "fingerprint weight"))
        .collect::<Result<Vec<_>>>()?;
    let stored = Fingerprint {
        min_count: f.min_full_count,
        hermite: hermite.clone(),
        weights,
    };
    if stored != fp {
        return Err(bad(format!("record {}: fingerprint does not match the form", f.id)));
    }
    let min = form.minimal_vectors()?;
    if min.minimum != minimum {
        return Err(bad(format!("record {}: stored minimum does not match the form", f.id)));
    }
    let aut_order: u128 = f
        .aut_order
        .parse()
        .map_err(|_| bad(format!("record {}: bad automorphism order", f.id)))?;
    Ok(PerfectFormRecord {
        id: f.id,
        form,
        fingerprint: fp,
        minimum,
        min_full_count: f.min_full_count,
        hermite: HermitePower(hermite),
        aut_order,
        extreme: f.extreme,
        facet_orbit_count: f.facet_orbit_count,
        neighbors: f.neighbors.clone(),
    })
}

pub fn state_to_json(state: &ClassificationState) -> String {
    let file = StateFile {
        version: state.version,
        dimension: state.dimension,
        complete: state.complete,
        records: state.records.iter().map(record_to_file).collect(),
        open: state.open.iter().copied().collect(),
        instrumentation: state.instrumentation.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("state serializes");
    text.push('\n');
    text
}

pub fn state_from_json(text: &str) -> Result<ClassificationState> {
    let file: StateFile =
        serde_json::from_str(text).map_err(|e| bad(format!("malformed state file: {e}")))?;
    if file.version != STATE_VERSION {
        return Err(bad(format!(
            "state version {} (expected {})",
            file.version, STATE_VERSION
        )));
    }
    let n = file.records.len();
    let mut records = Vec::with_capacity(n);
    for (pos, rf) in file.records.iter().enumerate() {
        if rf.id != pos {
            return Err(bad(format!("record ids out of order at position {pos}")));
        }
        let r = record_from_file(rf, file.dimension)?;
        if r.neighbors.iter().any(|&(_, nid)| nid >= n) {
            return Err(bad(format!("record {pos}: neighbor id out of range")));
        }
        records.push(r);
    }
    if file.open.iter().any(|&id| id >= n) {
        return Err(bad("open queue references an unknown record"));
    }
    Ok(ClassificationState {
        version: file.version,
        dimension: file.dimension,
        records,
        open: file.open.into_iter().collect(),
        complete: file.complete,
        instrumentation: file.instrumentation,
    })
}

pub fn save_state(state: &ClassificationState, path: &Path) -> Result<()> {
    std::fs::write(path, state_to_json(state))?;
    Ok(())
}

pub fn load_state(path: &Path) -> Result<ClassificationState> {
    let text = std::fs::read_to_string(path)?;
    state_from_json(&text)
}
