//! Batch command-line surface over the perfect-forms library: classification
//! runs with resumable state, single-form analysis, and polyhedral debug
//! subcommands. Exit codes: 0 complete, 2 limit-exhausted partial, 1 error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::json;

use perfect_forms::admethod::{AdmPolicy, AdmStats, Bank};
use perfect_forms::polycone::{dual_description, format_cone_h, format_cone_v, parse_cone, ConeV};
use perfect_forms::qform::{format_form, parse_form, CatalogForm, QuadraticForm};
use perfect_forms::symmetry::{arithmetic_equivalence, aut_group};
use perfect_forms::voronoi::{
    canonical_integer_form, classify_resume, contiguity_report, facet_orbits, flip,
    hermite_maximizer, load_state, save_state, seed_state, ClassificationState, ClassifyOptions,
    PerfectFormRecord,
};
use perfect_forms::{Error, Result};

/// Report schema version, bumped together with any change to the JSON shape.
const REPORT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "perfect-forms", version, about = "Perfect quadratic forms via Voronoi's algorithm")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all perfect forms of a dimension up to equivalence
    Classify(ClassifyArgs),
    /// Report the exact invariants of a single form
    Analyze(AnalyzeArgs),
    /// Cross one facet orbit of a perfect domain to the contiguous form
    Flip(FlipArgs),
    /// Enumerate the facet orbits of a perfect domain
    Facets(FacetsArgs),
    /// Decide arithmetic equivalence of two forms
    Isom(IsomArgs),
    /// Convert a cone between generator and inequality descriptions
    DualDesc(DualDescArgs),
    /// Automorphism group of a form
    Autgroup(AutgroupArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Lattice dimension (2..=7; 8 needs an explicit acknowledgement)
    #[arg(long)]
    dim: usize,
    /// State file path; defaults to classify-dim<D>.json under
    /// $VORONOI_STATE_DIR (or the working directory)
    #[arg(long)]
    state: Option<PathBuf>,
    /// Resume from an existing state file instead of starting fresh
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Stop expanding once this many classes are known (exit code 2)
    #[arg(long)]
    max_forms: Option<usize>,
    /// Wall-clock budget in seconds (exit code 2 when exhausted)
    #[arg(long)]
    wall_clock: Option<u64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Disable the face bank (dual descriptions are recomputed)
    #[arg(long)]
    no_bank: bool,
    /// Recurse on faces with incidence above this multiple of the ambient
    /// dimension
    #[arg(long)]
    recursion_factor: Option<usize>,
    /// Compute full automorphism groups of faces before recursing
    #[arg(long)]
    full_aut_on_faces: bool,
    /// Dimension 8 runs for months; this flag acknowledges that
    #[arg(long)]
    i_know_this_takes_months: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    form: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct FlipArgs {
    form: PathBuf,
    /// Facet orbit index (as listed by `facets`)
    #[arg(long, default_value_t = 0)]
    facet: usize,
}

#[derive(Args)]
struct FacetsArgs {
    form: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct IsomArgs {
    form_a: PathBuf,
    form_b: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct DualDescArgs {
    cone: PathBuf,
}

#[derive(Args)]
struct AutgroupArgs {
    form: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Classify(args) => cmd_classify(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Flip(args) => cmd_flip(args),
        Command::Facets(args) => cmd_facets(args),
        Command::Isom(args) => cmd_isom(args),
        Command::DualDesc(args) => cmd_dual_desc(args),
        Command::Autgroup(args) => cmd_autgroup(args),
    }
}

fn read_form(path: &Path) -> Result<QuadraticForm> {
    let text = std::fs::read_to_string(path)?;
    parse_form(&text)
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn rational_str(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn gram_strings(form: &QuadraticForm) -> Vec<Vec<String>> {
    let g = form.gram();
    (0..g.rows())
        .map(|i| (0..g.cols()).map(|j| rational_str(&g[(i, j)])).collect())
        .collect()
}

/// Name of the catalog form the class is equivalent to, if any; keeps the
/// Table-1-style reports readable.
fn catalog_name(form: &QuadraticForm) -> Option<String> {
    let d = form.dim();
    let mut candidates = vec![(format!("A{d}"), CatalogForm::A(d))];
    if d >= 2 {
        candidates.push((format!("D{d}"), CatalogForm::D(d)));
    }
    match d {
        6 => candidates.push(("E6".into(), CatalogForm::E6)),
        7 => candidates.push(("E7".into(), CatalogForm::E7)),
        8 => candidates.push(("E8".into(), CatalogForm::E8)),
        _ => {}
    }
    for (name, which) in candidates {
        let Ok(cat) = QuadraticForm::catalog(which) else {
            continue;
        };
        if let Ok(Some(_)) = arithmetic_equivalence(&canonical_integer_form(&cat), form) {
            return Some(name);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn state_dir() -> PathBuf {
    std::env::var_os("VORONOI_STATE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn build_policy(args: &ClassifyArgs) -> AdmPolicy {
    let mut policy = AdmPolicy::default();
    policy.use_bank = !args.no_bank;
    if let Some(f) = args.recursion_factor {
        policy.recursion_incidence_factor = f;
    }
    policy.full_aut_on_faces = args.full_aut_on_faces;
    policy
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode> {
    if args.dim < 2 {
        return Err(Error::InvalidState("classification needs dimension >= 2".into()));
    }
    if args.dim == 8 && !args.i_know_this_takes_months {
        return Err(Error::InvalidState(
            "dimension 8 takes months of compute; pass --i-know-this-takes-months to proceed"
                .into(),
        ));
    }
    if args.dim > 8 {
        return Err(Error::InvalidState(format!(
            "dimension {} is out of reach for this implementation",
            args.dim
        )));
    }
    let state_path = args
        .state
        .clone()
        .unwrap_or_else(|| state_dir().join(format!("classify-dim{}.json", args.dim)));
    let mut state = match &args.resume {
        Some(path) => {
            let state = load_state(path)?;
            if state.dimension != args.dim {
                return Err(Error::DimensionMismatch {
                    expected: args.dim,
                    got: state.dimension,
                });
            }
            state
        }
        None => seed_state(args.dim, &QuadraticForm::catalog(CatalogForm::A(args.dim))?)?,
    };
    let options = ClassifyOptions {
        policy: build_policy(&args),
        max_forms: args.max_forms,
        time_budget: args.wall_clock.map(Duration::from_secs),
        workers: args.workers.max(1),
    };
    classify_resume(&mut state, &options)?;
    save_state(&state, &state_path)?;
    let report = match args.format {
        Format::Json => classify_report_json(&state),
        Format::Table => classify_report_table(&state),
    };
    emit(&args.output, &report)?;
    Ok(ExitCode::from(if state.complete { 0 } else { 2 }))
}

fn record_json(r: &PerfectFormRecord) -> serde_json::Value {
    json!({
        "id": r.id,
        "gram": gram_strings(&r.form),
        "minimum": rational_str(&r.minimum),
        "min_count": r.min_full_count,
        "hermite_power": rational_str(&r.hermite.0),
        "aut_order": r.aut_order.to_string(),
        "extreme": r.extreme,
        "facet_orbits": r.facet_orbit_count,
        "neighbors": r.neighbors,
    })
}

fn classify_report_json(state: &ClassificationState) -> String {
    let maximizer = hermite_maximizer(state).map(|id| {
        json!({
            "id": id,
            "catalog": catalog_name(&state.records[id].form),
            "gram": gram_strings(&state.records[id].form),
        })
    });
    let report = json!({
        "version": REPORT_VERSION,
        "command": "classify",
        "dimension": state.dimension,
        "complete": state.complete,
        "perfect_count": state.records.len(),
        "extreme_count": state.records.iter().filter(|r| r.extreme).count(),
        "maximizer": maximizer,
        "classes": state.records.iter().map(record_json).collect::<Vec<_>>(),
        "contiguity": contiguity_report(state).edges,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}

fn classify_report_table(state: &ClassificationState) -> String {
    let extreme = state.records.iter().filter(|r| r.extreme).count();
    let maximizer = match hermite_maximizer(state) {
        Some(id) => catalog_name(&state.records[id].form).unwrap_or_else(|| format!("class {id}")),
        None => "-".into(),
    };
    let mut out = String::new();
    out.push_str("dimension  perfect  extreme  maximizer  complete\n");
    out.push_str(&format!(
        "{:>9}  {:>7}  {:>7}  {:>9}  {}\n",
        state.dimension,
        state.records.len(),
        extreme,
        maximizer,
        if state.complete { "yes" } else { "no" }
    ));
    out.push('\n');
    out.push_str("class  minimum  |Min|  aut order  extreme  facet orbits  gram (row-major)\n");
    for r in &state.records {
        let gram = gram_strings(&r.form)
            .into_iter()
            .map(|row| row.join(" "))
            .collect::<Vec<_>>()
            .join("; ");
        out.push_str(&format!(
            "{:>5}  {:>7}  {:>5}  {:>9}  {:>7}  {:>12}  {}\n",
            r.id,
            rational_str(&r.minimum),
            r.min_full_count,
            r.aut_order,
            if r.extreme { "yes" } else { "no" },
            r.facet_orbit_count.map_or("-".into(), |n| n.to_string()),
            gram
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// analyze / autgroup / isom
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let form = read_form(&args.form)?;
    form.ensure_positive_definite()?;
    let min = form.minimal_vectors()?;
    let perfect = form.is_perfect()?;
    let eutactic = form.is_eutactic()?;
    let aut = aut_group(&form)?;
    let det = form.det();
    let hermite = form.hermite_power()?;
    match args.format {
        Format::Json => {
            let report = json!({
                "version": REPORT_VERSION,
                "command": "analyze",
                "dimension": form.dim(),
                "minimum": rational_str(&min.minimum),
                "min_count": min.full_count(),
                "det": rational_str(&det),
                "hermite_power": rational_str(&hermite.0),
                "perfect": perfect,
                "eutactic": eutactic,
                "extreme": perfect && eutactic,
                "aut_order": aut.order.to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Format::Table => {
            println!("dimension      {}", form.dim());
            println!("minimum        {}", rational_str(&min.minimum));
            println!("|Min|          {}", min.full_count());
            println!("det            {}", rational_str(&det));
            println!("hermite^d      {}", rational_str(&hermite.0));
            println!("perfect        {}", perfect);
            println!("eutactic       {}", eutactic);
            println!("extreme        {}", perfect && eutactic);
            println!("aut order      {}", aut.order);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_autgroup(args: AutgroupArgs) -> Result<ExitCode> {
    let form = read_form(&args.form)?;
    let aut = aut_group(&form)?;
    let modulo = aut.class_action.order();
    match args.format {
        Format::Json => {
            let report = json!({
                "version": REPORT_VERSION,
                "command": "autgroup",
                "order": aut.order.to_string(),
                "order_mod_minus_identity": modulo.to_string(),
                "generators": aut.matrix_generators.len(),
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Format::Table => {
            println!("order                {}", aut.order);
            println!("order modulo -I      {modulo}");
            println!("matrix generators    {}", aut.matrix_generators.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_isom(args: IsomArgs) -> Result<ExitCode> {
    let a = read_form(&args.form_a)?;
    let b = read_form(&args.form_b)?;
    let witness = arithmetic_equivalence(&a, &b)?;
    match args.format {
        Format::Json => {
            let transporter = witness.as_ref().map(|p| {
                (0..p.rows())
                    .map(|i| (0..p.cols()).map(|j| rational_str(&p[(i, j)])).collect::<Vec<_>>())
                    .collect::<Vec<_>>()
            });
            let report = json!({
                "version": REPORT_VERSION,
                "command": "isom",
                "equivalent": witness.is_some(),
                "transporter": transporter,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Format::Table => match &witness {
            Some(p) => {
                println!("equivalent: B = P^T A P with P =");
                for i in 0..p.rows() {
                    let row: Vec<String> = (0..p.cols()).map(|j| rational_str(&p[(i, j)])).collect();
                    println!("{}", row.join(" "));
                }
            }
            None => println!("not equivalent"),
        },
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// facets / flip / dual-desc
// ---------------------------------------------------------------------------

fn cmd_facets(args: FacetsArgs) -> Result<ExitCode> {
    let form = read_form(&args.form)?;
    let mut bank = Bank::new();
    let mut stats = AdmStats::default();
    let fo = facet_orbits(&form, &AdmPolicy::default(), &mut bank, &mut stats)?;
    let total: u128 = fo.orbits.iter().map(|o| o.orbit_size).sum();
    match args.format {
        Format::Json => {
            let orbits: Vec<_> = fo
                .orbits
                .iter()
                .enumerate()
                .map(|(k, o)| {
                    json!({
                        "index": k,
                        "incidence": o.incidence,
                        "orbit_size": o.orbit_size.to_string(),
                        "rays": o.representative.incidence,
                    })
                })
                .collect();
            let report = json!({
                "version": REPORT_VERSION,
                "command": "facets",
                "rays": fo.cone.ray_count(),
                "orbit_count": fo.orbits.len(),
                "facet_count": total.to_string(),
                "orbits": orbits,
            });
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Format::Table => {
            println!("rays {}, {} facet orbits, {} facets total", fo.cone.ray_count(), fo.orbits.len(), total);
            println!("orbit  incidence  orbit size");
            for (k, o) in fo.orbits.iter().enumerate() {
                println!("{:>5}  {:>9}  {:>10}", k, o.incidence, o.orbit_size);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_flip(args: FlipArgs) -> Result<ExitCode> {
    let form = read_form(&args.form)?;
    let mut bank = Bank::new();
    let mut stats = AdmStats::default();
    let fo = facet_orbits(&form, &AdmPolicy::default(), &mut bank, &mut stats)?;
    let Some(orbit) = fo.orbits.get(args.facet) else {
        return Err(Error::NotAFace);
    };
    let flipped = flip(&form, &fo.cone, &fo.min, &orbit.representative)?;
    print!("{}", format_form(&canonical_integer_form(&flipped)));
    Ok(ExitCode::SUCCESS)
}

fn cmd_dual_desc(args: DualDescArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.cone)?;
    let (kind, dim, rows) = parse_cone(&text)?;
    let cone = ConeV::from_rational_rays(dim, rows)?;
    let h = dual_description(&cone)?;
    match kind {
        // generators in: facets out
        'V' => print!("{}", format_cone_h(&h)),
        // inequalities in: the facets of the dual cone are the extreme rays
        _ => print!(
            "{}",
            format_cone_v(&ConeV::new(dim, h.facets().to_vec())?)
        ),
    }
    Ok(ExitCode::SUCCESS)
}
