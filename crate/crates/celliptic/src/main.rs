//! Command-line front end: every library operation as a subcommand with
//! seeded, byte-reproducible JSON reports.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use celliptic::error::Error;
use celliptic::fine;
use celliptic::grid::{self, GridFunction};
use celliptic::measure::DiscreteMeasure;
use celliptic::nullspace;
use celliptic::operator::Operator;
use celliptic::projection;
use celliptic::region::Region;
use celliptic::symbol_analysis::{self, ClassifyParams};
use celliptic::synth;
use celliptic::zoo;
use celliptic::Result;

#[derive(Parser, Serialize)]
#[command(
    name = "celliptic",
    version,
    about = "Ellipticity classification, polynomial nullspaces, Riesz potentials and oscillation scans for constant-coefficient differential operators"
)]
struct Cli {
    /// Seed recorded in the report and used by every randomized suite.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
enum Command {
    /// Classify real and complex ellipticity of an operator.
    Classify(ClassifyArgs),
    /// Compute a polynomial nullspace basis per degree.
    Nullspace(NullspaceArgs),
    /// L2-project a grid function onto the nullspace over a region.
    Project(ProjectArgs),
    /// Evaluate a Riesz potential of a measure.
    Riesz(RieszArgs),
    /// Evaluate a fractional maximal function of a measure.
    Maximal(MaximalArgs),
    /// Dyadic oscillation/potential profile of a grid function.
    Profile(ProfileArgs),
    /// Scan points across a resolution ladder for the potential criterion.
    LebesgueScan(LebesgueScanArgs),
    /// Continuity-modulus probe (k = n, or k > n through derivatives).
    ContinuityCheck(ContinuityArgs),
    /// Local sup bound probe for k >= n.
    LinftyCheck(LinftyArgs),
    /// Sample an analytic prototype onto a grid file.
    Synth(SynthArgs),
}

#[derive(Args, Serialize)]
struct OperatorRef {
    /// Operator JSON path, or `zoo:<name>` (gradient, symmetric_gradient,
    /// tracefree_symmetric_gradient, hessian, laplacian_scalar,
    /// cauchy_riemann, d3).
    #[arg(long)]
    operator: String,
    /// Ambient dimension for zoo operators.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args, Serialize)]
struct ClassifyArgs {
    #[command(flatten)]
    operator: OperatorRef,
    #[arg(long, default_value_t = 8)]
    dmax: usize,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Refinement depth of the real unit-sphere scan.
    #[arg(long, default_value_t = 3)]
    grid_depth: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct NullspaceArgs {
    #[command(flatten)]
    operator: OperatorRef,
    #[arg(long, default_value_t = 8)]
    dmax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ProjectArgs {
    #[command(flatten)]
    operator: OperatorRef,
    #[arg(long)]
    grid: PathBuf,
    /// Region center, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    center: String,
    #[arg(long)]
    radius: f64,
    /// Inner fraction; 0 projects over a ball, (0, 1/2] over an annulus.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 8)]
    dmax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RieszArgs {
    /// Measure JSON: { "atoms": [{"x": [...], "w": [...]}], "density_ref": "u.grid" }.
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    s: f64,
    /// Base point, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    /// Restrict to the open ball of this radius first.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct MaximalArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    /// Explicit radii, comma-separated; overrides the geometric ladder.
    #[arg(long, allow_hyphen_values = true)]
    radii: Option<String>,
    #[arg(long, default_value_t = 2.0)]
    rmax: f64,
    #[arg(long, default_value_t = 8)]
    octaves: usize,
    #[arg(long, default_value_t = 8)]
    per_octave: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ProfileArgs {
    #[command(flatten)]
    operator: OperatorRef,
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 4)]
    jmax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct LebesgueScanArgs {
    #[command(flatten)]
    operator: OperatorRef,
    /// Resolution ladder; pass once per rung.
    #[arg(long = "grid", required = true)]
    grids: Vec<PathBuf>,
    /// Query point, comma-separated; repeatable.
    #[arg(long = "point", required = true, allow_hyphen_values = true)]
    points: Vec<String>,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 4)]
    jmax: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional CSV (x0, slope, osc_last, verdict) per point.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ContinuityArgs {
    #[command(flatten)]
    operator: OperatorRef,
    #[arg(long)]
    grid: PathBuf,
    #[arg(long = "point", required = true, allow_hyphen_values = true)]
    points: Vec<String>,
    #[arg(long)]
    r: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct LinftyArgs {
    #[command(flatten)]
    operator: OperatorRef,
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    center: String,
    #[arg(long)]
    radius: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SynthArgs {
    /// Prototype kind: smooth, indicator_halfplane, indicator_halfdisk,
    /// cone_abs, polynomial.
    #[arg(long)]
    kind: String,
    /// Kind-specific parameters as a JSON object.
    #[arg(long, default_value = "{}")]
    params: String,
    /// Lower box corner, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    lo: String,
    /// Upper box corner, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    hi: String,
    #[arg(long)]
    h: f64,
    /// Output grid path (binary plus `<path>.json` sidecar).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: serde_json::Value,
    result: T,
}

fn emit<T: Serialize>(
    seed: u64,
    config: serde_json::Value,
    result: T,
    out: &Option<PathBuf>,
) -> Result<()> {
    let report = Report {
        tool: "celliptic",
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
        result,
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidParameter(format!("bad number '{s}': {e}")))
        })
        .collect()
}

fn load_operator(reference: &OperatorRef) -> Result<Operator> {
    let op = if let Some(name) = reference.operator.strip_prefix("zoo:") {
        let n = reference
            .n
            .ok_or_else(|| Error::InvalidParameter("zoo operators need --n <dimension>".into()))?;
        zoo::by_name(name, n)?
    } else {
        let text = std::fs::read_to_string(&reference.operator)?;
        serde_json::from_str::<Operator>(&text)?
    };
    let report = op.validate();
    if !report.ok {
        return Err(Error::InvalidOperator(report.violations.join("; ")));
    }
    Ok(op)
}

#[derive(serde::Deserialize)]
struct MeasureFile {
    #[serde(default)]
    atoms: Vec<celliptic::measure::Atom>,
    #[serde(default)]
    density_ref: Option<PathBuf>,
}

fn load_measure(path: &PathBuf) -> Result<DiscreteMeasure> {
    let text = std::fs::read_to_string(path)?;
    let file: MeasureFile = serde_json::from_str(&text)?;
    let density = match file.density_ref {
        Some(ref rel) => {
            let resolved = match path.parent() {
                Some(dir) if rel.is_relative() => dir.join(rel),
                _ => rel.clone(),
            };
            Some(GridFunction::read_file(resolved)?)
        }
        None => None,
    };
    Ok(DiscreteMeasure {
        atoms: file.atoms,
        density,
    })
}

fn region_from(center: &str, radius: f64, lambda: f64) -> Result<Region> {
    let center = parse_vector(center)?;
    let region = if lambda > 0.0 {
        Region::annulus(center, radius, lambda)?
    } else {
        Region::ball(center, radius)?
    };
    Ok(region)
}

fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Classify(args) => {
            let op = load_operator(&args.operator)?;
            let params = ClassifyParams {
                d_max: args.dmax,
                restarts: args.restarts,
                tol: args.tol,
                seed,
                grid_depth: args.grid_depth,
            };
            let report = symbol_analysis::classify(&op, &params)?;
            emit(seed, serde_json::to_value(args)?, report, &args.out)
        }
        Command::Nullspace(args) => {
            let op = load_operator(&args.operator)?;
            let basis = nullspace::kernel_basis(&op, args.dmax)?;
            emit(seed, serde_json::to_value(args)?, basis, &args.out)
        }
        Command::Project(args) => {
            let op = load_operator(&args.operator)?;
            let u = GridFunction::read_file(&args.grid)?;
            let region = region_from(&args.center, args.radius, args.lambda)?;
            let basis = nullspace::kernel_basis(&op, args.dmax)?;
            let projected = projection::project_grid(&u, &basis, &region)?;
            emit(seed, serde_json::to_value(args)?, projected, &args.out)
        }
        Command::Riesz(args) => {
            let mu = load_measure(&args.measure)?;
            let x0 = parse_vector(&args.x0)?;
            let value = match args.radius {
                Some(r) => mu.riesz_potential_in_ball(args.s, &x0, r)?,
                None => mu.riesz_potential(args.s, &x0)?,
            };
            emit(seed, serde_json::to_value(args)?, value, &args.out)
        }
        Command::Maximal(args) => {
            let mu = load_measure(&args.measure)?;
            let x0 = parse_vector(&args.x0)?;
            let radii = match &args.radii {
                Some(text) => parse_vector(text)?,
                None => celliptic::measure::radius_ladder(args.rmax, args.octaves, args.per_octave),
            };
            let value = mu.fractional_maximal(args.k, &x0, &radii)?;
            #[derive(Serialize)]
            struct MaximalResult {
                maximal: f64,
                radii: Vec<f64>,
            }
            emit(
                seed,
                serde_json::to_value(args)?,
                MaximalResult {
                    maximal: value,
                    radii,
                },
                &args.out,
            )
        }
        Command::Profile(args) => {
            let op = load_operator(&args.operator)?;
            let u = GridFunction::read_file(&args.grid)?;
            let x0 = parse_vector(&args.x0)?;
            let profile = grid::dyadic_profile(&u, &op, &x0, args.r, args.jmax)?;
            emit(seed, serde_json::to_value(args)?, profile, &args.out)
        }
        Command::LebesgueScan(args) => {
            let op = load_operator(&args.operator)?;
            let ladder: Vec<GridFunction> = args
                .grids
                .iter()
                .map(GridFunction::read_file)
                .collect::<Result<_>>()?;
            let points: Vec<Vec<f64>> = args
                .points
                .iter()
                .map(|p| parse_vector(p))
                .collect::<Result<_>>()?;
            let verdicts = fine::lebesgue_scan(&op, &ladder, &points, args.r, args.jmax)?;
            if let Some(csv) = &args.csv {
                write_scan_csv(csv, &verdicts)?;
            }
            emit(seed, serde_json::to_value(args)?, verdicts, &args.out)
        }
        Command::ContinuityCheck(args) => {
            let op = load_operator(&args.operator)?;
            let u = GridFunction::read_file(&args.grid)?;
            let points: Vec<Vec<f64>> = args
                .points
                .iter()
                .map(|p| parse_vector(p))
                .collect::<Result<_>>()?;
            let rows = if op.order() == op.n() {
                fine::continuity_check(&op, &u, &points, args.r)?
            } else {
                fine::higher_continuity_check(&op, &u, &points, args.r)?
            };
            emit(seed, serde_json::to_value(args)?, rows, &args.out)
        }
        Command::LinftyCheck(args) => {
            let op = load_operator(&args.operator)?;
            let u = GridFunction::read_file(&args.grid)?;
            let ball = region_from(&args.center, args.radius, 0.0)?;
            let report = fine::sup_bound_check(&op, &u, &ball)?;
            emit(seed, serde_json::to_value(args)?, report, &args.out)
        }
        Command::Synth(args) => {
            let mut params: serde_json::Map<String, serde_json::Value> =
                serde_json::from_str(&args.params).map_err(|e| {
                    Error::InvalidParameter(format!("--params must be a JSON object: {e}"))
                })?;
            params.insert("kind".into(), serde_json::Value::String(args.kind.clone()));
            let kind: synth::TestFunctionKind =
                serde_json::from_value(serde_json::Value::Object(params))
                    .map_err(|e| Error::InvalidParameter(format!("bad synth parameters: {e}")))?;
            let lo = parse_vector(&args.lo)?;
            let hi = parse_vector(&args.hi)?;
            let g = synth::synthesize(&kind, &lo, &hi, args.h)?;
            g.write_file(&args.out)?;
            Ok(())
        }
    }
}

fn write_scan_csv(path: &PathBuf, verdicts: &[fine::PointVerdict]) -> Result<()> {
    let mut text = String::new();
    let n = verdicts.first().map(|v| v.x0.len()).unwrap_or(0);
    for i in 0..n {
        text.push_str(&format!("x0_{i},"));
    }
    text.push_str("slope,osc_last,verdict\n");
    for v in verdicts {
        for c in &v.x0 {
            text.push_str(&format!("{c},"));
        }
        let osc_last = v.osc_by_level.last().copied().unwrap_or(0.0);
        let verdict = match v.predicted {
            fine::Prediction::Lebesgue => "lebesgue",
            fine::Prediction::SigmaCandidate => "sigma_candidate",
            fine::Prediction::Undetermined => "undetermined",
        };
        text.push_str(&format!("{},{},{}\n", v.potential_trend, osc_last, verdict));
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn main() {
    if let Ok(threads) = std::env::var("CELLIPTIC_THREADS") {
        if let Ok(threads) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
