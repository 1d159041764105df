//! `mthin`: simulate, evaluate, estimate, fit and test thinned point processes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use matern_thin::analytic::{self, AnalyticOptions};
use matern_thin::estimate::{self, Bandwidth, EdgeCorrection, EstimatorConfig};
use matern_thin::infer::{self, ContrastDomain, DeviationTestSpec, FitProblem, Reference, RetainedMarks};
use matern_thin::io::{self, RunManifest, TableHeader};
use matern_thin::model::table::{uniform_grid, Statistic};
use matern_thin::simulate::{self, Halo, SimConfig};
use matern_thin::{Error, Exec, ModelSpec, Window};

#[derive(Parser, Debug, Serialize)]
#[command(name = "mthin", version, about = "Generalized Matérn thinning: simulation, exact characteristics, estimation and fitting")]
struct Cli {
    /// Master seed; all random streams derive from it.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Print errors as JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    /// Where to write the run manifest (default: next to the main output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Free-text unit label recorded in the manifest.
    #[arg(long, global = true)]
    units: Option<String>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Simulate the thinned process in a window.
    Simulate(SimulateArgs),
    /// Exact intensity, pcf, K, L or retained-mark density of a model.
    Analytic(AnalyticArgs),
    /// Summary statistics of a pattern.
    Estimate(EstimateArgs),
    /// Minimum-contrast fit of a family to a pattern.
    Fit(FitArgs),
    /// Monte-Carlo deviation test of a model against a pattern.
    Devtest(DevtestArgs),
    /// Check model, family, window or pattern files.
    Validate(ValidateArgs),
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    window: PathBuf,
    /// Output CSV; the window goes to `<stem>.window.json`.
    #[arg(long)]
    out: PathBuf,
    /// Number of replicates; more than one writes `<stem>_<i>.csv`.
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Index of the first replicate.
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    /// Halo width around the window (default: the interaction range).
    #[arg(long)]
    halo: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    /// Largest distance of the grid.
    #[arg(long)]
    r_max: Option<f64>,
    /// Grid points.
    #[arg(long, default_value_t = 128)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
struct AnalyticArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_parser = parse_stat)]
    stat: Statistic,
    #[command(flatten)]
    grid: GridArgs,
    /// Output CSV (JSON for the intensity).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Edge {
    Translation,
    Border,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[arg(long)]
    pattern: PathBuf,
    /// Window file (default: the pattern's sidecar).
    #[arg(long)]
    window: Option<PathBuf>,
    #[arg(long, value_parser = parse_stat)]
    stat: Statistic,
    #[command(flatten)]
    grid: GridArgs,
    /// Kernel half-width (default: rule of thumb).
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, value_enum, default_value_t = Edge::Translation)]
    edge: Edge,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long)]
    window: Option<PathBuf>,
    /// Family document: `{"model": {...}, "free": [{"path", "lower", "upper"}]}`.
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long, default_value_t = 256)]
    grid: usize,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RefArg {
    Auto,
    Analytic,
    SimulatedMean,
}

#[derive(Args, Debug, Serialize)]
struct DevtestArgs {
    #[arg(long)]
    pattern: PathBuf,
    #[arg(long)]
    window: Option<PathBuf>,
    /// Model document, or the output of `fit`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_parser = parse_stat)]
    stat: Statistic,
    #[arg(long, default_value_t = 99)]
    k: usize,
    #[arg(long)]
    r_max: f64,
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, value_enum, default_value_t = RefArg::Auto)]
    reference: RefArg,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    family: Option<PathBuf>,
    #[arg(long)]
    window: Option<PathBuf>,
    #[arg(long)]
    pattern: Option<PathBuf>,
}

fn parse_stat(s: &str) -> Result<Statistic, String> {
    Statistic::parse(s).ok_or_else(|| format!("unknown statistic `{s}` (pcf, K, L, G, F, intensity, mark-pdf)"))
}

/// What a subcommand produced.
struct Outcome {
    outputs: Vec<PathBuf>,
    /// A non-fatal condition that still sets the exit code.
    soft_error: Option<Error>,
}

impl Outcome {
    fn files(outputs: Vec<PathBuf>) -> Self {
        Self {
            outputs,
            soft_error: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = matern_thin::par::set_threads(cli.threads) {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let start = Instant::now();
    let result = run(&cli).and_then(|outcome| {
        write_manifest(&cli, &outcome, start.elapsed().as_secs_f64())?;
        Ok(outcome)
    });
    match result {
        Ok(Outcome { soft_error: None, .. }) => ExitCode::SUCCESS,
        Ok(Outcome { soft_error: Some(e), .. }) | Err(e) => {
            report(&e, cli.json_errors);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(e: &Error, json: bool) {
    if !json {
        eprintln!("error: {e}");
        return;
    }
    let kind = match e {
        Error::Validation(_) => "validation",
        Error::UnknownFunction(_) => "unknown-function",
        Error::Arity(_) => "arity",
        Error::Divergent(_) => "divergent",
        Error::Numeric(_) => "numeric",
        Error::NotConverged(_) => "not-converged",
        Error::Parse { .. } => "parse",
        Error::Io { .. } => "io",
    };
    let mut v = json!({"error": kind, "message": e.to_string(), "exit_code": e.exit_code()});
    match e {
        Error::Validation(issues) => {
            v["issues"] = issues.iter().map(|i| json!({"path": i.path, "reason": i.reason})).collect();
        }
        Error::Parse { location, .. } => v["location"] = json!(location),
        Error::Io { path, .. } => v["path"] = json!(path),
        _ => {}
    }
    eprintln!("{v}");
}

fn write_manifest(cli: &Cli, outcome: &Outcome, secs: f64) -> matern_thin::Result<()> {
    let path = match (&cli.manifest, outcome.outputs.first()) {
        (Some(p), _) => p.clone(),
        (None, Some(out)) => {
            let mut s = out.clone().into_os_string();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        (None, None) => return Ok(()),
    };
    let config = serde_json::to_value(&cli.cmd).expect("arguments serialize");
    let name = config
        .as_object()
        .and_then(|o| o.keys().next().cloned())
        .unwrap_or_default();
    let mut m = RunManifest::new(std::env::args().collect(), name, config);
    m.seed = Some(cli.seed);
    m.units = cli.units.clone();
    m.wall_time_secs = secs;
    for out in &outcome.outputs {
        m.record_output(out)?;
    }
    m.write(&path)
}

fn run(cli: &Cli) -> matern_thin::Result<Outcome> {
    match &cli.cmd {
        Command::Simulate(a) => simulate_cmd(cli, a),
        Command::Analytic(a) => analytic_cmd(a),
        Command::Estimate(a) => estimate_cmd(cli, a),
        Command::Fit(a) => fit_cmd(cli, a),
        Command::Devtest(a) => devtest_cmd(cli, a),
        Command::Validate(a) => validate_cmd(a),
    }
}

fn load_pattern(pattern: &Path, window: &Option<PathBuf>) -> matern_thin::Result<matern_thin::PointPattern> {
    match window {
        Some(w) => io::read_pattern(pattern, w),
        None => io::read_pattern_with_sidecar(pattern),
    }
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs) -> matern_thin::Result<Outcome> {
    let spec = io::parse_model_spec(&a.model)?;
    let window: Window = io::read_json(&a.window)?;
    if a.replicates == 0 {
        return Err(Error::invalid("replicates", "must be ≥ 1"));
    }
    let halo = a.halo.map_or(Halo::Auto, Halo::Explicit);
    let cfg = SimConfig::new(cli.seed).replicate(a.replicate).with_halo(halo);
    let patterns = simulate::simulate_replicates(&spec, &window, &cfg, a.replicates, Exec::default())?;
    let mut outputs = Vec::new();
    for (i, p) in patterns.iter().enumerate() {
        let path = if a.replicates == 1 {
            a.out.clone()
        } else {
            let stem = a.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            a.out.with_file_name(format!("{stem}_{:04}.csv", a.replicate + i as u64))
        };
        io::write_pattern(p, &path)?;
        outputs.push(path.clone());
        outputs.push(io::window_sidecar(&path));
    }
    Ok(Outcome::files(outputs))
}

fn analytic_cmd(a: &AnalyticArgs) -> matern_thin::Result<Outcome> {
    let spec = io::parse_model_spec(&a.model)?;
    match a.stat {
        Statistic::Intensity => {
            let res = analytic::intensity(&spec)?;
            io::write_json(&a.out, &res)?;
            let soft_error = res
                .diagnostic
                .as_ref()
                .filter(|d| d.code == "divergent")
                .map(|d| Error::Divergent(d.message.clone()));
            Ok(Outcome {
                outputs: vec![a.out.clone()],
                soft_error,
            })
        }
        Statistic::MarkPdf => {
            match infer::radius_pdf_after_thinning(&spec, a.grid.n)? {
                RetainedMarks::Density(t) => io::write_summary_table(&t, &TableHeader::default(), &a.out)?,
                d @ RetainedMarks::Discrete { .. } => io::write_json(&a.out, &d)?,
            }
            Ok(Outcome::files(vec![a.out.clone()]))
        }
        stat => {
            let r_max = match a.grid.r_max {
                Some(r) => r,
                None => {
                    let range = spec.interaction_range();
                    if !range.is_finite() {
                        return Err(Error::invalid("r_max", "required when the interaction range is unbounded"));
                    }
                    3.0 * range
                }
            };
            let r = uniform_grid(r_max, a.grid.n);
            let t = analytic::summary_table(&spec, stat, &r, &AnalyticOptions::default())?;
            let header = TableHeader {
                seed: None,
                config: json!({"model": spec.to_json(), "r_max": r_max, "n": a.grid.n}),
            };
            io::write_summary_table(&t, &header, &a.out)?;
            Ok(Outcome::files(vec![a.out.clone()]))
        }
    }
}

fn estimate_cmd(cli: &Cli, a: &EstimateArgs) -> matern_thin::Result<Outcome> {
    let pattern = load_pattern(&a.pattern, &a.window)?;
    let table = if a.stat == Statistic::MarkPdf {
        let marks = pattern
            .marks()
            .ok_or_else(|| Error::invalid("pattern.marks", "mark density needs a marked pattern"))?;
        let lo = marks.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = marks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let h = a.bandwidth.unwrap_or(0.05 * (hi - lo).max(f64::MIN_POSITIVE));
        estimate::estimate_mark_pdf(&pattern, lo - h, hi + h, a.grid.n, h)?
    } else {
        let r_max = a
            .grid
            .r_max
            .unwrap_or(0.25 * pattern.window().min_side());
        let mut cfg = EstimatorConfig::new(r_max, a.grid.n).with_edge_correction(match a.edge {
            Edge::Translation => EdgeCorrection::Translation,
            Edge::Border => EdgeCorrection::Border,
        });
        cfg.exec = Exec::default();
        if let Some(h) = a.bandwidth {
            cfg = cfg.with_bandwidth(h);
        }
        estimate::estimate(&pattern, a.stat, &cfg)?
    };
    let header = TableHeader {
        seed: Some(cli.seed),
        config: serde_json::to_value(a).expect("arguments serialize"),
    };
    io::write_summary_table(&table, &header, &a.out)?;
    Ok(Outcome::files(vec![a.out.clone()]))
}

fn fit_cmd(cli: &Cli, a: &FitArgs) -> matern_thin::Result<Outcome> {
    let pattern = load_pattern(&a.pattern, &a.window)?;
    let family = io::parse_family(&a.family)?;
    let domain = ContrastDomain {
        r_min: a.rmin,
        r_max: a.rmax,
        bandwidth: a.bandwidth,
        grid: a.grid,
    };
    let problem = FitProblem::from_pattern(family.template()?, family.free.clone(), &pattern, &domain)?
        .with_constraint(family.constraint)
        .with_restarts(family.restarts);
    let fit = infer::fit_min_contrast(&problem, cli.seed)?;
    let report = json!({
        "spec": fit.spec,
        "contrast": fit.contrast,
        "params": fit.params,
        "lambda": fit.lambda,
        "lambda_hat": problem.lambda_hat,
        "residual": fit.residual,
        "converged": fit.converged,
        "restarts": fit.restarts,
        "diagnostic": fit.diagnostic,
        "domain": {"r_min": problem.r[0], "r_max": problem.r[problem.r.len() - 1], "grid": problem.r.len()},
    });
    io::write_json(&a.out, &report)?;
    let soft_error = (!fit.converged).then(|| Error::NotConverged(fit.diagnostic.clone().unwrap_or_default()));
    Ok(Outcome {
        outputs: vec![a.out.clone()],
        soft_error,
    })
}

/// A model document, or a fit report carrying one under `spec`.
fn load_model(path: &Path) -> matern_thin::Result<ModelSpec> {
    let v: Value = io::read_json(path)?;
    let doc = v.get("spec").cloned().unwrap_or(v);
    let origin = path.display().to_string();
    let doc: matern_thin::model::ModelSpecDoc = serde_json::from_value(doc).map_err(|e| Error::Parse {
        location: origin,
        reason: e.to_string(),
    })?;
    ModelSpec::from_doc(&doc)
}

fn devtest_cmd(cli: &Cli, a: &DevtestArgs) -> matern_thin::Result<Outcome> {
    let pattern = load_pattern(&a.pattern, &a.window)?;
    let model = load_model(&a.model)?;
    let mut spec = DeviationTestSpec::new(a.stat, a.r_max, cli.seed)
        .with_k(a.k)
        .with_reference(match a.reference {
            RefArg::Auto => Reference::Auto,
            RefArg::Analytic => Reference::Analytic,
            RefArg::SimulatedMean => Reference::SimulatedMean,
        });
    spec.n_points = a.n;
    if let Some(h) = a.bandwidth {
        spec.bandwidth = Bandwidth::Fixed(h);
    }
    let report = infer::deviation_test(&pattern, &model, &spec)?;
    io::write_json(&a.out, &report)?;
    Ok(Outcome::files(vec![a.out.clone()]))
}

fn validate_cmd(a: &ValidateArgs) -> matern_thin::Result<Outcome> {
    let mut checked = Vec::new();
    if let Some(p) = &a.model {
        io::parse_model_spec(p)?;
        checked.push(p.display().to_string());
    }
    if let Some(p) = &a.family {
        io::parse_family(p)?;
        checked.push(p.display().to_string());
    }
    if let Some(p) = &a.window {
        io::read_json::<Window>(p)?;
        checked.push(p.display().to_string());
    }
    if let Some(p) = &a.pattern {
        load_pattern(p, &a.window)?;
        checked.push(p.display().to_string());
    }
    if checked.is_empty() {
        return Err(Error::invalid("validate", "nothing to check; pass --model, --family, --window or --pattern"));
    }
    for c in checked {
        println!("ok: {c}");
    }
    Ok(Outcome::files(Vec::new()))
}
