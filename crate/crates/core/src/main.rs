use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use savskit::cd::{
    adaptive_penalties, coordinate_descent, early_stop_report, CdMode, CdOptions, DEFAULT_MAX_ITER,
    DEFAULT_REL_TOL,
};
use savskit::data::{
    column_sq_norms, load_csv, read_matrix, read_support, read_vector, write_column,
    write_matrix_with_header, write_text, RegressionData, TruthSpec,
};
use savskit::horseshoe::{gibbs_fit, McmcConfig};
use savskit::manifest::RunManifest;
use savskit::metrics::classify_supports;
use savskit::report::{self, BETA_MEAN_FILE, EXAMPLE_DIR, REPLICATES_FILE, TRACE_FILE, TRUTH_FILE};
use savskit::rng::sub_seed;
use savskit::savs::{savs, DEFAULT_KAPPA};
use savskit::sim::{run_replicates_with, BenchConfig, Profile, RunOptions, TABLE_HEADER};
use savskit::{Error, Result};

const EXIT_HELP: &str = "\
Exit status:
  0  success
  2  usage error (unknown subcommand or flag, bad flag value)
  3  configuration or input schema violation
  4  missing input file
  5  data or numerical failure
  6  other I/O failure

Failures print one line to stderr:
  error kind=<kind> exit=<status> message=\"<text>\"

The model has no intercept; pass --center to `fit` to center y and X.";

#[derive(Parser, Debug)]
#[command(
    name = "savskit",
    version,
    about = "Horseshoe posterior means, SAVS variable selection and support-recovery benchmarks",
    after_help = EXIT_HELP
)]
struct Cli {
    /// Random seed (MCMC seed for `fit`, master seed for `bench`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory receiving all outputs and the run manifest.
    #[arg(long, global = true, default_value = "savskit-out")]
    out_dir: PathBuf,
    /// TOML configuration file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the horseshoe regression by Gibbs sampling and write the posterior mean.
    Fit(FitArgs),
    /// Sparsify a point estimate with SAVS.
    Select(SelectArgs),
    /// Solve the adaptive-lasso problem around a point estimate by coordinate descent.
    Cd(CdArgs),
    /// Run a simulation cell and write its summary row and per-replicate log.
    Bench(BenchArgs),
    /// Score an estimated support against the true coefficients.
    Metrics(MetricsArgs),
    /// Export plot-ready CSVs from bench result directories.
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Design matrix CSV, one row per observation.
    #[arg(long)]
    x: PathBuf,
    /// Response CSV, one value per line.
    #[arg(long)]
    y: PathBuf,
    /// Center y and the columns of X before fitting.
    #[arg(long)]
    center: bool,
    #[arg(long)]
    n_iter: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    /// Also write the retained draws as draws.csv.
    #[arg(long)]
    retain_draws: bool,
}

#[derive(Args, Debug)]
struct SelectArgs {
    /// Point estimate CSV, one value per line.
    #[arg(long)]
    beta: PathBuf,
    /// Design matrix CSV (used for its squared column norms).
    #[arg(long, required_unless_present = "norms", conflicts_with = "norms")]
    design: Option<PathBuf>,
    /// Precomputed squared column norms, one per line.
    #[arg(long)]
    norms: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
}

#[derive(Args, Debug)]
struct CdArgs {
    #[arg(long)]
    beta: PathBuf,
    #[arg(long)]
    design: PathBuf,
    /// gauss_seidel or jacobi.
    #[arg(long, default_value = "gauss_seidel")]
    mode: CdMode,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Penalty file (one value per line) or `savs` for 1/|beta_hat_j|^kappa.
    #[arg(long, default_value = "savs")]
    mu: String,
    /// Exponent used when --mu is `savs`.
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    /// Start from zero instead of the point estimate.
    #[arg(long)]
    zero_init: bool,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// desk (50 replicates) or full (1000); overrides `replicates` in the config.
    #[arg(long)]
    profile: Option<Profile>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long, env = "SAVSKIT_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Log failed replicates and aggregate the rest.
    #[arg(long)]
    skip_failures: bool,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Support listing with an `index` column, or a coefficient vector whose
    /// nonzeros are the support.
    #[arg(long)]
    support: PathBuf,
    /// True coefficient CSV, one value per line.
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Bench output directory; repeat for several cells.
    #[arg(long = "results", required = true)]
    results: Vec<PathBuf>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Schema { .. } | Error::NonNumeric { .. } | Error::Ragged { .. } => 3,
        Error::Csv { .. } | Error::Empty(_) => 3,
        Error::MissingInput(_) => 4,
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 4,
        Error::Io { .. } => 6,
        Error::Replicate { source, .. } | Error::Sweep { source, .. } => exit_code(source),
        _ => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = exit_code(&e);
            let msg = serde_json::to_string(&e.to_string()).unwrap_or_default();
            eprintln!("error kind={} exit={code} message={msg}", e.kind());
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    fs::create_dir_all(&cli.out_dir).map_err(|e| Error::Io {
        path: cli.out_dir.clone(),
        source: e,
    })?;
    match &cli.command {
        Command::Fit(a) => fit(cli, a),
        Command::Select(a) => select(cli, a),
        Command::Cd(a) => cd(cli, a),
        Command::Bench(a) => bench(cli, a),
        Command::Metrics(a) => metrics(cli, a),
        Command::Report(a) => run_report(cli, a),
    }
}

fn require(path: &Path) -> Result<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::MissingInput(path.display().to_string()))
    }
}

fn read_config<T: for<'de> Deserialize<'de> + Default>(path: Option<&PathBuf>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(require(path)?).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| Error::Schema {
        path: path.clone(),
        detail: e.message().to_string(),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("cannot serialize output: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FitFile {
    mcmc: McmcConfig,
}

#[derive(Serialize)]
struct FitResolved<'a> {
    x: &'a Path,
    y: &'a Path,
    center: bool,
    mcmc: &'a McmcConfig,
}

#[derive(Serialize)]
struct FitSummary<'a> {
    n: usize,
    p: usize,
    retained_draws: usize,
    sigma_mean: f64,
    clamp_events: u64,
    standardization: &'a savskit::data::Standardization,
}

fn fit(cli: &Cli, a: &FitArgs) -> Result<()> {
    let mut mcmc = read_config::<FitFile>(cli.config.as_ref())?.mcmc;
    if let Some(v) = a.n_iter {
        mcmc.n_iter = v;
    }
    if let Some(v) = a.burn_in {
        mcmc.burn_in = v;
    }
    if let Some(v) = a.thin {
        mcmc.thin = v;
    }
    if let Some(v) = cli.seed {
        mcmc.seed = v;
    }
    mcmc.retain_draws |= a.retain_draws;
    mcmc.validate()?;

    let resolved = FitResolved {
        x: &a.x,
        y: &a.y,
        center: a.center,
        mcmc: &mcmc,
    };
    let mut manifest = RunManifest::start("fit", &resolved, vec![a.x.clone(), a.y.clone()])?;
    manifest.seeds.push(mcmc.seed);
    let data = load_csv(require(&a.x)?, require(&a.y)?, a.center)?;
    let post = gibbs_fit(&data, &mcmc)?;

    let out = &cli.out_dir;
    let path = out.join("beta_mean.csv");
    write_column(&path, "beta_mean", &post.beta_mean)?;
    manifest.output(out, &path);
    if let Some(draws) = &post.draws {
        let path = out.join("draws.csv");
        write_matrix_with_header(&path, "beta_", draws)?;
        manifest.output(out, &path);
    }
    let mut trace = String::from("sweep,tau_sq,sigma_sq\n");
    for row in &post.trace {
        trace.push_str(&format!("{},{},{}\n", row.sweep, row.tau_sq, row.sigma_sq));
    }
    let path = out.join("trace.csv");
    write_text(&path, &trace)?;
    manifest.output(out, &path);
    let summary = FitSummary {
        n: data.n(),
        p: data.p(),
        retained_draws: mcmc.retained(),
        sigma_mean: post.sigma_mean,
        clamp_events: post.clamp_events,
        standardization: data.standardization(),
    };
    let path = out.join("fit_summary.json");
    write_json(&path, &summary)?;
    manifest.output(out, &path);
    manifest.finish(out)?;
    Ok(())
}

fn design_norms(path: &Path) -> Result<DVector<f64>> {
    column_sq_norms(&read_matrix(require(path)?)?)
}

fn select(cli: &Cli, a: &SelectArgs) -> Result<()> {
    let beta_hat = read_vector(require(&a.beta)?)?;
    let (norms, norm_source) = match (&a.design, &a.norms) {
        (Some(d), _) => (design_norms(d)?, d.clone()),
        (None, Some(n)) => (read_vector(require(n)?)?, n.clone()),
        (None, None) => return Err(Error::MissingInput("--design or --norms".into())),
    };
    let resolved = serde_json::json!({
        "beta": a.beta,
        "norms_from": norm_source,
        "kappa": a.kappa,
    });
    let mut manifest = RunManifest::start("select", &resolved, vec![a.beta.clone(), norm_source])?;
    let est = savs(&beta_hat, &norms, a.kappa)?;

    let out = &cli.out_dir;
    let path = out.join("beta_star.csv");
    write_column(&path, "beta_star", &est.beta_star)?;
    manifest.output(out, &path);
    let mut listing = String::from("index,beta_hat,mu,beta_star\n");
    for &j in &est.support {
        listing.push_str(&format!("{j},{},{},{}\n", beta_hat[j], est.mu[j], est.beta_star[j]));
    }
    let path = out.join("support.csv");
    write_text(&path, &listing)?;
    manifest.output(out, &path);
    manifest.finish(out)?;
    Ok(())
}

#[derive(Serialize)]
struct CdSummary {
    mode: CdMode,
    iterations_run: usize,
    converged: bool,
    initial_objective: f64,
    final_objective: f64,
}

fn cd(cli: &Cli, a: &CdArgs) -> Result<()> {
    let beta_hat = read_vector(require(&a.beta)?)?;
    let x = read_matrix(require(&a.design)?)?;
    // The objective involves X only; the response slot is filled with zeros.
    let n = x.nrows();
    let data = RegressionData::new(x, DVector::zeros(n))?;
    let mut inputs = vec![a.beta.clone(), a.design.clone()];
    let mu = if a.mu == "savs" {
        adaptive_penalties(&beta_hat, a.kappa)
    } else {
        let path = PathBuf::from(&a.mu);
        inputs.push(path.clone());
        read_vector(require(&path)?)?
    };
    let opts = CdOptions {
        mode: a.mode,
        max_iter: a.max_iter,
        rel_tol: a.rel_tol,
    };
    let resolved = serde_json::json!({
        "beta": a.beta,
        "design": a.design,
        "mu": a.mu,
        "kappa": a.kappa,
        "init": if a.zero_init { "zero" } else { "beta_hat" },
        "options": opts,
    });
    let mut manifest = RunManifest::start("cd", &resolved, inputs)?;
    let init = if a.zero_init {
        DVector::zeros(beta_hat.len())
    } else {
        beta_hat.clone()
    };
    let trace = coordinate_descent(&beta_hat, &data, &mu, &init, &opts)?;

    let out = &cli.out_dir;
    let path = out.join("solution.csv");
    write_column(&path, "beta", &trace.solution)?;
    manifest.output(out, &path);
    let mut text = String::from("pass,objective\n");
    text.push_str(&format!("0,{}\n", trace.initial_objective));
    for (i, q) in trace.objective_per_iteration.iter().enumerate() {
        text.push_str(&format!("{},{q}\n", i + 1));
    }
    let path = out.join("trace.csv");
    write_text(&path, &text)?;
    manifest.output(out, &path);
    let summary = CdSummary {
        mode: trace.mode,
        iterations_run: trace.iterations_run,
        converged: trace.converged,
        initial_objective: trace.initial_objective,
        final_objective: *trace
            .objective_per_iteration
            .last()
            .unwrap_or(&trace.initial_objective),
    };
    let path = out.join("cd_summary.json");
    write_json(&path, &summary)?;
    manifest.output(out, &path);
    manifest.finish(out)?;
    Ok(())
}

struct ExampleFit {
    beta_mean: DVector<f64>,
    truth: DVector<f64>,
    beta_star: DVector<f64>,
    trace: Result<Vec<(usize, f64)>>,
}

fn bench(cli: &Cli, a: &BenchArgs) -> Result<()> {
    let Some(config_path) = &cli.config else {
        return Err(Error::MissingInput("bench needs --config".into()));
    };
    let text = fs::read_to_string(require(config_path)?).map_err(|e| Error::Io {
        path: config_path.clone(),
        source: e,
    })?;
    let mut config: BenchConfig = toml::from_str(&text).map_err(|e| Error::Schema {
        path: config_path.clone(),
        detail: e.message().to_string(),
    })?;
    if let Some(p) = a.profile {
        config.replicates = p.replicates();
    }
    if let Some(r) = a.replicates {
        config.replicates = r;
    }
    if let Some(s) = cli.seed {
        config.master_seed = s;
    }
    config.validate()?;

    let mut manifest = RunManifest::start("bench", &config, vec![config_path.clone()])?;
    manifest.seeds.push(config.master_seed);
    manifest
        .seeds
        .extend((0..config.replicates as u64).map(|r| sub_seed(config.master_seed, r)));
    let opts = RunOptions {
        workers: a.workers,
        skip_failures: a.skip_failures,
    };
    let (bench, mut examples) = run_replicates_with(&config, &opts, false, |o| {
        (o.replicate == 0).then(|| ExampleFit {
            beta_mean: o.posterior.beta_mean.clone(),
            truth: o.truth.beta0().clone(),
            beta_star: o.estimate.beta_star.clone(),
            trace: early_stop_report(&o.posterior.beta_mean, &o.data).map(|r| r.rows()),
        })
    })?;

    let out = &cli.out_dir;
    let path = out.join("table.csv");
    write_text(&path, &format!("{TABLE_HEADER}\n{}\n", bench.table_row()))?;
    manifest.output(out, &path);

    let mut log = String::new();
    for rec in &bench.records {
        log.push_str(&serde_json::to_string(rec).map_err(|e| Error::Config(e.to_string()))?);
        log.push('\n');
    }
    let path = out.join(REPLICATES_FILE);
    write_text(&path, &log)?;
    manifest.output(out, &path);

    let mut failures = String::new();
    for f in &bench.failures {
        failures.push_str(&serde_json::to_string(f).map_err(|e| Error::Config(e.to_string()))?);
        failures.push('\n');
    }
    let path = out.join("failures.jsonl");
    write_text(&path, &failures)?;
    manifest.output(out, &path);

    let path = out.join("summary.json");
    write_json(&path, &bench.summary)?;
    manifest.output(out, &path);

    if let Some(ex) = examples.iter_mut().find_map(|(_, e)| e.take()) {
        let dir = out.join(EXAMPLE_DIR);
        fs::create_dir_all(&dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let path = dir.join(BETA_MEAN_FILE);
        write_column(&path, "beta_mean", &ex.beta_mean)?;
        manifest.output(out, &path);
        let path = dir.join(TRUTH_FILE);
        write_column(&path, "beta0", &ex.truth)?;
        manifest.output(out, &path);
        let path = dir.join("beta_star.csv");
        write_column(&path, "beta_star", &ex.beta_star)?;
        manifest.output(out, &path);
        let mut text = String::from("pass,objective\n");
        for (pass, q) in ex.trace? {
            text.push_str(&format!("{pass},{q}\n"));
        }
        let path = dir.join(TRACE_FILE);
        write_text(&path, &text)?;
        manifest.output(out, &path);
    }
    manifest.finish(out)?;
    Ok(())
}

fn metrics(cli: &Cli, a: &MetricsArgs) -> Result<()> {
    let truth = TruthSpec::new(read_vector(require(&a.truth)?)?);
    let support = read_support(require(&a.support)?, truth.p())?;
    let resolved = serde_json::json!({ "support": a.support, "truth": a.truth });
    let mut manifest = RunManifest::start("metrics", &resolved, vec![a.support.clone(), a.truth.clone()])?;
    let m = classify_supports(&support, truth.support(), truth.p())?;

    let out = &cli.out_dir;
    let path = out.join("metrics.json");
    write_json(&path, &m)?;
    manifest.output(out, &path);
    let csv = format!(
        "tp,tn,fp,fn,mcc,tpr,tnr,exact_model\n{},{},{},{},{},{},{},{}\n",
        m.tp, m.tn, m.fp, m.fn_, m.mcc, m.tpr, m.tnr, m.exact_model
    );
    let path = out.join("metrics.csv");
    write_text(&path, &csv)?;
    manifest.output(out, &path);
    manifest.finish(out)?;
    Ok(())
}

fn run_report(cli: &Cli, a: &ReportArgs) -> Result<()> {
    let resolved = serde_json::json!({ "results": a.results });
    let mut manifest = RunManifest::start("report", &resolved, a.results.clone())?;
    let bundle = report::report(&a.results, &cli.out_dir)?;
    for f in &bundle.files {
        manifest.output(&cli.out_dir, f);
    }
    manifest.finish(&cli.out_dir)?;
    Ok(())
}
