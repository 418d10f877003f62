//! `fou`: simulate, estimate and test the non-ergodic fractional OU model from a TOML config.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fou_core::estimator::{estimate, EstimationRecord, Observation, Route};
use fou_core::exec::with_threads;
use fou_core::fbm::{FbmPath, FgnGenerator};
use fou_core::harness::io::{read_path_file, read_results_file, write_json};
use fou_core::harness::limits::{run_limit_tests, write_limit_outputs, LimitReport};
use fou_core::harness::mc::{replication_seed, run_mc, summarize, write_outputs, McSummary};
use fou_core::harness::{ExperimentSpec, RESULTS_FILE, SUMMARY_FILE};
use fou_core::process::{simulate_exact, steps_per_unit};
use fou_core::{Backend, FouError, Result};

#[derive(Parser, Debug)]
#[command(
    name = "fou",
    version,
    about = "Least-squares estimation for the fractional OU process with periodic mean"
)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed; overrides `mc.base_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; falls back to FOU_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the path of replication 0 and write it as CSV.
    Simulate,
    /// Estimate (mu, alpha) at every configured horizon.
    Estimate {
        /// Observed path with columns `t,X,...`; simulated from the config when absent.
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RouteArg::ClosedForm)]
        route: RouteArg,
    },
    /// Monte Carlo replications; writes results.csv and summary.json.
    Mc,
    /// Distributional tests on the results of a previous `mc` run.
    Limits,
    /// Recompute and print the summary of a previous `mc` run.
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RouteArg {
    ClosedForm,
    Matrix,
}

impl From<RouteArg> for Route {
    fn from(r: RouteArg) -> Self {
        match r {
            RouteArg::ClosedForm => Route::ClosedForm,
            RouteArg::Matrix => Route::MatrixSolve,
        }
    }
}

struct Context {
    spec: ExperimentSpec,
    out: PathBuf,
}

fn load(cli: &Cli) -> Result<Context> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| FouError::Usage("--config <path> is required".into()))?;
    let mut spec = ExperimentSpec::load(path)?;
    if let Some(seed) = cli.seed {
        spec.mc.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        spec.output.directory = out.clone();
    }
    let out = spec.output.directory.clone();
    Ok(Context { spec, out })
}

fn thread_count(cli: &Cli) -> Result<Option<usize>> {
    if cli.threads.is_some() {
        return Ok(cli.threads);
    }
    match std::env::var("FOU_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            FouError::Usage(format!("FOU_THREADS must be a positive integer, got `{v}`"))
        }),
        Err(_) => Ok(None),
    }
}

fn simulated_path(spec: &ExperimentSpec) -> Result<fou_core::process::ProcessPath> {
    let steps = spec.max_horizon() * spec.steps_per_unit();
    let seed = replication_seed(spec, 0);
    let bh = if spec.mc.zero_noise {
        FbmPath::zero(spec.hurst(), steps, spec.grid.dt)
    } else {
        FgnGenerator::new(spec.hurst(), steps, spec.grid.dt)?.path(seed)
    };
    simulate_exact(&spec.drift()?, spec.model.alpha, &bh)
}

fn simulate(ctx: &Context) -> Result<()> {
    fs::create_dir_all(&ctx.out)?;
    ctx.spec.echo_into(&ctx.out)?;
    let path = simulated_path(&ctx.spec)?;
    let file = ctx.out.join("path.csv");
    path.write_csv(BufWriter::new(File::create(&file)?))?;
    println!(
        "wrote {} ({} steps, seed {})",
        file.display(),
        path.steps(),
        path.bh.seed
    );
    Ok(())
}

fn estimate_cmd(ctx: &Context, path_file: Option<&Path>, route: Route) -> Result<()> {
    let spec = &ctx.spec;
    let (dt, x, seed) = match path_file {
        Some(p) => {
            let (dt, x) = read_path_file(p)?;
            (dt, x, None)
        }
        None => {
            let p = simulated_path(spec)?;
            (p.dt, p.x, Some(p.bh.seed))
        }
    };
    let spu = steps_per_unit(dt)?;
    let available = (x.len() - 1) / spu;
    let mut horizons: Vec<usize> = spec
        .horizons()
        .into_iter()
        .filter(|n| *n <= available)
        .collect();
    if horizons.is_empty() {
        horizons.push(available);
    }
    let drift = spec.drift()?;
    let records: Vec<EstimationRecord> = horizons
        .iter()
        .map(|&n| {
            let obs = Observation::new(&x[..=n * spu], dt)?;
            Ok(estimate(&obs, drift.basis(), spec.hurst(), route)?.record(seed))
        })
        .collect::<Result<_>>()?;
    fs::create_dir_all(&ctx.out)?;
    write_json(&records, &ctx.out.join("estimates.json"))?;
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(&records).expect("records serialize")
    );
    Ok(())
}

fn print_summary(s: &McSummary) {
    println!(
        "{:>4} {:>6} {:>14} {:>14}",
        "n", "count", "med|a-a_hat|", "med|mu-mu_hat|"
    );
    for h in &s.horizons {
        println!(
            "{:>4} {:>6} {:>14.4e} {:>14.4e}",
            h.n, h.estimates, h.median_abs_alpha_error, h.median_mu_error_sup
        );
    }
    if let Some(slope) = s.alpha_error_log_slope {
        println!(
            "log-median alpha error slope {slope:.4} (alpha = {})",
            s.alpha
        );
    }
    println!(
        "skipped {} ({:.2}%)",
        s.skipped.len(),
        100.0 * s.skip_fraction
    );
    if let Some(w) = &s.warning {
        eprintln!("warning: {w}");
    }
}

fn mc(ctx: &Context) -> Result<()> {
    let outcome = run_mc(&ctx.spec, Backend::Parallel)?;
    let summary = write_outputs(&ctx.spec, &outcome, &ctx.out)?;
    print_summary(&summary);
    println!("wrote {}", ctx.out.join(RESULTS_FILE).display());
    Ok(())
}

fn results(ctx: &Context) -> Result<Vec<fou_core::harness::HorizonRecord>> {
    let file = ctx.out.join(RESULTS_FILE);
    if !file.exists() {
        return Err(FouError::Usage(format!(
            "{} not found; run `fou mc` with the same --out first",
            file.display()
        )));
    }
    read_results_file(&file)
}

fn print_limits(r: &LimitReport) {
    let verdict = |pass: bool| if pass { "pass" } else { "reject" };
    println!("horizon {} with {} replications", r.horizon, r.replications);
    if let Some(c) = &r.alpha_limit {
        println!(
            "alpha limit: KS D = {:.4}, p = {:.4} ({}), {} draws",
            c.ks.statistic,
            c.ks.p_value,
            verdict(c.pass),
            c.draws
        );
    }
    if let Some(c) = &r.mu_limit {
        println!(
            "mu_{} limit: KS D = {:.4}, p = {:.4} ({})",
            c.component + 1,
            c.ks.statistic,
            c.ks.p_value,
            verdict(c.pass)
        );
    }
    for c in &r.shrinkage {
        println!(
            "mu_{} shrinkage: variances {:?} ({})",
            c.component + 1,
            c.variances,
            verdict(c.pass)
        );
    }
    if let Some(c) = &r.independence {
        println!(
            "independence: spearman {:.4}, 3 SE = {:.4} ({})",
            c.spearman,
            3.0 * c.standard_error,
            verdict(c.pass)
        );
    }
}

fn limits(ctx: &Context) -> Result<()> {
    let records = results(ctx)?;
    let (report, draws) = run_limit_tests(&ctx.spec, &records, Backend::Parallel)?;
    write_limit_outputs(&report, &draws, &ctx.out)?;
    print_limits(&report);
    Ok(())
}

fn report(ctx: &Context) -> Result<()> {
    let records = results(ctx)?;
    let previous: Option<McSummary> = fs::read_to_string(ctx.out.join(SUMMARY_FILE))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok());
    let skipped = previous.map(|s| s.skipped).unwrap_or_default();
    let summary = summarize(&ctx.spec, &records, skipped);
    write_json(&summary, &ctx.out.join(SUMMARY_FILE))?;
    print_summary(&summary);
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let ctx = load(cli)?;
    let threads = thread_count(cli)?;
    with_threads(threads, || match &cli.command {
        Command::Simulate => simulate(&ctx),
        Command::Estimate { path, route } => estimate_cmd(&ctx, path.as_deref(), (*route).into()),
        Command::Mc => mc(&ctx),
        Command::Limits => limits(&ctx),
        Command::Report => report(&ctx),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
