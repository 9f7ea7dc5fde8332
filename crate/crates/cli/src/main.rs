use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use paraexp::lab::{
    preset, run_bootstrap, run_convergence, run_density, run_price, write_csv_to, write_report, Experiment,
    ExperimentConfig, OracleKind, Report, SlopeFit, PRESET_NAMES,
};

#[derive(Parser)]
#[command(name = "paraexp", version, about = "Asymptotic expansions for parabolic Cauchy problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expansion prices against an oracle.
    Price(RunArgs),
    /// Approximate fundamental solution on an (x, y) lattice.
    Density(RunArgs),
    /// Error-rate sweep over horizons.
    Convergence(RunArgs),
    /// Error-rate sweep over bootstrap step counts.
    Bootstrap(RunArgs),
    /// List the built-in models.
    ListPresets,
    /// Parse and validate a configuration without running it.
    ValidateConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination with a JSON sidecar next to it; standard output when
    /// neither this nor `output.path` is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["fd", "mc", "exact"])]
    oracle: Option<String>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let config_error = err
                .chain()
                .any(|cause| matches!(cause.downcast_ref::<paraexp::Error>(), Some(paraexp::Error::Config(_))));
            ExitCode::from(if config_error { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::ListPresets => {
            for name in PRESET_NAMES {
                let p = preset(name)?;
                let payoffs: Vec<&str> = p.payoffs.iter().map(|(n, _)| *n).collect();
                println!("{name}\td={}\t{}\tpayoffs: {}", p.field.dim(), p.description, payoffs.join(", "));
            }
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let exp = load(&config, None, None)?;
            for w in &exp.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}: ok", config.display());
            Ok(())
        }
        Command::Price(args) => execute("price", &args, |e| Ok(Output::Price(run_price(e)?))),
        Command::Density(args) => execute("density", &args, |e| Ok(Output::Density(run_density(e)?))),
        Command::Convergence(args) => {
            execute("convergence", &args, |e| Ok(Output::Convergence(run_convergence(e)?)))
        }
        Command::Bootstrap(args) => execute("bootstrap", &args, |e| Ok(Output::Bootstrap(run_bootstrap(e)?))),
    }
}

enum Output {
    Price(Report<paraexp::lab::PriceRow>),
    Density(Report<paraexp::lab::DensityRow>),
    Convergence(Report<paraexp::lab::ConvergenceRow>),
    Bootstrap(Report<paraexp::lab::BootstrapRow>),
}

macro_rules! each {
    ($out:expr, $r:ident => $body:expr) => {
        match $out {
            Output::Price($r) => $body,
            Output::Density($r) => $body,
            Output::Convergence($r) => $body,
            Output::Bootstrap($r) => $body,
        }
    };
}

impl Output {
    fn fits(&self) -> &[SlopeFit] {
        each!(self, r => &r.fits)
    }
}

fn load(path: &Path, seed: Option<u64>, oracle: Option<&str>) -> Result<Experiment> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        config.output.seed = seed;
    }
    if let Some(kind) = oracle {
        config.oracle.kind = kind.parse::<OracleKind>()?;
    }
    Ok(config.build()?)
}

fn execute<F>(command: &str, args: &RunArgs, run: F) -> Result<()>
where
    F: FnOnce(&Experiment) -> paraexp::Result<Output>,
{
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    let exp = load(&args.config, args.seed, args.oracle.as_deref())?;
    if !args.quiet {
        for w in &exp.warnings {
            eprintln!("warning: {w}");
        }
    }
    let output = run(&exp).with_context(|| format!("{command} run failed"))?;
    match args.out.clone().or_else(|| exp.config.output.path.clone().map(PathBuf::from)) {
        Some(path) => {
            let side = each!(&output, r => write_report(command, &exp.config, r, &path))?;
            if !args.quiet {
                eprintln!("wrote {} and {}", path.display(), side.display());
            }
        }
        None => each!(&output, r => write_csv_to(&r.rows, io::stdout().lock()))?,
    }
    if !args.quiet {
        for fit in output.fits() {
            match fit.slope {
                Some(s) => eprintln!(
                    "N = {} at x = {}: slope {s:.3} (expected ≥ {:.2} − tolerance, residual {:.3})",
                    fit.order,
                    fit.x,
                    fit.expected,
                    fit.residual.unwrap_or(0.0)
                ),
                None => eprintln!("N = {} at x = {}: no fit (errors at the oracle floor)", fit.order, fit.x),
            }
        }
    }
    Ok(())
}
