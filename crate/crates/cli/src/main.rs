use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod error;
mod jobs;
mod output;
mod reproduce;

use config::{default_out_root, ModelKind, Regime, RunConfig, Study, Target};
use error::CliError;

/// Spin squeezing of Λ atoms in a driven cavity: steady states, covariances,
/// spectra and model comparisons written as CSV.
#[derive(Parser)]
#[command(name = "spinsq", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean values at an operating point
    Steady(RunArgs),
    /// Input-output intensity curve and its turning points
    Bistability(RunArgs),
    /// Minimal and maximal spin variances
    Variance(RunArgs),
    /// Spectra of the transmitted field quadratures
    Spectrum(RunArgs),
    /// Split the spin noise into field and atomic sources
    Decompose(RunArgs),
    /// Search δc and I2 for the smallest spin variance
    Optimize(RunArgs),
    /// Squeezed-vacuum transfer onto the spin
    Transfer(RunArgs),
    /// Compare the three-level and two-level descriptions
    Validate(RunArgs),
    /// Run the job described by a config file (for example a manifest)
    Run(RunArgs),
    /// Regenerate the data behind a table or figure
    Reproduce {
        target: Target,
        /// Output directory [default: $SPINSQ_OUT/<target>]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat regime warnings as errors
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML file with the run configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    /// Study to run (only needed with `run` when the config does not name one)
    #[arg(long, value_enum)]
    study: Option<Study>,
    #[arg(long, value_enum)]
    regime: Option<Regime>,
    #[arg(long = "Ctilde")]
    ctilde: Option<f64>,
    #[arg(long = "delta-tilde", allow_hyphen_values = true)]
    delta_tilde: Option<f64>,
    #[arg(long = "delta-c", allow_hyphen_values = true)]
    delta_c: Option<f64>,
    #[arg(long = "I2")]
    i2: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Number of atoms
    #[arg(long = "N")]
    n: Option<f64>,
    /// Fraction of the ground-state relaxation pumped into level 1
    #[arg(long)]
    lambda1: Option<f64>,
    /// Γp/γ0
    #[arg(long)]
    gamma_p_ratio: Option<f64>,
    /// Ω2/Ω1 for the corrected model
    #[arg(long)]
    omega_ratio: Option<f64>,
    /// Squeezing parameter of the input vacuum (replaces the coherent probe)
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long)]
    omega_points: Option<usize>,
    #[arg(long)]
    delta_tilde_max: Option<f64>,
    #[arg(long)]
    min_margin: Option<f64>,
    /// Output directory [default: $SPINSQ_OUT/<study>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat regime warnings as errors
    #[arg(long)]
    strict: bool,
}

impl RunArgs {
    fn resolve(&self, study: Option<Study>) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(s) = study.or(self.study) {
            cfg.study = Some(s);
        }
        if let Some(m) = self.model {
            cfg.model = m;
        }
        if let Some(r) = self.regime {
            cfg.regime = r;
        }
        let p = &mut cfg.params;
        for (slot, v) in [
            (&mut p.ctilde, self.ctilde),
            (&mut p.delta_tilde, self.delta_tilde),
            (&mut p.delta_c, self.delta_c),
            (&mut p.i2, self.i2),
            (&mut p.rho, self.rho),
            (&mut p.n, self.n),
            (&mut p.lambda1, self.lambda1),
            (&mut p.gamma_p_ratio, self.gamma_p_ratio),
            (&mut p.omega_ratio, self.omega_ratio),
            (&mut p.r, self.r),
            (&mut p.theta, self.theta),
        ] {
            if v.is_some() {
                *slot = v;
            }
        }
        if let Some(w) = self.omega_max {
            cfg.grid.omega_max = w;
        }
        if let Some(n) = self.omega_points {
            cfg.grid.omega_points = n;
        }
        if let Some(d) = self.delta_tilde_max {
            cfg.grid.delta_tilde_max = d;
        }
        if let Some(m) = self.min_margin {
            cfg.tolerances.min_margin = m;
        }
        if cfg.study.is_none() && cfg.reproduce.is_none() {
            return Err(CliError::Config("no study given; pass --study or name one in the config".into()));
        }
        Ok(cfg)
    }
}

fn finish(cfg: &RunConfig, label: &str, out: PathBuf, strict: bool, outcome: jobs::Outcome) -> Result<(), CliError> {
    for w in &outcome.warnings {
        eprintln!("warning[regime]: {w}");
    }
    if strict && !outcome.warnings.is_empty() {
        return Err(CliError::Regime(format!("{} regime warning(s) with --strict", outcome.warnings.len())));
    }
    let hash = output::write_artifacts(&out, &cfg.to_manifest(), label, &outcome.tables)?;
    println!("{label}: wrote {} table(s) to {} (manifest {})", outcome.tables.len(), out.display(), &hash[..12]);
    Ok(())
}

fn execute(cfg: RunConfig, out: Option<PathBuf>, strict: bool) -> Result<(), CliError> {
    if let Some(target) = cfg.reproduce {
        let out = out.unwrap_or_else(|| default_out_root().join(target.name()));
        let outcome = reproduce::run(target)?;
        return finish(&cfg, target.name(), out, strict, outcome);
    }
    let study = cfg.study.expect("resolved configs name a study");
    let out = out.unwrap_or_else(|| default_out_root().join(study.name()));
    let outcome = jobs::run_study(&cfg, study)?;
    finish(&cfg, study.name(), out, strict, outcome)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (args, study) = match cli.command {
        Command::Reproduce { target, out, strict } => {
            let cfg = RunConfig {
                reproduce: Some(target),
                ..RunConfig::default()
            };
            return execute(cfg, out, strict);
        }
        Command::Steady(a) => (a, Some(Study::Steady)),
        Command::Bistability(a) => (a, Some(Study::Bistability)),
        Command::Variance(a) => (a, Some(Study::Variance)),
        Command::Spectrum(a) => (a, Some(Study::Spectrum)),
        Command::Decompose(a) => (a, Some(Study::Decompose)),
        Command::Optimize(a) => (a, Some(Study::Optimize)),
        Command::Transfer(a) => (a, Some(Study::Transfer)),
        Command::Validate(a) => (a, Some(Study::Validate)),
        Command::Run(a) => (a, None),
    };
    let cfg = args.resolve(study)?;
    execute(cfg, args.out.clone(), args.strict)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code())
        }
    }
}
