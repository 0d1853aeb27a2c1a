//! Command-line front end: `generate`, `predict`, `powerlaw` and the three
//! experiments.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, PowerLawScheme, SizeConfiguration};
use crate::montecarlo::{
    run_experiment, ExperimentKind, ExperimentPlan, ExperimentReport, MonteCarloError,
};
use crate::rng::Seed;
use crate::sampler::{resolve_p, sample_constructive, sample_direct, Regime, SamplerError};
use crate::theory::{self, ConnectivityRegime, TheoryError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Params(#[from] SamplerError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    MonteCarlo(#[from] MonteCarloError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("unknown format {0:?} (expected json, csv or plot)")]
    UnknownFormat(String),
    #[error("report has no degree distribution to plot")]
    NothingToPlot,
}

/// Output rendering for experiment reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// The full report as JSON.
    Json,
    /// One row per trial: `trial,connected,isolated,L1,L2`.
    Csv,
    /// `k,empirical,theory` rows of the degree distribution.
    Plot,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "plot" => Ok(Format::Plot),
            _ => Err(CliError::UnknownFormat(s.to_string())),
        }
    }
}

pub fn render_report(report: &ExperimentReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut s = String::from("trial,connected,isolated,L1,L2\n");
            for r in &report.trial_records {
                writeln!(
                    s,
                    "{},{},{},{},{}",
                    r.trial,
                    u8::from(r.connected),
                    r.isolated,
                    r.l1,
                    r.l2
                )
                .expect("write to String");
            }
            Ok(s)
        }
        Format::Plot => {
            let dist = report
                .distributions
                .get("degree_hist")
                .ok_or(CliError::NothingToPlot)?;
            let theory = dist.theory.as_deref().unwrap_or(&[]);
            let mut s = String::from("k,empirical,theory\n");
            for (k, e) in dist.empirical.iter().enumerate() {
                let label = match dist.lumped_from {
                    Some(from) if k as u64 >= from => format!(">={from}"),
                    _ => k.to_string(),
                };
                let t = theory.get(k).map(|t| t.to_string()).unwrap_or_default();
                writeln!(s, "{label},{e},{t}").expect("write to String");
            }
            Ok(s)
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "supergraph",
    version,
    about = "Super-vertex random graphs G(N, K, p)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for experiments (default: all cores).
    #[arg(long, global = true, env = "SUPERGRAPH_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ConfigSource {
    /// JSON configuration file {"sizes": {"<i>": <k_i>, ...}}.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Inline configuration "sizeXcount,...", e.g. "1x500,2x250".
    #[arg(long, value_parser = parse_inline)]
    pub inline: Option<SizeConfiguration>,
}

fn parse_inline(s: &str) -> Result<SizeConfiguration, String> {
    SizeConfiguration::from_inline(s).map_err(|e| e.to_string())
}

impl ConfigSource {
    fn load(&self) -> Result<SizeConfiguration, CliError> {
        match (&self.inline, &self.config) {
            (Some(c), _) => Ok(c.clone()),
            (None, Some(path)) => Ok(std::fs::read_to_string(path)?.parse()?),
            (None, None) => unreachable!("clap enforces one source"),
        }
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub source: ConfigSource,
    /// How --c becomes p: raw (p = c), connectivity (p = (ln N + c)/N) or sparse (p = c/n).
    #[arg(long)]
    pub regime: Option<Regime>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    /// json (report), csv (one row per trial) or plot (degree distribution).
    #[arg(long, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum SamplerChoice {
    /// Bernoulli per super-vertex pair with geometric skipping.
    #[default]
    Direct,
    /// Collapse an underlying G(n, p).
    Constructive,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one graph and write its edge list.
    Generate {
        #[command(flatten)]
        source: ConfigSource,
        /// raw (p = c), connectivity (p = (ln N + c)/N) or sparse (p = c/n).
        #[arg(long, default_value = "raw")]
        regime: Regime,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SamplerChoice::Direct)]
        sampler: SamplerChoice,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form predictions as JSON: E[X] and Var[X] of the isolated count,
    /// the connectivity limit, the giant-component threshold and fraction, and
    /// the mixed Poisson degree pmf.
    Predict {
        #[command(flatten)]
        source: ConfigSource,
        #[arg(long, default_value = "sparse")]
        regime: Regime,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Connectivity threshold theorem: with p = (ln N + c)/N, P(connected)
    /// tends to exp(-exp(-c)) when u = 1 and to 1 when u > 1; the isolated
    /// count is asymptotically Poisson.
    Connectivity(ExperimentArgs),
    /// Giant-component phase transition theorem: with p = c/n, L1/N tends to
    /// rho, which is positive iff c * s2 > 1.
    Giant(ExperimentArgs),
    /// Degree distribution theorem: with p = c/n, Z_k/N tends to the mixed
    /// Poisson law sum_i mu_i P(Po(i c) = k).
    Degree(ExperimentArgs),
    /// Power-law size configuration (tail mass ~ k^-alpha), written as JSON
    /// for use with --config.
    Powerlaw {
        /// Number of super-vertices N.
        #[arg(long = "n-super")]
        n_super: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long = "max-size")]
        max_size: u64,
        /// density (mu_i ∝ i^-(alpha+1)) or tail (exact k^-alpha tails).
        #[arg(long, default_value = "density")]
        scheme: PowerLawScheme,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Output document of `predict`.
#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
pub struct Prediction {
    pub N: u64,
    pub n: u64,
    pub regime: Regime,
    pub c: f64,
    pub p: f64,
    pub E_isolated: f64,
    pub Var_isolated: f64,
    pub P_connected_limit: f64,
    pub c_star: f64,
    pub rho: f64,
    pub rho_by_size: BTreeMap<String, f64>,
    pub degree_pmf: Vec<f64>,
}

pub fn predict(config: &SizeConfiguration, regime: Regime, c: f64) -> Result<Prediction, CliError> {
    let params = resolve_p(regime, c, config)?;
    let (n_super, n_vertices) = config.derive_counts();
    let profile = config.empirical_profile();
    // each prediction uses its own parameterization of the same p
    let c_conn = params.p * n_super as f64 - (n_super as f64).ln();
    let c_sparse = params.p * n_vertices as f64;
    let giant = theory::solve_giant_fraction(
        &profile,
        c_sparse,
        theory::DEFAULT_TOLERANCE,
        theory::DEFAULT_MAX_ITER,
    )?;
    let k_max = theory::degree_truncation(&profile, c_sparse, crate::montecarlo::DEGREE_TAIL_EPS);
    Ok(Prediction {
        N: n_super,
        n: n_vertices,
        regime,
        c,
        p: params.p,
        E_isolated: theory::expected_isolated(config, params.p)?,
        Var_isolated: theory::variance_isolated(config, params.p)?,
        P_connected_limit: theory::limit_connectivity_probability(
            ConnectivityRegime::FixedC(c_conn),
            profile.u,
        )?,
        c_star: theory::critical_threshold(&profile),
        rho: giant.rho,
        rho_by_size: giant
            .rho_by_size
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect(),
        degree_pmf: theory::degree_pmf(&profile, c_sparse, k_max),
    })
}

fn emit<W: Write>(out: &Option<PathBuf>, text: &str, stdout: &mut W) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_experiment_command<W: Write>(
    args: &ExperimentArgs,
    kind: ExperimentKind,
    default_regime: Regime,
    threads: Option<usize>,
    stdout: &mut W,
) -> Result<(), CliError> {
    let plan = ExperimentPlan {
        config: args.source.load()?,
        regime: args.regime.unwrap_or(default_regime),
        c: args.c,
        trials: args.trials,
        seed: Seed(args.seed),
        experiment: kind,
    };
    plan.resolve()?;
    let report = run_experiment(&plan, threads)?;
    emit(&args.out, &render_report(&report, args.format)?, stdout)
}

pub fn execute<W: Write>(cli: Cli, stdout: &mut W) -> Result<(), CliError> {
    match cli.command {
        Command::Generate {
            source,
            regime,
            c,
            seed,
            sampler,
            out,
        } => {
            let config = source.load()?;
            let params = resolve_p(regime, c, &config)?;
            let g = match sampler {
                SamplerChoice::Direct => sample_direct(&config, &params, Seed(seed)),
                SamplerChoice::Constructive => sample_constructive(&config, &params, Seed(seed)),
            };
            emit(&out, &g.to_edge_list(), stdout)
        }
        Command::Predict {
            source,
            regime,
            c,
            out,
        } => {
            let prediction = predict(&source.load()?, regime, c)?;
            let mut text =
                serde_json::to_string_pretty(&prediction).expect("prediction serializes");
            text.push('\n');
            emit(&out, &text, stdout)
        }
        Command::Connectivity(args) => run_experiment_command(
            &args,
            ExperimentKind::Connectivity,
            Regime::Connectivity,
            cli.threads,
            stdout,
        ),
        Command::Giant(args) => run_experiment_command(
            &args,
            ExperimentKind::Giant,
            Regime::Sparse,
            cli.threads,
            stdout,
        ),
        Command::Degree(args) => run_experiment_command(
            &args,
            ExperimentKind::Degree,
            Regime::Sparse,
            cli.threads,
            stdout,
        ),
        Command::Powerlaw {
            n_super,
            alpha,
            max_size,
            scheme,
            out,
        } => {
            let config = SizeConfiguration::power_law_with(n_super, alpha, max_size, scheme)?;
            let mut text = config.to_json();
            text.push('\n');
            emit(&out, &text, stdout)
        }
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code: 0 on success, 2 on usage errors, 1 on runtime
/// failures.
pub fn main_with_args<I, T, W, E>(args: I, stdout: &mut W, stderr: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
