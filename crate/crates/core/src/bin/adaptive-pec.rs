use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use adaptive_pec::experiment::{
    emit_reports, read_counts, run_experiment, ExperimentConfig, PeriodResult, ReportFormat,
};
use adaptive_pec::inference::{map_estimate, roll_prior, CalibrationModel, MapOptions, ModelKind};
use adaptive_pec::noise::{
    apd_twirl_exact, schedule_channel, twirled_apd_coeffs, ApdParams, DecoherenceTimes, Feasibility, PauliChannel,
};
use adaptive_pec::pec::{quasiprob_decompose, NoisyBasis};
use adaptive_pec::quantum::Gate;
use adaptive_pec::stats::{hellinger_dirichlet, hellinger_discrete, DirichletParams, Histogram};
use adaptive_pec::Error;

/// Adaptive probabilistic error cancellation under drifting Pauli noise.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// RNG seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for `run`.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::All)]
    format: Format,
    /// Accept T2 > 2 T1.
    #[arg(long, global = true)]
    allow_unphysical: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Full multi-period experiment; writes report.json / summary.csv.
    Run {
        /// Number of periods, overriding the config.
        #[arg(long)]
        periods: Option<usize>,
    },
    /// Twirled damping coefficients for one qubit.
    Twirl {
        /// Gate time in microseconds.
        #[arg(long, default_value_t = 100.0)]
        t: f64,
        #[arg(long)]
        t1: f64,
        #[arg(long)]
        t2: f64,
    },
    /// Quasi-probability decomposition of a gate for a Pauli channel.
    Decompose {
        /// 4^n coefficients (comma list or file); defaults to the schedule's channel at `--period`.
        #[arg(long)]
        channel: Option<String>,
        #[arg(long, default_value_t = 0)]
        period: usize,
        #[arg(long, default_value = "hadamard")]
        gate: Gate,
    },
    /// MAP estimate from a counts file.
    Infer {
        /// `outcome,count` lines.
        #[arg(long)]
        counts: PathBuf,
        /// Channel the prior is rolled from; defaults to the schedule's channel at `--period`.
        #[arg(long)]
        prior_channel: Option<String>,
        #[arg(long, default_value_t = 0)]
        period: usize,
        #[arg(long, default_value_t = 50.0)]
        kappa: f64,
        /// Treat the counts as coming from circuits sampled off this channel's decomposition.
        #[arg(long)]
        old_channel: Option<String>,
        #[arg(long, default_value = "hadamard")]
        gate: Gate,
    },
    /// Hellinger distance between two histograms or two Dirichlet parameter vectors.
    Metrics {
        #[arg(long, value_enum, default_value_t = MetricKind::Histogram)]
        kind: MetricKind,
        a: String,
        b: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricKind {
    Histogram,
    Dirichlet,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), cli.seed)?;
    if cli.allow_unphysical {
        cfg.allow_unphysical = true;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

/// Config for the single-shot commands, where the seed barely matters.
fn tool_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), Some(cli.seed.unwrap_or(0)))?;
    cfg.allow_unphysical |= cli.allow_unphysical;
    Ok(cfg)
}

/// Comma/whitespace separated numbers, inline or from a file.
fn parse_vector(arg: &str) -> Result<Vec<f64>, Error> {
    let text = if Path::new(arg).is_file() {
        std::fs::read_to_string(arg)?
    } else {
        arg.to_string()
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidInput(format!("not a number: {s:?}")))
        })
        .collect()
}

fn channel_arg(cli: &Cli, arg: &Option<String>, period: usize) -> Result<PauliChannel, Error> {
    match arg {
        Some(s) => PauliChannel::new(parse_vector(s)?),
        None => Ok(schedule_channel(&tool_config(cli)?.build_schedule()?, period)?.0),
    }
}

fn print(value: &serde_json::Value) {
    use std::io::Write;
    // A closed pipe (`| head`) is not an error worth a panic.
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(value).expect("JSON value")
    );
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::Run { periods } => {
            let mut cfg = load_config(cli)?;
            if let Some(p) = periods {
                cfg.periods = *p;
            }
            // Anything that stops the run before the first period is a setup problem.
            let results = run_experiment(&cfg).map_err(|e| match e {
                Error::Config(_) => e,
                other => Error::Config(other.to_string()),
            })?;
            let format = match cli.format {
                Format::Json => ReportFormat::Json,
                Format::Csv => ReportFormat::Csv,
                Format::All => ReportFormat::All,
            };
            for path in emit_reports(&results, &cli.out, format)? {
                eprintln!("wrote {}", path.display());
            }
            for r in &results {
                match r {
                    PeriodResult::Completed(rep) => eprintln!(
                        "period {}: H non-adaptive {:.4}, adaptive {:.4} ({:.2} s)",
                        rep.period, rep.hd_nonadaptive, rep.hd_adaptive, rep.wall_clock_s
                    ),
                    PeriodResult::Failed { period, error } => eprintln!("period {period}: failed: {error}"),
                }
            }
            if results.iter().all(|r| r.report().is_none()) {
                return Ok(ExitCode::from(3));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Twirl { t, t1, t2 } => {
            let feasibility = if cli.allow_unphysical {
                Feasibility::AllowUnphysical
            } else {
                Feasibility::Strict
            };
            DecoherenceTimes::new(*t1, *t2, feasibility)?;
            let closed = twirled_apd_coeffs(*t, *t1, *t2)?;
            let exact = apd_twirl_exact(&ApdParams::from_times(*t, *t1, *t2)?)?;
            print(&json!({ "closed_form": closed, "exact_twirl": exact }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Decompose { channel, period, gate } => {
            let x = channel_arg(cli, channel, *period)?;
            let q = quasiprob_decompose(&x)?;
            let basis = NoisyBasis::new(&gate.unitary(x.num_qubits())?, &x)?;
            let d = adaptive_pec::experiment::Decomposition::from(&q);
            print(&json!({
                "channel": x,
                "theta": d.theta,
                "one_norm": d.one_norm,
                "reconstruction_residual": basis.reconstruction_residual(&q)?,
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Infer {
            counts,
            prior_channel,
            period,
            kappa,
            old_channel,
            gate,
        } => {
            let record = read_counts(counts)?;
            let prior_x = channel_arg(cli, prior_channel, *period)?;
            let n = prior_x.num_qubits();
            let kind = match old_channel {
                Some(s) => ModelKind::OldPecMixture(quasiprob_decompose(&PauliChannel::new(parse_vector(s)?)?)?),
                None => ModelKind::PlainNoisy,
            };
            let cfg = tool_config(cli)?;
            let model = CalibrationModel::new(&gate.unitary(n)?, &cfg.build_state(n)?, kind)?;
            let eta = roll_prior(&prior_x, *kappa)?;
            let opts = MapOptions {
                seed: cfg.seed,
                initial: Some(prior_x.coeffs().to_vec()),
                workers: cli.workers.unwrap_or(cfg.workers),
                ..MapOptions::default()
            };
            let est = map_estimate(&record, &model, &eta, &opts)?;
            print(&serde_json::to_value(&est)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Metrics { kind, a, b } => {
            let (va, vb) = (parse_vector(a)?, parse_vector(b)?);
            let h = match kind {
                MetricKind::Histogram => hellinger_discrete(&Histogram::new(va)?, &Histogram::new(vb)?)?,
                MetricKind::Dirichlet => hellinger_dirichlet(&DirichletParams::new(va)?, &DirichletParams::new(vb)?)?,
            };
            print(&json!({ "hellinger": h }));
            Ok(ExitCode::SUCCESS)
        }
    }
}
