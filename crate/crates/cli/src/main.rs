use std::fmt;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use cmnlab::audit::{separability_audit, AuditConfig, AuditFamily};
use cmnlab::detect::{detect, BoundReport, Criterion, DetectConfig, DetectionVerdict};
use cmnlab::discord::{bipartite_discord_cmn, global_discord_cmn, OptimizerCfg, Side};
use cmnlab::report::{to_json_exact, ReportDocument, StateFile, Timing};
use cmnlab::{zoo, Bipartition, CmnParams, DensityMatrix, Error, SchattenP};

#[derive(Parser)]
#[command(
    name = "cmnlab",
    version,
    about = "Correlation-tensor entanglement detection"
)]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Leave the timing block out of reports.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every separability criterion on a state.
    Analyze {
        /// State file, `-` for stdin, or `zoo:NAME`.
        input: String,
        /// Minor order (default: d^2 of each matricization).
        #[arg(long)]
        h: Option<usize>,
        /// Schatten exponents: `1`, `inf`, `both`, or a comma list.
        #[arg(long, default_value = "both")]
        p: String,
        /// Filter to normal form across each cut when needed.
        #[arg(long)]
        filter: bool,
        /// Also analyze every reduced state.
        #[arg(long)]
        recursive: bool,
        /// Tolerance of the normal-form predicates.
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        /// Also write one CSV row per (scope, partition, criterion).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// CMN discord for each requested bipartition.
    Discord {
        input: String,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value = "1")]
        p: String,
        /// `all` or a label such as `A|BC`.
        #[arg(long, default_value = "all")]
        partition: String,
        /// Which parties are measured.
        #[arg(long, value_enum, default_value_t = MeasuredSide::Global)]
        side: MeasuredSide,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, env = "CMNLAB_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo soundness audit of one criterion on one state family.
    Audit {
        /// fully-separable, bi-separable or ghz-mixtures.
        family: String,
        /// cmn-bisep-inf, cmn-bisep-p1, cmn-full-inf, cmn-full-p1, dvh-full or dvh-bisep.
        criterion: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, env = "CMNLAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Local dimensions, comma separated.
        #[arg(long, default_value = "2,2,2")]
        dims: String,
        #[arg(long)]
        h: Option<usize>,
    },
    /// Named example states.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    /// List the available names.
    List,
    /// Print a state file.
    Emit { name: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasuredSide {
    A,
    B,
    Global,
}

/// Failure with its exit code: 2 for bad input, 3 for numerical trouble.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl fmt::Display) -> Self {
        Self {
            code: 2,
            message: format!("invalid input: {message}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) | Error::FilteringNotConverged { .. } => Self {
                code: 3,
                message: format!("numerical failure: {e}"),
            },
            other => Self::input(other),
        }
    }
}

/// Writes to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) -> CliResult<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::input(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn load_state(input: &str) -> CliResult<DensityMatrix> {
    if let Some(name) = input.strip_prefix("zoo:") {
        return Ok(zoo::by_name(name)?);
    }
    let text = if input == "-" {
        let mut buf = String::new();
        io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        std::fs::read_to_string(input).map_err(|e| Failure::input(format!("{input}: {e}")))?
    };
    let file: StateFile =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("state file: {e}")))?;
    Ok(file.to_state()?)
}

fn digest(rho: &DensityMatrix) -> CliResult<String> {
    let canonical = to_json_exact(&StateFile::from_state(rho))?;
    Ok(Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn parse_ps(spec: &str) -> CliResult<Vec<SchattenP>> {
    if spec == "both" {
        return Ok(vec![SchattenP::Infinity, SchattenP::One]);
    }
    spec.split(',')
        .map(|s| s.parse::<SchattenP>().map_err(Failure::from))
        .collect()
}

fn parse_dims(spec: &str) -> CliResult<Vec<usize>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Failure::input(format!("cannot parse dims '{spec}'")))
        })
        .collect()
}

fn csv_rows(verdict: &DetectionVerdict) -> Vec<(String, &BoundReport)> {
    let mut rows: Vec<(String, &BoundReport)> = verdict
        .reports()
        .map(|r| ("state".to_string(), r))
        .collect();
    for red in &verdict.reduced_states {
        for r in red.partition_reports.iter().chain(&red.interior_reports) {
            rows.push((red.label.clone(), r));
        }
    }
    rows
}

fn write_csv(path: &PathBuf, verdict: &DetectionVerdict) -> CliResult<()> {
    let num = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_default();
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let io_err = |e: csv::Error| Failure {
        code: 3,
        message: format!("writing csv: {e}"),
    };
    w.write_record([
        "scope",
        "partition",
        "criterion",
        "h",
        "value",
        "bound",
        "verdict",
        "violated",
        "saturated",
        "preconditions_met",
        "filtered",
        "reason",
    ])
    .map_err(io_err)?;
    for (scope, r) in csv_rows(verdict) {
        let verdict = serde_json::to_value(r.verdict)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        w.write_record([
            scope,
            r.partition.clone(),
            r.criterion.to_string(),
            r.h.map(|h| h.to_string()).unwrap_or_default(),
            num(r.value),
            num(r.bound),
            verdict,
            r.violated.to_string(),
            r.saturated.to_string(),
            r.preconditions_met.to_string(),
            r.filtered.to_string(),
            r.reason.clone().unwrap_or_default(),
        ])
        .map_err(io_err)?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> CliResult<Option<ReportDocument>> {
    let start = Instant::now();
    let mut doc = ReportDocument::new();
    match cli.command {
        Command::Zoo { action } => {
            match action {
                ZooAction::List => emit(&zoo::names().join("\n"))?,
                ZooAction::Emit { name } => {
                    let rho = zoo::by_name(&name)?;
                    emit(&to_json_exact(&StateFile::from_state(&rho))?)?;
                }
            }
            return Ok(None);
        }
        Command::Analyze {
            input,
            h,
            p,
            filter,
            recursive,
            tolerance,
            csv,
        } => {
            if !(tolerance.is_finite() && tolerance > 0.0) {
                return Err(Failure::input(format!(
                    "tolerance must be positive, got {tolerance}"
                )));
            }
            let rho = load_state(&input)?;
            let cfg = DetectConfig {
                h,
                ps: parse_ps(&p)?,
                filter,
                recursive,
                normal_form_tol: tolerance,
                ..DetectConfig::default()
            };
            let verdict = detect(&rho, &cfg)?;
            if let Some(path) = csv {
                write_csv(&path, &verdict)?;
            }
            doc.input_digest = Some(digest(&rho)?);
            doc.dims = Some(rho.dims().to_vec());
            doc.analysis = Some(verdict);
        }
        Command::Discord {
            input,
            h,
            p,
            partition,
            side,
            restarts,
            seed,
        } => {
            let rho = load_state(&input)?;
            let n = rho.n_parties();
            if n < 2 {
                return Err(Failure::input("discord needs at least two parties"));
            }
            let params = CmnParams::new(h, p.parse::<SchattenP>()?)?;
            let parts = if partition == "all" {
                Bipartition::all(n)
            } else {
                vec![Bipartition::parse(n, &partition)?]
            };
            let cfg = OptimizerCfg {
                restarts,
                seed,
                ..OptimizerCfg::default()
            };
            for part in &parts {
                let result = match side {
                    MeasuredSide::A => bipartite_discord_cmn(&rho, part, Side::A, &params, &cfg)?,
                    MeasuredSide::B => bipartite_discord_cmn(&rho, part, Side::B, &params, &cfg)?,
                    MeasuredSide::Global => global_discord_cmn(&rho, part, &params, &cfg)?,
                };
                doc.discord.push(result);
            }
            doc.input_digest = Some(digest(&rho)?);
            doc.dims = Some(rho.dims().to_vec());
        }
        Command::Audit {
            family,
            criterion,
            trials,
            seed,
            dims,
            h,
        } => {
            let family: AuditFamily = family.parse()?;
            let criterion = Criterion::parse(&criterion).ok_or_else(|| {
                Failure::input(format!(
                    "unknown criterion '{criterion}'; available: {}",
                    Criterion::ALL.map(|c| c.name()).join(", ")
                ))
            })?;
            let mut cfg = AuditConfig::new(family, criterion, parse_dims(&dims)?, trials, seed);
            cfg.h = h;
            doc.audit = Some(separability_audit(&cfg)?);
        }
    }
    if !cli.no_timing {
        doc.timing = Some(Timing {
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(Some(doc))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("invalid input: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("thread pool is configured once");
    }
    match run(cli).and_then(|doc| match doc {
        Some(doc) => emit(&to_json_exact(&doc)?),
        None => Ok(()),
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cmnlab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
