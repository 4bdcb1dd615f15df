#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hdmc::error::{Error, Result};
use hdmc::experiments::{
    self, arctan_run, coverage_study, qnorm_run, volume_run, CoverageRow, SampleRule, SigmaSpec, StudyOutput,
    DEFAULT_BUDGET,
};
use hdmc::families::ExampleFamily;
use hdmc::report::{csv_string, emit_svg, CsvRecord, SvgOptions};

#[derive(Parser, Debug)]
#[command(name = "hdmc", version, about = "Monte Carlo integration with non-asymptotic confidence intervals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Volume of the unit ball in [-1,1]^P by hit-or-miss sampling.
    Volume(VolumeArgs),
    /// Certified expectation for one of the example integrands.
    Expect(ExpectArgs),
    /// Sample-size plans over a list of dimensions.
    Plan(PlanArgs),
    /// Scripted estimation studies.
    Study {
        #[command(subcommand)]
        study: StudyCommand,
    },
    /// Coverage of binomial proportion intervals.
    Coverage(CoverageArgs),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VolumeArgs {
    #[arg(long)]
    dim: u32,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum ExpectExample {
    Qnorm,
    Arctan,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum PlanExample {
    Hypersphere,
    Qnorm,
    Arctan,
}

#[derive(Args, Debug)]
struct ExpectArgs {
    #[arg(long, value_enum)]
    example: ExpectExample,
    #[arg(long)]
    dim: u32,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Strong log-concavity modulus; the covariance is I/γ.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct PlanArgs {
    #[arg(long, value_enum)]
    example: PlanExample,
    #[arg(long, value_delimiter = ',', required = true)]
    dims: Vec<u32>,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    allow_infeasible: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct StudyCommon {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cells needing more samples than this are reported as infeasible.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug)]
enum StudyCommand {
    Hypersphere {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10")]
        dims: Vec<u32>,
        /// Fixed sample size per dimension.
        #[arg(long, default_value_t = 100_000, conflicts_with = "delta")]
        n: u64,
        /// Use the planned sample size at this relative error instead of `--n`.
        #[arg(long)]
        delta: Option<f64>,
        /// Relative error at which the plan is reported alongside the rows.
        #[arg(long, default_value_t = 0.5)]
        plan_delta: f64,
        #[command(flatten)]
        study: StudyCommon,
    },
    Qnorm {
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        dims: Vec<u32>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        study: StudyCommon,
    },
    Arctan {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
        dims: Vec<u32>,
        /// Covariance I/γ.
        #[arg(long, default_value_t = 1.0, conflicts_with = "rho")]
        gamma: f64,
        /// Unit variances with common correlation ρ instead of I/γ.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        study: StudyCommon,
    },
    Smallprob {
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.1,0.01,0.001")]
        zeta: Vec<f64>,
        #[arg(long, default_value_t = 10_000, conflicts_with = "planned")]
        n: u64,
        /// Use the planned sample size at `--delta` instead of `--n`.
        #[arg(long)]
        planned: bool,
        /// Relative error at which the tail bound is reported.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[command(flatten)]
        study: StudyCommon,
    },
}

#[derive(Args, Debug)]
struct CoverageArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,100")]
    k: Vec<u64>,
    #[arg(long = "alpha", value_delimiter = ',', default_value = "0.1,0.05")]
    alphas: Vec<f64>,
    #[arg(long, default_value = "0.01:0.99:0.01", value_parser = parse_grid)]
    p_grid: GridSpec,
    #[arg(long, default_value_t = 1000)]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct GridSpec {
    start: f64,
    stop: f64,
    step: f64,
}

fn parse_grid(s: &str) -> std::result::Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected START:STOP:STEP, got `{s}`"));
    }
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in grid `{s}`"));
    Ok(GridSpec {
        start: num(parts[0])?,
        stop: num(parts[1])?,
        step: num(parts[2])?,
    })
}

enum Failure {
    Usage(String),
    Infeasible(String),
    Other(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. } | Error::UnknownField(_) => Failure::Usage(e.to_string()),
            Error::Infeasible { .. } => Failure::Infeasible(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

static RESOLVED: OnceLock<String> = OnceLock::new();

fn config_comment() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    format!("hdmc {}\nresolved: {}", args.join(" "), RESOLVED.get().map_or("", String::as_str))
}

fn write_output<R: CsvRecord>(rows: &[R], notes: &[String], out: Option<&Path>) -> Result<()> {
    let mut comments = vec![config_comment()];
    comments.extend(notes.iter().cloned());
    let text = csv_string(&comments, rows);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Volume(a) => {
            let row = volume_run(a.dim, a.n, a.common.alpha, a.seed)?;
            write_output(&[row], &[], a.common.out.as_deref())?;
        }
        Command::Expect(a) => {
            let row = match a.example {
                ExpectExample::Qnorm => qnorm_run(a.q, a.dim, a.n, a.common.alpha, a.seed)?,
                ExpectExample::Arctan => {
                    let sigma = isotropic(a.gamma)?;
                    arctan_run(a.dim, sigma, a.n, a.common.alpha, a.seed)?
                }
            };
            let (lo, hi) = match a.example {
                ExpectExample::Qnorm => (0.0, 1.0),
                ExpectExample::Arctan => (std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_2),
            };
            let notes = match (row.ci_lower, row.ci_upper) {
                (Some(l), Some(u)) => vec![format!("ci clipped to the integrand range: [{}, {}]", l.max(lo), u.min(hi))],
                _ => Vec::new(),
            };
            write_output(&[row], &notes, a.common.out.as_deref())?;
        }
        Command::Plan(a) => {
            let family = match a.example {
                PlanExample::Hypersphere => ExampleFamily::Hypersphere,
                PlanExample::Qnorm => ExampleFamily::qnorm(a.q)?,
                PlanExample::Arctan => ExampleFamily::arctan_mvn(a.gamma)?,
            };
            let rows = experiments::plan_table(&family, &a.dims, a.delta, a.common.alpha)?;
            write_output(&rows, &[], a.common.out.as_deref())?;
            if let Some(r) = rows.iter().find(|r| r.n_required.is_none()) {
                if !a.allow_infeasible {
                    return Err(Error::Infeasible {
                        required: r.n_continuous,
                    }
                    .into());
                }
            }
        }
        Command::Study { study } => run_study(study)?,
        Command::Coverage(a) => run_coverage(a)?,
    }
    Ok(())
}

fn isotropic(gamma: f64) -> Result<SigmaSpec> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain {
            name: "gamma",
            reason: format!("must be finite and > 0, got {gamma}"),
        });
    }
    Ok(if gamma == 1.0 {
        SigmaSpec::Identity
    } else {
        SigmaSpec::Isotropic { variance: 1.0 / gamma }
    })
}

fn run_study(study: StudyCommand) -> Result<()> {
    let (output, common, title): (StudyOutput, StudyCommon, String) = match study {
        StudyCommand::Hypersphere {
            dims,
            n,
            delta,
            plan_delta,
            study,
        } => {
            let rule = delta.map_or(SampleRule::Fixed(n), |delta| SampleRule::Planned { delta });
            let out = experiments::hypersphere_study(&dims, rule, study.common.alpha, study.seed, study.budget, plan_delta)?;
            (out, study, "hypersphere volume".into())
        }
        StudyCommand::Qnorm { q, dims, delta, study } => {
            let out = experiments::qnorm_study(q, &dims, delta, study.common.alpha, study.seed, study.budget)?;
            (out, study, format!("qnorm q={q}"))
        }
        StudyCommand::Arctan {
            dims,
            gamma,
            rho,
            delta,
            study,
        } => {
            let sigma = match rho {
                Some(rho) => SigmaSpec::Equicorrelated { rho },
                None => isotropic(gamma)?,
            };
            let out = experiments::arctan_mvn_study(&dims, sigma, delta, study.common.alpha, study.seed, study.budget)?;
            (out, study, "arctan".into())
        }
        StudyCommand::Smallprob {
            zeta,
            n,
            planned,
            delta,
            study,
        } => {
            let rule = if planned { SampleRule::Planned { delta } } else { SampleRule::Fixed(n) };
            let out = experiments::small_probability_study(&zeta, rule, study.common.alpha, delta, study.seed, study.budget)?;
            (out, study, "small probability".into())
        }
    };
    write_output(&output.rows, &output.notes, common.common.out.as_deref())?;
    if let Some(svg) = &common.svg {
        let x = if output.rows.iter().any(|r| r.p.is_some()) { "p" } else { "param" };
        let opts = SvgOptions {
            title: Some(title),
            reference_y: None,
        };
        emit_svg(&output.rows, x, "estimate", "study", &opts, svg)?;
    }
    Ok(())
}

fn run_coverage(a: CoverageArgs) -> Result<()> {
    let grid = experiments::inclusive_grid(a.p_grid.start, a.p_grid.stop, a.p_grid.step)?;
    let rows = coverage_study(&a.k, &a.alphas, &grid, a.reps, a.seed)?;
    write_output(&rows, &[], a.out.as_deref())?;
    if let Some(svg) = &a.svg {
        let pairs: Vec<(u64, f64)> = a.k.iter().flat_map(|&k| a.alphas.iter().map(move |&al| (k, al))).collect();
        for &(k, alpha) in &pairs {
            let subset: Vec<CoverageRow> = rows.iter().filter(|r| r.k == k && r.alpha == alpha).cloned().collect();
            let path = if pairs.len() == 1 { svg.clone() } else { suffixed(svg, k, alpha) };
            let opts = SvgOptions {
                title: Some(format!("coverage, k={k}, nominal {}", 1.0 - alpha)),
                reference_y: Some(1.0 - alpha),
            };
            emit_svg(&subset, "p_true", "coverage", "method", &opts, &path)?;
        }
    }
    Ok(())
}

/// `cov.svg` → `cov_k10_a0.1.svg`.
fn suffixed(path: &Path, k: u64, alpha: f64) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "svg".into());
    path.with_file_name(format!("{stem}_k{k}_a{alpha}.{ext}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let _ = RESOLVED.set(format!("{:?}", cli.command));
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("error: {msg}; pass --allow-infeasible to accept");
            ExitCode::from(3)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
