//! The `voltsched` command line: solve, s-schedule, verify, bench and gen.
//!
//! Exit codes: 0 success, 1 unreadable or invalid input, 2 no schedule
//! exists on the given speed ladder, 3 a schedule failed verification.

pub mod document;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use voltsched_core::continuous::solve_detailed;
use voltsched_core::discrete::{solve_discrete_detailed, SpeedLadder};
use voltsched_core::sschedule::{s_schedule_with, Driver, SScheduleOptions};
use voltsched_core::testkit::{adversarial_nested, generate, structure_holds, InstanceSpec, Structure};
use voltsched_core::{
    avr, compute_ranks, energy, verify_feasible, EnergyParams, Error, JobId, JobSet, Rational, Scalar, Schedule,
    Violation,
};

use document::{parse_schedule, pretty, JobSetDocument, ParseError, SegmentOut, SCHEDULE_SCHEMA, SSCHEDULE_SCHEMA};

pub const EXIT_PARSE: u8 = 1;
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

pub const BENCH_HEADER: &str = "n,reps,mean_ns,unions,finds,sschedule_calls";

#[derive(Debug, Parser)]
#[command(
    name = "voltsched",
    version,
    about = "Minimum-energy scheduling on a variable-voltage processor"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a minimum-energy schedule.
    Solve {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Model::Continuous)]
        model: Model,
        /// Power exponent; overrides the document's value (default 3).
        #[arg(long)]
        alpha: Option<f64>,
        /// Comma-separated ascending speed levels for the discrete model;
        /// overrides the document's list.
        #[arg(long, value_delimiter = ',')]
        speeds: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = Numeric::Rational)]
        numeric: Numeric,
        /// Write the schedule here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the fixed-speed s-schedule and report pieces and residual work.
    Sschedule {
        input: PathBuf,
        /// Processor speed (default: total work over support length).
        #[arg(long)]
        speed: Option<String>,
        #[arg(long, value_enum, default_value_t = DriverArg::Refined)]
        driver: DriverArg,
        #[arg(long, value_enum, default_value_t = Numeric::Rational)]
        numeric: Numeric,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a schedule document against a job set.
    Verify {
        schedule: PathBuf,
        jobs: PathBuf,
        #[arg(long, value_enum, default_value_t = Numeric::Rational)]
        numeric: Numeric,
    },
    /// Time the solvers over a range of sizes and write CSV.
    Bench {
        #[arg(long, value_enum, default_value_t = Suite::Sschedule)]
        suite: Suite,
        /// Comma-separated instance sizes; `1e5` style is accepted.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<String>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Instance family (default: uniform for sschedule, the adversarial
        /// nested chain for continuous).
        #[arg(long)]
        structure: Option<Structure>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random job set.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "uniform")]
        structure: Structure,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid points per time unit.
        #[arg(long, default_value_t = 4)]
        resolution: i64,
        /// Horizon in grid points (default 8 + 2n).
        #[arg(long)]
        ticks: Option<i64>,
        #[arg(long, default_value_t = 1)]
        workload_min: i64,
        #[arg(long, default_value_t = 16)]
        workload_max: i64,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        speeds: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Continuous,
    Discrete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Numeric {
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DriverArg {
    Basic,
    Refined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Sschedule,
    Continuous,
}

/// A command failure with its exit code.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    fn in_file(path: &Path, err: ParseError) -> Self {
        Failure::parse(format!("{}: {err}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Infeasible { .. } => EXIT_INFEASIBLE,
            _ => EXIT_PARSE,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

/// What a successful command produced: a document and a short summary.
#[derive(Debug, Default)]
pub struct Report {
    pub document: String,
    pub summary: String,
}

pub fn run(cli: Cli) -> Result<Report, Failure> {
    match cli.command {
        Command::Solve {
            input,
            model,
            alpha,
            speeds,
            numeric,
            out,
        } => {
            let report = match numeric {
                Numeric::Rational => solve_cmd::<Rational>(&input, model, alpha, speeds, numeric)?,
                Numeric::Float => solve_cmd::<f64>(&input, model, alpha, speeds, numeric)?,
            };
            emit(report, out.as_deref())
        }
        Command::Sschedule {
            input,
            speed,
            driver,
            numeric,
            out,
        } => {
            let report = match numeric {
                Numeric::Rational => sschedule_cmd::<Rational>(&input, speed.as_deref(), driver)?,
                Numeric::Float => sschedule_cmd::<f64>(&input, speed.as_deref(), driver)?,
            };
            emit(report, out.as_deref())
        }
        Command::Verify {
            schedule,
            jobs,
            numeric,
        } => match numeric {
            Numeric::Rational => verify_cmd::<Rational>(&schedule, &jobs),
            Numeric::Float => verify_cmd::<f64>(&schedule, &jobs),
        },
        Command::Bench {
            suite,
            sizes,
            reps,
            structure,
            seed,
            out,
        } => emit(bench_cmd(suite, &sizes, reps, structure, seed)?, out.as_deref()),
        Command::Gen {
            n,
            structure,
            seed,
            resolution,
            ticks,
            workload_min,
            workload_max,
            alpha,
            speeds,
            out,
        } => {
            let spec = InstanceSpec {
                n,
                resolution,
                ticks: ticks.unwrap_or(8 + 2 * n as i64),
                workload: (workload_min, workload_max),
                seed,
                structure,
            };
            emit(gen_cmd(&spec, alpha, speeds)?, out.as_deref())
        }
    }
}

// With --out the document goes to the file and the summary to stdout;
// otherwise the document is the output.
fn emit(mut report: Report, out: Option<&Path>) -> Result<Report, Failure> {
    if let Some(path) = out {
        fs::write(path, &report.document)
            .map_err(|e| Failure::parse(format!("cannot write {}: {e}", path.display())))?;
        report.document.clear();
    }
    Ok(report)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))
}

fn load<T: Scalar>(path: &Path) -> Result<JobSetDocument<T>, Failure> {
    JobSetDocument::parse(&read(path)?).map_err(|e| Failure::in_file(path, e))
}

fn parse_ladder<T: Scalar>(levels: &[String]) -> Result<SpeedLadder<T>, Failure> {
    let levels = levels
        .iter()
        .map(|s| T::parse_number(s).ok_or_else(|| Failure::parse(format!("--speeds: `{s}` is not a number"))))
        .collect::<Result<Vec<T>, _>>()?;
    SpeedLadder::new(levels).map_err(|e| Failure::parse(format!("--speeds: {e}")))
}

fn params(flag: Option<f64>, doc: Option<EnergyParams>) -> Result<EnergyParams, Failure> {
    match flag {
        Some(alpha) => EnergyParams::new(alpha).map_err(|e| Failure::parse(format!("--alpha: {e}"))),
        None => Ok(doc.unwrap_or_default()),
    }
}

#[derive(Serialize)]
struct JobSpeeds {
    job: JobId,
    speeds: Vec<String>,
}

#[derive(Serialize)]
struct BracketOut {
    job: JobId,
    bracket: String,
}

#[derive(Serialize)]
struct ScheduleOut<'a> {
    schema: &'a str,
    model: &'a str,
    numeric: &'a str,
    alpha: String,
    energy: String,
    segments: Vec<SegmentOut>,
    job_speeds: Vec<JobSpeeds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    brackets: Option<Vec<BracketOut>>,
    stats: serde_json::Value,
}

fn solve_cmd<T: Scalar>(
    input: &Path,
    model: Model,
    alpha: Option<f64>,
    speeds: Option<Vec<String>>,
    numeric: Numeric,
) -> Result<Report, Failure> {
    let doc = load::<T>(input)?;
    let params = params(alpha, doc.alpha)?;
    let (schedule, brackets, stats, calls) = match model {
        Model::Continuous => {
            let solution = solve_detailed(&doc.jobs, |_| {})?;
            let s = solution.stats;
            let stats = serde_json::json!({
                "sschedule_calls": s.sschedule_calls,
                "nodes": s.nodes,
                "leaves": s.leaves,
                "max_depth": s.max_depth,
                "unions": s.unions,
                "finds": s.finds,
            });
            (solution.schedule, None, stats, s.sschedule_calls)
        }
        Model::Discrete => {
            let ladder = match (speeds, doc.speeds) {
                (Some(levels), _) => parse_ladder::<T>(&levels)?,
                (None, Some(ladder)) => ladder,
                (None, None) => {
                    return Err(Failure::parse(
                        "the discrete model needs speed levels (--speeds or a `speeds` list in the document)",
                    ))
                }
            };
            let solution = solve_discrete_detailed(&doc.jobs, &ladder)?;
            let s = solution.stats;
            let stats = serde_json::json!({
                "sschedule_calls": s.sschedule_calls,
                "rounds": s.rounds,
                "bipartitions": s.bipartitions,
            });
            let brackets = solution
                .brackets
                .iter()
                .map(|b| BracketOut {
                    job: b.job,
                    bracket: b.bracket.to_string(),
                })
                .collect();
            (solution.schedule, Some(brackets), stats, s.sschedule_calls)
        }
    };
    let schedule = schedule.normalized();
    let total = energy(&schedule, &params);
    let job_speeds: Vec<JobSpeeds> = schedule
        .job_speed_sets()
        .into_iter()
        .map(|(job, speeds)| JobSpeeds {
            job,
            speeds: speeds.iter().map(Scalar::render).collect(),
        })
        .collect();

    let mut summary = format!("energy {}\n", total.render());
    for js in &job_speeds {
        let _ = writeln!(summary, "job {} speed {}", js.job, js.speeds.join(" / "));
    }
    let _ = writeln!(summary, "s-schedule calls {calls}");

    let out = ScheduleOut {
        schema: SCHEDULE_SCHEMA,
        model: match model {
            Model::Continuous => "continuous",
            Model::Discrete => "discrete",
        },
        numeric: numeric_name(numeric),
        alpha: params.alpha().to_string(),
        energy: total.render(),
        segments: busy_segments(&schedule),
        job_speeds,
        brackets,
        stats,
    };
    Ok(Report {
        document: pretty(&out),
        summary,
    })
}

fn numeric_name(numeric: Numeric) -> &'static str {
    match numeric {
        Numeric::Rational => "rational",
        Numeric::Float => "float",
    }
}

fn busy_segments<T: Scalar>(schedule: &Schedule<T>) -> Vec<SegmentOut> {
    schedule
        .segments()
        .iter()
        .filter(|s| s.job.is_some())
        .map(SegmentOut::from_segment)
        .collect()
}

#[derive(Serialize)]
struct Residual {
    job: JobId,
    residual: String,
}

#[derive(Serialize)]
struct SScheduleStats {
    m: usize,
    n: usize,
    unions: usize,
    finds: usize,
    union_bound: usize,
    find_bound: usize,
}

#[derive(Serialize)]
struct SScheduleOut<'a> {
    schema: &'a str,
    driver: &'a str,
    speed: String,
    segments: Vec<SegmentOut>,
    residuals: Vec<Residual>,
    unfinished: Vec<JobId>,
    stats: SScheduleStats,
}

fn sschedule_cmd<T: Scalar>(input: &Path, speed: Option<&str>, driver: DriverArg) -> Result<Report, Failure> {
    let doc = load::<T>(input)?;
    let jobs = &doc.jobs;
    let speed = match speed {
        Some(text) => {
            T::parse_number(text).ok_or_else(|| Failure::parse(format!("--speed: `{text}` is not a number")))?
        }
        None if jobs.is_empty() => T::one(),
        None => avr(jobs)?,
    };
    if !speed.is_positive_s() {
        return Err(Failure::parse("--speed must be positive"));
    }
    let ranks = compute_ranks(jobs);
    let options = SScheduleOptions {
        driver: match driver {
            DriverArg::Basic => Driver::Basic,
            DriverArg::Refined => Driver::Refined,
        },
        trace: false,
    };
    let result = s_schedule_with(jobs, &speed, &ranks, options)?;
    let (m, n) = (result.m(), result.job_count());
    let slack = m.saturating_sub(2);
    let find_bound = match driver {
        DriverArg::Refined => slack + n,
        // a piece cut short at a deadline costs one extra find
        DriverArg::Basic => 2 * slack + 2 * n,
    };
    let residuals: Vec<Residual> = jobs
        .iter()
        .zip(&result.residual)
        .map(|(job, r)| Residual {
            job: job.id,
            residual: r.render(),
        })
        .collect();
    let unfinished = result.unfinished();

    let mut summary = format!("speed {}\n", speed.render());
    let _ = writeln!(summary, "unfinished {unfinished:?}");
    let _ = writeln!(
        summary,
        "unions {} (bound {slack}), finds {} (bound {find_bound})",
        result.stats.unions, result.stats.finds
    );

    let out = SScheduleOut {
        schema: SSCHEDULE_SCHEMA,
        driver: match driver {
            DriverArg::Basic => "basic",
            DriverArg::Refined => "refined",
        },
        speed: speed.render(),
        segments: result
            .execution_intervals()
            .iter()
            .map(SegmentOut::from_segment)
            .collect(),
        residuals,
        unfinished,
        stats: SScheduleStats {
            m,
            n,
            unions: result.stats.unions,
            finds: result.stats.finds,
            union_bound: slack,
            find_bound,
        },
    };
    Ok(Report {
        document: pretty(&out),
        summary,
    })
}

fn verify_cmd<T: Scalar>(schedule_path: &Path, jobs_path: &Path) -> Result<Report, Failure> {
    let schedule: Schedule<T> =
        parse_schedule(&read(schedule_path)?).map_err(|e| Failure::in_file(schedule_path, e))?;
    let doc = load::<T>(jobs_path)?;
    let verdict = verify_feasible(&schedule, &doc.jobs);
    if verdict.is_ok() {
        return Ok(Report {
            document: String::new(),
            summary: format!(
                "feasible: {} segments, {} jobs\n",
                schedule.segments().len(),
                doc.jobs.len()
            ),
        });
    }
    let mut message = format!("{} violation(s)", verdict.violations.len());
    for v in &verdict.violations {
        let _ = write!(message, "\n  {}", describe(v));
    }
    Err(Failure {
        code: EXIT_VERIFY,
        message,
    })
}

fn describe<T: Scalar>(v: &Violation<T>) -> String {
    match v {
        Violation::DegenerateSegment { index } => format!("segment {index} is empty"),
        Violation::NegativeSpeed { index } => format!("segment {index} has negative speed"),
        Violation::IdleSpeedMismatch { index } => {
            format!("segment {index}: speed must be positive exactly when a job runs")
        }
        Violation::UnknownJob { index, job } => format!("segment {index} runs unknown job {job}"),
        Violation::Overlap { first, second } => format!("segments {first} and {second} overlap"),
        Violation::OutsideWindow { index, job } => format!("segment {index} runs job {job} outside its window"),
        Violation::WorkMismatch {
            job,
            delivered,
            required,
        } => format!(
            "job {job} receives {} work but needs {}",
            delivered.render(),
            required.render()
        ),
    }
}

fn parse_size(text: &str) -> Result<usize, Failure> {
    let bad = || Failure::parse(format!("--sizes: `{text}` is not a size"));
    match text.trim().parse::<usize>() {
        Ok(n) => Ok(n),
        Err(_) => {
            let value: f64 = text.trim().parse().map_err(|_| bad())?;
            if value.is_finite() && value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(bad())
            }
        }
    }
}

fn bench_cmd(
    suite: Suite,
    sizes: &[String],
    reps: usize,
    structure: Option<Structure>,
    seed: u64,
) -> Result<Report, Failure> {
    if reps == 0 {
        return Err(Failure::parse("--reps must be at least 1"));
    }
    let sizes = sizes.iter().map(|s| parse_size(s)).collect::<Result<Vec<_>, _>>()?;
    let mut csv = format!("{BENCH_HEADER}\n");
    let mut means = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let jobs: JobSet<f64> = match (suite, structure) {
            (_, Some(structure)) => generate(&InstanceSpec::new(n, structure, seed)),
            (Suite::Sschedule, None) => generate(&InstanceSpec::new(n, Structure::Uniform, seed)),
            (Suite::Continuous, None) => adversarial_nested(n, 1.3),
        };
        let mut total_ns = 0u128;
        let (mut unions, mut finds, mut calls) = (0, 0, 0);
        for _ in 0..reps {
            match suite {
                Suite::Sschedule => {
                    let ranks = compute_ranks(&jobs);
                    let speed = if jobs.is_empty() { 1.0 } else { avr(&jobs)? };
                    let start = Instant::now();
                    let result = voltsched_core::s_schedule(&jobs, &speed, &ranks)?;
                    total_ns += start.elapsed().as_nanos();
                    (unions, finds, calls) = (result.stats.unions, result.stats.finds, 1);
                }
                Suite::Continuous => {
                    let start = Instant::now();
                    let solution = solve_detailed(&jobs, |_| {})?;
                    total_ns += start.elapsed().as_nanos();
                    let s = solution.stats;
                    (unions, finds, calls) = (s.unions, s.finds, s.sschedule_calls);
                }
            }
        }
        let mean = total_ns / reps as u128;
        means.push(mean);
        let _ = writeln!(csv, "{n},{reps},{mean},{unions},{finds},{calls}");
    }

    let mut summary = String::new();
    if let ([a, b], [ta, tb]) = (sizes.as_slice(), means.as_slice()) {
        let ratio = *tb as f64 / (*ta).max(1) as f64;
        let (expected, bound) = match suite {
            Suite::Sschedule => (*b as f64 / *a as f64, 1.2 * *b as f64 / *a as f64),
            Suite::Continuous => ((*b as f64 / *a as f64).powi(2), 1.5 * (*b as f64 / *a as f64).powi(2)),
        };
        let verdict = if ratio <= bound { "within" } else { "above" };
        let _ = writeln!(
            summary,
            "time ratio {ratio:.2} for n {a} -> {b} (expected ~{expected:.1}, {verdict} soft bound {bound:.1})"
        );
    }
    Ok(Report { document: csv, summary })
}

fn gen_cmd(spec: &InstanceSpec, alpha: Option<f64>, speeds: Option<Vec<String>>) -> Result<Report, Failure> {
    if spec.resolution < 1 {
        return Err(Failure::parse("--resolution must be at least 1"));
    }
    if spec.workload.0 < 0 || spec.workload.0 > spec.workload.1 {
        return Err(Failure::parse("workload range must satisfy 0 <= min <= max"));
    }
    let jobs = generate::<Rational>(spec);
    if !structure_holds(&jobs, spec.structure) {
        return Err(Failure::parse(format!("generated instance is not {}", spec.structure)));
    }
    let doc = JobSetDocument {
        jobs,
        alpha: alpha
            .map(|a| EnergyParams::new(a).map_err(|e| Failure::parse(format!("--alpha: {e}"))))
            .transpose()?,
        speeds: speeds.map(|s| parse_ladder::<Rational>(&s)).transpose()?,
    };
    Ok(Report {
        document: doc.to_json(),
        summary: format!("{} {} jobs, seed {}\n", doc.jobs.len(), spec.structure, spec.seed),
    })
}
