//! Command-line front end.
//!
//! Every command produces a [`Report`]: human-readable text by default, or
//! JSON with sorted keys under `--json`. Exit codes are 0 for pass, 1 for a
//! violated check, 2 for usage and parse errors and 3 when a budget or
//! resource guard stops the work.

pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::clusters::{self, DEFAULT_CENSUS_BUDGET};
use crate::cycle::aggregate_inequality;
use crate::error::Error;
use crate::ground::{Family, Params};
use crate::search::{self, Budget, Mode, SearchProblem, SearchResult};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "clusterforge",
    version,
    about = "Clusters, extremal searches and counting checks for k-uniform set families"
)]
pub struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "CLUSTERFORGE_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Run even when the parameters fail the relevant validity condition.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Look for a d-cluster (or simple d-cluster) in a family file.
    Check {
        file: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        simple: bool,
    },
    /// Exact extremal search with a census of the optimal families.
    Search(SearchArgs),
    /// Run seeded verification suites.
    Verify {
        #[arg(value_enum)]
        suite: verify::Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
    },
    /// Count isomorphism classes of d-clusters of k-sets.
    Census {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        simple: bool,
        /// Include a canonical representative of every class.
        #[arg(long)]
        emit: bool,
        /// Largest number of candidate clusters to examine.
        #[arg(long, default_value_t = DEFAULT_CENSUS_BUDGET)]
        budget: u128,
    },
    /// Trace the cyclic double count for a family and its starred part.
    CycleStats { file: PathBuf, fstar_file: PathBuf },
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub d: usize,
    /// Forbid only simple d-clusters.
    #[arg(long, conflicts_with = "weighted")]
    pub simple: bool,
    /// Maximize k|F*| + n|F - F*| instead of |F|.
    #[arg(long)]
    pub weighted: bool,
    #[arg(long, default_value_t = Budget::default().max_nodes)]
    pub max_nodes: u64,
    #[arg(long, default_value_t = Budget::default().max_time.as_secs())]
    pub max_seconds: u64,
    /// Least optimal families to list per class.
    #[arg(long, default_value_t = 1)]
    pub representatives: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    BudgetExhausted,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => EXIT_PASS,
            Outcome::Fail => EXIT_VIOLATION,
            Outcome::BudgetExhausted => EXIT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub params: Option<Params>,
    pub outcome: Outcome,
    pub details: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("reports serialize");
        serde_json::to_string_pretty(&value).expect("values serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        if let Some(p) = &self.params {
            out += &format!("params: {p}\n");
        }
        let outcome = serde_json::to_value(self.outcome).expect("outcome serializes");
        out += &format!("outcome: {}\n", outcome.as_str().unwrap_or_default());
        if let Value::Object(map) = &self.details {
            for (key, value) in map {
                out += &format!("{key}: {value}\n");
            }
        }
        out
    }
}

/// Captured result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Hypothesis(_) | Error::NotSubfamily(_) | Error::NotExtremal(_) => EXIT_VIOLATION,
        Error::ResourceGuard(_) | Error::Overflow(..) => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            let (stdout, stderr) = if code == EXIT_PASS {
                (text, String::new())
            } else {
                (String::new(), text)
            };
            return Invocation {
                code,
                stdout,
                stderr,
            };
        }
    };
    match execute(&cli) {
        Ok(report) => Invocation {
            code: report.outcome.exit_code(),
            stdout: if cli.json {
                report.to_json()
            } else {
                report.to_text()
            },
            stderr: String::new(),
        },
        Err(e) => Invocation {
            code: error_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = run(args);
    print!("{}", inv.stdout);
    eprint!("{}", inv.stderr);
    inv.code
}

pub fn execute(cli: &Cli) -> crate::Result<Report> {
    match &cli.command {
        Command::Check { file, d, simple } => cmd_check(file, *d, *simple, cli.force),
        Command::Search(args) => cmd_search(args, cli.threads, cli.force),
        Command::Verify {
            suite,
            seed,
            trials,
            n,
            k,
            d,
        } => {
            let opts = verify::SuiteOptions {
                seed: *seed,
                trials: *trials,
                n: *n,
                k: *k,
                d: *d,
            };
            cmd_verify(*suite, &opts, cli.threads)
        }
        Command::Census {
            k,
            d,
            simple,
            emit,
            budget,
        } => cmd_census(*k, *d, *simple, *emit, *budget),
        Command::CycleStats { file, fstar_file } => cmd_cycle_stats(file, fstar_file, cli.threads),
    }
}

fn read_family(path: &Path) -> crate::Result<Family> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
    Family::parse(&text)
}

fn pool<T: Send>(threads: usize, f: impl FnOnce() -> crate::Result<T> + Send) -> crate::Result<T> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?
        .install(f)
}

fn pass_or_fail(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

pub fn cmd_check(file: &Path, d: usize, simple: bool, force: bool) -> crate::Result<Report> {
    let family = read_family(file)?;
    let params = Params::new(family.n(), family.k(), d)?;
    let valid = if simple {
        params.def2_ok()
    } else {
        params.def1_ok()
    };
    if !valid && !force {
        return Err(Error::InvalidParams(format!(
            "{params}: {} are not defined for these parameters (use --force)",
            if simple {
                "simple clusters"
            } else {
                "clusters"
            }
        )));
    }
    let witness = clusters::find_cluster(&family, d, simple)?;
    Ok(Report {
        command: "check",
        params: Some(params),
        outcome: pass_or_fail(witness.is_none()),
        details: json!({
            "family_size": family.len(),
            "simple": simple,
            "cluster_free": witness.is_none(),
            "witness": witness,
            "validity": params.validity(),
        }),
    })
}

/// The statements an exhausted search is expected to confirm.
pub fn search_invariants(problem: &SearchProblem, result: &SearchResult) -> Vec<(String, bool)> {
    let p = problem.params;
    let n = p.n;
    let reference = problem.reference_bound();
    let mut out = Vec::new();
    match problem.mode {
        Mode::ClusterFree if p.def1_ok() && p.thm1_ok() => {
            out.push((
                "optimum equals C(n-1,k-1)".into(),
                result.optimum == reference,
            ));
            if !(p.d == 2 && n == 2 * p.k) {
                out.push((
                    "every optimal family is a star".into(),
                    result.census.other == 0 && result.census.full == 0,
                ));
                out.push((
                    "all n stars are optimal".into(),
                    result.census.star == n as u64,
                ));
            }
        }
        Mode::SimpleClusterFree if p.def2_ok() && p.thm2_ok() => {
            out.push((
                "optimum equals C(n-1,k-1)".into(),
                result.optimum == reference,
            ));
            out.push((
                "all n stars are optimal".into(),
                result.census.star >= n as u64,
            ));
        }
        Mode::Weighted if p.thm1_ok() => {
            out.push((
                "optimum equals k C(n,k)".into(),
                result.optimum == reference,
            ));
            if !(p.d == 2 && n == 2 * p.k) {
                out.push((
                    "optimal families are stars or the full family".into(),
                    result.census.other == 0,
                ));
                out.push((
                    "the full family and all n stars are optimal".into(),
                    result.census.full == 1 && result.census.star == n as u64,
                ));
            }
        }
        _ => {}
    }
    out
}

pub fn cmd_search(args: &SearchArgs, threads: usize, force: bool) -> crate::Result<Report> {
    let params = Params::new(args.n, args.k, args.d)?;
    let mode = if args.weighted {
        Mode::Weighted
    } else if args.simple {
        Mode::SimpleClusterFree
    } else {
        Mode::ClusterFree
    };
    let problem = SearchProblem {
        params,
        mode,
        budget: Budget {
            max_nodes: args.max_nodes,
            max_time: Duration::from_secs(args.max_seconds),
        },
        threads,
        max_representatives: args.representatives,
        force,
    };
    let result = search::solve(&problem)?;
    let invariants = search_invariants(&problem, &result);
    let outcome = if !result.exhausted {
        Outcome::BudgetExhausted
    } else {
        pass_or_fail(invariants.iter().all(|(_, ok)| *ok))
    };
    let invariants: Vec<Value> = invariants
        .into_iter()
        .map(|(name, holds)| json!({ "statement": name, "holds": holds }))
        .collect();
    Ok(Report {
        command: "search",
        params: Some(params),
        outcome,
        details: json!({
            "mode": mode,
            "optimum": result.optimum,
            "reference_bound": result.reference_bound,
            "exhausted": result.exhausted,
            "extremal_count": result.extremal_count,
            "census": result.census,
            "representatives": result.representatives,
            "invariants": invariants,
            "validity": params.validity(),
        }),
    })
}

pub fn cmd_verify(
    suite: verify::Suite,
    opts: &verify::SuiteOptions,
    threads: usize,
) -> crate::Result<Report> {
    let reports = pool(threads, || verify::run(suite, opts))?;
    let ok = reports.iter().all(|r| r.pass());
    Ok(Report {
        command: "verify",
        params: None,
        outcome: pass_or_fail(ok),
        details: json!({
            "seed": opts.seed,
            "suites": reports,
        }),
    })
}

pub fn cmd_census(
    k: usize,
    d: usize,
    simple: bool,
    emit: bool,
    budget: u128,
) -> crate::Result<Report> {
    let params = Params::new(2 * k, k, d)?;
    let classes = if simple {
        clusters::simple_cluster_classes(k, d)?
    } else {
        clusters::cluster_classes(k, d, budget)?
    };
    let mut details = json!({
        "k": k,
        "d": d,
        "simple": simple,
        "classes": classes.len(),
    });
    if emit {
        details["representatives"] = json!(classes);
    }
    Ok(Report {
        command: "census",
        params: Some(params),
        outcome: Outcome::Pass,
        details,
    })
}

pub fn cmd_cycle_stats(file: &Path, fstar_file: &Path, threads: usize) -> crate::Result<Report> {
    let family = read_family(file)?;
    let fstar = read_family(fstar_file)?;
    let trace = pool(threads, || aggregate_inequality(&family, &fstar))?;
    Ok(Report {
        command: "cycle-stats",
        params: None,
        outcome: pass_or_fail(trace.pass),
        details: json!({
            "family_size": family.len(),
            "fstar_size": fstar.len(),
            "trace": trace,
        }),
    })
}
