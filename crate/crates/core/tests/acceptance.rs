//! Acceptance suite: one PASS/FAIL line per criterion, with its runtime
//! limit. Exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use clusterforge::cli::{self, verify};
use clusterforge::clusters::census_simple;
use clusterforge::cycle::{all_cyclic_perms, incidence_count};
use clusterforge::ground::{binom, ksubsets};
use clusterforge::search::{
    max_cluster_free, max_weighted, oracle_exhaustive, Mode, SearchProblem, SearchResult,
};
use clusterforge::Params;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn problem(n: usize, k: usize, d: usize, mode: Mode) -> SearchProblem {
    SearchProblem::new(Params::new(n, k, d).expect("valid parameters"), mode)
}

fn census(r: &SearchResult) -> (u64, u64, u64) {
    (r.census.star, r.census.full, r.census.other)
}

fn c(n: usize, k: usize) -> u128 {
    binom(n as u64, k as u64).expect("small binomial")
}

fn ekr_base() -> Check {
    let r = max_cluster_free(&problem(5, 2, 2, Mode::ClusterFree)).map_err(|e| e.to_string())?;
    ensure(
        r.exhausted && r.optimum == 4 && r.optimum == c(4, 1) && census(&r) == (5, 0, 0),
        format!(
            "(5,2,2) optimum {} census {:?} exhausted {}",
            r.optimum,
            census(&r),
            r.exhausted
        ),
    )
}

fn three_clusters() -> Check {
    let p = problem(6, 3, 3, Mode::ClusterFree);
    let r = max_cluster_free(&p).map_err(|e| e.to_string())?;
    let o = oracle_exhaustive(&p).map_err(|e| e.to_string())?;
    ensure(
        r.exhausted && r.optimum == 10 && r.optimum == c(5, 2) && census(&r) == (6, 0, 0) && r == o,
        format!(
            "(6,3,3) optimum {} census {:?}; exhaustive oracle over 2^20 agrees: {}",
            r.optimum,
            census(&r),
            r == o
        ),
    )
}

fn boundary_exception() -> Check {
    let r = max_cluster_free(&problem(4, 2, 2, Mode::ClusterFree)).map_err(|e| e.to_string())?;
    ensure(
        r.exhausted && r.optimum == 3 && r.census.other > 0,
        format!("(4,2,2) optimum {} census {:?}", r.optimum, census(&r)),
    )
}

fn weighted() -> Check {
    let p = problem(5, 2, 2, Mode::Weighted);
    let r = max_weighted(&p).map_err(|e| e.to_string())?;
    let o = oracle_exhaustive(&p).map_err(|e| e.to_string())?;
    ensure(
        r.exhausted
            && r.optimum == 20
            && r.optimum == 2 * c(5, 2)
            && census(&r) == (5, 1, 0)
            && r == o,
        format!(
            "(5,2,2) weighted optimum {} census {:?}; oracle agrees: {}",
            r.optimum,
            census(&r),
            r == o
        ),
    )
}

fn simple_censuses() -> Check {
    let mut found = Vec::new();
    let mut ok = true;
    for (k, d, want) in [(4, 3, 2), (4, 4, 5), (5, 3, 2), (6, 3, 2), (7, 3, 2)] {
        let got = census_simple(k, d).map_err(|e| e.to_string())?;
        ok &= got == want;
        found.push(format!("({k},{d})={got}"));
    }
    ensure(ok, format!("simple cluster classes {}", found.join(" ")))
}

fn simple_search() -> Check {
    let r =
        max_cluster_free(&problem(7, 3, 3, Mode::SimpleClusterFree)).map_err(|e| e.to_string())?;
    ensure(
        r.exhausted && r.optimum == 15 && r.optimum == c(6, 2),
        format!(
            "(7,3,3) simple optimum {} census {:?} exhausted {}",
            r.optimum,
            census(&r),
            r.exhausted
        ),
    )
}

fn incidence() -> Check {
    let perms = all_cyclic_perms(6).map_err(|e| e.to_string())?.len();
    let mut counts = std::collections::BTreeSet::new();
    for b in ksubsets(6, 2) {
        counts.insert(incidence_count(b, 6).map_err(|e| e.to_string())?);
    }
    ensure(
        perms == 120 && counts.len() == 1 && counts.contains(&48),
        format!("n=6 k=2: {perms} cyclic permutations, incidences {counts:?}"),
    )
}

fn suite(s: verify::Suite, seed: u64, trials: usize) -> Result<Vec<verify::SuiteReport>, String> {
    let opts = verify::SuiteOptions {
        seed,
        trials: Some(trials),
        ..Default::default()
    };
    verify::run(s, &opts).map_err(|e| e.to_string())
}

fn cycle_claims() -> Check {
    let reports = suite(verify::Suite::Cycle, 2024, 200)?;
    let r = &reports[0];
    let shapes = r.summary["shapes"].as_array().cloned().unwrap_or_default();
    let equalities: Vec<u64> = shapes
        .iter()
        .map(|s| s["equality_instances"].as_u64().unwrap_or(0))
        .collect();
    ensure(
        r.pass() && shapes.len() == 2 && equalities.iter().all(|&e| e > 0),
        format!(
            "{} checks over (6,2) and (7,3), every cyclic permutation, {} violations; equality instances {:?}",
            r.instances, r.violations, equalities
        ),
    )
}

fn identities() -> Check {
    let ids = suite(verify::Suite::Identities, 2024, 1000)?;
    let avg = suite(verify::Suite::Avgid, 2024, 10_000)?;
    ensure(
        ids[0].pass() && avg[0].pass() && ids[0].instances == 2000 && avg[0].instances == 10_000,
        format!(
            "{} families with {} violations; {} averaging inputs with {} violations",
            ids[0].instances, ids[0].violations, avg[0].instances, avg[0].violations
        ),
    )
}

fn link_and_pair_statements() -> Check {
    let tri = suite(verify::Suite::Trianglepart, 2024, 100)?;
    let pin = suite(verify::Suite::Propint, 2024, 100)?;
    ensure(
        tri[0].pass() && pin[0].pass(),
        format!(
            "(7,3,3): link-cluster statement {}/{} clean, pair statement {}/{} clean",
            tri[0].instances - tri[0].violations,
            tri[0].instances,
            pin[0].instances - pin[0].violations,
            pin[0].instances
        ),
    )
}

fn determinism() -> Check {
    let commands = [
        "search --n 5 --k 2 --d 2",
        "search --n 6 --k 3 --d 3",
        "search --n 4 --k 2 --d 2",
        "search --n 5 --k 2 --d 2 --weighted",
        "census --k 4 --d 3 --simple",
        "census --k 4 --d 4 --simple",
        "search --n 7 --k 3 --d 3 --simple",
    ];
    let mut differing = Vec::new();
    for args in commands {
        let runs: Vec<_> = [1, 8]
            .iter()
            .map(|t| {
                let line = format!("clusterforge {args} --json --threads {t}");
                cli::run(line.split_whitespace())
            })
            .collect();
        if runs[0] != runs[1] || runs[0].code != cli::EXIT_PASS {
            differing.push(args);
        }
    }
    ensure(
        differing.is_empty(),
        format!(
            "{} JSON reports compared at 1 and 8 threads; differing: {differing:?}",
            commands.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("EKR base case", Duration::from_secs(1), ekr_base),
        (
            "3-cluster-free maximum",
            Duration::from_secs(60),
            three_clusters,
        ),
        (
            "n = 2k exception",
            Duration::from_secs(1),
            boundary_exception,
        ),
        (
            "weighted maximum and equality",
            Duration::from_secs(10),
            weighted,
        ),
        (
            "simple cluster censuses",
            Duration::from_secs(60),
            simple_censuses,
        ),
        (
            "simple-cluster-free maximum",
            Duration::from_secs(600),
            simple_search,
        ),
        ("cyclic incidence", Duration::from_secs(1), incidence),
        (
            "cycle claims and aggregate chain",
            Duration::from_secs(120),
            cycle_claims,
        ),
        ("counting identities", Duration::from_secs(60), identities),
        (
            "link and pair statements",
            Duration::from_secs(120),
            link_and_pair_statements,
        ),
        ("thread determinism", Duration::from_secs(600), determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let (status, detail) = match (&outcome, in_time) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; over the {limit:?} limit")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "{status} {:>2} {name}: {detail} [{:.3}s / limit {}s]",
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
