//! Seeded verification suites behind the `verify` command.

use rand::{Rng, RngCore};
use serde::Serialize;
use serde_json::{json, Value};

use crate::clusters::cluster_members;
use crate::cycle::{self, aggregate_inequality, incidence_count, verify_cycle_claims_all};
use crate::error::Result;
use crate::ground::{binom_small, factorial, ksubsets, Family, Params};
use crate::operators::{
    alpha, avg_binom_bound, check_propint, check_sum_identity, check_trianglepart, link, r_family,
    s_family, split, unique_extension_bound, upset,
};
use crate::random::{random_instance, rng, simple_cluster_free_family, Generated};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Identities,
    Trianglepart,
    Propint,
    Cycle,
    Avgid,
    All,
}

/// Knobs shared by all suites; `None` picks the suite default.
#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteOptions {
    pub seed: u64,
    pub trials: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub d: Option<usize>,
}

/// One suite's outcome: how many instances ran, and the first failure with
/// everything needed to reproduce it.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub instances: usize,
    pub violations: usize,
    pub first_violation: Option<Value>,
    pub summary: Value,
}

impl SuiteReport {
    fn new(suite: &'static str) -> Self {
        SuiteReport {
            suite,
            instances: 0,
            violations: 0,
            first_violation: None,
            summary: Value::Null,
        }
    }

    fn record(&mut self, ok: bool, repro: impl FnOnce() -> Value) {
        self.instances += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(repro());
            }
        }
    }

    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

pub fn run(suite: Suite, opts: &SuiteOptions) -> Result<Vec<SuiteReport>> {
    Ok(match suite {
        Suite::Identities => vec![identities(opts)?],
        Suite::Trianglepart => vec![trianglepart(opts)?],
        Suite::Propint => vec![propint(opts)?],
        Suite::Cycle => vec![cycle_suite(opts)?],
        Suite::Avgid => vec![avgid(opts)?],
        Suite::All => vec![
            identities(opts)?,
            trianglepart(opts)?,
            propint(opts)?,
            cycle_suite(opts)?,
            avgid(opts)?,
        ],
    })
}

fn shapes(opts: &SuiteOptions, defaults: &[(usize, usize)]) -> Vec<(usize, usize)> {
    match (opts.n, opts.k) {
        (Some(n), Some(k)) => vec![(n, k)],
        (Some(n), None) => defaults.iter().filter(|s| s.0 == n).copied().collect(),
        (None, Some(k)) => defaults.iter().filter(|s| s.1 == k).copied().collect(),
        (None, None) => defaults.to_vec(),
    }
}

fn instance_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut master = rng(seed);
    (0..count).map(|_| master.next_u64()).collect()
}

fn lists(f: &Family) -> Vec<Vec<usize>> {
    f.iter().map(|s| s.to_vec()).collect()
}

fn repro(g: &Generated) -> Value {
    json!({ "generator": g.generator, "family": lists(&g.family), "n": g.family.n(), "k": g.family.k() })
}

/// Sum identity, unique-extension bound and the per-point complement
/// identity of links on random families.
fn identities(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("identities");
    let trials = opts.trials.unwrap_or(1000);
    for (n, k) in shapes(opts, &[(6, 2), (7, 3)]) {
        for s in instance_seeds(opts.seed, trials) {
            let g = random_instance(n, k, s)?;
            let f = &g.family;
            let (lhs, rhs) = check_sum_identity(f);
            let ueb = unique_extension_bound(f)?;
            let comp = f.complement();
            let mut link_ok = true;
            for x in 1..=n {
                link_ok &= (link(f, x)?.len() + link(&comp, x)?.len()) as u128
                    == binom_small(n - 1, k - 1);
            }
            report.record(lhs == rhs && ueb.holds() && link_ok, || {
                json!({
                    "instance": repro(&g),
                    "sum_identity": [lhs, rhs],
                    "unique_extension": ueb,
                    "link_complement_identity": link_ok,
                })
            });
        }
    }
    Ok(report)
}

fn avgid(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("avgid");
    let mut r = rng(opts.seed);
    for _ in 0..opts.trials.unwrap_or(10_000) {
        let m = r.gen_range(1..=8);
        let rs: Vec<u64> = (0..m).map(|_| r.gen_range(0..=20)).collect();
        let l = r.gen_range(0..=6);
        let (lhs, rhs) = avg_binom_bound(&rs, l)?;
        report.record(
            lhs >= rhs,
            || json!({ "rs": rs, "l": l, "lhs": lhs, "rhs": rhs }),
        );
    }
    Ok(report)
}

/// Random `F` with `F* = cluster_members(F, d)`, checked at every point.
fn trianglepart(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("trianglepart");
    let (n, k, d) = (
        opts.n.unwrap_or(7),
        opts.k.unwrap_or(3),
        opts.d.unwrap_or(3),
    );
    Params::new(n, k, d)?;
    for s in instance_seeds(opts.seed, opts.trials.unwrap_or(100)) {
        let g = random_instance(n, k, s)?;
        let fstar = cluster_members(&g.family, d)?;
        let mut bad = None;
        for x in 1..=n {
            let r = check_trianglepart(&g.family, &fstar, x, d)?;
            if !r.holds() {
                bad = Some((x, r));
                break;
            }
        }
        report.record(bad.is_none(), || {
            let (x, r) = bad.clone().expect("violation");
            json!({ "instance": repro(&g), "d": d, "fstar": lists(&fstar), "x": x, "report": r })
        });
    }
    Ok(report)
}

/// Simple-cluster-free families: the pair statement plus the structural
/// facts about the R and S families used alongside it.
fn propint(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("propint");
    let (n, k, d) = (
        opts.n.unwrap_or(7),
        opts.k.unwrap_or(3),
        opts.d.unwrap_or(3),
    );
    let params = Params::new(n, k, d)?;
    let mut methods = std::collections::BTreeMap::<&str, usize>::new();
    for s in instance_seeds(opts.seed, opts.trials.unwrap_or(100)) {
        let g = simple_cluster_free_family(params, s, 200)?;
        *methods.entry(g.generator.method).or_default() += 1;
        let f = &g.family;
        let pair = check_propint(f, d)?;
        let mut failure: Option<String> = (!pair.holds()).then(|| format!("{pair:?}"));
        for x in 1..=n {
            if failure.is_some() {
                break;
            }
            let lk = link(f, x)?;
            let sx = s_family(f, x)?;
            let rx = r_family(f, x, d)?;
            let (_, without) = split(f, x)?;
            let mut expected_s = 0;
            for b in without.iter() {
                expected_s += b.len() - alpha(f, b)?.members.len();
            }
            let mut unique = true;
            for dset in &sx.members {
                unique &= upset(f, *dset)?.len() == 1;
            }
            if lk.intersection_len(&sx) != 0 {
                failure = Some(format!("link and S meet at x={x}"));
            } else if lk.intersection_len(&rx) != 0 {
                failure = Some(format!("link and R meet at x={x}"));
            } else if sx.len() != expected_s {
                failure = Some(format!(
                    "|S| = {} but the pair count is {expected_s} at x={x}",
                    sx.len()
                ));
            } else if !unique {
                failure = Some(format!("a member of S has several extensions at x={x}"));
            }
        }
        report.record(
            failure.is_none(),
            || json!({ "instance": repro(&g), "d": d, "detail": failure.clone() }),
        );
    }
    report.summary = json!({ "generators": methods });
    Ok(report)
}

/// Incidence counts, then both claims over every cyclic permutation and the
/// full aggregate chain for random `(F, F*)` with `F*` the members of
/// disjoint pairs.
fn cycle_suite(opts: &SuiteOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("cycle");
    let trials = opts.trials.unwrap_or(200);
    let mut incidences = Vec::new();
    for (n, k) in shapes(opts, &[(6, 2), (7, 3)]) {
        let expected = factorial(k) * factorial(n - k);
        let mut counts = std::collections::BTreeSet::new();
        for b in ksubsets(n, k) {
            let c = incidence_count(b, n)?;
            counts.insert(c);
            report.record(
                c == expected,
                || json!({ "n": n, "k": k, "set": b, "incidence": c, "expected": expected }),
            );
        }
        incidences.push(json!({
            "n": n,
            "k": k,
            "perms": factorial(n - 1),
            "expected": expected,
            "observed": counts,
        }));

        let mut equalities = 0;
        for s in instance_seeds(opts.seed, trials) {
            let g = random_instance(n, k, s)?;
            let f = &g.family;
            let fstar = cluster_members(f, 2)?;
            let sweep = verify_cycle_claims_all(f, &fstar)?;
            let trace = aggregate_inequality(f, &fstar)?;
            let is_star =
                fstar.is_empty() && (1..=n).any(|x| Family::star(n, k, x).is_ok_and(|st| st == *f));
            let is_full = f.len() as u128 == binom_small(n, k);
            let equality_ok = trace.boundary || trace.equality == (is_star || is_full);
            equalities += trace.equality as usize;
            let ok = sweep.violations == 0
                && trace.pass
                && trace.objective <= trace.flattened_bound
                && equality_ok;
            report.record(ok, || {
                json!({
                    "instance": repro(&g),
                    "fstar": lists(&fstar),
                    "claims": sweep,
                    "trace": trace,
                    "equality_matches_extremal_shape": equality_ok,
                })
            });
        }
        incidences.last_mut().expect("pushed")["equality_instances"] = json!(equalities);
    }
    report.summary = json!({ "shapes": incidences, "exhaustive_limit": cycle::MAX_EXHAUSTIVE_N });
    Ok(report)
}
