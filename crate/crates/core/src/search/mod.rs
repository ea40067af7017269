//! Exact extremal search over k-uniform families.
//!
//! Three objectives are supported: the largest family without a d-cluster,
//! the largest family without a simple d-cluster, and the weighted
//! objective `k|F*| + n|F - F*|` where `F*` is the set of members lying in
//! some d-cluster of `F`. Every search reports the optimum, the exact number
//! of optimal families split into stars, the full family and everything
//! else, and the least few families of each kind.
//!
//! The main searches are branch-and-bound over the k-sets in canonical
//! order; [`oracle_exhaustive`] walks all `2^C(n,k)` families and exists to
//! cross-check them.

mod bnb;
mod hypergraph;
mod oracle;

use std::collections::BTreeSet;
use std::time::Duration;

use serde::Serialize;

use crate::clusters;
use crate::error::{Error, Result};
use crate::ground::{binom_small, Family, Params};

pub use hypergraph::MAX_VERTICES;
pub use oracle::MAX_ORACLE_VERTICES;

use hypergraph::{iter_bits, ConflictHypergraph, VMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    ClusterFree,
    SimpleClusterFree,
    Weighted,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ClusterFree => "cluster_free",
            Mode::SimpleClusterFree => "simple_cluster_free",
            Mode::Weighted => "weighted",
        }
    }
}

/// Node and wall-clock limits; exceeding either yields `exhausted = false`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
    pub max_time: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 1_000_000_000,
            max_time: Duration::from_secs(600),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchProblem {
    pub params: Params,
    pub mode: Mode,
    pub budget: Budget,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    /// How many least families of each class to keep.
    pub max_representatives: usize,
    /// Run even when the mode's parameter condition fails.
    pub force: bool,
}

impl SearchProblem {
    pub fn new(params: Params, mode: Mode) -> Self {
        SearchProblem {
            params,
            mode,
            budget: Budget::default(),
            threads: 0,
            max_representatives: 1,
            force: false,
        }
    }

    /// Whether the parameter condition of the mode holds: d-clusters are
    /// defined, simple d-clusters are defined, or `k <= n/2` respectively.
    pub fn params_valid(&self) -> bool {
        match self.mode {
            Mode::ClusterFree => self.params.def1_ok(),
            Mode::SimpleClusterFree => self.params.def2_ok(),
            Mode::Weighted => self.params.thm1_ok(),
        }
    }

    fn check(&self) -> Result<()> {
        if !self.force && !self.params_valid() {
            return Err(Error::InvalidParams(format!(
                "{} fails the {} parameter condition (use force to override)",
                self.params,
                self.mode.name()
            )));
        }
        Ok(())
    }

    /// The value the known bounds predict: `C(n-1,k-1)`, or `k C(n,k)` for
    /// the weighted objective.
    pub fn reference_bound(&self) -> u128 {
        let Params { n, k, .. } = self.params;
        match self.mode {
            Mode::ClusterFree | Mode::SimpleClusterFree => binom_small(n - 1, k - 1),
            Mode::Weighted => k as u128 * binom_small(n, k),
        }
    }

    fn simple_only(&self) -> bool {
        self.mode == Mode::SimpleClusterFree
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ExtremalClass {
    /// All k-sets containing `center`.
    Star {
        center: usize,
    },
    /// All of `([n] choose k)`.
    Full,
    Other,
}

impl ExtremalClass {
    fn kind(self) -> usize {
        match self {
            ExtremalClass::Star { .. } => 0,
            ExtremalClass::Full => 1,
            ExtremalClass::Other => 2,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub star: u64,
    pub full: u64,
    pub other: u64,
    pub star_centers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Representative {
    #[serde(flatten)]
    pub class: ExtremalClass,
    pub family: Family,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchResult {
    pub params: Params,
    pub mode: Mode,
    /// Best objective value found; exact when `exhausted`.
    pub optimum: u128,
    pub reference_bound: u128,
    pub extremal_count: u64,
    pub census: Census,
    /// Least families of each class, in class order.
    pub representatives: Vec<Representative>,
    pub exhausted: bool,
}

/// Optimal families seen so far, merged associatively across workers.
#[derive(Clone, Debug)]
pub(crate) struct Tally {
    best: Option<u128>,
    count: u64,
    by_kind: [u64; 3],
    centers: BTreeSet<usize>,
    reps: [Vec<(Vec<u8>, VMask, ExtremalClass)>; 3],
    max_reps: usize,
}

impl Tally {
    pub(crate) fn new(max_reps: usize) -> Self {
        Tally {
            best: None,
            count: 0,
            by_kind: [0; 3],
            centers: BTreeSet::new(),
            reps: Default::default(),
            max_reps,
        }
    }

    fn reset(&mut self, value: u128) {
        let max_reps = self.max_reps;
        *self = Tally::new(max_reps);
        self.best = Some(value);
    }

    pub(crate) fn best(&self) -> Option<u128> {
        self.best
    }

    pub(crate) fn offer(&mut self, value: u128, mask: VMask, class: ExtremalClass) {
        match self.best {
            Some(b) if value < b => return,
            Some(b) if value == b => {}
            _ => self.reset(value),
        }
        self.count += 1;
        self.by_kind[class.kind()] += 1;
        if let ExtremalClass::Star { center } = class {
            self.centers.insert(center);
        }
        let reps = &mut self.reps[class.kind()];
        let key: Vec<u8> = iter_bits(mask).map(|i| i as u8).collect();
        if reps.len() < self.max_reps || reps.last().is_some_and(|(k, _, _)| key < *k) {
            let pos = reps.partition_point(|(k, _, _)| *k < key);
            reps.insert(pos, (key, mask, class));
            reps.truncate(self.max_reps);
        }
    }

    pub(crate) fn merge(mut self, other: Tally) -> Tally {
        match (self.best, other.best) {
            (_, None) => self,
            (None, Some(_)) => other,
            (Some(a), Some(b)) if b > a => other,
            (Some(a), Some(b)) if b < a => self,
            _ => {
                self.count += other.count;
                for i in 0..3 {
                    self.by_kind[i] += other.by_kind[i];
                    self.reps[i].extend(other.reps[i].iter().cloned());
                    self.reps[i].sort_by(|a, b| a.0.cmp(&b.0));
                    self.reps[i].dedup_by(|a, b| a.0 == b.0);
                    self.reps[i].truncate(self.max_reps);
                }
                self.centers.extend(other.centers);
                self
            }
        }
    }

    fn into_result(
        self,
        problem: &SearchProblem,
        h: &ConflictHypergraph,
        exhausted: bool,
    ) -> SearchResult {
        let Params { n, k, .. } = problem.params;
        let representatives = self
            .reps
            .iter()
            .flatten()
            .map(|(_, mask, class)| Representative {
                class: *class,
                family: Family::from_sorted_unchecked(n, k, h.sets_of(*mask)),
            })
            .collect();
        SearchResult {
            params: problem.params,
            mode: problem.mode,
            optimum: self.best.unwrap_or(0),
            reference_bound: problem.reference_bound(),
            extremal_count: self.count,
            census: Census {
                star: self.by_kind[0],
                full: self.by_kind[1],
                other: self.by_kind[2],
                star_centers: self.centers.into_iter().collect(),
            },
            representatives,
            exhausted,
        }
    }
}

pub(crate) fn classify_mask(h: &ConflictHypergraph, mask: VMask) -> ExtremalClass {
    if mask == h.all() {
        ExtremalClass::Full
    } else if let Some(x) = h.stars.iter().position(|&s| s == mask) {
        ExtremalClass::Star { center: x + 1 }
    } else {
        ExtremalClass::Other
    }
}

/// Objective of a mask: its size, or `k|F| + (n-k)|F - F*|` when weighted.
pub(crate) fn weighted_value(h: &ConflictHypergraph, mask: VMask, clustered: VMask) -> u128 {
    let Params { n, k, .. } = h.params;
    (k as u128) * mask.count_ones() as u128
        + (n - k) as u128 * (mask & !clustered).count_ones() as u128
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Largest family with no d-cluster (or no simple d-cluster), with the full
/// census of optimal families.
///
/// The optimum is found with the first member fixed to `{1, ..., k}` (every
/// nonempty family has an isomorphic copy containing it); the census is then
/// a second pass over all families of that size with no symmetry reduction.
pub fn max_cluster_free(problem: &SearchProblem) -> Result<SearchResult> {
    if problem.mode == Mode::Weighted {
        return Err(Error::InvalidParams(
            "weighted mode: use max_weighted".into(),
        ));
    }
    problem.check()?;
    let h = ConflictHypergraph::build(problem.params, problem.simple_only())?;
    in_pool(problem.threads, || bnb::cluster_free(&h, problem))?
}

/// Maximum of `k|F*| + n|F - F*|` over all families `F`, where `F*` is the
/// set of members of `F` lying in some d-cluster of `F`.
pub fn max_weighted(problem: &SearchProblem) -> Result<SearchResult> {
    if problem.mode != Mode::Weighted {
        return Err(Error::InvalidParams(
            "max_weighted needs weighted mode".into(),
        ));
    }
    problem.check()?;
    let h = ConflictHypergraph::build(problem.params, false)?;
    in_pool(problem.threads, || bnb::weighted(&h, problem))?
}

/// Dispatches on the problem's mode.
pub fn solve(problem: &SearchProblem) -> Result<SearchResult> {
    match problem.mode {
        Mode::Weighted => max_weighted(problem),
        _ => max_cluster_free(problem),
    }
}

/// The same contract as [`solve`], by enumerating every family.
pub fn oracle_exhaustive(problem: &SearchProblem) -> Result<SearchResult> {
    problem.check()?;
    let h = ConflictHypergraph::build_unpruned(problem.params, problem.simple_only())?;
    in_pool(problem.threads, || oracle::run(&h, problem))?
}

/// Objective value of `family` under `problem`, or `None` if the family is
/// infeasible (contains a forbidden cluster).
pub fn objective(family: &Family, problem: &SearchProblem) -> Result<Option<u128>> {
    let Params { n, k, d } = problem.params;
    if family.n() != n || family.k() != k {
        return Err(Error::ShapeMismatch);
    }
    Ok(match problem.mode {
        Mode::ClusterFree | Mode::SimpleClusterFree => {
            clusters::is_cluster_free(family, d, problem.simple_only())?
                .then_some(family.len() as u128)
        }
        Mode::Weighted => {
            let fstar = clusters::cluster_members(family, d)?.len() as u128;
            let free = family.len() as u128 - fstar;
            Some(k as u128 * fstar + n as u128 * free)
        }
    })
}

/// Classifies a family attaining `optimum` as a star, the full family or
/// other.
pub fn classify_extremal(
    family: &Family,
    problem: &SearchProblem,
    optimum: u128,
) -> Result<ExtremalClass> {
    match objective(family, problem)? {
        None => {
            return Err(Error::NotExtremal(format!(
                "family contains a forbidden {}-cluster",
                problem.params.d
            )))
        }
        Some(v) if v != optimum => {
            return Err(Error::NotExtremal(format!(
                "value {v} differs from optimum {optimum}"
            )))
        }
        Some(_) => {}
    }
    let Params { n, k, .. } = problem.params;
    if family.len() as u128 == binom_small(n, k) {
        return Ok(ExtremalClass::Full);
    }
    for x in 1..=n {
        if *family == Family::star(n, k, x)? {
            return Ok(ExtremalClass::Star { center: x });
        }
    }
    Ok(ExtremalClass::Other)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(n: usize, k: usize, d: usize, mode: Mode) -> SearchProblem {
        SearchProblem::new(Params::new(n, k, d).unwrap(), mode)
    }

    #[test]
    fn ekr_small() {
        let r = max_cluster_free(&problem(5, 2, 2, Mode::ClusterFree)).unwrap();
        assert!(r.exhausted);
        assert_eq!(r.optimum, 4);
        assert_eq!((r.census.star, r.census.full, r.census.other), (5, 0, 0));
        assert_eq!(r.census.star_centers, vec![1, 2, 3, 4, 5]);
        assert_eq!(r.representatives.len(), 1);
        assert_eq!(
            r.representatives[0].class,
            ExtremalClass::Star { center: 1 }
        );
    }

    #[test]
    fn boundary_has_other_families() {
        let r = max_cluster_free(&problem(4, 2, 2, Mode::ClusterFree)).unwrap();
        assert_eq!(r.optimum, 3);
        // four stars and four triangles
        assert_eq!((r.census.star, r.census.other), (4, 4));
    }

    #[test]
    fn weighted_small() {
        let r = max_weighted(&problem(5, 2, 2, Mode::Weighted)).unwrap();
        assert!(r.exhausted);
        assert_eq!(r.optimum, 20);
        assert_eq!((r.census.star, r.census.full, r.census.other), (5, 1, 0));
    }

    #[test]
    fn mode_gates() {
        // 5 * 2 < 3 * 4: d-clusters undefined
        let p = problem(5, 4, 3, Mode::ClusterFree);
        assert!(matches!(max_cluster_free(&p), Err(Error::InvalidParams(_))));
        let mut forced = p.clone();
        forced.force = true;
        assert!(max_cluster_free(&forced).is_ok());
        assert!(max_weighted(&problem(5, 3, 2, Mode::Weighted)).is_err());
        assert!(max_weighted(&problem(6, 3, 2, Mode::ClusterFree)).is_err());
    }

    #[test]
    fn classify_examples() {
        let p = problem(5, 2, 2, Mode::ClusterFree);
        let star = Family::star(5, 2, 3).unwrap();
        assert_eq!(
            classify_extremal(&star, &p, 4),
            Ok(ExtremalClass::Star { center: 3 })
        );
        let w = problem(5, 2, 2, Mode::Weighted);
        let full = Family::full(5, 2).unwrap();
        assert_eq!(classify_extremal(&full, &w, 20), Ok(ExtremalClass::Full));
        assert!(matches!(
            classify_extremal(&full, &p, 4),
            Err(Error::NotExtremal(_))
        ));
        let b = problem(4, 2, 2, Mode::ClusterFree);
        let tri = Family::from_lists(4, 2, &[[1, 2], [1, 3], [2, 3]]).unwrap();
        assert_eq!(classify_extremal(&tri, &b, 3), Ok(ExtremalClass::Other));
        assert!(matches!(
            classify_extremal(&tri, &b, 4),
            Err(Error::NotExtremal(_))
        ));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut p = problem(6, 3, 3, Mode::ClusterFree);
        p.budget.max_nodes = 10;
        let r = max_cluster_free(&p).unwrap();
        assert!(!r.exhausted);
        assert!(r.optimum >= 1);
    }
}
