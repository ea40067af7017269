//! Cyclic permutations, arc families and the double count over all cyclic
//! orders of `[n]`.
//!
//! A cyclic permutation is stored with `1` in front, which picks one
//! representative per rotation class and gives exactly `(n-1)!` of them.

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{binom_small, factorial, next_permutation, Family, KSet};
use crate::operators::ser_ratio;

/// Largest `n` for which all `(n-1)!` cyclic permutations are enumerated.
pub const MAX_EXHAUSTIVE_N: usize = 10;

/// An arrangement `a_0, ..., a_{n-1}` of `[n]` up to rotation, with `a_0 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CyclicPerm {
    order: Vec<usize>,
}

impl CyclicPerm {
    /// Accepts any arrangement of `[n]` and rotates it to start at 1.
    pub fn new(mut order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n == 0 || n > crate::ground::MAX_N {
            return Err(Error::InvalidParams(format!("bad cycle length {n}")));
        }
        let mut seen = KSet::EMPTY;
        for &x in &order {
            if x == 0 || x > n {
                return Err(Error::ElementOutOfRange { element: x, n });
            }
            if seen.contains(x) {
                return Err(Error::InvalidParams(format!(
                    "element {x} repeated in cycle"
                )));
            }
            seen = seen.with(x);
        }
        let start = order.iter().position(|&x| x == 1).expect("1 is present");
        order.rotate_left(start);
        Ok(CyclicPerm { order })
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// Arc masks of length `k` indexed by starting point.
fn arc_masks(order: &[usize], k: usize) -> Vec<u64> {
    let n = order.len();
    (0..n)
        .map(|i| (0..k).fold(0u64, |m, t| m | 1 << (order[(i + t) % n] - 1)))
        .collect()
}

/// The `n` arcs `{a_i, ..., a_{i+k-1}}` (indices mod `n`), by starting point.
/// For `k = n` every arc is the whole ground set.
pub fn arcs(sigma: &CyclicPerm, k: usize) -> Result<Vec<KSet>> {
    if k == 0 || k > sigma.n() {
        return Err(Error::InvalidParams(format!(
            "need 1 <= k <= n, got k={k}, n={}",
            sigma.n()
        )));
    }
    Ok(arc_masks(&sigma.order, k)
        .into_iter()
        .map(KSet::from_bits)
        .collect())
}

/// `A_σ(G)`: members of `G` that are arcs of `σ`, with their starting points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArcFamily {
    pub perm: CyclicPerm,
    pub members: Vec<(usize, KSet)>,
}

impl ArcFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

fn check_cycle_shape(sigma: &CyclicPerm, family: &Family) -> Result<()> {
    if sigma.n() != family.n() {
        return Err(Error::ShapeMismatch);
    }
    Ok(())
}

pub fn arc_family(sigma: &CyclicPerm, family: &Family) -> Result<ArcFamily> {
    check_cycle_shape(sigma, family)?;
    let members = arcs(sigma, family.k())?
        .into_iter()
        .enumerate()
        .filter(|(_, a)| family.contains(*a))
        .collect();
    Ok(ArcFamily {
        perm: sigma.clone(),
        members,
    })
}

fn exhaustive_guard(n: usize) -> Result<()> {
    if n > MAX_EXHAUSTIVE_N {
        return Err(Error::ResourceGuard(format!(
            "enumerating all cyclic permutations needs n <= {MAX_EXHAUSTIVE_N}, got n={n}"
        )));
    }
    Ok(())
}

/// Folds `visit` over all `(n-1)!` rotation-canonical orders, one parallel
/// task per choice of `a_1`; per-task accumulators are merged in task order.
fn sweep<T, F, M>(n: usize, init: impl Fn() -> T + Sync, visit: F, merge: M) -> T
where
    T: Send,
    F: Fn(&mut T, &[usize]) + Sync,
    M: Fn(T, T) -> T + Sync,
{
    if n == 1 {
        let mut acc = init();
        visit(&mut acc, &[1]);
        return acc;
    }
    let parts: Vec<T> = (2..=n)
        .into_par_iter()
        .map(|second| {
            let mut acc = init();
            let mut rest: Vec<usize> = (2..=n).filter(|&x| x != second).collect();
            let mut order = vec![1, second];
            order.extend_from_slice(&rest);
            loop {
                visit(&mut acc, &order);
                if !next_permutation(&mut rest) {
                    break;
                }
                order.truncate(2);
                order.extend_from_slice(&rest);
            }
            acc
        })
        .collect();
    parts.into_iter().reduce(merge).unwrap_or_else(init)
}

/// Every rotation-canonical cyclic permutation of `[n]`, in lexicographic
/// order.
pub fn all_cyclic_perms(n: usize) -> Result<Vec<CyclicPerm>> {
    exhaustive_guard(n)?;
    let mut out = Vec::with_capacity(factorial(n.saturating_sub(1)) as usize);
    let mut rest: Vec<usize> = (2..=n).collect();
    loop {
        let mut order = vec![1];
        order.extend_from_slice(&rest);
        out.push(CyclicPerm { order });
        if !next_permutation(&mut rest) {
            break;
        }
    }
    Ok(out)
}

/// `count` cyclic permutations drawn uniformly (with replacement) from a
/// seeded generator, for `n` beyond exhaustive range.
pub fn sample_cyclic_perms(n: usize, count: usize, seed: u64) -> Vec<CyclicPerm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut rest: Vec<usize> = (2..=n).collect();
            rest.shuffle(&mut rng);
            let mut order = vec![1];
            order.extend(rest);
            CyclicPerm { order }
        })
        .collect()
}

/// Number of cyclic permutations having `b` as an arc; `k!(n-k)!` in theory.
pub fn incidence_count(b: KSet, n: usize) -> Result<u128> {
    exhaustive_guard(n)?;
    let k = b.len();
    if k == 0 || k > n || !b.is_subset(KSet::initial(n)) {
        return Err(Error::InvalidParams(format!(
            "{b} is not a nonempty subset of [{n}]"
        )));
    }
    Ok(sweep(
        n,
        || 0u128,
        |acc, order| {
            if arc_masks(order, k).contains(&b.bits()) {
                *acc += 1;
            }
        },
        |a, b| a + b,
    ))
}

/// Membership table over all bit vectors of `[n]`, `n <= MAX_EXHAUSTIVE_N`.
fn table(family: &Family) -> Vec<bool> {
    let mut t = vec![false; 1 << family.n()];
    for s in family.iter() {
        t[s.bits() as usize] = true;
    }
    t
}

/// Checks that every disjoint pair of `F` lies in `F*`, and `F* ⊆ F`.
pub fn check_disjoint_pair_hypothesis(family: &Family, fstar: &Family) -> Result<()> {
    fstar.require_subfamily_of(family)?;
    let m = family.members();
    for (i, &b) in m.iter().enumerate() {
        for &bp in &m[i + 1..] {
            if b.is_disjoint(bp) && !(fstar.contains(b) && fstar.contains(bp)) {
                return Err(Error::Hypothesis(format!(
                    "disjoint pair {b}, {bp} of F is not contained in F*"
                )));
            }
        }
    }
    Ok(())
}

fn check_cycle_params(n: usize, k: usize) -> Result<()> {
    if k < 2 || 2 * k > n {
        return Err(Error::InvalidParams(format!(
            "need 2 <= k <= n/2, got n={n}, k={k}"
        )));
    }
    Ok(())
}

/// Values of the two per-permutation claims for one `σ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    /// `|A_σ(F - F*)|`.
    pub free_arcs: usize,
    /// `|A_σ(F*)|`.
    pub star_arcs: usize,
    /// `free_arcs <= k`.
    pub claim_i: bool,
    /// `star_arcs <= 2(k - free_arcs)`; `None` when `A_σ(F - F*)` is empty.
    pub claim_ii: Option<bool>,
}

impl ClaimReport {
    pub fn holds(&self) -> bool {
        self.claim_i && self.claim_ii != Some(false)
    }
}

fn claims(free_arcs: usize, star_arcs: usize, k: usize) -> ClaimReport {
    ClaimReport {
        free_arcs,
        star_arcs,
        claim_i: free_arcs <= k,
        claim_ii: (free_arcs > 0).then(|| star_arcs + 2 * free_arcs <= 2 * k),
    }
}

/// Evaluates both claims for `σ`, after checking the disjoint-pair
/// hypothesis and `2 <= k <= n/2`.
pub fn verify_cycle_claims(
    family: &Family,
    fstar: &Family,
    sigma: &CyclicPerm,
) -> Result<ClaimReport> {
    check_cycle_shape(sigma, family)?;
    check_cycle_params(family.n(), family.k())?;
    check_disjoint_pair_hypothesis(family, fstar)?;
    let free = family.minus(fstar);
    let a_free = arc_family(sigma, &free)?.len();
    let a_star = arc_family(sigma, fstar)?.len();
    Ok(claims(a_free, a_star, family.k()))
}

/// Result of checking the claims over every cyclic permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimSweep {
    pub perms_checked: u128,
    pub violations: u128,
    /// The first violating permutation in lexicographic order, if any.
    pub first_violation: Option<(CyclicPerm, ClaimReport)>,
}

/// Checks both claims for all `(n-1)!` cyclic permutations.
pub fn verify_cycle_claims_all(family: &Family, fstar: &Family) -> Result<ClaimSweep> {
    check_cycle_params(family.n(), family.k())?;
    exhaustive_guard(family.n())?;
    check_disjoint_pair_hypothesis(family, fstar)?;
    let free = table(&family.minus(fstar));
    let star = table(fstar);
    let k = family.k();
    type Acc = (u128, u128, Option<(Vec<usize>, ClaimReport)>);
    let (checked, violations, first) = sweep(
        family.n(),
        || -> Acc { (0, 0, None) },
        |acc, order| {
            let masks = arc_masks(order, k);
            let a_free = masks.iter().filter(|m| free[**m as usize]).count();
            let a_star = masks.iter().filter(|m| star[**m as usize]).count();
            let r = claims(a_free, a_star, k);
            acc.0 += 1;
            if !r.holds() {
                acc.1 += 1;
                if acc.2.is_none() {
                    acc.2 = Some((order.to_vec(), r));
                }
            }
        },
        |a, b| (a.0 + b.0, a.1 + b.1, a.2.or(b.2)),
    );
    Ok(ClaimSweep {
        perms_checked: checked,
        violations,
        first_violation: first.map(|(o, r)| (CyclicPerm { order: o }, r)),
    })
}

/// Checks both claims on sampled permutations (any `n`).
pub fn verify_cycle_claims_sampled(
    family: &Family,
    fstar: &Family,
    count: usize,
    seed: u64,
) -> Result<ClaimSweep> {
    check_cycle_params(family.n(), family.k())?;
    check_disjoint_pair_hypothesis(family, fstar)?;
    let free = family.minus(fstar);
    let mut sweep = ClaimSweep {
        perms_checked: 0,
        violations: 0,
        first_violation: None,
    };
    for sigma in sample_cyclic_perms(family.n(), count, seed) {
        let r = claims(
            arc_family(&sigma, &free)?.len(),
            arc_family(&sigma, fstar)?.len(),
            family.k(),
        );
        sweep.perms_checked += 1;
        if !r.holds() {
            sweep.violations += 1;
            sweep.first_violation.get_or_insert((sigma, r));
        }
    }
    Ok(sweep)
}

/// `c_j = |{σ : |A_σ(F - F*)| = j}|` for `j = 0..=k` (longer only when the
/// first claim fails).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclePartition {
    pub counts: Vec<u128>,
}

impl CyclePartition {
    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    pub fn get(&self, j: usize) -> u128 {
        self.counts.get(j).copied().unwrap_or(0)
    }
}

/// Per-permutation sums needed by the aggregate trace.
#[derive(Clone, Default)]
struct Tally {
    counts: Vec<u128>,
    free_arc_total: u128,
    star_arc_total: u128,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        let len = self.counts.len().max(other.counts.len());
        self.counts.resize(len, 0);
        for (j, c) in other.counts.iter().enumerate() {
            self.counts[j] += c;
        }
        self.free_arc_total += other.free_arc_total;
        self.star_arc_total += other.star_arc_total;
        self
    }
}

fn tally(family: &Family, fstar: &Family) -> Tally {
    let k = family.k();
    let free = table(&family.minus(fstar));
    let star = table(fstar);
    sweep(
        family.n(),
        || Tally {
            counts: vec![0; k + 1],
            ..Tally::default()
        },
        |acc, order| {
            let masks = arc_masks(order, k);
            let a_free = masks.iter().filter(|m| free[**m as usize]).count();
            let a_star = masks.iter().filter(|m| star[**m as usize]).count();
            if a_free >= acc.counts.len() {
                acc.counts.resize(a_free + 1, 0);
            }
            acc.counts[a_free] += 1;
            acc.free_arc_total += a_free as u128;
            acc.star_arc_total += a_star as u128;
        },
        Tally::merge,
    )
}

pub fn cycle_partition(family: &Family, fstar: &Family) -> Result<CyclePartition> {
    exhaustive_guard(family.n())?;
    fstar.require_subfamily_of(family)?;
    Ok(CyclePartition {
        counts: tally(family, fstar).counts,
    })
}

/// `(i n + 2k(k - i)) / k` against `n` for one middle class `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoefficientCheck {
    pub i: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub value: Ratio<i128>,
    pub at_most_n: bool,
    pub equals_n: bool,
}

/// Every quantity of the cyclic double count, evaluated exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AggregateTrace {
    pub n: usize,
    pub k: usize,
    /// `n = 2k`, where equality no longer pins down the extremal families.
    pub boundary: bool,
    pub perms_total: u128,
    /// `k!(n-k)!`.
    pub incidence: u128,
    pub partition: Vec<u128>,
    pub partition_sums_to_total: bool,
    pub free_size: usize,
    pub star_size: usize,
    /// `|F - F*| k!(n-k)!`, `Σ_σ |A_σ(F - F*)|` and `Σ_i i c_i`.
    pub free_count_scaled: u128,
    pub free_arc_total: u128,
    pub free_weighted_classes: u128,
    pub free_identity_holds: bool,
    /// `|F*| k!(n-k)!` and `Σ_σ |A_σ(F*)|`.
    pub star_count_scaled: u128,
    pub star_arc_total: u128,
    pub star_identity_holds: bool,
    /// `n c_0 + Σ_i 2(k - i) c_i`.
    pub star_arc_bound: u128,
    pub star_bound_holds: bool,
    #[serde(serialize_with = "ser_ratio")]
    pub objective: Ratio<i128>,
    #[serde(serialize_with = "ser_ratio")]
    pub weighted_bound: Ratio<i128>,
    #[serde(serialize_with = "ser_ratio")]
    pub regrouped_bound: Ratio<i128>,
    pub regrouped_matches: bool,
    pub coefficients: Vec<CoefficientCheck>,
    #[serde(serialize_with = "ser_ratio")]
    pub flattened_bound: Ratio<i128>,
    pub binom_n_k: u128,
    pub flattened_is_binom: bool,
    pub chain_holds: bool,
    pub equality: bool,
    /// `c_j = 0` for `1 <= j <= k-1`.
    pub middle_classes_empty: bool,
    /// Equality with `n > 2k` leaves only `C_0` and `C_k`.
    pub equality_structure_holds: bool,
    pub pass: bool,
}

/// Runs the whole cyclic double count for `(F, F*)` under the disjoint-pair
/// hypothesis, `2 <= k <= n/2` and `n <= MAX_EXHAUSTIVE_N`.
pub fn aggregate_inequality(family: &Family, fstar: &Family) -> Result<AggregateTrace> {
    let (n, k) = (family.n(), family.k());
    check_cycle_params(n, k)?;
    exhaustive_guard(n)?;
    check_disjoint_pair_hypothesis(family, fstar)?;

    let t = tally(family, fstar);
    let c = |j: usize| t.counts.get(j).copied().unwrap_or(0);
    let perms_total = factorial(n - 1);
    let incidence = factorial(k) * factorial(n - k);
    let free_size = family.len() - fstar.len();
    let star_size = fstar.len();

    let free_count_scaled = free_size as u128 * incidence;
    let free_weighted_classes: u128 = (0..t.counts.len()).map(|i| i as u128 * c(i)).sum();
    let star_count_scaled = star_size as u128 * incidence;
    let star_arc_bound: u128 =
        n as u128 * c(0) + (1..=k).map(|i| 2 * (k - i) as u128 * c(i)).sum::<u128>();

    let r = |v: u128| Ratio::from_integer(v as i128);
    let (nn, kk) = (n as i128, k as i128);
    let inc = r(incidence);
    let objective = r(star_size as u128) + Ratio::new(nn, kk) * r(free_size as u128);
    let weighted_bound = (r(star_arc_bound) + Ratio::new(nn, kk) * r(free_weighted_classes)) / inc;

    let coefficients: Vec<CoefficientCheck> = (1..k)
        .map(|i| {
            let ii = i as i128;
            let value = Ratio::new(ii * nn + 2 * kk * (kk - ii), kk);
            CoefficientCheck {
                i,
                value,
                at_most_n: value <= Ratio::from_integer(nn),
                equals_n: value == Ratio::from_integer(nn),
            }
        })
        .collect();
    let regrouped_bound = (r(n as u128 * c(0))
        + r(n as u128 * c(k))
        + coefficients
            .iter()
            .map(|cc| cc.value * r(c(cc.i)))
            .fold(Ratio::from_integer(0), |a, b| a + b))
        / inc;
    let flattened_bound = r(n as u128 * t.counts.iter().sum::<u128>()) / inc;
    let binom_n_k = binom_small(n, k);

    let middle_classes_empty = (1..k).all(|j| c(j) == 0);
    let equality = objective == r(binom_n_k);
    let partition_sums_to_total = t.counts.iter().sum::<u128>() == perms_total;
    let free_identity_holds =
        free_count_scaled == t.free_arc_total && t.free_arc_total == free_weighted_classes;
    let star_identity_holds = star_count_scaled == t.star_arc_total;
    let star_bound_holds = t.star_arc_total <= star_arc_bound;
    let regrouped_matches = regrouped_bound == weighted_bound;
    let flattened_is_binom = flattened_bound == r(binom_n_k);
    let chain_holds = objective <= weighted_bound
        && regrouped_matches
        && regrouped_bound <= flattened_bound
        && flattened_is_binom
        && coefficients
            .iter()
            .all(|cc| cc.at_most_n && cc.equals_n == (n == 2 * k));
    let equality_structure_holds = !(equality && n > 2 * k) || middle_classes_empty;
    let pass = partition_sums_to_total
        && t.counts.len() == k + 1
        && free_identity_holds
        && star_identity_holds
        && star_bound_holds
        && chain_holds
        && equality_structure_holds;

    Ok(AggregateTrace {
        n,
        k,
        boundary: n == 2 * k,
        perms_total,
        incidence,
        partition: t.counts.clone(),
        partition_sums_to_total,
        free_size,
        star_size,
        free_count_scaled,
        free_arc_total: t.free_arc_total,
        free_weighted_classes,
        free_identity_holds,
        star_count_scaled,
        star_arc_total: t.star_arc_total,
        star_identity_holds,
        star_arc_bound,
        star_bound_holds,
        objective,
        weighted_bound,
        regrouped_bound,
        regrouped_matches,
        coefficients,
        flattened_bound,
        binom_n_k,
        flattened_is_binom,
        chain_holds,
        equality,
        middle_classes_empty,
        equality_structure_holds,
        pass,
    })
}
