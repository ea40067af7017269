//! Detection, witnessing, canonical forms and isomorphism censuses of
//! d-clusters and simple d-clusters.
//!
//! A d-cluster is a collection of `d` distinct k-sets whose union has at
//! most `2k` elements and whose common intersection is empty. A simple
//! d-cluster is a d-cluster of the shape `{B, B', B_1, ..., B_{d-2}}` with
//! `B ∩ B' = {a_1, ..., a_{d-2}}` and `B - B_i = {a_i}`.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ground::{binom_small, ksubsets, next_permutation, Family, KSet, Params};

/// Default ceiling on the number of candidate collections a census may
/// enumerate.
pub const DEFAULT_CENSUS_BUDGET: u128 = 50_000_000;

/// `d` distinct sets with empty intersection and union of size at most `2k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusterWitness {
    pub sets: Vec<KSet>,
    pub union_size: usize,
}

impl ClusterWitness {
    fn new(sets: Vec<KSet>) -> Self {
        let union_size = union_of(&sets).len();
        ClusterWitness { sets, union_size }
    }
}

/// A simple d-cluster with an explicit role assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimpleClusterWitness {
    pub b: KSet,
    pub b_prime: KSet,
    /// `reducers[i]` misses exactly `labels[i]` from `b`.
    pub reducers: Vec<KSet>,
    pub labels: Vec<usize>,
}

impl SimpleClusterWitness {
    /// The underlying plain cluster, listed as `b, b_prime, reducers...`.
    pub fn to_cluster(&self) -> ClusterWitness {
        let mut sets = vec![self.b, self.b_prime];
        sets.extend_from_slice(&self.reducers);
        ClusterWitness::new(sets)
    }
}

/// Either kind of witness, as returned by [`find_cluster`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Cluster(ClusterWitness),
    Simple(SimpleClusterWitness),
}

impl Witness {
    pub fn to_cluster(&self) -> ClusterWitness {
        match self {
            Witness::Cluster(w) => w.clone(),
            Witness::Simple(w) => w.to_cluster(),
        }
    }
}

/// A cluster relabelled onto `[1, support]`; equal values mean isomorphic
/// clusters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalCluster {
    pub support: usize,
    pub sets: Vec<Vec<usize>>,
}

fn union_of(sets: &[KSet]) -> KSet {
    sets.iter().fold(KSet::EMPTY, |u, s| u.union(*s))
}

fn intersection_of(sets: &[KSet]) -> KSet {
    match sets.split_first() {
        Some((first, rest)) => rest.iter().fold(*first, |i, s| i.intersection(*s)),
        None => KSet::EMPTY,
    }
}

/// The defining predicate, without any argument validation.
pub(crate) fn cluster_condition(sets: &[KSet], k: usize) -> bool {
    intersection_of(sets).is_empty() && union_of(sets).len() <= 2 * k
}

/// Tries every `(B, B')` in lexicographic order of input positions, with
/// the remaining sets as reducers in input order.
pub(crate) fn simple_roles(sets: &[KSet]) -> Option<SimpleClusterWitness> {
    let d = sets.len();
    for (bi, &b) in sets.iter().enumerate() {
        'pair: for (pi, &bp) in sets.iter().enumerate() {
            if pi == bi {
                continue;
            }
            let common = b.intersection(bp);
            if common.len() != d - 2 {
                continue;
            }
            let mut reducers = Vec::with_capacity(d - 2);
            let mut labels = Vec::with_capacity(d - 2);
            let mut seen = KSet::EMPTY;
            for (ri, &r) in sets.iter().enumerate() {
                if ri == bi || ri == pi {
                    continue;
                }
                let Some(a) = b.difference(r).single() else {
                    continue 'pair;
                };
                if !common.contains(a) || seen.contains(a) {
                    continue 'pair;
                }
                seen = seen.with(a);
                reducers.push(r);
                labels.push(a);
            }
            return Some(SimpleClusterWitness {
                b,
                b_prime: bp,
                reducers,
                labels,
            });
        }
    }
    None
}

fn validate_collection(sets: &[KSet], params: &Params) -> Result<()> {
    if sets.len() != params.d {
        return Err(Error::WrongSetCount {
            expected: params.d,
            got: sets.len(),
        });
    }
    let limit = KSet::initial(params.n);
    for (i, s) in sets.iter().enumerate() {
        if !s.is_subset(limit) {
            return Err(Error::ElementOutOfRange {
                element: s.max_element(),
                n: params.n,
            });
        }
        if s.len() != params.k {
            return Err(Error::WrongCardinality {
                expected: params.k,
                got: s.len(),
            });
        }
        if sets[..i].contains(s) {
            return Err(Error::DuplicateSet(s.to_string()));
        }
    }
    Ok(())
}

/// Whether `sets` (exactly `d` distinct k-sets) form a d-cluster.
pub fn is_cluster(sets: &[KSet], params: &Params) -> Result<bool> {
    validate_collection(sets, params)?;
    Ok(cluster_condition(sets, params.k))
}

/// Finds the lexicographically least role assignment making `sets` a simple
/// d-cluster, if one exists.
pub fn as_simple_cluster(sets: &[KSet], params: &Params) -> Result<Option<SimpleClusterWitness>> {
    validate_collection(sets, params)?;
    Ok(simple_roles(sets))
}

/// Depth-first walk over index combinations `i_1 < ... < i_d` of `members`
/// in lexicographic order, pruning branches whose union already exceeds
/// `2k`. Calls `visit` on every combination with empty intersection; a
/// `true` return stops the walk.
pub(crate) fn walk_clusters(
    members: &[KSet],
    k: usize,
    d: usize,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) {
    #[allow(clippy::too_many_arguments)]
    fn go(
        members: &[KSet],
        limit: usize,
        d: usize,
        start: usize,
        chosen: &mut Vec<usize>,
        union: KSet,
        inter: KSet,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if chosen.len() == d {
            return inter.is_empty() && visit(chosen);
        }
        let need = d - chosen.len();
        for i in start..members.len() {
            if members.len() - i < need {
                break;
            }
            let s = members[i];
            let u = union.union(s);
            if u.len() > limit {
                continue;
            }
            let next_inter = if chosen.is_empty() {
                s
            } else {
                inter.intersection(s)
            };
            chosen.push(i);
            let stop = go(members, limit, d, i + 1, chosen, u, next_inter, visit);
            chosen.pop();
            if stop {
                return true;
            }
        }
        false
    }
    let mut chosen = Vec::with_capacity(d);
    go(
        members,
        2 * k,
        d,
        0,
        &mut chosen,
        KSet::EMPTY,
        KSet::EMPTY,
        visit,
    );
}

fn check_order(family: &Family, d: usize) -> Result<()> {
    if d < 2 || d > family.k() {
        return Err(Error::InvalidParams(format!(
            "need 2 <= d <= k, got d={d}, k={}",
            family.k()
        )));
    }
    Ok(())
}

/// The first d-cluster (or simple d-cluster) of `family` in lexicographic
/// order over d-subsets of its members.
pub fn find_cluster(family: &Family, d: usize, simple_only: bool) -> Result<Option<Witness>> {
    check_order(family, d)?;
    let members = family.members();
    let mut found = None;
    walk_clusters(members, family.k(), d, &mut |idx| {
        let sets: Vec<KSet> = idx.iter().map(|&i| members[i]).collect();
        if simple_only {
            if let Some(w) = simple_roles(&sets) {
                found = Some(Witness::Simple(w));
                return true;
            }
            false
        } else {
            found = Some(Witness::Cluster(ClusterWitness::new(sets)));
            true
        }
    });
    Ok(found)
}

/// Whether `family` contains no d-cluster (or no simple d-cluster).
pub fn is_cluster_free(family: &Family, d: usize, simple_only: bool) -> Result<bool> {
    Ok(find_cluster(family, d, simple_only)?.is_none())
}

/// Members of `family` lying in at least one d-cluster inside `family`: the
/// least `F*` for which every d-cluster of `F` is contained in `F*`.
pub fn cluster_members(family: &Family, d: usize) -> Result<Family> {
    check_order(family, d)?;
    let members = family.members();
    let mut hit = vec![false; members.len()];
    walk_clusters(members, family.k(), d, &mut |idx| {
        for &i in idx {
            hit[i] = true;
        }
        false
    });
    let kept = members
        .iter()
        .zip(&hit)
        .filter_map(|(s, &h)| h.then_some(*s))
        .collect();
    Ok(Family::from_sorted_unchecked(family.n(), family.k(), kept))
}

/// Canonical form of a set system up to permutations of the ground set.
///
/// Each element of the support is described by the pattern of sets that
/// contain it. For every ordering of the sets the patterns are sorted, and
/// the ordering whose sorted pattern sequence is greatest wins; elements are
/// then numbered along that sequence. Elements with equal patterns are
/// interchangeable, so the result depends only on the isomorphism class.
/// Cost is `d! * u log u`.
pub fn canonicalize(sets: &[KSet]) -> CanonicalCluster {
    let d = sets.len();
    let support: Vec<usize> = union_of(sets).to_vec();
    let mut order: Vec<usize> = (0..d).collect();
    let mut best: Option<(Vec<u64>, Vec<usize>)> = None;
    loop {
        let mut codes: Vec<u64> = support
            .iter()
            .map(|&x| {
                order
                    .iter()
                    .fold(0u64, |c, &j| (c << 1) | sets[j].contains(x) as u64)
            })
            .collect();
        codes.sort_unstable_by(|a, b| b.cmp(a));
        if best.as_ref().is_none_or(|(c, _)| codes > *c) {
            best = Some((codes, order.clone()));
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    let (codes, order) = best.unwrap_or_default();
    let mut relabeled: Vec<Vec<usize>> = (0..d)
        .map(|pos| {
            let bit = d - 1 - pos;
            codes
                .iter()
                .enumerate()
                .filter(|(_, &c)| c >> bit & 1 == 1)
                .map(|(label, _)| label + 1)
                .collect()
        })
        .collect();
    debug_assert_eq!(order.len(), d);
    relabeled.sort();
    CanonicalCluster {
        support: support.len(),
        sets: relabeled,
    }
}

fn check_census_args(k: usize, d: usize) -> Result<()> {
    if d < 2 || d > k {
        return Err(Error::InvalidParams(format!(
            "need 2 <= d <= k, got d={d}, k={k}"
        )));
    }
    if 2 * k > crate::ground::MAX_N {
        return Err(Error::GroundTooLarge(2 * k));
    }
    Ok(())
}

/// Isomorphism classes of simple d-clusters of k-sets.
///
/// Every simple d-cluster is isomorphic to one with `B = [k]`,
/// `B ∩ B' = [d-2]` and `B' - B = [k+1, 2k-d+2]`; the reducers are then
/// `B - {i} + z_i` for free choices `z_i ∈ [k+1, 2k]`.
pub fn simple_cluster_classes(k: usize, d: usize) -> Result<BTreeSet<CanonicalCluster>> {
    check_census_args(k, d)?;
    let choices = (k as u128).pow(d as u32 - 2);
    if choices > DEFAULT_CENSUS_BUDGET {
        return Err(Error::ResourceGuard(format!(
            "{choices} reducer choices exceed the census budget"
        )));
    }
    let b = KSet::initial(k);
    let common = KSet::initial(d - 2);
    let b_prime = (k + 1..=2 * k - d + 2).fold(common, |s, x| s.with(x));
    let mut classes = BTreeSet::new();
    let mut z = vec![k + 1; d - 2];
    loop {
        let mut sets = vec![b, b_prime];
        sets.extend(
            z.iter()
                .enumerate()
                .map(|(i, &zi)| b.without(i + 1).with(zi)),
        );
        debug_assert!(simple_roles(&sets).is_some());
        classes.insert(canonicalize(&sets));
        // odometer over z in [k+1, 2k]^(d-2)
        let mut pos = 0;
        while pos < z.len() && z[pos] == 2 * k {
            z[pos] = k + 1;
            pos += 1;
        }
        if pos == z.len() {
            break;
        }
        z[pos] += 1;
    }
    Ok(classes)
}

/// Number of non-isomorphic simple d-clusters of k-sets.
pub fn census_simple(k: usize, d: usize) -> Result<usize> {
    Ok(simple_cluster_classes(k, d)?.len())
}

/// Isomorphism classes of all d-clusters of k-sets, found by enumerating
/// the clusters over `[2k]` that contain `[k]`.
pub fn cluster_classes(k: usize, d: usize, budget: u128) -> Result<BTreeSet<CanonicalCluster>> {
    check_census_args(k, d)?;
    let all: Vec<KSet> = ksubsets(2 * k, k).collect();
    let space = binom_small(all.len() - 1, d - 1);
    if space > budget {
        return Err(Error::ResourceGuard(format!(
            "{space} candidate clusters exceed the census budget of {budget}"
        )));
    }
    let root = all[0];
    let rest = &all[1..];
    let limit = 2 * k;
    let classes: HashSet<CanonicalCluster> = (0..rest.len())
        .into_par_iter()
        .map(|first| {
            let mut local = HashSet::new();
            let head = root.union(rest[first]);
            if head.len() > limit {
                return local;
            }
            let tail = &rest[first + 1..];
            if d == 2 {
                let sets = [root, rest[first]];
                if cluster_condition(&sets, k) {
                    local.insert(canonicalize(&sets));
                }
                return local;
            }
            let mut prefix = vec![root, rest[first]];
            extend_clusters(tail, &mut prefix, d, limit, &mut local);
            local
        })
        .reduce(HashSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    Ok(classes.into_iter().collect())
}

fn extend_clusters(
    pool: &[KSet],
    prefix: &mut Vec<KSet>,
    d: usize,
    limit: usize,
    out: &mut HashSet<CanonicalCluster>,
) {
    if prefix.len() == d {
        if intersection_of(prefix).is_empty() {
            out.insert(canonicalize(prefix));
        }
        return;
    }
    let union = union_of(prefix);
    for (i, &s) in pool.iter().enumerate() {
        if union.union(s).len() > limit {
            continue;
        }
        prefix.push(s);
        extend_clusters(&pool[i + 1..], prefix, d, limit, out);
        prefix.pop();
    }
}

/// Number of non-isomorphic d-clusters of k-sets, refusing enumerations
/// larger than `budget` candidate collections.
pub fn census_all(k: usize, d: usize, budget: u128) -> Result<usize> {
    Ok(cluster_classes(k, d, budget)?.len())
}
