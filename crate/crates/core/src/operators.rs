//! Link, up-set and exchange operators on families, and checkable
//! evaluations of the counting statements built from them.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::clusters::{self, cluster_condition, walk_clusters};
use crate::error::{Error, Result};
use crate::ground::{binom_small, subsets_of, Family, KSet, Params};

/// A family of (k-1)-sets over `[n] - {x}`, such as the link of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkFamily {
    pub x: usize,
    pub members: Vec<KSet>,
}

impl LinkFamily {
    fn new(x: usize, mut members: Vec<KSet>) -> Self {
        members.sort_unstable();
        members.dedup();
        debug_assert!(members.iter().all(|d| !d.contains(x)));
        LinkFamily { x, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, d: KSet) -> bool {
        self.members.binary_search(&d).is_ok()
    }

    pub fn intersection_len(&self, other: &LinkFamily) -> usize {
        self.members.iter().filter(|d| other.contains(**d)).count()
    }
}

/// `α_F(B)`: the elements of `B` that a single exchange inside `F` removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AlphaSet {
    pub base: KSet,
    pub members: KSet,
}

fn check_element(family: &Family, x: usize) -> Result<()> {
    if x == 0 || x > family.n() {
        return Err(Error::ElementOutOfRange {
            element: x,
            n: family.n(),
        });
    }
    Ok(())
}

/// The (k-1)-sets `D` with `D ∪ {x} ∈ F`.
pub fn link(family: &Family, x: usize) -> Result<LinkFamily> {
    check_element(family, x)?;
    let members = family
        .iter()
        .filter(|b| b.contains(x))
        .map(|b| b.without(x))
        .collect();
    Ok(LinkFamily::new(x, members))
}

/// Members of `F` containing the (k-1)-set `d`.
pub fn upset(family: &Family, d: KSet) -> Result<Family> {
    if !d.is_subset(KSet::initial(family.n())) {
        return Err(Error::ElementOutOfRange {
            element: d.max_element(),
            n: family.n(),
        });
    }
    if d.len() + 1 != family.k() {
        return Err(Error::WrongCardinality {
            expected: family.k() - 1,
            got: d.len(),
        });
    }
    let members = family.iter().filter(|b| d.is_subset(*b)).collect();
    Ok(Family::from_sorted_unchecked(
        family.n(),
        family.k(),
        members,
    ))
}

fn upset_len(family: &Family, d: KSet) -> usize {
    family.iter().filter(|b| d.is_subset(*b)).count()
}

fn alpha_unchecked(family: &Family, b: KSet) -> KSet {
    family
        .iter()
        .filter_map(|other| b.difference(other).single())
        .fold(KSet::EMPTY, KSet::with)
}

/// `α_F(B)` for a member `B` of `F`.
pub fn alpha(family: &Family, b: KSet) -> Result<AlphaSet> {
    if !family.contains(b) {
        return Err(Error::NotMember(b.to_string()));
    }
    Ok(AlphaSet {
        base: b,
        members: alpha_unchecked(family, b),
    })
}

/// `(F^x, F^{-x})`: the members containing `x` and the rest.
pub fn split(family: &Family, x: usize) -> Result<(Family, Family)> {
    check_element(family, x)?;
    let (with, without): (Vec<KSet>, Vec<KSet>) = family.iter().partition(|b| b.contains(x));
    Ok((
        Family::from_sorted_unchecked(family.n(), family.k(), with),
        Family::from_sorted_unchecked(family.n(), family.k(), without),
    ))
}

/// `R_x(F)`: (k-1)-sets `D` avoiding `x` such that for some `B ∈ F^{-x}`,
/// `D ∩ B` is a (d-2)-subset of `α_F(B)`. For `d = 2` this asks for some
/// `B ∈ F^{-x}` disjoint from `D`.
pub fn r_family(family: &Family, x: usize, d: usize) -> Result<LinkFamily> {
    check_element(family, x)?;
    if d < 2 || d > family.k() {
        return Err(Error::InvalidParams(format!(
            "need 2 <= d <= k, got d={d}, k={}",
            family.k()
        )));
    }
    let (_, without) = split(family, x)?;
    let alphas: Vec<(KSet, KSet)> = without
        .iter()
        .map(|b| (b, alpha_unchecked(family, b)))
        .collect();
    let ground = KSet::initial(family.n()).without(x);
    let members = subsets_of(ground, family.k() - 1)
        .filter(|dset| {
            alphas.iter().any(|&(b, a)| {
                let common = dset.intersection(b);
                common.len() == d - 2 && common.is_subset(a)
            })
        })
        .collect();
    Ok(LinkFamily::new(x, members))
}

/// `S_x(F)`: the sets `B - {y}` with `B ∈ F^{-x}` and `y ∈ B - α_F(B)`.
pub fn s_family(family: &Family, x: usize) -> Result<LinkFamily> {
    check_element(family, x)?;
    let mut members = Vec::new();
    for b in family.iter().filter(|b| !b.contains(x)) {
        let fixed = b.difference(alpha_unchecked(family, b));
        members.extend(fixed.elements().map(|y| b.without(y)));
    }
    Ok(LinkFamily::new(x, members))
}

/// `{D ∈ △_x(F) : |▽_F(D)| = 1} ∪ △_x(F*)`.
pub fn link_star(family: &Family, fstar: &Family, x: usize) -> Result<LinkFamily> {
    fstar.require_subfamily_of(family)?;
    let full = link(family, x)?;
    let starred = link(fstar, x)?;
    let members = full
        .members
        .iter()
        .copied()
        .filter(|d| starred.contains(*d) || upset_len(family, *d) == 1)
        .collect();
    Ok(LinkFamily::new(x, members))
}

/// Both sides of `Σ_x |△_x(F)| = k|F|`.
pub fn check_sum_identity(family: &Family) -> (u128, u128) {
    let lhs = (1..=family.n())
        .map(|x| family.iter().filter(|b| b.contains(x)).count() as u128)
        .sum();
    (lhs, (family.k() * family.len()) as u128)
}

/// Count of (k-1)-sets with exactly one extension in `F`, against the
/// exact bound `(n C(n-1,k-1) - k|F|) / (n-k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniqueExtensionBound {
    pub count_unique: u128,
    #[serde(serialize_with = "ser_ratio")]
    pub bound: Ratio<i128>,
}

impl UniqueExtensionBound {
    pub fn holds(&self) -> bool {
        Ratio::from_integer(self.count_unique as i128) <= self.bound
    }
}

pub(crate) fn ser_ratio<S: serde::Serializer>(
    r: &Ratio<i128>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn unique_extension_bound(family: &Family) -> Result<UniqueExtensionBound> {
    let (n, k) = (family.n(), family.k());
    if k >= n {
        return Err(Error::InvalidParams(format!(
            "need k < n, got n={n}, k={k}"
        )));
    }
    let mut extensions: HashMap<KSet, u32> = HashMap::new();
    for b in family.iter() {
        for y in b.elements() {
            *extensions.entry(b.without(y)).or_default() += 1;
        }
    }
    let count_unique = extensions.values().filter(|&&c| c == 1).count() as u128;
    let numer = (n as u128 * binom_small(n - 1, k - 1)) as i128 - (k * family.len()) as i128;
    Ok(UniqueExtensionBound {
        count_unique,
        bound: Ratio::new(numer, (n - k) as i128),
    })
}

/// Outcome of checking a statement over every relevant configuration of one
/// instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckReport {
    Holds,
    /// The statement fails on `sets`.
    Violated {
        sets: Vec<KSet>,
        detail: String,
    },
    /// The instance does not satisfy the statement's hypothesis.
    HypothesisFailed {
        sets: Vec<KSet>,
        detail: String,
    },
}

impl CheckReport {
    pub fn holds(&self) -> bool {
        matches!(self, CheckReport::Holds)
    }
}

/// For every (d-1)-cluster `{D_1, ..., D_{d-1}}` inside `△_x(F)`, checks that
/// each `D_i` has a unique extension in `F` or lies in `△_x(F*)`.
///
/// The hypothesis (every d-cluster of `F` lies in `F*`) is checked first and
/// reported as [`CheckReport::HypothesisFailed`].
pub fn check_trianglepart(
    family: &Family,
    fstar: &Family,
    x: usize,
    d: usize,
) -> Result<CheckReport> {
    let params = Params::new(family.n(), family.k(), d)?;
    if d < 3 || !params.def1_ok() {
        return Err(Error::InvalidParams(format!(
            "need d >= 3 and n(d-1) >= dk, got {params}"
        )));
    }
    check_element(family, x)?;
    fstar.require_subfamily_of(family)?;

    let members = family.members();
    let mut outside = None;
    walk_clusters(members, family.k(), d, &mut |idx| {
        if idx.iter().any(|&i| !fstar.contains(members[i])) {
            outside = Some(idx.iter().map(|&i| members[i]).collect());
            return true;
        }
        false
    });
    if let Some(sets) = outside {
        return Ok(CheckReport::HypothesisFailed {
            sets,
            detail: format!("a {d}-cluster of F is not contained in F*"),
        });
    }

    let lk = link(family, x)?;
    let starred = link(fstar, x)?;
    let mut report = CheckReport::Holds;
    walk_clusters(&lk.members, family.k() - 1, d - 1, &mut |idx| {
        let sets: Vec<KSet> = idx.iter().map(|&i| lk.members[i]).collect();
        debug_assert!(cluster_condition(&sets, family.k() - 1));
        if let Some(bad) = sets
            .iter()
            .find(|dset| upset_len(family, **dset) != 1 && !starred.contains(**dset))
        {
            report = CheckReport::Violated {
                detail: format!(
                    "{bad} has {} extensions and is not in the link of F* at {x}",
                    upset_len(family, *bad)
                ),
                sets,
            };
            return true;
        }
        false
    });
    Ok(report)
}

/// For all ordered pairs `B ≠ B'` of a simple-d-cluster-free family with
/// `|α_F(B) ∩ B'| >= d-2`, checks `|B ∩ B'| >= d-1`.
pub fn check_propint(family: &Family, d: usize) -> Result<CheckReport> {
    let params = Params::new(family.n(), family.k(), d)?;
    if !params.def2_ok() {
        return Err(Error::InvalidParams(format!(
            "need n >= 2k-d+2, got {params}"
        )));
    }
    if let Some(w) = clusters::find_cluster(family, d, true)? {
        return Ok(CheckReport::HypothesisFailed {
            sets: w.to_cluster().sets,
            detail: format!("F contains a simple {d}-cluster"),
        });
    }
    for b in family.iter() {
        let a = alpha_unchecked(family, b);
        for bp in family.iter().filter(|bp| *bp != b) {
            if a.intersection(bp).len() + 2 >= d && b.intersection(bp).len() + 1 < d {
                return Ok(CheckReport::Violated {
                    sets: vec![b, bp],
                    detail: format!(
                        "|alpha(B) ∩ B'| = {} but |B ∩ B'| = {}",
                        a.intersection(bp).len(),
                        b.intersection(bp).len()
                    ),
                });
            }
        }
    }
    Ok(CheckReport::Holds)
}

/// `(Σ C(r_i, l), m · C(⌊mean r⌋, l))`; the first is never smaller.
pub fn avg_binom_bound(rs: &[u64], l: u64) -> Result<(u128, u128)> {
    if rs.is_empty() {
        return Err(Error::InvalidParams("empty list of counts".into()));
    }
    let lhs = rs
        .iter()
        .map(|&r| crate::ground::binom(r, l))
        .try_fold(0u128, |acc, b| {
            b.and_then(|b| acc.checked_add(b).ok_or(Error::Overflow(0, l)))
        })?;
    let total: u128 = rs.iter().map(|&r| r as u128).sum();
    let m = rs.len() as u128;
    let mean = (total / m) as u64;
    let rhs = crate::ground::binom(mean, l)?
        .checked_mul(m)
        .ok_or(Error::Overflow(mean, l))?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::ksubsets;

    fn s(e: &[usize]) -> KSet {
        KSet::of(e)
    }

    fn triangle() -> Family {
        Family::from_lists(3, 2, &[[1, 2], [1, 3], [2, 3]]).unwrap()
    }

    #[test]
    fn link_examples() {
        assert_eq!(
            link(&triangle(), 1).unwrap().members,
            vec![s(&[2]), s(&[3])]
        );
        let star = Family::star(6, 3, 2).unwrap();
        let expected: Vec<KSet> = subsets_of(KSet::initial(6).without(2), 2).collect();
        assert_eq!(link(&star, 2).unwrap().members, expected);
        assert!(link(&Family::empty(5, 2).unwrap(), 1).unwrap().is_empty());
        assert!(link(&triangle(), 4).is_err());
    }

    #[test]
    fn upset_examples() {
        assert_eq!(upset(&triangle(), s(&[1])).unwrap().len(), 2);
        let f = Family::from_lists(5, 2, &[[1, 2], [3, 4]]).unwrap();
        assert!(upset(&f, s(&[5])).unwrap().is_empty());
        let full = Family::full(5, 2).unwrap();
        assert_eq!(upset(&full, s(&[2])).unwrap().len(), 4);
        assert!(matches!(
            upset(&full, s(&[1, 2])),
            Err(Error::WrongCardinality { .. })
        ));
    }

    #[test]
    fn alpha_examples() {
        let f = Family::from_lists(6, 3, &[[1, 2, 3], [1, 2, 4], [1, 5, 6]]).unwrap();
        assert_eq!(alpha(&f, s(&[1, 2, 3])).unwrap().members, s(&[3]));
        let star = Family::star(6, 3, 1).unwrap();
        for b in star.iter() {
            assert_eq!(alpha(&star, b).unwrap().members, b.without(1));
        }
        let single = Family::from_lists(6, 3, &[[1, 2, 3]]).unwrap();
        assert!(alpha(&single, s(&[1, 2, 3])).unwrap().members.is_empty());
        assert!(matches!(
            alpha(&single, s(&[1, 2, 4])),
            Err(Error::NotMember(_))
        ));
    }

    #[test]
    fn split_examples() {
        let star = Family::star(5, 2, 1).unwrap();
        let (a, b) = split(&star, 1).unwrap();
        assert_eq!(a, star);
        assert!(b.is_empty());
        let (a, b) = split(&Family::full(4, 2).unwrap(), 2).unwrap();
        assert_eq!((a.len(), b.len()), (3, 3));
        let (a, b) = split(&Family::empty(4, 2).unwrap(), 2).unwrap();
        assert!(a.is_empty() && b.is_empty());
    }

    #[test]
    fn r_family_examples() {
        let f = Family::from_lists(7, 3, &[[2, 3, 4]]).unwrap();
        assert!(r_family(&f, 1, 3).unwrap().is_empty());

        // α({2,3,4}) = {3} via {2,4,5}; the second set avoids 1 too
        let f = Family::from_lists(7, 3, &[[2, 3, 4], [2, 4, 5]]).unwrap();
        assert_eq!(alpha(&f, s(&[2, 3, 4])).unwrap().members, s(&[3]));
        assert_eq!(alpha(&f, s(&[2, 4, 5])).unwrap().members, s(&[5]));
        let r = r_family(&f, 1, 3).unwrap();
        // D ∩ {2,3,4} = {3}: {3,5},{3,6},{3,7}; D ∩ {2,4,5} = {5}: {3,5},{5,6},{5,7}
        let expected = vec![s(&[3, 5]), s(&[3, 6]), s(&[5, 6]), s(&[3, 7]), s(&[5, 7])];
        let mut expected = expected;
        expected.sort();
        assert_eq!(r.members, expected);

        // d = 2: D disjoint from some B avoiding x
        let f = Family::from_lists(5, 2, &[[2, 3]]).unwrap();
        let r = r_family(&f, 1, 2).unwrap();
        assert_eq!(r.members, vec![s(&[4]), s(&[5])]);
    }

    #[test]
    fn s_family_examples() {
        let f = Family::from_lists(7, 3, &[[2, 3, 4]]).unwrap();
        assert_eq!(
            s_family(&f, 1).unwrap().members,
            vec![s(&[2, 3]), s(&[2, 4]), s(&[3, 4])]
        );
        let star = Family::star(6, 3, 4).unwrap();
        assert!(s_family(&star, 4).unwrap().is_empty());
    }

    #[test]
    fn link_star_examples() {
        let full = Family::full(5, 2).unwrap();
        assert_eq!(link_star(&full, &full, 1).unwrap(), link(&full, 1).unwrap());
        let empty = Family::empty(5, 2).unwrap();
        assert!(link_star(&full, &empty, 1).unwrap().is_empty());
        // a star at 1: the link {2},...,{5} each extend only by 1
        let star = Family::star(5, 2, 1).unwrap();
        assert_eq!(link_star(&star, &empty, 1).unwrap().len(), 4);
        assert!(matches!(
            link_star(&empty, &star, 1),
            Err(Error::NotSubfamily(_))
        ));
    }

    #[test]
    fn sum_identity_examples() {
        assert_eq!(check_sum_identity(&triangle()), (6, 6));
        assert_eq!(check_sum_identity(&Family::full(5, 2).unwrap()), (20, 20));
        assert_eq!(check_sum_identity(&Family::empty(5, 2).unwrap()), (0, 0));
    }

    #[test]
    fn unique_extension_examples() {
        let u = unique_extension_bound(&Family::full(5, 2).unwrap()).unwrap();
        assert_eq!((u.count_unique, u.bound), (0, Ratio::from_integer(0)));
        let u = unique_extension_bound(&Family::empty(5, 2).unwrap()).unwrap();
        assert_eq!((u.count_unique, u.bound), (0, Ratio::new(20, 3)));
        let one = Family::from_lists(5, 2, &[[1, 2]]).unwrap();
        let u = unique_extension_bound(&one).unwrap();
        assert_eq!((u.count_unique, u.bound), (2, Ratio::from_integer(6)));
        assert!(u.holds());
        assert!(unique_extension_bound(&Family::full(3, 3).unwrap()).is_err());
    }

    #[test]
    fn trianglepart_examples() {
        let star = Family::star(6, 3, 1).unwrap();
        let empty = Family::empty(6, 3).unwrap();
        for x in 1..=6 {
            assert_eq!(
                check_trianglepart(&star, &empty, x, 3),
                Ok(CheckReport::Holds)
            );
        }
        let full = Family::full(6, 3).unwrap();
        assert_eq!(
            check_trianglepart(&full, &full, 2, 3),
            Ok(CheckReport::Holds)
        );
        assert!(matches!(
            check_trianglepart(&full, &empty, 2, 3),
            Ok(CheckReport::HypothesisFailed { .. })
        ));
        assert!(check_trianglepart(&full, &full, 2, 2).is_err());
    }

    #[test]
    fn propint_examples() {
        let star = Family::star(7, 3, 1).unwrap();
        assert_eq!(check_propint(&star, 3), Ok(CheckReport::Holds));
        let single = Family::from_lists(7, 3, &[[1, 2, 3]]).unwrap();
        assert_eq!(check_propint(&single, 3), Ok(CheckReport::Holds));
        let bad = Family::from_lists(7, 3, &[[1, 2, 3], [1, 4, 5], [2, 3, 6]]).unwrap();
        assert!(matches!(
            check_propint(&bad, 3),
            Ok(CheckReport::HypothesisFailed { .. })
        ));
    }

    #[test]
    fn avg_binom_examples() {
        assert_eq!(avg_binom_bound(&[3, 1], 2), Ok((3, 2)));
        assert_eq!(avg_binom_bound(&[2, 2, 2], 1), Ok((6, 6)));
        assert_eq!(avg_binom_bound(&[5, 0], 3), Ok((10, 0)));
        assert!(avg_binom_bound(&[], 1).is_err());
    }

    #[test]
    fn link_and_complement_partition_each_link() {
        let f = Family::from_lists(6, 3, &[[1, 2, 3], [1, 4, 5], [2, 5, 6], [3, 4, 6]]).unwrap();
        let c = f.complement();
        for x in 1..=6 {
            let total = link(&f, x).unwrap().len() + link(&c, x).unwrap().len();
            assert_eq!(total as u128, binom_small(5, 2));
        }
        assert_eq!(ksubsets(6, 3).count(), f.len() + c.len());
    }
}
