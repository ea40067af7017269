//! Ground-set parameters, k-sets as bit vectors, canonical families and
//! exact binomial arithmetic.
//!
//! Elements are 1-based everywhere in the public API; element `x` lives at
//! bit `x - 1` of a [`KSet`].

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported ground set; one `KSet` is one machine word.
pub const MAX_N: usize = 64;

/// The `(n, k, d)` triple together with the derived validity conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Params {
    pub n: usize,
    pub k: usize,
    pub d: usize,
}

/// Which hypotheses hold for a parameter triple. All in integer form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Validity {
    /// `n(d-1) >= dk`, i.e. `n >= dk/(d-1)`: d-clusters are defined.
    pub def1_ok: bool,
    /// `2k <= n`: the weighted bound applies.
    pub thm1_ok: bool,
    /// `n >= 2k - d + 2`: simple d-clusters are defined.
    pub def2_ok: bool,
    /// `n >= 3k - 2d + 4`: the simple-cluster-free bound applies.
    pub thm2_ok: bool,
}

impl Params {
    pub fn new(n: usize, k: usize, d: usize) -> Result<Self> {
        check_shape(n, k)?;
        if d < 2 || d > k {
            return Err(Error::InvalidParams(format!(
                "need 2 <= d <= k, got d={d}, k={k}"
            )));
        }
        Ok(Params { n, k, d })
    }

    pub fn def1_ok(&self) -> bool {
        self.n * (self.d - 1) >= self.d * self.k
    }

    pub fn thm1_ok(&self) -> bool {
        2 * self.k <= self.n
    }

    pub fn def2_ok(&self) -> bool {
        self.n + self.d >= 2 * self.k + 2
    }

    pub fn thm2_ok(&self) -> bool {
        self.n + 2 * self.d >= 3 * self.k + 4
    }

    pub fn validity(&self) -> Validity {
        Validity {
            def1_ok: self.def1_ok(),
            thm1_ok: self.thm1_ok(),
            def2_ok: self.def2_ok(),
            thm2_ok: self.thm2_ok(),
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} k={} d={}", self.n, self.k, self.d)
    }
}

/// Checks `1 <= k <= n <= MAX_N`.
pub fn check_shape(n: usize, k: usize) -> Result<()> {
    if n > MAX_N {
        return Err(Error::GroundTooLarge(n));
    }
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidParams(format!(
            "need 1 <= k <= n, got n={n}, k={k}"
        )));
    }
    Ok(())
}

/// A subset of `[n]` stored as a bit vector. Used for k-sets as well as for
/// the (k-1)-sets of links; the cardinality is enforced by the container.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KSet(u64);

impl KSet {
    pub const EMPTY: KSet = KSet(0);

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        KSet(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    /// Builds a set from 1-based elements, requiring exactly `k` distinct
    /// values in `[1, n]`.
    pub fn from_elements(n: usize, k: usize, elements: &[usize]) -> Result<Self> {
        if n > MAX_N {
            return Err(Error::GroundTooLarge(n));
        }
        let mut bits = 0u64;
        for &x in elements {
            if x == 0 || x > n {
                return Err(Error::ElementOutOfRange { element: x, n });
            }
            bits |= 1 << (x - 1);
        }
        let set = KSet(bits);
        if set.len() != k || elements.len() != k {
            return Err(Error::WrongCardinality {
                expected: k,
                got: set.len(),
            });
        }
        Ok(set)
    }

    /// Unchecked construction from 1-based elements (panics on 0 or > 64).
    pub fn of(elements: &[usize]) -> Self {
        elements.iter().fold(KSet(0), |s, &x| s.with(x))
    }

    /// `{1, ..., m}`.
    pub fn initial(m: usize) -> Self {
        if m >= 64 {
            KSet(u64::MAX)
        } else {
            KSet((1u64 << m) - 1)
        }
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn contains(self, x: usize) -> bool {
        (1..=64).contains(&x) && self.0 >> (x - 1) & 1 == 1
    }

    #[inline]
    pub fn with(self, x: usize) -> Self {
        KSet(self.0 | 1 << (x - 1))
    }

    #[inline]
    pub fn without(self, x: usize) -> Self {
        KSet(self.0 & !(1 << (x - 1)))
    }

    #[inline]
    pub fn union(self, other: KSet) -> Self {
        KSet(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: KSet) -> Self {
        KSet(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: KSet) -> Self {
        KSet(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: KSet) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn is_disjoint(self, other: KSet) -> bool {
        self.0 & other.0 == 0
    }

    /// Largest element, or 0 for the empty set.
    pub fn max_element(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// The single element of a singleton.
    pub fn single(self) -> Option<usize> {
        (self.len() == 1).then(|| self.0.trailing_zeros() as usize + 1)
    }

    pub fn elements(self) -> Elements {
        Elements(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.elements().collect()
    }
}

/// Ascending iterator over the 1-based elements of a [`KSet`].
#[derive(Clone, Debug)]
pub struct Elements(u64);

impl Iterator for Elements {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.0.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Elements {}

impl fmt::Display for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.elements().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for KSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for KSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.elements())
    }
}

/// All `k`-subsets of `ground` in ascending numeric order.
pub fn subsets_of(ground: KSet, k: usize) -> impl Iterator<Item = KSet> {
    let elems = ground.to_vec();
    let m = elems.len();
    Combinations::new(m, k).map(move |idx| idx.iter().fold(KSet::EMPTY, |s, &i| s.with(elems[i])))
}

/// All `k`-subsets of `[n]` in canonical (ascending numeric) order.
pub fn ksubsets(n: usize, k: usize) -> impl Iterator<Item = KSet> {
    subsets_of(KSet::initial(n), k)
}

/// `k`-combinations of `0..m` as ascending index vectors, in colex order
/// (the order of the corresponding bit vectors as integers).
#[derive(Clone, Debug)]
pub struct Combinations {
    m: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub fn new(m: usize, k: usize) -> Self {
        Combinations {
            m,
            idx: (0..k).collect(),
            done: k > m,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut j = 0;
        while j < k {
            let limit = if j + 1 < k { self.idx[j + 1] } else { self.m };
            if self.idx[j] + 1 < limit {
                self.idx[j] += 1;
                for (t, v) in self.idx.iter_mut().enumerate().take(j) {
                    *v = t;
                }
                break;
            }
            j += 1;
        }
        if j == k {
            self.done = true;
        }
        Some(out)
    }
}

/// Advances `v` to the next lexicographic permutation; `false` (and `v`
/// reset to ascending order) after the last one.
pub fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        v.reverse();
        return false;
    };
    let j = v
        .iter()
        .rposition(|x| *x > v[i])
        .expect("a larger element exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Exact binomial coefficient; `0` when `b > a`, `Err` on overflow.
pub fn binom(a: u64, b: u64) -> Result<u128> {
    if b > a {
        return Ok(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        let num = (a - i) as u128;
        let den = (i + 1) as u128;
        let g = gcd(acc, den);
        let factor = num / (den / g);
        acc = (acc / g).checked_mul(factor).ok_or(Error::Overflow(a, b))?;
    }
    Ok(acc)
}

/// Binomial coefficient for small arguments where overflow is impossible.
pub(crate) fn binom_small(a: usize, b: usize) -> u128 {
    binom(a as u64, b as u64).expect("binomial of desk-scale arguments fits in u128")
}

pub(crate) fn factorial(m: usize) -> u128 {
    (1..=m as u128).product()
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// A deduplicated, canonically ordered k-uniform family over `[n]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Family {
    n: usize,
    k: usize,
    members: Vec<KSet>,
}

impl Family {
    /// Builds a family from bit-vector sets, sorting and deduplicating.
    pub fn new(n: usize, k: usize, sets: impl IntoIterator<Item = KSet>) -> Result<Self> {
        check_shape(n, k)?;
        let limit = KSet::initial(n);
        let mut members = Vec::new();
        for s in sets {
            if !s.is_subset(limit) {
                return Err(Error::ElementOutOfRange {
                    element: s.max_element(),
                    n,
                });
            }
            if s.len() != k {
                return Err(Error::WrongCardinality {
                    expected: k,
                    got: s.len(),
                });
            }
            members.push(s);
        }
        members.sort_unstable();
        members.dedup();
        Ok(Family { n, k, members })
    }

    /// Builds a family from 1-based element lists.
    pub fn from_lists<L: AsRef<[usize]>>(n: usize, k: usize, lists: &[L]) -> Result<Self> {
        check_shape(n, k)?;
        let sets = lists
            .iter()
            .map(|l| KSet::from_elements(n, k, l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Family::new(n, k, sets)
    }

    pub fn empty(n: usize, k: usize) -> Result<Self> {
        Family::new(n, k, [])
    }

    /// Every k-set containing `x`.
    pub fn star(n: usize, k: usize, x: usize) -> Result<Self> {
        check_shape(n, k)?;
        if x == 0 || x > n {
            return Err(Error::ElementOutOfRange { element: x, n });
        }
        let rest = KSet::initial(n).without(x);
        Family::new(n, k, subsets_of(rest, k - 1).map(|d| d.with(x)))
    }

    /// All of `([n] choose k)`.
    pub fn full(n: usize, k: usize) -> Result<Self> {
        check_shape(n, k)?;
        Ok(Family {
            n,
            k,
            members: ksubsets(n, k).collect(),
        })
    }

    pub(crate) fn from_sorted_unchecked(n: usize, k: usize, members: Vec<KSet>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Family { n, k, members }
    }

    /// `([n] choose k)` minus this family.
    pub fn complement(&self) -> Family {
        let members = ksubsets(self.n, self.k)
            .filter(|s| !self.contains(*s))
            .collect();
        Family::from_sorted_unchecked(self.n, self.k, members)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[KSet] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = KSet> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, s: KSet) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn same_shape(&self, other: &Family) -> bool {
        self.n == other.n && self.k == other.k
    }

    /// Members of `self` that are not in `other`.
    pub fn minus(&self, other: &Family) -> Family {
        let members = self.iter().filter(|s| !other.contains(*s)).collect();
        Family::from_sorted_unchecked(self.n, self.k, members)
    }

    pub fn is_subfamily_of(&self, other: &Family) -> bool {
        self.same_shape(other) && self.iter().all(|s| other.contains(s))
    }

    /// Checks `self ⊆ other`, reporting the first missing set.
    pub(crate) fn require_subfamily_of(&self, other: &Family) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch);
        }
        match self.iter().find(|s| !other.contains(*s)) {
            Some(s) => Err(Error::NotSubfamily(s.to_string())),
            None => Ok(()),
        }
    }

    /// Renders the family in the text file format.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.k);
        for s in &self.members {
            let line: Vec<String> = s.elements().map(|x| x.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the text file format: a header line `n k`, then one set per
    /// line; `#` comments and blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize)> = None;
        let mut sets = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    usize::from_str(t).map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("not a non-negative integer: {t:?}"),
                    })
                })
                .collect::<Result<Vec<usize>>>()?;
            match header {
                None => {
                    if nums.len() != 2 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "header must be `n k`".into(),
                        });
                    }
                    check_shape(nums[0], nums[1]).map_err(|e| Error::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                    header = Some((nums[0], nums[1]));
                }
                Some((n, k)) => {
                    let s = KSet::from_elements(n, k, &nums).map_err(|e| Error::Parse {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                    sets.push(s);
                }
            }
        }
        let (n, k) = header.ok_or(Error::Parse {
            line: 0,
            msg: "missing `n k` header".into(),
        })?;
        Family::new(n, k, sets)
    }
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Family(n={}, k={}, ", self.n, self.k)?;
        f.debug_list().entries(&self.members).finish()?;
        f.write_str(")")
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for Family {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.members.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_family_dedups_permuted_duplicate() {
        let f = Family::from_lists(4, 2, &[vec![1, 2], vec![2, 1], vec![3, 4]]).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.members(), &[KSet::of(&[1, 2]), KSet::of(&[3, 4])]);
    }

    #[test]
    fn make_family_errors() {
        assert_eq!(
            Family::from_lists(5, 2, &[vec![1, 6]]),
            Err(Error::ElementOutOfRange { element: 6, n: 5 })
        );
        assert!(matches!(
            Family::from_lists(5, 3, &[vec![1, 2]]),
            Err(Error::WrongCardinality {
                expected: 3,
                got: 2
            })
        ));
        assert!(matches!(
            Family::from_lists(5, 3, &[vec![1, 2, 2]]),
            Err(Error::WrongCardinality { .. })
        ));
        assert_eq!(Family::empty(65, 2), Err(Error::GroundTooLarge(65)));
    }

    #[test]
    fn stars() {
        let s = Family::star(4, 2, 1).unwrap();
        assert_eq!(
            s.members(),
            &[KSet::of(&[1, 2]), KSet::of(&[1, 3]), KSet::of(&[1, 4])]
        );
        assert_eq!(Family::star(5, 2, 3).unwrap().len(), 4);
        assert_eq!(Family::star(6, 3, 1).unwrap().len(), 10);
        assert!(Family::star(6, 3, 7).is_err());
        assert!(Family::star(6, 3, 0).is_err());
    }

    #[test]
    fn full_and_complement() {
        assert_eq!(Family::full(4, 2).unwrap().len(), 6);
        assert_eq!(Family::full(5, 2).unwrap().len(), 10);
        assert_eq!(Family::full(6, 3).unwrap().len(), 20);
        assert!(Family::full(4, 2).unwrap().complement().is_empty());
        assert_eq!(Family::star(5, 2, 1).unwrap().complement().len(), 6);
        assert_eq!(Family::empty(4, 2).unwrap().complement().len(), 6);
    }

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), Ok(10));
        assert_eq!(binom(4, 1), Ok(4));
        assert_eq!(binom(8, 2), Ok(28));
        assert_eq!(binom(3, 5), Ok(0));
        assert_eq!(binom(0, 0), Ok(1));
        assert_eq!(binom(64, 32), Ok(1_832_624_140_942_590_534));
        assert_eq!(
            binom(130, 65),
            Ok(95_067_625_827_960_698_145_584_333_020_095_113_100)
        );
        assert_eq!(binom(200, 100), Err(Error::Overflow(200, 100)));
    }

    #[test]
    fn ksubsets_are_canonical() {
        let all: Vec<KSet> = ksubsets(6, 3).collect();
        assert_eq!(all.len(), 20);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(
            ksubsets(64, 64).collect::<Vec<_>>(),
            vec![KSet::initial(64)]
        );
        assert_eq!(ksubsets(3, 0).count(), 1);
    }

    #[test]
    fn permutations_enumerate_all() {
        let mut v = [1, 2, 3, 4];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(v, [1, 2, 3, 4]);
    }

    #[test]
    fn validity_flags() {
        let p = Params::new(7, 3, 3).unwrap();
        assert!(p.def1_ok() && p.thm1_ok() && p.def2_ok() && p.thm2_ok());
        let p = Params::new(6, 3, 3).unwrap();
        assert!(!p.thm2_ok());
        // 5 * 2 = 10 < 3 * 4 = 12
        assert!(!Params::new(5, 4, 3).unwrap().def1_ok());
        assert!(Params::new(4, 2, 3).is_err());
        assert!(Params::new(4, 2, 1).is_err());
    }

    #[test]
    fn parse_file_format() {
        let text = "# header\n5 2\n1 2 # first\n\n4 5\n2 1\n";
        let f = Family::parse(text).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(Family::parse(&f.to_file_string()).unwrap(), f);
        assert_eq!(
            Family::parse("5 2\n1 2\n1 x\n"),
            Err(Error::Parse {
                line: 3,
                msg: "not a non-negative integer: \"x\"".into()
            })
        );
        assert!(matches!(
            Family::parse("5 2\n1 2 3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            Family::parse("# nothing\n"),
            Err(Error::Parse { .. })
        ));
    }
}
