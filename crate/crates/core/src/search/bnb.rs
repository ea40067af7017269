//! Branch-and-bound over vertex masks of a conflict hypergraph.
//!
//! The tree branches on the least remaining candidate, include first. The
//! top of the tree is cut into independent tasks that rayon runs in
//! parallel; per-task results are merged in task order, so reports do not
//! depend on the thread count whenever the search exhausts.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::hypergraph::{ConflictHypergraph, VMask};
use super::{classify_mask, weighted_value, Budget, SearchProblem, SearchResult, Tally};
use crate::error::Result;
use crate::ground::binom_small;

const SPLIT_DEPTH: usize = 8;

/// Shared node and time budget.
pub(crate) struct Control {
    nodes: AtomicU64,
    max_nodes: u64,
    deadline: Instant,
    stopped: AtomicBool,
    batch: u64,
}

impl Control {
    pub(crate) fn new(budget: &Budget) -> Self {
        Control {
            nodes: AtomicU64::new(0),
            max_nodes: budget.max_nodes,
            deadline: Instant::now() + budget.max_time,
            stopped: AtomicBool::new(false),
            batch: (budget.max_nodes / 64).clamp(1, 4096),
        }
    }

    pub(crate) fn stopped(&self) -> bool {
        self.stopped.load(Ordering::Relaxed)
    }

    fn charge(&self, n: u64) -> bool {
        if self.stopped() {
            return false;
        }
        let total = self.nodes.fetch_add(n, Ordering::Relaxed) + n;
        if total > self.max_nodes || Instant::now() > self.deadline {
            self.stopped.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }
}

/// Per-worker node counter that reports to [`Control`] in batches.
pub(crate) struct Meter<'a> {
    ctrl: &'a Control,
    local: u64,
}

impl<'a> Meter<'a> {
    pub(crate) fn new(ctrl: &'a Control) -> Self {
        Meter { ctrl, local: 0 }
    }

    /// Counts one node; false once the budget is spent.
    #[inline]
    pub(crate) fn step(&mut self) -> bool {
        self.local += 1;
        if self.local >= self.ctrl.batch {
            let n = std::mem::take(&mut self.local);
            return self.ctrl.charge(n);
        }
        !self.ctrl.stopped()
    }
}

#[inline]
fn bit(v: usize) -> VMask {
    1 << v
}

/// Cuts the tree below `root` into subtrees, in depth-first order.
fn split<N>(root: N, depth: usize, children: &impl Fn(&N) -> Vec<N>) -> Vec<N> {
    if depth == 0 {
        return vec![root];
    }
    let kids = children(&root);
    if kids.is_empty() {
        return vec![root];
    }
    kids.into_iter()
        .flat_map(|c| split(c, depth - 1, children))
        .collect()
}

/// Partial independent set: `chosen` is fixed, `cand` may still be added,
/// and `pairs[v]` lists candidates that cannot join together with `v`.
#[derive(Clone)]
struct INode {
    chosen: VMask,
    cand: VMask,
    pairs: Vec<VMask>,
}

impl INode {
    fn root(h: &ConflictHypergraph) -> Self {
        INode {
            chosen: 0,
            cand: h.all(),
            pairs: h.pairs.clone(),
        }
    }

    fn include(&self, h: &ConflictHypergraph, v: usize) -> INode {
        let chosen = self.chosen | bit(v);
        let mut cand = self.cand & !bit(v) & !self.pairs[v];
        let mut pairs = self.pairs.clone();
        for &others in &h.incident[v] {
            let rest = others & !chosen;
            if rest & !cand != 0 {
                continue;
            }
            debug_assert!(rest != 0, "edge completed inside chosen set");
            match rest.count_ones() {
                1 => cand &= !rest,
                2 => {
                    let a = rest.trailing_zeros() as usize;
                    let b = (rest & (rest - 1)).trailing_zeros() as usize;
                    pairs[a] |= bit(b);
                    pairs[b] |= bit(a);
                }
                _ => {}
            }
        }
        INode {
            chosen,
            cand,
            pairs,
        }
    }

    fn exclude(&self, v: usize) -> INode {
        INode {
            chosen: self.chosen,
            cand: self.cand & !bit(v),
            pairs: self.pairs.clone(),
        }
    }

    fn children(&self, h: &ConflictHypergraph) -> Vec<INode> {
        if self.cand == 0 {
            return Vec::new();
        }
        let v = self.cand.trailing_zeros() as usize;
        vec![self.include(h, v), self.exclude(v)]
    }

    /// `|chosen|` plus a greedy clique cover of the candidates in the pair
    /// graph, stopping early once it exceeds `stop`.
    fn bound(&self, stop: u32) -> u32 {
        let mut total = self.chosen.count_ones();
        let mut rest = self.cand;
        while rest != 0 {
            if total > stop {
                return total;
            }
            let v = rest.trailing_zeros() as usize;
            rest &= !bit(v);
            let mut common = self.pairs[v] & rest;
            while common != 0 {
                let u = common.trailing_zeros() as usize;
                rest &= !bit(u);
                common &= self.pairs[u] & !bit(u);
            }
            total += 1;
        }
        total
    }
}

/// Largest independent set below `node`, beating the shared `best`.
fn dfs_max(
    h: &ConflictHypergraph,
    node: &INode,
    best: &AtomicU64,
    found: &mut Option<VMask>,
    meter: &mut Meter,
) {
    if !meter.step() {
        return;
    }
    let size = node.chosen.count_ones() as u64;
    if node.cand == 0 {
        if size > best.load(Ordering::Relaxed) {
            best.fetch_max(size, Ordering::Relaxed);
            *found = Some(node.chosen);
        }
        return;
    }
    let b = best.load(Ordering::Relaxed) as u32;
    if node.bound(b) <= b {
        return;
    }
    let v = node.cand.trailing_zeros() as usize;
    dfs_max(h, &node.include(h, v), best, found, meter);
    dfs_max(h, &node.exclude(v), best, found, meter);
}

/// Every independent set of size exactly `target` below `node`.
fn dfs_all(
    h: &ConflictHypergraph,
    node: &INode,
    target: u32,
    tally: &mut Tally,
    meter: &mut Meter,
) {
    if !meter.step() {
        return;
    }
    if node.chosen.count_ones() == target {
        tally.offer(target as u128, node.chosen, classify_mask(h, node.chosen));
        return;
    }
    if node.cand == 0 || node.bound(target) < target {
        return;
    }
    let v = node.cand.trailing_zeros() as usize;
    dfs_all(h, &node.include(h, v), target, tally, meter);
    dfs_all(h, &node.exclude(v), target, tally, meter);
}

pub(crate) fn cluster_free(
    h: &ConflictHypergraph,
    problem: &SearchProblem,
) -> Result<SearchResult> {
    let ctrl = Control::new(&problem.budget);
    let (target, mask) = maximum(h, &ctrl);
    if ctrl.stopped() {
        let mut tally = Tally::new(problem.max_representatives);
        tally.offer(target as u128, mask, classify_mask(h, mask));
        return Ok(tally.into_result(problem, h, false));
    }
    let tasks = split(INode::root(h), SPLIT_DEPTH, &|n: &INode| {
        if n.chosen.count_ones() == target {
            Vec::new()
        } else {
            n.children(h)
        }
    });
    let tally = tasks
        .par_iter()
        .map(|t| {
            let mut tally = Tally::new(problem.max_representatives);
            let mut meter = Meter::new(&ctrl);
            dfs_all(h, t, target, &mut tally, &mut meter);
            tally
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(problem.max_representatives), Tally::merge);
    Ok(tally.into_result(problem, h, !ctrl.stopped()))
}

/// Size and an example of a largest independent set. The first vertex is
/// forced in, which loses nothing up to isomorphism.
fn maximum(h: &ConflictHypergraph, ctrl: &Control) -> (u32, VMask) {
    let params = h.params;
    let root = INode::root(h).include(h, 0);
    // a star through the first vertex is always feasible
    let star = binom_small(params.n - 1, params.k - 1) as u64;
    let best = AtomicU64::new(star - 1);
    let tasks = split(root, SPLIT_DEPTH, &|n: &INode| n.children(h));
    let found: Vec<Option<VMask>> = tasks
        .par_iter()
        .map(|t| {
            let mut found = None;
            let mut meter = Meter::new(ctrl);
            dfs_max(h, t, &best, &mut found, &mut meter);
            found
        })
        .collect();
    let top = found.iter().flatten().map(|m| m.count_ones()).max();
    match top {
        Some(top) => (
            top,
            found
                .into_iter()
                .flatten()
                .find(|m| m.count_ones() == top)
                .unwrap_or_default(),
        ),
        None => (star as u32, h.stars[0]),
    }
}

/// Partial family for the weighted objective. `clustered` are chosen
/// members already in a complete edge; `forced` are candidates that would
/// complete an edge if added.
#[derive(Clone, Copy)]
struct WNode {
    chosen: VMask,
    cand: VMask,
    clustered: VMask,
    forced: VMask,
}

impl WNode {
    fn include(&self, h: &ConflictHypergraph, v: usize) -> WNode {
        let chosen = self.chosen | bit(v);
        let cand = self.cand & !bit(v);
        let mut clustered = self.clustered;
        let mut forced = self.forced & cand;
        for &others in &h.incident[v] {
            let rest = others & !chosen;
            if rest == 0 {
                clustered |= others | bit(v);
            } else if rest.count_ones() == 1 {
                forced |= rest & cand;
            }
        }
        WNode {
            chosen,
            cand,
            clustered,
            forced,
        }
    }

    fn exclude(&self, v: usize) -> WNode {
        WNode {
            cand: self.cand & !bit(v),
            forced: self.forced & !bit(v),
            ..*self
        }
    }

    fn children(&self, h: &ConflictHypergraph) -> Vec<WNode> {
        if self.cand == 0 {
            return Vec::new();
        }
        let v = self.cand.trailing_zeros() as usize;
        vec![self.include(h, v), self.exclude(v)]
    }

    fn bound(&self, n: u64, k: u64) -> u64 {
        let members = (self.chosen | self.cand).count_ones() as u64;
        let free =
            ((self.chosen & !self.clustered) | (self.cand & !self.forced)).count_ones() as u64;
        k * members + (n - k) * free
    }
}

fn dfs_weighted(
    h: &ConflictHypergraph,
    node: &WNode,
    best: &AtomicU64,
    tally: &mut Tally,
    meter: &mut Meter,
) {
    if !meter.step() {
        return;
    }
    if node.cand == 0 {
        let value = weighted_value(h, node.chosen, node.clustered);
        best.fetch_max(value as u64, Ordering::Relaxed);
        tally.offer(value, node.chosen, classify_mask(h, node.chosen));
        return;
    }
    let (n, k) = (h.params.n as u64, h.params.k as u64);
    if node.bound(n, k) < best.load(Ordering::Relaxed) {
        return;
    }
    let v = node.cand.trailing_zeros() as usize;
    dfs_weighted(h, &node.include(h, v), best, tally, meter);
    dfs_weighted(h, &node.exclude(v), best, tally, meter);
}

pub(crate) fn weighted(h: &ConflictHypergraph, problem: &SearchProblem) -> Result<SearchResult> {
    let ctrl = Control::new(&problem.budget);
    let root = WNode {
        chosen: 0,
        cand: h.all(),
        clustered: 0,
        forced: 0,
    };
    let best = AtomicU64::new(0);
    let tasks = split(root, SPLIT_DEPTH, &|n: &WNode| n.children(h));
    let tally = tasks
        .par_iter()
        .map(|t| {
            let mut tally = Tally::new(problem.max_representatives);
            let mut meter = Meter::new(&ctrl);
            dfs_weighted(h, t, &best, &mut tally, &mut meter);
            tally
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(problem.max_representatives), Tally::merge);
    Ok(tally.into_result(problem, h, !ctrl.stopped()))
}
