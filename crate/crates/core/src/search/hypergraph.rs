//! The forbidden configurations of a search as a hypergraph on the k-sets.

use crate::clusters::{cluster_condition, simple_roles, walk_clusters};
use crate::error::{Error, Result};
use crate::ground::{ksubsets, Combinations, KSet, Params};

/// Vertex sets of the conflict hypergraph.
pub(crate) type VMask = u128;

/// Largest number of k-sets a search can range over.
pub const MAX_VERTICES: usize = 128;

/// Vertices are the k-sets of `[n]` in canonical order; edges are the
/// d-clusters (or simple d-clusters) among them.
#[derive(Clone, Debug)]
pub(crate) struct ConflictHypergraph {
    pub params: Params,
    pub vertices: Vec<KSet>,
    pub edges: Vec<VMask>,
    /// For each vertex, the other members of every edge through it.
    pub incident: Vec<Vec<VMask>>,
    /// Static pair conflicts (edges of size two).
    pub pairs: Vec<VMask>,
    /// `stars[x - 1]` is the vertex mask of all k-sets containing `x`.
    pub stars: Vec<VMask>,
}

pub(crate) fn vertex_count_guard(params: &Params) -> Result<Vec<KSet>> {
    let count = crate::ground::binom(params.n as u64, params.k as u64)?;
    if count > MAX_VERTICES as u128 {
        return Err(Error::ResourceGuard(format!(
            "C({}, {}) = {count} k-sets exceeds the search limit of {MAX_VERTICES}",
            params.n, params.k
        )));
    }
    Ok(ksubsets(params.n, params.k).collect())
}

fn star_masks(params: &Params, vertices: &[KSet]) -> Vec<VMask> {
    (1..=params.n)
        .map(|x| {
            vertices
                .iter()
                .enumerate()
                .filter(|(_, s)| s.contains(x))
                .fold(0, |m, (i, _)| m | 1 << i)
        })
        .collect()
}

impl ConflictHypergraph {
    pub fn build(params: Params, simple_only: bool) -> Result<Self> {
        let vertices = vertex_count_guard(&params)?;
        let mut edges = Vec::new();
        walk_clusters(&vertices, params.k, params.d, &mut |idx| {
            let keep = !simple_only || {
                let sets: Vec<KSet> = idx.iter().map(|&i| vertices[i]).collect();
                simple_roles(&sets).is_some()
            };
            if keep {
                edges.push(idx.iter().fold(0, |m: VMask, &i| m | 1 << i));
            }
            false
        });
        Ok(Self::from_edges(params, vertices, edges))
    }

    /// Same edge set, found by testing every d-subset of vertices with no
    /// pruning at all. Only for small instances.
    pub fn build_unpruned(params: Params, simple_only: bool) -> Result<Self> {
        let vertices = vertex_count_guard(&params)?;
        let edges = Combinations::new(vertices.len(), params.d)
            .filter(|idx| {
                let sets: Vec<KSet> = idx.iter().map(|&i| vertices[i]).collect();
                if simple_only {
                    simple_roles(&sets).is_some()
                } else {
                    cluster_condition(&sets, params.k)
                }
            })
            .map(|idx| idx.iter().fold(0, |m: VMask, &i| m | 1 << i))
            .collect();
        Ok(Self::from_edges(params, vertices, edges))
    }

    fn from_edges(params: Params, vertices: Vec<KSet>, edges: Vec<VMask>) -> Self {
        let nv = vertices.len();
        let mut incident = vec![Vec::new(); nv];
        let mut pairs = vec![0; nv];
        for &e in &edges {
            let mut rest = e;
            while rest != 0 {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let others = e & !(1 << v);
                incident[v].push(others);
                if others.count_ones() == 1 {
                    pairs[v] |= others;
                }
            }
        }
        let stars = star_masks(&params, &vertices);
        ConflictHypergraph {
            params,
            vertices,
            edges,
            incident,
            pairs,
            stars,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn all(&self) -> VMask {
        if self.len() == 128 {
            VMask::MAX
        } else {
            (1 << self.len()) - 1
        }
    }

    pub fn is_independent(&self, mask: VMask) -> bool {
        self.edges.iter().all(|&e| e & !mask != 0)
    }

    /// Members of `mask` that lie in an edge inside `mask`.
    pub fn clustered(&self, mask: VMask) -> VMask {
        self.edges
            .iter()
            .filter(|&&e| e & !mask == 0)
            .fold(0, |m, &e| m | e)
    }

    pub fn sets_of(&self, mask: VMask) -> Vec<KSet> {
        iter_bits(mask).map(|i| self.vertices[i]).collect()
    }
}

pub(crate) fn iter_bits(mut mask: VMask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            return None;
        }
        let i = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        Some(i)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pruned_and_unpruned_builds_agree() {
        for (n, k, d, simple) in [
            (5, 2, 2, false),
            (6, 3, 3, false),
            (7, 3, 3, true),
            (6, 3, 3, true),
        ] {
            let p = Params::new(n, k, d).unwrap();
            let mut a = ConflictHypergraph::build(p, simple).unwrap().edges;
            let mut b = ConflictHypergraph::build_unpruned(p, simple).unwrap().edges;
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b, "{p} simple={simple}");
        }
    }

    #[test]
    fn kneser_edges() {
        // disjoint pairs of 2-sets of [5]: 10 * 3 / 2
        let h = ConflictHypergraph::build(Params::new(5, 2, 2).unwrap(), false).unwrap();
        assert_eq!(h.edges.len(), 15);
        assert!(h.pairs.iter().all(|p| p.count_ones() == 3));
        assert_eq!(h.stars.len(), 5);
        assert!(h
            .stars
            .iter()
            .all(|s| s.count_ones() == 4 && h.is_independent(*s)));
    }

    #[test]
    fn too_many_vertices() {
        let p = Params::new(10, 5, 2).unwrap();
        assert!(matches!(
            ConflictHypergraph::build(p, false),
            Err(Error::ResourceGuard(_))
        ));
    }
}
