//! Exhaustive walk over every family, for cross-checking the main search.

use rayon::prelude::*;

use super::hypergraph::{ConflictHypergraph, VMask};
use super::{classify_mask, weighted_value, Mode, SearchProblem, SearchResult, Tally};
use crate::error::{Error, Result};

/// Largest number of k-sets the exhaustive walk accepts.
pub const MAX_ORACLE_VERTICES: usize = 25;

const CHUNK_BITS: usize = 16;

pub(crate) fn run(h: &ConflictHypergraph, problem: &SearchProblem) -> Result<SearchResult> {
    let nv = h.len();
    if nv > MAX_ORACLE_VERTICES {
        return Err(Error::ResourceGuard(format!(
            "{nv} k-sets exceeds the exhaustive limit of {MAX_ORACLE_VERTICES}"
        )));
    }
    let low = nv.min(CHUNK_BITS);
    let chunks: VMask = 1 << (nv - low);
    let weighted = problem.mode == Mode::Weighted;
    let tally = (0..chunks as u64)
        .into_par_iter()
        .map(|hi| {
            let mut tally = Tally::new(problem.max_representatives);
            let base = (hi as VMask) << low;
            for lo in 0..(1 as VMask) << low {
                let mask = base | lo;
                let value = if weighted {
                    weighted_value(h, mask, h.clustered(mask))
                } else if h.is_independent(mask) {
                    mask.count_ones() as u128
                } else {
                    continue;
                };
                if tally.best().is_some_and(|b| value < b) {
                    continue;
                }
                tally.offer(value, mask, classify_mask(h, mask));
            }
            tally
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::new(problem.max_representatives), Tally::merge);
    Ok(tally.into_result(problem, h, true))
}
