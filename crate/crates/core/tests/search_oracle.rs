//! Branch-and-bound against exhaustive enumeration, and schedule
//! independence of the reports.

use clusterforge::clusters;
use clusterforge::search::{
    classify_extremal, max_cluster_free, max_weighted, objective, oracle_exhaustive, solve,
    ExtremalClass, Mode, SearchProblem,
};
use clusterforge::{binom, Error, Params};

const MODES: [Mode; 3] = [Mode::ClusterFree, Mode::SimpleClusterFree, Mode::Weighted];

fn small_problems() -> Vec<SearchProblem> {
    let mut out = Vec::new();
    for n in 2..=7 {
        for k in 2..=n {
            if binom(n as u64, k as u64).unwrap() > 21 {
                continue;
            }
            for d in 2..=k {
                for mode in MODES {
                    let mut p = SearchProblem::new(Params::new(n, k, d).unwrap(), mode);
                    p.force = true;
                    p.max_representatives = 3;
                    out.push(p);
                }
            }
        }
    }
    out
}

#[test]
fn branch_and_bound_matches_exhaustive() {
    let problems = small_problems();
    assert!(problems.len() > 60);
    for p in &problems {
        let fast = solve(p).unwrap();
        let slow = oracle_exhaustive(p).unwrap();
        assert!(fast.exhausted);
        assert_eq!(fast, slow, "{} {:?}", p.params, p.mode);
    }
}

#[test]
fn representatives_are_optimal_and_classified() {
    for p in small_problems() {
        let r = solve(&p).unwrap();
        assert_eq!(
            r.census.star + r.census.full + r.census.other,
            r.extremal_count
        );
        for rep in &r.representatives {
            assert_eq!(objective(&rep.family, &p).unwrap(), Some(r.optimum));
            assert_eq!(
                classify_extremal(&rep.family, &p, r.optimum).unwrap(),
                rep.class
            );
        }
        let kinds: Vec<u8> = r
            .representatives
            .iter()
            .map(|x| match x.class {
                ExtremalClass::Star { .. } => 0,
                ExtremalClass::Full => 1,
                ExtremalClass::Other => 2,
            })
            .collect();
        assert!(kinds.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn stated_bounds_hold_where_they_apply() {
    for p in small_problems() {
        let prm = p.params;
        let r = solve(&p).unwrap();
        let boundary = prm.d == 2 && prm.n == 2 * prm.k;
        match p.mode {
            Mode::ClusterFree if prm.def1_ok() && prm.thm1_ok() => {
                assert_eq!(r.optimum, p.reference_bound(), "{prm}");
                if !boundary {
                    assert_eq!((r.census.star, r.census.other), (prm.n as u64, 0), "{prm}");
                }
            }
            Mode::SimpleClusterFree if prm.def2_ok() && prm.thm2_ok() => {
                assert_eq!(r.optimum, p.reference_bound(), "{prm}");
                assert!(r.census.star >= prm.n as u64);
            }
            Mode::Weighted if prm.thm1_ok() => {
                assert_eq!(r.optimum, p.reference_bound(), "{prm}");
                if !boundary {
                    assert_eq!(
                        (r.census.star, r.census.full, r.census.other),
                        (prm.n as u64, 1, 0),
                        "{prm}"
                    );
                }
            }
            _ => {}
        }
    }
}

#[test]
fn results_do_not_depend_on_threads() {
    for (n, k, d, mode) in [
        (5, 2, 2, Mode::ClusterFree),
        (6, 3, 3, Mode::ClusterFree),
        (4, 2, 2, Mode::ClusterFree),
        (5, 2, 2, Mode::Weighted),
        (7, 3, 3, Mode::SimpleClusterFree),
        (6, 3, 2, Mode::Weighted),
    ] {
        let mut p = SearchProblem::new(Params::new(n, k, d).unwrap(), mode);
        p.max_representatives = 4;
        let runs: Vec<_> = [1, 2, 8]
            .into_iter()
            .map(|t| {
                p.threads = t;
                solve(&p).unwrap()
            })
            .collect();
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[0], runs[2]);
    }
}

#[test]
fn boundary_case_has_triangles() {
    let p = SearchProblem::new(Params::new(4, 2, 2).unwrap(), Mode::ClusterFree);
    let r = max_cluster_free(&p).unwrap();
    assert_eq!(r.optimum, 3);
    assert!(r.census.other > 0);
    let tri = r
        .representatives
        .iter()
        .find(|x| x.class == ExtremalClass::Other)
        .unwrap();
    assert!(clusters::is_cluster_free(&tri.family, 2, false).unwrap());
}

#[test]
fn search_guards() {
    let big = SearchProblem::new(Params::new(10, 5, 3).unwrap(), Mode::ClusterFree);
    assert!(matches!(
        max_cluster_free(&big),
        Err(Error::ResourceGuard(_))
    ));
    let mid = SearchProblem::new(Params::new(7, 3, 3).unwrap(), Mode::ClusterFree);
    assert!(matches!(
        oracle_exhaustive(&mid),
        Err(Error::ResourceGuard(_))
    ));
    let w = SearchProblem::new(Params::new(5, 3, 3).unwrap(), Mode::Weighted);
    assert!(matches!(max_weighted(&w), Err(Error::InvalidParams(_))));
}
