//! Seeded random families for the verification suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clusters;
use crate::error::Result;
use crate::ground::{ksubsets, Family, KSet, Params};

/// The generator used throughout; the stream is fixed for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// How a family was produced, enough to regenerate it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorInfo {
    pub method: &'static str,
    pub seed: u64,
    pub density: f64,
    pub attempts: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Generated {
    pub family: Family,
    pub generator: GeneratorInfo,
}

/// Keeps each k-set of `[n]` independently with probability `density`.
pub fn random_family(n: usize, k: usize, density: f64, rng: &mut impl Rng) -> Result<Family> {
    let sets: Vec<KSet> = ksubsets(n, k).filter(|_| rng.gen_bool(density)).collect();
    Family::new(n, k, sets)
}

/// A family of a random density in `(0, 1)`; every tenth draw on average is
/// instead a star or the full family, so that extremal shapes are covered.
pub fn random_instance(n: usize, k: usize, seed: u64) -> Result<Generated> {
    let mut rng = rng(seed);
    let roll = rng.gen_range(0..20);
    let (method, density, family) = match roll {
        0 => ("star", 0.0, Family::star(n, k, rng.gen_range(1..=n))?),
        1 => ("full", 1.0, Family::full(n, k)?),
        _ => {
            let density = rng.gen_range(0.05..0.95);
            ("density", density, random_family(n, k, density, &mut rng)?)
        }
    };
    Ok(Generated {
        family,
        generator: GeneratorInfo {
            method,
            seed,
            density,
            attempts: 1,
        },
    })
}

/// A family with no simple d-cluster. Sparse random families are drawn
/// until one is free; after `max_attempts` a random star is perturbed
/// instead by dropping some members and adding random k-sets that keep it
/// free.
pub fn simple_cluster_free_family(
    params: Params,
    seed: u64,
    max_attempts: u32,
) -> Result<Generated> {
    let Params { n, k, d } = params;
    let mut rng = rng(seed);
    for attempt in 1..=max_attempts {
        let density = rng.gen_range(0.05..0.35);
        let family = random_family(n, k, density, &mut rng)?;
        if clusters::is_cluster_free(&family, d, true)? {
            return Ok(Generated {
                family,
                generator: GeneratorInfo {
                    method: "rejection",
                    seed,
                    density,
                    attempts: attempt,
                },
            });
        }
    }
    let star = Family::star(n, k, rng.gen_range(1..=n))?;
    let keep = rng.gen_range(0.5..1.0);
    let mut sets: Vec<KSet> = star.iter().filter(|_| rng.gen_bool(keep)).collect();
    let mut others: Vec<KSet> = ksubsets(n, k).filter(|s| !star.contains(*s)).collect();
    others.shuffle(&mut rng);
    for s in others.into_iter().take(n) {
        sets.push(s);
        if !clusters::is_cluster_free(&Family::new(n, k, sets.clone())?, d, true)? {
            sets.pop();
        }
    }
    Ok(Generated {
        family: Family::new(n, k, sets)?,
        generator: GeneratorInfo {
            method: "star_perturbation",
            seed,
            density: keep,
            attempts: max_attempts,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_family() {
        let a = random_instance(7, 3, 11).unwrap();
        let b = random_instance(7, 3, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_families_are_free() {
        let p = Params::new(7, 3, 3).unwrap();
        for seed in 0..20 {
            let g = simple_cluster_free_family(p, seed, 50).unwrap();
            assert!(clusters::is_cluster_free(&g.family, 3, true).unwrap());
        }
        let fallback = simple_cluster_free_family(p, 5, 0).unwrap();
        assert_eq!(fallback.generator.method, "star_perturbation");
        assert!(clusters::is_cluster_free(&fallback.family, 3, true).unwrap());
    }
}
