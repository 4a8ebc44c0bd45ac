use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Job, JobId, JobSet};
use crate::num::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Structure {
    /// Independent random windows.
    Uniform,
    /// A chain: every pair of windows is nested.
    Nested,
    /// Every pair of windows is nested or disjoint.
    Laminar,
    /// Random windows confined to disjoint cluster ranges.
    DisjointClusters,
}

impl Structure {
    pub const ALL: [Structure; 4] = [
        Structure::Uniform,
        Structure::Nested,
        Structure::Laminar,
        Structure::DisjointClusters,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Structure::Uniform => "uniform",
            Structure::Nested => "nested",
            Structure::Laminar => "laminar",
            Structure::DisjointClusters => "disjoint-clusters",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Structure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Structure::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| format!("unknown structure `{s}` (expected uniform, nested, laminar or disjoint-clusters)"))
    }
}

/// Parameters of a generated instance. Times and workloads are multiples of
/// `1 / resolution`, so every instance is exactly representable.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub n: usize,
    /// Grid points per time unit.
    pub resolution: i64,
    /// Horizon length in grid points; raised to `2n` when smaller.
    pub ticks: i64,
    /// Inclusive workload range, in grid units.
    pub workload: (i64, i64),
    pub seed: u64,
    pub structure: Structure,
}

impl InstanceSpec {
    pub fn new(n: usize, structure: Structure, seed: u64) -> Self {
        InstanceSpec {
            n,
            resolution: 4,
            ticks: 8 + 2 * n as i64,
            workload: (1, 16),
            seed,
            structure,
        }
    }
}

/// Deterministic for a fixed spec.
pub fn generate<T: Scalar>(spec: &InstanceSpec) -> JobSet<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ticks = spec.ticks.max(2 * spec.n as i64).max(1);
    let windows = match spec.structure {
        Structure::Uniform => (0..spec.n).map(|_| random_window(&mut rng, 0, ticks)).collect(),
        Structure::Nested => nested(&mut rng, spec.n, ticks),
        Structure::Laminar => laminar(&mut rng, spec.n, ticks),
        Structure::DisjointClusters => clusters(&mut rng, spec.n, ticks),
    };
    let (wlo, whi) = (spec.workload.0.max(0), spec.workload.1.max(spec.workload.0.max(0)));
    let jobs = windows
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| Job {
            id: i as JobId + 1,
            arrival: T::from_ratio(a, spec.resolution),
            deadline: T::from_ratio(b, spec.resolution),
            workload: T::from_ratio(rng.gen_range(wlo..=whi), spec.resolution),
        })
        .collect();
    JobSet::new(jobs).expect("generated windows are valid")
}

fn random_window(rng: &mut impl Rng, lo: i64, hi: i64) -> (i64, i64) {
    let a = rng.gen_range(lo..hi);
    let b = rng.gen_range(a + 1..=hi);
    (a, b)
}

fn nested(rng: &mut impl Rng, n: usize, ticks: i64) -> Vec<(i64, i64)> {
    let mid = ticks / 2;
    let mut lefts: Vec<i64> = (0..n).map(|_| rng.gen_range(0..mid.max(1))).collect();
    let mut rights: Vec<i64> = (0..n).map(|_| rng.gen_range(mid.max(1)..=ticks)).collect();
    lefts.sort_unstable();
    rights.sort_unstable_by(|a, b| b.cmp(a));
    lefts.into_iter().zip(rights).map(|(a, b)| (a, b.max(a + 1))).collect()
}

/// Matching pairs of a random balanced bracket sequence on distinct ticks.
fn laminar(rng: &mut impl Rng, n: usize, ticks: i64) -> Vec<(i64, i64)> {
    let mut positions: Vec<i64> = index::sample(rng, ticks as usize + 1, 2 * n)
        .into_iter()
        .map(|p| p as i64)
        .collect();
    positions.sort_unstable();
    let (mut opens_left, mut open) = (n, Vec::new());
    let mut out = Vec::with_capacity(n);
    for pos in positions {
        let must_open = open.is_empty();
        if opens_left > 0 && (must_open || rng.gen_bool(0.5)) {
            open.push(pos);
            opens_left -= 1;
        } else {
            let a = open.pop().expect("balanced");
            out.push((a, pos));
        }
    }
    out
}

fn clusters(rng: &mut impl Rng, n: usize, ticks: i64) -> Vec<(i64, i64)> {
    let k = ((n as f64).sqrt().ceil() as i64).clamp(1, (ticks / 2).max(1));
    let width = ticks / k;
    (0..n)
        .map(|_| {
            let c = rng.gen_range(0..k);
            // leave a gap of one tick between clusters
            let lo = c * width;
            let hi = (lo + width - 1).max(lo + 1);
            random_window(rng, lo, hi)
        })
        .collect()
}

/// A chain of nested windows whose optimal speeds grow by `ratio` from the
/// outside in. Every ring between consecutive windows is two units wide, so
/// the continuous solver can only peel a few jobs per level: its worst case.
pub fn adversarial_nested(n: usize, ratio: f64) -> JobSet<f64> {
    let jobs = (0..n)
        .map(|i| Job {
            id: i as JobId + 1,
            arrival: i as f64,
            deadline: (2 * n - i) as f64,
            workload: 2.0 * ratio.powi(i as i32),
        })
        .collect();
    JobSet::new(jobs).expect("nested windows are valid")
}

/// Structural post-check for generated instances.
pub fn structure_holds<T: Scalar>(jobs: &[Job<T>], structure: Structure) -> bool {
    let nested = |x: &Job<T>, y: &Job<T>| x.within(&y.arrival, &y.deadline) || y.within(&x.arrival, &x.deadline);
    let disjoint = |x: &Job<T>, y: &Job<T>| x.deadline.is_le(&y.arrival) || y.deadline.is_le(&x.arrival);
    let pairs = || {
        jobs.iter()
            .enumerate()
            .flat_map(move |(i, x)| jobs[i + 1..].iter().map(move |y| (x, y)))
    };
    match structure {
        Structure::Uniform | Structure::DisjointClusters => true,
        Structure::Nested => pairs().all(|(x, y)| nested(x, y)),
        Structure::Laminar => pairs().all(|(x, y)| nested(x, y) || disjoint(x, y)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Rational;

    #[test]
    fn empty_instance() {
        let set: JobSet<Rational> = generate(&InstanceSpec::new(0, Structure::Uniform, 1));
        assert!(set.is_empty());
    }

    #[test]
    fn deterministic_per_seed() {
        for structure in Structure::ALL {
            let spec = InstanceSpec::new(20, structure, 42);
            let a: JobSet<Rational> = generate(&spec);
            let b: JobSet<Rational> = generate(&spec);
            assert_eq!(a, b);
            let other: JobSet<Rational> = generate(&InstanceSpec { seed: 43, ..spec });
            assert_ne!(a, other);
        }
    }

    #[test]
    fn structures_hold() {
        for seed in 0..50 {
            for structure in Structure::ALL {
                let set: JobSet<Rational> = generate(&InstanceSpec::new(15, structure, seed));
                assert_eq!(set.len(), 15);
                assert!(structure_holds(&set, structure), "{structure} seed {seed}");
            }
        }
    }

    #[test]
    fn adversarial_chain_is_nested() {
        let set = adversarial_nested(50, 1.3);
        assert!(structure_holds(&set, Structure::Nested));
        assert!(set.windows(2).all(|w| w[1].workload > w[0].workload));
    }

    #[test]
    fn structure_names_round_trip() {
        for structure in Structure::ALL {
            assert_eq!(structure.as_str().parse::<Structure>().unwrap(), structure);
        }
        assert!("spiral".parse::<Structure>().is_err());
    }
}
