use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Job, Schedule, Segment};
use crate::num::Scalar;

/// Up to `count` distinct feasible schedules for `jobs`, drawn at random.
///
/// Each job's work is split over the elementary intervals of its window
/// (between consecutive release/deadline points) with random weights. Every
/// elementary interval then runs its load back to back, either at one
/// uniform speed or with randomly skewed per-piece speeds, and possibly
/// leaves part of the interval idle. Fewer than `count` schedules come back
/// only if the retry budget runs out on duplicates.
pub fn feasible_sampler<T: Scalar>(jobs: &[Job<T>], count: usize, seed: u64) -> Vec<Schedule<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<T> = jobs
        .iter()
        .flat_map(|j| [j.arrival.clone(), j.deadline.clone()])
        .collect();
    points.sort_by(|a, b| a.approx_cmp(b));
    points.dedup_by(|a, b| a.is_eq(b));
    let cells: Vec<(T, T)> = points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    let eligible: Vec<Vec<usize>> = jobs
        .iter()
        .map(|j| {
            (0..cells.len())
                .filter(|&c| j.arrival.is_le(&cells[c].0) && cells[c].1.is_le(&j.deadline))
                .collect()
        })
        .collect();

    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < count.saturating_mul(20).max(20) {
        attempts += 1;
        let mode = rng.gen_range(0..3);
        let weights: Vec<Vec<T>> = eligible
            .iter()
            .map(|cs| {
                let mut w: Vec<i64> = cs
                    .iter()
                    .map(|_| match mode {
                        // broad random split
                        0 => rng.gen_range(0..=8),
                        // close to even
                        1 => rng.gen_range(30..=34),
                        // concentrated
                        _ => i64::from(rng.gen_bool(0.3)),
                    })
                    .collect();
                if !w.is_empty() && w.iter().all(|&x| x == 0) {
                    let i = rng.gen_range(0..w.len());
                    w[i] = 1;
                }
                cs.iter()
                    .zip(w)
                    .map(|(&c, w)| {
                        let w = T::from_int(w);
                        // mode 1 weighs by length: a jittered even spread
                        if mode == 1 {
                            w * (cells[c].1.clone() - cells[c].0.clone())
                        } else {
                            w
                        }
                    })
                    .collect()
            })
            .collect();
        let schedule = materialize(jobs, &cells, &eligible, &weights, &mut rng);
        if seen.insert(fingerprint(&schedule)) {
            out.push(schedule);
        }
    }
    out
}

fn fingerprint<T: Scalar>(schedule: &Schedule<T>) -> String {
    schedule
        .segments()
        .iter()
        .map(|s| {
            format!(
                "{:?}:{}:{}:{};",
                s.job,
                s.start.render(),
                s.end.render(),
                s.speed.render()
            )
        })
        .collect()
}

fn materialize<T: Scalar>(
    jobs: &[Job<T>],
    cells: &[(T, T)],
    eligible: &[Vec<usize>],
    weights: &[Vec<T>],
    rng: &mut impl Rng,
) -> Schedule<T> {
    // load[c] = (job index, work) pairs
    let mut load: Vec<Vec<(usize, T)>> = vec![Vec::new(); cells.len()];
    for (k, job) in jobs.iter().enumerate() {
        if !job.workload.is_positive_s() {
            continue;
        }
        let total = weights[k].iter().fold(T::zero(), |acc, w| acc + w.clone());
        for (&c, w) in eligible[k].iter().zip(&weights[k]) {
            if w.is_positive_s() {
                load[c].push((k, job.workload.clone() * w.clone() / total.clone()));
            }
        }
    }
    let uniform = rng.gen_bool(0.5);
    let mut segments = Vec::new();
    for ((start, end), parts) in cells.iter().zip(load) {
        if parts.is_empty() {
            continue;
        }
        // busy fraction of the cell, then each piece's share of the busy time
        let fill = if rng.gen_bool(0.5) {
            T::one()
        } else {
            T::from_ratio(rng.gen_range(32..=127), 128)
        };
        let shares: Vec<T> = parts
            .iter()
            .map(|(_, w)| {
                if uniform {
                    w.clone()
                } else {
                    w.clone() * T::from_int(rng.gen_range(1..=16))
                }
            })
            .collect();
        let share_total = shares.iter().fold(T::zero(), |acc, s| acc + s.clone());
        let busy = (end.clone() - start.clone()) * fill;
        let mut at = start.clone();
        for ((k, w), share) in parts.into_iter().zip(shares) {
            let len = busy.clone() * share / share_total.clone();
            let until = at.clone() + len.clone();
            segments.push(Segment::busy(jobs[k].id, at, until.clone(), w / len));
            at = until;
        }
    }
    Schedule::new(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::verify_feasible;
    use crate::num::Rational;
    use crate::testkit::{generate, InstanceSpec, Structure};

    #[test]
    fn samples_are_feasible_and_distinct() {
        for structure in Structure::ALL {
            let jobs = generate::<Rational>(&InstanceSpec::new(8, structure, 5));
            let samples = feasible_sampler(&jobs, 50, 9);
            assert_eq!(samples.len(), 50);
            for s in &samples {
                let verdict = verify_feasible(s, &jobs);
                assert!(verdict.is_ok(), "{:?}", verdict.violations);
            }
            for i in 0..samples.len() {
                for j in i + 1..samples.len() {
                    assert_ne!(samples[i], samples[j]);
                }
            }
        }
    }

    #[test]
    fn single_job_still_varies() {
        let q = Rational::from_int;
        let jobs = [Job::new(1, q(0), q(1), q(1)).unwrap()];
        let samples = feasible_sampler(&jobs, 10, 1);
        assert_eq!(samples.len(), 10);
        assert!(samples.iter().all(|s| verify_feasible(s, &jobs).is_ok()));
        assert!(feasible_sampler(&jobs, 0, 1).is_empty());
    }
}
