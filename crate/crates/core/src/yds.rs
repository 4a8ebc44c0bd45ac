//! Reference solver: repeated critical-interval extraction.
//!
//! Find the interval of maximum intensity, run the jobs it contains by EDF
//! at that intensity, cut the interval out of the timeline and repeat on the
//! rest. Straightforward and slow (cubic per extraction); its job is to be
//! obviously right. It deliberately shares no code with the fast solvers
//! beyond the model types.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{Job, JobId, Schedule, Segment};
use crate::num::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalInterval<T> {
    pub start: T,
    pub end: T,
    /// Intensity of the interval, the speed its jobs run at.
    pub speed: T,
    pub jobs: Vec<JobId>,
}

/// Maximum-intensity interval over all `[arrival, deadline]` candidates.
/// Ties go to the leftmost start, then the longest interval.
pub fn find_critical_interval<T: Scalar>(jobs: &[Job<T>]) -> Result<CriticalInterval<T>> {
    if jobs.is_empty() {
        return Err(Error::invalid("critical interval of an empty job set"));
    }
    let starts = distinct(jobs.iter().map(|j| j.arrival.clone()));
    let mut by_deadline: Vec<&Job<T>> = jobs.iter().collect();
    by_deadline.sort_by(|a, b| a.deadline.approx_cmp(&b.deadline));

    // starts ascending, ends ascending: a later candidate replaces the best
    // only if strictly denser, or equally dense from the same start
    let mut best: Option<(T, T, T)> = None;
    for start in &starts {
        let mut work = T::zero();
        let mut i = 0;
        while i < by_deadline.len() {
            let end = by_deadline[i].deadline.clone();
            while i < by_deadline.len() && by_deadline[i].deadline.is_eq(&end) {
                if by_deadline[i].arrival.is_ge(start) {
                    work = work + by_deadline[i].workload.clone();
                }
                i += 1;
            }
            if !end.is_gt(start) {
                continue;
            }
            let g = work.clone() / (end.clone() - start.clone());
            let better = match &best {
                None => true,
                Some((bs, _, bg)) => match g.approx_cmp(bg) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => start.is_eq(bs),
                },
            };
            if better {
                best = Some((start.clone(), end, g));
            }
        }
    }
    let (start, end, speed) = best.expect("every job yields a candidate");
    let contained = jobs
        .iter()
        .filter(|j| j.arrival.is_ge(&start) && j.deadline.is_le(&end))
        .map(|j| j.id)
        .collect();
    Ok(CriticalInterval {
        start,
        end,
        speed,
        jobs: contained,
    })
}

/// Output of [`mes_schedule_detailed`].
#[derive(Clone, Debug)]
pub struct MesOutcome<T> {
    pub schedule: Schedule<T>,
    /// Extracted intervals in extraction order, each in the compressed
    /// coordinates of its round.
    pub levels: Vec<CriticalInterval<T>>,
    /// Speed of every job with positive workload.
    pub speeds: BTreeMap<JobId, T>,
}

/// The minimum-energy schedule for arbitrary speeds.
pub fn mes_schedule<T: Scalar>(jobs: &[Job<T>]) -> Schedule<T> {
    mes_schedule_detailed(jobs).schedule
}

pub fn mes_schedule_detailed<T: Scalar>(jobs: &[Job<T>]) -> MesOutcome<T> {
    let horizon = jobs
        .iter()
        .map(|j| j.deadline.clone())
        .reduce(|a, b| a.max_s(b))
        .unwrap_or_else(T::zero);
    // Original-time intervals not yet handed out; local time is the measure
    // of free time before a point.
    let mut free: Vec<(T, T)> = vec![(T::zero(), horizon)];
    let mut remaining: Vec<&Job<T>> = jobs.iter().filter(|j| j.workload.is_positive_s()).collect();
    let mut segments = Vec::new();
    let mut levels = Vec::new();
    let mut speeds = BTreeMap::new();

    while !remaining.is_empty() {
        let local: Vec<Job<T>> = remaining
            .iter()
            .map(|j| Job {
                id: j.id,
                arrival: free_measure_before(&free, &j.arrival),
                deadline: free_measure_before(&free, &j.deadline),
                workload: j.workload.clone(),
            })
            .collect();
        let critical = find_critical_interval(&local).expect("non-empty");
        let members: Vec<Job<T>> = local
            .iter()
            .filter(|j| critical.jobs.contains(&j.id))
            .cloned()
            .collect();
        for (id, start, end) in edf_at_speed(&members, &critical.speed, &critical.start) {
            for (lo, hi) in free_pieces(&free, &start, &end) {
                segments.push(Segment::busy(id, lo, hi, critical.speed.clone()));
            }
        }
        for id in &critical.jobs {
            speeds.insert(*id, critical.speed.clone());
        }
        let taken = free_pieces(&free, &critical.start, &critical.end);
        free = subtract(&free, &taken);
        remaining.retain(|j| !critical.jobs.contains(&j.id));
        levels.push(critical);
    }
    MesOutcome {
        schedule: Schedule::new(segments),
        levels,
        speeds,
    }
}

fn distinct<T: Scalar>(values: impl Iterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = values.collect();
    v.sort_by(|a, b| a.approx_cmp(b));
    v.dedup_by(|a, b| a.is_eq(b));
    v
}

fn free_measure_before<T: Scalar>(free: &[(T, T)], t: &T) -> T {
    free.iter()
        .filter(|(lo, _)| lo.is_lt(t))
        .fold(T::zero(), |acc, (lo, hi)| {
            acc + (hi.clone().min_s(t.clone()) - lo.clone())
        })
}

/// Original-time pieces of the free set whose local coordinates fall in `[x, y)`.
fn free_pieces<T: Scalar>(free: &[(T, T)], x: &T, y: &T) -> Vec<(T, T)> {
    let mut out = Vec::new();
    let mut seen = T::zero();
    for (lo, hi) in free {
        let len = hi.clone() - lo.clone();
        let (from, to) = (seen.clone(), seen.clone() + len);
        // overlap of [from, to) with [x, y) in local time
        let a = from.clone().max_s(x.clone());
        let b = to.clone().min_s(y.clone());
        if a.is_lt(&b) {
            out.push((lo.clone() + (a - from.clone()), lo.clone() + (b - from)));
        }
        seen = to;
    }
    out
}

fn subtract<T: Scalar>(free: &[(T, T)], taken: &[(T, T)]) -> Vec<(T, T)> {
    let mut out = Vec::new();
    for (lo, hi) in free {
        let mut cursor = lo.clone();
        for (tlo, thi) in taken.iter().filter(|(a, b)| a.is_lt(hi) && b.is_gt(lo)) {
            if tlo.is_gt(&cursor) {
                out.push((cursor.clone(), tlo.clone()));
            }
            cursor = cursor.max_s(thi.clone());
        }
        if cursor.is_lt(hi) {
            out.push((cursor, hi.clone()));
        }
    }
    out
}

/// Plain EDF simulation at constant speed; jobs are expected to finish.
fn edf_at_speed<T: Scalar>(jobs: &[Job<T>], speed: &T, from: &T) -> Vec<(JobId, T, T)> {
    let mut left: Vec<T> = jobs.iter().map(|j| j.workload.clone()).collect();
    let mut out: Vec<(JobId, T, T)> = Vec::new();
    let mut now = from.clone();
    loop {
        let ready = (0..jobs.len())
            .filter(|&k| left[k].is_positive_s() && jobs[k].arrival.is_le(&now))
            .min_by(|&x, &y| {
                jobs[x]
                    .deadline
                    .approx_cmp(&jobs[y].deadline)
                    .then(jobs[x].id.cmp(&jobs[y].id))
            });
        let next_arrival = jobs
            .iter()
            .enumerate()
            .filter(|(k, j)| left[*k].is_positive_s() && j.arrival.is_gt(&now))
            .map(|(_, j)| j.arrival.clone())
            .reduce(|a, b| a.min_s(b));
        match ready {
            None => match next_arrival {
                Some(t) => now = t,
                None => break,
            },
            Some(k) => {
                let finish = now.clone() + left[k].clone() / speed.clone();
                let until = match next_arrival {
                    Some(t) if t.is_lt(&finish) => t,
                    _ => finish,
                };
                left[k] = left[k].clone() - speed.clone() * (until.clone() - now.clone());
                if left[k].is_eq(&T::zero()) {
                    left[k] = T::zero();
                }
                match out.last_mut() {
                    Some(last) if last.0 == jobs[k].id && last.2.is_eq(&now) => last.2 = until.clone(),
                    _ => out.push((jobs[k].id, now.clone(), until.clone())),
                }
                now = until;
            }
        }
    }
    out
}
