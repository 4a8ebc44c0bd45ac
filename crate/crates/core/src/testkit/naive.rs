use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::model::{Job, Segment};
use crate::num::Scalar;

/// Event-driven simulation of EDF at a fixed speed, dropping whatever is
/// left of a job at its deadline.
#[derive(Clone, Debug)]
pub struct EdfOutcome<T> {
    /// Maximal execution intervals in time order.
    pub segments: Vec<Segment<T>>,
    /// Unfinished workload per input index.
    pub residual: Vec<T>,
}

/// Reference for the s-schedule: a priority queue keyed by deadline (ties by
/// id), advanced from event to event.
pub fn naive_edf_s_schedule<T: Scalar>(jobs: &[Job<T>], speed: &T) -> EdfOutcome<T> {
    let n = jobs.len();
    let mut residual: Vec<T> = jobs.iter().map(|j| j.workload.clone()).collect();
    let mut by_deadline: Vec<usize> = (0..n).collect();
    by_deadline.sort_by(|&x, &y| {
        jobs[x]
            .deadline
            .approx_cmp(&jobs[y].deadline)
            .then(jobs[x].id.cmp(&jobs[y].id))
    });
    let mut priority = vec![0; n];
    for (pos, &k) in by_deadline.iter().enumerate() {
        priority[k] = pos;
    }
    let mut by_arrival: Vec<usize> = (0..n).collect();
    by_arrival.sort_by(|&x, &y| jobs[x].arrival.approx_cmp(&jobs[y].arrival));

    let mut segments: Vec<Segment<T>> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut next = 0;
    let mut now = T::zero();
    loop {
        while next < n && jobs[by_arrival[next]].arrival.is_le(&now) {
            let k = by_arrival[next];
            heap.push(Reverse((priority[k], k)));
            next += 1;
        }
        let Some(&Reverse((_, k))) = heap.peek() else {
            if next == n {
                break;
            }
            now = jobs[by_arrival[next]].arrival.clone();
            continue;
        };
        let job = &jobs[k];
        if !residual[k].is_positive_s() || job.deadline.is_le(&now) {
            if !residual[k].is_positive_s() {
                residual[k] = T::zero();
            }
            heap.pop();
            continue;
        }
        let mut until = (now.clone() + residual[k].clone() / speed.clone()).min_s(job.deadline.clone());
        if next < n {
            until = until.min_s(jobs[by_arrival[next]].arrival.clone());
        }
        let done = speed.clone() * (until.clone() - now.clone());
        residual[k] = residual[k].clone() - done;
        match segments.last_mut() {
            Some(last) if last.job == Some(job.id) && last.end.is_eq(&now) => last.end = until.clone(),
            _ => segments.push(Segment::busy(job.id, now.clone(), until.clone(), speed.clone())),
        }
        now = until;
    }
    for r in &mut residual {
        if !r.is_positive_s() {
            *r = T::zero();
        }
    }
    EdfOutcome { segments, residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Rational;

    fn job(id: u64, a: i64, d: i64, w: i64) -> Job<Rational> {
        Job::new(id, Rational::from_int(a), Rational::from_int(d), Rational::from_int(w)).unwrap()
    }

    #[test]
    fn preempts_for_earlier_deadline() {
        let jobs = [job(1, 0, 10, 4), job(2, 1, 3, 1)];
        let out = naive_edf_s_schedule(&jobs, &Rational::one());
        let spans: Vec<_> = out
            .segments
            .iter()
            .map(|s| (s.job.unwrap(), s.start.clone(), s.end.clone()))
            .collect();
        let q = Rational::from_int;
        assert_eq!(spans, vec![(1, q(0), q(1)), (2, q(1), q(2)), (1, q(2), q(5))]);
        assert!(out.residual.iter().all(|r| *r == q(0)));
    }

    #[test]
    fn drops_at_deadline() {
        let jobs = [job(1, 0, 2, 5)];
        let out = naive_edf_s_schedule(&jobs, &Rational::one());
        assert_eq!(out.residual, vec![Rational::from_int(3)]);
        assert_eq!(out.segments.len(), 1);
    }
}
