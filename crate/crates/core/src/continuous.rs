//! Optimal continuous-speed schedules by recursive bipartition.
//!
//! Each node of the recursion takes a job subset on its own (possibly
//! compressed) timeline, runs one s-schedule at `s = avr(subset)` and splits
//! the subset into the jobs whose optimal speed is at least `s` and the rest.
//! The fast half keeps its timeline; the slow half continues on a timeline
//! with the fast half's windows cut out. A node whose s-schedule finishes
//! every job without idling inside the support runs at constant speed `s`
//! and becomes a leaf.
//!
//! # Bipartition rule
//!
//! Walk the s-schedule in time order. For every piece of job `k`, let the
//! window of the piece extend back to the latest moment that was idle or
//! spent on a job with a later deadline than `k`. Whenever a piece ends
//! exactly at its job's deadline (the job was cut off, or finished with no
//! slack), the window up to that deadline is dense: all work done in it
//! belongs to jobs contained in it, so no part of it can run below speed
//! `s` in the optimum. The fast jobs are exactly those whose windows lie
//! inside the union of these dense windows. The previous-greater-deadline
//! scan is a monotone stack, so the split costs `O(n)` given the
//! s-schedule.
//!
//! Ranks are sorted once at the top; children inherit them with a stable
//! linear filter.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{avr, merge_sorted_intervals, support_length, total_length, Job, JobId, Schedule, Segment};
use crate::num::Scalar;
use crate::sschedule::{compute_ranks, s_schedule, Ranks, SScheduleResult};
use crate::timeline::{Collapser, Timeline};

/// A job subset on its own timeline, with ranks local to the subset.
#[derive(Clone, Debug)]
pub struct Subproblem<T> {
    /// Jobs in local coordinates.
    pub jobs: Vec<Job<T>>,
    pub ranks: Ranks,
    /// Maps local times back to original times.
    pub timeline: Timeline<T>,
}

impl<T: Scalar> Subproblem<T> {
    /// Top-level subproblem. Sorts once; jobs without work are dropped.
    pub fn root(jobs: &[Job<T>]) -> Self {
        let jobs: Vec<Job<T>> = jobs.iter().filter(|j| j.workload.is_positive_s()).cloned().collect();
        let ranks = compute_ranks(&jobs);
        Subproblem {
            jobs,
            ranks,
            timeline: Timeline::identity(),
        }
    }

    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn ids(&self) -> Vec<JobId> {
        self.jobs.iter().map(|j| j.id).collect()
    }

    /// Jobs flagged in `members`, same timeline.
    pub fn restrict(&self, members: &[bool]) -> Result<Subproblem<T>> {
        let (ranks, kept) = propagate_ranks(&self.ranks, members)?;
        Ok(Subproblem {
            jobs: kept.iter().map(|&k| self.jobs[k].clone()).collect(),
            ranks,
            timeline: self.timeline.clone(),
        })
    }

    /// Jobs flagged in `members`, on the timeline with `regions` (local,
    /// sorted, disjoint) collapsed.
    pub fn restrict_excising(&self, members: &[bool], regions: &[(T, T)]) -> Result<Subproblem<T>> {
        let (ranks, kept) = propagate_ranks(&self.ranks, members)?;
        let mut jobs: Vec<Job<T>> = kept.iter().map(|&k| self.jobs[k].clone()).collect();
        // two monotone sweeps keep the remapping linear
        let mut sweep = Collapser::new(regions);
        for &k in &ranks.arrival_order {
            jobs[k].arrival = sweep.map(&jobs[k].arrival);
        }
        let mut sweep = Collapser::new(regions);
        for &k in &ranks.deadline_order {
            jobs[k].deadline = sweep.map(&jobs[k].deadline);
        }
        if let Some(job) = jobs.iter().find(|j| !j.arrival.is_lt(&j.deadline)) {
            return Err(Error::Internal(format!(
                "job {} lies inside the excised region but was not classified fast",
                job.id
            )));
        }
        Ok(Subproblem {
            jobs,
            ranks,
            timeline: self.timeline.excise(regions),
        })
    }
}

/// Child ranks for the jobs flagged in `members`, by a stable linear pass
/// over the parent orders. Returns the ranks and, for each child job, its
/// index in the parent.
pub fn propagate_ranks(parent: &Ranks, members: &[bool]) -> Result<(Ranks, Vec<usize>)> {
    if members.len() != parent.len() {
        return Err(Error::invalid(format!(
            "membership mask has {} entries for {} jobs",
            members.len(),
            parent.len()
        )));
    }
    let mut child_index = vec![usize::MAX; members.len()];
    let mut kept = Vec::new();
    for (k, &member) in members.iter().enumerate() {
        if member {
            child_index[k] = kept.len();
            kept.push(k);
        }
    }
    let filter =
        |order: &[usize]| -> Vec<usize> { order.iter().filter(|&&k| members[k]).map(|&k| child_index[k]).collect() };
    let ranks = Ranks {
        deadline_order: filter(&parent.deadline_order),
        arrival_order: filter(&parent.arrival_order),
    };
    Ok((ranks, kept))
}

/// Split of a subproblem around speed `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bipartition<T> {
    /// `high[k]`: job `k` needs speed at least `s` in the optimum.
    pub high: Vec<bool>,
    /// Union of the fast jobs' windows, local coordinates.
    pub high_region: Vec<(T, T)>,
}

impl<T: Scalar> Bipartition<T> {
    pub fn high_count(&self) -> usize {
        self.high.iter().filter(|&&h| h).count()
    }

    pub fn low_count(&self) -> usize {
        self.high.len() - self.high_count()
    }

    pub fn low_mask(&self) -> Vec<bool> {
        self.high.iter().map(|h| !h).collect()
    }
}

/// Splits `sub` into the jobs whose optimal speed is at least `s` and the
/// rest, from the s-schedule of `sub` at speed `s`.
pub fn bipartition<T: Scalar>(sub: &Subproblem<T>, s: &T, result: &SScheduleResult<T>) -> Result<Bipartition<T>> {
    let jobs = &sub.jobs;
    if result.job_count() != jobs.len() || !result.speed.is_eq(s) {
        return Err(Error::Internal("s-schedule does not belong to this subproblem".into()));
    }

    let mut dense: Vec<(T, T)> = Vec::new();
    // (deadline, window start) with strictly decreasing deadlines
    let mut stack: Vec<(T, T)> = Vec::new();
    let mut busy_until: Option<T> = None;
    for piece in result.time_ordered() {
        let deadline = &jobs[piece.job].deadline;
        if busy_until.as_ref().is_none_or(|end| piece.start.is_gt(end)) {
            stack.clear();
        }
        let mut window_start = piece.start.clone();
        while let Some((d, start)) = stack.last() {
            if d.is_gt(deadline) {
                break;
            }
            window_start = start.clone();
            stack.pop();
        }
        stack.push((deadline.clone(), window_start.clone()));
        if piece.end.is_eq(deadline) {
            let mut lo = window_start;
            // windows arrive ordered by end and are laminar
            while let Some((last_lo, last_hi)) = dense.last() {
                if last_hi.is_lt(&lo) {
                    break;
                }
                lo = lo.min_s(last_lo.clone());
                dense.pop();
            }
            dense.push((lo, piece.end.clone()));
        }
        busy_until = Some(piece.end.clone());
    }

    let mut high = vec![false; jobs.len()];
    let mut w = 0;
    for &k in &sub.ranks.arrival_order {
        let job = &jobs[k];
        while w < dense.len() && dense[w].1.is_le(&job.arrival) {
            w += 1;
        }
        if let Some((lo, hi)) = dense.get(w) {
            high[k] = lo.is_le(&job.arrival) && job.deadline.is_le(hi);
        }
    }

    let high_region = merge_sorted_intervals(
        sub.ranks
            .arrival_order
            .iter()
            .filter(|&&k| high[k])
            .map(|&k| (jobs[k].arrival.clone(), jobs[k].deadline.clone())),
    );
    Ok(Bipartition { high, high_region })
}

/// One recursion node, reported to the observer of [`solve_detailed`].
#[derive(Clone, Debug)]
pub struct NodeReport<T> {
    pub depth: usize,
    pub jobs: Vec<JobId>,
    /// The node's average rate, used as the s-schedule speed.
    pub speed: T,
    /// True when the node runs at constant speed and is not split.
    pub constant: bool,
    pub high: Vec<JobId>,
    pub low: Vec<JobId>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub sschedule_calls: usize,
    pub nodes: usize,
    pub leaves: usize,
    pub max_depth: usize,
    pub unions: usize,
    pub finds: usize,
}

#[derive(Clone, Debug)]
pub struct Solution<T> {
    pub schedule: Schedule<T>,
    pub speeds: BTreeMap<JobId, T>,
    pub stats: SolveStats,
}

/// The minimum-energy schedule for arbitrary speeds.
pub fn solve<T: Scalar>(jobs: &[Job<T>]) -> Result<Schedule<T>> {
    Ok(solve_detailed(jobs, |_| {})?.schedule)
}

pub fn solve_detailed<T: Scalar>(jobs: &[Job<T>], observe: impl FnMut(&NodeReport<T>)) -> Result<Solution<T>> {
    solve_subproblem(Subproblem::root(jobs), observe)
}

/// Solves a subproblem on its own timeline; the schedule comes back in
/// original coordinates.
pub fn solve_subproblem<T: Scalar>(sub: Subproblem<T>, mut observe: impl FnMut(&NodeReport<T>)) -> Result<Solution<T>> {
    let mut stats = SolveStats::default();
    let mut speeds = BTreeMap::new();
    let mut segments = Vec::new();
    let mut work = vec![(sub, 0usize)];

    while let Some((sub, depth)) = work.pop() {
        if sub.is_empty() {
            continue;
        }
        stats.nodes += 1;
        stats.max_depth = stats.max_depth.max(depth);
        if let [job] = sub.jobs.as_slice() {
            let speed = job.workload.clone() / job.window_len();
            emit_leaf(
                &sub,
                &[(job.id, job.arrival.clone(), job.deadline.clone())],
                &speed,
                &mut segments,
            );
            speeds.insert(job.id, speed);
            stats.leaves += 1;
            continue;
        }

        let s = avr(&sub.jobs)?;
        let result = s_schedule(&sub.jobs, &s, &sub.ranks)?;
        stats.sschedule_calls += 1;
        stats.unions += result.stats.unions;
        stats.finds += result.stats.finds;

        if is_constant_speed(&sub, &result) {
            observe(&NodeReport {
                depth,
                jobs: sub.ids(),
                speed: s.clone(),
                constant: true,
                high: sub.ids(),
                low: Vec::new(),
            });
            let pieces: Vec<(JobId, T, T)> = result
                .execution_intervals()
                .into_iter()
                .map(|seg| (seg.job.expect("busy"), seg.start, seg.end))
                .collect();
            emit_leaf(&sub, &pieces, &s, &mut segments);
            for job in &sub.jobs {
                speeds.insert(job.id, s.clone());
            }
            stats.leaves += 1;
            continue;
        }

        let split = bipartition(&sub, &s, &result)?;
        if split.high_count() == 0 || split.low_count() == 0 {
            return Err(Error::Internal(format!(
                "split at speed {s:?} left one side empty on a non-constant subproblem"
            )));
        }
        let pick = |want: bool| -> Vec<JobId> {
            sub.jobs
                .iter()
                .zip(&split.high)
                .filter(|(_, &h)| h == want)
                .map(|(j, _)| j.id)
                .collect()
        };
        observe(&NodeReport {
            depth,
            jobs: sub.ids(),
            speed: s,
            constant: false,
            high: pick(true),
            low: pick(false),
        });
        let low = sub.restrict_excising(&split.low_mask(), &split.high_region)?;
        let high = sub.restrict(&split.high)?;
        work.push((low, depth + 1));
        work.push((high, depth + 1));
    }

    Ok(Solution {
        schedule: Schedule::new(segments).normalized(),
        speeds,
        stats,
    })
}

/// The s-schedule at `avr` finished every job and never idled inside the
/// support.
fn is_constant_speed<T: Scalar>(sub: &Subproblem<T>, result: &SScheduleResult<T>) -> bool {
    if !result.all_finished() {
        return false;
    }
    let busy = total_length(
        &result
            .pieces
            .iter()
            .map(|p| (p.start.clone(), p.end.clone()))
            .collect::<Vec<_>>(),
    );
    busy.is_eq(&support_length(&sub.jobs))
}

fn emit_leaf<T: Scalar>(sub: &Subproblem<T>, pieces: &[(JobId, T, T)], speed: &T, out: &mut Vec<Segment<T>>) {
    for (id, start, end) in pieces {
        for (lo, hi) in sub.timeline.to_original(start, end) {
            out.push(Segment::busy(*id, lo, hi, speed.clone()));
        }
    }
}
