//! Linear-time s-schedules.
//!
//! An s-schedule is the EDF schedule at one constant speed `s` that abandons
//! a job once its deadline passes. Jobs are placed one at a time in deadline
//! order: each job takes the earliest idle time at or after its arrival,
//! found through an [`IntervalUnionFind`] over the slots between consecutive
//! arrival times.
//!
//! The slot grid `t_1 <= ... <= t_m` holds every arrival plus two sentinels,
//! `H` (latest deadline) and `H + 1`. Slot `i` is `[t_i, t_{i+1})` and its
//! frontier `e_i` separates the occupied prefix `[t_i, e_i)` from the idle
//! suffix `[e_i, t_{i+1})`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Job, JobId, Segment};
use crate::num::Scalar;
use crate::union_find::{IntervalUnionFind, UnionFindStats};

/// Deadline order and arrival order of a job slice, as indices into it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranks {
    /// Job indices by non-decreasing deadline.
    pub deadline_order: Vec<usize>,
    /// Job indices by non-decreasing arrival.
    pub arrival_order: Vec<usize>,
}

impl Ranks {
    pub fn len(&self) -> usize {
        self.deadline_order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deadline_order.is_empty()
    }

    /// 1-based rank of each job's arrival, indexed by job.
    pub fn arrival_ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0; self.arrival_order.len()];
        for (pos, &k) in self.arrival_order.iter().enumerate() {
            ranks[k] = pos + 1;
        }
        ranks
    }

    /// Checks that both orders are permutations and agree with the job times.
    pub fn validate<T: Scalar>(&self, jobs: &[Job<T>]) -> Result<()> {
        self.check_permutations(jobs.len())?;
        let sorted = |order: &[usize], key: fn(&Job<T>) -> &T| {
            order.windows(2).all(|w| key(&jobs[w[0]]).is_le(key(&jobs[w[1]])))
        };
        if !sorted(&self.deadline_order, |j| &j.deadline) {
            return Err(Error::invalid("deadline order is not sorted"));
        }
        if !sorted(&self.arrival_order, |j| &j.arrival) {
            return Err(Error::invalid("arrival order is not sorted"));
        }
        Ok(())
    }

    fn check_permutations(&self, n: usize) -> Result<()> {
        for (order, what) in [(&self.deadline_order, "deadline"), (&self.arrival_order, "arrival")] {
            if order.len() != n {
                return Err(Error::invalid(format!("{what} order has the wrong length")));
            }
            let mut seen = vec![false; n];
            for &k in order {
                if k >= n || std::mem::replace(&mut seen[k], true) {
                    return Err(Error::invalid(format!("{what} order is not a permutation")));
                }
            }
        }
        Ok(())
    }
}

/// Sorts once by comparison: deadlines and arrivals, ties broken by job id.
pub fn compute_ranks<T: Scalar>(jobs: &[Job<T>]) -> Ranks {
    let by = |key: fn(&Job<T>) -> &T| {
        let mut order: Vec<usize> = (0..jobs.len()).collect();
        order.sort_by(|&x, &y| {
            key(&jobs[x])
                .approx_cmp(key(&jobs[y]))
                .then(jobs[x].id.cmp(&jobs[y].id))
        });
        order
    };
    Ranks {
        deadline_order: by(|j| &j.deadline),
        arrival_order: by(|j| &j.arrival),
    }
}

/// The sorted time points `t_1..t_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid<T> {
    times: Vec<T>,
    arrival_slot: Vec<usize>,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(jobs: &[Job<T>], ranks: &Ranks) -> Self {
        let horizon = jobs
            .iter()
            .map(|j| j.deadline.clone())
            .reduce(|a, b| a.max_s(b))
            .unwrap_or_else(T::zero);
        let mut times: Vec<T> = ranks.arrival_order.iter().map(|&k| jobs[k].arrival.clone()).collect();
        times.push(horizon.clone());
        times.push(horizon + T::one());
        TimeGrid {
            times,
            arrival_slot: ranks.arrival_ranks(),
        }
    }

    /// Number of time points `m`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `t_i`, 1-based.
    pub fn t(&self, i: usize) -> &T {
        &self.times[i - 1]
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    /// Index `i` with `t_i` equal to job `k`'s arrival.
    pub fn arrival_slot(&self, k: usize) -> usize {
        self.arrival_slot[k]
    }
}

/// How the search for the next idle slot is driven.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Driver {
    /// Every search is a find from the job's arrival slot.
    Basic,
    /// One find per job; later searches reuse the name returned by the
    /// union that just happened, and a job stops as soon as it reaches its
    /// deadline.
    #[default]
    Refined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    /// The search for job `job` settled on slot `p`.
    Locate { job: JobId, p: usize },
    /// Slot `p` filled up and its set merged into the set named `merged`.
    Union { p: usize, merged: usize },
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SScheduleOptions {
    pub driver: Driver,
    pub trace: bool,
}

/// A stretch of one slot given to one job.
#[derive(Clone, Debug, PartialEq)]
pub struct Piece<T> {
    /// Index of the job in the input slice.
    pub job: usize,
    pub start: T,
    pub end: T,
    /// Slot `p` the piece was cut from.
    pub slot: usize,
}

#[derive(Clone, Debug)]
pub struct SScheduleResult<T> {
    pub speed: T,
    /// Pieces in placement order: job by job in deadline order, each job's
    /// pieces in time order.
    pub pieces: Vec<Piece<T>>,
    /// Unfinished workload per job index; zero for completed jobs.
    pub residual: Vec<T>,
    /// Final frontier `e_1..e_{m-1}`.
    pub frontier: Vec<T>,
    pub grid: TimeGrid<T>,
    pub stats: UnionFindStats,
    pub trace: Vec<TraceEvent>,
    ids: Vec<JobId>,
}

impl<T: Scalar> SScheduleResult<T> {
    pub fn job_count(&self) -> usize {
        self.ids.len()
    }

    /// Grid size `m`.
    pub fn m(&self) -> usize {
        self.grid.len()
    }

    pub fn is_finished(&self, k: usize) -> bool {
        !self.residual[k].is_positive_s()
    }

    pub fn all_finished(&self) -> bool {
        (0..self.ids.len()).all(|k| self.is_finished(k))
    }

    pub fn unfinished(&self) -> Vec<JobId> {
        (0..self.ids.len())
            .filter(|&k| !self.is_finished(k))
            .map(|k| self.ids[k])
            .collect()
    }

    /// Pieces sorted by start time, by bucketing on slot index.
    pub fn time_ordered(&self) -> Vec<&Piece<T>> {
        let slots = self.grid.len();
        let mut counts = vec![0usize; slots + 1];
        for piece in &self.pieces {
            counts[piece.slot + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut out: Vec<Option<&Piece<T>>> = vec![None; self.pieces.len()];
        for piece in &self.pieces {
            out[counts[piece.slot]] = Some(piece);
            counts[piece.slot] += 1;
        }
        out.into_iter().flatten().collect()
    }

    /// Time-ordered pieces as segments at the schedule speed.
    pub fn segments(&self) -> Vec<Segment<T>> {
        self.time_ordered()
            .into_iter()
            .map(|p| Segment::busy(self.ids[p.job], p.start.clone(), p.end.clone(), self.speed.clone()))
            .collect()
    }

    /// Maximal execution intervals: touching pieces of the same job merged.
    pub fn execution_intervals(&self) -> Vec<Segment<T>> {
        let mut out: Vec<Segment<T>> = Vec::new();
        for seg in self.segments() {
            match out.last_mut() {
                Some(last) if last.job == seg.job && last.end.is_eq(&seg.start) => last.end = seg.end,
                _ => out.push(seg),
            }
        }
        out
    }

    /// Idle gaps between the first arrival and the latest deadline.
    pub fn idle_gaps(&self) -> impl Iterator<Item = Segment<T>> + '_ {
        let horizon = self.grid.t(self.grid.len() - 1).clone();
        let first = self.grid.t(1).clone();
        let mut cursor = Some(first);
        let mut pieces = self.time_ordered().into_iter();
        std::iter::from_fn(move || loop {
            let at = cursor.clone()?;
            match pieces.next() {
                Some(piece) => {
                    cursor = Some(at.clone().max_s(piece.end.clone()));
                    if piece.start.is_gt(&at) {
                        return Some(Segment::idle(at, piece.start.clone()));
                    }
                }
                None => {
                    cursor = None;
                    return horizon.is_gt(&at).then(|| Segment::idle(at, horizon.clone()));
                }
            }
        })
    }
}

/// Algorithm state for one s-schedule, exposed so callers can step it job
/// by job and inspect the frontier.
pub struct SScheduleEngine<'a, T> {
    jobs: &'a [Job<T>],
    speed: T,
    grid: TimeGrid<T>,
    // slots[i] = (e_i, t_{i+1}) for 1 <= i < m; index 0 unused. Keeping the
    // two together saves a cache miss per visit.
    slots: Vec<Slot<T>>,
    uf: IntervalUnionFind,
    pieces: Vec<Piece<T>>,
    residual: Vec<T>,
    options: SScheduleOptions,
    trace: Vec<TraceEvent>,
}

#[derive(Clone, Debug)]
struct Slot<T> {
    e: T,
    end: T,
}

impl<'a, T: Scalar> SScheduleEngine<'a, T> {
    /// Checks that the orders are permutations and that arrivals are sorted;
    /// deadline order is checked as [`run`](Self::run) consumes it.
    pub fn new(jobs: &'a [Job<T>], speed: T, ranks: &Ranks, options: SScheduleOptions) -> Result<Self> {
        if !speed.is_positive_s() {
            return Err(Error::invalid("s-schedule speed must be positive"));
        }
        ranks.check_permutations(jobs.len())?;
        let grid = TimeGrid::new(jobs, ranks);
        if !grid.times().windows(2).all(|w| w[0].is_le(&w[1])) {
            return Err(Error::invalid("arrival order is not sorted"));
        }
        let m = grid.len();
        let mut slots = Vec::with_capacity(m);
        slots.push(Slot {
            e: T::zero(),
            end: T::zero(),
        });
        slots.extend(grid.times().windows(2).map(|w| Slot {
            e: w[0].clone(),
            end: w[1].clone(),
        }));
        Ok(SScheduleEngine {
            jobs,
            speed,
            uf: IntervalUnionFind::new(m - 1)?,
            grid,
            slots,
            pieces: Vec::with_capacity(2 * jobs.len()),
            residual: jobs.iter().map(|j| j.workload.clone()).collect(),
            options,
            trace: Vec::new(),
        })
    }

    /// Current `e_1..e_{m-1}`.
    pub fn frontier(&self) -> Vec<T> {
        self.slots[1..].iter().map(|s| s.e.clone()).collect()
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn stats(&self) -> UnionFindStats {
        self.uf.stats()
    }

    pub fn ranges(&self) -> Vec<(usize, usize)> {
        self.uf.ranges()
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn residual(&self, k: usize) -> &T {
        &self.residual[k]
    }

    /// Places job `k` as early as possible. Jobs must be fed in deadline order.
    pub fn schedule_job(&mut self, k: usize) -> Result<()> {
        let job = &self.jobs[k];
        let deadline = job.deadline.clone();
        let from = self.grid.arrival_slot(k);
        let mut remaining = job.workload.clone();
        if !remaining.is_positive_s() {
            return Ok(());
        }
        let mut p = self.locate(k, from)?;
        loop {
            let Slot { e, end: slot_end } = &self.slots[p];
            if e.is_ge(&deadline) {
                break;
            }
            let slot_end = slot_end.clone();
            if e.is_ge(&slot_end) {
                // empty slot between equal arrival times
                p = self.advance(p, k, from)?;
                continue;
            }
            let reaches_slot_end = slot_end.is_le(&deadline);
            let until = if reaches_slot_end {
                slot_end.clone()
            } else {
                deadline.clone()
            };
            let start = self.slots[p].e.clone();
            let capacity = self.speed.clone() * (until.clone() - start.clone());
            if remaining.is_gt(&capacity) {
                remaining = remaining - capacity;
                self.place(k, start, until.clone(), p);
                self.slots[p].e = until;
                if reaches_slot_end {
                    p = self.advance(p, k, from)?;
                } else if self.options.driver == Driver::Refined {
                    break;
                } else {
                    p = self.locate(k, from)?;
                }
            } else {
                let mut end = start.clone() + remaining.clone() / self.speed.clone();
                let fills_slot = end.is_ge(&slot_end);
                if fills_slot {
                    end = slot_end;
                }
                remaining = T::zero();
                self.place(k, start, end.clone(), p);
                self.slots[p].e = end;
                if fills_slot {
                    let merged = self.uf.union_with_next(p)?;
                    self.record(TraceEvent::Union { p, merged });
                }
                break;
            }
        }
        self.residual[k] = remaining;
        Ok(())
    }

    /// Schedules every job in deadline order.
    pub fn run(mut self, ranks: &Ranks) -> Result<SScheduleResult<T>> {
        let mut previous: Option<usize> = None;
        for &k in &ranks.deadline_order {
            if previous.is_some_and(|j| self.jobs[k].deadline.is_lt(&self.jobs[j].deadline)) {
                return Err(Error::invalid("deadline order is not sorted"));
            }
            previous = Some(k);
            self.schedule_job(k)?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> SScheduleResult<T> {
        let stats = self.uf.stats();
        let frontier = self.slots.into_iter().skip(1).map(|s| s.e).collect();
        SScheduleResult {
            speed: self.speed,
            pieces: self.pieces,
            residual: self.residual,
            frontier,
            grid: self.grid,
            stats,
            trace: self.trace,
            ids: self.jobs.iter().map(|j| j.id).collect(),
        }
    }

    fn locate(&mut self, k: usize, from: usize) -> Result<usize> {
        let p = self.uf.find(from)?;
        self.record(TraceEvent::Locate {
            job: self.jobs[k].id,
            p,
        });
        Ok(p)
    }

    /// Closes the full slot `p` and moves to the next candidate slot.
    fn advance(&mut self, p: usize, k: usize, from: usize) -> Result<usize> {
        self.slots[p].e = self.slots[p].end.clone();
        let merged = self.uf.union_with_next(p)?;
        self.record(TraceEvent::Union { p, merged });
        match self.options.driver {
            Driver::Refined => {
                self.record(TraceEvent::Locate {
                    job: self.jobs[k].id,
                    p: merged,
                });
                Ok(merged)
            }
            Driver::Basic => self.locate(k, from),
        }
    }

    fn place(&mut self, job: usize, start: T, end: T, slot: usize) {
        // in floating point a leftover can be shorter than the tolerance
        if start.is_lt(&end) {
            self.pieces.push(Piece { job, start, end, slot });
        }
    }

    fn record(&mut self, event: TraceEvent) {
        if self.options.trace {
            self.trace.push(event);
        }
    }
}

/// The s-schedule of `jobs` at speed `speed`, given precomputed ranks.
pub fn s_schedule<T: Scalar>(jobs: &[Job<T>], speed: &T, ranks: &Ranks) -> Result<SScheduleResult<T>> {
    s_schedule_with(jobs, speed, ranks, SScheduleOptions::default())
}

pub fn s_schedule_with<T: Scalar>(
    jobs: &[Job<T>],
    speed: &T,
    ranks: &Ranks,
    options: SScheduleOptions,
) -> Result<SScheduleResult<T>> {
    SScheduleEngine::new(jobs, speed.clone(), ranks, options)?.run(ranks)
}

/// Orders segments by start, then job id. Used to compare schedules.
pub fn segment_order<T: Scalar>(a: &Segment<T>, b: &Segment<T>) -> Ordering {
    a.start.approx_cmp(&b.start).then(a.job.cmp(&b.job))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Rational;

    fn q(text: &str) -> Rational {
        Rational::parse_number(text).unwrap()
    }

    fn job(id: JobId, a: &str, b: &str, w: &str) -> Job<Rational> {
        Job::new(id, q(a), q(b), q(w)).unwrap()
    }

    #[test]
    fn ranks_examples() {
        let arrivals = [
            job(1, "0.3", "1", "1"),
            job(2, "0.1", "1", "1"),
            job(3, "0.2", "1", "1"),
        ];
        assert_eq!(compute_ranks(&arrivals).arrival_ranks(), vec![3, 1, 2]);

        let ties = [job(1, "0.1", "1", "1"), job(2, "0.1", "1", "1")];
        assert_eq!(compute_ranks(&ties).arrival_ranks(), vec![1, 2]);

        let deadlines = [job(1, "0", "0.9", "1"), job(2, "0", "0.5", "1")];
        assert_eq!(compute_ranks(&deadlines).deadline_order, vec![1, 0]);
    }

    #[test]
    fn ranks_validation_catches_bad_orders() {
        let jobs = [job(1, "0.3", "1", "1"), job(2, "0.1", "0.5", "1")];
        let mut ranks = compute_ranks(&jobs);
        assert!(ranks.validate(&jobs).is_ok());
        ranks.deadline_order.swap(0, 1);
        assert!(ranks.validate(&jobs).is_err());
        ranks.deadline_order = vec![0, 0];
        assert!(ranks.validate(&jobs).is_err());
    }

    #[test]
    fn single_job_runs_from_arrival() {
        let jobs = [job(1, "0", "1", "0.5")];
        let ranks = compute_ranks(&jobs);
        let result = s_schedule(&jobs, &q("1"), &ranks).unwrap();
        assert_eq!(result.segments(), vec![Segment::busy(1, q("0"), q("0.5"), q("1"))]);
        assert!(result.all_finished());
        let idle: Vec<_> = result.idle_gaps().collect();
        assert_eq!(idle, vec![Segment::idle(q("0.5"), q("1"))]);
    }

    #[test]
    fn rejects_nonpositive_speed() {
        let jobs = [job(1, "0", "1", "0.5")];
        let ranks = compute_ranks(&jobs);
        assert!(s_schedule(&jobs, &q("0"), &ranks).is_err());
        assert!(s_schedule(&jobs, &q("-1"), &ranks).is_err());
    }

    #[test]
    fn equal_arrivals_and_zero_work() {
        let jobs = [
            job(1, "0", "2", "1"),
            job(2, "0", "1", "1"),
            job(3, "0", "3", "0"),
            job(4, "1", "3", "2"),
        ];
        let ranks = compute_ranks(&jobs);
        let result = s_schedule(&jobs, &q("1"), &ranks).unwrap();
        let got: Vec<(JobId, Rational, Rational)> = result
            .execution_intervals()
            .into_iter()
            .map(|s| (s.job.unwrap(), s.start, s.end))
            .collect();
        assert_eq!(got, vec![(2, q("0"), q("1")), (1, q("1"), q("2")), (4, q("2"), q("3"))]);
        // job 4 only gets [2,3): one unit short
        assert_eq!(result.residual[3], q("1"));
        assert_eq!(result.unfinished(), vec![4]);
    }

    #[test]
    fn frontier_stays_inside_slots() {
        let jobs = [job(1, "0", "4", "1"), job(2, "1", "2", "3"), job(3, "3", "5", "1")];
        let ranks = compute_ranks(&jobs);
        let result = s_schedule(&jobs, &q("2"), &ranks).unwrap();
        for (i, e) in result.frontier.iter().enumerate() {
            assert!(result.grid.t(i + 1) <= e && e <= result.grid.t(i + 2));
        }
    }
}
