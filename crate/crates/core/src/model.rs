//! Jobs, schedules, energy, and the interval quantities shared by the solvers.

use std::collections::{BTreeMap, HashSet};
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::num::Scalar;

pub type JobId = u64;

/// A job that must receive `workload` units of work inside `[arrival, deadline]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Job<T> {
    pub id: JobId,
    pub arrival: T,
    pub deadline: T,
    pub workload: T,
}

impl<T: Scalar> Job<T> {
    pub fn new(id: JobId, arrival: T, deadline: T, workload: T) -> Result<Self> {
        let job = Job {
            id,
            arrival,
            deadline,
            workload,
        };
        job.validate()?;
        Ok(job)
    }

    pub fn validate(&self) -> Result<()> {
        let reject = |reason: &str| {
            Err(Error::InvalidJob {
                id: self.id,
                reason: reason.to_string(),
            })
        };
        if self.arrival.is_lt(&T::zero()) {
            return reject("arrival must be nonnegative");
        }
        if !self.arrival.is_lt(&self.deadline) {
            return reject("arrival must precede deadline");
        }
        if self.workload.is_lt(&T::zero()) {
            return reject("workload must be nonnegative");
        }
        Ok(())
    }

    pub fn window_len(&self) -> T {
        self.deadline.clone() - self.arrival.clone()
    }

    /// Whether the job's window lies inside `[start, end]`.
    pub fn within(&self, start: &T, end: &T) -> bool {
        self.arrival.is_ge(start) && self.deadline.is_le(end)
    }
}

/// A validated job instance. Dereferences to the job slice.
#[derive(Clone, Debug, PartialEq)]
pub struct JobSet<T> {
    jobs: Vec<Job<T>>,
    horizon: Option<(T, T)>,
}

impl<T: Scalar> JobSet<T> {
    pub fn new(jobs: Vec<Job<T>>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(jobs.len());
        for job in &jobs {
            job.validate()?;
            if !seen.insert(job.id) {
                return Err(Error::InvalidJob {
                    id: job.id,
                    reason: "duplicate job id".into(),
                });
            }
        }
        let horizon = jobs.iter().fold(None, |acc: Option<(T, T)>, job| {
            Some(match acc {
                None => (job.arrival.clone(), job.deadline.clone()),
                Some((lo, hi)) => (lo.min_s(job.arrival.clone()), hi.max_s(job.deadline.clone())),
            })
        });
        Ok(JobSet { jobs, horizon })
    }

    pub fn empty() -> Self {
        JobSet {
            jobs: Vec::new(),
            horizon: None,
        }
    }

    /// Earliest arrival and latest deadline, `None` when empty.
    pub fn horizon(&self) -> Option<&(T, T)> {
        self.horizon.as_ref()
    }

    pub fn jobs(&self) -> &[Job<T>] {
        &self.jobs
    }

    pub fn into_jobs(self) -> Vec<Job<T>> {
        self.jobs
    }

    pub fn get(&self, id: JobId) -> Option<&Job<T>> {
        self.jobs.iter().find(|j| j.id == id)
    }
}

impl<T> Deref for JobSet<T> {
    type Target = [Job<T>];

    fn deref(&self) -> &[Job<T>] {
        &self.jobs
    }
}

/// A maximal stretch of constant speed devoted to one job, or idle time
/// when `job` is `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment<T> {
    pub start: T,
    pub end: T,
    pub speed: T,
    pub job: Option<JobId>,
}

impl<T: Scalar> Segment<T> {
    pub fn busy(job: JobId, start: T, end: T, speed: T) -> Self {
        Segment {
            start,
            end,
            speed,
            job: Some(job),
        }
    }

    pub fn idle(start: T, end: T) -> Self {
        Segment {
            start,
            end,
            speed: T::zero(),
            job: None,
        }
    }

    pub fn len(&self) -> T {
        self.end.clone() - self.start.clone()
    }

    pub fn work(&self) -> T {
        self.speed.clone() * self.len()
    }
}

/// Piecewise-constant speed function with its job assignment.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Schedule<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> Schedule<T> {
    /// Builds a schedule with segments sorted by start time.
    pub fn new(mut segments: Vec<Segment<T>>) -> Self {
        segments.sort_by(|a, b| a.start.approx_cmp(&b.start));
        Schedule { segments }
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn into_segments(self) -> Vec<Segment<T>> {
        self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Merges touching segments that run the same job at the same speed and
    /// drops idle segments.
    pub fn normalized(&self) -> Self {
        let mut out: Vec<Segment<T>> = Vec::with_capacity(self.segments.len());
        for seg in self.segments.iter().filter(|s| s.job.is_some()) {
            if let Some(last) = out.last_mut() {
                if last.job == seg.job && last.end.is_eq(&seg.start) && last.speed.is_eq(&seg.speed) {
                    last.end = seg.end.clone();
                    continue;
                }
            }
            out.push(seg.clone());
        }
        Schedule { segments: out }
    }

    /// The speed each job runs at. Jobs that run at several speeds report
    /// their fastest.
    pub fn job_speeds(&self) -> BTreeMap<JobId, T> {
        let mut speeds: BTreeMap<JobId, T> = BTreeMap::new();
        for seg in &self.segments {
            if let Some(id) = seg.job {
                speeds
                    .entry(id)
                    .and_modify(|s| *s = s.clone().max_s(seg.speed.clone()))
                    .or_insert_with(|| seg.speed.clone());
            }
        }
        speeds
    }

    /// Distinct speeds used by each job, in increasing order.
    pub fn job_speed_sets(&self) -> BTreeMap<JobId, Vec<T>> {
        let mut sets: BTreeMap<JobId, Vec<T>> = BTreeMap::new();
        for seg in &self.segments {
            if let Some(id) = seg.job {
                let set = sets.entry(id).or_default();
                if !set.iter().any(|s| s.is_eq(&seg.speed)) {
                    set.push(seg.speed.clone());
                }
            }
        }
        for set in sets.values_mut() {
            set.sort_by(|a, b| a.approx_cmp(b));
        }
        sets
    }

    pub fn delivered(&self) -> BTreeMap<JobId, T> {
        let mut work: BTreeMap<JobId, T> = BTreeMap::new();
        for seg in &self.segments {
            if let Some(id) = seg.job {
                let w = seg.work();
                work.entry(id)
                    .and_modify(|acc| *acc = acc.clone() + w.clone())
                    .or_insert(w);
            }
        }
        work
    }
}

/// Exponent of the power function `P(s) = s^alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams {
    alpha: f64,
}

impl EnergyParams {
    pub const DEFAULT_ALPHA: f64 = 3.0;

    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 2.0 {
            return Err(Error::invalid(format!(
                "alpha must be a finite number >= 2, got {alpha}"
            )));
        }
        Ok(EnergyParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn power<T: Scalar>(&self, speed: &T) -> T {
        speed.pow_alpha(self.alpha)
    }
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            alpha: Self::DEFAULT_ALPHA,
        }
    }
}

/// Total workload of the jobs contained in `[start, end]`, divided by its length.
pub fn intensity<T: Scalar>(jobs: &[Job<T>], start: &T, end: &T) -> Result<T> {
    if !start.is_lt(end) {
        return Err(Error::invalid("intensity needs an interval of positive length"));
    }
    let work = jobs
        .iter()
        .filter(|j| j.within(start, end))
        .fold(T::zero(), |acc, j| acc + j.workload.clone());
    Ok(work / (end.clone() - start.clone()))
}

/// Union of all job windows as maximal disjoint intervals, ordered by start.
pub fn support<T: Scalar>(jobs: &[Job<T>]) -> Vec<(T, T)> {
    let mut windows: Vec<(T, T)> = jobs.iter().map(|j| (j.arrival.clone(), j.deadline.clone())).collect();
    windows.sort_by(|a, b| a.0.approx_cmp(&b.0));
    merge_sorted_intervals(windows)
}

/// Merges overlapping or touching intervals that are already sorted by start.
pub(crate) fn merge_sorted_intervals<T: Scalar>(sorted: impl IntoIterator<Item = (T, T)>) -> Vec<(T, T)> {
    let mut out: Vec<(T, T)> = Vec::new();
    for (lo, hi) in sorted {
        match out.last_mut() {
            Some(last) if lo.is_le(&last.1) => {
                if hi.is_gt(&last.1) {
                    last.1 = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

pub fn support_length<T: Scalar>(jobs: &[Job<T>]) -> T {
    total_length(&support(jobs))
}

pub(crate) fn total_length<T: Scalar>(intervals: &[(T, T)]) -> T {
    intervals
        .iter()
        .fold(T::zero(), |acc, (lo, hi)| acc + (hi.clone() - lo.clone()))
}

pub fn total_work<T: Scalar>(jobs: &[Job<T>]) -> T {
    jobs.iter().fold(T::zero(), |acc, j| acc + j.workload.clone())
}

/// Average rate: total workload over the length of the support.
pub fn avr<T: Scalar>(jobs: &[Job<T>]) -> Result<T> {
    if jobs.is_empty() {
        return Err(Error::invalid("average rate of an empty job set"));
    }
    Ok(total_work(jobs) / support_length(jobs))
}

/// `sum(speed^alpha * length)` over all segments.
pub fn energy<T: Scalar>(schedule: &Schedule<T>, params: &EnergyParams) -> T {
    schedule
        .segments()
        .iter()
        .filter(|s| s.job.is_some())
        .fold(T::zero(), |acc, s| acc + params.power(&s.speed) * s.len())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation<T> {
    DegenerateSegment {
        index: usize,
    },
    NegativeSpeed {
        index: usize,
    },
    /// Zero speed on a job segment, or positive speed while idle.
    IdleSpeedMismatch {
        index: usize,
    },
    UnknownJob {
        index: usize,
        job: JobId,
    },
    Overlap {
        first: usize,
        second: usize,
    },
    OutsideWindow {
        index: usize,
        job: JobId,
    },
    WorkMismatch {
        job: JobId,
        delivered: T,
        required: T,
    },
}

/// Outcome of [`verify_feasible`]; empty means feasible.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T> Verdict<T> {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_feasible<T: Scalar>(schedule: &Schedule<T>, jobs: &[Job<T>]) -> Verdict<T> {
    let mut violations = Vec::new();
    let by_id: BTreeMap<JobId, &Job<T>> = jobs.iter().map(|j| (j.id, j)).collect();
    let segments = schedule.segments();

    for (index, seg) in segments.iter().enumerate() {
        if !seg.start.is_lt(&seg.end) {
            violations.push(Violation::DegenerateSegment { index });
        }
        if seg.speed.is_lt(&T::zero()) {
            violations.push(Violation::NegativeSpeed { index });
        }
        let zero_speed = seg.speed.is_eq(&T::zero());
        if zero_speed != seg.job.is_none() {
            violations.push(Violation::IdleSpeedMismatch { index });
        }
        if let Some(id) = seg.job {
            match by_id.get(&id) {
                None => violations.push(Violation::UnknownJob { index, job: id }),
                Some(job) => {
                    if !(seg.start.is_ge(&job.arrival) && seg.end.is_le(&job.deadline)) {
                        violations.push(Violation::OutsideWindow { index, job: id });
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..segments.len()).collect();
    order.sort_by(|&a, &b| segments[a].start.approx_cmp(&segments[b].start));
    for pair in order.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if segments[b].start.is_lt(&segments[a].end) {
            violations.push(Violation::Overlap { first: a, second: b });
        }
    }

    let delivered = schedule.delivered();
    for job in jobs {
        let got = delivered.get(&job.id).cloned().unwrap_or_else(T::zero);
        if !got.is_eq(&job.workload) {
            violations.push(Violation::WorkMismatch {
                job: job.id,
                delivered: got,
                required: job.workload.clone(),
            });
        }
    }
    Verdict { violations }
}
