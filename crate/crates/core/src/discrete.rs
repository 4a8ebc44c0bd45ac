//! Optimal schedules when the processor offers only a ladder of speeds.
//!
//! In the continuous optimum every job runs at one speed. With a ladder
//! `s_1 < ... < s_d`, the optimum runs each job at the two ladder levels
//! around that speed, in the proportions that preserve its work and time.
//! Jobs slower than `s_1` run at `s_1` and leave the rest of their time idle.
//!
//! So the job set only needs to be sorted into brackets `[s_i, s_{i+1})`.
//! That is a binary search over the ladder. Each round bipartitions every
//! current group around a ladder speed, using the same s-schedule split as the
//! continuous solver. Fast groups keep their timeline. Slow groups continue
//! with the fast windows cut out.

use std::fmt;

use crate::continuous::{bipartition, solve_detailed, solve_subproblem, Subproblem};
use crate::error::{Error, Result};
use crate::model::{Job, JobId, Schedule, Segment};
use crate::num::Scalar;
use crate::sschedule::s_schedule;

/// Available speeds, strictly increasing and positive.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedLadder<T> {
    levels: Vec<T>,
}

impl<T: Scalar> SpeedLadder<T> {
    pub fn new(levels: Vec<T>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::invalid("speed ladder needs at least one level"));
        }
        if !levels[0].is_positive_s() {
            return Err(Error::invalid("speed levels must be positive"));
        }
        if let Some(w) = levels.windows(2).find(|w| !w[0].is_lt(&w[1])) {
            return Err(Error::invalid(format!(
                "speed levels must be strictly increasing ({} is followed by {})",
                w[0].render(),
                w[1].render()
            )));
        }
        Ok(SpeedLadder { levels })
    }

    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn min(&self) -> &T {
        &self.levels[0]
    }

    pub fn max(&self) -> &T {
        &self.levels[self.levels.len() - 1]
    }

    /// Bracket of a speed, or `None` when it exceeds the top level.
    pub fn bracket_of(&self, speed: &T) -> Option<Bracket> {
        if speed.is_gt(self.max()) {
            return None;
        }
        let above = self.levels.partition_point(|s| s.is_le(speed));
        Some(match above {
            0 => Bracket::Below,
            i => Bracket::Level(i - 1),
        })
    }

    pub fn contains(&self, speed: &T) -> bool {
        self.levels.iter().any(|s| s.is_eq(speed))
    }

    // brackets are numbered 0 = below, i = level i - 1
    fn bracket_at(index: usize) -> Bracket {
        match index {
            0 => Bracket::Below,
            i => Bracket::Level(i - 1),
        }
    }
}

/// Where a job's continuous-optimal speed falls on the ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bracket {
    /// Slower than the lowest level.
    Below,
    /// In `[levels[i], levels[i + 1])`; exactly `levels[i]` for the top level.
    Level(usize),
}

impl fmt::Display for Bracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bracket::Below => f.write_str("below"),
            Bracket::Level(i) => write!(f, "level {i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpeedBracket {
    pub job: JobId,
    pub bracket: Bracket,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DiscreteStats {
    /// Depth of the binary search over the ladder.
    pub rounds: usize,
    pub bipartitions: usize,
    /// Includes the feasibility check at the top speed.
    pub sschedule_calls: usize,
}

/// Brackets plus the job groups they induce, each on its own timeline.
#[derive(Clone, Debug)]
pub struct Bracketing<T> {
    /// One entry per input job, in input order.
    pub brackets: Vec<SpeedBracket>,
    pub groups: Vec<(Bracket, Subproblem<T>)>,
    pub stats: DiscreteStats,
}

/// Each job's ladder bracket. Ties go to the upper bracket.
pub fn bracket_jobs<T: Scalar>(jobs: &[Job<T>], ladder: &SpeedLadder<T>) -> Result<Vec<SpeedBracket>> {
    Ok(bracket_jobs_detailed(jobs, ladder)?.brackets)
}

pub fn bracket_jobs_detailed<T: Scalar>(jobs: &[Job<T>], ladder: &SpeedLadder<T>) -> Result<Bracketing<T>> {
    let mut stats = DiscreteStats::default();
    let root = Subproblem::root(jobs);
    if !root.is_empty() {
        let check = s_schedule(&root.jobs, ladder.max(), &root.ranks)?;
        stats.sschedule_calls += 1;
        if !check.all_finished() {
            return Err(infeasible(jobs, ladder));
        }
    }

    let mut groups = Vec::new();
    // (subproblem, lowest bracket, highest bracket, depth)
    let mut work = vec![(root, 0usize, ladder.len(), 0usize)];
    while let Some((sub, lo, hi, depth)) = work.pop() {
        if sub.is_empty() {
            continue;
        }
        if lo == hi {
            groups.push((SpeedLadder::<T>::bracket_at(lo), sub));
            continue;
        }
        if let [job] = sub.jobs.as_slice() {
            let speed = job.workload.clone() / job.window_len();
            let bracket = ladder
                .bracket_of(&speed)
                .ok_or_else(|| Error::Internal(format!("job {} above the top level after the check", job.id)))?;
            groups.push((bracket, sub));
            continue;
        }
        let pivot = lo + (hi - lo).div_ceil(2);
        let s = ladder.levels[pivot - 1].clone();
        let result = s_schedule(&sub.jobs, &s, &sub.ranks)?;
        stats.sschedule_calls += 1;
        stats.bipartitions += 1;
        stats.rounds = stats.rounds.max(depth + 1);
        let split = bipartition(&sub, &s, &result)?;
        let low = sub.restrict_excising(&split.low_mask(), &split.high_region)?;
        let high = sub.restrict(&split.high)?;
        work.push((low, lo, pivot - 1, depth + 1));
        work.push((high, pivot, hi, depth + 1));
    }

    let mut by_id = std::collections::HashMap::with_capacity(jobs.len());
    for (bracket, sub) in &groups {
        for job in &sub.jobs {
            by_id.insert(job.id, *bracket);
        }
    }
    // jobs without work were dropped at the root; they need no speed at all
    let brackets = jobs
        .iter()
        .map(|j| SpeedBracket {
            job: j.id,
            bracket: by_id.get(&j.id).copied().unwrap_or(Bracket::Below),
        })
        .collect();
    Ok(Bracketing {
        brackets,
        groups,
        stats,
    })
}

fn infeasible<T: Scalar>(jobs: &[Job<T>], ladder: &SpeedLadder<T>) -> Error {
    let jobs = match solve_detailed(jobs, |_| {}) {
        Ok(solution) => solution
            .speeds
            .into_iter()
            .filter(|(_, speed)| speed.is_gt(ladder.max()))
            .map(|(id, _)| id)
            .collect(),
        Err(e) => return e,
    };
    Error::Infeasible {
        jobs,
        max_speed: ladder.max().render(),
    }
}

/// Durations `(t_lo, t_hi)` at `s_lo` and `s_hi` that fill `interval_length`
/// and deliver `work`.
pub fn two_speed_round<T: Scalar>(interval_length: &T, work: &T, s_lo: &T, s_hi: &T) -> Result<(T, T)> {
    if !interval_length.is_positive_s() {
        return Err(Error::invalid("interval length must be positive"));
    }
    if !s_lo.is_lt(s_hi) {
        return Err(Error::invalid(format!(
            "need s_lo < s_hi, got {} and {}",
            s_lo.render(),
            s_hi.render()
        )));
    }
    let rate = work.clone() / interval_length.clone();
    if rate.is_lt(s_lo) || rate.is_gt(s_hi) {
        return Err(Error::invalid(format!(
            "rate {} outside [{}, {}]",
            rate.render(),
            s_lo.render(),
            s_hi.render()
        )));
    }
    let t_hi = ((work.clone() - s_lo.clone() * interval_length.clone()) / (s_hi.clone() - s_lo.clone()))
        .max_s(T::zero())
        .min_s(interval_length.clone());
    let t_lo = interval_length.clone() - t_hi.clone();
    Ok((t_lo, t_hi))
}

#[derive(Clone, Debug)]
pub struct DiscreteSolution<T> {
    pub schedule: Schedule<T>,
    pub brackets: Vec<SpeedBracket>,
    pub stats: DiscreteStats,
}

/// The minimum-energy schedule using only ladder speeds.
pub fn solve_discrete<T: Scalar>(jobs: &[Job<T>], ladder: &SpeedLadder<T>) -> Result<Schedule<T>> {
    Ok(solve_discrete_detailed(jobs, ladder)?.schedule)
}

/// Every continuous execution segment is replaced by its two-speed rounding,
/// the faster level first.
pub fn solve_discrete_detailed<T: Scalar>(jobs: &[Job<T>], ladder: &SpeedLadder<T>) -> Result<DiscreteSolution<T>> {
    let Bracketing {
        brackets,
        groups,
        mut stats,
    } = bracket_jobs_detailed(jobs, ladder)?;
    let mut segments = Vec::new();
    for (bracket, sub) in groups {
        let solution = solve_subproblem(sub, |_| {})?;
        stats.sschedule_calls += solution.stats.sschedule_calls;
        for seg in solution.schedule.into_segments() {
            if seg.job.is_some() {
                round_segment(seg, bracket, ladder, &mut segments)?;
            }
        }
    }
    Ok(DiscreteSolution {
        schedule: Schedule::new(segments).normalized(),
        brackets,
        stats,
    })
}

fn round_segment<T: Scalar>(
    seg: Segment<T>,
    bracket: Bracket,
    ladder: &SpeedLadder<T>,
    out: &mut Vec<Segment<T>>,
) -> Result<()> {
    let job = seg.job.expect("busy segment");
    let len = seg.len();
    let levels = ladder.levels();
    let mismatch = || {
        Error::Internal(format!(
            "job {job} runs at {} outside its bracket ({bracket})",
            seg.speed.render()
        ))
    };
    match bracket {
        Bracket::Below => {
            if seg.speed.is_gt(ladder.min()) {
                return Err(mismatch());
            }
            let t = len * seg.speed.clone() / ladder.min().clone();
            out.push(Segment::busy(
                job,
                seg.start.clone(),
                seg.start.clone() + t,
                ladder.min().clone(),
            ));
        }
        Bracket::Level(i) if i + 1 == levels.len() => {
            if !seg.speed.is_eq(&levels[i]) {
                return Err(mismatch());
            }
            out.push(Segment::busy(job, seg.start, seg.end, levels[i].clone()));
        }
        Bracket::Level(i) => {
            let (s_lo, s_hi) = (&levels[i], &levels[i + 1]);
            let work = seg.work();
            let (t_lo, t_hi) = two_speed_round(&len, &work, s_lo, s_hi).map_err(|_| mismatch())?;
            let split = seg.start.clone() + t_hi.clone();
            if t_hi.is_positive_s() {
                out.push(Segment::busy(job, seg.start.clone(), split.clone(), s_hi.clone()));
            }
            if t_lo.is_positive_s() {
                out.push(Segment::busy(job, split, seg.end.clone(), s_lo.clone()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{energy, verify_feasible, EnergyParams};
    use crate::num::Rational;

    fn q(text: &str) -> Rational {
        Rational::parse_number(text).unwrap()
    }

    fn job(id: JobId, a: &str, b: &str, w: &str) -> Job<Rational> {
        Job::new(id, q(a), q(b), q(w)).unwrap()
    }

    fn ladder(levels: &[&str]) -> SpeedLadder<Rational> {
        SpeedLadder::new(levels.iter().map(|s| q(s)).collect()).unwrap()
    }

    fn two_jobs() -> Vec<Job<Rational>> {
        vec![job(1, "0", "1", "1"), job(2, "0.25", "0.75", "2")]
    }

    #[test]
    fn ladder_validation() {
        assert!(SpeedLadder::<Rational>::new(vec![]).is_err());
        assert!(SpeedLadder::new(vec![q("0"), q("1")]).is_err());
        assert!(SpeedLadder::new(vec![q("2"), q("2")]).is_err());
        assert!(SpeedLadder::new(vec![q("3"), q("1")]).is_err());
        let l = ladder(&["1", "3", "5"]);
        assert_eq!(l.bracket_of(&q("0.5")), Some(Bracket::Below));
        assert_eq!(l.bracket_of(&q("1")), Some(Bracket::Level(0)));
        assert_eq!(l.bracket_of(&q("3")), Some(Bracket::Level(1)));
        assert_eq!(l.bracket_of(&q("4.9")), Some(Bracket::Level(1)));
        assert_eq!(l.bracket_of(&q("5")), Some(Bracket::Level(2)));
        assert_eq!(l.bracket_of(&q("5.1")), None);
    }

    #[test]
    fn brackets_of_the_two_job_instance() {
        let got = bracket_jobs(&two_jobs(), &ladder(&["1", "3", "5"])).unwrap();
        assert_eq!(
            got,
            vec![
                SpeedBracket {
                    job: 1,
                    bracket: Bracket::Level(0)
                },
                SpeedBracket {
                    job: 2,
                    bracket: Bracket::Level(1)
                },
            ]
        );
    }

    #[test]
    fn slow_job_is_below_the_ladder() {
        let jobs = [job(1, "0", "1", "0.5")];
        let got = bracket_jobs(&jobs, &ladder(&["1", "2"])).unwrap();
        assert_eq!(got[0].bracket, Bracket::Below);

        let schedule = solve_discrete(&jobs, &ladder(&["1", "2"])).unwrap();
        assert_eq!(schedule.segments(), &[Segment::busy(1, q("0"), q("0.5"), q("1"))]);
        assert_eq!(energy(&schedule, &EnergyParams::new(2.0).unwrap()), q("0.5"));
    }

    #[test]
    fn too_fast_job_is_infeasible() {
        let jobs = [job(7, "0", "1", "6")];
        match bracket_jobs(&jobs, &ladder(&["1", "3", "5"])) {
            Err(Error::Infeasible { jobs, max_speed }) => {
                assert_eq!(jobs, vec![7]);
                assert_eq!(max_speed, "5");
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn two_speed_split() {
        assert_eq!(
            two_speed_round(&q("0.5"), &q("2"), &q("3"), &q("5")).unwrap(),
            (q("0.25"), q("0.25"))
        );
        assert_eq!(
            two_speed_round(&q("2"), &q("6"), &q("3"), &q("5")).unwrap(),
            (q("2"), q("0"))
        );
        assert_eq!(
            two_speed_round(&q("2"), &q("10"), &q("3"), &q("5")).unwrap(),
            (q("0"), q("2"))
        );
        assert!(two_speed_round(&q("1"), &q("6"), &q("3"), &q("5")).is_err());
        assert!(two_speed_round(&q("1"), &q("4"), &q("5"), &q("3")).is_err());
        assert!(two_speed_round(&q("0"), &q("0"), &q("3"), &q("5")).is_err());
    }

    #[test]
    fn worked_energy() {
        let jobs = two_jobs();
        let solution = solve_discrete_detailed(&jobs, &ladder(&["3", "5"])).unwrap();
        assert!(verify_feasible(&solution.schedule, &jobs).is_ok());
        assert_eq!(energy(&solution.schedule, &EnergyParams::new(2.0).unwrap()), q("11.5"));
        // job 2 runs at 5 then 3; job 1 only at 3
        let sets = solution.schedule.job_speed_sets();
        assert_eq!(sets[&1], vec![q("3")]);
        assert_eq!(sets[&2], vec![q("3"), q("5")]);
    }

    #[test]
    fn ladder_through_every_speed_reproduces_continuous() {
        let jobs = two_jobs();
        let continuous = solve_detailed(&jobs, |_| {}).unwrap().schedule;
        let discrete = solve_discrete(&jobs, &ladder(&["2", "4"])).unwrap();
        assert_eq!(discrete, continuous);
    }

    #[test]
    fn rounds_follow_the_ladder_depth() {
        let jobs = two_jobs();
        for d in 1..=16usize {
            let levels: Vec<Rational> = (1..=d as i64).map(|i| Rational::from_ratio(i * 5, d as i64)).collect();
            let stats = bracket_jobs_detailed(&jobs, &SpeedLadder::new(levels).unwrap())
                .unwrap()
                .stats;
            let bound = (usize::BITS - d.leading_zeros()) as usize; // ceil(log2(d + 1))
            assert!(stats.rounds <= bound, "d = {d}: {stats:?}");
        }
    }
}
