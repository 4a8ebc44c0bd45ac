//! Minimum-energy voltage scheduling.
//!
//! A single processor runs at a speed of its choosing; running at speed `s`
//! draws power `s^alpha`. Given jobs with arrival times, deadlines and
//! workloads, the solvers here compute feasible schedules of least energy:
//!
//! * [`sschedule`]: EDF at one fixed speed in linear time given sorted ranks,
//!   driven by an [`union_find::IntervalUnionFind`].
//! * [`continuous`]: the optimal schedule for arbitrary speeds, by recursive
//!   bipartition of the jobs around their average rate.
//! * [`discrete`]: the optimal schedule when only a ladder of speeds is
//!   available.
//! * [`yds`]: the classical critical-interval algorithm, kept as a reference.
//!
//! Everything is generic over [`Scalar`]: exact [`Rational`] or `f64`.

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod model;
pub mod num;
pub mod sschedule;
pub mod testkit;
pub mod timeline;
pub mod union_find;
pub mod yds;

pub use error::{Error, Result};
pub use model::{
    avr, energy, intensity, support, support_length, verify_feasible, EnergyParams, Job, JobId, JobSet, Schedule,
    Segment, Verdict, Violation,
};
pub use num::{Rational, Scalar, FLOAT_TOLERANCE};
pub use sschedule::{compute_ranks, s_schedule, Ranks, SScheduleResult};
