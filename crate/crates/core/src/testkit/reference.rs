use crate::discrete::{two_speed_round, Bracket, SpeedLadder};
use crate::error::{Error, Result};
use crate::model::{EnergyParams, Job};
use crate::num::Scalar;
use crate::yds::mes_schedule_detailed;

/// Discrete-model energy by the slow route: the critical-interval optimum,
/// with every job's time split between the two ladder levels around its
/// speed.
pub fn rounded_reference_energy<T: Scalar>(
    jobs: &[Job<T>],
    ladder: &SpeedLadder<T>,
    params: &EnergyParams,
) -> Result<T> {
    let reference = mes_schedule_detailed(jobs);
    let mut total = T::zero();
    for job in jobs.iter().filter(|j| j.workload.is_positive_s()) {
        let speed = &reference.speeds[&job.id];
        let time = job.workload.clone() / speed.clone();
        let levels = ladder.levels();
        total = total
            + match ladder.bracket_of(speed) {
                None => {
                    return Err(Error::Infeasible {
                        jobs: vec![job.id],
                        max_speed: ladder.max().render(),
                    })
                }
                Some(Bracket::Below) => params.power(ladder.min()) * (job.workload.clone() / ladder.min().clone()),
                Some(Bracket::Level(i)) if i + 1 == levels.len() => params.power(&levels[i]) * time,
                Some(Bracket::Level(i)) => {
                    let (t_lo, t_hi) = two_speed_round(&time, &job.workload, &levels[i], &levels[i + 1])?;
                    params.power(&levels[i]) * t_lo + params.power(&levels[i + 1]) * t_hi
                }
            };
    }
    Ok(total)
}
