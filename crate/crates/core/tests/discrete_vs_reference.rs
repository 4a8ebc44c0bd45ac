use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voltsched_core::discrete::{solve_discrete_detailed, SpeedLadder};
use voltsched_core::testkit::{generate, rounded_reference_energy, InstanceSpec, Structure};
use voltsched_core::yds::mes_schedule_detailed;
use voltsched_core::{energy, verify_feasible, EnergyParams, Error, Rational, Scalar};

#[test]
fn brackets_and_energy_match_rounded_reference() {
    let params = EnergyParams::new(2.0).unwrap();
    let mut infeasible = 0;
    for seed in 0..2000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let structure = Structure::ALL[seed as usize % 4];
        let jobs = generate::<Rational>(&InstanceSpec::new(1 + seed as usize % 12, structure, seed));
        let reference = mes_schedule_detailed(&jobs);
        let d = rng.gen_range(1..=16);
        // levels on a grid of quarters, sometimes hitting optimal speeds
        let mut levels: Vec<i64> = (0..d).map(|_| rng.gen_range(1..=40)).collect();
        levels.sort_unstable();
        levels.dedup();
        let ladder = SpeedLadder::new(levels.iter().map(|&l| Rational::from_ratio(l, 4)).collect()).unwrap();
        match solve_discrete_detailed(&jobs, &ladder) {
            Ok(solution) => {
                assert!(verify_feasible(&solution.schedule, &jobs).is_ok(), "seed {seed}");
                for b in &solution.brackets {
                    let expect = reference.speeds.get(&b.job).map(|s| ladder.bracket_of(s).unwrap());
                    if let Some(expect) = expect {
                        assert_eq!(b.bracket, expect, "seed {seed} job {}", b.job);
                    }
                }
                assert_eq!(
                    energy(&solution.schedule, &params),
                    rounded_reference_energy(&jobs, &ladder, &params).unwrap(),
                    "seed {seed}"
                );
            }
            Err(Error::Infeasible { jobs: bad, .. }) => {
                infeasible += 1;
                let expect: Vec<_> = reference
                    .speeds
                    .iter()
                    .filter(|(_, s)| s.is_gt(ladder.max()))
                    .map(|(id, _)| *id)
                    .collect();
                assert_eq!(bad, expect, "seed {seed}");
            }
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(infeasible < 1000, "{infeasible}");
}
