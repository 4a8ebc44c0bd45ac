use voltsched_core::continuous::solve_detailed;
use voltsched_core::testkit::{generate, InstanceSpec, Structure};
use voltsched_core::yds::mes_schedule_detailed;
use voltsched_core::{energy, verify_feasible, EnergyParams, Rational};

#[test]
fn job_speeds_match_critical_interval_reference() {
    let params = EnergyParams::new(3.0).unwrap();
    for seed in 0..400u64 {
        for structure in Structure::ALL {
            let n = 1 + (seed as usize % 12);
            let jobs = generate::<Rational>(&InstanceSpec::new(n, structure, seed));
            let ours = solve_detailed(&jobs, |_| {}).unwrap();
            let reference = mes_schedule_detailed(&jobs);
            assert_eq!(ours.speeds, reference.speeds, "{structure} seed {seed}: {jobs:?}");
            assert!(
                verify_feasible(&ours.schedule, &jobs).is_ok(),
                "{structure} seed {seed}"
            );
            assert_eq!(energy(&ours.schedule, &params), energy(&reference.schedule, &params));
            assert!(ours.stats.sschedule_calls <= n);
        }
    }
}

#[test]
fn coarse_grids_with_idle_jobs_and_ties() {
    for seed in 0..3000u64 {
        let structure = Structure::ALL[seed as usize % 4];
        let spec = InstanceSpec {
            resolution: 1 + (seed % 3) as i64,
            ticks: 3 + (seed % 7) as i64,
            workload: (0, 6),
            ..InstanceSpec::new(2 + (seed as usize % 10), structure, seed)
        };
        let jobs = generate::<Rational>(&spec);
        let ours = solve_detailed(&jobs, |_| {}).unwrap();
        let reference = mes_schedule_detailed(&jobs);
        assert_eq!(ours.speeds, reference.speeds, "{structure} seed {seed}: {jobs:?}");
        assert!(
            verify_feasible(&ours.schedule, &jobs).is_ok(),
            "{structure} seed {seed}"
        );
    }
}
