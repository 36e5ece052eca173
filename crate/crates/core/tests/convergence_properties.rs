use bornrate::convergence::{median, parse_series_csv};
use bornrate::rng::replica_seed;
use bornrate::{
    analyze_log, bin_positions, check_bound, convergence_series, efficiency_sweep, empirical_cdf,
    fit_rate, sample_events, sup_deviation, BinningScheme, BornDistribution, CheckpointSchedule,
    DetectorModel, EventLog, SweepPlan, WavefunctionSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gaussian() -> BornDistribution {
    BornDistribution::new(&WavefunctionSpec::gaussian(1.0, 8.0)).unwrap()
}

#[test]
fn nested_grids_only_add_evaluation_points() {
    let d = gaussian();
    for seed in 0..20 {
        let log = sample_events(&d, DetectorModel::perfect(), 5_000, seed);
        let coarse = convergence_series(&log, &d, 32, &CheckpointSchedule::default()).unwrap();
        let fine = convergence_series(&log, &d, 64, &CheckpointSchedule::default()).unwrap();
        for (c, f) in coarse.checkpoints.iter().zip(&fine.checkpoints) {
            assert_eq!(c.0, f.0);
            assert!(c.1 <= f.1, "seed {seed} N={}: {} > {}", c.0, c.1, f.1);
        }
    }
}

#[test]
fn replay_from_disk_is_bit_identical() {
    let d = BornDistribution::new(&WavefunctionSpec::double_slit(1.0, 5.0, 10.0)).unwrap();
    let log = sample_events(&d, DetectorModel::new(0.7).unwrap(), 30_000, 77);
    let reloaded = EventLog::parse(&log.to_text()).unwrap();
    let dist2 = BornDistribution::new(&reloaded.spec).unwrap();
    let a = convergence_series(&log, &d, 64, &CheckpointSchedule::default()).unwrap();
    let b = convergence_series(&reloaded, &dist2, 64, &CheckpointSchedule::default()).unwrap();
    assert_eq!(a, b);
    let (_, pts) = parse_series_csv(&a.to_csv(&[])).unwrap();
    assert_eq!(pts, a.checkpoints);
}

#[test]
fn single_event_deviation_at_most_one() {
    let d = gaussian();
    let scheme = BinningScheme::new(-8.0, 8.0, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let x = d.quantile(rng.gen::<f64>()).unwrap();
        let emp = empirical_cdf(&bin_positions(&[x], &scheme).unwrap()).unwrap();
        let dev = sup_deviation(&emp, &d);
        assert!((0.0..=1.0).contains(&dev));
    }
}

#[test]
fn final_edge_is_one_minus_born_at_max() {
    let d = gaussian();
    let log = sample_events(&d, DetectorModel::perfect(), 10_000, 3);
    let s = convergence_series(&log, &d, 64, &CheckpointSchedule::default()).unwrap();
    let counts = bornrate::bin_events(&log.events, &s.scheme).unwrap();
    let emp = empirical_cdf(&counts).unwrap();
    assert_eq!(*emp.values.last().unwrap(), 1.0);
    let last = (emp.values[63] - d.cdf(s.scheme.m_plus())).abs();
    assert_eq!(last, 1.0 - d.cdf(s.scheme.m_plus()));
    assert!(last <= s.checkpoints.last().unwrap().1);
    // at x = +∞ both sides are one
    assert!((1.0 - d.cdf(f64::INFINITY)).abs() <= 1e-9);
}

#[test]
fn iid_gaussian_rescaled_deviation_grows() {
    let d = gaussian();
    let mut alphas = Vec::new();
    let mut growing = 0;
    for r in 0..20 {
        let log = sample_events(&d, DetectorModel::perfect(), 200_000, replica_seed(9, r));
        let s = convergence_series(&log, &d, 64, &CheckpointSchedule::default()).unwrap();
        alphas.push(fit_rate(&s, 100).unwrap().alpha_hat);
        let b1 = check_bound(&s, 1.0).unwrap();
        if b1.c_trend > 0.0 {
            growing += 1;
        }
    }
    let med = median(alphas);
    assert!((0.4..=0.6).contains(&med), "{med}");
    assert!(growing >= 19);
}

#[test]
fn single_cell_sweep_equals_manual_pipeline() {
    let d = gaussian();
    let plan = SweepPlan {
        bins: vec![64],
        efficiencies: vec![1.0],
        emitted: 20_000,
        replicas: 1,
        base_seed: 123,
        schedule: CheckpointSchedule::default(),
        burn_in: 100,
    };
    let rows = efficiency_sweep(&d, &plan).unwrap();
    assert_eq!(rows.len(), 1);
    let log = sample_events(&d, DetectorModel::perfect(), 20_000, replica_seed(123, 0));
    let a = analyze_log(&log, &d, 64, &CheckpointSchedule::default(), 100).unwrap();
    assert_eq!(rows[0].median_alpha_hat, a.fit.alpha_hat);
    assert_eq!(rows[0].median_c_min_alpha1, a.bound_inverse_n.c_min);
    assert_eq!(rows[0].median_c_min_alpha05, a.bound_inverse_sqrt_n.c_min);
}

#[test]
fn halved_efficiency_halves_recorded_n() {
    let d = gaussian();
    let plan = SweepPlan {
        bins: vec![8, 64],
        efficiencies: vec![1.0, 0.5],
        emitted: 100_000,
        replicas: 9,
        base_seed: 5,
        schedule: CheckpointSchedule::default(),
        burn_in: 100,
    };
    let rows = efficiency_sweep(&d, &plan).unwrap();
    assert_eq!(rows.len(), 4);
    let cell = |m: usize, e: f64| {
        rows.iter()
            .find(|r| r.bins == m && r.efficiency == e)
            .unwrap()
    };
    let full = cell(64, 1.0);
    let half = cell(64, 0.5);
    assert_eq!(full.median_recorded, 100_000.0);
    assert!((half.median_recorded - 50_000.0).abs() < 700.0);
    // DKW scaling: final D grows by about √2 at half the data
    assert!(half.median_final_d > full.median_final_d);
    // fixed data across M: same recorded counts
    assert_eq!(cell(8, 0.5).median_recorded, half.median_recorded);
}
