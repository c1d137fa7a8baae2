use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use udn_core::analytic::{area_spectral_efficiency, coverage_probability, AnalysisConfig};
use udn_core::channel::{ModelSpec, PathType};
use udn_core::fading::FadingModel;
use udn_core::montecarlo::{
    default_radius, estimate_ase, estimate_coverage, run_trial, sample_network, simulate,
    snapshot_sinr, Estimator, NetworkSample, SimConfig, MIN_TRIALS,
};

fn case1(l_m: f64) -> AnalysisConfig {
    AnalysisConfig::new(ModelSpec::case1().with_height_diff_m(l_m).build().unwrap())
}

#[test]
fn base_station_count_is_poisson() {
    let cfg = SimConfig::new(case1(8.5), 50.0).with_trials(2_000);
    let r = cfg.radius();
    let expected = 50.0 * std::f64::consts::PI * r * r;
    let (mut n, mut r2) = (0usize, 0.0);
    for t in 0..cfg.trials {
        let s = sample_network(&cfg, t).unwrap();
        n += s.radii.len();
        r2 += s.radii.iter().map(|x| x * x).sum::<f64>();
        assert!(s.radii.iter().all(|&x| (0.0..=r).contains(&x)));
    }
    let mean = n as f64 / cfg.trials as f64;
    let sigma = (expected / cfg.trials as f64).sqrt();
    assert!(
        (mean - expected).abs() < 4.0 * sigma,
        "mean {mean} vs {expected}"
    );
    let mean_r2 = r2 / n as f64;
    assert!(
        (mean_r2 / (r * r / 2.0) - 1.0).abs() < 0.01,
        "uniform in the disc: {mean_r2}"
    );
}

#[test]
fn los_fraction_follows_the_probability_function() {
    let cfg = SimConfig::new(case1(8.5), 300.0).with_trials(1_000);
    let model = &cfg.analysis.model;
    let bins = [(0.0, 0.1), (0.1, 0.2), (0.2, 0.3), (0.3, 1.0)];
    let mut los = [0u64; 4];
    let mut all = [0u64; 4];
    let mut expected = [0.0; 4];
    for t in 0..cfg.trials {
        let s = sample_network(&cfg, t).unwrap();
        for (&r, &l) in s.radii.iter().zip(&s.los) {
            if let Some(b) = bins.iter().position(|&(a, b)| r >= a && r < b) {
                all[b] += 1;
                los[b] += u64::from(l);
                expected[b] += model.los_probability(model.distance_3d(r));
            }
        }
    }
    for b in 0..4 {
        let n = all[b] as f64;
        let (f, e) = (los[b] as f64 / n, expected[b] / n);
        let sigma = (e * (1.0 - e) / n).sqrt();
        assert!(
            (f - e).abs() <= 4.0 * sigma + 1e-12,
            "bin {:?}: {f} vs {e}",
            bins[b]
        );
    }
    assert_eq!(los[3], 0);
}

#[test]
fn results_are_reproducible_and_seed_dependent() {
    let cfg = SimConfig::new(case1(8.5), 100.0)
        .with_trials(3_000)
        .with_seed(9);
    let a = simulate(&cfg, &[0.5, 1.0, 2.0], 1.0).unwrap();
    let b = simulate(&cfg, &[0.5, 1.0, 2.0], 1.0).unwrap();
    assert_eq!(a, b);
    let c = simulate(&cfg.clone().with_seed(10), &[0.5, 1.0, 2.0], 1.0).unwrap();
    assert_ne!(a.coverage, c.coverage);
    let one = run_trial(&cfg, 17).unwrap();
    assert_eq!(one.sinr, run_trial(&cfg, 17).unwrap().sinr);
}

#[test]
fn serving_station_has_the_largest_link_gain() {
    let cfg = SimConfig::new(case1(8.5), 500.0).with_trials(MIN_TRIALS);
    for t in 0..200 {
        let s = run_trial(&cfg, t).unwrap();
        let best = s.link_gains[s.serving_index];
        assert!(s.link_gains.iter().all(|&g| g <= best));
        assert!(s.link_gains[..s.serving_index].iter().all(|&g| g < best));
    }
}

#[test]
fn two_station_gain_ratio_matches_the_closed_form() {
    let tau = 10.0;
    let cfg = SimConfig::new(case1(0.0).with_powers_dbm(24.0, f64::NEG_INFINITY), 10.0);
    let sample = NetworkSample {
        radii: vec![0.01, 0.01 * tau],
        los: vec![true, true],
        resampled_empty: 0,
    };
    let s = snapshot_sinr(&cfg, &sample, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(s.serving_index, 0);
    let ratio = s.link_gains[0] / s.link_gains[1];
    assert!((ratio / tau.powf(2.09) - 1.0).abs() < 1e-12);

    let lifted = SimConfig::new(case1(8.5).with_powers_dbm(24.0, f64::NEG_INFINITY), 10.0);
    let near = NetworkSample {
        radii: vec![1e-9, 8e-9],
        los: vec![true, true],
        resampled_empty: 0,
    };
    let s = snapshot_sinr(&lifted, &near, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert!((s.link_gains[0] / s.link_gains[1] - 1.0).abs() < 1e-6);
}

#[test]
fn lone_station_without_noise_has_unbounded_sinr() {
    let cfg = SimConfig::new(case1(8.5).with_powers_dbm(24.0, f64::NEG_INFINITY), 10.0);
    let sample = NetworkSample {
        radii: vec![0.05],
        los: vec![true],
        resampled_empty: 0,
    };
    let s = snapshot_sinr(&cfg, &sample, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    assert_eq!(s.sinr, f64::INFINITY);
}

#[test]
fn overwhelming_noise_gives_total_outage() {
    let cfg =
        SimConfig::new(case1(8.5).with_powers_dbm(24.0, 200.0), 100.0).with_trials(MIN_TRIALS);
    let s = simulate(&cfg, &[1.0], 1.0).unwrap();
    assert_eq!(s.coverage[0].1.mean, 0.0);
    assert_eq!(s.ase.mean, 0.0);
    assert_eq!(s.coverage[0].1.ci_low, 0.0);
}

#[test]
fn doubling_the_disc_does_not_bias_estimates() {
    for lambda in [10.0, 300.0] {
        let cfg = SimConfig::new(case1(8.5), lambda)
            .with_trials(20_000)
            .with_seed(3);
        let r = cfg.radius();
        let a = estimate_coverage(&cfg, 1.0).unwrap();
        let b =
            estimate_coverage(&cfg.clone().with_radius(Some(2.0 * r)).with_seed(4), 1.0).unwrap();
        let joint = a.ci_half_width.hypot(b.ci_half_width);
        assert!(
            (a.mean - b.mean).abs() <= 1.5 * joint,
            "λ={lambda}: {} vs {}",
            a.mean,
            b.mean
        );
    }
}

#[test]
fn empirical_ccdf_matches_analytic_coverage() {
    let analysis = case1(8.5);
    let cfg = SimConfig::new(analysis.clone(), 100.0)
        .with_trials(20_000)
        .with_seed(21);
    let thresholds: Vec<f64> = (0..20).map(|i| 10f64.powf(-1.5 + i as f64 * 0.2)).collect();
    let sim = simulate(&cfg, &thresholds, 1.0).unwrap();
    for (g, est) in &sim.coverage {
        let p = coverage_probability(&analysis, 100.0, *g).unwrap().p_cov;
        assert!(
            (p - est.mean).abs() <= 0.02,
            "γ={g}: analytic {p} vs MC {}",
            est.mean
        );
    }
}

#[test]
fn simulated_ase_matches_analytic() {
    let analysis = case1(8.5);
    let cfg = SimConfig::new(analysis.clone(), 200.0)
        .with_trials(20_000)
        .with_seed(5);
    let mc = estimate_ase(&cfg, 1.0).unwrap();
    let a = area_spectral_efficiency(&analysis, 200.0, 1.0).unwrap().ase;
    let tol = (0.10 * a).max(3.0 * mc.ci_half_width);
    assert!(
        (a - mc.mean).abs() <= tol,
        "analytic {a} vs MC {} ± {}",
        mc.mean,
        mc.ci_half_width
    );
}

#[test]
fn single_slope_coverage_is_flat_in_density() {
    let analysis = AnalysisConfig::new(ModelSpec::single_slope().build().unwrap());
    let a = estimate_coverage(
        &SimConfig::new(analysis.clone(), 1e2).with_trials(20_000),
        1.0,
    )
    .unwrap();
    let b = estimate_coverage(&SimConfig::new(analysis, 1e4).with_trials(20_000), 1.0).unwrap();
    assert!((a.mean - b.mean).abs() <= 2.0 * a.ci_half_width.hypot(b.ci_half_width));
}

#[test]
fn configuration_is_validated() {
    let base = SimConfig::new(case1(8.5), 100.0);
    assert!(simulate(&base.clone().with_trials(MIN_TRIALS - 1), &[1.0], 1.0).is_err());
    assert!(simulate(&SimConfig::new(case1(8.5), -1.0), &[1.0], 1.0).is_err());
    assert!(simulate(&base.clone().with_radius(Some(0.01)), &[1.0], 1.0).is_err());
    assert!(default_radius(0.3, 100.0) >= 1.5);
}

#[test]
fn sample_marks_every_station_with_a_path_type() {
    let cfg = SimConfig::new(case1(8.5), 100.0);
    let s = sample_network(&cfg, 0).unwrap();
    assert_eq!(s.radii.len(), s.los.len());
    let model = &cfg.analysis.model;
    for (&r, &l) in s.radii.iter().zip(&s.los) {
        if model.los_probability(model.distance_3d(r)) == 0.0 {
            assert!(!l, "{:?} beyond the LoS support", PathType::Los);
        }
    }
}

#[test]
fn fading_averaged_estimator_agrees_with_counting() {
    let analysis = case1(8.5);
    let base = SimConfig::new(analysis.clone(), 300.0)
        .with_trials(8_000)
        .with_seed(11);
    let thresholds = [0.3, 1.0, 3.0];
    let counted = simulate(&base, &thresholds, 1.0).unwrap();
    let averaged = simulate(
        &base.clone().with_estimator(Estimator::FadingAveraged),
        &thresholds,
        1.0,
    )
    .unwrap();
    for ((g, a), (_, b)) in counted.coverage.iter().zip(&averaged.coverage) {
        let p = coverage_probability(&analysis, 300.0, *g).unwrap().p_cov;
        assert!(
            (a.mean - b.mean).abs() <= 3.0 * a.ci_half_width.hypot(b.ci_half_width),
            "γ={g}: {a:?} vs {b:?}"
        );
        assert!(
            (b.mean - p).abs() <= 3.0 * b.ci_half_width + 1e-3,
            "γ={g}: averaged {} vs analytic {p}",
            b.mean
        );
        assert!(b.ci_half_width < a.ci_half_width);
    }
    let joint = counted.ase.ci_half_width.hypot(averaged.ase.ci_half_width);
    assert!((counted.ase.mean - averaged.ase.mean).abs() <= 3.0 * joint);
}

#[test]
fn fading_averaged_estimator_resolves_rare_coverage() {
    let analysis = case1(8.5);
    let lambda = 1e4;
    let cfg = SimConfig::new(analysis.clone(), lambda)
        .with_trials(MIN_TRIALS)
        .with_estimator(Estimator::FadingAveraged);
    let gamma = 1.0;
    let est = estimate_coverage(&cfg, gamma).unwrap();
    let p = coverage_probability(&analysis, lambda, gamma)
        .unwrap()
        .p_cov;
    assert!(p < 1e-4, "analytic {p}");
    assert!(
        (est.mean - p).abs() <= 3.0 * est.ci_half_width,
        "averaged {est:?} vs analytic {p}"
    );
}

#[test]
fn fading_averaged_estimator_needs_rayleigh_fading() {
    let rician = case1(8.5).with_fading(FadingModel::rician_los(10.0).unwrap());
    let cfg = SimConfig::new(rician, 100.0).with_estimator(Estimator::FadingAveraged);
    assert!(simulate(&cfg, &[1.0], 1.0).is_err());
}
