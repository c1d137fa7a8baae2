//! End-to-end acceptance checks. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits non-zero if any criterion fails.

use std::time::Instant;

use udn_core::analytic::{
    area_spectral_efficiency, association_mass, conditional_coverage_rayleigh,
    conditional_coverage_rician, coverage_probability, AnalysisConfig,
};
use udn_core::antenna::{self, AntennaSpec};
use udn_core::asymptotics::{classify_curve, kappa_bound, pairwise_sir, RegimeThresholds};
use udn_core::channel::{approx_distance, distance_3d, ModelSpec, PathType};
use udn_core::config::LambdaGrid;
use udn_core::fading::{Fading, FadingModel};
use udn_core::montecarlo::{estimate_coverage, simulate, Estimator, SimConfig};
use udn_core::scenarios;

const ANCHOR_REL: f64 = 0.10;
const ANCHOR_MAX_SECS: f64 = 120.0;
const MC_TRIALS: u64 = 50_000;
const MC_ABS: f64 = 0.02;
const CI_MULTIPLE: f64 = 3.0;
const MC_MAX_SECS: f64 = 1800.0;
const CRASH_P_COV: f64 = 0.05;
const GROWTH_RATIO: (f64, f64) = (8.0, 12.0);
const L0_CRAWL_WINDOW: (f64, f64) = (20.0, 200.0);
const INVARIANCE_SPREAD: f64 = 0.01;
const RICIAN_ABS: f64 = 0.03;
const RICIAN_TRIALS: u64 = 20_000;
const ANTENNA_TRIALS: u64 = 1_000;
const CASE2_REL: f64 = 0.15;
const CASE2_CRAWL_WINDOW: (f64, f64) = (200.0, 600.0);
const SIR_EXACT_REL: f64 = 1e-15;
const SIR_LIMIT_ABS: f64 = 1e-6;
const KAPPA_REL: f64 = 1e-15;
const APPROX_MAX_ERR_M: f64 = 1.6;
const MASS_ABS: f64 = 1e-6;
const K0_ABS: f64 = 1e-2;
const PDF_NORM_ABS: f64 = 1e-9;
const PDF_MEAN_ABS: f64 = 1e-6;
const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn analysis(spec: ModelSpec, l_m: f64) -> AnalysisConfig {
    AnalysisConfig::new(spec.with_height_diff_m(l_m).build().expect("model builds"))
}

fn ase(cfg: &AnalysisConfig, lambda: f64) -> f64 {
    area_spectral_efficiency(cfg, lambda, 1.0)
        .expect("ase evaluates")
        .ase
}

fn p_cov(cfg: &AnalysisConfig, lambda: f64) -> f64 {
    coverage_probability(cfg, lambda, 1.0)
        .expect("coverage evaluates")
        .p_cov
}

fn grid(from: f64, to: f64, per_decade: u32) -> Vec<f64> {
    LambdaGrid::LogSpaced {
        from,
        to,
        per_decade,
    }
    .points()
}

fn overlaps(interval: Option<(f64, f64)>, window: (f64, f64)) -> bool {
    interval.is_some_and(|(a, b)| a <= window.1 && b >= window.0)
}

fn sci(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.3e}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn ase_anchors() -> Outcome {
    let cfg = analysis(ModelSpec::case1(), 8.5);
    let mut pass = true;
    let mut parts = Vec::new();
    for (lambda, target) in [(200.0, 109.1), (1e3, 149.6)] {
        let t = Instant::now();
        let v = ase(&cfg, lambda);
        let secs = t.elapsed().as_secs_f64();
        let ok = (v / target - 1.0).abs() <= ANCHOR_REL && secs < ANCHOR_MAX_SECS;
        pass &= ok;
        parts.push(format!(
            "ASE({lambda})={v:.2} vs {target}±{ANCHOR_REL} rel in {secs:.1}s"
        ));
    }
    outcome(pass, parts.join(", "))
}

fn analytic_mc_agreement() -> Outcome {
    let cfg = analysis(ModelSpec::case1(), 8.5);
    let t = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for lambda in [10.0, 1e2, 1e3, 1e4] {
        let a = p_cov(&cfg, lambda);
        let sim = SimConfig::new(cfg.clone(), lambda)
            .with_trials(MC_TRIALS)
            .with_seed(SEED);
        let m = estimate_coverage(&sim, 1.0).expect("simulation runs");
        let tol = MC_ABS.max(CI_MULTIPLE * m.ci_half_width);
        let diff = (a - m.mean).abs();
        pass &= diff <= tol;
        parts.push(format!(
            "λ={lambda}: |{a:.4}-{:.4}|={diff:.4}≤{tol:.4}",
            m.mean
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    pass &= secs < MC_MAX_SECS;
    outcome(
        pass,
        format!("{} ({MC_TRIALS} trials, {secs:.0}s)", parts.join(", ")),
    )
}

fn crash_at_high_density() -> Outcome {
    let lambdas = [1e4, 3e4, 1e5];
    let case1 = analysis(ModelSpec::case1(), 8.5);
    let single = analysis(ModelSpec::single_slope(), 8.5);
    let a: Vec<f64> = lambdas.iter().map(|&l| ase(&case1, l)).collect();
    let s: Vec<f64> = lambdas.iter().map(|&l| ase(&single, l)).collect();
    let p = p_cov(&case1, 1e5);
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    let pass = decreasing(&a) && decreasing(&s) && p < CRASH_P_COV;
    outcome(
        pass,
        format!(
            "case1 ASE [{}], single-slope ASE [{}], p_cov(1e5)={p:.2e}<{CRASH_P_COV}",
            sci(&a),
            sci(&s)
        ),
    )
}

fn no_crash_without_height() -> Outcome {
    let cfg = analysis(ModelSpec::case1(), 0.0);
    let ratio = ase(&cfg, 1e4) / ase(&cfg, 1e3);
    let lambdas = grid(1.0, 2e3, 10);
    let ases: Vec<f64> = lambdas.iter().map(|&l| ase(&cfg, l)).collect();
    let d =
        classify_curve(&lambdas, &ases, &RegimeThresholds::default()).expect("sweep classifies");
    let ratio_ok = (GROWTH_RATIO.0..=GROWTH_RATIO.1).contains(&ratio);
    let crawl_ok = overlaps(d.crawl_interval, L0_CRAWL_WINDOW);
    outcome(
        ratio_ok && crawl_ok,
        format!(
            "ASE(1e4)/ASE(1e3)={ratio:.2} in {GROWTH_RATIO:?}: {ratio_ok}; crawl {:?} overlaps {L0_CRAWL_WINDOW:?}: {crawl_ok}",
            d.crawl_interval
        ),
    )
}

fn density_invariance() -> Outcome {
    let cfg = analysis(ModelSpec::single_slope(), 0.0);
    let p: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|&l| p_cov(&cfg, l)).collect();
    let spread =
        p.iter().cloned().fold(f64::MIN, f64::max) - p.iter().cloned().fold(f64::MAX, f64::min);
    let mc: Vec<_> = [1e2, 1e4]
        .iter()
        .map(|&l| {
            let sim = SimConfig::new(cfg.clone(), l)
                .with_trials(MC_TRIALS)
                .with_seed(SEED);
            estimate_coverage(&sim, 1.0).expect("simulation runs")
        })
        .collect();
    let joint = mc[0].ci_half_width.hypot(mc[1].ci_half_width);
    let gap = (mc[0].mean - mc[1].mean).abs();
    outcome(
        spread < INVARIANCE_SPREAD && gap <= joint,
        format!(
            "analytic p_cov {p:.4?} spread {spread:.2e}<{INVARIANCE_SPREAD}; MC {:.4} vs {:.4}, gap {gap:.4}≤{joint:.4}",
            mc[0].mean, mc[1].mean
        ),
    )
}

fn height_ordering() -> Outcome {
    let at = |l_m: f64| ase(&analysis(ModelSpec::case1(), l_m), 1e4);
    let (a, b, c) = (at(3.5), at(8.5), at(18.5));
    let lambdas = grid(1e2, 1e6, 5);
    let collapse = |l_m: f64| {
        let cfg = analysis(ModelSpec::case1(), l_m);
        let ases: Vec<f64> = lambdas.iter().map(|&l| ase(&cfg, l)).collect();
        classify_curve(&lambdas, &ases, &RegimeThresholds::default())
            .expect("sweep classifies")
            .collapse_lambda
    };
    let (c35, c85) = (collapse(3.5), collapse(8.5));
    let delayed = matches!((c35, c85), (Some(x), Some(y)) if x > y);
    outcome(
        a > b && b > c && delayed,
        format!("ASE(1e4) L=3.5/8.5/18.5: {a:.3e} > {b:.3e} > {c:.3e}; ASE<1 first at {c35:?} (3.5 m) vs {c85:?} (8.5 m)"),
    )
}

fn rician_brings_crash_forward() -> Outcome {
    let rician = scenarios::load("fig7_rician_L8.5")
        .expect("bundled")
        .expect("valid")
        .analysis(8.5)
        .expect("valid");
    let rayleigh = analysis(ModelSpec::case1(), 8.5);
    let mut pass = true;
    let mut parts = Vec::new();

    let (ar, ay) = (ase(&rician, 3e3), ase(&rayleigh, 3e3));
    let mc = |cfg: &AnalysisConfig, lambda: f64| {
        let sim = SimConfig::new(cfg.clone(), lambda)
            .with_trials(RICIAN_TRIALS)
            .with_seed(SEED);
        simulate(&sim, &[1.0], 1.0).expect("simulation runs")
    };
    let my = mc(&rayleigh, 3e3);
    let mut mr_ase = f64::NAN;
    for lambda in [1e2, 1e3, 3e3] {
        let a = p_cov(&rician, lambda);
        let m = mc(&rician, lambda);
        if lambda == 3e3 {
            mr_ase = m.ase.mean;
        }
        let diff = (a - m.coverage[0].1.mean).abs();
        pass &= diff <= RICIAN_ABS;
        parts.push(format!(
            "λ={lambda}: |{a:.4}-{:.4}|≤{RICIAN_ABS}",
            m.coverage[0].1.mean
        ));
    }
    pass &= ar < ay && mr_ase < my.ase.mean;
    outcome(
        pass,
        format!(
            "ASE(3e3) Rician<Rayleigh analytic {ar:.3}<{ay:.3}, MC {mr_ase:.3}<{:.3}; {}",
            my.ase.mean,
            parts.join(", ")
        ),
    )
}

fn antenna_delays_crash() -> Outcome {
    let spec = AntennaSpec::default();
    let l_km = 0.0085;
    let tilts: Vec<f64> = grid(1.0, 1e12, 2)
        .iter()
        .map(|&l| antenna::downtilt_for_density(l, l_km, &spec))
        .collect();
    let monotone = tilts.windows(2).all(|w| w[1] >= w[0]);
    let clamped = *tilts.last().unwrap() == 90.0;
    let tilt = antenna::downtilt_for_density(1e3, l_km, &spec);
    let boresight = antenna::total_gain(0.0, tilt, tilt, &spec);

    let cfg = analysis(ModelSpec::case1(), 8.5);
    let run = |a: Option<AntennaSpec>| {
        let sim = SimConfig::new(cfg.clone(), 1e5)
            .with_trials(ANTENNA_TRIALS)
            .with_seed(SEED)
            .with_antenna(a)
            .with_estimator(Estimator::FadingAveraged);
        simulate(&sim, &[1.0], 1.0).expect("simulation runs").ase
    };
    let (with, without) = (run(Some(spec)), run(None));
    outcome(
        with.ci_low > without.ci_high && boresight == 8.15 && monotone && clamped,
        format!(
            "MC ASE(1e5) antenna {:.3e}±{:.1e} > baseline {:.3e}±{:.1e}; boresight {boresight} dB; tilt monotone {monotone}, clamped to 90 {clamped}",
            with.mean, with.ci_half_width, without.mean, without.ci_half_width
        ),
    )
}

fn case2_approximation() -> Outcome {
    let exact = analysis(ModelSpec::case2(), 8.5);
    let approx = analysis(ModelSpec::approx_case2(), 8.5);
    let lambdas = grid(10.0, 1e4, 10);
    let a: Vec<f64> = lambdas.iter().map(|&l| ase(&exact, l)).collect();
    let mut worst: (f64, f64) = (0.0, 0.0);
    for (&l, &e) in lambdas.iter().zip(&a) {
        if (1e2..=1e4).contains(&l) {
            let rel = (ase(&approx, l) - e).abs() / e;
            if rel > worst.0 {
                worst = (rel, l);
            }
        }
    }
    let d = classify_curve(&lambdas, &a, &RegimeThresholds::default()).expect("sweep classifies");
    let crawl_ok = overlaps(d.crawl_interval, CASE2_CRAWL_WINDOW);
    outcome(
        worst.0 <= CASE2_REL && crawl_ok,
        format!(
            "sup rel ASE gap {:.3} at λ={} ≤ {CASE2_REL}; crawl {:?} overlaps {CASE2_CRAWL_WINDOW:?}: {crawl_ok}",
            worst.0, worst.1, d.crawl_interval
        ),
    )
}

fn closed_form_anchors() -> Outcome {
    let sir = pairwise_sir(0.3, 10.0, 0.0, 2.0);
    let limit = pairwise_sir(1e-9, 8.0, 0.0085, 2.09);
    let k = kappa_bound(0.8, 1.0, 8.0);
    let k_rel = (k / (-25.2f64).exp() - 1.0).abs();
    let ok = [
        (sir / 100.0 - 1.0).abs() <= SIR_EXACT_REL,
        (limit - 1.0).abs() <= SIR_LIMIT_ABS,
        k_rel <= KAPPA_REL,
    ];
    outcome(
        ok.iter().all(|&b| b),
        format!("SIR(τ=10,α=2,L=0)={sir}; SIR(r→0,L=8.5 m)={limit:.9}; κ(0.8,1,8) rel err {k_rel:.2e} ≤ {KAPPA_REL}: {}", ok[2]),
    )
}

fn distance_approximation() -> Outcome {
    let l = 0.0085;
    let n = 1_000_000;
    let (mut worst, mut at, mut lower_bound) = (0.0f64, 0.0, true);
    for i in 0..=n {
        let r = i as f64 / n as f64;
        let (w, wt) = (distance_3d(r, l), approx_distance(r, l));
        lower_bound &= wt <= w + 1e-15;
        let err = (w - wt).abs() * 1000.0;
        if err > worst {
            worst = err;
            at = r * 1000.0;
        }
    }
    outcome(
        worst <= APPROX_MAX_ERR_M && lower_bound,
        format!("max |w-w~| = {worst:.4} m at r = {at:.2} m (≤ {APPROX_MAX_ERR_M}); lower bound {lower_bound}"),
    )
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

fn property_suites() -> Outcome {
    let combos = [
        (ModelSpec::case1(), 1e2, 8.5),
        (ModelSpec::case1(), 1e4, 8.5),
        (ModelSpec::case1(), 1e3, 0.0),
        (ModelSpec::case2(), 1e3, 8.5),
        (ModelSpec::approx_case2(), 1e3, 8.5),
        (ModelSpec::single_slope(), 1e3, 8.5),
    ];
    let mut worst_mass = 0.0f64;
    for (spec, lambda, l_m) in combos {
        let cfg = analysis(spec, l_m);
        let total: f64 = (0..cfg.model.segment_count())
            .flat_map(|n| [PathType::Los, PathType::Nlos].map(|p| (n, p)))
            .map(|(n, p)| association_mass(&cfg, lambda, n, p).expect("mass evaluates"))
            .sum();
        worst_mass = worst_mass.max((total - 1.0).abs());
    }

    let base = analysis(ModelSpec::case1(), 8.5);
    let ray = base.clone().with_fading(FadingModel::rayleigh());
    let k0 = base.with_fading(FadingModel::rician_los(0.0).expect("valid K"));
    let mut worst_k0 = 0.0f64;
    for lambda in [1e2, 1e3, 1e4] {
        for r in [0.01, 0.05, 0.15] {
            for gamma in [0.1, 1.0, 10.0] {
                let a = conditional_coverage_rayleigh(&ray, lambda, r, gamma, 0, PathType::Los)
                    .expect("evaluates");
                let b = conditional_coverage_rician(&k0, lambda, r, gamma, 0, PathType::Los)
                    .expect("evaluates");
                worst_k0 = worst_k0.max((a - b).abs());
            }
        }
    }

    let mut worst_norm = 0.0f64;
    let mut worst_mean = 0.0f64;
    let fadings = [
        Fading::Rayleigh,
        Fading::rician(0.0).unwrap(),
        Fading::rician(1.0).unwrap(),
        Fading::rician(10.0).unwrap(),
        Fading::rician(100.0).unwrap(),
    ];
    for f in fadings {
        let pdf = |x: f64| f.pdf(x).expect("pdf evaluates");
        let norm = simpson(pdf, 0.0, 60.0, 600_000);
        let mean = simpson(|x| x * pdf(x), 0.0, 60.0, 600_000);
        worst_norm = worst_norm.max((norm - 1.0).abs());
        worst_mean = worst_mean.max((mean - 1.0).abs());
    }
    outcome(
        worst_mass <= MASS_ABS && worst_k0 <= K0_ABS && worst_norm <= PDF_NORM_ABS && worst_mean <= PDF_MEAN_ABS,
        format!(
            "association mass err {worst_mass:.1e}≤{MASS_ABS}; K=0 vs Rayleigh {worst_k0:.1e}≤{K0_ABS}; pdf norm err {worst_norm:.1e}≤{PDF_NORM_ABS}, mean err {worst_mean:.1e}≤{PDF_MEAN_ABS}"
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("ASE anchor points", ase_anchors),
        (
            "analytic and Monte Carlo coverage agree",
            analytic_mc_agreement,
        ),
        (
            "ASE crashes at high density with L > 0",
            crash_at_high_density,
        ),
        ("no crash when L = 0", no_crash_without_height),
        (
            "single-slope coverage is density invariant",
            density_invariance,
        ),
        ("larger L crashes earlier", height_ordering),
        (
            "Rician fading brings the crash forward",
            rician_brings_crash_forward,
        ),
        ("antenna downtilt delays the crash", antenna_delays_crash),
        ("Case 2 approximation tracks Case 2", case2_approximation),
        ("closed-form anchors", closed_form_anchors),
        ("piecewise distance approximation", distance_approximation),
        ("property suites", property_suites),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut failed = 0;
    let mut run = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let t = Instant::now();
        let o = check();
        run += 1;
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {id:>2}. {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {}/{run} criteria passed", run - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
