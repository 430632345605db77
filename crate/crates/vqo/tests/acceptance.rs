//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Statistical checks run on pinned seeds so outcomes are reproducible.
//! Criterion 7's monotone-gap clause is asserted as stated even though the
//! one-point zeroth-order method cannot reach the target precision at desk
//! scale (see the failure message for the measured evidence).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use vqo::ansatz::Ansatz;
use vqo::experiment::{
    fit_powerlaw, run_convergence, run_identification, run_separation, to_csv, ExperimentConfig,
};
use vqo::gradient::{
    estimate_grad_l2, EstimatorKind, GradientSample, GradientSource, OracleGradient,
};
use vqo::optimize::{
    sgd_fixed, sgd_strongly_convex, smd_l1, smd_strongly_convex, FeasibleSet, Method,
    MirrorSetup, SgdConfig, SgdScConfig, SmdConfig, SmdScConfig,
};
use vqo::oracle::{GammaTable, SamplingOracle};
use vqo::pauli::{ObservableSum, Pauli, PauliString};
use vqo::toy::{
    self, bias_parameter, build_instance, build_toy_ansatz, closed_form_gradient,
    closed_form_objective, coinflip_query, gv_packing, packing_target, semimetric,
    suboptimality,
};

const PASS: &str = "[PASS]";

fn random_letters(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    loop {
        let letters: Vec<Pauli> = (0..n)
            .map(|_| match rng.gen_range(0..4) {
                0 => Pauli::I,
                1 => Pauli::X,
                2 => Pauli::Y,
                _ => Pauli::Z,
            })
            .collect();
        let s = PauliString::from_letters(&letters);
        if !s.support().is_empty() {
            return if rng.gen_bool(0.5) { s.negated() } else { s };
        }
    }
}

fn random_system(n: usize, p: usize, m: usize, rng: &mut ChaCha8Rng) -> (Ansatz, ObservableSum) {
    let pulses: Vec<ObservableSum> = (0..p)
        .map(|_| {
            let k = rng.gen_range(1..=2);
            let terms: Vec<(f64, PauliString)> = (0..k)
                .map(|_| (rng.gen_range(0.2..1.2), random_letters(n, rng)))
                .collect();
            ObservableSum::new(n, terms).unwrap()
        })
        .collect();
    let start: String = (0..n).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect();
    let ansatz = Ansatz::new(n, &start, pulses).unwrap();
    let terms: Vec<(f64, PauliString)> = (0..m)
        .map(|_| (rng.gen_range(0.1..1.0), random_letters(n, rng)))
        .collect();
    (ansatz, ObservableSum::new(n, terms).unwrap())
}

/// Criterion 1: oracle sample means match exact query means at orders
/// 0, 1, 2 within 4C/√M for 20 random systems (runtime-capped).
#[test]
fn acceptance_01_oracle_exactness() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let samples = 100_000u64;
    for trial in 0..20 {
        let n = rng.gen_range(2..=8);
        let p = rng.gen_range(2..=4);
        let m = rng.gen_range(1..=4);
        let (ansatz, h) = random_system(n, p, m, &mut rng);
        let theta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.2..1.2)).collect();
        let mut oracle = SamplingOracle::new(h.clone(), 0x5EED + trial);
        let coord_sets: [Vec<usize>; 3] = [
            vec![],
            vec![rng.gen_range(0..p)],
            vec![rng.gen_range(0..p), rng.gen_range(0..p)],
        ];
        for coords in &coord_sets {
            let exact = ansatz.exact_query_mean(&h, &theta, coords).unwrap();
            let mut sum = 0.0;
            let mut magnitude: f64 = 0.0;
            for _ in 0..samples {
                let v = oracle.query(&ansatz, &theta, coords).unwrap();
                magnitude = magnitude.max(v.abs());
                sum += v;
            }
            let mean = sum / samples as f64;
            let tol = 4.0 * magnitude.max(1e-12) / (samples as f64).sqrt();
            assert!(
                (mean - exact).abs() <= tol,
                "trial {trial} order {}: mean {mean} vs exact {exact} (tol {tol})",
                coords.len()
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "runtime {elapsed:?} exceeds 60 s");
    println!("{PASS} criterion 1: oracle exactness at orders 0/1/2 ({elapsed:?})");
}

/// Criterion 2: toy closed forms match statevector expectations (1e-10)
/// and exact query means (1e-8) over 100 random points.
#[test]
fn acceptance_02_toy_cross_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    for &n in &[4usize, 8] {
        let eps = 0.01 * n as f64 * rng.gen_range(0.5..1.0);
        let seed = rng.gen();
        let (inst, obs) = toy::random_instance(n, eps, seed).unwrap();
        let ansatz = build_toy_ansatz(n);
        for _ in 0..50 {
            let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let state = ansatz.prepare(&theta).unwrap();
            let cf = closed_form_objective(&inst, &theta);
            assert!((state.expectation(&obs).unwrap() - cf).abs() <= 1e-10);
            assert!((ansatz.exact_query_mean(&obs, &theta, &[]).unwrap() - cf).abs() <= 1e-10);
            let grad = closed_form_gradient(&inst, &theta);
            for j in 0..n {
                let exact = ansatz.exact_query_mean(&obs, &theta, &[j]).unwrap();
                assert!((exact - grad[j]).abs() <= 1e-8, "n={n} j={j}");
            }
        }
    }
    println!("{PASS} criterion 2: closed forms match statevector and query means");
}

/// Criterion 3: the importance table is exactly flat on the toy family.
#[test]
fn acceptance_03_gamma_exactness() {
    for (n, eps, seed) in [(4usize, 0.04, 1u64), (8, 0.05, 2), (12, 0.1, 3)] {
        let (inst, obs) = toy::random_instance(n, eps, seed).unwrap();
        let ansatz = build_toy_ansatz(n);
        let table = GammaTable::build(&ansatz, &obs).unwrap();
        let expected = std::f64::consts::SQRT_2 * inst.delta.cos();
        for j in 0..n {
            assert!(
                (table.gamma(j) - expected).abs() <= 1e-12,
                "n={n} j={j}: {} vs {expected}",
                table.gamma(j)
            );
        }
    }
    println!("{PASS} criterion 3: toy gamma weights equal sqrt(2)cos(delta) to 1e-12");
}

/// Criterion 4: semimetric closed form matches the per-qubit brute-force
/// minimum-eigenvalue computation on all packing pairs; packing invariants.
#[test]
fn acceptance_04_semimetric_and_packing() {
    for n in [8usize, 16] {
        let packing = gv_packing(n, 0xBEEF).unwrap();
        assert!(packing.len() >= packing_target(n), "size at n={n}");
        assert!(packing.min_distance >= (n + 3) / 4, "distance at n={n}");
        let eps = 0.01 * n as f64;
        let delta = bias_parameter(n, eps);
        assert!(packing.beta(delta) >= n as f64 * delta * delta / 5.0);
        for i in 0..packing.len() {
            for j in i + 1..packing.len() {
                let v = &packing.vectors[i];
                let w = &packing.vectors[j];
                let formula = semimetric(v, w, delta).unwrap();
                // 1-local sum: minimum eigenvalue is the sum of per-qubit
                // 2x2 minimum eigenvalues -(sx² + sz²)^½.
                let mut brute = 2.0 * n as f64;
                for q in 0..n {
                    let av = std::f64::consts::FRAC_PI_4 + v[q] as f64 * delta;
                    let aw = std::f64::consts::FRAC_PI_4 + w[q] as f64 * delta;
                    let sx = av.sin() + aw.sin();
                    let sz = av.cos() + aw.cos();
                    brute -= (sx * sx + sz * sz).sqrt();
                }
                assert!((formula - brute).abs() <= 1e-10, "pair ({i},{j}) at n={n}");
            }
        }
    }
    println!("{PASS} criterion 4: semimetric matches brute force; packing invariants hold");
}

/// Criterion 5: strongly convex SGD at its prescribed budget reaches the
/// target precision in the mean over 50 seeds (runtime-capped).
#[test]
fn acceptance_05_sgd_sc_budget() {
    let started = std::time::Instant::now();
    let cfg = ExperimentConfig {
        methods: vec![Method::SgdSc],
        qubit_counts: vec![8],
        epsilons: vec![0.05],
        seed_count: 50,
        base_seed: 0xACC5,
        ..ExperimentConfig::default()
    };
    let records = run_convergence(&cfg).unwrap();
    assert_eq!(records.len(), 50);
    let budget = records[0].queries_total;
    let mean: f64 = records.iter().map(|r| r.final_error).sum::<f64>() / records.len() as f64;
    // Budget column equals the prescribed formula for every row.
    let (inst, _, _, table, set) = vqo::experiment::toy_problem(0xACC5, 8, 0.05, 0).unwrap();
    let formula = vqo::experiment::prescribed_query_budget(
        Method::SgdSc,
        &inst,
        &table,
        &set,
        0.05,
        1.0,
    );
    assert_eq!(budget, formula, "budget column vs formula");
    assert!(
        mean <= 0.05,
        "mean final error {mean} exceeds 0.05 at budget {budget}"
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 300, "runtime {elapsed:?} exceeds 5 min");
    println!(
        "{PASS} criterion 5: sgd-sc budget {budget} gives mean error {mean:.4} <= 0.05 ({elapsed:?})"
    );
}

/// Criterion 6: first-order queries-to-target grows linearly in n at fixed
/// bias (slope 1.0 ± 0.5, r² ≥ 0.9).
#[test]
fn acceptance_06_first_order_scaling() {
    let mut points = Vec::new();
    for &n in &[4usize, 8, 16] {
        let eps = 0.01 * n as f64;
        let cfg = ExperimentConfig {
            methods: vec![Method::SgdSc],
            qubit_counts: vec![n],
            epsilons: vec![eps],
            seed_count: 8,
            base_seed: 0xACC6,
            budget_floor: 64,
            budget_ceiling: 1 << 22,
            ..ExperimentConfig::default()
        };
        let (_, summaries) = run_separation(&cfg).unwrap();
        let q = summaries[0]
            .queries_to_target
            .expect("sgd-sc must converge within the ceiling");
        points.push((n as f64, q as f64));
    }
    let (slope, r2) = fit_powerlaw(&points).unwrap();
    assert!(
        (slope - 1.0).abs() <= 0.5,
        "slope {slope} outside 1.0 ± 0.5 (points {points:?})"
    );
    assert!(r2 >= 0.9, "r² {r2} below 0.9 (points {points:?})");
    println!(
        "{PASS} criterion 6: queries-to-target vs n fits slope {slope:.3} (r² {r2:.3}) {points:?}"
    );
}

/// Criterion 7: separation proxy. The zeroth-order arm must need at least
/// 5x the first-order budget at n = 8 (certified even when censored), and
/// the recorded zo/sgd ratio must grow from n = 8 to n = 16.
#[test]
fn acceptance_07_separation_proxy() {
    let ceiling = 1u64 << 22;
    let cfg = ExperimentConfig {
        methods: vec![Method::SgdSc, Method::Zo],
        qubit_counts: vec![8, 16],
        epsilons: vec![0.05],
        seeds: Some(vec![0, 1, 2]),
        base_seed: 0xACC7,
        budget_floor: 64,
        budget_ceiling: ceiling,
        ..ExperimentConfig::default()
    };
    let (records, summaries) = run_separation(&cfg).unwrap();
    let lookup = |method: Method, n: usize| -> (u64, bool) {
        let s = summaries
            .iter()
            .find(|s| s.method == method && s.n == n)
            .expect("arm present");
        (s.queries_to_target.unwrap_or(ceiling), s.censored)
    };
    let (sgd8, sgd8_censored) = lookup(Method::SgdSc, 8);
    let (sgd16, sgd16_censored) = lookup(Method::SgdSc, 16);
    let (zo8, zo8_censored) = lookup(Method::Zo, 8);
    let (zo16, zo16_censored) = lookup(Method::Zo, 16);
    assert!(!sgd8_censored && !sgd16_censored, "sgd-sc arms must converge");

    // Clause 1: censoring still certifies the factor (true zo cost only
    // exceeds the recorded ceiling).
    assert!(
        zo8 >= 5 * sgd8,
        "zo({zo8}) is not >= 5x sgd-sc({sgd8}) at n = 8"
    );
    let mean_zo8: f64 = records
        .iter()
        .filter(|r| r.method == Method::Zo && r.n == 8)
        .map(|r| r.final_error)
        .sum::<f64>()
        / 3.0;
    let ratio8 = zo8 as f64 / sgd8 as f64;
    let ratio16 = zo16 as f64 / sgd16 as f64;
    println!(
        "criterion 7 evidence: sgd-sc queries-to-target = {sgd8} (n=8) / {sgd16} (n=16); \
         zo = {zo8}{} (n=8, mean error {mean_zo8:.3} at ceiling) / {zo16}{} (n=16); \
         ratios {ratio8:.1} -> {ratio16:.1}",
        if zo8_censored { " (censored)" } else { "" },
        if zo16_censored { " (censored)" } else { "" },
    );

    // Clause 2 as stated: the ratio must be larger at n = 16 than at n = 8.
    assert!(
        ratio16 > ratio8,
        "monotone-gap clause failed: recorded ratio at n=16 ({ratio16:.1}) does not exceed \
         n=8 ({ratio8:.1}). Both zo arms are censored at the ceiling {ceiling}: under the \
         pinned one-point schedule the zeroth-order error decays as T^(-1/4) on this family \
         (optimum on the feasible boundary), so reaching 0.05 needs ~1e10 queries at n = 8 \
         and more at n = 16; equal ceilings therefore make the recorded ratio shrink with n. \
         The 5x clause above is certified because censoring only understates the true gap."
    );
    println!("{PASS} criterion 7: separation proxy with monotone ratio");
}

/// Criterion 8: mini-batch gradient estimator meets its ∞-norm second
/// moment bound at the optimum.
#[test]
fn acceptance_08_minibatch_variance_bound() {
    let n = 8;
    let eps = 0.05;
    let (inst, obs) = toy::random_instance(n, eps, 0xACC8).unwrap();
    let ansatz = build_toy_ansatz(n);
    let table = GammaTable::build(&ansatz, &obs).unwrap();
    let theta = inst.optimum();
    // Precondition of the bound holds at the optimum: ‖∇f‖∞ = 0.
    let grad_inf = closed_form_gradient(&inst, &theta)
        .iter()
        .fold(0.0f64, |a, g| a.max(g.abs()));
    assert!(grad_inf <= table.l2_norm() / (2.0 * n as f64).sqrt());
    let mut oracle = SamplingOracle::new(obs, 0xACC8);
    let calls = 10_000;
    let mut acc = 0.0;
    for _ in 0..calls {
        let g = estimate_grad_l2(&mut oracle, &ansatz, &table, &theta).unwrap();
        let inf = g.vector.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        acc += inf * inf;
    }
    let measured = acc / calls as f64;
    let bound = 5.0 * table.l2_norm().powi(2) / (2.0 * n as f64);
    assert!(measured <= bound, "E‖g‖∞² = {measured} exceeds {bound}");
    println!("{PASS} criterion 8: E‖g‖∞² = {measured:.3} <= {bound:.3} at the optimum");
}

/// Criterion 9: the coin-flip oracle view is distributionally identical to
/// the generic zeroth-order query (chi-square, p > 0.01, 5 random points).
#[test]
fn acceptance_09_coinflip_equivalence() {
    let n = 8;
    let eps = 0.05;
    let (inst, obs) = toy::random_instance(n, eps, 0xACC9).unwrap();
    let ansatz = build_toy_ansatz(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC9);
    let chi = ChiSquared::new(1.0).unwrap();
    let m = 100_000u64;
    for point in 0..5 {
        let theta: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-inst.delta..inst.delta))
            .collect();
        let mut coin_stream = ChaCha8Rng::seed_from_u64(0xC01 + point);
        let mut coin_plus = 0u64;
        for _ in 0..m {
            if coinflip_query(&inst, &ansatz, &theta, &mut coin_stream).unwrap() > 0.0 {
                coin_plus += 1;
            }
        }
        let mut oracle = SamplingOracle::new(obs.clone(), 0x0AC + point);
        let mut generic_plus = 0u64;
        for _ in 0..m {
            if oracle.query(&ansatz, &theta, &[]).unwrap() > 0.0 {
                generic_plus += 1;
            }
        }
        // Two-sample homogeneity chi-square over the ±E outcomes (df = 1).
        let (a, b) = (coin_plus as f64, (m - coin_plus) as f64);
        let (c, d) = (generic_plus as f64, (m - generic_plus) as f64);
        let total = 2.0 * m as f64;
        let stat = total * (a * d - b * c).powi(2) / ((a + b) * (c + d) * (a + c) * (b + d));
        let p_value = 1.0 - chi.cdf(stat);
        assert!(
            p_value > 0.01,
            "point {point}: chi² = {stat:.3}, p = {p_value:.4}"
        );
    }
    println!("{PASS} criterion 9: coin-flip and generic oracle outcomes are indistinguishable");
}

/// Criterion 10: optimize-to-β/9 then identify succeeds on at least 2/3 of
/// 100 seeds at n = 16.
#[test]
fn acceptance_10_identification() {
    let cfg = ExperimentConfig {
        methods: vec![Method::SgdSc],
        qubit_counts: vec![16],
        epsilons: vec![0.16],
        seed_count: 100,
        base_seed: 0xACCA,
        packing_seed: 0xBEEF,
        ..ExperimentConfig::default()
    };
    let report = run_identification(&cfg).unwrap();
    assert!(!report.vacuous_warning, "target must stay within beta/9");
    assert!(
        report.success_fraction >= 2.0 / 3.0,
        "identification succeeded on only {:.3}",
        report.success_fraction
    );
    println!(
        "{PASS} criterion 10: identification success {:.3} over 100 seeds (packing size {}, beta {:.4})",
        report.success_fraction, report.packing_size, report.beta
    );
}

/// Records the ∞-norm second moments seen by a gradient source.
struct MomentProbe<'a> {
    inner: OracleGradient<'a>,
    sum_inf_sq: f64,
    sum_l2_sq: f64,
    calls: u64,
}

impl GradientSource for MomentProbe<'_> {
    fn sample(&mut self, theta: &[f64]) -> vqo::Result<GradientSample> {
        let g = self.inner.sample(theta)?;
        let inf = g.vector.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let l2: f64 = g.vector.iter().map(|x| x * x).sum();
        self.sum_inf_sq += inf * inf;
        self.sum_l2_sq += l2;
        self.calls += 1;
        Ok(g)
    }

    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
}

/// Criterion 11: theorem-bound conformance for the four descent methods on
/// the toy family and a synthetic quadratic, plus the mirror-map round
/// trip and the strong-convexity ordering.
#[test]
fn acceptance_11_descent_suite() {
    let n = 8;
    let eps = 0.05;
    let seeds = 50u64;

    // --- Plain SGD on the toy: E f(avg) - f* <= R2 G2 sqrt(2/T).
    let t_sgd = 4000u64;
    let mut errs = Vec::new();
    let mut g2_measured: f64 = 0.0;
    for seed in 0..seeds {
        let (inst, obs) = toy::random_instance(n, eps, 0xD00 + seed).unwrap();
        let ansatz = build_toy_ansatz(n);
        let table = GammaTable::build(&ansatz, &obs).unwrap();
        let set = FeasibleSet::inf_box(vec![0.0; n], inst.delta).unwrap();
        let mut oracle = SamplingOracle::new(obs, 0xE00 + seed);
        let mut probe = MomentProbe {
            inner: OracleGradient::new(
                &mut oracle,
                &ansatz,
                &table,
                EstimatorKind::OneQueryL1,
                ChaCha8Rng::seed_from_u64(0xF00 + seed),
            ),
            sum_inf_sq: 0.0,
            sum_l2_sq: 0.0,
            calls: 0,
        };
        let trace = sgd_fixed(
            &mut probe,
            &set,
            &vec![0.0; n],
            &SgdConfig {
                iterations: t_sgd,
                grad_norm_bound: table.l1_norm(),
                radius: None,
                record_iterates: false,
            },
        )
        .unwrap();
        g2_measured = g2_measured.max((probe.sum_l2_sq / probe.calls as f64).sqrt());
        errs.push(suboptimality(&inst, &trace.output));
        if seed == 0 {
            let bound_check = set.r2() * table.l1_norm() * (2.0 / t_sgd as f64).sqrt();
            assert!(bound_check > 0.0);
        }
    }
    let mean_sgd: f64 = errs.iter().sum::<f64>() / errs.len() as f64;
    let (inst0, obs0) = toy::random_instance(n, eps, 0xD00).unwrap();
    let table0 = GammaTable::build(&build_toy_ansatz(n), &obs0).unwrap();
    let set0 = FeasibleSet::inf_box(vec![0.0; n], inst0.delta).unwrap();
    let sgd_bound = set0.r2() * g2_measured * (2.0 / t_sgd as f64).sqrt();
    assert!(
        mean_sgd <= sgd_bound,
        "plain SGD mean {mean_sgd} exceeds bound {sgd_bound}"
    );

    // --- Strongly convex SGD: E f(weighted avg) - f* <= 2 G2²/(λ2(T+1)).
    let t_sc = 7000u64;
    let mut errs = Vec::new();
    for seed in 0..seeds {
        let (inst, obs) = toy::random_instance(n, eps, 0xD50 + seed).unwrap();
        let ansatz = build_toy_ansatz(n);
        let table = GammaTable::build(&ansatz, &obs).unwrap();
        let set = FeasibleSet::inf_box(vec![0.0; n], inst.delta).unwrap();
        let mut oracle = SamplingOracle::new(obs, 0xE50 + seed);
        let mut source = OracleGradient::new(
            &mut oracle,
            &ansatz,
            &table,
            EstimatorKind::OneQueryL1,
            ChaCha8Rng::seed_from_u64(0xF50 + seed),
        );
        let trace = sgd_strongly_convex(
            &mut source,
            &set,
            &vec![0.0; n],
            &SgdScConfig {
                iterations: t_sc,
                lambda2: inst.lambda2(),
                record_iterates: false,
            },
        )
        .unwrap();
        errs.push(suboptimality(&inst, &trace.output));
    }
    let mean_sc: f64 = errs.iter().sum::<f64>() / errs.len() as f64;
    let g2 = table0.l1_norm(); // ‖g‖2 = ‖Γ‖1 exactly for the one-query estimator
    let sc_bound = 2.0 * g2 * g2 / (inst0.lambda2() * (t_sc as f64 + 1.0));
    assert!(
        mean_sc <= sc_bound,
        "sgd-sc mean {mean_sc} exceeds bound {sc_bound}"
    );

    // --- Plain SMD with the l1 setup: bound R1 G∞ sqrt(2e ln p / T).
    let t_smd = 3000u64;
    let mut errs = Vec::new();
    let mut ginf_sq_acc = 0.0;
    let mut ginf_calls = 0u64;
    for seed in 0..seeds {
        let (inst, obs) = toy::random_instance(n, eps, 0xDA0 + seed).unwrap();
        let ansatz = build_toy_ansatz(n);
        let table = GammaTable::build(&ansatz, &obs).unwrap();
        let set = FeasibleSet::inf_box(vec![0.0; n], inst.delta).unwrap();
        let g_inf_prior = (5.0 * table.l2_norm().powi(2) / (2.0 * n as f64)).sqrt();
        let mut oracle = SamplingOracle::new(obs, 0xEA0 + seed);
        let mut probe = MomentProbe {
            inner: OracleGradient::new(
                &mut oracle,
                &ansatz,
                &table,
                EstimatorKind::MiniBatchL2,
                ChaCha8Rng::seed_from_u64(0xFA0 + seed),
            ),
            sum_inf_sq: 0.0,
            sum_l2_sq: 0.0,
            calls: 0,
        };
        let trace = smd_l1(
            &mut probe,
            &set,
            &SmdConfig {
                iterations: t_smd,
                grad_inf_bound: g_inf_prior,
                record_iterates: false,
            },
        )
        .unwrap();
        ginf_sq_acc += probe.sum_inf_sq;
        ginf_calls += probe.calls;
        errs.push(suboptimality(&inst, &trace.output));
    }
    let mean_smd: f64 = errs.iter().sum::<f64>() / errs.len() as f64;
    let ginf_measured = (ginf_sq_acc / ginf_calls as f64).sqrt();
    let smd_bound = set0.r1()
        * ginf_measured
        * (2.0 * std::f64::consts::E * (n as f64).ln() / t_smd as f64).sqrt();
    assert!(
        mean_smd <= smd_bound,
        "smd mean {mean_smd} exceeds bound {smd_bound}"
    );

    // --- Strongly convex SMD: bound 16 G∞²/(λ1 T).
    let t_smd_sc = 20_000u64;
    let mut errs = Vec::new();
    for seed in 0..seeds {
        let (inst, obs) = toy::random_instance(n, eps, 0xDB0 + seed).unwrap();
        let ansatz = build_toy_ansatz(n);
        let table = GammaTable::build(&ansatz, &obs).unwrap();
        let set = FeasibleSet::inf_box(vec![0.0; n], inst.delta).unwrap();
        let g_inf = (5.0 * table.l2_norm().powi(2) / (2.0 * n as f64)).sqrt();
        let mut oracle = SamplingOracle::new(obs, 0xEB0 + seed);
        let mut source = OracleGradient::new(
            &mut oracle,
            &ansatz,
            &table,
            EstimatorKind::MiniBatchL2,
            ChaCha8Rng::seed_from_u64(0xFB0 + seed),
        );
        let trace = smd_strongly_convex(
            &mut source,
            &set,
            &SmdScConfig {
                iterations: t_smd_sc,
                epoch0_iterations: (t_smd_sc / 15).max(64),
                grad_inf_bound: g_inf,
                initial_radius: None,
                record_iterates: false,
            },
        )
        .unwrap();
        errs.push(suboptimality(&inst, &trace.output));
    }
    let mean_smd_sc: f64 = errs.iter().sum::<f64>() / errs.len() as f64;
    let ginf_sq0 = 5.0 * table0.l2_norm().powi(2) / (2.0 * n as f64);
    let smd_sc_bound = 16.0 * ginf_sq0 / (inst0.lambda1() * t_smd_sc as f64);
    assert!(
        mean_smd_sc <= smd_sc_bound,
        "smd-sc mean {mean_smd_sc} exceeds bound {smd_sc_bound}"
    );

    // --- Synthetic strongly convex quadratic with exact gradients: the
    // strongly convex SGD bound holds at every checkpoint.
    let lambda = 0.7;
    let quad_set = FeasibleSet::euclidean_ball(vec![0.0; 4], 2.0).unwrap();
    let g2_quad = lambda * quad_set.r2();
    for t in [64u64, 256, 1024] {
        let mut src = vqo::gradient::ExactGradient {
            gradient: |x: &[f64]| x.iter().map(|v| lambda * v).collect(),
            dimension: 4,
        };
        let trace = sgd_strongly_convex(
            &mut src,
            &quad_set,
            &[2.0, 0.0, 0.0, 0.0],
            &SgdScConfig {
                iterations: t,
                lambda2: lambda,
                record_iterates: false,
            },
        )
        .unwrap();
        let f = 0.5 * lambda * trace.output.iter().map(|v| v * v).sum::<f64>();
        let bound = 2.0 * g2_quad * g2_quad / (lambda * (t as f64 + 1.0));
        assert!(f <= bound, "quadratic checkpoint T={t}: {f} > {bound}");
    }

    // --- Mirror-map round trip and strong-convexity ordering.
    let setup = MirrorSetup::new(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCB);
    for _ in 0..100 {
        let x: Vec<f64> = (0..n)
            .map(|i| if i == 3 { 0.0 } else { rng.gen_range(-2.0..2.0) })
            .collect();
        let back = setup.grad_inv(&setup.grad(&x));
        for (a, b) in x.iter().zip(back.iter()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
    // λ1 ≤ λ2 ≤ p λ1 on the toy Hessian, estimated over random directions.
    let lambda2 = inst0.lambda2();
    let lambda1 = inst0.lambda1();
    assert!(lambda1 <= lambda2 + 1e-15);
    assert!(lambda2 <= n as f64 * lambda1 + 1e-12);
    for _ in 0..2000 {
        let theta: Vec<f64> = (0..n)
            .map(|_| rng.gen_range(-inst0.delta..inst0.delta))
            .collect();
        let hess = toy::closed_form_hessian_diag(&inst0, &theta);
        let h: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let quad: f64 = hess.iter().zip(&h).map(|(hi, v)| hi * v * v).sum();
        let l1: f64 = h.iter().map(|v| v.abs()).sum();
        let l2: f64 = h.iter().map(|v| v * v).sum::<f64>();
        assert!(quad >= lambda1 * l1 * l1 - 1e-12);
        assert!(quad >= lambda2 * l2 - 1e-12);
    }

    println!(
        "{PASS} criterion 11: bounds met (sgd {mean_sgd:.3}<={sgd_bound:.3}, sgd-sc {mean_sc:.4}<={sc_bound:.4}, \
         smd {mean_smd:.3}<={smd_bound:.3}, smd-sc {mean_smd_sc:.3}<={smd_sc_bound:.3}); round trip and ordering hold"
    );
}

/// Criterion 12: identical configuration and seed reproduce byte-identical
/// CSV output across all runners.
#[test]
fn acceptance_12_determinism() {
    let cfg = ExperimentConfig {
        methods: vec![Method::SgdSc, Method::Zo],
        qubit_counts: vec![6],
        epsilons: vec![0.05],
        seeds: Some(vec![0, 1, 2]),
        iterations: Some(2000),
        base_seed: 0xACCC,
        ..ExperimentConfig::default()
    };
    let a = to_csv(&run_convergence(&cfg).unwrap());
    let b = to_csv(&run_convergence(&cfg).unwrap());
    assert_eq!(a, b, "convergence CSV must be byte-identical");

    let sep_cfg = ExperimentConfig {
        budget_floor: 64,
        budget_ceiling: 4096,
        iterations: None,
        ..cfg.clone()
    };
    let (ra, _) = run_separation(&sep_cfg).unwrap();
    let (rb, _) = run_separation(&sep_cfg).unwrap();
    assert_eq!(to_csv(&ra), to_csv(&rb), "separation CSV must be byte-identical");

    let id_cfg = ExperimentConfig {
        methods: vec![Method::SgdSc],
        qubit_counts: vec![8],
        epsilons: vec![0.08],
        seeds: Some(vec![0, 1, 2, 3]),
        base_seed: 0xACCC,
        packing_seed: 7,
        ..ExperimentConfig::default()
    };
    let ia = run_identification(&id_cfg).unwrap();
    let ib = run_identification(&id_cfg).unwrap();
    assert_eq!(to_csv(&ia.records), to_csv(&ib.records));
    assert_eq!(ia.successes, ib.successes);

    println!("{PASS} criterion 12: re-runs reproduce byte-identical CSV");
}
