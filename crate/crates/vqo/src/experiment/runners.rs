//! Experiment drivers: convergence runs, separation sweeps, identification.
//!
//! Every run builds a fresh toy instance (sign vector drawn from the run's
//! seed), its product ansatz and importance table, and wires the requested
//! optimizer to the sampling oracle over the bias box. Budgets come from
//! the measured table norms, never hand-entered constants. Workers own
//! their oracles and streams; records are merged in a deterministic order.

use rayon::prelude::*;

use crate::ansatz::Ansatz;
use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::records::{sort_records, ExperimentRecord};
use crate::gradient::{
    l2_query_budget, EstimatorKind, OracleGradient, OracleValue,
};
use crate::optimize::{
    sgd_fixed, sgd_strongly_convex, smd_l1, smd_strongly_convex, zo_spherical, FeasibleSet,
    Method, SgdConfig, SgdScConfig, SmdConfig, SmdScConfig, ZoConfig,
};
use crate::oracle::{GammaTable, SamplingOracle};
use crate::pauli::ObservableSum;
use crate::rng;
use crate::toy::{
    self, bias_parameter, build_toy_ansatz, suboptimality, PackingSet, ToyInstance,
};

const TAG_INSTANCE: u64 = 1;
const TAG_ORACLE: u64 = 2;
const TAG_SELECTOR: u64 = 3;
const TAG_SPHERE: u64 = 4;
const TAG_TRUTH: u64 = 5;

/// One optimizer run on one toy instance.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub method: Method,
    pub n: usize,
    pub eps: f64,
    pub seed: u64,
    /// Total oracle-query budget for the run.
    pub query_budget: u64,
}

/// Run outcome: the record plus the output parameter and instance, for
/// downstream identification.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: ExperimentRecord,
    pub theta: Vec<f64>,
    pub instance: ToyInstance,
}

/// Default one-point smoothing/step scales from measured quantities.
///
/// The smoothing radius trades the one-point variance `p²E²/(2λ₂ δ_s² T)`
/// against the biases that grow with `δ_s`: the smoothing bias itself and,
/// for optima on the feasible boundary, the inward shift of the shrunken
/// iterate set — about `((p+1)/2) δ_s²` in total for the bias box. The
/// optimal radius shrinks as `T^{-1/4}` with the constant below. The step
/// constant balances the initialization bias `D₀/(η λ₂ T)` of the uniform
/// average against the projection-clamp bias (≈ `0.3 η · pE²/δ_s²`),
/// which again scales as `T^{-3/4}`. `d0` is the initial suboptimality.
pub fn zo_default_scales(
    set: &FeasibleSet,
    e_norm: f64,
    lambda2: f64,
    d0: f64,
) -> (f64, f64) {
    let p = set.dimension() as f64;
    let bias_coeff = (p + 1.0) / 2.0;
    let noise_coeff = p * p * e_norm * e_norm / (2.0 * lambda2);
    let delta_scale = (noise_coeff / bias_coeff).powf(0.25);
    let clamp_coeff = 0.3;
    let step_scale =
        delta_scale * (d0.max(1e-6) / (clamp_coeff * lambda2 * p)).sqrt() / e_norm;
    (delta_scale, step_scale)
}

/// Oracle queries consumed by one optimizer iteration.
pub fn queries_per_iteration(method: Method, table: &GammaTable) -> u64 {
    match method {
        Method::Sgd | Method::SgdSc | Method::Zo => 1,
        Method::Smd | Method::SmdSc => l2_query_budget(table).max(1),
    }
}

/// Theorem-prescribed query budget to reach expected error `eps`,
/// evaluated with the measured table norms.
pub fn prescribed_query_budget(
    method: Method,
    inst: &ToyInstance,
    table: &GammaTable,
    set: &FeasibleSet,
    eps: f64,
    zo_budget_factor: f64,
) -> u64 {
    let p = set.dimension() as f64;
    match method {
        Method::Sgd => {
            let g2 = table.l1_norm();
            (2.0 * set.r2().powi(2) * g2 * g2 / (eps * eps)).ceil() as u64
        }
        Method::SgdSc => {
            let l1 = table.l1_norm();
            (2.0 * l1 * l1 / (inst.lambda2() * eps)).ceil() as u64
        }
        Method::Smd => {
            let g_inf_sq = 5.0 * table.l2_norm().powi(2) / (2.0 * p);
            let iters = (2.0 * std::f64::consts::E * p.ln() * set.r1().powi(2) * g_inf_sq
                / (eps * eps))
                .ceil() as u64;
            iters.max(1) * queries_per_iteration(method, table)
        }
        Method::SmdSc => {
            let g_inf_sq = 5.0 * table.l2_norm().powi(2) / (2.0 * p);
            let iters = (16.0 * g_inf_sq / (inst.lambda1() * eps)).ceil() as u64;
            iters.max(1) * queries_per_iteration(method, table)
        }
        Method::Zo => {
            let e = table.e_norm();
            (zo_budget_factor * p * p * e * e / (inst.lambda2() * eps * eps)).ceil() as u64
        }
    }
}

/// Build the instance, observable, ansatz, table, and bias-box feasible
/// set for one run seed.
pub fn toy_problem(
    base_seed: u64,
    n: usize,
    eps: f64,
    seed: u64,
) -> Result<(ToyInstance, ObservableSum, Ansatz, GammaTable, FeasibleSet)> {
    let instance_seed = rng::derive_seed(base_seed, &[TAG_INSTANCE, n as u64, eps.to_bits(), seed]);
    let (inst, obs) = toy::random_instance(n, eps, instance_seed)?;
    let ansatz = build_toy_ansatz(n);
    let table = GammaTable::build(&ansatz, &obs)?;
    let set = FeasibleSet::inf_box(vec![0.0; n], inst.delta)?;
    Ok((inst, obs, ansatz, table, set))
}

/// Execute one toy run for a method at a fixed query budget.
pub fn run_toy_method(cfg: &ExperimentConfig, spec: &RunSpec) -> Result<RunOutput> {
    let start_time = std::time::Instant::now();
    let (inst, obs, ansatz, table, set) =
        toy_problem(cfg.base_seed, spec.n, spec.eps, spec.seed)?;
    let run_tags = [
        spec.method as u64,
        spec.n as u64,
        spec.eps.to_bits(),
        spec.seed,
        spec.query_budget,
    ];
    let oracle_seed = rng::derive_seed(cfg.base_seed, &[TAG_ORACLE, run_tags[0], run_tags[1], run_tags[2], run_tags[3], run_tags[4]]);
    let mut oracle = SamplingOracle::new(obs, oracle_seed);
    let per_iter = queries_per_iteration(spec.method, &table);
    let iterations = (spec.query_budget / per_iter).max(1);
    let start = vec![0.0; spec.n];

    let trace = match spec.method {
        Method::Sgd => {
            let mut source = OracleGradient::new(
                &mut oracle,
                &ansatz,
                &table,
                EstimatorKind::OneQueryL1,
                rng::stream(cfg.base_seed, &[TAG_SELECTOR, run_tags[0], run_tags[1], run_tags[2], run_tags[3], run_tags[4]]),
            );
            sgd_fixed(
                &mut source,
                &set,
                &start,
                &SgdConfig {
                    iterations,
                    grad_norm_bound: table.l1_norm(),
                    radius: None,
                    record_iterates: false,
                },
            )?
        }
        Method::SgdSc => {
            let mut source = OracleGradient::new(
                &mut oracle,
                &ansatz,
                &table,
                EstimatorKind::OneQueryL1,
                rng::stream(cfg.base_seed, &[TAG_SELECTOR, run_tags[0], run_tags[1], run_tags[2], run_tags[3], run_tags[4]]),
            );
            sgd_strongly_convex(
                &mut source,
                &set,
                &start,
                &SgdScConfig {
                    iterations,
                    lambda2: inst.lambda2(),
                    record_iterates: false,
                },
            )?
        }
        Method::Smd => {
            let g_inf = (5.0 * table.l2_norm().powi(2) / (2.0 * spec.n as f64)).sqrt();
            let mut source = OracleGradient::new(
                &mut oracle,
                &ansatz,
                &table,
                EstimatorKind::MiniBatchL2,
                rng::stream(cfg.base_seed, &[TAG_SELECTOR, run_tags[0], run_tags[1], run_tags[2], run_tags[3], run_tags[4]]),
            );
            smd_l1(
                &mut source,
                &set,
                &SmdConfig {
                    iterations,
                    grad_inf_bound: g_inf,
                    record_iterates: false,
                },
            )?
        }
        Method::SmdSc => {
            let g_inf = (5.0 * table.l2_norm().powi(2) / (2.0 * spec.n as f64)).sqrt();
            let epoch0 = cfg
                .epoch0_iterations
                .unwrap_or_else(|| (iterations / 15).max(64));
            let mut source = OracleGradient::new(
                &mut oracle,
                &ansatz,
                &table,
                EstimatorKind::MiniBatchL2,
                rng::stream(cfg.base_seed, &[TAG_SELECTOR, run_tags[0], run_tags[1], run_tags[2], run_tags[3], run_tags[4]]),
            );
            smd_strongly_convex(
                &mut source,
                &set,
                &SmdScConfig {
                    iterations,
                    epoch0_iterations: epoch0,
                    grad_inf_bound: g_inf,
                    initial_radius: None,
                    record_iterates: false,
                },
            )?
        }
        Method::Zo => {
            let d0 = suboptimality(&inst, &start);
            let (d_default, s_default) =
                zo_default_scales(&set, table.e_norm(), inst.lambda2(), d0);
            let mut source = OracleValue {
                oracle: &mut oracle,
                ansatz: &ansatz,
            };
            let mut sphere = rng::stream(cfg.base_seed, &[TAG_SPHERE, run_tags[0], run_tags[1], run_tags[2], run_tags[3], run_tags[4]]);
            zo_spherical(
                &mut source,
                &set,
                &ZoConfig {
                    iterations,
                    delta_scale: cfg.zo_delta_scale.unwrap_or(d_default),
                    step_scale: cfg.zo_step_scale.unwrap_or(s_default),
                    record_iterates: false,
                },
                &mut sphere,
            )?
        }
    };

    let final_error = suboptimality(&inst, &trace.output).max(0.0);
    let ledger = oracle.query_count();
    debug_assert_eq!(ledger.total(), trace.queries);
    let wallclock_ms = if cfg.timing {
        start_time.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok(RunOutput {
        record: ExperimentRecord {
            method: spec.method,
            n: spec.n,
            eps: spec.eps,
            seed: spec.seed,
            q0: ledger.by_order(0),
            q1: ledger.by_order(1),
            qk: ledger.higher_order(),
            queries_total: ledger.total(),
            final_error,
            wallclock_ms,
            censored: false,
        },
        theta: trace.output,
        instance: inst,
    })
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Convergence runs: each method at its theorem-prescribed budget.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let seeds = cfg.seed_list();
    let mut jobs = Vec::new();
    for &method in &cfg.methods {
        for &n in &cfg.qubit_counts {
            for &eps in &cfg.epsilons {
                for &seed in &seeds {
                    jobs.push((method, n, eps, seed));
                }
            }
        }
    }
    let outputs: Vec<Result<ExperimentRecord>> = with_pool(cfg.threads, || {
        jobs.par_iter()
            .map(|&(method, n, eps, seed)| {
                let budget = match cfg.iterations {
                    Some(b) => b,
                    None => {
                        let (inst, _, _, table, set) =
                            toy_problem(cfg.base_seed, n, eps, seed)?;
                        prescribed_query_budget(method, &inst, &table, &set, eps, cfg.budget_factor)
                    }
                };
                let spec = RunSpec {
                    method,
                    n,
                    eps,
                    seed,
                    query_budget: budget,
                };
                run_toy_method(cfg, &spec).map(|out| out.record)
            })
            .collect()
    })?;
    let mut records = outputs.into_iter().collect::<Result<Vec<_>>>()?;
    sort_records(&mut records);
    Ok(records)
}

/// Outcome of one separation search arm.
#[derive(Debug, Clone)]
pub struct SearchSummary {
    pub method: Method,
    pub n: usize,
    pub eps: f64,
    /// Smallest grid budget whose mean error reached the target, when found.
    pub queries_to_target: Option<u64>,
    pub censored: bool,
}

/// Queries-to-target search on a factor-2 budget grid.
pub fn run_separation(
    cfg: &ExperimentConfig,
) -> Result<(Vec<ExperimentRecord>, Vec<SearchSummary>)> {
    cfg.validate()?;
    let seeds = cfg.seed_list();
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &method in &cfg.methods {
        for &n in &cfg.qubit_counts {
            for &eps in &cfg.epsilons {
                let mut budget = cfg.budget_floor;
                let (found, last_outputs) = loop {
                    let outputs: Vec<Result<RunOutput>> = with_pool(cfg.threads, || {
                        seeds
                            .par_iter()
                            .map(|&seed| {
                                run_toy_method(
                                    cfg,
                                    &RunSpec {
                                        method,
                                        n,
                                        eps,
                                        seed,
                                        query_budget: budget,
                                    },
                                )
                            })
                            .collect()
                    })?;
                    let outputs = outputs.into_iter().collect::<Result<Vec<_>>>()?;
                    let mean: f64 = outputs
                        .iter()
                        .map(|o| o.record.final_error)
                        .sum::<f64>()
                        / outputs.len() as f64;
                    if mean <= eps {
                        break (Some(budget), outputs);
                    }
                    if budget >= cfg.budget_ceiling {
                        break (None, outputs);
                    }
                    budget = (budget * 2).min(cfg.budget_ceiling);
                };
                let censored = found.is_none();
                for out in last_outputs {
                    let mut record = out.record;
                    record.censored = censored;
                    records.push(record);
                }
                summaries.push(SearchSummary {
                    method,
                    n,
                    eps,
                    queries_to_target: found,
                    censored,
                });
            }
        }
    }
    sort_records(&mut records);
    Ok((records, summaries))
}

/// Identification experiment report.
#[derive(Debug, Clone)]
pub struct IdentificationReport {
    pub records: Vec<ExperimentRecord>,
    pub successes: Vec<bool>,
    pub success_fraction: f64,
    pub packing_size: usize,
    pub beta: f64,
    /// Optimization target used (defaults to β/9).
    pub target_error: f64,
    /// Set when the requested target exceeds β/9, where the packing
    /// guarantee is vacuous.
    pub vacuous_warning: bool,
}

/// Optimize-then-identify over a hypercube packing: per seed, draw the
/// hidden vector from the packing, run strongly convex SGD to the target,
/// and check the argmin identification.
pub fn run_identification(cfg: &ExperimentConfig) -> Result<IdentificationReport> {
    cfg.validate()?;
    let n = cfg.qubit_counts[0];
    let eps = cfg.epsilons[0];
    let packing = toy::gv_packing(n, cfg.packing_seed)?;
    let delta = bias_parameter(n, eps);
    let beta = packing.beta(delta);
    let target = cfg.identify_target.unwrap_or(beta / 9.0);
    let vacuous_warning = target > beta / 9.0 + 1e-12;
    let seeds = cfg.seed_list();

    let results: Vec<Result<(ExperimentRecord, bool)>> = with_pool(cfg.threads, || {
        seeds
            .par_iter()
            .map(|&seed| identification_seed(cfg, &packing, n, eps, target, seed))
            .collect()
    })?;
    let pairs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut records: Vec<ExperimentRecord> = pairs.iter().map(|(r, _)| r.clone()).collect();
    let successes: Vec<bool> = pairs.iter().map(|(_, s)| *s).collect();
    let fraction = successes.iter().filter(|&&s| s).count() as f64 / successes.len() as f64;
    sort_records(&mut records);
    Ok(IdentificationReport {
        records,
        successes,
        success_fraction: fraction,
        packing_size: packing.len(),
        beta,
        target_error: target,
        vacuous_warning,
    })
}

fn identification_seed(
    cfg: &ExperimentConfig,
    packing: &PackingSet,
    n: usize,
    eps: f64,
    target: f64,
    seed: u64,
) -> Result<(ExperimentRecord, bool)> {
    use rand::Rng;
    let start_time = std::time::Instant::now();
    let mut truth_stream = rng::stream(cfg.base_seed, &[TAG_TRUTH, n as u64, eps.to_bits(), seed]);
    let true_index = truth_stream.gen_range(0..packing.len());
    let v = packing.vectors[true_index].clone();
    let (inst, obs) = toy::build_instance(n, eps, &v)?;
    let ansatz = build_toy_ansatz(n);
    let table = GammaTable::build(&ansatz, &obs)?;
    let set = FeasibleSet::inf_box(vec![0.0; n], inst.delta)?;
    let budget = {
        let l1 = table.l1_norm();
        (2.0 * l1 * l1 / (inst.lambda2() * target)).ceil() as u64
    };
    let oracle_seed = rng::derive_seed(cfg.base_seed, &[TAG_ORACLE, n as u64, eps.to_bits(), seed]);
    let mut oracle = SamplingOracle::new(obs, oracle_seed);
    let mut source = OracleGradient::new(
        &mut oracle,
        &ansatz,
        &table,
        EstimatorKind::OneQueryL1,
        rng::stream(cfg.base_seed, &[TAG_SELECTOR, n as u64, eps.to_bits(), seed]),
    );
    let trace = sgd_strongly_convex(
        &mut source,
        &set,
        &vec![0.0; n],
        &SgdScConfig {
            iterations: budget,
            lambda2: inst.lambda2(),
            record_iterates: false,
        },
    )?;
    let outcome = toy::identify_v_from_params(&trace.output, packing, inst.delta)?;
    let success = outcome.index == true_index;
    let ledger = oracle.query_count();
    let wallclock_ms = if cfg.timing {
        start_time.elapsed().as_millis() as u64
    } else {
        0
    };
    Ok((
        ExperimentRecord {
            method: Method::SgdSc,
            n,
            eps,
            seed,
            q0: ledger.by_order(0),
            q1: ledger.by_order(1),
            qk: ledger.higher_order(),
            queries_total: ledger.total(),
            final_error: suboptimality(&inst, &trace.output).max(0.0),
            wallclock_ms,
            censored: false,
        },
        success,
    ))
}
