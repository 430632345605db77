//! Batch experiment CLI.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 numeric failure,
//! 4 censored-only results.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vqo::error::Error;
use vqo::experiment::{
    self, svg::Series, ExperimentConfig, ExperimentRecord, SearchSummary,
};
use vqo::optimize::Method;

#[derive(Parser)]
#[command(
    name = "vqo",
    about = "Query-complexity experiments for variational optimization oracles",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output prefix: writes `<prefix>.csv` (and `<prefix>.svg` with --svg).
    #[arg(long, default_value = "vqo-out")]
    out: String,
    /// Override the configuration's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread count.
    #[arg(long)]
    threads: Option<usize>,
    /// Emit an SVG plot beside the CSV.
    #[arg(long)]
    svg: bool,
    /// Fill wallclock_ms with measured timings (breaks byte-level
    /// reproducibility of the CSV).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run each method at its prescribed budget and record final errors.
    Convergence(CommonArgs),
    /// Search queries-to-target on a factor-2 budget grid per method.
    Separation(CommonArgs),
    /// Optimize, then identify the hidden sign vector over a packing.
    Identify(CommonArgs),
    /// Quick self-checks: exactness, unbiasedness, determinism.
    Selftest(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&ExperimentConfig, &CommonArgs) -> Result<u8, Error>) =
        match &cli.command {
            Command::Convergence(a) => (a, cmd_convergence),
            Command::Separation(a) => (a, cmd_separation),
            Command::Identify(a) => (a, cmd_identify),
            Command::Selftest(a) => (a, cmd_selftest),
        };
    let cfg = match load_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg, args) {
        Ok(code) => ExitCode::from(code),
        Err(Error::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("numeric failure: {e}");
            ExitCode::from(3)
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(threads) = args.threads {
        cfg.threads = Some(threads);
    }
    cfg.svg |= args.svg;
    cfg.timing |= args.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn write_outputs(
    cfg: &ExperimentConfig,
    args: &CommonArgs,
    records: &[ExperimentRecord],
    svg: Option<String>,
) -> Result<(), Error> {
    let csv_path = format!("{}.csv", args.out);
    std::fs::write(&csv_path, experiment::to_csv(records))?;
    eprintln!("wrote {csv_path} ({} rows)", records.len());
    if cfg.svg {
        if let Some(svg) = svg {
            let svg_path = format!("{}.svg", args.out);
            std::fs::write(&svg_path, svg)?;
            eprintln!("wrote {svg_path}");
        }
    }
    Ok(())
}

fn cmd_convergence(cfg: &ExperimentConfig, args: &CommonArgs) -> Result<u8, Error> {
    let records = experiment::run_convergence(cfg)?;
    for method in &cfg.methods {
        for &n in &cfg.qubit_counts {
            for &eps in &cfg.epsilons {
                let subset: Vec<&ExperimentRecord> = records
                    .iter()
                    .filter(|r| r.method == *method && r.n == n && r.eps == eps)
                    .collect();
                if subset.is_empty() {
                    continue;
                }
                let mean: f64 =
                    subset.iter().map(|r| r.final_error).sum::<f64>() / subset.len() as f64;
                let budget = subset[0].queries_total;
                println!("{method} n={n} eps={eps}: budget={budget} mean_final_error={mean:.6}");
            }
        }
    }
    let svg = plot_error_vs_queries(&records);
    write_outputs(cfg, args, &records, Some(svg))?;
    Ok(0)
}

fn cmd_separation(cfg: &ExperimentConfig, args: &CommonArgs) -> Result<u8, Error> {
    let (records, summaries) = experiment::run_separation(cfg)?;
    for s in &summaries {
        match s.queries_to_target {
            Some(q) => {
                println!("{} n={} eps={}: queries-to-target = {q}", s.method, s.n, s.eps)
            }
            None => println!(
                "{} n={} eps={}: censored at ceiling {}",
                s.method, s.n, s.eps, cfg.budget_ceiling
            ),
        }
    }
    let svg = plot_queries_vs_n(&summaries, cfg.budget_ceiling);
    write_outputs(cfg, args, &records, Some(svg))?;
    if summaries.iter().all(|s| s.censored) {
        eprintln!("all arms censored at the budget ceiling");
        return Ok(4);
    }
    Ok(0)
}

fn cmd_identify(cfg: &ExperimentConfig, args: &CommonArgs) -> Result<u8, Error> {
    let report = experiment::run_identification(cfg)?;
    println!(
        "identification: {} / {} seeds correct ({:.3}); packing size {}, beta {:.6}, target {:.6}",
        report.successes.iter().filter(|&&s| s).count(),
        report.successes.len(),
        report.success_fraction,
        report.packing_size,
        report.beta,
        report.target_error,
    );
    if report.vacuous_warning {
        eprintln!(
            "warning: optimization target {} exceeds beta/9 = {}; the packing guarantee is vacuous",
            report.target_error,
            report.beta / 9.0
        );
    }
    write_outputs(cfg, args, &report.records, None)?;
    Ok(0)
}

fn cmd_selftest(cfg: &ExperimentConfig, _args: &CommonArgs) -> Result<u8, Error> {
    use vqo::oracle::{GammaTable, SamplingOracle};
    use vqo::toy;

    let mut failures = 0u32;
    let mut check = |name: &str, ok: bool| {
        println!("[{}] {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // Importance weights on the product family are flat: Γ_j = √2 cos δ.
    let n = 6;
    let eps = 0.05;
    let (inst, obs) = toy::random_instance(n, eps, cfg.base_seed)?;
    let ansatz = toy::build_toy_ansatz(n);
    let table = GammaTable::build(&ansatz, &obs)?;
    let expected = std::f64::consts::SQRT_2 * inst.delta.cos();
    check(
        "gamma weights flat at sqrt(2)cos(delta)",
        (0..n).all(|j| (table.gamma(j) - expected).abs() <= 1e-12),
    );

    // Closed forms against the statevector route.
    let theta: Vec<f64> = (0..n).map(|i| 0.07 * i as f64 - 0.2).collect();
    let state = ansatz.prepare(&theta)?;
    let cf = toy::closed_form_objective(&inst, &theta);
    check(
        "closed-form objective matches statevector",
        (state.expectation(&obs)? - cf).abs() <= 1e-10,
    );

    // Zeroth-order unbiasedness at 5 sigma.
    let exact = ansatz.exact_query_mean(&obs, &theta, &[])?;
    let mut oracle = SamplingOracle::new(obs.clone(), cfg.base_seed);
    let m = 20_000;
    let mut sum = 0.0;
    for _ in 0..m {
        sum += oracle.query(&ansatz, &theta, &[])?;
    }
    let tol = 5.0 * obs.normalization() / (m as f64).sqrt();
    check(
        "zeroth-order sampling unbiased",
        (sum / m as f64 - exact).abs() <= tol,
    );
    check("ledger counts queries", oracle.query_count().total() == m);

    // Determinism: identical mini-runs produce identical CSV bytes.
    let mini = ExperimentConfig {
        methods: vec![Method::SgdSc],
        qubit_counts: vec![6],
        epsilons: vec![0.05],
        seeds: Some(vec![0, 1]),
        iterations: Some(500),
        base_seed: cfg.base_seed,
        timing: false,
        ..ExperimentConfig::default()
    };
    let a = experiment::to_csv(&experiment::run_convergence(&mini)?);
    let b = experiment::to_csv(&experiment::run_convergence(&mini)?);
    check("re-run reproduces byte-identical CSV", a == b);

    if failures == 0 {
        println!("selftest: all checks passed");
        Ok(0)
    } else {
        eprintln!("selftest: {failures} check(s) failed");
        Err(Error::Numeric(format!("{failures} selftest checks failed")))
    }
}

fn plot_error_vs_queries(records: &[ExperimentRecord]) -> String {
    let mut methods: Vec<Method> = records.iter().map(|r| r.method).collect();
    methods.dedup();
    let series: Vec<Series> = methods
        .iter()
        .map(|m| Series {
            label: m.to_string(),
            points: records
                .iter()
                .filter(|r| r.method == *m && r.final_error > 0.0)
                .map(|r| (r.queries_total as f64, r.final_error))
                .collect(),
        })
        .collect();
    experiment::svg::render_loglog("final error vs queries", "queries", "final error", &series)
}

fn plot_queries_vs_n(summaries: &[SearchSummary], ceiling: u64) -> String {
    let mut methods: Vec<Method> = summaries.iter().map(|s| s.method).collect();
    methods.dedup();
    let series: Vec<Series> = methods
        .iter()
        .map(|m| Series {
            label: m.to_string(),
            points: summaries
                .iter()
                .filter(|s| s.method == *m)
                .map(|s| (s.n as f64, s.queries_to_target.unwrap_or(ceiling) as f64))
                .collect(),
        })
        .collect();
    experiment::svg::render_loglog("queries to target vs n", "n", "queries", &series)
}
