//! Scenario execution.
//!
//! Layout under the output directory:
//!
//! ```text
//! <scenario>/summary.json
//! <scenario>/<seed>/trace.csv              single-variant scenarios
//! <scenario>/<seed>/<variant>/trace.csv    link_cdf, rho_sweep, baseline_compare
//! ```
//!
//! Weight matrices go next to their trace as `weights.csv`, optimizer runs
//! add `optimizer_trace.csv`, and `bound_check` adds `bound.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use dmix_core::dml_sim::{self, ProtocolConfig, RoundMetrics, Task, WeightsSource};
use dmix_core::linkmodel::{self, LinkStats};
use dmix_core::mixing::{self, AggregationMatrix};
use dmix_core::spectral_opt::{self, OptimizationOutcome};
use dmix_core::{oracle, theory};
use serde::Serialize;

use crate::config::{ExperimentConfig, Finding, Scenario, Severity, WeightsName};
use crate::output::{self, Stat};
use crate::RunError;

/// Per-seed scalar results: variant → metric → value.
type Metrics = BTreeMap<String, BTreeMap<String, f64>>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: &'static str,
    pub seeds: Vec<u64>,
    pub variants: BTreeMap<String, BTreeMap<String, Stat>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analysis: Option<SweepAnalysis>,
}

/// Rounds until the seed-averaged accuracy first reaches 90% of the
/// smallest-β plateau (mean of the final 20% of rounds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepAnalysis {
    pub plateau: f64,
    pub target: f64,
    pub rounds_to_target_avg: BTreeMap<String, Option<usize>>,
    pub rounds_to_target_min: BTreeMap<String, Option<usize>>,
}

#[derive(Debug)]
pub struct RunReport {
    pub root: PathBuf,
    pub summary: Summary,
    pub warnings: Vec<Finding>,
}

#[derive(Default)]
struct SeedResult {
    metrics: Metrics,
    traces: BTreeMap<String, Vec<RoundMetrics>>,
}

#[derive(Debug, Clone, Serialize)]
struct BoundReport {
    inputs: BoundInputs,
    gamma: f64,
    bound: f64,
    measured_avg_grad_norm_sq: f64,
    holds: bool,
}

#[derive(Debug, Clone, Serialize)]
struct BoundInputs {
    lipschitz: f64,
    sigma2: f64,
    delta2: f64,
    eta: f64,
    rounds: usize,
    nodes: usize,
    rho_p2: f64,
    loss_gap: f64,
}

fn core_err(context: &str, e: dmix_core::Error) -> RunError {
    match e {
        dmix_core::Error::IsolatedNode { .. } => RunError::Infeasible(format!("{context}: {e}")),
        dmix_core::Error::InvalidParameter { name, .. } => RunError::Config(format!("{context}.{name}: {e}")),
        dmix_core::Error::InvalidBounds { .. } | dmix_core::Error::LearningRateRegime(_) => {
            RunError::Config(format!("{context}: {e}"))
        }
        source => RunError::Numerical {
            context: context.to_string(),
            source,
        },
    }
}

fn write(path: PathBuf, contents: &str) -> Result<(), RunError> {
    output::write(&path, contents).map_err(|source| RunError::Io { path, source })
}

fn beta_label(beta: f64) -> String {
    format!("beta_{beta}")
}

/// Load, validate and run a config file.
pub fn run_path(path: &Path) -> Result<RunReport, RunError> {
    let cfg = ExperimentConfig::load(path).map_err(|e| RunError::Config(e.to_string()))?;
    run(&cfg)
}

/// Validation findings for a config file, including load errors.
pub fn validate_path(path: &Path) -> Vec<Finding> {
    match ExperimentConfig::load(path) {
        Ok(cfg) => cfg.validate(),
        Err(e) => vec![Finding {
            severity: Severity::Error,
            field: "config".into(),
            message: e.to_string(),
        }],
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let findings = cfg.validate();
    let errors: Vec<String> = findings
        .iter()
        .filter(|f| f.severity == Severity::Error)
        .map(|f| format!("{}: {}", f.field, f.message))
        .collect();
    if !errors.is_empty() {
        return Err(RunError::Config(errors.join("; ")));
    }
    if let Some(f) = findings.iter().find(|f| f.severity == Severity::Infeasible) {
        return Err(RunError::Infeasible(format!("{}: {}", f.field, f.message)));
    }
    let warnings: Vec<Finding> = findings.into_iter().filter(|f| f.severity == Severity::Warning).collect();

    let root = cfg.effective_output_dir().join(cfg.scenario.name());
    let results = run_seeds(cfg, &root)?;
    let summary = summarize(cfg, &results);
    output::write_json(&root.join("summary.json"), &summary).map_err(|source| RunError::Io {
        path: root.join("summary.json"),
        source,
    })?;
    Ok(RunReport {
        root,
        summary,
        warnings,
    })
}

/// Seeds run on scoped threads; results come back in seed order.
fn run_seeds(cfg: &ExperimentConfig, root: &Path) -> Result<Vec<SeedResult>, RunError> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut results = Vec::with_capacity(cfg.seeds.len());
    for chunk in cfg.seeds.chunks(workers) {
        let outcomes: Vec<Result<SeedResult, RunError>> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&seed| {
                    let dir = root.join(seed.to_string());
                    s.spawn(move || run_seed(cfg, seed, &dir))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("seed worker panicked")).collect()
        });
        for r in outcomes {
            results.push(r?);
        }
    }
    Ok(results)
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedResult, RunError> {
    match cfg.scenario {
        Scenario::LinkCdf => link_cdf(cfg, seed, dir),
        Scenario::OptimizeWeights => optimize_weights(cfg, seed, dir),
        Scenario::DmlRun => learning(cfg, seed, dir, false),
        Scenario::BaselineCompare => learning(cfg, seed, dir, true),
        Scenario::RhoSweep => rho_sweep(cfg, seed, dir),
        Scenario::BoundCheck => bound_check(cfg, seed, dir),
    }
}

fn link_cdf(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedResult, RunError> {
    let base = cfg
        .link_params()
        .map_err(|f| RunError::Config(format!("{}: {}", f.field, f.message)))?;
    let g = cfg.link_cdf.grid_points;
    let grid: Vec<f64> = (0..g).map(|k| k as f64 / (g - 1) as f64).collect();
    let mut out = SeedResult::default();
    for set in &cfg.link_cdf.sets {
        let params = match set.parameter_set() {
            Some(p) => {
                let mut p = p.params();
                p.d_max_km = base.d_max_km;
                p.theta_max_deg = base.theta_max_deg;
                p.orbit_radius_km = base.orbit_radius_km;
                p
            }
            None => base,
        };
        let name = set.parameter_set().map_or("custom", |p| p.name());
        let stats = linkmodel::compute_link_stats(&cfg.constellation_for(&params, seed))
            .map_err(|e| core_err("constellation", e))?;
        let cdf = linkmodel::empirical_cdf(&stats, &grid).map_err(|e| core_err("link_cdf", e))?;
        let vdir = dir.join(name);
        write(vdir.join("trace.csv"), &output::cdf_csv(&cdf))?;
        write(vdir.join("link_stats.csv"), &output::matrix_csv(stats.as_matrix()))?;
        let m = out.metrics.entry(name.to_string()).or_default();
        for (x, f) in cdf {
            m.insert(format!("F({})", output::float(x)), f);
        }
    }
    Ok(out)
}

fn optimize_weights(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedResult, RunError> {
    let stats = cfg.link_stats(seed).map_err(|e| core_err("constellation", e))?;
    let outcome = spectral_opt::optimize(
        &AggregationMatrix::uniform(stats.n()),
        &stats,
        &cfg.optimizer_config(),
        &cfg.chebyshev_config(),
        seed,
    )
    .map_err(|e| core_err("optimizer", e))?;
    write(dir.join("trace.csv"), &output::optimizer_trace_csv(&outcome.trace))?;
    write(dir.join("weights.csv"), &output::matrix_csv(outcome.best.as_matrix()))?;
    let mut out = SeedResult::default();
    out.metrics.insert("optimized".into(), optimizer_metrics(&outcome));
    Ok(out)
}

fn optimizer_metrics(o: &OptimizationOutcome) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("rho_uniform".into(), o.trace[0].rho_oracle),
        ("rho_best".into(), o.best_rho()),
        ("rho_last".into(), o.trace[o.trace.len() - 1].rho_oracle),
        ("best_iteration".into(), o.best_iteration as f64),
        ("max_feasibility_residual".into(), o.max_feasibility_residual()),
    ])
}

/// Build a scheme's weights, writing the optimizer trace when there is one.
fn scheme_weights(
    cfg: &ExperimentConfig,
    source: WeightsSource,
    stats: &LinkStats,
    seed: u64,
    dir: &Path,
) -> Result<AggregationMatrix, RunError> {
    let a0 = AggregationMatrix::uniform(stats.n());
    let outcome = match source {
        WeightsSource::Optimized => Some(
            spectral_opt::optimize(&a0, stats, &cfg.optimizer_config(), &cfg.chebyshev_config(), seed)
                .map_err(|e| core_err("optimizer", e))?,
        ),
        WeightsSource::CentralizedProxy => Some(
            spectral_opt::optimize_centralized(&a0, stats, &cfg.optimizer_config())
                .map_err(|e| core_err("optimizer", e))?,
        ),
        _ => None,
    };
    let a = match outcome {
        Some(o) => {
            write(dir.join("optimizer_trace.csv"), &output::optimizer_trace_csv(&o.trace))?;
            o.best
        }
        None => source
            .weights(stats, &cfg.optimizer_config(), &cfg.chebyshev_config(), seed)
            .map_err(|e| core_err("protocol", e))?,
    };
    write(dir.join("weights.csv"), &output::matrix_csv(a.as_matrix()))?;
    Ok(a)
}

fn final_metrics(trace: &[RoundMetrics]) -> BTreeMap<String, f64> {
    let last = trace[trace.len() - 1];
    let mut m = BTreeMap::from([
        ("final_avg_loss".into(), last.avg_loss),
        ("final_consensus_error".into(), last.consensus_error),
        ("final_grad_norm_at_mean".into(), last.grad_norm_at_mean),
    ]);
    if let (Some(a), Some(b)) = (last.avg_acc, last.min_acc) {
        m.insert("final_avg_acc".into(), a);
        m.insert("final_min_acc".into(), b);
    }
    m
}

fn rho_expected(a: &AggregationMatrix, links: &LinkStats) -> Result<f64, RunError> {
    mixing::expected_mixing(a, links)
        .and_then(|p| oracle::rho_nontrivial(&p))
        .map_err(|e| core_err("mixing", e))
}

fn protocol(cfg: &ExperimentConfig, source: WeightsSource, seed: u64) -> ProtocolConfig {
    let p = cfg.protocol.as_ref().expect("validated");
    ProtocolConfig {
        learning_rate: p.learning_rate,
        rounds: p.rounds,
        weights_source: source,
        seed,
    }
}

fn build_task(cfg: &ExperimentConfig, seed: u64) -> Result<Task, RunError> {
    cfg.task_spec().build(seed).map_err(|e| core_err("task", e))
}

/// `dml_run` writes into the seed directory, `baseline_compare` into one
/// subdirectory per scheme.
fn learning(cfg: &ExperimentConfig, seed: u64, dir: &Path, per_variant: bool) -> Result<SeedResult, RunError> {
    let stats = cfg.link_stats(seed).map_err(|e| core_err("constellation", e))?;
    let task = build_task(cfg, seed)?;
    let mut out = SeedResult::default();
    for name in cfg.schemes() {
        let source = cfg.weights_source(name);
        let vdir = if per_variant { dir.join(source.label()) } else { dir.to_path_buf() };
        let a = scheme_weights(cfg, source, &stats, seed, &vdir)?;
        let links = source.effective_stats(&stats).map_err(|e| core_err("protocol", e))?;
        let trace = dml_sim::run_experiment(&protocol(cfg, source, seed), &task, &stats, &a)
            .map_err(|e| core_err("protocol", e))?;
        write(vdir.join("trace.csv"), &output::dml_trace_csv(&trace))?;
        let mut m = final_metrics(&trace);
        m.insert("rho_expected_mixing".into(), rho_expected(&a, &links)?);
        out.metrics.insert(source.label().to_string(), m);
        out.traces.insert(source.label().to_string(), trace);
    }
    Ok(out)
}

fn rho_sweep(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedResult, RunError> {
    let task = build_task(cfg, seed)?;
    let stats = LinkStats::uniform(task.nodes(), 1.0).map_err(|e| core_err("task", e))?;
    let mut out = SeedResult::default();
    for &beta in &cfg.rho_sweep.betas {
        let source = WeightsSource::Prescribed { beta };
        let label = beta_label(beta);
        let vdir = dir.join(&label);
        let a = scheme_weights(cfg, source, &stats, seed, &vdir)?;
        let trace = dml_sim::run_experiment(&protocol(cfg, source, seed), &task, &stats, &a)
            .map_err(|e| core_err("protocol", e))?;
        write(vdir.join("trace.csv"), &output::dml_trace_csv(&trace))?;
        let mut m = final_metrics(&trace);
        m.insert("rho_expected_mixing".into(), rho_expected(&a, &stats)?);
        out.metrics.insert(label.clone(), m);
        out.traces.insert(label, trace);
    }
    Ok(out)
}

fn bound_check(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<SeedResult, RunError> {
    let stats = cfg.link_stats(seed).map_err(|e| core_err("constellation", e))?;
    let task = build_task(cfg, seed)?;
    let Task::Quadratic(quad) = &task else {
        return Err(RunError::Config("task.kind: bound_check needs the quadratic task".into()));
    };
    let k = quad.constants(seed, cfg.bound_check.sigma_draws);
    let p = cfg.protocol.as_ref().expect("validated");
    let source = cfg.weights_source(p.weights);
    let a = scheme_weights(cfg, source, &stats, seed, dir)?;
    let links = source.effective_stats(&stats).map_err(|e| core_err("protocol", e))?;
    let rho_p2 = mixing::second_moment_analytic(&a, &links)
        .and_then(|m| oracle::rho_nontrivial(&m))
        .map_err(|e| core_err("mixing", e))?;
    let n = task.nodes();
    let eta = match cfg.bound_check.eta_fraction {
        Some(f) => f * theory::learning_rate_limit(k.lipschitz, n, rho_p2),
        None => p.learning_rate,
    };
    let proto = ProtocolConfig {
        learning_rate: eta,
        ..protocol(cfg, source, seed)
    };
    let trace = dml_sim::run_experiment(&proto, &task, &stats, &a).map_err(|e| core_err("protocol", e))?;
    write(dir.join("trace.csv"), &output::dml_trace_csv(&trace))?;

    let rounds = proto.rounds;
    let measured = trace[..rounds].iter().map(|r| r.grad_norm_at_mean * r.grad_norm_at_mean).sum::<f64>() / rounds as f64;
    let inputs = theory::TheoremInputs {
        lipschitz: k.lipschitz,
        sigma2: k.sigma2,
        delta2: k.delta2,
        eta,
        rounds,
        nodes: n,
        rho_p2,
        loss_gap: trace[0].avg_loss - k.optimal_loss,
    };
    let gamma = theory::gamma(&inputs).map_err(|e| core_err("protocol.learning_rate", e))?;
    let bound = theory::convergence_bound(&inputs).map_err(|e| core_err("protocol.learning_rate", e))?;
    let report = BoundReport {
        inputs: BoundInputs {
            lipschitz: inputs.lipschitz,
            sigma2: inputs.sigma2,
            delta2: inputs.delta2,
            eta,
            rounds,
            nodes: n,
            rho_p2,
            loss_gap: inputs.loss_gap,
        },
        gamma,
        bound,
        measured_avg_grad_norm_sq: measured,
        holds: measured <= bound,
    };
    output::write_json(&dir.join("bound.json"), &report).map_err(|source| RunError::Io {
        path: dir.join("bound.json"),
        source,
    })?;
    let mut m = final_metrics(&trace);
    m.extend([
        ("measured_avg_grad_norm_sq".to_string(), measured),
        ("bound".to_string(), bound),
        ("gamma".to_string(), gamma),
        ("rho_p2".to_string(), rho_p2),
        ("eta".to_string(), eta),
        ("holds".to_string(), if report.holds { 1.0 } else { 0.0 }),
    ]);
    let mut out = SeedResult::default();
    out.metrics.insert(source.label().to_string(), m);
    Ok(out)
}

fn summarize(cfg: &ExperimentConfig, results: &[SeedResult]) -> Summary {
    let mut variants: BTreeMap<String, BTreeMap<String, Stat>> = BTreeMap::new();
    if let Some(first) = results.first() {
        for (variant, metrics) in &first.metrics {
            let entry = variants.entry(variant.clone()).or_default();
            for metric in metrics.keys() {
                let values = results.iter().map(|r| r.metrics[variant][metric]).collect();
                entry.insert(metric.clone(), Stat::of(values));
            }
        }
    }
    let analysis = (cfg.scenario == Scenario::RhoSweep).then(|| sweep_analysis(cfg, results)).flatten();
    Summary {
        scenario: cfg.scenario.name(),
        seeds: cfg.seeds.clone(),
        variants,
        analysis,
    }
}

/// Seed average of one accuracy column per round.
fn seed_average(results: &[SeedResult], label: &str, pick: fn(&RoundMetrics) -> Option<f64>) -> Option<Vec<f64>> {
    let traces: Vec<&Vec<RoundMetrics>> = results.iter().map(|r| &r.traces[label]).collect();
    let rounds = traces[0].len();
    (0..rounds)
        .map(|t| {
            let total: Option<f64> = traces.iter().map(|tr| pick(&tr[t])).sum();
            total.map(|s| s / traces.len() as f64)
        })
        .collect()
}

fn sweep_analysis(cfg: &ExperimentConfig, results: &[SeedResult]) -> Option<SweepAnalysis> {
    let reference = cfg.rho_sweep.betas.iter().copied().fold(f64::INFINITY, f64::min);
    let base = seed_average(results, &beta_label(reference), |m| m.avg_acc)?;
    let tail = (base.len() / 5).max(1);
    let plateau = base[base.len() - tail..].iter().sum::<f64>() / tail as f64;
    let target = 0.9 * plateau;
    let hit = |curve: Option<Vec<f64>>| curve.and_then(|c| c.iter().position(|&v| v >= target));
    let mut avg = BTreeMap::new();
    let mut min = BTreeMap::new();
    for &beta in &cfg.rho_sweep.betas {
        let label = beta_label(beta);
        avg.insert(label.clone(), hit(seed_average(results, &label, |m| m.avg_acc)));
        min.insert(label.clone(), hit(seed_average(results, &label, |m| m.min_acc)));
    }
    Some(SweepAnalysis {
        plateau,
        target,
        rounds_to_target_avg: avg,
        rounds_to_target_min: min,
    })
}

/// Names of the schemes a baseline comparison covers, for callers that
/// want to locate per-variant directories.
pub fn scheme_labels(cfg: &ExperimentConfig) -> Vec<&'static str> {
    cfg.schemes()
        .into_iter()
        .map(|n: WeightsName| cfg.weights_source(n).label())
        .collect()
}
