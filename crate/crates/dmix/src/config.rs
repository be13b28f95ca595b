//! Experiment configuration: one TOML file with a section per component.
//!
//! Unknown keys anywhere are rejected. Every section except the scenario's
//! own has defaults, so a minimal file is `scenario`, `seeds` and whatever
//! the scenario needs.

use std::fmt;
use std::path::{Path, PathBuf};

use dmix_core::dml_sim::{TaskKind, TaskSpec, WeightsSource};
use dmix_core::linkmodel::{self, ConstellationConfig, LinkParams, LinkStats, ParameterSet, Placement};
use dmix_core::mixing::{self, AggregationMatrix};
use dmix_core::spectral_opt::{ChebyshevConfig, Normalization, OptimizerConfig};
use dmix_core::{oracle, theory};
use serde::{Deserialize, Serialize};

/// Overrides `output_dir` when set.
pub const OUTPUT_DIR_ENV: &str = "DMIX_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    LinkCdf,
    OptimizeWeights,
    DmlRun,
    RhoSweep,
    BaselineCompare,
    BoundCheck,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::LinkCdf => "link_cdf",
            Scenario::OptimizeWeights => "optimize_weights",
            Scenario::DmlRun => "dml_run",
            Scenario::RhoSweep => "rho_sweep",
            Scenario::BaselineCompare => "baseline_compare",
            Scenario::BoundCheck => "bound_check",
        }
    }

    fn needs_learning(self) -> bool {
        matches!(
            self,
            Scenario::DmlRun | Scenario::RhoSweep | Scenario::BaselineCompare | Scenario::BoundCheck
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub constellation: ConstellationSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub chebyshev: ChebyshevSection,
    pub protocol: Option<ProtocolSection>,
    pub task: Option<TaskSection>,
    #[serde(default)]
    pub link_cdf: LinkCdfSection,
    #[serde(default)]
    pub rho_sweep: RhoSweepSection,
    #[serde(default)]
    pub baseline_compare: BaselineSection,
    #[serde(default)]
    pub bound_check: BoundCheckSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetName {
    A,
    B,
    C,
    #[serde(rename = "default")]
    Default,
    #[serde(rename = "custom")]
    Custom,
}

impl SetName {
    pub fn parameter_set(self) -> Option<ParameterSet> {
        match self {
            SetName::A => Some(ParameterSet::A),
            SetName::B => Some(ParameterSet::B),
            SetName::C => Some(ParameterSet::C),
            SetName::Default => Some(ParameterSet::Default),
            SetName::Custom => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementName {
    #[default]
    Uniform,
    Random,
}

/// A named parameter set, optionally with individual overrides. `custom`
/// requires `alpha_d`, `alpha_theta` and `interference`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationSection {
    pub set: SetName,
    pub nodes: usize,
    pub placement: PlacementName,
    /// Explicit node positions in degrees; overrides `placement`.
    pub angles_deg: Option<Vec<f64>>,
    pub alpha_d: Option<f64>,
    pub alpha_theta: Option<f64>,
    pub interference: Option<f64>,
    pub d_max_km: Option<f64>,
    pub theta_max_deg: Option<f64>,
    pub orbit_radius_km: Option<f64>,
}

impl Default for ConstellationSection {
    fn default() -> Self {
        ConstellationSection {
            set: SetName::A,
            nodes: 22,
            placement: PlacementName::Uniform,
            angles_deg: None,
            alpha_d: None,
            alpha_theta: None,
            interference: None,
            d_max_km: None,
            theta_max_deg: None,
            orbit_radius_km: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub step_size: f64,
    pub max_iterations: usize,
    pub restoration_sweeps: usize,
    pub convergence_tol: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        OptimizerSection {
            step_size: d.step_size,
            max_iterations: d.max_iterations,
            restoration_sweeps: d.restoration_sweeps,
            convergence_tol: d.convergence_tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationName {
    #[default]
    Exact,
    Gossip,
}

/// Estimator settings for the optimizer. The budget defaults to 1000
/// products per branch because subgradient descent drives `λ₂` and `λ₃`
/// close together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChebyshevSection {
    pub iterations: usize,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
    pub residual_tolerance: f64,
    pub tolerance: f64,
    pub restart_degree: usize,
    pub normalization: NormalizationName,
    pub gossip_rounds: usize,
}

impl Default for ChebyshevSection {
    fn default() -> Self {
        let d = ChebyshevConfig::default();
        ChebyshevSection {
            iterations: 1000,
            mu: d.mu,
            nu: d.nu,
            residual_tolerance: d.residual_tolerance,
            tolerance: d.tolerance,
            restart_degree: d.restart_degree,
            normalization: NormalizationName::Exact,
            gossip_rounds: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightsName {
    #[default]
    Optimized,
    Uniform,
    Ideal,
    Metropolis,
    CentralizedProxy,
    Prescribed,
}

impl WeightsName {
    pub const BASELINES: [WeightsName; 5] = [
        WeightsName::Optimized,
        WeightsName::Uniform,
        WeightsName::Ideal,
        WeightsName::Metropolis,
        WeightsName::CentralizedProxy,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    pub learning_rate: f64,
    pub rounds: usize,
    #[serde(default)]
    pub weights: WeightsName,
    #[serde(default = "default_q_delta")]
    pub q_delta: f64,
    pub beta: Option<f64>,
}

fn default_q_delta() -> f64 {
    0.8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKindName {
    #[default]
    Quadratic,
    SoftmaxSynthetic,
}

/// Task knobs; unset fields take the library defaults. The node count comes
/// from the constellation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSection {
    pub kind: TaskKindName,
    pub dimension: Option<usize>,
    pub samples_min: Option<usize>,
    pub samples_max: Option<usize>,
    pub heterogeneity: Option<f64>,
    pub noise: Option<f64>,
    pub batch_size: Option<usize>,
    pub classes: Option<usize>,
    pub test_samples: Option<usize>,
    pub init_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkCdfSection {
    pub sets: Vec<SetName>,
    pub grid_points: usize,
}

impl Default for LinkCdfSection {
    fn default() -> Self {
        LinkCdfSection {
            sets: vec![SetName::A, SetName::B, SetName::C],
            grid_points: 101,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RhoSweepSection {
    pub betas: Vec<f64>,
}

impl Default for RhoSweepSection {
    fn default() -> Self {
        RhoSweepSection {
            betas: vec![0.0, 0.25, 0.46, 0.74, 0.92],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub schemes: Vec<WeightsName>,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            schemes: WeightsName::BASELINES.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundCheckSection {
    /// Minibatch draws per node when measuring `σ²`.
    pub sigma_draws: usize,
    /// If set, `η` is this fraction of the admissible limit and
    /// `protocol.learning_rate` is ignored.
    pub eta_fraction: Option<f64>,
}

impl Default for BoundCheckSection {
    fn default() -> Self {
        BoundCheckSection {
            sigma_draws: 1000,
            eta_fraction: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    /// The config cannot run.
    Error,
    /// The config is well formed but a requested baseline cannot be built.
    Infeasible,
    Warning,
}

/// One validation result, naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    pub field: String,
    pub message: String,
}

impl Finding {
    fn error(field: impl Into<String>, message: impl Into<String>) -> Self {
        Finding {
            severity: Severity::Error,
            field: field.into(),
            message: message.into(),
        }
    }

    fn core(section: &str, e: dmix_core::Error) -> Self {
        let field = match &e {
            dmix_core::Error::InvalidParameter { name, .. } => format!("{section}.{name}"),
            _ => section.to_string(),
        };
        Finding::error(field, e.to_string())
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Infeasible => "infeasible",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| LoadError::Parse(e.to_string()))
    }

    /// `output_dir`, unless the environment overrides it.
    pub fn effective_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output_dir.clone(),
        }
    }

    pub fn link_params(&self) -> Result<LinkParams, Finding> {
        let c = &self.constellation;
        let mut p = match c.set.parameter_set() {
            Some(set) => set.params(),
            None => {
                let missing: Vec<&str> = [
                    ("alpha_d", c.alpha_d),
                    ("alpha_theta", c.alpha_theta),
                    ("interference", c.interference),
                ]
                .iter()
                .filter(|(_, v)| v.is_none())
                .map(|(k, _)| *k)
                .collect();
                if !missing.is_empty() {
                    return Err(Finding::error(
                        "constellation.set",
                        format!("custom set requires {}", missing.join(", ")),
                    ));
                }
                LinkParams::default()
            }
        };
        if let Some(v) = c.alpha_d {
            p.alpha_d = v;
        }
        if let Some(v) = c.alpha_theta {
            p.alpha_theta = v;
        }
        if let Some(v) = c.interference {
            p.interference = v;
        }
        if let Some(v) = c.d_max_km {
            p.d_max_km = v;
        }
        if let Some(v) = c.theta_max_deg {
            p.theta_max_deg = v;
        }
        if let Some(v) = c.orbit_radius_km {
            p.orbit_radius_km = v;
        }
        Ok(p)
    }

    /// Geometry for one seed: random angles are fixed per seed.
    pub fn constellation_for(&self, params: &LinkParams, seed: u64) -> ConstellationConfig {
        let c = &self.constellation;
        let placement = match c.placement {
            PlacementName::Uniform => Placement::Uniform,
            PlacementName::Random => Placement::Random,
        };
        let mut cfg = ConstellationConfig::new(params, c.nodes, placement, seed);
        if let Some(angles) = &c.angles_deg {
            cfg.node_angles = angles.iter().map(|d| d.to_radians()).collect();
        }
        cfg
    }

    pub fn link_stats(&self, seed: u64) -> Result<LinkStats, dmix_core::Error> {
        let params = self.link_params().map_err(|f| dmix_core::Error::InvalidParameter {
            name: "constellation",
            reason: f.message,
        })?;
        linkmodel::compute_link_stats(&self.constellation_for(&params, seed))
    }

    pub fn optimizer_config(&self) -> OptimizerConfig {
        let o = &self.optimizer;
        OptimizerConfig {
            step_size: o.step_size,
            max_iterations: o.max_iterations,
            restoration_sweeps: o.restoration_sweeps,
            convergence_tol: o.convergence_tol,
        }
    }

    pub fn chebyshev_config(&self) -> ChebyshevConfig {
        let c = &self.chebyshev;
        ChebyshevConfig {
            mu: c.mu,
            nu: c.nu,
            iterations: c.iterations,
            normalization: match c.normalization {
                NormalizationName::Exact => Normalization::Exact,
                NormalizationName::Gossip => Normalization::Gossip {
                    rounds: c.gossip_rounds,
                },
            },
            residual_tolerance: c.residual_tolerance,
            tolerance: c.tolerance,
            restart_degree: c.restart_degree,
        }
    }

    pub fn task_spec(&self) -> TaskSpec {
        let d = TaskSpec::default();
        let t = self.task.clone().unwrap_or_default();
        TaskSpec {
            kind: match t.kind {
                TaskKindName::Quadratic => TaskKind::Quadratic,
                TaskKindName::SoftmaxSynthetic => TaskKind::SoftmaxSynthetic,
            },
            dimension: t.dimension.unwrap_or(d.dimension),
            nodes: self.constellation.nodes,
            samples_min: t.samples_min.unwrap_or(d.samples_min),
            samples_max: t.samples_max.unwrap_or(d.samples_max),
            heterogeneity: t.heterogeneity.unwrap_or(d.heterogeneity),
            noise: t.noise.unwrap_or(d.noise),
            batch_size: t.batch_size.unwrap_or(d.batch_size),
            classes: t.classes.unwrap_or(d.classes),
            test_samples: t.test_samples.unwrap_or(d.test_samples),
            init_spread: t.init_spread.unwrap_or(d.init_spread),
        }
    }

    /// Resolve a scheme name with the protocol's `q_δ` and `β`.
    pub fn weights_source(&self, name: WeightsName) -> WeightsSource {
        let p = self.protocol.as_ref();
        match name {
            WeightsName::Optimized => WeightsSource::Optimized,
            WeightsName::Uniform => WeightsSource::Uniform,
            WeightsName::Ideal => WeightsSource::Ideal,
            WeightsName::Metropolis => WeightsSource::Metropolis {
                q_delta: p.map_or(default_q_delta(), |p| p.q_delta),
            },
            WeightsName::CentralizedProxy => WeightsSource::CentralizedProxy,
            WeightsName::Prescribed => WeightsSource::Prescribed {
                beta: p.and_then(|p| p.beta).unwrap_or(0.0),
            },
        }
    }

    /// The schemes a learning scenario runs.
    pub fn schemes(&self) -> Vec<WeightsName> {
        match self.scenario {
            Scenario::BaselineCompare => self.baseline_compare.schemes.clone(),
            Scenario::DmlRun | Scenario::BoundCheck => {
                self.protocol.as_ref().map(|p| vec![p.weights]).unwrap_or_default()
            }
            _ => Vec::new(),
        }
    }

    /// Every problem with the config, without running anything expensive.
    pub fn validate(&self) -> Vec<Finding> {
        let mut out = Vec::new();
        if self.seeds.is_empty() {
            out.push(Finding::error("seeds", "at least one seed is required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            out.push(Finding::error("seeds", "seeds must be distinct"));
        }

        let params = match self.link_params() {
            Ok(p) => Some(p),
            Err(f) => {
                out.push(f);
                None
            }
        };
        if let Some(angles) = &self.constellation.angles_deg {
            if angles.len() != self.constellation.nodes {
                out.push(Finding::error(
                    "constellation.angles_deg",
                    format!("{} angles given for {} nodes", angles.len(), self.constellation.nodes),
                ));
            }
        }
        let mut geometry_ok = false;
        if let Some(p) = &params {
            if self.constellation.angles_deg.as_ref().is_none_or(|a| a.len() == self.constellation.nodes) {
                match self.constellation_for(p, self.seeds.first().copied().unwrap_or(0)).validate() {
                    Ok(()) => geometry_ok = true,
                    Err(e) => out.push(Finding::core("constellation", e)),
                }
            }
        }

        let opt = self.optimizer_config();
        if let Err(e) = opt.validate() {
            out.push(Finding::core("optimizer", e));
        }
        if opt.max_iterations == 0 {
            out.push(Finding::error("optimizer.max_iterations", "J_max must be at least 1"));
        }
        if let Err(e) = self.chebyshev_config().validate() {
            out.push(Finding::core("chebyshev", e));
        }

        match self.scenario {
            Scenario::LinkCdf => {
                if self.link_cdf.sets.is_empty() {
                    out.push(Finding::error("link_cdf.sets", "at least one parameter set is required"));
                }
                if self.link_cdf.grid_points < 2 {
                    out.push(Finding::error("link_cdf.grid_points", "need at least two grid points"));
                }
            }
            Scenario::RhoSweep => {
                if self.rho_sweep.betas.is_empty() {
                    out.push(Finding::error("rho_sweep.betas", "at least one beta is required"));
                }
                for &b in &self.rho_sweep.betas {
                    if !(0.0..1.0).contains(&b) {
                        out.push(Finding::error("rho_sweep.betas", format!("beta {b} must lie in [0, 1)")));
                    }
                }
            }
            Scenario::BaselineCompare => {
                if self.baseline_compare.schemes.is_empty() {
                    out.push(Finding::error("baseline_compare.schemes", "at least one scheme is required"));
                }
            }
            Scenario::BoundCheck => {
                if self.task_spec().kind != TaskKind::Quadratic {
                    out.push(Finding::error("task.kind", "bound_check needs the quadratic task"));
                }
                if self.bound_check.sigma_draws == 0 {
                    out.push(Finding::error("bound_check.sigma_draws", "must be at least 1"));
                }
                if let Some(f) = self.bound_check.eta_fraction {
                    if !(f > 0.0 && f < 1.0) {
                        out.push(Finding::error("bound_check.eta_fraction", "must lie in (0, 1)"));
                    }
                }
            }
            _ => {}
        }

        if self.scenario.needs_learning() {
            self.validate_learning(&mut out, geometry_ok);
        }
        out
    }

    fn validate_learning(&self, out: &mut Vec<Finding>, geometry_ok: bool) {
        let Some(p) = &self.protocol else {
            out.push(Finding::error(
                "protocol",
                format!("section is required for scenario {}", self.scenario.name()),
            ));
            return;
        };
        if self.task.is_none() {
            out.push(Finding::error(
                "task",
                format!("section is required for scenario {}", self.scenario.name()),
            ));
        }
        if !(p.learning_rate.is_finite() && p.learning_rate > 0.0) {
            out.push(Finding::error("protocol.learning_rate", "must be finite and positive"));
        }
        if p.rounds == 0 {
            out.push(Finding::error("protocol.rounds", "T must be at least 1"));
        }
        let schemes = self.schemes();
        if schemes.contains(&WeightsName::Metropolis) && !(p.q_delta > 0.0 && p.q_delta < 1.0) {
            out.push(Finding::error("protocol.q_delta", "must lie in (0, 1)"));
        }
        if schemes.contains(&WeightsName::Prescribed) {
            match p.beta {
                None => out.push(Finding::error("protocol.beta", "required for prescribed weights")),
                Some(b) if !(0.0..1.0).contains(&b) => {
                    out.push(Finding::error("protocol.beta", "must lie in [0, 1)"))
                }
                _ => {}
            }
        }
        let spec = self.task_spec();
        if let Err(e) = spec.validate() {
            out.push(Finding::core("task", e));
            return;
        }
        if !geometry_ok {
            return;
        }

        if schemes.contains(&WeightsName::Metropolis) && p.q_delta > 0.0 && p.q_delta < 1.0 {
            for &seed in &self.seeds {
                let Ok(stats) = self.link_stats(seed) else { continue };
                if let Err(e) = dmix_core::dml_sim::metropolis_weights(&stats, p.q_delta) {
                    out.push(Finding {
                        severity: Severity::Infeasible,
                        field: "protocol.q_delta".into(),
                        message: format!("seed {seed}: {e}"),
                    });
                    break;
                }
            }
        }

        if spec.kind == TaskKind::Quadratic && self.bound_check.eta_fraction.is_none() {
            self.check_learning_rate(out, p, &spec);
        }
    }

    /// Warn when `η` violates the convergent regime for a scheme whose
    /// weights are cheap to build. Optimized schemes are skipped.
    fn check_learning_rate(&self, out: &mut Vec<Finding>, p: &ProtocolSection, spec: &TaskSpec) {
        let Some(&seed) = self.seeds.first() else { return };
        let Ok(dmix_core::dml_sim::Task::Quadratic(task)) = spec.build(seed) else { return };
        let lipschitz = task.curvature.iter().fold(0.0, |m: f64, &h| m.max(h));
        let Ok(stats) = self.link_stats(seed) else { return };
        let sources: Vec<WeightsSource> = match self.scenario {
            Scenario::RhoSweep => self
                .rho_sweep
                .betas
                .iter()
                .map(|&beta| WeightsSource::Prescribed { beta })
                .collect(),
            _ => self.schemes().into_iter().map(|n| self.weights_source(n)).collect(),
        };
        for source in sources {
            if matches!(source, WeightsSource::Optimized | WeightsSource::CentralizedProxy) {
                continue;
            }
            let weights = match source {
                WeightsSource::Metropolis { q_delta } => dmix_core::dml_sim::metropolis_weights(&stats, q_delta),
                WeightsSource::Prescribed { beta } if (0.0..1.0).contains(&beta) => {
                    theory::prescribed_rho_matrix(stats.n(), beta).and_then(AggregationMatrix::new)
                }
                WeightsSource::Prescribed { .. } => continue,
                _ => Ok(AggregationMatrix::uniform(stats.n())),
            };
            let Ok(a) = weights else { continue };
            let Ok(links) = source.effective_stats(&stats) else { continue };
            let Ok(rho) = mixing::second_moment_analytic(&a, &links).and_then(|m| oracle::rho_nontrivial(&m)) else {
                continue;
            };
            let limit = theory::learning_rate_limit(lipschitz, stats.n(), rho);
            if !(p.learning_rate < limit) {
                out.push(Finding {
                    severity: Severity::Warning,
                    field: "protocol.learning_rate".into(),
                    message: format!(
                        "{} weights: eta = {} violates eta < (1 - sqrt(rho)) / (6 L sqrt(N)) = {limit} \
                         with rho(E[P^2]) = {rho}, L = {lipschitz}",
                        source.label(),
                        p.learning_rate
                    ),
                });
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
}
