//! Desk-scale learning tasks.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{dot, norm};
use crate::rng::{self, Domain};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TaskKind {
    /// `ℓ(w, s) = ½(w − s)ᵀH(w − s)` with diagonal `H`.
    #[default]
    Quadratic,
    /// Multinomial logistic regression on Gaussian class clusters.
    SoftmaxSynthetic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    /// Model dimension for the quadratic task, feature count for softmax.
    pub dimension: usize,
    pub nodes: usize,
    /// Inclusive range for per-node sample counts.
    pub samples_min: usize,
    pub samples_max: usize,
    /// Quadratic: distance of each node's optimum from the shared one.
    /// Softmax: label skew in `[0, 1]`; node `i` over-represents class `i mod C`.
    pub heterogeneity: f64,
    /// Standard deviation of sample noise around each node's optimum
    /// (quadratic) or class mean (softmax).
    pub noise: f64,
    pub batch_size: usize,
    /// Softmax only.
    pub classes: usize,
    /// Softmax only: size of the shared, class-balanced test set.
    pub test_samples: usize,
    /// Standard deviation of independent per-node initial models around 0.
    pub init_spread: f64,
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec {
            kind: TaskKind::Quadratic,
            dimension: 10,
            nodes: 22,
            samples_min: 100,
            samples_max: 125,
            heterogeneity: 1.0,
            noise: 1.0,
            batch_size: 8,
            classes: 10,
            test_samples: 500,
            init_spread: 0.0,
        }
    }
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::invalid("dimension", "must be at least 1"));
        }
        if self.nodes == 0 {
            return Err(Error::invalid("nodes", "must be at least 1"));
        }
        if self.samples_min == 0 || self.samples_max < self.samples_min {
            return Err(Error::invalid("samples", "need 1 <= samples_min <= samples_max"));
        }
        for (name, v) in [
            ("heterogeneity", self.heterogeneity),
            ("noise", self.noise),
            ("init_spread", self.init_spread),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, "must be finite and nonnegative"));
            }
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be at least 1"));
        }
        if self.kind == TaskKind::SoftmaxSynthetic {
            if self.classes < 2 {
                return Err(Error::invalid("classes", "need at least two classes"));
            }
            if self.heterogeneity > 1.0 {
                return Err(Error::invalid("heterogeneity", "label skew must lie in [0, 1]"));
            }
            if self.test_samples == 0 {
                return Err(Error::invalid("test_samples", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Generate every node's data from `seed`.
    pub fn build(&self, seed: u64) -> Result<Task> {
        self.validate()?;
        Ok(match self.kind {
            TaskKind::Quadratic => Task::Quadratic(QuadraticTask::build(self, seed)),
            TaskKind::SoftmaxSynthetic => Task::Softmax(SoftmaxTask::build(self, seed)),
        })
    }
}

fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            scale * z
        })
        .collect()
}

fn sample_counts(spec: &TaskSpec, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..spec.nodes)
        .map(|_| rng.random_range(spec.samples_min..=spec.samples_max))
        .collect()
}

/// Built task with concrete per-node data.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Quadratic(QuadraticTask),
    Softmax(SoftmaxTask),
}

impl Task {
    pub fn spec(&self) -> &TaskSpec {
        match self {
            Task::Quadratic(t) => &t.spec,
            Task::Softmax(t) => &t.spec,
        }
    }

    pub fn nodes(&self) -> usize {
        self.spec().nodes
    }

    pub fn model_dim(&self) -> usize {
        match self {
            Task::Quadratic(t) => t.spec.dimension,
            Task::Softmax(t) => t.spec.classes * (t.spec.dimension + 1),
        }
    }

    /// Node `node`'s starting model.
    pub fn initial_model(&self, node: usize, seed: u64) -> Vec<f64> {
        let spread = self.spec().init_spread;
        if spread == 0.0 {
            return vec![0.0; self.model_dim()];
        }
        let mut rng = rng::stream(seed, Domain::ModelInit, &[node as u64]);
        gaussian_vec(&mut rng, self.model_dim(), spread)
    }

    /// Minibatch gradient `∇ℓ(w, ζ_i)` for node `node` in round `round`.
    pub fn minibatch_gradient(&self, node: usize, w: &[f64], seed: u64, round: usize, out: &mut [f64]) {
        let mut rng = rng::stream(seed, Domain::Minibatch, &[round as u64, node as u64]);
        match self {
            Task::Quadratic(t) => t.minibatch_gradient(node, w, &mut rng, out),
            Task::Softmax(t) => t.minibatch_gradient(node, w, &mut rng, out),
        }
    }

    /// `𝓛(w) = (1/N) Σ_i 𝓛_i(w)`.
    pub fn global_loss(&self, w: &[f64]) -> f64 {
        match self {
            Task::Quadratic(t) => t.global_loss(w),
            Task::Softmax(t) => t.global_loss(w),
        }
    }

    /// `∇𝓛(w)`.
    pub fn global_gradient(&self, w: &[f64]) -> Vec<f64> {
        match self {
            Task::Quadratic(t) => t.global_gradient(w),
            Task::Softmax(t) => t.global_gradient(w),
        }
    }

    /// Test accuracy of one model; `None` for regression tasks.
    pub fn accuracy(&self, w: &[f64]) -> Option<f64> {
        match self {
            Task::Quadratic(_) => None,
            Task::Softmax(t) => Some(t.accuracy(w)),
        }
    }
}

/// Quadratic least squares with per-node optima `w*_i = w* + shift·u_i`.
///
/// Samples are centered so node `i`'s empirical mean is exactly `w*_i`,
/// which makes `∇𝓛_i(w) = H(w − w*_i)` and the heterogeneity exact.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTask {
    pub spec: TaskSpec,
    /// Diagonal of `H`.
    pub curvature: Vec<f64>,
    pub local_optima: Vec<Vec<f64>>,
    pub samples: Vec<Vec<Vec<f64>>>,
}

/// Constants entering the convergence bound, measured from a quadratic task.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticConstants {
    pub lipschitz: f64,
    pub sigma2: f64,
    pub delta2: f64,
    pub optimum: Vec<f64>,
    pub optimal_loss: f64,
}

impl QuadraticTask {
    fn build(spec: &TaskSpec, seed: u64) -> Self {
        let d = spec.dimension;
        let mut rng = rng::stream(seed, Domain::TaskData, &[]);
        let curvature = (0..d)
            .map(|k| if d == 1 { 1.0 } else { 1.0 - 0.8 * k as f64 / (d - 1) as f64 })
            .collect();
        let center = gaussian_vec(&mut rng, d, 1.0);
        let counts = sample_counts(spec, &mut rng);
        let mut local_optima = Vec::with_capacity(spec.nodes);
        let mut samples = Vec::with_capacity(spec.nodes);
        for &count in &counts {
            let mut u = gaussian_vec(&mut rng, d, 1.0);
            let r = norm(&u);
            u.iter_mut().for_each(|x| *x /= r);
            let opt: Vec<f64> = center.iter().zip(&u).map(|(c, u)| c + spec.heterogeneity * u).collect();
            let mut node: Vec<Vec<f64>> = (0..count).map(|_| gaussian_vec(&mut rng, d, spec.noise)).collect();
            for k in 0..d {
                let mean = node.iter().map(|s| s[k]).sum::<f64>() / count as f64;
                node.iter_mut().for_each(|s| s[k] += opt[k] - mean);
            }
            local_optima.push(opt);
            samples.push(node);
        }
        QuadraticTask {
            spec: spec.clone(),
            curvature,
            local_optima,
            samples,
        }
    }

    fn minibatch_gradient(&self, node: usize, w: &[f64], rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let data = &self.samples[node];
        let b = self.spec.batch_size;
        out.iter_mut().for_each(|g| *g = 0.0);
        for _ in 0..b {
            let s = &data[rng.random_range(0..data.len())];
            for (g, x) in out.iter_mut().zip(s) {
                *g += *x;
            }
        }
        for k in 0..out.len() {
            out[k] = self.curvature[k] * (w[k] - out[k] / b as f64);
        }
    }

    fn node_loss(&self, node: usize, w: &[f64]) -> f64 {
        let data = &self.samples[node];
        let total: f64 = data
            .iter()
            .map(|s| {
                (0..w.len())
                    .map(|k| self.curvature[k] * (w[k] - s[k]) * (w[k] - s[k]))
                    .sum::<f64>()
            })
            .sum();
        0.5 * total / data.len() as f64
    }

    fn global_loss(&self, w: &[f64]) -> f64 {
        (0..self.spec.nodes).map(|i| self.node_loss(i, w)).sum::<f64>() / self.spec.nodes as f64
    }

    /// Minimizer of the global loss: the mean of the node optima.
    pub fn optimum(&self) -> Vec<f64> {
        let n = self.spec.nodes as f64;
        (0..self.spec.dimension)
            .map(|k| self.local_optima.iter().map(|o| o[k]).sum::<f64>() / n)
            .collect()
    }

    fn global_gradient(&self, w: &[f64]) -> Vec<f64> {
        let opt = self.optimum();
        (0..w.len()).map(|k| self.curvature[k] * (w[k] - opt[k])).collect()
    }

    /// `L = max H`, `δ² = max_i ‖H(w*_i − w̄*)‖²`, and `σ²` as the largest
    /// per-node mean of `‖∇ℓ − ∇𝓛_i‖²` over `draws` minibatches.
    pub fn constants(&self, seed: u64, draws: usize) -> QuadraticConstants {
        let d = self.spec.dimension;
        let optimum = self.optimum();
        let lipschitz = self.curvature.iter().fold(0.0, |m: f64, &h| m.max(h));
        let delta2 = self
            .local_optima
            .iter()
            .map(|o| {
                (0..d)
                    .map(|k| {
                        let g = self.curvature[k] * (o[k] - optimum[k]);
                        g * g
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        let mut sigma2: f64 = 0.0;
        let mut g = vec![0.0; d];
        for node in 0..self.spec.nodes {
            let opt = &self.local_optima[node];
            let mut total = 0.0;
            for k in 0..draws {
                let mut rng = rng::stream(seed, Domain::Sampling, &[node as u64, k as u64]);
                self.minibatch_gradient(node, opt, &mut rng, &mut g);
                total += dot(&g, &g);
            }
            sigma2 = sigma2.max(total / draws.max(1) as f64);
        }
        QuadraticConstants {
            lipschitz,
            sigma2,
            delta2,
            optimal_loss: self.global_loss(&optimum),
            optimum,
        }
    }
}

/// Softmax regression on Gaussian clusters with label-skewed nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxTask {
    pub spec: TaskSpec,
    pub class_means: Vec<Vec<f64>>,
    /// Per node: feature rows and labels.
    pub features: Vec<Vec<Vec<f64>>>,
    pub labels: Vec<Vec<usize>>,
    pub test_features: Vec<Vec<f64>>,
    pub test_labels: Vec<usize>,
}

impl SoftmaxTask {
    fn build(spec: &TaskSpec, seed: u64) -> Self {
        let c = spec.classes;
        let f = spec.dimension;
        let mut rng = rng::stream(seed, Domain::TaskData, &[]);
        let class_means: Vec<Vec<f64>> = (0..c).map(|_| gaussian_vec(&mut rng, f, 1.0)).collect();
        let counts = sample_counts(spec, &mut rng);
        let mut features = Vec::with_capacity(spec.nodes);
        let mut labels = Vec::with_capacity(spec.nodes);
        for (node, &count) in counts.iter().enumerate() {
            let favored = node % c;
            let base = (1.0 - spec.heterogeneity) / c as f64;
            let mut xs = Vec::with_capacity(count);
            let mut ys = Vec::with_capacity(count);
            for _ in 0..count {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut label = c - 1;
                for k in 0..c {
                    acc += base + if k == favored { spec.heterogeneity } else { 0.0 };
                    if u < acc {
                        label = k;
                        break;
                    }
                }
                xs.push(Self::draw(&class_means[label], spec.noise, &mut rng));
                ys.push(label);
            }
            features.push(xs);
            labels.push(ys);
        }
        let mut test_features = Vec::with_capacity(spec.test_samples);
        let mut test_labels = Vec::with_capacity(spec.test_samples);
        for k in 0..spec.test_samples {
            let label = k % c;
            test_features.push(Self::draw(&class_means[label], spec.noise, &mut rng));
            test_labels.push(label);
        }
        SoftmaxTask {
            spec: spec.clone(),
            class_means,
            features,
            labels,
            test_features,
            test_labels,
        }
    }

    fn draw(mean: &[f64], noise: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
        mean.iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                m + noise * z
            })
            .collect()
    }

    fn stride(&self) -> usize {
        self.spec.dimension + 1
    }

    /// Class logits for one feature row (bias stored last in each row of `w`).
    fn logits(&self, w: &[f64], x: &[f64], out: &mut [f64]) {
        let s = self.stride();
        for (c, o) in out.iter_mut().enumerate() {
            let row = &w[c * s..(c + 1) * s];
            *o = dot(&row[..s - 1], x) + row[s - 1];
        }
    }

    /// Softmax probabilities in place; returns `log Σ exp`.
    fn softmax(z: &mut [f64]) -> f64 {
        let m = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut total = 0.0;
        for v in z.iter_mut() {
            *v = libm::exp(*v - m);
            total += *v;
        }
        z.iter_mut().for_each(|v| *v /= total);
        m + libm::log(total)
    }

    /// Add `scale·∇ℓ(w, (x, y))` into `out` and return the loss.
    fn accumulate(&self, w: &[f64], x: &[f64], y: usize, scale: f64, z: &mut [f64], out: &mut [f64]) -> f64 {
        self.logits(w, x, z);
        let correct = z[y];
        let lse = Self::softmax(z);
        let s = self.stride();
        for (c, &p) in z.iter().enumerate() {
            let coef = scale * (p - if c == y { 1.0 } else { 0.0 });
            let row = &mut out[c * s..(c + 1) * s];
            for (r, xi) in row[..s - 1].iter_mut().zip(x) {
                *r += coef * xi;
            }
            row[s - 1] += coef;
        }
        lse - correct
    }

    fn minibatch_gradient(&self, node: usize, w: &[f64], rng: &mut ChaCha8Rng, out: &mut [f64]) {
        out.iter_mut().for_each(|g| *g = 0.0);
        let xs = &self.features[node];
        let ys = &self.labels[node];
        let b = self.spec.batch_size;
        let mut z = vec![0.0; self.spec.classes];
        for _ in 0..b {
            let k = rng.random_range(0..xs.len());
            self.accumulate(w, &xs[k], ys[k], 1.0 / b as f64, &mut z, out);
        }
    }

    fn loss_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let n = self.spec.nodes as f64;
        let mut grad = vec![0.0; w.len()];
        let mut z = vec![0.0; self.spec.classes];
        let mut loss = 0.0;
        for (xs, ys) in self.features.iter().zip(&self.labels) {
            let scale = 1.0 / (n * xs.len() as f64);
            for (x, &y) in xs.iter().zip(ys) {
                loss += scale * self.accumulate(w, x, y, scale, &mut z, &mut grad);
            }
        }
        (loss, grad)
    }

    fn global_loss(&self, w: &[f64]) -> f64 {
        self.loss_and_gradient(w).0
    }

    fn global_gradient(&self, w: &[f64]) -> Vec<f64> {
        self.loss_and_gradient(w).1
    }

    fn accuracy(&self, w: &[f64]) -> f64 {
        let mut z = vec![0.0; self.spec.classes];
        let hits = self
            .test_features
            .iter()
            .zip(&self.test_labels)
            .filter(|(x, &y)| {
                self.logits(w, x, &mut z);
                let mut best = 0;
                for k in 1..z.len() {
                    if z[k] > z[best] {
                        best = k;
                    }
                }
                best == y
            })
            .count();
        hits as f64 / self.test_labels.len() as f64
    }
}
