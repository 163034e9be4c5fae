//! Online and offline training with weight decay.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::geometry::{CleanDataset, NoisyDataset};
use crate::io::{fmt_real, KvEntry};
use crate::network::ShallowNet;
use crate::rng::{self, tag};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    /// Fresh noise every step.
    Online,
    /// Fixed noisy replicates per clean point.
    Offline { replicates: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Optimizer {
    Sgd,
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl Optimizer {
    pub const ADAM: Optimizer = Optimizer::Adam { beta1: 0.9, beta2: 0.999, eps: 1e-8 };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant,
    CosineToZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: Mode,
    /// Optimizer steps (online) or epochs (offline).
    pub iterations: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub schedule: Schedule,
    /// Record one trace row every this many iterations (and at the end).
    pub trace_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Online,
            iterations: 1000,
            batch_size: 32,
            learning_rate: 1e-3,
            lambda: 1e-5,
            sigma: 0.1,
            seed: 0,
            optimizer: Optimizer::ADAM,
            schedule: Schedule::Constant,
            trace_every: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be >= 0");
        }
        if !(self.sigma >= 0.0) {
            return bad("sigma must be >= 0");
        }
        if self.iterations == 0 || self.batch_size == 0 || self.trace_every == 0 {
            return bad("iterations, batch_size and trace_every must be >= 1");
        }
        if let Mode::Offline { replicates: 0 } = self.mode {
            return bad("replicates must be >= 1");
        }
        Ok(())
    }

    /// Applies one `key = value` entry. Returns `false` for unknown keys.
    pub fn apply(&mut self, e: &KvEntry) -> Result<bool> {
        match e.key.as_str() {
            "mode" => {
                self.mode = match e.value.as_str() {
                    "online" => Mode::Online,
                    "offline" => Mode::Offline {
                        replicates: match self.mode {
                            Mode::Offline { replicates } => replicates,
                            Mode::Online => 1,
                        },
                    },
                    other => return Err(e.error(format!("unknown mode `{other}`"))),
                }
            }
            "replicates" => {
                let m = e.parse()?;
                self.mode = Mode::Offline { replicates: m };
            }
            "iterations" => self.iterations = e.parse()?,
            "batch_size" => self.batch_size = e.parse()?,
            "learning_rate" => self.learning_rate = e.parse()?,
            "lambda" => self.lambda = e.parse()?,
            "sigma" => self.sigma = e.parse()?,
            "seed" => self.seed = e.parse()?,
            "trace_every" => self.trace_every = e.parse()?,
            "optimizer" => {
                self.optimizer = match e.value.as_str() {
                    "sgd" => Optimizer::Sgd,
                    "adam" => match self.optimizer {
                        a @ Optimizer::Adam { .. } => a,
                        Optimizer::Sgd => Optimizer::ADAM,
                    },
                    other => return Err(e.error(format!("unknown optimizer `{other}`"))),
                }
            }
            "adam_beta1" | "adam_beta2" | "adam_eps" => {
                let v: f64 = e.parse()?;
                let (mut b1, mut b2, mut eps) = match self.optimizer {
                    Optimizer::Adam { beta1, beta2, eps } => (beta1, beta2, eps),
                    Optimizer::Sgd => (0.9, 0.999, 1e-8),
                };
                match e.key.as_str() {
                    "adam_beta1" => b1 = v,
                    "adam_beta2" => b2 = v,
                    _ => eps = v,
                }
                self.optimizer = Optimizer::Adam { beta1: b1, beta2: b2, eps };
            }
            "schedule" => {
                self.schedule = match e.value.as_str() {
                    "constant" => Schedule::Constant,
                    "cosine" => Schedule::CosineToZero,
                    other => return Err(e.error(format!("unknown schedule `{other}`"))),
                }
            }
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Parses a flat config file; unknown keys are an error.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for e in crate::io::parse_kv(text)? {
            if !cfg.apply(&e)? {
                return Err(e.error("unknown key"));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inverse of [`TrainConfig::from_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.mode {
            Mode::Online => out.push_str("mode = online\n"),
            Mode::Offline { replicates } => {
                let _ = writeln!(out, "mode = offline\nreplicates = {replicates}");
            }
        }
        let _ = writeln!(out, "iterations = {}", self.iterations);
        let _ = writeln!(out, "batch_size = {}", self.batch_size);
        let _ = writeln!(out, "learning_rate = {}", self.learning_rate);
        let _ = writeln!(out, "lambda = {}", self.lambda);
        let _ = writeln!(out, "sigma = {}", self.sigma);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "trace_every = {}", self.trace_every);
        match self.optimizer {
            Optimizer::Sgd => out.push_str("optimizer = sgd\n"),
            Optimizer::Adam { beta1, beta2, eps } => {
                let _ = writeln!(out, "optimizer = adam\nadam_beta1 = {beta1}\nadam_beta2 = {beta2}\nadam_eps = {eps}");
            }
        }
        out.push_str(match self.schedule {
            Schedule::Constant => "schedule = constant\n",
            Schedule::CosineToZero => "schedule = cosine\n",
        });
        out
    }

    fn lr_at(&self, step: usize, total: usize) -> f64 {
        match self.schedule {
            Schedule::Constant => self.learning_rate,
            Schedule::CosineToZero => 0.5 * self.learning_rate * (1.0 + (PI * step as f64 / total as f64).cos()),
        }
    }
}

/// `y_{n,m} = x_n + σ g_{n,m}` with `g_{n,m}` drawn from the stream keyed by `(seed, n, m)`.
pub fn gen_noisy(ds: &CleanDataset, replicates: usize, sigma: f64, seed: u64) -> Result<NoisyDataset> {
    if replicates == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidParameter("sigma must be >= 0".into()));
    }
    let samples = ds
        .points()
        .iter()
        .enumerate()
        .map(|(n, x)| {
            (0..replicates)
                .map(|m| {
                    let g = rng::normal_vec(seed, &[tag::NOISE, n as u64, m as u64], x.len());
                    x.iter().zip(&g).map(|(xi, gi)| xi + sigma * gi).collect()
                })
                .collect()
        })
        .collect();
    NoisyDataset::new(ds.clone(), samples, sigma)
}

/// One row of the training trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub loss: f64,
    pub penalty: f64,
    pub balanced_cost: f64,
}

/// CSV `step,loss,penalty,balanced_cost`.
pub fn trace_csv(trace: &[TraceRow]) -> String {
    let mut out = String::from("step,loss,penalty,balanced_cost\n");
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.step,
            fmt_real(r.loss),
            fmt_real(r.penalty),
            fmt_real(r.balanced_cost)
        );
    }
    out
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub net: ShallowNet,
    pub trace: Vec<TraceRow>,
}

struct OptState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl OptState {
    fn new(n: usize) -> Self {
        Self { m: vec![0.0; n], v: vec![0.0; n], t: 0 }
    }

    fn step(&mut self, opt: Optimizer, lr: f64, params: &mut [f64], grad: &[f64]) {
        match opt {
            Optimizer::Sgd => {
                for (p, g) in params.iter_mut().zip(grad) {
                    *p -= lr * g;
                }
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                self.t += 1;
                let c1 = 1.0 - beta1.powi(self.t);
                let c2 = 1.0 - beta2.powi(self.t);
                for i in 0..params.len() {
                    self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * grad[i];
                    self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * grad[i] * grad[i];
                    // Dead units decay their moments geometrically; keep them out of the subnormal range.
                    if self.m[i].abs() < f64::MIN_POSITIVE {
                        self.m[i] = 0.0;
                    }
                    if self.v[i] < f64::MIN_POSITIVE {
                        self.v[i] = 0.0;
                    }
                    let mh = self.m[i] / c1;
                    let vh = self.v[i] / c2;
                    params[i] -= lr * mh / (vh.sqrt() + eps);
                }
            }
        }
    }
}

struct Guard {
    reference: Option<f64>,
    history: Vec<f64>,
}

impl Guard {
    fn check(&mut self, step: usize, loss: f64) -> Result<()> {
        self.history.push(loss);
        let reference = *self.reference.get_or_insert(loss.max(1e-12));
        if !loss.is_finite() || loss > 1e6 * reference {
            return Err(Error::DivergedLoss { step, trace: std::mem::take(&mut self.history) });
        }
        Ok(())
    }
}

fn row(step: usize, loss: f64, net: &ShallowNet) -> TraceRow {
    TraceRow { step, loss, penalty: net.penalty(), balanced_cost: net.balanced_cost() }
}

/// Trains a copy of `net0`. Offline mode needs the fixed noisy dataset.
pub fn train(net0: &ShallowNet, clean: &CleanDataset, noisy: Option<&NoisyDataset>, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if clean.dim() != net0.dim() {
        return Err(Error::DimensionMismatch { expected: net0.dim(), got: clean.dim() });
    }
    match cfg.mode {
        Mode::Online => train_online(net0, clean, cfg),
        Mode::Offline { .. } => {
            let noisy = noisy.ok_or_else(|| Error::InvalidParameter("offline training needs a noisy dataset".into()))?;
            train_offline(net0, noisy, cfg)
        }
    }
}

/// Fresh noise per step: slot `j` of step `t` uses the stream `(seed, t, j)`.
pub fn train_online(net0: &ShallowNet, clean: &CleanDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut net = net0.clone();
    let mut opt = OptState::new(net.params().len());
    let mut guard = Guard { reference: None, history: Vec::new() };
    let mut trace = Vec::new();
    let d = clean.dim();
    let n = clean.len();
    let mut ys = vec![vec![0.0; d]; cfg.batch_size];
    let mut idx = vec![0usize; cfg.batch_size];
    for t in 0..cfg.iterations {
        for j in 0..cfg.batch_size {
            let mut r = rng::keyed(cfg.seed, &[tag::ONLINE, t as u64, j as u64]);
            idx[j] = if n == 1 { 0 } else { r.random_range(0..n) };
            for (yi, xi) in ys[j].iter_mut().zip(clean.point(idx[j])) {
                *yi = xi + cfg.sigma * rng::std_normal(&mut r);
            }
        }
        let batch = ys.iter().zip(&idx).map(|(y, &i)| (y.as_slice(), clean.point(i)));
        let (loss, grad) = net.loss_and_grad(batch, cfg.lambda)?;
        guard.check(t, loss)?;
        if t % cfg.trace_every == 0 {
            trace.push(row(t, loss, &net));
        }
        opt.step(cfg.optimizer, cfg.lr_at(t, cfg.iterations), net.params_mut(), &grad);
    }
    let final_loss = online_estimate(&net, clean, cfg)?;
    trace.push(row(cfg.iterations, final_loss, &net));
    Ok(TrainOutcome { net, trace })
}

fn online_estimate(net: &ShallowNet, clean: &CleanDataset, cfg: &TrainConfig) -> Result<f64> {
    let t = cfg.iterations as u64;
    let mut pairs = Vec::with_capacity(cfg.batch_size);
    for j in 0..cfg.batch_size {
        let mut r = rng::keyed(cfg.seed, &[tag::ONLINE, t, j as u64]);
        let i = if clean.len() == 1 { 0 } else { r.random_range(0..clean.len()) };
        let y: Vec<f64> = clean.point(i).iter().map(|x| x + cfg.sigma * rng::std_normal(&mut r)).collect();
        pairs.push((y, clean.point(i).to_vec()));
    }
    Ok(net.loss_and_grad_pairs(&pairs, cfg.lambda)?.0)
}

/// Regularized empirical objective over every fixed noisy pair.
pub fn offline_objective(net: &ShallowNet, noisy: &NoisyDataset, lambda: f64) -> Result<f64> {
    let pairs = noisy
        .samples()
        .iter()
        .zip(noisy.clean().points())
        .flat_map(|(row, x)| row.iter().map(move |y| (y.as_slice(), x.as_slice())));
    Ok(net.loss_and_grad(pairs, lambda)?.0)
}

/// Epochs over the fixed pairs, reshuffled from `(seed, epoch)`. A batch at
/// least as large as the dataset is full-batch gradient descent; in one
/// dimension that path uses [`FullBatch1D`].
pub fn train_offline(net0: &ShallowNet, noisy: &NoisyDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if noisy.clean().dim() != net0.dim() {
        return Err(Error::DimensionMismatch { expected: net0.dim(), got: noisy.clean().dim() });
    }
    let pairs: Vec<(&[f64], &[f64])> = noisy
        .samples()
        .iter()
        .zip(noisy.clean().points())
        .flat_map(|(row, x)| row.iter().map(move |y| (y.as_slice(), x.as_slice())))
        .collect();
    let total = pairs.len();
    let full = cfg.batch_size >= total;
    let fast = if full && net0.dim() == 1 && net0.use_skip() { Some(FullBatch1D::new(noisy)) } else { None };

    let mut net = net0.clone();
    let mut opt = OptState::new(net.params().len());
    let mut guard = Guard { reference: None, history: Vec::new() };
    let mut trace = Vec::new();
    let mut order: Vec<usize> = (0..total).collect();
    let steps_per_epoch = total.div_ceil(cfg.batch_size.min(total));
    let total_steps = cfg.iterations * steps_per_epoch;
    let mut step = 0;
    for epoch in 0..cfg.iterations {
        let mut epoch_loss = 0.0;
        if full {
            let (loss, grad) = match &fast {
                Some(f) => f.loss_and_grad(&net, cfg.lambda),
                None => net.loss_and_grad(pairs.iter().copied(), cfg.lambda)?,
            };
            epoch_loss = loss;
            guard.check(epoch, loss)?;
            if epoch % cfg.trace_every == 0 {
                trace.push(row(epoch, loss, &net));
            }
            opt.step(cfg.optimizer, cfg.lr_at(step, total_steps), net.params_mut(), &grad);
            step += 1;
        } else {
            let mut r = rng::keyed(cfg.seed, &[tag::SHUFFLE, epoch as u64]);
            order.shuffle(&mut r);
            for chunk in order.chunks(cfg.batch_size) {
                let (loss, grad) = net.loss_and_grad(chunk.iter().map(|&i| pairs[i]), cfg.lambda)?;
                epoch_loss += loss * chunk.len() as f64 / total as f64;
                opt.step(cfg.optimizer, cfg.lr_at(step, total_steps), net.params_mut(), &grad);
                step += 1;
            }
            guard.check(epoch, epoch_loss)?;
            if epoch % cfg.trace_every == 0 {
                trace.push(row(epoch, epoch_loss, &net));
            }
        }
        let _ = epoch_loss;
    }
    let final_loss = match &fast {
        Some(f) => f.loss_and_grad(&net, cfg.lambda).0,
        None => offline_objective(&net, noisy, cfg.lambda)?,
    };
    trace.push(row(cfg.iterations, final_loss, &net));
    Ok(TrainOutcome { net, trace })
}

/// Exact full-batch loss and gradient for univariate data in
/// `O(S + K log S)` per step.
///
/// Samples are sorted once. The network is piecewise linear with kinks at
/// `-b_k / w_k`, so a sweep over sorted kinks evaluates it at every sample;
/// prefix sums of the residual `r` and of `r y` then give each unit's
/// gradient from its active range alone.
pub struct FullBatch1D {
    ys: Vec<f64>,
    xs: Vec<f64>,
}

impl FullBatch1D {
    pub fn new(noisy: &NoisyDataset) -> Self {
        let mut pairs: Vec<(f64, f64)> = noisy
            .samples()
            .iter()
            .zip(noisy.clean().points())
            .flat_map(|(row, x)| row.iter().map(move |y| (y[0], x[0])))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let (ys, xs) = pairs.into_iter().unzip();
        Self { ys, xs }
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    /// Network outputs at every sorted sample.
    pub fn outputs(&self, net: &ShallowNet) -> Vec<f64> {
        let k = net.width();
        let (v, c) = (net.v().map_or(0.0, |v| v[0]), net.c().map_or(0.0, |c| c[0]));
        // Start left of everything: units with w < 0 (and w = 0, b > 0) are active.
        let (mut slope, mut icpt) = (v, c);
        let mut events: Vec<(f64, usize)> = Vec::with_capacity(k);
        for i in 0..k {
            let (a, w, b) = (net.a(i)[0], net.w(i)[0], net.b()[i]);
            if w < 0.0 {
                slope += a * w;
                icpt += a * b;
                events.push((-b / w, i));
            } else if w > 0.0 {
                events.push((-b / w, i));
            } else if b > 0.0 {
                icpt += a * b;
            }
        }
        events.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut out = Vec::with_capacity(self.ys.len());
        let mut e = 0;
        for &y in &self.ys {
            // A unit switches once y passes its threshold strictly (w > 0
            // activates, w < 0 deactivates at y >= t).
            while e < events.len() && {
                let (t, i) = events[e];
                if net.w(i)[0] > 0.0 { y > t } else { y >= t }
            } {
                let i = events[e].1;
                let (a, w, b) = (net.a(i)[0], net.w(i)[0], net.b()[i]);
                if w > 0.0 {
                    slope += a * w;
                    icpt += a * b;
                } else {
                    slope -= a * w;
                    icpt -= a * b;
                }
                e += 1;
            }
            out.push(slope * y + icpt);
        }
        out
    }

    pub fn loss_and_grad(&self, net: &ShallowNet, lambda: f64) -> (f64, Vec<f64>) {
        let s = self.ys.len();
        let k = net.width();
        let h = self.outputs(net);
        let mut pr = Vec::with_capacity(s + 1);
        let mut pry = Vec::with_capacity(s + 1);
        pr.push(0.0);
        pry.push(0.0);
        let mut sse = 0.0;
        for i in 0..s {
            let r = h[i] - self.xs[i];
            sse += r * r;
            pr.push(pr[i] + r);
            pry.push(pry[i] + r * self.ys[i]);
        }
        let scale = 2.0 / s as f64;
        let mut grad = vec![0.0; net.params().len()];
        for i in 0..k {
            let (a, w, b) = (net.a(i)[0], net.w(i)[0], net.b()[i]);
            let (sr, sry) = if w > 0.0 {
                let t = -b / w;
                let lo = self.ys.partition_point(|&y| y <= t);
                (pr[s] - pr[lo], pry[s] - pry[lo])
            } else if w < 0.0 {
                let t = -b / w;
                let hi = self.ys.partition_point(|&y| y < t);
                (pr[hi], pry[hi])
            } else if b > 0.0 {
                (pr[s], pry[s])
            } else {
                (0.0, 0.0)
            };
            grad[i] = scale * (w * sry + b * sr) + lambda * a;
            grad[k + i] = scale * a * sry + lambda * w;
            grad[2 * k + i] = scale * a * sr;
        }
        if net.use_skip() {
            grad[3 * k] = scale * pry[s];
            grad[3 * k + 1] = scale * pr[s];
        }
        (sse / s as f64 + lambda * net.penalty(), grad)
    }
}
