//! One-hidden-layer ReLU network with a linear skip connection:
//! `h(y) = Σ_k a_k [w_kᵀy + b_k]_+ + V y + c`.

use std::fmt::Write as _;

use rand::Rng;
use serde_json::Value;

use crate::closed_form::{real, reals, ClosedForm, PiecewiseLinear1D};
use crate::io::fmt_real;
use crate::linalg::{dot, norm};
use crate::rng::{self, tag};
use crate::{Denoiser, Error, Result};

/// Network parameters in one flat array.
///
/// Layout: `a_1..a_K` (each `d`), `w_1..w_K` (each `d`), `b_1..b_K`, then,
/// when the skip connection is enabled, `V` row-major (`d x d`) and `c` (`d`).
#[derive(Debug, Clone, PartialEq)]
pub struct ShallowNet {
    d: usize,
    k: usize,
    use_skip: bool,
    params: Vec<f64>,
}

/// A hidden unit as seen from input space.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedUnit {
    pub index: usize,
    /// `w_k / ‖w_k‖`.
    pub normal: Vec<f64>,
    /// The boundary is `{y : normalᵀy = offset}` with `offset = -b_k / ‖w_k‖`.
    pub offset: f64,
    /// `‖a_k‖ ‖w_k‖`.
    pub strength: f64,
    /// `a_k / ‖a_k‖`.
    pub out_dir: Vec<f64>,
}

impl ShallowNet {
    pub fn param_count(d: usize, k: usize, use_skip: bool) -> usize {
        2 * k * d + k + if use_skip { d * d + d } else { 0 }
    }

    pub fn zeros(d: usize, k: usize, use_skip: bool) -> Self {
        Self { d, k, use_skip, params: vec![0.0; Self::param_count(d, k, use_skip)] }
    }

    pub fn from_params(d: usize, k: usize, use_skip: bool, params: Vec<f64>) -> Result<Self> {
        let expected = Self::param_count(d, k, use_skip);
        if params.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: params.len() });
        }
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter("non-finite parameter".into()));
        }
        Ok(Self { d, k, use_skip, params })
    }

    /// Random start: `w_k` uniform on the sphere, `b_k` uniform in
    /// `[-radius, radius]`, `a_k ~ N(0, I/K)`, `V = I`, `c = 0`.
    pub fn init(d: usize, k: usize, use_skip: bool, radius: f64, seed: u64) -> Self {
        let mut net = Self::zeros(d, k, use_skip);
        let mut rng = rng::keyed(seed, &[tag::INIT]);
        let scale = 1.0 / (k as f64).sqrt();
        for i in 0..k {
            let a: Vec<f64> = (0..d).map(|_| scale * rng::std_normal(&mut rng)).collect();
            let w = loop {
                let g: Vec<f64> = (0..d).map(|_| rng::std_normal(&mut rng)).collect();
                let n = norm(&g);
                if n > 1e-12 {
                    break g.iter().map(|v| v / n).collect::<Vec<_>>();
                }
            };
            let b = if radius > 0.0 { rng.random_range(-radius..=radius) } else { 0.0 };
            net.a_mut(i).copy_from_slice(&a);
            net.w_mut(i).copy_from_slice(&w);
            net.b_mut()[i] = b;
        }
        if use_skip {
            let v = net.v_mut().expect("skip enabled");
            for j in 0..d {
                v[j * d + j] = 1.0;
            }
        }
        net
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn width(&self) -> usize {
        self.k
    }

    pub fn use_skip(&self) -> bool {
        self.use_skip
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn a(&self, k: usize) -> &[f64] {
        &self.params[k * self.d..(k + 1) * self.d]
    }

    pub fn a_mut(&mut self, k: usize) -> &mut [f64] {
        let d = self.d;
        &mut self.params[k * d..(k + 1) * d]
    }

    fn w_start(&self) -> usize {
        self.k * self.d
    }

    fn b_start(&self) -> usize {
        2 * self.k * self.d
    }

    fn v_start(&self) -> usize {
        2 * self.k * self.d + self.k
    }

    pub fn w(&self, k: usize) -> &[f64] {
        let s = self.w_start() + k * self.d;
        &self.params[s..s + self.d]
    }

    pub fn w_mut(&mut self, k: usize) -> &mut [f64] {
        let s = self.w_start() + k * self.d;
        let d = self.d;
        &mut self.params[s..s + d]
    }

    pub fn b(&self) -> &[f64] {
        &self.params[self.b_start()..self.v_start()]
    }

    pub fn b_mut(&mut self) -> &mut [f64] {
        let (s, e) = (self.b_start(), self.v_start());
        &mut self.params[s..e]
    }

    /// Skip matrix, row-major; `None` without skip connection.
    pub fn v(&self) -> Option<&[f64]> {
        let s = self.v_start();
        self.use_skip.then(|| &self.params[s..s + self.d * self.d])
    }

    pub fn v_mut(&mut self) -> Option<&mut [f64]> {
        let s = self.v_start();
        let dd = self.d * self.d;
        if self.use_skip {
            Some(&mut self.params[s..s + dd])
        } else {
            None
        }
    }

    pub fn c(&self) -> Option<&[f64]> {
        let s = self.v_start() + self.d * self.d;
        self.use_skip.then(|| &self.params[s..s + self.d])
    }

    pub fn c_mut(&mut self) -> Option<&mut [f64]> {
        let s = self.v_start() + self.d * self.d;
        let d = self.d;
        if self.use_skip {
            Some(&mut self.params[s..s + d])
        } else {
            None
        }
    }

    /// Pre-activation `w_kᵀy + b_k`.
    pub fn preactivation(&self, k: usize, y: &[f64]) -> f64 {
        dot(self.w(k), y) + self.b()[k]
    }

    pub fn forward(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: y.len() });
        }
        Ok(self.forward_unchecked(y))
    }

    fn forward_unchecked(&self, y: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = match (self.v(), self.c()) {
            (Some(v), Some(c)) => (0..d).map(|i| dot(&v[i * d..(i + 1) * d], y) + c[i]).collect(),
            _ => vec![0.0; d],
        };
        for k in 0..self.k {
            let z = self.preactivation(k, y);
            if z > 0.0 {
                for (o, a) in out.iter_mut().zip(self.a(k)) {
                    *o += a * z;
                }
            }
        }
        out
    }

    /// `½ Σ_k (‖a_k‖² + ‖w_k‖²)`.
    pub fn penalty(&self) -> f64 {
        0.5 * self.params[..2 * self.k * self.d].iter().map(|p| p * p).sum::<f64>()
    }

    /// `Σ_k ‖a_k‖ ‖w_k‖`, the rescaling-invariant cost.
    pub fn balanced_cost(&self) -> f64 {
        (0..self.k).map(|k| norm(self.a(k)) * norm(self.w(k))).sum()
    }

    /// Rescales every unit so that `‖a_k‖ = ‖w_k‖` without changing the function.
    pub fn balance(&mut self) {
        for k in 0..self.k {
            let (na, nw) = (norm(self.a(k)), norm(self.w(k)));
            if na > 0.0 && nw > 0.0 {
                let t = (na / nw).sqrt();
                self.a_mut(k).iter_mut().for_each(|v| *v /= t);
                self.w_mut(k).iter_mut().for_each(|v| *v *= t);
                self.b_mut()[k] *= t;
            }
        }
    }

    /// Mean squared error over the batch plus `λ` times the penalty, and its
    /// gradient in the flat parameter layout. The ReLU derivative at 0 is 0.
    pub fn loss_and_grad<'a, I>(&self, batch: I, lambda: f64) -> Result<(f64, Vec<f64>)>
    where
        I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
    {
        let d = self.d;
        let mut grad = vec![0.0; self.params.len()];
        let mut sse = 0.0;
        let mut count = 0usize;
        let mut acts = vec![0.0; self.k];
        let mut resid = vec![0.0; d];
        let (ws, bs, vs) = (self.w_start(), self.b_start(), self.v_start());
        for (y, x) in batch {
            if y.len() != d || x.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: y.len().max(x.len()) });
            }
            count += 1;
            let mut out = match (self.v(), self.c()) {
                (Some(v), Some(c)) => (0..d).map(|i| dot(&v[i * d..(i + 1) * d], y) + c[i]).collect(),
                _ => vec![0.0; d],
            };
            for k in 0..self.k {
                let z = self.preactivation(k, y);
                acts[k] = if z > 0.0 { z } else { 0.0 };
                if z > 0.0 {
                    for (o, a) in out.iter_mut().zip(self.a(k)) {
                        *o += a * z;
                    }
                }
            }
            for i in 0..d {
                resid[i] = out[i] - x[i];
                sse += resid[i] * resid[i];
            }
            for k in 0..self.k {
                if acts[k] <= 0.0 {
                    continue;
                }
                let ga = &mut grad[k * d..(k + 1) * d];
                for i in 0..d {
                    ga[i] += 2.0 * resid[i] * acts[k];
                }
                let g = 2.0 * dot(self.a(k), &resid);
                let gw = &mut grad[ws + k * d..ws + (k + 1) * d];
                for i in 0..d {
                    gw[i] += g * y[i];
                }
                grad[bs + k] += g;
            }
            if self.use_skip {
                for i in 0..d {
                    for j in 0..d {
                        grad[vs + i * d + j] += 2.0 * resid[i] * y[j];
                    }
                    grad[vs + d * d + i] += 2.0 * resid[i];
                }
            }
        }
        if count == 0 {
            return Err(Error::EmptyBatch);
        }
        let inv = 1.0 / count as f64;
        grad.iter_mut().for_each(|g| *g *= inv);
        let reg = 2 * self.k * d;
        for (g, p) in grad[..reg].iter_mut().zip(&self.params[..reg]) {
            *g += lambda * p;
        }
        Ok((sse * inv + lambda * self.penalty(), grad))
    }

    /// Convenience wrapper over owned `(y, x)` pairs.
    pub fn loss_and_grad_pairs(&self, batch: &[(Vec<f64>, Vec<f64>)], lambda: f64) -> Result<(f64, Vec<f64>)> {
        self.loss_and_grad(batch.iter().map(|(y, x)| (y.as_slice(), x.as_slice())), lambda)
    }

    /// Units carrying at least `significance` of the total strength.
    /// Units with `w_k = 0` are never returned.
    pub fn extract_units(&self, significance: f64) -> Vec<ExtractedUnit> {
        let strengths: Vec<f64> = (0..self.k).map(|k| norm(self.a(k)) * norm(self.w(k))).collect();
        let total: f64 = strengths.iter().sum();
        let mut out = Vec::new();
        for k in 0..self.k {
            let nw = norm(self.w(k));
            if nw == 0.0 {
                continue;
            }
            if significance > 0.0 && !(strengths[k] > 0.0 && strengths[k] >= significance * total) {
                continue;
            }
            let na = norm(self.a(k));
            out.push(ExtractedUnit {
                index: k,
                normal: self.w(k).iter().map(|v| v / nw).collect(),
                offset: -self.b()[k] / nw,
                strength: strengths[k],
                out_dir: if na > 0.0 { self.a(k).iter().map(|v| v / na).collect() } else { vec![0.0; self.d] },
            });
        }
        out
    }

    /// Exact realization of a closed form: one unit per profile slope change.
    pub fn from_closed_form(f: &ClosedForm) -> Self {
        match f {
            ClosedForm::Univariate(p) => {
                let parts = RampParts::of(p);
                let mut net = Self::zeros(1, parts.kinks.len(), true);
                for (k, &(t, jump)) in parts.kinks.iter().enumerate() {
                    net.a_mut(k)[0] = jump;
                    net.w_mut(k)[0] = 1.0;
                    net.b_mut()[k] = -t;
                }
                net.v_mut().expect("skip")[0] = parts.base_slope;
                net.c_mut().expect("skip")[0] = parts.base_value;
                net
            }
            ClosedForm::RankOneSum(r) => {
                let d = r.offset.len();
                let parts: Vec<RampParts> = r.units.iter().map(|u| RampParts::of(&u.profile)).collect();
                let width = parts.iter().map(|p| p.kinks.len()).sum();
                let mut net = Self::zeros(d, width, true);
                let mut c = r.offset.clone();
                let mut v = vec![0.0; d * d];
                let mut k = 0;
                for (unit, part) in r.units.iter().zip(&parts) {
                    let shift = dot(&unit.u, &unit.z);
                    for &(t, jump) in &part.kinks {
                        for i in 0..d {
                            net.a_mut(k)[i] = jump * unit.v[i];
                        }
                        net.w_mut(k).copy_from_slice(&unit.u);
                        net.b_mut()[k] = -(shift + t);
                        k += 1;
                    }
                    // φ(t) = base_value + base_slope·t + Σ kinks, with t = uᵀy - uᵀz.
                    let constant = part.base_value - part.base_slope * shift;
                    for i in 0..d {
                        c[i] += unit.v[i] * constant;
                        for j in 0..d {
                            v[i * d + j] += part.base_slope * unit.v[i] * unit.u[j];
                        }
                    }
                }
                net.v_mut().expect("skip").copy_from_slice(&v);
                net.c_mut().expect("skip").copy_from_slice(&c);
                net
            }
        }
    }

    /// JSON text with shape header; reals at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"type\":\"shallow_net\",\"d\":{},\"K\":{},\"use_skip\":{},\"params\":[",
            self.d, self.k, self.use_skip
        );
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_real(*p));
        }
        out.push_str("]}");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if v.get("type").and_then(Value::as_str) != Some("shallow_net") {
            return Err(Error::Format("not a shallow_net weight file".into()));
        }
        let d = real(&v, "d")? as usize;
        let k = real(&v, "K")? as usize;
        let use_skip = v
            .get("use_skip")
            .and_then(Value::as_bool)
            .ok_or_else(|| Error::Format("missing `use_skip`".into()))?;
        Self::from_params(d, k, use_skip, reals(&v, "params")?)
    }
}

/// `φ(t) = base_value + base_slope·t + Σ jump_i [t - t_i]_+`.
struct RampParts {
    base_value: f64,
    base_slope: f64,
    kinks: Vec<(f64, f64)>,
}

impl RampParts {
    fn of(p: &PiecewiseLinear1D) -> Self {
        let slopes = p.slopes();
        let scale = slopes.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        let kinks = p
            .knots()
            .iter()
            .zip(slopes.windows(2))
            .map(|(&t, w)| (t, w[1] - w[0]))
            .filter(|&(_, j)| j.abs() > 1e-14 * scale)
            .collect();
        let t1 = p.knots()[0];
        Self { base_value: p.values()[0] - slopes[0] * t1, base_slope: slopes[0], kinks }
    }
}

impl Denoiser for ShallowNet {
    fn dim(&self) -> usize {
        self.d
    }

    fn denoise(&self, y: &[f64]) -> Vec<f64> {
        self.forward_unchecked(y)
    }

    fn breakpoints_1d(&self) -> Vec<f64> {
        if self.d != 1 {
            return Vec::new();
        }
        let mut out: Vec<f64> = (0..self.k)
            .filter(|&k| self.w(k)[0] != 0.0)
            .map(|k| -self.b()[k] / self.w(k)[0])
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }
}
