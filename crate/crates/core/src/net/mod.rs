//! Invertible, bi-Lipschitz dense stack (the latent mapper and classifier
//! backbone), graph-convolution classifier blocks, Lipschitz certification,
//! and orthonormality-regularized training.

mod gcn;
mod train;

pub use gcn::{Classifier, GcnBlock};
pub use train::{
    latent_grads, latent_loss, train_classifier, train_latent, LatentGrads, TrainConfig,
    TrainReport,
};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{nearest_orthonormal, SeededRng};

/// Leaky activation: y = u*x for x >= 0, y = l*x for x < 0, with 0 < l < u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationSpec {
    pub u: f64,
    pub l: f64,
}

impl Default for ActivationSpec {
    fn default() -> Self {
        Self { u: 0.99, l: 0.95 }
    }
}

impl ActivationSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.l && self.l < self.u) {
            return Err(Error::Parameter(format!(
                "activation slopes must satisfy 0 < l < u (got l={}, u={})",
                self.l, self.u
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.u * x
        } else {
            self.l * x
        }
    }

    #[inline]
    pub fn invert(&self, y: f64) -> f64 {
        if y >= 0.0 {
            y / self.u
        } else {
            y / self.l
        }
    }

    #[inline]
    pub fn slope(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.u
        } else {
            self.l
        }
    }
}

/// Square weight stack with L-1 weight layers (depth L counts the input
/// layer). No biases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerStack {
    pub weights: Vec<Array2<f64>>,
    pub activation: ActivationSpec,
    pub lambda: f64,
}

/// Residual tolerance below which transpose-as-inverse is accepted.
pub const ORTHO_TOL_PROJECTED: f64 = 1e-8;
/// Residual accepted straight out of soft-penalty training.
pub const ORTHO_TOL_TRAINED: f64 = 1e-2;

impl LayerStack {
    /// Seeded init with random orthonormal weights (orthonormalized
    /// Gaussian), so a fresh stack is already certifiable.
    pub fn random_orthonormal(
        dim: usize,
        depth: usize,
        activation: ActivationSpec,
        lambda: f64,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        assert!(depth >= 2, "depth counts the input layer; need >= 2");
        activation.validate()?;
        let mut weights = Vec::with_capacity(depth - 1);
        for _ in 0..depth - 1 {
            weights.push(nearest_orthonormal(&rng.normal_matrix(dim, dim))?);
        }
        Ok(Self { weights, activation, lambda })
    }

    pub fn dim(&self) -> usize {
        self.weights[0].nrows()
    }

    /// Depth L; the stack holds L-1 weight matrices.
    pub fn depth(&self) -> usize {
        self.weights.len() + 1
    }

    /// Forward pass phi^l = g(W_l^T phi^{l-1}), returning the output and
    /// the per-layer pre-activations.
    pub fn forward_traced(&self, x: &Array1<f64>) -> (Array1<f64>, Vec<Array1<f64>>) {
        let mut h = x.clone();
        let mut trace = Vec::with_capacity(self.weights.len());
        for w in &self.weights {
            let pre = w.t().dot(&h);
            h = pre.mapv(|v| self.activation.apply(v));
            trace.push(pre);
        }
        (h, trace)
    }

    pub fn forward(&self, x: &Array1<f64>) -> Array1<f64> {
        self.forward_traced(x).0
    }

    /// Columnwise forward.
    pub fn forward_mat(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut h = x.clone();
        for w in &self.weights {
            h = w.t().dot(&h);
            h.mapv_inplace(|v| self.activation.apply(v));
        }
        h
    }

    /// Layer-by-layer inversion, using W as (W^T)^-1. Refuses when the
    /// orthonormality residual is too large for transpose-as-inverse;
    /// re-project first (`project_orthonormal`).
    pub fn inverse(&self, y: &Array1<f64>) -> Result<Array1<f64>> {
        self.require_orthonormal(ORTHO_TOL_TRAINED)?;
        let mut h = y.clone();
        for w in self.weights.iter().rev() {
            let pre = h.mapv(|v| self.activation.invert(v));
            h = w.dot(&pre);
        }
        Ok(h)
    }

    pub fn inverse_mat(&self, y: &Array2<f64>) -> Result<Array2<f64>> {
        self.require_orthonormal(ORTHO_TOL_TRAINED)?;
        let mut h = y.clone();
        for w in self.weights.iter().rev() {
            h.mapv_inplace(|v| self.activation.invert(v));
            h = w.dot(&h);
        }
        Ok(h)
    }

    /// Sum over layers of ||W^T W - I||_F.
    pub fn ortho_residual(&self) -> f64 {
        self.weights.iter().map(|w| frob_residual(w)).sum()
    }

    pub fn require_orthonormal(&self, tol: f64) -> Result<()> {
        let r = self.ortho_residual();
        if r > tol {
            return Err(Error::Certification(format!(
                "orthonormality residual {r:.3e} exceeds {tol:.1e}; re-project the weights"
            )));
        }
        Ok(())
    }

    /// Hard polar projection of every layer to the nearest orthonormal
    /// matrix.
    pub fn project_orthonormal(&mut self) -> Result<()> {
        for w in &mut self.weights {
            *w = nearest_orthonormal(w)?;
        }
        Ok(())
    }
}

pub fn frob_residual(w: &Array2<f64>) -> f64 {
    let m = w.t().dot(w) - Array2::<f64>::eye(w.ncols());
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Penalty sum_l ||W_l^T W_l - I||_F and its per-layer gradient. The
/// gradient of ||M||_F at M = 0 is taken as 0 (stationary target).
pub fn ortho_penalty(stack: &LayerStack) -> (f64, Vec<Array2<f64>>) {
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(stack.weights.len());
    for w in &stack.weights {
        let (value, grad) = frob_penalty_grad(w);
        total += value;
        grads.push(grad);
    }
    (total, grads)
}

/// ||W^T W - I||_F and d/dW of it: 2 W (W^T W - I) / ||W^T W - I||_F.
pub fn frob_penalty_grad(w: &Array2<f64>) -> (f64, Array2<f64>) {
    let m = w.t().dot(w) - Array2::<f64>::eye(w.ncols());
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    // at the zero of the norm the subgradient is taken as 0; below machine
    // residue the direction M/||M|| is rounding noise, so treat as zero too
    if norm < 1e-12 {
        return (0.0, Array2::zeros(w.raw_dim()));
    }
    let grad = w.dot(&m).mapv(|v| 2.0 * v / norm);
    (norm, grad)
}

/// Closed-form bi-Lipschitz bounds plus empirically sampled expansion
/// ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LipschitzCertificate {
    pub k_bound: f64,
    pub m_bound: f64,
    pub k_emp: f64,
    pub m_emp: f64,
    pub samples: usize,
    pub ortho_residual: f64,
}

impl LipschitzCertificate {
    /// Empirical ratios stay within the closed-form bounds.
    pub fn ok(&self) -> bool {
        self.k_emp <= self.k_bound + 1e-9 && self.m_emp <= self.m_bound + 1e-9
    }
}

/// Sample expansion ratios of f and f^-1 against the closed-form bounds
/// K = u^{L-1}, M = (1/l)^{L-1}.
pub fn certify(stack: &LayerStack, rng: &mut SeededRng, samples: usize) -> Result<LipschitzCertificate> {
    assert!(samples >= 2);
    let d = stack.dim();
    let exp = (stack.depth() - 1) as i32;
    let k_bound = stack.activation.u.powi(exp);
    let m_bound = (1.0 / stack.activation.l).powi(exp);
    let residual = stack.ortho_residual();
    let mut k_emp = 0.0f64;
    let mut m_emp = 0.0f64;
    for _ in 0..samples {
        let x1 = Array1::from_shape_fn(d, |_| rng.standard_normal());
        let x2 = Array1::from_shape_fn(d, |_| rng.standard_normal());
        let dx = norm2(&(&x1 - &x2));
        if dx == 0.0 {
            continue;
        }
        let dy = norm2(&(&stack.forward(&x1) - &stack.forward(&x2)));
        k_emp = k_emp.max(dy / dx);

        let y1 = Array1::from_shape_fn(d, |_| rng.standard_normal());
        let y2 = Array1::from_shape_fn(d, |_| rng.standard_normal());
        let dyy = norm2(&(&y1 - &y2));
        if dyy == 0.0 {
            continue;
        }
        // raw inverse pass, bypassing the residual guard: certification
        // itself is how a bad stack gets flagged
        let inv1 = raw_inverse(stack, &y1);
        let inv2 = raw_inverse(stack, &y2);
        m_emp = m_emp.max(norm2(&(&inv1 - &inv2)) / dyy);
    }
    Ok(LipschitzCertificate {
        k_bound,
        m_bound,
        k_emp,
        m_emp,
        samples,
        ortho_residual: residual,
    })
}

fn raw_inverse(stack: &LayerStack, y: &Array1<f64>) -> Array1<f64> {
    let mut h = y.clone();
    for w in stack.weights.iter().rev() {
        let pre = h.mapv(|v| stack.activation.invert(v));
        h = w.dot(&pre);
    }
    h
}

fn norm2(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Latent mapper + classification head over one stack: class scores are
/// read from the final latent layer through a linear head.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatentModel {
    pub stack: LayerStack,
    /// d x C
    pub head_w: Array2<f64>,
    /// C
    pub head_b: Array1<f64>,
    pub seed: u64,
}

impl LatentModel {
    pub fn new(
        dim: usize,
        depth: usize,
        classes: usize,
        activation: ActivationSpec,
        lambda: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = SeededRng::new(seed);
        let stack = LayerStack::random_orthonormal(dim, depth, activation, lambda, &mut rng)?;
        let scale = 1.0 / (dim as f64).sqrt();
        let head_w = rng.normal_matrix(dim, classes).mapv(|v| v * scale);
        let head_b = Array1::zeros(classes);
        Ok(Self { stack, head_w, head_b, seed })
    }

    pub fn classes(&self) -> usize {
        self.head_b.len()
    }

    /// Class scores for a single flattened sample.
    pub fn scores(&self, x: &Array1<f64>) -> Array1<f64> {
        let z = self.stack.forward(x);
        self.head_w.t().dot(&z) + &self.head_b
    }

    /// Scores for columns of x: C x B.
    pub fn scores_mat(&self, x: &Array2<f64>) -> Array2<f64> {
        let z = self.stack.forward_mat(x);
        let mut s = self.head_w.t().dot(&z);
        for mut col in s.columns_mut() {
            col += &self.head_b;
        }
        s
    }

    pub fn predict(&self, x: &Array1<f64>) -> usize {
        argmax(&self.scores(x))
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(std::io::BufWriter::new(file), &Checkpoint::from(self))?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let ckpt: Checkpoint = serde_json::from_reader(std::io::BufReader::new(file))?;
        ckpt.into_model()
    }
}

/// True when any pre-activation of `x`'s columns sits within `tol` of the
/// activation kink at 0, where the loss is not differentiable and finite
/// differences are unreliable.
pub fn finite_diff_check_exclusions(model: &LatentModel, x: &Array2<f64>, tol: f64) -> bool {
    for col in x.columns() {
        let (_, pres) = model.stack.forward_traced(&col.to_owned());
        for pre in &pres {
            if pre.iter().any(|v| v.abs() < tol) {
                return true;
            }
        }
    }
    false
}

pub fn argmax(v: &Array1<f64>) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i] > v[best] {
            best = i;
        }
    }
    best
}

/// Versioned checkpoint container; load reproduces forward() bitwise
/// (JSON floats round-trip exactly).
#[derive(Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub dim: usize,
    pub depth: usize,
    pub u: f64,
    pub l: f64,
    pub lambda: f64,
    pub weights: Vec<Array2<f64>>,
    pub head_w: Array2<f64>,
    pub head_b: Array1<f64>,
    pub seed: u64,
}

impl From<&LatentModel> for Checkpoint {
    fn from(m: &LatentModel) -> Self {
        Checkpoint {
            version: 1,
            dim: m.stack.dim(),
            depth: m.stack.depth(),
            u: m.stack.activation.u,
            l: m.stack.activation.l,
            lambda: m.stack.lambda,
            weights: m.stack.weights.clone(),
            head_w: m.head_w.clone(),
            head_b: m.head_b.clone(),
            seed: m.seed,
        }
    }
}

impl Checkpoint {
    pub fn into_model(self) -> Result<LatentModel> {
        if self.version != 1 {
            return Err(Error::Format {
                record: 0,
                msg: format!("unsupported checkpoint version {}", self.version),
            });
        }
        let activation = ActivationSpec { u: self.u, l: self.l };
        activation.validate()?;
        Ok(LatentModel {
            stack: LayerStack {
                weights: self.weights,
                activation,
                lambda: self.lambda,
            },
            head_w: self.head_w,
            head_b: self.head_b,
            seed: self.seed,
        })
    }
}

/// Columnwise forward map of a pool into latent coordinates. Requires a
/// passing certificate (stability contract).
pub fn latent_map(stack: &LayerStack, cert: &LipschitzCertificate, x: &Array2<f64>) -> Result<Array2<f64>> {
    if !cert.ok() {
        return Err(Error::Certification(
            "latent_map: certificate out of bounds".into(),
        ));
    }
    Ok(stack.forward_mat(x))
}

/// Columnwise inverse map of latent exemplars back to the ambient space.
pub fn latent_unmap(stack: &LayerStack, cert: &LipschitzCertificate, v: &Array2<f64>) -> Result<Array2<f64>> {
    if !cert.ok() {
        return Err(Error::Certification(
            "latent_unmap: certificate out of bounds".into(),
        ));
    }
    stack.inverse_mat(v)
}
