//! Minibatch gradient training with momentum and the multiplicative
//! learning-rate adaptation: the rate shrinks by 0.99 when the rate of
//! loss change increased, and grows by 1/0.99 otherwise.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::gcn::Classifier;
use crate::net::{frob_penalty_grad, LatentModel};
use crate::numerics::SeededRng;
use crate::skeleton::SkeletonGraph;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr0: f64,
    pub momentum: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 500, batch: 32, lr0: 0.05, momentum: 0.9 }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub loss_trace: Vec<f64>,
    pub final_lr: f64,
}

const LR_MIN: f64 = 1e-9;
const LR_MAX: f64 = 1.0;

struct LrSchedule {
    lr: f64,
    prev_loss: Option<f64>,
    prev_delta: Option<f64>,
}

impl LrSchedule {
    fn new(lr0: f64) -> Self {
        Self { lr: lr0, prev_loss: None, prev_delta: None }
    }

    fn observe(&mut self, loss: f64) {
        if let Some(prev) = self.prev_loss {
            let delta = loss - prev;
            if let Some(prev_delta) = self.prev_delta {
                if delta > prev_delta {
                    self.lr *= 0.99;
                } else {
                    self.lr /= 0.99;
                }
                self.lr = self.lr.clamp(LR_MIN, LR_MAX);
            }
            self.prev_delta = Some(delta);
        }
        self.prev_loss = Some(loss);
    }
}

/// Numerically stable cross-entropy of one score column against a label.
fn ce_and_softmax(scores: &Array1<f64>, label: usize) -> (f64, Array1<f64>) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps = scores.mapv(|v| (v - max).exp());
    let z: f64 = exps.sum();
    let probs = exps.mapv(|v| v / z);
    let loss = -(probs[label].max(1e-300)).ln();
    (loss, probs)
}

/// Gradients of the latent model's loss on a labeled batch.
pub struct LatentGrads {
    pub stack: Vec<Array2<f64>>,
    pub head_w: Array2<f64>,
    pub head_b: Array1<f64>,
}

/// Mean cross-entropy over the columns of `x` plus
/// lambda * sum_l ||W_l^T W_l - I||_F.
pub fn latent_loss(model: &LatentModel, x: &Array2<f64>, labels: &[usize]) -> f64 {
    let scores = model.scores_mat(x);
    let mut ce = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        ce += ce_and_softmax(&scores.column(i).to_owned(), label).0;
    }
    ce /= labels.len() as f64;
    ce + model.stack.lambda * model.stack.ortho_residual()
}

/// Analytic gradients of [`latent_loss`] with respect to every parameter.
pub fn latent_grads(model: &LatentModel, x: &Array2<f64>, labels: &[usize]) -> (f64, LatentGrads) {
    let batch = labels.len();
    let d = model.stack.dim();
    let classes = model.classes();
    let n_layers = model.stack.weights.len();

    // forward with traces, columnwise
    let mut activations: Vec<Array2<f64>> = Vec::with_capacity(n_layers + 1);
    let mut pres: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
    activations.push(x.clone());
    for w in &model.stack.weights {
        let pre = w.t().dot(activations.last().unwrap());
        let act = pre.mapv(|v| model.stack.activation.apply(v));
        pres.push(pre);
        activations.push(act);
    }
    let z = activations.last().unwrap(); // d x B
    let mut scores = model.head_w.t().dot(z); // C x B
    for mut col in scores.columns_mut() {
        col += &model.head_b;
    }

    let mut ce = 0.0;
    let mut d_scores = Array2::zeros((classes, batch));
    for (i, &label) in labels.iter().enumerate() {
        let (loss, probs) = ce_and_softmax(&scores.column(i).to_owned(), label);
        ce += loss;
        for c in 0..classes {
            d_scores[(c, i)] = (probs[c] - if c == label { 1.0 } else { 0.0 }) / batch as f64;
        }
    }
    ce /= batch as f64;

    let d_head_w = z.dot(&d_scores.t()); // d x C
    let d_head_b = d_scores.sum_axis(ndarray::Axis(1));
    let mut d_act = model.head_w.dot(&d_scores); // d x B

    let mut stack_grads = vec![Array2::zeros((d, d)); n_layers];
    for l in (0..n_layers).rev() {
        let d_pre = &d_act * &pres[l].mapv(|v| model.stack.activation.slope(v));
        stack_grads[l] = activations[l].dot(&d_pre.t());
        d_act = model.stack.weights[l].dot(&d_pre);
    }

    let mut penalty = 0.0;
    for (l, w) in model.stack.weights.iter().enumerate() {
        let (value, grad) = frob_penalty_grad(w);
        penalty += value;
        stack_grads[l] += &grad.mapv(|v| v * model.stack.lambda);
    }

    (
        ce + model.stack.lambda * penalty,
        LatentGrads { stack: stack_grads, head_w: d_head_w, head_b: d_head_b },
    )
}

/// Train the latent model on flattened columns by minibatch gradient
/// descent with momentum; same seed, same weights bitwise.
pub fn train_latent(
    model: &mut LatentModel,
    x: &Array2<f64>,
    labels: &[usize],
    cfg: &TrainConfig,
    rng: &mut SeededRng,
) -> Result<TrainReport> {
    assert!(!labels.is_empty() && cfg.epochs >= 1);
    let n = labels.len();
    let batch = cfg.batch.max(1).min(n);
    let mut vel_stack: Vec<Array2<f64>> = model
        .stack
        .weights
        .iter()
        .map(|w| Array2::zeros(w.raw_dim()))
        .collect();
    let mut vel_head_w = Array2::zeros(model.head_w.raw_dim());
    let mut vel_head_b = Array1::zeros(model.head_b.raw_dim());
    let mut schedule = LrSchedule::new(cfg.lr0);
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let order = rng.choose_distinct(n, n);
        for chunk in order.chunks(batch) {
            let xb = gather_columns(x, chunk);
            let lb: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let (_, grads) = latent_grads(model, &xb, &lb);
            for (l, g) in grads.stack.iter().enumerate() {
                step(&mut model.stack.weights[l], &mut vel_stack[l], g, schedule.lr, cfg.momentum);
            }
            step(&mut model.head_w, &mut vel_head_w, &grads.head_w, schedule.lr, cfg.momentum);
            step1(&mut model.head_b, &mut vel_head_b, &grads.head_b, schedule.lr, cfg.momentum);
        }
        let loss = latent_loss(model, x, labels);
        if !loss.is_finite() {
            return Err(Error::Training { epoch });
        }
        schedule.observe(loss);
        trace.push(loss);
    }
    Ok(TrainReport { loss_trace: trace, final_lr: schedule.lr })
}

/// Train the graph classifier on labeled graphs (cross-entropy plus the
/// orthonormality penalty over the block weights).
pub fn train_classifier(
    clf: &mut Classifier,
    graphs: &[&SkeletonGraph],
    labels: &[usize],
    cfg: &TrainConfig,
    rng: &mut SeededRng,
) -> Result<TrainReport> {
    assert!(!labels.is_empty() && labels.len() == graphs.len() && cfg.epochs >= 1);
    let n = labels.len();
    let batch = cfg.batch.max(1).min(n);
    let mut vel_blocks: Vec<Array2<f64>> = clf
        .blocks
        .iter()
        .map(|b| Array2::zeros(b.weight.raw_dim()))
        .collect();
    let mut vel_fc_w = Array2::zeros(clf.fc_w.raw_dim());
    let mut vel_fc_b = Array1::zeros(clf.fc_b.raw_dim());
    let mut vel_out_w = Array2::zeros(clf.out_w.raw_dim());
    let mut vel_out_b = Array1::zeros(clf.out_b.raw_dim());
    let mut schedule = LrSchedule::new(cfg.lr0);
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let order = rng.choose_distinct(n, n);
        for chunk in order.chunks(batch) {
            let gs: Vec<&SkeletonGraph> = chunk.iter().map(|&i| graphs[i]).collect();
            let lb: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let (_, grads) = classifier_grads(clf, &gs, &lb)?;
            for (l, g) in grads.blocks.iter().enumerate() {
                step(&mut clf.blocks[l].weight, &mut vel_blocks[l], g, schedule.lr, cfg.momentum);
            }
            step(&mut clf.fc_w, &mut vel_fc_w, &grads.fc_w, schedule.lr, cfg.momentum);
            step1(&mut clf.fc_b, &mut vel_fc_b, &grads.fc_b, schedule.lr, cfg.momentum);
            step(&mut clf.out_w, &mut vel_out_w, &grads.out_w, schedule.lr, cfg.momentum);
            step1(&mut clf.out_b, &mut vel_out_b, &grads.out_b, schedule.lr, cfg.momentum);
        }
        let loss = classifier_loss(clf, graphs, labels)?;
        if !loss.is_finite() {
            return Err(Error::Training { epoch });
        }
        schedule.observe(loss);
        trace.push(loss);
    }
    Ok(TrainReport { loss_trace: trace, final_lr: schedule.lr })
}

pub struct ClassifierGrads {
    pub blocks: Vec<Array2<f64>>,
    pub fc_w: Array2<f64>,
    pub fc_b: Array1<f64>,
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
}

pub fn classifier_loss(clf: &Classifier, graphs: &[&SkeletonGraph], labels: &[usize]) -> Result<f64> {
    let mut ce = 0.0;
    for (g, &label) in graphs.iter().zip(labels) {
        let scores = clf.classify(g)?;
        ce += ce_and_softmax(&scores, label).0;
    }
    ce /= labels.len() as f64;
    let penalty: f64 = clf.blocks.iter().map(|b| frob_penalty_grad(&b.weight).0).sum();
    Ok(ce + clf.lambda * penalty)
}

pub fn classifier_grads(
    clf: &Classifier,
    graphs: &[&SkeletonGraph],
    labels: &[usize],
) -> Result<(f64, ClassifierGrads)> {
    let batch = labels.len() as f64;
    let mut grads = ClassifierGrads {
        blocks: clf.blocks.iter().map(|b| Array2::zeros(b.weight.raw_dim())).collect(),
        fc_w: Array2::zeros(clf.fc_w.raw_dim()),
        fc_b: Array1::zeros(clf.fc_b.raw_dim()),
        out_w: Array2::zeros(clf.out_w.raw_dim()),
        out_b: Array1::zeros(clf.out_b.raw_dim()),
    };
    let mut ce = 0.0;
    for (g, &label) in graphs.iter().zip(labels) {
        let trace = clf.forward_traced(g)?;
        let (loss, probs) = ce_and_softmax(&trace.scores, label);
        ce += loss;
        let mut d_scores = probs;
        d_scores[label] -= 1.0;
        d_scores.mapv_inplace(|v| v / batch);

        // head
        for h in 0..clf.out_w.nrows() {
            for c in 0..clf.out_w.ncols() {
                grads.out_w[(h, c)] += trace.fc_act[h] * d_scores[c];
            }
        }
        grads.out_b += &d_scores;
        let d_fc_act = clf.out_w.dot(&d_scores);
        let d_fc_pre = &d_fc_act * &trace.fc_pre.mapv(|v| clf.activation.slope(v));
        for i in 0..clf.fc_w.nrows() {
            for h in 0..clf.fc_w.ncols() {
                grads.fc_w[(i, h)] += trace.flat[i] * d_fc_pre[h];
            }
        }
        grads.fc_b += &d_fc_pre;
        let d_flat = clf.fc_w.dot(&d_fc_pre);

        // unflatten node-major into d(activation of the last block), m x C
        let last = trace.pres.last().unwrap();
        let (m, c) = (last.nrows(), last.ncols());
        let mut d_act = Array2::zeros((m, c));
        for node in 0..m {
            for f in 0..c {
                d_act[(node, f)] = d_flat[node * c + f];
            }
        }

        for l in (0..clf.blocks.len()).rev() {
            let d_pre = &d_act * &trace.pres[l].mapv(|v| clf.activation.slope(v)); // m x C
            // dW = U A^T dPre (s_in x C)
            grads.blocks[l] += &trace.inputs[l].dot(&g.adjacency.t()).dot(&d_pre);
            if l > 0 {
                // d(activation of block l-1) = A^T dPre W^T, back as m x s_in
                d_act = g.adjacency.t().dot(&d_pre).dot(&clf.blocks[l].weight.t());
            }
        }
    }
    ce /= batch;

    let mut penalty = 0.0;
    for (l, b) in clf.blocks.iter().enumerate() {
        let (value, grad) = frob_penalty_grad(&b.weight);
        penalty += value;
        grads.blocks[l] += &grad.mapv(|v| v * clf.lambda);
    }
    Ok((ce + clf.lambda * penalty, grads))
}

fn gather_columns(x: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((x.nrows(), idx.len()));
    for (c, &i) in idx.iter().enumerate() {
        out.column_mut(c).assign(&x.column(i));
    }
    out
}

fn step(w: &mut Array2<f64>, vel: &mut Array2<f64>, grad: &Array2<f64>, lr: f64, momentum: f64) {
    vel.zip_mut_with(grad, |v, g| *v = momentum * *v - lr * g);
    *w += &*vel;
}

fn step1(w: &mut Array1<f64>, vel: &mut Array1<f64>, grad: &Array1<f64>, lr: f64, momentum: f64) {
    vel.zip_mut_with(grad, |v, g| *v = momentum * *v - lr * g);
    *w += &*vel;
}
