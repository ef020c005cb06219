//! Graph-convolution classifier: per-block computation g(A U^T W), blocks
//! chained, then a fully connected layer and a class-score layer on the
//! flattened final block output.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::ActivationSpec;
use crate::numerics::SeededRng;
use crate::skeleton::SkeletonGraph;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GcnBlock {
    /// s_in x C
    pub weight: Array2<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Classifier {
    pub blocks: Vec<GcnBlock>,
    /// (m * C_last) x hidden
    pub fc_w: Array2<f64>,
    pub fc_b: Array1<f64>,
    /// hidden x classes
    pub out_w: Array2<f64>,
    pub out_b: Array1<f64>,
    pub activation: ActivationSpec,
    pub lambda: f64,
}

impl Classifier {
    /// Three-block architecture with `filters` convolutional filters per
    /// block (8 at small scale, 16 at the heavier scale).
    pub fn new(
        signal_dim: usize,
        nodes: usize,
        filters: usize,
        hidden: usize,
        classes: usize,
        activation: ActivationSpec,
        lambda: f64,
        rng: &mut SeededRng,
    ) -> Self {
        let mut blocks = Vec::new();
        let mut s_in = signal_dim;
        for _ in 0..3 {
            let scale = 1.0 / (s_in as f64).sqrt();
            blocks.push(GcnBlock {
                weight: rng.normal_matrix(s_in, filters).mapv(|v| v * scale),
            });
            s_in = filters;
        }
        let flat_dim = nodes * filters;
        let fc_w = rng
            .normal_matrix(flat_dim, hidden)
            .mapv(|v| v / (flat_dim as f64).sqrt());
        let out_w = rng
            .normal_matrix(hidden, classes)
            .mapv(|v| v / (hidden as f64).sqrt());
        Classifier {
            blocks,
            fc_w,
            fc_b: Array1::zeros(hidden),
            out_w,
            out_b: Array1::zeros(classes),
            activation,
            lambda,
        }
    }

    pub fn classes(&self) -> usize {
        self.out_b.len()
    }

    /// Per-block activations and pre-activations for the backward pass.
    pub(crate) fn forward_traced(&self, g: &SkeletonGraph) -> Result<GcnTrace> {
        let mut signal = g.node_descriptors.clone(); // s x m
        let mut pres = Vec::with_capacity(self.blocks.len());
        let mut acts = Vec::with_capacity(self.blocks.len());
        let mut inputs = Vec::with_capacity(self.blocks.len());
        for block in &self.blocks {
            if block.weight.nrows() != signal.nrows() {
                return Err(Error::Dimension(format!(
                    "gcn block expects signal dim {}, got {}",
                    block.weight.nrows(),
                    signal.nrows()
                )));
            }
            inputs.push(signal.clone());
            let pre = g.adjacency.dot(&signal.t()).dot(&block.weight); // m x C
            let act = pre.mapv(|v| self.activation.apply(v));
            signal = act.t().to_owned(); // C x m
            pres.push(pre);
            acts.push(act);
        }
        let last = acts.last().unwrap();
        let (m, c) = (last.nrows(), last.ncols());
        if m * c != self.fc_w.nrows() {
            return Err(Error::Dimension(format!(
                "flattened block output {} does not match fc input {}",
                m * c,
                self.fc_w.nrows()
            )));
        }
        // node-major flatten: [node 0 filters.., node 1 filters..]
        let mut flat = Array1::zeros(m * c);
        for node in 0..m {
            for f in 0..c {
                flat[node * c + f] = last[(node, f)];
            }
        }
        let fc_pre = self.fc_w.t().dot(&flat) + &self.fc_b;
        let fc_act = fc_pre.mapv(|v| self.activation.apply(v));
        let scores = self.out_w.t().dot(&fc_act) + &self.out_b;
        Ok(GcnTrace { inputs, pres, flat, fc_pre, fc_act, scores })
    }

    /// Class-score vector for one graph.
    pub fn classify(&self, g: &SkeletonGraph) -> Result<Array1<f64>> {
        Ok(self.forward_traced(g)?.scores)
    }

    pub fn predict(&self, g: &SkeletonGraph) -> Result<usize> {
        Ok(super::argmax(&self.classify(g)?))
    }
}

pub(crate) struct GcnTrace {
    pub inputs: Vec<Array2<f64>>,
    pub pres: Vec<Array2<f64>>,
    pub flat: Array1<f64>,
    pub fc_pre: Array1<f64>,
    pub fc_act: Array1<f64>,
    pub scores: Array1<f64>,
}
