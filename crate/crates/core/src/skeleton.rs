//! Skeleton sequences, their graph representation with chunked trajectory
//! descriptors, synthetic pool generation, and the JSON-lines dataset format.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// A sequence of per-frame 3D joint positions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkeletonSequence {
    pub joints: usize,
    pub frames: usize,
    /// frame-major: coords[t][j] = 3D point of joint j at frame t
    pub coords: Vec<Vec<[f64; 3]>>,
    pub label: Option<usize>,
    #[serde(default)]
    pub split: Option<Split>,
}

impl SkeletonSequence {
    pub fn validate(&self, record: usize) -> Result<()> {
        if self.coords.len() != self.frames {
            return Err(Error::Format {
                record,
                msg: format!("expected {} frames, found {}", self.frames, self.coords.len()),
            });
        }
        for (t, frame) in self.coords.iter().enumerate() {
            if frame.len() != self.joints {
                return Err(Error::Format {
                    record,
                    msg: format!(
                        "frame {t} has {} joints, expected {}",
                        frame.len(),
                        self.joints
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Graph representation: one node per joint trajectory, descriptors of
/// size s = 3*M_c, row-normalized adjacency with self-loops.
#[derive(Debug, Clone)]
pub struct SkeletonGraph {
    /// s x m, column j = descriptor of joint j
    pub node_descriptors: Array2<f64>,
    /// m x m, row-normalized (A_raw + I)
    pub adjacency: Array2<f64>,
    pub label: Option<usize>,
    pub chunk_count: usize,
}

/// A pool of graphs with flattened feature columns and hidden oracle labels.
#[derive(Debug, Clone)]
pub struct Pool {
    pub graphs: Vec<SkeletonGraph>,
    /// p x n, column i = flattened graph i
    pub flat: Array2<f64>,
    pub labels: Vec<usize>,
    pub splits: Vec<Split>,
    pub num_classes: usize,
}

impl Pool {
    pub fn n(&self) -> usize {
        self.flat.ncols()
    }

    pub fn dim(&self) -> usize {
        self.flat.nrows()
    }

    pub fn train_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.splits[i] == Split::Train).collect()
    }

    pub fn test_indices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.splits[i] == Split::Test).collect()
    }

    /// p x |idx| submatrix of flat columns.
    pub fn columns(&self, idx: &[usize]) -> Array2<f64> {
        let p = self.dim();
        let mut out = Array2::zeros((p, idx.len()));
        for (c, &i) in idx.iter().enumerate() {
            out.column_mut(c).assign(&self.flat.column(i));
        }
        out
    }
}

/// Mean 3D coordinates over M_c equal temporal chunks, concatenated in
/// chunk order. Frame t goes to chunk floor(t*M_c/T).
pub fn chunk_descriptor(seq: &SkeletonSequence, joint: usize, chunks: usize) -> Result<Array1<f64>> {
    let t_total = seq.frames;
    if t_total < chunks {
        return Err(Error::Chunking(format!(
            "sequence has {t_total} frames, fewer than {chunks} chunks"
        )));
    }
    if joint >= seq.joints {
        return Err(Error::Dimension(format!(
            "joint index {joint} out of range (J={})",
            seq.joints
        )));
    }
    let mut sums = vec![[0.0f64; 3]; chunks];
    let mut counts = vec![0usize; chunks];
    for t in 0..t_total {
        let c = t * chunks / t_total;
        let p = seq.coords[t][joint];
        for d in 0..3 {
            sums[c][d] += p[d];
        }
        counts[c] += 1;
    }
    let mut out = Array1::zeros(3 * chunks);
    for c in 0..chunks {
        if counts[c] == 0 {
            return Err(Error::Chunking(format!("chunk {c} received no frames")));
        }
        for d in 0..3 {
            out[3 * c + d] = sums[c][d] / counts[c] as f64;
        }
    }
    Ok(out)
}

/// Build the graph: descriptors per joint, adjacency = row-normalized
/// (symmetric 0/1 bone incidence + I).
pub fn build_graph(
    seq: &SkeletonSequence,
    topology: &[(usize, usize)],
    chunks: usize,
) -> Result<SkeletonGraph> {
    let m = seq.joints;
    let s = 3 * chunks;
    let mut desc = Array2::zeros((s, m));
    for j in 0..m {
        desc.column_mut(j).assign(&chunk_descriptor(seq, j, chunks)?);
    }
    let mut adj = Array2::<f64>::eye(m);
    for &(a, b) in topology {
        if a >= m || b >= m {
            return Err(Error::Dimension(format!(
                "topology edge ({a},{b}) out of range for {m} joints"
            )));
        }
        adj[(a, b)] = 1.0;
        adj[(b, a)] = 1.0;
    }
    for mut row in adj.rows_mut() {
        let s: f64 = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    Ok(SkeletonGraph {
        node_descriptors: desc,
        adjacency: adj,
        label: seq.label,
        chunk_count: chunks,
    })
}

/// Column-major concatenation of node descriptors, zero-padded to `target_dim`.
pub fn flatten(g: &SkeletonGraph, target_dim: usize) -> Result<Array1<f64>> {
    let (s, m) = (g.node_descriptors.nrows(), g.node_descriptors.ncols());
    if m * s > target_dim {
        return Err(Error::Dimension(format!(
            "flatten: m*s = {} exceeds target dim {target_dim}",
            m * s
        )));
    }
    let mut out = Array1::zeros(target_dim);
    let mut k = 0;
    for j in 0..m {
        for r in 0..s {
            out[k] = g.node_descriptors[(r, j)];
            k += 1;
        }
    }
    Ok(out)
}

/// Inverse of [`flatten`]: first m*s entries reshaped, padding discarded.
pub fn unflatten(v: &Array1<f64>, m: usize, s: usize) -> Result<Array2<f64>> {
    if m * s > v.len() {
        return Err(Error::Dimension(format!(
            "unflatten: m*s = {} exceeds vector length {}",
            m * s,
            v.len()
        )));
    }
    let mut out = Array2::zeros((s, m));
    let mut k = 0;
    for j in 0..m {
        for r in 0..s {
            out[(r, j)] = v[k];
            k += 1;
        }
    }
    Ok(out)
}

/// Chain topology joint j -- j+1, the default bone layout for synthetic data.
pub fn chain_topology(joints: usize) -> Vec<(usize, usize)> {
    (0..joints.saturating_sub(1)).map(|j| (j, j + 1)).collect()
}

/// Parameters for synthetic pool generation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SynthSpec {
    pub classes: usize,
    pub per_class: usize,
    /// additional held-out samples per class, marked split=test
    #[serde(default)]
    pub test_per_class: usize,
    pub joints: usize,
    pub frames: usize,
    pub noise: f64,
    #[serde(default = "default_chunks")]
    pub chunks: usize,
}

fn default_chunks() -> usize {
    4
}

/// Synthesize a pool: per class, a prototype of smooth joint trajectories
/// (cumulative sums of seeded Gaussian steps), samples = prototype +
/// Gaussian jitter of scale `noise`. Train samples come first per class,
/// then test samples; labels are the hidden oracle truth.
pub fn synth_pool(spec: &SynthSpec, rng: &mut SeededRng) -> Result<Pool> {
    assert!(spec.classes >= 1 && spec.per_class >= 1 && spec.joints >= 1 && spec.frames >= 1);
    assert!(spec.noise >= 0.0);
    let sequences = synth_sequences(spec, rng);
    pool_from_sequences(&sequences, &chain_topology(spec.joints), spec.chunks)
}

/// Assemble a Pool from validated sequences. `p` is m*s (no padding by
/// default; padding happens where a caller asks for a larger target).
pub fn pool_from_sequences(
    sequences: &[SkeletonSequence],
    topology: &[(usize, usize)],
    chunks: usize,
) -> Result<Pool> {
    if sequences.is_empty() {
        return Err(Error::Format { record: 0, msg: "empty dataset".into() });
    }
    let mut graphs = Vec::with_capacity(sequences.len());
    let mut labels = Vec::with_capacity(sequences.len());
    let mut splits = Vec::with_capacity(sequences.len());
    for (i, seq) in sequences.iter().enumerate() {
        seq.validate(i)?;
        let g = build_graph(seq, topology, chunks)?;
        labels.push(seq.label.ok_or_else(|| Error::Format {
            record: i,
            msg: "missing label".into(),
        })?);
        splits.push(seq.split.unwrap_or(Split::Train));
        graphs.push(g);
    }
    let m = graphs[0].node_descriptors.ncols();
    let s = graphs[0].node_descriptors.nrows();
    let p = m * s;
    let mut flat = Array2::zeros((p, graphs.len()));
    for (i, g) in graphs.iter().enumerate() {
        if g.node_descriptors.ncols() != m || g.node_descriptors.nrows() != s {
            return Err(Error::Dimension(format!(
                "graph {i} has incompatible shape ({} x {})",
                g.node_descriptors.nrows(),
                g.node_descriptors.ncols()
            )));
        }
        flat.column_mut(i).assign(&flatten(g, p)?);
    }
    let num_classes = labels.iter().copied().max().unwrap_or(0) + 1;
    Ok(Pool { graphs, flat, labels, splits, num_classes })
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    label: usize,
    joints: usize,
    frames: usize,
    coords: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<Split>,
}

/// Load the canonical JSON-lines dataset: one record per sequence, coords
/// listed frame-major. A chain topology over the declared joints is used.
pub fn load_dataset(path: &Path, chunks: usize) -> Result<Pool> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut sequences = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| Error::Format {
            record: i,
            msg: e.to_string(),
        })?;
        if rec.coords.len() != rec.joints * rec.frames {
            return Err(Error::Format {
                record: i,
                msg: format!(
                    "expected {} coords ({} frames x {} joints), found {}",
                    rec.joints * rec.frames,
                    rec.frames,
                    rec.joints,
                    rec.coords.len()
                ),
            });
        }
        let coords: Vec<Vec<[f64; 3]>> = rec
            .coords
            .chunks(rec.joints)
            .map(|frame| frame.to_vec())
            .collect();
        sequences.push(SkeletonSequence {
            joints: rec.joints,
            frames: rec.frames,
            coords,
            label: Some(rec.label),
            split: rec.split,
        });
    }
    let joints = sequences.first().map(|s| s.joints).unwrap_or(0);
    pool_from_sequences(&sequences, &chain_topology(joints), chunks)
}

/// Save sequences in the canonical JSON-lines format.
pub fn save_dataset(path: &Path, sequences: &[SkeletonSequence]) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    for seq in sequences {
        let rec = Record {
            label: seq.label.unwrap_or(0),
            joints: seq.joints,
            frames: seq.frames,
            coords: seq.coords.iter().flatten().copied().collect(),
            split: seq.split,
        };
        writeln!(file, "{}", serde_json::to_string(&rec)?)?;
    }
    Ok(())
}

/// Synthesize sequences: per class, a prototype of smooth joint
/// trajectories (cumulative sums of seeded Gaussian steps of scale 0.5);
/// each sample is prototype + Gaussian jitter of scale `noise`.
pub fn synth_sequences(spec: &SynthSpec, rng: &mut SeededRng) -> Vec<SkeletonSequence> {
    let mut sequences = Vec::new();
    for class in 0..spec.classes {
        let mut proto = vec![vec![[0.0f64; 3]; spec.joints]; spec.frames];
        for j in 0..spec.joints {
            let mut pos = [rng.standard_normal(), rng.standard_normal(), rng.standard_normal()];
            for t in 0..spec.frames {
                for d in 0..3 {
                    pos[d] += rng.standard_normal() * 0.5;
                }
                proto[t][j] = pos;
            }
        }
        for k in 0..spec.per_class + spec.test_per_class {
            let mut coords = proto.clone();
            if spec.noise > 0.0 {
                for frame in coords.iter_mut() {
                    for p in frame.iter_mut() {
                        for d in 0..3 {
                            p[d] += rng.standard_normal() * spec.noise;
                        }
                    }
                }
            }
            sequences.push(SkeletonSequence {
                joints: spec.joints,
                frames: spec.frames,
                coords,
                label: Some(class),
                split: Some(if k < spec.per_class { Split::Train } else { Split::Test }),
            });
        }
    }
    sequences
}
