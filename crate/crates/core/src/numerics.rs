//! Dense-matrix kernels, seeded randomness, and a finite-difference
//! gradient oracle shared by the other modules.
//!
//! All reals are `f64`. Columns are samples throughout the crate.

use ndarray::{Array1, Array2};
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Seeded, platform-independent random stream (ChaCha8).
///
/// Identical seeds produce identical draw sequences on every platform.
#[derive(Debug, Clone)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derive an independent child stream. Used to give each grid cell,
    /// round, or init its own stream without coupling draw counts.
    pub fn derive(&self, tag: u64) -> Self {
        let mut r = self.clone();
        let base: u64 = r.inner.gen();
        Self::new(base ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn normal_matrix(&mut self, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| self.standard_normal())
    }

    pub fn uniform_matrix(&mut self, rows: usize, cols: usize) -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| self.uniform())
    }

    /// Sample `k` distinct indices from `0..n` (order of first draw kept).
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct from {n}");
        let mut idx: Vec<usize> = (0..n).collect();
        // partial Fisher-Yates
        for i in 0..k {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx
    }
}

pub fn all_finite(m: &Array2<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Squared Euclidean distances between the columns of `a` (p x na) and the
/// columns of `b` (p x nb), via the Gram expansion
/// `||a_i||^2 + ||b_j||^2 - 2 a_i . b_j`, clamped at zero.
pub fn pairwise_sq_dists(a: &Array2<f64>, b: &Array2<f64>) -> Result<Array2<f64>> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "pairwise_sq_dists: row counts differ ({} vs {})",
            a.nrows(),
            b.nrows()
        )));
    }
    let a_norms: Array1<f64> = a.map_axis(ndarray::Axis(0), |c| c.dot(&c));
    let b_norms: Array1<f64> = b.map_axis(ndarray::Axis(0), |c| c.dot(&c));
    let cross = a.t().dot(b); // na x nb
    let mut d = cross;
    for ((i, j), v) in d.indexed_iter_mut() {
        *v = (a_norms[i] + b_norms[j] - 2.0 * *v).max(0.0);
    }
    Ok(d)
}

/// Scale each column of `m` to sum to 1 (plus `ridge` in the denominator).
/// Entries must be nonnegative.
pub fn column_normalize(m: &Array2<f64>, ridge: f64) -> Result<Array2<f64>> {
    let mut out = m.clone();
    for (col, mut c) in out.axis_iter_mut(ndarray::Axis(1)).enumerate() {
        let s: f64 = c.sum();
        if s + ridge <= 0.0 {
            return Err(Error::DegenerateColumn { col });
        }
        c.mapv_inplace(|v| v / (s + ridge));
    }
    Ok(out)
}

/// Central-difference gradient of a scalar field over a matrix argument.
pub fn finite_diff_grad<F>(f: F, at: &Array2<f64>, step: f64) -> Result<Array2<f64>>
where
    F: Fn(&Array2<f64>) -> f64,
{
    assert!(step > 0.0, "finite_diff_grad: step must be positive");
    let mut grad = Array2::zeros(at.raw_dim());
    let mut probe = at.clone();
    for idx in ndarray::indices(at.raw_dim()) {
        let orig = probe[idx];
        probe[idx] = orig + step;
        let fp = f(&probe);
        probe[idx] = orig - step;
        let fm = f(&probe);
        probe[idx] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFinite(format!(
                "finite_diff_grad: f non-finite at perturbation of {idx:?}"
            )));
        }
        grad[idx] = (fp - fm) / (2.0 * step);
    }
    Ok(grad)
}

/// Polar projection of a square matrix onto the nearest orthonormal matrix,
/// by Newton iteration on W <- (W + (W^T)^-1)/2 (converges quadratically
/// for nonsingular W).
pub fn nearest_orthonormal(w: &Array2<f64>) -> Result<Array2<f64>> {
    assert_eq!(w.nrows(), w.ncols(), "nearest_orthonormal: square only");
    let mut q = w.clone();
    for _ in 0..100 {
        let inv_t = invert(&q.t().to_owned())?;
        let next = (&q + &inv_t) * 0.5;
        let delta = (&next - &q).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        q = next;
        if delta < 1e-15 {
            break;
        }
    }
    Ok(q)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(m: &Array2<f64>) -> Result<Array2<f64>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "invert: square only");
    let mut a = m.clone();
    let mut inv = Array2::eye(n);
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if a[(r, col)].abs() > a[(pivot, col)].abs() {
                pivot = r;
            }
        }
        if a[(pivot, col)].abs() < 1e-300 {
            return Err(Error::NonFinite("invert: singular matrix".into()));
        }
        if pivot != col {
            for j in 0..n {
                a.swap((col, j), (pivot, j));
                inv.swap((col, j), (pivot, j));
            }
        }
        let p = a[(col, col)];
        for j in 0..n {
            a[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[(r, col)];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                a[(r, j)] -= factor * a[(col, j)];
                inv[(r, j)] -= factor * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}
