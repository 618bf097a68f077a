//! Floating-point subspace machinery for the rotational part of the spectrum:
//! SVD-based numeric kernels, kernel staircases `ker M ⊂ ker M^2 ⊂ …`
//! computed by deflation (never by explicit matrix powers, which would ruin
//! conditioning), incremental orthonormal spans, and 1-d eigenvalue
//! clustering.

use nalgebra::{DMatrix, DVector};

/// Orthonormal basis grown one vector at a time; rejects vectors already in
/// the span (relative residual below `rel_tol`).
pub(crate) struct FloatSpan {
    basis: Vec<DVector<f64>>,
    rel_tol: f64,
}

impl FloatSpan {
    pub fn new(rel_tol: f64) -> Self {
        FloatSpan {
            basis: vec![],
            rel_tol,
        }
    }

    /// Insert `v` if it extends the span; returns whether it did.
    pub fn insert(&mut self, v: &DVector<f64>) -> bool {
        let scale = v.norm();
        if scale == 0.0 {
            return false;
        }
        let mut w = v.clone();
        // Two rounds of classical Gram-Schmidt for numerical orthogonality.
        for _ in 0..2 {
            for b in &self.basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        if w.norm() <= self.rel_tol * scale {
            return false;
        }
        let n = w.norm();
        self.basis.push(w / n);
        true
    }

    #[cfg(test)]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Orthonormal basis of the numeric kernel `{x : Mx ≈ 0}`: right singular
/// vectors whose singular values fall below `abs_cut`.
pub(crate) fn svd_kernel(m: &DMatrix<f64>, abs_cut: f64) -> Vec<DVector<f64>> {
    let mut svd = m.clone().svd(false, true);
    svd.sort_by_singular_values();
    let v_t = svd.v_t.expect("svd requested V^T");
    let mut out = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < abs_cut {
            out.push(v_t.row(i).transpose());
        }
    }
    out
}

/// Kernel staircase `K_i = ker(M^i)` computed without forming powers:
/// `K_{i+1} = ker((I - P_i) M)` where `P_i` projects onto `K_i`.
///
/// Returns the orthonormal bases `[K_1, K_2, …]`, stopping once the dimension
/// stabilizes. Empty when `M` has trivial kernel.
pub(crate) fn kernel_staircase(m: &DMatrix<f64>, abs_cut: f64) -> Vec<Vec<DVector<f64>>> {
    let n = m.nrows();
    let mut levels: Vec<Vec<DVector<f64>>> = Vec::new();
    let mut deflated = m.clone();
    loop {
        let k = svd_kernel(&deflated, abs_cut);
        let prev_dim = levels.last().map_or(0, |l| l.len());
        if k.len() <= prev_dim || k.is_empty() {
            break;
        }
        let full = k.len() == n;
        // Deflate: subtract the projection of M's image onto the new kernel.
        let q = DMatrix::from_columns(&k);
        deflated = m - &q * (q.transpose() * m);
        levels.push(k);
        if full || levels.len() >= n {
            break;
        }
    }
    levels
}

/// Complex eigenvalues of a real matrix as `(re, im)` pairs.
pub(crate) fn eigenvalues(m: &DMatrix<f64>) -> Vec<(f64, f64)> {
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect()
}

/// Cluster sorted 1-d values by gap: a new cluster starts whenever the gap to
/// the previous value exceeds `radius`. Returns `(mean, count)` per cluster.
pub(crate) fn cluster_1d(vals: &[f64], radius: f64) -> Vec<(f64, usize)> {
    let mut sorted = vals.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN eigenvalue"));
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut start = 0;
    for i in 0..sorted.len() {
        let last_in_run = i + 1 == sorted.len() || sorted[i + 1] - sorted[i] > radius;
        if last_in_run {
            let run = &sorted[start..=i];
            let mean = run.iter().sum::<f64>() / run.len() as f64;
            out.push((mean, run.len()));
            start = i + 1;
        }
    }
    out
}
