//! Matrix realizations of the worked families of quasi-unipotent flows, plus
//! a synthetic realizer that produces an algebra-with-flow from any
//! prescribed chain layout.
//!
//! Every constructor returns an [`AlgebraWithFlow`]: a rational matrix basis
//! of a Lie algebra together with the generator whose `ad`-action drives the
//! flow. Feeding [`AlgebraWithFlow::ad`] into [`crate::chains::analyze`]
//! recovers the chain structure, which the closed forms in
//! [`crate::closed_forms`] predict independently.

use num::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::ChainSpec;
use crate::closed_forms::BlockSequence;
use crate::linalg::{ad_operator, rat, ratq, LinalgError, RatMatrix, Rational};

#[derive(Debug, Error)]
pub enum ZooError {
    #[error("sl(d) requires d >= 2, got {0}")]
    SlTooSmall(usize),
    #[error("family parameter must be at least 1")]
    DegenerateFamily,
    #[error("twisted family needs a nilpotent part acting on a plane (block sizes summing to 2), got total {0}")]
    UnsupportedRep(usize),
    #[error("chain prescription is empty")]
    EmptyStructure,
    #[error("rotation speed must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A Lie algebra given by a matrix basis, together with the flow generator
/// whose `ad`-action is under study.
///
/// The generator usually lies in the span of the basis, but does not have to:
/// the synthetic realizer keeps it outside on purpose, so that the basis
/// spans exactly the prescribed chains and nothing else.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraWithFlow {
    pub basis: Vec<RatMatrix>,
    pub generator: RatMatrix,
}

impl AlgebraWithFlow {
    /// Matrix of `ad_generator` on the basis.
    pub fn ad(&self) -> Result<RatMatrix, LinalgError> {
        ad_operator(&self.basis, &self.generator)
    }
}

fn e(d: usize, i: usize, j: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(d, d);
    m[(i, j)] = rat(1);
    m
}

/// Basis of the trace-zero `d x d` matrices: the off-diagonal units `E_ij`
/// in row-major order, then the diagonal differences `E_ii - E_{i+1,i+1}`.
pub fn sl_basis(d: usize) -> Result<Vec<RatMatrix>, ZooError> {
    if d < 2 {
        return Err(ZooError::SlTooSmall(d));
    }
    let mut basis = Vec::with_capacity(d * d - 1);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                basis.push(e(d, i, j));
            }
        }
    }
    for i in 0..d - 1 {
        let mut h = RatMatrix::zeros(d, d);
        h[(i, i)] = rat(1);
        h[(i + 1, i + 1)] = rat(-1);
        basis.push(h);
    }
    Ok(basis)
}

/// The single-block nilpotent of size `d`: ones on the superdiagonal.
pub fn principal_nilpotent(d: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(d, d);
    for j in 1..d {
        m[(j - 1, j)] = rat(1);
    }
    m
}

/// Block-diagonal nilpotent with the prescribed Jordan block sizes.
pub fn block_nilpotent(blocks: &BlockSequence) -> RatMatrix {
    let d = blocks.dim();
    let mut m = RatMatrix::zeros(d, d);
    let mut off = 0;
    for &b in blocks.blocks() {
        for j in 1..b {
            m[(off + j - 1, off + j)] = rat(1);
        }
        off += b;
    }
    m
}

/// The step-two nilpotent family on `(d+1) x (d+1)` matrices.
///
/// The algebra is spanned by the first-row units `B_i = E_{0,i}` and the
/// band matrix `T` with `(r, r+l)` entry `(-1)^(l+1)/l` on rows `r >= 1` —
/// the logarithm of the unit upper bidiagonal, so its exponential is an
/// integer matrix. The generator is `U = T + sum_i (-1)^(i+1) (alpha/i) B_i`,
/// chosen so that `exp(U)` is integral at `alpha = 1`; its chain structure is
/// one chain of depth `d-1` plus a fixed line, giving `R = d(d-1)/2`.
///
/// `d = 1` degenerates: the band is empty, leaving the abelian algebra
/// spanned by `B_1` with generator `alpha B_1` (and `R = 0`).
pub fn heisenberg_type(d: usize, alpha: &Rational) -> Result<AlgebraWithFlow, ZooError> {
    if d == 0 {
        return Err(ZooError::DegenerateFamily);
    }
    let size = d + 1;
    let mut basis: Vec<RatMatrix> = (1..=d).map(|i| e(size, 0, i)).collect();
    if d == 1 {
        let generator = basis[0].scale(alpha);
        return Ok(AlgebraWithFlow { basis, generator });
    }
    let mut t = RatMatrix::zeros(size, size);
    for r in 1..d {
        for c in r + 1..=d {
            let l = (c - r) as i64;
            t[(r, c)] = ratq(if l % 2 == 1 { 1 } else { -1 }, l);
        }
    }
    let mut generator = t.clone();
    for i in 1..=d {
        let sign = if i % 2 == 1 { 1 } else { -1 };
        generator[(0, i)] = alpha * ratq(sign, i as i64);
    }
    basis.push(t);
    Ok(AlgebraWithFlow { basis, generator })
}

/// Derivative of the `n`-th symmetric power of the defining representation of
/// 2×2 matrices, on the monomial basis `x^(n-k) y^k`, `k = 0..=n`.
///
/// # Panics
///
/// Panics if `a` is not 2×2.
pub fn sym_power_rep(n: usize, a: &RatMatrix) -> RatMatrix {
    assert!(
        a.rows() == 2 && a.cols() == 2,
        "sym_power_rep expects a 2x2 matrix"
    );
    let nn = n + 1;
    let mut m = RatMatrix::zeros(nn, nn);
    for k in 0..nn {
        let down = (n - k) as i64;
        let up = k as i64;
        if k > 0 {
            m[(k - 1, k)] = rat(up) * &a[(0, 1)];
        }
        m[(k, k)] = rat(down) * &a[(0, 0)] + rat(up) * &a[(1, 1)];
        if k + 1 < nn {
            m[(k + 1, k)] = rat(down) * &a[(1, 0)];
        }
    }
    m
}

/// Semidirect product of the trace-zero 2×2 matrices with the `n`-th
/// symmetric power of their defining representation, realized on matrices of
/// size `2 + (n+1) + 1`.
///
/// The basis is the embedded `sl_basis(2)` followed by the translation
/// directions; the generator is the embedded nilpotent with the given block
/// sizes (which must sum to 2). For blocks `(2)` the chain structure is one
/// depth-2 chain plus one depth-`n` chain: `R = 3 + n(n+1)/2`.
pub fn twisted_algebra(k: &BlockSequence, sym_power: usize) -> Result<AlgebraWithFlow, ZooError> {
    if k.dim() != 2 {
        return Err(ZooError::UnsupportedRep(k.dim()));
    }
    let nn = sym_power + 1;
    let dd = 2 + nn + 1;
    let embed = |a: &RatMatrix| -> RatMatrix {
        let rep = sym_power_rep(sym_power, a);
        let mut m = RatMatrix::zeros(dd, dd);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = a[(i, j)].clone();
            }
        }
        for i in 0..nn {
            for j in 0..nn {
                m[(2 + i, 2 + j)] = rep[(i, j)].clone();
            }
        }
        m
    };
    let mut basis: Vec<RatMatrix> = sl_basis(2)?.iter().map(&embed).collect();
    for j in 0..nn {
        basis.push(e(dd, 2 + j, dd - 1));
    }
    let generator = embed(&block_nilpotent(k));
    Ok(AlgebraWithFlow { basis, generator })
}

/// Realize an arbitrary prescribed chain layout: the generator is a real
/// Jordan matrix with the requested blocks (bordered by a zero row and
/// column), and the basis spans the ideal it acts on, so that
/// `ad_generator` restricted to the basis is exactly that Jordan matrix.
///
/// Pure depths become shift blocks; a double `(m, alpha)` becomes the real
/// Jordan block of `±i·alpha` with `m+1` two-dimensional levels, the speed
/// converted exactly from its binary floating-point value.
pub fn synthetic_from_structure(spec: &ChainSpec) -> Result<AlgebraWithFlow, ZooError> {
    for &(_, alpha) in &spec.doubles {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ZooError::BadAlpha(alpha));
        }
    }
    let mut pure = spec.pure_depths.clone();
    pure.sort_unstable_by(|a, b| b.cmp(a));
    let mut doubles = spec.doubles.clone();
    doubles.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let k: usize = pure.iter().map(|m| m + 1).sum::<usize>()
        + doubles.iter().map(|&(m, _)| 2 * (m + 1)).sum::<usize>();
    if k == 0 {
        return Err(ZooError::EmptyStructure);
    }
    let mut gen = RatMatrix::zeros(k + 1, k + 1);
    let mut off = 0;
    for &m in &pure {
        for j in 1..=m {
            gen[(off + j - 1, off + j)] = rat(1);
        }
        off += m + 1;
    }
    for &(m, alpha) in &doubles {
        let ar = BigRational::from_float(alpha).ok_or(ZooError::BadAlpha(alpha))?;
        for j in 0..=m {
            gen[(off + 2 * j, off + 2 * j + 1)] = ar.clone();
            gen[(off + 2 * j + 1, off + 2 * j)] = -ar.clone();
        }
        for j in 1..=m {
            gen[(off + 2 * (j - 1), off + 2 * j)] = rat(1);
            gen[(off + 2 * j - 1, off + 2 * j + 1)] = rat(1);
        }
        off += 2 * (m + 1);
    }
    let basis = (0..k).map(|i| e(k + 1, i, k)).collect();
    Ok(AlgebraWithFlow {
        basis,
        generator: gen,
    })
}
