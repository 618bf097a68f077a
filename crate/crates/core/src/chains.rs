//! Chain bases of quasi-unipotent adjoint operators and the slow-entropy
//! invariant computed from them.
//!
//! A chain of depth `m` for an operator `A` is a tuple `X_0, …, X_m` with
//! `A X_j = X_{j-1}` and `A X_0 = 0`. A double chain is the rotating analogue
//! attached to an eigenvalue pair `±iα`: pairs `(X_{j,0}, X_{j,1})` with
//! `A X_{j,0} = X_{j-1,0} - α X_{j,1}` and `A X_{j,1} = X_{j-1,1} + α X_{j,0}`.
//! Every quasi-unipotent operator decomposes into such chains, and the slow
//! entropy is `R = Σ m_i (m_i + 1) / 2` over all chain depths, double chains
//! counted twice.
//!
//! Extraction strategy: nilpotent operators (checked exactly) take a fully
//! exact path — Bareiss kernels of powers, top-down complement selection.
//! Otherwise eigenvalue clusters drive the rotating part: whenever a cluster's
//! squared speed is recognizably rational (verified by an exact kernel, never
//! assumed), its double chains are extracted in exact arithmetic, which is
//! immune to the threshold trouble that defective clusters cause for
//! floating-point staircases. Clusters that resist recognition fall back to
//! SVD staircases with the trace refinement `α² = -tr(A|_W²)/dim W`, which
//! stays accurate even where raw eigenvalues of defective matrices lose half
//! their digits; that fallback needs clusters separated by twice the
//! clustering radius.

use crate::elim;
use crate::linalg::{LinalgError, RatMatrix, Rational};
use crate::spectral::{cluster_1d, eigenvalues, kernel_staircase, FloatSpan};
use nalgebra::{DMatrix, DVector};
use num::{BigRational, FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Default spectral tolerance for quasi-unipotence checks and eigenvalue
/// clustering.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Matrices at most this large, with denominators at most this wide, use the
/// exact Jordan-Chevalley splitting; everything else goes through the
/// floating-point spectral path.
const EXACT_SPLIT_MAX_DIM: usize = 16;
const EXACT_SPLIT_MAX_DENOM_BITS: u64 = 32;

/// Errors from chain extraction and entropy evaluation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChainError {
    #[error("operator is not quasi-unipotent: eigenvalue {re}{im:+}i has |Re| >= {tol}")]
    NotQuasiUnipotent { re: f64, im: f64, tol: f64 },
    #[error("spectral clustering unstable, adjust tol")]
    ClusteringUnstable,
    #[error("chain relations failed numerical validation (residual {residual:.3e} > {limit:.3e})")]
    ValidationFailed { residual: f64, limit: f64 },
    #[error("sequence entropy requires lambda > 1, got {lambda}")]
    BadLambda { lambda: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Nilpotent chain: vectors `X_0, …, X_m` (coordinates in the analyzed basis)
/// with `A X_j = X_{j-1}`, `X_0` in the kernel.
///
/// `exact` marks whether the vectors came out of exact elimination (relations
/// hold identically) or the floating path (relations hold to tolerance; the
/// rationals are then exact images of the computed floats).
#[derive(Debug, Clone)]
pub struct Chain {
    pub depth: usize,
    pub vectors: Vec<Vec<Rational>>,
    pub exact: bool,
}

/// Rotating chain for an eigenvalue pair `±iα`, `α > 0`: pairs
/// `(X_{j,0}, X_{j,1})`, bottom first, with
/// `A X_{j,0} = X_{j-1,0} - α X_{j,1}` and `A X_{j,1} = X_{j-1,1} + α X_{j,0}`.
///
/// Orientation is normalized: the first significant coordinate of `X_{0,0}`
/// is positive and the matching coordinate of `X_{0,1}` vanishes.
#[derive(Debug, Clone)]
pub struct DoubleChain {
    pub depth: usize,
    pub alpha: f64,
    pub vectors: Vec<(Vec<f64>, Vec<f64>)>,
}

/// Full chain decomposition of one operator.
#[derive(Debug, Clone, Default)]
pub struct ChainBasis {
    pub chains: Vec<Chain>,
    pub doubles: Vec<DoubleChain>,
}

/// The combinatorial shadow of a chain basis: the multiset of depths (double
/// chains contribute twice), sorted descending, plus the rotation speeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStructure {
    pub depths: Vec<usize>,
    pub alphas: Vec<f64>,
}

impl ChainStructure {
    /// Total dimension `Σ (m_i + 1)` accounted for by the chains.
    pub fn dim(&self) -> usize {
        self.depths.iter().map(|m| m + 1).sum()
    }
}

/// Prescription of a chain layout: pure depths plus `(depth, alpha)` double
/// chains. This is the input to the synthetic realizer and the configuration
/// language of the divergence simulators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub pure_depths: Vec<usize>,
    pub doubles: Vec<(usize, f64)>,
}

impl ChainSpec {
    pub fn pure(depths: &[usize]) -> Self {
        ChainSpec {
            pure_depths: depths.to_vec(),
            doubles: vec![],
        }
    }

    /// The structure this prescription should produce.
    pub fn structure(&self) -> ChainStructure {
        let mut depths: Vec<usize> = self.pure_depths.clone();
        for &(m, _) in &self.doubles {
            depths.push(m);
            depths.push(m);
        }
        depths.sort_unstable_by(|a, b| b.cmp(a));
        let mut alphas: Vec<f64> = self.doubles.iter().map(|&(_, a)| a).collect();
        alphas.sort_by(|a, b| a.partial_cmp(b).expect("NaN alpha"));
        ChainStructure { depths, alphas }
    }

    /// Ambient dimension of the realized module.
    pub fn dim(&self) -> usize {
        self.structure().dim()
    }
}

/// How an entropy value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyMethod {
    ChainBasis,
    Sl2Triple,
    ClosedForm,
}

/// Slow entropy together with its provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyReport {
    #[serde(rename = "R", with = "rat_string")]
    pub r: Rational,
    pub method: EntropyMethod,
    pub structure: ChainStructure,
}

/// Serde adapter: rationals on the wire as `"p/q"` strings.
pub mod rat_string {
    use super::Rational;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        Rational::from_str(&s).map_err(|_| D::Error::custom(format!("invalid rational {s:?}")))
    }
}

/// Which evidence backed a quasi-unipotence verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckPath {
    /// The operator is exactly nilpotent.
    ExactNilpotent,
    /// The exact semisimple part vanishes.
    ExactSemisimple,
    /// Verdict from the floating spectrum (of the semisimple part when
    /// available, of the operator itself otherwise).
    NumericSpectrum,
}

/// Outcome of [`is_quasi_unipotent`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuasiUnipotentCheck {
    pub quasi_unipotent: bool,
    pub path: CheckPath,
    /// Eigenvalue `(re, im)` with the largest `|re|` when the verdict is
    /// negative.
    pub offending: Option<(f64, f64)>,
    /// The effective real-part tolerance used for the verdict.
    pub tol: f64,
}

fn denom_bits(a: &RatMatrix) -> u64 {
    let mut bits = 0;
    for i in 0..a.rows() {
        for x in a.row(i) {
            bits = bits.max(x.denom().bits());
        }
    }
    bits
}

fn exact_split_feasible(a: &RatMatrix) -> bool {
    a.rows() <= EXACT_SPLIT_MAX_DIM && denom_bits(a) <= EXACT_SPLIT_MAX_DENOM_BITS
}

/// Effective clustering radius for the all-float path: raw eigenvalues of a
/// defective matrix are only accurate to roughly `machine-eps^(1/(m+1))` for a
/// depth-`m` block, so the radius cannot be pushed below that smear.
fn float_cluster_radius(tol: f64) -> f64 {
    tol.max(5e-3)
}

/// Decide whether every eigenvalue of `ad_U` is purely imaginary (up to
/// `tol`), which is exactly the quasi-unipotence of the flow generated by `U`.
pub fn is_quasi_unipotent(ad_u: &RatMatrix, tol: f64) -> Result<QuasiUnipotentCheck, ChainError> {
    if !ad_u.is_square() {
        return Err(LinalgError::NotSquare(ad_u.rows(), ad_u.cols()).into());
    }
    if crate::linalg::nilpotency_index(ad_u)?.is_some() {
        return Ok(QuasiUnipotentCheck {
            quasi_unipotent: true,
            path: CheckPath::ExactNilpotent,
            offending: None,
            tol,
        });
    }
    let (spectrum_source, path, eff_tol) = if exact_split_feasible(ad_u) {
        let (s, _) = crate::linalg::jordan_chevalley(ad_u)?;
        if s.is_zero() {
            // Unreachable in practice (nilpotent was handled above), but the
            // splitting is authoritative.
            return Ok(QuasiUnipotentCheck {
                quasi_unipotent: true,
                path: CheckPath::ExactSemisimple,
                offending: None,
                tol,
            });
        }
        (s.to_f64(), CheckPath::NumericSpectrum, tol)
    } else {
        (
            ad_u.to_f64(),
            CheckPath::NumericSpectrum,
            float_cluster_radius(tol),
        )
    };
    let eigs = eigenvalues(&spectrum_source);
    let worst = eigs
        .iter()
        .cloned()
        .max_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).expect("NaN eigenvalue"));
    match worst {
        Some((re, im)) if re.abs() >= eff_tol => Ok(QuasiUnipotentCheck {
            quasi_unipotent: false,
            path,
            offending: Some((re, im)),
            tol: eff_tol,
        }),
        _ => Ok(QuasiUnipotentCheck {
            quasi_unipotent: true,
            path,
            offending: None,
            tol: eff_tol,
        }),
    }
}

// ---------------------------------------------------------------------------
// Exact nilpotent chain extraction
// ---------------------------------------------------------------------------

/// Incremental span over the rationals, kept in reduced echelon form.
struct ExactSpan {
    rows: Vec<Vec<Rational>>,
}

impl ExactSpan {
    fn new() -> Self {
        ExactSpan { rows: vec![] }
    }

    /// Insert `v` if independent of the current span; returns whether it was.
    fn insert(&mut self, mut v: Vec<Rational>) -> bool {
        for row in &self.rows {
            let p = row.iter().position(|x| !x.is_zero()).expect("zero row");
            if !v[p].is_zero() {
                let c = v[p].clone() / row[p].clone();
                for (vi, ri) in v.iter_mut().zip(row) {
                    *vi -= &c * ri;
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        self.rows.push(v);
        // Keep rows ordered by pivot so reduction stays triangular.
        self.rows.sort_by_key(|r| {
            r.iter()
                .position(|x| !x.is_zero())
                .expect("zero row stored")
        });
        let _ = p;
        true
    }
}

/// Jordan chains of an exactly nilpotent rational matrix, deepest first.
fn exact_nilpotent_chains(a: &RatMatrix) -> Vec<Chain> {
    let n = a.rows();
    if n == 0 {
        return vec![];
    }
    let aint = a.to_global_scaled_bigint();
    let mut kernels: Vec<Vec<Vec<Rational>>> = Vec::new();
    let mut power = aint.clone();
    loop {
        let k = elim::kernel_int(&power, n);
        let done = k.len() == n;
        kernels.push(k);
        if done {
            break;
        }
        power = crate::linalg::int_mat_mul(&power, &aint);
    }
    let p = kernels.len();
    let mut chains: Vec<Chain> = Vec::new();
    for i in (1..=p).rev() {
        let mut occupied = ExactSpan::new();
        if i >= 2 {
            for v in &kernels[i - 2] {
                occupied.insert(v.clone());
            }
        }
        for c in &chains {
            occupied.insert(c.vectors[i - 1].clone());
        }
        for v in &kernels[i - 1] {
            if occupied.insert(v.clone()) {
                let mut vecs = vec![v.clone()];
                for _ in 1..i {
                    let prev = RatMatrix::column_vector(vecs.last().unwrap());
                    vecs.push(a.mul(&prev).col(0));
                }
                vecs.reverse();
                chains.push(Chain {
                    depth: i - 1,
                    vectors: vecs,
                    exact: true,
                });
            }
        }
    }
    chains
}

// ---------------------------------------------------------------------------
// Floating-point chain extraction
// ---------------------------------------------------------------------------

/// Pairs `(X_{j,0}, X_{j,1})` of one double chain, bottom level first.
type FloatPairs = Vec<(DVector<f64>, DVector<f64>)>;

fn dvec_to_rat(v: &DVector<f64>) -> Vec<Rational> {
    v.iter()
        .map(|&x| BigRational::from_f64(x).expect("non-finite chain coordinate"))
        .collect()
}

/// Nilpotent-part chains of the floating path: same top-down complement
/// algorithm as the exact version, over a numeric kernel staircase.
fn float_nilpotent_chains(a: &DMatrix<f64>, abs_cut: f64) -> Vec<Chain> {
    let kernels = kernel_staircase(a, abs_cut);
    let p = kernels.len();
    let mut raw: Vec<(usize, Vec<DVector<f64>>)> = Vec::new();
    for i in (1..=p).rev() {
        let mut occupied = FloatSpan::new(1e-6);
        if i >= 2 {
            for v in &kernels[i - 2] {
                occupied.insert(v);
            }
        }
        for (_, vecs) in &raw {
            occupied.insert(&vecs[i - 1]);
        }
        for v in &kernels[i - 1] {
            if occupied.insert(v) {
                let mut vecs = vec![v.clone()];
                for _ in 1..i {
                    let next = a * vecs.last().unwrap();
                    vecs.push(next);
                }
                vecs.reverse();
                raw.push((i - 1, vecs));
            }
        }
    }
    raw.into_iter()
        .map(|(depth, vecs)| Chain {
            depth,
            vectors: vecs.iter().map(dvec_to_rat).collect(),
            exact: false,
        })
        .collect()
}

/// Matrix Newton iteration for the root of `x² + α²` nearest the restriction
/// `A|_W`; converges quadratically to the semisimple part.
fn newton_semisimple(a_w: &DMatrix<f64>, alpha: f64) -> Option<DMatrix<f64>> {
    let n = a_w.nrows();
    let id = DMatrix::identity(n, n);
    let mut x = a_w.clone();
    for _ in 0..60 {
        let gx = &x * &x + alpha * alpha * &id;
        if gx.norm() <= 1e-12 * (1.0 + x.norm() * x.norm()) {
            return Some(x);
        }
        let lu = (2.0 * &x).lu();
        let y = lu.solve(&gx)?;
        x -= y;
    }
    None
}

/// Extract all double chains for one eigenvalue cluster `±iα`.
///
/// Two staircase passes: the first with a loose threshold tolerant of the
/// cluster-estimate error in `α`, the second with the trace-refined `α` and a
/// tight threshold.
fn rotational_pairs(
    a: &DMatrix<f64>,
    alpha_est: f64,
    cluster_radius: f64,
) -> Result<Vec<DoubleChain>, ChainError> {
    let n = a.nrows();
    let id = DMatrix::identity(n, n);
    let a2 = a * a;

    let mut alpha = alpha_est;
    let mut w_basis: Vec<DVector<f64>> = Vec::new();
    for pass in 0..2 {
        let m = &a2 + alpha * alpha * &id;
        let scale = 1.0 + m.norm();
        let cut = if pass == 0 {
            (1e-5 * scale).max(8.0 * alpha_est.max(1.0) * cluster_radius)
        } else {
            1e-5 * scale
        };
        let stair = kernel_staircase(&m, cut);
        let Some(last) = stair.last() else {
            return Err(ChainError::ClusteringUnstable);
        };
        w_basis = last.clone();
        let q = DMatrix::from_columns(&w_basis);
        let a_w = q.transpose() * a * &q;
        let alpha_sq = -(&a_w * &a_w).trace() / w_basis.len() as f64;
        if alpha_sq <= 0.0 {
            return Err(ChainError::ClusteringUnstable);
        }
        alpha = alpha_sq.sqrt();
    }
    let w = w_basis.len();
    if !w.is_multiple_of(2) {
        return Err(ChainError::ClusteringUnstable);
    }
    let q = DMatrix::from_columns(&w_basis);
    let a_w = q.transpose() * a * &q;
    let s_w = newton_semisimple(&a_w, alpha).ok_or(ChainError::ClusteringUnstable)?;
    let n_w = &a_w - &s_w;
    let j = &s_w / alpha;

    // Pair extraction: J-invariant complement selection over the staircase of
    // the nilpotent part.
    let cut_n = 1e-6 * (1.0 + n_w.norm());
    let kernels = if n_w.norm() <= cut_n {
        // N vanishes: all depth-0 pairs; the staircase would see an exactly
        // zero matrix, which svd thresholds handle, but short-circuit anyway.
        vec![(0..w)
            .map(|i| DVector::from_fn(w, |r, _| f64::from(r == i)))
            .collect()]
    } else {
        kernel_staircase(&n_w, cut_n)
    };
    if kernels.last().map_or(0, |k| k.len()) != w {
        return Err(ChainError::ClusteringUnstable);
    }
    let p = kernels.len();
    let mut raw: Vec<(usize, FloatPairs)> = Vec::new();
    for i in (1..=p).rev() {
        let mut occupied = FloatSpan::new(1e-6);
        if i >= 2 {
            for v in &kernels[i - 2] {
                occupied.insert(v);
            }
        }
        for (_, pairs) in &raw {
            occupied.insert(&pairs[i - 1].0);
            occupied.insert(&pairs[i - 1].1);
        }
        for v in &kernels[i - 1] {
            if occupied.insert(v) {
                let jv = &j * v;
                if !occupied.insert(&jv) {
                    return Err(ChainError::ClusteringUnstable);
                }
                // Orientation: X_{j,1} = -J X_{j,0} gives A X_{0,0} = -α X_{0,1}.
                let mut pairs = vec![(v.clone(), -&jv)];
                for _ in 1..i {
                    let (x0, x1) = pairs.last().unwrap();
                    pairs.push((&n_w * x0, &n_w * x1));
                }
                pairs.reverse();
                raw.push((i - 1, pairs));
            }
        }
    }

    // Map to ambient coordinates, then normalize scale and phase.
    let mut out: Vec<DoubleChain> = raw
        .into_iter()
        .map(|(depth, pairs_w)| {
            let pairs = pairs_w.iter().map(|(x0, x1)| (&q * x0, &q * x1)).collect();
            normalize_double(depth, alpha, pairs)
        })
        .collect();
    out.sort_by_key(|d| std::cmp::Reverse(d.depth));
    Ok(out)
}

/// Fix the free constants of one extracted double chain: unit norm for the
/// level-0 pair and rotation phase zero at its first nonzero coordinate.
fn normalize_double(depth: usize, alpha: f64, mut pairs: FloatPairs) -> DoubleChain {
    let (b0, c0) = &pairs[0];
    let scale = (b0.norm_squared() + c0.norm_squared()).sqrt();
    if scale > 0.0 {
        for (x0, x1) in &mut pairs {
            *x0 /= scale;
            *x1 /= scale;
        }
    }
    let (b0, c0) = (pairs[0].0.clone(), pairs[0].1.clone());
    let idx = (0..b0.len())
        .find(|&k| b0[k].hypot(c0[k]) > 1e-9)
        .unwrap_or(0);
    let theta = -c0[idx].atan2(b0[idx]);
    let (ct, st) = (theta.cos(), theta.sin());
    for (x0, x1) in &mut pairs {
        let new0 = ct * &*x0 - st * &*x1;
        let new1 = st * &*x0 + ct * &*x1;
        *x0 = new0;
        *x1 = new1;
    }
    DoubleChain {
        depth,
        alpha,
        vectors: pairs
            .into_iter()
            .map(|(x0, x1)| (x0.as_slice().to_vec(), x1.as_slice().to_vec()))
            .collect(),
    }
}

/// Try to recognize `alpha_est²` as an exact rational eigenvalue of `-A²`.
///
/// Candidates come from two scans around the float estimate: every
/// denominator up to 2¹³ inside a tight window (catching estimates that are
/// already accurate to many digits), and powers of two inside a wide window
/// (catching the dyadic speeds that exact realizations of float input carry,
/// whose estimates may be smeared by defective-eigenvalue error). Candidates
/// are tried smallest reduced denominator first — among nearby fractions the
/// true value is the simplest one — and accepted only when `A² + (p/q)·I` has
/// a nonzero exact kernel, so a wrong snap can never be accepted.
fn verified_alpha_squared(a2: &RatMatrix, alpha_est: f64) -> Option<Rational> {
    const MAX_DENOM: i64 = 1 << 13;
    let target = alpha_est * alpha_est;
    let mut candidates: Vec<(i64, i64, f64)> = Vec::new();
    let push = |q: i64, window: f64, candidates: &mut Vec<(i64, i64, f64)>| {
        let p = (target * q as f64).round() as i64;
        if p <= 0 {
            return;
        }
        let err = (p as f64 / q as f64 - target).abs();
        if err <= window {
            let g = gcd_i64(p, q);
            candidates.push((q / g, p / g, err));
        }
    };
    let tight = 1e-10 * (1.0 + target);
    for q in 1..=MAX_DENOM {
        push(q, tight, &mut candidates);
    }
    let wide = 0.02 * (1.0 + target);
    let mut q = 1i64;
    while q <= MAX_DENOM {
        push(q, wide, &mut candidates);
        q *= 2;
    }
    candidates.sort_by_key(|c| (c.0, c.1));
    candidates.dedup_by_key(|c| (c.0, c.1));
    let n = a2.rows();
    for &(q, p, _) in candidates.iter().take(12) {
        let alpha2 = crate::linalg::ratq(p, q);
        let m = a2.add(&RatMatrix::identity(n).scale(&alpha2));
        if !elim::kernel(&m).is_empty() {
            return Some(alpha2);
        }
    }
    None
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

fn mat_vec_exact(m: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
    m.mul(&RatMatrix::column_vector(v)).col(0)
}

/// Depth plus the two exact coordinate tracks of one double chain.
type ExactTracks = (usize, Vec<Vec<Rational>>, Vec<Vec<Rational>>);

/// Double chains for a cluster whose squared speed `α²` is an exact rational.
///
/// Everything structural happens in exact arithmetic, so no singular-value
/// threshold can absorb directions from foreign Jordan blocks (whose smallest
/// singular values shrink like gap^depth and defeat any fixed cut):
/// the generalized eigenspace is `ker (A² + α²I)^p` by exact kernels, and the
/// semisimple part on it is the finite binomial series
/// `S = A · (1 − P/α²)^(−1/2)` with `P = A² + α²I` nilpotent there, which
/// satisfies `S² = −α²I` identically. Floats enter only in the emitted
/// vectors.
fn exact_rotational_pairs(
    a: &RatMatrix,
    a2: &RatMatrix,
    alpha2: &Rational,
) -> Result<Vec<DoubleChain>, ChainError> {
    let n = a.rows();
    let p0 = a2.add(&RatMatrix::identity(n).scale(alpha2));
    let mut w_basis = elim::kernel(&p0);
    if w_basis.is_empty() {
        return Err(ChainError::ClusteringUnstable);
    }
    let mut power = p0.clone();
    loop {
        power = power.mul(&p0);
        let k = elim::kernel(&power);
        if k.len() == w_basis.len() {
            break;
        }
        w_basis = k;
    }
    let w = w_basis.len();
    if !w.is_multiple_of(2) {
        return Err(ChainError::ClusteringUnstable);
    }
    let b_w = columns_to_matrix(&w_basis);
    let a_w = match elim::solve_many(&b_w, &a.mul(&b_w)) {
        elim::SolveOutcome::Solved(m) => m,
        _ => return Err(ChainError::ClusteringUnstable),
    };

    let idw = RatMatrix::identity(w);
    let p_w = a_w.mul(&a_w).add(&idw.scale(alpha2));
    // (1 - x)^(-1/2) = sum c_j x^j with c_0 = 1, c_j = c_{j-1} (2j-1)/(2j),
    // evaluated at the nilpotent x = P/α²; the series terminates.
    let mut series = idw.clone();
    let mut term = idw.clone();
    let mut scalar = crate::linalg::rat(1);
    let mut j = 1i64;
    loop {
        term = term.mul(&p_w);
        if term.is_zero() {
            break;
        }
        scalar = scalar * crate::linalg::ratq(2 * j - 1, 2 * j) / alpha2.clone();
        series = series.add(&term.scale(&scalar));
        j += 1;
    }
    let s_w = a_w.mul(&series);
    if !s_w.mul(&s_w).add(&idw.scale(alpha2)).is_zero() {
        return Err(ChainError::ClusteringUnstable);
    }
    let n_w = a_w.sub(&s_w);

    // Exact kernel staircase of the nilpotent part within W.
    let mut kernels: Vec<Vec<Vec<Rational>>> = Vec::new();
    let mut npower = n_w.clone();
    for _ in 0..w {
        let k = elim::kernel(&npower);
        let done = k.len() == w;
        kernels.push(k);
        if done {
            break;
        }
        npower = npower.mul(&n_w);
    }
    if kernels.last().map_or(0, |k| k.len()) != w {
        return Err(ChainError::ClusteringUnstable);
    }

    // Top-down complement selection; a chosen top vector v brings its
    // rotation companion S v along, and both descend by N.
    let p = kernels.len();
    let mut raw: Vec<ExactTracks> = Vec::new();
    for i in (1..=p).rev() {
        let mut occupied = ExactSpan::new();
        if i >= 2 {
            for v in &kernels[i - 2] {
                occupied.insert(v.clone());
            }
        }
        for (_, x0s, x1s) in &raw {
            occupied.insert(x0s[i - 1].clone());
            occupied.insert(x1s[i - 1].clone());
        }
        for v in &kernels[i - 1] {
            if occupied.insert(v.clone()) {
                let sv = mat_vec_exact(&s_w, v);
                if !occupied.insert(sv.clone()) {
                    return Err(ChainError::ClusteringUnstable);
                }
                let mut x0s = vec![v.clone()];
                let mut x1s = vec![sv];
                for _ in 1..i {
                    x0s.push(mat_vec_exact(&n_w, x0s.last().expect("nonempty")));
                    x1s.push(mat_vec_exact(&n_w, x1s.last().expect("nonempty")));
                }
                x0s.reverse();
                x1s.reverse();
                raw.push((i - 1, x0s, x1s));
            }
        }
    }

    // Ambient float vectors with the orientation X_{j,1} = -(S/α) X_{j,0}.
    let alpha = alpha2.to_f64().expect("finite alpha squared").sqrt();
    let to_ambient = |coords: &[Rational]| -> DVector<f64> {
        let v = b_w.mul(&RatMatrix::column_vector(coords)).col(0);
        DVector::from_iterator(n, v.iter().map(|x| x.to_f64().expect("finite coordinate")))
    };
    let mut out: Vec<DoubleChain> = raw
        .into_iter()
        .map(|(depth, x0s, x1s)| {
            let pairs = x0s
                .iter()
                .zip(&x1s)
                .map(|(x0, x1)| (to_ambient(x0), to_ambient(x1) * (-1.0 / alpha)))
                .collect();
            normalize_double(depth, alpha, pairs)
        })
        .collect();
    out.sort_by_key(|d| std::cmp::Reverse(d.depth));
    Ok(out)
}

/// All double chains of `a`: positive imaginary eigenvalue estimates are
/// clustered, each cluster is resolved exactly when its `α²` is recognizably
/// rational (several float clusters may collapse onto one exact value), and
/// only the leftovers go through the float staircase extraction, which needs
/// clusters pairwise separated by at least twice the radius.
fn rotational_doubles(
    a: &RatMatrix,
    a_f: &DMatrix<f64>,
    eigs: &[(f64, f64)],
    radius: f64,
) -> Result<Vec<DoubleChain>, ChainError> {
    let positive: Vec<f64> = eigs
        .iter()
        .filter(|&&(_, im)| im > radius)
        .map(|&(_, im)| im)
        .collect();
    let clusters = cluster_1d(&positive, radius);
    if clusters.is_empty() {
        return Ok(vec![]);
    }
    let a2 = a.mul(a);
    let mut doubles = Vec::new();
    let mut resolved: Vec<Rational> = Vec::new();
    let mut unresolved: Vec<f64> = Vec::new();
    for &(est, _) in &clusters {
        match verified_alpha_squared(&a2, est) {
            Some(alpha2) => {
                if !resolved.contains(&alpha2) {
                    doubles.extend(exact_rotational_pairs(a, &a2, &alpha2)?);
                    resolved.push(alpha2);
                }
            }
            None => unresolved.push(est),
        }
    }
    for &est in &unresolved {
        for &(other, _) in &clusters {
            if other != est && (other - est).abs() < 2.0 * radius {
                return Err(ChainError::ClusteringUnstable);
            }
        }
        doubles.extend(rotational_pairs(a_f, est, radius)?);
    }
    Ok(doubles)
}

fn validate_basis(a: &DMatrix<f64>, basis: &ChainBasis) -> Result<(), ChainError> {
    let limit = 1e-6 * (1.0 + a.norm());
    let mut worst = 0.0f64;
    for c in basis.chains.iter().filter(|c| !c.exact) {
        let vecs: Vec<DVector<f64>> = c
            .vectors
            .iter()
            .map(|v| DVector::from_iterator(v.len(), v.iter().map(|x| x.to_f64().unwrap())))
            .collect();
        for jlev in 0..=c.depth {
            let expect = if jlev == 0 {
                DVector::zeros(a.nrows())
            } else {
                vecs[jlev - 1].clone()
            };
            let r = (a * &vecs[jlev] - expect).norm() / (1.0 + vecs[jlev].norm());
            worst = worst.max(r);
        }
    }
    for d in &basis.doubles {
        for jlev in 0..=d.depth {
            let x0 = DVector::from_vec(d.vectors[jlev].0.clone());
            let x1 = DVector::from_vec(d.vectors[jlev].1.clone());
            let (p0, p1) = if jlev == 0 {
                (DVector::zeros(a.nrows()), DVector::zeros(a.nrows()))
            } else {
                (
                    DVector::from_vec(d.vectors[jlev - 1].0.clone()),
                    DVector::from_vec(d.vectors[jlev - 1].1.clone()),
                )
            };
            let r0 = (a * &x0 - (&p0 - d.alpha * &x1)).norm() / (1.0 + x0.norm());
            let r1 = (a * &x1 - (&p1 + d.alpha * &x0)).norm() / (1.0 + x1.norm());
            worst = worst.max(r0).max(r1);
        }
    }
    if worst > limit {
        return Err(ChainError::ValidationFailed {
            residual: worst,
            limit,
        });
    }
    Ok(())
}

/// Decompose a quasi-unipotent operator into chains and double chains.
///
/// `tol` bounds both the quasi-unipotence verdict and (floored by the
/// defective-eigenvalue smear on the all-float path) the clustering radius for
/// rotation speeds. Two genuinely distinct speeds closer than twice the
/// effective radius are indistinguishable and raise
/// [`ChainError::ClusteringUnstable`].
pub fn chain_basis(ad_u: &RatMatrix, tol: f64) -> Result<ChainBasis, ChainError> {
    if !ad_u.is_square() {
        return Err(LinalgError::NotSquare(ad_u.rows(), ad_u.cols()).into());
    }
    let n = ad_u.rows();
    if n == 0 {
        return Ok(ChainBasis::default());
    }
    if crate::linalg::nilpotency_index(ad_u)?.is_some() {
        return Ok(ChainBasis {
            chains: exact_nilpotent_chains(ad_u),
            doubles: vec![],
        });
    }

    let a_f = ad_u.to_f64();
    let basis = if exact_split_feasible(ad_u) {
        let (s, nil) = crate::linalg::jordan_chevalley(ad_u)?;
        let s_f = s.to_f64();
        let eigs = eigenvalues(&s_f);
        reject_real_parts(&eigs, tol)?;
        // Exact zero part: chains of the nilpotent part restricted to ker S.
        let v0 = elim::kernel(&s);
        let mut chains = Vec::new();
        if !v0.is_empty() {
            let b0 = columns_to_matrix(&v0);
            let rhs = nil.mul(&b0);
            let n0 = match elim::solve_many(&b0, &rhs) {
                elim::SolveOutcome::Solved(m) => m,
                _ => return Err(ChainError::ClusteringUnstable),
            };
            for c in exact_nilpotent_chains(&n0) {
                let vectors = c
                    .vectors
                    .iter()
                    .map(|v| b0.mul(&RatMatrix::column_vector(v)).col(0))
                    .collect();
                chains.push(Chain {
                    depth: c.depth,
                    vectors,
                    exact: true,
                });
            }
        }
        let doubles = rotational_doubles(ad_u, &a_f, &eigs, tol)?;
        ChainBasis { chains, doubles }
    } else {
        let radius = float_cluster_radius(tol);
        let eigs = eigenvalues(&a_f);
        reject_real_parts(&eigs, radius)?;
        let cut0 = 1e-6 * (1.0 + a_f.norm());
        let chains = float_nilpotent_chains(&a_f, cut0);
        let doubles = rotational_doubles(ad_u, &a_f, &eigs, radius)?;
        ChainBasis { chains, doubles }
    };

    let accounted: usize = basis.chains.iter().map(|c| c.depth + 1).sum::<usize>()
        + basis
            .doubles
            .iter()
            .map(|d| 2 * (d.depth + 1))
            .sum::<usize>();
    if accounted != n {
        return Err(ChainError::ClusteringUnstable);
    }
    validate_basis(&a_f, &basis)?;
    Ok(sorted(basis))
}

fn sorted(mut basis: ChainBasis) -> ChainBasis {
    basis.chains.sort_by_key(|c| std::cmp::Reverse(c.depth));
    basis.doubles.sort_by(|a, b| {
        b.depth
            .cmp(&a.depth)
            .then(a.alpha.partial_cmp(&b.alpha).expect("NaN alpha"))
    });
    basis
}

fn reject_real_parts(eigs: &[(f64, f64)], tol: f64) -> Result<(), ChainError> {
    if let Some(&(re, im)) = eigs
        .iter()
        .max_by(|a, b| a.0.abs().partial_cmp(&b.0.abs()).expect("NaN eigenvalue"))
    {
        if re.abs() >= tol {
            return Err(ChainError::NotQuasiUnipotent { re, im, tol });
        }
    }
    Ok(())
}

fn columns_to_matrix(cols: &[Vec<Rational>]) -> RatMatrix {
    let n = cols[0].len();
    let mut m = RatMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            m[(i, j)] = x.clone();
        }
    }
    m
}

/// Collapse a chain basis to its depth multiset and rotation speeds.
pub fn chain_structure(basis: &ChainBasis) -> ChainStructure {
    let mut depths: Vec<usize> = basis.chains.iter().map(|c| c.depth).collect();
    for d in &basis.doubles {
        depths.push(d.depth);
        depths.push(d.depth);
    }
    depths.sort_unstable_by(|a, b| b.cmp(a));
    let mut alphas: Vec<f64> = basis.doubles.iter().map(|d| d.alpha).collect();
    alphas.sort_by(|a, b| a.partial_cmp(b).expect("NaN alpha"));
    ChainStructure { depths, alphas }
}

/// Slow entropy `R = Σ m_i (m_i + 1) / 2` over the depth multiset.
pub fn slow_entropy(structure: &ChainStructure) -> Rational {
    structure
        .depths
        .iter()
        .map(|&m| {
            let m = Rational::from_usize(m).unwrap();
            &m * (&m + Rational::from_usize(1).unwrap()) / Rational::from_usize(2).unwrap()
        })
        .fold(Rational::zero(), |a, b| a + b)
}

/// Sequence entropy along times `A_n = C λ^n`: the value is `R · ln λ`.
pub fn sequence_entropy(structure: &ChainStructure, lambda: f64) -> Result<f64, ChainError> {
    if lambda.is_nan() || lambda <= 1.0 {
        return Err(ChainError::BadLambda { lambda });
    }
    let r = slow_entropy(structure).to_f64().expect("finite R");
    Ok(r * lambda.ln())
}

/// Convenience: full analysis of one operator into a report.
pub fn analyze(ad_u: &RatMatrix, tol: f64) -> Result<EntropyReport, ChainError> {
    let basis = chain_basis(ad_u, tol)?;
    let structure = chain_structure(&basis);
    let r = slow_entropy(&structure);
    Ok(EntropyReport {
        r,
        method: EntropyMethod::ChainBasis,
        structure,
    })
}
