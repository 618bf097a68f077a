//! Orbit-divergence dynamics in chain coordinates: closed-form evolution,
//! Monte Carlo Bowen-ball volumes, sequence-Bowen decay, and numerical
//! verification of the polynomial inequalities behind the volume bounds.
//!
//! The chain basis is declared orthonormal; the size of a displacement is
//! `max(|single coordinates|, Euclidean moduli of rotating pairs)`, which
//! makes every membership test rotation-free and polynomial in `t`.
//!
//! Volume estimation samples from an *adapted box*: per-coordinate bounds
//! `min(eps, l! * gamma_l * T^{-l} * eps)` derived from Lagrange
//! interpolation at Chebyshev nodes. The box provably contains the Bowen
//! ball, shrinks at exactly the predicted rate `T^{-R}`, and keeps the
//! acceptance fraction bounded away from zero — a plain `eps`-box would see
//! no acceptances at all once `T^R` exceeds the sample count.

use nalgebra::DMatrix;
use num::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chains::{chain_basis, slow_entropy, ChainError, ChainSpec, ChainStructure};
use crate::fit::{fit_line, FitError, SlopeFit};
use crate::fpoly::FPoly;
use crate::linalg::{ad_operator, LinalgError, RatMatrix, Rational};
use crate::rng::StreamRng;

#[derive(Debug, Error)]
pub enum DynError {
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("time grid needs at least 3 finite, positive, increasing values")]
    BadTimeGrid,
    #[error("need at least 1000 samples per time, got {0}")]
    TooFewSamples(usize),
    #[error("sup grid needs at least 2 points")]
    BadSupGrid,
    #[error("rotation speed must be positive and finite, got {0}")]
    BadAlpha(f64),
    #[error("chain prescription is empty")]
    EmptyStructure,
    #[error("no accepted samples at T = {t}; increase samples or epsilon")]
    ZeroAcceptance { t: f64 },
    #[error("state shape does not match the chain structure")]
    ShapeMismatch,
    #[error("lambda must be finite and exceed 1, got {0}")]
    BadLambda(f64),
    #[error("base time L must be positive and finite, got {0}")]
    BadBaseTime(f64),
    #[error("sequence length {n_max} too short: max depth {depth} needs at least {needed} steps")]
    SequenceTooShort {
        n_max: usize,
        depth: usize,
        needed: usize,
    },
    #[error("invalid omega: need a nonempty union of subintervals of V")]
    BadInterval,
    #[error("invalid shearing parameters: require 0 < c < 1/20, eta > 0, 0 < ||X0|| < eta")]
    BadShearing,
    #[error("displacement never reaches eta: no separation")]
    NoSeparation,
    #[error("displacement too large for log chart")]
    LogChart,
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// One rotating pair of coefficient vectors, bottom level first; `b` and `c`
/// have equal length `m + 1` and rotate with speed `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleState {
    pub alpha: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// A displacement between nearby orbits, written in the chain basis (one
/// coefficient vector per chain, bottom level first).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DivergenceState {
    pub chains: Vec<Vec<f64>>,
    pub doubles: Vec<DoubleState>,
}

impl DivergenceState {
    /// The all-zero displacement with the shape prescribed by `spec`.
    pub fn zero(spec: &ChainSpec) -> Self {
        DivergenceState {
            chains: spec.pure_depths.iter().map(|&m| vec![0.0; m + 1]).collect(),
            doubles: spec
                .doubles
                .iter()
                .map(|&(m, alpha)| DoubleState {
                    alpha,
                    b: vec![0.0; m + 1],
                    c: vec![0.0; m + 1],
                })
                .collect(),
        }
    }

    /// The chain layout of this state.
    pub fn spec(&self) -> ChainSpec {
        ChainSpec {
            pure_depths: self.chains.iter().map(|a| a.len() - 1).collect(),
            doubles: self
                .doubles
                .iter()
                .map(|d| (d.b.len() - 1, d.alpha))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.chains.iter().map(Vec::len).sum::<usize>()
            + self.doubles.iter().map(|d| 2 * d.b.len()).sum::<usize>()
    }

    /// `max` over single coordinates and pair moduli.
    pub fn sup_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for a in &self.chains {
            for &x in a {
                best = best.max(x.abs());
            }
        }
        for d in &self.doubles {
            for (&b, &c) in d.b.iter().zip(&d.c) {
                best = best.max(b.hypot(c));
            }
        }
        best
    }

    /// Coordinates in a flat vector: chains in order, then each double as
    /// interleaved `(b_0, c_0, b_1, c_1, ...)`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        for a in &self.chains {
            out.extend_from_slice(a);
        }
        for d in &self.doubles {
            for (&b, &c) in d.b.iter().zip(&d.c) {
                out.push(b);
                out.push(c);
            }
        }
        out
    }

    /// Inverse of [`flatten`](Self::flatten) for the layout of `spec`.
    pub fn from_flat(spec: &ChainSpec, flat: &[f64]) -> Result<Self, DynError> {
        let mut state = DivergenceState::zero(spec);
        let mut it = flat.iter();
        for a in &mut state.chains {
            for x in a.iter_mut() {
                *x = *it.next().ok_or(DynError::ShapeMismatch)?;
            }
        }
        for d in &mut state.doubles {
            for j in 0..d.b.len() {
                d.b[j] = *it.next().ok_or(DynError::ShapeMismatch)?;
                d.c[j] = *it.next().ok_or(DynError::ShapeMismatch)?;
            }
        }
        if it.next().is_some() {
            return Err(DynError::ShapeMismatch);
        }
        Ok(state)
    }

    fn validate(&self) -> Result<(), DynError> {
        if self.chains.is_empty() && self.doubles.is_empty() {
            return Err(DynError::EmptyStructure);
        }
        for a in &self.chains {
            if a.is_empty() {
                return Err(DynError::ShapeMismatch);
            }
        }
        for d in &self.doubles {
            if d.b.is_empty() || d.b.len() != d.c.len() {
                return Err(DynError::ShapeMismatch);
            }
            if !(d.alpha.is_finite() && d.alpha > 0.0) {
                return Err(DynError::BadAlpha(d.alpha));
            }
        }
        Ok(())
    }
}

fn triangular(a: &[f64], t: f64) -> Vec<f64> {
    let m = a.len();
    (0..m)
        .map(|j| {
            let mut acc = 0.0;
            let mut pow = 1.0;
            for (k, &ak) in a.iter().enumerate().skip(j) {
                acc += pow * ak;
                pow *= t / ((k - j + 1) as f64);
            }
            acc
        })
        .collect()
}

/// Evolve a displacement for time `t`: each chain follows the triangular rule
/// `a_j(t) = sum_{k>=j} t^{k-j} a_k(0) / (k-j)!`, and each rotating pair
/// follows the same rule on `(f, g)` followed by the rotation
/// `b = cos(alpha t) f - sin(alpha t) g`, `c = sin(alpha t) f + cos(alpha t) g`.
pub fn evolve(state: &DivergenceState, t: f64) -> DivergenceState {
    DivergenceState {
        chains: state.chains.iter().map(|a| triangular(a, t)).collect(),
        doubles: state
            .doubles
            .iter()
            .map(|d| {
                let f = triangular(&d.b, t);
                let g = triangular(&d.c, t);
                let (s, co) = (d.alpha * t).sin_cos();
                DoubleState {
                    alpha: d.alpha,
                    b: f.iter().zip(&g).map(|(&f, &g)| co * f - s * g).collect(),
                    c: f.iter().zip(&g).map(|(&f, &g)| s * f + co * g).collect(),
                }
            })
            .collect(),
    }
}

/// The exponents of the Bowen-ball volume law `V ~ eps^dim * T^(-R)`:
/// `(dim, -R)` for a given chain structure.
pub fn predicted_exponents(s: &ChainStructure) -> (usize, Rational) {
    (s.dim(), -slow_entropy(s))
}

/// The polynomial giving coordinate `j` of an evolved chain: coefficient of
/// `t^s` is `a_{j+s}/s!`.
fn coord_poly(a: &[f64], j: usize) -> FPoly {
    let mut coeffs = Vec::with_capacity(a.len() - j);
    let mut fact = 1.0;
    for (s, &ak) in a.iter().skip(j).enumerate() {
        if s > 0 {
            fact *= s as f64;
        }
        coeffs.push(ak / fact);
    }
    FPoly::new(coeffs)
}

/// How the sup over `t in [0, T]` is computed during membership tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupMode {
    /// Exact: endpoints plus real critical points of each coordinate.
    #[default]
    DerivativeRoots,
    /// Approximate: maximum over this many Chebyshev nodes.
    Grid(usize),
}

fn poly_sup(p: &FPoly, t_max: f64, mode: SupMode) -> f64 {
    match mode {
        SupMode::DerivativeRoots => p.sup_abs_on(0.0, t_max),
        SupMode::Grid(points) => p.sup_abs_grid(0.0, t_max, points),
    }
}

/// `sup_{t in [0, t_max]} ||X_t||` for the mixed sup norm.
pub fn orbit_sup(state: &DivergenceState, t_max: f64, mode: SupMode) -> f64 {
    let mut best = 0.0f64;
    for a in &state.chains {
        for j in 0..a.len() {
            best = best.max(poly_sup(&coord_poly(a, j), t_max, mode));
        }
    }
    for d in &state.doubles {
        for j in 0..d.b.len() {
            let f = coord_poly(&d.b, j);
            let g = coord_poly(&d.c, j);
            let sq = f.mul(&f).add(&g.mul(&g));
            best = best.max(poly_sup(&sq, t_max, mode).sqrt());
        }
    }
    best
}

fn within_eps_interval(state: &DivergenceState, t_max: f64, eps: f64, mode: SupMode) -> bool {
    let eps_sq = eps * eps;
    for a in &state.chains {
        for j in 0..a.len() {
            if poly_sup(&coord_poly(a, j), t_max, mode) > eps {
                return false;
            }
        }
    }
    for d in &state.doubles {
        for j in 0..d.b.len() {
            let f = coord_poly(&d.b, j);
            let g = coord_poly(&d.c, j);
            if poly_sup(&f.mul(&f).add(&g.mul(&g)), t_max, mode) > eps_sq {
                return false;
            }
        }
    }
    true
}

fn within_eps_at_times(state: &DivergenceState, times: &[f64], eps: f64) -> bool {
    let eps_sq = eps * eps;
    for a in &state.chains {
        for j in 0..a.len() {
            let p = coord_poly(a, j);
            if times.iter().any(|&t| p.eval(t).abs() > eps) {
                return false;
            }
        }
    }
    for d in &state.doubles {
        for j in 0..d.b.len() {
            let f = coord_poly(&d.b, j);
            let g = coord_poly(&d.c, j);
            if times
                .iter()
                .any(|&t| f.eval(t).powi(2) + g.eval(t).powi(2) > eps_sq)
            {
                return false;
            }
        }
    }
    true
}

/// Configuration of the Bowen-volume Monte Carlo runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McConfig {
    pub epsilon: f64,
    /// Membership horizons `T`, geometric in practice; must be increasing.
    pub t_grid: Vec<f64>,
    /// Samples per horizon; at least 1000.
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub sup_mode: SupMode,
}

impl McConfig {
    /// Geometric grid `t_min * ratio^k`, `k = 0..count`.
    pub fn geometric(
        epsilon: f64,
        t_min: f64,
        ratio: f64,
        count: usize,
        samples: usize,
        seed: u64,
    ) -> Self {
        McConfig {
            epsilon,
            t_grid: (0..count).map(|k| t_min * ratio.powi(k as i32)).collect(),
            samples,
            seed,
            sup_mode: SupMode::DerivativeRoots,
        }
    }

    pub fn validate(&self) -> Result<(), DynError> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(DynError::BadEpsilon(self.epsilon));
        }
        if self.t_grid.len() < 3
            || self.t_grid.iter().any(|&t| !(t.is_finite() && t > 0.0))
            || self.t_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(DynError::BadTimeGrid);
        }
        if self.samples < 1000 {
            return Err(DynError::TooFewSamples(self.samples));
        }
        if let SupMode::Grid(points) = self.sup_mode {
            if points < 2 {
                return Err(DynError::BadSupGrid);
            }
        }
        Ok(())
    }
}

/// Coefficient-bound constants for polynomials of the given degree: if
/// `sup_{[0,1]} |p| <= 1` then `|c_s| <= gamma_s`. Computed as the absolute
/// row sums of the inverse Vandermonde matrix at `degree + 1` Chebyshev
/// nodes, so they are sharp up to node choice.
fn coefficient_gammas(degree: usize) -> Vec<f64> {
    gammas_at_nodes(&chebyshev_nodes(degree))
}

fn chebyshev_nodes(degree: usize) -> Vec<f64> {
    if degree == 0 {
        return vec![1.0];
    }
    (0..=degree)
        .map(|i| 0.5 * (1.0 + (std::f64::consts::PI * i as f64 / degree as f64).cos()))
        .collect()
}

/// Absolute row sums of the inverse Vandermonde at arbitrary distinct nodes:
/// `|c_s| <= gammas[s] * max_i |p(nodes[i])|` for polynomials of degree
/// `< nodes.len()`.
fn gammas_at_nodes(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut w = DMatrix::<f64>::zeros(n, n);
    for (i, &u) in nodes.iter().enumerate() {
        let mut pow = 1.0;
        for s in 0..n {
            w[(i, s)] = pow;
            pow *= u;
        }
    }
    let inv = w
        .try_inverse()
        .expect("distinct nodes give invertible Vandermonde");
    (0..n)
        .map(|s| (0..n).map(|i| inv[(s, i)].abs()).sum())
        .collect()
}

/// Sampling box guaranteed to contain the Bowen ball `B(eps, T)`:
/// half-width `min(eps, l! * gamma_l(m) * T^(-l) * eps)` at chain level `l`
/// (slack factor 1.01 for rounding), squares of the same half-width for both
/// members of a rotating pair.
#[derive(Debug, Clone)]
pub struct AdaptedBox {
    pub chain_widths: Vec<Vec<f64>>,
    pub double_widths: Vec<Vec<f64>>,
    pub log10_volume: f64,
}

fn level_widths(depth: usize, t: f64, eps: f64, gammas: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    (0..=depth)
        .map(|l| {
            if l > 0 {
                fact *= l as f64;
            }
            (fact * gammas[l] * t.powi(-(l as i32)) * eps * 1.01).min(eps)
        })
        .collect()
}

/// The adapted sampling box for the given layout at horizon `t`.
pub fn adapted_box(spec: &ChainSpec, t: f64, eps: f64) -> AdaptedBox {
    let chain_widths: Vec<Vec<f64>> = spec
        .pure_depths
        .iter()
        .map(|&m| level_widths(m, t, eps, &coefficient_gammas(m)))
        .collect();
    let double_widths: Vec<Vec<f64>> = spec
        .doubles
        .iter()
        .map(|&(m, _)| level_widths(m, t, eps, &coefficient_gammas(m)))
        .collect();
    let mut log10_volume = 0.0;
    for w in chain_widths.iter().flatten() {
        log10_volume += (2.0 * w).log10();
    }
    for w in double_widths.iter().flatten() {
        log10_volume += 2.0 * (2.0 * w).log10();
    }
    AdaptedBox {
        chain_widths,
        double_widths,
        log10_volume,
    }
}

/// Box from value bounds at explicit times (used for sequence-Bowen balls):
/// the last `m + 1` times bound the coefficients of a degree-`m` coordinate
/// polynomial through the inverse Vandermonde at those raw nodes.
fn adapted_box_at_times(spec: &ChainSpec, times: &[f64], eps: f64) -> AdaptedBox {
    let widths = |m: usize| -> Vec<f64> {
        let nodes = &times[times.len() - (m + 1)..];
        let gammas = gammas_at_nodes(nodes);
        let mut fact = 1.0;
        (0..=m)
            .map(|l| {
                if l > 0 {
                    fact *= l as f64;
                }
                (fact * gammas[l] * eps * 1.01).min(eps)
            })
            .collect()
    };
    let chain_widths: Vec<Vec<f64>> = spec.pure_depths.iter().map(|&m| widths(m)).collect();
    let double_widths: Vec<Vec<f64>> = spec.doubles.iter().map(|&(m, _)| widths(m)).collect();
    let mut log10_volume = 0.0;
    for w in chain_widths.iter().flatten() {
        log10_volume += (2.0 * w).log10();
    }
    for w in double_widths.iter().flatten() {
        log10_volume += 2.0 * (2.0 * w).log10();
    }
    AdaptedBox {
        chain_widths,
        double_widths,
        log10_volume,
    }
}

/// Draw order is fixed (chains in order, levels ascending, then pairs with
/// `b` before `c`), so a `(seed, stream, sample)` triple determines the point.
fn sample_in_box(spec: &ChainSpec, bx: &AdaptedBox, rng: &mut StreamRng) -> DivergenceState {
    DivergenceState {
        chains: bx
            .chain_widths
            .iter()
            .map(|ws| ws.iter().map(|&w| rng.symmetric(w)).collect())
            .collect(),
        doubles: bx
            .double_widths
            .iter()
            .zip(&spec.doubles)
            .map(|(ws, &(_, alpha))| {
                let mut b = Vec::with_capacity(ws.len());
                let mut c = Vec::with_capacity(ws.len());
                for &w in ws {
                    b.push(rng.symmetric(w));
                    c.push(rng.symmetric(w));
                }
                DoubleState { alpha, b, c }
            })
            .collect(),
    }
}

fn validate_spec(spec: &ChainSpec) -> Result<(), DynError> {
    DivergenceState::zero(spec).validate()
}

/// One volume estimate per horizon in `cfg.t_grid`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BowenPoint {
    pub t: f64,
    pub volume: f64,
    pub log10_t: f64,
    pub log10_volume: f64,
    pub accepted: u64,
    pub samples: u64,
}

/// Monte Carlo estimate of Bowen-ball volumes over the time grid, with the
/// log–log slope fit whose exponent approximates `-R`.
///
/// For each horizon `T` (stream index = grid position), samples are drawn
/// uniformly from the adapted box and tested for
/// `sup_{t in [0,T]} ||X_t|| <= eps`; the volume is the acceptance fraction
/// times the box volume. Deterministic for a given `(seed, config)`
/// regardless of thread count.
pub fn mc_bowen_volume(
    spec: &ChainSpec,
    cfg: &McConfig,
) -> Result<(Vec<BowenPoint>, SlopeFit), DynError> {
    cfg.validate()?;
    validate_spec(spec)?;
    let mut points = Vec::with_capacity(cfg.t_grid.len());
    for (stream, &t) in cfg.t_grid.iter().enumerate() {
        let bx = adapted_box(spec, t, cfg.epsilon);
        let accepted = (0..cfg.samples as u64)
            .into_par_iter()
            .filter(|&i| {
                let mut rng = StreamRng::for_sample(cfg.seed, stream as u64, i);
                let state = sample_in_box(spec, &bx, &mut rng);
                within_eps_interval(&state, t, cfg.epsilon, cfg.sup_mode)
            })
            .count() as u64;
        if accepted == 0 {
            return Err(DynError::ZeroAcceptance { t });
        }
        let log10_volume = bx.log10_volume + (accepted as f64 / cfg.samples as f64).log10();
        points.push(BowenPoint {
            t,
            volume: 10f64.powf(log10_volume),
            log10_t: t.log10(),
            log10_volume,
            accepted,
            samples: cfg.samples as u64,
        });
    }
    let fit = fit_line(
        &points
            .iter()
            .map(|p| (p.log10_t, p.log10_volume))
            .collect::<Vec<_>>(),
    )?;
    Ok((points, fit))
}

/// One volume estimate per sequence length `N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequencePoint {
    pub n: usize,
    pub volume: f64,
    pub ln_volume: f64,
    pub accepted: u64,
    pub samples: u64,
}

/// Sequence-Bowen volumes: membership is required only at the times
/// `L * lambda^k`, `k = 0..=N`, and the fit is `ln V` against `N`, so the
/// exponent approximates `-R ln(lambda)`.
///
/// `N` runs from the maximal chain depth (so the observation times determine
/// the coordinate polynomials) to `n_max`; `cfg.t_grid` is ignored.
pub fn sequence_bowen_volume(
    spec: &ChainSpec,
    l: f64,
    lambda: f64,
    n_max: usize,
    cfg: &McConfig,
) -> Result<(Vec<SequencePoint>, SlopeFit), DynError> {
    if !(lambda.is_finite() && lambda > 1.0) {
        return Err(DynError::BadLambda(lambda));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(DynError::BadBaseTime(l));
    }
    if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
        return Err(DynError::BadEpsilon(cfg.epsilon));
    }
    if cfg.samples < 1000 {
        return Err(DynError::TooFewSamples(cfg.samples));
    }
    validate_spec(spec)?;
    let depth = spec
        .pure_depths
        .iter()
        .copied()
        .chain(spec.doubles.iter().map(|&(m, _)| m))
        .max()
        .unwrap_or(0);
    let n_min = depth;
    if n_max < n_min + 2 {
        return Err(DynError::SequenceTooShort {
            n_max,
            depth,
            needed: n_min + 2,
        });
    }
    let mut points = Vec::new();
    for n in n_min..=n_max {
        let times: Vec<f64> = (0..=n).map(|k| l * lambda.powi(k as i32)).collect();
        let bx = adapted_box_at_times(spec, &times, cfg.epsilon);
        let stream = n as u64;
        let accepted = (0..cfg.samples as u64)
            .into_par_iter()
            .filter(|&i| {
                let mut rng = StreamRng::for_sample(cfg.seed, stream, i);
                let state = sample_in_box(spec, &bx, &mut rng);
                within_eps_at_times(&state, &times, cfg.epsilon)
            })
            .count() as u64;
        if accepted == 0 {
            return Err(DynError::ZeroAcceptance {
                t: *times.last().unwrap(),
            });
        }
        let log10_volume = bx.log10_volume + (accepted as f64 / cfg.samples as f64).log10();
        points.push(SequencePoint {
            n,
            volume: 10f64.powf(log10_volume),
            ln_volume: log10_volume * std::f64::consts::LN_10,
            accepted,
            samples: cfg.samples as u64,
        });
    }
    let fit = fit_line(
        &points
            .iter()
            .map(|p| (p.n as f64, p.ln_volume))
            .collect::<Vec<_>>(),
    )?;
    Ok((points, fit))
}

/// Two-sided norm-equivalence constants between the coefficient sup norm and
/// the value sup norm on `[0, 1]` for degree-`d` polynomials, certified
/// empirically over random coefficient vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormEquiv {
    /// Largest observed `max_k |a_k| / sup_{[0,1]} |p|`.
    pub coeff_over_sup: f64,
    /// Largest observed `sup_{[0,1]} |p| / max_k |a_k|`.
    pub sup_over_coeff: f64,
    pub trials: usize,
}

/// Sample `trials` random polynomials of degree `<= d` and report the extreme
/// ratios between coefficient size and sup on `[0, 1]`.
pub fn norm_equiv_constant(d: usize, trials: usize, seed: u64) -> NormEquiv {
    let mut coeff_over_sup = 0.0f64;
    let mut sup_over_coeff = 0.0f64;
    for i in 0..trials {
        let mut rng = StreamRng::for_sample(seed, u64::MAX, i as u64);
        let coeffs: Vec<f64> = (0..=d).map(|_| rng.symmetric(1.0)).collect();
        let amax = coeffs.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
        if amax < 1e-12 {
            continue;
        }
        let p = FPoly::new(coeffs);
        let sup = p.sup_abs_on(0.0, 1.0);
        if sup < 1e-12 {
            continue;
        }
        coeff_over_sup = coeff_over_sup.max(amax / sup);
        sup_over_coeff = sup_over_coeff.max(sup / amax);
    }
    NormEquiv {
        coeff_over_sup,
        sup_over_coeff,
        trials,
    }
}

/// Check the doubling-type inequality
/// `sup_V |p| <= (4 |V| / |omega|)^deg(p) * sup_omega |p|`
/// for a polynomial on an interval `V` and a finite union of subintervals.
pub fn check_brudnyi(p: &FPoly, v: (f64, f64), omega: &[(f64, f64)]) -> Result<bool, DynError> {
    let (a, b) = v;
    if !(a.is_finite() && b.is_finite() && a < b) || omega.is_empty() {
        return Err(DynError::BadInterval);
    }
    let slack = 1e-9 * (b - a);
    let mut omega_len = 0.0;
    for &(lo, hi) in omega {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi || lo < a - slack || hi > b + slack {
            return Err(DynError::BadInterval);
        }
        omega_len += hi - lo;
    }
    let sup_v = p.sup_abs_on(a, b);
    let sup_omega = omega
        .iter()
        .map(|&(lo, hi)| p.sup_abs_on(lo, hi))
        .fold(0.0, f64::max);
    let factor = (4.0 * (b - a) / omega_len).powi(p.degree() as i32);
    Ok(sup_v <= factor * sup_omega * (1.0 + 1e-12))
}

/// First separation time and small-displacement visit fraction.
///
/// Finds the first `S > 0` with `||X_S|| = eta` (root isolation per
/// coordinate), then measures the fraction of `[0, S]` on which
/// `||X_t|| < c * eta`. Shearing means this fraction is small: the orbit
/// difference spends almost all of its time at scale comparable to `eta`.
pub fn shearing_visit_fraction(
    state: &DivergenceState,
    c: f64,
    eta: f64,
) -> Result<(f64, f64), DynError> {
    state.validate()?;
    let start = state.sup_norm();
    if !(c > 0.0 && c < 0.05) || !(eta.is_finite() && eta > 0.0) || start <= 0.0 || start >= eta {
        return Err(DynError::BadShearing);
    }
    // |coordinate polynomial| and |pair modulus|^2 for every component.
    let mut polys: Vec<(FPoly, bool)> = Vec::new(); // (poly, squared?)
    for a in &state.chains {
        for j in 0..a.len() {
            polys.push((coord_poly(a, j), false));
        }
    }
    for d in &state.doubles {
        for j in 0..d.b.len() {
            let f = coord_poly(&d.b, j);
            let g = coord_poly(&d.c, j);
            polys.push((f.mul(&f).add(&g.mul(&g)), true));
        }
    }
    let mut s_first = f64::INFINITY;
    for (p, squared) in &polys {
        let targets: &[f64] = if *squared { &[eta * eta] } else { &[eta, -eta] };
        for &target in targets {
            for r in p.shift(-target).real_roots() {
                if r > 0.0 && r < s_first {
                    s_first = r;
                }
            }
        }
    }
    if !s_first.is_finite() {
        return Err(DynError::NoSeparation);
    }
    let s = s_first;
    // Intersection over components of {|p| < c eta}, measured by midpoint
    // classification between all crossing points.
    let threshold = c * eta;
    let mut cuts = vec![0.0, s];
    for (p, squared) in &polys {
        let level = if *squared {
            threshold * threshold
        } else {
            threshold
        };
        for (lo, hi) in p.sublevel_intervals(level, 0.0, s) {
            cuts.push(lo);
            cuts.push(hi);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut visit = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let inside = polys.iter().all(|(p, squared)| {
            let level = if *squared {
                threshold * threshold
            } else {
                threshold
            };
            p.eval(mid).abs() < level
        });
        if inside {
            visit += hi - lo;
        }
    }
    Ok((s, visit / s))
}

fn matrix_sqrt(m: &DMatrix<f64>) -> Result<DMatrix<f64>, DynError> {
    // Denman–Beavers iteration; requires an invertible matrix.
    let n = m.nrows();
    let mut y = m.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse().ok_or(DynError::LogChart)?;
        let zi = z.clone().try_inverse().ok_or(DynError::LogChart)?;
        let y_next = (&y + &zi) * 0.5;
        let z_next = (&z + &yi) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-14 * (1.0 + y.norm()) {
            return Ok(y);
        }
    }
    Ok(y)
}

fn matrix_log(m: &DMatrix<f64>) -> Result<DMatrix<f64>, DynError> {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut a = m.clone();
    let mut k = 0i32;
    while (&a - &id).norm() > 0.25 {
        if k >= 50 {
            return Err(DynError::LogChart);
        }
        a = matrix_sqrt(&a)?;
        k += 1;
    }
    let e = &a - &id;
    let mut term = e.clone();
    let mut sum = e.clone();
    for j in 2..=60u32 {
        term = &term * &e;
        let coeff = if j % 2 == 0 { -1.0 } else { 1.0 } / j as f64;
        sum += &term * coeff;
        if term.norm() / j as f64 <= 1e-18 {
            break;
        }
    }
    Ok(sum * 2f64.powi(k))
}

/// Cross-check of the closed-form evolution against a floating-point matrix
/// computation in the ambient algebra.
///
/// The chain basis of `ad_u` (sign-alternated by level, which orients it so
/// the closed form applies verbatim) turns `x0` into a [`DivergenceState`];
/// the closed form predicts `X_t`. Independently,
/// `exp(-tU) exp(X0) exp(tU)` is computed with floating matrices and its
/// logarithm recovered by inverse scaling and squaring. Returns the maximal
/// entrywise discrepancy between the two `X_t` matrices.
pub fn evolve_matrix_check(
    basis: &[RatMatrix],
    u: &RatMatrix,
    x0: &RatMatrix,
    t: f64,
) -> Result<f64, DynError> {
    let ad = ad_operator(basis, u)?;
    let cb = chain_basis(&ad, crate::chains::DEFAULT_TOL)?;
    let d = u.rows();
    // Frame matrices, flattened in the same order as DivergenceState, with
    // the (-1)^level orientation.
    let mut spec = ChainSpec {
        pure_depths: vec![],
        doubles: vec![],
    };
    let mut frame: Vec<DMatrix<f64>> = Vec::new();
    let basis_f: Vec<DMatrix<f64>> = basis.iter().map(|b| b.to_f64()).collect();
    for chain in &cb.chains {
        spec.pure_depths.push(chain.depth);
        for (j, coords) in chain.vectors.iter().enumerate() {
            let mut m = DMatrix::<f64>::zeros(d, d);
            for (i, x) in coords.iter().enumerate() {
                let xf = x.to_f64().expect("finite chain coordinate");
                if xf != 0.0 {
                    m += &basis_f[i] * xf;
                }
            }
            if j % 2 == 1 {
                m = -m;
            }
            frame.push(m);
        }
    }
    for dbl in &cb.doubles {
        spec.doubles.push((dbl.depth, dbl.alpha));
        for (j, (v0, v1)) in dbl.vectors.iter().enumerate() {
            let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
            for coords in [v0, v1] {
                let mut m = DMatrix::<f64>::zeros(d, d);
                for (i, &x) in coords.iter().enumerate() {
                    if x != 0.0 {
                        m += &basis_f[i] * x;
                    }
                }
                frame.push(m * sign);
            }
        }
    }
    // Coordinates of x0 in the frame, via least squares on vectorized
    // matrices; a large residual means x0 is not in the span.
    let n = frame.len();
    let mut fmat = DMatrix::<f64>::zeros(d * d, n);
    for (col, m) in frame.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                fmat[(i * d + j, col)] = m[(i, j)];
            }
        }
    }
    let x0_f = x0.to_f64();
    let mut rhs = DMatrix::<f64>::zeros(d * d, 1);
    for i in 0..d {
        for j in 0..d {
            rhs[(i * d + j, 0)] = x0_f[(i, j)];
        }
    }
    let svd = fmat.clone().svd(true, true);
    let coords = svd
        .solve(&rhs, 1e-12)
        .map_err(|_| DynError::ShapeMismatch)?;
    let residual = (&fmat * &coords - &rhs).norm();
    let scale = 1.0 + rhs.norm();
    if residual > 1e-8 * scale {
        return Err(DynError::ShapeMismatch);
    }
    let flat: Vec<f64> = (0..n).map(|i| coords[(i, 0)]).collect();
    let state0 = DivergenceState::from_flat(&spec, &flat)?;
    let state_t = evolve(&state0, t);
    let flat_t = state_t.flatten();
    let mut predicted = DMatrix::<f64>::zeros(d, d);
    for (c, m) in flat_t.iter().zip(&frame) {
        if *c != 0.0 {
            predicted += m * *c;
        }
    }
    // Floating route: conjugate in the group, then take the matrix log.
    let u_f = u.to_f64();
    let exp_back = (&u_f * (-t)).exp();
    let exp_fwd = (&u_f * t).exp();
    let conj = &exp_back * x0_f.exp() * &exp_fwd;
    let log_conj = matrix_log(&conj)?;
    let diff = &log_conj - &predicted;
    Ok(diff.iter().fold(0.0f64, |m, &x| m.max(x.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    fn chain_state(a: &[f64]) -> DivergenceState {
        DivergenceState {
            chains: vec![a.to_vec()],
            doubles: vec![],
        }
    }

    fn double_state(alpha: f64, b: &[f64], c: &[f64]) -> DivergenceState {
        DivergenceState {
            chains: vec![],
            doubles: vec![DoubleState {
                alpha,
                b: b.to_vec(),
                c: c.to_vec(),
            }],
        }
    }

    #[test]
    fn evolve_worked_examples() {
        let fixed = evolve(&chain_state(&[1.0, 0.0]), 17.3);
        assert_eq!(fixed.chains[0], vec![1.0, 0.0]);

        let shifted = evolve(&chain_state(&[0.0, 0.0, 1.0]), 2.0);
        assert_eq!(shifted.chains[0], vec![2.0, 2.0, 1.0]);

        let rotated = evolve(
            &double_state(1.0, &[1.0], &[0.0]),
            std::f64::consts::FRAC_PI_2,
        );
        assert!(rotated.doubles[0].b[0].abs() < 1e-12);
        assert!((rotated.doubles[0].c[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flow_property() {
        let x = DivergenceState {
            chains: vec![vec![0.3, -0.2, 0.5]],
            doubles: vec![DoubleState {
                alpha: 1.7,
                b: vec![0.1, -0.4],
                c: vec![0.25, 0.9],
            }],
        };
        let (s, t) = (0.7, 1.9);
        let two_step = evolve(&evolve(&x, s), t);
        let one_step = evolve(&x, s + t);
        for (a, b) in two_step.flatten().iter().zip(one_step.flatten()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn rotation_preserves_pair_modulus() {
        let x = double_state(2.3, &[0.2, -0.7], &[0.5, 0.1]);
        for &t in &[0.3, 1.0, 4.7] {
            let y = evolve(&x, t);
            let d = &x.doubles[0];
            let f = triangular(&d.b, t);
            let g = triangular(&d.c, t);
            for j in 0..2 {
                let before = f[j].hypot(g[j]);
                let after = y.doubles[0].b[j].hypot(y.doubles[0].c[j]);
                assert!((before - after).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn predicted_exponent_examples() {
        let s = ChainStructure {
            depths: vec![2],
            alphas: vec![],
        };
        assert_eq!(predicted_exponents(&s), (3, rat(-3)));
        let s = ChainStructure {
            depths: vec![0],
            alphas: vec![],
        };
        assert_eq!(predicted_exponents(&s), (1, rat(0)));
        let s = ChainStructure {
            depths: vec![2, 1, 1, 0],
            alphas: vec![],
        };
        assert_eq!(predicted_exponents(&s), (8, rat(-5)));
    }

    #[test]
    fn flatten_round_trip() {
        let spec = ChainSpec {
            pure_depths: vec![2, 0],
            doubles: vec![(1, 3.0)],
        };
        let flat: Vec<f64> = (1..=8).map(|i| i as f64 / 10.0).collect();
        let state = DivergenceState::from_flat(&spec, &flat).unwrap();
        assert_eq!(state.flatten(), flat);
        assert_eq!(state.dim(), 8);
        assert!(DivergenceState::from_flat(&spec, &flat[..7]).is_err());
    }

    #[test]
    fn orbit_sup_matches_dense_scan() {
        let x = DivergenceState {
            chains: vec![vec![0.1, -0.3, 0.2]],
            doubles: vec![DoubleState {
                alpha: 2.0,
                b: vec![0.2, 0.05],
                c: vec![-0.1, 0.15],
            }],
        };
        let t_max = 6.0;
        let exact = orbit_sup(&x, t_max, SupMode::DerivativeRoots);
        let mut dense = 0.0f64;
        for i in 0..=6000 {
            let t = t_max * i as f64 / 6000.0;
            dense = dense.max(evolve(&x, t).sup_norm());
        }
        assert!(exact >= dense - 1e-9, "exact {exact} dense {dense}");
        assert!(exact <= dense + 1e-3 * (1.0 + dense));
        let grid = orbit_sup(&x, t_max, SupMode::Grid(512));
        assert!(grid <= exact + 1e-12 && grid >= 0.99 * exact);
    }

    #[test]
    fn coefficient_gammas_first_values() {
        let g1 = coefficient_gammas(1);
        assert!((g1[0] - 1.0).abs() < 1e-12);
        assert!((g1[1] - 2.0).abs() < 1e-12);
        let g2 = coefficient_gammas(2);
        assert!((g2[0] - 1.0).abs() < 1e-12);
        assert!((g2[2] - 8.0).abs() < 1e-9);
    }

    #[test]
    fn adapted_box_contains_inner_box_points() {
        // Points with |v_l| <= eps T^{-l} / (3 (m+1)) are always in the ball,
        // hence must be accepted and must lie inside the adapted box.
        let spec = ChainSpec {
            pure_depths: vec![2],
            doubles: vec![(1, 1.5)],
        };
        let (eps, t) = (0.1, 25.0);
        let bx = adapted_box(&spec, t, eps);
        for i in 0..200u64 {
            let mut rng = StreamRng::for_sample(77, 0, i);
            let mut state = DivergenceState::zero(&spec);
            for (ci, a) in state.chains.iter_mut().enumerate() {
                let m = a.len() - 1;
                for (l, x) in a.iter_mut().enumerate() {
                    let w = eps * t.powi(-(l as i32)) / (3.0 * (m + 1) as f64);
                    *x = rng.symmetric(w);
                    assert!(x.abs() <= bx.chain_widths[ci][l]);
                }
            }
            for (di, d) in state.doubles.iter_mut().enumerate() {
                let m = d.b.len() - 1;
                for l in 0..=m {
                    // Pair modulus bounded like a single coordinate: split
                    // the inner budget between the two members.
                    let w = eps * t.powi(-(l as i32)) / (3.0 * (m + 1) as f64 * 2.0);
                    d.b[l] = rng.symmetric(w);
                    d.c[l] = rng.symmetric(w);
                    assert!(d.b[l].abs() <= bx.double_widths[di][l]);
                    assert!(d.c[l].abs() <= bx.double_widths[di][l]);
                }
            }
            assert!(
                within_eps_interval(&state, t, eps, SupMode::DerivativeRoots),
                "inner-box point rejected at i = {i}"
            );
        }
    }

    #[test]
    fn accepted_points_lie_in_adapted_box() {
        // Sample from a box twice as wide; anything accepted must fall back
        // inside the adapted box.
        let spec = ChainSpec::pure(&[2]);
        let (eps, t) = (0.1, 40.0);
        let bx = adapted_box(&spec, t, eps);
        let mut tested = 0;
        for i in 0..4000u64 {
            let mut rng = StreamRng::for_sample(78, 0, i);
            let state = DivergenceState {
                chains: vec![bx.chain_widths[0]
                    .iter()
                    .map(|&w| rng.symmetric(2.0 * w))
                    .collect()],
                doubles: vec![],
            };
            if within_eps_interval(&state, t, eps, SupMode::DerivativeRoots) {
                tested += 1;
                for (l, x) in state.chains[0].iter().enumerate() {
                    assert!(
                        x.abs() <= bx.chain_widths[0][l] * (1.0 + 1e-12),
                        "accepted point escapes the box at level {l}"
                    );
                }
            }
        }
        assert!(tested > 0, "no accepted samples in the doubled box");
    }

    #[test]
    fn mc_volume_scales_with_epsilon_dimension() {
        let spec = ChainSpec::pure(&[1]);
        let t = 10.0;
        let run = |eps: f64| {
            let cfg = McConfig {
                epsilon: eps,
                t_grid: vec![t, t * 2.0, t * 4.0],
                samples: 20_000,
                seed: 11,
                sup_mode: SupMode::DerivativeRoots,
            };
            let (points, _) = mc_bowen_volume(&spec, &cfg).unwrap();
            points[0].volume
        };
        let v1 = run(0.1);
        let v2 = run(0.2);
        let ratio = v2 / v1;
        // dim = 2, so doubling eps should multiply the volume by about 4.
        assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
    }

    #[test]
    fn mc_slope_matches_r_for_small_structures() {
        let cfg = McConfig::geometric(0.1, 8.0, 2.0, 4, 20_000, 5);
        let spec = ChainSpec::pure(&[1]);
        let (_, fit) = mc_bowen_volume(&spec, &cfg).unwrap();
        assert!(
            (fit.exponent + 1.0).abs() < 0.3,
            "slope {} for depths (1)",
            fit.exponent
        );
        let flat = ChainSpec::pure(&[0, 0]);
        let (_, fit) = mc_bowen_volume(&flat, &cfg).unwrap();
        assert!(fit.exponent.abs() < 0.1, "slope {}", fit.exponent);
    }

    #[test]
    fn mc_is_deterministic() {
        let spec = ChainSpec {
            pure_depths: vec![1],
            doubles: vec![(0, 2.0)],
        };
        let cfg = McConfig::geometric(0.1, 5.0, 2.0, 3, 2_000, 99);
        let (a, fa) = mc_bowen_volume(&spec, &cfg).unwrap();
        let (b, fb) = mc_bowen_volume(&spec, &cfg).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.accepted, y.accepted);
        }
        assert_eq!(fa.exponent.to_bits(), fb.exponent.to_bits());
    }

    #[test]
    fn mc_config_validation() {
        let spec = ChainSpec::pure(&[1]);
        let mut cfg = McConfig::geometric(0.1, 5.0, 2.0, 3, 2_000, 1);
        cfg.samples = 10;
        assert!(matches!(
            mc_bowen_volume(&spec, &cfg),
            Err(DynError::TooFewSamples(10))
        ));
        let mut cfg = McConfig::geometric(0.0, 5.0, 2.0, 3, 2_000, 1);
        cfg.epsilon = 0.0;
        assert!(matches!(
            mc_bowen_volume(&spec, &cfg),
            Err(DynError::BadEpsilon(_))
        ));
        let cfg = McConfig {
            epsilon: 0.1,
            t_grid: vec![5.0, 4.0, 6.0],
            samples: 2_000,
            seed: 1,
            sup_mode: SupMode::DerivativeRoots,
        };
        assert!(matches!(
            mc_bowen_volume(&spec, &cfg),
            Err(DynError::BadTimeGrid)
        ));
    }

    #[test]
    fn sequence_slope_matches_r_log_lambda() {
        let spec = ChainSpec::pure(&[1]);
        let cfg = McConfig {
            epsilon: 0.1,
            t_grid: vec![1.0, 2.0, 4.0],
            samples: 20_000,
            seed: 3,
            sup_mode: SupMode::DerivativeRoots,
        };
        let (points, fit) =
            sequence_bowen_volume(&spec, 1.0, std::f64::consts::E, 7, &cfg).unwrap();
        assert_eq!(points.first().unwrap().n, 1);
        assert!(
            (fit.exponent + 1.0).abs() < 0.2,
            "slope {} for depths (1), lambda = e",
            fit.exponent
        );
        assert!(matches!(
            sequence_bowen_volume(&spec, 1.0, 1.0, 7, &cfg),
            Err(DynError::BadLambda(_))
        ));
        assert!(matches!(
            sequence_bowen_volume(&spec, 1.0, 2.0, 2, &cfg),
            Err(DynError::SequenceTooShort { .. })
        ));
    }

    #[test]
    fn norm_equiv_values() {
        let e0 = norm_equiv_constant(0, 100, 1);
        assert!((e0.coeff_over_sup - 1.0).abs() < 1e-12);
        assert!((e0.sup_over_coeff - 1.0).abs() < 1e-12);
        let e1 = norm_equiv_constant(1, 2_000, 1);
        assert!(e1.coeff_over_sup <= 2.0 + 1e-9, "{}", e1.coeff_over_sup);
        let a = norm_equiv_constant(5, 10_000, 1);
        let b = norm_equiv_constant(5, 10_000, 2);
        assert!(a.coeff_over_sup.is_finite() && a.coeff_over_sup > 1.0);
        let rel = (a.coeff_over_sup - b.coeff_over_sup).abs() / a.coeff_over_sup;
        assert!(rel < 0.25, "unstable across seeds: {rel}");
    }

    #[test]
    fn brudnyi_examples() {
        let p = FPoly::new(vec![0.0, 1.0]);
        assert!(check_brudnyi(&p, (0.0, 1.0), &[(0.0, 0.5)]).unwrap());
        let c = FPoly::new(vec![0.7]);
        assert!(check_brudnyi(&c, (0.0, 1.0), &[(0.2, 0.3)]).unwrap());
        assert!(matches!(
            check_brudnyi(&p, (0.0, 1.0), &[]),
            Err(DynError::BadInterval)
        ));
        assert!(matches!(
            check_brudnyi(&p, (0.0, 1.0), &[(0.5, 1.5)]),
            Err(DynError::BadInterval)
        ));
        let mut rng = StreamRng::for_sample(13, 0, 0);
        for _ in 0..200 {
            let deg = 1 + (rng.next_u64() % 6) as usize;
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.symmetric(1.0)).collect();
            let p = FPoly::new(coeffs);
            let lo = rng.uniform(0.0, 0.8);
            let hi = rng.uniform(lo + 0.05, 1.0);
            assert!(check_brudnyi(&p, (0.0, 1.0), &[(lo, hi)]).unwrap());
        }
    }

    #[test]
    fn shearing_worked_example() {
        let eta = 1.0;
        let state = chain_state(&[0.0, eta / 10.0]);
        let (s, fraction) = shearing_visit_fraction(&state, 1e-3, eta).unwrap();
        assert!((s - 10.0).abs() < 1e-8, "S = {s}");
        assert!(fraction < 0.1, "fraction = {fraction}");
    }

    #[test]
    fn shearing_rejects_centralizer_displacement() {
        let state = chain_state(&[0.5, 0.0]);
        assert!(matches!(
            shearing_visit_fraction(&state, 1e-3, 1.0),
            Err(DynError::NoSeparation)
        ));
        let too_big = chain_state(&[0.0, 2.0]);
        assert!(matches!(
            shearing_visit_fraction(&too_big, 1e-3, 1.0),
            Err(DynError::BadShearing)
        ));
    }

    #[test]
    fn shearing_random_structure_two() {
        let c = 6e-4;
        let eta = 1.0;
        let mut checked = 0;
        for i in 0..200u64 {
            let mut rng = StreamRng::for_sample(21, 1, i);
            let a: Vec<f64> = (0..3).map(|_| rng.symmetric(eta / 2.0)).collect();
            let state = chain_state(&a);
            let norm = state.sup_norm();
            if norm < 1e-3 || norm >= eta {
                continue;
            }
            match shearing_visit_fraction(&state, c, eta) {
                Ok((_, fraction)) => {
                    checked += 1;
                    assert!(fraction < 0.1, "fraction {fraction} at i = {i}");
                }
                Err(DynError::NoSeparation) => {}
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn matrix_log_inverts_exp() {
        let m =
            DMatrix::<f64>::from_row_slice(3, 3, &[0.0, 1.2, 0.3, -1.2, 0.0, 0.7, 0.0, 0.0, 0.0]);
        let l = matrix_log(&m.exp()).unwrap();
        assert!((&l - &m).norm() < 1e-10);
        let zero = DMatrix::<f64>::zeros(2, 2);
        assert_eq!(matrix_log(&zero.exp()).unwrap(), zero);
    }

    #[test]
    fn evolve_matrix_check_sl2() {
        let basis = crate::zoo::sl_basis(2).unwrap();
        let mut u = RatMatrix::zeros(2, 2);
        u[(0, 1)] = rat(1);
        let mut v = RatMatrix::zeros(2, 2);
        v[(1, 0)] = rat(1);
        let x0 = v.scale(&crate::linalg::ratq(1, 1000));
        let err = evolve_matrix_check(&basis, &u, &x0, 5.0).unwrap();
        assert!(err < 1e-8, "discrepancy {err}");
        let zero = RatMatrix::zeros(2, 2);
        assert!(evolve_matrix_check(&basis, &u, &zero, 3.0).unwrap() < 1e-14);
    }

    #[test]
    fn evolve_matrix_check_rotating_synthetic() {
        let spec = ChainSpec {
            pure_depths: vec![1],
            doubles: vec![(1, 1.5)],
        };
        let alg = crate::zoo::synthetic_from_structure(&spec).unwrap();
        let mut x0 = RatMatrix::zeros(alg.generator.rows(), alg.generator.cols());
        for (i, b) in alg.basis.iter().enumerate() {
            x0 = x0.add(&b.scale(&crate::linalg::ratq(1 + i as i64, 500)));
        }
        let err = evolve_matrix_check(&alg.basis, &alg.generator, &x0, 2.5).unwrap();
        assert!(err < 1e-8, "discrepancy {err}");
    }

    #[test]
    fn evolve_matrix_check_rejects_outside_element() {
        let basis = crate::zoo::sl_basis(2).unwrap();
        let mut u = RatMatrix::zeros(2, 2);
        u[(0, 1)] = rat(1);
        let outside = RatMatrix::identity(2);
        assert!(matches!(
            evolve_matrix_check(&basis, &u, &outside, 1.0),
            Err(DynError::ShapeMismatch)
        ));
    }
}
