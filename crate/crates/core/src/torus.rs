//! Symbolic coding of a skew-product translation on the torus and empirical
//! slow entropy from Hamming covering numbers.
//!
//! The map is `F(x_1, ..., x_d) = (x_1 + alpha, x_2 + x_1, ..., x_d + x_{d-1})`
//! mod 1 — the section map of a unipotent flow on a nilmanifold. Orbits are
//! coded by the cell of a `q x ... x q` grid they visit at each step; the
//! number of code words needed to cover most orbits up to a Hamming error
//! grows polynomially in the code length, with exponent `d (d - 1) / 2`.
//!
//! Covering numbers are bracketed empirically: a deterministic greedy cover
//! from above, and a maximal `2 eps`-separated set (minus the coverage
//! allowance) from below.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit::{fit_line, FitError, SlopeFit};
use crate::rng::StreamRng;

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("dimension d must be at least 1")]
    BadDim,
    #[error("alphabet parameter q must be at least 2, got {0}")]
    BadQ(usize),
    #[error("rotation number must be finite, got {0}")]
    BadAlpha(f64),
    #[error("code length must be at least 10, got {0}")]
    BadLength(usize),
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    BadEpsilon(f64),
    #[error("need at least 2 sample orbits, got {0}")]
    TooFewSamples(usize),
    #[error("cell count q^d = {0} exceeds the 16-bit code alphabet")]
    AlphabetOverflow(u128),
    #[error("point has {got} coordinates, configuration says {expected}")]
    PointDim { expected: usize, got: usize },
    #[error("codes must share one length, got {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("length grid needs at least 4 increasing values within the configured n")]
    BadGrid,
    #[error("no sample pairs within the Hamming radius; increase samples or epsilon")]
    NoMatchingPairs,
    #[error(transparent)]
    Fit(#[from] FitError),
}

/// Parameters of one coding experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodingConfig {
    /// Torus dimension.
    pub d: usize,
    /// Rotation number of the bottom circle; irrational for equidistribution.
    pub alpha: f64,
    /// Grid resolution per coordinate; the alphabet has `q^d` cells.
    pub q: usize,
    /// Code length.
    pub n: usize,
    /// Hamming radius and coverage allowance.
    pub epsilon: f64,
    /// Number of random orbits.
    pub samples: usize,
    pub seed: u64,
}

impl CodingConfig {
    /// Standard configuration with `alpha = sqrt(2) - 1`.
    pub fn new(d: usize, q: usize, n: usize, epsilon: f64, samples: usize, seed: u64) -> Self {
        CodingConfig {
            d,
            alpha: std::f64::consts::SQRT_2 - 1.0,
            q,
            n,
            epsilon,
            samples,
            seed,
        }
    }

    /// Number of grid cells `q^d`, guarded against alphabet overflow.
    pub fn cells(&self) -> Result<u32, TorusError> {
        let c = (self.q as u128)
            .checked_pow(self.d as u32)
            .ok_or(TorusError::AlphabetOverflow(u128::MAX))?;
        if c > 65_536 {
            return Err(TorusError::AlphabetOverflow(c));
        }
        Ok(c as u32)
    }

    pub fn validate(&self) -> Result<(), TorusError> {
        if self.d == 0 {
            return Err(TorusError::BadDim);
        }
        if self.q < 2 {
            return Err(TorusError::BadQ(self.q));
        }
        if !self.alpha.is_finite() {
            return Err(TorusError::BadAlpha(self.alpha));
        }
        if self.n < 10 {
            return Err(TorusError::BadLength(self.n));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(TorusError::BadEpsilon(self.epsilon));
        }
        if self.samples < 2 {
            return Err(TorusError::TooFewSamples(self.samples));
        }
        self.cells()?;
        Ok(())
    }
}

/// A starting point together with its cell code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusOrbitCoding {
    pub point: Vec<f64>,
    pub code: Vec<u16>,
}

fn wrap(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs.
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

fn cell_of(x: &[f64], q: usize) -> u16 {
    let mut idx = 0u32;
    for &xi in x.iter().rev() {
        let digit = ((xi * q as f64) as u32).min(q as u32 - 1);
        idx = idx * q as u32 + digit;
    }
    idx as u16
}

/// Code of the forward orbit of `point` under the skew map, `cfg.n` symbols
/// starting with the cell of the point itself.
pub fn orbit_code(point: &[f64], cfg: &CodingConfig) -> Result<TorusOrbitCoding, TorusError> {
    cfg.validate()?;
    if point.len() != cfg.d {
        return Err(TorusError::PointDim {
            expected: cfg.d,
            got: point.len(),
        });
    }
    if point.iter().any(|x| !x.is_finite()) {
        return Err(TorusError::BadAlpha(f64::NAN));
    }
    let mut x: Vec<f64> = point.iter().map(|&v| wrap(v)).collect();
    let mut code = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        code.push(cell_of(&x, cfg.q));
        // Update top-down so each level reads the previous value below it.
        for i in (1..cfg.d).rev() {
            x[i] = wrap(x[i] + x[i - 1]);
        }
        x[0] = wrap(x[0] + cfg.alpha);
    }
    Ok(TorusOrbitCoding {
        point: point.to_vec(),
        code,
    })
}

/// Fraction of positions where the codes disagree.
pub fn hamming(a: &[u16], b: &[u16]) -> Result<f64, TorusError> {
    if a.len() != b.len() {
        return Err(TorusError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let mism = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(mism as f64 / a.len() as f64)
}

/// `true` when the mismatch count stays at or below `allowed` (early exit).
fn within_mismatches(a: &[u16], b: &[u16], allowed: usize) -> bool {
    let mut mism = 0usize;
    for (x, y) in a.iter().zip(b) {
        if x != y {
            mism += 1;
            if mism > allowed {
                return false;
            }
        }
    }
    true
}

/// Empirical bracketing of the `(1 - eps)`-covering number at Hamming radius
/// `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanningCount {
    /// Size of the deterministic greedy cover (upper estimate).
    pub greedy: usize,
    /// Certified lower bound from a maximal `2 eps`-separated subset.
    pub separated_lower: usize,
    /// Fraction actually covered when the greedy loop stopped.
    pub covered_fraction: f64,
}

/// Count code words needed so that at least a `(1 - eps)` fraction of the
/// sample lies within Hamming distance `eps` of some chosen word.
///
/// Greedy pass: walk the samples in index order, promote the first uncovered
/// code to a center, mark everything within `eps` of it, stop once the
/// coverage target is met — deterministic and an upper estimate of the true
/// covering number. Lower bound: a maximal strictly-`2 eps`-separated subset
/// meets each `eps`-ball at most once, and at most `floor(eps * M)` of its
/// members may be left uncovered, so the covering number is at least
/// `|separated| - floor(eps * M)`.
pub fn spanning_count(codes: &[Vec<u16>], eps: f64) -> Result<SpanningCount, TorusError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TorusError::BadEpsilon(eps));
    }
    let m = codes.len();
    if m < 2 {
        return Err(TorusError::TooFewSamples(m));
    }
    let n = codes[0].len();
    for c in codes {
        if c.len() != n {
            return Err(TorusError::LengthMismatch(n, c.len()));
        }
    }
    if n == 0 {
        return Err(TorusError::BadLength(0));
    }
    let allowed = (eps * n as f64 + 1e-9).floor() as usize;
    let sep_threshold = (2.0 * eps * n as f64 + 1e-9).floor() as usize;
    let target = ((1.0 - eps) * m as f64 - 1e-9).ceil() as usize;

    let mut covered = vec![false; m];
    let mut covered_count = 0usize;
    let mut greedy = 0usize;
    for i in 0..m {
        if covered_count >= target {
            break;
        }
        if covered[i] {
            continue;
        }
        greedy += 1;
        for j in i..m {
            if !covered[j] && within_mismatches(&codes[i], &codes[j], allowed) {
                covered[j] = true;
                covered_count += 1;
            }
        }
    }

    let mut separated: Vec<usize> = Vec::new();
    for i in 0..m {
        if separated
            .iter()
            .all(|&s| !within_mismatches(&codes[s], &codes[i], sep_threshold))
        {
            separated.push(i);
        }
    }
    let separated_lower = separated
        .len()
        .saturating_sub((eps * m as f64).floor() as usize)
        .max(1);

    Ok(SpanningCount {
        greedy,
        separated_lower,
        covered_fraction: covered_count as f64 / m as f64,
    })
}

/// Average empirical mass of the Hamming-`eps` ball around a sampled code:
/// the fraction of unordered sample pairs within distance `eps`. Row scans
/// run in parallel; the count is order-independent, so the result is
/// deterministic for a given corpus.
pub fn mean_ball_mass(codes: &[Vec<u16>], eps: f64) -> Result<f64, TorusError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(TorusError::BadEpsilon(eps));
    }
    let m = codes.len();
    if m < 2 {
        return Err(TorusError::TooFewSamples(m));
    }
    let n = codes[0].len();
    for c in codes {
        if c.len() != n {
            return Err(TorusError::LengthMismatch(n, c.len()));
        }
    }
    if n == 0 {
        return Err(TorusError::BadLength(0));
    }
    let allowed = (eps * n as f64 + 1e-9).floor() as usize;
    let hits: u64 = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut h = 0u64;
            for j in (i + 1)..m {
                if within_mismatches(&codes[i], &codes[j], allowed) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    if hits == 0 {
        return Err(TorusError::NoMatchingPairs);
    }
    Ok(hits as f64 / (m as f64 * (m as f64 - 1.0) / 2.0))
}

/// One covering-number measurement at code length `n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub n: usize,
    /// Greedy cover of the sample (saturates near the sample count when the
    /// true covering number exceeds it).
    pub greedy: usize,
    pub separated_lower: usize,
    /// Volume-based covering estimate `(1 - eps) / mean ball mass`.
    pub volume_count: f64,
    pub log10_n: f64,
    pub log10_volume_count: f64,
}

/// Slope of `log S(n)` against `log n` over a grid of code lengths: the
/// empirical slow entropy of the coded system.
///
/// Orbits are generated once at the largest length (in parallel, one RNG
/// stream per sample index, so the result is independent of thread count) and
/// truncated for the shorter lengths. Each length reports the greedy /
/// separated bracket for the sampled covering count, but the fitted exponent
/// uses the volume route `S(n) ~ (1 - eps) / mean ball mass`: a greedy cover
/// of `M` samples can never count past `M`, so once the true covering number
/// passes the sample count the bracket flattens, while the average ball mass
/// keeps the `n`-scaling at any sample size.
pub fn empirical_slow_entropy(
    cfg: &CodingConfig,
    n_grid: &[usize],
) -> Result<(Vec<EntropyPoint>, SlopeFit), TorusError> {
    cfg.validate()?;
    if n_grid.len() < 4
        || n_grid.windows(2).any(|w| w[0] >= w[1])
        || n_grid.iter().any(|&n| n < 10)
        || *n_grid.last().unwrap() > cfg.n
    {
        return Err(TorusError::BadGrid);
    }
    let codes: Vec<Vec<u16>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = StreamRng::for_sample(cfg.seed, 0, i);
            let point: Vec<f64> = (0..cfg.d).map(|_| rng.next_f64()).collect();
            orbit_code(&point, cfg).map(|c| c.code)
        })
        .collect::<Result<_, _>>()?;
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let prefixes: Vec<Vec<u16>> = codes.iter().map(|c| c[..n].to_vec()).collect();
        let count = spanning_count(&prefixes, cfg.epsilon)?;
        let mass = mean_ball_mass(&prefixes, cfg.epsilon)?;
        let volume_count = (1.0 - cfg.epsilon) / mass;
        points.push(EntropyPoint {
            n,
            greedy: count.greedy,
            separated_lower: count.separated_lower,
            volume_count,
            log10_n: (n as f64).log10(),
            log10_volume_count: volume_count.log10(),
        });
    }
    let fit = fit_line(
        &points
            .iter()
            .map(|p| (p.log10_n, p.log10_volume_count))
            .collect::<Vec<_>>(),
    )?;
    Ok((points, fit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: usize, q: usize, n: usize) -> CodingConfig {
        CodingConfig::new(d, q, n, 0.1, 100, 7)
    }

    #[test]
    fn circle_rotation_code_matches_by_hand() {
        let mut c = cfg(1, 2, 12);
        c.alpha = 0.25;
        let code = orbit_code(&[0.0], &c).unwrap().code;
        assert_eq!(&code[..4], &[0, 0, 1, 1]);
        assert_eq!(&code[4..8], &[0, 0, 1, 1]);

        c.alpha = 0.0;
        let fixed = orbit_code(&[0.0], &c).unwrap().code;
        assert!(fixed.iter().all(|&s| s == 0));
    }

    #[test]
    fn skew_orbit_matches_closed_form() {
        let c = cfg(2, 7, 50);
        let (x1, x2) = (0.137, 0.408);
        let code = orbit_code(&[x1, x2], &c).unwrap().code;
        for (k, &cell) in code.iter().enumerate() {
            let kf = k as f64;
            let top = wrap(x1 + kf * c.alpha);
            let bottom = wrap(x2 + kf * x1 + kf * (kf - 1.0) / 2.0 * c.alpha);
            let expect = cell_of(&[top, bottom], c.q);
            assert_eq!(cell, expect, "step {k}");
        }
    }

    #[test]
    fn wrap_and_cell_edge_cases() {
        assert_eq!(wrap(-1e-17), 0.0);
        assert_eq!(wrap(1.0), 0.0);
        assert_eq!(cell_of(&[0.999_999_999], 10), 9);
        // Least-significant digit is the first coordinate.
        assert_eq!(cell_of(&[0.15, 0.75], 10), 1 + 7 * 10);
    }

    #[test]
    fn hamming_is_a_pseudometric() {
        let mut rng = StreamRng::for_sample(3, 0, 0);
        let rand_code = |rng: &mut StreamRng| -> Vec<u16> {
            (0..40).map(|_| (rng.next_u64() % 5) as u16).collect()
        };
        for _ in 0..50 {
            let (a, b, c) = (
                rand_code(&mut rng),
                rand_code(&mut rng),
                rand_code(&mut rng),
            );
            assert_eq!(hamming(&a, &a).unwrap(), 0.0);
            assert_eq!(hamming(&a, &b).unwrap(), hamming(&b, &a).unwrap());
            let (ab, bc, ac) = (
                hamming(&a, &b).unwrap(),
                hamming(&b, &c).unwrap(),
                hamming(&a, &c).unwrap(),
            );
            assert!(ac <= ab + bc + 1e-12);
        }
        assert!(matches!(
            hamming(&[0, 1], &[0, 1, 2]),
            Err(TorusError::LengthMismatch(2, 3))
        ));
    }

    #[test]
    fn config_validation_errors() {
        assert!(matches!(cfg(0, 2, 20).validate(), Err(TorusError::BadDim)));
        assert!(matches!(cfg(1, 1, 20).validate(), Err(TorusError::BadQ(1))));
        assert!(matches!(
            cfg(1, 2, 5).validate(),
            Err(TorusError::BadLength(5))
        ));
        let mut c = cfg(1, 2, 20);
        c.epsilon = 1.0;
        assert!(matches!(c.validate(), Err(TorusError::BadEpsilon(_))));
        assert!(matches!(
            cfg(5, 16, 20).validate(),
            Err(TorusError::AlphabetOverflow(_))
        ));
        assert!(matches!(
            orbit_code(&[0.1, 0.2], &cfg(1, 2, 20)),
            Err(TorusError::PointDim {
                expected: 1,
                got: 2
            })
        ));
    }

    fn random_codes(count: usize, len: usize, alphabet: u16, seed: u64) -> Vec<Vec<u16>> {
        (0..count as u64)
            .map(|i| {
                let mut rng = StreamRng::for_sample(seed, 9, i);
                (0..len)
                    .map(|_| (rng.next_u64() % alphabet as u64) as u16)
                    .collect()
            })
            .collect()
    }

    #[test]
    fn greedy_covers_and_dominates_lower_bound() {
        let codes = random_codes(120, 60, 4, 1);
        for &eps in &[0.05, 0.1, 0.3, 0.6] {
            let s = spanning_count(&codes, eps).unwrap();
            assert!(s.covered_fraction >= 1.0 - eps - 1e-9);
            assert!(
                s.greedy >= s.separated_lower,
                "greedy {} < lower {} at eps {eps}",
                s.greedy,
                s.separated_lower
            );
        }
    }

    #[test]
    fn spanning_monotone_in_radius() {
        let codes = random_codes(150, 80, 3, 2);
        let coarse = spanning_count(&codes, 0.5).unwrap().greedy;
        let fine = spanning_count(&codes, 0.05).unwrap().greedy;
        assert!(fine >= coarse, "fine {fine} < coarse {coarse}");
    }

    #[test]
    fn skew_orbit_complexity_grows_with_length() {
        // Coarse partition so the sample resolves the growth: the greedy
        // count climbs and the average ball mass shrinks as codes lengthen.
        let c = CodingConfig::new(2, 2, 320, 0.1, 400, 11);
        let codes: Vec<Vec<u16>> = (0..c.samples as u64)
            .map(|i| {
                let mut rng = StreamRng::for_sample(c.seed, 0, i);
                let point: Vec<f64> = (0..c.d).map(|_| rng.next_f64()).collect();
                orbit_code(&point, &c).unwrap().code
            })
            .collect();
        let short: Vec<Vec<u16>> = codes.iter().map(|x| x[..40].to_vec()).collect();
        let s_short = spanning_count(&short, c.epsilon).unwrap().greedy;
        let s_long = spanning_count(&codes, c.epsilon).unwrap().greedy;
        assert!(
            s_long > s_short,
            "greedy count should grow: {s_short} -> {s_long}"
        );
        let m_short = mean_ball_mass(&short, c.epsilon).unwrap();
        let m_long = mean_ball_mass(&codes, c.epsilon).unwrap();
        assert!(
            m_short > 2.0 * m_long,
            "ball mass should shrink: {m_short:.3e} -> {m_long:.3e}"
        );
    }

    #[test]
    fn circle_rotation_entropy_is_flat() {
        let c = CodingConfig::new(1, 10, 400, 0.1, 600, 5);
        let (points, fit) = empirical_slow_entropy(&c, &[50, 100, 200, 400]).unwrap();
        assert_eq!(points.len(), 4);
        assert!(
            fit.exponent.abs() < 0.2,
            "rotation exponent {} should vanish",
            fit.exponent
        );
    }

    #[test]
    fn entropy_grid_validation() {
        let c = cfg(1, 2, 100);
        assert!(matches!(
            empirical_slow_entropy(&c, &[50, 100]),
            Err(TorusError::BadGrid)
        ));
        assert!(matches!(
            empirical_slow_entropy(&c, &[20, 40, 30, 80]),
            Err(TorusError::BadGrid)
        ));
        assert!(matches!(
            empirical_slow_entropy(&c, &[20, 40, 80, 160]),
            Err(TorusError::BadGrid)
        ));
    }

    #[test]
    fn visited_cells_equidistribute() {
        // Independent random starts, a fixed number of steps each: the final
        // cells should be uniform over the q^d alphabet.
        let c = CodingConfig::new(2, 4, 60, 0.1, 20_000, 23);
        let cells = c.cells().unwrap() as usize;
        let mut hist = vec![0u64; cells];
        for i in 0..c.samples as u64 {
            let mut rng = StreamRng::for_sample(c.seed, 1, i);
            let point: Vec<f64> = (0..c.d).map(|_| rng.next_f64()).collect();
            let code = orbit_code(&point, &c).unwrap().code;
            hist[*code.last().unwrap() as usize] += 1;
        }
        let expect = c.samples as f64 / cells as f64;
        let chi2: f64 = hist
            .iter()
            .map(|&o| {
                let d = o as f64 - expect;
                d * d / expect
            })
            .sum();
        // 15 degrees of freedom; p > 0.01 means chi2 below the 0.99 quantile.
        let quantile_99 = 30.58;
        assert!(chi2 < quantile_99, "chi2 = {chi2}");
    }
}
