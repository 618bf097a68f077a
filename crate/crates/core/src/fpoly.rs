//! Dense univariate polynomials over `f64` for the divergence simulators.
//!
//! Orbit displacement coordinates of a quasi-unipotent flow are polynomials
//! in time, so Bowen-ball membership reduces to bounding polynomials on
//! intervals. The sup is computed from critical points (real roots of the
//! derivative via the companion matrix), with a Chebyshev-grid mode as a
//! faster alternative; sublevel sets `{|p| < delta}` come from the roots of
//! `p ∓ delta`.

use nalgebra::DMatrix;

/// Polynomial with ascending coefficients; exact trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct FPoly {
    coeffs: Vec<f64>,
}

impl FPoly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        FPoly { coeffs }
    }

    pub fn zero() -> Self {
        FPoly { coeffs: vec![0.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn derivative(&self) -> FPoly {
        if self.coeffs.len() == 1 {
            return FPoly::zero();
        }
        FPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| (i + 1) as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &FPoly) -> FPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        FPoly::new(out)
    }

    pub fn sub(&self, other: &FPoly) -> FPoly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &FPoly) -> FPoly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        FPoly::new(out)
    }

    pub fn scale(&self, s: f64) -> FPoly {
        FPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn shift(&self, c: f64) -> FPoly {
        let mut out = self.clone();
        out.coeffs[0] += c;
        FPoly::new(out.coeffs)
    }

    /// All real roots, found as companion-matrix eigenvalues with one Newton
    /// polish; complex pairs are dropped. The zero polynomial has no isolated
    /// roots and returns an empty list.
    pub fn real_roots(&self) -> Vec<f64> {
        let n = self.degree();
        if n == 0 {
            return vec![];
        }
        if n == 1 {
            return vec![-self.coeffs[0] / self.coeffs[1]];
        }
        let scale = self
            .coeffs
            .iter()
            .fold(0.0f64, |m, &c| m.max(c.abs()))
            .max(f64::MIN_POSITIVE);
        let monic: Vec<f64> = self.coeffs.iter().map(|&c| c / scale).collect();
        let lead = monic[n];
        let mut comp = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            comp[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            comp[(i, n - 1)] = -monic[i] / lead;
        }
        let eigs = comp.complex_eigenvalues();
        let deriv = self.derivative();
        let mut roots = Vec::new();
        for e in eigs.iter() {
            if e.im.abs() > 1e-7 * (1.0 + e.re.abs()) {
                continue;
            }
            let mut r = e.re;
            let d = deriv.eval(r);
            if d != 0.0 && d.is_finite() {
                let step = self.eval(r) / d;
                if step.is_finite() {
                    r -= step;
                }
            }
            roots.push(r);
        }
        roots.sort_by(f64::total_cmp);
        roots
    }

    /// Exact-mode sup of `|p|` on `[a, b]`: maximum over the endpoints and
    /// the real critical points inside, plus a coarse grid as a safety net
    /// against any critical point the eigen-solver misclassifies.
    pub fn sup_abs_on(&self, a: f64, b: f64) -> f64 {
        assert!(a <= b, "empty interval");
        let mut best = self.eval(a).abs().max(self.eval(b).abs());
        for r in self.derivative().real_roots() {
            if r > a && r < b {
                best = best.max(self.eval(r).abs());
            }
        }
        for i in 1..8 {
            let t = a + (b - a) * i as f64 / 8.0;
            best = best.max(self.eval(t).abs());
        }
        best
    }

    /// Grid-mode sup of `|p|` on `[a, b]` over `points` Chebyshev nodes.
    pub fn sup_abs_grid(&self, a: f64, b: f64, points: usize) -> f64 {
        assert!(a <= b && points >= 2, "bad grid");
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let m = (points - 1) as f64;
        (0..points)
            .map(|i| {
                let t = mid + half * (std::f64::consts::PI * i as f64 / m).cos();
                self.eval(t).abs()
            })
            .fold(0.0, f64::max)
    }

    /// The set `{t in [a, b] : |p(t)| < delta}` as disjoint sorted intervals.
    pub fn sublevel_intervals(&self, delta: f64, a: f64, b: f64) -> Vec<(f64, f64)> {
        assert!(delta > 0.0 && a <= b);
        let mut cuts = vec![a, b];
        for shift in [-delta, delta] {
            for r in self.shift(shift).real_roots() {
                if r > a && r < b {
                    cuts.push(r);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi - lo <= 0.0 {
                continue;
            }
            if self.eval(0.5 * (lo + hi)).abs() < delta {
                match out.last_mut() {
                    Some(last) if (last.1 - lo).abs() < 1e-12 * (b - a).max(1.0) => last.1 = hi,
                    _ => out.push((lo, hi)),
                }
            }
        }
        out
    }

    /// Total length of [`sublevel_intervals`](Self::sublevel_intervals).
    pub fn sublevel_measure(&self, delta: f64, a: f64, b: f64) -> f64 {
        self.sublevel_intervals(delta, a, b)
            .iter()
            .map(|(lo, hi)| hi - lo)
            .sum()
    }
}
