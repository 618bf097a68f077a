//! Polynomials over the rationals: characteristic polynomials, square-free
//! parts, and evaluation at matrices.
//!
//! Coefficients are stored lowest degree first. The characteristic polynomial
//! uses the Faddeev–LeVerrier recurrence, which stays in exact arithmetic and
//! needs only matrix products and traces.

use crate::linalg::{LinalgError, RatMatrix, Rational};
use num::{One, Zero};

/// Dense rational polynomial, coefficients in ascending degree order with no
/// trailing zeros (the zero polynomial is an empty coefficient list).
#[derive(Clone, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Horner evaluation at a square matrix.
    pub fn eval_matrix(&self, m: &RatMatrix) -> RatMatrix {
        assert!(m.is_square());
        let n = m.rows();
        let mut acc = RatMatrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m);
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        acc
    }

    fn mul_scalar(&self, c: &Rational) -> QPoly {
        if c.is_zero() {
            return QPoly::zero();
        }
        QPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Make the leading coefficient one (no-op on the zero polynomial).
    pub fn monic(&self) -> QPoly {
        match self.coeffs.last() {
            None => QPoly::zero(),
            Some(lead) => self.mul_scalar(&lead.recip()),
        }
    }

    /// Euclidean division: `(quotient, remainder)`.
    pub fn divrem(&self, div: &QPoly) -> (QPoly, QPoly) {
        assert!(!div.is_zero(), "polynomial division by zero");
        let d = div.coeffs.len() - 1;
        let lead = div.coeffs[d].clone();
        let mut rem = self.coeffs.clone();
        let mut quo = vec![Rational::zero(); self.coeffs.len().saturating_sub(d)];
        while rem.len() > d {
            let k = rem.len() - 1 - d;
            let factor = rem.last().unwrap() / &lead;
            for i in 0..=d {
                let t = &div.coeffs[i] * &factor;
                rem[k + i] -= t;
            }
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
            quo[k] = factor;
            // The leading term cancels by construction, but defensive popping
            // above also handles interior cancellation.
            if rem.len() > k + d {
                // Leading coefficient failed to cancel: numerical impossibility
                // in exact arithmetic.
                unreachable!("exact division left the leading term");
            }
        }
        (QPoly::new(quo), QPoly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic(); // normalize to tame coefficient growth
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors: `p / gcd(p, p')`.
    pub fn square_free_part(&self) -> QPoly {
        if self.is_zero() {
            return QPoly::zero();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.monic();
        }
        let (q, r) = self.divrem(&g);
        debug_assert!(r.is_zero());
        q.monic()
    }
}

impl std::fmt::Debug for QPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("({c})x"),
                _ => format!("({c})x^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Characteristic polynomial `det(xI - m)` via the Faddeev–LeVerrier
/// recurrence; monic of degree `dim`.
pub fn char_poly(m: &RatMatrix) -> Result<QPoly, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare(m.rows(), m.cols()));
    }
    let n = m.rows();
    let mut coeffs = vec![Rational::zero(); n + 1];
    coeffs[n] = Rational::one();
    let mut acc = RatMatrix::identity(n);
    for k in 1..=n {
        let am = m.mul(&acc);
        let c = -am.trace() / Rational::from_integer(k.into());
        coeffs[n - k] = c.clone();
        acc = am;
        for i in 0..n {
            acc[(i, i)] += &c;
        }
    }
    Ok(QPoly::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratq};

    fn poly(cs: &[i64]) -> QPoly {
        QPoly::new(cs.iter().map(|&c| rat(c)).collect())
    }

    #[test]
    fn char_poly_basic() {
        // diag(1,-1): x^2 - 1; rotation generator: x^2 + 1; shift: x^3.
        let d = RatMatrix::from_int_rows(&[vec![1, 0], vec![0, -1]]);
        assert_eq!(char_poly(&d).unwrap(), poly(&[-1, 0, 1]));
        let r = RatMatrix::from_int_rows(&[vec![0, 1], vec![-1, 0]]);
        assert_eq!(char_poly(&r).unwrap(), poly(&[1, 0, 1]));
        let s = RatMatrix::from_int_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]);
        assert_eq!(char_poly(&s).unwrap(), poly(&[0, 0, 0, 1]));
    }

    #[test]
    fn char_poly_companion() {
        // Companion matrix of x^3 - 2x - 5.
        let c = RatMatrix::from_int_rows(&[vec![0, 0, 5], vec![1, 0, 2], vec![0, 1, 0]]);
        assert_eq!(char_poly(&c).unwrap(), poly(&[-5, -2, 0, 1]));
    }

    #[test]
    fn cayley_hamilton_on_rational_matrix() {
        let m = RatMatrix::from_rows(vec![
            vec![ratq(1, 2), rat(3)],
            vec![ratq(-2, 3), ratq(5, 7)],
        ])
        .unwrap();
        let chi = char_poly(&m).unwrap();
        assert!(chi.eval_matrix(&m).is_zero());
    }

    #[test]
    fn gcd_and_square_free() {
        // p = (x-1)^2 (x+2): square-free part (x-1)(x+2) = x^2 + x - 2.
        let p = poly(&[2, -3, 0, 1]);
        assert_eq!(p.square_free_part(), poly(&[-2, 1, 1]));
        // gcd((x-1)(x+1), (x-1)x) = x - 1.
        let a = poly(&[-1, 0, 1]);
        let b = poly(&[0, -1, 1]);
        assert_eq!(a.gcd(&b), poly(&[-1, 1]));
    }

    #[test]
    fn divrem_round_trip() {
        let a = poly(&[3, 1, 4, 1, 5]);
        let b = poly(&[2, 7, 1]);
        let (q, r) = a.divrem(&b);
        let mut recomposed = vec![Rational::zero(); 5];
        for (i, qc) in q.coeffs().iter().enumerate() {
            for (j, bc) in b.coeffs().iter().enumerate() {
                let t = qc * bc;
                recomposed[i + j] += t;
            }
        }
        for (k, rc) in r.coeffs().iter().enumerate() {
            recomposed[k] += rc;
        }
        assert_eq!(QPoly::new(recomposed), a);
    }

    #[test]
    fn eval_matrix_horner() {
        let m = RatMatrix::from_int_rows(&[vec![0, 1], vec![0, 0]]);
        // p(x) = 1 + 2x on the shift: I + 2 E12.
        let p = poly(&[1, 2]);
        assert_eq!(
            p.eval_matrix(&m),
            RatMatrix::from_int_rows(&[vec![1, 2], vec![0, 1]])
        );
    }
}
