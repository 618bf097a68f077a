//! Closed-form complexity exponents for the worked families of
//! quasi-unipotent flows.
//!
//! Each formula here is a finite rational expression in the combinatorial
//! data of the flow (Jordan block sizes of the nilpotent generator, or the
//! Jordan type of a twisting representation). They serve as fast paths and as
//! independent cross-checks against the linear-algebra routes in
//! [`crate::chains`] and [`crate::sl2`].

use num::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{rat, ratq, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClosedFormError {
    #[error("block sequence must be nonempty")]
    Empty,
    #[error("block sizes must be at least 1")]
    ZeroBlock,
    #[error("block sequence must be nondecreasing, got {0:?}")]
    NotSorted(Vec<usize>),
    #[error("family parameter must be at least 1")]
    DegenerateParameter,
    #[error("Jordan block lengths must be nonempty and at least 1")]
    BadLengths,
}

/// Nondecreasing Jordan block sizes `k_1 <= k_2 <= ... <= k_s` of a nilpotent
/// matrix, the combinatorial input to [`r_block_sequence`].
///
/// The ordering is part of the contract: out-of-order input is rejected
/// rather than sorted, because silently reordering would mask caller bugs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockSequence(Vec<usize>);

impl BlockSequence {
    pub fn new(blocks: Vec<usize>) -> Result<Self, ClosedFormError> {
        if blocks.is_empty() {
            return Err(ClosedFormError::Empty);
        }
        if blocks.contains(&0) {
            return Err(ClosedFormError::ZeroBlock);
        }
        if blocks.windows(2).any(|w| w[0] > w[1]) {
            return Err(ClosedFormError::NotSorted(blocks));
        }
        Ok(BlockSequence(blocks))
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0
    }

    /// Total dimension `Σ k_i`.
    pub fn dim(&self) -> usize {
        self.0.iter().sum()
    }
}

impl TryFrom<Vec<usize>> for BlockSequence {
    type Error = ClosedFormError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        BlockSequence::new(v)
    }
}

impl From<BlockSequence> for Vec<usize> {
    fn from(b: BlockSequence) -> Self {
        b.0
    }
}

/// Jordan block lengths of a twisting representation evaluated on the
/// nilpotent generator; order carries no meaning, but every length must be at
/// least 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct JordanLengths(Vec<usize>);

impl JordanLengths {
    pub fn new(lengths: Vec<usize>) -> Result<Self, ClosedFormError> {
        if lengths.is_empty() || lengths.contains(&0) {
            return Err(ClosedFormError::BadLengths);
        }
        Ok(JordanLengths(lengths))
    }

    pub fn lengths(&self) -> &[usize] {
        &self.0
    }

    /// Total dimension `Σ ℓ_i`.
    pub fn dim(&self) -> usize {
        self.0.iter().sum()
    }
}

impl TryFrom<Vec<usize>> for JordanLengths {
    type Error = ClosedFormError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        JordanLengths::new(v)
    }
}

impl From<JordanLengths> for Vec<usize> {
    fn from(l: JordanLengths) -> Self {
        l.0
    }
}

/// Complexity exponent of the flow generated by the nilpotent with Jordan
/// blocks `k` inside the trace-zero matrices of size `Σ k_i`:
///
/// ```text
/// R = Σ_i k_i(4k_i + 1)(k_i − 1)/6  +  Σ_{i<j} k_i(k_i² + 3k_j² − 3k_j − 1)/3
/// ```
///
/// with the cross terms running over ordered pairs of the nondecreasing
/// sequence.
pub fn r_block_sequence(k: &BlockSequence) -> Rational {
    let ks = k.blocks();
    let mut r = Rational::zero();
    for (i, &ki) in ks.iter().enumerate() {
        let a = ki as i64;
        r += ratq(a * (4 * a + 1) * (a - 1), 6);
        for &kj in &ks[i + 1..] {
            let b = kj as i64;
            r += ratq(a * (a * a + 3 * b * b - 3 * b - 1), 3);
        }
    }
    r
}

/// Exponent for the single-block case `k = (d)`, `R = d(d−1)(4d+1)/6` —
/// the specialization of [`r_block_sequence`] used when only the dimension is
/// known.
pub fn r_principal(d: usize) -> Result<Rational, ClosedFormError> {
    if d == 0 {
        return Err(ClosedFormError::DegenerateParameter);
    }
    let d = d as i64;
    Ok(ratq(d * (d - 1) * (4 * d + 1), 6))
}

/// Exponent `R = d(d−1)/2` of the step-two nilpotent family on a
/// `(d+1)`-dimensional algebra (see
/// [`heisenberg_type`](crate::zoo::heisenberg_type)).
pub fn r_nilpotent_example(d: usize) -> Result<Rational, ClosedFormError> {
    if d == 0 {
        return Err(ClosedFormError::DegenerateParameter);
    }
    let d = d as i64;
    Ok(ratq(d * (d - 1), 2))
}

/// Exponent of a semidirect-product (twisted) flow: the semisimple-factor
/// contribution `R(k)` plus `Σ ℓ_i(ℓ_i − 1)/2` over the Jordan lengths of the
/// representation on the translation part.
pub fn r_twisted(k: &BlockSequence, lengths: &JordanLengths) -> Rational {
    let mut r = r_block_sequence(k);
    for &l in lengths.lengths() {
        let l = l as i64;
        r += ratq(l * (l - 1), 2);
    }
    r
}

/// Twisted exponent for the `n`-th symmetric power of the defining
/// representation of the trace-zero 2×2 matrices: `R = 3 + n(n+1)/2`.
pub fn r_twisted_sym_power(n: usize) -> Rational {
    let n = n as i64;
    rat(3) + ratq(n * (n + 1), 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs(v: &[usize]) -> BlockSequence {
        BlockSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn frozen_block_sequence_values() {
        let cases: &[(&[usize], i64)] = &[
            (&[1], 0),
            (&[1, 1], 0),
            (&[2], 3),
            (&[1, 2], 5),
            (&[3], 13),
            (&[2, 2], 12),
            (&[4], 34),
            (&[1, 1, 2], 7),
        ];
        for &(blocks, want) in cases {
            assert_eq!(r_block_sequence(&bs(blocks)), rat(want), "k = {blocks:?}");
        }
    }

    #[test]
    fn principal_matches_block_sequence() {
        for d in 1..=9 {
            assert_eq!(r_principal(d).unwrap(), r_block_sequence(&bs(&[d])));
        }
        assert_eq!(r_principal(0), Err(ClosedFormError::DegenerateParameter));
    }

    #[test]
    fn nilpotent_example_values() {
        assert_eq!(r_nilpotent_example(1).unwrap(), rat(0));
        assert_eq!(r_nilpotent_example(2).unwrap(), rat(1));
        assert_eq!(r_nilpotent_example(3).unwrap(), rat(3));
        assert_eq!(r_nilpotent_example(4).unwrap(), rat(6));
        assert_eq!(
            r_nilpotent_example(0),
            Err(ClosedFormError::DegenerateParameter)
        );
    }

    #[test]
    fn twisted_sym_power_values() {
        assert_eq!(r_twisted_sym_power(0), rat(3));
        assert_eq!(r_twisted_sym_power(1), rat(4));
        assert_eq!(r_twisted_sym_power(2), rat(6));
        assert_eq!(r_twisted_sym_power(3), rat(9));
        assert_eq!(r_twisted_sym_power(4), rat(13));
    }

    #[test]
    fn twisted_general_agrees_with_sym_power() {
        for n in 0..=5 {
            let lengths = JordanLengths::new(vec![n + 1]).unwrap();
            assert_eq!(r_twisted(&bs(&[2]), &lengths), r_twisted_sym_power(n));
        }
    }

    #[test]
    fn twisted_sums_over_lengths() {
        let lengths = JordanLengths::new(vec![3, 1, 2]).unwrap();
        assert_eq!(
            r_twisted(&bs(&[1, 2]), &lengths),
            rat(5) + rat(3) + rat(0) + rat(1)
        );
    }

    #[test]
    fn unsorted_input_is_rejected_not_sorted() {
        assert_eq!(
            BlockSequence::new(vec![2, 1]),
            Err(ClosedFormError::NotSorted(vec![2, 1]))
        );
        assert_eq!(BlockSequence::new(vec![]), Err(ClosedFormError::Empty));
        assert_eq!(
            BlockSequence::new(vec![1, 0]),
            Err(ClosedFormError::ZeroBlock)
        );
    }

    #[test]
    fn block_sequence_serde_enforces_order() {
        let b: BlockSequence = serde_json::from_str("[1,2,2]").unwrap();
        assert_eq!(b.blocks(), &[1, 2, 2]);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[1,2,2]");
        assert!(serde_json::from_str::<BlockSequence>("[2,1]").is_err());
        assert!(serde_json::from_str::<JordanLengths>("[0]").is_err());
    }
}
