//! Exact sl(2)-triples and the centralizer-weight route to the complexity
//! exponent.
//!
//! A triple `(V, X, U')` of rational matrices with `[X, U'] = 2U'`,
//! `[X, V] = -2V` and `[U', V] = X` spans a copy of sl(2). When `U'` is the
//! nilpotent generator of a quasi-unipotent flow on a Lie algebra containing
//! the triple, the algebra decomposes into irreducible sl(2)-modules, and the
//! eigenvalue multiplicities `d_n` of `ad_X` on the centralizer of `U'` count
//! the chains of each depth `n`. That turns the exponent into the finite sum
//! `R = Σ_n d_n · n(n+1)/2`, computed here with exact rank tests — a second
//! route to `R`, independent of the chain-basis construction in
//! [`crate::chains`].

use std::collections::BTreeMap;

use num::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elim;
use crate::linalg::{
    ad_operator, bracket, coordinates_in_basis, nilpotency_index, rat, LinalgError, RatMatrix,
    Rational,
};

#[derive(Debug, Error)]
pub enum Sl2Error {
    #[error("principal triple requires dimension >= 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("block sizes must be positive and nonempty")]
    BadBlocks,
    #[error("triple relations are violated: {0}")]
    RelationsViolated(&'static str),
    #[error("triple invalid for this algebra: {0}")]
    TripleInvalid(&'static str),
    #[error("element does not act nilpotently on the algebra")]
    NotNilpotentElement,
    #[error("no rational sl(2)-triple completes this element")]
    NoTriple,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A validated sl(2)-triple `(V, X, U')` of square rational matrices.
///
/// The constructor checks the bracket relations exactly, so a value of this
/// type always satisfies them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sl2Triple {
    v: RatMatrix,
    x: RatMatrix,
    uprime: RatMatrix,
}

impl Sl2Triple {
    /// Build a triple from its three members, verifying
    /// `[X, U'] = 2U'`, `[X, V] = -2V`, `[U', V] = X`.
    pub fn new(v: RatMatrix, x: RatMatrix, uprime: RatMatrix) -> Result<Self, Sl2Error> {
        let d = x.rows();
        for m in [&v, &x, &uprime] {
            if !m.is_square() || m.rows() != d {
                return Err(Sl2Error::RelationsViolated(
                    "members must be square matrices of equal size",
                ));
            }
        }
        if bracket(&x, &uprime)? != uprime.scale(&rat(2)) {
            return Err(Sl2Error::RelationsViolated("[X, U'] != 2U'"));
        }
        if bracket(&x, &v)? != v.scale(&rat(-2)) {
            return Err(Sl2Error::RelationsViolated("[X, V] != -2V"));
        }
        if bracket(&uprime, &v)? != x {
            return Err(Sl2Error::RelationsViolated("[U', V] != X"));
        }
        Ok(Sl2Triple { v, x, uprime })
    }

    pub fn v(&self) -> &RatMatrix {
        &self.v
    }

    pub fn x(&self) -> &RatMatrix {
        &self.x
    }

    pub fn uprime(&self) -> &RatMatrix {
        &self.uprime
    }

    /// Size of the member matrices.
    pub fn dim(&self) -> usize {
        self.x.rows()
    }
}

/// The unnormalized principal triple in dimension `d`: `U'` has ones on the
/// superdiagonal, `V` has `k(d-k)` on the subdiagonal and
/// `X = diag(d-1, d-3, ..., -(d-1))`.
///
/// `d = 1` yields the zero matrices (used for size-one blocks of
/// [`block_triple`]); the public entry point requires `d >= 2`.
fn principal_parts(d: usize) -> (RatMatrix, RatMatrix, RatMatrix) {
    let mut v = RatMatrix::zeros(d, d);
    let mut x = RatMatrix::zeros(d, d);
    let mut up = RatMatrix::zeros(d, d);
    for i in 0..d {
        x[(i, i)] = rat(d as i64 - 1 - 2 * i as i64);
    }
    for k in 1..d {
        up[(k - 1, k)] = rat(1);
        v[(k, k - 1)] = rat((k * (d - k)) as i64);
    }
    (v, x, up)
}

/// The principal sl(2)-triple in dimension `d >= 2`, with `U'` the full
/// single-block nilpotent.
pub fn principal_triple(d: usize) -> Result<Sl2Triple, Sl2Error> {
    if d < 2 {
        return Err(Sl2Error::DimensionTooSmall(d));
    }
    let (v, x, up) = principal_parts(d);
    Sl2Triple::new(v, x, up)
}

/// Block-diagonal assembly of principal triples, one block per entry of
/// `blocks`. Size-one blocks contribute zeros, so `U'` is the nilpotent with
/// the given Jordan block sizes.
pub fn block_triple(blocks: &[usize]) -> Result<Sl2Triple, Sl2Error> {
    if blocks.is_empty() || blocks.contains(&0) {
        return Err(Sl2Error::BadBlocks);
    }
    let d: usize = blocks.iter().sum();
    let mut v = RatMatrix::zeros(d, d);
    let mut x = RatMatrix::zeros(d, d);
    let mut up = RatMatrix::zeros(d, d);
    let mut off = 0;
    for &b in blocks {
        let (bv, bx, bup) = principal_parts(b);
        for i in 0..b {
            for j in 0..b {
                v[(off + i, off + j)] = bv[(i, j)].clone();
                x[(off + i, off + j)] = bx[(i, j)].clone();
                up[(off + i, off + j)] = bup[(i, j)].clone();
            }
        }
        off += b;
    }
    Sl2Triple::new(v, x, up)
}

/// Coordinate vectors (in `basis`) spanning the centralizer of `u`:
/// the kernel of `ad_u` restricted to the span of the basis.
pub fn centralizer(basis: &[RatMatrix], u: &RatMatrix) -> Result<Vec<Vec<Rational>>, Sl2Error> {
    let ad_u = ad_operator(basis, u)?;
    Ok(elim::kernel(&ad_u))
}

/// Eigenvalue multiplicities of `ad_X` on the centralizer of `U'`:
/// `d_n` chains of depth `n`, one highest-weight vector each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralizerSpectrum {
    /// Multiplicity of the eigenvalue `n`, keyed by `n`; absent keys are zero.
    pub d_n: BTreeMap<usize, usize>,
}

impl CentralizerSpectrum {
    /// The complexity exponent `R = Σ_n d_n · n(n+1)/2`.
    pub fn r(&self) -> Rational {
        let mut r = Rational::zero();
        for (&n, &mult) in &self.d_n {
            let n = n as i64;
            r += rat(mult as i64) * rat(n * (n + 1)) / rat(2);
        }
        r
    }

    /// Dimension of the centralizer, `Σ_n d_n`.
    pub fn centralizer_dim(&self) -> usize {
        self.d_n.values().sum()
    }

    /// The chain-depth multiset, descending — each eigenvalue `n` repeated
    /// `d_n` times. Comparable with
    /// [`ChainStructure::depths`](crate::chains::ChainStructure).
    pub fn depths(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (&n, &mult) in self.d_n.iter().rev() {
            out.extend(std::iter::repeat_n(n, mult));
        }
        out
    }
}

/// Complexity exponent data of the flow generated by `triple.uprime()`,
/// computed by restricting `ad_X` to the centralizer of `U'` inside the span
/// of `basis` and reading off integer eigenvalue multiplicities with exact
/// rank tests.
///
/// All three members of the triple must lie in the span of the basis and the
/// restriction must be diagonalizable over the nonnegative integers; anything
/// else reports the triple as invalid for this algebra.
pub fn entropy_via_triple(
    basis: &[RatMatrix],
    triple: &Sl2Triple,
) -> Result<CentralizerSpectrum, Sl2Error> {
    for m in [&triple.v, &triple.x, &triple.uprime] {
        match coordinates_in_basis(basis, m) {
            Ok(_) => {}
            Err(LinalgError::NotClosed { .. }) => {
                return Err(Sl2Error::TripleInvalid(
                    "a member of the triple lies outside the span of the basis",
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let ad_up = ad_operator(basis, &triple.uprime)?;
    let cent = elim::kernel(&ad_up);
    let k = cent.len();
    if k == 0 {
        return Err(Sl2Error::TripleInvalid("centralizer of U' is trivial"));
    }
    let n = basis.len();
    let mut c = RatMatrix::zeros(n, k);
    for (j, vec) in cent.iter().enumerate() {
        for (i, x) in vec.iter().enumerate() {
            c[(i, j)] = x.clone();
        }
    }
    let ad_x = ad_operator(basis, &triple.x)?;
    let rhs = ad_x.mul(&c);
    let restricted = match elim::solve_many(&c, &rhs) {
        elim::SolveOutcome::Solved(m) => m,
        elim::SolveOutcome::RankDeficientLhs => {
            unreachable!("kernel basis columns are independent")
        }
        elim::SolveOutcome::Inconsistent { .. } => {
            return Err(Sl2Error::TripleInvalid(
                "the centralizer of U' is not ad_X-invariant",
            ));
        }
    };
    // All eigenvalues of the restriction lie within the Gershgorin bound, so
    // an exact scan over 0..=bound finds every nonnegative integer eigenvalue.
    let mut bound_rat = Rational::zero();
    for i in 0..k {
        let mut row_sum = Rational::zero();
        for j in 0..k {
            row_sum += restricted[(i, j)].abs();
        }
        if row_sum > bound_rat {
            bound_rat = row_sum;
        }
    }
    let bound = bound_rat
        .ceil()
        .to_integer()
        .to_usize()
        .ok_or(Sl2Error::TripleInvalid("eigenvalue bound is out of range"))?;
    let mut d_n = BTreeMap::new();
    let mut total = 0;
    for nval in 0..=bound {
        let shifted = restricted.sub(&RatMatrix::identity(k).scale(&rat(nval as i64)));
        let mult = k - elim::rank(&shifted);
        if mult > 0 {
            d_n.insert(nval, mult);
            total += mult;
        }
    }
    if total != k {
        return Err(Sl2Error::TripleInvalid(
            "ad_X is not diagonalizable over the nonnegative integers on the centralizer",
        ));
    }
    Ok(CentralizerSpectrum { d_n })
}

fn mat_vec(m: &RatMatrix, v: &[Rational]) -> Vec<Rational> {
    (0..m.rows())
        .map(|i| {
            let mut acc = Rational::zero();
            for (j, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    acc += m[(i, j)].clone() * x;
                }
            }
            acc
        })
        .collect()
}

fn combine(basis: &[RatMatrix], coords: &[Rational]) -> RatMatrix {
    let mut out = RatMatrix::zeros(basis[0].rows(), basis[0].cols());
    for (b, c) in basis.iter().zip(coords) {
        if !c.is_zero() {
            out = out.add(&b.scale(c));
        }
    }
    out
}

/// Complete a nilpotently-acting element `u` of the algebra to an
/// sl(2)-triple with `U' = u`, entirely inside the span of the basis.
///
/// Solves `ad_u² y = -2u` for `X = ad_u(y)` (so `[X, u] = 2u` with `X` in the
/// image of `ad_u`), then the linear system `[X, V] = -2V`, `[U', V] = X` for
/// `V`. Either system being unsolvable over the rationals means no triple
/// exists — the typical outcome in a solvable algebra.
pub fn jacobson_morozov(basis: &[RatMatrix], u: &RatMatrix) -> Result<Sl2Triple, Sl2Error> {
    let u_coords = match coordinates_in_basis(basis, u) {
        Ok(c) => c,
        Err(LinalgError::NotClosed { .. }) => {
            return Err(Sl2Error::TripleInvalid(
                "element lies outside the span of the basis",
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let ad_u = ad_operator(basis, u)?;
    if nilpotency_index(&ad_u)?.is_none() {
        return Err(Sl2Error::NotNilpotentElement);
    }
    let n = basis.len();
    let ad_u2 = ad_u.mul(&ad_u);
    let minus_2u: Vec<Rational> = u_coords.iter().map(|c| rat(-2) * c).collect();
    let y = elim::solve_particular(&ad_u2, &minus_2u).ok_or(Sl2Error::NoTriple)?;
    let x_coords = mat_vec(&ad_u, &y);
    let x_mat = combine(basis, &x_coords);
    let ad_x = ad_operator(basis, &x_mat)?;
    let mut stacked = RatMatrix::zeros(2 * n, n);
    let mut rhs = vec![Rational::zero(); 2 * n];
    for i in 0..n {
        for j in 0..n {
            stacked[(i, j)] = ad_x[(i, j)].clone();
            stacked[(n + i, j)] = ad_u[(i, j)].clone();
        }
        stacked[(i, i)] += rat(2);
        rhs[n + i] = x_coords[i].clone();
    }
    let v_coords = elim::solve_particular(&stacked, &rhs).ok_or(Sl2Error::NoTriple)?;
    let v_mat = combine(basis, &v_coords);
    Sl2Triple::new(v_mat, x_mat, u.clone())
}
