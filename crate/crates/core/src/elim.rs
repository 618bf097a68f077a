//! Fraction-free Gaussian elimination over `BigInt` with exact rational
//! back-substitution.
//!
//! Rational inputs are scaled row-wise to integers first (which preserves row
//! space, rank and kernel), then reduced by single-step Bareiss elimination so
//! intermediate entries stay minors of the input rather than blowing up.
//! Pivoting is deterministic: columns are scanned left to right and the first
//! available row with a nonzero entry wins, so kernels, particular solutions
//! and pivot-column sets are reproducible.

use crate::linalg::{LinalgError, RatMatrix, Rational};
use num::{BigInt, One, Zero};

/// Integer row-echelon form produced by Bareiss elimination.
pub(crate) struct Echelon {
    rows: Vec<Vec<BigInt>>,
    /// `(row, col)` of each pivot, in elimination order.
    pivots: Vec<(usize, usize)>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_cols(&self) -> Vec<usize> {
        self.pivots.iter().map(|&(_, c)| c).collect()
    }

    /// Restrict the pivot search to the first `lhs_cols` columns; columns to
    /// the right are carried along as augmented data.
    pub fn reduce(mut rows: Vec<Vec<BigInt>>, lhs_cols: usize) -> Echelon {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut pivots = Vec::new();
        let mut prev = BigInt::one();
        let mut r = 0;
        for c in 0..lhs_cols {
            if r == nrows {
                break;
            }
            let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            // Single-step Bareiss update on every remaining row, zero head
            // included: each new entry is a minor of the input, so the
            // division by the previous pivot is exact over BigInt.
            for i in r + 1..nrows {
                let head = std::mem::replace(&mut rows[i][c], BigInt::zero());
                for j in c + 1..ncols {
                    let t = &rows[i][j] * &rows[r][c] - &head * &rows[r][j];
                    rows[i][j] = &t / &prev;
                }
            }
            prev = rows[r][c].clone();
            pivots.push((r, c));
            r += 1;
        }
        Echelon { rows, pivots }
    }

    /// Solve the homogeneous system for the kernel of the (unaugmented)
    /// matrix. Free variables are the non-pivot columns in increasing order;
    /// the basis vector for free column `f` has a `1` there and `0` at other
    /// free columns.
    pub fn kernel_basis(&self, ncols: usize) -> Vec<Vec<Rational>> {
        let pivot_cols = self.pivot_cols();
        let is_pivot = |c: usize| pivot_cols.binary_search(&c).is_ok();
        let mut out = Vec::new();
        for f in 0..ncols {
            if is_pivot(f) {
                continue;
            }
            let mut x = vec![Rational::zero(); ncols];
            x[f] = Rational::one();
            for &(row, pc) in self.pivots.iter().rev() {
                let mut acc = Rational::zero();
                for (rj, xj) in self.rows[row][pc + 1..ncols].iter().zip(&x[pc + 1..ncols]) {
                    if !rj.is_zero() && !xj.is_zero() {
                        acc += Rational::from_integer(rj.clone()) * xj;
                    }
                }
                x[pc] = -acc / Rational::from_integer(self.rows[row][pc].clone());
            }
            out.push(x);
        }
        out
    }

    /// Back-substitute one augmented column into a particular solution of
    /// `A x = b` (free variables set to zero), or `None` if inconsistent.
    fn solve_augmented_col(&self, lhs_cols: usize, aug_col: usize) -> Option<Vec<Rational>> {
        // Any row below the last pivot must have zero in the augmented column.
        for i in self.rank()..self.rows.len() {
            if !self.rows[i][aug_col].is_zero() {
                return None;
            }
        }
        let mut x = vec![Rational::zero(); lhs_cols];
        for &(row, pc) in self.pivots.iter().rev() {
            let mut acc = Rational::from_integer(self.rows[row][aug_col].clone());
            for (rj, xj) in self.rows[row][pc + 1..lhs_cols]
                .iter()
                .zip(&x[pc + 1..lhs_cols])
            {
                if !rj.is_zero() && !xj.is_zero() {
                    acc -= Rational::from_integer(rj.clone()) * xj;
                }
            }
            x[pc] = acc / Rational::from_integer(self.rows[row][pc].clone());
        }
        Some(x)
    }
}

/// Exact rank.
pub fn rank(m: &RatMatrix) -> usize {
    Echelon::reduce(m.to_row_cleared_bigint(), m.cols()).rank()
}

/// Basis of the right kernel `{x : Mx = 0}`, deterministic order.
pub fn kernel(m: &RatMatrix) -> Vec<Vec<Rational>> {
    Echelon::reduce(m.to_row_cleared_bigint(), m.cols()).kernel_basis(m.cols())
}

/// Kernel of an integer matrix with `ncols` columns (rows may be ragged-free
/// `BigInt` data coming from scaled rational matrices).
pub(crate) fn kernel_int(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<Rational>> {
    Echelon::reduce(rows.to_vec(), ncols).kernel_basis(ncols)
}

/// Indices of a deterministic set of columns of `m` forming a basis of its
/// column space.
pub fn column_space_pivots(m: &RatMatrix) -> Vec<usize> {
    Echelon::reduce(m.to_row_cleared_bigint(), m.cols()).pivot_cols()
}

pub(crate) enum SolveOutcome {
    Solved(RatMatrix),
    /// The coefficient matrix has linearly dependent columns.
    RankDeficientLhs,
    /// First right-hand-side column outside the column space.
    Inconsistent {
        column: usize,
    },
}

/// Solve `A X = B` column by column, requiring `A` to have full column rank.
pub(crate) fn solve_many(a: &RatMatrix, b: &RatMatrix) -> SolveOutcome {
    assert_eq!(a.rows(), b.rows(), "solve_many shape mismatch");
    let mut rows = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        let mut row: Vec<Rational> = a.row(i).to_vec();
        row.extend_from_slice(b.row(i));
        rows.push(row);
    }
    let joint = RatMatrix::from_rows(rows).expect("rectangular by construction");
    let ech = Echelon::reduce(joint.to_row_cleared_bigint(), a.cols());
    if ech.rank() < a.cols() {
        return SolveOutcome::RankDeficientLhs;
    }
    let mut out = RatMatrix::zeros(a.cols(), b.cols());
    for j in 0..b.cols() {
        match ech.solve_augmented_col(a.cols(), a.cols() + j) {
            Some(x) => {
                for (i, v) in x.into_iter().enumerate() {
                    out[(i, j)] = v;
                }
            }
            None => return SolveOutcome::Inconsistent { column: j },
        }
    }
    SolveOutcome::Solved(out)
}

/// Particular solution of `A x = b` with free variables set to zero, or
/// `None` if the system is inconsistent. Unlike [`solve_many`] this accepts a
/// rank-deficient `A`.
pub(crate) fn solve_particular(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    assert_eq!(a.rows(), b.len(), "solve_particular shape mismatch");
    let mut rows = Vec::with_capacity(a.rows());
    for (i, bi) in b.iter().enumerate() {
        let mut row: Vec<Rational> = a.row(i).to_vec();
        row.push(bi.clone());
        rows.push(row);
    }
    let joint = RatMatrix::from_rows(rows).expect("rectangular by construction");
    let ech = Echelon::reduce(joint.to_row_cleared_bigint(), a.cols());
    ech.solve_augmented_col(a.cols(), a.cols())
}

/// Exact inverse of a square matrix.
pub fn inverse(m: &RatMatrix) -> Result<RatMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare(m.rows(), m.cols()));
    }
    match solve_many(m, &RatMatrix::identity(m.rows())) {
        SolveOutcome::Solved(x) => Ok(x),
        _ => Err(LinalgError::Singular),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat, ratq};

    #[test]
    fn rank_and_kernel_of_rational_matrix() {
        // Rows (1, 1/2, 1/3) and (2, 1, 2/3): rank 1, kernel dim 2.
        let m = RatMatrix::from_rows(vec![
            vec![rat(1), ratq(1, 2), ratq(1, 3)],
            vec![rat(2), rat(1), ratq(2, 3)],
        ])
        .unwrap();
        assert_eq!(rank(&m), 1);
        let ker = kernel(&m);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            let x = RatMatrix::column_vector(v);
            assert!(m.mul(&x).is_zero());
        }
        // Free columns are 1 and 2, each basis vector has unit there.
        assert_eq!(ker[0][1], rat(1));
        assert_eq!(ker[1][2], rat(1));
        assert_eq!(ker[0][2], rat(0));
    }

    #[test]
    fn kernel_of_injective_map_is_empty() {
        let m = RatMatrix::from_int_rows(&[vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert!(kernel(&m).is_empty());
        assert_eq!(rank(&m), 2);
    }

    #[test]
    fn solve_and_inverse() {
        let a = RatMatrix::from_int_rows(&[vec![2, 1], vec![1, 1]]);
        let inv = inverse(&a).unwrap();
        assert_eq!(a.mul(&inv), RatMatrix::identity(2));
        assert_eq!(inv, RatMatrix::from_int_rows(&[vec![1, -1], vec![-1, 2]]));

        let sing = RatMatrix::from_int_rows(&[vec![1, 2], vec![2, 4]]);
        assert!(matches!(inverse(&sing), Err(LinalgError::Singular)));
    }

    #[test]
    fn solve_many_detects_inconsistency() {
        // Columns of A span the x-axis plane; second rhs column escapes it.
        let a = RatMatrix::from_int_rows(&[vec![1], vec![0]]);
        let b = RatMatrix::from_int_rows(&[vec![3, 0], vec![0, 1]]);
        match solve_many(&a, &b) {
            SolveOutcome::Inconsistent { column } => assert_eq!(column, 1),
            _ => panic!("expected inconsistency"),
        }
    }

    #[test]
    fn column_space_pivots_are_leftmost() {
        let m = RatMatrix::from_int_rows(&[vec![0, 1, 1], vec![0, 2, 2]]);
        assert_eq!(column_space_pivots(&m), vec![1]);
    }

    #[test]
    fn bareiss_handles_zero_pivot_shuffle() {
        let m = RatMatrix::from_int_rows(&[vec![0, 2, 1], vec![3, 0, 0], vec![0, 4, 2]]);
        assert_eq!(rank(&m), 2);
        let ker = kernel(&m);
        assert_eq!(ker.len(), 1);
        let x = RatMatrix::column_vector(&ker[0]);
        assert!(m.mul(&x).is_zero());
    }
}
