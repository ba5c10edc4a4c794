//! Brute-force check of the closed forms on a truncated q-Fock space.
//!
//! `A` is the dense matrix with `sqrt([n]_q)` on the superdiagonal and
//! `A^dag` its conjugate transpose. An expectation `<psi| W |psi>` for a word
//! `W` of ladder operators is computed by applying the word to the coefficient
//! vector right to left.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::coherent::CoherentState;
use crate::error::{Error, Result};
use crate::qkernel::{q_integer, Deformation};

/// Coefficient mass allowed beyond the last index a word can read reliably.
pub const ORACLE_TAIL_LIMIT: f64 = 1e-18;

/// A ladder operator symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Lower,
    Raise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    entries: DMatrix<Complex64>,
}

impl TruncatedOperator {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self { entries: &self.entries * &rhs.entries }
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.entries * v
    }
}

/// `<n-1| A |n> = sqrt([n]_q)` on an `n`-dimensional truncation.
pub fn annihilation_matrix(dim: usize, d: &Deformation) -> Result<TruncatedOperator> {
    if dim < 2 {
        return Err(Error::invalid(format!("truncation dimension must be >= 2, got {dim}")));
    }
    let mut entries = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        entries[(n - 1, n)] = Complex64::new(q_integer(n, d).sqrt(), 0.0);
    }
    Ok(TruncatedOperator { entries })
}

pub fn creation_matrix(dim: usize, d: &Deformation) -> Result<TruncatedOperator> {
    Ok(annihilation_matrix(dim, d)?.adjoint())
}

/// Matrix of a word, multiplied left to right.
pub fn word_matrix(word: &[Ladder], dim: usize, d: &Deformation) -> Result<TruncatedOperator> {
    let lower = annihilation_matrix(dim, d)?;
    let raise = lower.adjoint();
    let mut acc = TruncatedOperator { entries: DMatrix::identity(dim, dim) };
    for op in word {
        acc = acc.compose(match op {
            Ladder::Lower => &lower,
            Ladder::Raise => &raise,
        });
    }
    Ok(acc)
}

/// Smallest `K` with `sum_{n > K} |c_n|^2 < ORACLE_TAIL_LIMIT`, certified by the ratio bound.
fn reliable_index(s: &CoherentState) -> Result<usize> {
    let d = s.deformation();
    let cap = s.truncation().n_max();
    let norm = s.normalization()?.value.re;
    let mut weight = 1.0 / norm;
    for k in 0..cap {
        let r = s.j() / q_integer(k + 1, d);
        if r < 1.0 && weight * r / (1.0 - r) < ORACLE_TAIL_LIMIT {
            return Ok(k);
        }
        weight *= r;
    }
    Err(Error::InsufficientTruncation { dim: cap, from: cap, tail: weight, limit: ORACLE_TAIL_LIMIT })
}

/// Upper bound on `sum_{n >= from} |c_n|^2`.
fn coefficient_tail(s: &CoherentState, from: usize) -> Result<f64> {
    let d = s.deformation();
    let norm = s.normalization()?.value.re;
    let mut weight = 1.0 / norm;
    let mut sum = 0.0;
    for k in 0..s.truncation().n_max().max(from + 1) {
        if k >= from {
            sum += weight;
        }
        let r = s.j() / q_integer(k + 1, d);
        if k >= from && r < 1.0 {
            let rest = weight * r / (1.0 - r);
            if rest <= f64::EPSILON * sum || rest == 0.0 {
                return Ok(sum + rest);
            }
        }
        weight *= r;
    }
    Ok(f64::INFINITY)
}

/// Automatic dimension for a word of length `word_len`: `N = K + word_len + 1`
/// with `K` the reliable index, so that every coefficient the word can push
/// past the edge (`n >= N - word_len`) carries less than `ORACLE_TAIL_LIMIT`.
/// Capped by the state's `n_max`.
pub fn automatic_dimension(s: &CoherentState, word_len: usize) -> Result<usize> {
    let dim = (reliable_index(s)? + word_len + 1).max(2);
    let cap = s.truncation().n_max();
    if dim > cap {
        let from = cap.saturating_sub(word_len);
        let tail = coefficient_tail(s, from)?;
        return Err(Error::InsufficientTruncation { dim: cap, from, tail, limit: ORACLE_TAIL_LIMIT });
    }
    Ok(dim)
}

/// `<psi| W |psi>` on a truncation of dimension `dim`, or the automatic one.
pub fn oracle_expectation(s: &CoherentState, word: &[Ladder], dim: Option<usize>) -> Result<Complex64> {
    let d = s.deformation();
    let dim = match dim {
        Some(n) => {
            if n < 2 {
                return Err(Error::invalid(format!("truncation dimension must be >= 2, got {n}")));
            }
            let from = n.saturating_sub(word.len());
            let tail = coefficient_tail(s, from)?;
            if tail >= ORACLE_TAIL_LIMIT {
                return Err(Error::InsufficientTruncation { dim: n, from, tail, limit: ORACLE_TAIL_LIMIT });
            }
            n
        }
        None => automatic_dimension(s, word.len())?,
    };
    let c = DVector::from_vec(s.coefficients_up_to(dim)?);
    let lower = annihilation_matrix(dim, d)?;
    let raise = lower.adjoint();
    let mut v = c.clone();
    for op in word.iter().rev() {
        v = match op {
            Ladder::Lower => lower.apply(&v),
            Ladder::Raise => raise.apply(&v),
        };
    }
    Ok(c.dotc(&v))
}
