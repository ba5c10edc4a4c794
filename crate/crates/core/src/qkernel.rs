//! q-arithmetic and convergent q-series.
//!
//! Everything here is built on the deformed integers
//!
//! ```text
//! [n]_q = (1 - q^{2n}) / (1 - q^2),   [n]_q! = [1]_q [2]_q ... [n]_q
//! ```
//!
//! and the two series
//!
//! ```text
//! E_q(J)        = sum_n J^n / [n]_q!
//! F_q(J, gamma) = sum_n J^n exp(i gamma q^{2n}) / [n]_q!
//! ```
//!
//! For `q < 1` both have the finite radius of convergence `1 / (1 - q^2)`,
//! because `[n]_q` saturates at that value. Arguments at or beyond
//! `(1 - CONVERGENCE_MARGIN) * radius` are rejected.
//!
//! Summation carries a certified truncation bound. The term-modulus ratio
//! `r_n = |t_{n+1}| / |t_n|` is nonincreasing in `n` for every series in this
//! crate, so once `r_N < 1` the remainder is bounded by `|t_N| r_N / (1 - r_N)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Fraction of the convergence radius that is kept as a safety margin.
pub const CONVERGENCE_MARGIN: f64 = 0.01;

/// Default absolute tail tolerance for series evaluation.
pub const DEFAULT_TOL: f64 = 1e-14;

/// Default hard cap on the number of series terms.
pub const DEFAULT_N_MAX: usize = 512;

/// The deformation parameter `q` in `(0, 1]` and the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deformation {
    q: f64,
    q_sq: f64,
    one_minus_q_sq: f64,
    ln_q: f64,
    radius: f64,
}

impl Deformation {
    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() || q <= 0.0 || q > 1.0 {
            return Err(Error::invalid(format!("q must lie in (0, 1], got {q}")));
        }
        Ok(Self::build(q, q.ln()))
    }

    /// Deformation `q = exp(-tau)` for `tau >= 0`.
    pub fn from_tau(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau < 0.0 {
            return Err(Error::invalid(format!("tau must be finite and >= 0, got {tau}")));
        }
        let q = (-tau).exp();
        if q <= 0.0 {
            return Err(Error::invalid(format!("tau = {tau} underflows q to zero")));
        }
        Ok(Self::build(q, q.ln()))
    }

    /// The undeformed algebra, `q = 1`.
    pub fn undeformed() -> Self {
        Self::build(1.0, 0.0)
    }

    fn build(q: f64, ln_q: f64) -> Self {
        let q_sq = q * q;
        // (1 - q)(1 + q) keeps full relative precision close to q = 1
        let one_minus_q_sq = (1.0 - q) * (1.0 + q);
        let radius = if q < 1.0 { 1.0 / one_minus_q_sq } else { f64::INFINITY };
        Self { q, q_sq, one_minus_q_sq, ln_q, radius }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q_sq(&self) -> f64 {
        self.q_sq
    }

    pub fn one_minus_q_sq(&self) -> f64 {
        self.one_minus_q_sq
    }

    pub fn ln_q(&self) -> f64 {
        self.ln_q
    }

    /// Radius of convergence of `E_q` and `F_q`; infinite at `q = 1`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Largest admissible series argument (exclusive).
    pub fn guard(&self) -> f64 {
        (1.0 - CONVERGENCE_MARGIN) * self.radius
    }

    pub fn is_undeformed(&self) -> bool {
        self.q == 1.0
    }

    /// `q^{2x}` for real `x`.
    pub fn q_pow2(&self, x: f64) -> f64 {
        (2.0 * x * self.ln_q).exp()
    }

    /// Rejects negative, non-finite and out-of-radius series arguments.
    pub fn check_argument(&self, j: f64) -> Result<()> {
        if !j.is_finite() || j < 0.0 {
            return Err(Error::invalid(format!("J must be finite and >= 0, got {j}")));
        }
        if !self.is_undeformed() && j >= self.guard() {
            return Err(Error::Divergence { j, q: self.q, radius: self.radius, guard: self.guard() });
        }
        Ok(())
    }
}

/// Series truncation policy: absolute tail tolerance and a hard term cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    tol: f64,
    n_max: usize,
}

impl Truncation {
    pub fn new(tol: f64, n_max: usize) -> Result<Self> {
        if !tol.is_finite() || tol <= 0.0 {
            return Err(Error::invalid(format!("tol must be finite and > 0, got {tol}")));
        }
        if n_max < 1 {
            return Err(Error::invalid("n_max must be at least 1"));
        }
        Ok(Self { tol, n_max })
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, n_max: DEFAULT_N_MAX }
    }
}

/// A summed series together with the number of terms used and a certified
/// bound on the discarded remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

/// `exp(i theta)`.
///
/// `sin_cos` reduces its argument modulo 2 pi exactly, so the phase error is
/// the rounding of `theta` itself, about `|theta| * eps`.
#[inline]
pub(crate) fn cis(theta: f64) -> Complex64 {
    let (s, c) = theta.sin_cos();
    Complex64::new(c, s)
}

/// The deformed integer `[n]_q`.
pub fn q_integer(n: usize, d: &Deformation) -> f64 {
    if d.is_undeformed() {
        return n as f64;
    }
    -(2.0 * n as f64 * d.ln_q).exp_m1() / d.one_minus_q_sq
}

/// The deformed factorial `[n]_q!`.
pub fn q_factorial(n: usize, d: &Deformation) -> Result<f64> {
    let mut acc = 1.0;
    for k in 1..=n {
        acc *= q_integer(k, d);
        if !acc.is_finite() {
            return Err(Error::Overflow(format!("[{n}]_q! at q = {}", d.q)));
        }
    }
    Ok(acc)
}

/// Core summation loop. `first` is `|t_0|`, `ratio(n)` gives
/// `|t_{n+1}| / |t_n|` (must be nonincreasing in `n`) and `phase(n)` the
/// unit-modulus factor of term `n`.
pub(crate) fn sum_series<R, P>(
    j: f64,
    d: &Deformation,
    t: &Truncation,
    first: f64,
    ratio: R,
    phase: P,
) -> Result<SeriesValue>
where
    R: Fn(usize) -> f64,
    P: Fn(usize) -> Complex64,
{
    d.check_argument(j)?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut modulus = first;
    let mut tail = f64::INFINITY;
    for n in 0..t.n_max {
        if !modulus.is_finite() {
            return Err(Error::Overflow(format!("series term {n} at J = {j}, q = {}", d.q)));
        }
        if modulus != 0.0 {
            sum += phase(n) * modulus;
        }
        let r = ratio(n);
        if r < 1.0 {
            // the running modulus carries about two roundings per step and
            // r / (1 - r) amplifies the rounding of r; inflate so the bound stays certified
            let rounding = (8.0 * (n as f64 + 1.0) + 4.0 / (1.0 - r)) * f64::EPSILON;
            tail = modulus * r / (1.0 - r) * (1.0 + rounding);
            if tail <= t.tol {
                return Ok(SeriesValue { value: sum, terms_used: n + 1, tail_bound: tail });
            }
        }
        modulus *= r;
    }
    Err(Error::NonConvergence { j, q: d.q, n_max: t.n_max, tail_bound: tail })
}

/// The q-exponential `E_q(J) = sum_n J^n / [n]_q!`.
pub fn q_exponential(j: f64, d: &Deformation, t: &Truncation) -> Result<SeriesValue> {
    sum_series(j, d, t, 1.0, |n| j / q_integer(n + 1, d), |_| Complex64::new(1.0, 0.0))
}

/// The derivative `E_q'(J) = sum_{n>=1} n J^{n-1} / [n]_q!`, summed termwise.
pub fn q_exponential_derivative(j: f64, d: &Deformation, t: &Truncation) -> Result<SeriesValue> {
    // term m is (m + 1) J^m / [m + 1]_q!
    sum_series(
        j,
        d,
        t,
        1.0,
        |m| (m as f64 + 2.0) / (m as f64 + 1.0) * j / q_integer(m + 2, d),
        |_| Complex64::new(1.0, 0.0),
    )
}

/// The two-parameter function `F_q(J, gamma) = sum_n J^n e^{i gamma q^{2n}} / [n]_q!`.
///
/// `F_q(J, 0) = E_q(J)` and `F_q(J, -gamma) = conj(F_q(J, gamma))`.
pub fn f_q(j: f64, gamma: f64, d: &Deformation, t: &Truncation) -> Result<SeriesValue> {
    if !gamma.is_finite() {
        return Err(Error::invalid(format!("gamma must be finite, got {gamma}")));
    }
    sum_series(j, d, t, 1.0, |n| j / q_integer(n + 1, d), |n| cis(gamma * d.q_pow2(n as f64)))
}

/// What [`jackson_derivative`] does where the q-difference quotient is 0/0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacksonLimit {
    /// Fail at `q = 1` or `x = 0`.
    #[default]
    Reject,
    /// Fall back to the ordinary derivative, which is the limit of the
    /// quotient at `q -> 1` and at `x -> 0`.
    OrdinaryDerivative,
}

/// The Jackson derivative `D_q f(x) = [f(x) - f(q^2 x)] / [x (1 - q^2)]`.
pub fn jackson_derivative<F>(f: F, x: f64, d: &Deformation, limit: JacksonLimit) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if !x.is_finite() {
        return Err(Error::invalid(format!("x must be finite, got {x}")));
    }
    if !d.is_undeformed() && x != 0.0 {
        return Ok((f(x)? - f(d.q_sq * x)?) / (x * d.one_minus_q_sq));
    }
    match limit {
        JacksonLimit::Reject if d.is_undeformed() => Err(Error::DegenerateDeformation),
        JacksonLimit::Reject => Err(Error::invalid("Jackson derivative at x = 0 needs the ordinary-derivative limit")),
        JacksonLimit::OrdinaryDerivative => ordinary_derivative(&f, x),
    }
}

/// Second-order finite difference; one-sided when `x - h` would leave `x >= 0`.
fn ordinary_derivative<F>(f: &F, x: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let h = f64::EPSILON.cbrt() * x.abs().max(1.0);
    if x >= 0.0 && x - h < 0.0 {
        Ok((f(x)? * -3.0 + f(x + h)? * 4.0 - f(x + 2.0 * h)?) / (2.0 * h))
    } else {
        Ok((f(x + h)? - f(x - h)?) / (2.0 * h))
    }
}
