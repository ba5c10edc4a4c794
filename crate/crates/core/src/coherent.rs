//! Klauder coherent states of the deformed oscillator `H = hbar omega A^dag A`.
//!
//! ```text
//! |J, gamma>_q = E_q(J)^{-1/2} sum_n J^{n/2} e^{-i gamma [n]_q} / sqrt([n]_q!) |n>_q
//! ```
//!
//! The scaled energies are `e_n = [n]_q`, the weights `rho_n = [n]_q!`, and the
//! squared normalization is `E_q(J)`. Time evolution shifts `gamma` by
//! `omega * t`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::PhysicalScales;
use crate::qkernel::{cis, q_exponential, q_exponential_derivative, q_integer, Deformation, SeriesValue, Truncation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentState {
    j: f64,
    gamma: f64,
    deformation: Deformation,
    truncation: Truncation,
}

impl CoherentState {
    /// Validates `J` against the convergence guard of `d` and `gamma` for finiteness.
    pub fn new(j: f64, gamma: f64, deformation: Deformation, truncation: Truncation) -> Result<Self> {
        deformation.check_argument(j)?;
        if !gamma.is_finite() {
            return Err(Error::invalid(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self { j, gamma, deformation, truncation })
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn deformation(&self) -> &Deformation {
        &self.deformation
    }

    pub fn truncation(&self) -> &Truncation {
        &self.truncation
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }

    /// `exp(-iHt/hbar) |J, gamma> = |J, gamma + omega t>`.
    pub fn evolve(&self, delta_t: f64, omega: f64) -> Self {
        self.with_gamma(self.gamma + omega * delta_t)
    }

    /// `N^2(J) = E_q(J)`.
    pub fn normalization(&self) -> Result<SeriesValue> {
        q_exponential(self.j, &self.deformation, &self.truncation)
    }

    /// Number of coefficients materialized: the term count at which the
    /// normalization series met its tail tolerance.
    pub fn truncation_level(&self) -> Result<usize> {
        Ok(self.normalization()?.terms_used)
    }

    /// The expansion coefficient `c_n`.
    pub fn coefficient(&self, n: usize) -> Result<Complex64> {
        let norm = self.normalization()?.value.re;
        let mut weight = 1.0;
        for k in 1..=n {
            weight *= self.j / q_integer(k, &self.deformation);
        }
        Ok(self.phase(n) * (weight / norm).sqrt())
    }

    /// Coefficients `c_0 .. c_{L-1}` with `L` the truncation level.
    pub fn coefficients(&self) -> Result<Vec<Complex64>> {
        let level = self.truncation_level()?;
        self.coefficients_up_to(level)
    }

    /// Coefficients `c_0 .. c_{len-1}`.
    pub fn coefficients_up_to(&self, len: usize) -> Result<Vec<Complex64>> {
        let norm = self.normalization()?.value.re;
        let mut out = Vec::with_capacity(len);
        let mut weight = 1.0 / norm;
        for n in 0..len {
            if n > 0 {
                weight *= self.j / q_integer(n, &self.deformation);
            }
            out.push(self.phase(n) * weight.sqrt());
        }
        Ok(out)
    }

    /// `|c_n|^2` for `n < len`, phase-free.
    pub(crate) fn weights_up_to(&self, len: usize) -> Result<Vec<f64>> {
        let norm = self.normalization()?.value.re;
        let mut out = Vec::with_capacity(len);
        let mut weight = 1.0 / norm;
        for n in 0..len {
            if n > 0 {
                weight *= self.j / q_integer(n, &self.deformation);
            }
            out.push(weight);
        }
        Ok(out)
    }

    fn phase(&self, n: usize) -> Complex64 {
        cis(-self.gamma * q_integer(n, &self.deformation))
    }

    /// `sum_{n < L} |c_n|^2`; differs from 1 by at most the normalization tail over `E_q(J)`.
    pub fn norm_check(&self) -> Result<f64> {
        let level = self.truncation_level()?;
        Ok(self.weights_up_to(level)?.iter().sum())
    }
}

/// `<a|b> = sum_n conj(c_n(a)) c_n(b)` in the standard inner product.
pub fn overlap(a: &CoherentState, b: &CoherentState) -> Result<Complex64> {
    if a.deformation.q() != b.deformation.q() {
        return Err(Error::IncompatibleStates { left: a.deformation.q(), right: b.deformation.q() });
    }
    let len = a.truncation_level()?.max(b.truncation_level()?);
    let ca = a.coefficients_up_to(len)?;
    let cb = b.coefficients_up_to(len)?;
    Ok(ca.iter().zip(&cb).map(|(x, y)| x.conj() * y).sum())
}

/// Mean occupation `n_bar = J E_q'(J) / E_q(J)`, the centre of the wave packet.
pub fn mean_occupation(j: f64, d: &Deformation, t: &Truncation) -> Result<f64> {
    let e = q_exponential(j, d, t)?.value.re;
    let de = q_exponential_derivative(j, d, t)?.value.re;
    Ok(j * de / e)
}

/// `<H> = hbar omega sum_n |c_n|^2 [n]_q`, which equals `hbar omega J`.
pub fn energy_expectation(s: &CoherentState, scales: &PhysicalScales) -> Result<f64> {
    let level = s.truncation_level()?;
    let weights = s.weights_up_to(level + 1)?;
    let mean: f64 = weights.iter().enumerate().map(|(n, w)| w * q_integer(n, s.deformation())).sum();
    Ok(scales.hbar() * scales.omega() * mean)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_point() -> Deformation {
        Deformation::from_tau(0.005).unwrap()
    }

    fn state(j: f64, gamma: f64, d: Deformation) -> CoherentState {
        CoherentState::new(j, gamma, d, Truncation::default()).unwrap()
    }

    #[test]
    fn vacuum_coefficients() {
        let s = state(0.0, 0.8, Deformation::new(0.6).unwrap());
        assert_eq!(s.coefficient(0).unwrap().norm(), 1.0);
        for n in 1..5 {
            assert_eq!(s.coefficient(n).unwrap().norm(), 0.0);
        }
        assert_eq!(s.norm_check().unwrap(), 1.0);
        assert_eq!(energy_expectation(&s, &PhysicalScales::default()).unwrap(), 0.0);
    }

    #[test]
    fn coefficients_real_at_zero_gamma() {
        let s = state(2.0, 0.0, Deformation::new(0.8).unwrap());
        let e = s.normalization().unwrap().value.re;
        for n in 0..10 {
            let c = s.coefficient(n).unwrap();
            assert_eq!(c.im, 0.0);
            let expect = (2f64.powi(n as i32) / crate::qkernel::q_factorial(n, s.deformation()).unwrap() / e).sqrt();
            assert!((c.re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn coefficient_modulus_is_gamma_invariant() {
        let a = state(6.0, 0.0, reference_point());
        let b = a.with_gamma(123.4);
        for n in 0..40 {
            let (x, y) = (a.coefficient(n).unwrap().norm(), b.coefficient(n).unwrap().norm());
            assert!((x - y).abs() <= 1e-15 * x.max(1e-300));
        }
    }

    #[test]
    fn coefficients_vector_matches_single_coefficient() {
        let s = state(6.0, 0.9, reference_point());
        let all = s.coefficients().unwrap();
        for n in [0, 3, 6, 17] {
            assert!((all[n] - s.coefficient(n).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn norm_check_examples() {
        assert!((state(4.0, 0.3, Deformation::undeformed()).norm_check().unwrap() - 1.0).abs() < 1e-12);
        assert!((state(6.0, 0.0, reference_point()).norm_check().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolve_shifts_gamma() {
        let s = state(1.0, 0.0, reference_point());
        assert_eq!(s.evolve(0.0, 1.0).gamma(), 0.0);
        assert_eq!(s.with_gamma(1.5).evolve(2.0, 3.0).gamma(), 7.5);
        let twice = s.evolve(0.25, 2.0).evolve(0.5, 2.0);
        assert_eq!(twice.gamma(), s.evolve(0.75, 2.0).gamma());
    }

    #[test]
    fn evolution_is_termwise_phase() {
        let s = state(3.0, 0.4, Deformation::new(0.9).unwrap());
        let e = s.evolve(1.3, 2.0);
        for n in 0..20 {
            let expect = s.coefficient(n).unwrap() * cis(-2.6 * q_integer(n, s.deformation()));
            assert!((e.coefficient(n).unwrap() - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn overlap_self_and_symmetry() {
        let a = state(6.0, 0.3, reference_point());
        let b = a.with_gamma(2.1);
        assert!((overlap(&a, &a).unwrap() - 1.0).norm() < 1e-12);
        let ab = overlap(&a, &b).unwrap();
        let ba = overlap(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
        assert!(ab.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn overlap_requires_same_deformation() {
        let a = state(1.0, 0.0, Deformation::new(0.5).unwrap());
        let b = state(1.0, 0.0, Deformation::new(0.6).unwrap());
        assert!(matches!(overlap(&a, &b), Err(Error::IncompatibleStates { .. })));
    }

    #[test]
    fn classical_overlap() {
        let (j, g) = (2.5, 0.8);
        let a = state(j, 0.0, Deformation::undeformed());
        let o = overlap(&a, &a.with_gamma(g)).unwrap();
        assert!((o.norm_sqr() - (2.0 * j * (g.cos() - 1.0)).exp()).abs() < 1e-12);
    }

    #[test]
    fn mean_occupation_examples() {
        let t = Truncation::default();
        assert_eq!(mean_occupation(0.0, &reference_point(), &t).unwrap(), 0.0);
        assert!((mean_occupation(3.2, &Deformation::undeformed(), &t).unwrap() - 3.2).abs() < 1e-13);
        let nbar = mean_occupation(6.0, &reference_point(), &t).unwrap();
        assert!((nbar - 6.1875).abs() <= 0.005, "n_bar = {nbar}");
    }

    #[test]
    fn action_angle_identity() {
        let scales = PhysicalScales::default();
        let a = state(6.0, 0.0, reference_point());
        let e0 = energy_expectation(&a, &scales).unwrap();
        let e1 = energy_expectation(&a.with_gamma(3.3), &scales).unwrap();
        assert!((e0 - 6.0).abs() < 1e-10);
        assert_eq!(e0, e1);
        let s2 = PhysicalScales::new(0.5, 2.0, 3.0).unwrap();
        assert!((energy_expectation(&a, &s2).unwrap() - 9.0).abs() < 1e-9);
    }
}
