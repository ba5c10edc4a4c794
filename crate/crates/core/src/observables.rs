//! Closed-form expectation values on `|J, gamma>_q`.
//!
//! The quadratures are `X = alpha (A^dag + A)` and `P = i beta (A^dag - A)`
//! with `alpha = sqrt(1 + q^2) sqrt(hbar / (m omega)) / 2` and
//! `beta = sqrt(1 + q^2) sqrt(hbar m omega) / 2`. They satisfy
//!
//! ```text
//! [X, P] = i hbar + i (q^2 - 1)/(q^2 + 1) (m omega X^2 + P^2 / (m omega))
//! ```
//!
//! Every expectation reduces to ratios `F_q(J, .) / E_q(J)`. X and P are taken
//! as Hermitian and all expectations use the standard inner product.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coherent::CoherentState;
use crate::error::{Error, Result};
use crate::qkernel::{f_q, q_exponential};
use crate::revival::{uniform_grid, Execution, ScanResult, ScanRow};

/// Imaginary parts of quantities that are real by symmetry must stay below
/// this fraction of their natural scale.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-12;

/// Relative agreement required between the closed-form uncertainty product
/// and the variance route.
pub const CLOSED_FORM_TOL: f64 = 1e-10;

/// Default finite-difference time step for the Ehrenfest check, in units of `1 / omega`.
pub const DEFAULT_EHRENFEST_STEP: f64 = 1e-4;

/// `hbar`, `m` and `omega`, all strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalScales {
    hbar: f64,
    mass: f64,
    omega: f64,
}

impl PhysicalScales {
    pub fn new(hbar: f64, mass: f64, omega: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("omega", omega)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { hbar, mass, omega })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

impl Default for PhysicalScales {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0, omega: 1.0 }
    }
}

/// The quadrature coefficients `alpha` and `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureCoeffs {
    pub alpha: f64,
    pub beta: f64,
}

impl QuadratureCoeffs {
    pub fn new(scales: &PhysicalScales, q_sq: f64) -> Self {
        let half = 0.5 * (1.0 + q_sq).sqrt();
        let mw = scales.mass * scales.omega;
        Self { alpha: half * (scales.hbar / mw).sqrt(), beta: half * (scales.hbar * mw).sqrt() }
    }

    fn of(s: &CoherentState, scales: &PhysicalScales) -> Self {
        Self::new(scales, s.deformation().q_sq())
    }
}

/// Which quadrature an Ehrenfest check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    X,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    pub dx: f64,
    pub dp: f64,
    /// `dx * dp`.
    pub product: f64,
    /// Half the modulus of the commutator expectation.
    pub bound: f64,
    /// `product / bound`; at least 1 for every admissible state.
    pub ratio: f64,
    pub gc: f64,
    /// Real sine amplitude; see [`g_functions`].
    pub gs: f64,
    pub gq: f64,
}

/// How the sine function enters the closed-form uncertainty product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SineConvention {
    /// `gs` real, entering `dp^2` as `- gs^2`. Matches the variance route.
    #[default]
    Real,
    /// `G_s = i gs`, so `G_s^2 = -gs^2`. Disagrees with the variance route
    /// whenever `gs != 0`; kept so that the consistency check can be exercised.
    Imaginary,
}

/// `E_q(J)` and `F_q(J, gamma)` for the state, the ingredients of most
/// closed forms.
struct Ratios<'a> {
    s: &'a CoherentState,
    norm: f64,
}

impl<'a> Ratios<'a> {
    fn new(s: &'a CoherentState) -> Result<Self> {
        Ok(Self { s, norm: s.normalization()?.value.re })
    }

    /// `F_q(J', gamma') / E_q(J)`.
    fn f(&self, j: f64, gamma: f64) -> Result<Complex64> {
        Ok(f_q(j, gamma, self.s.deformation(), self.s.truncation())?.value / self.norm)
    }

    fn f_at(&self, gamma: f64) -> Result<Complex64> {
        self.f(self.s.j(), gamma)
    }
}

fn real_part(z: Complex64, scale: f64, label: &str) -> Result<f64> {
    let allowed = IMAGINARY_RESIDUE_TOL * (z.re.abs() + scale.abs()).max(f64::MIN_POSITIVE);
    if z.im.abs() > allowed {
        return Err(Error::inconsistent(format!("imaginary residue of {label}"), z.im, allowed));
    }
    Ok(z.re)
}

/// `<A> = sqrt(J) F_q(J, -gamma) / E_q(J)`.
pub fn expect_a(s: &CoherentState) -> Result<Complex64> {
    let r = Ratios::new(s)?;
    Ok(r.f_at(-s.gamma())? * s.j().sqrt())
}

/// `<A^dag> = sqrt(J) F_q(J, gamma) / E_q(J)`.
pub fn expect_a_dagger(s: &CoherentState) -> Result<Complex64> {
    let r = Ratios::new(s)?;
    Ok(r.f_at(s.gamma())? * s.j().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bilinears {
    pub adag_adag: Complex64,
    pub a_a: Complex64,
    pub adag_a: Complex64,
    pub a_adag: Complex64,
}

/// `<A^dag A^dag>`, `<A A>`, `<A^dag A>` and `<A A^dag>`.
pub fn expect_bilinears(s: &CoherentState) -> Result<Bilinears> {
    let r = Ratios::new(s)?;
    let (j, q_sq, g) = (s.j(), s.deformation().q_sq(), s.gamma());
    Ok(Bilinears {
        adag_adag: r.f_at(g * (1.0 + q_sq))? * j,
        a_a: r.f_at(-g * (1.0 + q_sq))? * j,
        adag_a: Complex64::new(j, 0.0),
        a_adag: Complex64::new(1.0 + q_sq * j, 0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trilinears {
    pub adag_adag_a: Complex64,
    pub adag_a_adag: Complex64,
    pub adag_a_a: Complex64,
    pub a_adag_a: Complex64,
}

/// `<A^dag A^dag A>`, `<A^dag A A^dag>`, `<A^dag A A>` and `<A A^dag A>`.
pub fn expect_trilinears(s: &CoherentState) -> Result<Trilinears> {
    let r = Ratios::new(s)?;
    let (j, q_sq, g) = (s.j(), s.deformation().q_sq(), s.gamma());
    let sqrt_j = j.sqrt();
    let j32 = j * sqrt_j;
    let f_plus = r.f_at(g)?;
    let f_minus = r.f_at(-g)?;
    let f_q_plus = r.f_at(q_sq * g)?;
    let f_q_minus = r.f_at(-q_sq * g)?;
    Ok(Trilinears {
        adag_adag_a: f_q_plus * j32,
        adag_a_adag: f_plus * sqrt_j + f_q_plus * (q_sq * j32),
        adag_a_a: f_q_minus * j32,
        a_adag_a: f_minus * sqrt_j + f_q_minus * (q_sq * j32),
    })
}

/// `<X> = alpha sqrt(J) [F_q(J, gamma) + F_q(J, -gamma)] / E_q(J)`.
pub fn expect_x(s: &CoherentState, scales: &PhysicalScales) -> Result<f64> {
    let c = QuadratureCoeffs::of(s, scales);
    let r = Ratios::new(s)?;
    let z = (r.f_at(s.gamma())? + r.f_at(-s.gamma())?) * (c.alpha * s.j().sqrt());
    real_part(z, c.alpha * s.j().sqrt(), "<X>")
}

/// `<P> = i beta sqrt(J) [F_q(J, gamma) - F_q(J, -gamma)] / E_q(J)`.
pub fn expect_p(s: &CoherentState, scales: &PhysicalScales) -> Result<f64> {
    let c = QuadratureCoeffs::of(s, scales);
    let r = Ratios::new(s)?;
    let z = (r.f_at(s.gamma())? - r.f_at(-s.gamma())?) * Complex64::new(0.0, c.beta * s.j().sqrt());
    real_part(z, c.beta * s.j().sqrt(), "<P>")
}

/// The shared bracket pieces of `<X^2>` and `<P^2>`:
/// `J [F_q(J, gamma(1+q^2)) + F_q(J, -gamma(1+q^2))] / E_q(J)` and `1 + (1+q^2) J`.
fn second_moment_parts(s: &CoherentState) -> Result<(Complex64, f64)> {
    let r = Ratios::new(s)?;
    let (j, q_sq, g) = (s.j(), s.deformation().q_sq(), s.gamma());
    let shift = g * (1.0 + q_sq);
    let oscillating = (r.f_at(shift)? + r.f_at(-shift)?) * j;
    Ok((oscillating, 1.0 + (1.0 + q_sq) * j))
}

pub fn expect_x2(s: &CoherentState, scales: &PhysicalScales) -> Result<f64> {
    let c = QuadratureCoeffs::of(s, scales);
    let (osc, constant) = second_moment_parts(s)?;
    let a2 = c.alpha * c.alpha;
    real_part((osc + constant) * a2, a2 * constant, "<X^2>")
}

pub fn expect_p2(s: &CoherentState, scales: &PhysicalScales) -> Result<f64> {
    let c = QuadratureCoeffs::of(s, scales);
    let (osc, constant) = second_moment_parts(s)?;
    let b2 = c.beta * c.beta;
    real_part((osc - constant) * -b2, b2 * constant, "<P^2>")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFunctions {
    /// `G_c(gamma)`.
    pub gc: f64,
    /// Real sine amplitude `(2 sqrt(J)/E_q) sum J^n sin(gamma q^{2n}) / [n]_q!`.
    pub gs: f64,
    /// `G_q = sqrt(J) G_c(gamma (1 + q^2))`.
    pub gq: f64,
}

/// The cosine/sine amplitudes entering the uncertainty product.
///
/// `<X> = alpha gc` and `<P> = -beta gs`.
pub fn g_functions(s: &CoherentState) -> Result<GFunctions> {
    let r = Ratios::new(s)?;
    let (j, q_sq, g) = (s.j(), s.deformation().q_sq(), s.gamma());
    let f = r.f_at(g)?;
    let two_sqrt_j = 2.0 * j.sqrt();
    let gc_shift = two_sqrt_j * r.f_at(g * (1.0 + q_sq))?.re;
    Ok(GFunctions { gc: two_sqrt_j * f.re, gs: two_sqrt_j * f.im, gq: j.sqrt() * gc_shift })
}

/// `(hbar / 4)(1 + q^2)[1 + (q^2 - 1) J]`, independent of `gamma`.
pub fn uncertainty_bound(s: &CoherentState, scales: &PhysicalScales) -> f64 {
    let q_sq = s.deformation().q_sq();
    0.25 * scales.hbar * (1.0 + q_sq) * (1.0 - s.deformation().one_minus_q_sq() * s.j())
}

/// `(1/2) |<[X, P]>|` assembled from `<X^2>` and `<P^2>`.
pub fn commutator_expectation(s: &CoherentState, scales: &PhysicalScales) -> Result<f64> {
    let q_sq = s.deformation().q_sq();
    let mw = scales.mass * scales.omega;
    let x2 = expect_x2(s, scales)?;
    let p2 = expect_p2(s, scales)?;
    let deform = (q_sq - 1.0) / (q_sq + 1.0);
    let commutator = Complex64::new(0.0, scales.hbar + deform * (mw * x2 + p2 / mw));
    Ok(0.5 * commutator.norm())
}

pub fn uncertainty(s: &CoherentState, scales: &PhysicalScales) -> Result<UncertaintyReport> {
    uncertainty_with_convention(s, scales, SineConvention::Real)
}

/// Variances are the definition; the closed-form product built from the
/// g-functions under `convention` is checked against them.
pub fn uncertainty_with_convention(
    s: &CoherentState,
    scales: &PhysicalScales,
    convention: SineConvention,
) -> Result<UncertaintyReport> {
    let c = QuadratureCoeffs::of(s, scales);
    let x = expect_x(s, scales)?;
    let p = expect_p(s, scales)?;
    let dx2 = expect_x2(s, scales)? - x * x;
    let dp2 = expect_p2(s, scales)? - p * p;
    let g = g_functions(s)?;

    let base = 1.0 + (1.0 + s.deformation().q_sq()) * s.j();
    let gs_sq = match convention {
        SineConvention::Real => g.gs * g.gs,
        SineConvention::Imaginary => -g.gs * g.gs,
    };
    let closed = (c.alpha * c.beta).powi(2) * (base + g.gq - g.gc * g.gc) * (base - g.gq - gs_sq);
    let variance = dx2 * dp2;
    let scale = variance.abs().max(closed.abs()).max((c.alpha * c.beta).powi(2) * f64::EPSILON);
    if (closed - variance).abs() > CLOSED_FORM_TOL * scale {
        return Err(Error::inconsistent("closed-form vs variance uncertainty product", closed, variance));
    }

    let dx = dx2.max(0.0).sqrt();
    let dp = dp2.max(0.0).sqrt();
    let product = dx * dp;
    let bound = uncertainty_bound(s, scales);
    Ok(UncertaintyReport { dx, dp, product, bound, ratio: product / bound, gc: g.gc, gs: g.gs, gq: g.gq })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhrenfestResidual {
    /// `|E1 - E2|` between the two closed forms.
    pub closed: f64,
    /// `|i hbar d<O>/dt (central difference) - E2|`.
    pub finite_difference: f64,
    /// Natural size of `<[O, H]>`: `2 hbar omega c sqrt(J) (1 + J)` with `c` the quadrature coefficient.
    pub scale: f64,
    /// `i hbar d<O>/dt` from the gamma-derivative identity of `F_q`.
    pub time_derivative: Complex64,
    /// `<[O, H]>` as a sum over the two signed branches `s = +/- omega t`.
    pub commutator: Complex64,
}

/// Compares `i hbar d<O>/dt` with `<[O, H]>` at `omega t = gamma` of the state.
///
/// The time derivative is available in closed form through the
/// gamma-derivative identity of `F_q`; `<[O, H]>` follows from the
/// trilinear expectations. Both are also compared with a central difference
/// of `<O>` with time step `h`.
pub fn ehrenfest_residual(
    s: &CoherentState,
    scales: &PhysicalScales,
    which: Quadrature,
    h: f64,
) -> Result<EhrenfestResidual> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::invalid(format!("finite-difference step must be > 0, got {h}")));
    }
    let d = s.deformation();
    let t = s.truncation();
    let c = QuadratureCoeffs::of(s, scales);
    let (j, q_sq, wt) = (s.j(), d.q_sq(), s.gamma());
    let (hbar, omega) = (scales.hbar, scales.omega);
    let norm = q_exponential(j, d, t)?.value.re;
    let f = |jj: f64, g: f64| -> Result<Complex64> { Ok(f_q(jj, g, d, t)?.value / norm) };
    let sqrt_j = j.sqrt();

    // s = +wt and s = -wt; the X sum weights each branch by sign(s)
    let branch =
        |sign: f64| -> Result<Complex64> { Ok(f(j, sign * wt)? + f(j, q_sq * sign * wt)? * (j * (q_sq - 1.0))) };
    let (e1, e2, coeff) = match which {
        Quadrature::X => {
            let e1 = (f(q_sq * j, wt)? - f(q_sq * j, -wt)?) * (-omega * hbar * c.alpha * sqrt_j);
            let e2 = (branch(1.0)? - branch(-1.0)?) * (-omega * hbar * c.alpha * sqrt_j);
            (e1, e2, c.alpha)
        }
        Quadrature::P => {
            let pref = Complex64::new(0.0, -omega * hbar * c.beta * sqrt_j);
            let e1 = (f(q_sq * j, wt)? + f(q_sq * j, -wt)?) * pref;
            let e2 = (branch(1.0)? + branch(-1.0)?) * pref;
            (e1, e2, c.beta)
        }
    };

    let observe = |state: &CoherentState| match which {
        Quadrature::X => expect_x(state, scales),
        Quadrature::P => expect_p(state, scales),
    };
    let forward = observe(&s.evolve(h, omega))?;
    let backward = observe(&s.evolve(-h, omega))?;
    let fd = Complex64::new(0.0, hbar * (forward - backward) / (2.0 * h));

    Ok(EhrenfestResidual {
        closed: (e1 - e2).norm(),
        finite_difference: (fd - e2).norm(),
        scale: 2.0 * hbar * omega * coeff * sqrt_j * (1.0 + j),
        time_derivative: e1,
        commutator: e2,
    })
}

/// `<[X, H]>` or `<[P, H]>` assembled from the trilinear expectations:
/// `[X, H] = hbar omega alpha (A^dag A^dag A - A^dag A A^dag + A A^dag A - A^dag A A)` and
/// `[P, H] = i hbar omega beta (A^dag A^dag A - A^dag A A^dag - A A^dag A + A^dag A A)`.
pub fn commutator_with_hamiltonian(s: &CoherentState, scales: &PhysicalScales, which: Quadrature) -> Result<Complex64> {
    let c = QuadratureCoeffs::of(s, scales);
    let t = expect_trilinears(s)?;
    let hw = scales.hbar * scales.omega;
    Ok(match which {
        Quadrature::X => (t.adag_adag_a - t.adag_a_adag + t.a_adag_a - t.adag_a_a) * (hw * c.alpha),
        Quadrature::P => (t.adag_adag_a - t.adag_a_adag - t.a_adag_a + t.adag_a_a) * Complex64::new(0.0, hw * c.beta),
    })
}

/// Uncertainty sweep over `t` for the state `|J, gamma0 + omega t>`.
///
/// Columns: `gamma, dX, dP, product, bound, ratio`.
pub fn uncertainty_scan(
    s: &CoherentState,
    scales: &PhysicalScales,
    t_min: f64,
    t_max: f64,
    steps: usize,
    execution: Execution,
) -> Result<ScanResult> {
    let times = uniform_grid(t_min, t_max, steps)?;
    let row = |&t: &f64| -> Result<ScanRow> {
        let state = s.evolve(t, scales.omega);
        let r = uncertainty(&state, scales)?;
        Ok(ScanRow { t, values: vec![state.gamma(), r.dx, r.dp, r.product, r.bound, r.ratio] })
    };
    let rows: Result<Vec<ScanRow>> = match execution {
        Execution::Serial => times.iter().map(row).collect(),
        Execution::Parallel => times.par_iter().map(row).collect(),
    };
    ScanResult::new(["gamma", "dX", "dP", "product", "bound", "ratio"], rows?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::{Deformation, Truncation};

    fn state(q: f64, j: f64, gamma: f64) -> CoherentState {
        CoherentState::new(j, gamma, Deformation::new(q).unwrap(), Truncation::default()).unwrap()
    }

    #[test]
    fn scales_validation() {
        assert!(PhysicalScales::new(0.0, 1.0, 1.0).is_err());
        assert!(PhysicalScales::new(1.0, -1.0, 1.0).is_err());
        assert!(PhysicalScales::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn quadrature_coefficients() {
        let scales = PhysicalScales::new(1.3, 0.7, 2.2).unwrap();
        let c = QuadratureCoeffs::new(&scales, 0.81);
        assert!((c.alpha * c.beta - 1.3 / 4.0 * 1.81).abs() < 1e-15);
    }

    #[test]
    fn ladder_expectations_at_zero_gamma() {
        let s = state(0.8, 2.0, 0.0);
        assert!((expect_a(&s).unwrap() - 2f64.sqrt()).norm() < 1e-14);
        let z = expect_a_dagger(&state(0.8, 0.0, 0.4)).unwrap();
        assert_eq!(z.norm(), 0.0);
        let b = expect_bilinears(&s).unwrap();
        assert!((b.adag_adag - 2.0).norm() < 1e-14);
        let t = expect_trilinears(&s).unwrap();
        assert!((t.adag_adag_a - 2f64.powf(1.5)).norm() < 1e-13);
        assert!((t.adag_a_adag - 2f64.sqrt() * (1.0 + 0.64 * 2.0)).norm() < 1e-13);
    }

    #[test]
    fn conjugate_pairs() {
        let s = state(0.9, 2.0, 0.7);
        assert!((expect_a(&s).unwrap().conj() - expect_a_dagger(&s).unwrap()).norm() < 1e-14);
        let b = expect_bilinears(&s).unwrap();
        assert!((b.a_a.conj() - b.adag_adag).norm() < 1e-14);
        assert!((b.a_adag - b.adag_a * s.deformation().q_sq() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn quadratures_at_zero_gamma_and_vacuum() {
        let scales = PhysicalScales::default();
        let s = state(0.95, 3.0, 0.0);
        let c = QuadratureCoeffs::new(&scales, s.deformation().q_sq());
        assert!((expect_x(&s, &scales).unwrap() - 2.0 * c.alpha * 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(expect_p(&s, &scales).unwrap(), 0.0);
        let q_sq = s.deformation().q_sq();
        let x2 = c.alpha.powi(2) * (1.0 + (1.0 + q_sq) * 3.0 + 6.0);
        let p2 = c.beta.powi(2) * (1.0 + (1.0 + q_sq) * 3.0 - 6.0);
        assert!((expect_x2(&s, &scales).unwrap() - x2).abs() < 1e-13);
        assert!((expect_p2(&s, &scales).unwrap() - p2).abs() < 1e-13);
        let vac = state(0.95, 0.0, 1.0);
        assert_eq!(expect_x(&vac, &scales).unwrap(), 0.0);
        assert_eq!(expect_p(&vac, &scales).unwrap(), 0.0);
    }

    #[test]
    fn g_function_limits() {
        let g = g_functions(&state(0.8, 1.5, 0.0)).unwrap();
        assert!((g.gc - 2.0 * 1.5f64.sqrt()).abs() < 1e-14);
        assert_eq!(g.gs, 0.0);
        assert!((g.gq - 3.0).abs() < 1e-14);
    }

    #[test]
    fn saturation_at_zero_gamma() {
        let scales = PhysicalScales::default();
        for (q, j) in [(0.5, 1.0), (0.95, 6.0), ((-0.005f64).exp(), 6.0)] {
            let r = uncertainty(&state(q, j, 0.0), &scales).unwrap();
            assert!((r.ratio - 1.0).abs() < 1e-9, "q={q} J={j} ratio={}", r.ratio);
        }
    }

    #[test]
    fn undeformed_coherent_state_is_minimal_for_all_gamma() {
        let scales = PhysicalScales::new(2.0, 1.0, 1.0).unwrap();
        for g in [0.0, 0.4, 1.7, 5.0] {
            let r = uncertainty(&state(1.0, 2.5, g), &scales).unwrap();
            assert!((r.product - 1.0).abs() < 1e-10, "gamma={g}");
            assert!((r.ratio - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn imaginary_sine_convention_is_caught() {
        let s = state((-0.005f64).exp(), 6.0, 1.0);
        let err = uncertainty_with_convention(&s, &PhysicalScales::default(), SineConvention::Imaginary);
        assert!(matches!(err, Err(Error::InternalConsistency { .. })));
    }

    #[test]
    fn commutator_examples() {
        let scales = PhysicalScales::new(1.5, 1.0, 1.0).unwrap();
        let q_sq = 0.64;
        let vac = state(0.8, 0.0, 0.0);
        assert!((commutator_expectation(&vac, &scales).unwrap() - 1.5 / 4.0 * (1.0 + q_sq)).abs() < 1e-14);
        assert!((commutator_expectation(&state(1.0, 3.0, 0.9), &scales).unwrap() - 0.75).abs() < 1e-12);
        let a = commutator_expectation(&state(0.8, 1.2, 0.3), &scales).unwrap();
        let b = commutator_expectation(&state(0.8, 1.2, 2.9), &scales).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!((a - uncertainty_bound(&state(0.8, 1.2, 0.3), &scales)).abs() < 1e-12);
    }

    #[test]
    fn ehrenfest_at_symmetric_point() {
        let scales = PhysicalScales::default();
        let r = ehrenfest_residual(&state(0.9, 2.0, 0.0), &scales, Quadrature::X, 1e-4).unwrap();
        assert!(r.closed < 1e-14 && r.finite_difference < 1e-10);
    }

    #[test]
    fn ehrenfest_closed_forms_agree() {
        let scales = PhysicalScales::default();
        let s = state(0.9, 2.0, 0.7);
        for which in [Quadrature::X, Quadrature::P] {
            let r = ehrenfest_residual(&s, &scales, which, DEFAULT_EHRENFEST_STEP).unwrap();
            assert!(r.closed <= 1e-10 * r.scale, "{which:?}: {r:?}");
            assert!(r.finite_difference <= 1e-6 * r.scale, "{which:?}: {r:?}");
            let direct = commutator_with_hamiltonian(&s, &scales, which).unwrap();
            assert!((direct - r.commutator).norm() <= 1e-12 * r.scale, "{which:?}");
        }
        assert!(ehrenfest_residual(&s, &scales, Quadrature::X, 0.0).is_err());
    }
}
