//! Invariant suite run by `qklauder verify`.
//!
//! Each check evaluates one property over the standard `(q, J, gamma)` grid
//! and reports pass or fail with the worst value it saw. Grid points outside
//! the convergence guard are skipped by every check except
//! `qkernel.divergence_guard`, which asserts that they are rejected.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::coherent::{energy_expectation, overlap, CoherentState};
use crate::error::{Error, Result};
use crate::fockoracle::{oracle_expectation, Ladder};
use crate::observables::{
    commutator_expectation, ehrenfest_residual, expect_a, expect_a_dagger, expect_bilinears, expect_trilinears,
    g_functions, uncertainty, uncertainty_with_convention, PhysicalScales, Quadrature, SineConvention,
};
use crate::qkernel::{f_q, jackson_derivative, q_exponential, q_integer, Deformation, JacksonLimit, Truncation};
use crate::revival::{autocorrelation, revival_times};

/// Deformations of the standard grid; the last one is `e^{-0.005}`.
pub fn standard_q_grid() -> Vec<Deformation> {
    let mut grid: Vec<Deformation> = [0.5, 0.8, 0.95].iter().map(|&q| Deformation::new(q).unwrap()).collect();
    grid.push(Deformation::from_tau(0.005).unwrap());
    grid
}

/// Actions of the standard grid for `d`, including `0.45 * radius`.
pub fn standard_j_grid(d: &Deformation) -> Vec<f64> {
    vec![0.1, 1.0, 6.0, 0.9 * d.radius() * 0.5]
}

/// `steps` equally spaced angles on `[0, 4 pi]`.
pub fn gamma_grid(steps: usize) -> Vec<f64> {
    (0..steps).map(|k| 4.0 * PI * k as f64 / (steps - 1) as f64).collect()
}

/// A deliberately wrong variant of the computation, used to show that the
/// suite catches it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Use `G_s = i g_s` in the closed-form uncertainty product.
    ImaginarySine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {:<42} {}", self.name, self.detail)
    }
}

/// Residual and allowed tolerance of one numerical identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub residual: f64,
    pub tolerance: f64,
}

impl IdentityResidual {
    pub fn holds(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// `-i dF_q/dgamma = F_q(q^2 J, gamma)`, with the derivative by central
/// difference of step `h`. Tolerance: `h^2 E_q(J) / 6` for the truncation
/// error (the third gamma-derivative is bounded by `E_q`) plus the series
/// and rounding error amplified by `1 / h`.
pub fn gamma_derivative_identity(
    j: f64,
    gamma: f64,
    d: &Deformation,
    t: &Truncation,
    h: f64,
) -> Result<IdentityResidual> {
    let e = q_exponential(j, d, t)?;
    let plus = f_q(j, gamma + h, d, t)?;
    let minus = f_q(j, gamma - h, d, t)?;
    let shifted = f_q(d.q_sq() * j, gamma, d, t)?;
    let derivative = (plus.value - minus.value) / (2.0 * h);
    let residual = (derivative - Complex64::i() * shifted.value).norm();
    let noise = plus.tail_bound + minus.tail_bound + 8.0 * f64::EPSILON * e.value.re;
    let tolerance = h * h * e.value.re / 6.0 + noise / (2.0 * h) + shifted.tail_bound + 8.0 * f64::EPSILON * e.value.re;
    Ok(IdentityResidual { residual, tolerance })
}

/// `D_q F_q(., gamma)(J) = F_q(J, q^2 gamma)`.
pub fn jackson_identity(j: f64, gamma: f64, d: &Deformation, t: &Truncation) -> Result<IdentityResidual> {
    let lhs = jackson_derivative(|x| Ok(f_q(x, gamma, d, t)?.value), j, d, JacksonLimit::Reject)?;
    let rhs = f_q(j, d.q_sq() * gamma, d, t)?;
    Ok(IdentityResidual { residual: (lhs - rhs.value).norm(), tolerance: jackson_tolerance(j, d, t)? })
}

/// `D_q E_q = E_q`.
pub fn jackson_fixes_exponential(j: f64, d: &Deformation, t: &Truncation) -> Result<IdentityResidual> {
    let lhs = jackson_derivative(|x| Ok(q_exponential(x, d, t)?.value), j, d, JacksonLimit::Reject)?;
    let rhs = q_exponential(j, d, t)?.value;
    Ok(IdentityResidual { residual: (lhs - rhs).norm(), tolerance: jackson_tolerance(j, d, t)? })
}

/// Two series tails plus rounding of the difference, divided by `J (1 - q^2)`,
/// plus the tail and rounding of the right-hand side.
fn jackson_tolerance(j: f64, d: &Deformation, t: &Truncation) -> Result<f64> {
    let e = q_exponential(j, d, t)?;
    let e_shift = q_exponential(d.q_sq() * j, d, t)?;
    let difference_noise = e.tail_bound + e_shift.tail_bound + 8.0 * f64::EPSILON * (e.value.re + e_shift.value.re);
    Ok(difference_noise / (j * d.one_minus_q_sq()) + e.tail_bound + 8.0 * f64::EPSILON * e.value.re)
}

/// Every nine-word expectation next to its closed form.
pub fn closed_form_words(s: &CoherentState) -> Result<Vec<(&'static str, Vec<Ladder>, Complex64)>> {
    use Ladder::{Lower, Raise};
    let b = expect_bilinears(s)?;
    let t = expect_trilinears(s)?;
    Ok(vec![
        ("<A>", vec![Lower], expect_a(s)?),
        ("<A+>", vec![Raise], expect_a_dagger(s)?),
        ("<A+A+>", vec![Raise, Raise], b.adag_adag),
        ("<AA>", vec![Lower, Lower], b.a_a),
        ("<A+A>", vec![Raise, Lower], b.adag_a),
        ("<AA+>", vec![Lower, Raise], b.a_adag),
        ("<A+A+A>", vec![Raise, Raise, Lower], t.adag_adag_a),
        ("<A+AA+>", vec![Raise, Lower, Raise], t.adag_a_adag),
        ("<A+AA>", vec![Raise, Lower, Lower], t.adag_a_a),
        ("<AA+A>", vec![Lower, Raise, Lower], t.a_adag_a),
    ])
}

/// Worst relative deviation between closed forms and the truncated-matrix oracle.
pub fn oracle_deviation(s: &CoherentState) -> Result<(f64, &'static str)> {
    let mut worst = (0.0, "");
    for (label, word, closed) in closed_form_words(s)? {
        let oracle = oracle_expectation(s, &word, None)?;
        let scale = closed.norm().max(oracle.norm()).max(f64::MIN_POSITIVE);
        let dev = (closed - oracle).norm() / scale;
        if dev > worst.0 {
            worst = (dev, label);
        }
    }
    Ok(worst)
}

/// Observed order of the Ehrenfest finite-difference residual under step halving.
pub fn ehrenfest_order(s: &CoherentState, scales: &PhysicalScales, which: Quadrature, h: f64) -> Result<f64> {
    let coarse = ehrenfest_residual(s, scales, which, h)?.finite_difference;
    let fine = ehrenfest_residual(s, scales, which, h / 2.0)?.finite_difference;
    Ok((coarse / fine).log2())
}

/// Grid state constructor that filters out-of-guard points.
fn grid_states(extra: Option<(Deformation, f64)>) -> Vec<(Deformation, f64)> {
    let mut points = Vec::new();
    for d in standard_q_grid() {
        for j in standard_j_grid(&d) {
            if d.check_argument(j).is_ok() {
                points.push((d, j));
            }
        }
    }
    if let Some((d, j)) = extra {
        if d.check_argument(j).is_ok() && !points.contains(&(d, j)) {
            points.push((d, j));
        }
    }
    points
}

struct Tracker {
    name: &'static str,
    worst: f64,
    at: String,
    failure: Option<String>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self { name, worst: 0.0, at: String::new(), failure: None }
    }

    /// Records `value` (bigger is worse) and fails the check if `!ok`.
    fn record(&mut self, value: f64, ok: bool, at: impl FnOnce() -> String) {
        let here = at();
        if !ok && self.failure.is_none() {
            self.failure = Some(format!("violated at {here} (value {value:e})"));
        }
        if value > self.worst || self.at.is_empty() {
            self.worst = self.worst.max(value);
            self.at = here;
        }
    }

    fn error(&mut self, err: Error, at: String) {
        if self.failure.is_none() {
            self.failure = Some(format!("{err} at {at}"));
        }
    }

    fn finish(self) -> CheckOutcome {
        match self.failure {
            Some(detail) => CheckOutcome { name: self.name, passed: false, detail },
            None => CheckOutcome {
                name: self.name,
                passed: true,
                detail: format!("worst {:.3e} at {}", self.worst, self.at),
            },
        }
    }
}

fn label(d: &Deformation, j: f64, gamma: f64) -> String {
    format!("q={:.6} J={:.4} gamma={:.4}", d.q(), j, gamma)
}

/// Runs the full invariant suite. `extra` adds one `(q, J)` point to the grid.
pub fn run_suite(
    extra: Option<(Deformation, f64)>,
    scales: &PhysicalScales,
    t: &Truncation,
    fault: Option<Fault>,
) -> Vec<CheckOutcome> {
    let points = grid_states(extra);
    let gammas = gamma_grid(64);
    let sparse_gammas = [0.3, 0.7, 2.0, 5.0];
    let state = |d: Deformation, j: f64, g: f64| CoherentState::new(j, g, d, *t);
    let mut out = Vec::new();

    let mut c = Tracker::new("qkernel.q_integer_recursion");
    for d in standard_q_grid().into_iter().chain([Deformation::undeformed()]) {
        for n in 0..t.n_max() {
            let next = q_integer(n + 1, &d);
            let dev = (next - 1.0 - d.q_sq() * q_integer(n, &d)).abs() / next.max(1.0);
            c.record(dev / f64::EPSILON, dev <= 8.0 * f64::EPSILON, || format!("q={} n={n} (ulps)", d.q()));
        }
    }
    out.push(c.finish());

    let mut c = Tracker::new("qkernel.divergence_guard");
    for d in standard_q_grid() {
        for j in standard_j_grid(&d).into_iter().chain([d.guard(), d.radius()]) {
            let res = q_exponential(j, &d, t);
            let rejected = matches!(res, Err(Error::Divergence { .. }));
            c.record(0.0, rejected == (j >= d.guard()), || format!("q={} J={j}", d.q()));
        }
    }
    out.push(c.finish());

    let mut c = Tracker::new("qkernel.gamma_derivative_identity");
    let mut c2 = Tracker::new("qkernel.jackson_identity");
    let mut c3 = Tracker::new("qkernel.jackson_fixes_exponential");
    for &(d, j) in &points {
        for &g in &sparse_gammas {
            match gamma_derivative_identity(j, g, &d, t, 1e-4) {
                Ok(r) => c.record(r.residual / r.tolerance, r.holds(), || label(&d, j, g)),
                Err(e) => c.error(e, label(&d, j, g)),
            }
            match jackson_identity(j, g, &d, t) {
                Ok(r) => c2.record(r.residual / r.tolerance, r.holds(), || label(&d, j, g)),
                Err(e) => c2.error(e, label(&d, j, g)),
            }
        }
        match jackson_fixes_exponential(j, &d, t) {
            Ok(r) => c3.record(r.residual / r.tolerance, r.holds(), || label(&d, j, 0.0)),
            Err(e) => c3.error(e, label(&d, j, 0.0)),
        }
    }
    out.extend([c.finish(), c2.finish(), c3.finish()]);

    let mut c = Tracker::new("coherent.normalization");
    let mut c2 = Tracker::new("coherent.action_angle");
    let mut c3 = Tracker::new("coherent.overlap_modulus_identity");
    for &(d, j) in &points {
        for &g in &sparse_gammas {
            let run = || -> Result<(f64, f64, f64)> {
                let s = state(d, j, g)?;
                let norm = (s.norm_check()? - 1.0).abs();
                let energy = (energy_expectation(&s, scales)? / (scales.hbar() * scales.omega()) - j).abs();
                let base = s.with_gamma(0.0);
                let direct = overlap(&base, &s)?.norm();
                let e = q_exponential(j, &d, t)?.value.re;
                let via_f = f_q(j, g / d.one_minus_q_sq(), &d, t)?.value.norm() / e;
                Ok((norm, energy, (direct - via_f).abs()))
            };
            match run() {
                Ok((n, e, o)) => {
                    c.record(n, n <= 1e-12, || label(&d, j, g));
                    c2.record(e, e <= 1e-10 * j.max(1.0), || label(&d, j, g));
                    c3.record(o, o <= 1e-10, || label(&d, j, g));
                }
                Err(e) => c.error(e, label(&d, j, g)),
            }
        }
    }
    out.extend([c.finish(), c2.finish(), c3.finish()]);

    let mut sat = Tracker::new("observables.saturation");
    let mut ineq = Tracker::new("observables.inequality");
    let mut closed = Tracker::new("observables.closed_form_vs_variance");
    let mut constancy = Tracker::new("observables.bound_gamma_constancy");
    let mut gbounds = Tracker::new("observables.g_bounds");
    let convention = match fault {
        Some(Fault::ImaginarySine) => SineConvention::Imaginary,
        None => SineConvention::Real,
    };
    for &(d, j) in &points {
        let mut bounds = Vec::new();
        for &g in &gammas {
            let s = match state(d, j, g) {
                Ok(s) => s,
                Err(e) => {
                    ineq.error(e, label(&d, j, g));
                    continue;
                }
            };
            match uncertainty_with_convention(&s, scales, convention) {
                Ok(_) => closed.record(0.0, true, || label(&d, j, g)),
                Err(e) => closed.error(e, label(&d, j, g)),
            }
            match uncertainty(&s, scales) {
                Ok(r) => {
                    ineq.record(1.0 - r.ratio, r.ratio >= 1.0 - 1e-9, || label(&d, j, g));
                    if g == 0.0 {
                        let dev = (r.ratio - 1.0).abs();
                        sat.record(dev, dev <= 1e-9, || label(&d, j, g));
                    }
                }
                Err(e) => ineq.error(e, label(&d, j, g)),
            }
            match commutator_expectation(&s, scales) {
                Ok(b) => bounds.push(b),
                Err(e) => constancy.error(e, label(&d, j, g)),
            }
            match g_functions(&s) {
                Ok(gf) => {
                    let excess = (gf.gq.abs() - 2.0 * j).max(gf.gc * gf.gc + gf.gs * gf.gs - 4.0 * j);
                    gbounds.record(excess.max(0.0), excess <= 1e-12, || label(&d, j, g));
                }
                Err(e) => gbounds.error(e, label(&d, j, g)),
            }
        }
        if let (Some(lo), Some(hi)) = (bounds.iter().cloned().reduce(f64::min), bounds.iter().cloned().reduce(f64::max))
        {
            let spread = hi - lo;
            constancy.record(spread, spread < 1e-12, || format!("q={:.6} J={:.4}", d.q(), j));
        }
    }
    out.extend([sat.finish(), ineq.finish(), closed.finish(), constancy.finish(), gbounds.finish()]);

    let mut c = Tracker::new("observables.oracle_equivalence");
    let mut e_closed = Tracker::new("observables.ehrenfest_closed_form");
    let mut e_order = Tracker::new("observables.ehrenfest_fd_order");
    for &(d, j) in &points {
        for &g in &sparse_gammas {
            let s = match state(d, j, g) {
                Ok(s) => s,
                Err(e) => {
                    c.error(e, label(&d, j, g));
                    continue;
                }
            };
            match oracle_deviation(&s) {
                Ok((dev, word)) => c.record(dev, dev <= 1e-10, || format!("{} {word}", label(&d, j, g))),
                Err(e) => c.error(e, label(&d, j, g)),
            }
            for which in [Quadrature::X, Quadrature::P] {
                match ehrenfest_residual(&s, scales, which, crate::observables::DEFAULT_EHRENFEST_STEP / scales.omega())
                {
                    Ok(r) => {
                        let rel = r.closed / r.scale;
                        e_closed.record(rel, rel <= 1e-10, || format!("{} {which:?}", label(&d, j, g)));
                    }
                    Err(e) => e_closed.error(e, label(&d, j, g)),
                }
            }
        }
        let s = match state(d, j, 0.7) {
            Ok(s) => s,
            Err(_) => continue,
        };
        for which in [Quadrature::X, Quadrature::P] {
            match ehrenfest_order(&s, scales, which, 0.02 / scales.omega()) {
                Ok(order) => {
                    let dev = (order - 2.0).abs();
                    e_order.record(dev, dev <= 0.2, || format!("{} {which:?} order {order:.3}", label(&d, j, 0.7)));
                }
                Err(e) => e_order.error(e, label(&d, j, 0.7)),
            }
        }
    }
    out.extend([c.finish(), e_closed.finish(), e_order.finish()]);

    let mut c = Tracker::new("revival.ratio_identities");
    for d in standard_q_grid() {
        match revival_times(1.0, &d, scales, t) {
            Ok(r) => {
                let lnq = d.ln_q().abs();
                let a = (r.t_rev / r.t_cl * lnq - 1.0).abs();
                let b = (r.t_suprev / r.t_rev * lnq / 1.5 - 1.0).abs();
                let dev = a.max(b);
                c.record(dev, dev <= 1e-12, || format!("q={}", d.q()));
            }
            Err(e) => c.error(e, format!("q={}", d.q())),
        }
    }
    out.push(c.finish());

    let mut c = Tracker::new("classical_limit");
    let one = Deformation::undeformed();
    for j in [0.5, 2.5] {
        for &g in &gammas {
            let run = || -> Result<(f64, f64)> {
                let r = uncertainty(&state(one, j, g)?, scales)?;
                let a = autocorrelation(j, g, &one, t)?.norm_sqr();
                Ok(((r.ratio - 1.0).abs(), (a - (2.0 * j * (g.cos() - 1.0)).exp()).abs()))
            };
            match run() {
                Ok((ratio, auto)) => {
                    let dev = ratio.max(auto);
                    c.record(dev, dev <= 1e-10, || label(&one, j, g));
                }
                Err(e) => c.error(e, label(&one, j, g)),
            }
        }
    }
    out.push(c.finish());

    out
}
