//! Revival-time hierarchy and autocorrelation scans.
//!
//! With `E_n = hbar omega [n]_q` the derivatives at the packet centre are
//! `d^k E / dn^k = hbar omega 2^k q^{2 n} (ln q)^k / (q^2 - 1)`, giving the
//! classical period `2 pi hbar / |E'|`, the revival time `4 pi hbar / |E''|`
//! and the superrevival time `12 pi hbar / |E'''|`.
//!
//! The autocorrelation `A(t) = <J, 0 | J, omega t>` is evaluated for `q < 1` through
//!
//! ```text
//! A(t) = e^{-i gamma / (1 - q^2)} F_q(J, gamma / (1 - q^2)) / E_q(J),   gamma = omega t
//! ```
//!
//! which needs one series per time point.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coherent::mean_occupation;
use crate::error::{Error, Result};
use crate::observables::PhysicalScales;
use crate::qkernel::{cis, f_q, q_exponential, q_integer, sum_series, Deformation, Truncation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalTimes {
    pub t_cl: f64,
    pub t_rev: f64,
    pub t_suprev: f64,
    pub n_bar: f64,
}

/// `d^k E_n / dn^k` at `n = n_bar`.
///
/// At `q = 1` the spectrum is linear: the first derivative is `hbar omega`
/// and all higher ones vanish.
pub fn energy_derivative(k: u32, n_bar: f64, d: &Deformation, scales: &PhysicalScales) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("derivative order must be >= 1"));
    }
    let hw = scales.hbar() * scales.omega();
    if d.is_undeformed() {
        return Ok(if k == 1 { hw } else { 0.0 });
    }
    let ln_q = d.ln_q();
    Ok(-hw * 2f64.powi(k as i32) * d.q_pow2(n_bar) * ln_q.powi(k as i32) / d.one_minus_q_sq())
}

pub fn revival_times(j: f64, d: &Deformation, scales: &PhysicalScales, t: &Truncation) -> Result<RevivalTimes> {
    if d.is_undeformed() {
        return Err(Error::NoRevivalStructure);
    }
    let n_bar = mean_occupation(j, d, t)?;
    let hbar = scales.hbar();
    let pi = std::f64::consts::PI;
    let period = |k: u32, numerator: f64| -> Result<f64> {
        Ok(numerator * pi * hbar / energy_derivative(k, n_bar, d, scales)?.abs())
    };
    Ok(RevivalTimes { t_cl: period(1, 2.0)?, t_rev: period(2, 4.0)?, t_suprev: period(3, 12.0)?, n_bar })
}

/// Serial or rayon-parallel evaluation of a scan. Both produce identical rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub t: f64,
    pub values: Vec<f64>,
}

/// An ordered table of `(t, values...)` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    column_names: Vec<String>,
    rows: Vec<ScanRow>,
}

impl ScanResult {
    /// `column_names` labels the value columns; `t` is implicit.
    pub fn new<I, S>(column_names: I, rows: Vec<ScanRow>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let column_names: Vec<String> = column_names.into_iter().map(Into::into).collect();
        if rows.iter().any(|r| r.values.len() != column_names.len()) {
            return Err(Error::invalid("row width does not match the column count"));
        }
        if rows.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::invalid("scan times must be strictly increasing"));
        }
        Ok(Self { column_names, rows })
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn rows(&self) -> &[ScanRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of `label`; `"t"` selects the time column.
    pub fn column(&self, label: &str) -> Result<Vec<f64>> {
        if label == "t" {
            return Ok(self.rows.iter().map(|r| r.t).collect());
        }
        let idx =
            self.column_names.iter().position(|c| c == label).ok_or_else(|| Error::UnknownColumn(label.to_string()))?;
        Ok(self.rows.iter().map(|r| r.values[idx]).collect())
    }

    /// Header `t,<columns>` then one line per row, every number with 17
    /// significant digits in scientific notation, `\n` line endings.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "t")?;
        for c in &self.column_names {
            write!(out, ",{c}")?;
        }
        out.write_all(b"\n")?;
        for row in &self.rows {
            write!(out, "{}", format_csv_number(row.t))?;
            for v in &row.values {
                write!(out, ",{}", format_csv_number(*v))?;
            }
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// Fixed 17-significant-digit formatting, independent of locale.
pub fn format_csv_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// `steps` equally spaced times from `t_min` to `t_max` inclusive.
pub fn uniform_grid(t_min: f64, t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !t_min.is_finite() || !t_max.is_finite() || t_min >= t_max {
        return Err(Error::invalid(format!("need finite t_min < t_max, got [{t_min}, {t_max}]")));
    }
    if steps < 2 {
        return Err(Error::invalid(format!("need at least 2 steps, got {steps}")));
    }
    let span = t_max - t_min;
    let last = (steps - 1) as f64;
    let grid: Vec<f64> =
        (0..steps).map(|i| if i + 1 == steps { t_max } else { t_min + span * (i as f64 / last) }).collect();
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time grid is too fine to be strictly increasing"));
    }
    Ok(grid)
}

/// `A(gamma) = <J, 0 | J, gamma>`.
pub fn autocorrelation(j: f64, gamma: f64, d: &Deformation, t: &Truncation) -> Result<Complex64> {
    let norm = q_exponential(j, d, t)?.value.re;
    if d.is_undeformed() {
        // the F_q identity degenerates at q = 1; sum |c_n|^2 e^{-i gamma n} directly
        let direct = sum_series(j, d, t, 1.0, |n| j / (n as f64 + 1.0), |n| cis(-gamma * n as f64))?;
        return Ok(direct.value / norm);
    }
    let stretched = gamma / d.one_minus_q_sq();
    let f = f_q(j, stretched, d, t)?.value;
    Ok(cis(-stretched) * f / norm)
}

/// `A(gamma)` summed directly as `sum_n |c_n|^2 e^{-i gamma [n]_q}`.
pub fn autocorrelation_direct(j: f64, gamma: f64, d: &Deformation, t: &Truncation) -> Result<Complex64> {
    let norm = q_exponential(j, d, t)?.value.re;
    let direct = sum_series(j, d, t, 1.0, |n| j / q_integer(n + 1, d), |n| cis(-gamma * q_integer(n, d)))?;
    Ok(direct.value / norm)
}

/// Columns `re, im, abs2` of `A(t)` on a uniform grid.
pub fn autocorrelation_scan(
    j: f64,
    d: &Deformation,
    scales: &PhysicalScales,
    t: &Truncation,
    t_min: f64,
    t_max: f64,
    steps: usize,
) -> Result<ScanResult> {
    autocorrelation_scan_with(j, d, scales, t, t_min, t_max, steps, Execution::Parallel)
}

#[allow(clippy::too_many_arguments)]
pub fn autocorrelation_scan_with(
    j: f64,
    d: &Deformation,
    scales: &PhysicalScales,
    t: &Truncation,
    t_min: f64,
    t_max: f64,
    steps: usize,
    execution: Execution,
) -> Result<ScanResult> {
    d.check_argument(j)?;
    let times = uniform_grid(t_min, t_max, steps)?;
    let omega = scales.omega();
    let row = |&time: &f64| -> Result<ScanRow> {
        let a = autocorrelation(j, omega * time, d, t)?;
        Ok(ScanRow { t: time, values: vec![a.re, a.im, a.norm_sqr()] })
    };
    let rows: Result<Vec<ScanRow>> = match execution {
        Execution::Serial => times.iter().map(row).collect(),
        Execution::Parallel => times.par_iter().map(row).collect(),
    };
    ScanResult::new(["re", "im", "abs2"], rows?)
}

/// Strict interior local maxima of `column` with value at least `threshold`.
pub fn find_peaks(scan: &ScanResult, column: &str, threshold: f64) -> Result<Vec<(f64, f64)>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!("threshold must lie in (0, 1], got {threshold}")));
    }
    let values = scan.column(column)?;
    let times = scan.column("t")?;
    Ok((1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1] && values[i] >= threshold)
        .map(|i| (times[i], values[i]))
        .collect())
}
