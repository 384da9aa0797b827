//! Square-function bound for exponential sums with unimodular coefficients:
//! `∫_0^{1/δ} |Σ c_α e^{iαy}|² dy` against `S = ∫ (Σ χ_{[α-δ, α+δ]})²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::shadow::{Interval, StepFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CetsqMeasurement {
    pub lhs: f64,
    pub s: f64,
    /// `lhs · δ² / S`; scale invariant.
    pub ratio: f64,
    /// Largest number of frequencies in a closed window of length `δ`.
    pub max_window_count: usize,
    /// `lhs · δ / (4 k S₀)`, the count-based form of the same bound.
    pub count_ratio: f64,
}

/// `∫_0^T |Σ c_j e^{iα_j y}|² dy` in closed form.
pub fn exp_sum_energy(frequencies: &[f64], coefficients: &[Complex64], length: f64) -> f64 {
    let mut total = 0.0;
    for (j, (&a, &c)) in frequencies.iter().zip(coefficients).enumerate() {
        total += c.norm_sqr() * length;
        for (&b, &d) in frequencies[j + 1..].iter().zip(&coefficients[j + 1..]) {
            let gap = a - b;
            let integral = if gap.abs() * length < 1e-8 {
                Complex64::new(length, gap * length * length / 2.0)
            } else {
                (Complex64::from_polar(1.0, gap * length) - 1.0) / Complex64::new(0.0, gap)
            };
            total += 2.0 * (c * d.conj() * integral).re;
        }
    }
    total
}

pub fn window_count(frequencies: &[f64], width: f64) -> usize {
    let mut sorted = frequencies.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..sorted.len() {
        while sorted[hi] - sorted[lo] > width {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

pub fn cetsq_ratio(frequencies: &[f64], coefficients: &[Complex64], delta: f64) -> Result<CetsqMeasurement> {
    if frequencies.is_empty() || frequencies.len() != coefficients.len() {
        return Err(Error::InvalidInput("need matching, nonempty frequencies and coefficients".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(format!("delta {delta} must be positive")));
    }
    if coefficients.iter().any(|c| (c.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidInput("coefficients must be unimodular".into()));
    }
    let lhs = exp_sum_energy(frequencies, coefficients, 1.0 / delta);
    let boxes: Vec<Interval> = frequencies.iter().map(|&a| Interval::new(a - delta, a + delta)).collect();
    let s = StepFunction::from_intervals(&boxes).l2_norm_sq();
    let max_window_count = window_count(frequencies, delta);
    let k = frequencies.len() as f64;
    Ok(CetsqMeasurement {
        lhs,
        s,
        ratio: lhs * delta * delta / s,
        max_window_count,
        count_ratio: lhs * delta / (4.0 * k * max_window_count as f64),
    })
}
