//! Space-side versus frequency-side L² norm of the multiplicity function.
//!
//! `f_{n,θ}` is a sum of `L^n` boxes of half-width `w`, so
//! `f̂(x) = L^n ν̂_n(x) · 2 sin(w x) / x` and `∫ f² = (1/2π) ∫ |f̂|²`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{nu_hat, phi, Direction};
use crate::error::{Error, Result};
use crate::ifs::{SimilaritySystem, DEFAULT_ENUMERATION_CAP};
use crate::shadow::multiplicity_with_cap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParsevalReport {
    pub space_side: f64,
    pub frequency_side: f64,
    pub relative_error: f64,
    pub range: f64,
}

/// Default quadrature step on the frequency side.
pub const DEFAULT_STEP: f64 = 1.0 / 32.0;

/// Compares `l2_norm_sq(f_{n,θ})` with `(1/2π) ∫_{-R}^{R} |f̂|²` (composite Simpson, step about `step`).
pub fn parseval_check(system: &SimilaritySystem, theta: f64, n: usize, range: f64, step: f64) -> Result<ParsevalReport> {
    let base = 1.0 / system.ratio();
    if range < base.powi(n as i32 + 2) {
        return Err(Error::InvalidInput(format!("range {range} below base^(n+2) = {}", base.powi(n as i32 + 2))));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("step {step} must be positive")));
    }
    let space_side = multiplicity_with_cap(system, n, theta, DEFAULT_ENUMERATION_CAP)?.l2_norm_sq();
    let p = phi(system, Direction::Theta(theta))?;
    let count = system.checked_piece_count(n, DEFAULT_ENUMERATION_CAP)? as f64;
    let w = system.shape().shadow_half_width(system.piece_size(n), theta);
    let ratio = system.ratio();
    let integrand = |x: f64| {
        let box_hat = if x == 0.0 { 2.0 * w } else { 2.0 * (w * x).sin() / x };
        let v: Complex64 = nu_hat(&p, ratio, n, x) * count * box_hat;
        v.norm_sqr()
    };
    let intervals = {
        let k = (range / step).ceil() as usize;
        k + k % 2
    };
    let h = range / intervals as f64;
    // even integrand: (1/2π) ∫_{-R}^{R} = (1/π) ∫_0^R
    let partial: Vec<f64> = (0..=intervals)
        .collect::<Vec<_>>()
        .par_chunks(8192)
        .map(|chunk| {
            chunk
                .iter()
                .map(|&i| {
                    let weight = if i == 0 || i == intervals {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    weight * integrand(i as f64 * h)
                })
                .sum::<f64>()
        })
        .collect();
    let frequency_side = partial.iter().sum::<f64>() * h / 3.0 / std::f64::consts::PI;
    Ok(ParsevalReport { space_side, frequency_side, relative_error: (frequency_side - space_side).abs() / space_side, range })
}
