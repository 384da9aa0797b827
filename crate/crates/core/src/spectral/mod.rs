//! Fourier side of the natural measure on `G`.
//!
//! With `g_l = Re(c_l e^{-iθ}) / ratio` (projected centers on the unit scale),
//!
//! ```text
//! φ_θ(x)   = (1/L) Σ_l e^{-i g_l x}
//! ν̂_n(x)   = Π_{k=1..n} φ_θ(ratio^k x) = L^{-n} Σ_{pieces} e^{-i proj(center) x}
//! ```
//!
//! The slope form `φ_t(x) = (1/L)[1 + e^{ix} + e^{itx} + Σ_{l>3} e^{i(a_l + b_l t)x}]`
//! comes from an affine change of variables; see [`SlopeForm`].

pub mod ergodic;
pub mod expsum;
pub mod identities;
pub mod parseval;
pub mod products;
pub mod ssv;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ifs::SimilaritySystem;

pub use expsum::ExpPoly;
pub use products::{split_products, split_with, ProductSpec, SplitProducts};

/// Which one-parameter family a direction is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Projection angle in radians.
    Theta(f64),
    /// Slope parameter of the normalized form.
    T(f64),
}

/// Coefficients `(a_l, b_l)` with `u_l - u_1 = a_l d + b_l e`, where `u_l` are the
/// generator centers divided by the ratio and `(d, e)` is the first linearly
/// independent pair of differences. In these coordinates
/// `|φ_θ(x)| = |φ_t(s x)|` with `t = <e, ω> / <d, ω>`, `s = -<d, ω>`, `ω = e^{iθ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeForm {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// The difference vectors `d` and `e`.
    pub basis: (Complex64, Complex64),
}

/// Below this |cross product| two differences count as parallel.
const INDEPENDENCE_TOLERANCE: f64 = 1e-9;

impl SlopeForm {
    pub fn new(system: &SimilaritySystem) -> Result<Self> {
        let u: Vec<Complex64> = system.centers().map(|c| c / system.ratio()).collect();
        let diffs: Vec<Complex64> = u.iter().map(|&v| v - u[0]).collect();
        let scale = diffs.iter().map(|d| d.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::DegenerateSystem);
        }
        let cross = |p: Complex64, q: Complex64| p.re * q.im - p.im * q.re;
        let j = diffs.iter().position(|d| d.norm() > INDEPENDENCE_TOLERANCE * scale).ok_or(Error::DegenerateSystem)?;
        let d = diffs[j];
        let k = diffs.iter().position(|&e| cross(d, e).abs() > INDEPENDENCE_TOLERANCE * scale * scale).ok_or(Error::DegenerateSystem)?;
        let e = diffs[k];
        let det = cross(d, e);
        let (a, b) = diffs.iter().map(|&v| (cross(v, e) / det, cross(d, v) / det)).unzip();
        Ok(SlopeForm { a, b, basis: (d, e) })
    }

    /// `(t, s)` for the angle `theta`; `None` when `<d, ω> = 0`.
    pub fn slope_for_angle(&self, theta: f64) -> Option<(f64, f64)> {
        let omega = Complex64::from_polar(1.0, theta);
        let dot = |p: Complex64| p.re * omega.re + p.im * omega.im;
        let pd = dot(self.basis.0);
        if pd.abs() < 1e-300 {
            return None;
        }
        Some((dot(self.basis.1) / pd, -pd))
    }

    pub fn exp_poly(&self, t: f64) -> ExpPoly {
        let freqs = self.a.iter().zip(&self.b).map(|(a, b)| a + b * t).collect();
        ExpPoly::uniform(freqs)
    }
}

/// The generating exponential sum `φ` for a direction.
pub fn phi(system: &SimilaritySystem, dir: Direction) -> Result<ExpPoly> {
    match dir {
        Direction::Theta(theta) => {
            let freqs = system.projected_generators(theta).into_iter().map(|p| -p / system.ratio()).collect();
            Ok(ExpPoly::uniform(freqs))
        }
        Direction::T(t) => Ok(SlopeForm::new(system)?.exp_poly(t)),
    }
}

pub fn phi_eval(system: &SimilaritySystem, dir: Direction, x: f64) -> Result<Complex64> {
    Ok(phi(system, dir)?.eval(x))
}

/// `Π_{k=1..n} φ(ratio^k x)`, multiplied left to right.
pub fn nu_hat(phi: &ExpPoly, ratio: f64, n: usize, x: f64) -> Complex64 {
    range_product(phi, ratio, 1, n as i64, x)
}

pub fn nu_hat_eval(system: &SimilaritySystem, dir: Direction, n: usize, x: f64) -> Result<Complex64> {
    Ok(nu_hat(&phi(system, dir)?, system.ratio(), n, x))
}

/// `Π_{k=lo..hi} φ(ratio^k x)`; 1 for an empty range.
pub fn range_product(phi: &ExpPoly, ratio: f64, lo: i64, hi: i64, x: f64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    let mut scaled = x * ratio.powi(lo as i32);
    for _ in lo..=hi {
        acc *= phi.eval(scaled);
        scaled *= ratio;
    }
    acc
}
