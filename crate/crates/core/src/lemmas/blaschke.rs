//! Zero-count and small-value bounds for holomorphic functions on the unit disc
//! with `|f(0)| >= 1`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use super::zeros::{count_zeros, ZeroCertificate};
use crate::error::{Error, Result};

/// Slack on the `|f(0)| >= 1` precondition, so that `g / g(0)` qualifies.
pub const PRECONDITION_SLACK: f64 = 1e-12;
const COVER_SUP_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlaschkeReport {
    pub zeros: usize,
    /// Sampled `sup_{|z|=1} |f|`.
    pub sup: f64,
    pub log2_sup: f64,
    pub pass: bool,
}

fn check_base<F: Fn(Complex64) -> Complex64>(f: &F) -> Result<f64> {
    let base = f(Complex64::new(0.0, 0.0)).norm();
    if base < 1.0 - PRECONDITION_SLACK {
        return Err(Error::PreconditionUnmet(format!("|f(0)| = {base} < 1")));
    }
    Ok(base)
}

/// `max |f|` over `samples` equally spaced points of the unit circle.
pub fn circle_sup<F: Fn(Complex64) -> Complex64>(f: &F, samples: usize) -> f64 {
    (0..samples.max(1)).map(|i| f(Complex64::from_polar(1.0, TAU * i as f64 / samples.max(1) as f64)).norm()).fold(0.0, f64::max)
}

/// Counts zeros in the half disc and compares with `log₂ sup_D |f|`.
pub fn blaschke_check<F: Fn(Complex64) -> Complex64>(f: &F, sup_samples: usize) -> Result<BlaschkeReport> {
    check_base(f)?;
    let cert = count_zeros(f, Complex64::new(0.0, 0.0), 0.5)?;
    let sup = circle_sup(f, sup_samples).max(cert.sup_bound).max(1.0);
    let log2_sup = sup.log2();
    Ok(BlaschkeReport { zeros: cert.count, sup, log2_sup, pass: cert.count as f64 <= log2_sup + 1e-12 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverReport {
    pub zeros: usize,
    pub delta: f64,
    /// `9/16 (3δ)^{1/M}`, zero when there are no zeros.
    pub epsilon: f64,
    pub samples: usize,
    pub samples_below: usize,
    pub violations: usize,
    /// Largest distance (capped at 1) from a sub-`δ` sample to the nearest zero,
    /// minus `ε`; -1 when no sample is below `δ`.
    pub worst_excess: f64,
    /// Smallest `|f|` seen on the quarter disc.
    pub min_modulus: f64,
    pub pass: bool,
    /// Radius from the Harnack bound that accounts for `sup_D |f|`; see [`harnack_epsilon`].
    /// `None` when the bound makes no claim (no zeros and `δ >= G`).
    pub corrected_epsilon: Option<f64>,
    pub corrected_violations: usize,
}

/// Cover radius that follows from Harnack's inequality with the supremum kept.
///
/// With `B` the unit-disc Blaschke product over the zeros in the disc of radius `r`
/// and `g = f / B`, `log(C / |g|)` is positive and harmonic there, so on the quarter
/// disc `|g| >= G = C (|g(0)| / C)^H` with `H = (r + 1/4) / (r - 1/4)`. Away from
/// the `ε`-balls `|B| >= (ε / (1 + r/4))^M`, giving `ε = (1 + r/4) (δ / G)^{1/M}`.
/// Returns `None` when `M = 0` and `δ >= G`; `Some(0)` when `M = 0` and `δ < G`.
pub fn harnack_epsilon(delta: f64, sup: f64, base: f64, zeros: &[Complex64], radius: f64) -> Option<f64> {
    let g0 = base / zeros.iter().map(|z| z.norm()).product::<f64>();
    let h = (radius + 0.25) / (radius - 0.25);
    let floor = sup * (g0 / sup).powf(h);
    if zeros.is_empty() {
        return (delta < floor).then_some(0.0);
    }
    Some((1.0 + radius / 4.0) * (delta / floor).powf(1.0 / zeros.len() as f64))
}

pub fn stated_epsilon(delta: f64, zeros: usize) -> f64 {
    if zeros == 0 {
        0.0
    } else {
        9.0 / 16.0 * (3.0 * delta).powf(1.0 / zeros as f64)
    }
}

/// Samples the quarter disc on a `grid × grid` lattice and checks that every point with
/// `|f| < δ` lies within `ε` of a zero found in the half disc.
pub fn small_value_cover_check<F: Fn(Complex64) -> Complex64>(f: &F, delta: f64, grid: usize) -> Result<CoverReport> {
    if !(delta > 0.0 && delta < 1.0 / 3.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    check_base(f)?;
    let cert: ZeroCertificate = count_zeros(f, Complex64::new(0.0, 0.0), 0.5)?;
    let epsilon = stated_epsilon(delta, cert.count);
    let sup = circle_sup(f, COVER_SUP_SAMPLES).max(cert.sup_bound);
    let corrected_epsilon = harnack_epsilon(delta, sup, cert.base_value, &cert.zeros, cert.radius);
    let mut report = CoverReport {
        zeros: cert.count,
        delta,
        epsilon,
        samples: 0,
        samples_below: 0,
        violations: 0,
        worst_excess: -1.0,
        min_modulus: f64::INFINITY,
        pass: true,
        corrected_epsilon,
        corrected_violations: 0,
    };
    let step = 0.5 / (grid.max(2) - 1) as f64;
    for i in 0..grid.max(2) {
        for j in 0..grid.max(2) {
            let z = Complex64::new(-0.25 + i as f64 * step, -0.25 + j as f64 * step);
            if z.norm() > 0.25 {
                continue;
            }
            report.samples += 1;
            let v = f(z).norm();
            report.min_modulus = report.min_modulus.min(v);
            if v >= delta {
                continue;
            }
            report.samples_below += 1;
            let nearest = cert.zeros.iter().map(|w| (z - w).norm()).fold(1.0, f64::min);
            report.worst_excess = report.worst_excess.max(nearest - epsilon);
            if nearest > epsilon {
                report.violations += 1;
            }
            if corrected_epsilon.is_some_and(|e| nearest > e) {
                report.corrected_violations += 1;
            }
        }
    }
    report.pass = report.violations == 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_one() {
        let r = blaschke_check(&|_z: Complex64| c(1.0, 0.0), 256).unwrap();
        assert_eq!(r.zeros, 0);
        assert_eq!(r.sup, 1.0);
        assert!(r.pass);
    }

    #[test]
    fn scaled_quadratic() {
        let f = |z: Complex64| 16.0 * (z * z - 1.0 / 16.0);
        let r = blaschke_check(&f, 4096).unwrap();
        assert_eq!(r.zeros, 2);
        assert!((r.sup - 17.0).abs() < 1e-9);
        assert!(r.pass && r.log2_sup > 4.08);
    }

    #[test]
    fn vanishing_at_origin_is_rejected() {
        assert!(matches!(blaschke_check(&|z: Complex64| 2.0 * z, 64), Err(Error::PreconditionUnmet(_))));
    }

    #[test]
    fn delta_range() {
        let f = |_z: Complex64| c(1.0, 0.0);
        for d in [0.4, 1.0 / 3.0, 0.0, -0.1] {
            assert!(matches!(small_value_cover_check(&f, d, 10), Err(Error::DeltaOutOfRange(_))));
        }
    }

    #[test]
    fn linear_function_cover() {
        let f = |z: Complex64| 9.0 * (z - 1.0 / 9.0);
        let r = small_value_cover_check(&f, 0.1, 401).unwrap();
        assert_eq!(r.zeros, 1);
        assert!((r.epsilon - 0.16875).abs() < 1e-15);
        assert!(r.samples_below > 0 && r.pass);
        // the small-value set is the disc of radius 1/90 about 1/9
        assert!(r.worst_excess <= 1.0 / 90.0 - r.epsilon + 1e-12);
    }

    #[test]
    fn nonvanishing_is_vacuous() {
        let f = |z: Complex64| 1.0 + 0.5 * z;
        let r = small_value_cover_check(&f, 0.1, 101).unwrap();
        assert_eq!((r.zeros, r.samples_below, r.epsilon), (0, 0, 0.0));
        assert!(r.pass);
    }

    #[test]
    fn steep_exponential_breaks_the_stated_radius() {
        // |f(0)| = 1, no zeros, yet |f(1/4)| = e^{-B/4} is tiny
        let f = |z: Complex64| (-20.0 * z).exp();
        let r = small_value_cover_check(&f, 0.01, 101).unwrap();
        assert_eq!(r.zeros, 0);
        assert!(r.samples_below > 0 && !r.pass);
        // keeping the supremum in the bound restores the cover
        assert_eq!(r.corrected_violations, 0);
        // the zero count bound itself is fine
        assert!(blaschke_check(&f, 256).unwrap().pass);
    }
}
