//! Grid checks of the elementary inequalities behind the gasket analysis.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use super::SlopeForm;
use crate::error::{Error, Result};
use crate::ifs::SimilaritySystem;

/// `|1 + e^{ix} + e^{iy}|² - a (|4cos²x - 1|² + |4cos²y - 1|²)`.
pub fn key_obs_gap(a: f64, x: f64, y: f64) -> f64 {
    let lhs = 3.0 + 2.0 * (x.cos() + y.cos() + (x - y).cos());
    let px = 4.0 * x.cos().powi(2) - 1.0;
    let py = 4.0 * y.cos().powi(2) - 1.0;
    lhs - a * (px * px + py * py)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMinimum {
    pub value: f64,
    pub at: (f64, f64),
}

/// Minimum of [`key_obs_gap`] over the `grid × grid` points `(2πi/grid, 2πj/grid)`.
pub fn key_obs_check(a: f64, grid: usize) -> Result<GridMinimum> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("a = {a} must be positive")));
    }
    if grid == 0 {
        return Err(Error::InvalidInput("grid must be positive".into()));
    }
    let step = TAU / grid as f64;
    let rows: Vec<GridMinimum> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * step;
            (0..grid)
                .map(|j| {
                    let y = j as f64 * step;
                    GridMinimum { value: key_obs_gap(a, x, y), at: (x, y) }
                })
                .fold(GridMinimum { value: f64::INFINITY, at: (0.0, 0.0) }, |m, c| if c.value < m.value { c } else { m })
        })
        .collect();
    Ok(rows.into_iter().fold(GridMinimum { value: f64::INFINITY, at: (0.0, 0.0) }, |m, c| if c.value < m.value { c } else { m }))
}

/// Largest `a` for which the key inequality holds on the grid (ignoring points where both sides vanish).
pub fn key_obs_best_constant(grid: usize) -> f64 {
    let step = TAU / grid as f64;
    (0..grid)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * step;
            (0..grid)
                .filter_map(|j| {
                    let y = j as f64 * step;
                    let rhs = key_obs_gap(1.0, x, y) - key_obs_gap(0.0, x, y);
                    (-rhs > 1e-12).then(|| key_obs_gap(0.0, x, y) / -rhs)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Below this `|sin x|` the quotient is replaced by its polynomial value.
pub const SINE_EXCLUSION: f64 = 1e-8;

/// `sin 3x / sin x`, continued by `4cos²x - 1` where `|sin x|` is tiny.
pub fn sine_ratio(x: f64) -> f64 {
    let s = x.sin();
    if s.abs() < SINE_EXCLUSION {
        4.0 * x.cos().powi(2) - 1.0
    } else {
        (3.0 * x).sin() / s
    }
}

/// Max of `|sin 3x / sin x - (4cos²x - 1)|` over `grid` points of `[0, 2π)`.
pub fn sine_identity_check(grid: usize) -> f64 {
    let step = TAU / grid as f64;
    (0..grid)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * step;
            (sine_ratio(x) - (4.0 * x.cos().powi(2) - 1.0)).abs()
        })
        .reduce(|| 0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistForm {
    /// `|Φ(y)| <= 1 - b dist(y, Z²)`.
    Linear,
    /// `|Φ(y)| <= 1 - b dist(y, Z²)²`.
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistFit {
    pub form: DistForm,
    pub b: f64,
    pub at: (f64, f64),
    pub grid: usize,
}

/// Tolerance for the slope-form coefficients to count as integers.
const LATTICE_TOLERANCE: f64 = 1e-9;

/// Best `b` over the grid `(i/grid, j/grid)` of the unit square, lattice point excluded, for
/// `Φ(y) = (1/L) Σ_l e^{2πi(a_l y₁ + b_l y₂)}` built from the system's slope form.
pub fn dist_bound_fit(system: &SimilaritySystem, grid: usize, form: DistForm) -> Result<DistFit> {
    if grid < 2 {
        return Err(Error::InvalidInput("grid must be at least 2".into()));
    }
    let slope = SlopeForm::new(system)?;
    let integral = |v: &f64| (v - v.round()).abs() < LATTICE_TOLERANCE;
    if !slope.a.iter().all(integral) || !slope.b.iter().all(integral) {
        return Err(Error::PreconditionUnmet("slope-form coefficients are not integers; Φ is not Z²-periodic".into()));
    }
    let a: Vec<f64> = slope.a.iter().map(|v| v.round()).collect();
    let b: Vec<f64> = slope.b.iter().map(|v| v.round()).collect();
    let norm = 1.0 / a.len() as f64;
    let big_phi = |y1: f64, y2: f64| {
        a.iter().zip(&b).map(|(&p, &q)| Complex64::from_polar(1.0, TAU * (p * y1 + q * y2))).sum::<Complex64>().norm() * norm
    };
    let cell_dist = |v: f64| v.min(1.0 - v);
    let best = (0..grid)
        .into_par_iter()
        .map(|i| {
            let y1 = i as f64 / grid as f64;
            (0..grid)
                .filter(|&j| i != 0 || j != 0)
                .map(|j| {
                    let y2 = j as f64 / grid as f64;
                    let d = cell_dist(y1).hypot(cell_dist(y2));
                    let scale = match form {
                        DistForm::Linear => d,
                        DistForm::Quadratic => d * d,
                    };
                    ((1.0 - big_phi(y1, y2)) / scale, (y1, y2))
                })
                .fold((f64::INFINITY, (0.0, 0.0)), |m, c| if c.0 < m.0 { c } else { m })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((f64::INFINITY, (0.0, 0.0)), |m, c| if c.0 < m.0 { c } else { m });
    Ok(DistFit { form, b: best.0, at: best.1, grid })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::preset;
    use std::f64::consts::PI;

    #[test]
    fn key_obs_pointwise_cases() {
        assert!(key_obs_gap(1.0 / 18.0, 0.0, PI).abs() < 1e-12);
        assert!(key_obs_gap(1.0 / 18.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(key_obs_gap(0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn key_obs_gap_matches_complex_evaluation() {
        for (x, y) in [(0.3, 1.7), (2.55, 4.54), (6.0, 0.1)] {
            let phi = Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, x) + Complex64::from_polar(1.0, y);
            let px = (3.0 * x).sin() / x.sin();
            let py = (3.0 * y).sin() / y.sin();
            let direct = phi.norm_sqr() - 0.05 * (px * px + py * py);
            assert!((key_obs_gap(0.05, x, y) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn key_obs_best_constant_is_below_one_eighteenth() {
        let best = key_obs_best_constant(400);
        assert!(best > 0.04 && best < 1.0 / 18.0, "{best}");
        let m = key_obs_check(best * 0.999, 400).unwrap();
        assert!(m.value >= -1e-12);
    }

    #[test]
    fn sine_identity() {
        assert!((sine_ratio(PI / 4.0) - 1.0).abs() < 1e-15);
        assert_eq!(sine_ratio(0.0), 3.0);
        assert!((sine_ratio(1e-6) - 3.0).abs() < 1e-10);
        assert!(sine_identity_check(100_000) < 1e-10);
    }

    #[test]
    fn gasket_quadratic_fit_is_positive_and_stable() {
        let g = preset("gasket").unwrap();
        let coarse = dist_bound_fit(&g, 200, DistForm::Quadratic).unwrap();
        let fine = dist_bound_fit(&g, 400, DistForm::Quadratic).unwrap();
        assert!(coarse.b > 0.0);
        assert!((coarse.b - fine.b).abs() / fine.b < 0.05, "{coarse:?} {fine:?}");
    }

    #[test]
    fn linear_fit_degenerates_under_refinement() {
        let g = preset("gasket").unwrap();
        let coarse = dist_bound_fit(&g, 200, DistForm::Linear).unwrap();
        let fine = dist_bound_fit(&g, 400, DistForm::Linear).unwrap();
        assert!(coarse.b > 0.0);
        assert!((fine.b / coarse.b - 0.5).abs() < 0.05, "{coarse:?} {fine:?}");
    }

    #[test]
    fn corner4_is_lattice_form_and_random_is_not() {
        assert!(dist_bound_fit(&preset("corner4").unwrap(), 64, DistForm::Quadratic).unwrap().b > 0.0);
        assert!(matches!(dist_bound_fit(&preset("random-5-2").unwrap(), 64, DistForm::Quadratic), Err(Error::PreconditionUnmet(_))));
    }
}
