//! `sup_Q |φ(z)| / sup_{Q/2} |φ(z)|` for squares `Q = [x'-1, x'+1] × [-1, 1]`.

use num_complex::Complex64;

use crate::error::Result;
use crate::ifs::SimilaritySystem;
use crate::spectral::{phi, Direction, ExpPoly};

/// Boundary samples per unit length.
pub const BOUNDARY_DENSITY: usize = 64;

fn boundary_sup(p: &ExpPoly, center: f64, half: f64) -> f64 {
    let per_side = (2.0 * half * BOUNDARY_DENSITY as f64).ceil() as usize;
    let corners = [
        Complex64::new(center - half, -half),
        Complex64::new(center + half, -half),
        Complex64::new(center + half, half),
        Complex64::new(center - half, half),
    ];
    let mut sup: f64 = 0.0;
    for s in 0..4 {
        let (a, b) = (corners[s], corners[(s + 1) % 4]);
        for i in 0..per_side {
            sup = sup.max(p.eval_complex(a + (b - a) * (i as f64 / per_side as f64)).norm());
        }
    }
    sup
}

/// Ratio for an arbitrary exponential sum. Both sups are taken on the boundary
/// (maximum principle); the outer one also sees the inner samples, so the ratio is at least 1.
pub fn doubling_ratio_of(p: &ExpPoly, center: f64) -> f64 {
    let inner = boundary_sup(p, center, 0.5);
    let outer = boundary_sup(p, center, 1.0).max(inner);
    if inner == 0.0 {
        f64::INFINITY
    } else {
        outer / inner
    }
}

/// Ratio for `z ↦ φ_t(ratio^k z)` on the square centered at `x'`.
pub fn doubling_ratio(system: &SimilaritySystem, t: f64, center: f64, k: u32) -> Result<f64> {
    let p = phi(system, Direction::T(t))?.dilated(system.ratio().powi(k as i32));
    Ok(doubling_ratio_of(&p, center))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::preset;

    #[test]
    fn constant_ratio_is_one() {
        assert_eq!(doubling_ratio_of(&ExpPoly::uniform(vec![0.0]), 3.0), 1.0);
    }

    #[test]
    fn single_exponential_ratio() {
        // |e^{iz}| = e^{-Im z}: sups e^{1} and e^{1/2}
        let r = doubling_ratio_of(&ExpPoly::uniform(vec![1.0]), 0.0);
        assert!((r - 0.5f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn gasket_ratios_at_least_one() {
        let g = preset("gasket").unwrap();
        for k in 0..=3 {
            for x in [0.0, 2.1, 17.5] {
                let r = doubling_ratio(&g, 0.37, x, k).unwrap();
                assert!(r >= 1.0 && r.is_finite());
            }
        }
    }
}
