//! Splitting `ν̂_n` into low, medium and high frequency blocks.
//!
//! With `φ_k(x) = φ(ratio^k x)`:
//!
//! | block          | range of `k`              |
//! |----------------|---------------------------|
//! | `p1`           | `1 ..= n-m-1`             |
//! | `p1_inclusive` | `1 ..= n-m`               |
//! | `p2`           | `n-m ..= n`               |
//! | `p_flat`       | `n-m-ℓ ..= n-m-1`         |
//! | `p_sharp`      | `1 ..= n-m-ℓ-1`           |
//!
//! `p_sharp · p_flat = p1` and `p1 · p2 = ν̂_n`. `p1_inclusive` runs one factor
//! further and so shares the index `n-m` with `p2`.

use num_complex::Complex64;
use serde::Serialize;

use super::{phi, range_product, Direction, ExpPoly};
use crate::error::{Error, Result};
use crate::ifs::SimilaritySystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProductSpec {
    pub n: usize,
    pub m: usize,
    pub ell: usize,
}

impl ProductSpec {
    pub fn new(n: usize, m: usize, ell: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::SpecInvalid("m must be positive".into()));
        }
        if ell == 0 {
            return Err(Error::SpecInvalid("ell must be positive".into()));
        }
        if m + ell >= n {
            return Err(Error::SpecInvalid(format!("m + ell = {} must be below n = {n}", m + ell)));
        }
        Ok(ProductSpec { n, m, ell })
    }

    /// `ell = round(alpha · m)`.
    pub fn with_alpha(n: usize, m: usize, alpha: f64) -> Result<Self> {
        Self::new(n, m, (alpha * m as f64).round().max(0.0) as usize)
    }

    pub fn alpha(&self) -> f64 {
        self.ell as f64 / self.m as f64
    }

    /// The sample interval `[base^{n-m}, base^n]`.
    pub fn interval(&self, ratio: f64) -> (f64, f64) {
        let base = 1.0 / ratio;
        (base.powi((self.n - self.m) as i32), base.powi(self.n as i32))
    }

    pub fn p2_range(&self) -> (i64, i64) {
        ((self.n - self.m) as i64, self.n as i64)
    }

    pub fn p_flat_range(&self) -> (i64, i64) {
        ((self.n - self.m - self.ell) as i64, (self.n - self.m - 1) as i64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitProducts {
    pub p1: Complex64,
    pub p1_inclusive: Complex64,
    pub p2: Complex64,
    pub p_sharp: Complex64,
    pub p_flat: Complex64,
    pub nu_hat: Complex64,
}

pub fn split_products(spec: ProductSpec, system: &SimilaritySystem, dir: Direction, x: f64) -> Result<SplitProducts> {
    ProductSpec::new(spec.n, spec.m, spec.ell)?;
    Ok(split_with(&phi(system, dir)?, system.ratio(), spec, x))
}

/// Evaluates every block; `spec` is assumed valid.
pub fn split_with(phi: &ExpPoly, ratio: f64, spec: ProductSpec, x: f64) -> SplitProducts {
    let (n, m, ell) = (spec.n as i64, spec.m as i64, spec.ell as i64);
    let p_sharp = range_product(phi, ratio, 1, n - m - ell - 1, x);
    let p_flat = range_product(phi, ratio, n - m - ell, n - m - 1, x);
    let p1 = p_sharp * p_flat;
    let shared = range_product(phi, ratio, n - m, n - m, x);
    let p2 = shared * range_product(phi, ratio, n - m + 1, n, x);
    SplitProducts { p1, p1_inclusive: p1 * shared, p2, p_sharp, p_flat, nu_hat: p1 * p2 }
}
