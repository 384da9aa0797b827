use num_complex::Complex64;

use crate::error::{Error, Result};

/// `normalization · Σ_j c_j e^{i λ_j x}` with `|c_j| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    frequencies: Vec<f64>,
    coefficients: Vec<Complex64>,
    normalization: f64,
}

const UNIT_TOLERANCE: f64 = 1e-12;

impl ExpPoly {
    pub fn new(frequencies: Vec<f64>, coefficients: Vec<Complex64>, normalization: f64) -> Result<Self> {
        if frequencies.len() != coefficients.len() {
            return Err(Error::InvalidInput(format!("{} frequencies but {} coefficients", frequencies.len(), coefficients.len())));
        }
        if let Some(c) = coefficients.iter().find(|c| (c.norm() - 1.0).abs() > UNIT_TOLERANCE) {
            return Err(Error::InvalidInput(format!("coefficient {c} is not unimodular")));
        }
        if frequencies.iter().any(|f| !f.is_finite()) || !normalization.is_finite() {
            return Err(Error::InvalidInput("non-finite frequency or normalization".into()));
        }
        Ok(ExpPoly { frequencies, coefficients, normalization })
    }

    /// All coefficients 1 and normalization `1 / len`.
    pub fn uniform(frequencies: Vec<f64>) -> Self {
        let k = frequencies.len();
        ExpPoly { coefficients: vec![Complex64::new(1.0, 0.0); k], frequencies, normalization: 1.0 / k.max(1) as f64 }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&f, c) in self.frequencies.iter().zip(&self.coefficients) {
            let (s, co) = (f * x).sin_cos();
            re += c.re * co - c.im * s;
            im += c.re * s + c.im * co;
        }
        Complex64::new(re * self.normalization, im * self.normalization)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let i = Complex64::i();
        self.frequencies.iter().zip(&self.coefficients).map(|(&f, &c)| c * (i * f * z).exp()).sum::<Complex64>() * self.normalization
    }

    /// `x ↦ self(s x)`.
    pub fn dilated(&self, s: f64) -> ExpPoly {
        ExpPoly {
            frequencies: self.frequencies.iter().map(|f| f * s).collect(),
            coefficients: self.coefficients.clone(),
            normalization: self.normalization,
        }
    }

    /// Expanded product; frequencies add and coefficients multiply.
    pub fn product(&self, other: &ExpPoly) -> ExpPoly {
        let mut frequencies = Vec::with_capacity(self.len() * other.len());
        let mut coefficients = Vec::with_capacity(self.len() * other.len());
        for (&f, &c) in self.frequencies.iter().zip(&self.coefficients) {
            for (&g, &d) in other.frequencies.iter().zip(&other.coefficients) {
                frequencies.push(f + g);
                coefficients.push(c * d);
            }
        }
        ExpPoly { frequencies, coefficients, normalization: self.normalization * other.normalization }
    }

    pub fn max_abs_frequency(&self) -> f64 {
        self.frequencies.iter().fold(0.0, |m, f| m.max(f.abs()))
    }

    /// Bound on `|d/dx self(x)|` over the real line.
    pub fn derivative_bound(&self) -> f64 {
        self.normalization.abs() * self.frequencies.iter().map(|f| f.abs()).sum::<f64>()
    }

    /// Bound on `|self|` over the strip `|Im z| <= h`.
    pub fn strip_bound(&self, h: f64) -> f64 {
        self.normalization.abs() * self.frequencies.iter().map(|f| (f.abs() * h).exp()).sum::<f64>()
    }
}
