//! The coefficient sequence `a_k = 2(1 + cos(4^k λ))` and its long-run behavior.
//!
//! `4^k λ mod 2π` is computed exactly: for a rational number of turns by modular
//! arithmetic, for a real `λ` from a high-precision expansion of `1/(2π)`
//! (so the angle is correct to about 64 bits for every `k`).

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lambda {
    /// `λ = 2π p / q`.
    RationalTurn {
        p: u64,
        q: u64,
    },
    Real(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErgodicCase {
    /// `a_k` eventually periodic and never zero.
    EventuallyPeriodic,
    /// `a_k = 4` for all large `k`.
    EventuallyFour,
    /// No repetition seen; the angles behave like an equidistributed sequence.
    Equidistributed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicReport {
    pub case: ErgodicCase,
    pub values: Vec<f64>,
    /// `(1/k) Σ_{j<=k} a_j`.
    pub running_average: Vec<f64>,
    /// First index (1-based) and length of the detected period, if any.
    pub period: Option<(usize, usize)>,
}

/// Fractional parts `frac(4^k λ / 2π)` for `k = 1..=count`, as 64-bit fixed point.
pub fn turn_fractions(lambda: Lambda, count: usize) -> Result<Vec<u64>> {
    match lambda {
        Lambda::RationalTurn { p, q } => {
            if q == 0 {
                return Err(Error::InvalidInput("q must be positive".into()));
            }
            let q = q as u128;
            let mut r = p as u128 % q;
            Ok((0..count)
                .map(|_| {
                    r = r * 4 % q;
                    ((r << 64) / q) as u64
                })
                .collect())
        }
        Lambda::Real(x) => real_turn_fractions(x, count),
    }
}

fn real_turn_fractions(x: f64, count: usize) -> Result<Vec<u64>> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("lambda {x} is not finite")));
    }
    if x == 0.0 || count == 0 {
        return Ok(vec![0; count]);
    }
    // |x| = mantissa · 2^exp exactly
    let bits = x.abs().to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i64;
    let (mantissa, exp) =
        if raw_exp == 0 { (bits & ((1 << 52) - 1), -1074) } else { ((bits & ((1 << 52) - 1)) | (1 << 52), raw_exp - 1075) };
    // angle/2π = mantissa · 2^{exp + 2k} · c, c = 1/(2π) ≈ C / 2^P
    let top_shift = exp + 2 * count as i64;
    let guard = 128;
    let precision = (top_shift + 64 + 53 + guard).max(128) as u64;
    let c = inverse_two_pi(precision);
    let product = c * BigUint::from(mantissa);
    let negative = x < 0.0;
    Ok((1..=count as i64)
        .map(|k| {
            // frac(product · 2^{exp + 2k - P}) as 64 fractional bits
            let shift = precision as i64 - (exp + 2 * k);
            let f = fraction_bits(&product, shift);
            if negative {
                f.wrapping_neg()
            } else {
                f
            }
        })
        .collect())
}

/// The 64 bits of `v` just below bit position `shift`, i.e. `frac(v / 2^shift)`.
fn fraction_bits(v: &BigUint, shift: i64) -> u64 {
    if shift <= 0 {
        return 0;
    }
    let shift = shift as u64;
    if shift >= 64 {
        ((v >> (shift - 64)) & BigUint::from(u64::MAX)).to_u64().unwrap_or(0)
    } else {
        let low = v & ((BigUint::one() << shift) - 1u32);
        (low.to_u64().unwrap_or(0)) << (64 - shift)
    }
}

/// `floor(2^bits / (2π))`.
pub fn inverse_two_pi(bits: u64) -> BigUint {
    let extra = 32;
    let pi = pi_fixed(bits + extra);
    (BigUint::one() << (2 * (bits + extra) - extra)) / (pi << 1)
}

/// `floor(π · 2^bits)` up to a few units in the last place, by Machin's formula.
pub fn pi_fixed(bits: u64) -> BigUint {
    let guard = 64;
    let work = bits + guard;
    let pi = (arctan_inverse(5, work) * 4u32 - arctan_inverse(239, work)) * 4u32;
    pi >> guard
}

/// `arctan(1/x) · 2^bits` by the alternating Taylor series.
fn arctan_inverse(x: u32, bits: u64) -> BigUint {
    let x2 = BigUint::from(x) * x;
    let mut power = (BigUint::one() << bits) / x;
    let mut positive = BigUint::zero();
    let mut negative = BigUint::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        let term = &power / (2 * k + 1);
        if k % 2 == 0 {
            positive += term;
        } else {
            negative += term;
        }
        power /= &x2;
        k += 1;
    }
    positive - negative
}

fn coefficient(fraction: u64) -> f64 {
    let angle = std::f64::consts::TAU * (fraction as f64 / 18446744073709551616.0);
    2.0 * (1.0 + angle.cos())
}

/// `a_k` for `k = 1..=count`.
pub fn coefficients(lambda: Lambda, count: usize) -> Result<Vec<f64>> {
    Ok(turn_fractions(lambda, count)?.into_iter().map(coefficient).collect())
}

pub fn analyze(lambda: Lambda, count: usize) -> Result<ErgodicReport> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be positive".into()));
    }
    let fractions = turn_fractions(lambda, count)?;
    let values: Vec<f64> = fractions.iter().map(|&f| coefficient(f)).collect();
    let mut sum = 0.0;
    let running_average = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            sum += v;
            sum / (i + 1) as f64
        })
        .collect();
    let period = find_period(&fractions);
    let case = match lambda {
        Lambda::RationalTurn { p, q } => {
            let q = q / gcd(p % q, q);
            if q.is_power_of_two() {
                ErgodicCase::EventuallyFour
            } else {
                ErgodicCase::EventuallyPeriodic
            }
        }
        Lambda::Real(_) => match period {
            Some((start, 1)) if fractions[start - 1] == 0 => ErgodicCase::EventuallyFour,
            Some(_) => ErgodicCase::EventuallyPeriodic,
            None => ErgodicCase::Equidistributed,
        },
    };
    Ok(ErgodicReport { case, values, running_average, period })
}

/// First repeated state of the exact sequence; `x_{k+1} = 4 x_k mod 1` is deterministic,
/// so one repeat fixes the tail.
fn find_period(fractions: &[u64]) -> Option<(usize, usize)> {
    let mut seen = std::collections::HashMap::new();
    for (i, &f) in fractions.iter().enumerate() {
        if let Some(&j) = seen.get(&f) {
            return Some((j + 1, i - j));
        }
        seen.insert(f, i);
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
