//! Projections of self-similar Cantor sets: multiplicity profiles, Favard
//! length, the Fourier-side products of the natural measure, and numerical
//! checks of the supporting analytic and combinatorial estimates.

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod favard;
pub mod ifs;
pub mod lemmas;
pub mod report;
pub mod rng;
pub mod shadow;
pub mod spectral;
pub mod stacks;

pub use error::{Error, Result};
pub use ifs::{preset, SimilaritySystem};
