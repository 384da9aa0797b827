//! Numerical checks of the analytic toolbox: zero counting, the Blaschke bound,
//! small-value covers, Turán-type and doubling estimates, and square-function bounds.

pub mod blaschke;
pub mod cetsq;
pub mod doubling;
pub mod suites;
pub mod turan;
pub mod zeros;

pub use suites::{run_suite, Suite};
