#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use lcspec_core::extension::{LcOptions, LcProblem};
use lcspec_core::slcore::{Alpha, Problem, XMax};
use num_complex::Complex64;

pub const X_MAX: f64 = 6.0;

/// `-u'' - x^8 u`, Dirichlet at 0, truncated at `X = 6`.
pub fn neg_x8_problem() -> Problem {
    Problem::new("1", "-x^8", Alpha::Infinite, XMax::Fixed(X_MAX), 1e-4).unwrap()
}

/// Shared LC problem so the grid and solution cache are built once per test binary.
pub fn neg_x8() -> &'static LcProblem {
    static LC: OnceLock<LcProblem> = OnceLock::new();
    LC.get_or_init(|| LcProblem::new(neg_x8_problem(), &LcOptions::default()).unwrap())
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/v1")
}

/// Relative for `|a| >= 1`, absolute below.
pub fn mixed_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}
