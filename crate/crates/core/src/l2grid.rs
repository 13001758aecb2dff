//! Quadrature pairings on a grid.
//!
//! `⟨f, g⟩ = ∫ f conj(g)` is conjugate-linear in the second slot. Kernels of
//! the resolvents need the bilinear form `∫ f g` instead; note that
//! `⟨h, phi_{conj z}⟩ = ∫ h phi_z` because `phi_{conj z} = conj(phi_z)` for
//! real coefficients. Use [`bilinear`] for those and [`inner`] only for
//! genuine Hilbert-space products.

use std::sync::Arc;

use num_complex::Complex64;

use crate::coeffexpr::Expr;
use crate::error::Result;
use crate::slcore::{Grid, GridFunction};
use crate::stencil;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerProductReport {
    pub value: Complex64,
    /// `|Q_h - Q_{2h}| / 15` from a half-resolution rule.
    pub quadrature_error_estimate: f64,
    /// Bound on the discarded `∫_{X_max}^∞` part, from the WKB envelope
    /// calibrated on the last tenth of the grid.
    pub tail_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub value: f64,
    pub quadrature_error_estimate: f64,
    pub tail_estimate: f64,
}

fn weighted_sum(weights: &[f64], f: impl Fn(usize) -> Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, w) in weights.iter().enumerate() {
        acc += f(k) * *w;
    }
    acc
}

/// `∫ f conj(g)` without diagnostics.
pub fn inner_value(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    f.check_grid(g)?;
    Ok(weighted_sum(&f.grid.weights, |k| f.values[k] * g.values[k].conj()))
}

/// `∫ f g` (no conjugation).
pub fn bilinear(f: &GridFunction, g: &GridFunction) -> Result<Complex64> {
    f.check_grid(g)?;
    Ok(weighted_sum(&f.grid.weights, |k| f.values[k] * g.values[k]))
}

pub fn inner(f: &GridFunction, g: &GridFunction) -> Result<InnerProductReport> {
    f.check_grid(g)?;
    let grid = &f.grid;
    let prod: Vec<Complex64> = (0..f.len()).map(|k| f.values[k] * g.values[k].conj()).collect();
    let value = weighted_sum(&grid.weights, |k| prod[k]);
    let coarse = half_resolution(grid, &prod);
    Ok(InnerProductReport {
        value,
        quadrature_error_estimate: (value - coarse).norm() / 15.0,
        tail_estimate: amplitude(f) * amplitude(g) * grid.envelope_tail,
    })
}

pub fn norm_sq(f: &GridFunction) -> NormReport {
    let grid = &f.grid;
    let prod: Vec<Complex64> = f.values.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
    let value = weighted_sum(&grid.weights, |k| prod[k]).re;
    let coarse = half_resolution(grid, &prod).re;
    let a = amplitude(f);
    NormReport {
        value,
        quadrature_error_estimate: (value - coarse).abs() / 15.0,
        tail_estimate: a * a * grid.envelope_tail,
    }
}

/// Simpson on every other node; a trailing odd interval uses the
/// quadratic through the last three coarse nodes.
fn half_resolution(grid: &Grid, f: &[Complex64]) -> Complex64 {
    let idx: Vec<usize> = (0..grid.len()).step_by(2).collect();
    let m = idx.len();
    if m < 3 {
        return weighted_sum(&grid.weights, |k| f[k]);
    }
    let x = |i: usize| grid.nodes[idx[i]];
    let v = |i: usize| f[idx[i]];
    let mut acc = Complex64::new(0.0, 0.0);
    let pairs_end = if (m - 1) % 2 == 0 { m - 1 } else { m - 2 };
    for i in (0..pairs_end).step_by(2) {
        let w = crate::slcore::quadratic_weights(x(i), x(i + 1), x(i + 2), x(i), x(i + 2));
        acc += v(i) * w[0] + v(i + 1) * w[1] + v(i + 2) * w[2];
    }
    if pairs_end < m - 1 {
        let i = m - 3;
        let w = crate::slcore::quadratic_weights(x(i), x(i + 1), x(i + 2), x(i + 1), x(i + 2));
        acc += v(i) * w[0] + v(i + 1) * w[1] + v(i + 2) * w[2];
    }
    acc
}

/// `max |f| / env^{1/2}` over the last tenth, where `env = (p(|q|+1))^{-1/2}`
/// is the WKB envelope of `|u|^2`.
fn amplitude(f: &GridFunction) -> f64 {
    let g = &f.grid;
    let j = g.index_from(0.9);
    (j..g.len())
        .map(|k| {
            let env = 1.0 / (g.p[k] * (g.q[k].abs() + 1.0)).sqrt();
            f.values[k].norm() / env.sqrt()
        })
        .fold(0.0, f64::max)
}

/// Samples `h` at the nodes. The quasiderivative track `p h'` comes from
/// seven-point differences and is flagged approximate.
pub fn sample(h: &Expr, grid: &Arc<Grid>) -> Result<GridFunction> {
    let prog = h.compile();
    let mut values = Vec::with_capacity(grid.len());
    for &x in &grid.nodes {
        values.push(Complex64::new(prog.eval(x)?, 0.0));
    }
    let d = stencil::derivative(&grid.nodes, &values, &[]);
    let quasi = d.iter().zip(&grid.p).map(|(d, p)| d * *p).collect();
    let mut out = GridFunction::new(grid.clone(), values, quasi)?;
    out.approximate_quasi = true;
    Ok(out)
}

/// Samples a real function given with its derivative; the quasiderivative
/// track is `p f'` and exact.
pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> (f64, f64)) -> Result<GridFunction> {
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    let mut quasi = Vec::with_capacity(n);
    for (x, p) in grid.nodes.iter().zip(&grid.p) {
        let (v, d) = f(*x);
        values.push(Complex64::new(v, 0.0));
        quasi.push(Complex64::new(p * d, 0.0));
    }
    GridFunction::new(grid.clone(), values, quasi)
}

/// `exp(-1/(1-s^2))` with `s = (x-c)/r`, and its derivative: a smooth bump
/// supported in `(c-r, c+r)`.
pub fn bump(c: f64, r: f64) -> impl Fn(f64) -> (f64, f64) {
    move |x| {
        let s = (x - c) / r;
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let d = 1.0 - s * s;
        let v = (-1.0 / d).exp();
        (v, v * (-2.0 * s / (d * d)) / r)
    }
}

/// `F(x_k) = ∫_0^{x_k} f g` and `G(x_k) = ∫_{x_k}^{X_max} f g` (bilinear).
/// Both are built from the same per-interval contributions, so
/// `F + G` is the same total at every node.
pub fn cumulative_pair(f: &GridFunction, g: &GridFunction) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    f.check_grid(g)?;
    let prod: Vec<Complex64> = (0..f.len()).map(|k| f.values[k] * g.values[k]).collect();
    Ok(cumulative_pair_raw(&f.grid, &prod))
}

pub(crate) fn cumulative_pair_raw(grid: &Grid, prod: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut contrib = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let (b, w) = grid.interval(k);
        contrib.push(prod[b] * w[0] + prod[b + 1] * w[1] + prod[b + 2] * w[2]);
    }
    let mut big_f = vec![zero; n];
    for k in 0..n - 1 {
        big_f[k + 1] = big_f[k] + contrib[k];
    }
    let mut big_g = vec![zero; n];
    for k in (0..n - 1).rev() {
        big_g[k] = big_g[k + 1] + contrib[k];
    }
    (big_f, big_g)
}
