use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::Dop853;

use super::grid::Grid;
use super::gridfn::GridFunction;
use super::problem::Problem;

/// The standard solutions `phi_z`, `theta_z` sampled on a grid.
#[derive(Debug, Clone)]
pub struct SolutionPair {
    pub z: Complex64,
    pub phi: GridFunction,
    pub theta: GridFunction,
    /// `max_k |{phi, theta}(x_k) - 1|`.
    pub wronskian_drift: f64,
    /// `∫|phi|^2` and `∫|theta|^2` over the last tenth of the grid.
    pub tail_norms: [f64; 2],
    prob: Problem,
}

/// Right-hand side of `u' = v/p, v' = (q - z) u` for two complex solutions
/// packed as eight reals `[u1, v1, u2, v2]` (re, im pairs).
pub(crate) fn pair_rhs(prob: &Problem, z: Complex64) -> impl FnMut(f64, &[f64; 8], &mut [f64; 8]) + '_ {
    move |x, y, d| {
        let (ip, q) = prob.rhs_coeffs(x);
        let a = q - z.re;
        let b = z.im;
        for o in [0, 4] {
            let (ur, ui, vr, vi) = (y[o], y[o + 1], y[o + 2], y[o + 3]);
            d[o] = vr * ip;
            d[o + 1] = vi * ip;
            d[o + 2] = a * ur + b * ui;
            d[o + 3] = a * ui - b * ur;
        }
    }
}

pub(crate) fn pack(phi: [Complex64; 2], theta: [Complex64; 2]) -> [f64; 8] {
    [
        phi[0].re,
        phi[0].im,
        phi[1].re,
        phi[1].im,
        theta[0].re,
        theta[0].im,
        theta[1].re,
        theta[1].im,
    ]
}

pub(crate) fn unpack(y: &[f64; 8]) -> ([Complex64; 2], [Complex64; 2]) {
    (
        [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])],
        [Complex64::new(y[4], y[5]), Complex64::new(y[6], y[7])],
    )
}

fn initial_state(prob: &Problem) -> [f64; 8] {
    let (p, t) = prob.initial_data();
    let c = |v: f64| Complex64::new(v, 0.0);
    pack([c(p[0]), c(p[1])], [c(t[0]), c(t[1])])
}

/// Integrates the standard solutions at `z` and samples them on `grid`.
pub fn solve_basis(prob: &Problem, z: Complex64, grid: &Arc<Grid>) -> Result<SolutionPair> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "spectral parameter must be finite, got {z}"
        )));
    }
    if z.norm() > grid.z_ref_bound * (1.0 + 1e-12) + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "|z| = {} exceeds the grid's reference bound {}",
            z.norm(),
            grid.z_ref_bound
        )));
    }
    let n = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut pv = vec![zero; n];
    let mut pq = vec![zero; n];
    let mut tv = vec![zero; n];
    let mut tq = vec![zero; n];
    let mut y = initial_state(prob);
    let mut ode = Dop853::new(prob.settings.tol);
    let mut rhs = pair_rhs(prob, z);
    ode.integrate_dense(&mut rhs, 0.0, &mut y, &grid.nodes, |k, y| {
        let (a, b) = unpack(y);
        pv[k] = a[0];
        pq[k] = a[1];
        tv[k] = b[0];
        tq[k] = b[1];
    })?;
    let phi = GridFunction::new(grid.clone(), pv, pq)?;
    let theta = GridFunction::new(grid.clone(), tv, tq)?;
    let mut drift = 0.0f64;
    for k in 0..n {
        drift = drift.max((wronskian_at(&phi, &theta, k) - 1.0).norm());
    }
    let j = grid.index_from(0.9);
    let sq = |f: &GridFunction| f.values.iter().map(|v| v.norm_sqr()).collect::<Vec<f64>>();
    let tail_norms = [grid.integral_from(j, &sq(&phi)), grid.integral_from(j, &sq(&theta))];
    Ok(SolutionPair {
        z,
        phi,
        theta,
        wronskian_drift: drift,
        tail_norms,
        prob: prob.clone(),
    })
}

/// `([phi, p phi'], [theta, p theta'])` at each point of the increasing
/// list `xs`, without a grid.
pub fn endpoint_solutions(prob: &Problem, z: Complex64, xs: &[f64]) -> Result<Vec<([Complex64; 2], [Complex64; 2])>> {
    if xs.windows(2).any(|w| w[1] < w[0]) || xs.first().is_some_and(|&x| x < 0.0) {
        return Err(Error::InvalidArgument(
            "evaluation points must be increasing and non-negative".into(),
        ));
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut y = initial_state(prob);
    let mut ode = Dop853::new(prob.settings.tol);
    let mut rhs = pair_rhs(prob, z);
    ode.integrate_dense(&mut rhs, 0.0, &mut y, xs, |_, y| out.push(unpack(y)))?;
    Ok(out)
}

impl SolutionPair {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.phi.grid
    }

    pub fn wronskian_ok(&self) -> bool {
        self.wronskian_drift <= self.prob.settings.wronskian_tol
    }

    /// Dense output: `(phi, p phi', theta, p theta')` at any `x` in
    /// `[0, X_max]`, integrated from the nearest node.
    pub fn at(&self, x: f64) -> Result<([Complex64; 2], [Complex64; 2])> {
        let g = self.grid();
        if !(0.0..=g.x_max()).contains(&x) {
            return Err(Error::InvalidArgument(format!("x = {x} outside [0, {}]", g.x_max())));
        }
        let k = g.locate(x);
        let k = if (g.nodes[k + 1] - x) < (x - g.nodes[k]) {
            k + 1
        } else {
            k
        };
        let mut y = pack(
            [self.phi.values[k], self.phi.quasi[k]],
            [self.theta.values[k], self.theta.quasi[k]],
        );
        let mut ode = Dop853::new(self.prob.settings.tol);
        let mut rhs = pair_rhs(&self.prob, self.z);
        ode.integrate(&mut rhs, g.nodes[k], &mut y, x)?;
        Ok(unpack(&y))
    }

    /// `theta + c phi` as a grid function.
    pub fn combine(&self, c: Complex64) -> GridFunction {
        let one = Complex64::new(1.0, 0.0);
        GridFunction::lincomb(&[(one, &self.theta), (c, &self.phi)]).expect("same grid")
    }
}

/// `{u, v}(x_k) = (p u')(x_k) v(x_k) - u(x_k) (p v')(x_k)` at node `k`.
#[inline]
pub fn wronskian_at(u: &GridFunction, v: &GridFunction, k: usize) -> Complex64 {
    u.quasi[k] * v.values[k] - u.values[k] * v.quasi[k]
}

/// `{u, v}(x)`; off-node points use cubic interpolation of both tracks.
pub fn wronskian(u: &GridFunction, v: &GridFunction, x: f64) -> Result<Complex64> {
    u.check_grid(v)?;
    let (uu, uq) = u.interpolate(x);
    let (vu, vq) = v.interpolate(x);
    Ok(uq * vu - uu * vq)
}

/// Wronskian at `X_max` and its largest deviation over the last tenth.
pub fn wronskian_limit(u: &GridFunction, v: &GridFunction) -> Result<(Complex64, f64)> {
    u.check_grid(v)?;
    let n = u.len();
    let value = wronskian_at(u, v, n - 1);
    let j = u.grid.index_from(0.9);
    let trend = (j..n)
        .map(|k| (wronskian_at(u, v, k) - value).norm())
        .fold(0.0, f64::max);
    Ok((value, trend))
}
