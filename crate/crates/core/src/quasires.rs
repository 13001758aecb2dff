//! Cut-off solutions and the quasiresolvent
//! `(R(z)h)(x) = theta_z(x) ∫_0^x phi_z h + phi_z(x) ∫_x^X theta_z h`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::l2grid::{self, cumulative_pair_raw};
use crate::slcore::{wronskian_limit, Grid, GridFunction, Problem, SolutionPair};
use crate::stencil;

/// Quintic smoothstep `omega`: 0 on `[0, a]`, 1 on `[b, ∞)`, C² overall.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub a: f64,
    pub b: f64,
}

impl Cutoff {
    /// Default interval `[x1/4, 3 x1/4]` with `x1 = min(2, X/4)`.
    pub fn default_for(x_max: f64) -> Cutoff {
        let x1 = 2.0f64.min(x_max / 4.0);
        Cutoff {
            a: 0.25 * x1,
            b: 0.75 * x1,
        }
    }

    fn tau(&self, x: f64) -> f64 {
        ((x - self.a) / (self.b - self.a)).clamp(0.0, 1.0)
    }

    pub fn omega(&self, x: f64) -> f64 {
        let t = self.tau(x);
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }

    pub fn d_omega(&self, x: f64) -> f64 {
        let t = self.tau(x);
        30.0 * t * t * (1.0 - t) * (1.0 - t) / (self.b - self.a)
    }

    pub fn d2_omega(&self, x: f64) -> f64 {
        let t = self.tau(x);
        let w = self.b - self.a;
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (w * w)
    }

    pub fn breaks(&self) -> [f64; 2] {
        [self.a, self.b]
    }
}

/// Validated cutoff with `0 < a < b <= X/2`.
pub fn make_cutoff(a: f64, b: f64, x_max: f64) -> Result<Cutoff> {
    if !(a.is_finite() && b.is_finite() && 0.0 < a && a < b && b <= 0.5 * x_max) {
        return Err(Error::InvalidCutoff {
            a,
            b,
            limit: 0.5 * x_max,
        });
    }
    Ok(Cutoff { a, b })
}

/// `theta~ = omega theta_z` and `psi_z = (A - z) theta~`.
#[derive(Debug, Clone)]
pub struct CutoffSolution {
    pub z: Complex64,
    pub cutoff: Cutoff,
    pub theta_tilde: GridFunction,
    pub psi: GridFunction,
}

fn node_index(grid: &Grid, x: f64) -> Option<usize> {
    grid.nodes.binary_search_by(|n| n.total_cmp(&x)).ok()
}

/// Node indices of the cutoff endpoints; both must be grid nodes that start
/// a Simpson pair.
pub fn cutoff_nodes(grid: &Grid, cutoff: &Cutoff) -> Result<(usize, usize)> {
    match (node_index(grid, cutoff.a), node_index(grid, cutoff.b)) {
        (Some(i), Some(j)) if i % 2 == 0 && j % 2 == 0 => Ok((i, j)),
        _ => Err(Error::InvalidArgument(format!(
            "cutoff endpoints {} and {} are not grid breakpoints; build the grid with them",
            cutoff.a, cutoff.b
        ))),
    }
}

/// `p'(x)` by a five-point central difference of the coefficient.
fn dp(prob: &Problem, x: f64, delta: f64) -> Result<f64> {
    let f = |s: f64| prob.p_at(x + s * delta);
    Ok((f(-2.0)? - 8.0 * f(-1.0)? + 8.0 * f(1.0)? - f(2.0)?) / (12.0 * delta))
}

/// Builds `theta~_z` and `psi_z = -2 omega' (p theta_z') - (p omega')' theta_z`.
/// Only `p` is differentiated (numerically), never the user's expressions
/// symbolically; `psi` is exactly zero outside `[a, b]`.
pub fn cutoff_solution(prob: &Problem, sol: &SolutionPair, cutoff: &Cutoff) -> Result<CutoffSolution> {
    let grid = sol.grid().clone();
    let (ia, ib) = cutoff_nodes(&grid, cutoff)?;
    let n = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut tv = vec![zero; n];
    let mut tq = vec![zero; n];
    let mut psi = vec![zero; n];
    let delta = 1e-3 * (cutoff.b - cutoff.a);
    for k in ia..n {
        let x = grid.nodes[k];
        let (th, thq) = (sol.theta.values[k], sol.theta.quasi[k]);
        if k >= ib {
            tv[k] = th;
            tq[k] = thq;
            continue;
        }
        let p = grid.p[k];
        let (w, w1, w2) = (cutoff.omega(x), cutoff.d_omega(x), cutoff.d2_omega(x));
        tv[k] = th * w;
        tq[k] = th * (p * w1) + thq * w;
        let d_pw1 = dp(prob, x, delta)? * w1 + p * w2;
        psi[k] = -(thq * (2.0 * w1)) - th * d_pw1;
    }
    psi[ia] = zero;
    let theta_tilde = GridFunction::new(grid.clone(), tv, tq)?;
    let d = stencil::derivative(&grid.nodes, &psi, &[ia, ib]);
    let pq = d.iter().zip(&grid.p).map(|(d, p)| d * *p).collect();
    let mut psi = GridFunction::new(grid, psi, pq)?;
    psi.approximate_quasi = true;
    Ok(CutoffSolution {
        z: sol.z,
        cutoff: *cutoff,
        theta_tilde,
        psi,
    })
}

/// `R(z) h` with its quasiderivative track
/// `theta_z' ∫_0^x phi_z h + phi_z' ∫_x^X theta_z h` (bilinear integrals).
pub fn apply_quasiresolvent(sol: &SolutionPair, h: &GridFunction) -> Result<GridFunction> {
    sol.phi.check_grid(h)?;
    let n = h.len();
    let pf: Vec<Complex64> = (0..n).map(|k| sol.phi.values[k] * h.values[k]).collect();
    let tf: Vec<Complex64> = (0..n).map(|k| sol.theta.values[k] * h.values[k]).collect();
    let (big_f, _) = cumulative_pair_raw(&h.grid, &pf);
    let (_, big_g) = cumulative_pair_raw(&h.grid, &tf);
    let values = (0..n)
        .map(|k| sol.theta.values[k] * big_f[k] + sol.phi.values[k] * big_g[k])
        .collect();
    let quasi = (0..n)
        .map(|k| sol.theta.quasi[k] * big_f[k] + sol.phi.quasi[k] * big_g[k])
        .collect();
    GridFunction::new(h.grid.clone(), values, quasi)
}

/// `(A - z) u = -(p u')' + (q - z) u` with `(p u')'` from seven-point
/// differences of the quasiderivative track. Stencils do not cross the
/// node indices in `breaks`.
pub fn apply_operator(u: &GridFunction, z: Complex64, breaks: &[usize]) -> Vec<Complex64> {
    let g = &u.grid;
    let d = stencil::derivative(&g.nodes, &u.quasi, breaks);
    (0..u.len()).map(|k| -d[k] + u.values[k] * (g.q[k] - z)).collect()
}

/// `‖(A - z) u - h‖ / ‖h‖` in the grid L² norm.
pub fn relative_residual(u: &GridFunction, h: &GridFunction, z: Complex64, breaks: &[usize]) -> Result<f64> {
    u.check_grid(h)?;
    let r = apply_operator(u, z, breaks);
    let w = &u.grid.weights;
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..u.len() {
        num += w[k] * (r[k] - h.values[k]).norm_sqr();
        den += w[k] * h.values[k].norm_sqr();
    }
    Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsReport {
    pub norm: f64,
    /// Bound on the part of `∫∫|K|^2` lost beyond `X_max`.
    pub tail_estimate: f64,
}

/// Hilbert–Schmidt norm of `R(z)` on `[0, X]`:
/// `∫∫|K|^2 = ∫ |theta|^2 ∫_0^x |phi|^2 + |phi|^2 ∫_x^X |theta|^2`.
pub fn quasiresolvent_hs_norm(sol: &SolutionPair) -> HsReport {
    let grid = sol.grid();
    let n = grid.len();
    let c = |v: f64| Complex64::new(v, 0.0);
    let ph: Vec<Complex64> = sol.phi.values.iter().map(|v| c(v.norm_sqr())).collect();
    let th: Vec<Complex64> = sol.theta.values.iter().map(|v| c(v.norm_sqr())).collect();
    let (cum_phi, _) = cumulative_pair_raw(grid, &ph);
    let (_, suf_theta) = cumulative_pair_raw(grid, &th);
    let integrand: Vec<Complex64> = (0..n).map(|k| th[k] * cum_phi[k] + ph[k] * suf_theta[k]).collect();
    let total: f64 = grid.weights.iter().zip(&integrand).map(|(w, v)| w * v.re).sum();
    let np = l2grid::norm_sq(&sol.phi);
    let nt = l2grid::norm_sq(&sol.theta);
    // Beyond X: |K|^2 <= (|theta|^2 + |phi|^2)(x) * ‖phi‖^2 or ‖theta‖^2 terms.
    let tail =
        2.0 * (nt.tail_estimate * (np.value + np.tail_estimate) + np.tail_estimate * (nt.value + nt.tail_estimate));
    HsReport {
        norm: total.sqrt(),
        tail_estimate: tail,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipReport {
    /// `{u, phi_0}` at `X_max` and its trend over the last tenth.
    pub against_phi: (Complex64, f64),
    /// `{u, theta_0}` at `X_max` and its trend.
    pub against_theta: (Complex64, f64),
    pub tolerance: f64,
    pub pass: bool,
}

/// Necessary condition for `u ∈ D(A_min)`: both boundary forms at `X`
/// (against `phi_0` and `theta_0`) vanish. The trends are reported but not
/// judged: on a truncated interval the forms still drift at the rate of the
/// remaining L² tail.
pub fn amin_membership_proxy(u: &GridFunction, anchor: &SolutionPair, tolerance: f64) -> Result<MembershipReport> {
    let a = wronskian_limit(u, &anchor.phi)?;
    let b = wronskian_limit(u, &anchor.theta)?;
    let pass = a.0.norm() <= tolerance && b.0.norm() <= tolerance;
    Ok(MembershipReport {
        against_phi: a,
        against_theta: b,
        tolerance,
        pass,
    })
}
