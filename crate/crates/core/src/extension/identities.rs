//! Identities relating the standard solutions at `z` to the anchor pair,
//! and the boundary form on `D(A_max)`. These are checks, not solvers.

use num_complex::Complex64;

use crate::error::Result;
use crate::l2grid::{bilinear, inner_value};
use crate::quasires::{
    amin_membership_proxy, apply_operator, apply_quasiresolvent, cutoff_nodes, cutoff_solution, MembershipReport,
};
use crate::slcore::GridFunction;

use super::{Extension, LcProblem};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn sup_diff(a: &GridFunction, b: &GridFunction) -> Result<f64> {
    Ok(a.sub(b)?.sup_norm())
}

/// Sup-node relative residuals of
/// `phi_z - s R(ζ) phi_z = (1 - s⟨phi_z, theta_ζ⟩) phi_ζ` and
/// `theta_z - s R(ζ) theta_z = -s⟨theta_z, theta_ζ⟩ phi_ζ + theta_ζ`,
/// with `s = z - ζ`.
pub fn solution_identity_residuals(lc: &LcProblem, ext: &Extension, z: Complex64) -> Result<[f64; 2]> {
    let sol = lc.solutions(z)?;
    let anchor = lc.anchor(ext)?;
    let s = z - ext.zeta;

    let r_phi = apply_quasiresolvent(&anchor, &sol.phi)?;
    let lhs = GridFunction::lincomb(&[(one(), &sol.phi), (-s, &r_phi)])?;
    let rhs = anchor.phi.scale(1.0 - s * bilinear(&sol.phi, &anchor.theta)?);
    let e_phi = sup_diff(&lhs, &rhs)? / sol.phi.sup_norm();

    let r_theta = apply_quasiresolvent(&anchor, &sol.theta)?;
    let lhs = GridFunction::lincomb(&[(one(), &sol.theta), (-s, &r_theta)])?;
    let c = -s * bilinear(&sol.theta, &anchor.theta)?;
    let rhs = GridFunction::lincomb(&[(c, &anchor.phi), (one(), &anchor.theta)])?;
    let e_theta = sup_diff(&lhs, &rhs)? / sol.theta.sup_norm();

    Ok([e_phi, e_theta])
}

/// Membership proxies for
/// `phi_z - (1 - s⟨phi_z,theta_ζ⟩) phi_ζ - s⟨phi_z,phi_ζ⟩ theta~_ζ` and
/// `theta~_z + s⟨theta_z,theta_ζ⟩ phi_ζ - (1 + s⟨theta_z,phi_ζ⟩) theta~_ζ`,
/// both of which lie in `D(A_min)`.
pub fn defect_membership(
    lc: &LcProblem,
    ext: &Extension,
    z: Complex64,
    tolerance: f64,
) -> Result<[MembershipReport; 2]> {
    let prob = lc.problem();
    let cutoff = lc.cutoff();
    let sol = lc.solutions(z)?;
    let anchor = lc.anchor(ext)?;
    let cz = cutoff_solution(prob, &sol, &cutoff)?;
    let ca = cutoff_solution(prob, &anchor, &cutoff)?;
    let s = z - ext.zeta;

    let u = GridFunction::lincomb(&[
        (one(), &sol.phi),
        (-(1.0 - s * bilinear(&sol.phi, &anchor.theta)?), &anchor.phi),
        (-s * bilinear(&sol.phi, &anchor.phi)?, &ca.theta_tilde),
    ])?;
    let v = GridFunction::lincomb(&[
        (one(), &cz.theta_tilde),
        (s * bilinear(&sol.theta, &anchor.theta)?, &anchor.phi),
        (-(1.0 + s * bilinear(&sol.theta, &anchor.phi)?), &ca.theta_tilde),
    ])?;
    Ok([
        amin_membership_proxy(&u, &anchor, tolerance)?,
        amin_membership_proxy(&v, &anchor, tolerance)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFormReport {
    /// `⟨A u, v⟩ - ⟨u, A v⟩` with `A` applied by finite differences.
    pub lhs: Complex64,
    /// `alpha_2 conj(beta_1) - alpha_1 conj(beta_2)`.
    pub rhs: Complex64,
    pub error: f64,
}

/// Boundary form of `u = u_0 + alpha_1 phi_ζ + alpha_2 theta~_ζ` and
/// `v = v_0 + beta_1 phi_ζ + beta_2 theta~_ζ`, where `u_0`, `v_0` are
/// compactly supported in `(0, X)`.
pub fn boundary_form(
    lc: &LcProblem,
    ext: &Extension,
    alpha: [Complex64; 2],
    beta: [Complex64; 2],
    u0: &GridFunction,
    v0: &GridFunction,
) -> Result<BoundaryFormReport> {
    let cutoff = lc.cutoff();
    let anchor = lc.anchor(ext)?;
    let ca = cutoff_solution(lc.problem(), &anchor, &cutoff)?;
    let (ia, ib) = cutoff_nodes(u0.grid.as_ref(), &cutoff)?;
    let breaks = [ia, ib];
    let build = |c: [Complex64; 2], f0: &GridFunction| {
        GridFunction::lincomb(&[(one(), f0), (c[0], &anchor.phi), (c[1], &ca.theta_tilde)])
    };
    let u = build(alpha, u0)?;
    let v = build(beta, v0)?;
    let zero = Complex64::new(0.0, 0.0);
    let au = GridFunction::new(u.grid.clone(), apply_operator(&u, zero, &breaks), u.quasi.clone())?;
    let av = GridFunction::new(v.grid.clone(), apply_operator(&v, zero, &breaks), v.quasi.clone())?;
    let lhs = inner_value(&au, &v)? - inner_value(&u, &av)?;
    let rhs = alpha[1] * beta[0].conj() - alpha[0] * beta[1].conj();
    Ok(BoundaryFormReport {
        lhs,
        rhs,
        error: (lhs - rhs).norm(),
    })
}
