use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::l2grid::{bilinear, cumulative_pair};
use crate::quasires::{apply_quasiresolvent, cutoff_solution, Cutoff};
use crate::slcore::{wronskian_at, wronskian_limit, GridFunction, SolutionPair};

use super::{Extension, LcProblem, TParam};

/// `A = (z-ζ)⟨θ_z,θ_ζ⟩`, `B = 1-(z-ζ)⟨φ_z,θ_ζ⟩`, `C = 1+(z-ζ)⟨θ_z,φ_ζ⟩`,
/// `D = (z-ζ)⟨φ_z,φ_ζ⟩`, by quadrature, with the same four numbers from
/// Wronskians at `X`: `A = -{θ_z,θ_ζ}`, `B = {φ_z,θ_ζ}`, `C = -{θ_z,φ_ζ}`,
/// `D = -{φ_z,φ_ζ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NevanlinnaData {
    pub z: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    /// `[A, B, C, D]` from the Wronskian route.
    pub wronskian_route: [Complex64; 4],
    /// `|quadrature - Wronskian|` per field.
    pub cross_check_residuals: [f64; 4],
    /// Largest variation of the four Wronskians over the last tenth.
    pub trend: f64,
}

impl NevanlinnaData {
    pub fn fields(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn max_cross_check(&self) -> f64 {
        self.cross_check_residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub(super) fn data_from(sol: &SolutionPair, anchor: &SolutionPair, zeta: f64) -> Result<NevanlinnaData> {
    let z = sol.z;
    let s = z - zeta;
    // phi_zeta, theta_zeta are real, so these bilinear forms are the inner
    // products ⟨., phi_zeta⟩ and ⟨., theta_zeta⟩.
    let a = s * bilinear(&sol.theta, &anchor.theta)?;
    let b = 1.0 - s * bilinear(&sol.phi, &anchor.theta)?;
    let c = 1.0 + s * bilinear(&sol.theta, &anchor.phi)?;
    let d = s * bilinear(&sol.phi, &anchor.phi)?;
    let (wa, ta) = wronskian_limit(&sol.theta, &anchor.theta)?;
    let (wb, tb) = wronskian_limit(&sol.phi, &anchor.theta)?;
    let (wc, tc) = wronskian_limit(&sol.theta, &anchor.phi)?;
    let (wd, td) = wronskian_limit(&sol.phi, &anchor.phi)?;
    let route = [-wa, wb, -wc, -wd];
    let quad = [a, b, c, d];
    let mut res = [0.0; 4];
    for i in 0..4 {
        res[i] = (quad[i] - route[i]).norm();
    }
    Ok(NevanlinnaData {
        z,
        a,
        b,
        c,
        d,
        wronskian_route: route,
        cross_check_residuals: res,
        trend: ta.max(tb).max(tc).max(td),
    })
}

pub fn nevanlinna_data(lc: &LcProblem, ext: &Extension, z: Complex64) -> Result<NevanlinnaData> {
    let sol = lc.solutions(z)?;
    let anchor = lc.anchor(ext)?;
    data_from(&sol, &anchor, ext.zeta)
}

/// `gamma_t = (A + C t)/(B - D t)`, `gamma_∞ = -C/D`, refusing numerically
/// vanishing denominators.
pub fn gamma_from(data: &NevanlinnaData, t: TParam) -> Result<Complex64> {
    let (num, den, scale) = match t {
        TParam::Finite(t) => (
            data.a + data.c * t,
            data.b - data.d * t,
            data.a.norm() + data.c.norm() * t.abs() + 1.0,
        ),
        TParam::Infinite => (-data.c, data.d, data.c.norm() + 1.0),
    };
    if den.norm() < 1e-12 * scale {
        return Err(Error::NearEigenvalue {
            z: data.z,
            denominator: den.norm(),
        });
    }
    Ok(num / den)
}

pub fn gamma(lc: &LcProblem, ext: &Extension, z: Complex64) -> Result<Complex64> {
    gamma_from(&nevanlinna_data(lc, ext, z)?, ext.t)
}

/// `gamma_t(z)` from boundary forms against the cut-off basis, with no
/// Wronskian at `X` involved: `u = gamma phi_z + theta~_z` has
/// `alpha_2 = ⟨A u, phi_ζ⟩ - ⟨u, A phi_ζ⟩` and
/// `-alpha_1 = ⟨A u, theta~_ζ⟩ - ⟨u, A theta~_ζ⟩`, where
/// `A u = z u + psi_z`, `A phi_ζ = ζ phi_ζ`, `A theta~_ζ = ζ theta~_ζ + psi_ζ`.
/// The condition `alpha_1 = t alpha_2` (or `alpha_2 = 0`) is linear in
/// gamma. Changing the cutoff interval must not change the result.
pub fn gamma_via_cutoff(lc: &LcProblem, ext: &Extension, z: Complex64, cutoff: &Cutoff) -> Result<Complex64> {
    let prob = lc.problem();
    let sol = lc.solutions(z)?;
    let anchor = lc.anchor(ext)?;
    let cz = cutoff_solution(prob, &sol, cutoff)?;
    let cs = cutoff_solution(prob, &anchor, cutoff)?;
    let s = z - ext.zeta;
    let (phi, tt, psi) = (&sol.phi, &cz.theta_tilde, &cz.psi);
    let (phi0, tt0, psi0) = (&anchor.phi, &cs.theta_tilde, &cs.psi);
    // Anchor functions are real, so bilinear = inner product.
    // alpha_2(gamma) = gamma * p2 + q2
    let p2 = s * bilinear(phi, phi0)?;
    let q2 = s * bilinear(tt, phi0)? + bilinear(psi, phi0)?;
    // -alpha_1(gamma) = gamma * p1 + q1
    let p1 = s * bilinear(phi, tt0)? - bilinear(phi, psi0)?;
    let q1 = s * bilinear(tt, tt0)? + bilinear(psi, tt0)? - bilinear(tt, psi0)?;
    let (num, den) = match ext.t {
        // -alpha_1 = -t alpha_2  =>  gamma (p1 + t p2) = -(q1 + t q2)
        TParam::Finite(t) => (-(q1 + q2 * t), p1 + p2 * t),
        TParam::Infinite => (-q2, p2),
    };
    if den.norm() < 1e-12 * (num.norm() + 1.0) {
        return Err(Error::NearEigenvalue {
            z,
            denominator: den.norm(),
        });
    }
    Ok(num / den)
}

/// `R_t(z) h = gamma_t(z) ⟨h, phi_{conj z}⟩ phi_z + R(z) h`, where
/// `⟨h, phi_{conj z}⟩ = ∫ h phi_z`.
pub fn apply_resolvent(lc: &LcProblem, ext: &Extension, z: Complex64, h: &GridFunction) -> Result<GridFunction> {
    let sol = lc.solutions(z)?;
    let g = gamma(lc, ext, z)?;
    resolvent_with(&sol, g, h)
}

pub(super) fn resolvent_with(sol: &SolutionPair, g: Complex64, h: &GridFunction) -> Result<GridFunction> {
    let r = apply_quasiresolvent(sol, h)?;
    let coef = g * bilinear(h, &sol.phi)?;
    GridFunction::lincomb(&[(Complex64::new(1.0, 0.0), &r), (coef, &sol.phi)])
}

/// `f_z = theta_z + gamma_t(z) phi_z`, the solution obeying the boundary
/// condition of `A_t` at infinity.
pub fn defect_solution(lc: &LcProblem, ext: &Extension, z: Complex64) -> Result<GridFunction> {
    let sol = lc.solutions(z)?;
    Ok(sol.combine(gamma(lc, ext, z)?))
}

/// Resolvent from the kernel `(f(x) ∫_0^x phi h + phi(x) ∫_x^X f h) / {phi, f}`
/// built on the defect solution `f`.
pub fn resolvent_via_defect(lc: &LcProblem, ext: &Extension, z: Complex64, h: &GridFunction) -> Result<GridFunction> {
    let sol = lc.solutions(z)?;
    let f = defect_solution(lc, ext, z)?;
    let w = wronskian_at(&sol.phi, &f, 0);
    let (big_f, _) = cumulative_pair(&sol.phi, h)?;
    let (_, big_g) = cumulative_pair(&f, h)?;
    let n = h.len();
    let values = (0..n)
        .map(|k| (f.values[k] * big_f[k] + sol.phi.values[k] * big_g[k]) / w)
        .collect();
    let quasi = (0..n)
        .map(|k| (f.quasi[k] * big_f[k] + sol.phi.quasi[k] * big_g[k]) / w)
        .collect();
    GridFunction::new(h.grid.clone(), values, quasi)
}
