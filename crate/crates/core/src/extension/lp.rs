use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::slcore::{classify_endpoint, endpoint_solutions, EndpointClass, GridFunction, Problem, Workspace};

use super::nevanlinna::resolvent_with;

/// Successive estimates `-theta_z(X)/phi_z(X)` of the Weyl function.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylReport {
    pub z: Complex64,
    pub w: Complex64,
    pub x_values: Vec<f64>,
    pub estimates: Vec<Complex64>,
    /// Last change between consecutive estimates.
    pub last_change: f64,
    pub converged: bool,
}

const X_START: f64 = 4.0;
const X_LIMIT: f64 = 4096.0;
const REL_TOL: f64 = 1e-10;

/// `w(z)` with `theta_z + w(z) phi_z` square integrable, from the ratio at
/// `X = 4, 8, 16, ...` until two estimates agree to `1e-10` relative.
/// Stops unconverged at `X = 4096` or when the solutions overflow.
pub fn weyl_function_lp(prob: &Problem, z: Complex64) -> Result<WeylReport> {
    if z.im == 0.0 {
        return Err(Error::InvalidArgument("the Weyl function needs Im z != 0".into()));
    }
    if classify_endpoint(prob).class != EndpointClass::LimitPoint {
        return Err(Error::LpRequired);
    }
    let mut xs = Vec::new();
    let mut x = X_START;
    while x <= X_LIMIT {
        xs.push(x);
        x *= 2.0;
    }
    // One pass through all checkpoints; a failure part way keeps what was reached.
    let vals = match endpoint_solutions(prob, z, &xs) {
        Ok(v) => v,
        Err(_) => {
            let mut v = Vec::new();
            for &x in &xs {
                match endpoint_solutions(prob, z, &[x]) {
                    Ok(mut r) => v.push(r.remove(0)),
                    Err(_) => break,
                }
            }
            v
        }
    };
    let mut report = WeylReport {
        z,
        w: Complex64::new(f64::NAN, f64::NAN),
        x_values: Vec::new(),
        estimates: Vec::new(),
        last_change: f64::INFINITY,
        converged: false,
    };
    for (x, (phi, theta)) in xs.iter().zip(vals) {
        let w = -theta[0] / phi[0];
        if !(w.re.is_finite() && w.im.is_finite()) {
            break;
        }
        if let Some(prev) = report.estimates.last() {
            report.last_change = (w - prev).norm();
        }
        report.x_values.push(*x);
        report.estimates.push(w);
        report.w = w;
        if report.last_change <= REL_TOL * w.norm().max(1.0) {
            report.converged = true;
            break;
        }
    }
    Ok(report)
}

/// `w(z) ⟨h, phi_{conj z}⟩ phi_z + R(z) h` on the truncated grid.
pub fn apply_lp_resolvent(ws: &Workspace, z: Complex64, w: Complex64, h: &GridFunction) -> Result<GridFunction> {
    let sol = ws.solutions(z)?;
    resolvent_with(&sol, w, h)
}
