use std::fmt;

use crate::coeffexpr::{Expr, Program};
use crate::error::{Error, Result};
use crate::ode::Tolerances;

/// Boundary parameter at the origin: `u'(0) = alpha u(0)`, or `u(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Finite(f64),
    Infinite,
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Finite(a) => write!(f, "{a:?}"),
            Alpha::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XMax {
    Fixed(f64),
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: Tolerances,
    /// Phase advance allowed between neighbouring grid nodes.
    pub phase_step: f64,
    pub max_nodes: usize,
    /// Largest total oscillation phase (radians) a run may cover.
    pub phase_budget: f64,
    pub wronskian_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: Tolerances::default(),
            phase_step: 0.02,
            max_nodes: 4_000_000,
            phase_budget: 1e7,
            wronskian_tol: 1e-8,
        }
    }
}

/// The operator `-(p u')' + q u` on the half-line with its boundary data.
#[derive(Debug, Clone)]
pub struct Problem {
    p_expr: Expr,
    q_expr: Expr,
    p: Program,
    q: Program,
    pub alpha: Alpha,
    pub x_max: XMax,
    pub tail_eps: f64,
    pub settings: SolverSettings,
}

impl Problem {
    pub fn new(p: &str, q: &str, alpha: Alpha, x_max: XMax, tail_eps: f64) -> Result<Problem> {
        Problem::from_exprs(p.parse()?, q.parse()?, alpha, x_max, tail_eps)
    }

    pub fn from_exprs(p_expr: Expr, q_expr: Expr, alpha: Alpha, x_max: XMax, tail_eps: f64) -> Result<Problem> {
        if let Alpha::Finite(a) = alpha {
            if !a.is_finite() {
                return Err(Error::InvalidArgument(format!("alpha must be real or inf, got {a}")));
            }
        }
        if let XMax::Fixed(x) = x_max {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidArgument(format!("x_max must be positive, got {x}")));
            }
        }
        if !(tail_eps.is_finite() && tail_eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tail_eps must be positive, got {tail_eps}"
            )));
        }
        let p = p_expr.compile();
        let q = q_expr.compile();
        let prob = Problem {
            p_expr,
            q_expr,
            p,
            q,
            alpha,
            x_max,
            tail_eps,
            settings: SolverSettings::default(),
        };
        let p0 = prob.p_at(0.0)?;
        if p0 <= 0.0 {
            return Err(Error::NonPositiveP { x: 0.0, value: p0 });
        }
        prob.q_at(0.0)?;
        Ok(prob)
    }

    pub fn with_x_max(mut self, x: f64) -> Result<Problem> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidArgument(format!("x_max must be positive, got {x}")));
        }
        self.x_max = XMax::Fixed(x);
        Ok(self)
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Problem {
        self.settings = settings;
        self
    }

    pub fn p_expr(&self) -> &Expr {
        &self.p_expr
    }

    pub fn q_expr(&self) -> &Expr {
        &self.q_expr
    }

    pub fn p_at(&self, x: f64) -> Result<f64> {
        Ok(self.p.eval(x)?)
    }

    pub fn q_at(&self, x: f64) -> Result<f64> {
        Ok(self.q.eval(x)?)
    }

    /// `(1/p, q)` for the integrator's right-hand side; NaN on evaluation
    /// failure so the integrator reports a non-finite state.
    #[inline]
    pub(crate) fn rhs_coeffs(&self, x: f64) -> (f64, f64) {
        let p = self.p.eval(x).unwrap_or(f64::NAN);
        let q = self.q.eval(x).unwrap_or(f64::NAN);
        (1.0 / p, q)
    }

    pub fn x_max_value(&self) -> Result<f64> {
        match self.x_max {
            XMax::Fixed(x) => Ok(x),
            XMax::Auto => Err(Error::XMaxUnresolved),
        }
    }

    /// Initial data `(u(0), p(0)u'(0))` of the two standard solutions.
    pub fn initial_data(&self) -> ([f64; 2], [f64; 2]) {
        let p0 = self.p_at(0.0).expect("p(0) validated at construction");
        match self.alpha {
            // phi(0)=1, phi'(0)=alpha; theta(0)=0, theta'(0)=-1/p(0)
            Alpha::Finite(a) => ([1.0, p0 * a], [0.0, -1.0]),
            // phi(0)=0, phi'(0)=1; theta(0)=1/p(0), theta'(0)=0
            Alpha::Infinite => ([0.0, p0], [1.0 / p0, 0.0]),
        }
    }

    /// Envelope `(p |q - z|)^(-1/2)` of oscillatory solutions at large x.
    pub fn envelope(&self, x: f64, z_abs: f64) -> f64 {
        match (self.p_at(x), self.q_at(x)) {
            (Ok(p), Ok(q)) => 1.0 / (p * (q.abs() + z_abs).max(f64::MIN_POSITIVE)).sqrt(),
            _ => f64::NAN,
        }
    }

    /// Local wavenumber bound used for grid density.
    pub fn density(&self, x: f64, z_ref_bound: f64) -> Result<f64> {
        let p = self.p_at(x)?;
        if p <= 0.0 {
            return Err(Error::NonPositiveP { x, value: p });
        }
        let q = self.q_at(x)?;
        Ok(((1.0 + q.abs() + z_ref_bound) / p).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_data_has_unit_wronskian() {
        for alpha in [Alpha::Finite(0.0), Alpha::Finite(-2.5), Alpha::Infinite] {
            let prob = Problem::new("2 + x", "0", alpha, XMax::Fixed(1.0), 1e-4).unwrap();
            let (phi, theta) = prob.initial_data();
            // {u, v} = (p u') v - u (p v')
            let w = phi[1] * theta[0] - phi[0] * theta[1];
            assert!((w - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_nonpositive_p_at_origin() {
        assert!(matches!(
            Problem::new("x - 1", "0", Alpha::Infinite, XMax::Fixed(2.0), 1e-4),
            Err(Error::NonPositiveP { .. })
        ));
    }
}
