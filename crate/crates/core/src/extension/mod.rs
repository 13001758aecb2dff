//! Self-adjoint extensions `A_t` of an LC operator: Nevanlinna-type data,
//! `gamma_t(z)`, resolvents, eigenvalues and spectral measures, plus the
//! Weyl function in the LP case.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quasires::{make_cutoff, Cutoff};
use crate::slcore::{
    classify_endpoint, truncation_point, Classification, EndpointClass, Problem, SolutionPair, Workspace, XMax,
};

mod identities;
mod lp;
mod nevanlinna;
mod spectrum;

pub use identities::{boundary_form, defect_membership, solution_identity_residuals, BoundaryFormReport};
pub use lp::{apply_lp_resolvent, weyl_function_lp, WeylReport};
pub use nevanlinna::{
    apply_resolvent, defect_solution, gamma, gamma_from, gamma_via_cutoff, nevanlinna_data, resolvent_via_defect,
    NevanlinnaData,
};
pub use spectrum::{
    eigenvalues, nevanlinna_check, parameter_through, secular, secular_value, spectral_measure, CheckStatus, Eigenpair,
    EigenvalueList, NevanlinnaReport, ScanOptions, SecularReport, SpectralEntry, SpectralMeasure,
};

/// Extension parameter: `D(A_t) = D(A_min) + span{t phi_0 + theta~_0}`, or
/// `span{phi_0}` for `t = ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TParam {
    Finite(f64),
    Infinite,
}

impl fmt::Display for TParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TParam::Finite(t) => write!(f, "{t:?}"),
            TParam::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for TParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<TParam> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(TParam::Infinite);
        }
        match s.parse::<f64>() {
            Ok(t) if t.is_finite() => Ok(TParam::Finite(t)),
            _ => Err(Error::InvalidArgument(format!(
                "t must be a real number or 'inf', got '{s}'"
            ))),
        }
    }
}

/// An extension `A_t`, anchored at the real point `zeta` (the solutions
/// `phi_zeta`, `theta_zeta` play the role of `phi_0`, `theta_0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extension {
    pub t: TParam,
    pub zeta: f64,
}

impl Extension {
    pub fn new(t: TParam, zeta: f64) -> Result<Extension> {
        if !zeta.is_finite() {
            return Err(Error::InvalidArgument(format!("zeta must be finite, got {zeta}")));
        }
        if let TParam::Finite(t) = t {
            if !t.is_finite() {
                return Err(Error::InvalidArgument("t must be finite or 'inf'".into()));
            }
        }
        Ok(Extension { t, zeta })
    }

    pub fn finite(t: f64) -> Extension {
        Extension {
            t: TParam::Finite(t),
            zeta: 0.0,
        }
    }

    pub fn infinite() -> Extension {
        Extension {
            t: TParam::Infinite,
            zeta: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcOptions {
    /// Bound on `|z|` (and on `|lambda|` in eigenvalue windows) for grid
    /// resolution.
    pub z_ref_bound: f64,
    pub cutoff: Option<Cutoff>,
    /// Additional cutoffs whose endpoints must be grid nodes.
    pub extra_cutoffs: Vec<Cutoff>,
    /// Skip the classification pass (the caller vouches for LC).
    pub assume_lc: bool,
}

impl Default for LcOptions {
    fn default() -> Self {
        LcOptions {
            z_ref_bound: 64.0,
            cutoff: None,
            extra_cutoffs: Vec::new(),
            assume_lc: false,
        }
    }
}

/// An LC problem truncated at `X`, with its grid, default cutoff and
/// solution cache.
#[derive(Debug)]
pub struct LcProblem {
    ws: Workspace,
    cutoff: Cutoff,
    classification: Option<Classification>,
}

impl LcProblem {
    pub fn new(prob: Problem, opts: &LcOptions) -> Result<LcProblem> {
        let classification = if opts.assume_lc {
            None
        } else {
            let c = classify_endpoint(&prob);
            if c.class != EndpointClass::LimitCircle {
                return Err(Error::LcRequired);
            }
            Some(c)
        };
        let prob = match prob.x_max {
            XMax::Fixed(_) => prob,
            XMax::Auto => {
                let x = truncation_point(&prob)?;
                prob.with_x_max(x)?
            }
        };
        let x = prob.x_max_value()?;
        let cutoff = match opts.cutoff {
            Some(c) => make_cutoff(c.a, c.b, x)?,
            None => Cutoff::default_for(x),
        };
        let mut breaks = cutoff.breaks().to_vec();
        for c in &opts.extra_cutoffs {
            let c = make_cutoff(c.a, c.b, x)?;
            breaks.extend(c.breaks());
        }
        let ws = Workspace::new(prob, opts.z_ref_bound, &breaks)?;
        Ok(LcProblem {
            ws,
            cutoff,
            classification,
        })
    }

    pub fn workspace(&self) -> &Workspace {
        &self.ws
    }

    pub fn problem(&self) -> &Problem {
        self.ws.problem()
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn classification(&self) -> Option<&Classification> {
        self.classification.as_ref()
    }

    pub fn x_max(&self) -> f64 {
        self.ws.x_max()
    }

    pub fn solutions(&self, z: Complex64) -> Result<Arc<SolutionPair>> {
        self.ws.solutions(z)
    }

    pub fn anchor(&self, ext: &Extension) -> Result<Arc<SolutionPair>> {
        self.ws.solutions(Complex64::new(ext.zeta, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_t() {
        assert_eq!("inf".parse::<TParam>().unwrap(), TParam::Infinite);
        assert_eq!(" -2.5 ".parse::<TParam>().unwrap(), TParam::Finite(-2.5));
        assert!("nan".parse::<TParam>().is_err());
        assert!("x".parse::<TParam>().is_err());
        assert_eq!(TParam::Finite(1.0).to_string(), "1.0");
    }

    #[test]
    fn free_problem_is_rejected() {
        let pr = Problem::new("1", "0", crate::slcore::Alpha::Infinite, XMax::Fixed(5.0), 1e-4).unwrap();
        assert_eq!(LcProblem::new(pr, &LcOptions::default()).err(), Some(Error::LcRequired));
    }
}
