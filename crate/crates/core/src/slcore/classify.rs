use std::fmt;

use crate::error::{Error, Result};
use crate::ode::Dop853;

use super::grid::{envelope_tail, estimate_phase};
use super::problem::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointClass {
    LimitCircle,
    LimitPoint,
    Inconclusive,
}

impl fmt::Display for EndpointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EndpointClass::LimitCircle => "LC",
            EndpointClass::LimitPoint => "LP",
            EndpointClass::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Outcome of [`classify_endpoint`] with the evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: EndpointClass,
    /// Interval endpoints `1, 2, 4, ...` that were integrated.
    pub breakpoints: Vec<f64>,
    /// `∫|phi_i|^2` and `∫|theta_i|^2` over each doubling interval.
    pub phi_increments: Vec<f64>,
    pub theta_increments: Vec<f64>,
    /// Increments of the solution integrated backwards from the last
    /// breakpoint (only when an LP check ran).
    pub backward_increments: Vec<f64>,
    /// Envelope tail beyond the last breakpoint.
    pub envelope_tail: f64,
}

/// Budget for the doubling scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub phase_budget: f64,
    pub x_cap: f64,
    pub min_intervals: usize,
    /// Increment ratio at or below which a sequence counts as decaying.
    pub decay_ratio: f64,
    /// Increment ratio at or above which a sequence counts as non-decaying.
    pub growth_ratio: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            phase_budget: 1e6,
            x_cap: 1e6,
            min_intervals: 3,
            decay_ratio: 0.6,
            growth_ratio: 0.9,
        }
    }
}

const OVERFLOW: f64 = 1e200;

/// LC/LP decision at `z = i` from the decay of `∫|u|^2` over doubling
/// intervals `[0,1], [1,2], [2,4], ...`.
pub fn classify_endpoint(prob: &Problem) -> Classification {
    classify_with(prob, &ClassifyOptions::default())
}

pub fn classify_with(prob: &Problem, opts: &ClassifyOptions) -> Classification {
    let mut out = Classification {
        class: EndpointClass::Inconclusive,
        breakpoints: Vec::new(),
        phi_increments: Vec::new(),
        theta_increments: Vec::new(),
        backward_increments: Vec::new(),
        envelope_tail: f64::INFINITY,
    };
    let (p0, t0) = prob.initial_data();
    // [phi, p phi', theta, p theta'] as re/im pairs, then the two running norms.
    let mut y = [p0[0], 0.0, p0[1], 0.0, t0[0], 0.0, t0[1], 0.0, 0.0, 0.0];
    let mut rhs = |x: f64, y: &[f64; 10], d: &mut [f64; 10]| {
        let (ip, q) = prob.rhs_coeffs(x);
        for o in [0, 4] {
            // z = i: v' = (q - i) u
            d[o] = y[o + 2] * ip;
            d[o + 1] = y[o + 3] * ip;
            d[o + 2] = q * y[o] + y[o + 1];
            d[o + 3] = q * y[o + 1] - y[o];
        }
        d[8] = y[0] * y[0] + y[1] * y[1];
        d[9] = y[4] * y[4] + y[5] * y[5];
    };
    let mut ode = Dop853::new(prob.settings.tol);
    let mut a = 0.0;
    let mut b = 1.0;
    loop {
        match estimate_phase(prob, b, 1.0) {
            Ok(ph) if ph <= opts.phase_budget && b <= opts.x_cap => {}
            _ => break,
        }
        y[8] = 0.0;
        y[9] = 0.0;
        if ode.integrate(&mut rhs, a, &mut y, b).is_err() {
            break;
        }
        out.breakpoints.push(b);
        out.phi_increments.push(y[8]);
        out.theta_increments.push(y[9]);
        out.envelope_tail = envelope_tail(prob, b, 1.0);
        let n = out.phi_increments.len();
        if n > opts.min_intervals {
            let (rp, rt) = (last_ratios(&out.phi_increments), last_ratios(&out.theta_increments));
            if rp.iter().chain(&rt).all(|&r| r <= opts.decay_ratio) {
                out.class = EndpointClass::LimitCircle;
                return out;
            }
            let grows = |r: &[f64; 2]| r.iter().all(|&r| r >= opts.growth_ratio);
            if grows(&rp) || grows(&rt) {
                if let Some(inc) = backward_increments(prob, &out.breakpoints) {
                    // Drop the interval next to the starting point, where both
                    // modes are still mixed.
                    let usable = &inc[..inc.len() - 1];
                    if usable.len() >= 3 && last_ratios(usable).iter().all(|&r| r < opts.decay_ratio) {
                        out.backward_increments = inc;
                        out.class = EndpointClass::LimitPoint;
                        return out;
                    }
                }
            }
        }
        if y.iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW) {
            break;
        }
        a = b;
        b *= 2.0;
    }
    out
}

/// Ratios of the last two consecutive increment pairs.
fn last_ratios(inc: &[f64]) -> [f64; 2] {
    let n = inc.len();
    [inc[n - 2] / inc[n - 3], inc[n - 1] / inc[n - 2]]
}

/// Increments of `∫|u|^2` on the doubling intervals for the solution with
/// `u(X) = 0, p u'(X) = 1`, integrated from `X` towards the origin.
fn backward_increments(prob: &Problem, breakpoints: &[f64]) -> Option<Vec<f64>> {
    let mut y = [0.0, 0.0, 1.0, 0.0, 0.0];
    let mut rhs = |x: f64, y: &[f64; 5], d: &mut [f64; 5]| {
        let (ip, q) = prob.rhs_coeffs(x);
        d[0] = y[2] * ip;
        d[1] = y[3] * ip;
        d[2] = q * y[0] + y[1];
        d[3] = q * y[1] - y[0];
        // Integrating backwards, so accumulate -|u|^2 to get positive areas.
        d[4] = -(y[0] * y[0] + y[1] * y[1]);
    };
    let mut ode = Dop853::new(prob.settings.tol);
    let mut inc = vec![0.0; breakpoints.len()];
    for k in (0..breakpoints.len()).rev() {
        let lo = if k == 0 { 0.0 } else { breakpoints[k - 1] };
        y[4] = 0.0;
        ode.integrate(&mut rhs, breakpoints[k], &mut y, lo).ok()?;
        if y.iter().any(|v| !v.is_finite()) {
            return None;
        }
        inc[k] = y[4];
    }
    Some(inc)
}

/// Largest truncation point considered by [`auto_truncate`].
pub const TRUNCATION_CAP: f64 = 1e6;

/// Smallest `X` whose envelope tail `∫_X^∞ (p |q - i|)^{-1/2}` is below
/// `prob.tail_eps`. Requires the endpoint to classify as LC.
pub fn auto_truncate(prob: &Problem) -> Result<f64> {
    if classify_endpoint(prob).class != EndpointClass::LimitCircle {
        return Err(Error::LcRequired);
    }
    truncation_point(prob)
}

/// The envelope search behind [`auto_truncate`], without the
/// classification pass.
pub fn truncation_point(prob: &Problem) -> Result<f64> {
    let eps = prob.tail_eps;
    let tail = |x: f64| envelope_tail(prob, x, 1.0);
    let mut lo = 0.0;
    let mut hi = 1.0;
    while tail(hi) >= eps {
        lo = hi;
        hi *= 2.0;
        if hi > TRUNCATION_CAP {
            return Err(Error::TruncationCap {
                x: TRUNCATION_CAP,
                achievable_tail: tail(TRUNCATION_CAP),
            });
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if tail(mid) < eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slcore::problem::{Alpha, XMax};

    fn prob(q: &str, eps: f64) -> Problem {
        Problem::new("1", q, Alpha::Infinite, XMax::Auto, eps).unwrap()
    }

    #[test]
    fn free_problem_is_limit_point() {
        let c = classify_endpoint(&prob("0", 1e-4));
        assert_eq!(c.class, EndpointClass::LimitPoint, "{c:?}");
    }

    #[test]
    fn quartic_and_octic_wells_are_limit_circle() {
        for q in ["-x^4", "-x^8"] {
            let c = classify_endpoint(&prob(q, 1e-4));
            assert_eq!(c.class, EndpointClass::LimitCircle, "{q}: {c:?}");
        }
    }

    #[test]
    fn inverted_harmonic_well_is_never_limit_circle() {
        let c = classify_endpoint(&prob("-x^2", 1e-4));
        assert_ne!(c.class, EndpointClass::LimitCircle, "{c:?}");
    }

    #[test]
    fn classification_is_stable_under_larger_budget() {
        for q in ["0", "-x^8"] {
            let pr = prob(q, 1e-4);
            let a = classify_with(&pr, &ClassifyOptions::default());
            let big = ClassifyOptions {
                phase_budget: 2e6,
                ..ClassifyOptions::default()
            };
            assert_eq!(a.class, classify_with(&pr, &big).class);
        }
    }

    #[test]
    fn octic_truncation_point() {
        let x = auto_truncate(&prob("-x^8", 1e-4)).unwrap();
        // X^{-3}/3 = 1e-4
        let expect = (1.0f64 / 3e-4).powf(1.0 / 3.0);
        assert!((x / expect - 1.0).abs() < 2e-3, "{x} vs {expect}");
    }

    #[test]
    fn quartic_truncation_point_scales_like_inverse_eps() {
        let x = auto_truncate(&prob("-x^4", 1e-4)).unwrap();
        assert!((x / 1e4 - 1.0).abs() < 1e-2, "{x}");
    }

    #[test]
    fn free_problem_cannot_be_truncated() {
        assert_eq!(auto_truncate(&prob("0", 1e-4)), Err(Error::LcRequired));
    }
}
