use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::l2grid::{bilinear, inner_value, norm_sq};
use crate::quasires::apply_quasiresolvent;
use crate::slcore::GridFunction;

use super::nevanlinna::{data_from, gamma};
use super::{Extension, LcProblem, TParam};

type Endpoint = [f64; 2];

fn wr(u: Endpoint, v: Endpoint) -> f64 {
    u[1] * v[0] - u[0] * v[1]
}

fn real_pair(v: [Complex64; 2]) -> Endpoint {
    [v[0].re, v[1].re]
}

/// Secular function evaluator with the anchor solutions at `X` cached.
struct Secular<'a> {
    lc: &'a LcProblem,
    t: TParam,
    phi_z: Endpoint,
    theta_z: Endpoint,
}

impl<'a> Secular<'a> {
    fn new(lc: &'a LcProblem, ext: &Extension) -> Result<Secular<'a>> {
        let (p, t) = lc.workspace().endpoint_values(Complex64::new(ext.zeta, 0.0))?;
        Ok(Secular {
            lc,
            t: ext.t,
            phi_z: real_pair(p),
            theta_z: real_pair(t),
        })
    }

    /// `F_t(lambda) = {phi_lambda, theta_ζ + t phi_ζ}(X)`, `F_∞ = -{phi_lambda, phi_ζ}(X)`.
    fn eval(&self, lambda: f64) -> Result<f64> {
        let (p, _) = self.lc.workspace().endpoint_values(Complex64::new(lambda, 0.0))?;
        let phi = real_pair(p);
        Ok(match self.t {
            TParam::Finite(t) => wr(phi, self.theta_z) + t * wr(phi, self.phi_z),
            TParam::Infinite => -wr(phi, self.phi_z),
        })
    }
}

/// `F_t(lambda)` from Wronskians at `X`: `B - t D` for finite `t`, `D` for
/// `t = ∞`. Real by construction.
pub fn secular_value(lc: &LcProblem, ext: &Extension, lambda: f64) -> Result<f64> {
    Secular::new(lc, ext)?.eval(lambda)
}

/// The parameter `t'` of the extension anchored at `zeta` that has `lambda`
/// as an eigenvalue: `t' = B/D` from the Wronskians at `X`, or `∞` when
/// `D` vanishes.
pub fn parameter_through(lc: &LcProblem, zeta: f64, lambda: f64) -> Result<TParam> {
    let ws = lc.workspace();
    let (p0, t0) = ws.endpoint_values(Complex64::new(zeta, 0.0))?;
    let (pl, _) = ws.endpoint_values(Complex64::new(lambda, 0.0))?;
    let (phi, phi0, theta0) = (real_pair(pl), real_pair(p0), real_pair(t0));
    let b = wr(phi, theta0);
    let d = -wr(phi, phi0);
    if d.abs() <= 1e-14 * b.abs() {
        return Ok(TParam::Infinite);
    }
    Ok(TParam::Finite(b / d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularReport {
    pub lambda: f64,
    /// Wronskian route (authoritative).
    pub value: f64,
    /// `B - t D` (or `D`) with the inner products done by quadrature.
    pub quadrature: f64,
    pub discrepancy: f64,
    /// Variation of the Wronskians over the last tenth of the grid.
    pub trend: f64,
}

/// `F_t(lambda)` by both routes.
pub fn secular(lc: &LcProblem, ext: &Extension, lambda: f64) -> Result<SecularReport> {
    let value = secular_value(lc, ext, lambda)?;
    let sol = lc.workspace().solve_uncached(Complex64::new(lambda, 0.0))?;
    let anchor = lc.anchor(ext)?;
    let d = data_from(&sol, &anchor, ext.zeta)?;
    let quadrature = match ext.t {
        TParam::Finite(t) => (d.b - d.d * t).re,
        TParam::Infinite => d.d.re,
    };
    Ok(SecularReport {
        lambda,
        value,
        quadrature,
        discrepancy: (value - quadrature).abs(),
        trend: d.trend,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Initial spacing of the scan.
    pub step: f64,
    /// Subdivision applied around a local `|F|` minimum without a sign change.
    pub refine_factor: usize,
    /// A scan point counts as a suspicious minimum when `|F|` there is below
    /// this fraction of both neighbours.
    pub min_ratio: f64,
    /// Relative root tolerance, `|Δλ| ≤ rel_tol max(1, |λ|)`.
    pub rel_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            step: 0.25,
            refine_factor: 16,
            min_ratio: 0.1,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub lambda: f64,
    /// `‖phi_lambda‖²`; the normalized eigenfunction is `phi_lambda / ‖phi_lambda‖`.
    pub norm_sq: f64,
    /// `|F_t(lambda)|` at the refined root.
    pub residual: f64,
}

impl Eigenpair {
    pub fn weight(&self) -> f64 {
        1.0 / self.norm_sq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueList {
    pub window: (f64, f64),
    pub eigenpairs: Vec<Eigenpair>,
    /// Subintervals where `|F|` dips without a sign change even after
    /// refinement. Simple eigenvalues never do this, so these point to
    /// numerical trouble and need a finer scan.
    pub flagged: Vec<(f64, f64)>,
    /// `F_t` alternates in sign between consecutive roots.
    pub alternation_ok: bool,
    pub evaluations: usize,
}

impl EigenvalueList {
    pub fn lambdas(&self) -> Vec<f64> {
        self.eigenpairs.iter().map(|e| e.lambda).collect()
    }
}

fn check_window(lc: &LcProblem, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::InvalidArgument(format!("invalid window [{lo}, {hi}]")));
    }
    let bound = lc.workspace().grid().z_ref_bound;
    if lo.abs().max(hi.abs()) > bound {
        return Err(Error::InvalidArgument(format!(
            "window [{lo}, {hi}] exceeds the grid's reference bound {bound}; raise z_ref_bound"
        )));
    }
    Ok(())
}

fn sample(f: &Secular, xs: &[f64]) -> Result<Vec<f64>> {
    xs.par_iter().map(|&x| f.eval(x)).collect()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

/// Brackets found among sampled points, plus exact zeros hit by the scan.
fn brackets(xs: &[f64], fs: &[f64], out: &mut Vec<(f64, f64)>, exact: &mut Vec<f64>) {
    for k in 0..xs.len() {
        if fs[k] == 0.0 {
            exact.push(xs[k]);
        } else if k + 1 < xs.len() && fs[k + 1] != 0.0 && fs[k].signum() != fs[k + 1].signum() {
            out.push((xs[k], xs[k + 1]));
        }
    }
}

/// Bisection safeguarded secant on a sign-changing bracket.
fn refine(f: &Secular, mut a: f64, mut b: f64, rel_tol: f64) -> Result<(f64, usize)> {
    let mut fa = f.eval(a)?;
    let mut fb = f.eval(b)?;
    let mut evals = 2;
    for _ in 0..200 {
        let tol = rel_tol * a.abs().max(b.abs()).max(1.0);
        if b - a <= tol {
            break;
        }
        let secant = b - fb * (b - a) / (fb - fa);
        let mid = 0.5 * (a + b);
        // Take the secant point unless it lands outside or hugs an end.
        let margin = 0.05 * (b - a);
        let x = if secant.is_finite() && secant > a + margin && secant < b - margin {
            secant
        } else {
            mid
        };
        let fx = f.eval(x)?;
        evals += 1;
        if fx == 0.0 {
            return Ok((x, evals));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // A secant step that cannot shrink the bracket much is followed by a
        // forced bisection.
        if x != mid {
            let m = 0.5 * (a + b);
            let fm = f.eval(m)?;
            evals += 1;
            if fm == 0.0 {
                return Ok((m, evals));
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
        }
    }
    let x = if fa.abs() < fb.abs() { a } else { b };
    Ok((x, evals))
}

/// Eigenvalues of `A_t` in `[lo, hi]` as roots of the secular function.
pub fn eigenvalues(lc: &LcProblem, ext: &Extension, window: (f64, f64), opts: &ScanOptions) -> Result<EigenvalueList> {
    let (lo, hi) = window;
    check_window(lc, lo, hi)?;
    if !(opts.step > 0.0) || opts.refine_factor < 2 {
        return Err(Error::InvalidArgument(
            "scan step must be positive and refine_factor >= 2".into(),
        ));
    }
    let f = Secular::new(lc, ext)?;
    let n = (((hi - lo) / opts.step).ceil() as usize).max(1);
    let xs = linspace(lo, hi, n);
    let fs = sample(&f, &xs)?;
    let mut evaluations = xs.len();
    let mut cells = Vec::new();
    let mut exact = Vec::new();
    brackets(&xs, &fs, &mut cells, &mut exact);

    let mut flagged = Vec::new();
    for k in 1..xs.len().saturating_sub(1) {
        let (l, m, r) = (fs[k - 1], fs[k], fs[k + 1]);
        let dip = m.abs() < opts.min_ratio * l.abs().min(r.abs());
        let same_sign = l.signum() == m.signum() && m.signum() == r.signum() && m != 0.0;
        if !(dip && same_sign) {
            continue;
        }
        let sub = linspace(xs[k - 1], xs[k + 1], 2 * opts.refine_factor);
        let sf = sample(&f, &sub)?;
        evaluations += sub.len();
        let before = cells.len() + exact.len();
        brackets(&sub, &sf, &mut cells, &mut exact);
        if cells.len() + exact.len() == before {
            flagged.push((xs[k - 1], xs[k + 1]));
        }
    }

    let refined: Vec<(f64, usize)> = cells
        .par_iter()
        .map(|&(a, b)| refine(&f, a, b, opts.rel_tol))
        .collect::<Result<_>>()?;
    let mut roots: Vec<f64> = refined.iter().map(|r| r.0).chain(exact).collect();
    evaluations += refined.iter().map(|r| r.1).sum::<usize>();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(1.0));

    let eigenpairs: Vec<Eigenpair> = roots
        .par_iter()
        .map(|&lambda| {
            let sol = lc.workspace().solve_uncached(Complex64::new(lambda, 0.0))?;
            Ok(Eigenpair {
                lambda,
                norm_sq: norm_sq(&sol.phi).value,
                residual: f.eval(lambda)?.abs(),
            })
        })
        .collect::<Result<_>>()?;

    let mids: Vec<f64> = roots.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let fm = sample(&f, &mids)?;
    evaluations += mids.len();
    let alternation_ok = fm.windows(2).all(|w| w[0].signum() != w[1].signum());

    Ok(EigenvalueList {
        window,
        eigenpairs,
        flagged,
        alternation_ok,
        evaluations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEntry {
    pub lambda: f64,
    /// `‖phi_lambda‖^{-2}`.
    pub weight: f64,
    pub residual: f64,
}

/// Point masses of `dE_t` in a window, normalized against `phi_lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    pub extension: Extension,
    pub window: (f64, f64),
    pub entries: Vec<SpectralEntry>,
    pub flagged: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    /// Distance from `z` to the part of the real line outside the window.
    pub fn outside_distance(&self, z: Complex64) -> f64 {
        let (lo, hi) = self.window;
        if z.re > lo && z.re < hi {
            let d = (z.re - lo).min(hi - z.re);
            (d * d + z.im * z.im).sqrt()
        } else {
            z.im.abs()
        }
    }
}

pub fn spectral_measure(
    lc: &LcProblem,
    ext: &Extension,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Result<SpectralMeasure> {
    let list = eigenvalues(lc, ext, window, opts)?;
    Ok(SpectralMeasure {
        extension: *ext,
        window,
        entries: list
            .eigenpairs
            .iter()
            .map(|e| SpectralEntry {
                lambda: e.lambda,
                weight: e.weight(),
                residual: e.residual,
            })
            .collect(),
        flagged: list.flagged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NevanlinnaReport {
    pub z: Complex64,
    /// `Σ w_n |⟨h, phi_n⟩|² / (lambda_n - z)` over the window.
    pub lhs: Complex64,
    /// `gamma_t(z) ⟨h, phi_{conj z}⟩ ⟨phi_z, h⟩ + ⟨R(z) h, h⟩`.
    pub rhs: Complex64,
    pub discrepancy: f64,
    pub relative_discrepancy: f64,
    /// `(‖h‖² - captured mass) / dist(z, R \ window)`.
    pub tail_bound: f64,
    pub captured_mass: f64,
    pub h_norm_sq: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    /// Window that would bring the tail bound under the tolerance, when
    /// the current one does not.
    pub required_window: Option<(f64, f64)>,
}

/// Compares the Cauchy transform of `d(E_t h, h)` over the measured window
/// with the closed form built from `gamma_t` and the quasiresolvent.
pub fn nevanlinna_check(
    lc: &LcProblem,
    ext: &Extension,
    z: Complex64,
    h: &GridFunction,
    measure: &SpectralMeasure,
    tolerance: f64,
) -> Result<NevanlinnaReport> {
    if z.im == 0.0 {
        return Err(Error::InvalidArgument("nevanlinna_check needs Im z != 0".into()));
    }
    let h_norm_sq = norm_sq(h).value;
    let masses: Vec<(f64, f64)> = measure
        .entries
        .par_iter()
        .map(|e| {
            let sol = lc.workspace().solve_uncached(Complex64::new(e.lambda, 0.0))?;
            let c = bilinear(h, &sol.phi)?;
            Ok((e.lambda, e.weight * c.norm_sqr()))
        })
        .collect::<Result<_>>()?;
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut captured_mass = 0.0;
    for (lambda, m) in &masses {
        lhs += *m / (*lambda - z);
        captured_mass += m;
    }

    let sol = lc.solutions(z)?;
    let g = gamma(lc, ext, z)?;
    let rh = apply_quasiresolvent(&sol, h)?;
    let rhs = g * bilinear(h, &sol.phi)? * inner_value(&sol.phi, h)? + inner_value(&rh, h)?;

    let discrepancy = (lhs - rhs).norm();
    let scale = rhs.norm();
    let relative_discrepancy = if scale > 0.0 { discrepancy / scale } else { discrepancy };
    let missing = (h_norm_sq - captured_mass).max(0.0);
    let dist = measure.outside_distance(z);
    let tail_bound = missing / dist;
    let allowed = tolerance * scale.max(f64::MIN_POSITIVE);
    let (status, required_window) = if h_norm_sq == 0.0 {
        (CheckStatus::Pass, None)
    } else if tail_bound > allowed {
        let need = missing / allowed;
        let half = (need * need - z.im * z.im).max(0.0).sqrt();
        (CheckStatus::Inconclusive, Some((z.re - half, z.re + half)))
    } else if relative_discrepancy <= tolerance {
        (CheckStatus::Pass, None)
    } else {
        (CheckStatus::Fail, None)
    };
    Ok(NevanlinnaReport {
        z,
        lhs,
        rhs,
        discrepancy,
        relative_discrepancy,
        tail_bound,
        captured_mass,
        h_norm_sq,
        tolerance,
        status,
        required_window,
    })
}
