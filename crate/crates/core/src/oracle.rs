//! Finite-difference oracle, independent of the ODE pipeline.
//!
//! Uniform three-point scheme for `-(p u')' + q u` with `p` at half nodes.
//! Boundary rows come from half-cell balances (Robin at the origin for
//! finite `alpha`, and the extension condition `{u, t phi_ζ + theta_ζ} = 0` at
//! `X`), then the generalized problem `K u = lambda B u` with the lumped mass
//! `B = diag(h/2, h, ..., h, h/2)` is symmetrized as `B^{-1/2} K B^{-1/2}`.
//! The functions `phi_ζ`, `theta_ζ` entering the right boundary row are
//! marched with the same scheme.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffexpr::Expr;
use crate::error::{Error, Result};
use crate::extension::{Extension, TParam};
use crate::slcore::{Alpha, Problem};

/// Boundary row at `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RightBoundary {
    Extension(Extension),
    Dirichlet,
}

/// Smallest number of nodes per local oscillation accepted by [`build_fd`].
pub const MIN_NODES_PER_OSCILLATION: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct FdProblem {
    pub n: usize,
    pub x_max: f64,
    pub h: f64,
    /// Abscissae of the unknowns (the node at 0 is absent for a Dirichlet
    /// condition there, and so is `X` for a Dirichlet row at `X`).
    pub nodes: Vec<f64>,
    pub diag: Vec<f64>,
    /// `off[k]` couples unknowns `k` and `k+1`.
    pub off: Vec<f64>,
    /// Lumped mass of each unknown.
    pub mass: Vec<f64>,
    /// Discrete `{phi_ζ, theta_ζ}` at `X` (should be close to 1).
    pub wronskian_at_x: f64,
}

/// Values and quasiderivatives at `X` of a solution of `-(p v')' + (q - ζ) v = 0`
/// with `(v, p v')(0) = init`, marched on the uniform grid.
fn march(p_half: &[f64], q: &[f64], h: f64, init: [f64; 2]) -> [f64; 2] {
    let n = q.len() - 1;
    let mut v = init[0];
    let mut flux = init[1] + 0.5 * h * q[0] * v;
    for j in 0..n {
        v += h * flux / p_half[j];
        if j + 1 < n {
            flux += h * q[j + 1] * v;
        }
    }
    [v, flux + 0.5 * h * q[n] * v]
}

pub fn build_fd(prob: &Problem, ext: &Extension, n: usize) -> Result<FdProblem> {
    build_fd_with(prob, RightBoundary::Extension(*ext), n)
}

pub fn build_fd_with(prob: &Problem, right: RightBoundary, n: usize) -> Result<FdProblem> {
    let x_max = prob.x_max_value()?;
    if n < 4 {
        return Err(Error::InvalidArgument(format!("n = {n} is too small")));
    }
    let h = x_max / n as f64;
    let xs: Vec<f64> = (0..=n).map(|j| j as f64 * h).collect();
    let p_half: Vec<f64> = (0..n).map(|j| prob.p_at((j as f64 + 0.5) * h)).collect::<Result<_>>()?;
    let p: Vec<f64> = xs.iter().map(|&x| prob.p_at(x)).collect::<Result<_>>()?;
    let q: Vec<f64> = xs.iter().map(|&x| prob.q_at(x)).collect::<Result<_>>()?;
    if let Some((j, v)) = p.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveP { x: xs[j], value: *v });
    }
    let worst = (0..=n).map(|j| ((q[j].abs() + 1.0) / p[j]).sqrt()).fold(0.0, f64::max);
    let per_osc = 2.0 * std::f64::consts::PI / (worst * h);
    if per_osc < MIN_NODES_PER_OSCILLATION {
        return Err(Error::InvalidArgument(format!(
            "n = {n} gives {per_osc:.1} nodes per oscillation (need {MIN_NODES_PER_OSCILLATION})"
        )));
    }

    // Full stiffness and mass on nodes 0..=n, rows trimmed afterwards.
    let mut kd = vec![0.0; n + 1];
    let mut ko = vec![0.0; n];
    let mut b = vec![h; n + 1];
    b[0] = 0.5 * h;
    b[n] = 0.5 * h;
    for j in 0..n {
        let c = p_half[j] / h;
        kd[j] += c;
        kd[j + 1] += c;
        ko[j] = -c;
    }
    for j in 0..=n {
        kd[j] += b[j] * q[j];
    }
    let left_dirichlet = match prob.alpha {
        Alpha::Finite(a) => {
            kd[0] += p[0] * a;
            false
        }
        Alpha::Infinite => true,
    };

    let mut wronskian_at_x = f64::NAN;
    let right_dirichlet = match right {
        RightBoundary::Dirichlet => true,
        RightBoundary::Extension(ext) => {
            let qz: Vec<f64> = q.iter().map(|v| v - ext.zeta).collect();
            let (phi0, theta0) = match prob.alpha {
                Alpha::Finite(a) => ([1.0, p[0] * a], [0.0, -1.0]),
                Alpha::Infinite => ([0.0, p[0]], [1.0 / p[0], 0.0]),
            };
            let phi = march(&p_half, &qz, h, phi0);
            let theta = march(&p_half, &qz, h, theta0);
            wronskian_at_x = phi[1] * theta[0] - phi[0] * theta[1];
            let v = match ext.t {
                TParam::Finite(t) => [t * phi[0] + theta[0], t * phi[1] + theta[1]],
                TParam::Infinite => phi,
            };
            // p u'(X) = kappa u(X) with kappa = (p v')/v at X.
            if v[0].abs() * 1e12 <= v[1].abs() * h {
                true
            } else {
                kd[n] -= v[1] / v[0];
                false
            }
        }
    };

    let lo = usize::from(left_dirichlet);
    let hi = if right_dirichlet { n - 1 } else { n };
    let idx = lo..=hi;
    let diag: Vec<f64> = idx.clone().map(|j| kd[j] / b[j]).collect();
    let off: Vec<f64> = (lo..hi).map(|j| ko[j] / (b[j] * b[j + 1]).sqrt()).collect();
    Ok(FdProblem {
        n,
        x_max,
        h,
        nodes: idx.clone().map(|j| xs[j]).collect(),
        diag,
        off,
        mass: idx.map(|j| b[j]).collect(),
        wronskian_at_x,
    })
}

impl FdProblem {
    /// Number of eigenvalues strictly below `x`, from the signs of the
    /// `LDL^T` pivots of `M - x I`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0;
        let mut d = self.diag[0] - x;
        for k in 0..self.diag.len() {
            if k > 0 {
                d = self.diag[k] - x - self.off[k - 1] * self.off[k - 1] / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `⟨(M - z)^{-1} h, h⟩` in the lumped inner product, by a tridiagonal
    /// solve with complex shift.
    pub fn resolvent_form(&self, z: Complex64, h: impl Fn(f64) -> f64) -> Complex64 {
        let m = self.diag.len();
        // Symmetrized unknowns w = B^{1/2} u with right side B^{1/2} h.
        let rhs: Vec<Complex64> = (0..m)
            .map(|k| Complex64::new(self.mass[k].sqrt() * h(self.nodes[k]), 0.0))
            .collect();
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        let mut d = vec![Complex64::new(0.0, 0.0); m];
        let mut piv = self.diag[0] - z;
        c[0] = Complex64::new(self.off.first().copied().unwrap_or(0.0), 0.0) / piv;
        d[0] = rhs[0] / piv;
        for k in 1..m {
            piv = self.diag[k] - z - c[k - 1] * self.off[k - 1];
            if k + 1 < m {
                c[k] = Complex64::new(self.off[k], 0.0) / piv;
            }
            d[k] = (rhs[k] - d[k - 1] * self.off[k - 1]) / piv;
        }
        for k in (0..m - 1).rev() {
            let next = d[k + 1];
            d[k] -= c[k] * next;
        }
        d.iter().zip(&rhs).map(|(w, r)| w * r).sum()
    }
}

/// All eigenvalues of the FD matrix in `[lo, hi)` by Sturm bisection to
/// `1e-10 max(1, |lambda|)`, split over disjoint subintervals.
pub fn fd_eigenvalues(fd: &FdProblem, window: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = window;
    let c_lo = fd.sturm_count(lo);
    let c_hi = fd.sturm_count(hi);
    (c_lo..c_hi)
        .into_par_iter()
        .map(|k| {
            // k-th eigenvalue (0-based): count(a) <= k < count(b).
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-10 * a.abs().max(b.abs()).max(1.0) {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                if fd.sturm_count(m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Order-two extrapolation of eigenvalues from `n` and `2n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub values: Vec<f64>,
    /// Indices whose pairing is ambiguous: the neighbouring gap is smaller
    /// than the change between the two resolutions.
    pub flagged: Vec<usize>,
}

/// Pairs each `e_n` with its nearest `e_2n` and returns `(4 e_2n - e_n)/3`.
pub fn richardson(e_n: &[f64], e_2n: &[f64]) -> Extrapolation {
    let mut values = Vec::with_capacity(e_n.len());
    let mut flagged = Vec::new();
    for (i, &a) in e_n.iter().enumerate() {
        let Some((j, &b)) = e_2n
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 - a).abs().total_cmp(&(y.1 - a).abs()))
        else {
            flagged.push(i);
            values.push(a);
            continue;
        };
        let change = (b - a).abs();
        let gap = [j.checked_sub(1).map(|k| e_2n[k]), e_2n.get(j + 1).copied()]
            .into_iter()
            .flatten()
            .map(|c| (c - b).abs())
            .fold(f64::INFINITY, f64::min);
        if gap < 2.0 * change {
            flagged.push(i);
        }
        values.push((4.0 * b - a) / 3.0);
    }
    Extrapolation { values, flagged }
}

/// One extrapolated eigenvalue with its two raw resolutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEigenvalue {
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
}

/// FD eigenvalues at `n` and `2n`, extrapolated, restricted to `window`.
/// Both raw spectra are taken on a slightly wider window so that pairs near
/// the edges are not split.
pub fn oracle_eigenvalues(
    prob: &Problem,
    ext: &Extension,
    window: (f64, f64),
    n: usize,
) -> Result<(Vec<OracleEigenvalue>, Vec<usize>)> {
    let pad = 0.05 * (window.1 - window.0).abs().max(1.0);
    let wide = (window.0 - pad, window.1 + pad);
    let fa = build_fd(prob, ext, n)?;
    let fb = build_fd(prob, ext, 2 * n)?;
    let (ea, eb) = rayon::join(|| fd_eigenvalues(&fa, wide), || fd_eigenvalues(&fb, wide));
    let ex = richardson(&ea, &eb);
    let mut out = Vec::new();
    let mut flagged = Vec::new();
    for (i, &v) in ex.values.iter().enumerate() {
        if v >= window.0 && v <= window.1 {
            if ex.flagged.contains(&i) {
                flagged.push(out.len());
            }
            let fine = eb
                .iter()
                .copied()
                .min_by(|x, y| (x - ea[i]).abs().total_cmp(&(y - ea[i]).abs()))
                .unwrap_or(f64::NAN);
            out.push(OracleEigenvalue {
                coarse: ea[i],
                fine,
                extrapolated: v,
            });
        }
    }
    Ok((out, flagged))
}

/// `⟨R_t(z) h, h⟩` from the FD matrix, for cross-checking the primary
/// pipeline at a few points.
pub fn fd_resolvent_form(prob: &Problem, ext: &Extension, n: usize, z: Complex64, h: &Expr) -> Result<Complex64> {
    let fd = build_fd(prob, ext, n)?;
    let prog = h.compile();
    // Evaluation errors surface as NaN in the sum; check once up front.
    for &x in &fd.nodes {
        prog.eval(x)?;
    }
    Ok(fd.resolvent_form(z, |x| prog.eval(x).unwrap_or(f64::NAN)))
}

/// Row of an oracle fixture file.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureRow {
    pub problem_id: String,
    pub t: TParam,
    pub n: usize,
    /// Raw eigenvalue at resolution `n`.
    pub lambda: f64,
    pub extrapolated: f64,
}

#[derive(Serialize, Deserialize)]
struct RawRow {
    #[serde(rename = "problem-id")]
    problem_id: String,
    t: String,
    n: usize,
    lambda: String,
    extrapolated: String,
}

fn csv_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{}: {e}", path.display()))
}

pub fn write_fixtures(path: &Path, rows: &[FixtureRow]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| csv_err(path, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.serialize(RawRow {
            problem_id: r.problem_id.clone(),
            t: r.t.to_string(),
            n: r.n,
            lambda: format!("{:.16e}", r.lambda),
            extrapolated: format!("{:.16e}", r.extrapolated),
        })
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| csv_err(path, e))
}

pub fn read_fixtures(path: &Path) -> Result<Vec<FixtureRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut rows = Vec::new();
    for rec in r.deserialize::<RawRow>() {
        let raw = rec.map_err(|e| csv_err(path, e))?;
        let num = |s: &str| s.parse::<f64>().map_err(|e| csv_err(path, e));
        rows.push(FixtureRow {
            t: raw.t.parse()?,
            n: raw.n,
            lambda: num(&raw.lambda)?,
            extrapolated: num(&raw.extrapolated)?,
            problem_id: raw.problem_id,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slcore::XMax;
    use std::f64::consts::PI;

    fn free(alpha: Alpha) -> Problem {
        Problem::new("1", "0", alpha, XMax::Fixed(PI), 1e-4).unwrap()
    }

    #[test]
    fn dirichlet_free_case() {
        let pr = free(Alpha::Infinite);
        let a = build_fd_with(&pr, RightBoundary::Dirichlet, 2000).unwrap();
        let b = build_fd_with(&pr, RightBoundary::Dirichlet, 4000).unwrap();
        let ea = fd_eigenvalues(&a, (0.0, 10.0));
        let eb = fd_eigenvalues(&b, (0.0, 10.0));
        assert_eq!(ea.len(), 3);
        let ex = richardson(&ea, &eb);
        assert!(ex.flagged.is_empty());
        for (k, v) in ex.values.iter().enumerate() {
            let exact = ((k + 1) * (k + 1)) as f64;
            assert!((v - exact).abs() < 1e-6, "{v} vs {exact}");
            // Three-point Dirichlet eigenvalues approach from below.
            assert!(ea[k] < eb[k] && eb[k] < exact);
        }
    }

    #[test]
    fn robin_rows_are_second_order() {
        // Neumann origin, Dirichlet end: lowest eigenvalue 1/4.
        let pr = free(Alpha::Finite(0.0));
        let errs: Vec<f64> = [500, 1000, 2000]
            .iter()
            .map(|&n| {
                let fd = build_fd_with(&pr, RightBoundary::Dirichlet, n).unwrap();
                (fd_eigenvalues(&fd, (0.0, 1.0))[0] - 0.25).abs()
            })
            .collect();
        assert!((errs[0] / errs[1] - 4.0).abs() < 0.1, "{errs:?}");
        assert!((errs[1] / errs[2] - 4.0).abs() < 0.1, "{errs:?}");
    }

    #[test]
    fn matrix_is_symmetric_and_counts_match() {
        let pr = Problem::new("1 + x/4", "-x^4", Alpha::Finite(0.5), XMax::Fixed(3.0), 1e-4).unwrap();
        let fd = build_fd(&pr, &Extension::finite(1.0), 600).unwrap();
        assert_eq!(fd.off.len() + 1, fd.diag.len());
        let e = fd_eigenvalues(&fd, (-50.0, 50.0));
        assert_eq!(e.len(), fd.sturm_count(50.0) - fd.sturm_count(-50.0));
        assert!(e.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn marched_wronskian_is_one() {
        let pr = Problem::new("1", "-x^8", Alpha::Infinite, XMax::Fixed(3.0), 1e-4).unwrap();
        let fd = build_fd(&pr, &Extension::finite(0.0), 20000).unwrap();
        assert!((fd.wronskian_at_x - 1.0).abs() < 1e-6, "{}", fd.wronskian_at_x);
    }

    #[test]
    fn too_coarse_is_rejected() {
        let pr = Problem::new("1", "-x^8", Alpha::Infinite, XMax::Fixed(6.0), 1e-4).unwrap();
        assert!(build_fd(&pr, &Extension::finite(0.0), 1000).is_err());
    }

    #[test]
    fn richardson_arithmetic() {
        let r = richardson(&[1.01], &[1.0025]);
        assert!((r.values[0] - 1.0).abs() < 1e-12);
        let r = richardson(&[2.0, 5.0], &[2.0, 5.0]);
        assert_eq!(r.values, vec![2.0, 5.0]);
        assert!(r.flagged.is_empty());
        // Gap smaller than the change between resolutions.
        let r = richardson(&[1.0, 1.3], &[1.2, 1.25]);
        assert!(!r.flagged.is_empty());
    }

    #[test]
    fn fixture_round_trip() {
        let dir = std::env::temp_dir().join(format!("lcspec-fixture-{}", std::process::id()));
        let path = dir.join("v1/x.csv");
        let rows = vec![FixtureRow {
            problem_id: "octic".into(),
            t: TParam::Infinite,
            n: 100,
            lambda: 0.1,
            extrapolated: 1.0 / 3.0,
        }];
        write_fixtures(&path, &rows).unwrap();
        assert_eq!(read_fixtures(&path).unwrap(), rows);
        fs::remove_dir_all(dir).unwrap();
    }
}
