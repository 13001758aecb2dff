//! The verification suite: identities and cross-checks that a configured
//! problem must satisfy, each reported with its measured value and
//! tolerance.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coeffexpr::Expr;
use crate::config::RunConfig;
use crate::error::Result;
use crate::extension::{
    apply_lp_resolvent, apply_resolvent, boundary_form, defect_membership, eigenvalues, gamma, gamma_via_cutoff,
    solution_identity_residuals, weyl_function_lp, Extension, LcOptions, LcProblem, ScanOptions,
};
use crate::l2grid::{bump, from_fn, inner_value, norm_sq, sample};
use crate::oracle::{fd_resolvent_form, oracle_eigenvalues};
use crate::quasires::{apply_quasiresolvent, relative_residual, Cutoff};
use crate::slcore::{classify_endpoint, EndpointClass, GridFunction, Problem, Workspace, XMax};

/// Truncation point used for LP problems whose `x_max` is `auto`.
pub const LP_DEFAULT_X: f64 = 8.0;

const SEED: u64 = 0x05ee_d1c5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    /// `None` for skipped checks and for checks that could not be evaluated.
    pub measured: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub classification: String,
    pub x_max: Option<f64>,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct VerifyInput {
    pub problem: Problem,
    pub extension: Extension,
    pub lc: LcOptions,
    pub scan: ScanOptions,
    pub window: (f64, f64),
    /// Base resolution of the oracle, or `None` to skip it.
    pub oracle_n: Option<usize>,
}

impl VerifyInput {
    pub fn from_config(cfg: &RunConfig) -> Result<VerifyInput> {
        cfg.validate()?;
        Ok(VerifyInput {
            problem: cfg.problem()?,
            extension: cfg.extension()?,
            lc: cfg.lc_options(),
            scan: ScanOptions {
                step: cfg.eig.step,
                ..ScanOptions::default()
            },
            window: (cfg.verify.window[0], cfg.verify.window[1]),
            oracle_n: cfg.verify.oracle.then_some(cfg.verify.oracle_n),
        })
    }
}

const LC_CHECKS: [&str; 10] = [
    "quasiresolvent_identity",
    "solution_identities",
    "boundary_form",
    "defect_membership",
    "cutoff_independence",
    "self_adjointness",
    "first_resolvent_identity",
    "gamma_at_anchor",
    "oracle_eigenvalues",
    "oracle_resolvent",
];
const LP_CHECKS: [&str; 2] = ["weyl_function", "lp_resolvent"];

fn evaluate(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<(f64, String)>) -> Check {
    match f() {
        Ok((m, detail)) => Check {
            name,
            status: if m <= tolerance { Status::Pass } else { Status::Fail },
            measured: Some(m),
            tolerance,
            detail,
        },
        Err(e) => Check {
            name,
            status: Status::Fail,
            measured: None,
            tolerance,
            detail: e.to_string(),
        },
    }
}

fn skipped(name: &'static str, tolerance: f64, why: &str) -> Check {
    Check {
        name,
        status: Status::Skipped,
        measured: None,
        tolerance,
        detail: why.to_string(),
    }
}

fn tolerance_of(name: &str) -> f64 {
    match name {
        "wronskian" => 1e-8,
        "self_adjointness" => 1e-8,
        "gamma_at_anchor" => 1e-10,
        "cutoff_independence" => 1e-7,
        "weyl_function" => 1e-10,
        "oracle_eigenvalues" => 1e-4,
        "oracle_resolvent" => 1e-3,
        _ => 1e-6,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Five smooth bumps spread over `[0, 0.8 X]`.
pub fn test_functions(ws_grid: &std::sync::Arc<crate::slcore::Grid>) -> Result<Vec<GridFunction>> {
    let x = ws_grid.x_max();
    [(0.1, 0.08), (0.25, 0.1), (0.4, 0.12), (0.55, 0.08), (0.7, 0.1)]
        .iter()
        .map(|&(cf, rf)| from_fn(ws_grid, bump(cf * x, rf * x)))
        .collect()
}

fn random_combination(rng: &mut ChaCha8Rng, fs: &[GridFunction]) -> Result<GridFunction> {
    let terms: Vec<(Complex64, &GridFunction)> = fs.iter().map(|f| (c(rng.gen_range(-1.0..1.0), 0.0), f)).collect();
    GridFunction::lincomb(&terms)
}

fn wronskian_check(ws: &Workspace) -> Check {
    evaluate("wronskian", tolerance_of("wronskian"), || {
        let mut worst: f64 = 0.0;
        for z in [c(0.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)] {
            worst = worst.max(ws.solutions(z)?.wronskian_drift);
        }
        Ok((worst, "max |{phi_z, theta_z} - 1| over nodes, z in {0, i, 1+i}".into()))
    })
}

fn quasiresolvent_check(ws: &Workspace, hs: &[GridFunction]) -> Check {
    evaluate(
        "quasiresolvent_identity",
        tolerance_of("quasiresolvent_identity"),
        || {
            let mut worst: f64 = 0.0;
            for z in [c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 1.0)] {
                let sol = ws.solutions(z)?;
                for h in hs {
                    let u = apply_quasiresolvent(&sol, h)?;
                    worst = worst.max(relative_residual(&u, h, z, &[])?);
                }
            }
            Ok((worst, "max ‖(A - z) R(z) h - h‖/‖h‖, 5 bumps, z in {i, 2, -1+i}".into()))
        },
    )
}

pub fn run_suite(input: &VerifyInput) -> Result<SuiteReport> {
    let class = classify_endpoint(&input.problem).class;
    let mut report = SuiteReport {
        classification: class.to_string(),
        x_max: None,
        checks: Vec::new(),
    };
    match class {
        EndpointClass::LimitCircle => lc_suite(input, &mut report)?,
        EndpointClass::LimitPoint => lp_suite(input, &mut report)?,
        EndpointClass::Inconclusive => {
            for name in std::iter::once("wronskian").chain(LC_CHECKS).chain(LP_CHECKS) {
                report.checks.push(skipped(
                    name,
                    tolerance_of(name),
                    "endpoint classification inconclusive",
                ));
            }
        }
    }
    Ok(report)
}

fn lp_suite(input: &VerifyInput, report: &mut SuiteReport) -> Result<()> {
    let prob = match input.problem.x_max {
        XMax::Fixed(_) => input.problem.clone(),
        XMax::Auto => input.problem.clone().with_x_max(LP_DEFAULT_X)?,
    };
    let ws = Workspace::new(prob.clone(), input.lc.z_ref_bound, &[])?;
    report.x_max = Some(ws.x_max());
    let hs = test_functions(ws.grid())?;
    report.checks.push(wronskian_check(&ws));
    report.checks.push(quasiresolvent_check(&ws, &hs));
    for name in LC_CHECKS.iter().skip(1) {
        report
            .checks
            .push(skipped(name, tolerance_of(name), "not applicable in the LP case"));
    }
    let z = c(0.0, 1.0);
    let weyl = weyl_function_lp(&prob, z);
    report
        .checks
        .push(evaluate("weyl_function", tolerance_of("weyl_function"), || {
            let w = weyl.clone()?;
            let rel = w.last_change / w.w.norm().max(1.0);
            if !w.converged || w.w.im <= 0.0 {
                return Ok((f64::INFINITY, format!("w(i) = {} not converged or Im w <= 0", w.w)));
            }
            Ok((
                rel,
                format!(
                    "w(i) = {} at X = {}",
                    w.w,
                    w.x_values.last().copied().unwrap_or(f64::NAN)
                ),
            ))
        }));
    report
        .checks
        .push(evaluate("lp_resolvent", tolerance_of("lp_resolvent"), || {
            let w = weyl?.w;
            let mut worst: f64 = 0.0;
            for h in &hs {
                let u = apply_lp_resolvent(&ws, z, w, h)?;
                worst = worst.max(relative_residual(&u, h, z, &[])?);
            }
            Ok((worst, "max ‖(A - i) R(i) h - h‖/‖h‖ over 5 bumps".into()))
        }));
    Ok(())
}

fn alternate_cutoff(cut: Cutoff, x_max: f64) -> Cutoff {
    if 2.0 * cut.b <= 0.5 * x_max {
        Cutoff {
            a: 2.0 * cut.a,
            b: 2.0 * cut.b,
        }
    } else {
        Cutoff {
            a: 0.5 * cut.a,
            b: 0.5 * cut.b,
        }
    }
}

fn lc_suite(input: &VerifyInput, report: &mut SuiteReport) -> Result<()> {
    let ext = input.extension;
    // Resolve X first so the alternate cutoff is known before the grid is built.
    let probe = LcProblem::new(
        input.problem.clone(),
        &LcOptions {
            z_ref_bound: 1.0,
            ..input.lc.clone()
        },
    );
    let (x_max, cut) = match probe {
        Ok(p) => (p.x_max(), p.cutoff()),
        Err(e) => {
            report
                .checks
                .push(evaluate("wronskian", tolerance_of("wronskian"), || Err(e)));
            return Ok(());
        }
    };
    let alt = alternate_cutoff(cut, x_max);
    let mut opts = input.lc.clone();
    opts.cutoff = Some(cut);
    opts.extra_cutoffs.push(alt);
    opts.assume_lc = true;
    let prob = input.problem.clone().with_x_max(x_max)?;
    let lc = LcProblem::new(prob.clone(), &opts)?;
    report.x_max = Some(x_max);
    let ws = lc.workspace();
    let grid = ws.grid().clone();
    let hs = test_functions(&grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let checks = &mut report.checks;

    checks.push(wronskian_check(ws));
    checks.push(quasiresolvent_check(ws, &hs));

    checks.push(evaluate(
        "solution_identities",
        tolerance_of("solution_identities"),
        || {
            let mut worst: f64 = 0.0;
            for z in [c(0.0, 1.0), c(0.0, 3.0)] {
                let [a, b] = solution_identity_residuals(&lc, &ext, z)?;
                worst = worst.max(a).max(b);
            }
            Ok((
                worst,
                "sup-node relative residual of both identities, z in {i, 3i}".into(),
            ))
        },
    ));

    checks.push(evaluate("boundary_form", tolerance_of("boundary_form"), || {
        let mut worst: f64 = 0.0;
        let rc = |rng: &mut ChaCha8Rng| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for _ in 0..20 {
            let alpha = [rc(&mut rng), rc(&mut rng)];
            let beta = [rc(&mut rng), rc(&mut rng)];
            let u0 = random_combination(&mut rng, &hs)?;
            let v0 = random_combination(&mut rng, &hs)?;
            let r = boundary_form(&lc, &ext, alpha, beta, &u0, &v0)?;
            worst = worst.max(r.error);
        }
        Ok((
            worst,
            "max |⟨Au,v⟩ - ⟨u,Av⟩ - (a2 conj(b1) - a1 conj(b2))| over 20 random quadruples".into(),
        ))
    }));

    checks.push(evaluate("defect_membership", tolerance_of("defect_membership"), || {
        let mut worst: f64 = 0.0;
        for z in [c(0.0, 1.0), c(0.0, 3.0)] {
            for m in defect_membership(&lc, &ext, z, tolerance_of("defect_membership"))? {
                worst = worst.max(m.against_phi.0.norm()).max(m.against_theta.0.norm());
            }
        }
        Ok((
            worst,
            "max boundary form at X against phi_ζ and theta_ζ, z in {i, 3i}".into(),
        ))
    }));

    checks.push(evaluate(
        "cutoff_independence",
        tolerance_of("cutoff_independence"),
        || {
            let z = c(0.0, 1.0);
            let g1 = gamma_via_cutoff(&lc, &ext, z, &cut)?;
            let g2 = gamma_via_cutoff(&lc, &ext, z, &alt)?;
            let gw = gamma(&lc, &ext, z)?;
            Ok((
                (g1 - g2).norm() / g1.norm(),
                format!(
                    "gamma(i) with cutoffs [{}, {}] and [{}, {}]; Wronskian route differs by {:.2e}",
                    cut.a,
                    cut.b,
                    alt.a,
                    alt.b,
                    (g1 - gw).norm() / gw.norm()
                ),
            ))
        },
    ));

    checks.push(evaluate("self_adjointness", tolerance_of("self_adjointness"), || {
        let mut worst: f64 = 0.0;
        for z in [c(0.0, 1.0), c(1.0, 2.0)] {
            let f = random_combination(&mut rng, &hs)?;
            let g = random_combination(&mut rng, &hs)?;
            let left = inner_value(&apply_resolvent(&lc, &ext, z, &f)?, &g)?;
            let right = inner_value(&f, &apply_resolvent(&lc, &ext, z.conj(), &g)?)?;
            worst = worst.max((left - right).norm() / left.norm());
        }
        Ok((worst, "relative |⟨R(z)f,g⟩ - ⟨f,R(conj z)g⟩|, z in {i, 1+2i}".into()))
    }));

    checks.push(evaluate(
        "first_resolvent_identity",
        tolerance_of("first_resolvent_identity"),
        || {
            let (z, w) = (c(0.0, 1.0), c(0.0, 2.0));
            let mut worst: f64 = 0.0;
            for h in &hs {
                let rw = apply_resolvent(&lc, &ext, w, h)?;
                let rz = apply_resolvent(&lc, &ext, z, h)?;
                let rzw = apply_resolvent(&lc, &ext, z, &rw)?;
                let d = GridFunction::lincomb(&[(c(1.0, 0.0), &rz), (c(-1.0, 0.0), &rw), (-(z - w), &rzw)])?;
                worst = worst.max((norm_sq(&d).value / norm_sq(h).value).sqrt());
            }
            Ok((
                worst,
                "max ‖R(i)h - R(2i)h - (i - 2i) R(i)R(2i)h‖/‖h‖ over 5 bumps".into(),
            ))
        },
    ));

    checks.push(match ext.t {
        crate::extension::TParam::Finite(t) => evaluate("gamma_at_anchor", tolerance_of("gamma_at_anchor"), || {
            let g = gamma(&lc, &ext, c(ext.zeta, 0.0))?;
            Ok(((g - t).norm(), format!("gamma_t(zeta) = {g}, t = {t}")))
        }),
        crate::extension::TParam::Infinite => skipped(
            "gamma_at_anchor",
            tolerance_of("gamma_at_anchor"),
            "zeta is an eigenvalue of A_inf",
        ),
    });

    match input.oracle_n {
        None => {
            checks.push(skipped(
                "oracle_eigenvalues",
                tolerance_of("oracle_eigenvalues"),
                "oracle disabled",
            ));
            checks.push(skipped(
                "oracle_resolvent",
                tolerance_of("oracle_resolvent"),
                "oracle disabled",
            ));
        }
        Some(n) => {
            checks.push(evaluate(
                "oracle_eigenvalues",
                tolerance_of("oracle_eigenvalues"),
                || {
                    let primary = eigenvalues(&lc, &ext, input.window, &input.scan)?.lambdas();
                    let (oracle, flagged) = oracle_eigenvalues(&prob, &ext, input.window, n)?;
                    let (lo, hi) = input.window;
                    let fd: Vec<f64> = oracle
                        .iter()
                        .map(|e| e.extrapolated)
                        .filter(|l| *l >= lo && *l <= hi)
                        .collect();
                    let worst = eigenvalue_mismatch(&primary, &fd);
                    Ok((
                        worst,
                        format!(
                            "{} primary vs {} oracle eigenvalues in [{lo}, {hi}], n = {n}, {} flagged pairings",
                            primary.len(),
                            fd.len(),
                            flagged.len()
                        ),
                    ))
                },
            ));
            checks.push(evaluate("oracle_resolvent", tolerance_of("oracle_resolvent"), || {
                let z = c(0.0, 1.0);
                let expr: Expr = "exp(-x^2)".parse()?;
                let h = sample(&expr, &grid)?;
                let primary = inner_value(&apply_resolvent(&lc, &ext, z, &h)?, &h)?;
                let fd = fd_resolvent_form(&prob, &ext, n, z, &expr)?;
                Ok((
                    (primary - fd).norm() / primary.norm(),
                    format!("⟨R(i)h, h⟩ = {primary} vs {fd}, h = exp(-x^2)"),
                ))
            }));
        }
    }
    Ok(())
}

/// Worst mixed error (relative for `|λ| >= 1`, absolute below) between two
/// sorted eigenvalue lists; infinite if the counts differ.
pub fn eigenvalue_mismatch(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}
