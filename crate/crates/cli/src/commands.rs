use num_complex::Complex64;
use serde_json::{json, Value};

use lcspec_core::coeffexpr::Expr;
use lcspec_core::config::{NumOrWord, RunConfig};
use lcspec_core::extension::{
    apply_lp_resolvent, apply_resolvent, eigenvalues, nevanlinna_check, spectral_measure, weyl_function_lp,
    CheckStatus, LcProblem, ScanOptions,
};
use lcspec_core::l2grid::sample;
use lcspec_core::quasires::{apply_operator, relative_residual};
use lcspec_core::slcore::{classify_endpoint, truncation_point, EndpointClass, GridFunction, Workspace, XMax};
use lcspec_core::verify::{run_suite, VerifyInput, LP_DEFAULT_X};
use lcspec_core::Error;

use crate::output::{complex, csv_document, float, json_document, report};

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_FAILED: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        let code = match e {
            Error::NotConverged(_) => EXIT_INCONCLUSIVE,
            _ => EXIT_USAGE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Command-line values that replace config entries.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub window: Option<[f64; 2]>,
    pub z: Option<[f64; 2]>,
    pub h: Option<String>,
    pub lp: bool,
}

#[derive(Debug)]
pub struct Outcome {
    pub body: String,
    pub code: u8,
    /// Diagnostics for stderr.
    pub messages: Vec<String>,
}

fn reject(flag: &str, cmd: &str) -> CliError {
    CliError::usage(format!("{flag} is not used by '{cmd}'"))
}

fn apply_overrides(cmd: &str, cfg: &mut RunConfig, ov: &Overrides) -> Result<(), CliError> {
    let uses = |flag: &str| match flag {
        "--window" => matches!(cmd, "eig" | "spectral" | "verify"),
        "--z" | "--h" => matches!(cmd, "resolvent" | "spectral"),
        "--lp" => cmd == "resolvent",
        _ => false,
    };
    for (flag, given) in [
        ("--window", ov.window.is_some()),
        ("--z", ov.z.is_some()),
        ("--h", ov.h.is_some()),
        ("--lp", ov.lp),
    ] {
        if given && !uses(flag) {
            return Err(reject(flag, cmd));
        }
    }
    if let Some(w) = ov.window {
        match cmd {
            "eig" => cfg.eig.window = w,
            "spectral" => cfg.spectral.window = w,
            _ => cfg.verify.window = w,
        }
    }
    if let Some(z) = ov.z {
        match cmd {
            "resolvent" => cfg.resolvent.z = z,
            _ => cfg.spectral.z = z,
        }
    }
    if let Some(h) = &ov.h {
        match cmd {
            "resolvent" => cfg.resolvent.h = h.clone(),
            _ => cfg.spectral.h = h.clone(),
        }
    }
    cfg.validate()?;
    Ok(())
}

pub fn dispatch(cmd: &str, text: &str, ov: &Overrides) -> Result<Outcome, CliError> {
    let mut cfg = RunConfig::from_toml(text)?;
    apply_overrides(cmd, &mut cfg, ov)?;
    match cmd {
        "classify" => classify(cfg),
        "eig" => eig(cfg),
        "resolvent" => resolvent(cfg, ov.lp),
        "spectral" => spectral(cfg),
        "verify" => verify(cfg),
        other => Err(CliError::usage(format!("unknown command '{other}'"))),
    }
}

fn scan_options(cfg: &RunConfig) -> ScanOptions {
    ScanOptions {
        step: cfg.eig.step,
        ..ScanOptions::default()
    }
}

/// Builds the LC problem with `z_ref_bound` raised to cover `bound`, and
/// records the resolved truncation point and bound in `cfg`.
fn lc_problem(cfg: &mut RunConfig, bound: f64) -> Result<LcProblem, CliError> {
    let mut opts = cfg.lc_options();
    opts.z_ref_bound = opts.z_ref_bound.max(bound);
    let lc = LcProblem::new(cfg.problem()?, &opts)?;
    cfg.domain.x_max = NumOrWord::Num(lc.x_max());
    cfg.solver.z_ref_bound = opts.z_ref_bound;
    Ok(lc)
}

fn window_bound(w: [f64; 2]) -> f64 {
    w[0].abs().max(w[1].abs())
}

fn classify(mut cfg: RunConfig) -> Result<Outcome, CliError> {
    let prob = cfg.problem()?;
    let c = classify_endpoint(&prob);
    let x_max = match (c.class, prob.x_max) {
        (EndpointClass::Inconclusive, _) => None,
        (_, XMax::Fixed(x)) => Some(x),
        (EndpointClass::LimitCircle, XMax::Auto) => Some(truncation_point(&prob)?),
        (EndpointClass::LimitPoint, XMax::Auto) => Some(LP_DEFAULT_X),
    };
    if let Some(x) = x_max {
        cfg.domain.x_max = NumOrWord::Num(x);
    }
    let mut m = report(&cfg);
    m.insert("classification".into(), json!(c.class.to_string()));
    m.insert("x_max".into(), json!(x_max));
    m.insert("envelope_tail".into(), json!(c.envelope_tail));
    m.insert("breakpoints".into(), json!(c.breakpoints));
    m.insert("phi_increments".into(), json!(c.phi_increments));
    m.insert("theta_increments".into(), json!(c.theta_increments));
    m.insert("backward_increments".into(), json!(c.backward_increments));
    let summary = match x_max {
        Some(x) => format!("{}, x_max = {x}", c.class),
        None => c.class.to_string(),
    };
    Ok(Outcome {
        body: json_document(m),
        code: if c.class == EndpointClass::Inconclusive {
            EXIT_INCONCLUSIVE
        } else {
            EXIT_OK
        },
        messages: vec![summary],
    })
}

fn eig(mut cfg: RunConfig) -> Result<Outcome, CliError> {
    let w = cfg.eig.window;
    let lc = lc_problem(&mut cfg, window_bound(w))?;
    let ext = cfg.extension()?;
    let list = eigenvalues(&lc, &ext, (w[0], w[1]), &scan_options(&cfg))?;
    let rows: Vec<Vec<String>> = list
        .eigenpairs
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                i.to_string(),
                float(e.lambda),
                float(e.norm_sq),
                float(e.weight()),
                float(e.residual),
            ]
        })
        .collect();
    let mut notes = vec![format!("extension: t = {}, zeta = {}", ext.t, ext.zeta)];
    let mut messages = Vec::new();
    let mut code = EXIT_OK;
    for (a, b) in &list.flagged {
        notes.push(format!("flagged: |F| dips without a sign change in [{a}, {b}]"));
    }
    if !list.flagged.is_empty() || !list.alternation_ok {
        code = EXIT_INCONCLUSIVE;
        messages.push(format!(
            "eigenvalue scan needs refinement: {} flagged interval(s), sign alternation {}",
            list.flagged.len(),
            if list.alternation_ok { "ok" } else { "broken" }
        ));
    }
    let body = csv_document(
        &cfg,
        &notes,
        &["index", "lambda", "norm_sq", "weight", "secular_residual"],
        &rows,
    )
    .map_err(CliError::usage)?;
    Ok(Outcome { body, code, messages })
}

fn resolvent(mut cfg: RunConfig, lp: bool) -> Result<Outcome, CliError> {
    let z = Complex64::new(cfg.resolvent.z[0], cfg.resolvent.z[1]);
    let expr: Expr = cfg.resolvent.h.parse().map_err(Error::from)?;
    let mut notes = Vec::new();
    let mut code = EXIT_OK;
    let mut messages = Vec::new();
    let (u, h) = if lp {
        let mut prob = cfg.problem()?;
        if prob.x_max == XMax::Auto {
            prob = prob.with_x_max(LP_DEFAULT_X)?;
        }
        let weyl = weyl_function_lp(&prob, z)?;
        if !weyl.converged {
            code = EXIT_INCONCLUSIVE;
            messages.push(format!(
                "Weyl function not converged (last change {:.3e})",
                weyl.last_change
            ));
        }
        notes.push(format!("weyl_function: {} {}", float(weyl.w.re), float(weyl.w.im)));
        let bound = cfg.solver.z_ref_bound.max(z.norm());
        let ws = Workspace::new(prob, bound, &[])?;
        cfg.domain.x_max = NumOrWord::Num(ws.x_max());
        cfg.solver.z_ref_bound = bound;
        let h = sample(&expr, ws.grid())?;
        (apply_lp_resolvent(&ws, z, weyl.w, &h)?, h)
    } else {
        let lc = lc_problem(&mut cfg, z.norm())?;
        let ext = cfg.extension()?;
        notes.push(format!("extension: t = {}, zeta = {}", ext.t, ext.zeta));
        let h = sample(&expr, lc.workspace().grid())?;
        (apply_resolvent(&lc, &ext, z, &h)?, h)
    };
    let rel = relative_residual(&u, &h, z, &[])?;
    notes.push(format!("relative_residual: {}", float(rel)));
    let body = csv_document(
        &cfg,
        &notes,
        &["x", "re_u", "im_u", "residual"],
        &resolvent_rows(&u, &h, z, cfg.resolvent.output_points),
    )
    .map_err(CliError::usage)?;
    Ok(Outcome { body, code, messages })
}

/// Rows at every grid node, or at every `k`-th node (plus the last) when
/// `points` asks for fewer rows.
fn resolvent_rows(u: &GridFunction, h: &GridFunction, z: Complex64, points: usize) -> Vec<Vec<String>> {
    let n = u.len();
    let r = apply_operator(u, z, &[]);
    let stride = if points == 0 || points >= n {
        1
    } else {
        n.div_ceil(points)
    };
    let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    idx.into_iter()
        .map(|k| {
            vec![
                float(u.grid.nodes[k]),
                float(u.values[k].re),
                float(u.values[k].im),
                float((r[k] - h.values[k]).norm()),
            ]
        })
        .collect()
}

fn spectral(mut cfg: RunConfig) -> Result<Outcome, CliError> {
    let s = cfg.spectral.clone();
    let z = Complex64::new(s.z[0], s.z[1]);
    let lc = lc_problem(&mut cfg, window_bound(s.window).max(z.norm()))?;
    let ext = cfg.extension()?;
    let expr: Expr = s.h.parse().map_err(Error::from)?;
    let h = sample(&expr, lc.workspace().grid())?;
    let measure = spectral_measure(&lc, &ext, (s.window[0], s.window[1]), &scan_options(&cfg))?;
    let r = nevanlinna_check(&lc, &ext, z, &h, &measure, s.tolerance)?;
    let mut m = report(&cfg);
    m.insert("z".into(), complex(r.z));
    m.insert("lhs".into(), complex(r.lhs));
    m.insert("rhs".into(), complex(r.rhs));
    m.insert("discrepancy".into(), json!(r.discrepancy));
    m.insert("relative_discrepancy".into(), json!(r.relative_discrepancy));
    m.insert("tail_bound".into(), json!(r.tail_bound));
    m.insert("captured_mass".into(), json!(r.captured_mass));
    m.insert("h_norm_sq".into(), json!(r.h_norm_sq));
    m.insert("tolerance".into(), json!(r.tolerance));
    m.insert("status".into(), json!(r.status.to_string()));
    m.insert(
        "required_window".into(),
        r.required_window.map_or(Value::Null, |(a, b)| json!([a, b])),
    );
    m.insert("eigenvalue_count".into(), json!(measure.entries.len()));
    m.insert(
        "flagged".into(),
        json!(measure.flagged.iter().map(|(a, b)| [*a, *b]).collect::<Vec<_>>()),
    );
    let (code, msg) = match r.status {
        CheckStatus::Pass => (EXIT_OK, None),
        CheckStatus::Inconclusive => (
            EXIT_INCONCLUSIVE,
            Some(format!(
                "INCONCLUSIVE: tail bound {:.3e} exceeds the tolerance",
                r.tail_bound
            )),
        ),
        CheckStatus::Fail => (
            EXIT_FAILED,
            Some(format!(
                "FAIL: relative discrepancy {:.3e} > {}",
                r.relative_discrepancy, r.tolerance
            )),
        ),
    };
    Ok(Outcome {
        body: json_document(m),
        code,
        messages: msg.into_iter().collect(),
    })
}

fn verify(mut cfg: RunConfig) -> Result<Outcome, CliError> {
    let input = VerifyInput::from_config(&cfg)?;
    let suite = run_suite(&input)?;
    if let Some(x) = suite.x_max {
        cfg.domain.x_max = NumOrWord::Num(x);
    }
    let failures: Vec<&str> = suite.failures().iter().map(|c| c.name).collect();
    let inconclusive = suite.classification == EndpointClass::Inconclusive.to_string();
    let mut m = report(&cfg);
    m.insert("classification".into(), json!(suite.classification));
    m.insert("x_max".into(), json!(suite.x_max));
    m.insert("passed".into(), json!(failures.is_empty() && !inconclusive));
    m.insert(
        "checks".into(),
        serde_json::to_value(&suite.checks).unwrap_or(Value::Null),
    );
    let (code, messages) = if !failures.is_empty() {
        (
            EXIT_FAILED,
            vec![format!("verification failed: {}", failures.join(", "))],
        )
    } else if inconclusive {
        (
            EXIT_INCONCLUSIVE,
            vec!["endpoint classification inconclusive".to_string()],
        )
    } else {
        (EXIT_OK, Vec::new())
    };
    Ok(Outcome {
        body: json_document(m),
        code,
        messages,
    })
}
