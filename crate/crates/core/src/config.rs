//! Run configuration files (TOML).
//!
//! ```toml
//! [problem]
//! p = "1"
//! q = "-x^8"
//! alpha = "inf"          # or a number
//!
//! [domain]
//! x_max = 6.0            # or "auto"
//! tail_eps = 1e-4
//!
//! [extension]
//! t = 0.0                # or "inf"
//! zeta = 0.0
//!
//! [solver]
//! ode_rtol = 1e-10
//! ode_atol = 1e-12
//! phase_step = 0.02
//! z_ref_bound = 64.0
//! cutoff = [0.375, 1.125]
//! ```
//!
//! Command sections (`[eig]`, `[resolvent]`, `[spectral]`, `[verify]`) are
//! optional. Unknown keys anywhere are errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extension::{Extension, LcOptions, TParam};
use crate::ode::Tolerances;
use crate::quasires::Cutoff;
use crate::slcore::{Alpha, Problem, SolverSettings, XMax};

/// A number, or a keyword such as `"inf"` or `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumOrWord {
    Num(f64),
    Word(String),
}

impl NumOrWord {
    fn keyword_or_num(&self, word: &str, field: &str) -> Result<Option<f64>> {
        match self {
            NumOrWord::Num(v) => Ok(Some(*v)),
            NumOrWord::Word(w) if w.trim().eq_ignore_ascii_case(word) => Ok(None),
            NumOrWord::Word(w) => match w.trim().parse::<f64>() {
                Ok(v) => Ok(Some(v)),
                Err(_) => Err(Error::Config(format!(
                    "{field}: expected a number or \"{word}\", got \"{w}\""
                ))),
            },
        }
    }
}

impl From<f64> for NumOrWord {
    fn from(v: f64) -> Self {
        NumOrWord::Num(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default = "one")]
    pub p: String,
    pub q: String,
    #[serde(default = "inf_word")]
    pub alpha: NumOrWord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSection {
    pub x_max: NumOrWord,
    pub tail_eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtensionSection {
    pub t: NumOrWord,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub ode_rtol: f64,
    pub ode_atol: f64,
    pub phase_step: f64,
    pub z_ref_bound: f64,
    pub max_nodes: usize,
    /// Cutoff interval `[a, b]`; defaults to `[x1/4, 3 x1/4]`, `x1 = min(2, X/4)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigSection {
    pub window: [f64; 2],
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolventSection {
    /// `[Re z, Im z]`.
    pub z: [f64; 2],
    pub h: String,
    /// Uniform output points on `[0, X]`; 0 means the computation grid.
    pub output_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralSection {
    pub z: [f64; 2],
    pub h: String,
    pub window: [f64; 2],
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Base resolution of the finite-difference oracle (`n` and `2n` are used).
    pub oracle_n: usize,
    pub window: [f64; 2],
    /// Run the finite-difference oracle comparison (the slowest check).
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub extension: ExtensionSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub eig: EigSection,
    #[serde(default)]
    pub resolvent: ResolventSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub verify: VerifySection,
}

fn one() -> String {
    "1".into()
}
fn inf_word() -> NumOrWord {
    NumOrWord::Word("inf".into())
}
fn auto_word() -> NumOrWord {
    NumOrWord::Word("auto".into())
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection {
            x_max: auto_word(),
            tail_eps: 1e-4,
        }
    }
}

impl Default for ExtensionSection {
    fn default() -> Self {
        ExtensionSection {
            t: NumOrWord::Num(0.0),
            zeta: 0.0,
        }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverSettings::default();
        SolverSection {
            ode_rtol: s.tol.rtol,
            ode_atol: s.tol.atol,
            phase_step: s.phase_step,
            z_ref_bound: LcOptions::default().z_ref_bound,
            max_nodes: s.max_nodes,
            cutoff: None,
        }
    }
}

impl Default for EigSection {
    fn default() -> Self {
        EigSection {
            window: [-10.0, 10.0],
            step: 0.25,
        }
    }
}

impl Default for ResolventSection {
    fn default() -> Self {
        ResolventSection {
            z: [0.0, 1.0],
            h: "exp(-x^2)".into(),
            output_points: 0,
        }
    }
}

impl Default for SpectralSection {
    fn default() -> Self {
        SpectralSection {
            z: [0.0, 1.0],
            h: "exp(-x^2)".into(),
            window: [-40.0, 40.0],
            tolerance: 1e-2,
        }
    }
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            oracle_n: 65536,
            window: [-10.0, 10.0],
            oracle: true,
        }
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

fn check_window(name: &str, w: [f64; 2]) -> Result<()> {
    check(w[0].is_finite() && w[1].is_finite() && w[0] <= w[1], || {
        format!(
            "{name}: window must be two finite numbers [lo, hi] with lo <= hi, got [{}, {}]",
            w[0], w[1]
        )
    })
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The resolved configuration as TOML (for reports).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.problem
            .p
            .parse::<crate::coeffexpr::Expr>()
            .map_err(|e| Error::Config(format!("problem.p: {e}")))?;
        self.problem
            .q
            .parse::<crate::coeffexpr::Expr>()
            .map_err(|e| Error::Config(format!("problem.q: {e}")))?;
        self.alpha()?;
        self.x_max()?;
        let d = &self.domain;
        check(d.tail_eps.is_finite() && d.tail_eps > 0.0 && d.tail_eps < 1.0, || {
            format!(
                "domain.tail_eps: must lie in (0, 1) (an L² tail, dimensionless), got {}",
                d.tail_eps
            )
        })?;
        self.extension()?;
        let s = &self.solver;
        check(s.ode_rtol > 0.0 && s.ode_rtol <= 0.1, || {
            format!(
                "solver.ode_rtol: relative tolerance must lie in (0, 0.1], got {}",
                s.ode_rtol
            )
        })?;
        check(s.ode_atol > 0.0 && s.ode_atol <= 0.1, || {
            format!(
                "solver.ode_atol: absolute tolerance must lie in (0, 0.1], got {}",
                s.ode_atol
            )
        })?;
        check(s.phase_step > 0.0 && s.phase_step <= 1.0, || {
            format!(
                "solver.phase_step: radians per grid interval must lie in (0, 1], got {}",
                s.phase_step
            )
        })?;
        check(s.z_ref_bound.is_finite() && s.z_ref_bound > 0.0, || {
            format!(
                "solver.z_ref_bound: bound on |z| must be positive, got {}",
                s.z_ref_bound
            )
        })?;
        check(s.max_nodes >= 16, || {
            format!("solver.max_nodes: need at least 16 nodes, got {}", s.max_nodes)
        })?;
        if let Some([a, b]) = s.cutoff {
            check(a.is_finite() && b.is_finite() && 0.0 < a && a < b, || {
                format!("solver.cutoff: need 0 < a < b, got [{a}, {b}]")
            })?;
        }
        check_window("eig.window", self.eig.window)?;
        check(self.eig.step > 0.0 && self.eig.step.is_finite(), || {
            format!("eig.step: scan spacing must be positive, got {}", self.eig.step)
        })?;
        for (name, z) in [("resolvent.z", self.resolvent.z), ("spectral.z", self.spectral.z)] {
            check(z[0].is_finite() && z[1].is_finite(), || {
                format!("{name}: must be two finite numbers [re, im]")
            })?;
        }
        for (name, h) in [("resolvent.h", &self.resolvent.h), ("spectral.h", &self.spectral.h)] {
            h.parse::<crate::coeffexpr::Expr>()
                .map_err(|e| Error::Config(format!("{name}: {e}")))?;
        }
        check(self.spectral.z[1] != 0.0, || {
            "spectral.z: imaginary part must be nonzero".into()
        })?;
        check_window("spectral.window", self.spectral.window)?;
        check(self.spectral.tolerance > 0.0 && self.spectral.tolerance < 1.0, || {
            format!(
                "spectral.tolerance: relative tolerance must lie in (0, 1), got {}",
                self.spectral.tolerance
            )
        })?;
        check_window("verify.window", self.verify.window)?;
        check(self.verify.oracle_n >= 16, || {
            format!(
                "verify.oracle_n: need at least 16 intervals, got {}",
                self.verify.oracle_n
            )
        })?;
        Ok(())
    }

    pub fn alpha(&self) -> Result<Alpha> {
        match self.problem.alpha.keyword_or_num("inf", "problem.alpha")? {
            None => Ok(Alpha::Infinite),
            Some(a) if a.is_finite() => Ok(Alpha::Finite(a)),
            Some(a) => Err(Error::Config(format!(
                "problem.alpha: must be finite or \"inf\", got {a}"
            ))),
        }
    }

    pub fn x_max(&self) -> Result<XMax> {
        match self.domain.x_max.keyword_or_num("auto", "domain.x_max")? {
            None => Ok(XMax::Auto),
            Some(x) if x.is_finite() && x > 0.0 => Ok(XMax::Fixed(x)),
            Some(x) => Err(Error::Config(format!(
                "domain.x_max: truncation point must be positive, got {x}"
            ))),
        }
    }

    pub fn extension(&self) -> Result<Extension> {
        let t = match self.extension.t.keyword_or_num("inf", "extension.t")? {
            None => TParam::Infinite,
            Some(t) if t.is_finite() => TParam::Finite(t),
            Some(t) => {
                return Err(Error::Config(format!(
                    "extension.t: must be finite or \"inf\", got {t}"
                )))
            }
        };
        Extension::new(t, self.extension.zeta).map_err(|e| Error::Config(format!("extension: {e}")))
    }

    pub fn settings(&self) -> SolverSettings {
        let s = &self.solver;
        SolverSettings {
            tol: Tolerances {
                rtol: s.ode_rtol,
                atol: s.ode_atol,
            },
            phase_step: s.phase_step,
            max_nodes: s.max_nodes,
            ..SolverSettings::default()
        }
    }

    /// The problem with solver settings applied (`x_max` may still be auto).
    pub fn problem(&self) -> Result<Problem> {
        let pr = Problem::new(
            &self.problem.p,
            &self.problem.q,
            self.alpha()?,
            self.x_max()?,
            self.domain.tail_eps,
        )?;
        Ok(pr.with_settings(self.settings()))
    }

    pub fn lc_options(&self) -> LcOptions {
        LcOptions {
            z_ref_bound: self.solver.z_ref_bound,
            cutoff: self.solver.cutoff.map(|[a, b]| Cutoff { a, b }),
            ..LcOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[problem]
q = "-x^8"

[domain]
x_max = 6
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(c.alpha().unwrap(), Alpha::Infinite);
        assert_eq!(c.x_max().unwrap(), XMax::Fixed(6.0));
        assert_eq!(c.extension().unwrap(), Extension::finite(0.0));
        assert_eq!(c.eig.window, [-10.0, 10.0]);
    }

    #[test]
    fn keywords_and_numbers() {
        let c = RunConfig::from_toml(
            "[problem]\nq = \"0\"\nalpha = 0.5\n[domain]\nx_max = \"auto\"\n[extension]\nt = \"inf\"\nzeta = 1\n",
        )
        .unwrap();
        assert_eq!(c.alpha().unwrap(), Alpha::Finite(0.5));
        assert_eq!(c.x_max().unwrap(), XMax::Auto);
        assert_eq!(c.extension().unwrap().t, TParam::Infinite);
        assert_eq!(c.extension().unwrap().zeta, 1.0);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let e = RunConfig::from_toml("[problem]\nqq = \"0\"\nq = \"0\"\n").unwrap_err();
        assert!(e.to_string().contains("qq"), "{e}");
        let e = RunConfig::from_toml(&format!("{BASE}[extra]\na = 1\n")).unwrap_err();
        assert!(e.to_string().contains("extra"), "{e}");
    }

    #[test]
    fn ranges_are_checked() {
        for (extra, needle) in [
            ("[solver]\node_rtol = 0\n", "solver.ode_rtol"),
            ("[solver]\nphase_step = 2\n", "solver.phase_step"),
            ("[eig]\nwindow = [1, -1]\n", "eig.window"),
            ("[extension]\nt = \"sometimes\"\n", "extension.t"),
            ("[spectral]\nz = [0, 0]\n", "spectral.z"),
        ] {
            let e = RunConfig::from_toml(&format!("{BASE}{extra}")).unwrap_err();
            assert!(e.to_string().contains(needle), "{needle}: {e}");
        }
        let e = RunConfig::from_toml("[problem]\nq = \"-x^\"\n").unwrap_err();
        assert!(e.to_string().contains("problem.q"), "{e}");
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::from_toml(BASE).unwrap();
        let again = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }
}
