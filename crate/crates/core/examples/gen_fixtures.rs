//! Regenerates the regression fixtures under `tests/fixtures/v1/`:
//! finite-difference oracle eigenvalues and `gamma_t(i)` for the
//! `q = -x^8`, Dirichlet, `X = 6` problem.
//!
//! ```text
//! cargo run --release -p lcspec-core --example gen_fixtures
//! ```

use std::path::PathBuf;

use lcspec_core::extension::{gamma, Extension, LcOptions, LcProblem, TParam};
use lcspec_core::oracle::{oracle_eigenvalues, write_fixtures, FixtureRow};
use lcspec_core::slcore::{Alpha, Problem, XMax};
use num_complex::Complex64;

const PROBLEM_ID: &str = "neg_x8_dirichlet_x6";
const N: usize = 65536;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/v1");
    let prob = Problem::new("1", "-x^8", Alpha::Infinite, XMax::Fixed(6.0), 1e-4)?;
    let ts = [TParam::Finite(0.0), TParam::Finite(1.0), TParam::Infinite];

    let mut rows = Vec::new();
    for t in ts {
        let ext = Extension::new(t, 0.0)?;
        let (eigs, flagged) = oracle_eigenvalues(&prob, &ext, (-10.0, 10.0), N)?;
        if !flagged.is_empty() {
            return Err(format!("ambiguous Richardson pairing for t = {t}").into());
        }
        rows.extend(eigs.iter().map(|e| FixtureRow {
            problem_id: PROBLEM_ID.into(),
            t,
            n: N,
            lambda: e.coarse,
            extrapolated: e.extrapolated,
        }));
    }
    let path = dir.join("oracle_eigenvalues.csv");
    write_fixtures(&path, &rows)?;
    println!("wrote {} rows to {}", rows.len(), path.display());

    let lc = LcProblem::new(prob, &LcOptions::default())?;
    let z = Complex64::new(0.0, 1.0);
    let path = dir.join("gamma.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["problem-id", "t", "re_z", "im_z", "re_gamma", "im_gamma"])?;
    for t in ts {
        let g = gamma(&lc, &Extension::new(t, 0.0)?, z)?;
        w.write_record([
            PROBLEM_ID.to_string(),
            t.to_string(),
            format!("{:.16e}", z.re),
            format!("{:.16e}", z.im),
            format!("{:.16e}", g.re),
            format!("{:.16e}", g.im),
        ])?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}
