//! Replays the fuzz corpus seeds through the invariants the fuzz targets
//! assert, so they are checked on stable too.

use std::fs;
use std::path::PathBuf;

use lcspec_core::coeffexpr::Expr;
use lcspec_core::config::RunConfig;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn expression_seeds_parse_and_round_trip() {
    let all = seeds("expr_parse");
    assert!(all.len() >= 5);
    for (name, src) in all {
        let e: Expr = src.parse().unwrap_or_else(|err| panic!("{name}: {err}"));
        assert_eq!(e.to_string().parse::<Expr>().unwrap(), e, "{name}");
        let prog = e.compile();
        for x in [0.5, 1.0, 3.0] {
            assert_eq!(
                e.eval(x).unwrap().to_bits(),
                prog.eval(x).unwrap().to_bits(),
                "{name} at {x}"
            );
        }
    }
}

#[test]
fn config_seeds_are_valid() {
    let all = seeds("config_parse");
    assert!(all.len() >= 3);
    for (name, text) in all {
        let cfg = RunConfig::from_toml(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        cfg.problem().unwrap();
        cfg.extension().unwrap();
    }
}
