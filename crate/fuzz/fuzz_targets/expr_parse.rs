#![no_main]

use lcspec_core::coeffexpr::Expr;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|src: &str| {
    let Ok(e) = src.parse::<Expr>() else {
        return;
    };
    // Printing must parse back to the same tree.
    let printed = e.to_string();
    let again: Expr = printed.parse().expect("printed expression parses");
    assert_eq!(again, e, "{printed}");

    // The compiled program and the tree walker agree, errors included.
    let prog = e.compile();
    for x in [0.0, 0.5, 1.0, 3.0, 1e3] {
        match (e.eval(x), prog.eval(x)) {
            (Ok(a), Ok(b)) => assert!(
                a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()),
                "{a} vs {b} at {x}"
            ),
            (Err(_), Err(_)) => {}
            (a, b) => panic!("evaluators disagree at {x}: {a:?} vs {b:?}"),
        }
    }
});
