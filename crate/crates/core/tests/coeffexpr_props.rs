use lcspec_core::coeffexpr::{BinOp, Expr, Func};
use proptest::prelude::*;

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0.0f64..10.0).prop_map(Expr::Num),
        (0u32..20).prop_map(|n| Expr::Num(n as f64)),
        Just(Expr::X),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        let op = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow),
        ];
        let func = prop_oneof![
            Just(Func::Exp),
            Just(Func::Ln),
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Sqrt),
            Just(Func::Abs),
        ];
        prop_oneof![
            inner.clone().prop_map(Expr::neg),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::bin(o, a, b)),
            (func, inner.clone()).prop_map(|(f, a)| Expr::call(f, a)),
            (inner.clone(), inner).prop_map(|(a, b)| Expr::Pow2(Box::new(a), Box::new(b))),
        ]
    })
}

proptest! {
    #[test]
    fn compiled_matches_tree_walk(e in arb_expr(), x in -5.0f64..5.0) {
        let tree = e.eval(x);
        let prog = e.compile().eval(x);
        match (tree, prog) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_bits(), b.to_bits()),
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            (a, b) => prop_assert!(false, "tree {:?} vs program {:?}", a, b),
        }
    }

    #[test]
    fn print_parse_is_fixed_point(e in arb_expr()) {
        let printed = e.to_string();
        let reparsed: Expr = printed.parse().unwrap();
        prop_assert_eq!(&reparsed, &e);
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn multiplication_binds_tighter(a in -100.0f64..100.0, b in -100.0f64..100.0, c in -100.0f64..100.0) {
        let src = format!("{a:?}+{b:?}*{c:?}");
        let v = src.parse::<Expr>().unwrap().eval(0.0).unwrap();
        prop_assert_eq!(v, a + (b * c));
    }

    #[test]
    fn parser_never_panics(s in "[x0-9.+*/^() ,a-z-]{0,40}") {
        let _ = s.parse::<Expr>();
    }
}
