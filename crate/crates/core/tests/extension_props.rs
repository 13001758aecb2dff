mod common;

use common::{c, neg_x8};
use lcspec_core::extension::*;
use lcspec_core::l2grid::{bilinear, bump, from_fn, inner_value, norm_sq, sample};
use lcspec_core::quasires::{apply_quasiresolvent, relative_residual};
use lcspec_core::slcore::{wronskian_at, wronskian_limit, Alpha, GridFunction, Problem, XMax};
use lcspec_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn ext(t: TParam, zeta: f64) -> Extension {
    Extension::new(t, zeta).unwrap()
}

const TS: [TParam; 3] = [TParam::Finite(0.0), TParam::Finite(1.0), TParam::Infinite];

fn test_h() -> GridFunction {
    let g = neg_x8().workspace().grid().clone();
    let h1 = from_fn(&g, bump(1.0, 0.7)).unwrap();
    let h2 = from_fn(&g, bump(2.5, 0.9)).unwrap();
    GridFunction::lincomb(&[(c(1.0, 0.0), &h1), (c(-0.4, 0.0), &h2)]).unwrap()
}

/// `t phi_ζ + theta_ζ`, or `phi_ζ` for `t = ∞`.
fn boundary_function(e: &Extension) -> GridFunction {
    let a = neg_x8().anchor(e).unwrap();
    match e.t {
        TParam::Finite(t) => GridFunction::lincomb(&[(c(t, 0.0), &a.phi), (c(1.0, 0.0), &a.theta)]).unwrap(),
        TParam::Infinite => a.phi.clone(),
    }
}

#[test]
fn data_at_anchor_is_identity() {
    for zeta in [0.0, 1.0] {
        let d = nevanlinna_data(neg_x8(), &ext(TParam::Finite(0.0), zeta), c(zeta, 0.0)).unwrap();
        assert_eq!(d.fields(), [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    }
}

#[test]
fn data_conjugates_with_z() {
    let e = ext(TParam::Finite(0.5), 0.0);
    let z = c(1.5, 0.8);
    let a = nevanlinna_data(neg_x8(), &e, z).unwrap();
    let b = nevanlinna_data(neg_x8(), &e, z.conj()).unwrap();
    for (x, y) in a.fields().iter().zip(b.fields()) {
        assert!((x.conj() - y).norm() <= 1e-12 * x.norm().max(1.0), "{x} vs {y}");
    }
    let ga = gamma_from(&a, e.t).unwrap();
    let gb = gamma_from(&b, e.t).unwrap();
    assert!((ga.conj() - gb).norm() <= 1e-12 * ga.norm());
}

#[test]
fn quadrature_and_wronskian_routes_agree() {
    let e = ext(TParam::Finite(0.0), 0.0);
    for z in [c(0.0, 1.0), c(2.5, 0.0), c(-3.0, 2.0)] {
        let d = nevanlinna_data(neg_x8(), &e, z).unwrap();
        assert!(d.max_cross_check() <= 1e-6, "z = {z}: {:?}", d.cross_check_residuals);
    }
}

#[test]
fn gamma_matches_regression_fixture() {
    let path = common::fixtures_dir().join("gamma.csv");
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut seen = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let t: TParam = rec[1].parse().unwrap();
        let num = |i: usize| rec[i].parse::<f64>().unwrap();
        let z = c(num(2), num(3));
        let want = c(num(4), num(5));
        let got = gamma(neg_x8(), &ext(t, 0.0), z).unwrap();
        assert!(got.im > 0.0);
        assert!((got - want).norm() <= 1e-9 * want.norm(), "t = {t}: {got} vs {want}");
        seen += 1;
    }
    assert_eq!(seen, 3);
}

#[test]
fn resolvent_solves_and_satisfies_boundary_condition() {
    let h = test_h();
    for t in TS {
        let e = ext(t, 0.0);
        for z in [c(0.0, 1.0), c(3.0, -0.5)] {
            let u = apply_resolvent(neg_x8(), &e, z, &h).unwrap();
            let res = relative_residual(&u, &h, z, &[]).unwrap();
            assert!(res <= 1e-6, "t = {t}, z = {z}: residual {res:e}");
            let (w, _) = wronskian_limit(&u, &boundary_function(&e)).unwrap();
            assert!(w.norm() <= 1e-6, "t = {t}: boundary form {w}");
        }
    }
}

#[test]
fn defect_solution_properties() {
    let h = test_h();
    let z = c(0.5, 1.0);
    for t in TS {
        let e = ext(t, 0.0);
        let sol = neg_x8().solutions(z).unwrap();
        let f = defect_solution(neg_x8(), &e, z).unwrap();
        let worst = (0..f.len())
            .map(|k| (wronskian_at(&sol.phi, &f, k) - 1.0).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "{{phi, f}} drift {worst:e}");
        let (w, _) = wronskian_limit(&f, &boundary_function(&e)).unwrap();
        assert!(w.norm() <= 1e-6, "t = {t}: {w}");
        let a = apply_resolvent(neg_x8(), &e, z, &h).unwrap();
        let b = resolvent_via_defect(neg_x8(), &e, z, &h).unwrap();
        assert!(a.sub(&b).unwrap().sup_norm() <= 1e-8 * a.sup_norm());
    }
}

#[test]
fn rank_one_term_vanishes_for_orthogonal_h() {
    let z = c(0.0, 1.0);
    let g = neg_x8().workspace().grid().clone();
    let sol = neg_x8().solutions(z).unwrap();
    let h1 = from_fn(&g, bump(1.0, 0.7)).unwrap();
    let h2 = from_fn(&g, bump(2.5, 0.9)).unwrap();
    let k = -bilinear(&h1, &sol.phi).unwrap() / bilinear(&h2, &sol.phi).unwrap();
    let h = GridFunction::lincomb(&[(c(1.0, 0.0), &h1), (k, &h2)]).unwrap();
    let r = apply_resolvent(neg_x8(), &ext(TParam::Finite(2.0), 0.0), z, &h).unwrap();
    let q = apply_quasiresolvent(&sol, &h).unwrap();
    assert!(r.sub(&q).unwrap().sup_norm() <= 1e-12 * q.sup_norm());
}

#[test]
fn secular_is_one_at_anchor() {
    for zeta in [0.0, 1.0] {
        for t in [-2.0, 0.0, 5.0] {
            let f = secular_value(neg_x8(), &ext(TParam::Finite(t), zeta), zeta).unwrap();
            assert!((f - 1.0).abs() <= 1e-9, "zeta = {zeta}, t = {t}: {f}");
        }
    }
}

#[test]
fn secular_routes_agree() {
    let r = secular(neg_x8(), &ext(TParam::Finite(1.0), 0.0), 4.0).unwrap();
    assert!(r.discrepancy <= 1e-6 * r.value.abs().max(1.0), "{r:?}");
}

#[test]
fn eigenvalue_lists_for_t0_and_t1_are_disjoint() {
    let scan = ScanOptions::default();
    let a = eigenvalues(neg_x8(), &ext(TParam::Finite(0.0), 0.0), (-10.0, 10.0), &scan).unwrap();
    let b = eigenvalues(neg_x8(), &ext(TParam::Finite(1.0), 0.0), (-10.0, 10.0), &scan).unwrap();
    assert!(!a.eigenpairs.is_empty() && !b.eigenpairs.is_empty());
    assert!(a.alternation_ok && b.alternation_ok && a.flagged.is_empty());
    for x in a.lambdas() {
        for y in b.lambdas() {
            assert!((x - y).abs() > 1e-6);
        }
    }
}

#[test]
fn infinite_t_has_anchor_as_eigenvalue() {
    for zeta in [0.0, 1.0] {
        let l = eigenvalues(
            neg_x8(),
            &ext(TParam::Infinite, zeta),
            (-10.0, 10.0),
            &ScanOptions::default(),
        )
        .unwrap();
        assert!(
            l.lambdas().iter().any(|x| (x - zeta).abs() <= 1e-9),
            "{:?}",
            l.lambdas()
        );
    }
}

#[test]
fn free_problem_needs_lc() {
    let pr = Problem::new("1", "0", Alpha::Infinite, XMax::Fixed(8.0), 1e-4).unwrap();
    assert_eq!(LcProblem::new(pr, &LcOptions::default()).err(), Some(Error::LcRequired));
}

#[test]
fn spectral_measure_and_bessel_partial_sums() {
    let e = ext(TParam::Finite(0.0), 0.0);
    let expr = "exp(-x^2)".parse().unwrap();
    let h = sample(&expr, neg_x8().workspace().grid()).unwrap();
    let total = norm_sq(&h).value;
    let mut prev = 0.0;
    for w in [10.0, 20.0, 40.0] {
        let m = spectral_measure(neg_x8(), &e, (-w, w), &ScanOptions::default()).unwrap();
        for pair in m.entries.windows(2) {
            assert!(pair[0].lambda < pair[1].lambda);
        }
        assert!(m.entries.iter().all(|en| en.weight > 0.0));
        let r = nevanlinna_check(neg_x8(), &e, c(0.0, 1.0), &h, &m, 1e-2).unwrap();
        assert!(r.captured_mass >= prev - 1e-12 && r.captured_mass <= total * (1.0 + 1e-9));
        // Herglotz: Im z > 0 gives Im LHS > 0.
        assert!(r.lhs.im > 0.0);
        prev = r.captured_mass;
    }
}

#[test]
fn nevanlinna_check_of_zero_is_zero() {
    let e = ext(TParam::Finite(0.0), 0.0);
    let h = GridFunction::zeros(neg_x8().workspace().grid().clone());
    let m = spectral_measure(neg_x8(), &e, (-10.0, 10.0), &ScanOptions::default()).unwrap();
    let r = nevanlinna_check(neg_x8(), &e, c(0.0, 1.0), &h, &m, 1e-2).unwrap();
    assert_eq!(r.lhs, c(0.0, 0.0));
    assert_eq!(r.rhs, c(0.0, 0.0));
}

#[test]
fn zeta_shift_reproduces_eigenvalue_lists() {
    let scan = ScanOptions::default();
    let lc = neg_x8();
    for t in [TParam::Finite(0.0), TParam::Finite(2.0), TParam::Infinite] {
        let shifted = eigenvalues(lc, &ext(t, 1.0), (-10.0, 10.0), &scan).unwrap().lambdas();
        assert!(!shifted.is_empty());
        let t0 = parameter_through(lc, 0.0, shifted[0]).unwrap();
        let plain = eigenvalues(lc, &ext(t0, 0.0), (-10.0, 10.0), &scan).unwrap().lambdas();
        assert_eq!(plain.len(), shifted.len(), "t = {t} -> {t0}: {shifted:?} vs {plain:?}");
        for (a, b) in shifted.iter().zip(&plain) {
            assert!((a - b).abs() <= 1e-6, "t = {t}: {a} vs {b}");
        }
    }
}

#[test]
fn identities_hold_with_shifted_anchor() {
    let e = ext(TParam::Finite(1.0), 1.0);
    let z = c(0.5, 2.0);
    let [a, b] = solution_identity_residuals(neg_x8(), &e, z).unwrap();
    assert!(a <= 1e-6 && b <= 1e-6);
    for m in defect_membership(neg_x8(), &e, z, 1e-6).unwrap() {
        assert!(m.pass, "{m:?}");
    }
}

#[test]
fn cutoff_route_needs_grid_breakpoints() {
    // A cutoff whose endpoints are not nodes of the grid is refused.
    let cut = lcspec_core::quasires::Cutoff { a: 0.3001, b: 1.7003 };
    assert!(gamma_via_cutoff(neg_x8(), &ext(TParam::Finite(0.0), 0.0), c(0.0, 1.0), &cut).is_err());
}

fn bump_pair(a: f64, b: f64) -> GridFunction {
    let g = neg_x8().workspace().grid().clone();
    let h1 = from_fn(&g, bump(1.2, 0.8)).unwrap();
    let h2 = from_fn(&g, bump(3.0, 0.6)).unwrap();
    GridFunction::lincomb(&[(c(a, 0.0), &h1), (c(b, 0.0), &h2)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_at_anchor_is_t(t in -10.0f64..10.0, zeta in -2.0f64..2.0) {
        let g = gamma(neg_x8(), &ext(TParam::Finite(t), zeta), c(zeta, 0.0)).unwrap();
        prop_assert!((g - t).norm() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gamma_is_herglotz(t in -3.0f64..3.0, re in -6.0f64..6.0, im in 0.05f64..4.0) {
        let e = ext(TParam::Finite(t), 0.0);
        let z = c(re, im);
        let g = gamma(neg_x8(), &e, z).unwrap();
        let gc = gamma(neg_x8(), &e, z.conj()).unwrap();
        prop_assert!(g.im > 0.0, "gamma({z}) = {g}");
        prop_assert!((g.conj() - gc).norm() <= 1e-10 * g.norm());
    }

    #[test]
    fn resolvent_is_dissipative(a in -1.0f64..1.0, b in -1.0f64..1.0, re in -5.0f64..5.0, im in prop_oneof![-2.0f64..-0.1, 0.1f64..2.0]) {
        prop_assume!(a.abs() + b.abs() > 0.1);
        let h = bump_pair(a, b);
        let z = c(re, im);
        let u = apply_resolvent(neg_x8(), &ext(TParam::Infinite, 0.0), z, &h).unwrap();
        let form: Complex64 = inner_value(&u, &h).unwrap();
        prop_assert!(form.im / z.im > 0.0);
    }

    #[test]
    fn resolvent_is_symmetric(a in -1.0f64..1.0, b in -1.0f64..1.0, t in -2.0f64..2.0) {
        let f = bump_pair(a, 1.0);
        let g = bump_pair(1.0, b);
        let e = ext(TParam::Finite(t), 0.0);
        let z = c(0.3, 1.0);
        let left = inner_value(&apply_resolvent(neg_x8(), &e, z, &f).unwrap(), &g).unwrap();
        let right = inner_value(&f, &apply_resolvent(neg_x8(), &e, z.conj(), &g).unwrap()).unwrap();
        prop_assert!((left - right).norm() <= 1e-8 * left.norm());
    }
}
