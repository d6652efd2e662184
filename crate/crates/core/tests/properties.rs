//! Property tests over generated expressions, jets, ambients and motions.

mod common;

use std::collections::HashMap;

use hyperkin::ambient::{ambient_point, bianchi_residual, pair_antisymmetry_residual, AmbientSpec};
use hyperkin::app::verify::invariant_suite;
use hyperkin::expr::{eval_f64, eval_jet, JetEnv};
use hyperkin::jet::{seed, ElemFn};
use hyperkin::{parse_str, run_grid, Expr, RunOptions, VariableSet};
use proptest::prelude::*;
use serde_json::Value;

const NAMES: [&str; 3] = ["u", "v", "t"];

fn eval_at(e: &Expr, p: &[f64]) -> f64 {
    let env: HashMap<&str, f64> = NAMES.iter().copied().zip(p.iter().copied()).collect();
    eval_f64(e, &env).unwrap()
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0_f64, 3)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

/// Structural float comparison that treats `1` and `1.0` alike.
fn same_values(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64().map(f64::to_bits) == y.as_f64().map(f64::to_bits),
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| same_values(p, q)),
        (Value::Object(x), Value::Object(y)) => x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| same_values(v, w))),
        _ => a == b,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_then_parsing_preserves_values(seed in any::<u64>(), p in point()) {
        let e = common::random_expr(&mut common::rng(seed), 4);
        let printed = e.to_string();
        let back = parse_str(&printed).unwrap();
        prop_assert_eq!(eval_at(&back, &p).to_bits(), eval_at(&e, &p).to_bits());
        // The canonical text is a fixed point after one round.
        let again = back.to_string();
        prop_assert_eq!(parse_str(&again).unwrap().to_string(), again);
    }

    #[test]
    fn folding_preserves_values(seed in any::<u64>(), p in point()) {
        let e = common::random_expr(&mut common::rng(seed), 4);
        let folded = e.fold_constants();
        prop_assert!(close(eval_at(&folded, &p), eval_at(&e, &p), 1e-12));
    }

    #[test]
    fn first_partials_match_central_differences(seed in any::<u64>(), p in point()) {
        let e = common::random_expr(&mut common::rng(seed), 3);
        let vars = VariableSet::new(NAMES).unwrap();
        let jet = eval_jet(&e, &JetEnv::seeded(&vars, &p).unwrap()).unwrap();
        prop_assert!(close(jet.value(), eval_at(&e, &p), 1e-14));
        let h = 1e-5;
        for i in 0..3 {
            let (mut a, mut b) = (p.clone(), p.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (eval_at(&e, &a) - eval_at(&e, &b)) / (2.0 * h);
            prop_assert!(close(jet.d1(i), fd, 1e-6), "∂{} of {}: {} vs {}", i, e, jet.d1(i), fd);
        }
    }

    #[test]
    fn pythagorean_identity_has_no_derivatives(p in point()) {
        let vars = VariableSet::new(NAMES).unwrap();
        let x = seed(&vars, &p).unwrap();
        let arg = &(&x[0] * &x[1]) + &x[2].sin().unwrap();
        let (s, c) = (arg.sin().unwrap(), arg.cos().unwrap());
        let one = &(&s * &s) + &(&c * &c);
        prop_assert!((one.value() - 1.0).abs() < 1e-14);
        for idx in [vec![0], vec![1, 2], vec![0, 0, 1], vec![2, 2, 2]] {
            prop_assert!(one.partial(&idx).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn product_rule_and_log_exp(p in point()) {
        let vars = VariableSet::new(NAMES).unwrap();
        let x = seed(&vars, &p).unwrap();
        let (a, b) = (x[0].sin().unwrap(), &x[1] * &x[2]);
        let ab = &a * &b;
        let rule = a.d1(0) * b.value() + a.value() * b.d1(0);
        prop_assert!(close(ab.d1(0), rule, 1e-14));
        let round = x[0].exp().unwrap().apply(ElemFn::Log).unwrap();
        for idx in [vec![0], vec![0, 0], vec![0, 0, 0]] {
            prop_assert!(close(round.partial(&idx).unwrap(), x[0].partial(&idx).unwrap(), 1e-13));
        }
    }

    #[test]
    fn conformal_curvature_symmetries(c in proptest::collection::vec(-0.4..0.4_f64, 3), x in proptest::collection::vec(-1.0..1.0_f64, 3)) {
        let f = format!("exp(({})*x1 + ({})*x2^2 + ({})*x1*x3)", c[0], c[1], c[2]);
        let zero = || parse_str("0").unwrap();
        let entries = (0..3).map(|i| (0..3).map(|j| if i == j { parse_str(&f).unwrap() } else { zero() }).collect()).collect();
        let at = ambient_point(&AmbientSpec::metric(entries).unwrap(), &x).unwrap();
        prop_assert!(pair_antisymmetry_residual(&at.curvature_flat) < 1e-12);
        prop_assert!(bianchi_residual(&at.curvature) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn random_motions_satisfy_every_invariant(seed in 100u64..10_000) {
        let s = common::random_motion(seed, 3);
        let r = run_grid(&s, &RunOptions { fd_validate: true, ..Default::default() }).unwrap();
        for c in invariant_suite(&r) {
            prop_assert!(c.passed, "{} {}: {:e} > {:e}", s.name, c.name, c.residual, c.tolerance);
        }
    }

    #[test]
    fn reports_read_back_bit_exactly(seed in 100u64..10_000) {
        let s = common::random_motion(seed, 2);
        let r = run_grid(&s, &RunOptions::default()).unwrap();
        let text = r.to_json().unwrap();
        let back: Value = serde_json::from_str(&text).unwrap();
        prop_assert!(same_values(&back, &r.to_value().unwrap()));
    }
}
