//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use hyperkin::app::scenario::parse_scenario;
use hyperkin::expr::{BinOp, Func};
use hyperkin::{Expr, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn trig_term(rng: &mut ChaCha8Rng, amp: f64) -> String {
    let a = rng.random_range(-amp..amp);
    let k: [i32; 3] = [rng.random_range(-1..=2), rng.random_range(-1..=2), rng.random_range(-1..=1)];
    let phase = rng.random_range(-1.0..1.0);
    let f = if rng.random_bool(0.5) { "sin" } else { "cos" };
    format!("({a:.6})*{f}({}*u + ({})*v + ({})*t + ({phase:.6}))", k[0], k[1], k[2])
}

/// A surface motion `(u + p, v + q, r)` with small trigonometric polynomials
/// p, q, r over `[-1, 1]²`, in a Euclidean ambient for even seeds and a
/// conformally flat one for odd seeds.
pub fn random_motion(seed: u64, grid: usize) -> Scenario {
    let mut r = rng(seed);
    let mut poly = |terms: usize, amp: f64| (0..terms).map(|_| trig_term(&mut r, amp)).collect::<Vec<_>>().join(" + ");
    let x = format!("u + {}", poly(2, 0.08));
    let y = format!("v + {}", poly(2, 0.08));
    let z = poly(3, 0.3);
    let ambient = if seed % 2 == 0 {
        "kind = \"euclidean\"".to_string()
    } else {
        let mut r = rng(seed ^ 0x5eed);
        let c: Vec<f64> = (0..4).map(|_| r.random_range(-0.3..0.3)).collect();
        let f = format!("exp(({:.6})*x1 + ({:.6})*x2 + ({:.6})*x3 + ({:.6})*x1*x2)", c[0], c[1], c[2], c[3]);
        format!("kind = \"metric\"\nmetric = [[\"{f}\", \"0\", \"0\"], [\"0\", \"{f}\", \"0\"], [\"0\", \"0\", \"{f}\"]]")
    };
    let src = format!(
        "name = \"random-{seed}\"\ncoords = [\"u\", \"v\"]\ncomponents = [\"{x}\", \"{y}\", \"{z}\"]\n\
         domain = [[-1, 1], [-1, 1]]\ngrid = [{grid}, {grid}]\n[ambient]\n{ambient}\n"
    );
    parse_scenario(&src, &format!("random-{seed}")).expect("generated scenario is valid")
}

/// A random expression in u, v, t that is smooth and finite on `[-1, 1]³`.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..4) {
            0 => Expr::var("u"),
            1 => Expr::var("v"),
            2 => Expr::var("t"),
            _ => Expr::num((rng.random_range(-2.0..2.0_f64) * 100.0).round() / 100.0),
        };
    }
    let a = random_expr(rng, depth - 1);
    match rng.random_range(0..10) {
        0 => Expr::bin(BinOp::Add, a, random_expr(rng, depth - 1)),
        1 => Expr::bin(BinOp::Sub, a, random_expr(rng, depth - 1)),
        2 | 3 => Expr::bin(BinOp::Mul, a, random_expr(rng, depth - 1)),
        // Denominator bounded away from zero.
        4 => Expr::bin(BinOp::Div, a, Expr::bin(BinOp::Add, Expr::num(2.0), Expr::call(Func::Sin, random_expr(rng, depth - 1)))),
        5 => Expr::call(Func::Sin, a),
        6 => Expr::call(Func::Cos, a),
        7 => Expr::call(Func::Exp, Expr::call(Func::Sin, a)),
        8 => Expr::call(Func::Sqrt, Expr::bin(BinOp::Add, Expr::num(1.0), Expr::Pow(Box::new(a), 2.0))),
        _ => Expr::call(Func::Log, Expr::bin(BinOp::Add, Expr::num(2.0), Expr::call(Func::Cos, a))),
    }
}
