#![allow(dead_code)]

use cmc_core::expr::{parse, BinOp, Expr, Func, NamedConst, Var};
use cmc_core::geometry::eval_metric;
use cmc_core::spacetime::{counterexample_f, counterexample_fddot, counterexample_fdot, counterexample_tau, Model};
use cmc_core::{make_spec, Chart, Family, Point, SpacetimeSpec};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(cases) }
}

pub fn counterexample(eps: f64, n: usize, chart: Chart) -> SpacetimeSpec {
    make_spec(&Family::Counterexample { eps, n, chart }).unwrap()
}

/// Composite Simpson rule with `m` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m).map(|k| f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Plain bisection for the `t` with `τ(t) = tau` on the counterexample.
pub fn tau_inverse(tau: f64, eps: f64, n: usize) -> f64 {
    let (mut lo, mut hi) = (-eps * (1.0 - 1e-12), eps * (1.0 - 1e-12));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if counterexample_tau(mid, eps, n).unwrap() < tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().copied().chain((0..n).map(|j| if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        let d = m[c][c];
        m[c].iter_mut().for_each(|x| *x /= d);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let row_c = m[c].clone();
                m[r].iter_mut().zip(row_c).for_each(|(x, y)| *x -= f * y);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `∂_a g` by fourth-order central differences of the metric.
pub fn metric_derivative(spec: &SpacetimeSpec, coords: &[f64], a: usize, h: f64) -> Vec<Vec<f64>> {
    let g_at = |s: f64| {
        let mut c = coords.to_vec();
        c[a] += s;
        eval_metric(spec, &Point::new(c[0], c[1..].to_vec())).unwrap().g
    };
    let (p2, p1, m1, m2) = (g_at(2.0 * h), g_at(h), g_at(-h), g_at(-2.0 * h));
    let n = p1.len();
    (0..n)
        .map(|i| (0..n).map(|j| (-p2[i][j] + 8.0 * p1[i][j] - 8.0 * m1[i][j] + m2[i][j]) / (12.0 * h)).collect())
        .collect()
}

/// Largest deviation of the Christoffel symbols from the ones built out of
/// differenced metric components.
pub fn christoffel_gap(spec: &SpacetimeSpec, coords: &[f64]) -> f64 {
    let m = eval_metric(spec, &Point::new(coords[0], coords[1..].to_vec())).unwrap();
    let dim = coords.len();
    let dg: Vec<_> = (0..dim).map(|a| metric_derivative(spec, coords, a, 1e-3)).collect();
    let ginv = inverse(&m.g);
    let mut worst = 0.0f64;
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let want: f64 = (0..dim).map(|d| 0.5 * ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c])).sum();
                worst = worst.max((m.gamma[a][b][c] - want).abs());
            }
        }
    }
    worst
}

/// Ricci tensor of the warped product over the unit sphere, written out by hand.
pub fn warped_ricci(spec: &SpacetimeSpec, eps: f64, x0: f64, space: &[f64]) -> Vec<Vec<f64>> {
    let n = spec.n;
    let (t, conformal) = match &spec.model {
        Model::ConformalWarped { clock, .. } => (clock.t_of_x0(x0), true),
        _ => (x0, false),
    };
    let f = counterexample_f(t, eps).unwrap();
    let fd = counterexample_fdot(t, eps).unwrap();
    let fdd = counterexample_fddot(t, eps).unwrap();
    let e2f = (2.0 * f).exp();
    // round metric in hyperspherical angles
    let mut sigma_hat = vec![1.0; n];
    for k in 1..n {
        sigma_hat[k] = sigma_hat[k - 1] * space[k - 1].sin().powi(2);
    }
    let mut r = vec![vec![0.0; n + 1]; n + 1];
    r[0][0] = -(n as f64) * (fdd + fd * fd) * if conformal { e2f } else { 1.0 };
    for i in 0..n {
        // σ_ij is the conformal spatial metric; in the Gaussian chart it is e^{2f}σ̂
        r[i + 1][i + 1] = ((n as f64 - 1.0) + (fdd + n as f64 * fd * fd) * e2f) * sigma_hat[i];
    }
    r
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0u32..100).prop_map(|k| Expr::Num(k as f64 / 10.0)),
        Just(Expr::Var(Var::T)),
        Just(Expr::Var(Var::X)),
        Just(Expr::Const(NamedConst::Pi)),
        Just(Expr::Const(NamedConst::E)),
    ]
}

fn func() -> impl Strategy<Value = Func> {
    prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Tan), Just(Func::Exp), Just(Func::Log), Just(Func::Sqrt),]
}

fn binop() -> impl Strategy<Value = BinOp> {
    prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)]
}

/// Random trees of depth at most 6.
pub fn ast() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(6, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            (func(), inner.clone()).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            (binop(), inner.clone(), inner).prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
        ]
    })
}

pub fn point() -> impl Strategy<Value = (f64, f64)> {
    (0.1f64..2.0, -3.0f64..3.0)
}

/// Independent precedence-climbing evaluator for `+ - * / ^` and unary minus
/// over plain numbers.
struct Oracle<'a> {
    toks: Vec<&'a str>,
    pos: usize,
    /// Some intermediate value was not finite.
    overflow: bool,
}

impl<'a> Oracle<'a> {
    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }

    fn bump(&mut self) -> &'a str {
        self.pos += 1;
        self.toks[self.pos - 1]
    }

    fn expr(&mut self, min_prec: u8) -> f64 {
        let mut lhs = if self.peek() == Some("-") {
            self.bump();
            // unary minus binds looser than `^` and tighter than `*`
            -self.expr(3)
        } else {
            self.bump().parse::<f64>().unwrap()
        };
        while let Some(op) = self.peek() {
            let (prec, right) = match op {
                "+" | "-" => (1, false),
                "*" | "/" => (2, false),
                "^" => (4, true),
                _ => unreachable!(),
            };
            if prec < min_prec {
                break;
            }
            self.bump();
            let rhs = self.expr(if right { 3 } else { prec + 1 });
            lhs = match op {
                "+" => lhs + rhs,
                "-" => lhs - rhs,
                "*" => lhs * rhs,
                "/" => lhs / rhs,
                _ => lhs.powf(rhs),
            };
            self.overflow |= !lhs.is_finite();
        }
        lhs
    }
}

/// Space separated numbers, binary operators and unary minus.
pub fn flat_expression() -> impl Strategy<Value = String> {
    let operand =
        (prop::bool::weighted(0.2), 1u32..9).prop_map(|(neg, k)| if neg { format!("- {k}") } else { k.to_string() });
    let op = prop_oneof![Just("+"), Just("-"), Just("*"), Just("/"), Just("^")];
    (operand.clone(), prop::collection::vec((op, operand), 0..6)).prop_map(|(first, rest)| {
        let mut s = first;
        for (o, v) in rest {
            s.push_str(&format!(" {o} {v}"));
        }
        s
    })
}

pub fn check_round_trip(e: &Expr, pts: &[(f64, f64)]) -> Result<(), TestCaseError> {
    let printed = e.to_string();
    let back = parse(&printed).unwrap();
    prop_assert_eq!(&back, e);
    for &(t, x) in pts {
        match (e.eval(t, x), back.eval(t, x)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs())),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{printed}: {a:?} vs {b:?}"),
        }
    }
    Ok(())
}

pub fn check_precedence(src: &str) -> Result<(), TestCaseError> {
    let toks: Vec<&str> = src.split(' ').collect();
    let mut oracle = Oracle { toks, pos: 0, overflow: false };
    let want = oracle.expr(0);
    match parse(src).unwrap().eval(0.0, 0.0) {
        Ok(got) => prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()), "{src}: {got} vs {want}"),
        Err(_) => prop_assert!(oracle.overflow, "{src}"),
    }
    Ok(())
}

/// Central differences at two step sizes; `None` when they disagree or when
/// rounding in `f` swamps the difference, i.e. the oracle itself is not resolved.
pub fn resolved(f: impl Fn(f64) -> Option<f64>, h: f64, second: bool) -> Option<f64> {
    let d = |h: f64| -> Option<f64> {
        let (p, m) = (f(h)?, f(-h)?);
        Some(if second { (p - 2.0 * f(0.0)? + m) / (h * h) } else { (p - m) / (2.0 * h) })
    };
    let (a, b) = (d(h)?, d(0.5 * h)?);
    let step = if second { 0.25 * h * h } else { 0.5 * h };
    let noise = 4.0 * f64::EPSILON * f(0.0)?.abs() / step;
    ((a - b).abs() <= 1e-7 * (1.0 + b.abs()) && noise <= 1e-8 * (1.0 + b.abs())).then_some((4.0 * b - a) / 3.0)
}

/// Jet components against resolved differences, relative to `max(|jet|, 1)`.
pub fn check_jet(e: &Expr, t: f64, x: f64, tol: f64) -> Result<(), TestCaseError> {
    let Ok(j) = e.eval_jet(t, x) else { return Ok(()) };
    let along_t = |s: f64| e.eval(t + s, x).ok();
    let along_x = |s: f64| e.eval(t, x + s).ok();
    let checks = [
        (j.t, resolved(along_t, 1e-4, false)),
        (j.x, resolved(along_x, 1e-4, false)),
        (j.tt, resolved(along_t, 1e-3, true)),
        (j.xx, resolved(along_x, 1e-3, true)),
        (j.tx, resolved(|s| e.eval_jet(t, x + s).ok().map(|k| k.t), 1e-4, false)),
    ];
    for (k, (exact, fd)) in checks.into_iter().enumerate() {
        if let Some(fd) = fd {
            prop_assert!(
                (exact - fd).abs() <= tol * exact.abs().max(1.0),
                "{e} at ({t}, {x}) component {k}: jet {exact} fd {fd}"
            );
        }
    }
    Ok(())
}
