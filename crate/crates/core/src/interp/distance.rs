//! Branch distance rules with K = 1.

use crate::program::BinOp;

use super::Value;

pub const K: f64 = 1.0;

/// Keeps distances usable as fitness: NaN becomes `K`, infinities the largest finite value.
pub fn clamp(d: f64) -> f64 {
    if d.is_nan() {
        K
    } else if d.is_infinite() {
        f64::MAX
    } else {
        d
    }
}

#[derive(Debug, Clone, Copy)]
enum Num {
    I(i64),
    F(f64),
}

fn num(v: Value) -> Option<Num> {
    match v {
        Value::Int(i) => Some(Num::I(i)),
        Value::Float(f) => Some(Num::F(f)),
        Value::Bool(b) => Some(Num::I(i64::from(b))),
        _ => None,
    }
}

/// `a - b` as f64, exact for integers up to the final conversion.
fn diff(a: Num, b: Num) -> f64 {
    match (a, b) {
        (Num::I(x), Num::I(y)) => (i128::from(x) - i128::from(y)) as f64,
        (Num::I(x), Num::F(y)) => x as f64 - y,
        (Num::F(x), Num::I(y)) => x - y as f64,
        (Num::F(x), Num::F(y)) => x - y,
    }
}

/// Distances `(to_true, to_false)` for a comparison whose operands evaluated to `a` and `b`.
///
/// The outcome actually taken always gets distance 0, the other a positive one.
pub fn comparison_distances(op: BinOp, a: Value, b: Value, outcome: bool) -> (f64, f64) {
    let (t, f) = match (num(a), num(b)) {
        (Some(x), Some(y)) => {
            let d = diff(x, y);
            let eq = d.abs();
            let ne = if d == 0.0 { K } else { 0.0 };
            match op {
                BinOp::Eq => (eq, ne),
                BinOp::Ne => (ne, eq),
                BinOp::Lt => (pos(d + K), pos(-d)),
                BinOp::Le => (pos(d), pos(-d + K)),
                BinOp::Gt => (pos(-d + K), pos(d)),
                BinOp::Ge => (pos(-d), pos(d + K)),
                _ => (K, K),
            }
        }
        _ => (K, K),
    };
    finish(t, f, outcome)
}

fn pos(d: f64) -> f64 {
    if d > 0.0 {
        d
    } else {
        0.0
    }
}

/// Forces the taken outcome to 0 and the other to a positive value.
pub fn finish(t: f64, f: f64, outcome: bool) -> (f64, f64) {
    let positive = |d: f64| {
        let d = clamp(d);
        if d > 0.0 {
            d
        } else {
            K
        }
    };
    if outcome {
        (0.0, positive(f))
    } else {
        (positive(t), 0.0)
    }
}

/// Raw distance for `lhs op rhs` to evaluate to `outcome`.
pub fn branch_distance(op: BinOp, lhs: Value, rhs: Value, outcome: bool) -> f64 {
    let taken = match (num(lhs), num(rhs)) {
        (Some(x), Some(y)) => {
            let d = diff(x, y);
            match op {
                BinOp::Eq => d == 0.0,
                BinOp::Ne => d != 0.0,
                BinOp::Lt => d < 0.0,
                BinOp::Le => d <= 0.0,
                BinOp::Gt => d > 0.0,
                BinOp::Ge => d >= 0.0,
                _ => false,
            }
        }
        _ => match op {
            BinOp::Eq => lhs.same(&rhs),
            BinOp::Ne => !lhs.same(&rhs),
            _ => false,
        },
    };
    let (t, f) = comparison_distances(op, lhs, rhs, taken);
    if outcome {
        t
    } else {
        f
    }
}
