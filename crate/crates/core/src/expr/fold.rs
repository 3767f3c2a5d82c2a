//! Constant folding and the small identity rewrites.
//!
//! Every rewrite here is exact in IEEE arithmetic except the reassociation of
//! constant factors (`c1*(c2*x)`, `(c1*x)/c2`), and the annihilator `x*0 → 0`,
//! which drops non-finite values of `x`.

use super::{BinaryOp, Expr, UnaryOp};

/// Bottom-up rebuild through the smart constructors.
pub fn simplify_fold(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Unary(op, c) => unary(*op, simplify_fold(c)),
        Expr::Binary(op, l, r) => binary(*op, simplify_fold(l), simplify_fold(r)),
    }
}

fn finite(v: f64) -> Option<Expr> {
    v.is_finite().then_some(Expr::Const(v))
}

pub(crate) fn unary(op: UnaryOp, c: Expr) -> Expr {
    if let Some(x) = c.as_const() {
        let folded = match op {
            UnaryOp::Neg => Some(Expr::Const(-x)),
            UnaryOp::Sin => finite(x.sin()),
            UnaryOp::Cos => finite(x.cos()),
            UnaryOp::Exp => finite(x.exp()),
        };
        if let Some(f) = folded {
            return f;
        }
    }
    match (op, c) {
        (UnaryOp::Neg, Expr::Unary(UnaryOp::Neg, inner)) => *inner,
        (op, c) => Expr::unary(op, c),
    }
}

pub(crate) fn neg(c: Expr) -> Expr {
    unary(UnaryOp::Neg, c)
}

fn split_neg(e: Expr) -> Result<Expr, Expr> {
    match e {
        Expr::Unary(UnaryOp::Neg, inner) => Ok(*inner),
        other => Err(other),
    }
}

pub(crate) fn add(l: Expr, r: Expr) -> Expr {
    match (l.as_const(), r.as_const()) {
        (Some(a), Some(b)) => {
            if let Some(f) = finite(a + b) {
                return f;
            }
        }
        (_, Some(0.0)) => return l,
        (Some(0.0), _) => return r,
        _ => {}
    }
    match (split_neg(l), split_neg(r)) {
        (Err(l), Ok(r)) => sub(l, r),
        (Ok(l), Err(r)) => sub(r, l),
        (Ok(l), Ok(r)) => neg(add(l, r)),
        (Err(l), Err(r)) => Expr::binary(BinaryOp::Add, l, r),
    }
}

pub(crate) fn sub(l: Expr, r: Expr) -> Expr {
    match (l.as_const(), r.as_const()) {
        (Some(a), Some(b)) => {
            if let Some(f) = finite(a - b) {
                return f;
            }
        }
        (_, Some(0.0)) => return l,
        (Some(0.0), _) => return neg(r),
        _ => {}
    }
    match split_neg(r) {
        Ok(r) => add(l, r),
        Err(r) => Expr::binary(BinaryOp::Sub, l, r),
    }
}

pub(crate) fn mul(l: Expr, r: Expr) -> Expr {
    match (l.as_const(), r.as_const()) {
        (Some(a), Some(b)) => {
            if let Some(f) = finite(a * b) {
                return f;
            }
        }
        (Some(a), _) | (_, Some(a)) if a == 0.0 => return Expr::zero(),
        _ => {}
    }
    // constants to the left; multiplication commutes exactly
    let (l, r) = if r.as_const().is_some() && l.as_const().is_none() {
        (r, l)
    } else {
        (l, r)
    };
    if let Some(a) = l.as_const() {
        if a == 1.0 {
            return r;
        }
        if a == -1.0 {
            return neg(r);
        }
        if let Expr::Binary(BinaryOp::Mul, inner_l, inner_r) = &r {
            if let Some(b) = inner_l.as_const() {
                if let Some(f) = finite(a * b) {
                    return mul(f, (**inner_r).clone());
                }
            }
        }
    }
    match (split_neg(l), split_neg(r)) {
        (Ok(l), Ok(r)) => mul(l, r),
        (Ok(l), Err(r)) | (Err(l), Ok(r)) => neg(mul(l, r)),
        (Err(l), Err(r)) => Expr::binary(BinaryOp::Mul, l, r),
    }
}

pub(crate) fn div(l: Expr, r: Expr) -> Expr {
    match (l.as_const(), r.as_const()) {
        (Some(a), Some(b)) if b != 0.0 => {
            if let Some(f) = finite(a / b) {
                return f;
            }
        }
        (_, Some(1.0)) => return l,
        (_, Some(-1.0)) => return neg(l),
        _ => {}
    }
    if let (Expr::Binary(BinaryOp::Mul, inner_l, inner_r), Some(b)) = (&l, r.as_const()) {
        if let Some(a) = inner_l.as_const() {
            if b != 0.0 {
                if let Some(f) = finite(a / b) {
                    return mul(f, (**inner_r).clone());
                }
            }
        }
    }
    match (split_neg(l), split_neg(r)) {
        (Ok(l), Ok(r)) => div(l, r),
        (Ok(l), Err(r)) | (Err(l), Ok(r)) => neg(div(l, r)),
        (Err(l), Err(r)) => Expr::binary(BinaryOp::Div, l, r),
    }
}

pub(crate) fn powi(base: Expr, n: i32) -> Expr {
    if n == 1 {
        return base;
    }
    if n == 0 {
        return Expr::one();
    }
    if let Some(a) = base.as_const() {
        if !(a == 0.0 && n < 0) {
            if let Some(f) = finite(a.powi(n)) {
                return f;
            }
        }
    }
    match split_neg(base) {
        Ok(inner) if n % 2 == 0 => powi(inner, n),
        Ok(inner) => neg(powi(inner, n)),
        Err(base) => Expr::powi(base, n),
    }
}

pub(crate) fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
    match op {
        BinaryOp::Add => add(l, r),
        BinaryOp::Sub => sub(l, r),
        BinaryOp::Mul => mul(l, r),
        BinaryOp::Div => div(l, r),
        BinaryOp::Pow => match r.as_const() {
            Some(n) => powi(l, n as i32),
            None => Expr::binary(BinaryOp::Pow, l, r),
        },
    }
}
