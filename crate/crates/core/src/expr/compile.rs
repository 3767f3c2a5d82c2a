use super::{BinaryOp, Expr, UnaryOp, Var};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Load(usize),
    Neg,
    Sin,
    Cos,
    Exp,
    Add,
    Sub,
    Mul,
    Div,
    Powi(i32),
}

/// Postfix form of an [`Expr`] for the integrator hot loop.
///
/// Variables are read from one flat slice ordered `(I1..Ik, z1..zm,
/// phi1..phik)`. Unlike [`Expr::eval`], division by zero is not trapped; it
/// yields a non-finite value the caller is expected to check.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    max_stack: usize,
}

impl CompiledExpr {
    pub fn new(e: &Expr, k: usize, m: usize) -> Self {
        let mut ops = Vec::with_capacity(e.node_count());
        emit(e, k, m, &mut ops);
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Load(_) => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => depth -= 1,
                _ => {}
            }
            max_stack = max_stack.max(depth);
        }
        CompiledExpr { ops, max_stack }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.ops.as_slice(), [Op::Const(c)] if *c == 0.0)
    }

    pub fn eval(&self, flat: &[f64]) -> f64 {
        if let [Op::Const(c)] = self.ops.as_slice() {
            return *c;
        }
        let mut inline = [0.0f64; 32];
        let mut heap;
        let stack: &mut [f64] = if self.max_stack <= inline.len() {
            &mut inline
        } else {
            heap = vec![0.0; self.max_stack];
            &mut heap
        };
        let mut sp = 0usize;
        for op in &self.ops {
            match *op {
                Op::Const(c) => {
                    stack[sp] = c;
                    sp += 1;
                }
                Op::Load(i) => {
                    stack[sp] = flat[i];
                    sp += 1;
                }
                Op::Neg => stack[sp - 1] = -stack[sp - 1],
                Op::Sin => stack[sp - 1] = stack[sp - 1].sin(),
                Op::Cos => stack[sp - 1] = stack[sp - 1].cos(),
                Op::Exp => stack[sp - 1] = stack[sp - 1].exp(),
                Op::Powi(n) => stack[sp - 1] = stack[sp - 1].powi(n),
                Op::Add | Op::Sub | Op::Mul | Op::Div => {
                    sp -= 1;
                    let b = stack[sp];
                    let a = stack[sp - 1];
                    stack[sp - 1] = match *op {
                        Op::Add => a + b,
                        Op::Sub => a - b,
                        Op::Mul => a * b,
                        _ => a / b,
                    };
                }
            }
        }
        stack[0]
    }
}

fn slot(v: Var, k: usize, m: usize) -> usize {
    match v {
        Var::Action(i) => i,
        Var::Param(a) => k + a,
        Var::Angle(i) => k + m + i,
    }
}

fn emit(e: &Expr, k: usize, m: usize, ops: &mut Vec<Op>) {
    match e {
        Expr::Const(c) => ops.push(Op::Const(*c)),
        Expr::Var(v) => ops.push(Op::Load(slot(*v, k, m))),
        Expr::Unary(op, c) => {
            emit(c, k, m, ops);
            ops.push(match op {
                UnaryOp::Neg => Op::Neg,
                UnaryOp::Sin => Op::Sin,
                UnaryOp::Cos => Op::Cos,
                UnaryOp::Exp => Op::Exp,
            });
        }
        Expr::Binary(BinaryOp::Pow, base, n) => {
            emit(base, k, m, ops);
            ops.push(Op::Powi(n.as_const().map(|c| c as i32).unwrap_or(1)));
        }
        Expr::Binary(op, l, r) => {
            emit(l, k, m, ops);
            emit(r, k, m, ops);
            ops.push(match op {
                BinaryOp::Add => Op::Add,
                BinaryOp::Sub => Op::Sub,
                BinaryOp::Mul => Op::Mul,
                BinaryOp::Div => Op::Div,
                BinaryOp::Pow => unreachable!(),
            });
        }
    }
}
