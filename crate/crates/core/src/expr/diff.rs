use super::fold::{add, binary, div, mul, neg, powi, sub, unary};
use super::{BinaryOp, Expr, UnaryOp, Var};

/// Exact partial derivative, folded as it is built.
pub fn diff(e: &Expr, var: Var) -> Expr {
    if !e.depends_on(var) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(v) => {
            if *v == var {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Unary(op, c) => {
            let dc = diff(c, var);
            let inner = super::simplify_fold(c);
            match op {
                UnaryOp::Neg => neg(dc),
                UnaryOp::Sin => mul(unary(UnaryOp::Cos, inner), dc),
                UnaryOp::Cos => neg(mul(unary(UnaryOp::Sin, inner), dc)),
                UnaryOp::Exp => mul(unary(UnaryOp::Exp, inner), dc),
            }
        }
        Expr::Binary(op, l, r) => match op {
            BinaryOp::Add => add(diff(l, var), diff(r, var)),
            BinaryOp::Sub => sub(diff(l, var), diff(r, var)),
            BinaryOp::Mul => {
                let (fl, fr) = (super::simplify_fold(l), super::simplify_fold(r));
                add(mul(diff(l, var), fr), mul(fl, diff(r, var)))
            }
            BinaryOp::Div => {
                let fr = super::simplify_fold(r);
                if !r.depends_on(var) {
                    return div(diff(l, var), fr);
                }
                let fl = super::simplify_fold(l);
                let num = sub(mul(diff(l, var), fr.clone()), mul(fl, diff(r, var)));
                div(num, powi(fr, 2))
            }
            BinaryOp::Pow => {
                let n = r.as_const().map(|c| c as i32).unwrap_or(0);
                if n == 0 {
                    return Expr::zero();
                }
                let base = super::simplify_fold(l);
                let outer = mul(
                    Expr::Const(n as f64),
                    binary(BinaryOp::Pow, base, Expr::Const((n - 1) as f64)),
                );
                mul(outer, diff(l, var))
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, VarBinding};
    use crate::geometry::ChartSpec;

    fn p(src: &str) -> Expr {
        parse(src, &ChartSpec::unit(2, 2)).unwrap()
    }

    #[test]
    fn power_rule() {
        assert_eq!(diff(&p("I1^2/2"), Var::Action(0)), p("I1"));
        assert_eq!(diff(&p("I1^3"), Var::Action(0)), p("3*I1^2"));
        assert_eq!(diff(&p("I1^-1"), Var::Action(0)), p("-I1^-2"));
    }

    #[test]
    fn chain_rule() {
        let d = diff(&p("z1*cos(phi1)"), Var::Angle(0));
        assert_eq!(d, simplify(&p("-z1*sin(phi1)")));
        assert_eq!(d.to_string(), "-z1*sin(phi1)");
        let d = diff(&p("exp(2*I1)"), Var::Action(0));
        assert_eq!(d, simplify(&p("2*exp(2*I1)")));
    }

    fn simplify(e: &Expr) -> Expr {
        crate::expr::simplify_fold(e)
    }

    #[test]
    fn absent_variable_gives_zero() {
        assert_eq!(diff(&p("I1^2/2"), Var::Angle(0)), Expr::zero());
        assert_eq!(diff(&p("3.5"), Var::Action(1)), Expr::zero());
    }

    #[test]
    fn quotient_rule() {
        let d = diff(&p("z1/(I1-1)"), Var::Action(0));
        let b = VarBinding::new().with("z1", 2.0).with("I1", 3.0);
        // d/dI1 z1 (I1-1)^-1 = -z1/(I1-1)^2
        assert_eq!(d.eval(&b), Ok(-0.5));
    }
}
