//! Random polynomial-trigonometric expressions for sampled structure checks.

use rand::Rng;

use super::{Expr, Var};
use crate::geometry::ChartSpec;

/// Draws a tree of at most `depth` levels built from chart variables, small
/// constants, `+ - *`, `sin`, `cos` and squares.
pub fn random_poly_trig<R: Rng + ?Sized>(chart: &ChartSpec, depth: u32, rng: &mut R) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return leaf(chart, rng);
    }
    match rng.random_range(0..6) {
        0 => random_poly_trig(chart, depth - 1, rng) + random_poly_trig(chart, depth - 1, rng),
        1 => random_poly_trig(chart, depth - 1, rng) - random_poly_trig(chart, depth - 1, rng),
        2 => random_poly_trig(chart, depth - 1, rng) * random_poly_trig(chart, depth - 1, rng),
        3 => Expr::sin(random_poly_trig(chart, depth - 1, rng)),
        4 => Expr::cos(random_poly_trig(chart, depth - 1, rng)),
        _ => Expr::powi(random_poly_trig(chart, depth - 1, rng), 2),
    }
}

fn leaf<R: Rng + ?Sized>(chart: &ChartSpec, rng: &mut R) -> Expr {
    let symbols = chart.symbols();
    if rng.random_bool(0.2) {
        // quarter-integers keep folding exact
        Expr::Const(rng.random_range(-8i32..=8) as f64 / 4.0)
    } else {
        Expr::Var(symbols[rng.random_range(0..symbols.len())])
    }
}

/// A random variable of the chart.
pub fn random_symbol<R: Rng + ?Sized>(chart: &ChartSpec, rng: &mut R) -> Var {
    let symbols = chart.symbols();
    symbols[rng.random_range(0..symbols.len())]
}
