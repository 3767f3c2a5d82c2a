use pistlab_core::expr::random::random_poly_trig;
use pistlab_core::expr::{diff, parse, simplify_fold, CompiledExpr, Expr, Var};
use pistlab_core::ChartSpec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chart() -> ChartSpec {
    ChartSpec::unit(2, 2)
}

fn sample(seed: u64, depth: u32) -> (Expr, pistlab_core::State) {
    let c = chart();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = random_poly_trig(&c, depth, &mut rng);
    let s = c.sample_state(&mut rng);
    (e, s)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn display_parses_back_to_an_equal_function(seed in any::<u64>()) {
        let (e, s) = sample(seed, 4);
        let text = e.to_string();
        let back = parse(&text, &chart()).unwrap();
        let (a, b) = (e.eval(&s.as_point()).unwrap(), back.eval(&s.as_point()).unwrap());
        prop_assert!(close(a, b, 1e-12), "{text}: {a} vs {b}");
    }

    #[test]
    fn folding_preserves_values(seed in any::<u64>()) {
        let (e, s) = sample(seed, 4);
        let f = simplify_fold(&e);
        prop_assert!(f.node_count() <= e.node_count());
        let (a, b) = (e.eval(&s.as_point()).unwrap(), f.eval(&s.as_point()).unwrap());
        prop_assert!(close(a, b, 1e-12), "{e} vs {f}");
    }

    #[test]
    fn folding_is_idempotent(seed in any::<u64>()) {
        let (e, _) = sample(seed, 4);
        let once = simplify_fold(&e);
        prop_assert_eq!(simplify_fold(&once), once);
    }

    #[test]
    fn compiled_matches_tree(seed in any::<u64>()) {
        let (e, s) = sample(seed, 5);
        let c = CompiledExpr::new(&e, 2, 2);
        let (a, b) = (e.eval(&s.as_point()).unwrap(), c.eval(&s.flat()));
        prop_assert!(close(a, b, 1e-13));
    }

    #[test]
    fn derivative_matches_central_difference(seed in any::<u64>(), which in 0usize..6) {
        let (e, s) = sample(seed, 3);
        let var = [
            Var::Action(0), Var::Action(1), Var::Param(0), Var::Param(1), Var::Angle(0), Var::Angle(1),
        ][which];
        let d = diff(&e, var).eval(&s.as_point()).unwrap();
        let step = 1e-6;
        let shifted = |delta: f64| {
            let mut t = s.clone();
            match var {
                Var::Action(i) => t.actions[i] += delta,
                Var::Param(i) => t.params[i] += delta,
                Var::Angle(i) => t.angles[i] += delta,
            }
            e.eval(&t.as_point()).unwrap()
        };
        let fd = (shifted(step) - shifted(-step)) / (2.0 * step);
        prop_assert!((d - fd).abs() <= 1e-5 * (1.0 + fd.abs()), "{e} d/d{var}: {d} vs {fd}");
    }

    #[test]
    fn derivative_wrt_absent_variable_is_zero(seed in any::<u64>()) {
        let c = ChartSpec::unit(3, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_poly_trig(&c, 4, &mut rng);
        for v in c.symbols() {
            if !e.depends_on(v) {
                prop_assert_eq!(diff(&e, v), Expr::zero());
            }
        }
    }
}
