use pistlab_core::analysis::{diophantine_test, DiophantineSpec, FrequencyVector};
use pistlab_core::expr::parse;
use pistlab_core::{
    extract_rotation_vector, frequency_map_at, integrate_perturbed, ChartSpec, IntegratorConfig, ModelSpec, State,
};
use proptest::prelude::*;

/// Full-box enumeration over `[-n, n]^k`, both signs included.
fn brute_force_passes(omega: &[f64], gamma: f64, tau: f64, a_max: i64) -> bool {
    let k = omega.len();
    let side = (2 * a_max + 1) as usize;
    (0..side.pow(k as u32)).all(|mut code| {
        let a: Vec<i64> = (0..k)
            .map(|_| {
                let v = (code % side) as i64 - a_max;
                code /= side;
                v
            })
            .collect();
        let norm: i64 = a.iter().map(|x| x.abs()).sum();
        if norm == 0 || norm > a_max {
            return true;
        }
        let dot: f64 = a.iter().zip(omega).map(|(&x, &w)| x as f64 * w).sum();
        dot.abs() >= gamma * (norm as f64).powf(-tau)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sieve_agrees_with_brute_force_k3(
        w in prop::collection::vec(-2.0f64..2.0, 3),
        g in 1e-4f64..0.05,
    ) {
        let spec = DiophantineSpec::new(g, 4.0, 8).unwrap();
        let r = diophantine_test(&FrequencyVector::new(w.clone()), &spec).unwrap();
        prop_assert_eq!(r.passed, brute_force_passes(&w, g, 4.0, 8));
    }
}

#[test]
fn unperturbed_rotation_vector_matches_frequency_map() {
    let c = ChartSpec::unit(2, 1);
    let m = ModelSpec::new(
        c.clone(),
        parse("I1^2/2 + I2^2/3 + z1*I1*I2", &c).unwrap(),
        parse("cos(phi1)", &c).unwrap(),
        0.0,
    )
    .unwrap();
    let s0 = State::new(vec![0.4, 0.7], vec![0.3], vec![1.0, 2.0]);
    let traj = integrate_perturbed(&m, &s0, &IntegratorConfig::rk4(1e-2, 100.0, 1)).unwrap();
    let w_hat = extract_rotation_vector(&traj).unwrap();
    let w = frequency_map_at(&m, &s0.actions, &s0.params).unwrap();
    assert!(w_hat.distance(&w) <= 1e-6, "{w_hat:?} vs {w:?}");
}
