//! The original symplectic form on the chart,
//! `Ω = dI_i∧dphi^i + Ω_AB dz^A∧dz^B + Ω^i_A dI_i∧dz^A`,
//! and pointwise Hamilton equations with respect to it.
//!
//! The `Ω_AB` pairing is an unrestricted double sum, so the assembled matrix
//! carries `2·Ω_AB` on the z-block.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ChartSpec, GeometryError};
use crate::dynamics::State;
use crate::expr::{diff, Expr};

const SINGULAR_DET: f64 = 1e-12;
const ANTISYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticCoeffs {
    /// m×m, antisymmetric.
    pub omega_ab: Vec<Vec<Expr>>,
    /// k×m.
    pub omega_ia: Vec<Vec<Expr>>,
}

impl SymplecticCoeffs {
    /// Checks shapes and that no coefficient depends on an angle.
    pub fn new(chart: &ChartSpec, omega_ab: Vec<Vec<Expr>>, omega_ia: Vec<Vec<Expr>>) -> Result<Self, GeometryError> {
        let (k, m) = (chart.k(), chart.m());
        let shape_ok = omega_ab.len() == m
            && omega_ab.iter().all(|row| row.len() == m)
            && omega_ia.len() == k
            && omega_ia.iter().all(|row| row.len() == m);
        if !shape_ok {
            return Err(GeometryError::InvalidCoefficients(format!(
                "expected omega_AB {m}x{m} and omega_iA {k}x{m}"
            )));
        }
        let angle_dependent = omega_ab
            .iter()
            .chain(&omega_ia)
            .flatten()
            .any(|e| e.free_vars().iter().any(|v| v.is_angle()));
        if angle_dependent {
            return Err(GeometryError::InvalidCoefficients(
                "coefficients must depend on (I, z) only".into(),
            ));
        }
        Ok(SymplecticCoeffs { omega_ab, omega_ia })
    }

    /// Coefficients with `Ω_AB = Ω^i_A = 0`.
    pub fn zero(chart: &ChartSpec) -> Self {
        let (k, m) = (chart.k(), chart.m());
        SymplecticCoeffs {
            omega_ab: vec![vec![Expr::zero(); m]; m],
            omega_ia: vec![vec![Expr::zero(); m]; k],
        }
    }

    /// Samples antisymmetry of `Ω_AB` and invertibility of the assembled form
    /// at `n_samples` points of `V×W`.
    pub fn validate(&self, chart: &ChartSpec, n_samples: usize, seed: u64) -> Result<(), GeometryError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..n_samples {
            let s = chart.sample_state(&mut rng);
            let p = s.as_point();
            let m = chart.m();
            for a in 0..m {
                for b in a..m {
                    let x = self.omega_ab[a][b].eval(&p)?;
                    let y = self.omega_ab[b][a].eval(&p)?;
                    if (x + y).abs() > ANTISYMMETRY_TOL {
                        return Err(GeometryError::NotAntisymmetric { a, b });
                    }
                }
            }
            assemble_omega_matrix(self, chart, &s)?;
        }
        Ok(())
    }
}

/// Matrix of Ω at `point` in `(I, z, phi)` ordering.
pub fn assemble_omega_matrix(
    sc: &SymplecticCoeffs,
    chart: &ChartSpec,
    point: &State,
) -> Result<DMatrix<f64>, GeometryError> {
    chart.check_state(point)?;
    let (k, m) = (chart.k(), chart.m());
    let n = chart.dim();
    let p = point.as_point();
    let mut mat = DMatrix::zeros(n, n);
    for i in 0..k {
        mat[(i, k + m + i)] = 1.0;
        mat[(k + m + i, i)] = -1.0;
    }
    for a in 0..m {
        for b in 0..m {
            if a != b {
                mat[(k + a, k + b)] = 2.0 * sc.omega_ab[a][b].eval(&p)?;
            }
        }
    }
    for i in 0..k {
        for a in 0..m {
            let c = sc.omega_ia[i][a].eval(&p)?;
            mat[(i, k + a)] = c;
            mat[(k + a, i)] = -c;
        }
    }
    let det = mat.clone().lu().determinant();
    if det.abs() < SINGULAR_DET {
        return Err(GeometryError::SingularForm { det });
    }
    Ok(mat)
}

/// Solves `M·ξ = ∇H'` at `point`; `ξ` is ordered `(I, z, phi)`.
pub fn hamiltonian_vf_symplectic_at(
    hp: &Expr,
    sc: &SymplecticCoeffs,
    chart: &ChartSpec,
    point: &State,
) -> Result<Vec<f64>, GeometryError> {
    let mat = assemble_omega_matrix(sc, chart, point)?;
    let p = point.as_point();
    let grad = chart
        .symbols()
        .into_iter()
        .map(|v| diff(hp, v).eval(&p))
        .collect::<Result<Vec<_>, _>>()?;
    let rhs = DVector::from_vec(grad);
    let xi = mat.lu().solve(&rhs).ok_or(GeometryError::SingularForm { det: 0.0 })?;
    Ok(xi.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::hamiltonian_vf_poisson;
    use rand::Rng;

    fn coeffs(chart: &ChartSpec, ab: &[&[&str]], ia: &[&[&str]]) -> SymplecticCoeffs {
        let conv = |rows: &[&[&str]]| {
            rows.iter()
                .map(|r| r.iter().map(|s| parse(s, chart).unwrap()).collect())
                .collect()
        };
        SymplecticCoeffs::new(chart, conv(ab), conv(ia)).unwrap()
    }

    fn darboux(chart: &ChartSpec) -> SymplecticCoeffs {
        coeffs(chart, &[&["0", "1/2"], &["-1/2", "0"]], &[&["0", "0"]])
    }

    #[test]
    fn canonical_two_form() {
        let c = ChartSpec::unit(1, 0);
        let s = State::new(vec![0.5], vec![], vec![0.0]);
        let m = assemble_omega_matrix(&SymplecticCoeffs::zero(&c), &c, &s).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));
    }

    #[test]
    fn darboux_block() {
        let c = ChartSpec::unit(1, 2);
        let s = State::new(vec![0.5], vec![0.1, 0.2], vec![0.0]);
        let m = assemble_omega_matrix(&darboux(&c), &c, &s).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
            -1.0, 0.0, 0.0, 0.0,
        ]);
        assert_eq!(m, expected);
    }

    #[test]
    fn zero_z_block_is_singular() {
        let c = ChartSpec::unit(1, 2);
        let s = State::new(vec![0.5], vec![0.1, 0.2], vec![0.0]);
        let err = assemble_omega_matrix(&SymplecticCoeffs::zero(&c), &c, &s).unwrap_err();
        assert!(matches!(err, GeometryError::SingularForm { .. }));
    }

    #[test]
    fn mixed_coupling_enters_both_triangles() {
        let c = ChartSpec::unit(1, 2);
        let sc = coeffs(&c, &[&["0", "1/2"], &["-1/2", "0"]], &[&["I1", "0.25"]]);
        let s = State::new(vec![0.5], vec![0.1, 0.2], vec![0.0]);
        let m = assemble_omega_matrix(&sc, &c, &s).unwrap();
        assert_eq!(m[(0, 1)], 0.5);
        assert_eq!(m[(1, 0)], -0.5);
        assert_eq!(m[(0, 2)], 0.25);
        assert_eq!(m.transpose(), -m);
    }

    #[test]
    fn validate_flags_asymmetric_coefficients() {
        let c = ChartSpec::unit(1, 2);
        let bad = coeffs(&c, &[&["0", "1/2"], &["1/2", "0"]], &[&["0", "0"]]);
        assert_eq!(
            bad.validate(&c, 10, 0),
            Err(GeometryError::NotAntisymmetric { a: 0, b: 1 })
        );
        assert!(darboux(&c).validate(&c, 10, 0).is_ok());
    }

    #[test]
    fn rejects_angle_dependent_coefficients() {
        let c = ChartSpec::unit(1, 2);
        let ab = vec![
            vec![Expr::zero(), parse("cos(phi1)", &c).unwrap()],
            vec![parse("-cos(phi1)", &c).unwrap(), Expr::zero()],
        ];
        let ia = vec![vec![Expr::zero(), Expr::zero()]];
        assert!(SymplecticCoeffs::new(&c, ab, ia).is_err());
    }

    #[test]
    fn canonical_case_reproduces_linear_flow() {
        let c = ChartSpec::unit(1, 0);
        let h = parse("I1^2/2", &c).unwrap();
        let s = State::new(vec![0.7], vec![], vec![1.0]);
        let xi = hamiltonian_vf_symplectic_at(&h, &SymplecticCoeffs::zero(&c), &c, &s).unwrap();
        assert_eq!(xi, vec![0.0, 0.7]);
    }

    /// Brute-force Gaussian elimination with partial pivoting, independent of
    /// nalgebra.
    fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            let pivot_row = a[col].clone();
            for row in col + 1..n {
                let f = a[row][col] / pivot_row[col];
                for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
            x[row] = (b[row] - s) / a[row][row];
        }
        x
    }

    #[test]
    fn angle_free_hamiltonian_has_no_param_velocity() {
        let c = ChartSpec::unit(2, 2);
        let sc = coeffs(
            &c,
            &[&["0", "0.5 + 0.1*I1"], &["-0.5 - 0.1*I1", "0"]],
            &[&["0", "0"], &["0", "0"]],
        );
        let h = parse("I1^2/2 + I2*I1 + z1*z2*I2", &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let s = c.sample_state(&mut rng);
            let xi = hamiltonian_vf_symplectic_at(&h, &sc, &c, &s).unwrap();
            // z-block is decoupled and ∇_z H = (z2 I2, z1 I2), so the
            // z-velocity is generically nonzero unless ∇_z H = 0
            let mat = assemble_omega_matrix(&sc, &c, &s).unwrap();
            let rows = (0..6).map(|r| (0..6).map(|cc| mat[(r, cc)]).collect()).collect();
            let p = s.as_point();
            let grad = c.symbols().iter().map(|&v| diff(&h, v).eval(&p).unwrap()).collect();
            let oracle = solve_dense(rows, grad);
            for (a, b) in xi.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
            }
        }
        // with H independent of z and of the angles, ż vanishes
        let h = parse("I1^2/2 + I2^2", &c).unwrap();
        for _ in 0..100 {
            let s = c.sample_state(&mut rng);
            let xi = hamiltonian_vf_symplectic_at(&h, &sc, &c, &s).unwrap();
            assert_eq!(&xi[2..4], &[0.0, 0.0]);
        }
    }

    #[test]
    fn perturbation_drives_param_velocity() {
        let c = ChartSpec::unit(1, 2);
        let h = parse("I1^2/2 + z1*cos(phi1)", &c).unwrap();
        let sc = darboux(&c);
        // ξ_z2 = ∂H/∂z1 = cos(phi1)
        for phi in [0.0, 1.0, 2.5] {
            let s = State::new(vec![0.4], vec![1.0, 0.3], vec![phi]);
            let xi = hamiltonian_vf_symplectic_at(&h, &sc, &c, &s).unwrap();
            assert_eq!(xi[1], 0.0);
            assert!((xi[2] - phi.cos()).abs() < 1e-15);
            let vf = hamiltonian_vf_poisson(&h, &c);
            assert!(vf.d_params.iter().all(|e| e.is_const(0.0)));
        }
    }

    #[test]
    fn symplectic_and_poisson_agree_on_action_angle_block() {
        let c = ChartSpec::unit(2, 2);
        let sc = coeffs(
            &c,
            &[&["0", "1 + I1*z1"], &["-1 - I1*z1", "0"]],
            &[&["0", "0"], &["0", "0"]],
        );
        let h = parse("I1^2/2 + I2 + 0.3*cos(phi1 - phi2)*I1", &c).unwrap();
        let vf = hamiltonian_vf_poisson(&h, &c);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let mut s = c.sample_state(&mut rng);
            s.params[0] = rng.random_range(0.0..1.0);
            let xi = hamiltonian_vf_symplectic_at(&h, &sc, &c, &s).unwrap();
            let p = s.as_point();
            for i in 0..2 {
                let di = vf.d_actions[i].eval(&p).unwrap();
                let dphi = vf.d_angles[i].eval(&p).unwrap();
                assert!((xi[i] - di).abs() <= 1e-10);
                assert!((xi[4 + i] - dphi).abs() <= 1e-10);
            }
        }
    }
}
