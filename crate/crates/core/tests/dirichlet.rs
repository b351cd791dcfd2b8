use std::f64::consts::PI;

use nondiv_hom::dirichlet::*;
use nondiv_hom::field::{identity_mat, zero_mat, CoefficientField, PeriodicField, WaveTerm};
use nondiv_hom::homogenize::ThirdOrderTensor;
use nondiv_hom::linalg::lu_solve;
use nondiv_hom::Discretization;

fn diag2(a: f64, b: f64) -> [[f64; 3]; 3] {
    let mut m = zero_mat();
    m[0][0] = a;
    m[1][1] = b;
    m
}

#[test]
fn linear_data_is_reproduced() {
    let grid = Grid::uniform(2, 16).unwrap();
    let op = DirichletOperator::<f64>::constant(&identity_mat(2), grid).unwrap();
    let g = Expression::parse("1 + 2*x1 - 3*x2", 2).unwrap();
    let (u, rep) = op.solve(&Expression::zero(2), &g, &DirichletConfig::default()).unwrap();
    let exact = GridFunction::from_expression(grid, &g);
    assert!(u.max_diff(&exact, false).unwrap() < 1e-12);
    assert_eq!(rep.unknowns, 15 * 15);
}

#[test]
fn matches_dense_direct_solve() {
    // diag(1, 2), f = 3, g = 0 on an 8x8 grid
    let grid = Grid::uniform(2, 8).unwrap();
    let op = DirichletOperator::constant(&diag2(1.0, 2.0), grid).unwrap();
    let f = Expression::parse("3", 2).unwrap();
    let (u, _) = op.solve(&f, &Expression::zero(2), &DirichletConfig::default()).unwrap();
    let n = grid.interior_count();
    let dense = lu_solve(op.dense_matrix(), n, vec![3.0; n]).unwrap();
    let mut k = 0;
    for idx in 0..grid.node_count() {
        let ix = grid.unravel(idx);
        if grid.is_boundary(ix) {
            assert_eq!(u.values[idx], 0.0);
        } else {
            assert!((u.values[idx] - dense[k]).abs() < 1e-12);
            k += 1;
        }
    }
}

#[test]
fn dense_matrix_is_the_five_point_stencil() {
    let grid = Grid::uniform(2, 4).unwrap();
    let op = DirichletOperator::constant(&diag2(1.0, 2.0), grid).unwrap();
    let m = op.dense_matrix();
    let h2 = 16.0;
    // centre node (2, 2) is interior index 4 of the 3x3 block
    assert!((m[4 * 9 + 4] - 2.0 * (1.0 + 2.0) * h2).abs() < 1e-12);
    assert!((m[4 * 9 + 1] + h2).abs() < 1e-12);
    assert!((m[4 * 9 + 3] + 2.0 * h2).abs() < 1e-12);
}

#[test]
fn maximum_principle_for_diagonal_oscillating_field() {
    let a = nondiv_hom::constructions::gallery::<f64>("st_2d").unwrap().field;
    let spec = BvpSpec::new(a, "0", "sin(3*x1)*cos(2*x2) + x1*x2", vec![4]).unwrap();
    let (u, _) = solve_oscillatory(&spec, 4, &DirichletConfig::default()).unwrap();
    let g = GridFunction::from_expression(u.grid, &spec.g);
    let grid = u.grid;
    let bvals: Vec<f64> = (0..grid.node_count()).filter(|&i| grid.is_boundary(grid.unravel(i))).map(|i| g.values[i]).collect();
    let lo = bvals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = bvals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(u.values.iter().all(|&v| v >= lo - 1e-10 && v <= hi + 1e-10));
}

#[test]
fn dst_preconditioner_inverts_constant_operator() {
    let grid = Grid::new(2, &[8, 12]).unwrap();
    let m = diag2(1.5, 0.5);
    let op = DirichletOperator::constant(&m, grid).unwrap();
    let p = DirichletPoisson::new(2, grid.cells, &[1.5, 0.5]);
    let n = grid.interior_count();
    let b: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64) - 5.0).collect();
    let mut x = vec![0.0; n];
    p.solve(&b, &mut x);
    let dense = op.dense_matrix();
    for i in 0..n {
        let ax: f64 = (0..n).map(|j| dense[i * n + j] * x[j]).sum();
        assert!((ax - b[i]).abs() < 1e-9 * 100.0, "row {i}: {ax} vs {}", b[i]);
    }
}

#[test]
fn cross_stencil_solution_converges_at_second_order() {
    // -(2 u_11 + u_12 + u_21 + u_22) = f for u = sin(pi x1) sin(pi x2) + x1 x2
    let mut m = diag2(2.0, 1.0);
    m[0][1] = 0.5;
    m[1][0] = 0.5;
    let exact = Expression::parse("sin(PI*x1)*sin(PI*x2) + x1*x2", 2).unwrap();
    let f = Expression::parse("3*PI^2*sin(PI*x1)*sin(PI*x2) - PI^2*cos(PI*x1)*cos(PI*x2) - 1", 2).unwrap();
    let err = |n: usize| {
        let grid = Grid::uniform(2, n).unwrap();
        let (u, _) = DirichletOperator::constant(&m, grid).unwrap().solve(&f, &exact, &DirichletConfig::default()).unwrap();
        u.max_diff(&GridFunction::from_expression(grid, &exact), false).unwrap()
    };
    let (e1, e2) = (err(16), err(32));
    assert!(e1 / e2 > 3.5 && e1 / e2 < 4.5, "{e1} {e2}");
}

#[test]
fn expression_derivatives() {
    let g = Expression::parse("8*x1^3 - 3*x1*x3^2", 3).unwrap();
    let x = [0.2, 0.7, 0.4];
    assert!((g.derivative(&[0, 0, 0]).unwrap().eval(&x) - 48.0).abs() < 1e-12);
    assert!((g.derivative(&[0, 2, 2]).unwrap().eval(&x) + 6.0).abs() < 1e-12);
    assert_eq!(g.derivative(&[1]).unwrap().eval(&x), 0.0);
    assert!(Expression::parse("x4", 3).is_err());
    assert!(Expression::parse("y1 + 1", 2).is_err());
}

#[test]
fn third_derivative_of_cubic_is_exact() {
    let grid = Grid::uniform(2, 10).unwrap();
    let u = GridFunction::<f64>::from_expression(grid, &Expression::parse("x1^3 + 2*x1^2*x2 - x2^3", 2).unwrap());
    let d111 = u.third_derivative([0, 0, 0]);
    let d112 = u.third_derivative([0, 0, 1]);
    let d222 = u.third_derivative([1, 1, 1]);
    assert!(d111.values.iter().all(|v| (v - 6.0).abs() < 1e-8));
    assert!(d112.values.iter().all(|v| (v - 4.0).abs() < 1e-8));
    assert!(d222.values.iter().all(|v| (v + 6.0).abs() < 1e-8));
}

#[test]
fn rate_example_datum_solves_homogenized_problem() {
    let spec = preset::<f64>("optimal_rate_3d").unwrap();
    let mut eff = zero_mat();
    eff[0][0] = 1.0;
    eff[1][1] = 1.0;
    eff[2][2] = 8.0;
    let grid = Grid::uniform(3, 8).unwrap();
    assert!(boundary_datum_is_exact(&spec, &eff, grid).unwrap());
    let (u, _) = solve_homogenized(&spec, &eff, grid, &DirichletConfig::default()).unwrap();
    // cubic data: the centred scheme has no truncation error
    let g = GridFunction::from_expression(grid, &spec.g);
    assert!(u.max_diff(&g, false).unwrap() < 1e-10);
}

fn rate_tensor() -> ThirdOrderTensor<f64> {
    let mut c = [[[0.0; 3]; 3]; 3];
    c[0][0][0] = -1.0 / (128.0 * PI);
    c[0][1][1] = -1.0 / (128.0 * PI);
    c[0][2][2] = 1.0 / (64.0 * PI);
    let mut eff = zero_mat();
    eff[0][0] = 1.0;
    eff[1][1] = 1.0;
    eff[2][2] = 8.0;
    ThirdOrderTensor::new(3, c, eff, 16, Discretization::Spectral, vec![])
}

#[test]
fn tensor_source_of_rate_example_is_constant() {
    let spec = preset::<f64>("optimal_rate_3d").unwrap();
    let grid = Grid::uniform(3, 6).unwrap();
    let t = rate_tensor();
    let u = GridFunction::from_expression(grid, &spec.g);
    let exact = tensor_source(&t, &u, Some(&spec.g)).unwrap();
    let fd = tensor_source(&t, &u, None).unwrap();
    let target = -15.0 / (32.0 * PI);
    assert!(exact.values.iter().all(|v| (v - target).abs() < 1e-12));
    assert!(fd.values.iter().all(|v| (v - target).abs() < 1e-9));
    let (z, _) = solve_z(&t.effective, &exact, &DirichletConfig::default()).unwrap();
    assert!(z.max_abs() > 1e-4);
}

#[test]
fn vanishing_tensor_or_quadratic_u_gives_zero_z() {
    let grid = Grid::uniform(2, 12).unwrap();
    let mut c = [[[0.0; 3]; 3]; 3];
    c[0][0][0] = 0.01;
    c[1][0][1] = -0.02;
    let t = ThirdOrderTensor::new(2, c, identity_mat(2), 16, Discretization::Spectral, vec![]);
    let quad = GridFunction::from_expression(grid, &Expression::parse("x1^2 - x1*x2 + 3*x2^2", 2).unwrap());
    let src = tensor_source(&t, &quad, None).unwrap();
    let (z, _) = solve_z(&t.effective, &src, &DirichletConfig::default()).unwrap();
    assert!(z.max_abs() < 1e-9);

    let zero = ThirdOrderTensor::new(2, [[[0.0; 3]; 3]; 3], identity_mat(2), 16, Discretization::Spectral, vec![]);
    let cubic = GridFunction::from_expression(grid, &Expression::parse("x1^3 + x2^3", 2).unwrap());
    let src = tensor_source(&zero, &cubic, None).unwrap();
    let (z, _) = solve_z(&zero.effective, &src, &DirichletConfig::default()).unwrap();
    assert_eq!(z.max_abs(), 0.0);
}

#[test]
fn fit_rate_recovers_power_law() {
    let eps = [0.125, 0.1, 0.0625, 0.05];
    let err: Vec<f64> = eps.iter().map(|e| 3.0 * e * e).collect();
    let fit = fit_rate(&eps, &err).unwrap();
    assert!((fit.slope - 2.0).abs() < 1e-12);
    assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    assert!(fit.residual < 1e-12);
    assert!(fit_rate(&eps, &[1.0, 0.0, 1.0, 1.0]).is_err());
    assert!(fit_rate(&eps[..1], &err[..1]).is_err());
}

#[test]
fn constant_preset_is_degenerate() {
    let spec = preset::<f64>("constant_2d").unwrap();
    let exp = run_rate_experiment(&spec, &RateConfig::default()).unwrap();
    assert!(exp.flags.contains(&RateFlag::Degenerate));
    assert!(exp.fit_u.is_none());
    assert!(exp.rows.iter().all(|r| r.error_u < 1e-10));
}

#[test]
fn spec_validation() {
    let a = CoefficientField::<f64>::constant(2, 16, &identity_mat(2)).unwrap();
    assert!(BvpSpec::new(a.clone(), "0", "x1", vec![8, 4]).is_err());
    assert!(BvpSpec::new(a.clone(), "0", "x1", vec![2, 4]).is_err());
    assert!(BvpSpec::new(a.clone(), "0", "x3", vec![4, 8]).is_err());
    let mut s = BvpSpec::new(a, "0", "x1", vec![4, 8]).unwrap();
    s.cells_per_period = 8;
    assert!(s.validate().is_err());

    // strongly anisotropic off-diagonal field
    let e = |c: f64, amp: f64| PeriodicField::from_terms(2, vec![WaveTerm::constant(c), WaveTerm::cos(&[1, 0], amp)], 16).unwrap();
    let skew = CoefficientField::new(2, vec![e(1.0, 0.0), e(0.95, 0.0), e(1.0, 0.0)]).unwrap();
    assert!(BvpSpec::new(skew, "0", "x1", vec![4]).is_err());
}

#[test]
fn spec_file_round_trip() {
    let doc = r#"{"gallery": "st_2d", "f": "0", "g": "x1^3 + x2^3", "epsilons": [0.25, 0.125]}"#;
    let spec = BvpSpecFile::parse(doc).unwrap().to_spec::<f64>().unwrap();
    assert_eq!(spec.inverse_epsilons, vec![4, 8]);
    let bad = r#"{"gallery": "st_2d", "f": "0", "g": "x1", "epsilons": [0.3]}"#;
    assert!(BvpSpecFile::parse(bad).unwrap().to_spec::<f64>().is_err());
    let two = r#"{"gallery": "st_2d", "preset": "diagonal_2d"}"#;
    assert!(BvpSpecFile::parse(two).unwrap().to_spec::<f64>().is_err());
    let p = BvpSpecFile::parse(r#"{"preset": "diagonal_2d", "epsilons": [0.25, 0.2, 0.125, 0.1]}"#).unwrap();
    assert_eq!(p.to_spec::<f64>().unwrap().inverse_epsilons, vec![4, 5, 8, 10]);
}

#[test]
fn oscillating_grid_must_fit_period() {
    let a = nondiv_hom::constructions::gallery::<f64>("st_2d").unwrap().field;
    let grid = Grid::uniform(2, 50).unwrap();
    assert!(DirichletOperator::oscillating(&a, 4, grid).is_err());
    assert!(DirichletOperator::oscillating(&a, 5, grid).is_ok());
}

#[test]
fn single_precision_solve() {
    let grid = Grid::uniform(2, 16).unwrap();
    let m: [[f32; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.0]];
    let op = DirichletOperator::<f32>::constant(&m, grid).unwrap();
    let g = Expression::parse("x1 - x2", 2).unwrap();
    let (u, _) = op.solve(&Expression::zero(2), &g, &DirichletConfig::default()).unwrap();
    let exact = GridFunction::<f32>::from_expression(grid, &g);
    assert!(u.max_diff(&exact, false).unwrap() < 1e-5);
}
