use proptest::prelude::*;

use nondiv_hom::constructions::random::{random_coefficient_field, seeded};
use nondiv_hom::constructions::{gallery, GALLERY_NAMES};
use nondiv_hom::field::{identity_mat, upper_pairs, CoefficientField, PeriodicField, WaveTerm};
use nondiv_hom::homogenize::{classify, diagonal_classify_shortcut, CellSolution, Criterion};
use nondiv_hom::solver::dense::{dense_cell, dense_invariant_measure};
use nondiv_hom::solver::{solve_cell, solve_invariant_measure, solve_poisson};
use nondiv_hom::{ClassifyConfig, Discretization, HomError, SolverConfig, Verdict};

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn krylov_matches_dense(seed: u64, disc: Discretization) {
    let n = 8;
    let a = random_coefficient_field::<f64, _>(&mut seeded(seed), 2, n).unwrap();
    let cfg = SolverConfig::default().with_resolution(n).with_discretization(disc);
    let sol = CellSolution::new(&a, &cfg).unwrap();
    let coeffs = a.sample_values(n).unwrap();
    let r = dense_invariant_measure(2, n, &coeffs, disc).unwrap();
    assert!(max_diff(&sol.r, &r) < 1e-10, "seed {seed}");
    for (p, (k, l)) in upper_pairs(2).into_iter().enumerate() {
        let rhs: Vec<f64> = coeffs[p].iter().map(|x| x - sol.effective[k][l]).collect();
        let v = dense_cell(2, n, &coeffs, &rhs, disc).unwrap();
        assert!(max_diff(sol.corrector(k, l), &v) < 1e-9, "seed {seed} pair {k}{l}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectral_solver_matches_dense(seed in any::<u64>()) {
        krylov_matches_dense(seed, Discretization::Spectral);
    }

    #[test]
    fn difference_solver_matches_dense(seed in any::<u64>()) {
        krylov_matches_dense(seed, Discretization::CentralDifference);
    }

    #[test]
    fn invariant_measure_is_positive_and_normalized(seed in any::<u64>()) {
        let a = random_coefficient_field::<f64, _>(&mut seeded(seed), 2, 16).unwrap();
        let (r, rep) = solve_invariant_measure(&a, &SolverConfig::default()).unwrap();
        prop_assert!((r.mean() - 1.0).abs() < 1e-12);
        prop_assert!(r.min_value() > 0.0);
        prop_assert!(rep.residual_linf < 1e-9);
    }

    #[test]
    fn scalar_multiples_scale_abar_and_tensor(seed in any::<u64>(), which in 0usize..3) {
        let lambda = [0.5, 2.0, 10.0][which];
        let a = random_coefficient_field::<f64, _>(&mut seeded(seed), 2, 16).unwrap();
        let cfg = SolverConfig::default();
        let base = CellSolution::new(&a, &cfg).unwrap();
        let scaled = CellSolution::new(&a.scale(lambda).unwrap(), &cfg).unwrap();
        prop_assert!(max_diff(&base.r, &scaled.r) < 1e-10);
        for (k, l) in upper_pairs(2) {
            prop_assert!((scaled.effective[k][l] - lambda * base.effective[k][l]).abs() < 1e-10 * lambda);
            prop_assert!(max_diff(base.corrector(k, l), scaled.corrector(k, l)) < 1e-9);
        }
        let (t0, t1) = (base.tensor(), scaled.tensor());
        for j in 0..2 {
            for (k, l) in upper_pairs(2) {
                prop_assert!((t1.get(j, k, l) - lambda * t0.get(j, k, l)).abs() < 1e-10 * lambda);
            }
        }
    }

    #[test]
    fn translation_leaves_tensor_unchanged(seed in any::<u64>(), s1 in 0usize..16, s2 in 0usize..16) {
        let n = 16;
        let a = random_coefficient_field::<f64, _>(&mut seeded(seed), 2, n).unwrap();
        let shift = [s1 as f64 / n as f64, s2 as f64 / n as f64];
        let b = CoefficientField::from_fn(2, n, |y: &[f64]| a.eval(&[y[0] + shift[0], y[1] + shift[1]])).unwrap();
        let cfg = SolverConfig::default();
        let (t0, t1) = (CellSolution::new(&a, &cfg).unwrap().tensor(), CellSolution::new(&b, &cfg).unwrap().tensor());
        prop_assert!(t0.max_diff_c(&t1) < 1e-10);
    }
}

#[test]
fn constant_field_is_trivial() {
    let mut m = identity_mat::<f64>(2);
    m[0][1] = 0.3;
    m[1][0] = 0.3;
    m[1][1] = 2.0;
    let a = CoefficientField::constant(2, 16, &m).unwrap();
    let sol = CellSolution::new(&a, &SolverConfig::default()).unwrap();
    assert!(sol.r.iter().all(|r| (r - 1.0).abs() < 1e-14));
    assert!((sol.effective[0][1] - 0.3).abs() < 1e-14);
    assert!(sol.tensor().max_abs_c() < 1e-14);
    let rep = classify(&a, &ClassifyConfig::default().with_resolution(16)).unwrap();
    assert_eq!(rep.verdict, Verdict::TypeEps2);
}

#[test]
fn poisson_divides_each_mode() {
    let rhs = PeriodicField::from_terms(2, vec![WaveTerm::cos(&[1, 2], 1.0), WaveTerm::sin(&[0, 3], -0.5)], 16).unwrap();
    let w = solve_poisson(&rhs).unwrap();
    let lap = w.derivative(&[0, 0]).lin_comb(-1.0, &w.derivative(&[1, 1]), -1.0).unwrap();
    assert!(lap.max_abs_diff(&rhs).unwrap() < 1e-12);
    let bad = rhs.add_constant(0.1);
    assert!(matches!(solve_poisson(&bad), Err(HomError::Compatibility { .. })));
}

#[test]
fn incompatible_cell_rhs_is_rejected() {
    let a = gallery::<f64>("st_2d").unwrap().field;
    let cfg = SolverConfig::default().with_resolution(32);
    let (r, _) = solve_invariant_measure(&a, &cfg).unwrap();
    let one = PeriodicField::constant(2, 32, 1.0).unwrap();
    assert!(matches!(solve_cell(&a, &r, &one, &cfg), Err(HomError::Compatibility { .. })));
}

#[test]
fn separable_and_shifted_fields_vanish() {
    for name in ["separable_diag", "shifted_even"] {
        let a = gallery::<f64>(name).unwrap().field;
        let t = CellSolution::new(&a, &SolverConfig::default().with_resolution(32)).unwrap().tensor();
        assert!(t.max_abs_c() < 1e-10, "{name}: {}", t.max_abs_c());
    }
}

#[test]
fn shortcut_needs_diagonal_or_constant_trace() {
    let a = gallery::<f64>("shifted_even").unwrap().field;
    let cfg = ClassifyConfig::default().with_resolution(16);
    assert!(matches!(diagonal_classify_shortcut(&a, &cfg), Err(HomError::Domain(_))));
    let d = gallery::<f64>("separable_diag").unwrap().field;
    let rep = diagonal_classify_shortcut(&d, &cfg).unwrap();
    assert_eq!(rep.criterion, Criterion::Full);
    assert_eq!(rep.verdict, Verdict::TypeEps2);
}

#[test]
fn single_precision_verdict() {
    let a = gallery::<f32>("st_2d").unwrap().field;
    let cfg = ClassifyConfig { threshold: 1e-4, ..Default::default() }.with_resolution(32);
    let rep = classify(&a, &cfg).unwrap();
    assert_eq!(rep.verdict, Verdict::TypeEps);
    let c = rep.tensor.get(0, 0, 0) as f64;
    assert!((c + 1.0 / (128.0 * std::f64::consts::PI)).abs() < 1e-5);
}

#[test]
fn planar_gallery_verdicts_at_moderate_resolution() {
    for name in GALLERY_NAMES.iter().filter(|n| !n.ends_with("_3d")) {
        let e = gallery::<f64>(name).unwrap();
        let rep = classify(&e.field, &ClassifyConfig::default().with_resolution(32)).unwrap();
        assert_eq!(rep.verdict, e.expected_verdict, "{name}");
    }
}
