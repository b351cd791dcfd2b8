use proptest::prelude::*;

use nondiv_hom::field::{CoefficientField, FieldSpec, MatrixFieldSpec, PeriodicField, Phase, WaveTerm};
use nondiv_hom::HomError;

fn term(dim: usize) -> impl Strategy<Value = WaveTerm<f64>> {
    (prop::collection::vec(-3i64..=3, dim), any::<bool>(), -1.0f64..1.0).prop_filter_map("zero sin", move |(k, cos, amp)| {
        let phase = if cos { Phase::Cos } else { Phase::Sin };
        WaveTerm::new(&k, phase, amp).ok()
    })
}

fn field(dim: usize, n: usize) -> impl Strategy<Value = PeriodicField<f64>> {
    prop::collection::vec(term(dim), 0..5).prop_map(move |t| PeriodicField::from_terms(dim, t, n).unwrap())
}

fn field_2d() -> impl Strategy<Value = PeriodicField<f64>> {
    field(2, 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grid_round_trip(f in field_2d()) {
        let g = PeriodicField::from_grid(2, 16, f.values()).unwrap();
        prop_assert!(g.max_term_difference(&f) < 1e-12);
        prop_assert!(g.max_abs_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn eval_agrees_with_samples(f in field_2d(), i in 0usize..256) {
        let y = f.node(i);
        prop_assert!((f.eval(&y[..2]) - f.values()[i]).abs() < 1e-12);
    }

    #[test]
    fn mean_is_grid_average(f in field(3, 8)) {
        let avg = f.values().iter().sum::<f64>() / f.values().len() as f64;
        prop_assert!((f.mean() - avg).abs() < 1e-12);
    }

    #[test]
    fn exact_product_matches_pointwise_on_fine_grid(f in field_2d(), g in field_2d()) {
        let p = f.multiply(&g).unwrap();
        for y in [[0.1, 0.7], [0.33, 0.25], [0.9, 0.05]] {
            prop_assert!((p.eval(&y) - f.eval(&y) * g.eval(&y)).abs() < 1e-12);
        }
        // bandwidth 6 fits the 16-point grid, so collocation agrees
        let c = f.pointwise_product(&g).unwrap();
        prop_assert!(c.max_abs_diff(&p.resampled(16).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn derivative_is_linear_and_kills_constants(f in field_2d(), g in field_2d(), a in -2.0f64..2.0) {
        let lhs = f.lin_comb(a, &g, 1.0).unwrap().derivative(&[0, 1]);
        let rhs = f.derivative(&[0, 1]).lin_comb(a, &g.derivative(&[0, 1]), 1.0).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
        prop_assert!(f.derivative(&[1]).mean().abs() < 1e-12);
        prop_assert!(f.add_constant(3.0).derivative(&[0]).max_abs_diff(&f.derivative(&[0])).unwrap() < 1e-12);
    }

    #[test]
    fn integration_by_parts(f in field_2d(), g in field_2d()) {
        // int f d1 g = -int d1 f g
        let l = f.inner_product(&g.partial(0));
        let r = -f.partial(0).inner_product(&g);
        prop_assert!((l - r).abs() < 1e-10);
    }

    #[test]
    fn json_round_trip(f in field_2d()) {
        let spec = FieldSpec::from_field(&f);
        let text = serde_json::to_string(&spec).unwrap();
        let back: FieldSpec = serde_json::from_str(&text).unwrap();
        let g = back.to_field::<f64>().unwrap();
        prop_assert!(g.max_term_difference(&f) < 1e-15);
    }

    #[test]
    fn resampling_preserves_trig_polynomials(f in field_2d()) {
        let up = f.resampled(32).unwrap();
        prop_assert!(up.max_term_difference(&f) < 1e-12);
        let back = up.resampled(16).unwrap();
        prop_assert!(back.max_abs_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn single_precision_cast(f in field_2d()) {
        let g = f.cast::<f32>();
        let diff = g.values().iter().zip(f.values()).map(|(a, b)| (*a as f64 - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-5);
    }
}

#[test]
fn rejects_aliasing_and_zero_sine() {
    let t = WaveTerm::cos(&[5, 0], 1.0);
    assert!(matches!(PeriodicField::from_terms(2, vec![t], 8), Err(HomError::Alias { .. })));
    assert!(PeriodicField::from_terms(2, vec![t], 16).is_ok());
    assert!(matches!(WaveTerm::new(&[0, 0], Phase::Sin, 1.0), Err(HomError::Canonical)));
    assert!(PeriodicField::<f64>::zero(2, 12).is_err());
}

#[test]
fn canonical_sign_flip() {
    let a = WaveTerm::new(&[-1, 2], Phase::Sin, 0.5).unwrap();
    assert_eq!(a.k[..2], [1, -2]);
    assert_eq!(a.amp, -0.5);
    let b = WaveTerm::new(&[-1, 2], Phase::Cos, 0.5).unwrap();
    assert_eq!(b.amp, 0.5);
}

#[test]
fn nyquist_content_interpolates() {
    // (-1)^i along y1 on an 8-point grid
    let vals: Vec<f64> = (0..64).map(|i| if (i / 8) % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let f = PeriodicField::from_grid(2, 8, &vals).unwrap();
    assert!(f.values().iter().zip(&vals).all(|(a, b)| (a - b).abs() < 1e-14));
    // the interpolant is cos(8 pi y1), whose derivative vanishes at the nodes
    assert!(f.partial(0).max_abs() < 1e-12);
}

#[test]
fn matrix_field_json() {
    let doc = r#"{"dimension": 2, "entries": {
        "11": [{"k": [0, 0], "phase": "cos", "amp": 2.0}, {"k": [1, 0], "phase": "sin", "amp": 0.5}],
        "22": [{"k": [0, 0], "phase": "cos", "amp": 1.0}]}}"#;
    let a = MatrixFieldSpec::parse(doc).unwrap().to_field::<f64>().unwrap();
    assert_eq!(a.dim(), 2);
    assert!(a.is_diagonal(1e-15));
    assert_eq!(a.resolution(), 64);
    let back = MatrixFieldSpec::from_field(&a).to_field::<f64>().unwrap();
    assert!(back.max_abs_diff(&a).unwrap() < 1e-15);
    let bad = r#"{"dimension": 2, "entries": {"21": []}}"#;
    assert!(MatrixFieldSpec::parse(bad).unwrap().to_field::<f64>().is_err());
}

#[test]
fn ellipticity_and_contractions() {
    let a = CoefficientField::from_fn(2, 16, |y: &[f64]| {
        let s = (2.0 * std::f64::consts::PI * y[0]).sin();
        [[2.0 + s, 0.3, 0.0], [0.3, 1.0, 0.0], [0.0; 3]]
    })
    .unwrap();
    let (lo, hi) = a.ellipticity();
    assert!(lo > 0.0 && hi > lo);
    assert!(!a.is_diagonal(1e-12));
    let tr = a.trace().unwrap();
    assert!((tr.mean() - 3.0).abs() < 1e-12);
}
