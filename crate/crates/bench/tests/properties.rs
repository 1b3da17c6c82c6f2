use proptest::prelude::*;
use rbfpde::operators::apply_operator;
use rbfpde::OperatorSpec;
use rbfpde_bench::expr::ExpPoly;
use rbfpde_bench::metrics::{average_relative_error, l2_relative_error};

fn field(a: f64, b: f64, w: f64) -> ExpPoly {
    // a x² e^{b(x+y)} + sin(w y) cos(w x)
    ExpPoly::monomial(0, 2)
        .mul(&ExpPoly::exp([b, b, 0.0]))
        .scale(a)
        .add(&ExpPoly::sin(1, w).mul(&ExpPoly::cos(0, w)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symbolic_operator_matches_the_jet(
        a in -2.0f64..2.0,
        b in -3.0f64..3.0,
        w in 0.1f64..4.0,
        d in 0.2f64..2.0,
        v in (-3.0f64..3.0, -3.0f64..3.0),
        kappa in 0.0f64..5.0,
        x in (0.0f64..1.0, 0.0f64..1.0),
    ) {
        let u = field(a, b, w);
        let velocity = [v.0, v.1, 0.0];
        let op = OperatorSpec::convection_diffusion(2, d, &velocity[..2], kappa).unwrap();
        let p = [x.0, x.1, 0.0];
        let symbolic = u.apply_operator(2, d, &velocity, kappa).value(&p);
        let from_jet = apply_operator(&op, &u.jet(2, &p)).unwrap();
        prop_assert!((symbolic - from_jet).abs() <= 1e-10 * (1.0 + from_jet.abs()));
    }

    #[test]
    fn relative_errors_scale(values in prop::collection::vec(-5.0f64..5.0, 1..40), c in -3.0f64..3.0) {
        prop_assume!(values.iter().any(|v| v.abs() > 1e-3));
        let scaled: Vec<f64> = values.iter().map(|v| c * v).collect();
        let e = l2_relative_error(&scaled, &values).unwrap();
        prop_assert!((e - (c - 1.0).abs()).abs() < 1e-12);
        prop_assert_eq!(l2_relative_error(&values, &values).unwrap(), 0.0);
        prop_assert!(average_relative_error(&values, &values).unwrap() == 0.0);
    }

    #[test]
    fn derivative_is_a_derivation(a in -2.0f64..2.0, b in -3.0f64..3.0, w in 0.1f64..4.0, x in (0.0f64..1.0, 0.0f64..1.0)) {
        let (f, g) = (field(a, b, w), field(b, a, w + 0.5));
        let p = [x.0, x.1, 0.0];
        for axis in 0..2 {
            let lhs = f.mul(&g).derivative(axis).value(&p);
            let rhs = f.derivative(axis).value(&p) * g.value(&p) + f.value(&p) * g.derivative(axis).value(&p);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }
    }
}
