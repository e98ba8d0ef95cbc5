use proptest::prelude::*;
use vortex_birth::fields::{centered_difference, div, grad, laplacian, Mat2, ScalarExpr, Var};
use vortex_birth::model::{
    nondimensionalize, pressure_from_state, pressure_gradient_decomposition, redimensionalize, Constants, FluidKind,
    InitialFields, Scenario, Window,
};
use vortex_birth::topology::{eigen_structure, Tolerances};

fn expr() -> impl Strategy<Value = ScalarExpr> {
    let leaf = prop_oneof![
        Just(ScalarExpr::x1()),
        Just(ScalarExpr::x2()),
        (-3.0f64..3.0).prop_map(ScalarExpr::constant),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(ScalarExpr::sin),
            inner.clone().prop_map(ScalarExpr::cos),
            inner.clone().prop_map(|a| (0.3 * a).exp()),
            (inner.clone(), inner).prop_map(|(a, b)| a / (2.0 + b.sin())),
        ]
    })
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| [a, b])
}

proptest! {
    #[test]
    fn symbolic_partial_matches_centered_difference(e in expr(), p in point()) {
        for var in [Var::X1, Var::X2] {
            let exact = e.partial(var).eval(p).unwrap();
            let approx = centered_difference(&e, var, p, 1e-6).unwrap();
            let scale = 1.0 + exact.abs() + e.eval(p).unwrap().abs();
            prop_assert!((exact - approx).abs() <= 1e-6 * scale, "{e}: {exact} vs {approx}");
        }
    }

    #[test]
    fn div_grad_is_laplacian(e in expr(), p in point()) {
        let a = div(&grad(&e)).eval(p).unwrap();
        let b = laplacian(&e).eval(p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn printed_expressions_parse_back(e in expr()) {
        let text = e.to_string();
        let again: ScalarExpr = text.parse().unwrap();
        prop_assert_eq!(&again, &e);
        for p in [[0.3, -0.2], [-0.9, 0.7]] {
            let (a, b) = (e.eval(p).unwrap(), again.eval(p).unwrap());
            prop_assert!(a == b || (a - b).abs() <= 1e-15 * a.abs());
        }
    }

    #[test]
    fn gas_is_liquid_without_offset(rho in 1e-3f64..1e3, temp in 1e-2f64..1e3, r in 1e-2f64..1e3) {
        let gas = pressure_from_state(rho, temp, FluidKind::Gas { r }).unwrap();
        let liquid = pressure_from_state(rho, temp, FluidKind::Liquid { sigma: r, gamma: 0.0 }).unwrap();
        prop_assert_eq!(gas, liquid);
    }

    #[test]
    fn pressure_gradient_splits_exactly(t in expr(), phi in expr(), beta in -5.0f64..5.0, delta in -5.0f64..5.0, p in point()) {
        // -grad(p)/rho with p = e^phi (beta T + delta)
        let rho = phi.clone().exp();
        let pressure = rho.clone() * (beta * t.clone() + delta);
        let direct = grad(&pressure).eval(p).unwrap();
        let rho_v = rho.eval(p).unwrap();
        let split = pressure_gradient_decomposition(&t, &phi, beta, delta).eval(p).unwrap();
        for k in 0..2 {
            let d = -direct[k] / rho_v;
            prop_assert!((d - split[k]).abs() <= 1e-9 * (1.0 + d.abs()), "{d} vs {}", split[k]);
        }
    }

    #[test]
    fn scaling_round_trip(
        mu in 1e-2f64..10.0, kappa in 0.0f64..2.0, beta in -10.0f64..10.0,
        length in 0.1f64..10.0, theta in 0.1f64..10.0, e in expr(), p in point(),
    ) {
        let c = Constants { mu, kappa, beta, delta: 0.0, length, theta };
        let fields = InitialFields {
            psi: vortex_birth::fields::VectorFieldSpec::new(e.clone(), ScalarExpr::x1()),
            temp0: e.clone(),
            force0: vortex_birth::fields::VectorFieldSpec::new(ScalarExpr::x2(), e.clone()),
            heat_source: e,
        };
        let s = Scenario::new(fields, c, Window::default()).unwrap();
        let ds = nondimensionalize(&s);
        prop_assert_eq!(ds.k, length * length * beta * theta / (mu * mu));
        // dimensionless temperature at x' equals T(L x') / theta
        let lp = [length * p[0], length * p[1]];
        let direct = s.fields.temp0.eval(lp).unwrap() / theta;
        let scaled = ds.fields.temp0.eval(p).unwrap();
        prop_assert!((direct - scaled).abs() <= 1e-12 * (1.0 + direct.abs()));
        let back = redimensionalize(&ds);
        for (a, b) in [(&s.fields.temp0, &back.fields.temp0), (&s.fields.psi.c1, &back.fields.psi.c1), (&s.fields.force0.c2, &back.fields.force0.c2)] {
            let (x, y) = (a.eval(p).unwrap(), b.eval(p).unwrap());
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn nilpotent_eigen_structure(theta in 0.0f64..std::f64::consts::TAU, alpha in prop_oneof![-5.0f64..-1e-3, 1e-3f64..5.0]) {
        let e1 = [theta.cos(), theta.sin()];
        let e2 = [-theta.sin(), theta.cos()];
        let j = Mat2::new(alpha * e1[0] * e2[0], alpha * e1[0] * e2[1], alpha * e1[1] * e2[0], alpha * e1[1] * e2[1]);
        let s = eigen_structure(&j, &Tolerances::default()).unwrap();
        let je1 = j.mul_vec(s.e1);
        let je2 = j.mul_vec(s.e2);
        prop_assert!(je1[0].hypot(je1[1]) <= 1e-12);
        prop_assert!((je2[0] - s.alpha * s.e1[0]).hypot(je2[1] - s.alpha * s.e1[1]) <= 1e-12);
        prop_assert!((s.alpha.abs() - alpha.abs()).abs() <= 1e-12);
        prop_assert!((s.e1[0] * s.e2[0] + s.e1[1] * s.e2[1]).abs() <= 1e-15);
    }
}
