use vortex_birth::fields::{ScalarExpr, VectorFieldSpec};
use vortex_birth::model::{DimensionlessScenario, InitialFields, Window};
use vortex_birth::predictor::CanonicalForm;
use vortex_birth::report::stagnation_window;
use vortex_birth::solver::{
    stagnation_count, taylor_consistency, FieldSnapshot, Grid2, Solver, SolverConfig, SolverMode,
};
use vortex_birth::topology::Tolerances;

fn canonical(k: f64) -> DimensionlessScenario {
    CanonicalForm::new(k, 1.0, 1.0, 1.0, 1.0).scenario(1.0, Window::square(2.0)).unwrap()
}

fn run(ds: &DimensionlessScenario, n: usize, mode: SolverMode, end: f64, dt: Option<f64>) -> (Grid2, Solver, Vec<FieldSnapshot>) {
    let g = Grid2::new(n, n, ds.window).unwrap();
    let dt = dt.unwrap_or(SolverConfig::default_dt(&g));
    let solver = Solver::new(ds, SolverConfig::new(g, mode, dt, end, 1).unwrap()).unwrap();
    let out = solver.run();
    assert!(out.failure.is_none(), "{:?}", out.failure);
    (g, solver, out.snapshots)
}

#[test]
fn literal_divergence_grows_like_t_squared() {
    let t0 = 1.0 / 98.0;
    let (_, _, snaps) = run(&canonical(100.0), 32, SolverMode::Literal, 2.0 * t0, None);
    assert!(snaps[1].max_div <= 1e-12);
    let ratios: Vec<f64> = snaps.iter().filter(|s| s.t >= 0.25 * t0).map(|s| s.max_div / (s.t * s.t)).collect();
    assert!(ratios.len() >= 5);
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo <= 3.0, "{ratios:?}");
}

#[test]
fn projected_mode_is_divergence_free() {
    let (_, _, snaps) = run(&canonical(100.0), 32, SolverMode::Projected, 2.0 / 98.0, None);
    for s in &snaps {
        assert!(s.max_div <= 1e-6, "t = {}: {}", s.t, s.max_div);
    }
}

#[test]
fn stagnation_count_brackets_the_event() {
    let t0 = 1.0 / 18.0;
    let (g, _, snaps) = run(&canonical(20.0), 64, SolverMode::Literal, 1.5 * t0, None);
    let at = |t: f64| snaps.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs())).unwrap();
    let sub = stagnation_window(&g.window);
    let tol = Tolerances::default();
    assert_eq!(stagnation_count(at(0.5 * t0), &g, &sub, 16, &tol).unwrap(), 0);
    assert_eq!(stagnation_count(at(1.5 * t0), &g, &sub, 16, &tol).unwrap(), 2);
}

#[test]
fn uniform_stream_is_exact() {
    let fields = InitialFields {
        psi: VectorFieldSpec::new(1.0.into(), ScalarExpr::zero()),
        temp0: 1.0.into(),
        force0: VectorFieldSpec::zero(),
        heat_source: ScalarExpr::zero(),
    };
    let ds = DimensionlessScenario::from_groups(fields, 5.0, 1.0, Window::square(2.0)).unwrap();
    let (g, solver, snaps) = run(&ds, 24, SolverMode::Literal, 0.05, None);
    let ratios = taylor_consistency(&snaps, &g, solver.first_order()).unwrap();
    assert_eq!(ratios[0], (0.0, 0.0));
    assert!(ratios.iter().all(|(_, r)| *r <= 1e-9), "{ratios:?}");
}

fn one_step_operator_error(n: usize) -> f64 {
    let x1 = ScalarExpr::x1;
    let x2 = ScalarExpr::x2;
    let fields = InitialFields {
        psi: VectorFieldSpec::new(x2().sin(), x1().cos()),
        temp0: (x1() + 0.5 * x2()).cos(),
        force0: VectorFieldSpec::new(0.2 * x2(), ScalarExpr::zero()),
        heat_source: ScalarExpr::zero(),
    };
    let ds = DimensionlessScenario::from_groups(fields, 3.0, 1.0, Window::square(2.0)).unwrap();
    let dt = 1e-6;
    let (g, solver, snaps) = run(&ds, n, SolverMode::Literal, dt, Some(dt));
    let s = &snaps[1];
    let mut worst = 0.0f64;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let v = solver.first_order().eval(g.node(i, j), s.t).unwrap();
            let c = g.idx(i, j);
            worst = worst.max((s.u1[c] - v[0]).hypot(s.u2[c] - v[1]) / dt);
        }
    }
    worst
}

#[test]
fn spatial_error_is_second_order() {
    let coarse = one_step_operator_error(64);
    let fine = one_step_operator_error(128);
    let ratio = coarse / fine;
    assert!((3.5..4.6).contains(&ratio), "{coarse} / {fine} = {ratio}");
}
