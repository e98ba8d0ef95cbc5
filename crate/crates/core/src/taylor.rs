//! First-order-in-time predicted field `v(x, t) = Psi(x) + t u1(x)` and the
//! compatibility residuals its interior-separation criterion relies on.

use serde::Serialize;

use crate::fields::{
    self, advect, advect_scalar, grad, laplacian, vector_laplacian, EvalError, Mat2, Point2, ScalarExpr, SymbolicField,
    Var, VectorFieldSpec,
};
use crate::model::{DimensionlessScenario, Scenario};

/// Nodes per side of the deterministic residual sample grid.
pub const RESIDUAL_GRID: usize = 101;
/// Largest residual for which the compatibility conditions count as met.
pub const RESIDUAL_THRESHOLD: f64 = 1e-8;

/// `u1 = Lap(Psi) - (Psi.grad)Psi - K grad(T0) + F0`, the time derivative of the
/// velocity at t = 0 in the scaled model.
pub fn first_order_coefficient(ds: &DimensionlessScenario) -> VectorFieldSpec {
    let f = &ds.fields;
    vector_laplacian(&f.psi)
        .sub(&advect(&f.psi, &f.psi))
        .sub(&grad(&f.temp0).scale(ds.k))
        .add(&f.force0)
}

/// Dimensional variant, `mu Lap(Psi) - (Psi.grad)Psi - beta grad(T0) + F0`.
pub fn first_order_coefficient_dimensional(s: &Scenario) -> VectorFieldSpec {
    let f = &s.fields;
    vector_laplacian(&f.psi)
        .scale(s.constants.mu)
        .sub(&advect(&f.psi, &f.psi))
        .sub(&grad(&f.temp0).scale(s.constants.beta))
        .add(&f.force0)
}

/// `T1 = invPr Lap(T0) - (Psi.grad)T0 + Q`, the temperature rate at t = 0.
pub fn temperature_rate(ds: &DimensionlessScenario) -> ScalarExpr {
    let f = &ds.fields;
    ds.inv_pr * laplacian(&f.temp0) - advect_scalar(&f.psi, &f.temp0) + f.heat_source.clone()
}

/// The first-order field `Psi + t u1` with cached Jacobians of both parts.
#[derive(Debug, Clone)]
pub struct FirstOrderField {
    psi: SymbolicField,
    u1: SymbolicField,
}

impl FirstOrderField {
    pub fn new(psi: VectorFieldSpec, u1: VectorFieldSpec) -> Self {
        Self { psi: SymbolicField::new(psi), u1: SymbolicField::new(u1) }
    }

    pub fn psi(&self) -> &VectorFieldSpec {
        self.psi.spec()
    }

    pub fn u1(&self) -> &VectorFieldSpec {
        self.u1.spec()
    }

    pub fn eval(&self, x: Point2, t: f64) -> Result<Point2, EvalError> {
        let p = self.psi.eval(x)?;
        if t == 0.0 {
            return Ok(p);
        }
        let d = self.u1.eval(x)?;
        Ok([p[0] + t * d[0], p[1] + t * d[1]])
    }

    /// `dv/dt = u1`.
    pub fn time_derivative(&self, x: Point2) -> Result<Point2, EvalError> {
        self.u1.eval(x)
    }

    pub fn jacobian(&self, x: Point2, t: f64) -> Result<Mat2, EvalError> {
        let jp = self.psi.jacobian(x)?;
        if t == 0.0 {
            return Ok(jp);
        }
        Ok(jp.add_scaled(&self.u1.jacobian(x)?, t))
    }

    /// `v(., t)` as a closed-form vector field.
    pub fn spec_at(&self, t: f64) -> VectorFieldSpec {
        self.psi().add(&self.u1().scale(t))
    }

    /// `v(., t)` frozen in time, usable wherever a planar field is expected.
    pub fn at(&self, t: f64) -> FrozenField<'_> {
        FrozenField { field: self, t }
    }
}

/// The first-order field at a fixed time.
#[derive(Debug, Clone, Copy)]
pub struct FrozenField<'a> {
    pub field: &'a FirstOrderField,
    pub t: f64,
}

pub fn first_order_field(ds: &DimensionlessScenario) -> FirstOrderField {
    FirstOrderField::new(ds.fields.psi.clone(), first_order_coefficient(ds))
}

/// Divergence and compatibility residuals with their sampled suprema.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionResiduals {
    pub r_div: ScalarExpr,
    pub r_as3: ScalarExpr,
    pub max_abs_r_div: f64,
    pub max_abs_r_as3: f64,
}

impl AssumptionResiduals {
    pub fn satisfied(&self) -> bool {
        self.max_abs_r_div <= RESIDUAL_THRESHOLD && self.max_abs_r_as3 <= RESIDUAL_THRESHOLD
    }
}

/// Compatibility residual `dPsi1/dx2 dPsi2/dx1 + (dPsi1/dx1)^2 + (K/2) Lap(T0) - div(F0)/2`.
pub fn compatibility_residual(ds: &DimensionlessScenario) -> ScalarExpr {
    let f = &ds.fields;
    let d1 = |e: &ScalarExpr| e.partial(Var::X1);
    let d2 = |e: &ScalarExpr| e.partial(Var::X2);
    d2(&f.psi.c1) * d1(&f.psi.c2) + d1(&f.psi.c1).powi(2) + (0.5 * ds.k) * laplacian(&f.temp0)
        - 0.5 * fields::div(&f.force0)
}

/// Maximum of `|e|` over the residual sample grid of the scenario window.
/// Points where `e` fails to evaluate make the supremum infinite.
pub fn sup_on_window(e: &ScalarExpr, ds: &DimensionlessScenario) -> f64 {
    ds.window
        .sample_grid(RESIDUAL_GRID)
        .into_iter()
        .map(|p| e.eval(p).map(f64::abs).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

pub fn assumption_residuals(ds: &DimensionlessScenario) -> AssumptionResiduals {
    let r_div = fields::div(&ds.fields.psi);
    let r_as3 = compatibility_residual(ds);
    let max_abs_r_div = sup_on_window(&r_div, ds);
    let max_abs_r_as3 = sup_on_window(&r_as3, ds);
    AssumptionResiduals { r_div, r_as3, max_abs_r_div, max_abs_r_as3 }
}

/// Maximum over the window grid of `|div v(., t) + 2 t r_as3|`.
///
/// When `div Psi = 0` this vanishes identically for every `t`; at `t = 0` it is
/// `max |div Psi|`.
pub fn divergence_identity_check(ds: &DimensionlessScenario, t: f64) -> f64 {
    let fof = first_order_field(ds);
    let div_v = fields::div(&fof.spec_at(t));
    let combined = div_v + (2.0 * t) * compatibility_residual(ds);
    sup_on_window(&combined, ds)
}

/// `u1(x) . e2`, the transversality value at `x`.
pub fn transversality(fof: &FirstOrderField, x: Point2, e2: Point2) -> Result<f64, EvalError> {
    let d = fof.time_derivative(x)?;
    Ok(d[0] * e2[0] + d[1] * e2[1])
}
