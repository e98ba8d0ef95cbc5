use serde::{Deserialize, Serialize};

use super::expr::{ScalarExpr, Var};
use super::{EvalError, Point2};

/// Planar vector field with closed-form Cartesian components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFieldSpec {
    pub c1: ScalarExpr,
    pub c2: ScalarExpr,
}

impl VectorFieldSpec {
    pub fn new(c1: ScalarExpr, c2: ScalarExpr) -> Self {
        Self { c1, c2 }
    }

    pub fn zero() -> Self {
        Self::new(ScalarExpr::zero(), ScalarExpr::zero())
    }

    pub fn component(&self, i: usize) -> &ScalarExpr {
        match i {
            0 => &self.c1,
            1 => &self.c2,
            _ => panic!("planar field has two components, asked for {i}"),
        }
    }

    pub fn eval(&self, x: Point2) -> Result<Point2, EvalError> {
        Ok([self.c1.eval(x)?, self.c2.eval(x)?])
    }

    pub fn partial(&self, var: Var) -> VectorFieldSpec {
        Self::new(self.c1.partial(var), self.c2.partial(var))
    }

    pub fn map(&self, f: impl Fn(&ScalarExpr) -> ScalarExpr) -> VectorFieldSpec {
        Self::new(f(&self.c1), f(&self.c2))
    }

    pub fn scale(&self, s: f64) -> VectorFieldSpec {
        self.map(|c| s * c.clone())
    }

    pub fn add(&self, other: &VectorFieldSpec) -> VectorFieldSpec {
        Self::new(&self.c1 + &other.c1, &self.c2 + &other.c2)
    }

    pub fn sub(&self, other: &VectorFieldSpec) -> VectorFieldSpec {
        Self::new(&self.c1 - &other.c1, &self.c2 - &other.c2)
    }

    pub fn dot(&self, other: &VectorFieldSpec) -> ScalarExpr {
        &self.c1 * &other.c1 + &self.c2 * &other.c2
    }

    /// Symbolic Jacobian entries, `[i][j] = d c_i / d x_j`.
    pub fn jacobian_exprs(&self) -> [[ScalarExpr; 2]; 2] {
        [
            [self.c1.partial(Var::X1), self.c1.partial(Var::X2)],
            [self.c2.partial(Var::X1), self.c2.partial(Var::X2)],
        ]
    }
}

/// Real 2x2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2([[a11, a12], [a21, a22]])
    }

    pub fn zero() -> Self {
        Mat2([[0.0; 2]; 2])
    }

    pub fn a11(&self) -> f64 {
        self.0[0][0]
    }
    pub fn a12(&self) -> f64 {
        self.0[0][1]
    }
    pub fn a21(&self) -> f64 {
        self.0[1][0]
    }
    pub fn a22(&self) -> f64 {
        self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.a11() * self.a22() - self.a12() * self.a21()
    }

    pub fn trace(&self) -> f64 {
        self.a11() + self.a22()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: Point2) -> Point2 {
        [
            self.a11() * v[0] + self.a12() * v[1],
            self.a21() * v[0] + self.a22() * v[1],
        ]
    }

    pub fn add_scaled(&self, other: &Mat2, s: f64) -> Mat2 {
        let mut out = *self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += s * other.0[i][j];
            }
        }
        out
    }

    /// Solves `self * x = b` by Cramer's rule; `None` when singular.
    pub fn solve(&self, b: Point2) -> Option<Point2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some([
            (b[0] * self.a22() - self.a12() * b[1]) / det,
            (self.a11() * b[1] - b[0] * self.a21()) / det,
        ])
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A closed-form field bundled with its precomputed symbolic Jacobian.
#[derive(Debug, Clone)]
pub struct SymbolicField {
    field: VectorFieldSpec,
    jac: [[ScalarExpr; 2]; 2],
}

impl SymbolicField {
    pub fn new(field: VectorFieldSpec) -> Self {
        let jac = field.jacobian_exprs();
        Self { field, jac }
    }

    pub fn spec(&self) -> &VectorFieldSpec {
        &self.field
    }

    pub fn eval(&self, x: Point2) -> Result<Point2, EvalError> {
        self.field.eval(x)
    }

    pub fn jacobian(&self, x: Point2) -> Result<Mat2, EvalError> {
        let j = &self.jac;
        Ok(Mat2::new(
            j[0][0].eval(x)?,
            j[0][1].eval(x)?,
            j[1][0].eval(x)?,
            j[1][1].eval(x)?,
        ))
    }
}

impl From<VectorFieldSpec> for SymbolicField {
    fn from(field: VectorFieldSpec) -> Self {
        Self::new(field)
    }
}
