//! Closed-form planar fields and the differential operators built on them.

mod expr;
mod parse;
mod vector;

use thiserror::Error;

pub use expr::{ScalarExpr, Var};
pub use vector::{Mat2, SymbolicField, VectorFieldSpec};

pub type Point2 = [f64; 2];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{expr}` at ({}, {})", at[0], at[1])]
    DivisionByZero { expr: String, at: Point2 },
    #[error("non-finite value from `{expr}` at ({}, {})", at[0], at[1])]
    NonFinite { expr: String, at: Point2 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` at byte {position}: {message}")]
pub struct ParseError {
    pub message: String,
    pub position: usize,
    pub input: String,
}

pub fn grad(e: &ScalarExpr) -> VectorFieldSpec {
    VectorFieldSpec::new(e.partial(Var::X1), e.partial(Var::X2))
}

pub fn div(w: &VectorFieldSpec) -> ScalarExpr {
    w.c1.partial(Var::X1) + w.c2.partial(Var::X2)
}

pub fn laplacian(e: &ScalarExpr) -> ScalarExpr {
    e.partial(Var::X1).partial(Var::X1) + e.partial(Var::X2).partial(Var::X2)
}

/// Componentwise Laplacian of a vector field.
pub fn vector_laplacian(w: &VectorFieldSpec) -> VectorFieldSpec {
    w.map(laplacian)
}

/// `(a . grad) b`: component i is `a1 d b_i/dx1 + a2 d b_i/dx2`.
pub fn advect(a: &VectorFieldSpec, b: &VectorFieldSpec) -> VectorFieldSpec {
    b.map(|bi| &a.c1 * &bi.partial(Var::X1) + &a.c2 * &bi.partial(Var::X2))
}

/// `a . grad s` for a scalar `s`.
pub fn advect_scalar(a: &VectorFieldSpec, s: &ScalarExpr) -> ScalarExpr {
    &a.c1 * &s.partial(Var::X1) + &a.c2 * &s.partial(Var::X2)
}

pub fn jacobian_at(w: &VectorFieldSpec, x: Point2) -> Result<Mat2, EvalError> {
    SymbolicField::new(w.clone()).jacobian(x)
}

/// Centered-difference partial derivative, used as an independent check on
/// the symbolic one.
pub fn centered_difference(e: &ScalarExpr, var: Var, x: Point2, h: f64) -> Result<f64, EvalError> {
    let mut fwd = x;
    let mut bwd = x;
    fwd[var.index()] += h;
    bwd[var.index()] -= h;
    Ok((e.eval(fwd)? - e.eval(bwd)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x1() -> ScalarExpr {
        ScalarExpr::x1()
    }
    fn x2() -> ScalarExpr {
        ScalarExpr::x2()
    }

    fn canonical_psi(c1: f64) -> VectorFieldSpec {
        VectorFieldSpec::new(ScalarExpr::zero(), 1.0 + c1 * x1().powi(2))
    }

    #[test]
    fn operators_on_canonical_stream() {
        let psi = canonical_psi(1.5);
        let d = div(&psi);
        let adv = advect(&psi, &psi);
        for p in [[0.3, -1.0], [1.7, 0.2], [-2.0, 2.0]] {
            assert_eq!(d.eval(p).unwrap(), 0.0);
            assert_eq!(adv.eval(p).unwrap(), [0.0, 0.0]);
        }
        let t0 = 1.0 + 1.0 * x2();
        assert_eq!(laplacian(&t0).eval([0.4, 0.4]).unwrap(), 0.0);
    }

    #[test]
    fn jacobians_of_linear_fields() {
        let shear = VectorFieldSpec::new(x2(), ScalarExpr::zero());
        assert_eq!(jacobian_at(&shear, [5.0, -3.0]).unwrap(), Mat2::new(0.0, 1.0, 0.0, 0.0));
        let saddle = VectorFieldSpec::new(x1(), -x2());
        let j = jacobian_at(&saddle, [0.0, 0.0]).unwrap();
        assert_eq!(j, Mat2::new(1.0, 0.0, 0.0, -1.0));
        assert_eq!(j.det(), -1.0);
    }

    #[test]
    fn advect_matches_hand_expansion() {
        // a = (x2, x1), b = (x1 x2, x1^2): (a.grad)b = (x2*x2 + x1*x1, x2*2x1)
        let a = VectorFieldSpec::new(x2(), x1());
        let b = VectorFieldSpec::new(x1() * x2(), x1().powi(2));
        let r = advect(&a, &b).eval([2.0, 3.0]).unwrap();
        assert_eq!(r, [9.0 + 4.0, 12.0]);
    }

    #[test]
    fn mat2_solve() {
        let m = Mat2::new(2.0, 1.0, 1.0, 3.0);
        let x = m.solve([3.0, 5.0]).unwrap();
        let b = m.mul_vec(x);
        assert!((b[0] - 3.0).abs() < 1e-15 && (b[1] - 5.0).abs() < 1e-15);
        assert!(Mat2::new(1.0, 2.0, 2.0, 4.0).solve([1.0, 1.0]).is_none());
    }
}
