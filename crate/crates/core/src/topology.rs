//! Singular points of planar fields: Newton search, Poincare index, the
//! eigen-structure of a degenerate Jacobian, and the degenerate-point checklist.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fields::{EvalError, Mat2, Point2, SymbolicField, VectorFieldSpec};
use crate::model::Window;
use crate::taylor::{transversality, FirstOrderField, FrozenField};

/// Numerical thresholds for singular-point work. All values are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// `|v| <= root_tol` counts as a zero.
    pub root_tol: f64,
    /// `|det J| <= det_tol * |J|_F^2` counts as degenerate.
    pub det_tol: f64,
    /// `|J|_F <= mat_tol` counts as the zero matrix.
    pub mat_tol: f64,
    /// `|u1 . e2| > trans_tol` counts as transversal.
    pub trans_tol: f64,
    pub merge_radius: f64,
    pub index_radius: f64,
    pub index_samples: usize,
    pub max_newton_iter: usize,
    /// Step of the centered-difference Jacobian for sampled fields.
    pub fd_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            root_tol: 1e-9,
            det_tol: 1e-7,
            mat_tol: 1e-10,
            trans_tol: 1e-8,
            merge_radius: 1e-5,
            index_radius: 0.1,
            index_samples: 720,
            max_newton_iter: 50,
            fd_step: 1e-6,
        }
    }
}

const POLISH_ITER: usize = 80;
const MAX_HALVINGS: usize = 40;
const INDEX_RESIDUE_BOUND: f64 = 0.1;
/// Largest turning of the field between consecutive circle samples.
const MAX_ANGLE_INCREMENT: f64 = PI / 2.0;

/// An evaluable planar vector field.
pub trait PlanarField: Sync {
    fn value(&self, x: Point2) -> Result<Point2, EvalError>;

    /// Jacobian; centered differences unless the field knows better.
    fn jacobian(&self, x: Point2) -> Result<Mat2, EvalError> {
        let h = Tolerances::default().fd_step;
        let mut cols = [[0.0; 2]; 2];
        for (j, col) in cols.iter_mut().enumerate() {
            let mut fwd = x;
            let mut bwd = x;
            fwd[j] += h;
            bwd[j] -= h;
            let a = self.value(fwd)?;
            let b = self.value(bwd)?;
            *col = [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h)];
        }
        Ok(Mat2::new(cols[0][0], cols[1][0], cols[0][1], cols[1][1]))
    }
}

impl<T: PlanarField + ?Sized> PlanarField for &T {
    fn value(&self, x: Point2) -> Result<Point2, EvalError> {
        (**self).value(x)
    }
    fn jacobian(&self, x: Point2) -> Result<Mat2, EvalError> {
        (**self).jacobian(x)
    }
}

impl PlanarField for SymbolicField {
    fn value(&self, x: Point2) -> Result<Point2, EvalError> {
        self.eval(x)
    }
    fn jacobian(&self, x: Point2) -> Result<Mat2, EvalError> {
        SymbolicField::jacobian(self, x)
    }
}

impl PlanarField for FrozenField<'_> {
    fn value(&self, x: Point2) -> Result<Point2, EvalError> {
        self.field.eval(x, self.t)
    }
    fn jacobian(&self, x: Point2) -> Result<Mat2, EvalError> {
        self.field.jacobian(x, self.t)
    }
}

/// Closure-backed field with a finite-difference Jacobian.
pub struct FnField<F>(pub F);

impl<F: Fn(Point2) -> Point2 + Sync> PlanarField for FnField<F> {
    fn value(&self, x: Point2) -> Result<Point2, EvalError> {
        Ok((self.0)(x))
    }
}

fn norm(v: Point2) -> f64 {
    v[0].hypot(v[1])
}

fn dist(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Newton direction, falling back to a Levenberg-Marquardt step when the
/// Jacobian is numerically singular.
fn newton_direction(j: &Mat2, f: Point2) -> Option<Point2> {
    let scale = j.frobenius().powi(2);
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    if j.det().abs() > 1e-12 * scale {
        if let Some(d) = j.solve([-f[0], -f[1]]) {
            return Some(d);
        }
    }
    let lambda = 1e-6 * scale;
    let jt_f = [j.a11() * f[0] + j.a21() * f[1], j.a12() * f[0] + j.a22() * f[1]];
    let jtj = Mat2::new(
        j.a11() * j.a11() + j.a21() * j.a21() + lambda,
        j.a11() * j.a12() + j.a21() * j.a22(),
        j.a12() * j.a11() + j.a22() * j.a21(),
        j.a12() * j.a12() + j.a22() * j.a22() + lambda,
    );
    jtj.solve([-jt_f[0], -jt_f[1]])
}

/// One damped step: the full direction is halved until the residual drops.
fn damped_step<F: PlanarField + ?Sized>(field: &F, x: Point2, r: f64, d: Point2) -> Option<(Point2, Point2, f64)> {
    let mut lambda = 1.0;
    for _ in 0..MAX_HALVINGS {
        let cand = [x[0] + lambda * d[0], x[1] + lambda * d[1]];
        if let Ok(fc) = field.value(cand) {
            let rc = norm(fc);
            if rc < r {
                return Some((cand, fc, rc));
            }
        }
        lambda *= 0.5;
    }
    None
}

/// Damped Newton from `seed`; returns the converged point and its residual.
///
/// After reaching `root_tol` the iteration keeps going while the residual still
/// drops, which pulls roots of degenerate (fold) points onto a single location.
pub fn newton_root<F: PlanarField + ?Sized>(
    field: &F,
    seed: Point2,
    window: &Window,
    tol: &Tolerances,
) -> Option<(Point2, f64)> {
    let bounds = window.expanded(0.25);
    let mut x = seed;
    let mut f = field.value(x).ok()?;
    let mut r = norm(f);
    let mut iter = 0;
    while r > tol.root_tol {
        if iter >= tol.max_newton_iter {
            return None;
        }
        iter += 1;
        let j = field.jacobian(x).ok()?;
        let d = newton_direction(&j, f)?;
        (x, f, r) = damped_step(field, x, r, d)?;
        if !bounds.contains(x) {
            return None;
        }
    }
    for _ in 0..POLISH_ITER {
        if r == 0.0 {
            break;
        }
        let Ok(j) = field.jacobian(x) else { break };
        let Some(d) = newton_direction(&j, f) else { break };
        let Some(next) = damped_step(field, x, r, d) else { break };
        (x, f, r) = next;
    }
    window.contains(x).then_some((x, r))
}

/// Merges points closer than `radius`, keeping the lower residual, and sorts
/// the survivors lexicographically.
fn merge_points(found: Vec<(Point2, f64)>, radius: f64) -> Vec<Point2> {
    let mut reps: Vec<(Point2, f64)> = Vec::new();
    for (p, r) in found {
        match reps.iter_mut().find(|(q, _)| dist(*q, p) <= radius) {
            Some(rep) => {
                if r < rep.1 {
                    *rep = (p, r);
                }
            }
            None => reps.push((p, r)),
        }
    }
    let mut out: Vec<Point2> = reps.into_iter().map(|(p, _)| p).collect();
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    out
}

/// Zeros of `field` in `window`, by Newton from a `seed_density^2` seed grid.
pub fn find_singular_points<F: PlanarField + ?Sized>(
    field: &F,
    window: &Window,
    seed_density: usize,
    tol: &Tolerances,
) -> Vec<Point2> {
    assert!(seed_density >= 8, "seed density must be at least 8, got {seed_density}");
    let found: Vec<(Point2, f64)> = window
        .sample_grid(seed_density)
        .into_par_iter()
        .filter_map(|seed| newton_root(field, seed, window, tol))
        .collect();
    merge_points(found, tol.merge_radius)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("field vanishes on the index circle near ({}, {}); choose another radius", at[0], at[1])]
    ZeroOnCircle { at: Point2 },
    #[error("winding sum is {residue} away from an integer or the field turns by {max_increment} rad between samples; increase the sample count")]
    Undersampled { residue: f64, max_increment: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Winding number of `field` along the circle of `radius` about `x0`.
pub fn poincare_index<F: PlanarField + ?Sized>(
    field: &F,
    x0: Point2,
    radius: f64,
    samples: usize,
    zero_tol: f64,
) -> Result<i32, IndexError> {
    assert!(samples >= 8 && radius > 0.0);
    let point = |k: usize| {
        let a = 2.0 * PI * k as f64 / samples as f64;
        [x0[0] + radius * a.cos(), x0[1] + radius * a.sin()]
    };
    let mut values = Vec::with_capacity(samples);
    for k in 0..samples {
        let p = point(k);
        let v = field.value(p)?;
        if norm(v) <= zero_tol {
            return Err(IndexError::ZeroOnCircle { at: p });
        }
        values.push(v);
    }
    let increments: Vec<f64> = (0..samples)
        .map(|k| {
            let a = values[k];
            let b = values[(k + 1) % samples];
            (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1])
        })
        .collect();
    let winding = increments.iter().sum::<f64>() / (2.0 * PI);
    let rounded = winding.round();
    let residue = (winding - rounded).abs();
    // wrapped increments always sum to a multiple of 2 pi, so aliasing shows up
    // as large single-sample turns rather than as a fractional residue
    let max_increment = increments.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if residue >= INDEX_RESIDUE_BOUND || max_increment >= MAX_ANGLE_INCREMENT {
        return Err(IndexError::Undersampled { residue, max_increment });
    }
    Ok(rounded as i32)
}

/// Index with the default radius, retrying smaller and larger circles when the
/// default one is unusable. Radii never exceed `max_radius`.
pub fn index_with_fallback<F: PlanarField + ?Sized>(
    field: &F,
    x0: Point2,
    max_radius: f64,
    tol: &Tolerances,
) -> Result<i32, IndexError> {
    let r0 = tol.index_radius.min(max_radius);
    let mut last = None;
    for r in [r0, 0.5 * r0, 0.25 * r0, 2.0 * r0, 0.125 * r0] {
        if r > max_radius {
            continue;
        }
        match poincare_index(field, x0, r, tol.index_samples, tol.root_tol) {
            Ok(i) => return Ok(i),
            Err(e @ IndexError::Eval(_)) => return Err(e),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one radius is tried"))
}

/// Null direction `e1`, its orthogonal companion `e2`, and `alpha` with
/// `J e1 = 0`, `J e2 = alpha e1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenStructure {
    pub e1: Point2,
    pub e2: Point2,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EigenError {
    #[error("Jacobian is numerically the zero matrix")]
    ZeroMatrix,
    #[error("Jacobian is not a rank-one matrix mapping e2 onto its null direction")]
    NotRankOne,
}

/// Eigen-structure of a degenerate nonzero Jacobian.
///
/// `e1` spans the null space with a nonnegative first component (nonnegative
/// second on ties), `e2` is `e1` rotated by +90 degrees. Requires `J e2` to be
/// parallel to `e1`, i.e. `J` nilpotent.
pub fn eigen_structure(j: &Mat2, tol: &Tolerances) -> Result<EigenStructure, EigenError> {
    let frob = j.frobenius();
    if frob <= tol.mat_tol {
        return Err(EigenError::ZeroMatrix);
    }
    if j.det().abs() > tol.det_tol * frob * frob {
        return Err(EigenError::NotRankOne);
    }
    let rows = [[j.a11(), j.a12()], [j.a21(), j.a22()]];
    let row = if norm(rows[0]) >= norm(rows[1]) { rows[0] } else { rows[1] };
    let n = norm(row);
    let mut e1 = [row[1] / n, -row[0] / n];
    if e1[0] < 0.0 || (e1[0] == 0.0 && e1[1] < 0.0) {
        e1 = [-e1[0], -e1[1]];
    }
    let e2 = [-e1[1], e1[0]];
    let je2 = j.mul_vec(e2);
    let alpha = je2[0] * e1[0] + je2[1] * e1[1];
    let off_axis = je2[0] * e2[0] + je2[1] * e2[1];
    if off_axis.abs() > tol.det_tol.sqrt() * frob || alpha.abs() <= tol.mat_tol {
        return Err(EigenError::NotRankOne);
    }
    Ok(EigenStructure { e1, e2, alpha })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularKind {
    Saddle,
    Node,
    FocusOrCenter,
    DegenerateNonzero,
    ZeroMatrix,
}

pub fn classify(j: &Mat2, tol: &Tolerances) -> SingularKind {
    let frob = j.frobenius();
    let det = j.det();
    if frob <= tol.mat_tol {
        SingularKind::ZeroMatrix
    } else if det.abs() <= tol.det_tol * frob * frob {
        SingularKind::DegenerateNonzero
    } else if det < 0.0 {
        SingularKind::Saddle
    } else if j.trace().powi(2) - 4.0 * det >= 0.0 {
        SingularKind::Node
    } else {
        SingularKind::FocusOrCenter
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularPointReport {
    pub location: Point2,
    pub jacobian: Mat2,
    pub det: f64,
    pub frobenius: f64,
    /// `None` when no circle gave a conclusive winding number.
    pub index: Option<i32>,
    pub kind: SingularKind,
    pub e1: Option<Point2>,
    pub e2: Option<Point2>,
    pub alpha: Option<f64>,
}

pub fn singular_point_report<F: PlanarField + ?Sized>(
    field: &F,
    x: Point2,
    max_radius: f64,
    tol: &Tolerances,
) -> Result<SingularPointReport, EvalError> {
    let jacobian = field.jacobian(x)?;
    let kind = classify(&jacobian, tol);
    let eig = match kind {
        SingularKind::DegenerateNonzero => eigen_structure(&jacobian, tol).ok(),
        _ => None,
    };
    let index = match index_with_fallback(field, x, max_radius, tol) {
        Ok(i) => Some(i),
        Err(IndexError::Eval(e)) => return Err(e),
        Err(_) => None,
    };
    Ok(SingularPointReport {
        location: x,
        jacobian,
        det: jacobian.det(),
        frobenius: jacobian.frobenius(),
        index,
        kind,
        e1: eig.map(|e| e.e1),
        e2: eig.map(|e| e.e2),
        alpha: eig.map(|e| e.alpha),
    })
}

/// The three degenerate-point hypotheses and their conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Assumption25Checklist {
    pub index_is_zero: bool,
    /// Nonzero degenerate Jacobian with a well-defined `e2`.
    pub jacobian_nonzero: bool,
    pub transversality_nonzero: bool,
    pub all_pass: bool,
}

impl Assumption25Checklist {
    pub fn new(index_is_zero: bool, jacobian_nonzero: bool, transversality_nonzero: bool) -> Self {
        Self {
            index_is_zero,
            jacobian_nonzero,
            transversality_nonzero,
            all_pass: index_is_zero && jacobian_nonzero && transversality_nonzero,
        }
    }
}

/// Checklist together with the quantities it was decided from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assumption25Outcome {
    pub checklist: Assumption25Checklist,
    pub index: i32,
    pub jacobian: Mat2,
    pub eigen: Option<EigenStructure>,
    pub transversality: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("({}, {}) is not a singular point: |v| = {residual}", at[0], at[1])]
    NotASingularPoint { at: Point2, residual: f64 },
    #[error("index is inconclusive: {0}")]
    Index(#[from] IndexError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Evaluates the degenerate-point hypotheses for `v(., t0)` at `x0`.
pub fn assumption25_check(
    fof: &FirstOrderField,
    x0: Point2,
    t0: f64,
    max_radius: f64,
    tol: &Tolerances,
) -> Result<Assumption25Outcome, TopologyError> {
    let residual = norm(fof.eval(x0, t0)?);
    if residual > tol.root_tol {
        return Err(TopologyError::NotASingularPoint { at: x0, residual });
    }
    let frozen = fof.at(t0);
    let index = index_with_fallback(&frozen, x0, max_radius, tol)?;
    let jacobian = fof.jacobian(x0, t0)?;
    let eigen = eigen_structure(&jacobian, tol).ok();
    let trans = match eigen {
        Some(e) => Some(transversality(fof, x0, e.e2)?),
        None => None,
    };
    let checklist = Assumption25Checklist::new(
        index == 0,
        eigen.is_some(),
        trans.is_some_and(|v| v.abs() > tol.trans_tol),
    );
    Ok(Assumption25Outcome { checklist, index, jacobian, eigen, transversality: trans })
}

/// Degeneracy test that accounts for root-location uncertainty: the point is
/// degenerate if `det J` is small relative to `|J|_F^2` at `p`, or changes sign
/// within `merge_radius` of `p`.
///
/// A fold evaluated in floating point has its zero pair split by about the
/// square root of the rounding error, which leaves `det J` at the found root
/// well above `det_tol` even though the true fold sits inside the merge ball.
pub fn is_numerically_degenerate<F: PlanarField + ?Sized>(
    field: &F,
    p: Point2,
    tol: &Tolerances,
) -> Result<bool, EvalError> {
    let j = field.jacobian(p)?;
    let frob = j.frobenius();
    let det = j.det();
    if det.abs() <= tol.det_tol * frob * frob {
        return Ok(true);
    }
    let r = tol.merge_radius;
    for d in [[r, 0.0], [-r, 0.0], [0.0, r], [0.0, -r]] {
        let q = field.jacobian([p[0] + d[0], p[1] + d[1]])?.det();
        if q.signum() != det.signum() {
            return Ok(true);
        }
    }
    Ok(false)
}

/// True when every singular point in `window` is nondegenerate.
pub fn regularity_screen<F: PlanarField + ?Sized>(
    field: &F,
    window: &Window,
    seed_density: usize,
    tol: &Tolerances,
) -> bool {
    find_singular_points(field, window, seed_density, tol)
        .into_iter()
        .all(|p| matches!(is_numerically_degenerate(field, p, tol), Ok(false)))
}

/// Symbolic field from closed-form components.
pub fn symbolic(spec: &VectorFieldSpec) -> SymbolicField {
    SymbolicField::new(spec.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarExpr;

    fn x1() -> ScalarExpr {
        ScalarExpr::x1()
    }
    fn x2() -> ScalarExpr {
        ScalarExpr::x2()
    }

    /// Independent winding count: signed crossings of the positive real axis by
    /// the image curve.
    fn crossing_index<F: PlanarField>(field: &F, x0: Point2, r: f64, n: usize) -> i32 {
        let vals: Vec<Point2> = (0..=n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                field.value([x0[0] + r * a.cos(), x0[1] + r * a.sin()]).unwrap()
            })
            .collect();
        let mut count = 0;
        for w in vals.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a[1] < 0.0) != (b[1] < 0.0) {
                let x_cross = a[0] - a[1] * (b[0] - a[0]) / (b[1] - a[1]);
                if x_cross > 0.0 {
                    count += if b[1] >= 0.0 { 1 } else { -1 };
                }
            }
        }
        count
    }

    fn canonical_v(t: f64) -> SymbolicField {
        // K = 100, C1..C4 = 1: v = (t x2, 1 + x1^2 - 98 t)
        SymbolicField::new(VectorFieldSpec::new(t * x2(), 1.0 + x1().powi(2) - 98.0 * t))
    }

    #[test]
    fn classical_indices() {
        let tol = Tolerances::default();
        let saddle = symbolic(&VectorFieldSpec::new(x1(), -x2()));
        let center = symbolic(&VectorFieldSpec::new(-x2(), x1()));
        assert_eq!(poincare_index(&saddle, [0.0, 0.0], 0.5, 720, tol.root_tol).unwrap(), -1);
        assert_eq!(poincare_index(&center, [0.0, 0.0], 0.5, 720, tol.root_tol).unwrap(), 1);
        assert_eq!(crossing_index(&saddle, [0.0, 0.0], 0.5, 4096), -1);
        assert_eq!(crossing_index(&center, [0.0, 0.0], 0.5, 4096), 1);
        let fold = canonical_v(1.0 / 98.0);
        assert_eq!(poincare_index(&fold, [0.0, 0.0], 0.2, 720, tol.root_tol).unwrap(), 0);
        assert_eq!(crossing_index(&fold, [0.0, 0.0], 0.2, 4096), 0);
    }

    #[test]
    fn index_errors() {
        let saddle = symbolic(&VectorFieldSpec::new(x1(), -x2()));
        // the circle passes through the zero at the origin
        let e = poincare_index(&saddle, [0.5, 0.0], 0.5, 720, 1e-9).unwrap_err();
        assert!(matches!(e, IndexError::ZeroOnCircle { .. }));
        let wild = symbolic(&VectorFieldSpec::new((40.0 * x1()).cos(), (40.0 * x1()).sin()));
        assert!(matches!(
            poincare_index(&wild, [0.0, 0.0], 1.0, 16, 1e-9),
            Err(IndexError::Undersampled { .. })
        ));
    }

    #[test]
    fn index_is_stable_under_radius_halving() {
        let f = symbolic(&VectorFieldSpec::new(x1() * x1() * x1() - x2(), x1() + x2()));
        let a = poincare_index(&f, [0.0, 0.0], 0.4, 720, 1e-9).unwrap();
        let b = poincare_index(&f, [0.0, 0.0], 0.2, 720, 1e-9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn canonical_roots_before_at_and_after() {
        let tol = Tolerances::default();
        let w = Window::square(2.0);
        let t0 = 1.0 / 98.0;
        assert!(find_singular_points(&canonical_v(0.5 * t0), &w, 16, &tol).is_empty());
        let at = find_singular_points(&canonical_v(t0), &w, 16, &tol);
        assert_eq!(at.len(), 1, "{at:?}");
        assert!(norm(at[0]) < 1e-5);
        let t = 1.5 * t0;
        let after = find_singular_points(&canonical_v(t), &w, 16, &tol);
        let x = (98.0 * t - 1.0f64).sqrt();
        assert_eq!(after.len(), 2);
        assert!(dist(after[0], [-x, 0.0]) < 1e-9 && dist(after[1], [x, 0.0]) < 1e-9);
        // pair of opposite indices
        let idx: i32 = after
            .iter()
            .map(|p| poincare_index(&canonical_v(t), *p, 0.05, 720, 1e-9).unwrap())
            .sum();
        assert_eq!(idx, 0);
        assert_eq!(poincare_index(&canonical_v(t), [0.0, 0.0], 1.5, 1440, 1e-9).unwrap(), 0);
    }

    #[test]
    fn eigen_structure_cases() {
        let tol = Tolerances::default();
        let c = 0.37;
        let e = eigen_structure(&Mat2::new(0.0, c, 0.0, 0.0), &tol).unwrap();
        assert_eq!(e, EigenStructure { e1: [1.0, 0.0], e2: [0.0, 1.0], alpha: c });
        assert_eq!(eigen_structure(&Mat2::zero(), &tol), Err(EigenError::ZeroMatrix));
        assert_eq!(eigen_structure(&Mat2::new(1.0, 0.0, 0.0, 2.0), &tol), Err(EigenError::NotRankOne));
        // rank one but not nilpotent: J e2 has a component along e2
        assert_eq!(eigen_structure(&Mat2::new(1.0, 0.0, 0.0, 0.0), &tol), Err(EigenError::NotRankOne));
    }

    #[test]
    fn classification() {
        let tol = Tolerances::default();
        assert_eq!(classify(&Mat2::new(1.0, 0.0, 0.0, -1.0), &tol), SingularKind::Saddle);
        assert_eq!(classify(&Mat2::new(1.0, 0.0, 0.0, 2.0), &tol), SingularKind::Node);
        assert_eq!(classify(&Mat2::new(0.0, -1.0, 1.0, 0.0), &tol), SingularKind::FocusOrCenter);
        assert_eq!(classify(&Mat2::new(0.0, 1.0, 0.0, 0.0), &tol), SingularKind::DegenerateNonzero);
        assert_eq!(classify(&Mat2::zero(), &tol), SingularKind::ZeroMatrix);
    }

    #[test]
    fn regularity() {
        let tol = Tolerances::default();
        let w = Window::square(2.0);
        let t0 = 1.0 / 98.0;
        assert!(regularity_screen(&canonical_v(1.5 * t0), &w, 16, &tol));
        assert!(!regularity_screen(&canonical_v(t0), &w, 16, &tol));
        let uniform = symbolic(&VectorFieldSpec::new(1.0.into(), 0.0.into()));
        assert!(regularity_screen(&uniform, &w, 16, &tol));
    }

    #[test]
    fn checklist_cases() {
        let tol = Tolerances::default();
        let frozen_saddle = FirstOrderField::new(VectorFieldSpec::new(x1(), -x2()), VectorFieldSpec::zero());
        let out = assumption25_check(&frozen_saddle, [0.0, 0.0], 0.3, 1.0, &tol).unwrap();
        assert!(!out.checklist.transversality_nonzero);
        assert!(!out.checklist.all_pass);
        assert_eq!(out.index, -1);

        let flat = FirstOrderField::new(
            VectorFieldSpec::new(x1().powi(2), x2().powi(2) + x1().powi(3)),
            VectorFieldSpec::new(1.0.into(), 1.0.into()),
        );
        let out = assumption25_check(&flat, [0.0, 0.0], 0.0, 1.0, &tol).unwrap();
        assert!(!out.checklist.jacobian_nonzero);

        let not_root = assumption25_check(&flat, [1.0, 0.0], 0.0, 1.0, &tol);
        assert!(matches!(not_root, Err(TopologyError::NotASingularPoint { .. })));
    }

    #[test]
    fn finite_difference_jacobian_matches_symbolic() {
        let spec = VectorFieldSpec::new(x1().sin() * x2(), (x1() - x2()).exp());
        let sym = symbolic(&spec);
        let num = FnField(|p: Point2| spec.eval(p).unwrap());
        let p = [0.3, -0.4];
        let a = PlanarField::jacobian(&sym, p).unwrap();
        let b = PlanarField::jacobian(&num, p).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-8);
    }
}
