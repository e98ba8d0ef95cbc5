//! Separation-time search on the first-order field and its certification.
//!
//! The search sweeps `t` on a coarse grid for the first time `v(., t)` has a
//! zero in the window, bisects that bracket down to `time_tol`, then refines
//! each emerging zero to the exact fold by Newton on
//! `(v1, v2, det Dv)(x, t) = 0`. Every fold found this way is checked against
//! the degenerate-point hypotheses.

use serde::Serialize;
use thiserror::Error;

use crate::fields::{EvalError, Mat2, Point2, ScalarExpr, VectorFieldSpec};
use crate::model::{dimensionalize, DimensionlessScenario, InitialFields, ModelError, Window};
use crate::taylor::{assumption_residuals, first_order_field, AssumptionResiduals, FirstOrderField};
use crate::topology::{
    assumption25_check, find_singular_points, Assumption25Checklist, Assumption25Outcome, EigenStructure, Tolerances,
    TopologyError,
};

/// Default threshold for "much larger than one".
pub const DOMINANCE_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error("search horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("K C3 - 2 C1 = {0} is not positive: no positive separation time")]
    NoPositiveSeparationTime(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Seeds per side of the Newton seed grid.
    pub seed_density: usize,
    /// Uniform time samples used to bracket the first zero.
    pub coarse_steps: usize,
    /// Bracket width at which bisection stops.
    pub time_tol: f64,
    /// Relative offset for the before/after zero counts.
    pub epsilon: f64,
    pub tolerances: Tolerances,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seed_density: 16,
            coarse_steps: 32,
            time_tol: 1e-6,
            epsilon: 0.05,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    SeparationCertified,
    SeparationRejected,
    Inconclusive,
}

/// One degenerate zero born at the separation time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparationSite {
    pub x_bar: Point2,
    pub t0: f64,
    pub x_bar_dim: Point2,
    pub jacobian: Mat2,
    pub index: i32,
    pub eigen: Option<EigenStructure>,
    pub transversality: Option<f64>,
    pub checklist: Assumption25Checklist,
    /// No other zero of `v(., t0)` within ten merge radii.
    pub isolated: bool,
    /// Whether Newton on the fold system converged (otherwise the bisection
    /// bracket end is reported).
    pub fold_refined: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationEvent {
    pub x_bar: Option<Point2>,
    pub t0: Option<f64>,
    pub t_bar: Option<f64>,
    pub x_bar_dim: Option<Point2>,
    pub transversality: Option<f64>,
    pub checklist: Option<Assumption25Checklist>,
    pub residuals: AssumptionResiduals,
    pub zero_count_before: usize,
    pub zero_count_after: usize,
    pub verdict: Verdict,
    pub sites: Vec<SeparationSite>,
    pub reason: String,
}

impl SeparationEvent {
    fn empty(residuals: AssumptionResiduals, verdict: Verdict, reason: impl Into<String>) -> Self {
        Self {
            x_bar: None,
            t0: None,
            t_bar: None,
            x_bar_dim: None,
            transversality: None,
            checklist: None,
            residuals,
            zero_count_before: 0,
            zero_count_after: 0,
            verdict,
            sites: Vec::new(),
            reason: reason.into(),
        }
    }

    pub fn primary(&self) -> Option<&SeparationSite> {
        self.sites.first()
    }
}

fn zeros_at(fof: &FirstOrderField, t: f64, window: &Window, opts: &SearchOptions) -> Vec<Point2> {
    find_singular_points(&fof.at(t), window, opts.seed_density, &opts.tolerances)
}

/// `(t, number of zeros of v(., t) in the window)` on `n + 1` uniform times in `[0, t_max]`.
pub fn zero_count_sweep(
    ds: &DimensionlessScenario,
    t_max: f64,
    n: usize,
    opts: &SearchOptions,
) -> Vec<(f64, usize)> {
    let fof = first_order_field(ds);
    (0..=n)
        .map(|k| {
            let t = t_max * k as f64 / n as f64;
            (t, zeros_at(&fof, t, &ds.window, opts).len())
        })
        .collect()
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][3] - s) / m[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// `d/dt det(P + t U) = tr(adj(P + t U) U)`.
fn det_time_derivative(m: &Mat2, u: &Mat2) -> f64 {
    m.a22() * u.a11() - m.a12() * u.a21() - m.a21() * u.a12() + m.a11() * u.a22()
}

/// Newton on `(v1, v2, det Dv)(x, t) = 0` starting from a zero of `v(., t)`.
fn refine_fold(
    fof: &FirstOrderField,
    x: Point2,
    t: f64,
    window: &Window,
    tol: &Tolerances,
) -> Option<(Point2, f64)> {
    let h = tol.fd_step;
    let residual = |z: [f64; 3]| -> Option<[f64; 3]> {
        let v = fof.eval([z[0], z[1]], z[2]).ok()?;
        let det = fof.jacobian([z[0], z[1]], z[2]).ok()?.det();
        Some([v[0], v[1], det])
    };
    let gnorm = |g: [f64; 3]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut z = [x[0], x[1], t];
    let mut g = residual(z)?;
    for _ in 0..60 {
        if gnorm(g) == 0.0 {
            break;
        }
        let p = [z[0], z[1]];
        let jv = fof.jacobian(p, z[2]).ok()?;
        let u1 = fof.time_derivative(p).ok()?;
        let ju = fof.jacobian(p, 1.0).ok()?.add_scaled(&fof.jacobian(p, 0.0).ok()?, -1.0);
        let ddet_dx = |k: usize| -> Option<f64> {
            let mut a = p;
            let mut b = p;
            a[k] += h;
            b[k] -= h;
            Some((fof.jacobian(a, z[2]).ok()?.det() - fof.jacobian(b, z[2]).ok()?.det()) / (2.0 * h))
        };
        let a = [
            [jv.a11(), jv.a12(), u1[0]],
            [jv.a21(), jv.a22(), u1[1]],
            [ddet_dx(0)?, ddet_dx(1)?, det_time_derivative(&jv, &ju)],
        ];
        let d = solve3(a, [-g[0], -g[1], -g[2]])?;
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand = [z[0] + lambda * d[0], z[1] + lambda * d[1], z[2] + lambda * d[2]];
            if let Some(gc) = residual(cand) {
                if gnorm(gc) < gnorm(g) {
                    accepted = Some((cand, gc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((zn, gn)) = accepted else { break };
        z = zn;
        g = gn;
    }
    let p = [z[0], z[1]];
    let jac = fof.jacobian(p, z[2]).ok()?;
    let frob = jac.frobenius();
    let converged = g[0].hypot(g[1]) <= tol.root_tol && g[2].abs() <= tol.det_tol * frob * frob;
    let nearby = (p[0] - x[0]).hypot(p[1] - x[1]) <= 0.1 * window.diameter() && (z[2] - t).abs() <= 0.1 * t.max(1e-12);
    (converged && nearby && z[2] > 0.0 && window.contains(p)).then_some((p, z[2]))
}

/// Finds the first time `v(., t)` acquires zeros in the window and certifies
/// the degenerate zero(s) born there.
pub fn locate_separation(
    ds: &DimensionlessScenario,
    t_max: f64,
    opts: &SearchOptions,
) -> Result<SeparationEvent, PredictError> {
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(PredictError::InvalidHorizon(t_max));
    }
    let residuals = assumption_residuals(ds);
    if !residuals.satisfied() {
        let reason = format!(
            "compatibility conditions unmet: max|div Psi| = {:e}, max|r_as3| = {:e}",
            residuals.max_abs_r_div, residuals.max_abs_r_as3
        );
        return Ok(SeparationEvent::empty(residuals, Verdict::SeparationRejected, reason));
    }
    let fof = first_order_field(ds);
    let window = &ds.window;
    let tol = &opts.tolerances;
    let has_zero = |t: f64| !zeros_at(&fof, t, window, opts).is_empty();

    if has_zero(0.0) {
        return Ok(SeparationEvent::empty(
            residuals,
            Verdict::Inconclusive,
            "initial velocity already vanishes inside the window",
        ));
    }
    let steps = opts.coarse_steps.max(1);
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=steps {
        let t = t_max * k as f64 / steps as f64;
        if has_zero(t) {
            hi = Some(t);
            break;
        }
        lo = t;
    }
    let Some(mut hi) = hi else {
        return Ok(SeparationEvent::empty(
            residuals,
            Verdict::Inconclusive,
            format!("no zero of the first-order field appears up to t = {t_max}"),
        ));
    };
    while hi - lo > opts.time_tol {
        let mid = 0.5 * (lo + hi);
        if has_zero(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let mut candidates: Vec<(Point2, f64, bool)> = Vec::new();
    for root in zeros_at(&fof, hi, window, opts) {
        let (p, t, refined) = match refine_fold(&fof, root, hi, window, tol) {
            Some((p, t)) => (p, t, true),
            None => (root, hi, false),
        };
        let dup = candidates.iter().any(|(q, s, _)| {
            (q[0] - p[0]).hypot(q[1] - p[1]) <= 10.0 * tol.merge_radius && (s - t).abs() <= opts.time_tol
        });
        if !dup {
            candidates.push((p, t, refined));
        }
    }
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0[0].total_cmp(&b.0[0])).then(a.0[1].total_cmp(&b.0[1])));

    let mut sites = Vec::with_capacity(candidates.len());
    let mut failure: Option<TopologyError> = None;
    for (x_bar, t0, fold_refined) in candidates {
        let zeros = zeros_at(&fof, t0, window, opts);
        let others: Vec<f64> = zeros
            .iter()
            .map(|q| (q[0] - x_bar[0]).hypot(q[1] - x_bar[1]))
            .filter(|d| *d > tol.merge_radius)
            .collect();
        let isolated = others.iter().all(|d| *d > 10.0 * tol.merge_radius);
        let nearest = others.iter().copied().fold(f64::INFINITY, f64::min);
        let max_radius = (0.5 * nearest).min(0.25 * window.width().min(window.height()));
        match assumption25_check(&fof, x_bar, t0, max_radius, tol) {
            Ok(Assumption25Outcome { checklist, index, jacobian, eigen, transversality }) => {
                let (_, x_bar_dim) = dimensionalize(t0, x_bar, &ds.reference);
                sites.push(SeparationSite {
                    x_bar,
                    t0,
                    x_bar_dim,
                    jacobian,
                    index,
                    eigen,
                    transversality,
                    checklist,
                    isolated,
                    fold_refined,
                });
            }
            Err(e) => failure = Some(e),
        }
    }

    let Some(first) = sites.first().cloned() else {
        let reason = match failure {
            Some(e) => format!("emerging zero could not be analysed: {e}"),
            None => "no emerging zero could be located".to_string(),
        };
        return Ok(SeparationEvent::empty(residuals, Verdict::Inconclusive, reason));
    };
    let t0 = first.t0;
    let zero_count_before = zeros_at(&fof, t0 * (1.0 - opts.epsilon), window, opts).len();
    let zero_count_after = zeros_at(&fof, t0 * (1.0 + opts.epsilon), window, opts).len();
    let all_pass = failure.is_none() && sites.iter().all(|s| s.checklist.all_pass && s.isolated);

    let (verdict, reason) = if zero_count_before != 0 {
        (Verdict::Inconclusive, format!("{zero_count_before} zero(s) already present before the event"))
    } else if zero_count_after == 0 {
        (Verdict::Inconclusive, "no zero persists after the event".to_string())
    } else if !all_pass {
        let reason = match &failure {
            Some(e) => format!("degenerate-point hypotheses could not be evaluated: {e}"),
            None => "degenerate-point hypotheses fail at the emerging zero".to_string(),
        };
        (Verdict::SeparationRejected, reason)
    } else {
        (Verdict::SeparationCertified, "all hypotheses hold".to_string())
    };
    let (t_bar, x_bar_dim) = dimensionalize(t0, first.x_bar, &ds.reference);
    Ok(SeparationEvent {
        x_bar: Some(first.x_bar),
        t0: Some(t0),
        t_bar: Some(t_bar),
        x_bar_dim: Some(x_bar_dim),
        transversality: first.transversality,
        checklist: Some(first.checklist),
        residuals,
        zero_count_before,
        zero_count_after,
        verdict,
        sites,
        reason,
    })
}

/// Constants of the polynomial family `Psi = (0, 1 + C1 x1^2)`,
/// `T0 = C2 + C3 x2`, `F0 = (C4 x2, 0)` in the scaled model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalForm {
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "C4")]
    pub c4: f64,
}

impl CanonicalForm {
    pub fn new(k: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> Self {
        Self { k, c1, c2, c3, c4 }
    }

    pub fn fields(&self) -> InitialFields {
        let x1 = ScalarExpr::x1;
        let x2 = ScalarExpr::x2;
        InitialFields {
            psi: VectorFieldSpec::new(ScalarExpr::zero(), 1.0 + self.c1 * x1().powi(2)),
            temp0: self.c2 + self.c3 * x2(),
            force0: VectorFieldSpec::new(self.c4 * x2(), ScalarExpr::zero()),
            heat_source: ScalarExpr::zero(),
        }
    }

    pub fn scenario(&self, inv_pr: f64, window: Window) -> Result<DimensionlessScenario, ModelError> {
        DimensionlessScenario::from_groups(self.fields(), self.k, inv_pr, window)
    }

    /// `K C3 - 2 C1`.
    pub fn driving(&self) -> f64 {
        self.k * self.c3 - 2.0 * self.c1
    }

    /// Recognises the family by sampling; `None` when any field deviates.
    pub fn detect(ds: &DimensionlessScenario) -> Option<CanonicalForm> {
        let f = &ds.fields;
        let c2 = f.temp0.eval([0.0, 0.0]).ok()?;
        let c3 = f.temp0.eval([0.0, 1.0]).ok()? - c2;
        let c1 = f.psi.c2.eval([1.0, 0.0]).ok()? - 1.0;
        let c4 = f.force0.c1.eval([0.0, 1.0]).ok()?;
        let cand = CanonicalForm::new(ds.k, c1, c2, c3, c4);
        let reference = cand.fields();
        let pairs = [
            (&f.psi.c1, &reference.psi.c1),
            (&f.psi.c2, &reference.psi.c2),
            (&f.temp0, &reference.temp0),
            (&f.force0.c1, &reference.force0.c1),
            (&f.force0.c2, &reference.force0.c2),
        ];
        let matches = ds.window.sample_grid(9).into_iter().chain([[3.1, -2.7], [-5.3, 4.4]]).all(|p| {
            pairs.iter().all(|(a, b)| match (a.eval(p), b.eval(p)) {
                (Ok(x), Ok(y)) => (x - y).abs() <= 1e-12 * (1.0 + y.abs()),
                _ => false,
            })
        });
        matches.then_some(cand)
    }
}

/// Closed-form event of the polynomial family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormSeparation {
    pub t0: f64,
    pub x_bar: Point2,
    pub transversality: f64,
    pub jacobian: Mat2,
}

impl ClosedFormSeparation {
    /// Zeros of `v(., t)` for `t > t0`, from `1 + C1 x1^2 + t (2 C1 - K C3) = 0`.
    pub fn zeros_after(form: &CanonicalForm, t: f64) -> Vec<Point2> {
        let s = (form.driving() * t - 1.0) / form.c1;
        if !(s > 0.0) {
            return Vec::new();
        }
        vec![[-s.sqrt(), 0.0], [s.sqrt(), 0.0]]
    }
}

/// `t0 = 1 / (K C3 - 2 C1)`, `x = 0`, `u1(0) . e2 = 2 C1 - K C3`,
/// `Dv(0, t0) = [[0, C4 t0], [0, 0]]`.
pub fn closed_form_theorem46(k: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> Result<ClosedFormSeparation, PredictError> {
    let form = CanonicalForm::new(k, c1, c2, c3, c4);
    let driving = form.driving();
    if !(driving > 0.0) {
        return Err(PredictError::NoPositiveSeparationTime(driving));
    }
    let t0 = 1.0 / driving;
    Ok(ClosedFormSeparation {
        t0,
        x_bar: [0.0, 0.0],
        transversality: -driving,
        jacobian: Mat2::new(0.0, c4 * t0, 0.0, 0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpretationReport {
    #[serde(rename = "K_C3_minus_2C1")]
    pub k_c3_minus_2c1: Option<f64>,
    /// `K C3 >= threshold`: temperature contrast drives the event.
    pub thermal_dominated: bool,
    /// `-2 C1 >= threshold`: initial velocity drives the event.
    pub velocity_dominated: bool,
    /// `K C3 - 2 C1 >= threshold`.
    pub magnitude_flag: bool,
    pub threshold: f64,
}

pub fn interpretation(form: Option<&CanonicalForm>, threshold: f64) -> InterpretationReport {
    match form {
        Some(f) => InterpretationReport {
            k_c3_minus_2c1: Some(f.driving()),
            thermal_dominated: f.k * f.c3 >= threshold,
            velocity_dominated: -2.0 * f.c1 >= threshold,
            magnitude_flag: f.driving() >= threshold,
            threshold,
        },
        None => InterpretationReport {
            k_c3_minus_2c1: None,
            thermal_dominated: false,
            velocity_dominated: false,
            magnitude_flag: false,
            threshold,
        },
    }
}
