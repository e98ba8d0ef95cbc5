//! Explicit finite-difference integrator for the scaled heat-coupled model,
//! used to check the first-order prediction against actual dynamics.
//!
//! Collocated nodes including the boundary; second-order centered differences
//! in space, forward Euler in time. Boundary nodes carry the first-order
//! expansion `u = Psi + t u1`, `T = T0 + t T1`, which is only meaningful while
//! `t` stays small. `Projected` mode additionally removes the discrete
//! divergence after every step with a minimum-norm correction solved by
//! conjugate gradients.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::{EvalError, Point2};
use crate::model::{DimensionlessScenario, Window};
use crate::taylor::{first_order_field, temperature_rate, FirstOrderField};
use crate::topology::{find_singular_points, PlanarField, Tolerances};

/// Explicit-diffusion stability factor: `dt <= STABILITY_FACTOR * min(hx, hy)^2`.
pub const STABILITY_FACTOR: f64 = 0.2;
pub const MIN_NODES: usize = 16;
/// Target max-norm of the discrete divergence after projection.
pub const PROJECTION_TOL: f64 = 1e-8;
const PROJECTION_MAX_ITER: usize = 20_000;

pub const BOUNDARY_NOTE: &str = "boundary nodes follow the first-order expansion u = Psi + t u1, T = T0 + t T1; \
results are meaningful only for small t";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("grid needs at least {MIN_NODES} nodes per side, got {nx} x {ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("dt = {dt} exceeds the explicit stability bound {bound}")]
    UnstableTimeStep { dt: f64, bound: f64 },
    #[error("invalid solver setting: {0}")]
    InvalidSetting(String),
    #[error("non-finite state at step {step} (t = {t})")]
    BlowUp { step: usize, t: f64 },
    #[error("velocity snapshot is identically zero; stagnation points are not isolated")]
    IdenticallyZero,
    #[error("subwindow is not inside the grid")]
    SubwindowOutside,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// Momentum equation integrated as written, without a pressure term.
    Literal,
    /// Literal step followed by a discrete divergence projection.
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    DirichletFirstOrder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub window: Window,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, window: Window) -> Result<Self, SolverError> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(SolverError::GridTooSmall { nx, ny });
        }
        window.validate().map_err(|e| SolverError::InvalidSetting(e.to_string()))?;
        Ok(Self {
            nx,
            ny,
            window,
            hx: window.width() / (nx - 1) as f64,
            hy: window.height() / (ny - 1) as f64,
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node(&self, i: usize, j: usize) -> Point2 {
        [self.window.xmin + i as f64 * self.hx, self.window.ymin + j as f64 * self.hy]
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    pub fn stability_bound(&self) -> f64 {
        STABILITY_FACTOR * self.hx.min(self.hy).powi(2)
    }

    fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (1..self.ny - 1).flat_map(move |j| (1..self.nx - 1).map(move |i| (i, j)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub grid: Grid2,
    pub mode: SolverMode,
    pub dt: f64,
    pub end_time: f64,
    pub boundary: BoundaryCondition,
    /// Keep every `snapshot_stride`-th step (the final step is always kept).
    pub snapshot_stride: usize,
}

impl SolverConfig {
    pub fn new(grid: Grid2, mode: SolverMode, dt: f64, end_time: f64, snapshot_stride: usize) -> Result<Self, SolverError> {
        let bound = grid.stability_bound();
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SolverError::InvalidSetting(format!("dt must be positive, got {dt}")));
        }
        if dt > bound {
            return Err(SolverError::UnstableTimeStep { dt, bound });
        }
        if !(end_time >= 0.0) || !end_time.is_finite() {
            return Err(SolverError::InvalidSetting(format!("end time must be nonnegative, got {end_time}")));
        }
        if snapshot_stride == 0 {
            return Err(SolverError::InvalidSetting("snapshot stride must be at least 1".into()));
        }
        Ok(Self { grid, mode, dt, end_time, boundary: BoundaryCondition::DirichletFirstOrder, snapshot_stride })
    }

    /// Half the stability bound.
    pub fn default_dt(grid: &Grid2) -> f64 {
        0.5 * grid.stability_bound()
    }

    pub fn steps(&self) -> usize {
        (self.end_time / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    #[serde(rename = "T")]
    pub temp: Vec<f64>,
    /// Max |centered divergence| over interior nodes.
    pub max_div: f64,
}

struct NodeData {
    psi: Vec<Point2>,
    u1: Vec<Point2>,
    temp0: Vec<f64>,
    temp1: Vec<f64>,
    force: Vec<Point2>,
    heat: Vec<f64>,
}

/// A configured integration of one scenario.
pub struct Solver {
    cfg: SolverConfig,
    k: f64,
    inv_pr: f64,
    fof: FirstOrderField,
    nodes: NodeData,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub snapshots: Vec<FieldSnapshot>,
    /// Set when the run stopped early; `snapshots` then ends at the last
    /// finite state.
    pub failure: Option<SolverError>,
}

impl Solver {
    pub fn new(ds: &DimensionlessScenario, cfg: SolverConfig) -> Result<Self, SolverError> {
        let fof = first_order_field(ds);
        let t1 = temperature_rate(ds);
        let g = &cfg.grid;
        let mut nodes = NodeData {
            psi: Vec::with_capacity(g.len()),
            u1: Vec::with_capacity(g.len()),
            temp0: Vec::with_capacity(g.len()),
            temp1: Vec::with_capacity(g.len()),
            force: Vec::with_capacity(g.len()),
            heat: Vec::with_capacity(g.len()),
        };
        let f = &ds.fields;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let p = g.node(i, j);
                nodes.psi.push(f.psi.eval(p)?);
                nodes.u1.push(fof.time_derivative(p)?);
                nodes.temp0.push(f.temp0.eval(p)?);
                nodes.temp1.push(t1.eval(p)?);
                nodes.force.push(f.force0.eval(p)?);
                nodes.heat.push(f.heat_source.eval(p)?);
            }
        }
        Ok(Self { cfg, k: ds.k, inv_pr: ds.inv_pr, fof, nodes })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn first_order(&self) -> &FirstOrderField {
        &self.fof
    }

    /// Initial data sampled on the grid.
    pub fn initial(&self) -> FieldSnapshot {
        let u1: Vec<f64> = self.nodes.psi.iter().map(|p| p[0]).collect();
        let u2: Vec<f64> = self.nodes.psi.iter().map(|p| p[1]).collect();
        let max_div = max_divergence(&self.cfg.grid, &u1, &u2);
        FieldSnapshot { t: 0.0, u1, u2, temp: self.nodes.temp0.clone(), max_div }
    }

    /// Advances one `dt`.
    pub fn step(&self, s: &FieldSnapshot) -> Result<FieldSnapshot, SolverError> {
        let g = &self.cfg.grid;
        let dt = self.cfg.dt;
        let t = s.t + dt;
        let (hx, hy) = (g.hx, g.hy);
        let mut u1 = s.u1.clone();
        let mut u2 = s.u2.clone();
        let mut temp = s.temp.clone();
        for (i, j) in g.interior() {
            let c = g.idx(i, j);
            let (e, w, n, so) = (c + 1, c - 1, c + g.nx, c - g.nx);
            let lap = |f: &[f64]| (f[e] - 2.0 * f[c] + f[w]) / (hx * hx) + (f[n] - 2.0 * f[c] + f[so]) / (hy * hy);
            let ddx = |f: &[f64]| (f[e] - f[w]) / (2.0 * hx);
            let ddy = |f: &[f64]| (f[n] - f[so]) / (2.0 * hy);
            let (a, b) = (s.u1[c], s.u2[c]);
            let adv = |f: &[f64]| a * ddx(f) + b * ddy(f);
            let force = self.nodes.force[c];
            u1[c] = a + dt * (lap(&s.u1) - adv(&s.u1) - self.k * ddx(&s.temp) + force[0]);
            u2[c] = b + dt * (lap(&s.u2) - adv(&s.u2) - self.k * ddy(&s.temp) + force[1]);
            temp[c] = s.temp[c] + dt * (self.inv_pr * lap(&s.temp) - adv(&s.temp) + self.nodes.heat[c]);
        }
        for j in 0..g.ny {
            for i in 0..g.nx {
                if g.is_boundary(i, j) {
                    let c = g.idx(i, j);
                    let (p, d) = (self.nodes.psi[c], self.nodes.u1[c]);
                    u1[c] = p[0] + t * d[0];
                    u2[c] = p[1] + t * d[1];
                    temp[c] = self.nodes.temp0[c] + t * self.nodes.temp1[c];
                }
            }
        }
        if self.cfg.mode == SolverMode::Projected {
            project(g, &mut u1, &mut u2);
        }
        let finite = u1.iter().chain(&u2).chain(&temp).all(|v| v.is_finite());
        if !finite {
            let step = (t / dt).round() as usize;
            return Err(SolverError::BlowUp { step, t });
        }
        let max_div = max_divergence(g, &u1, &u2);
        Ok(FieldSnapshot { t, u1, u2, temp, max_div })
    }

    pub fn run(&self) -> RunOutcome {
        let steps = self.cfg.steps();
        let mut current = self.initial();
        let mut snapshots = vec![current.clone()];
        for k in 1..=steps {
            match self.step(&current) {
                Ok(next) => current = next,
                Err(SolverError::BlowUp { t, .. }) => {
                    return RunOutcome { snapshots, failure: Some(SolverError::BlowUp { step: k, t }) };
                }
                Err(e) => return RunOutcome { snapshots, failure: Some(e) },
            }
            if k % self.cfg.snapshot_stride == 0 || k == steps {
                snapshots.push(current.clone());
            }
        }
        RunOutcome { snapshots, failure: None }
    }
}

/// Centered divergence at interior node `(i, j)`.
fn divergence_at(g: &Grid2, u1: &[f64], u2: &[f64], i: usize, j: usize) -> f64 {
    let c = g.idx(i, j);
    (u1[c + 1] - u1[c - 1]) / (2.0 * g.hx) + (u2[c + g.nx] - u2[c - g.nx]) / (2.0 * g.hy)
}

pub fn max_divergence(g: &Grid2, u1: &[f64], u2: &[f64]) -> f64 {
    g.interior()
        .map(|(i, j)| divergence_at(g, u1, u2, i, j).abs())
        .fold(0.0, f64::max)
}

/// `D^T lam` restricted to interior nodes (zero on the boundary).
fn divergence_adjoint(g: &Grid2, lam: &[f64], c1: &mut [f64], c2: &mut [f64]) {
    c1.fill(0.0);
    c2.fill(0.0);
    for (i, j) in g.interior() {
        let c = g.idx(i, j);
        c1[c] = (lam[c - 1] - lam[c + 1]) / (2.0 * g.hx);
        c2[c] = (lam[c - g.nx] - lam[c + g.nx]) / (2.0 * g.hy);
    }
}

/// Interior-only divergence operator applied to an interior-supported field.
fn apply_normal(g: &Grid2, lam: &[f64], c1: &mut [f64], c2: &mut [f64], out: &mut [f64]) {
    divergence_adjoint(g, lam, c1, c2);
    out.fill(0.0);
    for (i, j) in g.interior() {
        out[g.idx(i, j)] = divergence_at(g, c1, c2, i, j);
    }
}

/// Removes the interior divergence with the smallest interior velocity
/// correction: solve `D D^T lam = D u` by conjugate gradients, then
/// `u <- u - D^T lam`. Returns the number of iterations.
pub fn project(g: &Grid2, u1: &mut [f64], u2: &mut [f64]) -> usize {
    let n = g.len();
    let mut rhs = vec![0.0; n];
    for (i, j) in g.interior() {
        rhs[g.idx(i, j)] = divergence_at(g, u1, u2, i, j);
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let max_abs = |a: &[f64]| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut lam = vec![0.0; n];
    let mut r = rhs;
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let (mut c1, mut c2) = (vec![0.0; n], vec![0.0; n]);
    let mut rr = dot(&r, &r);
    let mut iters = 0;
    while max_abs(&r) > PROJECTION_TOL && iters < PROJECTION_MAX_ITER {
        apply_normal(g, &p, &mut c1, &mut c2, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            break;
        }
        let alpha = rr / pap;
        for k in 0..n {
            lam[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        iters += 1;
    }
    divergence_adjoint(g, &lam, &mut c1, &mut c2);
    for k in 0..n {
        u1[k] -= c1[k];
        u2[k] -= c2[k];
    }
    iters
}

/// Bilinear interpolant of a velocity snapshot.
pub struct BilinearField<'a> {
    pub grid: &'a Grid2,
    pub u1: &'a [f64],
    pub u2: &'a [f64],
}

impl BilinearField<'_> {
    fn interp(&self, f: &[f64], x: Point2) -> f64 {
        let g = self.grid;
        let fx = ((x[0] - g.window.xmin) / g.hx).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((x[1] - g.window.ymin) / g.hy).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let (sx, sy) = (fx - i as f64, fy - j as f64);
        let c = g.idx(i, j);
        let (a, b, cc, d) = (f[c], f[c + 1], f[c + g.nx], f[c + g.nx + 1]);
        (1.0 - sy) * ((1.0 - sx) * a + sx * b) + sy * ((1.0 - sx) * cc + sx * d)
    }
}

impl PlanarField for BilinearField<'_> {
    fn value(&self, x: Point2) -> Result<Point2, EvalError> {
        Ok([self.interp(self.u1, x), self.interp(self.u2, x)])
    }
}

/// Number of stagnation points of the interpolated snapshot inside `subwindow`.
pub fn stagnation_count(
    s: &FieldSnapshot,
    grid: &Grid2,
    subwindow: &Window,
    seed_density: usize,
    tol: &Tolerances,
) -> Result<usize, SolverError> {
    if !grid.window.contains_window(subwindow) {
        return Err(SolverError::SubwindowOutside);
    }
    if s.u1.iter().chain(&s.u2).all(|v| *v == 0.0) {
        return Err(SolverError::IdenticallyZero);
    }
    let field = BilinearField { grid, u1: &s.u1, u2: &s.u2 };
    Ok(find_singular_points(&field, subwindow, seed_density, tol).len())
}

/// `(t, max_interior |u - (Psi + t u1)| / t^2)` per snapshot; 0 at `t = 0`.
pub fn taylor_consistency(snapshots: &[FieldSnapshot], grid: &Grid2, fof: &FirstOrderField) -> Result<Vec<(f64, f64)>, SolverError> {
    snapshots
        .iter()
        .map(|s| {
            if s.t == 0.0 {
                return Ok((0.0, 0.0));
            }
            let mut worst = 0.0f64;
            for (i, j) in grid.interior() {
                let c = grid.idx(i, j);
                let v = fof.eval(grid.node(i, j), s.t)?;
                worst = worst.max((s.u1[c] - v[0]).hypot(s.u2[c] - v[1]));
            }
            Ok((s.t, worst / (s.t * s.t)))
        })
        .collect()
}

/// Time of the first snapshot with at least `threshold` stagnation points.
pub fn first_transition_time(
    snapshots: &[FieldSnapshot],
    grid: &Grid2,
    subwindow: &Window,
    threshold: usize,
    seed_density: usize,
    tol: &Tolerances,
) -> Result<Option<f64>, SolverError> {
    for s in snapshots {
        if stagnation_count(s, grid, subwindow, seed_density, tol)? >= threshold {
            return Ok(Some(s.t));
        }
    }
    Ok(None)
}
