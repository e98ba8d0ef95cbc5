//! Serializable reports and CSV writers for prediction, simulation and
//! verification runs. Report bodies are deterministic functions of the
//! scenario and options.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::fields::{Mat2, Point2};
use crate::model::{nondimensionalize, DimensionlessScenario, Scenario, ScenarioConfig, Window};
use crate::predictor::{
    closed_form_theorem46, interpretation, locate_separation, zero_count_sweep, CanonicalForm, ClosedFormSeparation,
    InterpretationReport, PredictError, SearchOptions, SeparationSite, Verdict, DOMINANCE_THRESHOLD,
};
use crate::solver::{
    stagnation_count, FieldSnapshot, Grid2, RunOutcome, Solver, SolverConfig, SolverError, SolverMode, BOUNDARY_NOTE,
};
use crate::taylor::AssumptionResiduals;
use crate::topology::{Assumption25Checklist, EigenStructure};

pub const ZERO_COUNT_SAMPLES: usize = 100;
pub const VERIFY_GAP: f64 = 0.25;
/// Zero count at which a simulated snapshot counts as separated.
pub const TRANSITION_COUNT: usize = 2;

#[derive(Debug, Clone, Serialize)]
pub struct SignConventions {
    pub implemented: &'static str,
    pub alternative: &'static str,
    pub note: &'static str,
}

pub const SIGN_CONVENTIONS: SignConventions = SignConventions {
    implemented: "v2 = 1 + C1 x1^2 + t (2 C1 - K C3); zeros after t0 require C1 > 0",
    alternative: "v2 = 1 + t0 (2 C1 - K C3) - C1 x1^2 t0; zeros after t0 require C1 < 0",
    note: "t0 = 1/(K C3 - 2 C1) and the event Jacobian [[0, C4 t0], [0, 0]] agree under both forms",
};

#[derive(Debug, Clone, Serialize)]
pub struct PredictionReport {
    pub scenario_hash: String,
    #[serde(rename = "K")]
    pub k: f64,
    pub inv_pr: f64,
    pub window: Window,
    pub t_max: f64,
    pub residuals: AssumptionResiduals,
    pub t0: Option<f64>,
    pub x_bar: Option<Point2>,
    pub t_bar_dimensional: Option<f64>,
    pub x_bar_dimensional: Option<Point2>,
    pub transversality: Option<f64>,
    pub jacobian: Option<Mat2>,
    pub index: Option<i32>,
    pub eigen: Option<EigenStructure>,
    pub checklist: Option<Assumption25Checklist>,
    pub zero_count_before: usize,
    pub zero_count_after: usize,
    pub verdict: Verdict,
    pub reason: String,
    pub interpretation: InterpretationReport,
    pub canonical_form: Option<CanonicalForm>,
    pub closed_form: Option<ClosedFormSeparation>,
    pub sites: Vec<SeparationSite>,
    pub sign_conventions: SignConventions,
    pub notes: Vec<String>,
}

impl PredictionReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Horizon used when none is given: twice the closed-form time for the
/// polynomial family, otherwise 1.
pub fn default_horizon(ds: &DimensionlessScenario) -> f64 {
    CanonicalForm::detect(ds)
        .and_then(|f| closed_form_theorem46(f.k, f.c1, f.c2, f.c3, f.c4).ok())
        .map_or(1.0, |c| 2.0 * c.t0)
}

/// Runs the separation search and assembles the report plus the
/// `(t, zero count)` sweep over `[0, t_max]`.
pub fn predict(
    scenario: &Scenario,
    t_max: Option<f64>,
    opts: &SearchOptions,
) -> Result<(PredictionReport, Vec<(f64, usize)>), PredictError> {
    let ds = nondimensionalize(scenario);
    let t_max = t_max.unwrap_or_else(|| default_horizon(&ds));
    let event = locate_separation(&ds, t_max, opts)?;
    let form = CanonicalForm::detect(&ds);
    let closed_form = form.and_then(|f| closed_form_theorem46(f.k, f.c1, f.c2, f.c3, f.c4).ok());
    let sweep = zero_count_sweep(&ds, t_max, ZERO_COUNT_SAMPLES, opts);

    let mut notes = vec![format!(
        "zero counts are taken at t0 (1 -/+ {}); zeros are sought in the window only",
        opts.epsilon
    )];
    if event.sites.len() > 1 {
        notes.push(format!("{} zeros emerge simultaneously; each is certified separately", event.sites.len()));
    }
    if let Some(t0) = event.t0 {
        if t0 >= 0.1 {
            notes.push(format!("t0 = {t0} is not small; the first-order truncation may be inaccurate"));
        }
    }
    let site = event.primary();
    let report = PredictionReport {
        scenario_hash: ScenarioConfig::fingerprint(scenario),
        k: ds.k,
        inv_pr: ds.inv_pr,
        window: ds.window,
        t_max,
        residuals: event.residuals.clone(),
        t0: event.t0,
        x_bar: event.x_bar,
        t_bar_dimensional: event.t_bar,
        x_bar_dimensional: event.x_bar_dim,
        transversality: event.transversality,
        jacobian: site.map(|s| s.jacobian),
        index: site.map(|s| s.index),
        eigen: site.and_then(|s| s.eigen),
        checklist: event.checklist,
        zero_count_before: event.zero_count_before,
        zero_count_after: event.zero_count_after,
        verdict: event.verdict,
        reason: event.reason.clone(),
        interpretation: interpretation(form.as_ref(), DOMINANCE_THRESHOLD),
        canonical_form: form,
        closed_form,
        sites: event.sites.clone(),
        sign_conventions: SIGN_CONVENTIONS,
        notes,
    };
    Ok((report, sweep))
}

pub fn write_zero_count_csv(path: &Path, sweep: &[(f64, usize)]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,count")?;
    for (t, c) in sweep {
        writeln!(w, "{t:?},{c}")?;
    }
    w.flush()
}

/// One CSV per snapshot: `t,x1,x2,u1,u2,T`, row-major over nodes.
pub fn write_snapshot_csv(path: &Path, grid: &Grid2, s: &FieldSnapshot) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,x1,x2,u1,u2,T")?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let c = grid.idx(i, j);
            let p = grid.node(i, j);
            writeln!(w, "{:?},{:?},{:?},{:?},{:?},{:?}", s.t, p[0], p[1], s.u1[c], s.u2[c], s.temp[c])?;
        }
    }
    w.flush()
}

pub fn write_timeline_csv(path: &Path, timeline: &[(f64, usize)]) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "t,stagnation_count")?;
    for (t, c) in timeline {
        writeln!(w, "{t:?},{c}")?;
    }
    w.flush()
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotEntry {
    pub file: Option<String>,
    pub t: f64,
    pub max_div: f64,
    pub stagnation_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationIndex {
    pub scenario_hash: String,
    pub mode: SolverMode,
    pub nx: usize,
    pub ny: usize,
    pub window: Window,
    pub dt: f64,
    pub end_time: f64,
    pub snapshot_stride: usize,
    pub stagnation_window: Window,
    pub boundary_condition: &'static str,
    pub boundary_note: &'static str,
    pub first_transition_time: Option<f64>,
    pub failure: Option<String>,
    pub snapshots: Vec<SnapshotEntry>,
}

impl SimulationIndex {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("index serializes");
        s.push('\n');
        s
    }
}

/// Settings of one simulation run.
#[derive(Debug, Clone, Copy)]
pub struct SimulationPlan {
    pub mode: SolverMode,
    pub n: usize,
    pub end_time: f64,
    /// Approximate number of retained snapshots.
    pub target_snapshots: usize,
    pub seed_density: usize,
}

impl SimulationPlan {
    pub fn config(&self, window: Window) -> Result<SolverConfig, SolverError> {
        let grid = Grid2::new(self.n, self.n, window)?;
        let dt = SolverConfig::default_dt(&grid);
        let probe = SolverConfig::new(grid, self.mode, dt, self.end_time, 1)?;
        let stride = (probe.steps() / self.target_snapshots.max(1)).max(1);
        SolverConfig::new(grid, self.mode, dt, self.end_time, stride)
    }
}

#[derive(Debug, Clone)]
pub struct SimulationRecord {
    pub config: SolverConfig,
    pub outcome: RunOutcome,
    pub timeline: Vec<(f64, usize)>,
    pub stagnation_window: Window,
}

impl SimulationRecord {
    pub fn first_transition_time(&self) -> Option<f64> {
        self.timeline.iter().find(|(_, c)| *c >= TRANSITION_COUNT).map(|(t, _)| *t)
    }

    pub fn index(&self, scenario_hash: &str, files: &[Option<String>]) -> SimulationIndex {
        let c = &self.config;
        SimulationIndex {
            scenario_hash: scenario_hash.to_string(),
            mode: c.mode,
            nx: c.grid.nx,
            ny: c.grid.ny,
            window: c.grid.window,
            dt: c.dt,
            end_time: c.end_time,
            snapshot_stride: c.snapshot_stride,
            stagnation_window: self.stagnation_window,
            boundary_condition: "dirichlet_first_order",
            boundary_note: BOUNDARY_NOTE,
            first_transition_time: self.first_transition_time(),
            failure: self.outcome.failure.as_ref().map(|e| e.to_string()),
            snapshots: self
                .outcome
                .snapshots
                .iter()
                .zip(&self.timeline)
                .zip(files.iter().chain(std::iter::repeat(&None)))
                .map(|((s, (_, count)), file)| SnapshotEntry {
                    file: file.clone(),
                    t: s.t,
                    max_div: s.max_div,
                    stagnation_count: *count,
                })
                .collect(),
        }
    }
}

/// Stagnation points are counted in the grid window minus a 10% margin.
pub fn stagnation_window(grid: &Window) -> Window {
    grid.expanded(-0.1)
}

pub fn simulate(ds: &DimensionlessScenario, plan: &SimulationPlan) -> Result<SimulationRecord, SolverError> {
    let config = plan.config(ds.window)?;
    let solver = Solver::new(ds, config)?;
    let outcome = solver.run();
    let sub = stagnation_window(&ds.window);
    let tol = crate::topology::Tolerances::default();
    let timeline = outcome
        .snapshots
        .iter()
        .map(|s| match stagnation_count(s, &config.grid, &sub, plan.seed_density, &tol) {
            Ok(c) => Ok((s.t, c)),
            Err(SolverError::IdenticallyZero) => Ok((s.t, 0)),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimulationRecord { config, outcome, timeline, stagnation_window: sub })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub scenario_hash: String,
    pub predicted_t0: Option<f64>,
    pub predicted_verdict: Verdict,
    pub simulated_transition_time: Option<f64>,
    pub relative_gap: Option<f64>,
    pub tolerance: f64,
    pub concordant: bool,
    pub summary: String,
    pub boundary_note: &'static str,
}

impl VerifyReport {
    pub fn new(scenario_hash: String, predicted: &PredictionReport, simulated: Option<f64>) -> Self {
        let predicted_t0 = match predicted.verdict {
            Verdict::SeparationCertified => predicted.t0,
            _ => None,
        };
        let (relative_gap, concordant, summary) = match (predicted_t0, simulated) {
            (None, None) => (None, true, "no event on either side".to_string()),
            (Some(t0), None) => (None, false, format!("predicted t0 = {t0} but no transition was simulated")),
            (None, Some(ts)) => (None, false, format!("transition simulated at t = {ts} but none was predicted")),
            (Some(t0), Some(ts)) => {
                let gap = (ts - t0).abs() / t0;
                let ok = gap <= VERIFY_GAP;
                let word = if ok { "within" } else { "outside" };
                (Some(gap), ok, format!("relative gap {gap:.4} is {word} {VERIFY_GAP}"))
            }
        };
        Self {
            scenario_hash,
            predicted_t0,
            predicted_verdict: predicted.verdict,
            simulated_transition_time: simulated,
            relative_gap,
            tolerance: VERIFY_GAP,
            concordant,
            summary,
            boundary_note: BOUNDARY_NOTE,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("verify report serializes");
        s.push('\n');
        s
    }
}
