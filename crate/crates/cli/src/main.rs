use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use vortex_birth::model::{nondimensionalize, Scenario, ScenarioConfig};
use vortex_birth::predictor::{SearchOptions, Verdict};
use vortex_birth::report::{
    default_horizon, predict, simulate, write_snapshot_csv, write_timeline_csv, write_zero_count_csv,
    PredictionReport, SimulationPlan, SimulationRecord, VerifyReport,
};
use vortex_birth::solver::{SolverError, SolverMode};

const EXIT_OK: u8 = 0;
const EXIT_CONFIG: u8 = 1;
const EXIT_REJECTED: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;

#[derive(Parser)]
#[command(name = "vortex-birth", version, about = "Predict and simulate interior flow separation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate and certify the separation event of the first-order field.
    Predict(CommonArgs),
    /// Integrate the scaled model and record stagnation points.
    Simulate(CommonArgs),
    /// Compare the predicted separation time with the simulated one.
    Verify(CommonArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Literal,
    Projected,
}

impl From<ModeArg> for SolverMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Literal => SolverMode::Literal,
            ModeArg::Projected => SolverMode::Projected,
        }
    }
}

#[derive(Args, Clone)]
struct CommonArgs {
    #[arg(long)]
    config: PathBuf,
    /// Parent directory of the run directory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "literal")]
    mode: ModeArg,
    /// Grid nodes per side.
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Simulation end time (scaled units).
    #[arg(long)]
    end_time: Option<f64>,
    /// Search horizon of the predictor (scaled units).
    #[arg(long)]
    tmax: Option<f64>,
    /// Write JSON outputs only.
    #[arg(long)]
    json_only: bool,
}

#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    config_path: String,
    scenario_hash: String,
    parameters: serde_json::Value,
    output_dir: String,
    toolkit_version: &'static str,
    started_utc: String,
    duration_seconds: f64,
    exit_code: u8,
    files: Vec<String>,
}

struct Run {
    command: &'static str,
    args: CommonArgs,
    scenario: Scenario,
    hash: String,
    dir: PathBuf,
    started: Instant,
    started_utc: String,
    files: Vec<String>,
    parameters: serde_json::Map<String, serde_json::Value>,
}

impl Run {
    fn open(command: &'static str, args: CommonArgs, scenario: Scenario) -> anyhow::Result<Self> {
        let now = Utc::now();
        let hash = ScenarioConfig::fingerprint(&scenario);
        let stem = format!("{}-{}", now.format("%Y%m%dT%H%M%SZ"), &hash[..12]);
        let mut dir = args.out.join(&stem);
        let mut k = 1;
        while dir.exists() {
            dir = args.out.join(format!("{stem}-{k}"));
            k += 1;
        }
        fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
        fs::write(dir.join("scenario.toml"), ScenarioConfig::to_toml_string(&scenario))?;
        Ok(Self {
            command,
            args,
            scenario,
            hash,
            dir,
            started: Instant::now(),
            started_utc: now.to_rfc3339(),
            files: vec!["scenario.toml".into()],
            parameters: serde_json::Map::new(),
        })
    }

    fn write(&mut self, name: &str, contents: &str) -> anyhow::Result<()> {
        fs::write(self.dir.join(name), contents).with_context(|| format!("cannot write {name}"))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn with_file(&mut self, name: &str, f: impl FnOnce(&Path) -> std::io::Result<()>) -> anyhow::Result<()> {
        f(&self.dir.join(name)).with_context(|| format!("cannot write {name}"))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn finish(mut self, code: u8) -> anyhow::Result<u8> {
        let manifest = RunManifest {
            command: self.command,
            config_path: self.args.config.display().to_string(),
            scenario_hash: self.hash.clone(),
            parameters: serde_json::Value::Object(std::mem::take(&mut self.parameters)),
            output_dir: self.dir.display().to_string(),
            toolkit_version: env!("CARGO_PKG_VERSION"),
            started_utc: self.started_utc.clone(),
            duration_seconds: self.started.elapsed().as_secs_f64(),
            exit_code: code,
            files: self.files.clone(),
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(self.dir.join("manifest.json"), text)?;
        println!("{}", self.dir.display());
        Ok(code)
    }

    fn predict(&mut self) -> anyhow::Result<PredictionReport> {
        let (report, sweep) = predict(&self.scenario, self.args.tmax, &SearchOptions::default())?;
        self.parameters.insert("tmax".into(), json!(report.t_max));
        self.write("report.json", &report.to_json())?;
        if !self.args.json_only {
            self.with_file("zero_count.csv", |p| write_zero_count_csv(p, &sweep))?;
        }
        Ok(report)
    }

    fn simulate(&mut self, end_time: f64) -> anyhow::Result<SimulationRecord> {
        let plan = SimulationPlan {
            mode: self.args.mode.into(),
            n: self.args.grid,
            end_time,
            target_snapshots: 50,
            seed_density: 16,
        };
        let ds = nondimensionalize(&self.scenario);
        let record = simulate(&ds, &plan)?;
        let c = &record.config;
        self.parameters.insert("mode".into(), json!(c.mode));
        self.parameters.insert("grid".into(), json!([c.grid.nx, c.grid.ny]));
        self.parameters.insert("dt".into(), json!(c.dt));
        self.parameters.insert("end_time".into(), json!(c.end_time));
        self.parameters.insert("snapshot_stride".into(), json!(c.snapshot_stride));

        let mut names = Vec::new();
        if !self.args.json_only {
            fs::create_dir_all(self.dir.join("snapshots"))?;
            for (k, s) in record.outcome.snapshots.iter().enumerate() {
                let name = format!("snapshots/snapshot_{k:05}.csv");
                self.with_file(&name, |p| write_snapshot_csv(p, &c.grid, s))?;
                names.push(Some(name));
            }
            self.with_file("stagnation_timeline.csv", |p| write_timeline_csv(p, &record.timeline))?;
        }
        let index = record.index(&self.hash, &names);
        self.write("snapshots.json", &index.to_json())?;
        if let Some(e) = &record.outcome.failure {
            eprintln!("simulation stopped: {e}");
        }
        Ok(record)
    }
}

fn load(args: &CommonArgs) -> Result<Scenario, ExitCode> {
    ScenarioConfig::from_path(&args.config).map(|c| c.scenario).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<SolverError>() {
        Some(SolverError::BlowUp { .. }) => EXIT_BLOW_UP,
        _ => EXIT_CONFIG,
    }
}

fn cmd_predict(run: &mut Run) -> anyhow::Result<u8> {
    let report = run.predict()?;
    eprintln!("verdict: {:?} ({})", report.verdict, report.reason);
    Ok(match report.verdict {
        Verdict::SeparationRejected => EXIT_REJECTED,
        _ => EXIT_OK,
    })
}

fn cmd_simulate(run: &mut Run) -> anyhow::Result<u8> {
    let end = match run.args.end_time {
        Some(t) => t,
        None => 0.75 * default_horizon(&nondimensionalize(&run.scenario)),
    };
    let record = run.simulate(end)?;
    Ok(if record.outcome.failure.is_some() { EXIT_BLOW_UP } else { EXIT_OK })
}

fn cmd_verify(run: &mut Run) -> anyhow::Result<u8> {
    let report = run.predict()?;
    let end = match (report.verdict, report.t0, run.args.end_time) {
        (_, _, Some(t)) => t,
        (Verdict::SeparationCertified, Some(t0), None) => 1.5 * t0,
        _ => 0.75 * default_horizon(&nondimensionalize(&run.scenario)),
    };
    let record = run.simulate(end)?;
    if record.outcome.failure.is_some() {
        return Ok(EXIT_BLOW_UP);
    }
    let verify = VerifyReport::new(run.hash.clone(), &report, record.first_transition_time());
    run.write("verify.json", &verify.to_json())?;
    eprintln!("{}", verify.summary);
    Ok(if verify.concordant { EXIT_OK } else { EXIT_REJECTED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args, f): (&'static str, CommonArgs, fn(&mut Run) -> anyhow::Result<u8>) = match cli.command {
        Command::Predict(a) => ("predict", a, cmd_predict),
        Command::Simulate(a) => ("simulate", a, cmd_simulate),
        Command::Verify(a) => ("verify", a, cmd_verify),
    };
    let scenario = match load(&args) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let result = Run::open(name, args, scenario).and_then(|mut run| match f(&mut run) {
        Ok(code) => run.finish(code),
        Err(e) => {
            let code = exit_code_for(&e);
            eprintln!("error: {e:#}");
            run.finish(code)
        }
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
