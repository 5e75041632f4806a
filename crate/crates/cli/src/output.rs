use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use vlc_core::{tolerances, IterationRecord, Scenario, ScenarioConfig};

pub fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct IterationRow {
    iteration: usize,
    z_upper: f64,
    z_lower: f64,
    c_r: f64,
    wall_ms: f64,
}

pub fn write_iterations(path: &Path, log: &[IterationRecord]) -> Result<()> {
    let rows: Vec<IterationRow> = log
        .iter()
        .map(|r| IterationRow {
            iteration: r.iteration,
            z_upper: r.z_upper,
            z_lower: r.z_lower,
            c_r: r.reduced_cost,
            wall_ms: r.wall_ms,
        })
        .collect();
    write_csv(path, &rows)
}

#[derive(Serialize)]
struct Tolerances {
    lp_feasibility: f64,
    reduced_cost: f64,
    illuminance_lux: f64,
    illuminance_margin_lux: f64,
    omega: f64,
    slack_mbps: f64,
    slack_cost_w_per_mbps: f64,
}

impl Tolerances {
    fn current() -> Self {
        Self {
            lp_feasibility: tolerances::LP_FEASIBILITY,
            reduced_cost: tolerances::REDUCED_COST,
            illuminance_lux: tolerances::ILLUMINANCE,
            illuminance_margin_lux: tolerances::ILLUMINANCE_MARGIN,
            omega: tolerances::OMEGA,
            slack_mbps: tolerances::SLACK,
            slack_cost_w_per_mbps: tolerances::SLACK_COST,
        }
    }
}

/// Run record written next to every set of outputs.
#[derive(Serialize)]
pub struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: Vec<String>,
    config: ScenarioConfig,
    /// SHA-256 of the expanded scenario; `None` when the run spans several.
    scenario_digest: Option<String>,
    parallel: bool,
    tolerances: Tolerances,
    files: Vec<String>,
    summary: serde_json::Value,
}

impl Manifest {
    pub fn new(config: &ScenarioConfig, scenario: Option<&Scenario>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: std::env::args().collect(),
            config: config.clone(),
            scenario_digest: scenario.map(Scenario::digest),
            parallel: vlc_core::par::ENABLED,
            tolerances: Tolerances::current(),
            files: Vec::new(),
            summary: serde_json::Value::Null,
        }
    }

    pub fn file(&mut self, path: &Path) -> PathBuf {
        if let Some(name) = path.file_name() {
            self.files.push(name.to_string_lossy().into_owned());
        }
        path.to_path_buf()
    }

    pub fn summary(&mut self, value: serde_json::Value) {
        self.summary = value;
    }

    pub fn write(mut self, dir: &Path) -> Result<()> {
        self.files.push("manifest.json".into());
        let path = dir.join("manifest.json");
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &self)?;
        Ok(())
    }
}
