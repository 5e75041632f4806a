//! Experiment drivers shared by the command-line tool and the tests.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::baselines::{mwis_schedule, vico_random_schedule, BaselineSolution, Lighting};
use crate::cg::{column_generation, reality_check, CgOptions, CgSolution};
use crate::network::Network;
use crate::scenario::{ConfigKind, Scenario, ScenarioConfig};
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Cg,
    Vico,
    Mwis,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Cg => "cg",
            Algorithm::Vico => "vico",
            Algorithm::Mwis => "mwis",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cg" => Ok(Algorithm::Cg),
            "vico" => Ok(Algorithm::Vico),
            "mwis" => Ok(Algorithm::Mwis),
            other => Err(format!("unknown algorithm `{other}` (expected cg, vico or mwis)")),
        }
    }
}

/// Protocol-model schedule and its reality-checked counterpart.
#[derive(Debug, Clone)]
pub struct Run {
    pub protocol: CgSolution,
    pub reality: CgSolution,
    pub wall_ms: f64,
}

impl From<BaselineSolution> for Run {
    fn from(b: BaselineSolution) -> Self {
        Run {
            wall_ms: b.protocol.wall_ms,
            protocol: b.protocol,
            reality: b.reality,
        }
    }
}

pub fn run_algorithm(net: &Network, algorithm: Algorithm, epsilon: f64, seed: u64) -> Result<Run> {
    let start = Instant::now();
    let mut run: Run = match algorithm {
        Algorithm::Cg => {
            let protocol = column_generation(net, &CgOptions::with_epsilon(epsilon))?;
            let reality = reality_check(net, &protocol)?;
            Run {
                protocol,
                reality,
                wall_ms: 0.0,
            }
        }
        Algorithm::Vico => vico_random_schedule(net, seed, Lighting::Constrained)?.into(),
        Algorithm::Mwis => mwis_schedule(net)?.into(),
    };
    run.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(run)
}

/// One row of `results.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub scenario_digest: String,
    pub algorithm: Algorithm,
    pub config_kind: ConfigKind,
    pub sir_threshold: f64,
    pub n_uts: usize,
    pub demand_bps: f64,
    /// Power above lighting-only operation under the protocol model, W.
    /// NaN when the demands cannot be met.
    pub protocol_power: f64,
    /// Power above lighting-only operation after the reality check, W.
    /// NaN when the checked schedule misses a demand.
    pub reality_power: f64,
    pub protocol_feasible: bool,
    /// Both the protocol schedule and its reality check meet every demand.
    pub feasible: bool,
    pub iterations: usize,
    pub wall_ms: f64,
    pub seed: u64,
}

impl ExperimentResult {
    pub fn new(s: &Scenario, algorithm: Algorithm, seed: u64, run: &Run) -> Self {
        ExperimentResult {
            scenario_digest: s.digest(),
            algorithm,
            config_kind: s.config_kind,
            sir_threshold: s.sir_threshold,
            n_uts: s.uts.len(),
            demand_bps: s.uts.first().map_or(0.0, |u| u.demand_bps),
            protocol_power: feasible_power(&run.protocol),
            reality_power: feasible_power(&run.reality),
            protocol_feasible: run.protocol.is_feasible(),
            feasible: run.protocol.is_feasible() && run.reality.is_feasible(),
            iterations: run.protocol.iterations,
            wall_ms: run.wall_ms,
            seed,
        }
    }
}

fn feasible_power(sol: &CgSolution) -> f64 {
    if sol.is_feasible() {
        sol.power()
    } else {
        f64::NAN
    }
}

/// Builds the network for `s` and runs `algorithm` on it.
pub fn solve_scenario(s: &Scenario, algorithm: Algorithm, epsilon: f64, seed: u64) -> Result<ExperimentResult> {
    let net = Network::new(s.clone(), s.sir_threshold)?;
    let run = run_algorithm(&net, algorithm, epsilon, seed)?;
    Ok(ExperimentResult::new(s, algorithm, seed, &run))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub sir_threshold: f64,
    pub protocol_feasible: bool,
    pub reality_feasible: bool,
    pub protocol_power: f64,
    pub reality_power: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SirSweep {
    pub rows: Vec<SweepRow>,
    /// Smallest threshold whose reality check is feasible.
    pub sir_lower: Option<f64>,
    /// Largest threshold whose protocol-model schedule is feasible.
    pub sir_upper: Option<f64>,
}

/// Column generation plus reality check at each threshold.
pub fn sweep_sir(s: &Scenario, thresholds: &[f64], epsilon: f64) -> Result<SirSweep> {
    if thresholds.iter().any(|&t| !(t >= 1.0)) || thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument(
            "thresholds must be ascending and at least 1".into(),
        ));
    }
    let rows = par::map_slice(thresholds, |&t| -> Result<SweepRow> {
        let mut sc = s.clone();
        sc.sir_threshold = t;
        let net = Network::new(sc, t)?;
        let run = run_algorithm(&net, Algorithm::Cg, epsilon, 0)?;
        Ok(SweepRow {
            sir_threshold: t,
            protocol_feasible: run.protocol.is_feasible(),
            reality_feasible: run.protocol.is_feasible() && run.reality.is_feasible(),
            protocol_power: feasible_power(&run.protocol),
            reality_power: feasible_power(&run.reality),
            iterations: run.protocol.iterations,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let sir_upper = rows
        .iter()
        .filter(|r| r.protocol_feasible)
        .map(|r| r.sir_threshold)
        .reduce(f64::max);
    let sir_lower = rows
        .iter()
        .filter(|r| r.reality_feasible)
        .map(|r| r.sir_threshold)
        .reduce(f64::min);
    Ok(SirSweep {
        rows,
        sir_lower,
        sir_upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Uts,
    Demand,
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uts" => Ok(Axis::Uts),
            "demand" => Ok(Axis::Demand),
            other => Err(format!("unknown axis `{other}` (expected uts or demand)")),
        }
    }
}

/// One result per (value, seed, algorithm), in that nesting order. The
/// seed sets both terminal placement and the random baseline. Cells whose
/// solver fails are skipped with a warning.
pub fn run_comparison(
    base: &ScenarioConfig,
    algorithms: &[Algorithm],
    axis: Axis,
    values: &[f64],
    seeds: &[u64],
    epsilon: f64,
) -> Result<Vec<ExperimentResult>> {
    if algorithms.is_empty() {
        return Err(Error::InvalidArgument("no algorithms given".into()));
    }
    if values.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidArgument("no axis values or seeds given".into()));
    }
    let mut cells = Vec::new();
    for &v in values {
        for &seed in seeds {
            cells.push((v, seed));
        }
    }
    let per_cell = par::map_slice(&cells, |&(v, seed)| -> Result<Vec<ExperimentResult>> {
        let mut cfg = base.clone();
        cfg.rng_seed = seed;
        match axis {
            Axis::Uts => {
                cfg.uts = None;
                cfg.ut_count = Some(v.round() as usize);
            }
            Axis::Demand => {
                cfg.demand_bps = v;
                if let Some(uts) = cfg.uts.as_mut() {
                    for u in uts {
                        u.demand_bps = None;
                    }
                }
            }
        }
        let s = Scenario::from_config(&cfg)?;
        let net = Network::new(s.clone(), s.sir_threshold)?;
        let mut out = Vec::new();
        for &a in algorithms {
            match run_algorithm(&net, a, epsilon, seed) {
                Ok(run) => out.push(ExperimentResult::new(&s, a, seed, &run)),
                Err(e) => log::warn!("{a} at value {v}, seed {seed}: {e}"),
            }
        }
        Ok(out)
    });
    let mut rows = Vec::new();
    for r in per_cell {
        rows.extend(r?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapRow {
    pub x: f64,
    pub y: f64,
    /// Time-weighted illuminance over one time unit, idle time included.
    pub mean_lux: f64,
    /// Extremes over the scheduled sets and the idle state.
    pub min_lux: f64,
    pub max_lux: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Heatmap {
    pub rows: Vec<HeatmapRow>,
    /// Share of grid points that leave the range at some point in time.
    pub violation_fraction: f64,
}

/// Illuminance at every grid point across the schedule. Idle time uses
/// the lighting-only powers, or uniform dimming when `lighting` says so.
pub fn export_heatmap(net: &Network, sol: &CgSolution, lighting: Lighting) -> Heatmap {
    let g = &net.scenario.illum_grid;
    let mut states: Vec<(f64, Vec<f64>)> = sol
        .scheduled()
        .map(|q| {
            let c = &sol.columns[q];
            (sol.omega[q], net.illuminance(&c.dc_power, &c.links))
        })
        .collect();
    let idle = 1.0 - states.iter().map(|(w, _)| w).sum::<f64>();
    if idle > crate::tolerances::OMEGA {
        let dc = match lighting {
            Lighting::Constrained => net.dc_min.clone(),
            Lighting::Uniform => crate::baselines::uniform_idle_dc(net),
        };
        states.push((idle, net.illuminance(&dc, &[])));
    }
    let mut violated = 0usize;
    let rows: Vec<HeatmapRow> = g
        .positions
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let mean = states.iter().map(|(w, e)| w * e[k]).sum();
            let min = states.iter().map(|(_, e)| e[k]).fold(f64::INFINITY, f64::min);
            let max = states.iter().map(|(_, e)| e[k]).fold(f64::NEG_INFINITY, f64::max);
            if min < g.e_lower - 1e-3 || max > g.e_upper + 1e-3 {
                violated += 1;
            }
            HeatmapRow {
                x: p.x,
                y: p.y,
                mean_lux: mean,
                min_lux: min,
                max_lux: max,
            }
        })
        .collect();
    Heatmap {
        violation_fraction: violated as f64 / rows.len().max(1) as f64,
        rows,
    }
}
