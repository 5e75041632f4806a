//! `vlcsim`: runs power-minimising schedules on VLC scenarios and writes
//! CSV tables plus a JSON manifest per run.

mod output;

use std::fs::File;
use std::io::BufWriter;
use std::ops::Range;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use vlc_core::baselines::{vico_random_schedule, Lighting};
use vlc_core::experiments::{
    export_heatmap, run_algorithm, run_comparison, sweep_sir, Algorithm, Axis, ExperimentResult,
};
use vlc_core::scenario::{load_config, ConfigKind};
use vlc_core::{Network, Scenario, ScenarioConfig};

use output::{prepare_dir, write_csv, write_iterations, Manifest};

#[derive(Parser)]
#[command(name = "vlcsim", version, about = "Power-minimising link scheduling for indoor VLC networks")]
struct Cli {
    /// Log verbosity; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schedule one scenario and reality-check the result.
    Solve(SolveArgs),
    /// Column generation over a range of SIR thresholds.
    SweepSir(SweepArgs),
    /// Compare algorithms over terminal counts or per-terminal demand.
    Compare(CompareArgs),
    /// Desk illuminance across a schedule.
    Heatmap(HeatmapArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Overrides the configured SIR threshold.
    #[arg(long)]
    sir: Option<f64>,
    /// Overrides the configured light source (a, b or c).
    #[arg(long)]
    light_config: Option<ConfigKind>,
    #[arg(long, default_value = "cg")]
    algo: Algorithm,
    /// Overrides the placement seed, which also seeds the random baseline.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the conflict graph as an adjacency list.
    #[arg(long)]
    dump_conflict_graph: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    step: f64,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Base scenario; the built-in 6 m × 6 m reference room when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    axis: Axis,
    /// Terminal counts for `uts`, Mbps per terminal for `demand`.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "cg,vico,mwis")]
    algos: Vec<Algorithm>,
    /// Comma-separated seeds or a half-open range such as `0..10`.
    #[arg(long, default_value = "0..10")]
    seeds: Seeds,
    /// Per-terminal demand for the `uts` axis, Mbps.
    #[arg(long)]
    demand_mbps: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct HeatmapArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "cg")]
    algo: Algorithm,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Random scheduling with uniform dimming instead of per-point
    /// illuminance constraints. Only valid with `--algo vico`.
    #[arg(long)]
    no_illum_constraint: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Debug)]
struct Seeds(Vec<u64>);

impl FromStr for Seeds {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |e: std::num::ParseIntError| format!("bad seed list `{s}`: {e}");
        if let Some((a, b)) = s.split_once("..") {
            let r: Range<u64> = a.trim().parse().map_err(bad)?..b.trim().parse().map_err(bad)?;
            if r.is_empty() {
                return Err(format!("empty seed range `{s}`"));
            }
            return Ok(Seeds(r.collect()));
        }
        s.split(',')
            .map(|t| t.trim().parse().map_err(bad))
            .collect::<Result<_, _>>()
            .map(Seeds)
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match cli.command {
        Command::Solve(a) => solve(a),
        Command::SweepSir(a) => sweep(a),
        Command::Compare(a) => compare(a),
        Command::Heatmap(a) => heatmap(a),
    }
}

fn read_config(path: &PathBuf) -> Result<ScenarioConfig> {
    load_config(path).with_context(|| format!("loading {}", path.display()))
}

fn solve(a: SolveArgs) -> Result<()> {
    let mut cfg = read_config(&a.config)?;
    if let Some(t) = a.sir {
        cfg.sir_threshold = t;
    }
    if let Some(k) = a.light_config {
        cfg.config_kind = k;
    }
    if let Some(seed) = a.seed {
        cfg.rng_seed = seed;
    }
    let s = Scenario::from_config(&cfg)?;
    let net = Network::new(s.clone(), s.sir_threshold)?;
    let run = run_algorithm(&net, a.algo, a.epsilon, cfg.rng_seed)?;
    let result = ExperimentResult::new(&s, a.algo, cfg.rng_seed, &run);

    prepare_dir(&a.out)?;
    let mut manifest = Manifest::new(&cfg, Some(&s));
    write_csv(&manifest.file(&a.out.join("results.csv")), &[result.clone()])?;
    write_iterations(&manifest.file(&a.out.join("iterations.csv")), &run.protocol.log)?;
    if a.dump_conflict_graph {
        let path = manifest.file(&a.out.join("conflict_graph.txt"));
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        net.graph.write_adjacency(BufWriter::new(f))?;
    }
    manifest.summary(json!({
        "algorithm": a.algo,
        "epsilon": a.epsilon,
        "status": run.protocol.status,
        "reality_status": run.reality.status,
        "z_upper": run.protocol.z_upper,
        "z_lower": run.protocol.z_lower,
        "p_illumi_min": run.protocol.p_illumi_min,
        "protocol_power": result.protocol_power,
        "reality_power": result.reality_power,
        "scheduled_sets": run.protocol.scheduled().count(),
    }));
    manifest.write(&a.out)?;

    println!(
        "{} {:?}: {} iterations, power {:.6} W (reality {:.6} W, {:?})",
        a.algo,
        run.protocol.status,
        run.protocol.iterations,
        result.protocol_power,
        result.reality_power,
        run.reality.status
    );
    Ok(())
}

fn thresholds(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(from <= to) {
        bail!("need from <= to and step > 0");
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let cfg = read_config(&a.config)?;
    let s = Scenario::from_config(&cfg)?;
    let ts = thresholds(a.from, a.to, a.step)?;
    let sweep = sweep_sir(&s, &ts, a.epsilon)?;

    prepare_dir(&a.out)?;
    let mut manifest = Manifest::new(&cfg, Some(&s));
    write_csv(&manifest.file(&a.out.join("sweep.csv")), &sweep.rows)?;
    manifest.summary(json!({
        "epsilon": a.epsilon,
        "sir_lower": sweep.sir_lower,
        "sir_upper": sweep.sir_upper,
    }));
    manifest.write(&a.out)?;

    let show = |v: Option<f64>| v.map_or("none".to_string(), |t| t.to_string());
    println!("SIR_L {}  SIR_U {}", show(sweep.sir_lower), show(sweep.sir_upper));
    Ok(())
}

fn compare(a: CompareArgs) -> Result<()> {
    let mut cfg = match &a.config {
        Some(p) => read_config(p)?,
        None => ScenarioConfig::reference_room(30, 20e6, 0),
    };
    if let Some(d) = a.demand_mbps {
        cfg.demand_bps = d * 1e6;
    }
    let values: Vec<f64> = match a.axis {
        Axis::Uts => a.values.clone(),
        Axis::Demand => a.values.iter().map(|v| v * 1e6).collect(),
    };
    let rows = run_comparison(&cfg, &a.algos, a.axis, &values, &a.seeds.0, a.epsilon)?;

    prepare_dir(&a.out)?;
    let mut manifest = Manifest::new(&cfg, None);
    write_csv(&manifest.file(&a.out.join("results.csv")), &rows)?;
    manifest.summary(json!({
        "axis": a.axis,
        "values": a.values,
        "algorithms": a.algos,
        "seeds": a.seeds.0,
        "epsilon": a.epsilon,
        "rows": rows.len(),
    }));
    manifest.write(&a.out)?;

    for algo in &a.algos {
        for &v in &values {
            let cell: Vec<&ExperimentResult> = rows
                .iter()
                .filter(|r| r.algorithm == *algo && axis_value(a.axis, r) == v)
                .collect();
            if cell.is_empty() {
                continue;
            }
            let powers: Vec<f64> = cell.iter().map(|r| r.reality_power).filter(|p| p.is_finite()).collect();
            let mean = powers.iter().sum::<f64>() / powers.len() as f64;
            println!(
                "{algo} {v}: mean reality power {mean:.4} W over {}/{} feasible runs",
                powers.len(),
                cell.len()
            );
        }
    }
    Ok(())
}

fn axis_value(axis: Axis, r: &ExperimentResult) -> f64 {
    match axis {
        Axis::Uts => r.n_uts as f64,
        Axis::Demand => r.demand_bps,
    }
}

fn heatmap(a: HeatmapArgs) -> Result<()> {
    let mut cfg = read_config(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.rng_seed = seed;
    }
    let s = Scenario::from_config(&cfg)?;
    let net = Network::new(s.clone(), s.sir_threshold)?;
    let (solution, lighting) = if a.no_illum_constraint {
        if a.algo != Algorithm::Vico {
            bail!("--no-illum-constraint is only available with --algo vico");
        }
        let v = vico_random_schedule(&net, cfg.rng_seed, Lighting::Uniform)?;
        (v.protocol, Lighting::Uniform)
    } else {
        let run = run_algorithm(&net, a.algo, a.epsilon, cfg.rng_seed)?;
        (run.protocol, Lighting::Constrained)
    };
    let map = export_heatmap(&net, &solution, lighting);

    prepare_dir(&a.out)?;
    let mut manifest = Manifest::new(&cfg, Some(&s));
    write_csv(&manifest.file(&a.out.join("heatmap.csv")), &map.rows)?;
    manifest.summary(json!({
        "algorithm": a.algo,
        "illuminance_constrained": !a.no_illum_constraint,
        "grid_points": map.rows.len(),
        "violation_fraction": map.violation_fraction,
        "lux_range": [s.illum_grid.e_lower, s.illum_grid.e_upper],
    }));
    manifest.write(&a.out)?;

    println!(
        "{} grid points, {:.1}% outside [{}, {}] lux at some time",
        map.rows.len(),
        100.0 * map.violation_fraction,
        s.illum_grid.e_lower,
        s.illum_grid.e_upper
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists_and_ranges() {
        assert_eq!(Seeds::from_str("0..4").unwrap().0, vec![0, 1, 2, 3]);
        assert_eq!(Seeds::from_str("7, 3,9").unwrap().0, vec![7, 3, 9]);
        assert!(Seeds::from_str("4..4").is_err());
        assert!(Seeds::from_str("x").is_err());
    }

    #[test]
    fn threshold_grid_includes_both_ends() {
        assert_eq!(thresholds(1.0, 2.0, 0.5).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(thresholds(1.0, 1.0, 0.3).unwrap(), vec![1.0]);
        assert_eq!(thresholds(1.0, 1.95, 0.5).unwrap(), vec![1.0, 1.5]);
        assert!(thresholds(2.0, 1.0, 0.5).is_err());
        assert!(thresholds(1.0, 2.0, 0.0).is_err());
    }
}
