//! Exit criteria. Prints one line per criterion and exits non-zero when
//! any of them fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlc_core::baselines::{vico_random_schedule, Lighting};
use vlc_core::capacity::{physical_capacity, protocol_capacity};
use vlc_core::experiments::{export_heatmap, run_algorithm, sweep_sir, Algorithm};
use vlc_core::geometry::Vec3;
use vlc_core::optics::{channel_gain, illum_gain, illuminance_field, lambertian_order, BeamPose};
use vlc_core::scenario::{ConfigKind, OrientationPolicy, Receiver};
use vlc_core::{column_generation, reality_check, CgOptions, CgStatus, Network, Scenario, ScenarioConfig};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn default_network(uts: usize, demand: f64, seed: u64, kind: ConfigKind, sir: f64) -> Network {
    let mut cfg = ScenarioConfig::reference_room(uts, demand, seed);
    cfg.config_kind = kind;
    cfg.sir_threshold = sir;
    let s = Scenario::from_config(&cfg).expect("default scenario");
    Network::new(s, sir).expect("default network")
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn exhaustive_oracle() -> Outcome {
    let start = Instant::now();
    let mut compared = 0;
    let mut infeasible = 0;
    let mut worst: f64 = 0.0;
    let mut max_links = 0;
    for seed in 0..100u64 {
        if compared >= 24 {
            break;
        }
        let net = common::tiny_network(seed);
        max_links = max_links.max(net.links().len());
        let sets = common::enumerate_sets(&net);
        let exact = common::full_master(&sets, &net.scenario.demands(), net.p_illumi_min);
        let sol = column_generation(&net, &CgOptions::with_epsilon(1e-14)).map_err(|e| e.to_string())?;
        match exact {
            Some(z) => {
                if !sol.is_feasible() {
                    return Err(format!("seed {seed}: exhaustive optimum {z}, cg {:?}", sol.status));
                }
                compared += 1;
                worst = worst.max((sol.z_upper - z).abs() / z.abs());
            }
            None if sol.status == CgStatus::Infeasible => infeasible += 1,
            None => return Err(format!("seed {seed}: exhaustively infeasible, cg {:?}", sol.status)),
        }
    }
    let elapsed = start.elapsed();
    check(
        compared >= 20 && max_links <= 12 && worst <= 1e-6 && elapsed <= Duration::from_secs(10),
        format!(
            "{compared} instances (+{infeasible} agreed infeasible), <= {max_links} links, max rel gap {worst:.2e}, {elapsed:.2?}"
        ),
    )
}

fn epsilon_certificate() -> Outcome {
    let net = default_network(30, 20e6, 0, ConfigKind::A, 3.0);
    let mut iterations = Vec::new();
    let mut notes = Vec::new();
    let mut ok = true;
    for eps in [0.01, 0.005, 1e-14] {
        let start = Instant::now();
        let sol = column_generation(&net, &CgOptions::with_epsilon(eps)).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let last = sol.log.last().expect("at least one iteration");
        let ratio = sol.z_upper / sol.z_lower;
        let certified = ratio <= 1.0 + eps || last.reduced_cost >= -1e-9;
        ok &= sol.is_feasible() && elapsed <= Duration::from_secs(120);
        if eps >= 0.005 {
            ok &= certified;
        }
        iterations.push(sol.iterations);
        notes.push(format!(
            "eps {eps:e}: {:?} in {} it, z_u/z_l-1 {:.2e}, c_r {:.2e}, {elapsed:.2?}",
            sol.status,
            sol.iterations,
            ratio - 1.0,
            last.reduced_cost
        ));
    }
    ok &= iterations[0] < iterations[2];
    check(ok, notes.join("; "))
}

fn illuminance_invariant() -> Outcome {
    let mut worst_low = f64::INFINITY;
    let mut worst_high = f64::NEG_INFINITY;
    let mut sets = 0;
    for seed in 0..5u64 {
        let net = default_network(30, 20e6, seed, ConfigKind::A, 3.0);
        let sol = column_generation(&net, &CgOptions::default()).map_err(|e| e.to_string())?;
        for q in sol.scheduled() {
            let c = &sol.columns[q];
            for e in net.illuminance(&c.dc_power, &c.links) {
                worst_low = worst_low.min(e);
                worst_high = worst_high.max(e);
            }
            sets += 1;
        }
    }
    let mut fractions = Vec::new();
    for seed in 0..10u64 {
        let net = default_network(30, 20e6, seed, ConfigKind::A, 3.0);
        let vico = vico_random_schedule(&net, seed, Lighting::Uniform).map_err(|e| e.to_string())?;
        fractions.push(export_heatmap(&net, &vico.protocol, Lighting::Uniform).violation_fraction);
    }
    let frac = mean(&fractions);
    check(
        worst_low >= 300.0 - 1e-3 && worst_high <= 500.0 + 1e-3 && sets > 0 && frac > 0.30,
        format!(
            "{sets} scheduled sets span [{worst_low:.4}, {worst_high:.4}] lux; unconstrained random schedule violates {:.1}% of the grid",
            100.0 * frac
        ),
    )
}

fn reality_dominance() -> Outcome {
    let mut nets: Vec<Network> = (0..20u64).map(common::tiny_network).collect();
    for seed in 0..4u64 {
        nets.push(default_network(30, 20e6, seed, ConfigKind::A, 6.0));
        nets.push(default_network(20, 20e6, seed, ConfigKind::B, 3.0));
    }
    let mut compared = 0;
    let mut singleton_only = 0;
    let mut worst_drop: f64 = 0.0;
    let mut worst_singleton: f64 = 0.0;
    for net in &nets {
        let sol = column_generation(net, &CgOptions::with_epsilon(1e-14)).map_err(|e| e.to_string())?;
        if !sol.is_feasible() {
            continue;
        }
        let real = reality_check(net, &sol).map_err(|e| e.to_string())?;
        if !real.is_feasible() {
            continue;
        }
        compared += 1;
        worst_drop = worst_drop.max(sol.power() - real.power());
        if sol.scheduled().all(|q| sol.columns[q].links.len() == 1) {
            singleton_only += 1;
            worst_singleton = worst_singleton.max((real.power() - sol.power()).abs());
        }
    }
    check(
        compared > 0 && singleton_only > 0 && worst_drop <= 1e-9 && worst_singleton <= 1e-9,
        format!(
            "{compared} feasible instances, max protocol-minus-reality {worst_drop:.2e} W; {singleton_only} singleton-only, max difference {worst_singleton:.2e} W"
        ),
    )
}

fn sir_sweep() -> Outcome {
    let mut cfg = ScenarioConfig::reference_room(30, 20e6, 0);
    cfg.config_kind = ConfigKind::A;
    let s = Scenario::from_config(&cfg).map_err(|e| e.to_string())?;
    let thresholds: Vec<f64> = (2..=12).map(|i| i as f64 * 0.5).collect();
    let sweep = sweep_sir(&s, &thresholds, 0.01).map_err(|e| e.to_string())?;
    let monotone = sweep
        .rows
        .windows(2)
        .all(|w| w[0].protocol_feasible || !w[1].protocol_feasible);
    let upper_ok = sweep.sir_upper.is_some_and(|u| (2.0..=4.0).contains(&u));
    let lower_ok = sweep.sir_lower.is_some_and(|l| (1.0..=3.0).contains(&l));
    let ordered = matches!((sweep.sir_lower, sweep.sir_upper), (Some(l), Some(u)) if l <= u);
    let table: String = sweep
        .rows
        .iter()
        .map(|r| format!("{}:{}{}", r.sir_threshold, r.protocol_feasible as u8, r.reality_feasible as u8))
        .collect::<Vec<_>>()
        .join(" ");
    check(
        monotone && upper_ok && lower_ok && ordered,
        format!(
            "protocol monotone {monotone}, SIR_U {:?} (want [2,4]), SIR_L {:?} (want [1,3]); table {table}",
            sweep.sir_upper, sweep.sir_lower
        ),
    )
}

fn baseline_dominance() -> Outcome {
    let mut cg = Vec::new();
    let mut vico = Vec::new();
    let mut mwis = Vec::new();
    let mut infeasible = 0;
    for seed in 0..10u64 {
        let net = default_network(35, 5e6, seed, ConfigKind::A, 3.0);
        let runs = [Algorithm::Cg, Algorithm::Vico, Algorithm::Mwis]
            .map(|a| run_algorithm(&net, a, 0.01, seed).map_err(|e| format!("{a} seed {seed}: {e}")));
        let [c, v, m] = runs;
        let (c, v, m) = (c?, v?, m?);
        infeasible += [&c, &v, &m].iter().filter(|r| !r.reality.is_feasible()).count();
        cg.push(c.reality.power());
        vico.push(v.reality.power());
        mwis.push(m.reality.power());
    }
    let (c, v, m) = (mean(&cg), mean(&vico), mean(&mwis));
    let saving = 1.0 - c / v;
    check(
        infeasible == 0 && c <= v && c <= m && saving >= 0.40,
        format!(
            "mean power cg {c:.3} W, vico {v:.3} W, mwis {m:.3} W; saving vs vico {:.1}%; infeasible runs {infeasible}",
            100.0 * saving
        ),
    )
}

fn configuration_ordering() -> Outcome {
    let mut power = [Vec::new(), Vec::new(), Vec::new()];
    let mut infeasible = 0;
    for seed in 0..10u64 {
        for (i, kind) in [ConfigKind::A, ConfigKind::B, ConfigKind::C].into_iter().enumerate() {
            let net = default_network(20, 20e6, seed, kind, 3.0);
            let run = run_algorithm(&net, Algorithm::Cg, 0.01, seed).map_err(|e| e.to_string())?;
            if !run.reality.is_feasible() {
                infeasible += 1;
            }
            power[i].push(run.reality.power());
        }
    }
    let [a, b, c] = power.map(|p| mean(&p));
    check(
        infeasible == 0 && a >= 1.5 * b && (b - c).abs() <= 0.25 * b,
        format!(
            "mean power A {a:.3} W, B {b:.3} W, C {c:.3} W; A/B {:.2}, |B-C|/B {:.1}%; infeasible runs {infeasible}",
            a / b,
            100.0 * (b - c).abs() / b
        ),
    )
}

fn unit_formulas() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    if lambertian_order(60.0) != Ok(1.0) {
        failures.push("lambertian_order(60) != 1".to_string());
    }
    for (deg, want) in [(70.0, 0.6461), (30.0, 4.819)] {
        let ml = lambertian_order(deg).unwrap();
        if (ml - want).abs() > 5e-4 * want {
            failures.push(format!("lambertian_order({deg}) = {ml}"));
        }
    }
    let rx = Receiver {
        area: 1e-4,
        fov_half: 60.0,
        filter_gain: 1.0,
        lens_index: 1.5,
        responsivity: 0.54,
        orientation_policy: OrientationPolicy::FaceUp,
    };
    let below = Vec3::new(0.0, 0.0, 0.8);
    let first_order = BeamPose::new(Vec3::new(0.0, 0.0, 3.0), Vec3::DOWN, 60.0).unwrap();
    let h = channel_gain(&first_order, &rx, below, Vec3::UP);
    let h_hand = 2.0 * 1e-4 / (2.0 * std::f64::consts::PI * 4.84) * (2.25 / 0.75);
    if (h - h_hand).abs() > 1e-12 * h_hand || (h - 1.97e-5).abs() > 0.01e-5 {
        failures.push(format!("H = {h}"));
    }
    let wide = BeamPose::new(Vec3::new(0.0, 0.0, 3.0), Vec3::DOWN, 70.0).unwrap();
    let g = illum_gain(&wide, below);
    if (g - 0.0541).abs() > 1e-4 {
        failures.push(format!("g = {g}"));
    }
    let c = protocol_capacity(1e8, 0.54, 1.624e-5, 0.1, 4.7e-14);
    if (c - 4.1e8).abs() > 0.05e8 {
        failures.push(format!("capacity = {c}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let (hh, p, n) = (rng.gen_range(1e-7..1e-4), rng.gen_range(0.01..1.0), rng.gen_range(1e-15..1e-12));
        if physical_capacity(1e8, 0.54, hh, p, 0.0, n) != protocol_capacity(1e8, 0.54, hh, p, n) {
            failures.push("P_I = 0 reduction".into());
            break;
        }
        let dir = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), -2.2);
        let t = rng.gen_range(0.5..2.0);
        let h1 = channel_gain(&wide, &rx, wide.origin + dir * t, Vec3::UP);
        let h2 = channel_gain(&wide, &rx, wide.origin + dir * (2.0 * t), Vec3::UP);
        if (h2 - h1 / 4.0).abs() > 1e-12 * h1 {
            failures.push(format!("inverse square: {h1} vs {h2}"));
            break;
        }
    }
    let s = Scenario::from_config(&ScenarioConfig::reference_room(2, 5e6, 1)).unwrap();
    let n = s.aps.len();
    for _ in 0..20 {
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..6.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..6.0)).collect();
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (fa, fb, fab) = (
            illuminance_field(&s, &a, &[]),
            illuminance_field(&s, &b, &[]),
            illuminance_field(&s, &ab, &[]),
        );
        if fab.iter().zip(fa.iter().zip(&fb)).any(|(e, (x, y))| (e - x - y).abs() > 1e-9 * e.abs()) {
            failures.push("illuminance linearity".into());
            break;
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(5) {
        failures.push(format!("took {elapsed:.2?}"));
    }
    if failures.is_empty() {
        Ok(format!("closed forms, reduction, inverse square and linearity hold ({elapsed:.2?})"))
    } else {
        Err(failures.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("exhaustive-oracle equivalence", exhaustive_oracle),
        ("epsilon-bound certificate", epsilon_certificate),
        ("illuminance invariant", illuminance_invariant),
        ("reality-check dominance", reality_dominance),
        ("SIR sweep structure", sir_sweep),
        ("baseline dominance", baseline_dominance),
        ("configuration ordering", configuration_ordering),
        ("unit-level formulas", unit_formulas),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let tag = if outcome.is_ok() { "PASS" } else { "FAIL" };
        let detail = outcome.unwrap_or_else(|e| {
            failed += 1;
            e
        });
        println!("criterion {} {tag} {name} [{:.1?}]: {detail}", i + 1, start.elapsed());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
