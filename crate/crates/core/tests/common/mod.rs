//! Tiny seeded instances and the exhaustive independent-set oracle.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlc_core::scenario::{build_candidate_links, GridConfig, UtConfig};
use vlc_core::{is_independent, Network, Scenario, ScenarioConfig};
use vlc_lp::{solve_lp, LinearProgram, Relation};

/// 2 × 2 APs over a 2 m × 2 m room with 2 to 4 terminals and up to three
/// links each.
pub fn tiny_config(seed: u64) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cfg = ScenarioConfig::reference_room(0, 20e6, seed);
    cfg.room = [3.0, 3.0, 3.0];
    cfg.grid = Some(GridConfig {
        nx: 2,
        ny: 2,
        spacing: 1.5,
    });
    cfg.ut_count = None;
    cfg.illum.spacing = 0.5;
    cfg.illum.lower = 150.0;
    let n = rng.gen_range(2..=4);
    cfg.association_k = (12 / n).min(3);
    cfg.uts = Some(
        (0..n)
            .map(|_| UtConfig {
                position: vec![rng.gen_range(0.1..2.9), rng.gen_range(0.1..2.9)],
                demand_bps: None,
            })
            .collect(),
    );
    cfg.sir_threshold = rng.gen_range(1.0..2.5);
    cfg
}

/// Tiny instance whose demands load the network to between 60% and 160%
/// of what serving each terminal alone over its best link would take, so
/// that most instances need concurrent sets.
pub fn tiny_network(seed: u64) -> Network {
    let cfg = tiny_config(seed);
    let mut s = Scenario::from_config(&cfg).expect("tiny scenario");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let load = rng.gen_range(0.6..1.6);
    let n = s.uts.len() as f64;
    let mut best = vec![0.0f64; s.uts.len()];
    for l in build_candidate_links(&s) {
        best[l.ut] = best[l.ut].max(l.capacity_protocol);
    }
    for (u, cap) in s.uts.iter_mut().zip(best) {
        u.demand_bps = load * cap / n;
    }
    Network::new(s, cfg.sir_threshold).expect("tiny network")
}

/// One enumerated independent set with its cheapest lighting.
pub struct Enumerated {
    pub links: Vec<usize>,
    pub cost: f64,
    pub rates: Vec<f64>,
}

/// Every non-empty independent set whose illuminance range is attainable.
pub fn enumerate_sets(net: &Network) -> Vec<Enumerated> {
    let s = &net.scenario;
    let links = net.links();
    let n = links.len();
    assert!(n <= 16, "enumeration needs a tiny instance, got {n} links");
    let mut out = Vec::new();
    for mask in 1u32..(1 << n) {
        let x: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        if !is_independent(&x, &net.graph, s) {
            continue;
        }
        let active: Vec<usize> = (0..n).filter(|&i| x[i]).collect();
        let Some(plan) = net.optimize_dc(&active).expect("dc lp") else {
            continue;
        };
        let mut rates = vec![0.0; s.uts.len()];
        let mut ac = 0.0;
        for &l in &active {
            let link = &links[l];
            let chip = &s.aps[link.ap].chips[link.chip];
            ac += chip.p_ac_avg / chip.eta_ac;
            rates[link.ut] += link.capacity_protocol;
        }
        out.push(Enumerated {
            links: active,
            cost: ac + plan.electrical,
            rates,
        });
    }
    out
}

/// Optimal master-problem objective over all `sets`, `None` when the
/// demands cannot be met.
pub fn full_master(sets: &[Enumerated], demands_bps: &[f64], p_min: f64) -> Option<f64> {
    let mut lp = LinearProgram::new();
    for q in sets {
        lp.add_var(q.cost - p_min, 0.0, f64::INFINITY);
    }
    for (j, &d) in demands_bps.iter().enumerate() {
        let coeffs = sets
            .iter()
            .enumerate()
            .filter(|(_, q)| q.rates[j] > 0.0)
            .map(|(i, q)| (i, q.rates[j] / 1e6))
            .collect();
        lp.add_row(coeffs, Relation::Ge, d / 1e6);
    }
    lp.add_row((0..sets.len()).map(|i| (i, 1.0)).collect(), Relation::Le, 1.0);
    let sol = solve_lp(&lp).expect("well-formed");
    sol.is_optimal().then(|| sol.objective + p_min)
}
