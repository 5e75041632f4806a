//! Comparison schedulers: random maximal independent sets and greedy
//! maximum-weight independent sets. Both allocate each set the time its
//! first-finishing terminal needs, then go through the same DC
//! optimisation and reality check as column generation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vlc_lp::{solve_milp, LinearProgram, MilpOptions, MilpStatus, MixedIntegerProgram, Relation};

use crate::cg::{reality_check, CgSolution, CgStatus, Column, IterationRecord};
use crate::network::Network;
use crate::tolerances::OMEGA;
use crate::{Error, Result};

/// Demand below this many bits/s counts as met.
const MET_BPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Baseline {
    Vico,
    Mwis,
}

#[derive(Debug, Clone, Serialize)]
pub struct BaselineSolution {
    pub algorithm: Baseline,
    /// Schedule as built, with protocol-model rates.
    pub protocol: CgSolution,
    pub reality: CgSolution,
}

/// How DC powers are chosen for each scheduled set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lighting {
    /// Cheapest powers that keep every grid point in range.
    Constrained,
    /// Same dimming level at every AP so that the room-average
    /// illuminance sits mid-range, ignoring the per-point bounds.
    Uniform,
}

/// Uniform-dimming DC powers for `active`.
fn uniform_dc(net: &Network, active: &[usize]) -> Vec<f64> {
    let s = &net.scenario;
    let g = &s.illum_grid;
    let n = g.positions.len() as f64;
    let target = 0.5 * (g.e_lower + g.e_upper);
    let mean_ac: f64 = active
        .iter()
        .map(|&l| net.ac_lux[l].iter().sum::<f64>() / n)
        .sum();
    let mean_amb = g.e_ambient.iter().sum::<f64>() / n;
    let per_watt: f64 = net.dc_lux.iter().map(|row| row.iter().sum::<f64>() / n).sum();
    let level = ((target - mean_ac - mean_amb) / per_watt).max(0.0);
    let links = net.links();
    s.aps
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let ac: f64 = active
                .iter()
                .filter(|&&l| links[l].ap == i)
                .map(|&l| a.chips[links[l].chip].p_ac_pp)
                .sum();
            level.min(a.chips[0].p_max - ac).max(0.0)
        })
        .collect()
}

/// Uniform-dimming DC powers with no link active.
pub fn uniform_idle_dc(net: &Network) -> Vec<f64> {
    uniform_dc(net, &[])
}

fn make_column(net: &Network, active: Vec<usize>, lighting: Lighting) -> Result<Option<Column>> {
    match lighting {
        Lighting::Constrained => Column::build(net, active),
        Lighting::Uniform => {
            let dc = uniform_dc(net, &active);
            Ok(Some(Column::with_dc(net, active, dc)))
        }
    }
}

/// Shrinks `set` from the back until its column is buildable.
fn buildable(net: &Network, mut set: Vec<usize>, lighting: Lighting) -> Result<Option<Column>> {
    while !set.is_empty() {
        if let Some(c) = make_column(net, set.clone(), lighting)? {
            return Ok(Some(c));
        }
        set.pop();
    }
    Ok(None)
}

/// Shared bookkeeping of the two greedy schedulers.
struct Greedy<'a> {
    net: &'a Network,
    remaining: Vec<f64>,
    columns: Vec<Column>,
    omega: Vec<f64>,
    log: Vec<IterationRecord>,
    start: Instant,
}

impl<'a> Greedy<'a> {
    fn new(net: &'a Network) -> Self {
        Self {
            net,
            remaining: net.scenario.demands(),
            columns: Vec::new(),
            omega: Vec::new(),
            log: Vec::new(),
            start: Instant::now(),
        }
    }

    fn time_left(&self) -> f64 {
        1.0 - self.omega.iter().sum::<f64>()
    }

    fn unmet(&self, ut: usize) -> bool {
        self.remaining[ut] > MET_BPS
    }

    /// Links whose terminal still needs data and that can carry some.
    fn useful_links(&self) -> Vec<usize> {
        self.net
            .links()
            .iter()
            .filter(|l| l.capacity_protocol > 0.0 && self.unmet(l.ut))
            .map(|l| l.id)
            .collect()
    }

    /// Runs `col` until its first unmet terminal is served.
    fn allocate(&mut self, col: Column) -> bool {
        let t = (0..self.remaining.len())
            .filter(|&j| self.unmet(j) && col.rates[j] > 0.0)
            .map(|j| self.remaining[j] / col.rates[j])
            .fold(f64::INFINITY, f64::min)
            .min(self.time_left());
        if !(t > OMEGA) || !t.is_finite() {
            return false;
        }
        for (r, rate) in self.remaining.iter_mut().zip(&col.rates) {
            *r = (*r - t * rate).max(0.0);
        }
        let p_min = self.net.p_illumi_min;
        let z = p_min
            + self
                .columns
                .iter()
                .zip(&self.omega)
                .map(|(c, w)| w * (c.cost() - p_min))
                .sum::<f64>()
            + t * (col.cost() - p_min);
        self.columns.push(col);
        self.omega.push(t);
        self.log.push(IterationRecord {
            iteration: self.columns.len(),
            z_upper: z,
            z_lower: f64::NAN,
            reduced_cost: f64::NAN,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        });
        true
    }

    fn finish(self, algorithm: Baseline) -> Result<BaselineSolution> {
        let p_min = self.net.p_illumi_min;
        let slack: Vec<f64> = self.remaining.iter().map(|r| r / 1e6).collect();
        let met = self.remaining.iter().all(|&r| r <= MET_BPS);
        let z = p_min
            + self
                .columns
                .iter()
                .zip(&self.omega)
                .map(|(c, w)| w * (c.cost() - p_min))
                .sum::<f64>();
        let protocol = CgSolution {
            iterations: self.columns.len(),
            columns: self.columns,
            omega: self.omega,
            slack,
            z_upper: z,
            z_lower: f64::NEG_INFINITY,
            p_illumi_min: p_min,
            epsilon: 0.0,
            status: if met { CgStatus::Optimal } else { CgStatus::Infeasible },
            lambda: Vec::new(),
            mu: 0.0,
            log: self.log,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        };
        let reality = reality_check(self.net, &protocol)?;
        Ok(BaselineSolution {
            algorithm,
            protocol,
            reality,
        })
    }
}

/// Random link scheduling: each round starts from a random link of an
/// unserved terminal and grows it into a maximal independent set over all
/// links in random order.
pub fn vico_random_schedule(net: &Network, seed: u64, lighting: Lighting) -> Result<BaselineSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut st = Greedy::new(net);
    let g = &net.graph;
    let mut order: Vec<usize> = (0..g.len()).collect();
    while st.time_left() > OMEGA {
        let useful = st.useful_links();
        if useful.is_empty() {
            break;
        }
        let first = useful[rng.gen_range(0..useful.len())];
        order.shuffle(&mut rng);
        let mut set = vec![first];
        for &l in &order {
            if l != first && set.iter().all(|&a| !g.conflicts(a, l)) {
                set.push(l);
            }
        }
        let Some(col) = buildable(net, set, lighting)? else {
            return Err(Error::NoFeasibleColumn);
        };
        if !st.allocate(col) {
            break;
        }
    }
    st.finish(Baseline::Vico)
}

/// Maximum-weight independent set scheduling with each link weighted by
/// its terminal's remaining demand, solved exactly per round.
pub fn mwis_schedule(net: &Network) -> Result<BaselineSolution> {
    let mut st = Greedy::new(net);
    let cliques = net.graph.clique_cover();
    let n = net.links().len();
    while st.time_left() > OMEGA {
        let useful = st.useful_links();
        if useful.is_empty() {
            break;
        }
        let mut lp = LinearProgram::new();
        let mut weight = vec![0.0; n];
        for &l in &useful {
            weight[l] = st.remaining[net.links()[l].ut] / 1e6;
        }
        for w in &weight {
            let upper = if *w > 0.0 { 1.0 } else { 0.0 };
            lp.add_var(-w, 0.0, upper);
        }
        for c in &cliques {
            lp.add_row(c.iter().map(|&l| (l, 1.0)).collect(), Relation::Le, 1.0);
        }
        let sol = solve_milp(&MixedIntegerProgram::new(lp, vec![true; n]), &MilpOptions::default())?;
        let x = match (sol.status, sol.x) {
            (MilpStatus::Optimal, Some(x)) => x,
            (status, _) => return Err(Error::Numerical(format!("MWIS ended {status:?}"))),
        };
        // Heaviest first so that shrinking drops the lightest links.
        let mut set: Vec<usize> = (0..n).filter(|&l| x[l] > 0.5).collect();
        set.sort_by(|&a, &b| weight[b].total_cmp(&weight[a]).then(a.cmp(&b)));
        let Some(col) = buildable(net, set, Lighting::Constrained)? else {
            return Err(Error::NoFeasibleColumn);
        };
        if !st.allocate(col) {
            break;
        }
    }
    st.finish(Baseline::Mwis)
}
