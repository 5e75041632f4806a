//! Column generation over independent sets with an ε-bounded stopping
//! rule, and the SINR reality check of the resulting schedule.

mod pricing;
mod reality;
mod rmp;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use pricing::{reduced_cost, solve_pricing, Pricing};
pub use reality::{physical_rates, reality_check};
pub use rmp::{solve_rmp, RmpSolution};

use crate::conflict::is_independent;
use crate::network::{DcCut, Network};
use crate::tolerances::{ILLUMINANCE, OMEGA, REDUCED_COST, SLACK};
use crate::{Error, Result};

/// One independent set with its optimal DC powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    /// Active link indices, ascending.
    pub links: Vec<usize>,
    /// Optical DC power per AP, W.
    pub dc_power: Vec<f64>,
    pub p_ac_electrical: f64,
    pub p_dc_electrical: f64,
    /// Rate delivered to each terminal while this set is active, bits/s.
    pub rates: Vec<f64>,
}

impl Column {
    /// Builds the column for `active`, or `None` when no DC powers keep the
    /// room in range.
    pub fn build(net: &Network, mut active: Vec<usize>) -> Result<Option<Column>> {
        active.sort_unstable();
        active.dedup();
        let Some(plan) = net.optimize_dc(&active)? else {
            return Ok(None);
        };
        Ok(Some(Column::with_dc(net, active, plan.dc_power)))
    }

    /// Column for `active` with DC powers chosen by the caller.
    pub fn with_dc(net: &Network, active: Vec<usize>, dc_power: Vec<f64>) -> Column {
        let s = &net.scenario;
        let links = net.links();
        let mut rates = vec![0.0; s.uts.len()];
        let mut p_ac = 0.0;
        for &l in &active {
            let link = &links[l];
            let chip = &s.aps[link.ap].chips[link.chip];
            p_ac += chip.p_ac_avg / chip.eta_ac;
            rates[link.ut] += link.capacity_protocol;
        }
        Column {
            links: active,
            p_dc_electrical: crate::network::dc_electrical(s, &dc_power),
            dc_power,
            p_ac_electrical: p_ac,
            rates,
        }
    }

    /// Electrical power while this set is active, W.
    pub fn cost(&self) -> f64 {
        self.p_ac_electrical + self.p_dc_electrical
    }

    pub fn schedule(&self, n_links: usize) -> Vec<bool> {
        let mut x = vec![false; n_links];
        for &l in &self.links {
            x[l] = true;
        }
        x
    }
}

/// Re-checks independence, per-AP optical power and the illuminance range.
pub fn validate_column(net: &Network, col: &Column) -> bool {
    let s = &net.scenario;
    let links = net.links();
    if !is_independent(&col.schedule(links.len()), &net.graph, s) {
        return false;
    }
    let mut load = col.dc_power.clone();
    for &l in &col.links {
        let link = &links[l];
        load[link.ap] += s.aps[link.ap].chips[link.chip].p_ac_pp;
    }
    let within_cap = s
        .aps
        .iter()
        .zip(&load)
        .all(|(a, &p)| p <= a.chips[0].p_max + 1e-9);
    within_cap && net.illuminance_violation(&col.dc_power, &col.links) <= ILLUMINANCE
}

#[derive(Debug, Clone)]
pub struct CgOptions {
    pub epsilon: f64,
    pub max_iterations: usize,
    pub pricing_time_budget: Option<Duration>,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            max_iterations: 500,
            pricing_time_budget: None,
        }
    }
}

impl CgOptions {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CgStatus {
    /// No column with negative reduced cost remains.
    Optimal,
    /// Stopped with `z_upper / z_lower ≤ 1 + ε`.
    EpsilonBounded,
    /// Demands cannot be met within one time unit.
    Infeasible,
    IterationLimit,
    /// Pricing returned a column already in the pool with negative reduced cost.
    NumericalTrouble,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub z_upper: f64,
    pub z_lower: f64,
    pub reduced_cost: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CgSolution {
    pub columns: Vec<Column>,
    pub omega: Vec<f64>,
    /// Unmet demand per terminal, Mbps.
    pub slack: Vec<f64>,
    pub z_upper: f64,
    pub z_lower: f64,
    pub p_illumi_min: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub status: CgStatus,
    /// Demand duals, W per Mbps.
    pub lambda: Vec<f64>,
    pub mu: f64,
    pub log: Vec<IterationRecord>,
    pub wall_ms: f64,
}

impl CgSolution {
    pub fn is_feasible(&self) -> bool {
        !matches!(self.status, CgStatus::Infeasible)
            && self.slack.iter().sum::<f64>() <= SLACK
    }

    /// Power above lighting-only operation, W.
    pub fn power(&self) -> f64 {
        self.z_upper - self.p_illumi_min
    }

    /// Indices of columns with a positive time fraction.
    pub fn scheduled(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.columns.len()).filter(|&q| self.omega[q] > OMEGA)
    }
}

/// Singleton columns, one per candidate link; links whose singleton
/// cannot be lit within range are dropped.
pub fn initial_columns(net: &Network) -> Result<Vec<Column>> {
    let plans = crate::par::map_indexed(net.links().len(), |l| net.optimize_dc(&[l]));
    let mut out = Vec::new();
    for (l, plan) in plans.into_iter().enumerate() {
        match plan? {
            Some(plan) => {
                net.cuts.lock().expect("cut pool poisoned").push(DcCut::at(&[l], &plan));
                out.push(Column::with_dc(net, vec![l], plan.dc_power));
            }
            None => log::warn!("link {l} cannot be scheduled alone; dropped"),
        }
    }
    if out.is_empty() && !net.links().is_empty() {
        return Err(Error::NoFeasibleColumn);
    }
    Ok(out)
}

/// Alternates master and pricing problems until no improving column
/// exists or the upper and lower bounds are within a factor `1 + ε`.
pub fn column_generation(net: &Network, opts: &CgOptions) -> Result<CgSolution> {
    if !(0.0..1.0).contains(&opts.epsilon) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {} outside [0, 1)",
            opts.epsilon
        )));
    }
    let start = Instant::now();
    let s = &net.scenario;
    let demands = s.demands();
    let p_min = net.p_illumi_min;
    let tol = REDUCED_COST * (1.0 + p_min);

    let mut columns = initial_columns(net)?;
    let mut seen: HashSet<Vec<usize>> = columns.iter().map(|c| c.links.clone()).collect();
    let mut z_lower = f64::NEG_INFINITY;
    let mut log = Vec::new();
    let mut iteration = 0;
    loop {
        iteration += 1;
        let rmp = solve_rmp(&columns, &demands, p_min)?;
        let price = solve_pricing(net, &rmp.lambda, rmp.mu, opts.pricing_time_budget)?;
        z_lower = z_lower.max(rmp.z + price.bound.min(0.0));
        log.push(IterationRecord {
            iteration,
            z_upper: rmp.z,
            z_lower,
            reduced_cost: price.reduced_cost,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        log::debug!(
            "iteration {iteration}: z_u {:.6} z_l {:.6} c_r {:.3e}",
            rmp.z,
            z_lower,
            price.reduced_cost
        );
        let unmet = rmp.total_slack() > SLACK;
        let status = if price.bound >= -tol {
            Some(if unmet { CgStatus::Infeasible } else { CgStatus::Optimal })
        } else if !unmet && z_lower > 0.0 && rmp.z / z_lower <= 1.0 + opts.epsilon {
            Some(CgStatus::EpsilonBounded)
        } else if iteration >= opts.max_iterations {
            Some(if unmet { CgStatus::Infeasible } else { CgStatus::IterationLimit })
        } else {
            None
        };
        let next = match (status, price.column) {
            (Some(_), _) => None,
            (None, Some(col)) if price.reduced_cost < -tol && !seen.contains(&col.links) => {
                Some(col)
            }
            (None, Some(_)) | (None, None) => {
                log::warn!(
                    "pricing returned no new column at reduced cost {:.3e} (bound {:.3e})",
                    price.reduced_cost,
                    price.bound
                );
                None
            }
        };
        match next {
            Some(col) => {
                seen.insert(col.links.clone());
                columns.push(col);
            }
            None => {
                let status = status.unwrap_or(CgStatus::NumericalTrouble);
                return Ok(CgSolution {
                    columns,
                    omega: rmp.omega,
                    slack: rmp.slack,
                    z_upper: rmp.z,
                    z_lower,
                    p_illumi_min: p_min,
                    epsilon: opts.epsilon,
                    iterations: iteration,
                    status,
                    lambda: rmp.lambda,
                    mu: rmp.mu,
                    log,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                });
            }
        }
    }
}
