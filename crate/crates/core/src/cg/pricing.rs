//! Pricing problem: the independent set with the most negative reduced
//! cost, together with its optimal DC powers.
//!
//! The optimal DC cost of a schedule is an LP value that is convex in the
//! link indicators, so the problem is solved by outer approximation: a
//! master program over the binary indicators and one variable `θ` bounded
//! below by linear cuts of the DC cost, refined at each master solution
//! until the cut is tight there.

use std::time::Duration;

use vlc_lp::{solve_milp, LinearProgram, MilpOptions, MilpStatus, MixedIntegerProgram, Relation};

use super::rmp::MBPS;
use super::Column;
use crate::network::{DcCut, Network};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Pricing {
    /// Best schedule found; `None` when transmitting nothing is best.
    pub column: Option<Column>,
    /// Reduced cost of `column` (of the empty schedule when `None`).
    pub reduced_cost: f64,
    /// Proven lower bound on the minimum reduced cost.
    pub bound: f64,
    /// Master programs solved.
    pub rounds: usize,
}

/// Reduced cost of a column under demand duals `lambda` (W/Mbps) and
/// time-budget dual `mu`.
pub fn reduced_cost(col: &Column, lambda: &[f64], mu: f64, p_min: f64) -> f64 {
    let value: f64 = col.rates.iter().zip(lambda).map(|(r, l)| r / MBPS * l).sum();
    col.cost() - p_min - value - mu
}

/// Absolute slack allowed between `θ` and the true DC cost at convergence.
fn cut_tol(value: f64) -> f64 {
    1e-9 * (1.0 + value.abs())
}

pub fn solve_pricing(
    net: &Network,
    lambda: &[f64],
    mu: f64,
    time_budget: Option<Duration>,
) -> Result<Pricing> {
    let s = &net.scenario;
    let links = net.links();
    let n = links.len();
    let p_min = net.p_illumi_min;
    let cliques = net.graph.clique_cover();
    let ac_cost: Vec<f64> = links
        .iter()
        .map(|l| {
            let chip = &s.aps[l.ap].chips[l.chip];
            chip.p_ac_avg / chip.eta_ac - lambda[l.ut] * l.capacity_protocol / MBPS
        })
        .collect();

    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut lp = LinearProgram::new();
        for &c in &ac_cost {
            lp.add_var(c, 0.0, 1.0);
        }
        let theta = lp.add_var(1.0, 0.0, f64::INFINITY);
        for c in &cliques {
            lp.add_row(c.iter().map(|&l| (l, 1.0)).collect(), Relation::Le, 1.0);
        }
        for cut in net.cuts.lock().expect("cut pool poisoned").iter() {
            let mut coeffs: Vec<(usize, f64)> = cut
                .gradient
                .iter()
                .enumerate()
                .filter(|(_, g)| **g != 0.0)
                .map(|(l, g)| (l, -g))
                .collect();
            coeffs.push((theta, 1.0));
            lp.add_row(coeffs, Relation::Ge, cut.constant);
        }
        for set in net.unlit.lock().expect("no-good pool poisoned").iter() {
            let coeffs = set.iter().map(|&l| (l, 1.0)).collect();
            lp.add_row(coeffs, Relation::Le, set.len() as f64 - 1.0);
        }
        let mut integer = vec![true; n];
        integer.push(false);
        let mut hint = vec![0.0; n];
        hint.push(p_min);
        let opts = MilpOptions {
            time_budget,
            incumbent_hint: Some(hint),
            ..MilpOptions::default()
        };
        let sol = solve_milp(&MixedIntegerProgram::new(lp, integer), &opts)?;
        let xs = match (sol.status, sol.x) {
            (MilpStatus::Optimal | MilpStatus::BudgetExhausted, Some(v)) => v,
            (status, _) => {
                return Err(Error::Numerical(format!("pricing master ended {status:?}")))
            }
        };
        let active: Vec<usize> = (0..n).filter(|&l| xs[l] > 0.5).collect();
        let Some(plan) = net.optimize_dc(&active)? else {
            net.unlit.lock().expect("no-good pool poisoned").push(active);
            continue;
        };
        if plan.electrical > xs[theta] + cut_tol(plan.electrical) {
            net.cuts
                .lock()
                .expect("cut pool poisoned")
                .push(DcCut::at(&active, &plan));
            continue;
        }
        let bound = sol.best_bound - p_min - mu;
        let (column, rc) = if active.is_empty() {
            (None, plan.electrical - p_min - mu)
        } else {
            let col = Column::with_dc(net, active, plan.dc_power);
            let rc = reduced_cost(&col, lambda, mu, p_min);
            (Some(col), rc)
        };
        return Ok(Pricing {
            column,
            reduced_cost: rc,
            bound: bound.min(rc),
            rounds,
        });
    }
}
