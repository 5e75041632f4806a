//! Restricted master problem over a fixed pool of columns.

use vlc_lp::{solve_lp, LinearProgram, LpStatus, Relation};

use super::Column;
use crate::tolerances::SLACK_COST;
use crate::{Error, Result};

/// Rates enter the LP in Mbps so its coefficients stay near unity.
pub(crate) const MBPS: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct RmpSolution {
    pub omega: Vec<f64>,
    /// Unmet demand per terminal, Mbps.
    pub slack: Vec<f64>,
    /// Objective including the lighting-only baseline, W.
    pub z: f64,
    /// Demand duals, W per Mbps, non-negative.
    pub lambda: Vec<f64>,
    /// Time-budget dual, W, non-positive.
    pub mu: f64,
}

impl RmpSolution {
    pub fn total_slack(&self) -> f64 {
        self.slack.iter().sum()
    }
}

/// `min Σ ω_q (cost_q − P_min) + P_min` subject to every terminal's rate
/// meeting its demand and `Σ ω ≤ 1`. Each demand row has a penalised
/// shortfall variable, so the LP is always feasible.
pub fn solve_rmp(columns: &[Column], demands_bps: &[f64], p_min: f64) -> Result<RmpSolution> {
    let mut lp = LinearProgram::new();
    let omega: Vec<usize> = columns
        .iter()
        .map(|c| lp.add_var(c.cost() - p_min, 0.0, f64::INFINITY))
        .collect();
    let slack: Vec<usize> = demands_bps
        .iter()
        .map(|_| lp.add_var(SLACK_COST, 0.0, f64::INFINITY))
        .collect();
    let demand_rows: Vec<usize> = demands_bps
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let mut coeffs: Vec<(usize, f64)> = columns
                .iter()
                .zip(&omega)
                .filter(|(c, _)| c.rates[j] > 0.0)
                .map(|(c, &v)| (v, c.rates[j] / MBPS))
                .collect();
            coeffs.push((slack[j], 1.0));
            lp.add_row(coeffs, Relation::Ge, r / MBPS)
        })
        .collect();
    let budget = lp.add_row(omega.iter().map(|&v| (v, 1.0)).collect(), Relation::Le, 1.0);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Numerical(format!("master LP ended {:?}", sol.status)));
    }
    Ok(RmpSolution {
        omega: omega.iter().map(|&v| sol.x[v]).collect(),
        slack: slack.iter().map(|&v| sol.x[v]).collect(),
        z: sol.objective + p_min,
        lambda: demand_rows.iter().map(|&r| sol.duals[r].max(0.0)).collect(),
        mu: sol.duals[budget].min(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(cost: f64, rates: Vec<f64>) -> Column {
        Column {
            links: vec![0],
            dc_power: vec![],
            p_ac_electrical: cost,
            p_dc_electrical: 0.0,
            rates,
        }
    }

    #[test]
    fn zero_demand_schedules_nothing() {
        let s = solve_rmp(&[col(12.0, vec![1e8])], &[0.0], 10.0).unwrap();
        assert_eq!(s.omega, vec![0.0]);
        assert!((s.z - 10.0).abs() < 1e-12);
    }

    #[test]
    fn half_time_for_double_rate() {
        let s = solve_rmp(&[col(12.0, vec![2e7])], &[1e7], 10.0).unwrap();
        assert!((s.omega[0] - 0.5).abs() < 1e-12);
        assert!((s.z - 11.0).abs() < 1e-9);
        // One extra Mbps costs 2 W over 20 Mbps.
        assert!((s.lambda[0] - 0.1).abs() < 1e-9);
        assert_eq!(s.mu, 0.0);
    }

    #[test]
    fn overload_shows_as_slack() {
        let s = solve_rmp(&[col(12.0, vec![1e7])], &[2e7], 10.0).unwrap();
        assert!((s.omega[0] - 1.0).abs() < 1e-9);
        assert!((s.total_slack() - 10.0).abs() < 1e-6);
        assert!(s.mu < 0.0);
    }
}
