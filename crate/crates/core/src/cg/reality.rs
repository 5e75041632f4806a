//! Re-evaluation of a schedule with interference treated as noise.

use super::{solve_rmp, CgSolution, CgStatus, Column};
use crate::capacity::{interference_power, physical_capacity};
use crate::network::Network;
use crate::tolerances::SLACK;
use crate::Result;

/// Per-terminal rates of `col` when all of its links transmit together.
pub fn physical_rates(net: &Network, col: &Column) -> Vec<f64> {
    let s = &net.scenario;
    let links = net.links();
    let mut rates = vec![0.0; s.uts.len()];
    for &l in &col.links {
        let link = &links[l];
        let rx = &s.uts[link.ut].receivers[link.rx];
        let p_i = interference_power(s, links, l, &col.links);
        rates[link.ut] += physical_capacity(
            s.channels[link.channel].bandwidth_hz,
            rx.responsivity,
            link.gain,
            s.aps[link.ap].chips[link.chip].p_ac_pp,
            p_i,
            s.constants.noise_variance,
        );
    }
    rates
}

/// Recomputes the rates of every scheduled column under SINR and re-solves
/// the master problem over exactly those columns. The result is
/// `Infeasible` when the demands no longer fit in one time unit.
///
/// `z_lower` is carried over from the protocol-model solution.
pub fn reality_check(net: &Network, sol: &CgSolution) -> Result<CgSolution> {
    let columns: Vec<Column> = sol
        .scheduled()
        .map(|q| {
            let mut c = sol.columns[q].clone();
            c.rates = physical_rates(net, &c);
            c
        })
        .collect();
    let rmp = solve_rmp(&columns, &net.scenario.demands(), net.p_illumi_min)?;
    let status = if rmp.total_slack() > SLACK {
        CgStatus::Infeasible
    } else {
        sol.status
    };
    Ok(CgSolution {
        columns,
        omega: rmp.omega,
        slack: rmp.slack,
        z_upper: rmp.z,
        z_lower: sol.z_lower,
        p_illumi_min: sol.p_illumi_min,
        epsilon: sol.epsilon,
        iterations: sol.iterations,
        status,
        lambda: rmp.lambda,
        mu: rmp.mu,
        log: sol.log.clone(),
        wall_ms: sol.wall_ms,
    })
}
