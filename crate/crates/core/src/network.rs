//! A scenario together with everything the schedulers precompute from it.

use std::collections::BTreeSet;
use std::sync::Mutex;

use vlc_lp::{solve_lp, LinearProgram, LpStatus, Relation};

use crate::conflict::{build_conflict_graph, ConflictGraph};
use crate::optics::{dc_pose, illum_gain};
use crate::scenario::{build_candidate_links, Link, Scenario};
use crate::tolerances::{ILLUMINANCE, ILLUMINANCE_MARGIN};
use crate::{par, Error, Result};

/// Violated grid rows added to the pool per round.
const ROWS_PER_ROUND: usize = 16;

/// Which side of the illuminance range a grid row enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug)]
pub struct Network {
    pub scenario: Scenario,
    pub graph: ConflictGraph,
    /// `dc_lux[i][k]`: lux at grid point `k` per optical watt of AP `i`'s
    /// illumination beam.
    pub dc_lux: Vec<Vec<f64>>,
    /// `ac_lux[l][k]`: lux at grid point `k` while link `l` is active.
    pub ac_lux: Vec<Vec<f64>>,
    /// Electrical power of lighting-only operation, W.
    pub p_illumi_min: f64,
    /// Optical DC power per AP achieving `p_illumi_min`.
    pub dc_min: Vec<f64>,
    /// Grid rows known to bind somewhere; shared by every LP built here.
    rows: Mutex<BTreeSet<(usize, Side)>>,
    /// Linear under-estimators of the DC cost as a function of the link
    /// indicators, collected across pricing rounds.
    pub(crate) cuts: Mutex<Vec<DcCut>>,
    /// Link sets for which no DC powers exist.
    pub(crate) unlit: Mutex<Vec<Vec<usize>>>,
}

/// `θ ≥ constant + Σ_l gradient[l]·x_l`.
#[derive(Debug, Clone)]
pub(crate) struct DcCut {
    pub constant: f64,
    pub gradient: Vec<f64>,
}

impl DcCut {
    pub(crate) fn at(active: &[usize], plan: &DcPlan) -> DcCut {
        DcCut {
            constant: plan.electrical - active.iter().map(|&l| plan.gradient[l]).sum::<f64>(),
            gradient: plan.gradient.clone(),
        }
    }
}

/// Result of the per-schedule illumination LP.
#[derive(Debug, Clone)]
pub struct DcPlan {
    pub dc_power: Vec<f64>,
    /// Electrical DC power, W.
    pub electrical: f64,
    /// Subgradient of the optimal DC cost with respect to each link's
    /// activity indicator. The cost is convex in the indicators, so
    /// `electrical + gradient·(x − x̂)` under-estimates it everywhere.
    pub gradient: Vec<f64>,
}

impl Network {
    pub fn new(scenario: Scenario, sir_threshold: f64) -> Result<Self> {
        let links = build_candidate_links(&scenario);
        let graph = build_conflict_graph(&scenario, links, sir_threshold)?;
        Self::with_graph(scenario, graph)
    }

    pub fn with_graph(scenario: Scenario, graph: ConflictGraph) -> Result<Self> {
        let rho = scenario.constants.luminosity_efficacy;
        let grid = &scenario.illum_grid.positions;
        let dc_poses = scenario
            .aps
            .iter()
            .map(dc_pose)
            .collect::<Result<Vec<_>, _>>()?;
        let dc_lux = par::map_slice(&dc_poses, |pose| {
            grid.iter().map(|&p| rho * illum_gain(pose, p)).collect()
        });
        let ac_lux = par::map_slice(&graph.links, |l: &Link| {
            let p_avg = scenario.aps[l.ap].chips[l.chip].p_ac_avg;
            grid.iter()
                .map(|&p| rho * p_avg * illum_gain(&l.ac_pose, p))
                .collect()
        });
        let mut net = Network {
            scenario,
            graph,
            dc_lux,
            ac_lux,
            p_illumi_min: 0.0,
            dc_min: Vec::new(),
            rows: Mutex::new(BTreeSet::new()),
            cuts: Mutex::new(Vec::new()),
            unlit: Mutex::new(Vec::new()),
        };
        let plan = net.optimize_dc(&[])?.ok_or_else(|| net.illumination_failure())?;
        net.cuts.get_mut().expect("fresh mutex").push(DcCut::at(&[], &plan));
        net.p_illumi_min = plan.electrical;
        net.dc_min = plan.dc_power;
        Ok(net)
    }

    pub fn links(&self) -> &[Link] {
        &self.graph.links
    }

    fn illumination_failure(&self) -> Error {
        // Report the first point that full-power lighting cannot bring into range.
        let full: Vec<f64> = self.scenario.aps.iter().map(|a| a.chips[0].p_max).collect();
        let e = self.illuminance(&full, &[]);
        let g = &self.scenario.illum_grid;
        let point = (0..e.len())
            .find(|&k| e[k] < g.e_lower - ILLUMINANCE)
            .unwrap_or(0);
        let p = g.positions[point];
        Error::IlluminationInfeasible {
            point,
            x: p.x,
            y: p.y,
        }
    }

    /// Desk illuminance, lux, for per-AP DC powers and active links.
    pub fn illuminance(&self, dc_power: &[f64], active: &[usize]) -> Vec<f64> {
        let g = &self.scenario.illum_grid;
        (0..g.positions.len())
            .map(|k| {
                let mut e = g.e_ambient[k];
                for (i, &p) in dc_power.iter().enumerate() {
                    e += self.dc_lux[i][k] * p;
                }
                for &l in active {
                    e += self.ac_lux[l][k];
                }
                e
            })
            .collect()
    }

    /// Largest violation, lux, of the illuminance range.
    pub fn illuminance_violation(&self, dc_power: &[f64], active: &[usize]) -> f64 {
        let g = &self.scenario.illum_grid;
        self.illuminance(dc_power, active)
            .iter()
            .map(|&e| (g.e_lower - e).max(e - g.e_upper))
            .fold(0.0, f64::max)
    }

    /// Grid rows violated by more than the acceptance tolerance, worst first.
    fn violated_rows(&self, field: &[f64]) -> Vec<(f64, usize, Side)> {
        let g = &self.scenario.illum_grid;
        let mut out = Vec::new();
        for (k, &e) in field.iter().enumerate() {
            if e < g.e_lower - ILLUMINANCE {
                out.push((g.e_lower - e, k, Side::Lower));
            } else if e > g.e_upper + ILLUMINANCE {
                out.push((e - g.e_upper, k, Side::Upper));
            }
        }
        out.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        out
    }

    /// Adds the worst violated rows to the pool; false when none is new.
    pub(crate) fn learn_rows(&self, field: &[f64]) -> bool {
        let violated = self.violated_rows(field);
        let mut pool = self.rows.lock().expect("row pool poisoned");
        let mut added = 0;
        for (_, k, side) in violated {
            if pool.insert((k, side)) {
                added += 1;
                if added == ROWS_PER_ROUND {
                    break;
                }
            }
        }
        added > 0
    }

    /// Appends the pooled illuminance rows to `lp` and returns them in
    /// order. `dc_vars[i]` is AP `i`'s DC variable; `ac_terms` gives a
    /// variable per possibly-active link, and `fixed_ac` the links active
    /// for certain.
    pub(crate) fn add_illum_rows(
        &self,
        lp: &mut LinearProgram,
        dc_vars: &[usize],
        ac_terms: &[(usize, usize)],
        fixed_ac: &[usize],
    ) -> Vec<(usize, Side)> {
        let g = &self.scenario.illum_grid;
        let margin = ILLUMINANCE_MARGIN.min((g.e_upper - g.e_lower) / 4.0);
        let pool: Vec<(usize, Side)> = self
            .rows
            .lock()
            .expect("row pool poisoned")
            .iter()
            .copied()
            .collect();
        for &(k, side) in &pool {
            let mut coeffs: Vec<(usize, f64)> = dc_vars
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, self.dc_lux[i][k]))
                .filter(|&(_, c)| c > 0.0)
                .collect();
            coeffs.extend(
                ac_terms
                    .iter()
                    .map(|&(l, v)| (v, self.ac_lux[l][k]))
                    .filter(|&(_, c)| c > 0.0),
            );
            let base = g.e_ambient[k] + fixed_ac.iter().map(|&l| self.ac_lux[l][k]).sum::<f64>();
            match side {
                Side::Lower => lp.add_row(coeffs, Relation::Ge, g.e_lower + margin - base),
                Side::Upper => lp.add_row(coeffs, Relation::Le, g.e_upper - margin - base),
            };
        }
        pool
    }

    /// Cheapest DC powers keeping every grid point in range while `active`
    /// links transmit. `None` when no such powers exist.
    pub fn optimize_dc(&self, active: &[usize]) -> Result<Option<DcPlan>> {
        let s = &self.scenario;
        let links = self.links();
        let mut cap: Vec<f64> = s.aps.iter().map(|a| a.chips[0].p_max).collect();
        for &l in active {
            let link = &links[l];
            cap[link.ap] -= s.aps[link.ap].chips[link.chip].p_ac_pp;
        }
        if cap.iter().any(|&c| c < 0.0) {
            return Ok(None);
        }
        loop {
            let mut lp = LinearProgram::new();
            let vars: Vec<usize> = s
                .aps
                .iter()
                .map(|a| lp.add_var(1.0 / a.chips[0].eta_dc, 0.0, f64::INFINITY))
                .collect();
            // Caps as rows rather than bounds so that their duals are reported.
            for (&v, &c) in vars.iter().zip(&cap) {
                lp.add_row(vec![(v, 1.0)], Relation::Le, c);
            }
            let rows = self.add_illum_rows(&mut lp, &vars, &[], active);
            let sol = solve_lp(&lp)?;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Ok(None),
                other => {
                    return Err(Error::Numerical(format!("illumination LP ended {other:?}")))
                }
            }
            let dc: Vec<f64> = sol.x.iter().zip(&cap).map(|(&p, &c)| p.clamp(0.0, c)).collect();
            let field = self.illuminance(&dc, active);
            if self.violated_rows(&field).is_empty() {
                let n_ap = s.aps.len();
                let gradient = links
                    .iter()
                    .map(|l| {
                        let light: f64 = rows
                            .iter()
                            .zip(&sol.duals[n_ap..])
                            .map(|(&(k, _), y)| y * self.ac_lux[l.id][k])
                            .sum();
                        -light - sol.duals[l.ap] * s.aps[l.ap].chips[l.chip].p_ac_pp
                    })
                    .collect();
                return Ok(Some(DcPlan {
                    electrical: dc_electrical(s, &dc),
                    dc_power: dc,
                    gradient,
                }));
            }
            if !self.learn_rows(&field) {
                return Err(Error::Numerical(
                    "illumination LP violates rows it already enforces".into(),
                ));
            }
        }
    }
}

pub fn dc_electrical(s: &Scenario, dc_power: &[f64]) -> f64 {
    s.aps
        .iter()
        .zip(dc_power)
        .map(|(a, &p)| p / a.chips[0].eta_dc)
        .sum()
}
