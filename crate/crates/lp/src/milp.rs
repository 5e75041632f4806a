use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::model::{LinearProgram, LpError, LpStatus};
use crate::simplex::solve_lp;

#[derive(Debug, Clone)]
pub struct MixedIntegerProgram {
    pub lp: LinearProgram,
    pub integer: Vec<bool>,
}

impl MixedIntegerProgram {
    pub fn new(lp: LinearProgram, integer: Vec<bool>) -> Self {
        Self { lp, integer }
    }
}

#[derive(Debug, Clone)]
pub struct MilpOptions {
    pub time_budget: Option<Duration>,
    pub node_limit: usize,
    pub integrality_tol: f64,
    /// Absolute gap below which a node cannot improve the incumbent.
    pub gap_tol: f64,
    /// Optional starting incumbent; ignored unless feasible and integral.
    pub incumbent_hint: Option<Vec<f64>>,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            time_budget: None,
            node_limit: 1_000_000,
            integrality_tol: 1e-6,
            gap_tol: 1e-9,
            incumbent_hint: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Time or node budget ran out; the incumbent (if any) comes with a gap.
    BudgetExhausted,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub x: Option<Vec<f64>>,
    /// Incumbent objective, `+inf` without one.
    pub objective: f64,
    /// Proven lower bound on the optimum.
    pub best_bound: f64,
    /// LP relaxations solved, root included.
    pub nodes: usize,
}

impl MilpSolution {
    pub fn gap(&self) -> f64 {
        if self.objective.is_finite() && self.best_bound.is_finite() {
            (self.objective - self.best_bound).max(0.0)
        } else {
            f64::INFINITY
        }
    }
}

struct Node {
    bound: f64,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: invert so the lowest bound (then oldest id)
    // pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn most_fractional(x: &[f64], integer: &[bool], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, (&v, &is_int)) in x.iter().zip(integer).enumerate() {
        if !is_int {
            continue;
        }
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist <= tol {
            continue;
        }
        if best.map_or(true, |(_, d)| dist > d + 1e-12) {
            best = Some((j, dist));
        }
    }
    best.map(|(j, _)| j)
}

/// Best-first branch-and-bound over LP relaxations.
///
/// Branches on the most fractional integer variable (lowest index on ties)
/// and explores open nodes in order of their relaxation bound.
pub fn solve_milp(p: &MixedIntegerProgram, opts: &MilpOptions) -> Result<MilpSolution, LpError> {
    p.lp.validate()?;
    let n = p.lp.num_vars();
    if p.integer.len() != n {
        return Err(LpError::DimensionMismatch(format!(
            "{} integrality flags for {} variables",
            p.integer.len(),
            n
        )));
    }
    let start = Instant::now();
    let tol = opts.integrality_tol;

    let mut incumbent: Option<Vec<f64>> = None;
    let mut inc_obj = f64::INFINITY;
    if let Some(h) = &opts.incumbent_hint {
        let integral = h
            .iter()
            .zip(&p.integer)
            .all(|(v, &i)| !i || (v - v.round()).abs() <= tol);
        if h.len() == n && integral && p.lp.is_feasible(h, crate::FEASIBILITY_TOL) {
            inc_obj = p.lp.objective_at(h);
            incumbent = Some(h.clone());
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: 0,
        lower: p.lp.lower.clone(),
        upper: p.lp.upper.clone(),
    });
    let mut next_id = 1usize;
    let mut nodes = 0usize;
    let mut relaxation = p.lp.clone();
    let mut exhausted = false;

    while let Some(node) = heap.pop() {
        if node.bound >= inc_obj - opts.gap_tol {
            // Every remaining node is at least as bad.
            heap.clear();
            break;
        }
        let over_time = opts
            .time_budget
            .is_some_and(|b| start.elapsed() >= b);
        if nodes >= opts.node_limit || over_time {
            heap.push(node);
            exhausted = true;
            break;
        }
        relaxation.lower.clone_from(&node.lower);
        relaxation.upper.clone_from(&node.upper);
        let sol = solve_lp(&relaxation)?;
        nodes += 1;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                return Ok(MilpSolution {
                    status: MilpStatus::Unbounded,
                    x: None,
                    objective: f64::NEG_INFINITY,
                    best_bound: f64::NEG_INFINITY,
                    nodes,
                })
            }
            LpStatus::NumericalFailure => {
                return Ok(MilpSolution {
                    status: MilpStatus::NumericalFailure,
                    x: incumbent,
                    objective: inc_obj,
                    best_bound: f64::NEG_INFINITY,
                    nodes,
                })
            }
        }
        if sol.objective >= inc_obj - opts.gap_tol {
            continue;
        }
        match most_fractional(&sol.x, &p.integer, tol) {
            None => {
                let mut x = sol.x;
                for (v, &is_int) in x.iter_mut().zip(&p.integer) {
                    if is_int {
                        *v = v.round();
                    }
                }
                inc_obj = p.lp.objective_at(&x);
                incumbent = Some(x);
            }
            Some(j) => {
                let v = sol.x[j];
                let mut down_upper = node.upper.clone();
                down_upper[j] = v.floor();
                let mut up_lower = node.lower.clone();
                up_lower[j] = v.ceil();
                heap.push(Node {
                    bound: sol.objective,
                    id: next_id,
                    lower: node.lower.clone(),
                    upper: down_upper,
                });
                heap.push(Node {
                    bound: sol.objective,
                    id: next_id + 1,
                    lower: up_lower,
                    upper: node.upper,
                });
                next_id += 2;
            }
        }
    }

    let open_bound = heap
        .iter()
        .map(|n| n.bound)
        .fold(f64::INFINITY, f64::min);
    let best_bound = open_bound.min(inc_obj);
    let status = if exhausted {
        MilpStatus::BudgetExhausted
    } else if incumbent.is_some() {
        MilpStatus::Optimal
    } else {
        MilpStatus::Infeasible
    };
    Ok(MilpSolution {
        status,
        x: incumbent,
        objective: inc_obj,
        best_bound,
        nodes,
    })
}
