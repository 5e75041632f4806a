//! SIR-threshold conflict graph over candidate links.

use std::collections::HashMap;
use std::io::{self, Write};

use thiserror::Error;

use crate::optics::channel_gain;
use crate::par;
use crate::scenario::{Link, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConflictError {
    #[error("SIR threshold {0} is below 1")]
    ThresholdBelowOne(f64),
}

/// Optical signal-to-interference ratios `(sir_ab, sir_ba)` between two
/// links. Infinite when the interferer is not seen at all, zero when the
/// link itself receives nothing.
pub fn pairwise_sir(s: &Scenario, a: &Link, b: &Link) -> (f64, f64) {
    (one_way_sir(s, a, b), one_way_sir(s, b, a))
}

fn one_way_sir(s: &Scenario, victim: &Link, other: &Link) -> f64 {
    let rx = &s.uts[victim.ut].receivers[victim.rx];
    let p_v = s.aps[victim.ap].chips[victim.chip].p_ac_pp;
    let p_o = s.aps[other.ap].chips[other.chip].p_ac_pp;
    let signal = victim.gain * p_v;
    let interference = channel_gain(&other.ac_pose, rx, victim.rx_position, victim.rx_normal) * p_o;
    if signal <= 0.0 {
        0.0
    } else if interference <= 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

#[derive(Debug, Clone)]
pub struct ConflictGraph {
    pub links: Vec<Link>,
    pub sir_threshold: f64,
    adj: Vec<Vec<bool>>,
    /// `sir[a][b]`: SIR at `a`'s receiver when `b` transmits concurrently.
    sir: Vec<Vec<f64>>,
}

/// Links that can never be active together regardless of interference:
/// one transmitter per AP at a time and one transmitter per receiver.
fn structural_conflict(a: &Link, b: &Link) -> bool {
    a.ap == b.ap || (a.ut == b.ut && a.rx == b.rx)
}

pub fn build_conflict_graph(
    s: &Scenario,
    links: Vec<Link>,
    sir_threshold: f64,
) -> Result<ConflictGraph, ConflictError> {
    if !(sir_threshold >= 1.0) {
        return Err(ConflictError::ThresholdBelowOne(sir_threshold));
    }
    let n = links.len();
    let sir = par::map_indexed(n, |a| {
        (0..n)
            .map(|b| {
                if a == b || links[a].channel != links[b].channel {
                    f64::INFINITY
                } else {
                    one_way_sir(s, &links[a], &links[b])
                }
            })
            .collect::<Vec<f64>>()
    });
    let adj = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    a != b
                        && (structural_conflict(&links[a], &links[b])
                            || sir[a][b].min(sir[b][a]) < sir_threshold)
                })
                .collect()
        })
        .collect();
    Ok(ConflictGraph {
        links,
        sir_threshold,
        adj,
        sir,
    })
}

impl ConflictGraph {
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn conflicts(&self, a: usize, b: usize) -> bool {
        self.adj[a][b]
    }

    pub fn sir(&self, victim: usize, interferer: usize) -> f64 {
        self.sir[victim][interferer]
    }

    pub fn neighbors(&self, a: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[a]
            .iter()
            .enumerate()
            .filter_map(|(b, &e)| e.then_some(b))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().flatten().filter(|&&e| e).count() / 2
    }

    /// Largest finite pairwise SIR over same-channel pairs.
    pub fn max_finite_sir(&self) -> Option<f64> {
        self.sir
            .iter()
            .flatten()
            .copied()
            .filter(|v| v.is_finite())
            .reduce(f64::max)
    }

    /// Cliques whose pairwise constraints together cover every edge.
    /// Each is grown greedily from the lowest uncovered edge, preferring
    /// lower link indices, so the cover is deterministic.
    pub fn clique_cover(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut covered = vec![vec![false; n]; n];
        let mut cliques = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if !self.adj[a][b] || covered[a][b] {
                    continue;
                }
                let mut clique = vec![a, b];
                for c in 0..n {
                    if !clique.contains(&c) && clique.iter().all(|&v| self.adj[v][c]) {
                        clique.push(c);
                    }
                }
                clique.sort_unstable();
                for &u in &clique {
                    for &v in &clique {
                        covered[u][v] = true;
                    }
                }
                cliques.push(clique);
            }
        }
        cliques
    }

    /// One line per link: `id: neighbour ids`.
    pub fn write_adjacency(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "# sir_threshold {}", self.sir_threshold)?;
        for a in 0..self.len() {
            let ns: Vec<String> = self.neighbors(a).map(|b| b.to_string()).collect();
            writeln!(w, "{a}: {}", ns.join(" "))?;
        }
        Ok(())
    }
}

/// Checks a schedule (indicator per link) against the conflict edges and
/// the per-device activity limits.
pub fn is_independent(x: &[bool], g: &ConflictGraph, s: &Scenario) -> bool {
    let active: Vec<usize> = (0..x.len()).filter(|&i| x[i]).collect();
    for (i, &a) in active.iter().enumerate() {
        if active[i + 1..].iter().any(|&b| g.conflicts(a, b)) {
            return false;
        }
    }
    let mut per_ap: HashMap<usize, usize> = HashMap::new();
    let mut per_ut: HashMap<usize, usize> = HashMap::new();
    let mut per_tx: HashMap<(usize, usize), usize> = HashMap::new();
    let mut per_rx: HashMap<(usize, usize), usize> = HashMap::new();
    for &a in &active {
        let l = &g.links[a];
        *per_ap.entry(l.ap).or_default() += 1;
        *per_ut.entry(l.ut).or_default() += 1;
        *per_tx.entry((l.ap, l.chip)).or_default() += 1;
        *per_rx.entry((l.ut, l.rx)).or_default() += 1;
    }
    // Only one chip of an AP carries data at a time.
    per_ap.values().all(|&c| c <= 1)
        && per_ut.iter().all(|(&j, &c)| c <= s.uts[j].receivers.len())
        && per_tx.values().all(|&c| c <= 1)
        && per_rx.values().all(|&c| c <= 1)
}
