//! Shannon-style link capacities under the protocol and physical
//! interference models.

use crate::optics::channel_gain;
use crate::scenario::{Link, Scenario};

/// `B · log2(1 + (γ H P_AC)² / N)`, bits/s.
pub fn protocol_capacity(bandwidth: f64, gamma: f64, gain: f64, p_ac: f64, noise: f64) -> f64 {
    physical_capacity(bandwidth, gamma, gain, p_ac, 0.0, noise)
}

/// Capacity with the interfering optical power `p_i` treated as noise:
/// `B · log2(1 + (γ H P_AC)² / ((γ P_I)² + N))`.
pub fn physical_capacity(
    bandwidth: f64,
    gamma: f64,
    gain: f64,
    p_ac: f64,
    p_i: f64,
    noise: f64,
) -> f64 {
    let signal = (gamma * gain * p_ac).powi(2);
    let denom = (gamma * p_i).powi(2) + noise;
    bandwidth * (signal / denom).ln_1p() / std::f64::consts::LN_2
}

/// Optical power at the receiver of `links[target]` from every other
/// active link on the same channel, using each interferer's own beam pose.
pub fn interference_power(s: &Scenario, links: &[Link], target: usize, active: &[usize]) -> f64 {
    let t = &links[target];
    let rx = &s.uts[t.ut].receivers[t.rx];
    active
        .iter()
        .filter(|&&b| b != target && links[b].channel == t.channel)
        .map(|&b| {
            let l = &links[b];
            let p_ac = s.aps[l.ap].chips[l.chip].p_ac_pp;
            channel_gain(&l.ac_pose, rx, t.rx_position, t.rx_normal) * p_ac
        })
        .sum()
}
