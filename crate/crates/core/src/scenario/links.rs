use serde::{Deserialize, Serialize};

use super::{ConfigKind, OrientationPolicy, Scenario};
use crate::capacity::protocol_capacity;
use crate::geometry::Vec3;
use crate::optics::{self, BeamPose};

/// A candidate (AP, chip, UT, receiver, channel) assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: usize,
    pub ap: usize,
    pub chip: usize,
    pub ut: usize,
    pub rx: usize,
    /// Index into `Scenario::channels`.
    pub channel: usize,
    pub ac_pose: BeamPose,
    pub rx_position: Vec3,
    pub rx_normal: Vec3,
    pub gain: f64,
    pub capacity_protocol: f64,
}

/// Nearest `k` APs to `p`, ties broken by index.
fn nearest_aps(s: &Scenario, p: Vec3, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..s.aps.len()).collect();
    idx.sort_by(|&a, &b| {
        let da = s.aps[a].position.distance(p);
        let db = s.aps[b].position.distance(p);
        da.total_cmp(&db).then(a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Chip that serves a terminal at `p`: the sole chip, or for the
/// multi-chip source the peripheral whose coverage centre is nearest.
fn serving_chip(s: &Scenario, ap: usize, p: Vec3) -> usize {
    let a = &s.aps[ap];
    if s.config_kind != ConfigKind::C {
        return 0;
    }
    let mut best = (f64::INFINITY, 0);
    for (m, c) in a.chips.iter().enumerate().filter(|(_, c)| c.transmits()) {
        if let Some(center) = c.coverage_center(a.position, s.desk_height) {
            let d = center.horizontal_distance(p);
            if d < best.0 - 1e-12 {
                best = (d, m);
            }
        }
    }
    best.1
}

/// One link per receiver, channel and each of the `association_k` nearest
/// APs, with channel gain and protocol-model capacity filled in.
pub fn build_candidate_links(s: &Scenario) -> Vec<Link> {
    let mut links = Vec::new();
    for (j, ut) in s.uts.iter().enumerate() {
        let aps = nearest_aps(s, ut.position, s.association_k);
        for (r, rx) in ut.receivers.iter().enumerate() {
            for (b, ch) in s.channels.iter().enumerate() {
                for &i in &aps {
                    let ap = &s.aps[i];
                    let chip = serving_chip(s, i, ut.position);
                    let (ac_pose, _) = optics::beam_for_link(s.config_kind, ap, chip, ut.position)
                        .expect("validated chip layout");
                    let rx_normal = match rx.orientation_policy {
                        OrientationPolicy::FaceUp => Vec3::UP,
                        OrientationPolicy::FaceServingTx => {
                            (ap.position - ut.position).normalized().unwrap_or(Vec3::UP)
                        }
                    };
                    let gain = optics::channel_gain(&ac_pose, rx, ut.position, rx_normal);
                    let c = &ap.chips[chip];
                    links.push(Link {
                        id: links.len(),
                        ap: i,
                        chip,
                        ut: j,
                        rx: r,
                        channel: b,
                        ac_pose,
                        rx_position: ut.position,
                        rx_normal,
                        gain,
                        capacity_protocol: protocol_capacity(
                            ch.bandwidth_hz,
                            rx.responsivity,
                            gain,
                            c.p_ac_pp,
                            s.constants.noise_variance,
                        ),
                    });
                }
            }
        }
    }
    links
}
