//! Lambertian line-of-sight optics: beam poses, channel gain and
//! illuminance gain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;
use crate::scenario::{AccessPoint, ChipRole, ConfigKind, Receiver, Scenario};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("semi-angle {0}° outside (0°, 90°)")]
    SemiAngle(f64),
    #[error("transmitter and receiver coincide")]
    ZeroDistance,
    #[error("chip {chip} cannot carry data in configuration {kind}")]
    NotTransmitter { chip: usize, kind: ConfigKind },
}

/// `-ln 2 / ln cos θ½` for a semi-angle at half power in degrees.
pub fn lambertian_order(theta_half_deg: f64) -> Result<f64, OpticsError> {
    if !(theta_half_deg > 0.0 && theta_half_deg < 90.0) {
        return Err(OpticsError::SemiAngle(theta_half_deg));
    }
    if theta_half_deg == 60.0 {
        // cos 60° rounds to 0.5000000000000001 in binary.
        return Ok(1.0);
    }
    Ok(-std::f64::consts::LN_2 / theta_half_deg.to_radians().cos().ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamPose {
    pub origin: Vec3,
    pub direction: Vec3,
    pub ml: f64,
}

impl BeamPose {
    pub fn new(origin: Vec3, direction: Vec3, theta_half_deg: f64) -> Result<Self, OpticsError> {
        let direction = direction.normalized().ok_or(OpticsError::ZeroDistance)?;
        Ok(Self {
            origin,
            direction,
            ml: lambertian_order(theta_half_deg)?,
        })
    }

    /// Lambertian radiant intensity pattern `(ml+1)/(2π) cos^ml θ`, zero
    /// behind the emitter.
    fn pattern(&self, cos_theta: f64) -> f64 {
        if cos_theta <= 0.0 {
            return 0.0;
        }
        (self.ml + 1.0) / (2.0 * std::f64::consts::PI) * cos_theta.powf(self.ml)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub distance: f64,
    /// Angle off the transmitter axis, radians.
    pub radiance_angle: f64,
    /// Angle off the receiver normal, radians.
    pub incidence_angle: f64,
}

pub fn link_geometry(
    tx: &BeamPose,
    rx_position: Vec3,
    rx_normal: Vec3,
) -> Result<LinkGeometry, OpticsError> {
    let v = rx_position - tx.origin;
    let distance = v.norm();
    if !(distance > 0.0) {
        return Err(OpticsError::ZeroDistance);
    }
    Ok(LinkGeometry {
        distance,
        radiance_angle: tx.direction.angle_to(v),
        incidence_angle: rx_normal.angle_to(-v),
    })
}

/// Cosines of the radiance and incidence angles plus the squared distance.
fn cosines(tx: &BeamPose, p: Vec3, normal: Vec3) -> Option<(f64, f64, f64)> {
    let v = p - tx.origin;
    let d2 = v.dot(v);
    if !(d2 > 0.0) {
        return None;
    }
    let d = d2.sqrt();
    let cos_theta = tx.direction.dot(v) / d;
    let cos_psi = -normal.dot(v) / (d * normal.norm());
    Some((cos_theta, cos_psi, d2))
}

/// DC gain of the line-of-sight path to a photodiode, including optical
/// filter and concentrator. Zero outside the field of view.
pub fn channel_gain(tx: &BeamPose, rx: &Receiver, rx_position: Vec3, rx_normal: Vec3) -> f64 {
    let Some((cos_theta, cos_psi, d2)) = cosines(tx, rx_position, rx_normal) else {
        return 0.0;
    };
    let fov = rx.fov_half.to_radians();
    if cos_psi <= 0.0 || cos_psi < fov.cos() - 1e-15 {
        return 0.0;
    }
    let concentrator = rx.lens_index.powi(2) / fov.sin().powi(2);
    tx.pattern(cos_theta) * rx.area / d2 * rx.filter_gain * concentrator * cos_psi
}

/// Illuminance gain onto a horizontal desk point, m⁻². Multiply by the
/// optical power and the luminous efficacy to obtain lux.
pub fn illum_gain(tx: &BeamPose, point: Vec3) -> f64 {
    match cosines(tx, point, Vec3::UP) {
        Some((cos_theta, cos_psi, d2)) if cos_psi > 0.0 => {
            tx.pattern(cos_theta) / d2 * cos_psi
        }
        _ => 0.0,
    }
}

/// The vertical illumination beam of an AP, carried by its first chip.
pub fn dc_pose(ap: &AccessPoint) -> Result<BeamPose, OpticsError> {
    let chip = &ap.chips[0];
    BeamPose::new(ap.position, Vec3::DOWN, chip.theta_half_dc)
}

/// AC and DC beam poses when `chip` of `ap` serves a receiver at `target`.
pub fn beam_for_link(
    kind: ConfigKind,
    ap: &AccessPoint,
    chip: usize,
    target: Vec3,
) -> Result<(BeamPose, BeamPose), OpticsError> {
    let c = &ap.chips[chip];
    let dc = dc_pose(ap)?;
    let ac = match kind {
        ConfigKind::A => BeamPose::new(ap.position, Vec3::DOWN, c.theta_half_ac)?,
        ConfigKind::B => {
            let aim = (target - ap.position)
                .normalized()
                .ok_or(OpticsError::ZeroDistance)?;
            BeamPose::new(ap.position, aim, c.theta_half_ac)?
        }
        ConfigKind::C => {
            if c.role != ChipRole::Peripheral {
                return Err(OpticsError::NotTransmitter { chip, kind });
            }
            BeamPose::new(ap.position, c.beam_direction, c.theta_half_ac)?
        }
    };
    Ok((ac, dc))
}

/// Desk illuminance, lux, from per-AP DC powers and a set of active AC
/// beams `(pose, average optical power)`, plus ambient light.
pub fn illuminance_field(s: &Scenario, dc_powers: &[f64], ac_beams: &[(BeamPose, f64)]) -> Vec<f64> {
    let rho = s.constants.luminosity_efficacy;
    let dc: Vec<BeamPose> = s
        .aps
        .iter()
        .map(|ap| dc_pose(ap).expect("validated semi-angle"))
        .collect();
    let grid = &s.illum_grid;
    crate::par::map_indexed(grid.positions.len(), |k| {
        let p = grid.positions[k];
        let mut e = grid.e_ambient[k];
        for (pose, &pw) in dc.iter().zip(dc_powers) {
            if pw != 0.0 {
                e += rho * pw * illum_gain(pose, p);
            }
        }
        for (pose, pw) in ac_beams {
            e += rho * pw * illum_gain(pose, p);
        }
        e
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rx() -> Receiver {
        Receiver {
            area: 1e-4,
            fov_half: 60.0,
            filter_gain: 1.0,
            lens_index: 1.5,
            responsivity: 0.54,
            orientation_policy: crate::scenario::OrientationPolicy::FaceUp,
        }
    }

    #[test]
    fn lambertian_orders() {
        assert_eq!(lambertian_order(60.0).unwrap(), 1.0);
        assert!((lambertian_order(70.0).unwrap() - 0.646_1).abs() < 1e-4);
        assert!((lambertian_order(30.0).unwrap() - 4.818_6).abs() < 1e-3);
        assert!(lambertian_order(0.0).is_err());
        assert!(lambertian_order(90.0).is_err());
    }

    #[test]
    fn geometry_examples() {
        let tx = BeamPose::new(Vec3::new(0.0, 0.0, 3.0), Vec3::DOWN, 70.0).unwrap();
        let g = link_geometry(&tx, Vec3::new(0.0, 0.0, 0.8), Vec3::UP).unwrap();
        assert!((g.distance - 2.2).abs() < 1e-12);
        assert!(g.radiance_angle.abs() < 1e-7 && g.incidence_angle.abs() < 1e-7);
        let g = link_geometry(&tx, Vec3::new(2.2, 0.0, 0.8), Vec3::UP).unwrap();
        let q = std::f64::consts::FRAC_PI_4;
        assert!((g.radiance_angle - q).abs() < 1e-12 && (g.incidence_angle - q).abs() < 1e-12);
        assert!((g.distance - 2.2 * 2f64.sqrt()).abs() < 1e-12);
        assert!(link_geometry(&tx, tx.origin, Vec3::UP).is_err());
    }

    #[test]
    fn gain_below_unit_order_source() {
        let tx = BeamPose::new(Vec3::new(0.0, 0.0, 3.0), Vec3::DOWN, 60.0).unwrap();
        let h = channel_gain(&tx, &rx(), Vec3::new(0.0, 0.0, 0.8), Vec3::UP);
        let expected = 2.0 * 1e-4 / (2.0 * std::f64::consts::PI * 4.84) * (2.25 / 0.75);
        assert!((h - expected).abs() < 1e-15);
        assert!((h - 1.97e-5).abs() < 1e-7);
    }

    #[test]
    fn gain_zero_outside_fov() {
        let tx = BeamPose::new(Vec3::new(0.0, 0.0, 3.0), Vec3::DOWN, 70.0).unwrap();
        // Receiver normal tilted 75° away from the transmitter.
        let a = 75f64.to_radians();
        let normal = Vec3::new(a.sin(), 0.0, a.cos());
        assert_eq!(channel_gain(&tx, &rx(), Vec3::new(0.0, 0.0, 0.8), normal), 0.0);
    }

    #[test]
    fn illuminance_gain_example() {
        let tx = BeamPose::new(Vec3::new(0.0, 0.0, 3.0), Vec3::DOWN, 70.0).unwrap();
        let g = illum_gain(&tx, Vec3::new(0.0, 0.0, 0.8));
        assert!((g - 0.0541).abs() < 1e-4);
        assert!((300.0 * 12.5 * g - 203.0).abs() < 1.0);
        // A horizontal beam grazes the desk at 90° off-axis.
        let side = BeamPose::new(Vec3::new(0.0, 0.0, 0.8), Vec3::new(1.0, 0.0, 0.0), 70.0).unwrap();
        assert_eq!(illum_gain(&side, Vec3::new(0.0, 1.0, 0.8)), 0.0);
    }

    #[test]
    fn steered_beam_points_at_target() {
        let ap = AccessPoint {
            position: Vec3::new(0.0, 0.0, 3.0),
            chips: vec![crate::scenario::Chip {
                role: ChipRole::Sole,
                beam_direction: Vec3::DOWN,
                theta_half_ac: 30.0,
                theta_half_dc: 70.0,
                p_max: 12.5,
                p_ac_pp: 0.1,
                p_ac_avg: 0.05,
                eta_ac: 0.02,
                eta_dc: 0.1,
            }],
        };
        let target = Vec3::new(1.0, 0.0, 0.8);
        let (ac, dc) = beam_for_link(ConfigKind::B, &ap, 0, target).unwrap();
        let want = Vec3::new(1.0, 0.0, -2.2).normalized().unwrap();
        assert!((ac.direction - want).norm() < 1e-12);
        assert_eq!(dc.direction, Vec3::DOWN);
        let g = link_geometry(&ac, target, Vec3::UP).unwrap();
        assert!(g.radiance_angle < 1e-9);
        let (ac, _) = beam_for_link(ConfigKind::A, &ap, 0, target).unwrap();
        assert_eq!(ac.direction, Vec3::DOWN);
        assert!((ac.ml - lambertian_order(30.0).unwrap()).abs() < 1e-15);
        assert!(matches!(
            beam_for_link(ConfigKind::C, &ap, 0, target),
            Err(OpticsError::NotTransmitter { .. })
        ));
    }
}
