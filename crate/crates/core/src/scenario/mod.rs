//! Problem instances: room geometry, access points, user terminals,
//! channels, illuminance requirements and physical constants.

mod config;
mod links;

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use config::{
    ChannelConfig, ChipConfig, ConstantsConfig, GridConfig, IllumConfig, ReceiverConfig,
    ScenarioConfig, UtConfig,
};
pub use links::{build_candidate_links, Link};

use crate::geometry::Vec3;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse scenario config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario: `{field}` violates {rule}")]
    Invalid { field: String, rule: String },
}

fn invalid(field: impl Into<String>, rule: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        rule: rule.into(),
    }
}

/// Light-source configuration of every AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum ConfigKind {
    /// Fixed vertical beam; AC and DC share the wide beam.
    #[default]
    #[serde(alias = "a")]
    A,
    /// Mechanically steered narrow AC beam aimed at the receiver.
    #[serde(alias = "b")]
    B,
    /// One wide central chip plus `n × n` fixed narrow peripheral chips.
    #[serde(alias = "c")]
    C,
}

impl std::fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConfigKind::A => "A",
            ConfigKind::B => "B",
            ConfigKind::C => "C",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ConfigKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a" | "A" => Ok(ConfigKind::A),
            "b" | "B" => Ok(ConfigKind::B),
            "c" | "C" => Ok(ConfigKind::C),
            other => Err(format!("unknown light configuration `{other}` (expected a, b or c)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChipRole {
    Central,
    Peripheral,
    Sole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chip {
    pub role: ChipRole,
    /// Fixed beam axis. Steered AC beams of configuration B ignore it.
    pub beam_direction: Vec3,
    pub theta_half_ac: f64,
    pub theta_half_dc: f64,
    pub p_max: f64,
    pub p_ac_pp: f64,
    pub p_ac_avg: f64,
    pub eta_ac: f64,
    pub eta_dc: f64,
}

impl Chip {
    /// Where the beam axis meets the plane `z = plane_z`.
    pub fn coverage_center(&self, origin: Vec3, plane_z: f64) -> Option<Vec3> {
        let d = self.beam_direction;
        if d.z >= 0.0 {
            return None;
        }
        let t = (plane_z - origin.z) / d.z;
        Some(origin + d * t)
    }

    /// Carries unmodulated illumination power.
    pub fn provides_dc(&self) -> bool {
        matches!(self.role, ChipRole::Sole | ChipRole::Central)
    }

    /// Can be modulated to carry data.
    pub fn transmits(&self) -> bool {
        matches!(self.role, ChipRole::Sole | ChipRole::Peripheral)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessPoint {
    pub position: Vec3,
    pub chips: Vec<Chip>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrientationPolicy {
    FaceUp,
    FaceServingTx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub area: f64,
    /// Field-of-view semi-angle, degrees.
    pub fov_half: f64,
    pub filter_gain: f64,
    pub lens_index: f64,
    pub responsivity: f64,
    pub orientation_policy: OrientationPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTerminal {
    pub position: Vec3,
    pub receivers: Vec<Receiver>,
    pub demand_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub id: u32,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlluminanceGrid {
    /// Sample points on the desk plane.
    pub positions: Vec<Vec3>,
    pub e_lower: f64,
    pub e_upper: f64,
    pub e_ambient: Vec<f64>,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Receiver noise variance, A².
    pub noise_variance: f64,
    /// Luminous efficacy, lm per optical W.
    pub luminosity_efficacy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub room_size: Vec3,
    pub desk_height: f64,
    pub aps: Vec<AccessPoint>,
    pub uts: Vec<UserTerminal>,
    pub channels: Vec<Channel>,
    pub illum_grid: IlluminanceGrid,
    pub constants: PhysicalConstants,
    pub config_kind: ConfigKind,
    pub rng_seed: u64,
    pub association_k: usize,
    pub sir_threshold: f64,
    /// Side of the square region served by one AP.
    pub cell_size: f64,
}

/// Reads, expands and validates a JSON scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let cfg = load_config(path)?;
    Scenario::from_config(&cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

fn point_from(field: &str, v: &[f64], default_z: f64) -> Result<Vec3, ScenarioError> {
    match *v {
        [x, y] => Ok(Vec3::new(x, y, default_z)),
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(invalid(field, "a position has 2 or 3 coordinates")),
    }
}

fn build_chips(kind: ConfigKind, c: &ChipConfig, ap: Vec3, cell: f64, desk: f64) -> Vec<Chip> {
    let base = |role, dir, ac, dc| Chip {
        role,
        beam_direction: dir,
        theta_half_ac: ac,
        theta_half_dc: dc,
        p_max: c.p_max,
        p_ac_pp: c.p_ac_pp,
        p_ac_avg: c.p_ac_avg,
        eta_ac: c.eta_ac,
        eta_dc: c.eta_dc,
    };
    match kind {
        ConfigKind::A => vec![base(
            ChipRole::Sole,
            Vec3::DOWN,
            c.theta_wide_deg,
            c.theta_wide_deg,
        )],
        ConfigKind::B => vec![base(
            ChipRole::Sole,
            Vec3::DOWN,
            c.theta_narrow_deg,
            c.theta_wide_deg,
        )],
        ConfigKind::C => {
            let n = c.peripheral_n;
            let mut chips = vec![base(
                ChipRole::Central,
                Vec3::DOWN,
                c.theta_wide_deg,
                c.theta_wide_deg,
            )];
            let sub = cell / n as f64;
            for iy in 0..n {
                for ix in 0..n {
                    let target = Vec3::new(
                        ap.x - cell / 2.0 + (ix as f64 + 0.5) * sub,
                        ap.y - cell / 2.0 + (iy as f64 + 0.5) * sub,
                        desk,
                    );
                    let dir = (target - ap).normalized().unwrap_or(Vec3::DOWN);
                    chips.push(base(
                        ChipRole::Peripheral,
                        dir,
                        c.theta_narrow_deg,
                        c.theta_narrow_deg,
                    ));
                }
            }
            chips
        }
    }
}

impl Scenario {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Scenario, ScenarioError> {
        let [rx, ry, rz] = cfg.room;
        if !(rx > 0.0 && ry > 0.0 && rz > 0.0) {
            return Err(invalid("room", "all dimensions > 0"));
        }
        let room = Vec3::new(rx, ry, rz);

        let (ap_positions, grid_spacing) = match (&cfg.aps, &cfg.grid) {
            (Some(_), Some(_)) => return Err(invalid("aps", "give either `aps` or `grid`, not both")),
            (None, None) => return Err(invalid("aps", "one of `aps` or `grid` is required")),
            (Some(list), None) => {
                let pts = list
                    .iter()
                    .map(|p| point_from("aps", p, rz))
                    .collect::<Result<Vec<_>, _>>()?;
                (pts, None)
            }
            (None, Some(g)) => {
                if g.nx == 0 || g.ny == 0 || !(g.spacing > 0.0) {
                    return Err(invalid("grid", "nx, ny >= 1 and spacing > 0"));
                }
                let mut pts = Vec::with_capacity(g.nx * g.ny);
                for iy in 0..g.ny {
                    for ix in 0..g.nx {
                        pts.push(Vec3::new(
                            rx / 2.0 + (ix as f64 - (g.nx as f64 - 1.0) / 2.0) * g.spacing,
                            ry / 2.0 + (iy as f64 - (g.ny as f64 - 1.0) / 2.0) * g.spacing,
                            rz,
                        ));
                    }
                }
                (pts, Some(g.spacing))
            }
        };
        let cell_size = match cfg.cell_size.or(grid_spacing) {
            Some(l) if l > 0.0 => l,
            Some(_) => return Err(invalid("cell_size", "cell_size > 0")),
            None => return Err(invalid("cell_size", "required with explicit `aps`")),
        };
        let aps = ap_positions
            .into_iter()
            .map(|p| AccessPoint {
                position: p,
                chips: build_chips(cfg.config_kind, &cfg.chip, p, cell_size, cfg.desk_height),
            })
            .collect();

        let r = &cfg.receiver;
        let orientation = r.orientation.unwrap_or(match cfg.config_kind {
            ConfigKind::A => OrientationPolicy::FaceUp,
            ConfigKind::B | ConfigKind::C => OrientationPolicy::FaceServingTx,
        });
        let receiver = Receiver {
            area: r.area_m2,
            fov_half: r.fov_half_deg,
            filter_gain: r.filter_gain,
            lens_index: r.lens_index,
            responsivity: r.responsivity,
            orientation_policy: orientation,
        };
        let receivers = vec![receiver; r.count];

        let uts = match (&cfg.uts, cfg.ut_count) {
            (Some(_), Some(_)) => {
                return Err(invalid("uts", "give either `uts` or `ut_count`, not both"))
            }
            (Some(list), None) => list
                .iter()
                .map(|u| {
                    Ok(UserTerminal {
                        position: point_from("uts", &u.position, cfg.desk_height)?,
                        receivers: receivers.clone(),
                        demand_bps: u.demand_bps.unwrap_or(cfg.demand_bps),
                    })
                })
                .collect::<Result<Vec<_>, ScenarioError>>()?,
            (None, count) => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
                (0..count.unwrap_or(0))
                    .map(|_| UserTerminal {
                        position: Vec3::new(
                            rng.gen_range(0.0..rx),
                            rng.gen_range(0.0..ry),
                            cfg.desk_height,
                        ),
                        receivers: receivers.clone(),
                        demand_bps: cfg.demand_bps,
                    })
                    .collect()
            }
        };

        let il = &cfg.illum;
        if !(il.spacing > 0.0) {
            return Err(invalid("illum.spacing", "spacing > 0"));
        }
        let nx = (rx / il.spacing + 1e-9).floor() as usize + 1;
        let ny = (ry / il.spacing + 1e-9).floor() as usize + 1;
        let mut positions = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                positions.push(Vec3::new(
                    ix as f64 * il.spacing,
                    iy as f64 * il.spacing,
                    cfg.desk_height,
                ));
            }
        }
        let illum_grid = IlluminanceGrid {
            e_ambient: vec![il.ambient; positions.len()],
            positions,
            e_lower: il.lower,
            e_upper: il.upper,
            spacing: il.spacing,
        };

        let scenario = Scenario {
            room_size: room,
            desk_height: cfg.desk_height,
            aps,
            uts,
            channels: cfg
                .channels
                .iter()
                .map(|c| Channel {
                    id: c.id,
                    bandwidth_hz: c.bandwidth_hz,
                })
                .collect(),
            illum_grid,
            constants: PhysicalConstants {
                noise_variance: cfg.constants.noise_variance,
                luminosity_efficacy: cfg.constants.luminosity_efficacy,
            },
            config_kind: cfg.config_kind,
            rng_seed: cfg.rng_seed,
            association_k: cfg.association_k,
            sir_threshold: cfg.sir_threshold,
            cell_size,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    /// Checks every structural invariant of the instance.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let room = self.room_size;
        let eps = 1e-9;
        if !(self.desk_height >= 0.0 && self.desk_height < room.z) {
            return Err(invalid("desk_height", "0 <= desk_height < room height"));
        }
        if self.aps.is_empty() {
            return Err(invalid("aps", "at least one access point"));
        }
        for (i, ap) in self.aps.iter().enumerate() {
            let field = format!("aps[{i}]");
            if (ap.position.z - room.z).abs() > eps {
                return Err(invalid(field, "AP lies on the ceiling plane z = room height"));
            }
            if ap.chips.is_empty() {
                return Err(invalid(field, "at least one chip"));
            }
            if self.config_kind == ConfigKind::C {
                let n2 = ap.chips.len() - 1;
                let n = (n2 as f64).sqrt().round() as usize;
                if n * n != n2 || n == 0 || n % 2 != 0 {
                    return Err(invalid(field, "configuration C has n·n + 1 chips, n even"));
                }
            }
            for (m, c) in ap.chips.iter().enumerate() {
                let field = format!("aps[{i}].chips[{m}]");
                for t in [c.theta_half_ac, c.theta_half_dc] {
                    if !(t > 0.0 && t < 90.0) {
                        return Err(invalid(field, "0 < semi-angle < 90 degrees"));
                    }
                }
                if !(c.p_ac_avg > 0.0 && c.p_ac_avg <= c.p_ac_pp && c.p_ac_pp <= c.p_max) {
                    return Err(invalid(field, "0 < p_ac_avg <= p_ac_pp <= p_max"));
                }
                if !(c.eta_ac > 0.0 && c.eta_ac <= c.eta_dc && c.eta_dc <= 1.0) {
                    return Err(invalid(field, "0 < eta_ac <= eta_dc <= 1"));
                }
                if (c.beam_direction.norm() - 1.0).abs() > 1e-12 {
                    return Err(invalid(field, "beam direction has unit norm"));
                }
            }
        }
        for (j, ut) in self.uts.iter().enumerate() {
            let field = format!("uts[{j}]");
            let p = ut.position;
            if (p.z - self.desk_height).abs() > eps {
                return Err(invalid(field, "terminal lies on the desk plane"));
            }
            if p.x < -eps || p.x > room.x + eps || p.y < -eps || p.y > room.y + eps {
                return Err(invalid(field, "terminal lies inside the room footprint"));
            }
            if !(ut.demand_bps >= 0.0 && ut.demand_bps.is_finite()) {
                return Err(invalid(field, "demand >= 0"));
            }
            if ut.receivers.is_empty() {
                return Err(invalid(field, "at least one receiver"));
            }
            for r in &ut.receivers {
                if !(r.fov_half > 0.0 && r.fov_half <= 90.0) {
                    return Err(invalid("receiver.fov_half_deg", "0 < FOV <= 90 degrees"));
                }
                if !(r.responsivity > 0.0) {
                    return Err(invalid("receiver.responsivity", "responsivity > 0"));
                }
                if !(r.area > 0.0) {
                    return Err(invalid("receiver.area_m2", "area > 0"));
                }
            }
        }
        if self.channels.is_empty() {
            return Err(invalid("channels", "at least one channel"));
        }
        for c in &self.channels {
            if !(c.bandwidth_hz > 0.0) {
                return Err(invalid(format!("channels[{}]", c.id), "bandwidth > 0"));
            }
        }
        let g = &self.illum_grid;
        if g.e_lower > g.e_upper {
            return Err(invalid("illum", "lower <= upper"));
        }
        if g.e_ambient.len() != g.positions.len() || g.e_ambient.iter().any(|&a| a < 0.0) {
            return Err(invalid("illum.ambient", "one non-negative value per grid point"));
        }
        if !(self.constants.noise_variance > 0.0) {
            return Err(invalid("constants.noise_variance", "noise variance > 0"));
        }
        if !(self.constants.luminosity_efficacy > 0.0) {
            return Err(invalid("constants.luminosity_efficacy", "efficacy > 0"));
        }
        if self.association_k == 0 {
            return Err(invalid("association_k", "k >= 1"));
        }
        if !(self.sir_threshold >= 1.0) {
            return Err(invalid("sir_threshold", "threshold >= 1"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenario serialises");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn demands(&self) -> Vec<f64> {
        self.uts.iter().map(|u| u.demand_bps).collect()
    }
}
