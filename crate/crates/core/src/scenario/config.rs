//! On-disk JSON configuration. Every field except `room` has a default
//! matching the reference deployment: a 6 m × 6 m × 3 m room, a 6 × 6
//! ceiling grid at 1 m pitch, 100 MHz channel and a 300-500 lux target.

use serde::{Deserialize, Serialize};

use super::{ConfigKind, OrientationPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Room extent `[x, y, z]`, metres. The ceiling is the plane `z = room[2]`.
    pub room: [f64; 3],
    #[serde(default = "defaults::desk_height")]
    pub desk_height: f64,
    #[serde(default)]
    pub config_kind: ConfigKind,
    /// Explicit AP positions, `[x, y]` or `[x, y, z]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aps: Option<Vec<Vec<f64>>>,
    /// Grid shorthand: `nx · ny` APs centred in the room.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    /// Side of the square served by one AP; defaults to the grid spacing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell_size: Option<f64>,
    #[serde(default)]
    pub chip: ChipConfig,
    /// Explicit user terminals. When absent, `ut_count` terminals are drawn
    /// uniformly over the desk plane from `rng_seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uts: Option<Vec<UtConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ut_count: Option<usize>,
    #[serde(default)]
    pub rng_seed: u64,
    /// Demand of generated terminals and of explicit ones that omit it.
    #[serde(default = "defaults::demand_bps")]
    pub demand_bps: f64,
    #[serde(default = "defaults::channels")]
    pub channels: Vec<ChannelConfig>,
    #[serde(default)]
    pub illum: IllumConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub receiver: ReceiverConfig,
    /// Number of nearest APs each receiver links to.
    #[serde(default = "defaults::association_k")]
    pub association_k: usize,
    #[serde(default = "defaults::sir_threshold")]
    pub sir_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtConfig {
    /// `[x, y]` on the desk plane, or `[x, y, z]` with `z` equal to the desk height.
    pub position: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub id: u32,
    pub bandwidth_hz: f64,
}

/// Per-chip optical parameters shared by every AP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChipConfig {
    /// Maximum optical power of one chip, W (625 LEDs × 20 mW).
    pub p_max: f64,
    /// Peak-to-peak AC optical signal power, W.
    pub p_ac_pp: f64,
    /// Average AC optical power, W.
    pub p_ac_avg: f64,
    pub eta_ac: f64,
    pub eta_dc: f64,
    /// Semi-angle at half power of illumination beams, degrees.
    pub theta_wide_deg: f64,
    /// Semi-angle at half power of steered/peripheral data beams, degrees.
    pub theta_narrow_deg: f64,
    /// Peripheral chips per side for the multi-chip light source.
    pub peripheral_n: usize,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            p_max: 12.5,
            p_ac_pp: 0.1,
            p_ac_avg: 0.05,
            eta_ac: 0.02,
            eta_dc: 0.1,
            theta_wide_deg: 70.0,
            theta_narrow_deg: 30.0,
            peripheral_n: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IllumConfig {
    pub lower: f64,
    pub upper: f64,
    pub spacing: f64,
    /// Uniform ambient illuminance, lux.
    pub ambient: f64,
}

impl Default for IllumConfig {
    fn default() -> Self {
        Self {
            lower: 300.0,
            upper: 500.0,
            spacing: 0.25,
            ambient: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub noise_variance: f64,
    pub luminosity_efficacy: f64,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self {
            noise_variance: 4.7e-14,
            luminosity_efficacy: 300.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReceiverConfig {
    pub area_m2: f64,
    pub fov_half_deg: f64,
    pub filter_gain: f64,
    pub lens_index: f64,
    pub responsivity: f64,
    /// Receivers per terminal; all share the terminal position.
    pub count: usize,
    /// Defaults to face-up for the fixed-beam source and face-serving-AP
    /// otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orientation: Option<OrientationPolicy>,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            area_m2: 1e-4,
            fov_half_deg: 60.0,
            filter_gain: 1.0,
            lens_index: 1.5,
            responsivity: 0.54,
            count: 1,
            orientation: None,
        }
    }
}

impl ScenarioConfig {
    /// The reference deployment with `ut_count` generated terminals.
    pub fn reference_room(ut_count: usize, demand_bps: f64, rng_seed: u64) -> Self {
        Self {
            room: [6.0, 6.0, 3.0],
            desk_height: defaults::desk_height(),
            config_kind: ConfigKind::A,
            aps: None,
            grid: Some(GridConfig {
                nx: 6,
                ny: 6,
                spacing: 1.0,
            }),
            cell_size: None,
            chip: ChipConfig::default(),
            uts: None,
            ut_count: Some(ut_count),
            rng_seed,
            demand_bps,
            channels: defaults::channels(),
            illum: IllumConfig::default(),
            constants: ConstantsConfig::default(),
            receiver: ReceiverConfig::default(),
            association_k: defaults::association_k(),
            sir_threshold: defaults::sir_threshold(),
        }
    }
}

pub(crate) mod defaults {
    use super::ChannelConfig;

    pub fn desk_height() -> f64 {
        0.8
    }
    pub fn demand_bps() -> f64 {
        20e6
    }
    pub fn channels() -> Vec<ChannelConfig> {
        vec![ChannelConfig {
            id: 0,
            bandwidth_hz: 100e6,
        }]
    }
    pub fn association_k() -> usize {
        1
    }
    pub fn sir_threshold() -> f64 {
        3.0
    }
}
