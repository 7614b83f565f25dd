//! Parameter sets for the sensor twin. Every default here is an assumption
//! of this model (electrode areas, CDC gain and noise are not published);
//! the pillar height, dielectric constants and the 360 Hz rate are the
//! physical device values.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SensorError;

/// CDC sampling rate [Hz].
pub const SAMPLE_RATE_HZ: f64 = 360.0;

/// Vacuum permittivity [F/m].
pub const EPS0: f64 = 8.854_187_812_8e-12;

/// Number of CDC channels: Z1..Z4, X1..X4, Y1..Y4.
pub const N_CHANNELS: usize = 12;

pub const CHANNEL_NAMES: [&str; N_CHANNELS] = [
    "Z1", "Z2", "Z3", "Z4", "X1", "X2", "X3", "X4", "Y1", "Y2", "Y3", "Y4",
];

/// One concentric ring of equally spaced pillars.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PillarRing {
    /// Ring radius [m].
    pub radius: f64,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PillarModel {
    /// Bulk Young's modulus of the silicone [Pa].
    pub youngs_modulus: f64,
    /// Undeformed pillar height [m].
    pub height: f64,
    /// Undeformed pillar radius [m].
    pub radius: f64,
    pub rings: Vec<PillarRing>,
}

impl PillarModel {
    /// Height over radius.
    pub fn aspect_ratio(&self) -> f64 {
        self.height / self.radius
    }

    /// Incompressible rubber: G = E/3.
    pub fn shear_modulus(&self) -> f64 {
        self.youngs_modulus / 3.0
    }

    pub fn count(&self) -> u32 {
        self.rings.iter().map(|r| r.count).sum()
    }

    pub fn pillar_area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }

    /// Σ r_i² over all pillars [m²].
    pub fn polar_sum(&self) -> f64 {
        self.rings
            .iter()
            .map(|r| r.count as f64 * r.radius * r.radius)
            .sum()
    }

    /// Σ y_i² over all pillars [m²]. Rings with three or more equally
    /// spaced pillars contribute exactly n·R²/2.
    pub fn planar_second_moment(&self) -> f64 {
        self.rings
            .iter()
            .map(|r| match r.count {
                0 => 0.0,
                1 => 0.0,
                // two pillars on the x axis
                2 => 0.0,
                n => n as f64 * r.radius * r.radius / 2.0,
            })
            .sum()
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        let ok = self.youngs_modulus > 0.0
            && self.height > 0.0
            && self.radius > 0.0
            && self.youngs_modulus.is_finite()
            && self.height.is_finite()
            && self.radius.is_finite()
            && self
                .rings
                .iter()
                .all(|r| r.radius >= 0.0 && r.radius.is_finite())
            && self.count() > 0;
        if ok {
            Ok(())
        } else {
            Err(SensorError::InvalidParameter(
                "pillar model needs E, h, r > 0 and at least one pillar".into(),
            ))
        }
    }
}

impl Default for PillarModel {
    /// 100 µm diameter, 127 µm tall pillars on 19 rings (0.5 mm pitch)
    /// inside the 20 mm sensing disc; modulus of a Shore 40A silicone.
    fn default() -> Self {
        let rings = (1..=19)
            .map(|k| PillarRing {
                radius: 0.5e-3 * k as f64,
                count: 17 * k,
            })
            .collect();
        Self {
            youngs_modulus: super::mechanics::shore_to_youngs(40.0)
                .expect("default hardness in range"),
            height: 127e-6,
            radius: 50e-6,
            rings,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorGeometry {
    /// Assembled electrode gap [m].
    pub nominal_gap: f64,
    /// Radius of the circle holding the four quadrant centroids [m].
    pub quadrant_radius: f64,
    /// Normal-mode electrode area per quadrant [m²].
    pub normal_area: f64,
    /// Baseline overlap area of one shear-mode electrode [m²].
    pub shear_area: f64,
    /// Comb finger pitch [m].
    pub finger_pitch: f64,
    /// Pillar area fraction of the dielectric layer.
    pub fill_fraction: f64,
    pub eps_pillar: f64,
    pub eps_air: f64,
}

impl Default for SensorGeometry {
    fn default() -> Self {
        Self {
            nominal_gap: 203e-6,
            quadrant_radius: 6e-3,
            normal_area: 50e-6,
            shear_area: 25e-6,
            finger_pitch: 300e-6,
            fill_fraction: 0.08,
            eps_pillar: 3.0,
            eps_air: 1.0,
        }
    }
}

impl SensorGeometry {
    /// Area-weighted relative permittivity of the pillar layer.
    pub fn effective_permittivity(&self) -> f64 {
        self.fill_fraction * self.eps_pillar + (1.0 - self.fill_fraction) * self.eps_air
    }

    /// Quadrant centroids (x, y) [m], quadrants 1..4 at 45°, 135°, 225°, 315°.
    pub fn quadrant_centroids(&self) -> [(f64, f64); 4] {
        let a = self.quadrant_radius * std::f64::consts::FRAC_1_SQRT_2;
        [(a, a), (-a, a), (-a, -a), (a, -a)]
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        let positive = [
            self.nominal_gap,
            self.quadrant_radius,
            self.normal_area,
            self.shear_area,
            self.finger_pitch,
            self.eps_pillar,
            self.eps_air,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SensorError::InvalidParameter(
                "geometry lengths, areas and permittivities must be positive".into(),
            ));
        }
        if !(self.fill_fraction > 0.0 && self.fill_fraction < 1.0) {
            return Err(SensorError::InvalidParameter(
                "fill_fraction must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Per-channel thermal baseline scaling
/// `1 + alpha_k (T - T0) + beta_k (T - T0)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftModel {
    /// Reference temperature T0 [°C].
    pub reference_temp: f64,
    /// Linear coefficients [1/°C].
    pub alpha: [f64; N_CHANNELS],
    /// Quadratic coefficients [1/°C²].
    pub beta: [f64; N_CHANNELS],
}

impl DriftModel {
    pub fn none(reference_temp: f64) -> Self {
        Self {
            reference_temp,
            alpha: [0.0; N_CHANNELS],
            beta: [0.0; N_CHANNELS],
        }
    }

    /// Multiplicative baseline factor for channel `k` at `temp`.
    pub fn factor(&self, k: usize, temp: f64) -> f64 {
        let dt = temp - self.reference_temp;
        1.0 + self.alpha[k] * dt + self.beta[k] * dt * dt
    }

    /// Uniform linear drift of `fraction_per_10c` (e.g. 0.02 = 2 %/10 °C).
    pub fn uniform_linear(reference_temp: f64, fraction_per_10c: f64) -> Self {
        Self {
            reference_temp,
            alpha: [fraction_per_10c / 10.0; N_CHANNELS],
            beta: [0.0; N_CHANNELS],
        }
    }
}

impl Default for DriftModel {
    /// Linear terms spread from 1.0 to 2.6 %/10 °C across channels plus a
    /// common 0.2 %/(10 °C)² curvature: 1.2–2.8 % at T0 + 10 °C.
    fn default() -> Self {
        let mut alpha = [0.0; N_CHANNELS];
        for (k, a) in alpha.iter_mut().enumerate() {
            // interleave so neighbouring channels differ
            let rank = (k * 5) % N_CHANNELS;
            *a = 0.0010 + 0.0016 * rank as f64 / (N_CHANNELS - 1) as f64;
        }
        Self {
            reference_temp: 25.0,
            alpha,
            beta: [2e-5; N_CHANNELS],
        }
    }
}

/// Capacitance-to-digital conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdcParams {
    /// Counts per femtofarad.
    pub gain: f64,
    /// Additive offset [counts].
    pub offset: f64,
    /// Gaussian noise standard deviation [counts].
    pub noise_sigma: f64,
    /// Corner frequency of an optional first-order output lag [Hz].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_corner_hz: Option<f64>,
}

impl Default for CdcParams {
    fn default() -> Self {
        Self {
            gain: 1.0,
            offset: 0.0,
            noise_sigma: 2.0,
            lag_corner_hz: None,
        }
    }
}

/// Complete sensor description, as stored in the sensor parameter file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorParams {
    #[serde(default)]
    pub pillars: PillarModel,
    #[serde(default)]
    pub geometry: SensorGeometry,
    #[serde(default)]
    pub drift: DriftModel,
    #[serde(default)]
    pub cdc: CdcParams,
}

impl SensorParams {
    pub fn validate(&self) -> Result<(), SensorError> {
        self.pillars.validate()?;
        self.geometry.validate()?;
        if !(self.cdc.gain > 0.0 && self.cdc.noise_sigma >= 0.0) {
            return Err(SensorError::InvalidParameter(
                "cdc gain must be positive and noise non-negative".into(),
            ));
        }
        if let Some(fc) = self.cdc.lag_corner_hz {
            if !(fc > 0.0) {
                return Err(SensorError::InvalidParameter(
                    "lag corner must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Noise-free, drift-free copy.
    pub fn noiseless(&self) -> Self {
        let mut p = self.clone();
        p.cdc.noise_sigma = 0.0;
        p.drift = DriftModel::none(self.drift.reference_temp);
        p
    }

    pub fn from_toml(text: &str) -> Result<Self, SensorError> {
        let p: SensorParams =
            toml::from_str(text).map_err(|e| SensorError::InvalidParameter(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("sensor params serialize")
    }

    /// Short content hash used to tag generated trials.
    pub fn content_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }
}
