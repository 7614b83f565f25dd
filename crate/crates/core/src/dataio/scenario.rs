//! Scenario files and the synthetic wrench generator.
//!
//! Each axis is a sum of low-frequency sinusoids with random phases,
//! rescaled so its extremes hit the declared range. A trial opens with an
//! exact no-load lead-in (used for tare) followed by a raised-cosine ramp.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, Trial, TrialMeta};
use crate::calibration::LabeledFrame;
use crate::sensor::{SensorModel, SensorParams, SAMPLE_RATE_HZ};
use crate::types::Wrench;

/// Closed interval `[lo, hi]`; forces in N, moments in mN·m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
}

impl AxisRange {
    pub const ZERO: AxisRange = AxisRange { lo: 0.0, hi: 0.0 };

    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn symmetric(a: f64) -> Self {
        Self { lo: -a, hi: a }
    }
}

impl From<[f64; 2]> for AxisRange {
    fn from(a: [f64; 2]) -> Self {
        Self { lo: a[0], hi: a[1] }
    }
}

impl From<AxisRange> for [f64; 2] {
    fn from(r: AxisRange) -> Self {
        [r.lo, r.hi]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrenchRanges {
    pub fx: AxisRange,
    pub fy: AxisRange,
    pub fz: AxisRange,
    pub mx: AxisRange,
    pub my: AxisRange,
    pub mz: AxisRange,
}

impl WrenchRanges {
    pub fn to_array(&self) -> [AxisRange; 6] {
        [self.fx, self.fy, self.fz, self.mx, self.my, self.mz]
    }

    pub fn zero() -> Self {
        Self {
            fx: AxisRange::ZERO,
            fy: AxisRange::ZERO,
            fz: AxisRange::ZERO,
            mx: AxisRange::ZERO,
            my: AxisRange::ZERO,
            mz: AxisRange::ZERO,
        }
    }
}

fn default_lead_in() -> f64 {
    1.0
}
fn default_ramp() -> f64 {
    1.0
}
fn default_components() -> usize {
    6
}
fn default_min_frequency() -> f64 {
    0.05
}
fn default_max_frequency() -> f64 {
    2.0
}
fn default_true() -> bool {
    true
}
fn default_temperature() -> f64 {
    25.0
}

/// Trial recipe. TOML keys match the field names; `ranges` is a table of
/// `[lo, hi]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Total trial length [s], lead-in included.
    pub duration: f64,
    /// Exact no-load interval at the start [s].
    #[serde(default = "default_lead_in")]
    pub lead_in: f64,
    /// Raised-cosine ramp from zero into the trajectory [s].
    #[serde(default = "default_ramp")]
    pub ramp: f64,
    /// Sinusoids per axis.
    #[serde(default = "default_components")]
    pub components: usize,
    /// [Hz]
    #[serde(default = "default_min_frequency")]
    pub min_frequency: f64,
    /// [Hz]
    #[serde(default = "default_max_frequency")]
    pub max_frequency: f64,
    #[serde(default = "default_true")]
    pub noise: bool,
    #[serde(default)]
    pub drift: bool,
    /// Temperature at the start [°C].
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Temperature at the end [°C]; linear ramp when set.
    #[serde(default)]
    pub temperature_end: Option<f64>,
    /// Base seed; the CLI offsets it per trial.
    #[serde(default)]
    pub seed: u64,
    pub ranges: WrenchRanges,
}

impl Scenario {
    /// 0–5 N normal, ±2 N shear, 35 s.
    pub fn small_range() -> Self {
        Self::with_ranges(
            "small_range",
            WrenchRanges {
                fx: AxisRange::symmetric(2.0),
                fy: AxisRange::symmetric(2.0),
                fz: AxisRange::new(0.0, 5.0),
                mx: AxisRange::symmetric(15.0),
                my: AxisRange::symmetric(15.0),
                mz: AxisRange::symmetric(10.0),
            },
        )
    }

    /// 0–14 N normal, ±5 N shear, 35 s.
    pub fn large_range() -> Self {
        Self::with_ranges(
            "large_range",
            WrenchRanges {
                fx: AxisRange::symmetric(5.0),
                fy: AxisRange::symmetric(5.0),
                fz: AxisRange::new(0.0, 14.0),
                mx: AxisRange::symmetric(30.0),
                my: AxisRange::symmetric(30.0),
                mz: AxisRange::symmetric(20.0),
            },
        )
    }

    pub fn with_ranges(name: &str, ranges: WrenchRanges) -> Self {
        Self {
            name: name.to_string(),
            duration: 35.0,
            lead_in: default_lead_in(),
            ramp: default_ramp(),
            components: default_components(),
            min_frequency: default_min_frequency(),
            max_frequency: default_max_frequency(),
            noise: true,
            drift: false,
            temperature: default_temperature(),
            temperature_end: None,
            seed: 0,
            ranges,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, DataError> {
        toml::from_str(text).map_err(|e| DataError::Scenario(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn n_samples(&self) -> usize {
        (self.duration * SAMPLE_RATE_HZ).round() as usize
    }

    /// Parameters actually used for sampling: noise and drift toggles
    /// applied to `params`.
    pub fn effective_params(&self, params: &SensorParams) -> SensorParams {
        let mut p = params.clone();
        if !self.noise {
            p.cdc.noise_sigma = 0.0;
        }
        if !self.drift {
            p.drift = crate::sensor::DriftModel::none(p.drift.reference_temp);
        }
        p
    }

    /// Structural checks plus the mechanical range: every corner of the
    /// declared box must be representable by the sensor.
    pub fn validate(&self, params: &SensorParams) -> Result<(), DataError> {
        let bad = |m: &str| Err(DataError::Scenario(m.to_string()));
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return bad("duration must be finite and non-negative");
        }
        if !(self.lead_in >= 0.0 && self.ramp >= 0.0) {
            return bad("lead_in and ramp must be non-negative");
        }
        if self.components == 0 {
            return bad("components must be at least 1");
        }
        if !(self.min_frequency > 0.0 && self.min_frequency <= self.max_frequency) {
            return bad("need 0 < min_frequency <= max_frequency");
        }
        if self.max_frequency > 2.0 {
            return bad("max_frequency above 2 Hz");
        }
        let temps_ok =
            self.temperature.is_finite() && self.temperature_end.is_none_or(|t| t.is_finite());
        if !temps_ok {
            return bad("temperatures must be finite");
        }
        let ranges = self.ranges.to_array();
        if ranges
            .iter()
            .any(|r| !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi))
        {
            return bad("each range needs finite lo <= hi");
        }
        let model = SensorModel::new(params.noiseless())?;
        for mask in 0..64u32 {
            let mut w = [0.0; 6];
            for (k, v) in w.iter_mut().enumerate() {
                *v = if mask >> k & 1 == 1 {
                    ranges[k].hi
                } else {
                    ranges[k].lo
                };
            }
            let w = Wrench::from_array(w);
            model.capacitances(&w).map_err(|e| {
                DataError::Scenario(format!(
                    "range corner {:?} outside the mechanical range: {e}",
                    w.to_array()
                ))
            })?;
        }
        Ok(())
    }
}

struct AxisSignal {
    /// (amplitude, angular frequency, phase)
    terms: Vec<(f64, f64, f64)>,
    offset: f64,
    scale: f64,
}

impl AxisSignal {
    fn raw(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(a, w, p)| a * (w * t + p).sin())
            .sum()
    }

    fn value(&self, t: f64) -> f64 {
        self.offset + self.scale * self.raw(t)
    }
}

fn envelope(t: f64, lead_in: f64, ramp: f64) -> f64 {
    if t < lead_in {
        0.0
    } else if ramp <= 0.0 || t >= lead_in + ramp {
        1.0
    } else {
        0.5 - 0.5 * (std::f64::consts::PI * (t - lead_in) / ramp).cos()
    }
}

/// Synthetic trial. Deterministic in (`scenario`, `params`, `seed`): the
/// trajectory and the CDC noise use separate ChaCha8 streams of `seed`.
pub fn generate_trial(
    scenario: &Scenario,
    params: &SensorParams,
    seed: u64,
) -> Result<Trial, DataError> {
    scenario.validate(params)?;
    let params = scenario.effective_params(params);
    let model = SensorModel::new(params.clone())?;
    let n = scenario.n_samples();
    let times: Vec<f64> = (0..n).map(|i| i as f64 / SAMPLE_RATE_HZ).collect();

    let mut traj_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
    noise_rng.set_stream(1);

    let tau = std::f64::consts::TAU;
    let axes: Vec<AxisSignal> = scenario
        .ranges
        .to_array()
        .iter()
        .map(|range| {
            let terms: Vec<(f64, f64, f64)> = (0..scenario.components)
                .map(|_| {
                    let amp = traj_rng.random_range(0.5..=1.0);
                    let f = traj_rng.random_range(scenario.min_frequency..=scenario.max_frequency);
                    let phase = traj_rng.random_range(0.0..tau);
                    (amp, tau * f, phase)
                })
                .collect();
            let mut sig = AxisSignal {
                terms,
                offset: range.lo,
                scale: 0.0,
            };
            // empirical extremes once the ramp starts
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &t in times.iter().filter(|&&t| t >= scenario.lead_in) {
                let v = sig.raw(t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi > lo && range.hi > range.lo {
                sig.scale = (range.hi - range.lo) / (hi - lo);
                sig.offset = range.lo - sig.scale * lo;
            } else {
                sig.offset = 0.5 * (range.lo + range.hi);
            }
            sig
        })
        .collect();

    let t_end = scenario.duration;
    let t_start = scenario.temperature;
    let t_final = scenario.temperature_end.unwrap_or(t_start);
    let mut samples = Vec::with_capacity(n);
    let mut stream = model.stream();
    for &t in &times {
        let env = envelope(t, scenario.lead_in, scenario.ramp);
        let w = if env == 0.0 {
            Wrench::ZERO
        } else {
            let mut a = [0.0; 6];
            for (v, sig) in a.iter_mut().zip(&axes) {
                *v = env * sig.value(t);
            }
            Wrench::from_array(a)
        };
        let temp = if t_end > 0.0 {
            t_start + (t_final - t_start) * t / t_end
        } else {
            t_start
        };
        let frame = stream.next(&w, temp, t, &mut noise_rng)?;
        samples.push(LabeledFrame { frame, wrench: w });
    }
    Ok(Trial {
        meta: TrialMeta {
            scenario: scenario.name.clone(),
            seed,
            sensor_hash: params.content_hash(),
        },
        samples,
    })
}
