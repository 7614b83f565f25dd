use serde::{Deserialize, Serialize};

use super::CalibrationError;
use crate::sensor::{CapacitanceFrame, N_CHANNELS};

/// Per-channel tare baseline [counts].
pub type Baseline = [f64; N_CHANNELS];

/// Which channels enter the regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    /// All 12 electrodes: 24 features.
    Full,
    /// The 8 shear-mode electrodes only: 16 features.
    ShearOnly,
}

impl FeatureSet {
    pub fn channels(self) -> &'static [usize] {
        const FULL: [usize; 12] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];
        match self {
            FeatureSet::Full => &FULL,
            FeatureSet::ShearOnly => &FULL[4..],
        }
    }

    pub fn len(self) -> usize {
        2 * self.channels().len()
    }

    pub fn label(self) -> &'static str {
        match self {
            FeatureSet::Full => "Normal+Shear",
            FeatureSet::ShearOnly => "Shear",
        }
    }
}

/// Tared channel values followed by their squares; no cross terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    set: FeatureSet,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn set(&self) -> FeatureSet {
        self.set
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Builds features from tared channel values (already baseline-free).
    pub fn from_tared(tared: &[f64; N_CHANNELS], set: FeatureSet) -> Self {
        let ch = set.channels();
        let mut values = Vec::with_capacity(set.len());
        values.extend(ch.iter().map(|&k| tared[k]));
        values.extend(ch.iter().map(|&k| tared[k] * tared[k]));
        Self { set, values }
    }
}

/// Per-channel mean of no-load frames.
pub fn tare(frames: &[CapacitanceFrame]) -> Result<Baseline, CalibrationError> {
    if frames.is_empty() {
        return Err(CalibrationError::EmptyInput(
            "tare needs at least one frame",
        ));
    }
    let mut sum = [0.0; N_CHANNELS];
    for f in frames {
        for (s, c) in sum.iter_mut().zip(f.channels()) {
            *s += c as f64;
        }
    }
    Ok(sum.map(|s| s / frames.len() as f64))
}

/// Channel counts minus baseline.
pub fn tared_channels(counts: &[f64; N_CHANNELS], baseline: &Baseline) -> [f64; N_CHANNELS] {
    let mut out = [0.0; N_CHANNELS];
    for k in 0..N_CHANNELS {
        out[k] = counts[k] - baseline[k];
    }
    out
}

pub fn frame_counts(frame: &CapacitanceFrame) -> [f64; N_CHANNELS] {
    frame.channels().map(|c| c as f64)
}

pub fn expand_features(
    frame: &CapacitanceFrame,
    baseline: &Baseline,
    set: FeatureSet,
) -> FeatureVector {
    FeatureVector::from_tared(&tared_channels(&frame_counts(frame), baseline), set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(c: [u32; 12]) -> CapacitanceFrame {
        CapacitanceFrame::from_channels(c, 0.0, 25.0)
    }

    #[test]
    fn tare_means() {
        assert!(matches!(tare(&[]), Err(CalibrationError::EmptyInput(_))));
        let one = frame([7; 12]);
        assert_eq!(tare(&[one]).unwrap(), [7.0; 12]);
        let mut a = [0; 12];
        let mut b = [0; 12];
        a[3] = 100;
        b[3] = 102;
        assert_eq!(tare(&[frame(a), frame(b)]).unwrap()[3], 101.0);
    }

    #[test]
    fn expansion_layout() {
        let base = [500.0; 12];
        let f = expand_features(&frame([500; 12]), &base, FeatureSet::Full);
        assert_eq!(f.values(), &[0.0; 24]);

        let mut c = [500; 12];
        c[0] = 501;
        let f = expand_features(&frame(c), &base, FeatureSet::Full);
        let mut expect = [0.0; 24];
        expect[0] = 1.0;
        expect[12] = 1.0;
        assert_eq!(f.values(), &expect);

        c[0] = 503;
        let f = expand_features(&frame(c), &base, FeatureSet::Full);
        assert_eq!(f.values()[12], 9.0);
    }

    #[test]
    fn shear_only_drops_normal_channels() {
        let mut c = [500; 12];
        c[0] = 520;
        c[4] = 502;
        let f = expand_features(&frame(c), &[500.0; 12], FeatureSet::ShearOnly);
        assert_eq!(f.values().len(), 16);
        assert_eq!(f.values()[0], 2.0);
        assert_eq!(f.values()[8], 4.0);
    }
}
