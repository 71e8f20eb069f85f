use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a synthetic corpus. Rates are targets for the measured
/// corpus statistics: `swap_rate` for the order error, `miss_rate` for the
/// missing-step fraction, `repeat_rate` for the repetition fraction, and
/// `distractor_rate` for the share of off-script narration tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub num_steps: usize,
    pub num_items: usize,
    pub min_intervals: usize,
    pub max_intervals: usize,
    pub feature_dim: usize,
    pub interval_duration_s: f64,
    pub swap_rate: f64,
    pub miss_rate: f64,
    pub repeat_rate: f64,
    pub distractor_rate: f64,
    /// The action starts this many seconds after its caption.
    pub min_lag_s: f64,
    pub max_lag_s: f64,
    pub caption_duration_s: f64,
    /// Action length, in intervals.
    pub min_action_intervals: usize,
    pub max_action_intervals: usize,
    /// Norm of each step's feature center.
    pub center_norm: f64,
    /// Standard deviation of the Gaussian feature noise.
    pub feature_noise_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_steps: 8,
            num_items: 30,
            min_intervals: 60,
            max_intervals: 90,
            feature_dim: 20,
            interval_duration_s: 1.0,
            swap_rate: 0.06,
            miss_rate: 0.27,
            repeat_rate: 0.14,
            distractor_rate: 0.2,
            min_lag_s: 0.0,
            max_lag_s: 10.0,
            caption_duration_s: 2.0,
            min_action_intervals: 2,
            max_action_intervals: 4,
            center_norm: 1.0,
            feature_noise_sigma: 0.3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    /// Every item shows the full script once, in order, narrated without
    /// distractors, over noise-free features.
    pub fn clean() -> Self {
        SynthConfig {
            swap_rate: 0.0,
            miss_rate: 0.0,
            repeat_rate: 0.0,
            distractor_rate: 0.0,
            feature_noise_sigma: 0.0,
            ..SynthConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.num_steps < 1 || self.num_items < 1 || self.feature_dim < 1 {
            return bad("steps, items and feature dimension must be positive".into());
        }
        for (name, rate) in [
            ("swap_rate", self.swap_rate),
            ("miss_rate", self.miss_rate),
            ("repeat_rate", self.repeat_rate),
            ("distractor_rate", self.distractor_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(format!("{name} must lie in [0, 1], got {rate}"));
            }
        }
        if self.repeat_rate >= 0.5 || self.distractor_rate >= 0.5 {
            return bad("repeat_rate and distractor_rate must be below 0.5".into());
        }
        if self.min_intervals < self.num_steps || self.min_intervals > self.max_intervals {
            return bad(format!(
                "interval range {}..={} must start at the step count {} or above",
                self.min_intervals, self.max_intervals, self.num_steps
            ));
        }
        if self.min_action_intervals < 1 || self.min_action_intervals > self.max_action_intervals {
            return bad("action length range must be non-empty and positive".into());
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        let non_negative = |v: f64| v >= 0.0 && v.is_finite();
        if !positive(self.interval_duration_s) || !non_negative(self.caption_duration_s) {
            return bad("durations must be finite, intervals positive".into());
        }
        if !non_negative(self.min_lag_s) || !non_negative(self.max_lag_s) || self.min_lag_s > self.max_lag_s {
            return bad("lag range must be non-negative and ordered".into());
        }
        if !non_negative(self.center_norm) || !non_negative(self.feature_noise_sigma) {
            return bad("center norm and noise level must be non-negative".into());
        }
        Ok(())
    }
}
