use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Detection thresholds for the style classifiers.
///
/// All values are in per-second SLE units after smoothing. Defaults were
/// calibrated once against the synthetic scenario suite so that scripted
/// aggressive maneuvers clear their thresholds with margin while bystander
/// perturbations (a fast vehicle passing a lane-keeping one) stay below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Minimum peak SLE of the degree series for an overspeeding detection.
    pub overspeed: f64,
    /// Minimum peak SLE of the closeness series for an overtaking /
    /// sudden-lane-change detection.
    pub overtake: f64,
    /// Minimum sharpness of a closeness extreme point for it to count as
    /// weaving evidence.
    pub sharp_tol: f64,
    /// Maximum SLE (both rows) for an agent to qualify as conservative.
    pub conservative_tol: f64,
    /// Minimum number of sharp extreme points for a weaving detection.
    pub min_extrema: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            overspeed: 0.5,
            overtake: 0.08,
            sharp_tol: 0.035,
            conservative_tol: 0.05,
            min_extrema: 2,
        }
    }
}

/// Full analysis configuration. Every report embeds the resolved copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    /// Distance threshold for graph edges, meters.
    pub mu: f64,
    /// Smoothing window in frames; must be odd.
    pub window: usize,
    /// Degree of the local least-squares polynomial fit.
    pub poly_degree: usize,
    /// Radius in frames of the neighborhood used for extremum sharpness.
    pub epsilon: usize,
    /// Magnitudes of the smoothed first derivative at or below this value
    /// are treated as zero when locating extreme points.
    pub zero_tol: f64,
    /// Frame rate of the trajectory data, Hz.
    pub frame_rate_hz: f64,
    /// Maximum tracked agents before the incremental Laplacian resets.
    pub n_max: usize,
    pub thresholds: Thresholds,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            mu: 10.0,
            window: 11,
            poly_degree: 3,
            epsilon: 5,
            zero_tol: 1e-3,
            frame_rate_hz: 10.0,
            n_max: 256,
            thresholds: Thresholds::default(),
        }
    }
}

impl Config {
    /// Checks parameter ranges; returns the config unchanged when valid.
    pub fn validated(self) -> Result<Self> {
        if self.mu <= 0.0 || !self.mu.is_finite() {
            return Err(Error::Config(format!("mu must be positive, got {}", self.mu)));
        }
        if self.window % 2 == 0 {
            return Err(Error::Config(format!("window must be odd, got {}", self.window)));
        }
        if self.window < self.poly_degree + 2 {
            return Err(Error::Config(format!(
                "window ({}) must be at least poly_degree + 2 ({})",
                self.window,
                self.poly_degree + 2
            )));
        }
        if self.epsilon == 0 {
            return Err(Error::Config("epsilon must be at least 1 frame".into()));
        }
        if self.zero_tol < 0.0 || !self.zero_tol.is_finite() {
            return Err(Error::Config(format!(
                "zero_tol must be non-negative, got {}",
                self.zero_tol
            )));
        }
        if self.frame_rate_hz <= 0.0 || !self.frame_rate_hz.is_finite() {
            return Err(Error::Config(format!(
                "frame_rate_hz must be positive, got {}",
                self.frame_rate_hz
            )));
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be positive".into()));
        }
        Ok(self)
    }
}
