//! Style detection from smoothed centrality series.
//!
//! Each specific style reads one centrality row: overspeeding watches the
//! degree series (a fast vehicle acquires new, slower neighbors at a high
//! rate), overtaking/sudden-lane-change and weaving watch the closeness
//! series (sweeping toward the traffic center raises it; oscillating across
//! lanes makes it oscillate). Likelihood is the peak magnitude of the first
//! derivative; intensity the magnitude of the second derivative at that
//! frame. Weaving is evidenced by sharp local extrema instead of a single
//! peak, and takes precedence over overtaking for the same agent: a strong
//! oscillation also produces large first-derivative magnitudes, and
//! reporting it twice would double-label one maneuver.
//!
//! Conservative driving is the degenerate case: both rows flat. Its
//! intensity is reported as the margin below the flatness tolerance.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::centrality::compute_series;
use crate::config::{Config, Thresholds};
use crate::error::Result;
use crate::ingest::TrajectoryDataset;
use crate::signal::{smooth_and_differentiate, ExtremePoint, ExtremumKind, SmoothedSeries};

/// Specific driving styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Style {
    Overspeeding,
    OvertakingOrSuddenLaneChange,
    Weaving,
    ConservativeUniformSpeed,
    ConservativeNoLaneChange,
}

impl Style {
    pub fn as_str(&self) -> &'static str {
        match self {
            Style::Overspeeding => "overspeeding",
            Style::OvertakingOrSuddenLaneChange => "overtaking_or_sudden_lane_change",
            Style::Weaving => "weaving",
            Style::ConservativeUniformSpeed => "conservative_uniform_speed",
            Style::ConservativeNoLaneChange => "conservative_no_lane_change",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "overspeeding" => Some(Style::Overspeeding),
            "overtaking_or_sudden_lane_change" => Some(Style::OvertakingOrSuddenLaneChange),
            "weaving" => Some(Style::Weaving),
            "conservative_uniform_speed" => Some(Style::ConservativeUniformSpeed),
            "conservative_no_lane_change" => Some(Style::ConservativeNoLaneChange),
            _ => None,
        }
    }

    pub fn is_aggressive(&self) -> bool {
        matches!(
            self,
            Style::Overspeeding | Style::OvertakingOrSuddenLaneChange | Style::Weaving
        )
    }
}

/// Aggregate per-agent label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalBehavior {
    Aggressive,
    Conservative,
    Neutral,
}

/// Evidence entry serialized into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidencePoint {
    pub frame: u64,
    pub kind: String,
    pub sharpness: f64,
}

impl From<&ExtremePoint> for EvidencePoint {
    fn from(p: &ExtremePoint) -> Self {
        EvidencePoint {
            frame: p.frame,
            kind: match p.kind {
                ExtremumKind::Minimum => "minimum".into(),
                ExtremumKind::Maximum => "maximum".into(),
            },
            sharpness: p.sharpness,
        }
    }
}

/// One detected style occurrence for one agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleDetection {
    pub style: Style,
    /// Frame of maximum likelihood.
    pub t_sle: u64,
    /// SLE at `t_sle` on the style's designated centrality row.
    pub sle_max: f64,
    /// Intensity: SIE at `t_sle`, except weaving (mean extremum sharpness)
    /// and conservative styles (margin below the flatness tolerance).
    pub sie: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<EvidencePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentStatus {
    Ok,
    InsufficientData,
}

/// Per-agent slice of the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub agent_id: String,
    pub global_behavior: GlobalBehavior,
    pub status: AgentStatus,
    pub detections: Vec<StyleDetection>,
}

/// Full classification output. Serializes with stable field names under
/// schema version 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleReport {
    pub schema: u32,
    pub parameters: Config,
    pub agents: Vec<AgentReport>,
}

impl StyleReport {
    pub fn agent(&self, id: &str) -> Option<&AgentReport> {
        self.agents.iter().find(|a| a.agent_id == id)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::error::Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

/// Overspeeding: peak SLE of the degree row at or above the threshold.
pub fn detect_overspeeding(degree: &SmoothedSeries, th: &Thresholds) -> Option<StyleDetection> {
    let (t_sle, sle_max) = degree.sle_max();
    if sle_max >= th.overspeed {
        Some(StyleDetection {
            style: Style::Overspeeding,
            t_sle,
            sle_max,
            sie: degree.sie_at(t_sle).unwrap_or(0.0),
            evidence: Vec::new(),
        })
    } else {
        None
    }
}

/// Overtaking / sudden lane-change: peak SLE of the closeness row at or
/// above the threshold.
pub fn detect_overtaking(closeness: &SmoothedSeries, th: &Thresholds) -> Option<StyleDetection> {
    let (t_sle, sle_max) = closeness.sle_max();
    if sle_max >= th.overtake {
        Some(StyleDetection {
            style: Style::OvertakingOrSuddenLaneChange,
            t_sle,
            sle_max,
            sie: closeness.sie_at(t_sle).unwrap_or(0.0),
            evidence: Vec::new(),
        })
    } else {
        None
    }
}

/// Weaving: at least `min_extrema` sharp local extrema of the closeness
/// series. Likelihood anchors at the sharpest extremum; intensity is the
/// mean sharpness.
pub fn detect_weaving(
    closeness: &SmoothedSeries,
    epsilon: usize,
    zero_tol: f64,
    th: &Thresholds,
) -> Result<Option<StyleDetection>> {
    let points: Vec<ExtremePoint> = closeness
        .find_extreme_points(epsilon, zero_tol)?
        .into_iter()
        .filter(|p| p.sharpness > th.sharp_tol)
        .collect();
    if points.len() < th.min_extrema {
        return Ok(None);
    }
    let sharpest = points
        .iter()
        .max_by(|a, b| a.sharpness.partial_cmp(&b.sharpness).expect("finite sharpness"))
        .expect("nonempty");
    let mean_sharpness = points.iter().map(|p| p.sharpness).sum::<f64>() / points.len() as f64;
    let t_sle = sharpest.frame;
    Ok(Some(StyleDetection {
        style: Style::Weaving,
        t_sle,
        sle_max: closeness.sle_at(t_sle).unwrap_or(0.0),
        sie: mean_sharpness,
        evidence: points.iter().map(EvidencePoint::from).collect(),
    }))
}

/// Conservative driving: both rows flat (peak SLE at or below the
/// tolerance). Emits one detection per conservative style, each anchored on
/// its own row, with intensity = tolerance minus residual SLE.
pub fn detect_conservative(
    closeness: &SmoothedSeries,
    degree: &SmoothedSeries,
    th: &Thresholds,
) -> Vec<StyleDetection> {
    let (t0, sle0) = closeness.sle_max();
    let (t1, sle1) = degree.sle_max();
    if sle0 > th.conservative_tol || sle1 > th.conservative_tol {
        return Vec::new();
    }
    vec![
        StyleDetection {
            style: Style::ConservativeUniformSpeed,
            t_sle: t1,
            sle_max: sle1,
            sie: (th.conservative_tol - sle1).max(0.0),
            evidence: Vec::new(),
        },
        StyleDetection {
            style: Style::ConservativeNoLaneChange,
            t_sle: t0,
            sle_max: sle0,
            sie: (th.conservative_tol - sle0).max(0.0),
            evidence: Vec::new(),
        },
    ]
}

/// Smoothed closeness and degree rows for one agent.
pub struct AgentSignals {
    pub closeness: SmoothedSeries,
    pub degree: SmoothedSeries,
}

/// Smooths both centrality rows of one agent. Fails with SeriesTooShort for
/// trajectories shorter than the window.
pub fn smooth_agent_series(
    closeness: &[f64],
    degree: &[u64],
    start_frame: u64,
    cfg: &Config,
) -> Result<AgentSignals> {
    let degree_f: Vec<f64> = degree.iter().map(|&d| d as f64).collect();
    Ok(AgentSignals {
        closeness: smooth_and_differentiate(
            closeness,
            start_frame,
            cfg.window,
            cfg.poly_degree,
            cfg.frame_rate_hz,
        )?,
        degree: smooth_and_differentiate(
            &degree_f,
            start_frame,
            cfg.window,
            cfg.poly_degree,
            cfg.frame_rate_hz,
        )?,
    })
}

fn detect_agent(signals: &AgentSignals, cfg: &Config) -> Result<Vec<StyleDetection>> {
    let th = &cfg.thresholds;
    let mut detections = Vec::new();
    if let Some(d) = detect_overspeeding(&signals.degree, th) {
        detections.push(d);
    }
    let weaving = detect_weaving(&signals.closeness, cfg.epsilon, cfg.zero_tol, th)?;
    let overtaking = detect_overtaking(&signals.closeness, th);
    match weaving {
        Some(w) => detections.push(w),
        None => {
            if let Some(o) = overtaking {
                detections.push(o);
            }
        }
    }
    if detections.is_empty() {
        detections.extend(detect_conservative(&signals.closeness, &signals.degree, th));
    }
    Ok(detections)
}

/// Runs the full pipeline: centrality series, smoothing, and all detectors
/// for every agent. Agents with trajectories shorter than the smoothing
/// window are reported with `insufficient_data` status and no detections.
pub fn classify(ds: &TrajectoryDataset, cfg: &Config) -> Result<StyleReport> {
    let cfg = cfg.clone().validated()?;
    let series = compute_series(ds, cfg.mu)?;
    let mut agents = Vec::with_capacity(ds.agent_count());
    let mut sorted: Vec<_> = series.values().collect();
    sorted.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
    for s in sorted {
        if s.len() < cfg.window {
            agents.push(AgentReport {
                agent_id: s.agent_id.clone(),
                global_behavior: GlobalBehavior::Neutral,
                status: AgentStatus::InsufficientData,
                detections: Vec::new(),
            });
            continue;
        }
        let signals = smooth_agent_series(&s.closeness, &s.degree, s.start_frame, &cfg)?;
        let detections = detect_agent(&signals, &cfg)?;
        let aggressive = detections.iter().any(|d| d.style.is_aggressive());
        let conservative = !detections.is_empty() && detections.iter().all(|d| !d.style.is_aggressive());
        let global_behavior = if aggressive {
            GlobalBehavior::Aggressive
        } else if conservative {
            GlobalBehavior::Conservative
        } else {
            GlobalBehavior::Neutral
        };
        agents.push(AgentReport {
            agent_id: s.agent_id.clone(),
            global_behavior,
            status: AgentStatus::Ok,
            detections,
        });
    }
    Ok(StyleReport { schema: 1, parameters: cfg, agents })
}

/// Convenience view: detections grouped by (agent, style).
pub fn detections_by_key(report: &StyleReport) -> HashMap<(String, Style), Vec<&StyleDetection>> {
    let mut map: HashMap<(String, Style), Vec<&StyleDetection>> = HashMap::new();
    for agent in &report.agents {
        for det in &agent.detections {
            map.entry((agent.agent_id.clone(), det.style)).or_default().push(det);
        }
    }
    map
}
