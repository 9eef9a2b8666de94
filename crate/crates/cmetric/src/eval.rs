//! Time Deviation Error: how far the predicted maximum-likelihood frame of
//! a style sits from the ground-truth expected frame, in seconds.
//!
//! `tde = |t_sle - expected_frame| / frame_rate`. Ground-truth events with
//! no matching detection are listed as unmatched and excluded from the
//! per-style means rather than penalized with an arbitrary value.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::styles::{Style, StyleReport};

/// Ground-truth style events, from annotator frame stamps or a scripted
/// scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    pub events: Vec<AnnotationEvent>,
    pub frame_rate_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationEvent {
    pub agent_id: String,
    pub style: Style,
    pub expected_frame: f64,
    pub window: Option<(u64, u64)>,
}

#[derive(Deserialize)]
struct TruthFile {
    events: Vec<TruthEvent>,
    #[serde(default)]
    frame_rate_hz: Option<f64>,
}

#[derive(Deserialize)]
struct TruthEvent {
    agent_id: serde_json::Value,
    style: String,
    #[serde(default)]
    window: Option<(u64, u64)>,
    #[serde(default)]
    expected_frame: Option<f64>,
    #[serde(default)]
    annotator_frames: Option<Vec<i64>>,
}

/// Mean of annotator frame stamps: the expected time-stamp of an event.
pub fn expected_frame(annotator_frames: &[i64]) -> Result<f64> {
    if annotator_frames.is_empty() {
        return Err(Error::Parameter("annotator frame list is empty".into()));
    }
    Ok(annotator_frames.iter().map(|&f| f as f64).sum::<f64>() / annotator_frames.len() as f64)
}

impl AnnotationSet {
    /// Parses the truth JSON schema. Each event needs an `expected_frame`
    /// or a non-empty `annotator_frames` list (averaged).
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: TruthFile = serde_json::from_str(s).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        let mut events = Vec::with_capacity(file.events.len());
        for (i, e) in file.events.into_iter().enumerate() {
            let agent_id = match e.agent_id {
                serde_json::Value::String(s) => s,
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(Error::Validation(format!(
                        "event {i}: agent_id must be a string or number, got {other}"
                    )))
                }
            };
            let style = Style::parse(&e.style)
                .ok_or_else(|| Error::Validation(format!("event {i}: unknown style {:?}", e.style)))?;
            let expected = match (e.expected_frame, e.annotator_frames.as_deref()) {
                (Some(f), _) => f,
                (None, Some(frames)) => expected_frame(frames)?,
                (None, None) => {
                    return Err(Error::Validation(format!(
                        "event {i}: needs expected_frame or annotator_frames"
                    )))
                }
            };
            events.push(AnnotationEvent {
                agent_id,
                style,
                expected_frame: expected,
                window: e.window,
            });
        }
        Ok(Self { events, frame_rate_hz: file.frame_rate_hz })
    }
}

/// Per-event TDE outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTde {
    pub agent_id: String,
    pub style: Style,
    pub t_sle: u64,
    pub expected_frame: f64,
    pub tde_seconds: f64,
}

/// Full evaluation outcome: matched events with per-style means, plus the
/// truth events no detection could be paired with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdeResult {
    pub frame_rate_hz: f64,
    pub events: Vec<EventTde>,
    pub per_style_mean: BTreeMap<String, f64>,
    pub unmatched: Vec<UnmatchedEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnmatchedEvent {
    pub agent_id: String,
    pub style: Style,
    pub expected_frame: f64,
}

impl TdeResult {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn mean_for(&self, style: Style) -> Option<f64> {
        self.per_style_mean.get(style.as_str()).copied()
    }

    /// Per-style table with the usual style abbreviations.
    pub fn table(&self) -> String {
        let mut out = String::from("style     mean TDE (s)   events\n");
        let label = |s: &str| -> String { match s {
            "overspeeding" => "OS".into(),
            "overtaking_or_sudden_lane_change" => "OT/SLC".into(),
            "weaving" => "W".into(),
            other => other.to_string(),
        }};
        for (style, mean) in &self.per_style_mean {
            let count = self.events.iter().filter(|e| e.style.as_str() == style).count();
            out.push_str(&format!("{:<9} {:>12.4} {:>8}\n", label(style), mean, count));
        }
        if !self.unmatched.is_empty() {
            out.push_str(&format!("unmatched events: {}\n", self.unmatched.len()));
        }
        out
    }
}

/// Computes TDE for every truth event against the report's detections.
/// Matching is greedy by nearest frame within each (agent, style) group,
/// each detection pairing with at most one event. The frame rate comes from
/// `frame_rate_hz` when given, else the report's embedded configuration; a
/// truth file carrying a different rate is a configuration error.
pub fn compute_tde(
    report: &StyleReport,
    truth: &AnnotationSet,
    frame_rate_hz: Option<f64>,
) -> Result<TdeResult> {
    let f = frame_rate_hz.unwrap_or(report.parameters.frame_rate_hz);
    if !(f > 0.0) {
        return Err(Error::Config(format!("frame rate must be positive, got {f}")));
    }
    if let Some(tf) = truth.frame_rate_hz {
        if (tf - f).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "truth frame rate {tf} Hz does not match evaluation rate {f} Hz"
            )));
        }
    }
    // group truth events and candidate detections by (agent, style)
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, e) in truth.events.iter().enumerate() {
        groups
            .entry((e.agent_id.clone(), e.style.as_str().to_string()))
            .or_default()
            .push(i);
    }
    let mut events = Vec::new();
    let mut unmatched = Vec::new();
    for ((agent_id, style_name), event_indices) in groups {
        let style = Style::parse(&style_name).expect("style name round-trips");
        let detections: Vec<u64> = report
            .agent(&agent_id)
            .map(|a| {
                a.detections
                    .iter()
                    .filter(|d| d.style == style)
                    .map(|d| d.t_sle)
                    .collect()
            })
            .unwrap_or_default();
        // greedy nearest-frame pairing
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (di, &t) in detections.iter().enumerate() {
            for &ei in &event_indices {
                let gap = (t as f64 - truth.events[ei].expected_frame).abs();
                pairs.push((gap, di, ei));
            }
        }
        pairs.sort_by(|a, b| a.partial_cmp(b).expect("finite gaps"));
        let mut det_used = vec![false; detections.len()];
        let mut evt_used: BTreeMap<usize, bool> =
            event_indices.iter().map(|&e| (e, false)).collect();
        for (gap, di, ei) in pairs {
            if det_used[di] || evt_used[&ei] {
                continue;
            }
            det_used[di] = true;
            *evt_used.get_mut(&ei).unwrap() = true;
            events.push(EventTde {
                agent_id: agent_id.clone(),
                style,
                t_sle: detections[di],
                expected_frame: truth.events[ei].expected_frame,
                tde_seconds: gap / f,
            });
        }
        for (&ei, &used) in &evt_used {
            if !used {
                unmatched.push(UnmatchedEvent {
                    agent_id: agent_id.clone(),
                    style,
                    expected_frame: truth.events[ei].expected_frame,
                });
            }
        }
    }
    events.sort_by(|a, b| {
        (a.agent_id.as_str(), a.style.as_str(), a.t_sle)
            .cmp(&(b.agent_id.as_str(), b.style.as_str(), b.t_sle))
    });
    let mut per_style: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for e in &events {
        let entry = per_style.entry(e.style.as_str().to_string()).or_insert((0.0, 0));
        entry.0 += e.tde_seconds;
        entry.1 += 1;
    }
    let per_style_mean = per_style
        .into_iter()
        .map(|(k, (sum, n))| (k, sum / n as f64))
        .collect();
    Ok(TdeResult { frame_rate_hz: f, events, per_style_mean, unmatched })
}
