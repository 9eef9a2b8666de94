//! Trajectory parsing, validation, and velocity estimation.
//!
//! Input is a set of per-agent, frame-indexed 2-D world positions in meters.
//! Each agent's frames must form a contiguous interval: centrality series are
//! differentiated later, which requires uniform sampling, so gaps are rejected
//! rather than interpolated.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single observation of one agent at one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub agent_id: String,
    pub frame: u64,
    pub x: f64,
    pub y: f64,
}

/// 2-D position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }
}

/// One agent's contiguous track.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentTrack {
    pub id: String,
    pub start_frame: u64,
    pub positions: Vec<Point>,
}

impl AgentTrack {
    pub fn end_frame(&self) -> u64 {
        self.start_frame + self.positions.len() as u64 - 1
    }

    pub fn position_at(&self, frame: u64) -> Option<Point> {
        if frame < self.start_frame {
            return None;
        }
        self.positions.get((frame - self.start_frame) as usize).copied()
    }
}

/// A validated, frame-indexed trajectory dataset. Agents are sorted by id;
/// each agent's frames form a contiguous interval. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    frame_rate_hz: f64,
    agents: Vec<AgentTrack>,
}

/// Supported trajectory file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize, Deserialize)]
struct JsonFile {
    frame_rate_hz: f64,
    points: Vec<JsonPoint>,
}

#[derive(Serialize, Deserialize)]
struct JsonPoint {
    agent_id: JsonAgentId,
    frame: u64,
    x: f64,
    y: f64,
}

/// Agent ids are opaque; JSON inputs may carry them as strings or integers.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonAgentId {
    Text(String),
    Number(u64),
}

impl JsonAgentId {
    fn into_string(self) -> String {
        match self {
            JsonAgentId::Text(s) => s,
            JsonAgentId::Number(n) => n.to_string(),
        }
    }
}

impl TrajectoryDataset {
    /// Builds a dataset from raw points, enforcing all invariants:
    /// unique (agent, frame) pairs, contiguous frames per agent, finite
    /// coordinates, positive frame rate.
    pub fn from_points(points: Vec<TrajectoryPoint>, frame_rate_hz: f64) -> Result<Self> {
        if !(frame_rate_hz > 0.0) || !frame_rate_hz.is_finite() {
            return Err(Error::Validation(format!(
                "frame_rate_hz must be positive, got {frame_rate_hz}"
            )));
        }
        let mut by_agent: BTreeMap<String, BTreeMap<u64, Point>> = BTreeMap::new();
        for p in points {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(Error::Validation(format!(
                    "non-finite coordinate for agent {:?} at frame {}",
                    p.agent_id, p.frame
                )));
            }
            let frames = by_agent.entry(p.agent_id.clone()).or_default();
            if frames.insert(p.frame, Point { x: p.x, y: p.y }).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate observation for agent {:?} at frame {}",
                    p.agent_id, p.frame
                )));
            }
        }
        let mut agents = Vec::with_capacity(by_agent.len());
        for (id, frames) in by_agent {
            let start = *frames.keys().next().expect("agent has at least one frame");
            let end = *frames.keys().next_back().expect("agent has at least one frame");
            if end - start + 1 != frames.len() as u64 {
                return Err(Error::Validation(format!(
                    "agent {id:?} has non-contiguous frames in [{start}, {end}]"
                )));
            }
            let positions = frames.into_values().collect();
            agents.push(AgentTrack { id, start_frame: start, positions });
        }
        Ok(Self { frame_rate_hz, agents })
    }

    /// Parses a byte stream in the given format. For CSV, `frame_rate_hz`
    /// supplies the rate (the format has no header for it); for JSON the
    /// file's embedded `frame_rate_hz` wins.
    pub fn parse<R: Read>(mut source: R, format: Format, frame_rate_hz: f64) -> Result<Self> {
        match format {
            Format::Csv => {
                let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
                {
                    let headers = rdr.headers().map_err(|e| Error::Parse {
                        line: 1,
                        msg: format!("cannot read header: {e}"),
                    })?;
                    let expected = ["agent_id", "frame", "x", "y"];
                    let got: Vec<&str> = headers.iter().collect();
                    if got != expected {
                        return Err(Error::Parse {
                            line: 1,
                            msg: format!("expected header agent_id,frame,x,y, got {}", got.join(",")),
                        });
                    }
                }
                let mut points = Vec::new();
                for result in rdr.records() {
                    let record = result.map_err(|e| {
                        let line = e
                            .position()
                            .map(|p| p.line() as usize)
                            .unwrap_or(0);
                        Error::Parse { line, msg: e.to_string() }
                    })?;
                    let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
                    let field = |idx: usize, name: &str| -> Result<&str> {
                        record.get(idx).ok_or_else(|| Error::Parse {
                            line,
                            msg: format!("missing field {name}"),
                        })
                    };
                    let agent_id = field(0, "agent_id")?.to_string();
                    let frame: u64 = field(1, "frame")?.trim().parse().map_err(|e| Error::Parse {
                        line,
                        msg: format!("invalid frame: {e}"),
                    })?;
                    let x: f64 = field(2, "x")?.trim().parse().map_err(|e| Error::Parse {
                        line,
                        msg: format!("invalid x: {e}"),
                    })?;
                    let y: f64 = field(3, "y")?.trim().parse().map_err(|e| Error::Parse {
                        line,
                        msg: format!("invalid y: {e}"),
                    })?;
                    points.push(TrajectoryPoint { agent_id, frame, x, y });
                }
                if points.is_empty() {
                    return Err(Error::Validation("no trajectory rows in input".into()));
                }
                Self::from_points(points, frame_rate_hz)
            }
            Format::Json => {
                let mut buf = String::new();
                source.read_to_string(&mut buf)?;
                let file: JsonFile = serde_json::from_str(&buf).map_err(|e| Error::Parse {
                    line: e.line(),
                    msg: e.to_string(),
                })?;
                if file.points.is_empty() {
                    return Err(Error::Validation("no trajectory points in input".into()));
                }
                let points = file
                    .points
                    .into_iter()
                    .map(|p| TrajectoryPoint {
                        agent_id: p.agent_id.into_string(),
                        frame: p.frame,
                        x: p.x,
                        y: p.y,
                    })
                    .collect();
                Self::from_points(points, file.frame_rate_hz)
            }
        }
    }

    pub fn frame_rate_hz(&self) -> f64 {
        self.frame_rate_hz
    }

    /// Agent tracks, sorted by id.
    pub fn agents(&self) -> &[AgentTrack] {
        &self.agents
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn agent_index(&self, id: &str) -> Option<usize> {
        self.agents.binary_search_by(|a| a.id.as_str().cmp(id)).ok()
    }

    /// Global frame range [t_min, t_max] over all agents.
    pub fn frame_range(&self) -> Option<(u64, u64)> {
        let min = self.agents.iter().map(|a| a.start_frame).min()?;
        let max = self.agents.iter().map(|a| a.end_frame()).max()?;
        Some((min, max))
    }

    /// Agents present at `frame`, as (agent index, position) pairs in
    /// dataset (id-sorted) order.
    pub fn agents_at_frame(&self, frame: u64) -> Vec<(usize, Point)> {
        self.agents
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.position_at(frame).map(|p| (i, p)))
            .collect()
    }

    /// All points in deterministic (agent id, frame) order.
    pub fn points(&self) -> Vec<TrajectoryPoint> {
        let mut out = Vec::new();
        for a in &self.agents {
            for (k, p) in a.positions.iter().enumerate() {
                out.push(TrajectoryPoint {
                    agent_id: a.id.clone(),
                    frame: a.start_frame + k as u64,
                    x: p.x,
                    y: p.y,
                });
            }
        }
        out
    }

    /// Serializes as CSV with header `agent_id,frame,x,y`. Floats use the
    /// shortest representation that round-trips, so write → parse is
    /// bit-exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("agent_id,frame,x,y\n");
        for p in self.points() {
            out.push_str(&format!("{},{},{},{}\n", p.agent_id, p.frame, p.x, p.y));
        }
        out
    }

    /// Serializes as the JSON trajectory format.
    pub fn to_json_string(&self) -> String {
        let file = JsonFile {
            frame_rate_hz: self.frame_rate_hz,
            points: self
                .points()
                .into_iter()
                .map(|p| JsonPoint {
                    agent_id: JsonAgentId::Text(p.agent_id),
                    frame: p.frame,
                    x: p.x,
                    y: p.y,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("dataset serializes")
    }
}

/// Scalar speed of one agent at one frame, meters/second.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityEstimate {
    pub agent_id: String,
    pub frame: u64,
    pub speed: f64,
}

/// Per-agent speed series aligned with each agent's frame interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Velocities {
    per_agent: Vec<Vec<f64>>,
}

impl Velocities {
    /// Speed of the agent (by dataset index) at an absolute frame.
    pub fn speed(&self, ds: &TrajectoryDataset, agent_idx: usize, frame: u64) -> Option<f64> {
        let track = ds.agents().get(agent_idx)?;
        if frame < track.start_frame {
            return None;
        }
        self.per_agent[agent_idx].get((frame - track.start_frame) as usize).copied()
    }

    pub fn estimates(&self, ds: &TrajectoryDataset) -> Vec<VelocityEstimate> {
        let mut out = Vec::new();
        for (i, track) in ds.agents().iter().enumerate() {
            for (k, &speed) in self.per_agent[i].iter().enumerate() {
                out.push(VelocityEstimate {
                    agent_id: track.id.clone(),
                    frame: track.start_frame + k as u64,
                    speed,
                });
            }
        }
        out
    }
}

/// Estimates scalar speeds by backward finite differences:
/// `speed[t] = ||pos[t] - pos[t-1]|| * frame_rate_hz` for t past the first
/// frame. The first frame copies the forward difference (0 for single-frame
/// agents), so constant-velocity tracks get a uniform speed series.
pub fn estimate_velocities(ds: &TrajectoryDataset) -> Velocities {
    let fps = ds.frame_rate_hz();
    let per_agent = ds
        .agents()
        .iter()
        .map(|track| {
            let n = track.positions.len();
            let mut speeds = vec![0.0; n];
            for t in 1..n {
                speeds[t] = track.positions[t].distance(&track.positions[t - 1]) * fps;
            }
            if n > 1 {
                speeds[0] = speeds[1];
            }
            speeds
        })
        .collect();
    Velocities { per_agent }
}
