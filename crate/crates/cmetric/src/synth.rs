//! Deterministic synthetic traffic scenarios with scripted maneuvers.
//!
//! Each scenario is a pure function of (kind, parameters, seed) and emits a
//! trajectory dataset plus ground-truth events with known windows and
//! expected frames. Straight-road geometry only. The layouts keep every
//! scripted actor inside the interaction radius of its props for the whole
//! run where possible: an agent crossing the distance threshold mid-run
//! makes the closeness of every bystander jump discontinuously, which is a
//! real effect but a poor baseline for scripted ground truth.
//!
//! The seed perturbs speeds, offsets, and oscillation phase within narrow
//! bands; scripted windows are recomputed from the perturbed values, so
//! truth and trajectories stay consistent for every seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{TrajectoryDataset, TrajectoryPoint};
use crate::styles::Style;

/// Scenario family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    ConservativePlatoon,
    OverspeedingPass,
    OvertakeSingle,
    SuddenLaneChange,
    WeavingSinusoid,
    Mixed,
}

impl ScenarioKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "conservative_platoon" => Ok(Self::ConservativePlatoon),
            "overspeeding_pass" => Ok(Self::OverspeedingPass),
            "overtake_single" => Ok(Self::OvertakeSingle),
            "sudden_lane_change" => Ok(Self::SuddenLaneChange),
            "weaving_sinusoid" => Ok(Self::WeavingSinusoid),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::Parameter(format!("unknown scenario kind {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ConservativePlatoon => "conservative_platoon",
            Self::OverspeedingPass => "overspeeding_pass",
            Self::OvertakeSingle => "overtake_single",
            Self::SuddenLaneChange => "sudden_lane_change",
            Self::WeavingSinusoid => "weaving_sinusoid",
            Self::Mixed => "mixed",
        }
    }
}

/// Scenario parameters. `Scenario::new` picks per-kind defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub agents: usize,
    pub frames: usize,
    pub frame_rate_hz: f64,
    pub seed: u64,
    pub lane_width_m: f64,
    pub spacing_m: f64,
    pub speed_mps: f64,
    pub fast_speed_mps: f64,
    pub lateral_amplitude_m: f64,
    pub oscillation_period_frames: usize,
    /// Interaction radius the scripted encounter windows are planned for;
    /// should match the `mu` used at analysis time.
    pub mu_m: f64,
    /// Frame window in which the overspeeding pass acquires its queue.
    pub pass_window: (u64, u64),
    /// Duration of the scripted lane change, frames.
    pub lane_change_frames: usize,
    /// Uniform positional jitter amplitude, meters (0 disables).
    pub jitter_m: f64,
}

impl Scenario {
    pub fn new(kind: ScenarioKind) -> Self {
        let base = Self {
            kind,
            agents: 4,
            frames: 100,
            frame_rate_hz: 10.0,
            seed: 0,
            lane_width_m: 3.5,
            spacing_m: 5.0,
            speed_mps: 10.0,
            fast_speed_mps: 14.0,
            lateral_amplitude_m: 2.8,
            oscillation_period_frames: 40,
            mu_m: 10.0,
            pass_window: (30, 60),
            lane_change_frames: 16,
            jitter_m: 0.0,
        };
        match kind {
            ScenarioKind::ConservativePlatoon => base,
            ScenarioKind::OverspeedingPass => Self { agents: 7, ..base },
            ScenarioKind::OvertakeSingle => Self {
                agents: 2,
                speed_mps: 9.0,
                fast_speed_mps: 10.7,
                ..base
            },
            ScenarioKind::SuddenLaneChange => Self { agents: 3, ..base },
            ScenarioKind::WeavingSinusoid => Self { agents: 3, frames: 200, ..base },
            ScenarioKind::Mixed => Self {
                agents: 6,
                frames: 200,
                oscillation_period_frames: 34,
                ..base
            },
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.frames < 2 {
            return Err(Error::Parameter("frames must be at least 2".into()));
        }
        if !(self.frame_rate_hz > 0.0) {
            return Err(Error::Parameter("frame_rate_hz must be positive".into()));
        }
        if !(self.speed_mps > 0.0) || !(self.fast_speed_mps > 0.0) {
            return Err(Error::Parameter("speeds must be positive".into()));
        }
        if !(self.lane_width_m > 0.0) || !(self.spacing_m > 0.0) {
            return Err(Error::Parameter("geometry lengths must be positive".into()));
        }
        if !(self.lateral_amplitude_m > 0.0) {
            return Err(Error::Parameter("lateral amplitude must be positive".into()));
        }
        if self.oscillation_period_frames < 4 {
            return Err(Error::Parameter("oscillation period must be at least 4 frames".into()));
        }
        if !(self.mu_m > 0.0) {
            return Err(Error::Parameter("mu must be positive".into()));
        }
        if self.jitter_m < 0.0 {
            return Err(Error::Parameter("jitter must be non-negative".into()));
        }
        let min_agents = match self.kind {
            ScenarioKind::ConservativePlatoon => 2,
            ScenarioKind::OverspeedingPass => 2,
            ScenarioKind::OvertakeSingle => 2,
            ScenarioKind::SuddenLaneChange => 2,
            ScenarioKind::WeavingSinusoid => 2,
            ScenarioKind::Mixed => 6,
        };
        if self.agents < min_agents {
            return Err(Error::Parameter(format!(
                "scenario {} needs at least {min_agents} agents, got {}",
                self.kind.name(),
                self.agents
            )));
        }
        if self.kind == ScenarioKind::OvertakeSingle && self.agents != 2 {
            return Err(Error::Parameter("overtake_single uses exactly 2 agents".into()));
        }
        if self.kind == ScenarioKind::OverspeedingPass {
            let (a, b) = self.pass_window;
            if b <= a || b >= self.frames as u64 {
                return Err(Error::Parameter(format!(
                    "pass window [{a}, {b}] must be increasing and inside 0..{}",
                    self.frames
                )));
            }
        }
        Ok(())
    }
}

/// A scripted style occurrence: the stand-in for annotated ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthEvent {
    pub agent_id: String,
    pub style: Style,
    pub window: (u64, u64),
    pub expected_frame: f64,
}

/// Quintic smoothstep: C2 at both endpoints, so lateral maneuvers do not
/// inject second-derivative spikes at their boundaries.
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (u * 6.0 - 15.0) + 10.0)
}

struct AgentScript {
    id: String,
    x0: f64,
    vx: f64,
    /// lateral position as a function of the frame index
    y: Box<dyn Fn(f64) -> f64>,
}

/// Derived per-scenario numbers shared between trajectory emission and
/// ground-truth computation.
struct Layout {
    scripts: Vec<AgentScript>,
    events: Vec<GroundTruthEvent>,
    /// lateral-extremum frames of the weaving subject, when present
    weave_extrema: Vec<f64>,
}

fn wobble(rng: &mut ChaCha8Rng, base: f64, rel: f64) -> f64 {
    base * (1.0 + rel * (rng.gen::<f64>() - 0.5) * 2.0)
}

fn sine_extrema(phase: f64, period: f64, frames: usize) -> Vec<f64> {
    // extrema of sin(2 pi t / period + phase) at 2 pi t / period + phase = pi/2 + k pi
    let omega = 2.0 * PI / period;
    let mut out = Vec::new();
    let mut k = ((omega * 0.0 + phase - PI / 2.0) / PI).floor() as i64 - 1;
    loop {
        let t = (PI / 2.0 + k as f64 * PI - phase) / omega;
        if t >= frames as f64 {
            break;
        }
        if t >= 0.0 {
            out.push(t);
        }
        k += 1;
    }
    out
}

fn layout(sc: &Scenario) -> Layout {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let dt = 1.0 / sc.frame_rate_hz;
    match sc.kind {
        ScenarioKind::ConservativePlatoon => {
            let v = sc.speed_mps;
            let scripts = (0..sc.agents)
                .map(|i| {
                    let lane = i % 2;
                    let y = lane as f64 * sc.lane_width_m;
                    let stagger = (rng.gen::<f64>() - 0.5) * 1.2;
                    AgentScript {
                        id: format!("cons{i}"),
                        x0: (i / 2) as f64 * sc.spacing_m
                            + lane as f64 * sc.spacing_m * 0.5
                            + stagger,
                        vx: v,
                        y: Box::new(move |_| y),
                    }
                })
                .collect();
            Layout { scripts, events: Vec::new(), weave_extrema: Vec::new() }
        }
        ScenarioKind::OverspeedingPass => {
            // parked queue in lane 0; the fast agent sweeps past in lane 1,
            // acquiring one queue agent per sub-interval of the pass window
            let k = sc.agents - 1;
            let v_fast = wobble(&mut rng, sc.fast_speed_mps, 0.03);
            let (w0, w1) = sc.pass_window;
            let reach = (sc.mu_m * sc.mu_m - sc.lane_width_m * sc.lane_width_m).sqrt();
            // inset the first and last acquisitions half a frame inside the
            // window so the strict distance inequality lands within it
            let span = ((w1 - w0) as f64 - 1.0).max(1.0) * dt * v_fast;
            // center-dense acquisition schedule: the encounter rate peaks at
            // the window midpoint, so the degree-derivative argmax lands there
            let warp = |u: f64| u + 0.6 * (u - smoothstep(u));
            let q0 = 0.0;
            let mut scripts: Vec<AgentScript> = (0..k)
                .map(|i| {
                    let u = if k > 1 { i as f64 / (k - 1) as f64 } else { 0.0 };
                    AgentScript {
                        id: format!("queue{i}"),
                        x0: q0 + warp(u) * span,
                        vx: 0.0,
                        y: Box::new(|_| 0.0),
                    }
                })
                .collect();
            let lane = sc.lane_width_m;
            // first queue agent enters range half a frame after w0
            let x_s0 = q0 - reach - v_fast * dt * (w0 as f64 + 0.5);
            scripts.push(AgentScript {
                id: "speeder".into(),
                x0: x_s0,
                vx: v_fast,
                y: Box::new(move |_| lane),
            });
            let expected = (w0 + w1) as f64 / 2.0;
            let events = vec![GroundTruthEvent {
                agent_id: "speeder".into(),
                style: Style::Overspeeding,
                window: (w0, w1),
                expected_frame: expected,
            }];
            Layout { scripts, events, weave_extrema: Vec::new() }
        }
        ScenarioKind::OvertakeSingle => {
            // both agents stay within mu for the whole run; the overtaker
            // pulls out, passes close, and merges back
            let v_slow = sc.speed_mps;
            let rel = wobble(&mut rng, sc.fast_speed_mps - sc.speed_mps, 0.08).max(0.8);
            let v_fast = v_slow + rel;
            let pass_offset = wobble(&mut rng, 2.2, 0.08);
            let frames = sc.frames as f64;
            // start 8 m behind, schedule the alongside moment, keep the final
            // gap below mu
            let x_rel0 = -8.0;
            let closest = (-x_rel0) / (rel * dt);
            let out_start = (closest - 27.0).max(5.0);
            let out_end = out_start + 14.0;
            // the merge back is deliberately slower than the pull-out so the
            // closeness-derivative peak sits on the pull-out side
            let back_start = closest + 13.0;
            let back_end = (back_start + 28.0).min(frames - 1.0);
            let y_out_start = out_start;
            let y_out_end = out_end;
            let y_back_start = back_start;
            let y_back_end = back_end;
            let scripts = vec![
                AgentScript {
                    id: "lead".into(),
                    x0: 0.0,
                    vx: v_slow,
                    y: Box::new(|_| 0.0),
                },
                AgentScript {
                    id: "overtaker".into(),
                    x0: x_rel0,
                    vx: v_fast,
                    y: Box::new(move |t| {
                        if t < y_out_start {
                            0.0
                        } else if t < y_out_end {
                            pass_offset * smoothstep((t - y_out_start) / (y_out_end - y_out_start))
                        } else if t < y_back_start {
                            pass_offset
                        } else if t < y_back_end {
                            pass_offset
                                * (1.0 - smoothstep((t - y_back_start) / (y_back_end - y_back_start)))
                        } else {
                            0.0
                        }
                    }),
                },
            ];
            // humans flag an overtake as it unfolds between the pull-out and
            // the alongside moment
            let expected = (out_end + closest) / 2.0;
            let events = vec![GroundTruthEvent {
                agent_id: "overtaker".into(),
                style: Style::OvertakingOrSuddenLaneChange,
                window: (out_start.floor() as u64, back_end.ceil() as u64),
                expected_frame: expected,
            }];
            Layout { scripts, events, weave_extrema: Vec::new() }
        }
        ScenarioKind::SuddenLaneChange => {
            // escorts co-moving in the target lane; the subject cuts over
            let v = sc.speed_mps;
            let change_mid = sc.frames as f64 / 2.0 + (rng.gen::<f64>() - 0.5) * 6.0;
            let change_len = sc.lane_change_frames.max(2) as f64;
            let c_start = change_mid - change_len / 2.0;
            let c_end = change_mid + change_len / 2.0;
            let lane = sc.lane_width_m;
            let escorts = sc.agents - 1;
            let mut scripts: Vec<AgentScript> = (0..escorts)
                .map(|i| {
                    let side = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let slot = (i / 2 + 1) as f64;
                    AgentScript {
                        id: format!("escort{i}"),
                        x0: side * slot * 3.0,
                        vx: v,
                        y: Box::new(move |_| lane),
                    }
                })
                .collect();
            scripts.push(AgentScript {
                id: "subject".into(),
                x0: 0.0,
                vx: v,
                y: Box::new(move |t| {
                    lane * smoothstep((t - c_start) / (c_end - c_start))
                }),
            });
            let events = vec![GroundTruthEvent {
                agent_id: "subject".into(),
                style: Style::OvertakingOrSuddenLaneChange,
                window: ((c_start - 5.0).max(0.0) as u64, (c_end + 5.0) as u64),
                expected_frame: change_mid,
            }];
            Layout { scripts, events, weave_extrema: Vec::new() }
        }
        ScenarioKind::WeavingSinusoid => {
            // escorts co-moving in lane 0; the weaver oscillates about lane 1,
            // always on one side of the escorts so closeness extrema coincide
            // with lateral extrema
            let v = sc.speed_mps;
            let amp = wobble(&mut rng, sc.lateral_amplitude_m, 0.05).min(sc.lane_width_m - 0.4);
            let period = sc.oscillation_period_frames as f64;
            let phase = rng.gen::<f64>() * 2.0 * PI;
            let escorts = sc.agents - 1;
            let mut scripts: Vec<AgentScript> = (0..escorts)
                .map(|i| {
                    let side = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let slot = (i / 2 + 1) as f64;
                    AgentScript {
                        id: format!("escort{i}"),
                        x0: side * slot * 4.0,
                        vx: v,
                        y: Box::new(|_| 0.0),
                    }
                })
                .collect();
            let lane = sc.lane_width_m;
            let omega = 2.0 * PI / period;
            scripts.push(AgentScript {
                id: "weaver".into(),
                x0: 0.0,
                vx: v,
                y: Box::new(move |t| lane + amp * (omega * t + phase).sin()),
            });
            let extrema = sine_extrema(phase, period, sc.frames);
            let events = if extrema.len() >= 2 {
                let mid = extrema[extrema.len() / 2];
                vec![GroundTruthEvent {
                    agent_id: "weaver".into(),
                    style: Style::Weaving,
                    window: (
                        extrema.first().copied().unwrap().round() as u64,
                        extrema.last().copied().unwrap().round() as u64,
                    ),
                    expected_frame: mid,
                }]
            } else {
                Vec::new()
            };
            Layout { scripts, events, weave_extrema: extrema }
        }
        ScenarioKind::Mixed => {
            // 2x2 platoon block; a weaver oscillating alongside the block's
            // upper row (one-sided, so all its neighbor distances swing in
            // phase); a fast agent sweeping past below the block. Everyone
            // stays connected to the block for the whole run.
            let v = sc.speed_mps;
            let lane = sc.lane_width_m;
            let platoon = sc.agents - 2;
            let mut scripts: Vec<AgentScript> = (0..platoon)
                .map(|i| {
                    let row = i % 2;
                    let y = row as f64 * lane;
                    AgentScript {
                        id: format!("cons{i}"),
                        x0: (i / 2) as f64 * 6.0,
                        vx: v,
                        y: Box::new(move |_| y),
                    }
                })
                .collect();
            let block_len = ((platoon - 1) / 2) as f64 * 6.0;
            // the amplitude is capped so the weaver starts within mu of the
            // whole block for any phase; every qualifying neighbor is then
            // counted at frame 0 and its degree series stays constant
            let amp = 2.0 + rng.gen::<f64>() * 0.15;
            let period = sc.oscillation_period_frames as f64;
            let phase = rng.gen::<f64>() * 2.0 * PI;
            let weave_center = lane + amp + 0.8;
            let v_w = v + 0.15;
            let omega = 2.0 * PI / period;
            scripts.push(AgentScript {
                id: "weaver".into(),
                x0: 1.5,
                vx: v_w,
                y: Box::new(move |t| weave_center + amp * (omega * t + phase).sin()),
            });
            let v_s = v + 0.8;
            let y_s = -lane;
            scripts.push(AgentScript {
                id: "speeder".into(),
                x0: -4.0,
                vx: v_s,
                y: Box::new(move |_| y_s),
            });
            let extrema = sine_extrema(phase, period, sc.frames);
            let mut events = Vec::new();
            if extrema.len() >= 2 {
                events.push(GroundTruthEvent {
                    agent_id: "weaver".into(),
                    style: Style::Weaving,
                    window: (
                        extrema.first().copied().unwrap().round() as u64,
                        extrema.last().copied().unwrap().round() as u64,
                    ),
                    expected_frame: extrema[extrema.len() / 2],
                });
            }
            // the speeder acquires the block column by column: the far
            // column of its adjacent row first, then the far column of the
            // upper row, and possibly the weaver. The window covers the
            // whole acquisition phase; the expectation sits at the first
            // mid-run acquisition, where equal-height derivative peaks tie.
            let reach_near = (sc.mu_m * sc.mu_m - lane * lane).sqrt();
            let reach_far = (sc.mu_m * sc.mu_m - (2.0 * lane) * (2.0 * lane)).sqrt();
            let dx_rel = (v_s - v) * dt;
            let first_step = ((block_len - reach_near + 4.0) / dx_rel).max(0.0);
            let last_step = ((block_len - reach_far + 4.0) / dx_rel).max(0.0);
            events.push(GroundTruthEvent {
                agent_id: "speeder".into(),
                style: Style::Overspeeding,
                window: (0, (last_step + 40.0).min(sc.frames as f64 - 1.0) as u64),
                expected_frame: first_step.min(sc.frames as f64 - 1.0),
            });
            Layout { scripts, events, weave_extrema: extrema }
        }
    }
}

/// Generates the scenario's trajectory dataset and ground-truth events.
pub fn generate(sc: &Scenario) -> Result<(TrajectoryDataset, Vec<GroundTruthEvent>)> {
    sc.validate()?;
    let lay = layout(sc);
    let dt = 1.0 / sc.frame_rate_hz;
    let mut jitter_rng = ChaCha8Rng::seed_from_u64(sc.seed ^ 0x6A09_E667_F3BC_C908);
    let mut points = Vec::with_capacity(sc.frames * lay.scripts.len());
    for script in &lay.scripts {
        for t in 0..sc.frames {
            let tf = t as f64;
            let mut x = script.x0 + script.vx * dt * tf;
            let mut y = (script.y)(tf);
            if sc.jitter_m > 0.0 {
                x += (jitter_rng.gen::<f64>() - 0.5) * 2.0 * sc.jitter_m;
                y += (jitter_rng.gen::<f64>() - 0.5) * 2.0 * sc.jitter_m;
            }
            points.push(TrajectoryPoint {
                agent_id: script.id.clone(),
                frame: t as u64,
                x,
                y,
            });
        }
    }
    let ds = TrajectoryDataset::from_points(points, sc.frame_rate_hz)?;
    Ok((ds, lay.events))
}

/// Scripted lateral-extremum frames of the weaving subject, for scenarios
/// that have one. Fractional frames; same derivation as `generate`.
pub fn scripted_weave_extrema(sc: &Scenario) -> Result<Vec<f64>> {
    sc.validate()?;
    Ok(layout(sc).weave_extrema)
}

/// Serializes ground-truth events as the truth JSON schema.
pub fn truth_to_json(events: &[GroundTruthEvent]) -> String {
    let items: Vec<serde_json::Value> = events
        .iter()
        .map(|e| {
            serde_json::json!({
                "agent_id": e.agent_id,
                "style": e.style.as_str(),
                "window": [e.window.0, e.window.1],
                "expected_frame": e.expected_frame,
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({ "events": items }))
        .expect("truth serializes")
}
