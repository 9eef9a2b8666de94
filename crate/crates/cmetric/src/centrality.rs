//! Closeness and cumulative degree centrality time series.
//!
//! Closeness at a frame is `|R| / sum of shortest-path costs to R`, where R
//! is the set of vertices reachable from the agent over the frame graph's
//! weighted edges. On a connected graph this is the classic
//! (N-1) / total-distance form; isolated agents score 0.
//!
//! The degree series is cumulative: at each frame an agent gains one count
//! per adjacent agent that is no faster than itself and has never shared an
//! edge with it at any earlier frame. Prior adjacency disqualifies a
//! neighbor regardless of whether it passed the speed test when first seen.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{build_frame_graph, FrameGraph};
use crate::ingest::{estimate_velocities, TrajectoryDataset};

/// Per-agent centrality series covering the agent's frame interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralitySeries {
    pub agent_id: String,
    pub start_frame: u64,
    /// Closeness centrality per frame, 1/meters.
    pub closeness: Vec<f64>,
    /// Cumulative degree centrality per frame.
    pub degree: Vec<u64>,
}

impl CentralitySeries {
    pub fn end_frame(&self) -> u64 {
        self.start_frame + self.closeness.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.closeness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closeness.is_empty()
    }
}

/// Set of agents that have ever been adjacent to one agent.
#[derive(Debug, Clone, Default)]
pub struct NeighborHistory {
    ever_adjacent: HashSet<usize>,
}

impl NeighborHistory {
    pub fn contains(&self, agent_idx: usize) -> bool {
        self.ever_adjacent.contains(&agent_idx)
    }

    pub fn len(&self) -> usize {
        self.ever_adjacent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ever_adjacent.is_empty()
    }
}

/// Single-source shortest-path distances from local vertex `source` over the
/// frame graph's weighted edges. Unreachable vertices get +inf.
fn dijkstra(g: &FrameGraph, source: usize) -> Vec<f64> {
    let n = g.len();
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0u64, source)));
    while let Some(Reverse((d_bits, u))) = heap.pop() {
        let d = f64::from_bits(d_bits);
        if d > dist[u] {
            continue;
        }
        for (v, w) in g.neighbors(u) {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd.to_bits(), v)));
            }
        }
    }
    dist
}

/// Closeness centrality of a dataset agent within one frame graph.
pub fn closeness_at(g: &FrameGraph, agent_idx: usize) -> Result<f64> {
    let source = g
        .vertex_of_agent(agent_idx)
        .ok_or_else(|| Error::AgentNotPresent(format!("agent index {agent_idx}")))?;
    Ok(closeness_of_vertex(g, source))
}

fn closeness_of_vertex(g: &FrameGraph, source: usize) -> f64 {
    let dist = dijkstra(g, source);
    let mut reachable = 0usize;
    let mut total = 0.0;
    for (v, &d) in dist.iter().enumerate() {
        if v != source && d.is_finite() {
            reachable += 1;
            total += d;
        }
    }
    if reachable == 0 || total == 0.0 {
        0.0
    } else {
        reachable as f64 / total
    }
}

/// One step of the cumulative degree recurrence for local vertex `i` of `g`.
/// `speeds` maps dataset agent index -> speed at this frame and must cover
/// every agent adjacent to `i`. Returns the new value and updates `history`
/// with all agents adjacent at this frame.
pub fn degree_step(
    history: &mut NeighborHistory,
    g: &FrameGraph,
    i: usize,
    speeds: &HashMap<usize, f64>,
    prev_value: u64,
) -> Result<u64> {
    let agent_idx = g.vertices()[i].0;
    let own_speed = *speeds
        .get(&agent_idx)
        .ok_or_else(|| Error::Internal(format!("missing velocity for agent index {agent_idx}")))?;
    let mut gained = 0u64;
    let mut adjacent_now = Vec::new();
    for (j, _) in g.neighbors(i) {
        let other = g.vertices()[j].0;
        let other_speed = *speeds.get(&other).ok_or_else(|| {
            Error::Internal(format!("missing velocity for adjacent agent index {other}"))
        })?;
        if other_speed <= own_speed && !history.contains(other) {
            gained += 1;
        }
        adjacent_now.push(other);
    }
    // every edge seen this frame disqualifies the pair at later frames,
    // whether or not the speed test passed now
    history.ever_adjacent.extend(adjacent_now);
    Ok(prev_value + gained)
}

/// Computes closeness and cumulative degree series for every agent.
/// Closeness is evaluated independently per frame; the degree recurrence
/// runs in frame order with per-agent neighbor histories.
pub fn compute_series(ds: &TrajectoryDataset, mu: f64) -> Result<HashMap<String, CentralitySeries>> {
    let velocities = estimate_velocities(ds);
    let na = ds.agent_count();
    let mut series: Vec<CentralitySeries> = ds
        .agents()
        .iter()
        .map(|a| CentralitySeries {
            agent_id: a.id.clone(),
            start_frame: a.start_frame,
            closeness: Vec::with_capacity(a.positions.len()),
            degree: Vec::with_capacity(a.positions.len()),
        })
        .collect();
    let mut histories: Vec<NeighborHistory> = vec![NeighborHistory::default(); na];
    let mut prev_degree: Vec<u64> = vec![0; na];

    let Some((t_min, t_max)) = ds.frame_range() else {
        return Ok(HashMap::new());
    };
    for frame in t_min..=t_max {
        let g = build_frame_graph(ds, frame, mu)?;
        if g.is_empty() {
            continue;
        }
        let speeds: HashMap<usize, f64> = g
            .vertices()
            .iter()
            .map(|&(a, _)| {
                let s = velocities.speed(ds, a, frame).ok_or_else(|| {
                    Error::Internal(format!("no velocity for agent index {a} at frame {frame}"))
                })?;
                Ok((a, s))
            })
            .collect::<Result<_>>()?;
        for (i, &(agent_idx, _)) in g.vertices().iter().enumerate() {
            let zc = closeness_of_vertex(&g, i);
            let zd = degree_step(&mut histories[agent_idx], &g, i, &speeds, prev_degree[agent_idx])?;
            prev_degree[agent_idx] = zd;
            series[agent_idx].closeness.push(zc);
            series[agent_idx].degree.push(zd);
        }
    }
    Ok(series.into_iter().map(|s| (s.agent_id.clone(), s)).collect())
}
