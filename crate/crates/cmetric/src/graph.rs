//! Per-frame weighted geometric graphs over agent positions.
//!
//! Two agents share an edge when their Euclidean distance is strictly less
//! than the threshold `mu`; the edge weight is the distance itself. The
//! module also maintains an incremental Laplacian across frames: the update
//! appends a row/column for each newly seen agent plus a sparse correction
//! for new edges, which is equivalent to rebuilding D - A over the union of
//! all edges seen so far with each edge at its most recent weight. The state
//! resets to the zero matrix when the number of distinct agents would exceed
//! the configured maximum.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::ingest::{Point, TrajectoryDataset};

/// One dynamic-geometric-graph snapshot: agents present at a frame plus the
/// symmetric distance-weighted adjacency among those closer than `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGraph {
    frame: u64,
    mu: f64,
    /// (dataset agent index, position), in dataset order.
    vertices: Vec<(usize, Point)>,
    /// Dense row-major n x n matrix; 0.0 means no edge.
    adjacency: Vec<f64>,
}

impl FrameGraph {
    pub fn frame(&self) -> u64 {
        self.frame
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[(usize, Point)] {
        &self.vertices
    }

    /// Local vertex index of a dataset agent, if present at this frame.
    pub fn vertex_of_agent(&self, agent_idx: usize) -> Option<usize> {
        self.vertices.iter().position(|&(a, _)| a == agent_idx)
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[i * self.len() + j]
    }

    /// Neighbors of local vertex `i` as (local index, edge weight).
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let n = self.len();
        self.adjacency[i * n..(i + 1) * n]
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w != 0.0)
            .map(|(j, &w)| (j, w))
    }

    /// Row sum of the adjacency, accumulated in ascending column order.
    pub fn degree(&self, i: usize) -> f64 {
        let n = self.len();
        let mut sum = 0.0;
        for j in 0..n {
            sum += self.adjacency[i * n + j];
        }
        sum
    }
}

/// Builds the frame graph at `frame` with distance threshold `mu`.
/// An edge exists iff 0 < distance < mu (strict); its weight is the distance.
pub fn build_frame_graph(ds: &TrajectoryDataset, frame: u64, mu: f64) -> Result<FrameGraph> {
    if !(mu > 0.0) {
        return Err(Error::Parameter(format!("mu must be positive, got {mu}")));
    }
    let (min, max) = ds
        .frame_range()
        .ok_or_else(|| Error::Validation("dataset has no agents".into()))?;
    if frame < min || frame > max {
        return Err(Error::FrameOutOfRange { frame, min, max });
    }
    let vertices = ds.agents_at_frame(frame);
    let n = vertices.len();
    let mut adjacency = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = vertices[i].1.distance(&vertices[j].1);
            if d > 0.0 && d < mu {
                adjacency[i * n + j] = d;
                adjacency[j * n + i] = d;
            }
        }
    }
    Ok(FrameGraph { frame, mu, vertices, adjacency })
}

/// Diagonal degree matrix D with D(i,i) = row sum of the adjacency.
pub fn degree_matrix(g: &FrameGraph) -> Vec<f64> {
    let n = g.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        d[i * n + i] = g.degree(i);
    }
    d
}

/// Laplacian L = D - A. The diagonal is the ascending-order row sum of A, so
/// summing a row's off-diagonal entries in ascending order and then adding
/// the diagonal yields exactly 0.0.
pub fn laplacian(g: &FrameGraph) -> Vec<f64> {
    let n = g.len();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                l[i * n + j] = -g.weight(i, j);
            }
        }
        l[i * n + i] = g.degree(i);
    }
    l
}

/// Incremental Laplacian over the history of frame graphs.
///
/// Agents get stable indices in first-appearance order. An edge observed at
/// any past frame is retained; when the same pair is adjacent again the
/// weight refreshes to the latest distance. The matrix is fixed at
/// `n_max x n_max` and zero outside the active block.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianState {
    n_max: usize,
    matrix: Vec<f64>,
    /// dataset agent index -> assigned matrix index, insertion-ordered.
    index_of: BTreeMap<usize, usize>,
    /// union edges keyed by (min,max) matrix index, value = latest weight.
    edges: BTreeMap<(usize, usize), f64>,
}

impl LaplacianState {
    /// Zero matrix of size `n_max x n_max` with no agents assigned.
    pub fn new(n_max: usize) -> Self {
        Self {
            n_max,
            matrix: vec![0.0; n_max * n_max],
            index_of: BTreeMap::new(),
            edges: BTreeMap::new(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn active_count(&self) -> usize {
        self.index_of.len()
    }

    /// Full `n_max x n_max` matrix, row-major.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[i * self.n_max + j]
    }

    /// Matrix index assigned to a dataset agent, if seen since the last reset.
    pub fn index_of_agent(&self, agent_idx: usize) -> Option<usize> {
        self.index_of.get(&agent_idx).copied()
    }

    /// Folds one frame graph into the state; returns the dataset indices of
    /// agents that were newly assigned a matrix slot by this update. If the
    /// active count would exceed `n_max` the state first resets to zero.
    pub fn update(&mut self, g: &FrameGraph) -> Vec<usize> {
        let incoming: Vec<usize> = g
            .vertices()
            .iter()
            .map(|&(a, _)| a)
            .filter(|a| !self.index_of.contains_key(a))
            .collect();
        if self.index_of.len() + incoming.len() > self.n_max {
            self.matrix.iter_mut().for_each(|v| *v = 0.0);
            self.index_of.clear();
            self.edges.clear();
        }
        let mut new_agents = Vec::new();
        for &(a, _) in g.vertices() {
            if !self.index_of.contains_key(&a) {
                let next = self.index_of.len();
                self.index_of.insert(a, next);
                new_agents.push(a);
            }
        }
        for (vi, &(a, _)) in g.vertices().iter().enumerate() {
            let mi = self.index_of[&a];
            for (vj, w) in g.neighbors(vi) {
                if vj <= vi {
                    continue;
                }
                let mj = self.index_of[&g.vertices()[vj].0];
                let key = (mi.min(mj), mi.max(mj));
                self.edges.insert(key, w);
            }
        }
        self.rebuild();
        new_agents
    }

    /// Rebuilds the active block as D - A over the union edges. Rebuilding
    /// rather than patching keeps the diagonal equal to the ascending-order
    /// row sum after weight refreshes.
    fn rebuild(&mut self) {
        let n = self.n_max;
        let active = self.index_of.len();
        for i in 0..active {
            for j in 0..n {
                self.matrix[i * n + j] = 0.0;
                self.matrix[j * n + i] = 0.0;
            }
        }
        for (&(i, j), &w) in &self.edges {
            self.matrix[i * n + j] = -w;
            self.matrix[j * n + i] = -w;
        }
        for i in 0..active {
            let mut sum = 0.0;
            for j in 0..active {
                if j != i {
                    sum += -self.matrix[i * n + j];
                }
            }
            self.matrix[i * n + i] = sum;
        }
    }
}
