//! Driving-style classification from 2-D vehicle trajectories.
//!
//! The pipeline builds a distance-thresholded geometric graph over the
//! agents present at each frame, tracks two per-agent centrality time
//! series (closeness over shortest paths, and a cumulative count of newly
//! encountered slower neighbors), smooths them with local polynomial fits,
//! and reads driving styles off the derivative magnitudes: overspeeding
//! from the degree row, overtaking/sudden lane-changes and weaving from the
//! closeness row, conservative driving from both rows staying flat.
//!
//! A deterministic synthetic-scenario generator provides ground truth for
//! tests and for the time-deviation-error evaluation protocol.

pub mod centrality;
pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod signal;
pub mod styles;
pub mod synth;

pub use config::{Config, Thresholds};
pub use error::{Error, Result};
pub use ingest::{Format, TrajectoryDataset};
pub use styles::{classify, StyleReport};
