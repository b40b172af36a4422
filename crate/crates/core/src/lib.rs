//! Stationary simple random graphs on the integer line with prescribed iid
//! vertex degrees.
//!
//! Every vertex `i` of a finite window of ℤ receives `D_i` stubs drawn iid
//! from a [`DegreeDistribution`]. The stubs are paired either by the
//! coin-toss model ([`ct`]), which works for bounded degrees, or by the
//! cluster model ([`cluster`]), which treats stubs above a truncation level
//! `d` separately and keeps the mean total edge length per vertex finite
//! whenever the degrees have a finite second moment.
//!
//! The [`analysis`] module turns repeated runs into a [`SimulationReport`]
//! with Monte-Carlo estimates, closed-form predictions where they exist, and
//! a full invariant audit. The [`cli`] module backs the `stubline` binary.
//!
//! ```
//! use stubline::{ct, distributions::sample_configuration, DegreeDistribution, StreamKey, Window};
//!
//! let dist: DegreeDistribution = "const:2".parse().unwrap();
//! let window = Window::new(0, 99, 8).unwrap();
//! let key = StreamKey::new(7);
//! let config = sample_configuration(&dist, &window, key);
//! let graph = ct::run_ct(&config, key).unwrap();
//! assert!(graph.edges().iter().all(|e| e.length() == 1 || e.length() == 3));
//! ```

pub mod analysis;
pub mod cli;
pub mod cluster;
pub mod ct;
pub mod distributions;
mod error;
pub mod model;
pub mod oracle;
pub mod seed;

pub use analysis::{Model, SimulationReport};
pub use distributions::{DegreeDistribution, TruncationChoice};
pub use error::{Error, Result, SpecError};
pub use model::{Edge, PairedGraph, Provenance, StubConfiguration, VertexMetrics, Window};
pub use seed::StreamKey;
