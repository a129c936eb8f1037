//! Coverage analysis for cellular networks in which clusters of two or three
//! adjacent base stations jointly serve the users of a shared region.
//!
//! The crate covers the hexagonal geometry and its reuse-6 coloring, the
//! average inter-region interference, lognormal moment-matched coverage and
//! capacity, a Monte-Carlo simulator for the same model, and a density solver.

pub mod coverage;
pub mod design;
pub mod error;
pub mod geometry;
pub mod icri;
pub mod montecarlo;
pub mod units;

pub use error::{Error, Result};
pub use units::{CoopOrder, NetworkConfig, PowerW};
