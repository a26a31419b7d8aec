//! Finite metric spaces, dyadic cube systems, cover-based dimension
//! estimates and distortion experiments for Hölder and Sobolev-type maps.

pub mod dimension;
pub mod distortion;
pub mod dyadic;
pub mod error;
pub mod generators;
pub mod holder;
pub mod io;
pub mod metric;
pub mod stats;

pub use error::{Error, Result};
pub use metric::{BaseMetric, FiniteMetricSpace, Metric, SubsetRef};
