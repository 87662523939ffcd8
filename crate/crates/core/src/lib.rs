pub mod ergm;
pub mod config;
pub mod error;
pub mod gof;
pub mod graph;
pub mod kernels;
pub mod rng;
pub mod stein;

pub use ergm::ErgmModel;
pub use error::{Error, Result};
pub use graph::Graph;
