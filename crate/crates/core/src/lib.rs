//! Optimal thinning of marked point processes whose points die, grow and are born.

pub mod analytic_hardcore;
pub mod analytic_poisson;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod growth;
pub mod integrate;
pub mod model;
pub mod pattern;
pub mod policy;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use geometry::{Point, Window};
pub use growth::GrowthFunction;
pub use model::{MarkLaw, ModelParams};
pub use pattern::{Action, MarkedPoint, Pattern};
pub use policy::{Policy, PolicySpec};
pub use rng::RngStream;
pub use simulate::{SimConfig, SimResult};
