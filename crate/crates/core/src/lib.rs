pub mod analysis;
pub mod ch_solver;
pub mod config;
pub mod constitutive;
pub mod coupled;
pub mod error;
pub mod grid;
pub mod ns_solver;
pub mod scenario;

pub use config::{parse_config, RunConfig};
pub use error::{Error, Result};
pub use scenario::Scenario;
