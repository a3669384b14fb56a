//! Degenerate Richards equation: analytic wetting-front bounds and a
//! regularized finite-volume solver.

pub mod constitutive;
pub mod exec;
pub mod front;
pub mod solver;
pub mod numeric;
pub mod scenario;
pub mod verification;

pub use constitutive::{SoilModel, PresetP};
pub use exec::Execution;
pub use scenario::Scenario;
