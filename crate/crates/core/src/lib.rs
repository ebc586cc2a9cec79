//! Irrigation water allocation planning.
//!
//! Given a scenario describing crops, monthly hydrology, and system limits,
//! this crate finds cropping plans and reservoir release schedules that trade
//! off two competing goals: total net benefit from the harvest, and the
//! shortfall of environmental flow releases below their monthly targets.
//!
//! The pipeline: [`scenario`] defines and validates input data, [`eval`]
//! scores a candidate plan, [`lp`] is a self-contained simplex solver,
//! [`models`] assembles the planning linear programs, [`front`] traces the
//! benefit/shortfall trade-off curve by weighted scalarization, [`ga`] is an
//! independent evolutionary baseline, and [`formats`] handles file I/O.

pub mod cli;
pub mod eval;
pub mod formats;
pub mod front;
pub mod ga;
pub mod lp;
pub mod models;
pub mod scenario;

pub use eval::{AllocationPlan, EvalError, ObjectivePair, WaterBalance};
pub use front::{FrontConfig, FrontResult, ParetoPoint, PointSource};
pub use models::WeightPair;
pub use scenario::{RawScenario, Scenario, ValidationReport};
