//! Scenario catalog, grid runner, report emission and the invariant suite.

pub mod report;
pub mod runner;
pub mod scenario;
pub mod verify;
