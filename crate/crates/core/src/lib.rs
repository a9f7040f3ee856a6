//! Release planning core: effort estimation, stakeholder weighting, feedback
//! scaling and constrained requirement selection.

pub mod bench;
pub mod estimation;
pub mod feedback;
pub mod model;
pub mod optimizer;
pub mod planner;
pub mod protocol;
pub mod stakeholders;
