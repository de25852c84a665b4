//! Distributed consensus optimizer over robot pairs.

pub mod admm;
pub mod constraint;

pub use admm::{
    default_budget, DualRule, EdgeState, Message, MesaConfig, MesaError, RobotNode, StopCriteria,
    Team,
};
pub use constraint::{
    constraint_eval, dual_update, pairwise_gap, to_edge_value, z_update, ConstraintError,
    ConstraintKind, EdgeValue,
};
