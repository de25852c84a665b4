//! Reference solvers bracketing the distributed optimizer: a centralized
//! batch solve of the whole team problem (the quality ceiling) and fully
//! independent per-robot solves that ignore inter-robot measurements (the
//! no-communication floor).

use thiserror::Error;

use crate::datasets::MultiRobotProblem;
use crate::factorgraph::{
    optimize, FactorGraph, FactorGraphError, OptimizeResult, RobotId, SolverConfig, Values,
};
use crate::metrics::{mean_residual, MetricsError};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error(transparent)]
    Graph(#[from] FactorGraphError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Solves the aggregated problem with every factor and one canonical copy
/// per variable (the lowest holder's copy seeds shared variables). The
/// aggregate must be gauge fixed by some prior; an unanchored aggregate
/// fails with an indefinite system.
pub fn centralized<S: Real>(
    problem: &MultiRobotProblem<S>,
    config: &SolverConfig,
) -> Result<OptimizeResult<S>, FactorGraphError> {
    let graph = FactorGraph::with_factors(
        problem.all_factors().into_iter().cloned().collect(),
    );
    optimize(&graph, &problem.merged_initial(), config)
}

#[derive(Debug, Clone)]
pub struct IndependentResult<S: Real> {
    /// Each robot's solution over its own variables only.
    pub solutions: Vec<(RobotId, Values<S>)>,
    /// Mean residual over *all* problem factors, including the inter-robot
    /// factors the solves ignored, averaged over combination sets.
    pub r2_mean: S,
}

/// Solves each robot alone: inter-robot factors and foreign variable copies
/// are dropped, and the robot's anchor (when present) fixes its gauge. The
/// returned score still charges the ignored inter-robot factors, which is
/// what makes this the floor any cooperative method has to beat. Robots
/// whose local graph carries no prior or anchor fail with an indefinite
/// system, as partitioned benchmarks do by construction.
pub fn independent<S: Real>(
    problem: &MultiRobotProblem<S>,
    config: &SolverConfig,
) -> Result<IndependentResult<S>, BaselineError> {
    let mut solutions: Vec<(RobotId, Values<S>)> = Vec::with_capacity(problem.robots.len());
    for robot in &problem.robots {
        let mut local = FactorGraph::new();
        for factor in robot.graph.factors() {
            if factor.keys().iter().all(|k| k.robot == robot.id) {
                local.add(factor.clone());
            }
        }
        if let Some(anchor) = &robot.anchor {
            local.add(anchor.clone());
        }
        let native: Values<S> = robot
            .initial
            .iter()
            .filter(|(k, _)| k.robot == robot.id)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        let result = optimize(&local, &native, config)?;
        solutions.push((robot.id, result.values));
    }
    let copies: Vec<(RobotId, &Values<S>)> =
        solutions.iter().map(|(id, v)| (*id, v)).collect();
    let r2_mean = mean_residual(&problem.all_factors(), &copies)?;
    Ok(IndependentResult { solutions, r2_mean })
}
