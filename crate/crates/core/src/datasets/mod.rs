//! Multi-robot problem construction: synthetic generation, g2o ingestion,
//! partitioning, and text serialization.

pub mod g2o;
pub mod multirobot;
pub mod partition;
pub mod synthetic;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::factorgraph::{Factor, FactorGraph, FactorGraphError, RobotId, Values, VariableKey};
use crate::scalar::Real;

pub use g2o::{load_g2o, parse_g2o, write_g2o};
pub use multirobot::{load_problem, parse_problem, write_problem};
pub use partition::{partition, partition_with_assignment, read_partition_file};
pub use synthetic::{generate, InterMeasurement, SyntheticConfig};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported record tag {tag:?} at line {line}")]
    UnsupportedTag { line: usize, tag: String },
    #[error("graph is disconnected")]
    Disconnected,
    #[error(transparent)]
    Graph(#[from] FactorGraphError),
}

impl DatasetError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        DatasetError::Parse { line, message: message.into() }
    }
}

/// Whitespace token cursor over one record line, reporting the line number
/// on every failure.
pub(crate) struct Tokens<'a> {
    line: usize,
    iter: std::str::SplitWhitespace<'a>,
}

impl<'a> Tokens<'a> {
    pub(crate) fn new(line: usize, text: &'a str) -> Self {
        Self { line, iter: text.split_whitespace() }
    }

    pub(crate) fn line(&self) -> usize {
        self.line
    }

    pub(crate) fn next(&mut self, what: &str) -> Result<&'a str, DatasetError> {
        self.iter
            .next()
            .ok_or_else(|| DatasetError::parse(self.line, format!("missing {what}")))
    }

    pub(crate) fn try_next(&mut self) -> Option<&'a str> {
        self.iter.next()
    }

    pub(crate) fn f64(&mut self, what: &str) -> Result<f64, DatasetError> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| DatasetError::parse(self.line, format!("bad {what}: {tok:?}")))
    }

    pub(crate) fn u64(&mut self, what: &str) -> Result<u64, DatasetError> {
        let tok = self.next(what)?;
        tok.parse()
            .map_err(|_| DatasetError::parse(self.line, format!("bad {what}: {tok:?}")))
    }

    /// Consumes the cursor, rejecting unparsed trailing tokens.
    pub(crate) fn done(mut self) -> Result<(), DatasetError> {
        match self.iter.next() {
            Some(tok) => Err(DatasetError::parse(
                self.line,
                format!("unexpected trailing token {tok:?}"),
            )),
            None => Ok(()),
        }
    }
}

/// One robot's share of a multi-robot problem.
#[derive(Debug, Clone)]
pub struct RobotProblem<S: Real> {
    pub id: RobotId,
    /// The robot's measurement factors, including inter-robot factors
    /// assigned to it.
    pub graph: FactorGraph<S>,
    /// Initial estimates of every variable the robot holds, including its
    /// copies of shared variables.
    pub initial: Values<S>,
    /// Gauge prior used only when the robot solves in isolation (the
    /// Independent baseline). Absent when the robot's own graph already
    /// contains a prior.
    pub anchor: Option<Factor<S>>,
}

/// A team estimation problem: disjoint per-robot factor sets over globally
/// keyed variables; a variable is shared when several robots hold it.
#[derive(Debug, Clone)]
pub struct MultiRobotProblem<S: Real> {
    pub robots: Vec<RobotProblem<S>>,
    /// Single-copy ground truth, absent for benchmark ingestion.
    pub ground_truth: Values<S>,
}

impl<S: Real> MultiRobotProblem<S> {
    /// Shared-variable registry derived from holder sets: for each robot
    /// pair with intersecting variables, the sorted shared keys.
    pub fn shared_registry(&self) -> BTreeMap<(RobotId, RobotId), Vec<VariableKey>> {
        let mut registry = BTreeMap::new();
        for a in 0..self.robots.len() {
            for b in a + 1..self.robots.len() {
                let shared: Vec<VariableKey> = self.robots[a]
                    .initial
                    .keys()
                    .filter(|k| self.robots[b].initial.contains(k))
                    .copied()
                    .collect();
                if !shared.is_empty() {
                    registry.insert((self.robots[a].id, self.robots[b].id), shared);
                }
            }
        }
        registry
    }

    /// Per-robot inputs for [`crate::mesa::Team::new`].
    pub fn team_inputs(&self) -> Vec<(RobotId, FactorGraph<S>, Values<S>)> {
        self.robots
            .iter()
            .map(|r| (r.id, r.graph.clone(), r.initial.clone()))
            .collect()
    }

    /// All measurement factors (the union of the disjoint per-robot sets).
    pub fn all_factors(&self) -> Vec<&Factor<S>> {
        self.robots.iter().flat_map(|r| r.graph.factors()).collect()
    }

    /// Initial values merged to one copy per variable; where copies differ
    /// the lowest holder id wins.
    pub fn merged_initial(&self) -> Values<S> {
        let mut merged = Values::new();
        for robot in &self.robots {
            for (key, value) in robot.initial.iter() {
                if !merged.contains(key) {
                    merged.insert(*key, value.clone());
                }
            }
        }
        merged
    }

    /// Holder view used by [`crate::metrics::mean_residual`].
    pub fn copies(&self) -> Vec<(RobotId, &Values<S>)> {
        self.robots.iter().map(|r| (r.id, &r.initial)).collect()
    }

    pub fn num_factors(&self) -> usize {
        self.robots.iter().map(|r| r.graph.len()).sum()
    }

    /// Structural checks: factor keys resolve locally, and inter-robot
    /// factors span exactly two robots.
    pub fn validate(&self) -> Result<(), DatasetError> {
        for robot in &self.robots {
            for factor in robot.graph.factors() {
                let keys = factor.keys();
                for key in &keys {
                    robot.initial.try_get(key)?;
                }
                let robots: std::collections::BTreeSet<RobotId> =
                    keys.iter().map(|k| k.robot).collect();
                if robots.len() > 2 {
                    return Err(DatasetError::InvalidConfig(format!(
                        "factor spans {} robots",
                        robots.len()
                    )));
                }
            }
        }
        Ok(())
    }
}
