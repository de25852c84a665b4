//! Evaluation metrics for multi-robot estimates where shared variables have
//! one copy per robot.

use std::io::Write;

use thiserror::Error;

use crate::factorgraph::{Factor, FactorGraphError, RobotId, Values, VariableKey};
use crate::scalar::{cast, Real};

/// Cap on the cartesian product of per-variable copy counts for one factor.
pub const MAX_COMBINATIONS: usize = 10_000;

pub const SUMMARY_SCHEMA: &str = "# schema: summary v1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no robot holds a copy of {0}")]
    MissingCopy(VariableKey),
    #[error("combination set has {got} elements, cap is {cap}")]
    TooManyCombinations { got: usize, cap: usize },
    #[error("empty trace")]
    EmptyTrace,
    #[error(transparent)]
    Graph(#[from] FactorGraphError),
}

/// Mean squared residual over every combination of variable copies.
///
/// For each factor, the squared whitened residual (with the same 1/2
/// convention as `FactorGraph::residual_norm2`) is averaged over the
/// cartesian product of the robots holding each involved variable. When all
/// copies agree the result equals `residual_norm2` of the combined graph.
pub fn mean_residual<S: Real>(
    factors: &[&Factor<S>],
    copies: &[(RobotId, &Values<S>)],
) -> Result<S, MetricsError> {
    let half: S = cast(0.5);
    let mut total = S::zero();
    for factor in factors {
        let keys = factor.keys();
        let mut holders: Vec<Vec<usize>> = Vec::with_capacity(keys.len());
        let mut count = 1usize;
        for key in &keys {
            let list: Vec<usize> = copies
                .iter()
                .enumerate()
                .filter(|(_, (_, values))| values.contains(key))
                .map(|(i, _)| i)
                .collect();
            if list.is_empty() {
                return Err(MetricsError::MissingCopy(*key));
            }
            count = count.saturating_mul(list.len());
            holders.push(list);
        }
        if count > MAX_COMBINATIONS {
            return Err(MetricsError::TooManyCombinations { got: count, cap: MAX_COMBINATIONS });
        }
        let mut sum = S::zero();
        let mut choice = vec![0usize; keys.len()];
        loop {
            let vars: Vec<_> = (0..keys.len())
                .map(|i| {
                    let (_, values) = copies[holders[i][choice[i]]];
                    values.get(&keys[i]).expect("holder contains key").clone()
                })
                .collect();
            let mut r = factor.residual_at(&vars)?;
            factor.noise_model().whiten_vector(&mut r);
            sum += r.norm_squared();
            let mut dim = 0;
            loop {
                if dim == choice.len() {
                    break;
                }
                choice[dim] += 1;
                if choice[dim] < holders[dim].len() {
                    break;
                }
                choice[dim] = 0;
                dim += 1;
            }
            if dim == choice.len() {
                break;
            }
        }
        total += half * sum / cast(count as f64);
    }
    Ok(total)
}

/// First sample whose r2_mean is within `fraction` of the final value;
/// returns (communications, r2_mean) at that sample.
pub fn convergence_point(
    points: &[(usize, f64)],
    fraction: f64,
) -> Result<(usize, f64), MetricsError> {
    let &(_, final_r2) = points.last().ok_or(MetricsError::EmptyTrace)?;
    let tol = fraction * final_r2.abs();
    for &(communications, r2) in points {
        if (r2 - final_r2).abs() <= tol {
            return Ok((communications, r2));
        }
    }
    unreachable!("final point always satisfies its own tolerance")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub dataset: String,
    pub method: String,
    pub beta0: f64,
    pub alpha: f64,
    pub communications_at_convergence: usize,
    pub r2_mean_final: f64,
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{SUMMARY_SCHEMA}")?;
    writeln!(
        w,
        "dataset,method,beta0,alpha,communications_at_convergence,r2_mean_final"
    )?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.dataset,
            row.method,
            row.beta0,
            row.alpha,
            row.communications_at_convergence,
            row.r2_mean_final
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorgraph::NoiseModel;
    use crate::manifold::{Pose, VariableValue};

    fn key(robot: u32, index: u64) -> VariableKey {
        VariableKey::new(robot, index)
    }

    #[test]
    fn matches_residual_norm2_when_copies_agree() {
        let k0 = key(0, 0);
        let k1 = key(1, 0);
        let factor = Factor::BetweenPose {
            from: k0,
            to: k1,
            measured: Pose::se2(1.0, 0.0, 0.1),
            noise: NoiseModel::isotropic(3, 0.2),
        };
        let mut values_a = Values::new();
        values_a.insert(k0, VariableValue::Pose(Pose::se2(0.0, 0.0, 0.0)));
        values_a.insert(k1, VariableValue::Pose(Pose::se2(0.9, 0.1, 0.05)));
        let values_b = values_a.clone();

        let graph =
            crate::factorgraph::FactorGraph::with_factors(vec![factor.clone()]);
        let expected = graph.residual_norm2(&values_a).unwrap();
        let got: f64 = mean_residual(
            &[&factor],
            &[(RobotId(0), &values_a), (RobotId(1), &values_b)],
        )
        .unwrap();
        assert!((got - expected).abs() < 1e-12, "got {got}, expected {expected}");
    }

    #[test]
    fn averages_over_disagreeing_copies() {
        let k = key(0, 0);
        let factor = Factor::PriorPose {
            key: k,
            measured: Pose::se2(0.0, 0.0, 0.0),
            noise: NoiseModel::unit(3),
        };
        let mut values_a = Values::new();
        values_a.insert(k, VariableValue::Pose(Pose::se2(1.0, 0.0, 0.0)));
        let mut values_b = Values::new();
        values_b.insert(k, VariableValue::Pose(Pose::se2(3.0, 0.0, 0.0)));
        let got: f64 = mean_residual(
            &[&factor],
            &[(RobotId(0), &values_a), (RobotId(1), &values_b)],
        )
        .unwrap();
        // 0.5 * mean(1^2, 3^2) = 0.5 * 5
        assert!((got - 2.5).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn missing_copy_is_reported() {
        let k = key(2, 7);
        let factor = Factor::PriorPose {
            key: k,
            measured: Pose::se2(0.0, 0.0, 0.0),
            noise: NoiseModel::unit(3),
        };
        let values = Values::new();
        let err = mean_residual(&[&factor], &[(RobotId(0), &values)]).unwrap_err();
        assert_eq!(err, MetricsError::MissingCopy(k));
    }

    #[test]
    fn convergence_point_finds_first_settled_sample() {
        let points = vec![(1, 10.0), (2, 1.5), (3, 1.004), (4, 1.001), (5, 1.0)];
        let (comms, r2) = convergence_point(&points, 0.01).unwrap();
        assert_eq!(comms, 3);
        assert!((r2 - 1.004).abs() < 1e-12);
        assert_eq!(
            convergence_point(&[], 0.01).unwrap_err(),
            MetricsError::EmptyTrace
        );
    }
}
