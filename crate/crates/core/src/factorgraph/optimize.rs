//! Batch Gauss-Newton / Levenberg-Marquardt solver on the normal equations.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::scalar::{cast, Real};

use super::sparse::{min_degree_order, CscUpper, SparseCholesky};
use super::{FactorGraph, FactorGraphError, Values, VariableKey};

/// Scalar problem size below which the dense normal-equation path is used.
const DENSE_LIMIT: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop when the relative cost decrease of an accepted step falls below this.
    pub tol_rel: f64,
    /// Stop when the absolute cost decrease of an accepted step falls below this.
    pub tol_abs: f64,
    /// Initial LM damping; x10 on rejected steps, /10 on accepted ones.
    pub lambda_init: f64,
    pub lambda_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tol_rel: 1e-8,
            tol_abs: 1e-10,
            lambda_init: 1e-5,
            lambda_max: 1e10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult<S: Real> {
    pub values: Values<S>,
    /// Half the sum of squared whitened residuals at the returned values.
    pub final_residual: S,
    pub iterations: usize,
    pub converged: bool,
}

struct VariableIndex {
    keys: Vec<VariableKey>,
    dofs: Vec<usize>,
    offsets: Vec<usize>,
    block_of: BTreeMap<VariableKey, usize>,
    total_dim: usize,
}

impl VariableIndex {
    fn from_graph<S: Real>(
        graph: &FactorGraph<S>,
        values: &Values<S>,
    ) -> Result<Self, FactorGraphError> {
        let mut keyset = BTreeSet::new();
        for factor in graph.factors() {
            keyset.extend(factor.keys());
        }
        let keys: Vec<VariableKey> = keyset.into_iter().collect();
        let mut dofs = Vec::with_capacity(keys.len());
        let mut offsets = Vec::with_capacity(keys.len());
        let mut block_of = BTreeMap::new();
        let mut total_dim = 0;
        for (b, key) in keys.iter().enumerate() {
            let dof = values.try_get(key)?.dof();
            offsets.push(total_dim);
            dofs.push(dof);
            block_of.insert(*key, b);
            total_dim += dof;
        }
        Ok(Self { keys, dofs, offsets, block_of, total_dim })
    }
}

struct NormalEquations<S: Real> {
    /// Upper block triangle keyed by (block_i, block_j), block_i <= block_j.
    hessian: BTreeMap<(usize, usize), DMatrix<S>>,
    gradient: DVector<S>,
}

fn assemble<S: Real>(
    graph: &FactorGraph<S>,
    values: &Values<S>,
    index: &VariableIndex,
) -> Result<NormalEquations<S>, FactorGraphError> {
    let mut hessian: BTreeMap<(usize, usize), DMatrix<S>> = BTreeMap::new();
    let mut gradient = DVector::zeros(index.total_dim);
    for factor in graph.factors() {
        let lin = factor.linearize(values)?;
        let blocks: Vec<usize> = lin.keys.iter().map(|k| index.block_of[k]).collect();
        for (a, ja) in lin.jacobians.iter().enumerate() {
            let ba = blocks[a];
            let ga = ja.transpose() * &lin.residual;
            gradient
                .rows_mut(index.offsets[ba], index.dofs[ba])
                .iter_mut()
                .zip(ga.iter())
                .for_each(|(g, v)| *g += *v);
            for (b, jb) in lin.jacobians.iter().enumerate().skip(a) {
                let bb = blocks[b];
                let (key, block) = if ba <= bb {
                    ((ba, bb), ja.transpose() * jb)
                } else {
                    ((bb, ba), jb.transpose() * ja)
                };
                hessian
                    .entry(key)
                    .and_modify(|h| *h += &block)
                    .or_insert(block);
            }
        }
    }
    Ok(NormalEquations { hessian, gradient })
}

/// Scalar offsets of each block under the fill-reducing elimination order.
fn permuted_offsets<S: Real>(ne: &NormalEquations<S>, index: &VariableIndex) -> Vec<usize> {
    let nb = index.keys.len();
    let mut adj = vec![BTreeSet::new(); nb];
    for &(a, b) in ne.hessian.keys() {
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    let order = min_degree_order(&adj);
    let mut perm_offset = vec![0usize; nb];
    let mut off = 0;
    for &b in &order {
        perm_offset[b] = off;
        off += index.dofs[b];
    }
    perm_offset
}

/// Upper-triangular CSC of `H + lambda diag(H)` in the permuted layout.
fn build_csc<S: Real>(
    ne: &NormalEquations<S>,
    index: &VariableIndex,
    perm_offset: &[usize],
    lambda: f64,
) -> CscUpper<S> {
    let damp: S = cast(1.0 + lambda);
    let mut triplets = Vec::new();
    for (&(a, b), block) in &ne.hessian {
        let (pa, pb) = (perm_offset[a], perm_offset[b]);
        if a == b {
            for r in 0..block.nrows() {
                for c in r..block.ncols() {
                    let v = if r == c { block[(r, c)] * damp } else { block[(r, c)] };
                    triplets.push((pa + r, pa + c, v));
                }
            }
        } else if pa < pb {
            for r in 0..block.nrows() {
                for c in 0..block.ncols() {
                    triplets.push((pa + r, pb + c, block[(r, c)]));
                }
            }
        } else {
            for r in 0..block.nrows() {
                for c in 0..block.ncols() {
                    triplets.push((pb + c, pa + r, block[(r, c)]));
                }
            }
        }
    }
    CscUpper::from_triplets(index.total_dim, triplets)
}

/// The undamped normal equations must be positive definite; a rank-deficient
/// system means the caller forgot to gauge-fix (LM damping would otherwise
/// paper over it).
fn check_positive_definite<S: Real>(
    ne: &NormalEquations<S>,
    index: &VariableIndex,
    perm_offset: &[usize],
) -> Result<(), FactorGraphError> {
    let csc = build_csc(ne, index, perm_offset, 0.0);
    SparseCholesky::factor_with_tolerance(&csc, cast(1e-12))
        .map(|_| ())
        .map_err(|_| FactorGraphError::IndefiniteSystem)
}

/// Solves the damped system `(H + lambda diag(H)) delta = -g`.
fn solve_damped<S: Real>(
    ne: &NormalEquations<S>,
    index: &VariableIndex,
    perm_offset: &[usize],
    lambda: f64,
) -> Option<DVector<S>> {
    let n = index.total_dim;
    let damp: S = cast(1.0 + lambda);
    if n < DENSE_LIMIT {
        let mut h = DMatrix::zeros(n, n);
        for (&(a, b), block) in &ne.hessian {
            let (oa, ob) = (index.offsets[a], index.offsets[b]);
            for r in 0..block.nrows() {
                for c in 0..block.ncols() {
                    h[(oa + r, ob + c)] = block[(r, c)];
                    h[(ob + c, oa + r)] = block[(r, c)];
                }
            }
        }
        for i in 0..n {
            h[(i, i)] *= damp;
        }
        let chol = Cholesky::new(h)?;
        Some(chol.solve(&(-&ne.gradient)))
    } else {
        let csc = build_csc(ne, index, perm_offset, lambda);
        let chol = SparseCholesky::factor(&csc).ok()?;
        let mut rhs = DVector::zeros(n);
        for b in 0..index.keys.len() {
            for r in 0..index.dofs[b] {
                rhs[perm_offset[b] + r] = -ne.gradient[index.offsets[b] + r];
            }
        }
        let x = chol.solve(&rhs);
        let mut delta = DVector::zeros(n);
        for b in 0..index.keys.len() {
            for r in 0..index.dofs[b] {
                delta[index.offsets[b] + r] = x[perm_offset[b] + r];
            }
        }
        Some(delta)
    }
}

fn retract_all<S: Real>(
    values: &Values<S>,
    index: &VariableIndex,
    delta: &DVector<S>,
) -> Result<Values<S>, FactorGraphError> {
    let mut out = values.clone();
    for (b, key) in index.keys.iter().enumerate() {
        let current = values.try_get(key)?;
        let slice = &delta.as_slice()[index.offsets[b]..index.offsets[b] + index.dofs[b]];
        out.insert(*key, current.retract(slice)?);
    }
    Ok(out)
}

/// Infinity norm of the whitened-cost gradient; small at stationary points.
pub fn gradient_inf_norm<S: Real>(
    graph: &FactorGraph<S>,
    values: &Values<S>,
) -> Result<S, FactorGraphError> {
    let index = VariableIndex::from_graph(graph, values)?;
    let ne = assemble(graph, values, &index)?;
    Ok(ne.gradient.amax())
}

/// Minimizes half the sum of squared whitened residuals by damped Gauss-Newton.
///
/// Variables referenced by the graph are optimized; any extra entries in
/// `initial` pass through unchanged. Termination: relative cost decrease
/// below `tol_rel`, absolute decrease below `tol_abs`, or `max_iterations`.
pub fn optimize<S: Real>(
    graph: &FactorGraph<S>,
    initial: &Values<S>,
    config: &SolverConfig,
) -> Result<OptimizeResult<S>, FactorGraphError> {
    let index = VariableIndex::from_graph(graph, initial)?;
    let mut values = initial.clone();
    let mut cost = graph.residual_norm2(&values)?;
    if !cost.is_finite() {
        return Err(FactorGraphError::NonFiniteResidual);
    }
    if index.total_dim == 0 {
        return Ok(OptimizeResult { values, final_residual: cost, iterations: 0, converged: true });
    }

    let mut lambda = config.lambda_init;
    let mut perm_offset: Option<Vec<usize>> = None;
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < config.max_iterations {
        iterations += 1;
        let ne = assemble(graph, &values, &index)?;
        let first = perm_offset.is_none();
        let perm = perm_offset.get_or_insert_with(|| permuted_offsets(&ne, &index));
        if first {
            check_positive_definite(&ne, &index, perm)?;
        }
        loop {
            let delta = match solve_damped(&ne, &index, perm, lambda) {
                Some(d) => d,
                None => {
                    lambda *= 10.0;
                    if lambda > config.lambda_max {
                        return Err(FactorGraphError::IndefiniteSystem);
                    }
                    continue;
                }
            };
            let candidate = retract_all(&values, &index, &delta)?;
            let new_cost = match graph.residual_norm2(&candidate) {
                Ok(c) if c.is_finite() => c,
                // an overlong step may leave the residual's domain; treat as rejection
                Ok(_) | Err(FactorGraphError::Manifold(_)) | Err(FactorGraphError::Constraint(_)) => {
                    lambda *= 10.0;
                    if lambda > config.lambda_max {
                        break 'outer;
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            if new_cost < cost {
                let decrease = cost - new_cost;
                values = candidate;
                cost = new_cost;
                lambda /= 10.0;
                let rel = decrease / cost.max(cast(f64::MIN_POSITIVE));
                if decrease < cast(config.tol_abs) || rel < cast(config.tol_rel) {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > config.lambda_max {
                // cannot improve further at maximum damping
                converged = true;
                break 'outer;
            }
        }
    }

    Ok(OptimizeResult { values, final_residual: cost, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorgraph::{Factor, NoiseModel};
    use crate::manifold::{Pose, VariableValue};
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Vector3};

    fn key(i: u64) -> VariableKey {
        VariableKey::new(0, i)
    }

    #[test]
    fn linear_problem_solves_in_one_iteration() {
        // two priors on the same point: LS solution is the precision-weighted mean
        let mut graph = FactorGraph::new();
        let k = key(0);
        let prior = |target: f64, sigma: f64| Factor::BiasedPrior {
            key: k,
            kind: crate::mesa::constraint::ConstraintKind::Linear,
            z: crate::mesa::constraint::EdgeValue::Vector(DVector::from_column_slice(&[target])),
            lambda: DVector::zeros(1),
            beta: 1.0 / (sigma * sigma),
        };
        graph.add(prior(2.0, 1.0));
        graph.add(prior(6.0, 2.0));
        let mut initial = Values::new();
        initial.insert(k, VariableValue::Point(DVector::from_column_slice(&[0.0])));
        let result = optimize(&graph, &initial, &SolverConfig::default()).unwrap();
        let x = result.values.point(&k).unwrap()[0];
        assert_relative_eq!(x, (2.0 + 6.0 * 0.25) / 1.25, epsilon = 1e-10);
        assert!(result.iterations <= 2);
        assert!(result.converged);
    }

    #[test]
    fn zero_noise_odometry_chain_recovers_ground_truth() {
        let mut graph = FactorGraph::new();
        let mut truth = Values::new();
        let mut initial = Values::new();
        let mut pose = Pose::identity_se3();
        truth.insert(key(0), VariableValue::Pose(pose.clone()));
        initial.insert(key(0), VariableValue::Pose(pose.clone()));
        graph.add(Factor::prior(key(0), pose.clone(), NoiseModel::isotropic(6, 0.01)));
        let step = Pose::se3(
            Rotation3::from_euler_angles(0.0, 0.0, 0.2),
            Vector3::new(1.0, 0.0, 0.1),
        );
        for i in 1..8 {
            pose = pose.compose(&step);
            truth.insert(key(i), VariableValue::Pose(pose.clone()));
            // deliberately bad initialization
            initial.insert(key(i), VariableValue::Pose(Pose::identity_se3()));
            graph.add(Factor::between(
                key(i - 1),
                key(i),
                step.clone(),
                NoiseModel::isotropic(6, 0.05),
            ));
        }
        let result = optimize(&graph, &initial, &SolverConfig::default()).unwrap();
        assert!(result.final_residual < 1e-16, "residual {}", result.final_residual);
        for i in 0..8 {
            let got = result.values.pose(&key(i)).unwrap();
            let want = truth.pose(&key(i)).unwrap();
            let err = want.between(got).log_map().unwrap().into_vector().norm();
            assert!(err < 1e-8, "pose {i} error {err}");
        }
    }

    #[test]
    fn unanchored_graph_raises_indefinite_system() {
        let mut graph = FactorGraph::new();
        graph.add(Factor::between(
            key(0),
            key(1),
            Pose::se2(1.0, 0.0, 0.0),
            NoiseModel::unit(3),
        ));
        let mut initial = Values::new();
        initial.insert(key(0), VariableValue::Pose(Pose::identity_se2()));
        initial.insert(key(1), VariableValue::Pose(Pose::se2(0.9, 0.0, 0.0)));
        assert!(matches!(
            optimize(&graph, &initial, &SolverConfig::default()),
            Err(FactorGraphError::IndefiniteSystem)
        ));
    }

    #[test]
    fn accepted_steps_never_increase_cost() {
        let mut graph = FactorGraph::new();
        graph.add(Factor::prior(key(0), Pose::identity_se2(), NoiseModel::unit(3)));
        let mut pose = Pose::identity_se2();
        let mut initial = Values::new();
        initial.insert(key(0), VariableValue::Pose(pose.clone()));
        let mut s = 77u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 0.4 - 0.2
        };
        for i in 1..30 {
            let step = Pose::se2(1.0 + next(), next(), 0.2 + next());
            pose = pose.compose(&step);
            let noisy = step.retract(&[next() * 0.1, next() * 0.1, next() * 0.1]).unwrap();
            graph.add(Factor::between(key(i - 1), key(i), noisy, NoiseModel::isotropic(3, 0.1)));
            initial.insert(key(i), VariableValue::Pose(pose.clone()));
        }
        // track cost across iterations by re-running with increasing caps
        let mut last = f64::INFINITY;
        for iters in 1..12 {
            let config = SolverConfig { max_iterations: iters, ..Default::default() };
            let r = optimize(&graph, &initial, &config).unwrap();
            assert!(r.final_residual <= last + 1e-15, "cost increased at {iters}");
            last = r.final_residual;
        }
        // and the end point is stationary
        let config = SolverConfig::default();
        let r = optimize(&graph, &initial, &config).unwrap();
        assert!(gradient_inf_norm(&graph, &r.values).unwrap() < 1e-6);
    }
}
