//! Splitting a single pose graph into a multi-robot problem.
//!
//! Benchmark graphs arrive as one agent's trajectory; evaluating distributed
//! solvers on them requires carving the variable set into parts and handing
//! each part to a synthetic robot. Factors crossing a cut are assigned to
//! the part owning their first endpoint, and that part receives a copy of
//! the foreign endpoint, which makes the variable shared. With identical
//! copies the partitioned objective equals the original one term for term.
//!
//! Parts carry no gauge anchors: a part of a relative pose graph has no
//! absolute information of its own, so solving it in isolation is expected
//! to fail with an indefinite system.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::factorgraph::{Factor, FactorGraph, RobotId, Values, VariableKey};

use super::{DatasetError, MultiRobotProblem, RobotProblem};

fn rekeyed(factor: &Factor<f64>, map: impl Fn(VariableKey) -> VariableKey) -> Factor<f64> {
    let mut factor = factor.clone();
    match &mut factor {
        Factor::PriorPose { key, .. } | Factor::BiasedPrior { key, .. } => *key = map(*key),
        Factor::BetweenPose { from, to, .. }
        | Factor::Range { from, to, .. }
        | Factor::BearingRange { from, to, .. } => {
            *from = map(*from);
            *to = map(*to);
        }
    }
    factor
}

fn adjacency(
    graph: &FactorGraph<f64>,
    values: &Values<f64>,
) -> Result<BTreeMap<VariableKey, BTreeSet<VariableKey>>, DatasetError> {
    let mut adj: BTreeMap<VariableKey, BTreeSet<VariableKey>> =
        values.keys().map(|k| (*k, BTreeSet::new())).collect();
    for factor in graph.factors() {
        let keys = factor.keys();
        for key in &keys {
            values.try_get(key)?;
        }
        if let [a, b] = keys[..] {
            adj.get_mut(&a).expect("checked above").insert(b);
            adj.get_mut(&b).expect("checked above").insert(a);
        }
    }
    Ok(adj)
}

fn check_connected(
    adj: &BTreeMap<VariableKey, BTreeSet<VariableKey>>,
) -> Result<(), DatasetError> {
    let Some(start) = adj.keys().next() else {
        return Ok(());
    };
    let mut seen = BTreeSet::from([*start]);
    let mut queue = VecDeque::from([*start]);
    while let Some(k) = queue.pop_front() {
        for n in &adj[&k] {
            if seen.insert(*n) {
                queue.push_back(*n);
            }
        }
    }
    if seen.len() == adj.len() {
        Ok(())
    } else {
        Err(DatasetError::Disconnected)
    }
}

/// Splits `graph` into `n_parts` balanced connected parts by growing each
/// part breadth-first from the smallest unassigned key. Part sizes differ by
/// at most one. See the module docs for how crossing factors are handled.
pub fn partition(
    graph: &FactorGraph<f64>,
    values: &Values<f64>,
    n_parts: usize,
) -> Result<MultiRobotProblem<f64>, DatasetError> {
    if n_parts == 0 || n_parts > values.len() {
        return Err(DatasetError::InvalidConfig(format!(
            "cannot split {} variables into {n_parts} parts",
            values.len()
        )));
    }
    let adj = adjacency(graph, values)?;
    check_connected(&adj)?;

    let mut assignment: BTreeMap<VariableKey, u32> = BTreeMap::new();
    let mut remaining: BTreeSet<VariableKey> = values.keys().copied().collect();
    for part in 0..n_parts {
        let target = remaining.len().div_ceil(n_parts - part);
        let mut queue: VecDeque<VariableKey> = VecDeque::new();
        let mut taken = 0;
        while taken < target {
            let key = match queue.pop_front() {
                Some(k) if remaining.contains(&k) => k,
                Some(_) => continue,
                None => match remaining.iter().next() {
                    Some(k) => *k,
                    None => break,
                },
            };
            remaining.remove(&key);
            assignment.insert(key, part as u32);
            taken += 1;
            for n in &adj[&key] {
                if remaining.contains(n) {
                    queue.push_back(*n);
                }
            }
        }
    }
    partition_with_assignment(graph, values, &assignment)
}

/// Builds the multi-robot problem induced by an explicit variable-to-part
/// assignment. Every variable must be assigned; part ids become robot ids.
pub fn partition_with_assignment(
    graph: &FactorGraph<f64>,
    values: &Values<f64>,
    assignment: &BTreeMap<VariableKey, u32>,
) -> Result<MultiRobotProblem<f64>, DatasetError> {
    for key in values.keys() {
        if !assignment.contains_key(key) {
            return Err(DatasetError::InvalidConfig(format!(
                "variable {key} has no part assignment"
            )));
        }
    }
    for key in assignment.keys() {
        if !values.contains(key) {
            return Err(DatasetError::InvalidConfig(format!(
                "assignment references unknown variable {key}"
            )));
        }
    }
    let mut indices: BTreeSet<u64> = BTreeSet::new();
    for key in values.keys() {
        if !indices.insert(key.index) {
            return Err(DatasetError::InvalidConfig(format!(
                "variable index {} repeats across robots; re-keying would collide",
                key.index
            )));
        }
    }

    let part_of = |key: &VariableKey| assignment[key];
    let rekey = |key: VariableKey| VariableKey::new(part_of(&key), key.index);

    let parts: BTreeSet<u32> = assignment.values().copied().collect();
    let mut robots: BTreeMap<u32, (FactorGraph<f64>, Values<f64>)> = parts
        .iter()
        .map(|p| (*p, (FactorGraph::new(), Values::new())))
        .collect();

    for (key, value) in values.iter() {
        robots.get_mut(&part_of(key)).expect("part exists").1.insert(rekey(*key), value.clone());
    }
    for factor in graph.factors() {
        let keys = factor.keys();
        for key in &keys {
            values.try_get(key)?;
        }
        let owner = part_of(&keys[0]);
        let slot = robots.get_mut(&owner).expect("part exists");
        for key in &keys[1..] {
            if part_of(key) != owner {
                slot.1.insert(rekey(*key), values.get(key).expect("checked").clone());
            }
        }
        slot.0.add(rekeyed(factor, rekey));
    }

    let problem = MultiRobotProblem {
        robots: robots
            .into_iter()
            .map(|(id, (graph, initial))| RobotProblem {
                id: RobotId(id),
                graph,
                initial,
                anchor: None,
            })
            .collect(),
        ground_truth: Values::new(),
    };
    problem.validate()?;
    Ok(problem)
}

/// Reads a METIS-style partition file: line `i` holds the part id of the
/// `i`-th variable in key order.
pub fn read_partition_file(path: impl AsRef<Path>) -> Result<Vec<u32>, DatasetError> {
    let reader = BufReader::new(File::open(path)?);
    let mut parts = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let part = text.parse().map_err(|_| {
            DatasetError::parse(idx + 1, format!("bad part id: {text:?}"))
        })?;
        parts.push(part);
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorgraph::NoiseModel;
    use crate::manifold::{Pose, VariableValue};
    use std::io::Write as _;

    fn chain(n: u64) -> (FactorGraph<f64>, Values<f64>) {
        let mut graph = FactorGraph::new();
        let mut values = Values::new();
        for i in 0..n {
            values.insert(
                VariableKey::new(0, i),
                VariableValue::Pose(Pose::se2(i as f64 + 0.01 * (i as f64).sin(), 0.0, 0.0)),
            );
        }
        graph.add(Factor::prior(
            VariableKey::new(0, 0),
            Pose::se2(0.0, 0.0, 0.0),
            NoiseModel::isotropic(3, 1e-3),
        ));
        for i in 0..n - 1 {
            graph.add(Factor::between(
                VariableKey::new(0, i),
                VariableKey::new(0, i + 1),
                Pose::se2(1.0, 0.0, 0.0),
                NoiseModel::isotropic(3, 0.1),
            ));
        }
        (graph, values)
    }

    #[test]
    fn chain_split_in_two_shares_the_cut_variable() {
        let (graph, values) = chain(10);
        let problem = partition(&graph, &values, 2).unwrap();
        assert_eq!(problem.robots.len(), 2);
        assert_eq!(problem.num_factors(), graph.len());
        assert_eq!(problem.robots[0].initial.len(), 6);
        assert_eq!(problem.robots[1].initial.len(), 5);

        let registry = problem.shared_registry();
        assert_eq!(
            registry[&(RobotId(0), RobotId(1))],
            vec![VariableKey::new(1, 5)],
            "the crossing between(4,5) should leave part 0 a copy of vertex 5"
        );
        assert!(problem.robots.iter().all(|r| r.anchor.is_none()));
    }

    #[test]
    fn partition_preserves_the_objective_with_identical_copies() {
        let (graph, values) = chain(12);
        let original = graph.residual_norm2(&values).unwrap();
        for parts in [1, 2, 3] {
            let problem = partition(&graph, &values, parts).unwrap();
            let split: f64 = problem
                .robots
                .iter()
                .map(|r| r.graph.residual_norm2(&r.initial).unwrap())
                .sum();
            assert!(
                (split - original).abs() <= 1e-12 * original.max(1.0),
                "{parts} parts: {split} vs {original}"
            );
        }
    }

    #[test]
    fn single_part_is_the_identity() {
        let (graph, values) = chain(5);
        let problem = partition(&graph, &values, 1).unwrap();
        assert_eq!(problem.robots.len(), 1);
        assert_eq!(problem.robots[0].id, RobotId(0));
        let keys: Vec<_> = problem.robots[0].initial.keys().copied().collect();
        let original: Vec<_> = values.keys().copied().collect();
        assert_eq!(keys, original);
        assert!(problem.shared_registry().is_empty());
    }

    #[test]
    fn parts_are_balanced_within_one_variable() {
        let (graph, values) = chain(20);
        let problem = partition(&graph, &values, 3).unwrap();
        let sizes: Vec<usize> = problem
            .robots
            .iter()
            .map(|r| {
                r.initial
                    .keys()
                    .filter(|k| k.robot == r.id)
                    .count()
            })
            .collect();
        assert_eq!(sizes.iter().sum::<usize>(), 20);
        let (max, min) = (sizes.iter().max().unwrap(), sizes.iter().min().unwrap());
        assert!(max - min <= 1, "sizes {sizes:?}");
    }

    #[test]
    fn disconnected_graphs_are_rejected() {
        let (mut graph, mut values) = chain(4);
        values.insert(
            VariableKey::new(0, 100),
            VariableValue::Pose(Pose::se2(50.0, 0.0, 0.0)),
        );
        values.insert(
            VariableKey::new(0, 101),
            VariableValue::Pose(Pose::se2(51.0, 0.0, 0.0)),
        );
        graph.add(Factor::between(
            VariableKey::new(0, 100),
            VariableKey::new(0, 101),
            Pose::se2(1.0, 0.0, 0.0),
            NoiseModel::unit(3),
        ));
        assert!(matches!(
            partition(&graph, &values, 2),
            Err(DatasetError::Disconnected)
        ));
    }

    #[test]
    fn assignment_must_cover_every_variable() {
        let (graph, values) = chain(4);
        let partial: BTreeMap<VariableKey, u32> =
            [(VariableKey::new(0, 0), 0)].into_iter().collect();
        assert!(matches!(
            partition_with_assignment(&graph, &values, &partial),
            Err(DatasetError::InvalidConfig(_))
        ));
    }

    #[test]
    fn partition_file_parses_and_reports_bad_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("parts.txt");
        std::fs::write(&path, "0\n0\n1\n1\n").unwrap();
        assert_eq!(read_partition_file(&path).unwrap(), vec![0, 0, 1, 1]);

        let bad = dir.path().join("bad.txt");
        let mut f = File::create(&bad).unwrap();
        writeln!(f, "0\nx\n1").unwrap();
        let err = read_partition_file(&bad).unwrap_err();
        assert!(matches!(err, DatasetError::Parse { line: 2, .. }), "got {err:?}");
    }
}
