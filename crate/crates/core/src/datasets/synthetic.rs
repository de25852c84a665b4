//! Seeded synthetic multi-robot datasets: grid-like random walks with
//! odometry, intra-robot loop closures, and periodic inter-robot closures.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_PI_2;

use nalgebra::{DVector, Rotation3, Vector3};
use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Normal;

use crate::factorgraph::{Factor, FactorGraph, NoiseModel, Values, VariableKey};
use crate::manifold::{Pose, Tangent, VariableValue};

use super::{DatasetError, MultiRobotProblem, RobotProblem};

/// Type of the inter-robot loop-closure measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterMeasurement {
    #[default]
    Pose,
    Range,
    BearingRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    /// 2 or 3.
    pub dims: u8,
    pub robots: usize,
    pub poses_per_robot: usize,
    /// Probability of a forward step; the remaining mass is split evenly
    /// over the +-90 degree rotations about each axis.
    pub forward_prob: f64,
    /// Probability of adding an intra-robot loop closure when the current
    /// pose is near an eligible previous pose.
    pub loop_prob: f64,
    /// Grid step length in meters.
    pub step: f64,
    /// Distance below which two poses count as nearby.
    pub proximity: f64,
    /// Minimum pose-index separation for intra-robot loop closures; rules
    /// out closures that only duplicate recent odometry.
    pub min_loop_separation: usize,
    /// Inter-robot closures are searched every this many steps.
    pub inter_period: usize,
    /// Rotation noise, degrees.
    pub sigma_r_deg: f64,
    /// Translation noise, meters.
    pub sigma_t: f64,
    pub measurement: InterMeasurement,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            dims: 3,
            robots: 4,
            poses_per_robot: 400,
            forward_prob: 0.7,
            loop_prob: 0.4,
            step: 1.0,
            proximity: 1.5,
            min_loop_separation: 5,
            inter_period: 10,
            sigma_r_deg: 1.0,
            sigma_t: 0.05,
            measurement: InterMeasurement::Pose,
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    /// The odometry categorical distribution: forward first, then the
    /// rotations about each axis in +/- pairs.
    pub fn categorical(&self) -> Vec<f64> {
        let rotations = if self.dims == 2 { 2 } else { 6 };
        let mut probs = vec![self.forward_prob];
        probs.extend(std::iter::repeat((1.0 - self.forward_prob) / rotations as f64).take(rotations));
        probs
    }

    fn validate(&self) -> Result<(), DatasetError> {
        let fail = |m: &str| Err(DatasetError::InvalidConfig(m.to_string()));
        if !(self.dims == 2 || self.dims == 3) {
            return fail("dims must be 2 or 3");
        }
        if self.robots == 0 || self.poses_per_robot < 2 {
            return fail("need at least 1 robot and 2 poses per robot");
        }
        if !(0.0..=1.0).contains(&self.forward_prob) || !(0.0..=1.0).contains(&self.loop_prob) {
            return fail("probabilities must lie in [0, 1]");
        }
        if self.step <= 0.0 || self.proximity <= 0.0 {
            return fail("step and proximity must be positive");
        }
        if self.inter_period == 0 {
            return fail("inter_period must be at least 1");
        }
        if self.sigma_r_deg < 0.0 || self.sigma_t < 0.0 {
            return fail("noise sigmas must be non-negative");
        }
        let total: f64 = self.categorical().iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return fail("odometry probabilities must sum to 1");
        }
        Ok(())
    }

    fn sigma_r_rad(&self) -> f64 {
        self.sigma_r_deg.to_radians()
    }

    /// Noise model sigma: the generating sigma, or 1 for noiseless datasets
    /// (whitening needs a positive scale; at zero noise any choice leaves
    /// the ground-truth residual at zero).
    fn model_sigma(sigma: f64) -> f64 {
        if sigma > 0.0 {
            sigma
        } else {
            1.0
        }
    }
}

/// The candidate odometry motions: one forward step, then in-place +-90
/// degree rotations (about z in 2D; about x, y, z in 3D).
fn moves(dims: u8, step: f64) -> Vec<Pose<f64>> {
    if dims == 2 {
        vec![
            Pose::se2(step, 0.0, 0.0),
            Pose::se2(0.0, 0.0, FRAC_PI_2),
            Pose::se2(0.0, 0.0, -FRAC_PI_2),
        ]
    } else {
        let mut out = vec![Pose::se3(Rotation3::identity(), Vector3::new(step, 0.0, 0.0))];
        for axis in [Vector3::x_axis(), Vector3::y_axis(), Vector3::z_axis()] {
            for sign in [1.0, -1.0] {
                out.push(Pose::se3(
                    Rotation3::from_axis_angle(&axis, sign * FRAC_PI_2),
                    Vector3::zeros(),
                ));
            }
        }
        out
    }
}

fn start_pose(dims: u8, robot: usize, step: f64) -> Pose<f64> {
    let y = robot as f64 * step;
    if dims == 2 {
        Pose::se2(0.0, y, 0.0)
    } else {
        Pose::se3(Rotation3::identity(), Vector3::new(0.0, y, 0.0))
    }
}

/// Tangent-space noise [rotation; translation] with the configured sigmas.
fn sample_noise(rng: &mut ChaCha20Rng, dims: u8, sigma_r: f64, sigma_t: f64) -> Tangent<f64> {
    let (nr, nt) = if dims == 2 { (1, 2) } else { (3, 3) };
    let rot = Normal::new(0.0, sigma_r).expect("valid sigma");
    let trans = Normal::new(0.0, sigma_t).expect("valid sigma");
    let mut v = DVector::zeros(nr + nt);
    for i in 0..nr {
        v[i] = rot.sample(rng);
    }
    for i in 0..nt {
        v[nr + i] = trans.sample(rng);
    }
    Tangent::new(v).expect("valid tangent dimension")
}

fn perturbed(rel: &Pose<f64>, noise: &Tangent<f64>) -> Pose<f64> {
    rel.compose(&Pose::exp_map(noise))
}

fn pose_noise_model(dims: u8, sigma_r: f64, sigma_t: f64) -> NoiseModel<f64> {
    let (nr, nt) = if dims == 2 { (1, 2) } else { (3, 3) };
    let mut sigmas = vec![SyntheticConfig::model_sigma(sigma_r); nr];
    sigmas.extend(vec![SyntheticConfig::model_sigma(sigma_t); nt]);
    NoiseModel::from_sigmas(&sigmas)
}

fn tight_prior_noise(dims: u8) -> NoiseModel<f64> {
    let dof = if dims == 2 { 3 } else { 6 };
    NoiseModel::isotropic(dof, 1e-3)
}

fn distance(a: &Pose<f64>, b: &Pose<f64>) -> f64 {
    (a.translation() - b.translation()).norm()
}

/// Generates a seeded multi-robot dataset. Trajectories are grid-like random
/// walks; odometry connects consecutive poses; intra-robot closures appear
/// with probability `loop_prob` at grid revisits; inter-robot closures are
/// searched every `inter_period` steps between nearby poses of different
/// robots. Exactly one global prior (robot 0's first pose) enters the factor
/// set; every other robot carries a detached anchor prior for
/// independent-solve use.
pub fn generate(config: &SyntheticConfig) -> Result<MultiRobotProblem<f64>, DatasetError> {
    config.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let n = config.poses_per_robot;
    let sigma_r = config.sigma_r_rad();
    let sigma_t = config.sigma_t;
    let motions = moves(config.dims, config.step);
    let categorical = WeightedIndex::new(config.categorical())
        .map_err(|e| DatasetError::InvalidConfig(e.to_string()))?;

    // Phase 1: ground-truth trajectories.
    let mut truth: Vec<Vec<Pose<f64>>> = Vec::with_capacity(config.robots);
    for robot in 0..config.robots {
        let mut path = Vec::with_capacity(n);
        path.push(start_pose(config.dims, robot, config.step));
        for _ in 1..n {
            let motion = &motions[categorical.sample(&mut rng)];
            path.push(path.last().unwrap().compose(motion));
        }
        truth.push(path);
    }

    // Phase 2: odometry measurements and odometry-composed initial values.
    let odo_noise = pose_noise_model(config.dims, sigma_r, sigma_t);
    let mut graphs: Vec<FactorGraph<f64>> = (0..config.robots).map(|_| FactorGraph::new()).collect();
    let mut initials: Vec<Values<f64>> = (0..config.robots).map(|_| Values::new()).collect();
    for robot in 0..config.robots {
        let mut estimate = truth[robot][0].clone();
        initials[robot].insert(
            VariableKey::new(robot as u32, 0),
            VariableValue::Pose(estimate.clone()),
        );
        for t in 1..n {
            let rel = truth[robot][t - 1].between(&truth[robot][t]);
            let noise = sample_noise(&mut rng, config.dims, sigma_r, sigma_t);
            let measured = perturbed(&rel, &noise);
            graphs[robot].add(Factor::between(
                VariableKey::new(robot as u32, (t - 1) as u64),
                VariableKey::new(robot as u32, t as u64),
                measured.clone(),
                odo_noise.clone(),
            ));
            estimate = estimate.compose(&measured);
            initials[robot].insert(
                VariableKey::new(robot as u32, t as u64),
                VariableValue::Pose(estimate.clone()),
            );
        }
    }

    // Phase 3: intra-robot loop closures at grid revisits.
    for robot in 0..config.robots {
        for t in 1..n {
            let eligible = (0..t.saturating_sub(config.min_loop_separation))
                .filter(|&s| distance(&truth[robot][t], &truth[robot][s]) <= config.proximity)
                .min_by(|&a, &b| {
                    distance(&truth[robot][t], &truth[robot][a])
                        .partial_cmp(&distance(&truth[robot][t], &truth[robot][b]))
                        .unwrap()
                });
            let Some(s) = eligible else { continue };
            if rng.gen::<f64>() >= config.loop_prob {
                continue;
            }
            let rel = truth[robot][s].between(&truth[robot][t]);
            let noise = sample_noise(&mut rng, config.dims, sigma_r, sigma_t);
            graphs[robot].add(Factor::between(
                VariableKey::new(robot as u32, s as u64),
                VariableKey::new(robot as u32, t as u64),
                perturbed(&rel, &noise),
                odo_noise.clone(),
            ));
        }
    }

    // Phase 4: inter-robot loop closures every `inter_period` steps: each
    // robot pair gets a measurement from robot i's current pose to robot j's
    // nearest pose so far, which keeps the aggregate graph connected. Poses
    // already observed by the pair are skipped while fresh ones remain, so
    // repeated encounters spread the consensus over distinct variables. The
    // observing robot holds the factor and a copy of the observed variable,
    // initialized from the owner's odometry estimate.
    let mut seen: BTreeMap<(usize, usize), BTreeSet<usize>> = BTreeMap::new();
    let mut t = config.inter_period;
    while t < n {
        for i in 0..config.robots {
            for j in i + 1..config.robots {
                let observer_pose = &truth[i][t];
                let used = seen.entry((i, j)).or_default();
                let nearest = |candidates: &mut dyn Iterator<Item = usize>| {
                    candidates.min_by(|&a, &b| {
                        distance(observer_pose, &truth[j][a])
                            .partial_cmp(&distance(observer_pose, &truth[j][b]))
                            .unwrap()
                    })
                };
                let target = nearest(&mut (0..=t).filter(|s| !used.contains(s)))
                    .or_else(|| nearest(&mut (0..=t)));
                let Some(s) = target else { continue };
                used.insert(s);
                let from = VariableKey::new(i as u32, t as u64);
                let to = VariableKey::new(j as u32, s as u64);
                let factor = match config.measurement {
                    InterMeasurement::Pose => {
                        let rel = truth[i][t].between(&truth[j][s]);
                        let noise = sample_noise(&mut rng, config.dims, sigma_r, sigma_t);
                        Factor::between(from, to, perturbed(&rel, &noise), odo_noise.clone())
                    }
                    InterMeasurement::Range => {
                        let d = distance(&truth[i][t], &truth[j][s]);
                        let noisy = d + Normal::new(0.0, sigma_t).expect("valid sigma").sample(&mut rng);
                        Factor::range(
                            from,
                            to,
                            noisy,
                            NoiseModel::isotropic(1, SyntheticConfig::model_sigma(sigma_t)),
                        )
                    }
                    InterMeasurement::BearingRange => {
                        let (mut bearing, range) = crate::factorgraph::bearing_range_of(
                            &truth[i][t],
                            &truth[j][s].translation(),
                        );
                        let bearing_noise = Normal::new(0.0, sigma_r).expect("valid sigma");
                        for b in bearing.iter_mut() {
                            *b += bearing_noise.sample(&mut rng);
                        }
                        let range_noise = Normal::new(0.0, sigma_t).expect("valid sigma");
                        let noisy_range = range + range_noise.sample(&mut rng);
                        let mut sigmas =
                            vec![SyntheticConfig::model_sigma(sigma_r); bearing.len()];
                        sigmas.push(SyntheticConfig::model_sigma(sigma_t));
                        Factor::bearing_range(
                            from,
                            to,
                            bearing,
                            noisy_range,
                            NoiseModel::from_sigmas(&sigmas),
                        )
                    }
                };
                // The observer seeds its copy from local information only:
                // its own estimate composed with the relative measurement
                // when one exists, otherwise the owner's odometry value.
                // Copies therefore start out disagreeing by the accumulated
                // drift between the two robots, as they would in the field.
                let copy = match &factor {
                    Factor::BetweenPose { measured, .. } => {
                        let own = initials[i]
                            .get(&from)
                            .and_then(|v| v.as_pose())
                            .expect("observer initial");
                        VariableValue::Pose(own.compose(measured))
                    }
                    _ => initials[j].get(&to).expect("owner initial").clone(),
                };
                graphs[i].add(factor);
                initials[i].insert(to, copy);
            }
        }
        t += config.inter_period;
    }

    // Priors: one global gauge prior in robot 0's graph; detached anchors
    // for everyone else.
    let prior_noise = tight_prior_noise(config.dims);
    graphs[0].add(Factor::prior(
        VariableKey::new(0, 0),
        truth[0][0].clone(),
        prior_noise.clone(),
    ));

    let mut ground_truth = Values::new();
    for (robot, path) in truth.iter().enumerate() {
        for (t, pose) in path.iter().enumerate() {
            ground_truth.insert(
                VariableKey::new(robot as u32, t as u64),
                VariableValue::Pose(pose.clone()),
            );
        }
    }

    let robots = graphs
        .into_iter()
        .zip(initials)
        .enumerate()
        .map(|(robot, (graph, initial))| RobotProblem {
            id: crate::factorgraph::RobotId(robot as u32),
            graph,
            initial,
            anchor: (robot > 0).then(|| {
                Factor::prior(
                    VariableKey::new(robot as u32, 0),
                    truth[robot][0].clone(),
                    prior_noise.clone(),
                )
            }),
        })
        .collect();

    let problem = MultiRobotProblem { robots, ground_truth };
    problem.validate()?;
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorgraph::RobotId;

    fn small_config() -> SyntheticConfig {
        SyntheticConfig {
            robots: 2,
            poses_per_robot: 60,
            seed: 7,
            ..SyntheticConfig::default()
        }
    }

    #[test]
    fn default_config_shape() {
        let config = SyntheticConfig::default();
        assert_eq!(config.robots, 4);
        assert_eq!(config.poses_per_robot, 400);
        assert_eq!(config.categorical().len(), 7);
        assert!((config.categorical().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_dataset_has_zero_residual_at_ground_truth() {
        let config = SyntheticConfig {
            sigma_r_deg: 0.0,
            sigma_t: 0.0,
            ..small_config()
        };
        let problem = generate(&config).unwrap();
        for robot in &problem.robots {
            let graph = &robot.graph;
            let mut at_truth = robot.initial.clone();
            let keys: Vec<_> = robot.initial.keys().copied().collect();
            for key in keys {
                at_truth.insert(key, problem.ground_truth.get(&key).unwrap().clone());
            }
            let r = graph.residual_norm2(&at_truth).unwrap();
            assert!(r < 1e-12, "robot {} residual {r}", robot.id);
        }
    }

    #[test]
    fn same_seed_is_reproducible() {
        let a = generate(&small_config()).unwrap();
        let b = generate(&small_config()).unwrap();
        assert_eq!(a.num_factors(), b.num_factors());
        for (ra, rb) in a.robots.iter().zip(&b.robots) {
            for ((ka, va), (kb, vb)) in ra.initial.iter().zip(rb.initial.iter()) {
                assert_eq!(ka, kb);
                let (pa, pb) = (va.as_pose().unwrap(), vb.as_pose().unwrap());
                assert_eq!(pa.translation(), pb.translation());
            }
        }
    }

    #[test]
    fn inter_robot_factors_exist_and_create_shared_copies() {
        let problem = generate(&small_config()).unwrap();
        let inter: usize = problem
            .all_factors()
            .iter()
            .filter(|f| f.is_inter_robot())
            .count();
        assert!(inter > 0, "expected inter-robot closures");
        let registry = problem.shared_registry();
        assert!(registry.contains_key(&(RobotId(0), RobotId(1))));
        let shared = &registry[&(RobotId(0), RobotId(1))];
        assert!(!shared.is_empty());
        // Copies are seeded from local information: the observer's own
        // estimate composed with the relative measurement.
        for key in shared {
            for robot in &problem.robots {
                if robot.id == key.robot {
                    continue;
                }
                let Some(copy) = robot.initial.get(key) else {
                    continue;
                };
                let factor = robot
                    .graph
                    .factors()
                    .iter()
                    .find_map(|f| match f {
                        Factor::BetweenPose { from, to, measured, .. } if to == key => {
                            Some((from, measured))
                        }
                        _ => None,
                    })
                    .expect("copy backed by a between factor");
                let own = robot.initial.get(factor.0).unwrap().as_pose().unwrap();
                let expected = own.compose(factor.1);
                assert_eq!(copy.as_pose().unwrap().translation(), expected.translation());
            }
        }
    }

    #[test]
    fn exactly_one_global_prior_and_per_robot_anchors() {
        let problem = generate(&small_config()).unwrap();
        let priors: usize = problem
            .all_factors()
            .iter()
            .filter(|f| matches!(f, Factor::PriorPose { .. }))
            .count();
        assert_eq!(priors, 1);
        assert!(problem.robots[0].anchor.is_none());
        assert!(problem.robots[1].anchor.is_some());
    }

    #[test]
    fn range_measurements_are_emitted_when_configured() {
        let config = SyntheticConfig {
            dims: 2,
            measurement: InterMeasurement::Range,
            ..small_config()
        };
        let problem = generate(&config).unwrap();
        let ranges = problem
            .all_factors()
            .iter()
            .filter(|f| matches!(f, Factor::Range { .. }))
            .count();
        assert!(ranges > 0);
        assert!(problem
            .all_factors()
            .iter()
            .all(|f| !f.is_inter_robot() || matches!(f, Factor::Range { .. })));
    }

    #[test]
    fn noise_sampling_is_unbiased() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let n = 10_000;
        let mut sum = DVector::zeros(6);
        let sigma_r = 1.0f64.to_radians();
        let sigma_t = 0.05;
        for _ in 0..n {
            sum += sample_noise(&mut rng, 3, sigma_r, sigma_t).as_vector();
        }
        let mean = sum / n as f64;
        let bound_r = 3.0 * sigma_r / (n as f64).sqrt();
        let bound_t = 3.0 * sigma_t / (n as f64).sqrt();
        for i in 0..3 {
            assert!(mean[i].abs() < bound_r, "rot component {i} biased: {}", mean[i]);
            assert!(mean[3 + i].abs() < bound_t, "trans component {i} biased: {}", mean[3 + i]);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_dims = SyntheticConfig { dims: 4, ..SyntheticConfig::default() };
        assert!(matches!(generate(&bad_dims), Err(DatasetError::InvalidConfig(_))));
        let bad_prob = SyntheticConfig { loop_prob: 1.5, ..SyntheticConfig::default() };
        assert!(matches!(generate(&bad_prob), Err(DatasetError::InvalidConfig(_))));
    }
}
