//! Implementations of the four subcommands. Every run writes three files
//! into the output directory, named after the method: `<m>.trace.csv`,
//! `<m>.summary.csv`, and `<m>.manifest.txt` (the effective config).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mesa::baselines::{centralized, independent};
use mesa::datasets::{
    generate, load_g2o, load_problem, partition, partition_with_assignment,
    read_partition_file, write_problem, MultiRobotProblem,
};
use mesa::factorgraph::{Factor, FactorGraph, NoiseModel, RobotId, SolverConfig, Values};
use mesa::mesa::{default_budget, MesaConfig, StopCriteria, Team};
use mesa::metrics::{convergence_point, write_summary_csv, SummaryRow};
use mesa::netsim::{generate_schedule, ScheduleParams, Trace, TraceSample};

use crate::config::{
    kind_name, measurement_name, mesa_from_ini, read_manifest_info, render_manifest,
    schedule_from_ini, synthetic_from_ini, Ini, Manifest, ScheduleSettings,
};
use crate::{CliError, Method, EXIT_BUDGET_EXHAUSTED, EXIT_OK};

/// A sample counts as converged once its objective is within this fraction
/// of the final value; `compare` reports the first such sample.
const CONVERGENCE_FRACTION: f64 = 0.01;

fn load_ini(path: Option<&Path>) -> Result<Ini, CliError> {
    match path {
        Some(p) => Ini::load(p),
        None => Ok(Ini::default()),
    }
}

pub fn cmd_generate(
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
) -> Result<u8, CliError> {
    let mut ini = load_ini(config)?;
    let mut cfg = synthetic_from_ini(&mut ini)?;
    ini.finish()?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let problem = generate(&cfg)?;
    let mut buf = Vec::new();
    write_problem(&problem, &mut buf)?;
    std::fs::write(out, buf)?;
    let inter = problem.all_factors().iter().filter(|f| f.is_inter_robot()).count();
    let shared: usize = problem.shared_registry().values().map(Vec::len).sum();
    println!(
        "wrote {} (seed {}, {} closures): {} robots, {} variables, {} factors ({} inter-robot), {} shared",
        out.display(),
        cfg.seed,
        measurement_name(cfg.measurement),
        problem.robots.len(),
        problem.ground_truth.len(),
        problem.num_factors(),
        inter,
        shared,
    );
    Ok(EXIT_OK)
}

/// Flag-level overrides shared by `run` and `bench`; `None` defers to the
/// config file, which defers to the built-in defaults.
#[derive(Debug, Default, Clone)]
pub struct RunOverrides {
    pub beta0: Option<f64>,
    pub alpha: Option<f64>,
    pub budget: Option<usize>,
    pub schedule: Option<mesa::netsim::ScheduleMode>,
    pub drop_prob: Option<f64>,
    pub seed: Option<u64>,
}

fn has_range_factors(problem: &MultiRobotProblem<f64>) -> bool {
    problem
        .all_factors()
        .iter()
        .any(|f| matches!(f, Factor::Range { .. } | Factor::BearingRange { .. }))
}

/// Resolves the effective MESA and schedule settings from defaults, the
/// problem type, the config file, and flags, in that order. Range and
/// bearing-range problems default to beta0 = 2, alpha = 1.05.
fn resolve_settings(
    method: Method,
    problem: &MultiRobotProblem<f64>,
    ini: &mut Ini,
    overrides: &RunOverrides,
) -> Result<(MesaConfig, ScheduleSettings), CliError> {
    let mut base = match method.kind() {
        Some(kind) => MesaConfig::for_kind(kind),
        None => MesaConfig::default(),
    };
    if has_range_factors(problem) {
        base.beta0 = 2.0;
        base.alpha = 1.05;
    }
    let mut mesa_cfg = mesa_from_ini(ini, base)?;
    if let Some(kind) = method.kind() {
        mesa_cfg.kind = kind;
    }
    if let Some(beta0) = overrides.beta0 {
        mesa_cfg.beta0 = beta0;
    }
    if let Some(alpha) = overrides.alpha {
        mesa_cfg.alpha = alpha;
    }
    let mut schedule = schedule_from_ini(ini)?;
    if let Some(mode) = overrides.schedule {
        schedule.mode = mode;
    }
    if let Some(budget) = overrides.budget {
        schedule.events = budget;
    }
    if let Some(drop_prob) = overrides.drop_prob {
        schedule.drop_prob = drop_prob;
    }
    if let Some(seed) = overrides.seed {
        schedule.seed = seed;
    }
    Ok((mesa_cfg, schedule))
}

pub fn cmd_run(
    problem_path: &Path,
    method: Method,
    config: Option<&Path>,
    overrides: &RunOverrides,
    out_dir: &Path,
) -> Result<u8, CliError> {
    let problem = load_problem(problem_path)?;
    execute(&problem, &problem_path.display().to_string(), method, config, overrides, out_dir)
}

pub fn cmd_bench(
    g2o_path: &Path,
    parts: usize,
    partition_file: Option<&Path>,
    save_problem: Option<&Path>,
    method: Method,
    config: Option<&Path>,
    overrides: &RunOverrides,
    out_dir: &Path,
) -> Result<u8, CliError> {
    let (mut graph, values) = load_g2o(g2o_path)?;
    anchor_gauge(&mut graph, &values)?;
    let problem = match partition_file {
        Some(path) => {
            let ids = read_partition_file(path)?;
            if ids.len() != values.len() {
                return Err(CliError::Config(format!(
                    "partition file has {} entries for {} variables",
                    ids.len(),
                    values.len()
                )));
            }
            let assignment: BTreeMap<_, _> =
                values.keys().copied().zip(ids.iter().copied()).collect();
            partition_with_assignment(&graph, &values, &assignment)?
        }
        None => partition(&graph, &values, parts)?,
    };
    if let Some(path) = save_problem {
        let mut buf = Vec::new();
        write_problem(&problem, &mut buf)?;
        std::fs::write(path, buf)?;
    }
    let label = format!("{}-p{}", stem_of(g2o_path), problem.robots.len());
    execute(&problem, &label, method, config, overrides, out_dir)
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// g2o pose graphs carry relative measurements only, leaving the gauge free
/// and the normal equations singular. Pin the lowest-id vertex at its
/// initial estimate, as batch solvers conventionally do; the prior's
/// residual is zero at any optimum, so the objective is unchanged.
fn anchor_gauge(graph: &mut FactorGraph<f64>, values: &Values<f64>) -> Result<(), CliError> {
    let (&key, value) = values
        .iter()
        .next()
        .ok_or_else(|| CliError::Config("g2o file has no vertices".into()))?;
    let pose = value
        .as_pose()
        .ok_or_else(|| CliError::Config("first g2o vertex is not a pose".into()))?;
    graph.add(Factor::prior(
        key,
        pose.clone(),
        NoiseModel::isotropic(pose.dof(), 1e-3),
    ));
    Ok(())
}

fn execute(
    problem: &MultiRobotProblem<f64>,
    problem_label: &str,
    method: Method,
    config: Option<&Path>,
    overrides: &RunOverrides,
    out_dir: &Path,
) -> Result<u8, CliError> {
    let mut ini = load_ini(config)?;
    let (mesa_cfg, mut schedule) = resolve_settings(method, problem, &mut ini, overrides)?;
    ini.finish()?;
    std::fs::create_dir_all(out_dir)?;

    match method {
        Method::Centralized => {
            let result = centralized(problem, &mesa_cfg.solver)?;
            let outputs = Outputs {
                out_dir,
                method: "centralized",
                problem_label,
                solver: &mesa_cfg.solver,
                mesa: None,
                schedule: None,
            };
            outputs.write(&single_row_trace(result.final_residual))?;
            println!(
                "centralized: residual {} after {} iterations ({})",
                result.final_residual,
                result.iterations,
                if result.converged { "converged" } else { "iteration limit" },
            );
            Ok(if result.converged { EXIT_OK } else { EXIT_BUDGET_EXHAUSTED })
        }
        Method::Independent => {
            let result = independent(problem, &mesa_cfg.solver)?;
            let outputs = Outputs {
                out_dir,
                method: "independent",
                problem_label,
                solver: &mesa_cfg.solver,
                mesa: None,
                schedule: None,
            };
            outputs.write(&single_row_trace(result.r2_mean))?;
            println!("independent: r2_mean {} over {} robots", result.r2_mean, result.solutions.len());
            Ok(EXIT_OK)
        }
        _ => {
            let team_inputs = problem.team_inputs();
            let team = Team::new(team_inputs, mesa_cfg.clone())?;
            let n_edges = team.edges().len();
            let n_robots = team.robots().len();
            if schedule.events == 0 {
                schedule.events = default_budget(n_edges, n_robots);
            }
            let params = ScheduleParams {
                mode: schedule.mode,
                events: schedule.events,
                drop_prob: schedule.drop_prob,
                outages: Vec::new(),
                seed: schedule.seed,
            };
            let net = generate_schedule(team.edges(), &params)?;
            let stop = StopCriteria {
                max_communications: schedule.events,
                gap_tol: schedule.gap_tol,
                sample_every: schedule.sample_every,
            };
            let mut team = team;
            let trace = team.run(&net, &stop)?;
            let communications = trace.samples.last().map_or(0, |s| s.communications);
            let converged = communications > 0 && team.max_gap()? < schedule.gap_tol;
            let final_r2 = trace.final_r2_mean().unwrap_or(f64::NAN);
            let outputs = Outputs {
                out_dir,
                method: kind_name(mesa_cfg.kind),
                problem_label,
                solver: &mesa_cfg.solver,
                mesa: Some(&mesa_cfg),
                schedule: Some(&schedule),
            };
            outputs.write(&trace)?;
            println!(
                "{}: r2_mean {} after {} communications ({})",
                kind_name(mesa_cfg.kind),
                final_r2,
                communications,
                if converged { "converged" } else { "budget exhausted" },
            );
            Ok(if converged { EXIT_OK } else { EXIT_BUDGET_EXHAUSTED })
        }
    }
}

fn single_row_trace(r2: f64) -> Trace {
    Trace {
        samples: vec![TraceSample {
            event_index: 0,
            edge: (RobotId(0), RobotId(0)),
            executed: false,
            communications: 0,
            r2_mean: r2,
            max_gap: 0.0,
        }],
    }
}

struct Outputs<'a> {
    out_dir: &'a Path,
    method: &'a str,
    problem_label: &'a str,
    solver: &'a SolverConfig,
    mesa: Option<&'a MesaConfig>,
    schedule: Option<&'a ScheduleSettings>,
}

impl Outputs<'_> {
    fn write(&self, trace: &Trace) -> Result<(), CliError> {
        let base = self.out_dir.join(self.method);
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        std::fs::write(base.with_extension("trace.csv"), &buf)?;

        let (at, _) = convergence_point(&trace.points(), CONVERGENCE_FRACTION)?;
        let row = SummaryRow {
            dataset: self.problem_label.to_string(),
            method: self.method.to_string(),
            beta0: self.mesa.map_or(f64::NAN, |m| m.beta0),
            alpha: self.mesa.map_or(f64::NAN, |m| m.alpha),
            communications_at_convergence: at,
            r2_mean_final: trace.final_r2_mean().unwrap_or(f64::NAN),
        };
        buf.clear();
        write_summary_csv(&[row], &mut buf)?;
        std::fs::write(base.with_extension("summary.csv"), &buf)?;

        let manifest = Manifest {
            problem: self.problem_label,
            method: self.method,
            solver: self.solver,
            mesa: self.mesa,
            schedule: self.schedule,
        };
        std::fs::write(base.with_extension("manifest.txt"), render_manifest(&manifest))?;
        Ok(())
    }
}

pub fn cmd_compare(dir: &Path, out: &Path) -> Result<u8, CliError> {
    let mut trace_paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(".trace.csv"))
        .collect();
    trace_paths.sort();
    if trace_paths.is_empty() {
        return Err(CliError::Config(format!("no *.trace.csv files in {}", dir.display())));
    }
    let mut rows = Vec::with_capacity(trace_paths.len());
    for path in &trace_paths {
        let trace = Trace::read_csv(std::fs::File::open(path)?)?;
        let (at, _) = convergence_point(&trace.points(), CONVERGENCE_FRACTION)?;
        let name = path.to_string_lossy();
        let stem = name
            .strip_suffix(".trace.csv")
            .expect("filtered on suffix")
            .to_string();
        let manifest_path = PathBuf::from(format!("{stem}.manifest.txt"));
        if !manifest_path.exists() {
            return Err(CliError::Config(format!(
                "{} has no manifest ({})",
                path.display(),
                manifest_path.display()
            )));
        }
        let info = read_manifest_info(&manifest_path)?;
        rows.push(SummaryRow {
            dataset: info.problem,
            method: info.method,
            beta0: info.beta0,
            alpha: info.alpha,
            communications_at_convergence: at,
            r2_mean_final: trace.final_r2_mean().unwrap_or(f64::NAN),
        });
    }
    let mut buf = Vec::new();
    write_summary_csv(&rows, &mut buf)?;
    std::fs::write(out, &buf)?;
    println!("wrote {} ({} methods)", out.display(), rows.len());
    Ok(EXIT_OK)
}
