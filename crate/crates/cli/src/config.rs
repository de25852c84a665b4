//! Key-value config files with `[section]` headers, and the run manifests
//! emitted next to every trace. Both use the same syntax, so a manifest can
//! be replayed as a config. Environment variables are deliberately not
//! consulted: everything affecting a run is in the file or on the command
//! line, and the manifest records the effective values.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mesa::datasets::{InterMeasurement, SyntheticConfig};
use mesa::factorgraph::SolverConfig;
use mesa::mesa::{ConstraintKind, DualRule, MesaConfig, StopCriteria};
use mesa::netsim::ScheduleMode;

use crate::CliError;

pub const MANIFEST_SCHEMA: &str = "# schema: manifest v1";

pub type Section = BTreeMap<String, String>;

#[derive(Debug, Default, Clone)]
pub struct Ini {
    sections: BTreeMap<String, Section>,
}

impl Ini {
    pub fn parse(text: &str) -> Result<Ini, CliError> {
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let lineno = idx + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| CliError::config(lineno, "unterminated section header"))?;
                sections.entry(name.to_string()).or_default();
                current = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::config(lineno, format!("expected key = value, got {line:?}")));
            };
            let Some(section) = &current else {
                return Err(CliError::config(lineno, "key outside any [section]"));
            };
            sections
                .get_mut(section)
                .expect("section inserted on header")
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Ini { sections })
    }

    pub fn load(path: &std::path::Path) -> Result<Ini, CliError> {
        Ini::parse(&std::fs::read_to_string(path)?)
    }

    /// Removes and returns a section; strict consumers call this and then
    /// reject leftover keys so typos cannot silently pass.
    pub fn take_section(&mut self, name: &str) -> Option<Section> {
        self.sections.remove(name)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    /// Errors on sections nobody consumed.
    pub fn finish(self) -> Result<(), CliError> {
        match self.sections.into_keys().next() {
            Some(name) => Err(CliError::Config(format!("unknown config section [{name}]"))),
            None => Ok(()),
        }
    }
}

fn reject_leftovers(name: &str, section: Section) -> Result<(), CliError> {
    match section.into_keys().next() {
        Some(key) => Err(CliError::Config(format!("unknown key {key:?} in [{name}]"))),
        None => Ok(()),
    }
}

fn take_parsed<T: std::str::FromStr>(
    section: &mut Section,
    key: &str,
    slot: &mut T,
) -> Result<(), CliError> {
    if let Some(raw) = section.remove(key) {
        *slot = raw
            .parse()
            .map_err(|_| CliError::Config(format!("bad value for {key}: {raw:?}")))?;
    }
    Ok(())
}

pub fn parse_kind(s: &str) -> Result<ConstraintKind, CliError> {
    match s {
        "geodesic" => Ok(ConstraintKind::Geodesic),
        "apx-geo" => Ok(ConstraintKind::ApproxGeodesic),
        "split" => Ok(ConstraintKind::Split),
        "chordal" => Ok(ConstraintKind::Chordal),
        other => Err(CliError::Config(format!("unknown constraint kind {other:?}"))),
    }
}

pub fn kind_name(kind: ConstraintKind) -> &'static str {
    match kind {
        ConstraintKind::Geodesic => "geodesic",
        ConstraintKind::ApproxGeodesic => "apx-geo",
        ConstraintKind::Split => "split",
        ConstraintKind::Chordal => "chordal",
        ConstraintKind::Linear => "linear",
    }
}

fn parse_dual_rule(s: &str) -> Result<DualRule, CliError> {
    match s {
        "theta-gap" => Ok(DualRule::ThetaGap),
        "edge-gap" => Ok(DualRule::EdgeGap),
        other => Err(CliError::Config(format!("unknown dual rule {other:?}"))),
    }
}

fn dual_rule_name(rule: DualRule) -> &'static str {
    match rule {
        DualRule::ThetaGap => "theta-gap",
        DualRule::EdgeGap => "edge-gap",
    }
}

fn parse_measurement(s: &str) -> Result<InterMeasurement, CliError> {
    match s {
        "pose" => Ok(InterMeasurement::Pose),
        "range" => Ok(InterMeasurement::Range),
        "bearing-range" => Ok(InterMeasurement::BearingRange),
        other => Err(CliError::Config(format!("unknown measurement {other:?}"))),
    }
}

pub fn measurement_name(m: InterMeasurement) -> &'static str {
    match m {
        InterMeasurement::Pose => "pose",
        InterMeasurement::Range => "range",
        InterMeasurement::BearingRange => "bearing-range",
    }
}

pub fn parse_schedule_mode(s: &str) -> Result<ScheduleMode, CliError> {
    match s {
        "round-robin" => Ok(ScheduleMode::RoundRobin),
        "random" => Ok(ScheduleMode::UniformRandom),
        other => Err(CliError::Config(format!("unknown schedule mode {other:?}"))),
    }
}

pub fn schedule_mode_name(mode: ScheduleMode) -> &'static str {
    match mode {
        ScheduleMode::RoundRobin => "round-robin",
        ScheduleMode::UniformRandom => "random",
    }
}

/// Applies `[synthetic]` keys over the library defaults.
pub fn synthetic_from_ini(ini: &mut Ini) -> Result<SyntheticConfig, CliError> {
    let mut cfg = SyntheticConfig::default();
    let Some(mut sec) = ini.take_section("synthetic") else {
        return Ok(cfg);
    };
    take_parsed(&mut sec, "dims", &mut cfg.dims)?;
    take_parsed(&mut sec, "robots", &mut cfg.robots)?;
    take_parsed(&mut sec, "poses_per_robot", &mut cfg.poses_per_robot)?;
    take_parsed(&mut sec, "forward_prob", &mut cfg.forward_prob)?;
    take_parsed(&mut sec, "loop_prob", &mut cfg.loop_prob)?;
    take_parsed(&mut sec, "step", &mut cfg.step)?;
    take_parsed(&mut sec, "proximity", &mut cfg.proximity)?;
    take_parsed(&mut sec, "min_loop_separation", &mut cfg.min_loop_separation)?;
    take_parsed(&mut sec, "inter_period", &mut cfg.inter_period)?;
    take_parsed(&mut sec, "sigma_r_deg", &mut cfg.sigma_r_deg)?;
    take_parsed(&mut sec, "sigma_t", &mut cfg.sigma_t)?;
    take_parsed(&mut sec, "seed", &mut cfg.seed)?;
    if let Some(raw) = sec.remove("measurement") {
        cfg.measurement = parse_measurement(&raw)?;
    }
    reject_leftovers("synthetic", sec)?;
    Ok(cfg)
}

/// Applies `[mesa]` and `[solver]` keys over `base` (typically
/// [`MesaConfig::for_kind`] of the requested kind).
pub fn mesa_from_ini(ini: &mut Ini, base: MesaConfig) -> Result<MesaConfig, CliError> {
    let mut cfg = base;
    if let Some(mut sec) = ini.take_section("mesa") {
        if let Some(raw) = sec.remove("kind") {
            cfg.kind = parse_kind(&raw)?;
        }
        take_parsed(&mut sec, "beta0", &mut cfg.beta0)?;
        take_parsed(&mut sec, "alpha", &mut cfg.alpha)?;
        take_parsed(&mut sec, "beta_max", &mut cfg.beta_max)?;
        if let Some(raw) = sec.remove("dual_rule") {
            cfg.dual_rule = parse_dual_rule(&raw)?;
        }
        reject_leftovers("mesa", sec)?;
    }
    cfg.solver = solver_from_ini(ini, cfg.solver)?;
    Ok(cfg)
}

pub fn solver_from_ini(ini: &mut Ini, base: SolverConfig) -> Result<SolverConfig, CliError> {
    let mut cfg = base;
    if let Some(mut sec) = ini.take_section("solver") {
        take_parsed(&mut sec, "max_iterations", &mut cfg.max_iterations)?;
        take_parsed(&mut sec, "tol_rel", &mut cfg.tol_rel)?;
        take_parsed(&mut sec, "tol_abs", &mut cfg.tol_abs)?;
        take_parsed(&mut sec, "lambda_init", &mut cfg.lambda_init)?;
        take_parsed(&mut sec, "lambda_max", &mut cfg.lambda_max)?;
        reject_leftovers("solver", sec)?;
    }
    Ok(cfg)
}

/// Schedule and stop settings shared by `run` and `bench`. `events` is the
/// communication budget; zero means "use the 500 per edge per robot
/// default", resolved once the team's edge count is known.
#[derive(Debug, Clone)]
pub struct ScheduleSettings {
    pub mode: ScheduleMode,
    pub events: usize,
    pub drop_prob: f64,
    pub seed: u64,
    pub gap_tol: f64,
    pub sample_every: usize,
}

impl Default for ScheduleSettings {
    fn default() -> Self {
        let stop = StopCriteria::default();
        ScheduleSettings {
            mode: ScheduleMode::RoundRobin,
            events: 0,
            drop_prob: 0.0,
            seed: 0,
            gap_tol: stop.gap_tol,
            sample_every: stop.sample_every,
        }
    }
}

pub fn schedule_from_ini(ini: &mut Ini) -> Result<ScheduleSettings, CliError> {
    let mut cfg = ScheduleSettings::default();
    if let Some(mut sec) = ini.take_section("schedule") {
        if let Some(raw) = sec.remove("mode") {
            cfg.mode = parse_schedule_mode(&raw)?;
        }
        take_parsed(&mut sec, "events", &mut cfg.events)?;
        take_parsed(&mut sec, "drop_prob", &mut cfg.drop_prob)?;
        take_parsed(&mut sec, "seed", &mut cfg.seed)?;
        reject_leftovers("schedule", sec)?;
    }
    if let Some(mut sec) = ini.take_section("stop") {
        take_parsed(&mut sec, "gap_tol", &mut cfg.gap_tol)?;
        take_parsed(&mut sec, "sample_every", &mut cfg.sample_every)?;
        reject_leftovers("stop", sec)?;
    }
    Ok(cfg)
}

/// The effective configuration of one run, echoed next to its outputs.
pub struct Manifest<'a> {
    pub problem: &'a str,
    pub method: &'a str,
    pub solver: &'a SolverConfig,
    /// Present for MESA methods only.
    pub mesa: Option<&'a MesaConfig>,
    /// Present for MESA methods only; `events` already resolved.
    pub schedule: Option<&'a ScheduleSettings>,
}

pub fn render_manifest(m: &Manifest) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "{MANIFEST_SCHEMA}");
    let _ = writeln!(w, "[run]");
    let _ = writeln!(w, "problem = {}", m.problem);
    let _ = writeln!(w, "method = {}", m.method);
    if let Some(mesa) = m.mesa {
        let _ = writeln!(w, "[mesa]");
        let _ = writeln!(w, "kind = {}", kind_name(mesa.kind));
        let _ = writeln!(w, "beta0 = {}", mesa.beta0);
        let _ = writeln!(w, "alpha = {}", mesa.alpha);
        let _ = writeln!(w, "beta_max = {}", mesa.beta_max);
        let _ = writeln!(w, "dual_rule = {}", dual_rule_name(mesa.dual_rule));
    }
    let _ = writeln!(w, "[solver]");
    let _ = writeln!(w, "max_iterations = {}", m.solver.max_iterations);
    let _ = writeln!(w, "tol_rel = {}", m.solver.tol_rel);
    let _ = writeln!(w, "tol_abs = {}", m.solver.tol_abs);
    let _ = writeln!(w, "lambda_init = {}", m.solver.lambda_init);
    let _ = writeln!(w, "lambda_max = {}", m.solver.lambda_max);
    if let Some(s) = m.schedule {
        let _ = writeln!(w, "[schedule]");
        let _ = writeln!(w, "mode = {}", schedule_mode_name(s.mode));
        let _ = writeln!(w, "events = {}", s.events);
        let _ = writeln!(w, "drop_prob = {}", s.drop_prob);
        let _ = writeln!(w, "seed = {}", s.seed);
        let _ = writeln!(w, "[stop]");
        let _ = writeln!(w, "gap_tol = {}", s.gap_tol);
        let _ = writeln!(w, "sample_every = {}", s.sample_every);
    }
    out
}

/// Reads `beta0`/`alpha`/problem metadata back out of a manifest for the
/// summary table; baseline methods have no [mesa] section and report NaN.
pub struct ManifestInfo {
    pub problem: String,
    pub method: String,
    pub beta0: f64,
    pub alpha: f64,
}

pub fn read_manifest_info(path: &std::path::Path) -> Result<ManifestInfo, CliError> {
    let ini = Ini::load(path)?;
    let run = ini
        .section("run")
        .ok_or_else(|| CliError::Config(format!("{} has no [run] section", path.display())))?;
    let field = |key: &str| run.get(key).cloned().unwrap_or_default();
    let (mut beta0, mut alpha) = (f64::NAN, f64::NAN);
    if let Some(mesa) = ini.section("mesa") {
        for (slot, key) in [(&mut beta0, "beta0"), (&mut alpha, "alpha")] {
            if let Some(raw) = mesa.get(key) {
                *slot = raw
                    .parse()
                    .map_err(|_| CliError::Config(format!("bad {key} in {}", path.display())))?;
            }
        }
    }
    Ok(ManifestInfo { problem: field("problem"), method: field("method"), beta0, alpha })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_and_overrides_parse() {
        let text = "\
# comment
[synthetic]
robots = 2
poses_per_robot = 50
measurement = range

[mesa]
beta0 = 2
alpha = 1.05
";
        let mut ini = Ini::parse(text).unwrap();
        let synth = synthetic_from_ini(&mut ini).unwrap();
        assert_eq!(synth.robots, 2);
        assert_eq!(synth.poses_per_robot, 50);
        assert!(matches!(synth.measurement, InterMeasurement::Range));
        assert_eq!(synth.dims, SyntheticConfig::default().dims);

        let mesa = mesa_from_ini(&mut ini, MesaConfig::default()).unwrap();
        assert_eq!(mesa.beta0, 2.0);
        assert_eq!(mesa.alpha, 1.05);
        ini.finish().unwrap();
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let mut ini = Ini::parse("[synthetic]\nrobtos = 2\n").unwrap();
        assert!(synthetic_from_ini(&mut ini).is_err());

        let ini = Ini::parse("[synthetics]\nrobots = 2\n").unwrap();
        assert!(ini.finish().is_err());
    }

    #[test]
    fn manifest_round_trips_through_the_ini_parser() {
        let mesa = MesaConfig::default();
        let schedule = ScheduleSettings { events: 1200, ..ScheduleSettings::default() };
        let manifest = Manifest {
            problem: "toy.mrp",
            method: "geodesic",
            solver: &mesa.solver,
            mesa: Some(&mesa),
            schedule: Some(&schedule),
        };
        let text = render_manifest(&manifest);
        let info = {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("m.txt");
            std::fs::write(&path, &text).unwrap();
            read_manifest_info(&path).unwrap()
        };
        assert_eq!(info.method, "geodesic");
        assert_eq!(info.beta0, 200.0);
        assert_eq!(info.alpha, 1.0);

        let mut ini = Ini::parse(&text).unwrap();
        ini.take_section("run");
        let replayed = mesa_from_ini(&mut ini, MesaConfig::default()).unwrap();
        assert_eq!(replayed.beta0, 200.0);
        schedule_from_ini(&mut ini).unwrap();
        ini.finish().unwrap();
    }
}
