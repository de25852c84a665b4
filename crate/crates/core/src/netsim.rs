//! Edge-based asynchronous communication simulator: schedules of pairwise
//! events with drops and outage windows, plus trace recording.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::factorgraph::RobotId;
use crate::mesa::{MesaError, StopCriteria, Team};
use crate::scalar::Real;

pub const TRACE_SCHEMA: &str = "# schema: trace v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleMode {
    RoundRobin,
    UniformRandom,
}

/// Event-index interval `[start, end)` during which an edge cannot communicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutageWindow {
    pub edge: (RobotId, RobotId),
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct ScheduleParams {
    pub mode: ScheduleMode,
    pub events: usize,
    pub drop_prob: f64,
    pub outages: Vec<OutageWindow>,
    pub seed: u64,
}

impl ScheduleParams {
    pub fn round_robin(events: usize) -> Self {
        Self {
            mode: ScheduleMode::RoundRobin,
            events,
            drop_prob: 0.0,
            outages: Vec::new(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduledEvent {
    pub index: usize,
    pub edge: (RobotId, RobotId),
    /// False for dropped or outage-suppressed events; they stay in the
    /// schedule as skipped entries.
    pub executed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSchedule {
    pub events: Vec<ScheduledEvent>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetsimError {
    #[error("empty edge set")]
    EmptyEdgeSet,
    #[error("drop probability must lie in [0, 1), got {0}")]
    InvalidDropProb(f64),
    #[error("trace parse error at line {line}: {message}")]
    TraceParse { line: usize, message: String },
}

/// Deterministic schedule generation; the seed fixes both the random edge
/// choices and the drop decisions.
pub fn generate_schedule(
    edges: &[(RobotId, RobotId)],
    params: &ScheduleParams,
) -> Result<NetworkSchedule, NetsimError> {
    if edges.is_empty() {
        return Err(NetsimError::EmptyEdgeSet);
    }
    if !(0.0..1.0).contains(&params.drop_prob) {
        return Err(NetsimError::InvalidDropProb(params.drop_prob));
    }
    let mut edges: Vec<(RobotId, RobotId)> = edges
        .iter()
        .map(|&(a, b)| if a <= b { (a, b) } else { (b, a) })
        .collect();
    edges.sort();
    edges.dedup();
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut events = Vec::with_capacity(params.events);
    for index in 0..params.events {
        let edge = match params.mode {
            ScheduleMode::RoundRobin => edges[index % edges.len()],
            ScheduleMode::UniformRandom => edges[rng.gen_range(0..edges.len())],
        };
        let dropped = rng.gen::<f64>() < params.drop_prob;
        let outage = params
            .outages
            .iter()
            .any(|w| w.edge == edge && w.start <= index && index < w.end);
        events.push(ScheduledEvent {
            index,
            edge,
            executed: !(dropped || outage),
        });
    }
    Ok(NetworkSchedule { events })
}

/// Counts executed communications, total and per edge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommCounter {
    total: usize,
    per_edge: BTreeMap<(RobotId, RobotId), usize>,
}

impl CommCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, edge: (RobotId, RobotId)) {
        self.total += 1;
        *self.per_edge.entry(edge).or_insert(0) += 1;
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn edge_total(&self, edge: (RobotId, RobotId)) -> usize {
        self.per_edge.get(&edge).copied().unwrap_or(0)
    }

    pub fn per_edge(&self) -> impl Iterator<Item = (&(RobotId, RobotId), &usize)> {
        self.per_edge.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub event_index: usize,
    pub edge: (RobotId, RobotId),
    pub executed: bool,
    pub communications: usize,
    pub r2_mean: f64,
    pub max_gap: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub samples: Vec<TraceSample>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn final_r2_mean(&self) -> Option<f64> {
        self.samples.last().map(|s| s.r2_mean)
    }

    /// (communications, r2_mean) pairs, e.g. for convergence-point detection.
    pub fn points(&self) -> Vec<(usize, f64)> {
        self.samples
            .iter()
            .map(|s| (s.communications, s.r2_mean))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_SCHEMA}")?;
        writeln!(w, "event_index,edge,executed,communications,r2_mean,max_gap")?;
        for s in &self.samples {
            writeln!(
                w,
                "{},{}-{},{},{},{},{}",
                s.event_index, s.edge.0 .0, s.edge.1 .0, s.executed, s.communications, s.r2_mean, s.max_gap
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, NetsimError> {
        let reader = BufReader::new(r);
        let mut samples = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| NetsimError::TraceParse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            let trimmed = line.trim();
            if trimmed.is_empty()
                || trimmed.starts_with('#')
                || trimmed.starts_with("event_index")
            {
                continue;
            }
            let parse = |msg: &str| NetsimError::TraceParse {
                line: lineno + 1,
                message: msg.to_string(),
            };
            let fields: Vec<&str> = trimmed.split(',').collect();
            if fields.len() != 6 {
                return Err(parse("expected 6 fields"));
            }
            let (a, b) = fields[1]
                .split_once('-')
                .ok_or_else(|| parse("edge must be 'a-b'"))?;
            samples.push(TraceSample {
                event_index: fields[0].parse().map_err(|_| parse("bad event_index"))?,
                edge: (
                    RobotId(a.parse().map_err(|_| parse("bad edge robot id"))?),
                    RobotId(b.parse().map_err(|_| parse("bad edge robot id"))?),
                ),
                executed: fields[2].parse().map_err(|_| parse("bad executed flag"))?,
                communications: fields[3].parse().map_err(|_| parse("bad communications"))?,
                r2_mean: fields[4].parse().map_err(|_| parse("bad r2_mean"))?,
                max_gap: fields[5].parse().map_err(|_| parse("bad max_gap"))?,
            });
        }
        Ok(Trace { samples })
    }
}

/// Runs the consensus steps dictated by the schedule. Thin wrapper over
/// [`Team::run`] so schedule generation and execution live side by side.
pub fn execute<S: Real>(
    team: &mut Team<S>,
    schedule: &NetworkSchedule,
    stop: &StopCriteria,
) -> Result<Trace, MesaError> {
    team.run(schedule, stop)
}
