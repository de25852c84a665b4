//! Reader and writer for the g2o pose-graph text format.
//!
//! Supported records: `VERTEX_SE2`, `VERTEX_SE3:QUAT`, `EDGE_SE2` and
//! `EDGE_SE3:QUAT`; anything else is rejected rather than skipped so that
//! silently ignored measurements cannot distort a benchmark. Information
//! matrices in g2o files are upper triangular in translation-first component
//! order and are permuted into the rotation-first tangent order used here.
//!
//! Vertex ids become variable keys on robot 0; [`super::partition`]
//! reassigns them to parts. g2o files carry no gauge prior, so callers
//! anchor the loaded graph themselves.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use nalgebra::{DMatrix, Quaternion, Rotation3, UnitQuaternion, Vector3};

use crate::factorgraph::{Factor, FactorGraph, NoiseModel, Values, VariableKey};
use crate::manifold::{Pose, VariableValue};

use super::{DatasetError, Tokens};

/// Deviation from unit norm beyond which a parsed quaternion is
/// renormalized; quaternions written by [`write_g2o`] stay within it.
const QUAT_NORM_TOL: f64 = 1e-9;

/// `SE2_FROM_G2O[i]` is the g2o slot of tangent component `i`: g2o orders
/// SE(2) components (x, y, theta), the tangent order here is (theta, x, y).
const SE2_FROM_G2O: [usize; 3] = [2, 0, 1];
const SE2_TO_G2O: [usize; 3] = [1, 2, 0];
/// g2o orders SE(3) components translation first, (x, y, z, rx, ry, rz);
/// swapping the halves is its own inverse.
const SE3_FROM_G2O: [usize; 6] = [3, 4, 5, 0, 1, 2];
const SE3_TO_G2O: [usize; 6] = SE3_FROM_G2O;

fn permute(info: &DMatrix<f64>, map: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(map.len(), map.len(), |i, j| info[(map[i], map[j])])
}

fn read_upper_triangle(tok: &mut Tokens, n: usize) -> Result<DMatrix<f64>, DatasetError> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = tok.f64("information entry")?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

fn push_upper_triangle(out: &mut String, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            write!(out, " {}", m[(i, j)]).expect("string writes cannot fail");
        }
    }
}

pub(super) fn parse_quaternion(tok: &mut Tokens) -> Result<Rotation3<f64>, DatasetError> {
    let qx = tok.f64("qx")?;
    let qy = tok.f64("qy")?;
    let qz = tok.f64("qz")?;
    let qw = tok.f64("qw")?;
    let q = Quaternion::new(qw, qx, qy, qz);
    let norm = q.norm();
    if norm < 1e-6 {
        return Err(DatasetError::parse(tok.line(), "degenerate quaternion"));
    }
    let unit = if (norm - 1.0).abs() <= QUAT_NORM_TOL {
        UnitQuaternion::new_unchecked(q)
    } else {
        UnitQuaternion::new_normalize(q)
    };
    Ok(unit.to_rotation_matrix())
}

pub(super) fn push_quaternion(out: &mut String, rotation: &Rotation3<f64>) {
    let q = UnitQuaternion::from_rotation_matrix(rotation);
    let c = q.coords;
    write!(out, " {} {} {} {}", c.x, c.y, c.z, c.w).expect("string writes cannot fail");
}

fn noise_from_g2o_info(
    tok: &mut Tokens,
    map: &[usize],
) -> Result<NoiseModel<f64>, DatasetError> {
    let line = tok.line();
    let info = read_upper_triangle(tok, map.len())?;
    NoiseModel::from_information(&permute(&info, map)).map_err(|_| {
        DatasetError::parse(line, "information matrix is not positive definite")
    })
}

/// Parses g2o text into a factor graph and initial values, keyed on robot 0.
pub fn parse_g2o<R: BufRead>(reader: R) -> Result<(FactorGraph<f64>, Values<f64>), DatasetError> {
    let mut graph = FactorGraph::new();
    let mut values = Values::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut tok = Tokens::new(lineno, text);
        let tag = tok.next("record tag")?;
        match tag {
            "VERTEX_SE2" => {
                let id = tok.u64("vertex id")?;
                let x = tok.f64("x")?;
                let y = tok.f64("y")?;
                let theta = tok.f64("theta")?;
                tok.done()?;
                values.insert(
                    VariableKey::new(0, id),
                    VariableValue::Pose(Pose::se2(x, y, theta)),
                );
            }
            "VERTEX_SE3:QUAT" => {
                let id = tok.u64("vertex id")?;
                let x = tok.f64("x")?;
                let y = tok.f64("y")?;
                let z = tok.f64("z")?;
                let rotation = parse_quaternion(&mut tok)?;
                tok.done()?;
                let pose = Pose::se3(rotation, Vector3::new(x, y, z));
                values.insert(VariableKey::new(0, id), VariableValue::Pose(pose));
            }
            "EDGE_SE2" => {
                let from = tok.u64("from id")?;
                let to = tok.u64("to id")?;
                let dx = tok.f64("dx")?;
                let dy = tok.f64("dy")?;
                let dtheta = tok.f64("dtheta")?;
                let noise = noise_from_g2o_info(&mut tok, &SE2_FROM_G2O)?;
                tok.done()?;
                graph.add(Factor::between(
                    VariableKey::new(0, from),
                    VariableKey::new(0, to),
                    Pose::se2(dx, dy, dtheta),
                    noise,
                ));
            }
            "EDGE_SE3:QUAT" => {
                let from = tok.u64("from id")?;
                let to = tok.u64("to id")?;
                let dx = tok.f64("dx")?;
                let dy = tok.f64("dy")?;
                let dz = tok.f64("dz")?;
                let rotation = parse_quaternion(&mut tok)?;
                let noise = noise_from_g2o_info(&mut tok, &SE3_FROM_G2O)?;
                tok.done()?;
                graph.add(Factor::between(
                    VariableKey::new(0, from),
                    VariableKey::new(0, to),
                    Pose::se3(rotation, Vector3::new(dx, dy, dz)),
                    noise,
                ));
            }
            other => {
                return Err(DatasetError::UnsupportedTag {
                    line: lineno,
                    tag: other.to_string(),
                })
            }
        }
    }
    Ok((graph, values))
}

/// Loads a g2o file; see [`parse_g2o`].
pub fn load_g2o(path: impl AsRef<Path>) -> Result<(FactorGraph<f64>, Values<f64>), DatasetError> {
    parse_g2o(BufReader::new(File::open(path)?))
}

fn vertex_record(id: usize, pose: &Pose<f64>) -> String {
    let mut out = String::new();
    match pose {
        Pose::Se2(iso) => {
            write!(
                out,
                "VERTEX_SE2 {id} {} {} {}",
                iso.translation.x,
                iso.translation.y,
                iso.rotation.angle()
            )
            .expect("string writes cannot fail");
        }
        Pose::Se3(iso) => {
            write!(
                out,
                "VERTEX_SE3:QUAT {id} {} {} {}",
                iso.translation.x, iso.translation.y, iso.translation.z
            )
            .expect("string writes cannot fail");
            push_quaternion(&mut out, &iso.rotation);
        }
    }
    out
}

fn edge_record(
    from: usize,
    to: usize,
    measured: &Pose<f64>,
    noise: &NoiseModel<f64>,
) -> String {
    let mut out = String::new();
    match measured {
        Pose::Se2(iso) => {
            write!(
                out,
                "EDGE_SE2 {from} {to} {} {} {}",
                iso.translation.x,
                iso.translation.y,
                iso.rotation.angle()
            )
            .expect("string writes cannot fail");
            push_upper_triangle(&mut out, &permute(&noise.information(), &SE2_TO_G2O));
        }
        Pose::Se3(iso) => {
            write!(
                out,
                "EDGE_SE3:QUAT {from} {to} {} {} {}",
                iso.translation.x, iso.translation.y, iso.translation.z
            )
            .expect("string writes cannot fail");
            push_quaternion(&mut out, &iso.rotation);
            push_upper_triangle(&mut out, &permute(&noise.information(), &SE3_TO_G2O));
        }
    }
    out
}

/// Writes a pose graph as g2o text. Vertex ids are assigned by key order, so
/// multi-robot key spaces flatten deterministically. Prior factors are
/// omitted (the format has no gauge record; consumers re-anchor after
/// loading) and range or bearing-range factors are not representable.
pub fn write_g2o<W: Write>(
    graph: &FactorGraph<f64>,
    values: &Values<f64>,
    mut writer: W,
) -> Result<(), DatasetError> {
    let ids: std::collections::BTreeMap<VariableKey, usize> =
        values.keys().enumerate().map(|(i, k)| (*k, i)).collect();
    let id_of = |key: &VariableKey| -> Result<usize, DatasetError> {
        ids.get(key).copied().ok_or_else(|| {
            DatasetError::InvalidConfig(format!("edge references unknown vertex {key}"))
        })
    };
    for (key, value) in values.iter() {
        let pose = value.as_pose().ok_or_else(|| {
            DatasetError::InvalidConfig(format!("{key} is not a pose; g2o holds pose graphs"))
        })?;
        writeln!(writer, "{}", vertex_record(ids[key], pose))?;
    }
    for factor in graph.factors() {
        match factor {
            Factor::BetweenPose { from, to, measured, noise } => {
                writeln!(
                    writer,
                    "{}",
                    edge_record(id_of(from)?, id_of(to)?, measured, noise)
                )?;
            }
            Factor::PriorPose { .. } => {}
            other => {
                return Err(DatasetError::InvalidConfig(format!(
                    "factor over {:?} keys is not representable in g2o",
                    other.keys()
                )))
            }
        }
    }
    Ok(())
}
