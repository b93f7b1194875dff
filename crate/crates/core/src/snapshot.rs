//! Belief snapshot persistence.
//!
//! A snapshot is a self-describing text document: a short header (format
//! version, space shape, storage mode) followed by one weight per line.
//! Weights are printed in Rust's shortest round-trip scientific form and
//! parsed back verbatim, so save followed by load reproduces the belief
//! bit-exactly. Joint weights appear in row-major order (dimension 0
//! slowest); factored weights appear dimension by dimension.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::capability::CapabilitySpace;
use crate::trust::{BeliefMode, CapabilityBelief, TrustError};

/// Version written to and required from snapshot headers.
pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;

/// Errors raised while persisting or restoring beliefs.
#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("snapshot I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error(transparent)]
    Invalid(#[from] TrustError),
}

fn malformed(line: usize, msg: impl Into<String>) -> SnapshotError {
    SnapshotError::Malformed {
        line,
        msg: msg.into(),
    }
}

/// Renders a belief as snapshot text.
pub fn write_belief(belief: &CapabilityBelief) -> String {
    let space = belief.space();
    let mut out = String::new();
    out.push_str(&format!("format_version: {SNAPSHOT_FORMAT_VERSION}\n"));
    out.push_str("kind: capability_belief\n");
    out.push_str(&format!("n: {}\n", space.n()));
    out.push_str(&format!("grid_resolution: {}\n", space.grid_resolution()));
    match belief.mode() {
        BeliefMode::Joint => {
            let w = belief
                .joint_weights()
                .expect("joint mode has joint weights");
            out.push_str("mode: joint\n");
            out.push_str(&format!("weights: {}\n", w.len()));
            for &v in w {
                out.push_str(&format!("{v:e}\n"));
            }
        }
        BeliefMode::Factored => {
            let per_dim = belief
                .factored_weights()
                .expect("factored mode has per-dimension weights");
            out.push_str("mode: factored\n");
            out.push_str(&format!("weights_per_dim: {}\n", space.grid_resolution()));
            for dim in per_dim {
                for &v in dim {
                    out.push_str(&format!("{v:e}\n"));
                }
            }
        }
    }
    out
}

type NumberedLines<'a> = std::iter::Enumerate<std::str::Lines<'a>>;

/// Next non-blank, non-comment line as a `key: value` header.
fn header(lines: &mut NumberedLines, key: &str) -> Result<(usize, String), SnapshotError> {
    for (idx, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let (k, v) = line
            .split_once(':')
            .ok_or_else(|| malformed(lineno, format!("expected `{key}: <value>`")))?;
        if k.trim() != key {
            return Err(malformed(
                lineno,
                format!("expected key `{key}`, found `{}`", k.trim()),
            ));
        }
        return Ok((lineno, v.trim().to_string()));
    }
    Err(malformed(0, format!("missing `{key}` header")))
}

fn parse_weights(lines: &mut NumberedLines, expected: usize) -> Result<Vec<f64>, SnapshotError> {
    let mut weights = Vec::with_capacity(expected);
    for (idx, raw) in lines.by_ref() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| malformed(idx + 1, format!("bad weight `{line}`")))?;
        weights.push(v);
        if weights.len() == expected {
            break;
        }
    }
    if weights.len() != expected {
        return Err(malformed(
            0,
            format!("expected {expected} weights, found {}", weights.len()),
        ));
    }
    Ok(weights)
}

/// Parses snapshot text back into a belief.
pub fn read_belief(text: &str) -> Result<CapabilityBelief, SnapshotError> {
    let mut lines = text.lines().enumerate();
    let (line, version) = header(&mut lines, "format_version")?;
    let version: u32 = version
        .parse()
        .map_err(|_| malformed(line, "format_version must be an integer"))?;
    if version != SNAPSHOT_FORMAT_VERSION {
        return Err(malformed(
            line,
            format!("unsupported format_version {version}, expected {SNAPSHOT_FORMAT_VERSION}"),
        ));
    }
    let (line, kind) = header(&mut lines, "kind")?;
    if kind != "capability_belief" {
        return Err(malformed(line, format!("unsupported kind `{kind}`")));
    }
    let (line, n) = header(&mut lines, "n")?;
    let n: usize = n
        .parse()
        .map_err(|_| malformed(line, "n must be an integer"))?;
    let (line, g) = header(&mut lines, "grid_resolution")?;
    let g: usize = g
        .parse()
        .map_err(|_| malformed(line, "grid_resolution must be an integer"))?;
    let space = CapabilitySpace::new(n, g)
        .map_err(TrustError::from)
        .map_err(SnapshotError::from)?;
    let (mode_line, mode) = header(&mut lines, "mode")?;

    match mode.as_str() {
        "joint" => {
            let (line, count) = header(&mut lines, "weights")?;
            let count: usize = count
                .parse()
                .map_err(|_| malformed(line, "weights must be an integer count"))?;
            if count != space.joint_cells() {
                return Err(malformed(
                    line,
                    format!(
                        "joint weight count {count} does not match grid size {}",
                        space.joint_cells()
                    ),
                ));
            }
            let weights = parse_weights(&mut lines, count)?;
            Ok(CapabilityBelief::from_joint_weights(&space, weights)?)
        }
        "factored" => {
            let (line, per) = header(&mut lines, "weights_per_dim")?;
            let per: usize = per
                .parse()
                .map_err(|_| malformed(line, "weights_per_dim must be an integer"))?;
            if per != space.grid_resolution() {
                return Err(malformed(
                    line,
                    format!(
                        "weights_per_dim {per} does not match grid_resolution {}",
                        space.grid_resolution()
                    ),
                ));
            }
            let flat = parse_weights(&mut lines, per * space.n())?;
            let per_dim: Vec<Vec<f64>> = flat.chunks(per).map(<[f64]>::to_vec).collect();
            Ok(CapabilityBelief::from_factored_weights(&space, per_dim)?)
        }
        other => Err(malformed(
            mode_line,
            format!("mode must be `joint` or `factored`, found `{other}`"),
        )),
    }
}

/// Writes a belief snapshot file.
pub fn save_belief(belief: &CapabilityBelief, path: &Path) -> Result<(), SnapshotError> {
    fs::write(path, write_belief(belief))?;
    Ok(())
}

/// Reads a belief snapshot file.
pub fn load_belief(path: &Path) -> Result<CapabilityBelief, SnapshotError> {
    let text = fs::read_to_string(path)?;
    read_belief(&text)
}
