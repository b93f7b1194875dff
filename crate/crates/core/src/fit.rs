//! Offline belief fitting from a batch of observations.
//!
//! `batch_fit` starts from the uniform belief and sweeps the observation
//! list repeatedly, applying each observation with likelihood tempering
//! exponent `1/S` (`S` = the sweep budget), so a full budget of sweeps
//! applies each observation's evidence exactly once in total. Credible
//! bounds are recorded after every update; fitting stops early when a whole
//! sweep moves no bound by more than `tol`.

use crate::capability::{CapabilitySpace, Observation};
use crate::trust::{CapabilityBelief, SuccessModel, TrustError, DEFAULT_QUANTILES};

/// Default bound-movement tolerance for convergence.
pub const DEFAULT_FIT_TOL: f64 = 1e-3;

/// Default sweep budget.
pub const DEFAULT_MAX_SWEEPS: usize = 50;

/// Credible-bound history of a fit, one `(lower, upper)` pair per dimension
/// per update step. Step 0 is the initial uniform belief.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsTrace {
    /// `per_dim[d][step] = (lower, upper)`.
    pub per_dim: Vec<Vec<(f64, f64)>>,
    /// False when the sweep budget ran out before bounds stopped moving.
    pub converged: bool,
    /// Sweeps actually run.
    pub sweeps: usize,
}

impl BoundsTrace {
    /// Number of recorded steps (updates + 1 for the initial belief).
    pub fn steps(&self) -> usize {
        self.per_dim.first().map_or(0, Vec::len)
    }

    pub fn dims(&self) -> usize {
        self.per_dim.len()
    }

    /// Bounds of one dimension at the last recorded step.
    pub fn final_bounds(&self, dim: usize) -> (f64, f64) {
        *self.per_dim[dim]
            .last()
            .expect("trace always holds the initial step")
    }

    /// Interval widths of one dimension across the trace.
    pub fn widths(&self, dim: usize) -> Vec<f64> {
        self.per_dim[dim].iter().map(|(lo, hi)| hi - lo).collect()
    }
}

fn snapshot_bounds(belief: &CapabilityBelief) -> Result<Vec<(f64, f64)>, TrustError> {
    let (lo_q, hi_q) = DEFAULT_QUANTILES;
    (0..belief.space().n())
        .map(|d| belief.credible_bounds(d, lo_q, hi_q))
        .collect()
}

/// Fits a belief to `observations` by tempered sweeps from the uniform
/// prior; returns the final belief and the full bounds trace.
///
/// A sweep budget of 1 degenerates to plain sequential Bayes over the list.
/// Hitting the budget without the bounds settling is reported through
/// `BoundsTrace::converged`, not as an error.
pub fn batch_fit(
    space: &CapabilitySpace,
    observations: &[Observation],
    model: &SuccessModel,
    tol: f64,
    max_sweeps: usize,
) -> Result<(CapabilityBelief, BoundsTrace), TrustError> {
    if observations.is_empty() {
        return Err(TrustError::NoObservations);
    }
    if max_sweeps == 0 {
        return Err(TrustError::ZeroSweepBudget);
    }
    let exponent = 1.0 / max_sweeps as f64;
    let mut belief = CapabilityBelief::uniform(space);
    let n = space.n();

    let mut per_dim: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
    let initial = snapshot_bounds(&belief)?;
    for (d, b) in initial.iter().enumerate() {
        per_dim[d].push(*b);
    }

    let mut prev_sweep = initial;
    let mut converged = false;
    let mut sweeps = 0;
    for _ in 0..max_sweeps {
        sweeps += 1;
        for obs in observations {
            belief = belief.update_tempered(obs, model, exponent)?;
            let bounds = snapshot_bounds(&belief)?;
            for (d, b) in bounds.iter().enumerate() {
                per_dim[d].push(*b);
            }
        }
        let current: Vec<(f64, f64)> = (0..n).map(|d| *per_dim[d].last().unwrap()).collect();
        let max_move = current
            .iter()
            .zip(&prev_sweep)
            .map(|(a, b)| (a.0 - b.0).abs().max((a.1 - b.1).abs()))
            .fold(0.0, f64::max);
        if max_move < tol {
            converged = true;
            break;
        }
        prev_sweep = current;
    }

    Ok((
        belief,
        BoundsTrace {
            per_dim,
            converged,
            sweeps,
        },
    ))
}
