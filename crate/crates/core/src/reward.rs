//! Task reward, agent cost, expected total reward, and the allocation rule.
//!
//! Success reward and agent cost are weighted linear functions of the task
//! requirement vector. The expected total reward of assigning a task to an
//! agent with trust `tau` is
//!
//! ```text
//! E = tau * (r_s - c) + (1 - tau) * (r_f - c)
//! ```
//!
//! and the task goes to the agent maximizing it. Near-exact ties go to the
//! agent with fewer tasks already assigned, then to a fixed fallback agent.

use std::collections::HashMap;

use thiserror::Error;

use crate::capability::{AgentKind, CapabilityError, CapabilityVector, PerAgent, Task};
use crate::trust::TrustEstimate;

/// Expected-reward differences below this are treated as exact ties.
pub const DEFAULT_TIE_TOLERANCE: f64 = 1e-9;

/// Errors raised by reward-parameter construction and allocation.
#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error(transparent)]
    Capability(#[from] CapabilityError),
    #[error("cost dominance violated: {0}")]
    CostDominance(String),
    #[error("{field} must be nonnegative, got {value}")]
    NegativeValue { field: String, value: f64 },
    #[error("failure value must be <= 0, got {0}")]
    PositiveFailureValue(f64),
    #[error("cost weights for {kind} have length {got}, expected {expected}")]
    WeightLengthMismatch {
        kind: AgentKind,
        expected: usize,
        got: usize,
    },
    #[error("no trust value supplied for the {0}")]
    MissingAgent(AgentKind),
}

/// Parameters of the reward and cost functions.
///
/// Human cost strictly dominates robot cost by construction: the human base
/// cost is strictly larger and every human cost weight is at least the robot
/// one, so `cost(Human, r) > cost(Robot, r)` for every requirement vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardParams {
    success_weights: Vec<f64>,
    success_base: f64,
    failure_value: f64,
    cost_base: PerAgent<f64>,
    cost_weights: PerAgent<Vec<f64>>,
}

impl RewardParams {
    pub fn new(
        success_weights: Vec<f64>,
        success_base: f64,
        failure_value: f64,
        cost_base: PerAgent<f64>,
        cost_weights: PerAgent<Vec<f64>>,
    ) -> Result<Self, RewardError> {
        let n = success_weights.len();
        for (i, &w) in success_weights.iter().enumerate() {
            check_nonneg(&format!("success weight {i}"), w)?;
        }
        check_nonneg("success base", success_base)?;
        if failure_value > 0.0 {
            return Err(RewardError::PositiveFailureValue(failure_value));
        }
        for kind in AgentKind::ALL {
            check_nonneg(&format!("{kind} cost base"), *cost_base.get(kind))?;
            let w = cost_weights.get(kind);
            if w.len() != n {
                return Err(RewardError::WeightLengthMismatch {
                    kind,
                    expected: n,
                    got: w.len(),
                });
            }
            for (i, &v) in w.iter().enumerate() {
                check_nonneg(&format!("{kind} cost weight {i}"), v)?;
            }
        }
        if cost_base.human <= cost_base.robot {
            return Err(RewardError::CostDominance(format!(
                "human cost base {} must exceed robot cost base {}",
                cost_base.human, cost_base.robot
            )));
        }
        for i in 0..n {
            if cost_weights.human[i] < cost_weights.robot[i] {
                return Err(RewardError::CostDominance(format!(
                    "human cost weight {} ({}) is below the robot one ({})",
                    i, cost_weights.human[i], cost_weights.robot[i]
                )));
            }
        }
        Ok(RewardParams {
            success_weights,
            success_base,
            failure_value,
            cost_base,
            cost_weights,
        })
    }

    /// Number of capability dimensions the weight vectors cover.
    pub fn dims(&self) -> usize {
        self.success_weights.len()
    }

    pub fn success_weights(&self) -> &[f64] {
        &self.success_weights
    }

    pub fn success_base(&self) -> f64 {
        self.success_base
    }

    pub fn failure_value(&self) -> f64 {
        self.failure_value
    }

    pub fn cost_base(&self) -> &PerAgent<f64> {
        &self.cost_base
    }

    pub fn cost_weights(&self) -> &PerAgent<Vec<f64>> {
        &self.cost_weights
    }
}

fn check_nonneg(field: &str, value: f64) -> Result<(), RewardError> {
    // NaN is rejected along with negatives.
    if value.is_nan() || value < 0.0 {
        return Err(RewardError::NegativeValue {
            field: field.to_string(),
            value,
        });
    }
    Ok(())
}

fn weighted_sum(
    base: f64,
    weights: &[f64],
    lambda_bar: &CapabilityVector,
) -> Result<f64, RewardError> {
    if weights.len() != lambda_bar.len() {
        return Err(CapabilityError::DimensionMismatch {
            expected: weights.len(),
            got: lambda_bar.len(),
        }
        .into());
    }
    Ok(base
        + weights
            .iter()
            .zip(lambda_bar.values())
            .map(|(w, r)| w * r)
            .sum::<f64>())
}

/// Reward paid on success: `b_r + sum_i w_r[i] * lambda_bar[i]`.
pub fn reward_for_success(
    lambda_bar: &CapabilityVector,
    params: &RewardParams,
) -> Result<f64, RewardError> {
    weighted_sum(params.success_base, &params.success_weights, lambda_bar)
}

/// Cost of assigning the task to `kind`:
/// `cost_base[kind] + sum_i cost_weights[kind][i] * lambda_bar[i]`.
pub fn agent_cost(
    kind: AgentKind,
    lambda_bar: &CapabilityVector,
    params: &RewardParams,
) -> Result<f64, RewardError> {
    weighted_sum(
        *params.cost_base.get(kind),
        params.cost_weights.get(kind),
        lambda_bar,
    )
}

/// Expected total reward of an assignment:
/// `tau * (r_s - c) + (1 - tau) * (r_f - c)`.
pub fn expected_total_reward(tau: TrustEstimate, r_s: f64, r_f: f64, c: f64) -> f64 {
    let t = tau.value();
    t * (r_s - c) + (1.0 - t) * (r_f - c)
}

/// How allocation ties are resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationPolicy {
    /// Absolute expected-reward difference below which the agents tie.
    pub tie_tolerance: f64,
    /// Winner when assigned-task counts tie as well.
    pub final_tie_break: AgentKind,
}

impl Default for AllocationPolicy {
    fn default() -> Self {
        AllocationPolicy {
            tie_tolerance: DEFAULT_TIE_TOLERANCE,
            final_tie_break: AgentKind::Robot,
        }
    }
}

/// Outcome of one allocation: the chosen agent and the numbers behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationDecision {
    pub chosen: AgentKind,
    pub expected_rewards: PerAgent<f64>,
    pub trust_values: PerAgent<TrustEstimate>,
    /// True when the expected rewards tied and a tie-break rule decided.
    pub tie_broken: bool,
}

/// Assigns a task to the agent maximizing expected total reward, breaking
/// ties by fewer already-assigned tasks, then by the default fallback
/// (the robot, which costs less by construction).
pub fn allocate(
    task: &Task,
    trust: &HashMap<AgentKind, TrustEstimate>,
    params: &RewardParams,
    assigned_counts: &HashMap<AgentKind, u64>,
) -> Result<AllocationDecision, RewardError> {
    allocate_with(
        task,
        trust,
        params,
        assigned_counts,
        &AllocationPolicy::default(),
    )
}

/// [`allocate`] with an explicit tie policy.
pub fn allocate_with(
    task: &Task,
    trust: &HashMap<AgentKind, TrustEstimate>,
    params: &RewardParams,
    assigned_counts: &HashMap<AgentKind, u64>,
    policy: &AllocationPolicy,
) -> Result<AllocationDecision, RewardError> {
    let tau = PerAgent::new(
        *trust
            .get(&AgentKind::Human)
            .ok_or(RewardError::MissingAgent(AgentKind::Human))?,
        *trust
            .get(&AgentKind::Robot)
            .ok_or(RewardError::MissingAgent(AgentKind::Robot))?,
    );
    let r_s = reward_for_success(&task.requirements, params)?;
    let r_f = params.failure_value;
    let expected = PerAgent::new(
        expected_total_reward(
            tau.human,
            r_s,
            r_f,
            agent_cost(AgentKind::Human, &task.requirements, params)?,
        ),
        expected_total_reward(
            tau.robot,
            r_s,
            r_f,
            agent_cost(AgentKind::Robot, &task.requirements, params)?,
        ),
    );
    let (chosen, tie_broken) = if (expected.human - expected.robot).abs() < policy.tie_tolerance {
        let count = |kind| assigned_counts.get(&kind).copied().unwrap_or(0);
        let (n_h, n_r) = (count(AgentKind::Human), count(AgentKind::Robot));
        let winner = if n_h < n_r {
            AgentKind::Human
        } else if n_r < n_h {
            AgentKind::Robot
        } else {
            policy.final_tie_break
        };
        (winner, true)
    } else if expected.human > expected.robot {
        (AgentKind::Human, false)
    } else {
        (AgentKind::Robot, false)
    };
    Ok(AllocationDecision {
        chosen,
        expected_rewards: expected,
        trust_values: tau,
        tie_broken,
    })
}
