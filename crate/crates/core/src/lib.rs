//! Trust-based task allocation for a heterogeneous human-robot team.
//!
//! A trustor maintains a grid-discretized probability belief over each
//! agent's hidden capability vector, updates it by Bayes' rule from observed
//! task outcomes, and derives trust: the probability an agent succeeds at a
//! task with given requirements. Tasks are assigned to whichever agent
//! maximizes expected total reward (success reward, failure value, and
//! agent-dependent cost), and the resulting outcome feeds the next belief
//! update, closing the loop.
//!
//! Module map:
//! - [`capability`]: capability space, vectors, tasks, agents, outcomes.
//! - [`trust`]: success models, beliefs, Bayes updates, trust prediction,
//!   credible bounds.
//! - [`fit`]: offline batch fitting with a bounds trace.
//! - [`reward`]: reward/cost functions and the allocation rule.
//! - [`sim`]: scenarios, ground-truth agents, episode loop, metrics.
//! - [`snapshot`]: bit-exact belief persistence.
//! - [`scenario`]: scenario/observation file formats.
//! - [`tables`]: CSV artifact rendering.
//! - [`cli`]: the command-line driver.

pub mod capability;
pub mod cli;
pub mod fit;
pub mod reward;
pub mod scenario;
pub mod sim;
pub mod snapshot;
pub mod tables;
pub mod trust;

pub use capability::{
    validate_vector, AgentKind, CapabilityError, CapabilitySpace, CapabilityVector, Observation,
    Outcome, PerAgent, Task,
};
pub use fit::{batch_fit, BoundsTrace, DEFAULT_FIT_TOL, DEFAULT_MAX_SWEEPS};
pub use reward::{
    agent_cost, allocate, allocate_with, expected_total_reward, reward_for_success,
    AllocationDecision, AllocationPolicy, RewardError, RewardParams,
};
pub use scenario::{
    parse_observations, parse_scenario, parse_scenario_str, write_scenario, ScenarioError,
};
pub use sim::{
    compute_metrics, generate_tasks, run_episode, sample_outcome, Allocator, EpisodeLog,
    GroundTruthAgent, Metrics, RequirementDistribution, Scenario, SimError, TaskRecord,
    TaskStreamSpec,
};
pub use snapshot::{load_belief, read_belief, save_belief, write_belief, SnapshotError};
pub use tables::{
    aggregate_metrics_csv, episode_bounds_csv, episode_log_csv, fit_bounds_csv, fit_summary_csv,
    fmt_float, l1_trace_csv, metrics_csv, parse_metrics_csv,
};
pub use trust::{
    credible_bounds, init_belief, likelihood, marginal_mean, predict_trust, update_belief,
    BeliefMode, CapabilityBelief, SuccessModel, TrustError, TrustEstimate, DEFAULT_QUANTILES,
};
