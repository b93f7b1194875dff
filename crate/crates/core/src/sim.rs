//! Closed-loop episode simulation and metrics.
//!
//! A scenario fixes a capability space, two ground-truth agents (one human,
//! one robot), a task stream, outcome and belief success models, reward
//! parameters, and an allocator. Each episode walks the stream: predict
//! trust from current beliefs, allocate, sample the true outcome, record,
//! and update only the executing agent's belief.
//!
//! Determinism contract: task requirements come from a generator seeded with
//! the stream seed; outcomes (and the random allocator's coin) come from a
//! second generator seeded with the scenario seed. Per task the scenario
//! stream yields the allocator coin first (random allocator only), then
//! exactly one outcome draw, regardless of whether the outcome law is
//! deterministic.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::capability::{
    AgentKind, CapabilityError, CapabilitySpace, CapabilityVector, Observation, Outcome, PerAgent,
    Task,
};
use crate::reward::{allocate_with, AllocationPolicy, RewardError, RewardParams};
use crate::trust::{CapabilityBelief, SuccessModel, TrustError, TrustEstimate, DEFAULT_QUANTILES};

/// Errors raised by scenario validation and episode execution.
#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Capability(#[from] CapabilityError),
    #[error(transparent)]
    Trust(#[from] TrustError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error("fixed task list is empty")]
    EmptyFixedList,
    #[error("task stream count must be at least 1")]
    ZeroTasks,
    #[error("scenario needs exactly one human and one robot, got {humans} human(s) and {robots} robot(s)")]
    NotOneHumanOneRobot { humans: usize, robots: usize },
}

/// An agent's actual capabilities, hidden from the trustor.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthAgent {
    pub kind: AgentKind,
    pub true_capabilities: CapabilityVector,
}

impl GroundTruthAgent {
    pub fn new(kind: AgentKind, true_capabilities: CapabilityVector) -> Self {
        Self {
            kind,
            true_capabilities,
        }
    }
}

/// Where task requirement vectors come from.
#[derive(Debug, Clone, PartialEq)]
pub enum RequirementDistribution {
    /// Each component independently uniform on [0, 1].
    Uniform,
    /// The given vectors, repeated cyclically.
    FixedList(Vec<CapabilityVector>),
}

/// A reproducible stream of tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskStreamSpec {
    pub count: usize,
    pub distribution: RequirementDistribution,
    pub seed: u64,
}

/// Allocation strategy for an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Allocator {
    /// Maximize expected total reward under belief-based trust.
    TrustBased,
    /// Fair coin per task; ignores rewards and beliefs.
    Random,
    /// Maximize expected total reward using exact success probabilities
    /// from the true capabilities; the regret baseline.
    Omniscient,
    /// Always the given agent.
    FixedAgent(AgentKind),
}

impl fmt::Display for Allocator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Allocator::TrustBased => f.write_str("trust_based"),
            Allocator::Random => f.write_str("random"),
            Allocator::Omniscient => f.write_str("omniscient"),
            Allocator::FixedAgent(kind) => write!(f, "fixed:{kind}"),
        }
    }
}

impl FromStr for Allocator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "trust_based" | "trust-based" | "trust" => Ok(Allocator::TrustBased),
            "random" => Ok(Allocator::Random),
            "omniscient" => Ok(Allocator::Omniscient),
            other => {
                if let Some(kind) = other.strip_prefix("fixed:") {
                    Ok(Allocator::FixedAgent(kind.parse()?))
                } else {
                    Err(format!(
                        "unknown allocator `{other}` (expected trust_based|random|omniscient|fixed:<agent>)"
                    ))
                }
            }
        }
    }
}

/// Everything needed to run one reproducible episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub space: CapabilitySpace,
    pub agents: PerAgent<GroundTruthAgent>,
    pub stream: TaskStreamSpec,
    /// Law actually generating outcomes.
    pub ground_truth_model: SuccessModel,
    /// Law the trustor assumes when updating beliefs and predicting trust.
    pub belief_model: SuccessModel,
    pub reward_params: RewardParams,
    pub allocator: Allocator,
    /// Seeds outcome draws and the random allocator's coin.
    pub seed: u64,
}

impl Scenario {
    /// Validates the pieces: exactly one human and one robot, capabilities
    /// and fixed requirement vectors inside the space, weight vectors
    /// matching the space dimension, and a non-empty stream.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        space: CapabilitySpace,
        agents: Vec<GroundTruthAgent>,
        stream: TaskStreamSpec,
        ground_truth_model: SuccessModel,
        belief_model: SuccessModel,
        reward_params: RewardParams,
        allocator: Allocator,
        seed: u64,
    ) -> Result<Self, SimError> {
        let humans = agents.iter().filter(|a| a.kind == AgentKind::Human).count();
        let robots = agents.iter().filter(|a| a.kind == AgentKind::Robot).count();
        if humans != 1 || robots != 1 {
            return Err(SimError::NotOneHumanOneRobot { humans, robots });
        }
        let mut human = None;
        let mut robot = None;
        for agent in agents {
            space.check_values(agent.true_capabilities.values())?;
            match agent.kind {
                AgentKind::Human => human = Some(agent),
                AgentKind::Robot => robot = Some(agent),
            }
        }
        if stream.count == 0 {
            return Err(SimError::ZeroTasks);
        }
        if let RequirementDistribution::FixedList(list) = &stream.distribution {
            if list.is_empty() {
                return Err(SimError::EmptyFixedList);
            }
            for v in list {
                space.check_values(v.values())?;
            }
        }
        if reward_params.dims() != space.n() {
            return Err(CapabilityError::DimensionMismatch {
                expected: space.n(),
                got: reward_params.dims(),
            }
            .into());
        }
        Ok(Scenario {
            space,
            agents: PerAgent::new(human.unwrap(), robot.unwrap()),
            stream,
            ground_truth_model,
            belief_model,
            reward_params,
            allocator,
            seed,
        })
    }
}

/// One line of an episode: the trustor's view, the choice, and what happened.
/// Bounds and means snapshot both agents' beliefs after this task's update.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub task_id: String,
    pub requirements: CapabilityVector,
    pub trust: PerAgent<f64>,
    pub expected_reward: PerAgent<f64>,
    pub chosen: AgentKind,
    pub tie_broken: bool,
    pub outcome: Outcome,
    pub realized_reward: f64,
    /// `bounds.get(kind)[dim] = (lower, upper)` credible bounds.
    pub bounds: PerAgent<Vec<(f64, f64)>>,
    /// `means.get(kind)[dim]` = marginal mean of the belief.
    pub means: PerAgent<Vec<f64>>,
}

/// Full record of one episode, in task order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub records: Vec<TaskRecord>,
    /// Running sum of realized rewards, one entry per task.
    pub cumulative_reward: Vec<f64>,
}

impl EpisodeLog {
    pub fn total_reward(&self) -> f64 {
        self.cumulative_reward.last().copied().unwrap_or(0.0)
    }
}

/// Draws the outcome of `agent` attempting a task: Bernoulli in the true
/// success probability. Consumes exactly one uniform draw even when the
/// model is deterministic, so streams stay aligned across models.
pub fn sample_outcome<R: Rng>(
    agent: &GroundTruthAgent,
    lambda_bar: &CapabilityVector,
    model: &SuccessModel,
    rng: &mut R,
) -> Result<Outcome, SimError> {
    let p = model.likelihood(agent.true_capabilities.values(), lambda_bar.values())?;
    let u: f64 = rng.random();
    Ok(if u < p {
        Outcome::Success
    } else {
        Outcome::Failure
    })
}

/// Materializes the task stream: `count` tasks, ids `t00000`, `t00001`, ...
/// Uniform mode draws each requirement component from a generator seeded
/// with the stream seed; a fixed list repeats cyclically.
pub fn generate_tasks(
    spec: &TaskStreamSpec,
    space: &CapabilitySpace,
) -> Result<Vec<Task>, SimError> {
    if spec.count == 0 {
        return Err(SimError::ZeroTasks);
    }
    let mut tasks = Vec::with_capacity(spec.count);
    match &spec.distribution {
        RequirementDistribution::Uniform => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for t in 0..spec.count {
                let values: Vec<f64> = (0..space.n()).map(|_| rng.random()).collect();
                tasks.push(Task::new(
                    format!("t{t:05}"),
                    CapabilityVector::new(values, space)?,
                ));
            }
        }
        RequirementDistribution::FixedList(list) => {
            if list.is_empty() {
                return Err(SimError::EmptyFixedList);
            }
            for v in list {
                space.check_values(v.values())?;
            }
            for t in 0..spec.count {
                tasks.push(Task::new(format!("t{t:05}"), list[t % list.len()].clone()));
            }
        }
    }
    Ok(tasks)
}

/// Per-dimension credible bounds and marginal means of one belief.
type BeliefSnapshot = (Vec<(f64, f64)>, Vec<f64>);

fn belief_snapshot(belief: &CapabilityBelief) -> Result<BeliefSnapshot, TrustError> {
    let n = belief.space().n();
    let (lo_q, hi_q) = DEFAULT_QUANTILES;
    let mut bounds = Vec::with_capacity(n);
    let mut means = Vec::with_capacity(n);
    for d in 0..n {
        bounds.push(belief.credible_bounds(d, lo_q, hi_q)?);
        means.push(belief.marginal_mean(d)?);
    }
    Ok((bounds, means))
}

/// Runs the closed loop over the whole task stream.
///
/// Per task: predict trust for both agents, allocate, draw the chosen
/// agent's true outcome, book the realized reward, and update only the
/// chosen agent's belief. Bit-reproducible for a fixed scenario.
pub fn run_episode(scenario: &Scenario) -> Result<EpisodeLog, SimError> {
    let tasks = generate_tasks(&scenario.stream, &scenario.space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let mut beliefs = PerAgent::new(
        CapabilityBelief::uniform(&scenario.space),
        CapabilityBelief::uniform(&scenario.space),
    );
    let mut counts: PerAgent<u64> = PerAgent::new(0, 0);
    let policy = AllocationPolicy::default();
    let mut records = Vec::with_capacity(tasks.len());
    let mut cumulative_reward = Vec::with_capacity(tasks.len());
    let mut cumulative = 0.0;

    for task in tasks {
        let trust = PerAgent::new(
            beliefs
                .human
                .predict_trust(task.requirements.values(), &scenario.belief_model)?,
            beliefs
                .robot
                .predict_trust(task.requirements.values(), &scenario.belief_model)?,
        );
        let trust_map = HashMap::from([
            (AgentKind::Human, trust.human),
            (AgentKind::Robot, trust.robot),
        ]);
        let counts_map = HashMap::from([
            (AgentKind::Human, counts.human),
            (AgentKind::Robot, counts.robot),
        ]);
        // Belief-based decision always computed: its expected rewards and
        // trust are what the log reports, whatever allocator actually picks.
        let belief_decision = allocate_with(
            &task,
            &trust_map,
            &scenario.reward_params,
            &counts_map,
            &policy,
        )?;
        let (chosen, tie_broken) = match scenario.allocator {
            Allocator::TrustBased => (belief_decision.chosen, belief_decision.tie_broken),
            Allocator::Random => {
                let u: f64 = rng.random();
                (
                    if u < 0.5 {
                        AgentKind::Human
                    } else {
                        AgentKind::Robot
                    },
                    false,
                )
            }
            Allocator::Omniscient => {
                let true_trust: HashMap<AgentKind, TrustEstimate> = AgentKind::ALL
                    .iter()
                    .map(|&kind| {
                        let p = scenario
                            .ground_truth_model
                            .likelihood(
                                scenario.agents.get(kind).true_capabilities.values(),
                                task.requirements.values(),
                            )
                            .expect("scenario vectors share one space");
                        (
                            kind,
                            TrustEstimate::new(p).expect("likelihood is a probability"),
                        )
                    })
                    .collect();
                let d = allocate_with(
                    &task,
                    &true_trust,
                    &scenario.reward_params,
                    &counts_map,
                    &policy,
                )?;
                (d.chosen, d.tie_broken)
            }
            Allocator::FixedAgent(kind) => (kind, false),
        };
        *counts.get_mut(chosen) += 1;
        let outcome = sample_outcome(
            scenario.agents.get(chosen),
            &task.requirements,
            &scenario.ground_truth_model,
            &mut rng,
        )?;
        let r_s = crate::reward::reward_for_success(&task.requirements, &scenario.reward_params)?;
        let cost = crate::reward::agent_cost(chosen, &task.requirements, &scenario.reward_params)?;
        let realized_reward = match outcome {
            Outcome::Success => r_s - cost,
            Outcome::Failure => scenario.reward_params.failure_value() - cost,
        };
        cumulative += realized_reward;
        cumulative_reward.push(cumulative);

        let updated = beliefs.get(chosen).update(
            &Observation::new(task.requirements.clone(), outcome),
            &scenario.belief_model,
        )?;
        *beliefs.get_mut(chosen) = updated;

        let (human_bounds, human_means) = belief_snapshot(&beliefs.human)?;
        let (robot_bounds, robot_means) = belief_snapshot(&beliefs.robot)?;
        records.push(TaskRecord {
            task_id: task.id,
            requirements: task.requirements,
            trust: trust.map(|t| t.value()),
            expected_reward: belief_decision.expected_rewards,
            chosen,
            tie_broken,
            outcome,
            realized_reward,
            bounds: PerAgent::new(human_bounds, robot_bounds),
            means: PerAgent::new(human_means, robot_means),
        });
    }

    Ok(EpisodeLog {
        records,
        cumulative_reward,
    })
}

/// Summary numbers of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub task_count: usize,
    pub total_reward: f64,
    pub assignments: PerAgent<u64>,
    pub success_rate: f64,
    /// `|mean(belief) - true lambda|_1` per agent after the last task.
    pub final_belief_l1_error: PerAgent<f64>,
    /// Same error after every task.
    pub l1_error_trace: PerAgent<Vec<f64>>,
    /// Omniscient cumulative reward minus this log's, total and per task;
    /// present when an omniscient log is supplied.
    pub regret: Option<f64>,
    pub regret_trace: Option<Vec<f64>>,
}

/// Aggregates an episode log; pass the omniscient run of the same scenario
/// to get regret.
pub fn compute_metrics(
    log: &EpisodeLog,
    scenario: &Scenario,
    omniscient: Option<&EpisodeLog>,
) -> Metrics {
    let mut assignments = PerAgent::new(0u64, 0u64);
    let mut successes = 0usize;
    let mut l1_trace: PerAgent<Vec<f64>> = PerAgent::new(Vec::new(), Vec::new());
    for record in &log.records {
        *assignments.get_mut(record.chosen) += 1;
        if record.outcome.is_success() {
            successes += 1;
        }
        for kind in AgentKind::ALL {
            let truth = scenario.agents.get(kind).true_capabilities.values();
            let err: f64 = record
                .means
                .get(kind)
                .iter()
                .zip(truth)
                .map(|(m, t)| (m - t).abs())
                .sum();
            l1_trace.get_mut(kind).push(err);
        }
    }
    let final_err = l1_trace.map(|trace| trace.last().copied().unwrap_or(f64::NAN));
    let (regret, regret_trace) = match omniscient {
        Some(oracle) => {
            let trace: Vec<f64> = oracle
                .cumulative_reward
                .iter()
                .zip(&log.cumulative_reward)
                .map(|(o, l)| o - l)
                .collect();
            (
                Some(oracle.total_reward() - log.total_reward()),
                Some(trace),
            )
        }
        None => (None, None),
    };
    Metrics {
        task_count: log.records.len(),
        total_reward: log.total_reward(),
        assignments,
        success_rate: if log.records.is_empty() {
            f64::NAN
        } else {
            successes as f64 / log.records.len() as f64
        },
        final_belief_l1_error: final_err,
        l1_error_trace: l1_trace,
        regret,
        regret_trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capability::validate_vector;
    use crate::reward::expected_total_reward;

    fn space2(g: usize) -> CapabilitySpace {
        CapabilitySpace::new(2, g).unwrap()
    }

    fn vec2(space: &CapabilitySpace, v: [f64; 2]) -> CapabilityVector {
        validate_vector(&v, space).unwrap()
    }

    fn test_params() -> RewardParams {
        RewardParams::new(
            vec![5.0, 5.0],
            1.0,
            0.0,
            PerAgent::new(2.0, 0.5),
            PerAgent::new(vec![1.0, 1.0], vec![0.5, 0.5]),
        )
        .unwrap()
    }

    fn test_scenario(allocator: Allocator, count: usize, seed: u64) -> Scenario {
        let space = space2(41);
        Scenario::new(
            space,
            vec![
                GroundTruthAgent::new(AgentKind::Human, vec2(&space, [0.9, 0.2])),
                GroundTruthAgent::new(AgentKind::Robot, vec2(&space, [0.2, 0.9])),
            ],
            TaskStreamSpec {
                count,
                distribution: RequirementDistribution::Uniform,
                seed: seed ^ 0x9e3779b9,
            },
            SuccessModel::Step,
            SuccessModel::default_belief(),
            test_params(),
            allocator,
            seed,
        )
        .unwrap()
    }

    #[test]
    fn step_outcomes_are_deterministic() {
        let space = space2(101);
        let agent = GroundTruthAgent::new(AgentKind::Human, vec2(&space, [0.6, 0.4]));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let o = sample_outcome(
                &agent,
                &vec2(&space, [0.5, 0.3]),
                &SuccessModel::Step,
                &mut rng,
            )
            .unwrap();
            assert_eq!(o, Outcome::Success);
            let o = sample_outcome(
                &agent,
                &vec2(&space, [0.5, 0.5]),
                &SuccessModel::Step,
                &mut rng,
            )
            .unwrap();
            assert_eq!(o, Outcome::Failure);
        }
    }

    #[test]
    fn sharp_sigmoid_outcomes_approach_step() {
        let space = space2(101);
        let agent = GroundTruthAgent::new(AgentKind::Human, vec2(&space, [0.6, 0.4]));
        // Requirements componentwise 0.05 below the true capabilities.
        let req = vec2(&space, [0.55, 0.35]);
        let model = SuccessModel::sigmoid(0.005).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0;
        for _ in 0..10_000 {
            if sample_outcome(&agent, &req, &model, &mut rng)
                .unwrap()
                .is_success()
            {
                hits += 1;
            }
        }
        let freq = hits as f64 / 10_000.0;
        assert!((freq - 1.0).abs() < 0.02, "freq = {freq}");
    }

    #[test]
    fn task_generation_is_reproducible() {
        let space = space2(101);
        let spec = TaskStreamSpec {
            count: 800,
            distribution: RequirementDistribution::Uniform,
            seed: 42,
        };
        let a = generate_tasks(&spec, &space).unwrap();
        let b = generate_tasks(&spec, &space).unwrap();
        assert_eq!(a.len(), 800);
        assert_eq!(a, b);
    }

    #[test]
    fn fixed_list_cycles() {
        let space = space2(11);
        let spec = TaskStreamSpec {
            count: 3,
            distribution: RequirementDistribution::FixedList(vec![vec2(&space, [0.5, 0.5])]),
            seed: 0,
        };
        let tasks = generate_tasks(&spec, &space).unwrap();
        assert_eq!(tasks.len(), 3);
        for t in &tasks {
            assert_eq!(t.requirements.values(), &[0.5, 0.5]);
        }
        let empty = TaskStreamSpec {
            count: 3,
            distribution: RequirementDistribution::FixedList(vec![]),
            seed: 0,
        };
        assert_eq!(
            generate_tasks(&empty, &space).unwrap_err(),
            SimError::EmptyFixedList
        );
    }

    #[test]
    fn uniform_requirements_center_on_half() {
        let space = space2(11);
        let spec = TaskStreamSpec {
            count: 10_000,
            distribution: RequirementDistribution::Uniform,
            seed: 5,
        };
        let tasks = generate_tasks(&spec, &space).unwrap();
        for d in 0..2 {
            let mean: f64 =
                tasks.iter().map(|t| t.requirements[d]).sum::<f64>() / tasks.len() as f64;
            assert!((0.48..=0.52).contains(&mean), "dim {d} mean = {mean}");
        }
    }

    #[test]
    fn fixed_robot_never_touches_human_belief() {
        let scenario = test_scenario(Allocator::FixedAgent(AgentKind::Robot), 30, 3);
        let log = run_episode(&scenario).unwrap();
        assert_eq!(log.records.len(), 30);
        let first = &log.records[0];
        for record in &log.records {
            assert_eq!(record.chosen, AgentKind::Robot);
            assert_eq!(record.bounds.human, first.bounds.human);
            assert_eq!(record.means.human, first.means.human);
        }
    }

    #[test]
    fn exactly_one_belief_changes_per_task() {
        let scenario = test_scenario(Allocator::Random, 40, 9);
        let log = run_episode(&scenario).unwrap();
        for pair in log.records.windows(2) {
            let moved: Vec<bool> = AgentKind::ALL
                .iter()
                .map(|&k| pair[0].means.get(k) != pair[1].means.get(k))
                .collect();
            let changed = moved.iter().filter(|&&m| m).count();
            assert!(changed <= 1, "both beliefs moved in one step");
            // The agent whose belief moved is the one that executed.
            if changed == 1 {
                let mover = if moved[0] {
                    AgentKind::Human
                } else {
                    AgentKind::Robot
                };
                assert_eq!(mover, pair[1].chosen);
            }
        }
    }

    #[test]
    fn realized_rewards_follow_the_bookkeeping_identity() {
        let scenario = test_scenario(Allocator::TrustBased, 60, 17);
        let log = run_episode(&scenario).unwrap();
        let mut running = 0.0;
        for record in &log.records {
            let r_s =
                crate::reward::reward_for_success(&record.requirements, &scenario.reward_params)
                    .unwrap();
            let c = crate::reward::agent_cost(
                record.chosen,
                &record.requirements,
                &scenario.reward_params,
            )
            .unwrap();
            let expect = match record.outcome {
                Outcome::Success => r_s - c,
                Outcome::Failure => scenario.reward_params.failure_value() - c,
            };
            assert_eq!(record.realized_reward, expect);
            running += record.realized_reward;
        }
        assert!((running - log.total_reward()).abs() < 1e-9);
    }

    #[test]
    fn episodes_are_deterministic() {
        for allocator in [
            Allocator::TrustBased,
            Allocator::Random,
            Allocator::Omniscient,
        ] {
            let a = run_episode(&test_scenario(allocator, 25, 21)).unwrap();
            let b = run_episode(&test_scenario(allocator, 25, 21)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn noiseless_step_on_grid_truth_never_contradicts() {
        // True capabilities on grid points: the truth cell survives every
        // consistent observation, so the posterior never empties.
        let scenario = Scenario {
            belief_model: SuccessModel::Step,
            ..test_scenario(Allocator::TrustBased, 200, 29)
        };
        let log = run_episode(&scenario).unwrap();
        assert_eq!(log.records.len(), 200);
    }

    #[test]
    fn omniscient_choice_maximizes_true_expected_reward() {
        let scenario = test_scenario(Allocator::Omniscient, 50, 31);
        let log = run_episode(&scenario).unwrap();
        let mut counts: PerAgent<u64> = PerAgent::new(0, 0);
        for record in &log.records {
            let e: PerAgent<f64> = scenario.agents.map(|agent| {
                let p = scenario
                    .ground_truth_model
                    .likelihood(
                        agent.true_capabilities.values(),
                        record.requirements.values(),
                    )
                    .unwrap();
                let r_s = crate::reward::reward_for_success(
                    &record.requirements,
                    &scenario.reward_params,
                )
                .unwrap();
                let c = crate::reward::agent_cost(
                    agent.kind,
                    &record.requirements,
                    &scenario.reward_params,
                )
                .unwrap();
                expected_total_reward(
                    TrustEstimate::new(p).unwrap(),
                    r_s,
                    scenario.reward_params.failure_value(),
                    c,
                )
            });
            let diff = e.human - e.robot;
            if diff.abs() >= 1e-9 {
                let best = if diff > 0.0 {
                    AgentKind::Human
                } else {
                    AgentKind::Robot
                };
                assert_eq!(record.chosen, best);
            }
            *counts.get_mut(record.chosen) += 1;
        }
    }

    #[test]
    fn metrics_add_up() {
        let scenario = test_scenario(Allocator::TrustBased, 40, 37);
        let log = run_episode(&scenario).unwrap();
        let oracle_scenario = Scenario {
            allocator: Allocator::Omniscient,
            ..scenario.clone()
        };
        let oracle = run_episode(&oracle_scenario).unwrap();
        let m = compute_metrics(&log, &scenario, Some(&oracle));
        assert_eq!(m.task_count, 40);
        assert_eq!(m.assignments.human + m.assignments.robot, 40);
        assert!((0.0..=1.0).contains(&m.success_rate));
        assert!((m.total_reward - log.total_reward()).abs() < 1e-9);
        assert_eq!(m.l1_error_trace.human.len(), 40);
        let regret = m.regret.unwrap();
        assert!((regret - (oracle.total_reward() - log.total_reward())).abs() < 1e-9);
        // The oracle against itself has zero regret everywhere.
        let self_m = compute_metrics(&oracle, &oracle_scenario, Some(&oracle));
        assert_eq!(self_m.regret, Some(0.0));
        assert!(self_m.regret_trace.unwrap().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn scenario_validation_catches_bad_teams() {
        let space = space2(11);
        let stream = TaskStreamSpec {
            count: 5,
            distribution: RequirementDistribution::Uniform,
            seed: 0,
        };
        let two_humans = Scenario::new(
            space,
            vec![
                GroundTruthAgent::new(AgentKind::Human, vec2(&space, [0.5, 0.5])),
                GroundTruthAgent::new(AgentKind::Human, vec2(&space, [0.4, 0.4])),
            ],
            stream.clone(),
            SuccessModel::Step,
            SuccessModel::default_belief(),
            test_params(),
            Allocator::TrustBased,
            1,
        );
        assert!(matches!(
            two_humans,
            Err(SimError::NotOneHumanOneRobot {
                humans: 2,
                robots: 0
            })
        ));
        let zero_tasks = Scenario::new(
            space,
            vec![
                GroundTruthAgent::new(AgentKind::Human, vec2(&space, [0.5, 0.5])),
                GroundTruthAgent::new(AgentKind::Robot, vec2(&space, [0.4, 0.4])),
            ],
            TaskStreamSpec { count: 0, ..stream },
            SuccessModel::Step,
            SuccessModel::default_belief(),
            test_params(),
            Allocator::TrustBased,
            1,
        );
        assert!(matches!(zero_tasks, Err(SimError::ZeroTasks)));
    }

    #[test]
    fn allocator_strings_round_trip() {
        for a in [
            Allocator::TrustBased,
            Allocator::Random,
            Allocator::Omniscient,
            Allocator::FixedAgent(AgentKind::Human),
            Allocator::FixedAgent(AgentKind::Robot),
        ] {
            assert_eq!(a.to_string().parse::<Allocator>().unwrap(), a);
        }
        assert!("greedy".parse::<Allocator>().is_err());
    }
}
