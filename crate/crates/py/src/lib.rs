//! Python bindings for the task-allocation library: capability spaces,
//! belief estimation, trust prediction, reward-based allocation, batch
//! fitting, and whole-episode simulation.
//!
//! Every fallible call surfaces as `ValueError` carrying the library's
//! error message.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use trustalloc as ta;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_model(text: &str) -> PyResult<ta::SuccessModel> {
    text.parse().map_err(value_err)
}

/// Discretized capability space: `n` dimensions, each on a uniform grid
/// over [0, 1].
#[pyclass(frozen)]
struct Space {
    inner: ta::CapabilitySpace,
}

#[pymethods]
impl Space {
    #[new]
    #[pyo3(signature = (n, grid_resolution = 101))]
    fn new(n: usize, grid_resolution: usize) -> PyResult<Self> {
        Ok(Self {
            inner: ta::CapabilitySpace::new(n, grid_resolution).map_err(value_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn grid_resolution(&self) -> usize {
        self.inner.grid_resolution()
    }

    #[getter]
    fn grid_spacing(&self) -> f64 {
        self.inner.grid_spacing()
    }

    fn __repr__(&self) -> String {
        format!(
            "Space(n={}, grid_resolution={})",
            self.inner.n(),
            self.inner.grid_resolution()
        )
    }
}

/// Probability distribution over a trustee's capabilities.
///
/// Updates are functional: each returns a new `Belief`.
#[pyclass]
struct Belief {
    inner: ta::CapabilityBelief,
}

#[pymethods]
impl Belief {
    /// Uniform belief over the whole space.
    #[staticmethod]
    fn uniform(space: &Space) -> Self {
        Self {
            inner: ta::CapabilityBelief::uniform(&space.inner),
        }
    }

    /// Reads a belief snapshot file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: ta::load_belief(&path).map_err(value_err)?,
        })
    }

    /// Writes the belief snapshot file (round-trips bit-exactly).
    fn save(&self, path: PathBuf) -> PyResult<()> {
        ta::save_belief(&self.inner, &path).map_err(value_err)
    }

    /// Posterior after observing one task outcome at `requirements`.
    #[pyo3(signature = (requirements, success, model = "sigmoid:0.05"))]
    fn update(&self, requirements: Vec<f64>, success: bool, model: &str) -> PyResult<Self> {
        let space = self.inner.space();
        let obs = ta::Observation::new(
            ta::CapabilityVector::new(requirements, space).map_err(value_err)?,
            if success {
                ta::Outcome::Success
            } else {
                ta::Outcome::Failure
            },
        );
        Ok(Self {
            inner: self
                .inner
                .update(&obs, &parse_model(model)?)
                .map_err(value_err)?,
        })
    }

    /// Belief-weighted probability that a task with these requirements
    /// succeeds.
    #[pyo3(signature = (requirements, model = "step"))]
    fn predict_trust(&self, requirements: Vec<f64>, model: &str) -> PyResult<f64> {
        Ok(self
            .inner
            .predict_trust(&requirements, &parse_model(model)?)
            .map_err(value_err)?
            .value())
    }

    /// Credible interval of one capability dimension.
    #[pyo3(signature = (dim, lo = 0.025, hi = 0.975))]
    fn credible_bounds(&self, dim: usize, lo: f64, hi: f64) -> PyResult<(f64, f64)> {
        self.inner.credible_bounds(dim, lo, hi).map_err(value_err)
    }

    /// Mean of one capability dimension's marginal.
    fn marginal_mean(&self, dim: usize) -> PyResult<f64> {
        self.inner.marginal_mean(dim).map_err(value_err)
    }

    /// `"joint"` or `"factored"` storage.
    #[getter]
    fn mode(&self) -> String {
        self.inner.mode().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.space().n()
    }

    #[getter]
    fn grid_resolution(&self) -> usize {
        self.inner.space().grid_resolution()
    }

    fn __repr__(&self) -> String {
        format!(
            "Belief(n={}, grid_resolution={}, mode={})",
            self.inner.space().n(),
            self.inner.space().grid_resolution(),
            self.inner.mode()
        )
    }
}

/// Reward model: linear success value, non-positive failure value, and
/// per-agent linear costs (the human must dominate the robot's cost).
#[pyclass(frozen)]
struct Rewards {
    inner: ta::RewardParams,
}

#[pymethods]
impl Rewards {
    #[new]
    #[allow(clippy::too_many_arguments)]
    fn new(
        success_weights: Vec<f64>,
        success_base: f64,
        failure_value: f64,
        human_cost_base: f64,
        human_cost_weights: Vec<f64>,
        robot_cost_base: f64,
        robot_cost_weights: Vec<f64>,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: ta::RewardParams::new(
                success_weights,
                success_base,
                failure_value,
                ta::PerAgent::new(human_cost_base, robot_cost_base),
                ta::PerAgent::new(human_cost_weights, robot_cost_weights),
            )
            .map_err(value_err)?,
        })
    }
}

/// Outcome of one allocation decision.
#[pyclass(frozen)]
struct Decision {
    #[pyo3(get)]
    chosen: String,
    #[pyo3(get)]
    expected_reward_human: f64,
    #[pyo3(get)]
    expected_reward_robot: f64,
    #[pyo3(get)]
    trust_human: f64,
    #[pyo3(get)]
    trust_robot: f64,
    #[pyo3(get)]
    tie_broken: bool,
}

#[pymethods]
impl Decision {
    fn __repr__(&self) -> String {
        format!(
            "Decision(chosen='{}', expected_reward_human={}, expected_reward_robot={}, tie_broken={})",
            self.chosen, self.expected_reward_human, self.expected_reward_robot, self.tie_broken
        )
    }
}

/// Expected total reward of assigning a task: trust-weighted success and
/// failure values, minus the cost either way.
#[pyfunction]
fn expected_total_reward(
    trust: f64,
    success_value: f64,
    failure_value: f64,
    cost: f64,
) -> PyResult<f64> {
    let t = ta::TrustEstimate::new(trust).map_err(value_err)?;
    Ok(ta::expected_total_reward(
        t,
        success_value,
        failure_value,
        cost,
    ))
}

/// Assigns one task to the agent with the higher expected total reward;
/// ties go to the agent with fewer assigned tasks, then to the robot.
#[pyfunction]
#[pyo3(signature = (space, requirements, trust_human, trust_robot, rewards, assigned_human = 0, assigned_robot = 0))]
#[allow(clippy::too_many_arguments)]
fn allocate(
    space: &Space,
    requirements: Vec<f64>,
    trust_human: f64,
    trust_robot: f64,
    rewards: &Rewards,
    assigned_human: u64,
    assigned_robot: u64,
) -> PyResult<Decision> {
    let task = ta::Task::new(
        "py",
        ta::CapabilityVector::new(requirements, &space.inner).map_err(value_err)?,
    );
    let trust = HashMap::from([
        (
            ta::AgentKind::Human,
            ta::TrustEstimate::new(trust_human).map_err(value_err)?,
        ),
        (
            ta::AgentKind::Robot,
            ta::TrustEstimate::new(trust_robot).map_err(value_err)?,
        ),
    ]);
    let counts = HashMap::from([
        (ta::AgentKind::Human, assigned_human),
        (ta::AgentKind::Robot, assigned_robot),
    ]);
    let decision = ta::allocate(&task, &trust, &rewards.inner, &counts).map_err(value_err)?;
    Ok(Decision {
        chosen: decision.chosen.as_str().to_string(),
        expected_reward_human: *decision.expected_rewards.get(ta::AgentKind::Human),
        expected_reward_robot: *decision.expected_rewards.get(ta::AgentKind::Robot),
        trust_human: decision.trust_values.get(ta::AgentKind::Human).value(),
        trust_robot: decision.trust_values.get(ta::AgentKind::Robot).value(),
        tie_broken: decision.tie_broken,
    })
}

/// Fits a belief to a batch of `(requirements, success)` observations by
/// tempered sweeps from a uniform prior. Returns
/// `(belief, converged, sweeps)`.
#[pyfunction]
#[pyo3(signature = (space, observations, model = "sigmoid:0.05", tol = 1e-3, max_sweeps = 50))]
fn batch_fit(
    space: &Space,
    observations: Vec<(Vec<f64>, bool)>,
    model: &str,
    tol: f64,
    max_sweeps: usize,
) -> PyResult<(Belief, bool, usize)> {
    let observations: Vec<ta::Observation> = observations
        .into_iter()
        .map(|(req, success)| {
            Ok(ta::Observation::new(
                ta::CapabilityVector::new(req, &space.inner).map_err(value_err)?,
                if success {
                    ta::Outcome::Success
                } else {
                    ta::Outcome::Failure
                },
            ))
        })
        .collect::<PyResult<_>>()?;
    let (belief, trace) = ta::batch_fit(
        &space.inner,
        &observations,
        &parse_model(model)?,
        tol,
        max_sweeps,
    )
    .map_err(value_err)?;
    Ok((Belief { inner: belief }, trace.converged, trace.sweeps))
}

/// Whole-episode summary returned by `Scenario.run`.
#[pyclass(frozen)]
struct Summary {
    #[pyo3(get)]
    task_count: usize,
    #[pyo3(get)]
    total_reward: f64,
    #[pyo3(get)]
    assignments_human: u64,
    #[pyo3(get)]
    assignments_robot: u64,
    #[pyo3(get)]
    success_rate: f64,
    #[pyo3(get)]
    cumulative_reward: Vec<f64>,
    #[pyo3(get)]
    chosen: Vec<String>,
}

#[pymethods]
impl Summary {
    fn __repr__(&self) -> String {
        format!(
            "Summary(task_count={}, total_reward={}, assignments_human={}, assignments_robot={}, success_rate={})",
            self.task_count,
            self.total_reward,
            self.assignments_human,
            self.assignments_robot,
            self.success_rate
        )
    }
}

/// A simulation scenario loaded from a TOML file.
#[pyclass(frozen)]
struct Scenario {
    inner: ta::Scenario,
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: ta::parse_scenario(&path).map_err(value_err)?,
        })
    }

    /// Runs the closed allocate-execute-update loop once; deterministic
    /// for a fixed scenario.
    fn run(&self) -> PyResult<Summary> {
        let log = ta::run_episode(&self.inner).map_err(value_err)?;
        let metrics = ta::compute_metrics(&log, &self.inner, None);
        Ok(Summary {
            task_count: metrics.task_count,
            total_reward: metrics.total_reward,
            assignments_human: *metrics.assignments.get(ta::AgentKind::Human),
            assignments_robot: *metrics.assignments.get(ta::AgentKind::Robot),
            success_rate: metrics.success_rate,
            cumulative_reward: log.cumulative_reward.clone(),
            chosen: log
                .records
                .iter()
                .map(|r| r.chosen.as_str().to_string())
                .collect(),
        })
    }
}

#[pymodule]
fn trustalloc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Space>()?;
    m.add_class::<Belief>()?;
    m.add_class::<Rewards>()?;
    m.add_class::<Decision>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<Summary>()?;
    m.add_function(wrap_pyfunction!(expected_total_reward, m)?)?;
    m.add_function(wrap_pyfunction!(allocate, m)?)?;
    m.add_function(wrap_pyfunction!(batch_fit, m)?)?;
    Ok(())
}
