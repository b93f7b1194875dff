//! Domain vocabulary: capability vectors, tasks, agents, outcomes, observations.
//!
//! Capabilities live in the unit hypercube `[0, 1]^n`. Each dimension is an
//! unspecified, unitless capability magnitude; a task demands a level per
//! dimension and an agent provides one. Beliefs over capabilities are
//! discretized onto a regular grid with `grid_resolution` points per
//! dimension, endpoints inclusive.

use std::fmt;

use thiserror::Error;

/// Errors raised by capability-domain constructors and checks.
#[derive(Debug, Error, PartialEq)]
pub enum CapabilityError {
    #[error("expected {expected} capability dimensions, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("capability value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("capability space needs at least one dimension")]
    ZeroDimensions,
    #[error("grid resolution must be at least 2, got {0}")]
    BadResolution(usize),
}

/// The capability space `[0, 1]^n` together with its discretization grid.
///
/// Grid points in each dimension are exactly `{0, 1/(G-1), ..., 1}` where
/// `G` is `grid_resolution`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapabilitySpace {
    n: usize,
    grid_resolution: usize,
}

impl CapabilitySpace {
    /// Default points per dimension when a configuration does not say.
    pub const DEFAULT_GRID_RESOLUTION: usize = 101;

    pub fn new(n: usize, grid_resolution: usize) -> Result<Self, CapabilityError> {
        if n == 0 {
            return Err(CapabilityError::ZeroDimensions);
        }
        if grid_resolution < 2 {
            return Err(CapabilityError::BadResolution(grid_resolution));
        }
        Ok(Self { n, grid_resolution })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid_resolution(&self) -> usize {
        self.grid_resolution
    }

    /// Distance between adjacent grid points, `1/(G-1)`.
    pub fn grid_spacing(&self) -> f64 {
        1.0 / (self.grid_resolution - 1) as f64
    }

    /// The `k`-th grid point in any dimension, `k/(G-1)`.
    pub fn grid_point(&self, k: usize) -> f64 {
        debug_assert!(k < self.grid_resolution);
        k as f64 / (self.grid_resolution - 1) as f64
    }

    /// Number of cells in the joint grid, `G^n`.
    ///
    /// Panics on overflow; joint grids are only used for small `n`.
    pub fn joint_cells(&self) -> usize {
        let mut total = 1usize;
        for _ in 0..self.n {
            total = total
                .checked_mul(self.grid_resolution)
                .expect("joint grid too large");
        }
        total
    }

    /// Checks that a raw slice is a valid point of this space.
    pub fn check_values(&self, values: &[f64]) -> Result<(), CapabilityError> {
        if values.len() != self.n {
            return Err(CapabilityError::DimensionMismatch {
                expected: self.n,
                got: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(CapabilityError::OutOfRange { index, value });
            }
        }
        Ok(())
    }
}

/// A point of the capability space: one magnitude in `[0, 1]` per dimension.
///
/// Used both for an agent's capabilities and for a task's requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct CapabilityVector {
    values: Vec<f64>,
}

impl CapabilityVector {
    /// Validates a raw list against a space: the length must equal `n` and
    /// every entry must lie in `[0, 1]`.
    pub fn new(values: Vec<f64>, space: &CapabilitySpace) -> Result<Self, CapabilityError> {
        space.check_values(&values)?;
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl std::ops::Index<usize> for CapabilityVector {
    type Output = f64;

    fn index(&self, dim: usize) -> &f64 {
        &self.values[dim]
    }
}

/// Validates a raw list of reals as a capability vector of `space`.
pub fn validate_vector(
    values: &[f64],
    space: &CapabilitySpace,
) -> Result<CapabilityVector, CapabilityError> {
    CapabilityVector::new(values.to_vec(), space)
}

/// The two agent types of the team.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    Human,
    Robot,
}

impl AgentKind {
    pub const ALL: [AgentKind; 2] = [AgentKind::Human, AgentKind::Robot];

    pub fn other(self) -> AgentKind {
        match self {
            AgentKind::Human => AgentKind::Robot,
            AgentKind::Robot => AgentKind::Human,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Human => "human",
            AgentKind::Robot => "robot",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" | "h" => Ok(AgentKind::Human),
            "robot" | "r" => Ok(AgentKind::Robot),
            other => Err(format!(
                "unknown agent kind `{other}` (expected human|robot)"
            )),
        }
    }
}

/// A value per agent, indexed by [`AgentKind`].
///
/// Small fixed map used for trust values, costs, counts, and logs; it makes
/// "exactly one human and one robot" hold by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PerAgent<T> {
    pub human: T,
    pub robot: T,
}

impl<T> PerAgent<T> {
    pub fn new(human: T, robot: T) -> Self {
        Self { human, robot }
    }

    pub fn get(&self, kind: AgentKind) -> &T {
        match kind {
            AgentKind::Human => &self.human,
            AgentKind::Robot => &self.robot,
        }
    }

    pub fn get_mut(&mut self, kind: AgentKind) -> &mut T {
        match kind {
            AgentKind::Human => &mut self.human,
            AgentKind::Robot => &mut self.robot,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> PerAgent<U> {
        PerAgent {
            human: f(&self.human),
            robot: f(&self.robot),
        }
    }
}

/// Result of one task execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Success,
    Failure,
}

impl Outcome {
    pub fn is_success(self) -> bool {
        matches!(self, Outcome::Success)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Failure => "failure",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "success" | "s" => Ok(Outcome::Success),
            "failure" | "f" => Ok(Outcome::Failure),
            other => Err(format!("unknown outcome `{other}` (expected S|F)")),
        }
    }
}

/// An indivisible unit of work with its capability requirements.
#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub id: String,
    pub requirements: CapabilityVector,
}

impl Task {
    pub fn new(id: impl Into<String>, requirements: CapabilityVector) -> Self {
        Self {
            id: id.into(),
            requirements,
        }
    }
}

/// One observed task execution: what was demanded and how it went.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub requirements: CapabilityVector,
    pub outcome: Outcome,
}

impl Observation {
    pub fn new(requirements: CapabilityVector, outcome: Outcome) -> Self {
        Self {
            requirements,
            outcome,
        }
    }
}
