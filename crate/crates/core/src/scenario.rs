//! Scenario and observation file formats.
//!
//! Scenarios are TOML documents mirroring [`Scenario`] field by field; see
//! the format reference shipped with the repository. Parsing validates
//! everything the in-memory constructors validate and labels errors with the
//! offending field. Observation files are plain comma-separated rows:
//! `n` requirement components followed by an outcome letter (`S` or `F`).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capability::{
    AgentKind, CapabilitySpace, CapabilityVector, Observation, Outcome, PerAgent,
};
use crate::reward::RewardParams;
use crate::sim::{Allocator, GroundTruthAgent, RequirementDistribution, Scenario, TaskStreamSpec};
use crate::trust::SuccessModel;

/// Version expected in scenario documents.
pub const SCENARIO_FORMAT_VERSION: u32 = 1;

/// Errors raised while reading scenario or observation files.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    /// Malformed document; the message carries the location.
    #[error("parse error: {0}")]
    Parse(String),
    /// Well-formed document with invalid contents; names the field.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl ToString) -> ScenarioError {
    ScenarioError::Validation {
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioDoc {
    format_version: u32,
    space: SpaceDoc,
    agents: Vec<AgentDoc>,
    stream: StreamDoc,
    models: ModelsDoc,
    reward: RewardDoc,
    run: RunDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct SpaceDoc {
    n: usize,
    grid_resolution: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AgentDoc {
    kind: String,
    true_capabilities: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct StreamDoc {
    count: usize,
    distribution: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fixed_requirements: Option<Vec<Vec<f64>>>,
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelsDoc {
    ground_truth: Option<String>,
    belief: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RewardDoc {
    success_weights: Vec<f64>,
    success_base: f64,
    failure_value: Option<f64>,
    cost: CostDoc,
}

#[derive(Debug, Serialize, Deserialize)]
struct CostDoc {
    human: CostEntry,
    robot: CostEntry,
}

#[derive(Debug, Serialize, Deserialize)]
struct CostEntry {
    base: f64,
    weights: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RunDoc {
    allocator: Option<String>,
    seed: u64,
}

fn scenario_from_doc(doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
    if doc.format_version != SCENARIO_FORMAT_VERSION {
        return Err(invalid(
            "format_version",
            format!(
                "unsupported version {}, expected {SCENARIO_FORMAT_VERSION}",
                doc.format_version
            ),
        ));
    }
    let grid = doc
        .space
        .grid_resolution
        .unwrap_or(CapabilitySpace::DEFAULT_GRID_RESOLUTION);
    let space = CapabilitySpace::new(doc.space.n, grid).map_err(|e| invalid("space", e))?;

    let mut agents = Vec::new();
    for (i, agent) in doc.agents.iter().enumerate() {
        let kind: AgentKind = agent
            .kind
            .parse()
            .map_err(|e| invalid(&format!("agents[{i}].kind"), e))?;
        let capabilities = CapabilityVector::new(agent.true_capabilities.clone(), &space)
            .map_err(|e| invalid(&format!("agents[{i}].true_capabilities"), e))?;
        agents.push(GroundTruthAgent::new(kind, capabilities));
    }

    let distribution = match doc.stream.distribution.trim().to_ascii_lowercase().as_str() {
        "uniform" => {
            if doc.stream.fixed_requirements.is_some() {
                return Err(invalid(
                    "stream.fixed_requirements",
                    "only valid with distribution = \"fixed\"",
                ));
            }
            RequirementDistribution::Uniform
        }
        "fixed" => {
            let rows = doc.stream.fixed_requirements.as_ref().ok_or_else(|| {
                invalid(
                    "stream.fixed_requirements",
                    "required when distribution = \"fixed\"",
                )
            })?;
            let mut list = Vec::new();
            for (i, row) in rows.iter().enumerate() {
                list.push(
                    CapabilityVector::new(row.clone(), &space)
                        .map_err(|e| invalid(&format!("stream.fixed_requirements[{i}]"), e))?,
                );
            }
            RequirementDistribution::FixedList(list)
        }
        other => {
            return Err(invalid(
                "stream.distribution",
                format!("unknown distribution `{other}` (expected uniform|fixed)"),
            ))
        }
    };
    let stream = TaskStreamSpec {
        count: doc.stream.count,
        distribution,
        seed: doc.stream.seed,
    };

    let parse_model = |field: &str, text: &Option<String>, default: SuccessModel| {
        text.as_deref().map_or(Ok(default), |t| {
            t.parse::<SuccessModel>().map_err(|e| invalid(field, e))
        })
    };
    let ground_truth_model = parse_model(
        "models.ground_truth",
        &doc.models.ground_truth,
        SuccessModel::default_ground_truth(),
    )?;
    let belief_model = parse_model(
        "models.belief",
        &doc.models.belief,
        SuccessModel::default_belief(),
    )?;

    let reward_params = RewardParams::new(
        doc.reward.success_weights.clone(),
        doc.reward.success_base,
        doc.reward.failure_value.unwrap_or(0.0),
        PerAgent::new(doc.reward.cost.human.base, doc.reward.cost.robot.base),
        PerAgent::new(
            doc.reward.cost.human.weights.clone(),
            doc.reward.cost.robot.weights.clone(),
        ),
    )
    .map_err(|e| invalid("reward", e))?;

    let allocator = doc
        .run
        .allocator
        .as_deref()
        .map_or(Ok(Allocator::TrustBased), |t| {
            t.parse::<Allocator>()
                .map_err(|e| invalid("run.allocator", e))
        })?;

    Scenario::new(
        space,
        agents,
        stream,
        ground_truth_model,
        belief_model,
        reward_params,
        allocator,
        doc.run.seed,
    )
    .map_err(|e| invalid("scenario", e))
}

fn doc_from_scenario(scenario: &Scenario) -> ScenarioDoc {
    let (distribution, fixed_requirements) = match &scenario.stream.distribution {
        RequirementDistribution::Uniform => ("uniform".to_string(), None),
        RequirementDistribution::FixedList(list) => (
            "fixed".to_string(),
            Some(list.iter().map(|v| v.values().to_vec()).collect()),
        ),
    };
    ScenarioDoc {
        format_version: SCENARIO_FORMAT_VERSION,
        space: SpaceDoc {
            n: scenario.space.n(),
            grid_resolution: Some(scenario.space.grid_resolution()),
        },
        agents: AgentKind::ALL
            .iter()
            .map(|&kind| {
                let agent = scenario.agents.get(kind);
                AgentDoc {
                    kind: kind.to_string(),
                    true_capabilities: agent.true_capabilities.values().to_vec(),
                }
            })
            .collect(),
        stream: StreamDoc {
            count: scenario.stream.count,
            distribution,
            fixed_requirements,
            seed: scenario.stream.seed,
        },
        models: ModelsDoc {
            ground_truth: Some(scenario.ground_truth_model.to_string()),
            belief: Some(scenario.belief_model.to_string()),
        },
        reward: RewardDoc {
            success_weights: scenario.reward_params.success_weights().to_vec(),
            success_base: scenario.reward_params.success_base(),
            failure_value: Some(scenario.reward_params.failure_value()),
            cost: CostDoc {
                human: CostEntry {
                    base: scenario.reward_params.cost_base().human,
                    weights: scenario.reward_params.cost_weights().human.clone(),
                },
                robot: CostEntry {
                    base: scenario.reward_params.cost_base().robot,
                    weights: scenario.reward_params.cost_weights().robot.clone(),
                },
            },
        },
        run: RunDoc {
            allocator: Some(scenario.allocator.to_string()),
            seed: scenario.seed,
        },
    }
}

/// Parses scenario TOML text.
pub fn parse_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    scenario_from_doc(doc)
}

/// Reads and validates a scenario file.
pub fn parse_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario_str(&text)
}

/// Renders a scenario back to TOML (inverse of [`parse_scenario_str`] up to
/// formatting and explicit defaults).
pub fn write_scenario(scenario: &Scenario) -> String {
    toml::to_string_pretty(&doc_from_scenario(scenario))
        .expect("scenario documents always serialize")
}

/// Parses observation rows: each non-comment line holds `n` requirement
/// components and a final outcome field (`S`/`success` or `F`/`failure`).
pub fn parse_observations_str(
    text: &str,
    space: &CapabilitySpace,
) -> Result<Vec<Observation>, ScenarioError> {
    let mut observations = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != space.n() + 1 {
            return Err(ScenarioError::Parse(format!(
                "line {lineno}: expected {} requirement components and an outcome, found {} fields",
                space.n(),
                fields.len()
            )));
        }
        let mut values = Vec::with_capacity(space.n());
        for (d, field) in fields[..space.n()].iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                ScenarioError::Parse(format!(
                    "line {lineno}: bad requirement component {d}: `{field}`"
                ))
            })?;
            values.push(v);
        }
        let outcome: Outcome = fields[space.n()]
            .parse()
            .map_err(|e| ScenarioError::Parse(format!("line {lineno}: {e}")))?;
        let requirements = CapabilityVector::new(values, space)
            .map_err(|e| invalid(&format!("observations line {lineno}"), e))?;
        observations.push(Observation::new(requirements, outcome));
    }
    if observations.is_empty() {
        return Err(ScenarioError::Parse(
            "observations file has no data rows".to_string(),
        ));
    }
    Ok(observations)
}

/// Reads an observations file against a known capability space.
pub fn parse_observations(
    path: &Path,
    space: &CapabilitySpace,
) -> Result<Vec<Observation>, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_observations_str(&text, space)
}

/// Number of comma-separated fields in the first data row; used to infer
/// the dimension of an observations file (`fields - 1`).
pub fn observation_dims(text: &str) -> Result<usize, ScenarioError> {
    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = line.split(',').count();
        if fields < 2 {
            return Err(ScenarioError::Parse(
                "observation rows need at least one requirement component and an outcome"
                    .to_string(),
            ));
        }
        return Ok(fields - 1);
    }
    Err(ScenarioError::Parse(
        "observations file has no data rows".to_string(),
    ))
}
