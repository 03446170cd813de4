//! Domain data shared by every module: workspace, agents, obstacles,
//! coalitions, potential parameters, and scenario (de)serialization.
//!
//! All types here are immutable value data once constructed and are safe to
//! share between concurrent workers.

use crate::geom::Vec2;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

pub type AgentId = u32;
pub type CoalitionId = u32;
pub type ObstacleId = u32;

/// Axis-aligned rectangular workspace with its origin at the lower-left
/// corner. The four walls act as repulsive objects: for an evaluation point
/// `q`, each wall contributes its orthogonal projection of `q` as a point
/// object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub width: f64,
    pub height: f64,
}

impl Workspace {
    pub fn new(width: f64, height: f64) -> Self {
        Workspace { width, height }
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains_strict(&self, p: Vec2) -> bool {
        p.x > 0.0 && p.x < self.width && p.y > 0.0 && p.y < self.height
    }

    /// Distance from `p` to the nearest wall (negative outside).
    pub fn wall_clearance(&self, p: Vec2) -> f64 {
        p.x.min(self.width - p.x).min(p.y).min(self.height - p.y)
    }

    /// Orthogonal projections of `p` onto the four walls, in a fixed order:
    /// left, right, bottom, top.
    pub fn wall_projections(&self, p: Vec2) -> [Vec2; 4] {
        [
            Vec2::new(0.0, p.y),
            Vec2::new(self.width, p.y),
            Vec2::new(p.x, 0.0),
            Vec2::new(p.x, self.height),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    /// Initial position.
    pub q0: Vec2,
    /// Target position.
    pub qt: Vec2,
    pub coalition: CoalitionId,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: ObstacleId,
    pub center: Vec2,
    /// Radius used for the freeness relation and clearance reporting. The
    /// potentials use center-point distances only, so zero-radius point
    /// obstacles are permitted.
    pub radius: f64,
}

impl Obstacle {
    /// Signed distance from `p` to the obstacle surface.
    pub fn surface_distance(&self, p: Vec2) -> f64 {
        p.dist(self.center) - self.radius
    }
}

/// Weighting, confinement, kernel, and step factors of the potential family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    /// Attraction factor, > 0.
    pub lambda1: f64,
    /// Repulsive factor, > 0.
    pub lambda2: f64,
    /// Associative factor, >= 0.
    pub lambda3: f64,
    /// Confinement factor, > 1.
    pub alpha: f64,
    /// Kernel factor, > 0.
    pub beta: f64,
    /// Motion step size factor, > 0.
    pub gamma: f64,
}

impl PotentialParams {
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.lambda1 > 0.0) {
            v.push(Violation::BadParam { name: "lambda1", value: self.lambda1, constraint: "> 0" });
        }
        if !(self.lambda2 > 0.0) {
            v.push(Violation::BadParam { name: "lambda2", value: self.lambda2, constraint: "> 0" });
        }
        if !(self.lambda3 >= 0.0) {
            v.push(Violation::BadParam { name: "lambda3", value: self.lambda3, constraint: ">= 0" });
        }
        if !(self.alpha > 1.0) {
            v.push(Violation::BadParam { name: "alpha", value: self.alpha, constraint: "> 1" });
        }
        if !(self.beta > 0.0) {
            v.push(Violation::BadParam { name: "beta", value: self.beta, constraint: "> 0" });
        }
        if !(self.gamma > 0.0) {
            v.push(Violation::BadParam { name: "gamma", value: self.gamma, constraint: "> 0" });
        }
        v
    }
}

/// Assignment of every agent to exactly one coalition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionPartition {
    pub assignment: BTreeMap<AgentId, CoalitionId>,
}

impl CoalitionPartition {
    pub fn from_agents(agents: &[Agent]) -> Self {
        CoalitionPartition {
            assignment: agents.iter().map(|a| (a.id, a.coalition)).collect(),
        }
    }

    /// Members of each coalition, keyed by coalition id.
    pub fn coalitions(&self) -> BTreeMap<CoalitionId, Vec<AgentId>> {
        let mut map: BTreeMap<CoalitionId, Vec<AgentId>> = BTreeMap::new();
        for (&agent, &coalition) in &self.assignment {
            map.entry(coalition).or_default().push(agent);
        }
        map
    }

    /// True when the assignment covers exactly the given agent ids.
    pub fn is_partition_of(&self, ids: &BTreeSet<AgentId>) -> bool {
        self.assignment.len() == ids.len() && ids.iter().all(|id| self.assignment.contains_key(id))
    }
}

/// A full coordination problem instance. Mirrors the scenario file schema
/// one-to-one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub workspace: Workspace,
    pub params: PotentialParams,
    #[serde(default)]
    pub agents: Vec<Agent>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
}

impl Scenario {
    pub fn agent(&self, id: AgentId) -> Option<&Agent> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn coalition_partition(&self) -> CoalitionPartition {
        CoalitionPartition::from_agents(&self.agents)
    }

    /// Ids of the agents in `id`'s coalition, excluding `id` itself.
    pub fn allies_of(&self, id: AgentId) -> Vec<AgentId> {
        let Some(agent) = self.agent(id) else { return Vec::new() };
        self.agents
            .iter()
            .filter(|a| a.id != id && a.coalition == agent.coalition)
            .map(|a| a.id)
            .collect()
    }

    /// Rigid translation of every position. The workspace rectangle keeps its
    /// dimensions; callers are responsible for offsets that keep positions
    /// inside it.
    pub fn translated(&self, delta: Vec2) -> Scenario {
        let mut s = self.clone();
        for a in &mut s.agents {
            a.q0 += delta;
            a.qt += delta;
        }
        for o in &mut s.obstacles {
            o.center += delta;
        }
        s
    }

    pub fn to_toml_string(&self) -> Result<String, ScenarioIoError> {
        toml::to_string(self).map_err(|e| ScenarioIoError::Serialize(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioIoError> {
        toml::from_str(text).map_err(|e| ScenarioIoError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioIoError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioIoError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Scenario::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioIoError> {
        let text = self.to_toml_string()?;
        std::fs::write(path, text).map_err(|e| ScenarioIoError::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioIoError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario serialize error: {0}")]
    Serialize(String),
}

/// A single well-formedness violation. Violations are data, not faults: a
/// scenario that fails validation is reported, not panicked on.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveWorkspace { width: f64, height: f64 },
    DuplicateAgentId { id: AgentId },
    DuplicateObstacleId { id: ObstacleId },
    DegenerateAgent { id: AgentId },
    PositionOutsideWorkspace { what: String, position: Vec2 },
    TargetInsideObstacle { agent: AgentId, obstacle: ObstacleId },
    NegativeObstacleRadius { id: ObstacleId, radius: f64 },
    NotInPartition { agent: AgentId },
    BadParam { name: &'static str, value: f64, constraint: &'static str },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveWorkspace { width, height } => {
                write!(f, "workspace dimensions must be positive (got {width} x {height})")
            }
            Violation::DuplicateAgentId { id } => write!(f, "duplicate agent id {id}"),
            Violation::DuplicateObstacleId { id } => write!(f, "duplicate obstacle id {id}"),
            Violation::DegenerateAgent { id } => {
                write!(f, "degenerate agent {id}: initial position equals target")
            }
            Violation::PositionOutsideWorkspace { what, position } => {
                write!(f, "{what} at ({}, {}) lies outside the workspace", position.x, position.y)
            }
            Violation::TargetInsideObstacle { agent, obstacle } => {
                write!(f, "target of agent {agent} inside obstacle {obstacle}")
            }
            Violation::NegativeObstacleRadius { id, radius } => {
                write!(f, "obstacle {id} has negative radius {radius}")
            }
            Violation::NotInPartition { agent } => {
                write!(f, "agent {agent} missing from coalition partition")
            }
            Violation::BadParam { name, value, constraint } => {
                write!(f, "parameter {name} = {value} violates {constraint}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check every structural invariant of a scenario. Returns the full list of
/// violations rather than stopping at the first.
pub fn validate_scenario(scenario: &Scenario) -> ValidationResult {
    let mut violations = Vec::new();
    let ws = &scenario.workspace;

    if !(ws.width > 0.0 && ws.height > 0.0) {
        violations.push(Violation::NonPositiveWorkspace { width: ws.width, height: ws.height });
        return ValidationResult { violations };
    }

    violations.extend(scenario.params.violations());

    let mut agent_ids = BTreeSet::new();
    for agent in &scenario.agents {
        if !agent_ids.insert(agent.id) {
            violations.push(Violation::DuplicateAgentId { id: agent.id });
        }
        if agent.q0 == agent.qt {
            violations.push(Violation::DegenerateAgent { id: agent.id });
        }
        if !ws.contains_strict(agent.q0) {
            violations.push(Violation::PositionOutsideWorkspace {
                what: format!("initial position of agent {}", agent.id),
                position: agent.q0,
            });
        }
        if !ws.contains_strict(agent.qt) {
            violations.push(Violation::PositionOutsideWorkspace {
                what: format!("target of agent {}", agent.id),
                position: agent.qt,
            });
        }
    }

    let mut obstacle_ids = BTreeSet::new();
    for obstacle in &scenario.obstacles {
        if !obstacle_ids.insert(obstacle.id) {
            violations.push(Violation::DuplicateObstacleId { id: obstacle.id });
        }
        if obstacle.radius < 0.0 {
            violations.push(Violation::NegativeObstacleRadius {
                id: obstacle.id,
                radius: obstacle.radius,
            });
        }
        if !ws.contains_strict(obstacle.center) {
            violations.push(Violation::PositionOutsideWorkspace {
                what: format!("obstacle {}", obstacle.id),
                position: obstacle.center,
            });
        }
    }

    for agent in &scenario.agents {
        for obstacle in &scenario.obstacles {
            if obstacle.surface_distance(agent.qt) <= 0.0 {
                violations.push(Violation::TargetInsideObstacle {
                    agent: agent.id,
                    obstacle: obstacle.id,
                });
            }
        }
    }

    let partition = scenario.coalition_partition();
    for agent in &scenario.agents {
        if !partition.assignment.contains_key(&agent.id) {
            violations.push(Violation::NotInPartition { agent: agent.id });
        }
    }

    ValidationResult { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_scenario() -> Scenario {
        Scenario {
            workspace: Workspace::new(10.0, 10.0),
            params: PotentialParams {
                lambda1: 1.0,
                lambda2: 1.0,
                lambda3: 0.0,
                alpha: 2.0,
                beta: 10.0,
                gamma: 0.05,
            },
            agents: vec![
                Agent { id: 0, q0: Vec2::new(1.0, 1.0), qt: Vec2::new(9.0, 9.0), coalition: 0 },
                Agent { id: 1, q0: Vec2::new(1.0, 9.0), qt: Vec2::new(9.0, 1.0), coalition: 0 },
            ],
            obstacles: vec![Obstacle { id: 0, center: Vec2::new(5.0, 5.0), radius: 0.5 }],
        }
    }

    #[test]
    fn well_formed_scenario_is_ok() {
        assert!(validate_scenario(&base_scenario()).is_ok());
    }

    #[test]
    fn degenerate_agent_is_flagged() {
        let mut s = base_scenario();
        s.agents[0].qt = s.agents[0].q0;
        let result = validate_scenario(&s);
        assert!(result
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DegenerateAgent { id: 0 })));
    }

    #[test]
    fn target_inside_obstacle_is_flagged() {
        let mut s = base_scenario();
        // Distance 0.1 from an obstacle of radius 0.5.
        s.agents[0].qt = Vec2::new(5.1, 5.0);
        let result = validate_scenario(&s);
        assert!(result
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TargetInsideObstacle { agent: 0, obstacle: 0 })));
    }

    #[test]
    fn duplicate_ids_are_flagged() {
        let mut s = base_scenario();
        s.agents[1].id = 0;
        let result = validate_scenario(&s);
        assert!(result
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DuplicateAgentId { id: 0 })));
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let s = base_scenario();
        let text = s.to_toml_string().unwrap();
        let back = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn coalition_partition_groups_members() {
        let mut s = base_scenario();
        s.agents[1].coalition = 3;
        let groups = s.coalition_partition().coalitions();
        assert_eq!(groups[&0], vec![0]);
        assert_eq!(groups[&3], vec![1]);
        assert_eq!(s.allies_of(0), Vec::<AgentId>::new());
    }

    #[test]
    fn bad_params_are_flagged() {
        let mut s = base_scenario();
        s.params.alpha = 1.0;
        s.params.lambda1 = 0.0;
        let result = validate_scenario(&s);
        assert_eq!(
            result.violations.iter().filter(|v| matches!(v, Violation::BadParam { .. })).count(),
            2
        );
    }
}
