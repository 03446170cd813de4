//! Post-run analysis: the convergence factor κ, scenario density, potential
//! traces, and the structured metrics report.

use crate::coordinator::{SimResult, Trajectory};
use crate::scene::{AgentId, Scenario};
use serde::Serialize;
use std::collections::BTreeMap;

/// Relative convergence speed of two runs: ratio of the worst per-agent
/// convergence times. Only defined when both runs fully converged.
#[derive(Debug, Clone, PartialEq)]
pub enum KappaOutcome {
    Value(f64),
    Unavailable { reason: String },
}

impl KappaOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            KappaOutcome::Value(v) => Some(*v),
            KappaOutcome::Unavailable { .. } => None,
        }
    }
}

/// κ = max_i t_i(reference run) / max_i t_i(baseline run), in simulation
/// steps. Both runs must use the same step size factor for the ratio to be
/// meaningful; times are in steps so the measure is hardware-independent.
pub fn kappa(mnf_times: &[Option<usize>], dnf_times: &[Option<usize>]) -> KappaOutcome {
    if mnf_times.is_empty() || dnf_times.is_empty() {
        return KappaOutcome::Unavailable { reason: "no agents to compare".into() };
    }
    let max_of = |times: &[Option<usize>], label: &str| -> Result<usize, String> {
        let mut max = 0;
        for (i, t) in times.iter().enumerate() {
            match t {
                Some(steps) => max = max.max(*steps),
                None => return Err(format!("{label} run left agent index {i} unconverged")),
            }
        }
        Ok(max)
    };
    let mnf_max = match max_of(mnf_times, "mnf") {
        Ok(v) => v,
        Err(reason) => return KappaOutcome::Unavailable { reason },
    };
    let dnf_max = match max_of(dnf_times, "dnf") {
        Ok(v) => v,
        Err(reason) => return KappaOutcome::Unavailable { reason },
    };
    if dnf_max == 0 {
        return KappaOutcome::Unavailable { reason: "dnf run converged in zero steps".into() };
    }
    KappaOutcome::Value(mnf_max as f64 / dnf_max as f64)
}

/// Objects per unit area: (agents + obstacles) / (width × height).
pub fn density(scenario: &Scenario) -> f64 {
    (scenario.agents.len() + scenario.obstacles.len()) as f64 / scenario.workspace.area()
}

/// The potential column of a trajectory as an ordered (step, value) series.
pub fn potential_trace(traj: &Trajectory) -> Vec<(usize, f64)> {
    traj.samples.iter().map(|s| (s.step, s.potential)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub per_agent_time: BTreeMap<AgentId, Option<usize>>,
    pub kappa: Option<f64>,
    pub density: f64,
    pub min_obstacle_clearance: Option<f64>,
    pub min_agent_clearance: Option<f64>,
    /// Fraction of agents that converged.
    pub completed: f64,
}

impl RunMetrics {
    pub fn from_run(scenario: &Scenario, result: &SimResult) -> RunMetrics {
        let per_agent_time = scenario
            .agents
            .iter()
            .zip(&result.steps_to_converge)
            .map(|(a, t)| (a.id, *t))
            .collect();
        RunMetrics {
            per_agent_time,
            kappa: None,
            density: density(scenario),
            min_obstacle_clearance: result.min_obstacle_clearance,
            min_agent_clearance: result.min_agent_clearance,
            completed: result.converged_fraction(),
        }
    }
}

#[derive(Debug, Serialize)]
struct AgentRow {
    id: AgentId,
    steps: Option<usize>,
    final_distance: f64,
    confinement_radius: f64,
    alpha_dagger: Option<f64>,
    residual: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ReportDoc<'a> {
    mode: &'a str,
    ticks: usize,
    density: f64,
    completed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_unavailable: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_obstacle_clearance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_agent_clearance: Option<f64>,
    agents: Vec<AgentRow>,
}

/// Structured-text metrics report for one run: the run-level numbers plus
/// one row per agent with its convergence time and solved α†.
pub fn render_metrics(
    scenario: &Scenario,
    result: &SimResult,
    kappa: Option<&KappaOutcome>,
) -> String {
    let metrics = RunMetrics::from_run(scenario, result);
    let agents = scenario
        .agents
        .iter()
        .enumerate()
        .map(|(i, a)| AgentRow {
            id: a.id,
            steps: result.steps_to_converge[i],
            final_distance: result.final_distances[i],
            confinement_radius: result.confinement_radii[i],
            alpha_dagger: result.reports[i].as_ref().map(|r| r.alpha_dagger),
            residual: result.reports[i].as_ref().map(|r| r.residual),
        })
        .collect();
    let (kappa_value, kappa_unavailable) = match kappa {
        Some(KappaOutcome::Value(v)) => (Some(*v), None),
        Some(KappaOutcome::Unavailable { reason }) => (None, Some(reason.as_str())),
        None => (None, None),
    };
    let doc = ReportDoc {
        mode: result.mode.as_str(),
        ticks: result.ticks,
        density: metrics.density,
        completed: metrics.completed,
        kappa: kappa_value,
        kappa_unavailable,
        min_obstacle_clearance: metrics.min_obstacle_clearance,
        min_agent_clearance: metrics.min_agent_clearance,
        agents,
    };
    toml::to_string(&doc).expect("metrics serialize")
}
