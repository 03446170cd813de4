//! Meta-navigation-function coordination engine for planar multi-agent
//! systems.
//!
//! An agent's motion is planned in two phases. A confined potential — an
//! attractive/repulsive/associative field whose non-target critical points
//! are driven inside an obstacle-free disk around the target by a solved
//! confinement factor — steers the agent through the cluttered part of the
//! workspace. Once the agent enters that disk, a conical attraction kernel
//! takes over and walks it straight to its target. Agents in the same
//! coalition reinforce each other's attraction while they are still under
//! way, which is the mechanism behind the faster-than-baseline convergence
//! measured by the κ metric.
//!
//! Modules:
//! - [`scene`]: workspace, agents, obstacles, coalitions, scenario files.
//! - [`potentials`]: the confined field ψ, kernel ω, combined field, and the
//!   navigation-function baseline.
//! - [`criticality`]: critical-set enumeration, confinement radius, α† solve.
//! - [`coordinator`]: the time-stepped two-phase simulation.
//! - [`metrics`]: κ, density, traces, reports.
//! - [`generator`]: random scenarios and the benchmark suites.

pub mod coordinator;
pub mod criticality;
pub mod generator;
pub mod geom;
pub mod metrics;
pub mod potentials;
pub mod scene;

pub use coordinator::{gdc_step, run, Mode, Sample, Schedule, SimConfig, SimError, SimResult, Trajectory};
pub use criticality::{
    boundary_cp, confinement_radius, find_critical_set, solve_alpha_dagger, CriticalSet,
    CriticalityConfig, CriticalityReport, SolveError,
};
pub use generator::{
    generate, table1_suite, table1_suite_half, table2_suite, table2_suite_half, GenerateError,
    GeneratorSpec, SuiteEntry,
};
pub use geom::Vec2;
pub use metrics::{density, kappa, potential_trace, KappaOutcome, RunMetrics};
pub use potentials::{
    dnf_baseline, grad_dnf_baseline, grad_omega, grad_psi, mnf, omega, psi, DnfParams,
    FieldContext, FieldError, Phase, PhasePredicate,
};
pub use scene::{
    validate_scenario, Agent, AgentId, CoalitionPartition, Obstacle, PotentialParams, Scenario,
    ValidationResult, Violation, Workspace,
};
