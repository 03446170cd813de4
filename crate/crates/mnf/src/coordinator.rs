//! Two-phase multi-agent coordination: per-agent confinement radius and α†
//! up front, then synchronous gradient-descent ticks. Planning agents descend
//! the confined potential against live peer positions; once inside the
//! confinement region they latch to the kernel and walk a straight ray to the
//! target. A baseline mode descends the navigation-function field instead,
//! for convergence comparison.
//!
//! Within one tick every gradient reads an immutable snapshot of positions;
//! updates apply at the tick barrier. Independent simulations can run
//! concurrently.

use crate::criticality::{
    confinement_radius, solve_alpha_dagger_hinted, CriticalityConfig, CriticalityReport,
    SolveError,
};
use crate::geom::Vec2;
use crate::potentials::{
    dnf_baseline, grad_dnf_baseline, grad_omega, grad_psi, omega, psi, DnfParams, FieldContext,
    FieldError, Phase,
};
use crate::scene::{validate_scenario, AgentId, Scenario, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Mnf,
    Dnf,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Mnf => "mnf",
            Mode::Dnf => "dnf",
        }
    }
}

/// Tick scheduling. `Lockstep` advances every unconverged agent once per
/// tick against live peer positions. `Sequential` plans each agent's full
/// trajectory in turn with peers frozen at their initial positions — the
/// literal one-agent-at-a-time reading, kept for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    Lockstep,
    Sequential,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub mode: Mode,
    pub max_steps: usize,
    /// Distance to target at which an agent counts as converged.
    pub convergence_epsilon: f64,
    /// Planning runs at α = multiplier · α†; 1.0 is the solved optimum.
    /// Values above 1 keep confinement (monotone in α) but slow descent.
    pub alpha_multiplier: f64,
    /// Escalate a stalled planning agent's confinement knob (doubling,
    /// capped): α in the primary mode, the exponent k in baseline mode. The
    /// up-front α† holds for the initial configuration only; peers that park
    /// on their targets later can pin an approaching agent in a fresh local
    /// minimum outside its confinement region. Raising α keeps confinement
    /// and weakens the pinning repulsion until the agent crosses into its
    /// kernel region. Off reproduces the bare algorithm.
    pub stall_escalation: bool,
    pub resolve_alpha_each_step: bool,
    pub schedule: Schedule,
    pub dnf: DnfParams,
    pub criticality: CriticalityConfig,
}

impl SimConfig {
    /// Defaults for a scenario: ε = 1e-3 of the workspace diagonal.
    pub fn new(scenario: &Scenario, mode: Mode) -> SimConfig {
        SimConfig {
            mode,
            max_steps: 200_000,
            convergence_epsilon: 1e-3 * scenario.workspace.diagonal(),
            alpha_multiplier: 1.0,
            stall_escalation: true,
            resolve_alpha_each_step: false,
            schedule: Schedule::Lockstep,
            dnf: DnfParams::default(),
            criticality: CriticalityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub step: usize,
    pub position: Vec2,
    pub potential: f64,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub agent: AgentId,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectories are never empty")
    }

    /// First sample recorded in the given phase.
    pub fn phase_entry(&self, phase: Phase) -> Option<&Sample> {
        self.samples.iter().find(|s| s.phase == phase)
    }

    /// Phases must follow Planning* Kernel* Converged* with no reversal.
    pub fn phases_are_monotone(&self) -> bool {
        let rank = |p: Phase| match p {
            Phase::Planning => 0,
            Phase::Kernel => 1,
            Phase::Converged => 2,
        };
        self.samples.windows(2).all(|w| rank(w[0].phase) <= rank(w[1].phase))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {}", violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidScenario { violations: Vec<Violation> },
    #[error("agent {agent} at step {step}: {source}")]
    Singularity {
        agent: AgentId,
        step: usize,
        #[source]
        source: FieldError,
    },
    #[error("agent {agent} at step {step}: non-finite gradient at ({}, {})", position.x, position.y)]
    NonFiniteGradient { agent: AgentId, step: usize, position: Vec2 },
    #[error("agent {agent}: confinement solve failed: {source}")]
    Solve {
        agent: AgentId,
        #[source]
        source: SolveError,
    },
}

/// One gradient-descent step: q' = q − γ·g with the displacement clipped to
/// `max_step`.
pub fn gdc_step(q: Vec2, gradient: Vec2, gamma: f64, max_step: f64) -> Result<Vec2, ()> {
    if !gradient.is_finite() {
        return Err(());
    }
    let mut disp = -gradient * gamma;
    let norm = disp.norm();
    if norm > max_step {
        disp = disp * (max_step / norm);
    }
    Ok(q + disp)
}

/// Result of one simulation run. Indexing follows `scenario.agents` order.
/// Exhausting `max_steps` with unconverged agents is a partial result, not a
/// fault; per-agent final distances tell the story.
#[derive(Debug, Clone)]
pub struct SimResult {
    pub mode: Mode,
    pub trajectories: Vec<Trajectory>,
    /// α† solve diagnostics per agent; `None` in baseline mode.
    pub reports: Vec<Option<CriticalityReport>>,
    pub confinement_radii: Vec<f64>,
    pub steps_to_converge: Vec<Option<usize>>,
    pub final_distances: Vec<f64>,
    /// Minimum distance from any recorded sample to any obstacle surface;
    /// `None` when the scenario has no obstacles.
    pub min_obstacle_clearance: Option<f64>,
    /// Minimum same-tick inter-agent distance; `None` with fewer than two
    /// agents or under sequential scheduling.
    pub min_agent_clearance: Option<f64>,
    /// Stall-escalation rounds taken per agent.
    pub escalations: Vec<u32>,
    pub ticks: usize,
}

impl SimResult {
    pub fn all_converged(&self) -> bool {
        self.steps_to_converge.iter().all(|s| s.is_some())
    }

    pub fn converged_fraction(&self) -> f64 {
        if self.steps_to_converge.is_empty() {
            return 1.0;
        }
        self.steps_to_converge.iter().filter(|s| s.is_some()).count() as f64
            / self.steps_to_converge.len() as f64
    }

    /// Delimited trajectory export, one row per (agent, step):
    /// agent_id, step, x, y, potential, phase.
    pub fn trajectories_csv(&self) -> String {
        let mut out = String::from("agent_id,step,x,y,potential,phase\n");
        for t in &self.trajectories {
            for s in &t.samples {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    t.agent,
                    s.step,
                    s.position.x,
                    s.position.y,
                    s.potential,
                    s.phase.as_str()
                ));
            }
        }
        out
    }
}

struct AgentState {
    id: AgentId,
    target: Vec2,
    phase: Phase,
    alpha: f64,
    radius: f64,
    converged_at: Option<usize>,
    dnf_k: u32,
    slow_ticks: usize,
    best_distance: f64,
    best_distance_step: usize,
    osc_anchor: Vec2,
    osc_anchor_step: usize,
    osc_gross: f64,
    escalations: u32,
}

impl AgentState {
    fn escalate(&mut self, mode: Mode, alpha_cap: f64) {
        match mode {
            Mode::Mnf => self.alpha = (self.alpha * 2.0).min(alpha_cap),
            // The baseline's own confinement knob plays the same role:
            // raising the exponent thins the repulsive shells until the
            // pocket minimum dissolves.
            Mode::Dnf => self.dnf_k = (self.dnf_k * 2).min(DNF_K_CAP),
        }
        self.escalations += 1;
        self.slow_ticks = 0;
    }
}

/// Cap for the baseline exponent under stall escalation.
const DNF_K_CAP: u32 = 64;
/// Consecutive ticks below the healthy step fraction that count as pinned.
const STALL_SLOW_TICKS: usize = 20;
/// Fraction of the mode's healthy step length below which a tick is "slow".
const STALL_STEP_FRACTION: f64 = 0.1;
/// Oscillation detector: window length and the net/gross displacement ratio
/// under which motion counts as bouncing in place. A quarter-turn detour
/// keeps a ratio above ~0.6, so legitimate swerves never trigger it.
const OSC_WINDOW: usize = 25;
const OSC_NET_RATIO: f64 = 0.15;

/// Expected displacement per tick of a healthy agent at distance `dist`
/// from its target, per mode: the attractive part of the respective field.
fn healthy_step(dist: f64, scenario: &Scenario, mode: Mode) -> f64 {
    let gamma = scenario.params.gamma;
    match mode {
        Mode::Mnf => gamma * 2.0 * scenario.params.lambda1 * dist,
        Mode::Dnf => gamma * 2.0 * dist / scenario.workspace.diagonal().powi(2),
    }
}

/// Horizon after which a planning agent that has set no new best distance to
/// its target counts as trapped (covers oscillating pockets that the
/// slow-step detector misses). Scaled to the mode's crossing time so that a
/// legitimate detour around an obstacle never triggers it.
fn stall_horizon(scenario: &Scenario, cfg: &SimConfig) -> usize {
    let gamma = scenario.params.gamma;
    let ticks = match cfg.mode {
        Mode::Mnf => 10.0 / (2.0 * gamma * scenario.params.lambda1),
        Mode::Dnf => {
            let d2 = scenario.workspace.diagonal().powi(2);
            0.7 * d2 / (2.0 * gamma)
        }
    };
    (ticks.ceil() as usize).clamp(200, (cfg.max_steps / 4).max(200))
}

/// Fraction of the local obstacle clearance a single step may cover;
/// prevents tunneling through thin repulsive barriers. Walls count.
const STEP_CLEARANCE_FRACTION: f64 = 0.25;

fn obstacle_clearance(q: Vec2, scenario: &Scenario) -> f64 {
    let mut c = scenario.workspace.wall_clearance(q);
    for o in &scenario.obstacles {
        c = c.min(o.surface_distance(q));
    }
    c.max(0.0)
}

/// Run the coordinator on a validated scenario.
pub fn run(scenario: &Scenario, cfg: &SimConfig) -> Result<SimResult, SimError> {
    let validation = validate_scenario(scenario);
    if !validation.is_ok() {
        return Err(SimError::InvalidScenario { violations: validation.violations });
    }
    match cfg.schedule {
        Schedule::Lockstep => run_lockstep(scenario, cfg),
        Schedule::Sequential => run_sequential(scenario, cfg),
    }
}

fn make_context(
    scenario: &Scenario,
    id: AgentId,
    positions: &[Vec2],
    cfg: &SimConfig,
    alpha: f64,
    dnf_k: u32,
) -> FieldContext {
    let mut ctx = FieldContext::for_agent_with_positions(scenario, id, positions)
        .expect("agent id validated");
    ctx.params.alpha = alpha;
    ctx.dnf = DnfParams { exponent_k: dnf_k, ..cfg.dnf };
    ctx
}

/// Potential value recorded with a sample, per the phase that produced it.
fn sample_potential(
    q: Vec2,
    phase: Phase,
    ctx: &FieldContext,
    mode: Mode,
) -> Result<f64, FieldError> {
    match (mode, phase) {
        (Mode::Dnf, _) => dnf_baseline(q, ctx),
        (Mode::Mnf, Phase::Planning) => psi(q, ctx),
        (Mode::Mnf, Phase::Kernel) => Ok(omega(q, ctx.target, ctx.params.beta)),
        (Mode::Mnf, Phase::Converged) => Ok(omega(q, ctx.target, ctx.params.beta)),
    }
}

fn solve_agent(
    scenario: &Scenario,
    id: AgentId,
    positions: &[Vec2],
    cfg: &SimConfig,
    hint: Option<f64>,
) -> Result<(f64, CriticalityReport, f64), SimError> {
    let agent = scenario.agent(id).expect("validated");
    let radius = confinement_radius(agent.qt, scenario, cfg.criticality.include_agent_targets);
    // The solver certifies the static field: obstacle and wall sums only,
    // with the associative term frozen at the given peer positions.
    let ctx = make_context(scenario, id, positions, cfg, scenario.params.alpha, cfg.dnf.exponent_k)
        .without_peer_repulsion();
    let (alpha, report) = solve_alpha_dagger_hinted(&ctx, radius, &cfg.criticality, hint)
        .map_err(|source| SimError::Solve { agent: id, source })?;
    Ok((alpha, report, radius))
}

fn run_lockstep(scenario: &Scenario, cfg: &SimConfig) -> Result<SimResult, SimError> {
    let n = scenario.agents.len();
    let eps = cfg.convergence_epsilon;
    let mut positions: Vec<Vec2> = scenario.agents.iter().map(|a| a.q0).collect();
    let mut states: Vec<AgentState> = Vec::with_capacity(n);
    let mut reports: Vec<Option<CriticalityReport>> = vec![None; n];

    // Phase one of the algorithm: r_i and α†_i for every agent, before any
    // motion, against initial peer positions.
    for (i, agent) in scenario.agents.iter().enumerate() {
        let (alpha, radius) = match cfg.mode {
            Mode::Mnf => {
                let hint = states
                    .last()
                    .map(|s: &AgentState| s.alpha / cfg.alpha_multiplier)
                    .filter(|a| *a > 1.0 + 1e-6);
                let (alpha, report, radius) = solve_agent(scenario, agent.id, &positions, cfg, hint)?;
                reports[i] = Some(report);
                (alpha * cfg.alpha_multiplier, radius)
            }
            Mode::Dnf => {
                let radius =
                    confinement_radius(agent.qt, scenario, cfg.criticality.include_agent_targets);
                (scenario.params.alpha, radius)
            }
        };
        states.push(AgentState {
            id: agent.id,
            target: agent.qt,
            phase: Phase::Planning,
            alpha,
            radius,
            converged_at: None,
            dnf_k: cfg.dnf.exponent_k,
            slow_ticks: 0,
            best_distance: agent.q0.dist(agent.qt),
            best_distance_step: 0,
            osc_anchor: agent.q0,
            osc_anchor_step: 0,
            osc_gross: 0.0,
            escalations: 0,
        });
    }

    let mut trajectories: Vec<Trajectory> = Vec::with_capacity(n);
    let mut min_obstacle: Option<f64> = None;
    let mut min_agent: Option<f64> = None;

    let track_clearances =
        |positions: &[Vec2], min_obstacle: &mut Option<f64>, min_agent: &mut Option<f64>| {
            for (idx, &p) in positions.iter().enumerate() {
                for o in &scenario.obstacles {
                    let d = o.surface_distance(p);
                    *min_obstacle = Some(min_obstacle.map_or(d, |m: f64| m.min(d)));
                }
                for &other in positions.iter().skip(idx + 1) {
                    let d = p.dist(other);
                    *min_agent = Some(min_agent.map_or(d, |m: f64| m.min(d)));
                }
            }
        };

    // Initial samples at step 0.
    for (i, state) in states.iter_mut().enumerate() {
        let q = positions[i];
        let dist = q.dist(state.target);
        if cfg.mode == Mode::Mnf && dist < state.radius {
            state.phase = Phase::Kernel;
        }
        if dist < eps {
            state.phase = Phase::Converged;
            state.converged_at = Some(0);
            positions[i] = state.target;
        }
        let ctx = make_context(scenario, state.id, &positions, cfg, state.alpha, state.dnf_k);
        let potential = sample_potential(positions[i], state.phase, &ctx, cfg.mode)
            .map_err(|source| SimError::Singularity { agent: state.id, step: 0, source })?;
        trajectories.push(Trajectory {
            agent: state.id,
            samples: vec![Sample { step: 0, position: positions[i], potential, phase: state.phase }],
        });
    }
    track_clearances(&positions, &mut min_obstacle, &mut min_agent);

    let mut ticks = 0;
    let horizon = stall_horizon(scenario, cfg);
    for step in 1..=cfg.max_steps {
        if states.iter().all(|s| s.converged_at.is_some()) {
            break;
        }
        ticks = step;
        let snapshot = positions.clone();
        let mut updates: Vec<(usize, Vec2, Phase, f64)> = Vec::new();

        for (i, state) in states.iter_mut().enumerate() {
            if state.converged_at.is_some() {
                continue;
            }
            let q = snapshot[i];
            let dist = q.dist(state.target);

            // One-way phase latch.
            if cfg.mode == Mode::Mnf && state.phase == Phase::Planning && dist < state.radius {
                state.phase = Phase::Kernel;
            }

            if cfg.stall_escalation
                && state.phase == Phase::Planning
                && step - state.best_distance_step >= horizon
            {
                state.escalate(cfg.mode, cfg.criticality.alpha_cap);
                state.best_distance_step = step;
            }

            if cfg.mode == Mode::Mnf
                && cfg.resolve_alpha_each_step
                && state.phase == Phase::Planning
            {
                let (alpha, report, radius) = solve_agent(
                    scenario,
                    state.id,
                    &snapshot,
                    cfg,
                    Some(state.alpha / cfg.alpha_multiplier),
                )?;
                state.alpha = alpha * cfg.alpha_multiplier;
                state.radius = radius;
                reports[i] = Some(report);
            }

            let ctx = make_context(scenario, state.id, &snapshot, cfg, state.alpha, state.dnf_k);
            let gamma = scenario.params.gamma;
            let new_q = match (cfg.mode, state.phase) {
                (Mode::Mnf, Phase::Kernel) => {
                    // Kernel descent: constant-speed ray toward the target,
                    // clamped so the step never overshoots it. This keeps the
                    // target distance strictly decreasing.
                    let (g, at_target) = grad_omega(q, state.target, ctx.params.beta);
                    if at_target {
                        q
                    } else {
                        gdc_step(q, g, gamma, dist).map_err(|_| SimError::NonFiniteGradient {
                            agent: state.id,
                            step,
                            position: q,
                        })?
                    }
                }
                (Mode::Mnf, _) => {
                    let g = grad_psi(q, &ctx).map_err(|source| SimError::Singularity {
                        agent: state.id,
                        step,
                        source,
                    })?;
                    let max_step = STEP_CLEARANCE_FRACTION * obstacle_clearance(q, scenario);
                    gdc_step(q, g, gamma, max_step).map_err(|_| SimError::NonFiniteGradient {
                        agent: state.id,
                        step,
                        position: q,
                    })?
                }
                (Mode::Dnf, _) => {
                    let g = grad_dnf_baseline(q, &ctx).map_err(|source| SimError::Singularity {
                        agent: state.id,
                        step,
                        source,
                    })?;
                    let max_step = STEP_CLEARANCE_FRACTION * obstacle_clearance(q, scenario);
                    gdc_step(q, g, gamma, max_step).map_err(|_| SimError::NonFiniteGradient {
                        agent: state.id,
                        step,
                        position: q,
                    })?
                }
            };

            let mut new_q = new_q;
            let mut phase = state.phase;
            let new_dist = new_q.dist(state.target);
            if new_dist < eps {
                // Converged agents park exactly on their targets; their
                // potentials and associative contributions vanish outright.
                new_q = state.target;
                phase = Phase::Converged;
                state.converged_at = Some(step);
            } else if cfg.stall_escalation && phase == Phase::Planning {
                // Pinned-equilibrium detector: sustained sub-healthy steps.
                if new_q.dist(q) < STALL_STEP_FRACTION * healthy_step(dist, scenario, cfg.mode) {
                    state.slow_ticks += 1;
                    if state.slow_ticks >= STALL_SLOW_TICKS {
                        state.escalate(cfg.mode, cfg.criticality.alpha_cap);
                        state.best_distance_step = step;
                    }
                } else {
                    state.slow_ticks = 0;
                }
                // Bounce detector: a clipped tug-of-war around an equilibrium
                // racks up gross motion without net motion.
                state.osc_gross += new_q.dist(q);
                if step - state.osc_anchor_step >= OSC_WINDOW {
                    let net = new_q.dist(state.osc_anchor);
                    let traveled = state.osc_gross
                        > 0.5 * OSC_WINDOW as f64
                            * STALL_STEP_FRACTION
                            * healthy_step(dist, scenario, cfg.mode);
                    if traveled && net < OSC_NET_RATIO * state.osc_gross {
                        state.escalate(cfg.mode, cfg.criticality.alpha_cap);
                        state.best_distance_step = step;
                    }
                    state.osc_anchor = new_q;
                    state.osc_anchor_step = step;
                    state.osc_gross = 0.0;
                }
            }
            if new_dist < state.best_distance {
                state.best_distance = new_dist;
                state.best_distance_step = step;
            }
            state.phase = phase;
            let potential = sample_potential(new_q, phase, &ctx, cfg.mode)
                .map_err(|source| SimError::Singularity { agent: state.id, step, source })?;
            updates.push((i, new_q, phase, potential));
        }

        for (i, new_q, phase, potential) in updates {
            positions[i] = new_q;
            trajectories[i].samples.push(Sample { step, position: new_q, potential, phase });
        }
        track_clearances(&positions, &mut min_obstacle, &mut min_agent);
    }

    let final_distances =
        positions.iter().zip(&states).map(|(p, s)| p.dist(s.target)).collect();
    Ok(SimResult {
        mode: cfg.mode,
        trajectories,
        reports,
        confinement_radii: states.iter().map(|s| s.radius).collect(),
        steps_to_converge: states.iter().map(|s| s.converged_at).collect(),
        final_distances,
        min_obstacle_clearance: min_obstacle,
        min_agent_clearance: min_agent,
        escalations: states.iter().map(|s| s.escalations).collect(),
        ticks,
    })
}

/// Literal sequential reading: each agent plans to completion against peers
/// frozen at their initial positions.
fn run_sequential(scenario: &Scenario, cfg: &SimConfig) -> Result<SimResult, SimError> {
    let n = scenario.agents.len();
    let frozen: Vec<Vec2> = scenario.agents.iter().map(|a| a.q0).collect();
    let eps = cfg.convergence_epsilon;

    let mut trajectories = Vec::with_capacity(n);
    let mut reports: Vec<Option<CriticalityReport>> = vec![None; n];
    let mut radii = Vec::with_capacity(n);
    let mut steps_to_converge = Vec::with_capacity(n);
    let mut final_distances = Vec::with_capacity(n);
    let mut min_obstacle: Option<f64> = None;
    let mut max_ticks = 0;
    let mut alpha_hint = None;

    for (i, agent) in scenario.agents.iter().enumerate() {
        let (alpha, radius) = match cfg.mode {
            Mode::Mnf => {
                let (alpha, report, radius) =
                    solve_agent(scenario, agent.id, &frozen, cfg, alpha_hint)?;
                reports[i] = Some(report);
                alpha_hint = Some(alpha);
                (alpha * cfg.alpha_multiplier, radius)
            }
            Mode::Dnf => (
                scenario.params.alpha,
                confinement_radius(agent.qt, scenario, cfg.criticality.include_agent_targets),
            ),
        };
        radii.push(radius);

        let ctx = make_context(scenario, agent.id, &frozen, cfg, alpha, cfg.dnf.exponent_k);
        let mut q = agent.q0;
        let mut phase = if cfg.mode == Mode::Mnf && q.dist(agent.qt) < radius {
            Phase::Kernel
        } else {
            Phase::Planning
        };
        let mut converged_at = None;
        if q.dist(agent.qt) < eps {
            q = agent.qt;
            phase = Phase::Converged;
            converged_at = Some(0);
        }
        let potential = sample_potential(q, phase, &ctx, cfg.mode)
            .map_err(|source| SimError::Singularity { agent: agent.id, step: 0, source })?;
        let mut samples = vec![Sample { step: 0, position: q, potential, phase }];

        for step in 1..=cfg.max_steps {
            if converged_at.is_some() {
                break;
            }
            let dist = q.dist(agent.qt);
            if cfg.mode == Mode::Mnf && phase == Phase::Planning && dist < radius {
                phase = Phase::Kernel;
            }
            let gamma = scenario.params.gamma;
            q = match (cfg.mode, phase) {
                (Mode::Mnf, Phase::Kernel) => {
                    let (g, at_target) = grad_omega(q, agent.qt, ctx.params.beta);
                    if at_target {
                        q
                    } else {
                        gdc_step(q, g, gamma, dist).map_err(|_| SimError::NonFiniteGradient {
                            agent: agent.id,
                            step,
                            position: q,
                        })?
                    }
                }
                (Mode::Mnf, _) => {
                    let g = grad_psi(q, &ctx).map_err(|source| SimError::Singularity {
                        agent: agent.id,
                        step,
                        source,
                    })?;
                    let max_step = STEP_CLEARANCE_FRACTION * obstacle_clearance(q, scenario);
                    gdc_step(q, g, gamma, max_step).map_err(|_| SimError::NonFiniteGradient {
                        agent: agent.id,
                        step,
                        position: q,
                    })?
                }
                (Mode::Dnf, _) => {
                    let g = grad_dnf_baseline(q, &ctx).map_err(|source| SimError::Singularity {
                        agent: agent.id,
                        step,
                        source,
                    })?;
                    let max_step = STEP_CLEARANCE_FRACTION * obstacle_clearance(q, scenario);
                    gdc_step(q, g, gamma, max_step).map_err(|_| SimError::NonFiniteGradient {
                        agent: agent.id,
                        step,
                        position: q,
                    })?
                }
            };
            if q.dist(agent.qt) < eps {
                q = agent.qt;
                phase = Phase::Converged;
                converged_at = Some(step);
            }
            let potential = sample_potential(q, phase, &ctx, cfg.mode)
                .map_err(|source| SimError::Singularity { agent: agent.id, step, source })?;
            samples.push(Sample { step, position: q, potential, phase });
            for o in &scenario.obstacles {
                let d = o.surface_distance(q);
                min_obstacle = Some(min_obstacle.map_or(d, |m| m.min(d)));
            }
        }

        max_ticks = max_ticks.max(samples.last().map(|s| s.step).unwrap_or(0));
        steps_to_converge.push(converged_at);
        final_distances.push(q.dist(agent.qt));
        trajectories.push(Trajectory { agent: agent.id, samples });
    }

    Ok(SimResult {
        mode: cfg.mode,
        trajectories,
        reports,
        confinement_radii: radii,
        steps_to_converge,
        final_distances,
        min_obstacle_clearance: min_obstacle,
        min_agent_clearance: None,
        escalations: vec![0; n],
        ticks: max_ticks,
    })
}
