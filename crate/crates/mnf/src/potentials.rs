//! The confined potential ψ, its analytic gradient and Hessian, the
//! attraction kernel ω, the piecewise meta field φ with its region predicate,
//! and a navigation-function baseline for convergence comparisons.
//!
//! Every function here is pure and reentrant.
//!
//! The repulsive object set of ψ at an evaluation point `q` is: every other
//! agent's current position, every obstacle center, and the orthogonal
//! projections of `q` onto the four workspace walls. A wall projection moves
//! with `q`, but only parallel to its wall, so treating it as a fixed point
//! still yields the exact first derivative of the true distance-to-wall term.

use crate::geom::{Mat2, Vec2};
use crate::scene::{AgentId, Obstacle, PotentialParams, Scenario, Workspace};

/// Evaluations closer than this to a repulsive object raise
/// [`FieldError::Singularity`] instead of returning a huge value.
pub const SINGULARITY_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum FieldError {
    #[error("field evaluated at ({}, {}), within {SINGULARITY_GUARD} of object at ({}, {})",
            q.x, q.y, object.x, object.y)]
    Singularity { q: Vec2, object: Vec2 },
}

/// Which piece of the meta field is active, plus the terminal state used by
/// trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Phase {
    Planning,
    Kernel,
    Converged,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Planning => "planning",
            Phase::Kernel => "kernel",
            Phase::Converged => "converged",
        }
    }
}

/// Baseline-field tuning. `exponent_k` is the navigation-function exponent;
/// `influence_frac` sets the obstacle influence radius as a fraction of the
/// workspace diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DnfParams {
    pub exponent_k: u32,
    pub influence_frac: f64,
}

impl Default for DnfParams {
    fn default() -> Self {
        DnfParams { exponent_k: 3, influence_frac: 0.1 }
    }
}

/// A peer of the subject agent: current position, target, and whether it
/// belongs to the subject's coalition (allies feed the associative term; all
/// peers repulse).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeerState {
    pub id: AgentId,
    pub position: Vec2,
    pub target: Vec2,
    pub ally: bool,
}

/// Everything needed to evaluate the fields for one agent. The subject is
/// never among `peers`, and every ally carries both a position and a target.
///
/// `peer_repulsion` controls whether peers join the repulsive object set
/// (they always feed the associative sum). The running fields keep it on;
/// the confinement solver works against the static field — obstacles and
/// walls only — whose sums the confinement condition is written over.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldContext {
    pub subject: AgentId,
    pub target: Vec2,
    pub peers: Vec<PeerState>,
    pub obstacles: Vec<Obstacle>,
    pub workspace: Workspace,
    pub params: PotentialParams,
    pub dnf: DnfParams,
    pub peer_repulsion: bool,
}

impl FieldContext {
    /// Context for `subject` with every agent at its initial position.
    pub fn for_agent(scenario: &Scenario, subject: AgentId) -> Option<FieldContext> {
        let positions: Vec<Vec2> = scenario.agents.iter().map(|a| a.q0).collect();
        Self::for_agent_with_positions(scenario, subject, &positions)
    }

    /// Context for `subject` with agents at the given positions
    /// (`positions[i]` belongs to `scenario.agents[i]`).
    pub fn for_agent_with_positions(
        scenario: &Scenario,
        subject: AgentId,
        positions: &[Vec2],
    ) -> Option<FieldContext> {
        let me = scenario.agents.iter().position(|a| a.id == subject)?;
        if positions.len() != scenario.agents.len() {
            return None;
        }
        let coalition = scenario.agents[me].coalition;
        let peers = scenario
            .agents
            .iter()
            .zip(positions)
            .filter(|(a, _)| a.id != subject)
            .map(|(a, &p)| PeerState {
                id: a.id,
                position: p,
                target: a.qt,
                ally: a.coalition == coalition,
            })
            .collect();
        Some(FieldContext {
            subject,
            target: scenario.agents[me].qt,
            peers,
            obstacles: scenario.obstacles.clone(),
            workspace: scenario.workspace,
            params: scenario.params,
            dnf: DnfParams::default(),
            peer_repulsion: true,
        })
    }

    pub fn with_alpha(&self, alpha: f64) -> FieldContext {
        let mut ctx = self.clone();
        ctx.params.alpha = alpha;
        ctx
    }

    /// The static-field view used by the confinement solver: peers keep
    /// feeding the associative sum but drop out of the repulsive one.
    pub fn without_peer_repulsion(&self) -> FieldContext {
        let mut ctx = self.clone();
        ctx.peer_repulsion = false;
        ctx
    }

    /// Σ_k ‖q_k − q_k^t‖² over allies: the associative influence of the
    /// subject's coalition.
    pub fn ally_influence(&self) -> f64 {
        self.peers
            .iter()
            .filter(|p| p.ally)
            .map(|p| p.position.dist_sq(p.target))
            .sum()
    }

    /// Characteristic magnitude of the potential over the workspace; used to
    /// express relative tolerances on values.
    pub fn value_scale(&self) -> f64 {
        let d = self.workspace.diagonal();
        let attractive = (self.params.lambda1 + self.params.lambda3 * self.ally_influence()) * d * d;
        attractive.max(self.params.beta * d)
    }

    /// Characteristic gradient magnitude; used to express relative tolerances
    /// on gradient norms.
    pub fn gradient_scale(&self) -> f64 {
        let d = self.workspace.diagonal();
        2.0 * (self.params.lambda1 + self.params.lambda3 * self.ally_influence()) * d
    }

    /// Distance from `q` to the nearest repulsive point object (peers when
    /// they repulse, obstacle centers, wall projections).
    pub fn nearest_object_distance(&self, q: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        if self.peer_repulsion {
            for p in &self.peers {
                best = best.min(q.dist(p.position));
            }
        }
        for o in &self.obstacles {
            best = best.min(q.dist(o.center));
        }
        for w in self.workspace.wall_projections(q) {
            best = best.min(q.dist(w));
        }
        best
    }
}

/// The confinement-region predicate: true strictly inside the disk of the
/// confinement radius around the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePredicate {
    pub target: Vec2,
    pub radius: f64,
}

impl PhasePredicate {
    pub fn inside(&self, q: Vec2) -> bool {
        q.dist(self.target) < self.radius
    }
}

enum ObjectKind {
    Point,
    /// Wall with normal along x (left/right): the projection slides with
    /// q.y, so the second derivative acts only on the x axis.
    WallX,
    /// Wall with normal along y (bottom/top).
    WallY,
}

/// Visit every repulsive object of ψ as (q - o, ‖q - o‖², kind), with the
/// singularity guard applied.
fn for_each_object<F>(q: Vec2, ctx: &FieldContext, mut visit: F) -> Result<(), FieldError>
where
    F: FnMut(Vec2, f64, ObjectKind),
{
    let guard_sq = SINGULARITY_GUARD * SINGULARITY_GUARD;
    let mut take = |o: Vec2, kind: ObjectKind| -> Result<(), FieldError> {
        let u = q - o;
        let m2 = u.norm_sq();
        if m2 < guard_sq {
            return Err(FieldError::Singularity { q, object: o });
        }
        visit(u, m2, kind);
        Ok(())
    };
    if ctx.peer_repulsion {
        for p in &ctx.peers {
            take(p.position, ObjectKind::Point)?;
        }
    }
    for o in &ctx.obstacles {
        take(o.center, ObjectKind::Point)?;
    }
    let [left, right, bottom, top] = ctx.workspace.wall_projections(q);
    take(left, ObjectKind::WallX)?;
    take(right, ObjectKind::WallX)?;
    take(bottom, ObjectKind::WallY)?;
    take(top, ObjectKind::WallY)?;
    Ok(())
}

/// The confined potential:
/// λ₁‖q−qᵗ‖² + (λ₂/α)·Σ_o ‖q−qᵗ‖^(1/α)/‖q−o‖² + λ₃‖q−qᵗ‖²·Σ_k ‖q_k−q_k^t‖².
pub fn psi(q: Vec2, ctx: &FieldContext) -> Result<f64, FieldError> {
    let p = &ctx.params;
    let d = q - ctx.target;
    let r2 = d.norm_sq();

    let mut inv_sq_sum = 0.0;
    for_each_object(q, ctx, |_, m2, _| inv_sq_sum += 1.0 / m2)?;

    let numerator = r2.powf(0.5 / p.alpha); // ‖q−qᵗ‖^(1/α)
    let attractive = p.lambda1 * r2;
    let repulsive = p.lambda2 / p.alpha * numerator * inv_sq_sum;
    let associative = p.lambda3 * r2 * ctx.ally_influence();
    Ok(attractive + repulsive + associative)
}

/// Analytic gradient of [`psi`].
///
/// The repulsive numerator ‖q−qᵗ‖^(1/α) has a cusp at the target itself; at
/// q = qᵗ exactly, every term of the field vanishes and the gradient is
/// defined as the zero vector, which keeps the target a critical point.
pub fn grad_psi(q: Vec2, ctx: &FieldContext) -> Result<Vec2, FieldError> {
    let p = &ctx.params;
    let d = q - ctx.target;
    let r2 = d.norm_sq();

    let mut g = d * (2.0 * (p.lambda1 + p.lambda3 * ctx.ally_influence()));
    if r2 == 0.0 {
        // Still run the guard so evaluation on top of an object errors.
        for_each_object(q, ctx, |_, _, _| {})?;
        return Ok(Vec2::ZERO);
    }

    let p0 = r2.powf(0.5 / p.alpha); // ‖d‖^(1/α)
    let p2 = r2.powf(0.5 / p.alpha - 1.0); // ‖d‖^(1/α - 2)
    let scale = p.lambda2 / p.alpha;
    let inv_alpha = 1.0 / p.alpha;
    let mut rep = Vec2::ZERO;
    for_each_object(q, ctx, |u, m2, _| {
        // ∇[‖d‖^(1/α)/m²] = (1/α)‖d‖^(1/α−2) d / m² − 2‖d‖^(1/α) u / m⁴
        rep += d * (inv_alpha * p2 / m2) - u * (2.0 * p0 / (m2 * m2));
    })?;
    g += rep * scale;
    Ok(g)
}

/// Analytic Hessian of [`psi`]; at the target cusp only the smooth
/// attractive and associative curvature is reported.
pub fn hessian_psi(q: Vec2, ctx: &FieldContext) -> Result<Mat2, FieldError> {
    let p = &ctx.params;
    let d = q - ctx.target;
    let r2 = d.norm_sq();
    let smooth = 2.0 * (p.lambda1 + p.lambda3 * ctx.ally_influence());

    let mut h = Mat2::scaled_identity(smooth);
    if r2 == 0.0 {
        for_each_object(q, ctx, |_, _, _| {})?;
        return Ok(h);
    }

    let inv_alpha = 1.0 / p.alpha;
    let p0 = r2.powf(0.5 * inv_alpha);
    let p2 = r2.powf(0.5 * inv_alpha - 1.0);
    let p4 = r2.powf(0.5 * inv_alpha - 2.0);
    let grad_n = d * (inv_alpha * p2);
    // Hessian of the numerator n = ‖d‖^(1/α).
    let h_n = Mat2::scaled_identity(inv_alpha * p2)
        .add(Mat2::outer(d, inv_alpha * (inv_alpha - 2.0) * p4));

    let scale = p.lambda2 / p.alpha;
    let mut rep = Mat2::ZERO;
    for_each_object(q, ctx, |u, m2, kind| {
        let grad_m = u * 2.0;
        let h_m = match kind {
            ObjectKind::Point => Mat2::scaled_identity(2.0),
            ObjectKind::WallX => Mat2 { xx: 2.0, xy: 0.0, yy: 0.0 },
            ObjectKind::WallY => Mat2 { xx: 0.0, xy: 0.0, yy: 2.0 },
        };
        let inv_m2 = 1.0 / m2;
        let inv_m4 = inv_m2 * inv_m2;
        let inv_m6 = inv_m4 * inv_m2;
        // H[n/m] = Hn/m − sym(∇n⊗∇m)/m² − n·Hm/m² + 2n(∇m⊗∇m)/m³
        let cross = Mat2 {
            xx: 2.0 * grad_n.x * grad_m.x,
            xy: grad_n.x * grad_m.y + grad_n.y * grad_m.x,
            yy: 2.0 * grad_n.y * grad_m.y,
        };
        rep = rep
            .add(Mat2 {
                xx: h_n.xx * inv_m2,
                xy: h_n.xy * inv_m2,
                yy: h_n.yy * inv_m2,
            })
            .add(Mat2 {
                xx: -cross.xx * inv_m4,
                xy: -cross.xy * inv_m4,
                yy: -cross.yy * inv_m4,
            })
            .add(Mat2 {
                xx: -p0 * h_m.xx * inv_m4,
                xy: -p0 * h_m.xy * inv_m4,
                yy: -p0 * h_m.yy * inv_m4,
            })
            .add(Mat2::outer(grad_m, 2.0 * p0 * inv_m6));
    })?;
    h = h.add(Mat2 {
        xx: rep.xx * scale,
        xy: rep.xy * scale,
        yy: rep.yy * scale,
    });
    Ok(h)
}

/// Attraction kernel ω(q) = β‖q − qᵗ‖.
pub fn omega(q: Vec2, qt: Vec2, beta: f64) -> f64 {
    beta * q.dist(qt)
}

/// Gradient of the kernel: β·(q−qᵗ)/‖q−qᵗ‖, constant norm β away from the
/// target. At the target the kernel is non-differentiable; the zero vector is
/// returned with the `converged` flag set.
pub fn grad_omega(q: Vec2, qt: Vec2, beta: f64) -> (Vec2, bool) {
    match (q - qt).normalized() {
        Some(unit) => (unit * beta, false),
        None => (Vec2::ZERO, true),
    }
}

/// The meta field: ψ outside the confinement region, ω strictly inside it.
/// Exactly one branch is active; points at distance exactly `r` take the
/// planning branch.
pub fn mnf(q: Vec2, ctx: &FieldContext, pred: &PhasePredicate) -> Result<(f64, Phase), FieldError> {
    if pred.inside(q) {
        Ok((omega(q, pred.target, ctx.params.beta), Phase::Kernel))
    } else {
        Ok((psi(q, ctx)?, Phase::Planning))
    }
}

/// Obstacle product term of the baseline field: each object contributes a
/// smooth factor in (0, 1] that vanishes on the object surface and saturates
/// to 1 outside the influence radius. Returns (product, Σ per-object gradient
/// weights) when gradients are requested.
fn dnf_beta(q: Vec2, ctx: &FieldContext, with_grad: bool) -> Result<(f64, Vec2), FieldError> {
    let d = ctx.workspace.diagonal();
    let influence = ctx.dnf.influence_frac * d;
    let inv_r2 = 1.0 / (influence * influence);
    let mut product = 1.0;
    let mut grad_log = Vec2::ZERO;

    let mut visit = |o: Vec2, rho: f64| -> Result<(), FieldError> {
        let u = q - o;
        let surface = u.norm() - rho;
        if surface < SINGULARITY_GUARD {
            return Err(FieldError::Singularity { q, object: o });
        }
        let x = (u.norm_sq() - rho * rho) * inv_r2;
        let e = (-x).exp();
        let factor = 1.0 - e;
        product *= factor;
        if with_grad {
            // ∇log factor = (e/(1−e)) ∇x, ∇x = 2u/R²
            grad_log += u * (2.0 * inv_r2 * e / factor);
        }
        Ok(())
    };

    if ctx.peer_repulsion {
        for p in &ctx.peers {
            visit(p.position, 0.0)?;
        }
    }
    for o in &ctx.obstacles {
        visit(o.center, o.radius)?;
    }
    for w in ctx.workspace.wall_projections(q) {
        visit(w, 0.0)?;
    }
    Ok((product, grad_log * product))
}

/// Navigation-function baseline used only for convergence comparison:
/// γ(q)/(γ(q)^k + β(q))^(1/k) with γ the squared target distance normalized
/// by the workspace diagonal and β the smooth obstacle product of
/// [`dnf_beta`]. Zero at the target, tends to 1 on object boundaries.
pub fn dnf_baseline(q: Vec2, ctx: &FieldContext) -> Result<f64, FieldError> {
    let (beta, _) = dnf_beta(q, ctx, false)?;
    let d2 = ctx.workspace.diagonal().powi(2);
    let gamma = q.dist_sq(ctx.target) / d2;
    let k = ctx.dnf.exponent_k as f64;
    let s = gamma.powf(k) + beta;
    Ok(gamma / s.powf(1.0 / k))
}

/// Analytic gradient of [`dnf_baseline`]:
/// S^(−1/k−1)·[β∇γ − (γ/k)∇β].
pub fn grad_dnf_baseline(q: Vec2, ctx: &FieldContext) -> Result<Vec2, FieldError> {
    let (beta, grad_beta) = dnf_beta(q, ctx, true)?;
    let d2 = ctx.workspace.diagonal().powi(2);
    let dvec = q - ctx.target;
    let gamma = dvec.norm_sq() / d2;
    let grad_gamma = dvec * (2.0 / d2);
    let k = ctx.dnf.exponent_k as f64;
    let s = gamma.powf(k) + beta;
    let front = s.powf(-1.0 / k - 1.0);
    Ok((grad_gamma * beta - grad_beta * (gamma / k)) * front)
}

/// Central-difference gradient of an arbitrary scalar field; the independent
/// oracle used to check the analytic gradients.
pub fn finite_difference_gradient<E>(
    mut f: impl FnMut(Vec2) -> Result<f64, E>,
    q: Vec2,
    h: f64,
) -> Result<Vec2, E> {
    let fx1 = f(Vec2::new(q.x + h, q.y))?;
    let fx0 = f(Vec2::new(q.x - h, q.y))?;
    let fy1 = f(Vec2::new(q.x, q.y + h))?;
    let fy0 = f(Vec2::new(q.x, q.y - h))?;
    Ok(Vec2::new((fx1 - fx0) / (2.0 * h), (fy1 - fy0) / (2.0 * h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Agent, PotentialParams, Scenario};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(l1: f64, l2: f64, l3: f64, alpha: f64) -> PotentialParams {
        PotentialParams { lambda1: l1, lambda2: l2, lambda3: l3, alpha, beta: 10.0, gamma: 0.05 }
    }

    /// Single-agent context with a huge workspace so the wall terms are
    /// negligible (they cannot be removed: the walls are part of the model).
    fn lone_context(l1: f64, l2: f64, l3: f64, alpha: f64, target: Vec2) -> FieldContext {
        FieldContext {
            subject: 0,
            target,
            peers: Vec::new(),
            obstacles: Vec::new(),
            workspace: Workspace::new(1e9, 1e9),
            params: params(l1, l2, l3, alpha),
            dnf: DnfParams::default(),
            peer_repulsion: true,
        }
    }

    fn two_agent_scenario() -> Scenario {
        Scenario {
            workspace: Workspace::new(30.0, 15.0),
            params: params(0.4, 12.0, 0.001, 3.0),
            agents: vec![
                Agent { id: 0, q0: Vec2::new(3.0, 3.0), qt: Vec2::new(26.0, 11.0), coalition: 0 },
                Agent { id: 1, q0: Vec2::new(5.0, 12.0), qt: Vec2::new(24.0, 4.0), coalition: 0 },
                Agent { id: 2, q0: Vec2::new(15.0, 8.0), qt: Vec2::new(4.0, 9.0), coalition: 1 },
            ],
            obstacles: vec![
                Obstacle { id: 0, center: Vec2::new(12.0, 6.0), radius: 0.0 },
                Obstacle { id: 1, center: Vec2::new(20.0, 10.0), radius: 0.4 },
            ],
        }
    }

    #[test]
    fn psi_vanishes_at_target() {
        let ctx = FieldContext::for_agent(&two_agent_scenario(), 0).unwrap();
        let v = psi(ctx.target, &ctx).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn psi_hand_computed_single_obstacle() {
        // λ₁=1, λ₂=1, λ₃=0, α=2, q=(1,0), qᵗ=(0,0), obstacle at (2,0):
        // 1·1 + (1/2)·(1^(1/2)/1²) = 1.5, with walls pushed to negligible
        // distance (their 1/m² contribution is ~1e-18 relative).
        let mut ctx = lone_context(1.0, 1.0, 0.0, 2.0, Vec2::new(0.0, 0.0));
        ctx.obstacles.push(Obstacle { id: 0, center: Vec2::new(2.0, 0.0), radius: 0.0 });
        // Shift the scene to the middle of the huge workspace.
        let mid = Vec2::new(5e8, 5e8);
        ctx.target = mid;
        ctx.obstacles[0].center = mid + Vec2::new(2.0, 0.0);
        let v = psi(mid + Vec2::new(1.0, 0.0), &ctx).unwrap();
        assert!((v - 1.5).abs() < 1e-9, "psi = {v}");
    }

    #[test]
    fn associative_term_vanishes_when_allies_parked() {
        // Allies at their targets: the associative term is exactly zero and
        // ψ is attraction plus repulsion only.
        let mut scenario = two_agent_scenario();
        for a in &mut scenario.agents[1..] {
            a.q0 = a.qt;
        }
        scenario.agents[2].coalition = 0;
        let positions: Vec<Vec2> = scenario.agents.iter().map(|a| a.q0).collect();
        let ctx = FieldContext::for_agent_with_positions(&scenario, 0, &positions).unwrap();
        assert_eq!(ctx.ally_influence(), 0.0);
        let mut no_assoc = ctx.clone();
        no_assoc.params.lambda3 = 0.0;
        let q = Vec2::new(10.0, 10.0);
        assert_eq!(psi(q, &ctx).unwrap(), psi(q, &no_assoc).unwrap());
    }

    #[test]
    fn psi_reduces_to_pure_quadratic() {
        // λ₃ = 0 and empty obstacle/peer sets with walls pushed to
        // negligible distance: the field is λ₁‖q−qᵗ‖².
        let ctx = lone_context(0.7, 5.0, 0.0, 3.0, Vec2::new(5e8, 5e8));
        let q = ctx.target + Vec2::new(3.0, -4.0);
        let v = psi(q, &ctx).unwrap();
        let quad = ctx.params.lambda1 * 25.0;
        assert!((v - quad).abs() <= 1e-12 * quad);
    }

    #[test]
    fn psi_nonnegative_at_random_points() {
        let scenario = two_agent_scenario();
        let ctx = FieldContext::for_agent(&scenario, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let q = Vec2::new(rng.random_range(0.1..29.9), rng.random_range(0.1..14.9));
            if ctx.nearest_object_distance(q) < 1e-3 {
                continue;
            }
            assert!(psi(q, &ctx).unwrap() >= 0.0);
        }
    }

    #[test]
    fn psi_errors_on_object_position() {
        let ctx = FieldContext::for_agent(&two_agent_scenario(), 0).unwrap();
        let on_obstacle = ctx.obstacles[0].center;
        assert!(matches!(psi(on_obstacle, &ctx), Err(FieldError::Singularity { .. })));
    }

    #[test]
    fn grad_psi_zero_at_target() {
        let ctx = FieldContext::for_agent(&two_agent_scenario(), 0).unwrap();
        let g = grad_psi(ctx.target, &ctx).unwrap();
        assert_eq!(g, Vec2::ZERO);
    }

    fn sample_clear_points(ctx: &FieldContext, n: usize, seed: u64, margin: f64) -> Vec<Vec2> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ws = ctx.workspace;
        let mut out = Vec::new();
        while out.len() < n {
            let q = Vec2::new(
                rng.random_range(margin..ws.width - margin),
                rng.random_range(margin..ws.height - margin),
            );
            let clear_of_surfaces =
                ctx.obstacles.iter().all(|o| o.surface_distance(q) > margin);
            if ctx.nearest_object_distance(q) > margin
                && clear_of_surfaces
                && q.dist(ctx.target) > margin
            {
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn grad_psi_matches_finite_differences() {
        let scenario = two_agent_scenario();
        for id in [0, 1, 2] {
            let ctx = FieldContext::for_agent(&scenario, id).unwrap();
            let h = 1e-6 * ctx.workspace.diagonal();
            for q in sample_clear_points(&ctx, 200, 100 + id as u64, 0.1) {
                let analytic = grad_psi(q, &ctx).unwrap();
                let fd = finite_difference_gradient(|p| psi(p, &ctx), q, h).unwrap();
                let rel = (analytic - fd).norm() / fd.norm().max(1e-12);
                assert!(rel < 1e-5, "rel {rel} at ({}, {})", q.x, q.y);
            }
        }
    }

    #[test]
    fn hessian_psi_matches_gradient_differences() {
        let ctx = FieldContext::for_agent(&two_agent_scenario(), 0).unwrap();
        let h = 1e-5;
        for q in sample_clear_points(&ctx, 100, 7, 0.2) {
            let hess = hessian_psi(q, &ctx).unwrap();
            let gx1 = grad_psi(Vec2::new(q.x + h, q.y), &ctx).unwrap();
            let gx0 = grad_psi(Vec2::new(q.x - h, q.y), &ctx).unwrap();
            let gy1 = grad_psi(Vec2::new(q.x, q.y + h), &ctx).unwrap();
            let gy0 = grad_psi(Vec2::new(q.x, q.y - h), &ctx).unwrap();
            let fd = Mat2 {
                xx: (gx1.x - gx0.x) / (2.0 * h),
                xy: 0.5 * ((gx1.y - gx0.y) + (gy1.x - gy0.x)) / (2.0 * h),
                yy: (gy1.y - gy0.y) / (2.0 * h),
            };
            let scale = fd.xx.abs().max(fd.yy.abs()).max(fd.xy.abs()).max(1e-9);
            assert!((hess.xx - fd.xx).abs() / scale < 1e-4, "xx at ({}, {})", q.x, q.y);
            assert!((hess.xy - fd.xy).abs() / scale < 1e-4, "xy at ({}, {})", q.x, q.y);
            assert!((hess.yy - fd.yy).abs() / scale < 1e-4, "yy at ({}, {})", q.x, q.y);
        }
    }

    #[test]
    fn grad_psi_high_alpha_limit() {
        // As α → ∞ the gradient tends to (q−qᵗ)·[2λ₁ + 2λ₃·Σ_k‖q_k−q_k^t‖²].
        let scenario = two_agent_scenario();
        let ctx = FieldContext::for_agent(&scenario, 0).unwrap().with_alpha(1e6);
        let a = ctx.ally_influence();
        for q in sample_clear_points(&ctx, 20, 42, 0.5) {
            let g = grad_psi(q, &ctx).unwrap();
            let limit = (q - ctx.target) * (2.0 * ctx.params.lambda1 + 2.0 * ctx.params.lambda3 * a);
            let rel = (g - limit).norm() / limit.norm().max(1e-12);
            assert!(rel < 1e-3, "rel {rel}");
        }
    }

    #[test]
    fn associative_term_strictly_increases_with_ally_distance() {
        let scenario = two_agent_scenario();
        let mut positions: Vec<Vec2> = scenario.agents.iter().map(|a| a.q0).collect();
        let q = Vec2::new(8.0, 4.0);
        let ctx = FieldContext::for_agent_with_positions(&scenario, 0, &positions).unwrap();
        let base = psi(q, &ctx).unwrap();
        // Move ally 1 farther from its target.
        positions[1] = Vec2::new(2.0, 14.0);
        let ctx2 = FieldContext::for_agent_with_positions(&scenario, 0, &positions).unwrap();
        assert!(ctx2.ally_influence() > ctx.ally_influence());
        let moved = psi(q, &ctx2).unwrap();
        assert!(moved > base);
    }

    #[test]
    fn omega_examples() {
        let qt = Vec2::new(1.0, 1.0);
        assert_eq!(omega(qt, qt, 5.0), 0.0);
        assert_eq!(omega(Vec2::new(1.0, 3.0), qt, 10.0), 20.0);
        // Homogeneity in β.
        let q = Vec2::new(4.0, 5.0);
        assert_eq!(omega(q, qt, 6.0), 3.0 * omega(q, qt, 2.0));
    }

    #[test]
    fn grad_omega_unit_direction_and_flag() {
        let qt = Vec2::new(0.0, 0.0);
        let (g, done) = grad_omega(Vec2::new(3.0, 4.0), qt, 1.0);
        assert!(!done);
        assert!((g - Vec2::new(0.6, 0.8)).norm() < 1e-15);
        let (gz, done) = grad_omega(qt, qt, 1.0);
        assert!(done);
        assert_eq!(gz, Vec2::ZERO);

        // Constant norm β away from the target, FD agreement.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let q = Vec2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            if q.dist(qt) < 0.3 {
                continue;
            }
            let beta = 7.5;
            let (g, _) = grad_omega(q, qt, beta);
            assert!((g.norm() - beta).abs() < 1e-12);
            let fd = finite_difference_gradient::<()>(|p| Ok(omega(p, qt, beta)), q, 1e-7).unwrap();
            assert!((g - fd).norm() / beta < 1e-5);
        }
    }

    #[test]
    fn mnf_branch_selection() {
        let scenario = two_agent_scenario();
        let ctx = FieldContext::for_agent(&scenario, 0).unwrap();
        let r = 2.0;
        let pred = PhasePredicate { target: ctx.target, radius: r };
        let dir = Vec2::new(-1.0, 0.0);

        let far = ctx.target + dir * (2.0 * r);
        let (v, phase) = mnf(far, &ctx, &pred).unwrap();
        assert_eq!(phase, Phase::Planning);
        assert_eq!(v, psi(far, &ctx).unwrap());

        let near = ctx.target + dir * (r / 2.0);
        let (v, phase) = mnf(near, &ctx, &pred).unwrap();
        assert_eq!(phase, Phase::Kernel);
        assert!((v - ctx.params.beta * r / 2.0).abs() < 1e-12);

        // Exactly on the boundary: strict inequality keeps the planning branch.
        let boundary = ctx.target + dir * r;
        let (_, phase) = mnf(boundary, &ctx, &pred).unwrap();
        assert_eq!(phase, Phase::Planning);
    }

    #[test]
    fn mnf_branch_is_rotation_invariant() {
        // The branch depends only on distance to the target.
        let scenario = two_agent_scenario();
        let ctx = FieldContext::for_agent(&scenario, 0).unwrap();
        let pred = PhasePredicate { target: ctx.target, radius: 1.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let rho: f64 = rng.random_range(0.01..5.0);
            let theta1: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let theta2: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let q1 = pred.target + Vec2::new(theta1.cos(), theta1.sin()) * rho;
            let q2 = pred.target + Vec2::new(theta2.cos(), theta2.sin()) * rho;
            assert_eq!(pred.inside(q1), pred.inside(q2));
        }
    }

    #[test]
    fn dnf_zero_at_target_and_maximal_on_boundary() {
        let scenario = two_agent_scenario();
        let ctx = FieldContext::for_agent(&scenario, 0).unwrap();
        assert_eq!(dnf_baseline(ctx.target, &ctx).unwrap(), 0.0);

        // Approaching an obstacle surface the value tends to 1.
        let o = ctx.obstacles[1];
        let toward = (Vec2::new(10.0, 8.0) - o.center).normalized().unwrap();
        let close = o.center + toward * (o.radius + 1e-6);
        let v = dnf_baseline(close, &ctx).unwrap();
        assert!(v > 0.999, "v = {v}");
        assert!(matches!(
            dnf_baseline(o.center + toward * o.radius, &ctx),
            Err(FieldError::Singularity { .. })
        ));
    }

    #[test]
    fn grad_dnf_matches_finite_differences() {
        let scenario = two_agent_scenario();
        let ctx = FieldContext::for_agent(&scenario, 2).unwrap();
        let h = 1e-6 * ctx.workspace.diagonal();
        for q in sample_clear_points(&ctx, 200, 77, 0.1) {
            let analytic = grad_dnf_baseline(q, &ctx).unwrap();
            let fd = finite_difference_gradient(|p| dnf_baseline(p, &ctx), q, h).unwrap();
            let rel = (analytic - fd).norm() / fd.norm().max(1e-15);
            assert!(rel < 1e-5, "rel {rel} at ({}, {})", q.x, q.y);
        }
    }
}
