//! Numerical criticality analysis of the confined potential: enumerating the
//! critical set, extracting the boundary critical point, the confinement
//! radius, and solving for the smallest confining factor α†.
//!
//! Enumeration is grid-seeded and therefore resolution-limited: a critical
//! point whose attraction basin falls below the seed spacing can be missed.
//! The grid density knob controls this trade-off; completeness is explicitly
//! not guaranteed.

use crate::geom::Vec2;
use crate::potentials::{grad_psi, hessian_psi, FieldContext, FieldError};
use crate::scene::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Tuning for critical-set enumeration and the α† solver. Defaults follow the
/// documented procedure; everything is overridable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalityConfig {
    /// Seeds per axis for the enumeration grid.
    pub grid_density: usize,
    /// Seed of the deterministic grid jitter stream.
    pub jitter_seed: u64,
    /// Gradient-norm acceptance threshold, relative to the context's
    /// gradient scale.
    pub grad_tol_rel: f64,
    /// Deduplication radius, relative to the workspace diagonal.
    pub dedupe_rel: f64,
    /// Iteration budget per seed refinement.
    pub max_refine_iters: usize,
    /// Upper bound of the α search.
    pub alpha_cap: f64,
    /// Relative width at which the α bisection stops.
    pub alpha_rel_tol: f64,
    /// Relative slack of the geometric confinement predicate.
    pub confinement_tol_rel: f64,
    /// Width of the neutralization layer around repulsive objects, relative
    /// to the workspace diagonal. Every repulsive singularity keeps a saddle
    /// pinned just outside itself at any finite α (the layer shrinks like
    /// α^(-1/3) but never vanishes), so the confinement predicate treats
    /// critical points inside this layer as neutralized by their object
    /// rather than as confinement violations. The default matches the
    /// generator's minimum-separation scale.
    pub neutralization_rel: f64,
    /// Whether other agents' targets count as objects for the confinement
    /// radius. Converged peers park on their targets, so this defaults on.
    pub include_agent_targets: bool,
}

impl Default for CriticalityConfig {
    fn default() -> Self {
        CriticalityConfig {
            grid_density: 80,
            jitter_seed: 7,
            grad_tol_rel: 1e-8,
            dedupe_rel: 1e-4,
            max_refine_iters: 40,
            alpha_cap: 1e6,
            alpha_rel_tol: 1e-3,
            confinement_tol_rel: 1e-6,
            neutralization_rel: 0.02,
            include_agent_targets: true,
        }
    }
}

impl CriticalityConfig {
    /// Absolute neutralization-layer width for a context's workspace.
    pub fn neutralization_radius(&self, ctx: &FieldContext) -> f64 {
        self.neutralization_rel * ctx.workspace.diagonal()
    }
}

/// All points where ‖∇ψ‖ fell below the tolerance, plus the target itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalSet {
    /// The target is always `points[0]`.
    pub points: Vec<Vec2>,
    pub target: Vec2,
    /// Gradient-norm threshold used for acceptance (absolute).
    pub tolerance: f64,
    /// Pairwise separation radius of the reported points (absolute).
    pub dedupe_radius: f64,
}

impl CriticalSet {
    pub fn non_target_points(&self) -> &[Vec2] {
        &self.points[1..]
    }

    /// Largest distance from a non-target critical point to the target;
    /// zero when the non-target set is empty.
    pub fn max_non_target_distance(&self) -> f64 {
        self.non_target_points()
            .iter()
            .map(|p| p.dist(self.target))
            .fold(0.0, f64::max)
    }
}

/// Diagnostic record of one α† solve.
///
/// The boundary fields describe the live critical structure: enumerated
/// points that sit inside an object's neutralization layer are excluded from
/// the boundary-point search, though they remain listed in
/// `critical_points`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalityReport {
    pub alpha_dagger: f64,
    pub confinement_radius: f64,
    /// ‖qᵗ − q⋆‖; zero when no live non-target critical point was found.
    pub critical_radius: f64,
    pub boundary_cp: Option<Vec2>,
    pub critical_vector: Option<Vec2>,
    /// Scalarized residual of the confinement condition at α†, projected on
    /// the unit critical vector. Diagnostic only; the geometric predicate is
    /// authoritative.
    pub residual: f64,
    pub target: Vec2,
    pub gradient_tolerance: f64,
    pub neutralization_radius: f64,
    pub critical_points: Vec<Vec2>,
}

impl CriticalityReport {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("no confining alpha at or below cap {cap}: {} critical point(s) outside radius {radius} of target ({}, {})",
            offending.len(), target.x, target.y)]
    Unconfinable { cap: f64, radius: f64, target: Vec2, offending: Vec<Vec2> },
    #[error("confinement radius must be positive, got {0}")]
    NonPositiveRadius(f64),
}

/// Distance from `qt` to the nearest object surface: obstacle surfaces, the
/// four walls, and (when enabled) the other agents' targets. Targets
/// coincident with `qt` are skipped so an agent never blocks itself.
pub fn confinement_radius(qt: Vec2, scenario: &Scenario, include_agent_targets: bool) -> f64 {
    let mut r = scenario.workspace.wall_clearance(qt);
    for o in &scenario.obstacles {
        r = r.min(o.surface_distance(qt));
    }
    if include_agent_targets {
        for a in &scenario.agents {
            let d = qt.dist(a.qt);
            if d > 0.0 {
                r = r.min(d);
            }
        }
    }
    r
}

/// Deterministic jittered grid over the workspace interior.
fn seed_grid(ctx: &FieldContext, cfg: &CriticalityConfig) -> Vec<Vec2> {
    let g = cfg.grid_density.max(1);
    let ws = ctx.workspace;
    let dx = ws.width / g as f64;
    let dy = ws.height / g as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.jitter_seed);
    let mut seeds = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            let jx: f64 = rng.random_range(-0.25..0.25);
            let jy: f64 = rng.random_range(-0.25..0.25);
            seeds.push(Vec2::new(
                (i as f64 + 0.5 + jx) * dx,
                (j as f64 + 0.5 + jy) * dy,
            ));
        }
    }
    seeds
}

/// Damped Newton refinement of one seed toward ∇ψ = 0, accepting steps that
/// decrease the gradient norm. Returns the converged point, or `None` when
/// the seed diverges, leaves the workspace, runs out of budget, or hits a
/// singularity.
fn refine_seed(
    seed: Vec2,
    ctx: &FieldContext,
    cfg: &CriticalityConfig,
    tol: f64,
) -> Option<Vec2> {
    let ws = ctx.workspace;
    let g = cfg.grid_density.max(1) as f64;
    // Step clip: one cell diagonal, so refinements stay local to their seed.
    let clip = (ws.width / g).hypot(ws.height / g);
    let base_mu = ctx.gradient_scale() / ws.diagonal();

    let mut q = seed;
    let mut grad = grad_psi(q, ctx).ok()?;
    if !grad.is_finite() {
        return None;
    }
    let mut gnorm = grad.norm();
    let mut mu = 0.0;
    for _ in 0..cfg.max_refine_iters {
        if gnorm < tol {
            return ws.contains_strict(q).then_some(q);
        }
        let hess = hessian_psi(q, ctx).ok()?;
        let mut accepted = false;
        let mut mu_try = mu;
        for _ in 0..8 {
            if let Some(raw) = hess.solve_damped(-grad, mu_try) {
                let norm = raw.norm();
                let step = if norm > clip { raw * (clip / norm) } else { raw };
                let candidate = q + step;
                if let Ok(g_new) = grad_psi(candidate, ctx) {
                    let n = g_new.norm();
                    if n.is_finite() && n < gnorm {
                        q = candidate;
                        grad = g_new;
                        gnorm = n;
                        mu = mu_try * 0.25;
                        accepted = true;
                        break;
                    }
                }
            }
            mu_try = if mu_try == 0.0 { base_mu } else { mu_try * 10.0 };
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Lexicographic comparison used for deterministic tie-breaking.
fn lex_less(a: Vec2, b: Vec2) -> bool {
    (a.x, a.y) < (b.x, b.y)
}

fn dedupe(candidates: &mut Vec<Vec2>, target: Vec2, radius: f64) -> Vec<Vec2> {
    candidates.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    let mut kept: Vec<Vec2> = Vec::new();
    'outer: for &c in candidates.iter() {
        if c.dist(target) < radius {
            continue;
        }
        for &k in &kept {
            if c.dist(k) < radius {
                continue 'outer;
            }
        }
        kept.push(c);
    }
    kept
}

/// Enumerate the critical set of ψ for the given context: jittered uniform
/// grid seeds, damped-Newton refinement, gradient-norm acceptance,
/// deduplication, and unconditional insertion of the target.
pub fn find_critical_set(ctx: &FieldContext, cfg: &CriticalityConfig) -> CriticalSet {
    let tol = cfg.grad_tol_rel * ctx.gradient_scale();
    let dedupe_radius = cfg.dedupe_rel * ctx.workspace.diagonal();
    let mut candidates: Vec<Vec2> = seed_grid(ctx, cfg)
        .into_iter()
        .filter_map(|s| refine_seed(s, ctx, cfg, tol))
        .collect();
    let kept = dedupe(&mut candidates, ctx.target, dedupe_radius);
    let mut points = Vec::with_capacity(kept.len() + 1);
    points.push(ctx.target);
    points.extend(kept);
    CriticalSet { points, target: ctx.target, tolerance: tol, dedupe_radius }
}

/// The non-target critical point farthest from the target; `None` when the
/// non-target set is empty. Distance ties within the dedupe radius resolve
/// to the lexicographically smallest coordinates.
pub fn boundary_cp(cs: &CriticalSet) -> Option<Vec2> {
    let non_target = cs.non_target_points();
    let max = non_target
        .iter()
        .map(|p| p.dist(cs.target))
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut best: Option<Vec2> = None;
    for &p in non_target {
        if p.dist(cs.target) >= max - cs.dedupe_radius {
            best = match best {
                Some(b) if lex_less(b, p) => Some(b),
                _ => Some(p),
            };
        }
    }
    best
}

/// Confinement predicate for one trial α: no enumerated non-target critical
/// point may lie beyond r·(1 + tol) unless it sits inside an object's
/// neutralization layer. Seeds are walked nearest-object-first so a violating
/// critical point is usually found fast.
fn is_confining(
    ctx: &FieldContext,
    alpha: f64,
    radius: f64,
    seeds: &[Vec2],
    cfg: &CriticalityConfig,
) -> bool {
    let trial_ctx = ctx.with_alpha(alpha);
    let tol = cfg.grad_tol_rel * trial_ctx.gradient_scale();
    let dedupe_radius = cfg.dedupe_rel * trial_ctx.workspace.diagonal();
    let neutral = cfg.neutralization_radius(ctx);
    let limit = radius * (1.0 + cfg.confinement_tol_rel);
    for &seed in seeds {
        if let Some(p) = refine_seed(seed, &trial_ctx, cfg, tol) {
            if p.dist(ctx.target) > limit
                && p.dist(ctx.target) >= dedupe_radius
                && ctx.nearest_object_distance(p) > neutral
            {
                return false;
            }
        }
    }
    true
}

/// Scalarized residual of the confinement condition at (α, q⋆): the vector
/// equation
/// [2(λ₁+Aλ₃)v]α² − [2λ₂C]αr^(1/α) + [Bλ₂r²v]r^(1/α) = 0
/// projected onto the unit critical vector. A sums ally influence, while B
/// and C sum over obstacles only.
fn confinement_residual(ctx: &FieldContext, alpha: f64, radius: f64, q_star: Vec2) -> f64 {
    let p = &ctx.params;
    let v = ctx.target - q_star;
    let Some(v_hat) = v.normalized() else { return 0.0 };
    let a_term = ctx.ally_influence();
    let mut b = 0.0;
    let mut c = Vec2::ZERO;
    for o in &ctx.obstacles {
        let u = q_star - o.center;
        let n = u.norm();
        if n <= 0.0 {
            continue;
        }
        b += 1.0 / (n * n * n);
        c += u * (1.0 / (n * n * n * n));
    }
    let r_pow = radius.powf(1.0 / alpha);
    let term1 = v * (2.0 * (p.lambda1 + a_term * p.lambda3) * alpha * alpha);
    let term2 = c * (2.0 * p.lambda2 * alpha * r_pow);
    let term3 = v * (b * p.lambda2 * radius * radius * r_pow);
    (term1 - term2 + term3).dot(v_hat)
}

/// Smallest α > 1 (within the cap) whose enumerated critical set satisfies
/// the confinement predicate, found by doubling expansion plus bisection in
/// log α. The returned report re-enumerates the full critical set at α†.
///
/// `hint`, when given, is tried as the first bracket endpoint; warm starts
/// from a neighboring solve cut the trial count roughly in half.
pub fn solve_alpha_dagger_hinted(
    ctx: &FieldContext,
    radius: f64,
    cfg: &CriticalityConfig,
    hint: Option<f64>,
) -> Result<(f64, CriticalityReport), SolveError> {
    if !(radius > 0.0) {
        return Err(SolveError::NonPositiveRadius(radius));
    }
    let alpha_min = 1.0 + 1e-6;
    let mut seeds = seed_grid(ctx, cfg);
    // Nearest-object-first: critical points cluster around repulsive objects,
    // so violations surface early. Ties resolved lexicographically to keep
    // the walk deterministic.
    let mut keyed: Vec<(f64, Vec2)> =
        seeds.drain(..).map(|s| (ctx.nearest_object_distance(s), s)).collect();
    keyed.sort_by(|a, b| {
        (a.0, a.1.x, a.1.y).partial_cmp(&(b.0, b.1.x, b.1.y)).unwrap()
    });
    let seeds: Vec<Vec2> = keyed.into_iter().map(|(_, s)| s).collect();

    let confining = |alpha: f64| is_confining(ctx, alpha, radius, &seeds, cfg);

    let alpha_dagger = if confining(alpha_min) {
        alpha_min
    } else {
        // Bracket: lo never confines, hi does.
        let mut lo = alpha_min;
        let mut hi = None;
        let mut trial = hint.unwrap_or(2.0).max(1.5).min(cfg.alpha_cap);
        loop {
            if confining(trial) {
                hi = Some(trial);
                break;
            }
            lo = trial;
            if trial >= cfg.alpha_cap {
                break;
            }
            trial = (trial * 2.0).min(cfg.alpha_cap);
        }
        let Some(mut hi) = hi else {
            let cs = find_critical_set(&ctx.with_alpha(cfg.alpha_cap), cfg);
            let limit = radius * (1.0 + cfg.confinement_tol_rel);
            let neutral = cfg.neutralization_radius(ctx);
            let offending = cs
                .non_target_points()
                .iter()
                .copied()
                .filter(|p| p.dist(ctx.target) > limit && ctx.nearest_object_distance(*p) > neutral)
                .collect();
            return Err(SolveError::Unconfinable {
                cap: cfg.alpha_cap,
                radius,
                target: ctx.target,
                offending,
            });
        };
        // A hint may confine while values below the expansion start were
        // never probed; tighten lo when possible.
        if lo >= hi {
            lo = alpha_min;
        }
        while hi / lo - 1.0 > cfg.alpha_rel_tol {
            // Bisect in log α: the bracket can span several decades.
            let mid = (lo * hi).sqrt();
            if !(mid > lo && mid < hi) {
                break;
            }
            if confining(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let final_ctx = ctx.with_alpha(alpha_dagger);
    let cs = find_critical_set(&final_ctx, cfg);
    let neutral = cfg.neutralization_radius(ctx);
    let live = CriticalSet {
        points: std::iter::once(cs.target)
            .chain(
                cs.non_target_points()
                    .iter()
                    .copied()
                    .filter(|p| ctx.nearest_object_distance(*p) > neutral),
            )
            .collect(),
        ..cs.clone()
    };
    let q_star = boundary_cp(&live);
    let critical_vector = q_star.map(|p| ctx.target - p);
    let critical_radius = critical_vector.map(|v| v.norm()).unwrap_or(0.0);
    let residual = q_star
        .map(|p| confinement_residual(ctx, alpha_dagger, radius, p))
        .unwrap_or(0.0);
    let report = CriticalityReport {
        alpha_dagger,
        confinement_radius: radius,
        critical_radius,
        boundary_cp: q_star,
        critical_vector,
        residual,
        target: ctx.target,
        gradient_tolerance: cs.tolerance,
        neutralization_radius: neutral,
        critical_points: cs.points,
    };
    Ok((alpha_dagger, report))
}

/// See [`solve_alpha_dagger_hinted`].
pub fn solve_alpha_dagger(
    ctx: &FieldContext,
    radius: f64,
    cfg: &CriticalityConfig,
) -> Result<(f64, CriticalityReport), SolveError> {
    solve_alpha_dagger_hinted(ctx, radius, cfg, None)
}

/// The geometric confinement predicate for tests and diagnostics: true when
/// every enumerated non-target critical point at `alpha` either lies within
/// r·(1 + tol) of the target or is neutralized by an object's layer.
pub fn confinement_holds(
    ctx: &FieldContext,
    alpha: f64,
    radius: f64,
    cfg: &CriticalityConfig,
) -> bool {
    let cs = find_critical_set(&ctx.with_alpha(alpha), cfg);
    let neutral = cfg.neutralization_radius(ctx);
    let limit = radius * (1.0 + cfg.confinement_tol_rel);
    cs.non_target_points()
        .iter()
        .all(|p| p.dist(ctx.target) <= limit || ctx.nearest_object_distance(*p) <= neutral)
}
