//! Property tests for the structural invariants: serialization identity,
//! translation behavior, field sign/zero properties, and branch exclusivity.

use mnf::*;
use proptest::prelude::*;

fn position(width: f64, height: f64) -> impl Strategy<Value = Vec2> {
    (0.05 * width..0.95 * width, 0.05 * height..0.95 * height)
        .prop_map(|(x, y)| Vec2::new(x, y))
}

fn arb_scenario() -> impl Strategy<Value = Scenario> {
    let width = 30.0;
    let height = 15.0;
    let params = (0.1f64..2.0, 1.0f64..20.0, 0.0f64..0.01, 1.5f64..10.0).prop_map(
        |(lambda1, lambda2, lambda3, alpha)| PotentialParams {
            lambda1,
            lambda2,
            lambda3,
            alpha,
            beta: 10.0,
            gamma: 0.05,
        },
    );
    let agents = proptest::collection::vec((position(width, height), position(width, height)), 1..6)
        .prop_map(|pairs| {
            pairs
                .into_iter()
                .enumerate()
                .map(|(i, (q0, qt))| Agent { id: i as u32, q0, qt, coalition: (i % 2) as u32 })
                .collect::<Vec<_>>()
        });
    let obstacles = proptest::collection::vec((position(width, height), 0.0f64..0.4), 0..4)
        .prop_map(|entries| {
            entries
                .into_iter()
                .enumerate()
                .map(|(j, (center, radius))| Obstacle { id: j as u32, center, radius })
                .collect::<Vec<_>>()
        });
    (params, agents, obstacles).prop_map(move |(params, agents, obstacles)| Scenario {
        workspace: Workspace::new(width, height),
        params,
        agents,
        obstacles,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Serializing and re-parsing a scenario is the identity on every
    /// numeric field, bit for bit.
    #[test]
    fn scenario_toml_round_trip(scenario in arb_scenario()) {
        let text = scenario.to_toml_string().unwrap();
        let back = Scenario::from_toml_str(&text).unwrap();
        prop_assert_eq!(scenario, back);
    }

    /// A valid scenario stays valid under a rigid translation that keeps
    /// every position strictly inside the workspace.
    #[test]
    fn validity_survives_translation(
        scenario in arb_scenario(),
        dx in -1.0f64..1.0,
        dy in -0.7f64..0.7,
    ) {
        prop_assume!(validate_scenario(&scenario).is_ok());
        let moved = scenario.translated(Vec2::new(dx, dy));
        let inside = moved
            .agents
            .iter()
            .flat_map(|a| [a.q0, a.qt])
            .chain(moved.obstacles.iter().map(|o| o.center))
            .all(|p| moved.workspace.contains_strict(p));
        prop_assume!(inside);
        // Translation can change target/obstacle containment only by the
        // relative geometry it preserves, so validity is unchanged.
        prop_assert!(validate_scenario(&moved).is_ok());
    }

    /// ψ is non-negative wherever it is defined and exactly zero at the
    /// subject's target.
    #[test]
    fn psi_nonnegative_and_zero_at_target(
        scenario in arb_scenario(),
        x in 0.5f64..29.5,
        y in 0.5f64..14.5,
    ) {
        prop_assume!(validate_scenario(&scenario).is_ok());
        let ctx = FieldContext::for_agent(&scenario, scenario.agents[0].id).unwrap();
        prop_assert_eq!(psi(ctx.target, &ctx).unwrap(), 0.0);
        let q = Vec2::new(x, y);
        prop_assume!(ctx.nearest_object_distance(q) > 1e-3);
        prop_assert!(psi(q, &ctx).unwrap() >= 0.0);
    }

    /// The kernel is homogeneous in its factor and its gradient has constant
    /// norm β away from the target.
    #[test]
    fn kernel_homogeneity_and_constant_speed(
        qx in -10.0f64..10.0,
        qy in -10.0f64..10.0,
        beta in 0.1f64..50.0,
        c in 0.1f64..10.0,
    ) {
        let q = Vec2::new(qx, qy);
        let qt = Vec2::new(0.0, 0.0);
        let scaled = omega(q, qt, beta * c);
        prop_assert!((scaled - c * omega(q, qt, beta)).abs() <= 1e-12 * scaled.abs().max(1.0));
        prop_assume!(q.dist(qt) > 1e-6);
        let (g, at_target) = grad_omega(q, qt, beta);
        prop_assert!(!at_target);
        prop_assert!((g.norm() - beta).abs() < 1e-9 * beta);
    }

    /// Exactly one branch of the combined field is active, decided only by
    /// the distance to the target.
    #[test]
    fn mnf_branch_exclusivity(
        scenario in arb_scenario(),
        radius in 0.1f64..8.0,
        rho in 0.0f64..12.0,
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        prop_assume!(validate_scenario(&scenario).is_ok());
        let ctx = FieldContext::for_agent(&scenario, scenario.agents[0].id).unwrap();
        let pred = PhasePredicate { target: ctx.target, radius };
        let q = ctx.target + Vec2::new(theta.cos(), theta.sin()) * rho;
        prop_assume!(ctx.workspace.contains_strict(q));
        prop_assume!(ctx.nearest_object_distance(q) > 1e-3);
        let (value, phase) = mnf(q, &ctx, &pred).unwrap();
        if rho < radius {
            prop_assert_eq!(phase, Phase::Kernel);
            prop_assert!((value - ctx.params.beta * rho).abs() < 1e-9 * value.max(1.0));
        } else {
            prop_assert_eq!(phase, Phase::Planning);
            prop_assert_eq!(value, psi(q, &ctx).unwrap());
        }
    }
}
