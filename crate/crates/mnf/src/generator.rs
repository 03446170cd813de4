//! Random scenario generation at target densities, uniform coalition
//! partitioning, and the benchmark suite definitions.

use crate::geom::Vec2;
use crate::scene::{Agent, Obstacle, PotentialParams, Scenario, Workspace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Placement request: rejection-sampled positions inside the given area with
/// pairwise minimum separation, plus a uniform round-robin coalition
/// partition. Deterministic for a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorSpec {
    pub n_agents: usize,
    pub n_obstacles: usize,
    pub area: (f64, f64),
    pub min_separation: f64,
    pub seed: u64,
    pub coalitions: usize,
}

impl GeneratorSpec {
    /// Default separation: 2% of the workspace diagonal.
    pub fn new(n_agents: usize, n_obstacles: usize, area: (f64, f64), seed: u64) -> Self {
        let diagonal = area.0.hypot(area.1);
        GeneratorSpec {
            n_agents,
            n_obstacles,
            area,
            min_separation: 0.02 * diagonal,
            seed,
            coalitions: 1,
        }
    }

    pub fn with_coalitions(mut self, coalitions: usize) -> Self {
        self.coalitions = coalitions.max(1);
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("infeasible spec: placed {placed} of {needed} points at separation {separation} in {width} x {height}")]
    Infeasible { placed: usize, needed: usize, separation: f64, width: f64, height: f64 },
    #[error("area dimensions must be positive, got {0} x {1}")]
    BadArea(f64, f64),
}

const ATTEMPTS_PER_POINT: usize = 5_000;

/// Rejection-sample obstacle centers, initial positions, and targets, in that
/// order, with pairwise `min_separation` among all placed points and the same
/// margin to the walls.
pub fn generate(spec: &GeneratorSpec, params: PotentialParams) -> Result<Scenario, GenerateError> {
    let (width, height) = spec.area;
    if !(width > 0.0 && height > 0.0) {
        return Err(GenerateError::BadArea(width, height));
    }
    let margin = spec.min_separation;
    let needed = spec.n_obstacles + 2 * spec.n_agents;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut placed: Vec<Vec2> = Vec::with_capacity(needed);

    let place = |rng: &mut ChaCha8Rng, placed: &mut Vec<Vec2>| -> Option<Vec2> {
        for _ in 0..ATTEMPTS_PER_POINT {
            let p = Vec2::new(
                rng.random_range(margin..width - margin),
                rng.random_range(margin..height - margin),
            );
            if placed.iter().all(|&q| q.dist(p) >= spec.min_separation) {
                placed.push(p);
                return Some(p);
            }
        }
        None
    };

    let infeasible = |placed: usize| GenerateError::Infeasible {
        placed,
        needed,
        separation: spec.min_separation,
        width,
        height,
    };

    let mut obstacles = Vec::with_capacity(spec.n_obstacles);
    for j in 0..spec.n_obstacles {
        let center = place(&mut rng, &mut placed).ok_or_else(|| infeasible(placed.len()))?;
        obstacles.push(Obstacle { id: j as u32, center, radius: 0.0 });
    }
    let mut starts = Vec::with_capacity(spec.n_agents);
    for _ in 0..spec.n_agents {
        starts.push(place(&mut rng, &mut placed).ok_or_else(|| infeasible(placed.len()))?);
    }
    let mut agents = Vec::with_capacity(spec.n_agents);
    for (i, q0) in starts.into_iter().enumerate() {
        let qt = place(&mut rng, &mut placed).ok_or_else(|| infeasible(placed.len()))?;
        agents.push(Agent {
            id: i as u32,
            q0,
            qt,
            coalition: (i % spec.coalitions.max(1)) as u32,
        });
    }

    Ok(Scenario { workspace: Workspace::new(width, height), params, agents, obstacles })
}

/// One benchmark entry: a placement spec and the potential setup to run it
/// with.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub label: String,
    pub generator: GeneratorSpec,
    pub params: PotentialParams,
}

fn suite_params(lambda2: f64, lambda3: f64) -> PotentialParams {
    PotentialParams {
        lambda1: 0.4,
        lambda2,
        lambda3,
        // Placeholder; the coordinator solves α† per agent before motion.
        alpha: 2.0,
        beta: 10.0,
        gamma: 0.05,
    }
}

const TOTAL_ASSOC_LAMBDAS: [(f64, f64); 4] =
    [(12.0, 0.001), (13.0, 0.0005), (14.0, 0.0002), (15.0, 0.0001)];

fn total_association_suite(sizes: [(usize, usize, (f64, f64)); 4], seed: u64) -> Vec<SuiteEntry> {
    sizes
        .iter()
        .zip(TOTAL_ASSOC_LAMBDAS)
        .enumerate()
        .map(|(i, (&(agents, obstacles, area), (l2, l3)))| SuiteEntry {
            label: format!("total-{}x{}", agents, obstacles),
            generator: GeneratorSpec::new(agents, obstacles, area, seed.wrapping_add(i as u64)),
            params: suite_params(l2, l3),
        })
        .collect()
}

/// The four total-association benchmark columns: rising density, falling
/// associative factor.
pub fn table1_suite(seed: u64) -> Vec<SuiteEntry> {
    total_association_suite(
        [
            (20, 12, (30.0, 15.0)),
            (30, 21, (30.0, 15.0)),
            (80, 40, (40.0, 25.0)),
            (100, 50, (40.0, 25.0)),
        ],
        seed,
    )
}

/// Half-scale variant of [`table1_suite`] with the same density ordering;
/// sized for quick desk runs.
pub fn table1_suite_half(seed: u64) -> Vec<SuiteEntry> {
    total_association_suite(
        [
            (10, 6, (30.0, 15.0)),
            (15, 10, (30.0, 15.0)),
            (40, 20, (40.0, 25.0)),
            (50, 25, (40.0, 25.0)),
        ],
        seed,
    )
}

fn partial_association_suite(
    n_agents: usize,
    n_obstacles: usize,
    area: (f64, f64),
    seed: u64,
) -> Vec<SuiteEntry> {
    [5usize, 10, 20, 50]
        .iter()
        .zip(TOTAL_ASSOC_LAMBDAS)
        .map(|(&coalitions, (l2, l3))| SuiteEntry {
            label: format!("partial-{}coalitions", coalitions),
            // Same seed for every entry: the geometry is shared and only the
            // partition and weights differ, so baseline runs are comparable
            // across coalition counts.
            generator: GeneratorSpec::new(n_agents, n_obstacles, area, seed)
                .with_coalitions(coalitions),
            params: suite_params(l2, l3),
        })
        .collect()
}

/// The four partial-association columns: one fixed swarm, coalition counts
/// 5/10/20/50.
pub fn table2_suite(seed: u64) -> Vec<SuiteEntry> {
    partial_association_suite(100, 50, (40.0, 25.0), seed)
}

/// Half-scale variant of [`table2_suite`].
pub fn table2_suite_half(seed: u64) -> Vec<SuiteEntry> {
    partial_association_suite(50, 25, (40.0, 25.0), seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::density;
    use crate::scene::validate_scenario;

    #[test]
    fn generated_scenarios_validate_and_respect_separation() {
        let spec = GeneratorSpec::new(20, 12, (30.0, 15.0), 42);
        let scenario = generate(&spec, suite_params(12.0, 0.001)).unwrap();
        assert!(validate_scenario(&scenario).is_ok());
        assert_eq!(scenario.agents.len(), 20);
        assert_eq!(scenario.obstacles.len(), 12);
        assert!((density(&scenario) - 32.0 / 450.0).abs() < 1e-12);

        let mut points: Vec<Vec2> = scenario.obstacles.iter().map(|o| o.center).collect();
        points.extend(scenario.agents.iter().map(|a| a.q0));
        points.extend(scenario.agents.iter().map(|a| a.qt));
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                assert!(points[i].dist(points[j]) >= spec.min_separation);
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = GeneratorSpec::new(15, 8, (30.0, 15.0), 7);
        let a = generate(&spec, suite_params(12.0, 0.001)).unwrap();
        let b = generate(&spec, suite_params(12.0, 0.001)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_agent_list_is_valid() {
        let spec = GeneratorSpec::new(0, 3, (10.0, 10.0), 1);
        let scenario = generate(&spec, suite_params(12.0, 0.001)).unwrap();
        assert!(scenario.agents.is_empty());
        assert!(validate_scenario(&scenario).is_ok());
    }

    #[test]
    fn infeasible_spec_errors() {
        let mut spec = GeneratorSpec::new(200, 200, (2.0, 2.0), 3);
        spec.min_separation = 0.5;
        assert!(matches!(
            generate(&spec, suite_params(12.0, 0.001)),
            Err(GenerateError::Infeasible { .. })
        ));
    }

    #[test]
    fn coalitions_partition_round_robin() {
        let spec = GeneratorSpec::new(11, 0, (30.0, 15.0), 9).with_coalitions(4);
        let scenario = generate(&spec, suite_params(12.0, 0.001)).unwrap();
        let groups = scenario.coalition_partition().coalitions();
        assert_eq!(groups.len(), 4);
        let sizes: Vec<usize> = groups.values().map(|v| v.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 2]);
    }

    #[test]
    fn suite_constants_match_the_benchmark_columns() {
        let t1 = table1_suite(0);
        assert_eq!(t1.len(), 4);
        assert_eq!(t1[0].generator.n_agents, 20);
        assert_eq!(t1[0].params.lambda2, 12.0);
        assert_eq!(t1[0].params.lambda3, 0.001);
        assert_eq!(t1[3].generator.n_agents, 100);
        assert_eq!(t1[3].params.lambda2, 15.0);
        assert_eq!(t1[3].params.lambda3, 0.0001);
        for e in &t1 {
            assert_eq!(e.params.lambda1, 0.4);
            assert_eq!(e.params.beta, 10.0);
            assert_eq!(e.generator.coalitions, 1);
        }

        let t2 = table2_suite(0);
        let counts: Vec<usize> = t2.iter().map(|e| e.generator.coalitions).collect();
        assert_eq!(counts, vec![5, 10, 20, 50]);
        for e in &t2 {
            assert_eq!(e.generator.n_agents, 100);
            assert_eq!(e.generator.n_obstacles, 50);
            assert_eq!(e.params.lambda1, 0.4);
            assert_eq!(e.params.beta, 10.0);
        }
    }

    #[test]
    fn associative_factor_falls_as_density_rises() {
        for suite in [table1_suite(3), table1_suite_half(3)] {
            let generated: Vec<(f64, f64)> = suite
                .iter()
                .map(|e| {
                    let s = generate(&e.generator, e.params).unwrap();
                    (density(&s), e.params.lambda3)
                })
                .collect();
            for w in generated.windows(2) {
                assert!(w[1].0 > w[0].0, "densities must rise: {generated:?}");
                assert!(w[1].1 < w[0].1, "lambda3 must fall: {generated:?}");
            }
        }
    }
}
