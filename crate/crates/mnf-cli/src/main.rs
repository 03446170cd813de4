//! Command-line front end: run simulations, compare the two coordination
//! modes, execute the benchmark suites, sweep the confinement factor, and
//! emit plots.
//!
//! Exit codes: 0 success (including partial convergence), 2 usage or input
//! error, 3 numerical fault.

mod plots;

use clap::{Args, Parser, Subcommand};
use mnf::{
    generate, kappa, table1_suite, table1_suite_half, table2_suite, table2_suite_half,
    validate_scenario, GeneratorSpec, KappaOutcome, Mode, PotentialParams, Scenario, SimConfig,
    SimError, SimResult, SuiteEntry,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mnf", version, about = "Confined-potential multi-agent coordination engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario in a single mode and write trajectories and metrics.
    Run(RunArgs),
    /// Run both modes on the same scenario and report the convergence factor.
    Compare(CompareArgs),
    /// Execute a benchmark suite and write a table-shaped report.
    Suite(SuiteArgs),
    /// Run the primary mode at multiples of the solved confinement factor.
    SweepAlpha(SweepArgs),
    /// Generate a random scenario file.
    Generate(GenerateArgs),
}

#[derive(Args, Clone)]
struct SimFlags {
    /// Motion step size factor override.
    #[arg(long)]
    gamma: Option<f64>,
    /// Convergence distance override.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Upper bound of the confinement-factor search.
    #[arg(long)]
    alpha_cap: Option<f64>,
    /// Seeds per axis for critical-point enumeration.
    #[arg(long)]
    grid_density: Option<usize>,
    /// Baseline navigation-function exponent.
    #[arg(long)]
    dnf_k: Option<u32>,
    /// Re-solve the confinement factor every step (expensive).
    #[arg(long)]
    resolve_alpha_each_step: bool,
    /// Tick budget per run.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Emit SVG plots alongside the numeric outputs.
    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Coordination mode.
    #[arg(long, value_parser = parse_mode, default_value = "mnf")]
    mode: Mode,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    sim: SimFlags,
}

#[derive(Args)]
struct CompareArgs {
    /// Scenario file; omit to generate one from the placement flags below.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    gen: GenFlags,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    sim: SimFlags,
}

#[derive(Args)]
struct SuiteArgs {
    /// Suite id: table1 (total association) or table2 (partial association).
    #[arg(value_parser = ["table1", "table2"])]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the reduced-size variant of the suite.
    #[arg(long)]
    half_scale: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    sim: SimFlags,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Confinement-factor multipliers (each >= 1), e.g. 1,2,4.
    #[arg(long, value_delimiter = ',', required = true)]
    multipliers: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    sim: SimFlags,
}

#[derive(Args, Clone)]
struct GenFlags {
    #[arg(long)]
    agents: Option<usize>,
    #[arg(long)]
    obstacles: Option<usize>,
    #[arg(long, default_value_t = 30.0)]
    width: f64,
    #[arg(long, default_value_t = 15.0)]
    height: f64,
    #[arg(long, default_value_t = 1)]
    coalitions: usize,
    /// Pairwise placement separation; defaults to 2% of the diagonal.
    #[arg(long)]
    min_separation: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.4)]
    lambda1: f64,
    #[arg(long, default_value_t = 12.0)]
    lambda2: f64,
    #[arg(long, default_value_t = 0.001)]
    lambda3: f64,
    #[arg(long, default_value_t = 10.0)]
    beta: f64,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    gen: GenFlags,
    /// Step factor written into the scenario.
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// Scenario file to write.
    #[arg(long)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "mnf" => Ok(Mode::Mnf),
        "dnf" => Ok(Mode::Dnf),
        other => Err(format!("unknown mode {other:?} (expected mnf or dnf)")),
    }
}

enum CliError {
    /// Bad input or unusable request: exit 2.
    Input(String),
    /// Numerical fault (singularity, non-finite, unconfinable): exit 3.
    Numerical(String),
}

impl CliError {
    fn report(&self) -> ExitCode {
        match self {
            CliError::Input(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::Numerical(msg) => {
                eprintln!("numerical fault: {msg}");
                ExitCode::from(3)
            }
        }
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::InvalidScenario { .. } => CliError::Input(e.to_string()),
        _ => CliError::Numerical(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Suite(args) => cmd_suite(args),
        Command::SweepAlpha(args) => cmd_sweep_alpha(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    if !path.exists() {
        return Err(CliError::Input(format!("scenario not found: {}", path.display())));
    }
    let scenario = Scenario::load(path).map_err(|e| CliError::Input(e.to_string()))?;
    let validation = validate_scenario(&scenario);
    if !validation.is_ok() {
        let list: Vec<String> = validation.violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Input(format!("invalid scenario: {}", list.join("; "))));
    }
    Ok(scenario)
}

fn apply_flags(scenario: &mut Scenario, cfg: &mut SimConfig, flags: &SimFlags) {
    if let Some(gamma) = flags.gamma {
        scenario.params.gamma = gamma;
    }
    if let Some(eps) = flags.epsilon {
        cfg.convergence_epsilon = eps;
    }
    if let Some(cap) = flags.alpha_cap {
        cfg.criticality.alpha_cap = cap;
    }
    if let Some(density) = flags.grid_density {
        cfg.criticality.grid_density = density;
    }
    if let Some(k) = flags.dnf_k {
        cfg.dnf.exponent_k = k;
    }
    if let Some(max_steps) = flags.max_steps {
        cfg.max_steps = max_steps;
    }
    cfg.resolve_alpha_each_step = flags.resolve_alpha_each_step;
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Trajectory CSVs above this many rows are skipped (suite runs at full
/// scale would otherwise write multi-gigabyte files).
const CSV_ROW_LIMIT: usize = 1_500_000;

fn run_and_write(
    scenario: &Scenario,
    cfg: &SimConfig,
    dir: &Path,
    plots: bool,
) -> Result<SimResult, CliError> {
    let result = mnf::run(scenario, cfg).map_err(sim_error)?;
    let rows: usize = result.trajectories.iter().map(|t| t.samples.len()).sum();
    if rows <= CSV_ROW_LIMIT {
        write_file(&dir.join("trajectories.csv"), &result.trajectories_csv())?;
    } else {
        eprintln!(
            "note: {} rows exceed the trajectory CSV limit, skipping {}",
            rows,
            dir.join("trajectories.csv").display()
        );
    }
    write_file(
        &dir.join("metrics.toml"),
        &mnf::metrics::render_metrics(scenario, &result, None),
    )?;
    if plots {
        write_file(&dir.join("trajectories.svg"), &plots::trajectories_svg(scenario, &result))?;
        write_file(&dir.join("potentials.svg"), &plots::potentials_svg(&result))?;
    }
    Ok(result)
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&args.scenario)?;
    let mut cfg = SimConfig::new(&scenario, args.mode);
    apply_flags(&mut scenario, &mut cfg, &args.sim);
    let result = run_and_write(&scenario, &cfg, &args.out, args.sim.plots)?;
    println!(
        "{}: {}/{} agents converged in {} ticks (outputs in {})",
        args.mode.as_str(),
        result.steps_to_converge.iter().flatten().count(),
        scenario.agents.len(),
        result.ticks,
        args.out.display()
    );
    Ok(())
}

fn scenario_from_gen(flags: &GenFlags, gamma: f64) -> Result<Scenario, CliError> {
    let (Some(agents), Some(obstacles)) = (flags.agents, flags.obstacles) else {
        return Err(CliError::Input(
            "either --scenario or both --agents and --obstacles are required".into(),
        ));
    };
    let mut spec = GeneratorSpec::new(agents, obstacles, (flags.width, flags.height), flags.seed)
        .with_coalitions(flags.coalitions);
    if let Some(sep) = flags.min_separation {
        spec.min_separation = sep;
    }
    let params = PotentialParams {
        lambda1: flags.lambda1,
        lambda2: flags.lambda2,
        lambda3: flags.lambda3,
        alpha: 2.0,
        beta: flags.beta,
        gamma,
    };
    generate(&spec, params).map_err(|e| CliError::Input(e.to_string()))
}

#[derive(Serialize)]
struct CompareDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_unavailable: Option<String>,
    mnf_max_steps: Option<usize>,
    dnf_max_steps: Option<usize>,
    mnf_completed: f64,
    dnf_completed: f64,
}

fn compare_doc(
    mnf_result: &SimResult,
    dnf_result: &SimResult,
) -> (KappaOutcome, CompareDoc) {
    let outcome = kappa(&mnf_result.steps_to_converge, &dnf_result.steps_to_converge);
    let (kappa_value, reason) = match &outcome {
        KappaOutcome::Value(v) => (Some(*v), None),
        KappaOutcome::Unavailable { reason } => (None, Some(reason.clone())),
    };
    let doc = CompareDoc {
        kappa: kappa_value,
        kappa_unavailable: reason,
        mnf_max_steps: mnf_result.steps_to_converge.iter().copied().flatten().max(),
        dnf_max_steps: dnf_result.steps_to_converge.iter().copied().flatten().max(),
        mnf_completed: mnf_result.converged_fraction(),
        dnf_completed: dnf_result.converged_fraction(),
    };
    (outcome, doc)
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    let mut scenario = match &args.scenario {
        Some(path) => load_scenario(path)?,
        None => scenario_from_gen(&args.gen, args.sim.gamma.unwrap_or(0.05))?,
    };
    let mut mnf_cfg = SimConfig::new(&scenario, Mode::Mnf);
    apply_flags(&mut scenario, &mut mnf_cfg, &args.sim);
    let mut dnf_cfg = SimConfig::new(&scenario, Mode::Dnf);
    apply_flags(&mut scenario, &mut dnf_cfg, &args.sim);

    write_file(
        &args.out.join("scenario.toml"),
        &scenario.to_toml_string().map_err(|e| CliError::Input(e.to_string()))?,
    )?;
    let mnf_result = run_and_write(&scenario, &mnf_cfg, &args.out.join("mnf"), args.sim.plots)?;
    let dnf_result = run_and_write(&scenario, &dnf_cfg, &args.out.join("dnf"), args.sim.plots)?;

    let (outcome, doc) = compare_doc(&mnf_result, &dnf_result);
    write_file(
        &args.out.join("compare.toml"),
        &toml::to_string(&doc).expect("compare serializes"),
    )?;
    match &outcome {
        KappaOutcome::Value(v) => println!("kappa = {v}"),
        KappaOutcome::Unavailable { reason } => println!("kappa unavailable: {reason}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct SuiteEntryDoc {
    label: String,
    agents: usize,
    obstacles: usize,
    coalitions: usize,
    density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa_unavailable: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    alpha_dagger_min: Option<f64>,
    alpha_dagger_median: Option<f64>,
    alpha_dagger_max: Option<f64>,
    mnf_max_steps: Option<usize>,
    dnf_max_steps: Option<usize>,
}

#[derive(Serialize)]
struct SuiteDoc {
    suite: String,
    seed: u64,
    half_scale: bool,
    entries: Vec<SuiteEntryDoc>,
}

fn median(values: &mut Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Some(values[values.len() / 2])
}

fn cmd_suite(args: SuiteArgs) -> Result<(), CliError> {
    let entries: Vec<SuiteEntry> = match (args.suite.as_str(), args.half_scale) {
        ("table1", false) => table1_suite(args.seed),
        ("table1", true) => table1_suite_half(args.seed),
        ("table2", false) => table2_suite(args.seed),
        ("table2", true) => table2_suite_half(args.seed),
        _ => unreachable!("clap validates the suite id"),
    };
    // Partial-association entries share geometry (same seed and sizes), and
    // the baseline ignores coalition structure, so one baseline run per
    // suite serves every entry.
    let shared_baseline = args.suite == "table2";

    let mut docs = Vec::new();
    let mut shared_dnf: Option<SimResult> = None;
    for entry in &entries {
        let entry_dir = args.out.join(&entry.label);
        match run_suite_entry(entry, &entry_dir, &args, &mut shared_dnf, shared_baseline) {
            Ok(doc) => docs.push(doc),
            Err(e) => {
                // Entry failures are isolated; the suite continues.
                let msg = match e {
                    CliError::Input(m) | CliError::Numerical(m) => m,
                };
                eprintln!("entry {} failed: {msg}", entry.label);
                docs.push(SuiteEntryDoc {
                    label: entry.label.clone(),
                    agents: entry.generator.n_agents,
                    obstacles: entry.generator.n_obstacles,
                    coalitions: entry.generator.coalitions,
                    density: 0.0,
                    kappa: None,
                    kappa_unavailable: None,
                    error: Some(msg),
                    alpha_dagger_min: None,
                    alpha_dagger_median: None,
                    alpha_dagger_max: None,
                    mnf_max_steps: None,
                    dnf_max_steps: None,
                });
            }
        }
    }

    let doc = SuiteDoc {
        suite: args.suite.clone(),
        seed: args.seed,
        half_scale: args.half_scale,
        entries: docs,
    };
    write_file(&args.out.join("report.toml"), &toml::to_string(&doc).expect("report serializes"))?;
    let table = render_suite_table(&doc);
    write_file(&args.out.join("report.txt"), &table)?;
    print!("{table}");
    Ok(())
}

fn run_suite_entry(
    entry: &SuiteEntry,
    dir: &Path,
    args: &SuiteArgs,
    shared_dnf: &mut Option<SimResult>,
    shared_baseline: bool,
) -> Result<SuiteEntryDoc, CliError> {
    let mut scenario =
        generate(&entry.generator, entry.params).map_err(|e| CliError::Input(e.to_string()))?;
    let mut mnf_cfg = SimConfig::new(&scenario, Mode::Mnf);
    apply_flags(&mut scenario, &mut mnf_cfg, &args.sim);
    let mut dnf_cfg = SimConfig::new(&scenario, Mode::Dnf);
    apply_flags(&mut scenario, &mut dnf_cfg, &args.sim);

    write_file(
        &dir.join("scenario.toml"),
        &scenario.to_toml_string().map_err(|e| CliError::Input(e.to_string()))?,
    )?;
    let mnf_result = run_and_write(&scenario, &mnf_cfg, &dir.join("mnf"), args.sim.plots)?;

    let local_dnf;
    let dnf_result: &SimResult = if shared_baseline {
        if shared_dnf.is_none() {
            *shared_dnf = Some(run_and_write(&scenario, &dnf_cfg, &dir.join("dnf"), args.sim.plots)?);
        }
        shared_dnf.as_ref().unwrap()
    } else {
        local_dnf = run_and_write(&scenario, &dnf_cfg, &dir.join("dnf"), args.sim.plots)?;
        &local_dnf
    };

    let (outcome, compare) = compare_doc(&mnf_result, dnf_result);
    write_file(
        &dir.join("compare.toml"),
        &toml::to_string(&compare).expect("compare serializes"),
    )?;

    let mut alphas: Vec<f64> = mnf_result
        .reports
        .iter()
        .flatten()
        .map(|r| r.alpha_dagger)
        .collect();
    let alpha_min = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let alpha_max = alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SuiteEntryDoc {
        label: entry.label.clone(),
        agents: entry.generator.n_agents,
        obstacles: entry.generator.n_obstacles,
        coalitions: entry.generator.coalitions,
        density: mnf::density(&scenario),
        kappa: outcome.value(),
        kappa_unavailable: match &outcome {
            KappaOutcome::Unavailable { reason } => Some(reason.clone()),
            KappaOutcome::Value(_) => None,
        },
        error: None,
        alpha_dagger_min: (!alphas.is_empty()).then_some(alpha_min),
        alpha_dagger_median: median(&mut alphas),
        alpha_dagger_max: if alpha_max.is_finite() { Some(alpha_max) } else { None },
        mnf_max_steps: compare.mnf_max_steps,
        dnf_max_steps: compare.dnf_max_steps,
    })
}

fn render_suite_table(doc: &SuiteDoc) -> String {
    let fmt_opt = |v: &Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into());
    let fmt_usize = |v: &Option<usize>| v.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
    let mut rows: Vec<(String, Vec<String>)> = vec![
        ("entry".into(), doc.entries.iter().map(|e| e.label.clone()).collect()),
        ("agents".into(), doc.entries.iter().map(|e| e.agents.to_string()).collect()),
        ("obstacles".into(), doc.entries.iter().map(|e| e.obstacles.to_string()).collect()),
        ("coalitions".into(), doc.entries.iter().map(|e| e.coalitions.to_string()).collect()),
        ("density".into(), doc.entries.iter().map(|e| format!("{:.4}", e.density)).collect()),
        ("kappa".into(), doc.entries.iter().map(|e| fmt_opt(&e.kappa)).collect()),
        (
            "alpha_dagger_med".into(),
            doc.entries.iter().map(|e| fmt_opt(&e.alpha_dagger_median)).collect(),
        ),
        (
            "alpha_dagger_max".into(),
            doc.entries.iter().map(|e| fmt_opt(&e.alpha_dagger_max)).collect(),
        ),
        (
            "mnf_max_steps".into(),
            doc.entries.iter().map(|e| fmt_usize(&e.mnf_max_steps)).collect(),
        ),
        (
            "dnf_max_steps".into(),
            doc.entries.iter().map(|e| fmt_usize(&e.dnf_max_steps)).collect(),
        ),
    ];
    if doc.entries.iter().any(|e| e.error.is_some()) {
        rows.push((
            "error".into(),
            doc.entries
                .iter()
                .map(|e| e.error.clone().unwrap_or_else(|| "-".into()))
                .collect(),
        ));
    }
    let mut widths = vec![rows.iter().map(|(h, _)| h.len()).max().unwrap_or(8)];
    for col in 0..doc.entries.len() {
        let w = rows.iter().map(|(_, cells)| cells[col].len()).max().unwrap_or(4);
        widths.push(w);
    }
    let mut out = format!("suite {} seed {} half_scale {}\n", doc.suite, doc.seed, doc.half_scale);
    for (head, cells) in &rows {
        let _ = write!(out, "{:<width$}", head, width = widths[0] + 2);
        for (i, cell) in cells.iter().enumerate() {
            let _ = write!(out, "{:>width$}  ", cell, width = widths[i + 1]);
        }
        out.push('\n');
    }
    out
}

fn cmd_sweep_alpha(args: SweepArgs) -> Result<(), CliError> {
    if args.multipliers.iter().any(|&m| !(m >= 1.0)) {
        return Err(CliError::Input("all multipliers must be >= 1".into()));
    }
    let mut scenario = load_scenario(&args.scenario)?;
    let mut csv = String::from("multiplier,agent_id,alpha,steps\n");
    let mut summary = Vec::new();
    for &multiplier in &args.multipliers {
        let mut cfg = SimConfig::new(&scenario, Mode::Mnf);
        apply_flags(&mut scenario, &mut cfg, &args.sim);
        cfg.alpha_multiplier = multiplier;
        let result = mnf::run(&scenario, &cfg).map_err(sim_error)?;
        for (i, agent) in scenario.agents.iter().enumerate() {
            let alpha = result.reports[i]
                .as_ref()
                .map(|r| r.alpha_dagger * multiplier)
                .unwrap_or(f64::NAN);
            let steps =
                result.steps_to_converge[i].map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(csv, "{multiplier},{},{alpha},{steps}", agent.id);
        }
        let total: usize = result.steps_to_converge.iter().flatten().sum();
        summary.push((multiplier, total, result.all_converged()));
    }
    write_file(&args.out.join("sweep.csv"), &csv)?;
    for (multiplier, total, complete) in summary {
        println!(
            "multiplier {multiplier}: total steps {total}{}",
            if complete { "" } else { " (incomplete)" }
        );
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let scenario = scenario_from_gen(&args.gen, args.gamma)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Input(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    scenario.save(&args.out).map_err(|e| CliError::Input(e.to_string()))?;
    println!(
        "wrote {} ({} agents, {} obstacles)",
        args.out.display(),
        scenario.agents.len(),
        scenario.obstacles.len()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(label: &str, kappa: Option<f64>) -> SuiteEntryDoc {
        SuiteEntryDoc {
            label: label.into(),
            agents: 10,
            obstacles: 6,
            coalitions: 1,
            density: 0.0356,
            kappa,
            kappa_unavailable: kappa.is_none().then(|| "unconverged".into()),
            error: None,
            alpha_dagger_min: Some(2.0),
            alpha_dagger_median: Some(5.0),
            alpha_dagger_max: Some(9.0),
            mnf_max_steps: Some(120),
            dnf_max_steps: Some(80_000),
        }
    }

    #[test]
    fn suite_table_renders_columns() {
        let doc = SuiteDoc {
            suite: "table1".into(),
            seed: 7,
            half_scale: true,
            entries: vec![entry("a", Some(0.25)), entry("b", None)],
        };
        let table = render_suite_table(&doc);
        assert!(table.starts_with("suite table1 seed 7 half_scale true\n"));
        assert!(table.contains("kappa"));
        assert!(table.contains("0.2500"));
        // Missing values render as dashes.
        assert!(table.contains('-'));
    }

    #[test]
    fn median_of_values() {
        assert_eq!(median(&mut vec![]), None);
        assert_eq!(median(&mut vec![3.0]), Some(3.0));
        assert_eq!(median(&mut vec![5.0, 1.0, 3.0]), Some(3.0));
    }
}
