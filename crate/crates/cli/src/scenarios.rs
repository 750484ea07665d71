//! Scenario runners. [`execute`] computes everything in memory; [`run`]
//! writes the CSVs, schedules and the run report.

use std::path::{Path, PathBuf};

use crossnav_core::control::{compile, ramp, sudden_switch, ControlSchedule, Segment};
use crossnav_core::dynamics::{evolve, Diagnostics, EvolutionProblem, QuantumState, Trajectory};
use crossnav_core::linalg::{hermitian_eigen, DensityMatrix, PureState};
use crossnav_core::models::{lz_probability, LzParams};
use crossnav_core::numfmt::format_number;
use crossnav_core::qsl::{mt_bound_report, MT_TOLERANCE};
use crossnav_core::spectrum::scan_spectrum;
use crossnav_core::Error;

use crate::config::{format_steps, Auto, ConfigError, ParsedConfig, RunSpec, Scenario};
use crate::output::{trajectory_table, Cell, OutputError, RunDir, Table};
use crate::search::{discover_pair, path_search, SearchError, SearchOptions, SearchResult};
use crate::setup::{adiabatic_variant, build_system, integrator, label_index, protocol, System};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Search(#[from] SearchError),
    #[error("{0}")]
    Output(#[from] OutputError),
}

impl RunError {
    /// 0 success, 2 configuration, 3 numerical invariant breach, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            RunError::Config(_) => return 2,
            RunError::Core(e) | RunError::Search(SearchError::Core(e)) => e,
            _ => return 1,
        };
        if core.is_numerical_breach() {
            3
        } else if matches!(core, Error::InvalidParameter(_) | Error::InvalidRange(_)) {
            2
        } else {
            1
        }
    }
}

/// Worst invariant values over every run of a scenario.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Aggregate {
    pub runs: usize,
    pub max_trace_error: f64,
    pub min_eigenvalue: Option<f64>,
    pub max_norm_drift: f64,
    pub max_hermiticity_correction: f64,
    pub positivity_warnings: usize,
    pub steps: usize,
}

impl Aggregate {
    pub fn add(&mut self, traj: &Trajectory) {
        let d: &Diagnostics = &traj.diagnostics;
        self.runs += 1;
        self.max_trace_error = self.max_trace_error.max(d.max_trace_error);
        if traj.open_system {
            self.min_eigenvalue = Some(self.min_eigenvalue.map_or(d.min_eigenvalue, |m| m.min(d.min_eigenvalue)));
        }
        self.max_norm_drift = self.max_norm_drift.max(d.max_norm_drift);
        self.max_hermiticity_correction = self.max_hermiticity_correction.max(d.max_hermiticity_correction);
        self.positivity_warnings += d.positivity_warnings;
        self.steps += d.steps;
    }
}

/// In-memory result of one scenario.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub tables: Vec<(String, Table)>,
    pub texts: Vec<(String, String)>,
    /// Named scalar results in report order.
    pub metrics: Vec<(String, f64)>,
    pub notes: Vec<(String, String)>,
    pub diagnostics: Aggregate,
    pub final_fidelity: Option<f64>,
    pub total_time: Option<f64>,
    /// Trajectories of the main runs, for callers that need more than the
    /// CSVs.
    pub trajectories: Vec<(String, Trajectory)>,
    pub search: Option<SearchResult>,
}

impl Outcome {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    fn metric_push(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.push((name.into(), value));
    }

    fn note(&mut self, name: impl Into<String>, value: impl Into<String>) {
        self.notes.push((name.into(), value.into()));
    }

    fn trajectory(&mut self, name: &str, traj: Trajectory) {
        self.diagnostics.add(&traj);
        self.tables.push((format!("{name}.csv"), trajectory_table(&traj, traj.final_state.dim())));
        self.trajectories.push((name.to_string(), traj));
    }

    pub fn trajectory_named(&self, name: &str) -> Option<&Trajectory> {
        self.trajectories.iter().find(|(k, _)| k == name).map(|(_, t)| t)
    }
}

pub fn execute(spec: &RunSpec) -> Result<Outcome, RunError> {
    match spec.scenario {
        Scenario::Spectrum => spectrum(spec),
        Scenario::LzCheck => lz_check(spec),
        Scenario::TwoLevelSs => two_level(spec, true),
        Scenario::TwoLevelAdiabatic => two_level(spec, false),
        Scenario::FourLevel => four_level(spec),
        Scenario::GammaSweep => gamma_sweep(spec),
        Scenario::PathSearch => search_scenario(spec),
    }
}

fn spectrum(spec: &RunSpec) -> Result<Outcome, RunError> {
    let system = build_system(spec)?;
    let scan = scan_spectrum(&system.model, spec.scan_min, spec.scan_max, spec.scan_points)?;
    let dim = system.model.dim();
    let mut out = Outcome::default();

    let mut header = vec!["lambda".to_string()];
    header.extend((1..=dim).map(|k| format!("e_{k}")));
    let mut levels = Table::new(header);
    for (lambda, energies) in scan.lambdas.iter().zip(&scan.branches) {
        let mut row = vec![Cell::Num(*lambda)];
        row.extend(energies.iter().map(|e| Cell::Num(*e)));
        levels.push(row);
    }
    out.tables.push(("spectrum.csv".into(), levels));
    out.tables.push(("crossings.csv".into(), crossings_table(&system)));
    out.metric_push("crossings", system.crossings.len() as f64);
    describe_system(&mut out, &system);
    Ok(out)
}

fn crossings_table(system: &System) -> Table {
    let mut t = Table::new(["site", "lambda_star", "gap", "lower_level", "alpha_eff", "critical_velocity", "degenerate"]);
    for (i, site) in system.sites.iter().enumerate() {
        for c in &site.crossings {
            t.push(vec![
                Cell::Num((i + 1) as f64),
                c.lambda_star.into(),
                c.gap.into(),
                Cell::Num((c.lower_level + 1) as f64),
                c.alpha_eff().into(),
                c.critical_velocity().into(),
                Cell::Num(if c.degenerate { 1.0 } else { 0.0 }),
            ]);
        }
    }
    t
}

fn describe_system(out: &mut Outcome, system: &System) {
    out.note("delta_ref", format_number(system.delta_ref));
    out.note("lambda_ref", format_number(system.diabatic.lambda_ref));
    for (i, site) in system.sites.iter().enumerate() {
        for c in &site.crossings {
            out.note(
                format!("site_{}", i + 1),
                format!(
                    "lambda_star={} gap={} levels={}-{}",
                    format_number(c.lambda_star),
                    format_number(c.gap),
                    c.lower_level + 1,
                    c.lower_level + 2
                ),
            );
        }
    }
}

fn closed_problem(
    system: &System,
    schedule: ControlSchedule,
    initial: PureState,
    goal: &PureState,
    keep_states: bool,
) -> EvolutionProblem {
    EvolutionProblem {
        model: system.model.clone(),
        schedule,
        initial: QuantumState::Pure(initial),
        goal: DensityMatrix::from_pure(goal),
        diabatic: system.diabatic.clone(),
        open_system: false,
        delta_ref: system.delta_ref,
        keep_states,
    }
}

fn open_problem(spec: &RunSpec, system: &System, closed: &EvolutionProblem, gamma0: f64) -> Result<EvolutionProblem, Error> {
    let temperature = spec.temperature.resolve(system.delta_ref);
    let model = system.model.clone().with_bath_substitution(gamma0, temperature, spec.bath_substitution)?;
    Ok(EvolutionProblem { model, open_system: true, keep_states: false, ..closed.clone() })
}

fn lz_check(spec: &RunSpec) -> Result<Outcome, RunError> {
    let system = build_system(spec)?;
    let p = LzParams::new(spec.alpha, spec.delta)?;
    let v_c = crossnav_core::models::critical_velocity(&p);
    let cfg = integrator(spec);
    let mut out = Outcome::default();
    let mut table = Table::new(["v_over_vc", "velocity", "p1_simulated", "p1_closed_form", "abs_error"]);
    for (i, m) in spec.velocity_multiples.iter().enumerate() {
        let v = m * v_c;
        let segs = vec![Segment::Jump { lambda_to: -spec.lambda0 }, ramp(-spec.lambda0, spec.lambda0, v)?];
        let schedule = ControlSchedule::new(0.0, segs)?;
        // The closed form is the probability of following the adiabatic
        // ground branch, so start and measure in asymptotic eigenstates.
        let start = hermitian_eigen(&system.model.hamiltonian(-spec.lambda0))?.vector(0);
        let end = hermitian_eigen(&system.model.hamiltonian(spec.lambda0))?.vector(0);
        let problem = closed_problem(&system, schedule, start, &end, false);
        let traj = evolve(&problem, &cfg)?;
        let simulated = traj.final_fidelity();
        let exact = lz_probability(&p, v)?;
        table.push(vec![(*m).into(), v.into(), simulated.into(), exact.into(), (simulated - exact).abs().into()]);
        out.metric_push(format!("p1_simulated_{}", i + 1), simulated);
        out.metric_push(format!("p1_closed_form_{}", i + 1), exact);
        out.diagnostics.add(&traj);
        out.trajectories.push((format!("sweep_{}", i + 1), traj));
    }
    out.note("critical_velocity", format_number(v_c));
    out.tables.push(("lz_check.csv".into(), table));
    Ok(out)
}

fn two_level(spec: &RunSpec, sudden: bool) -> Result<Outcome, RunError> {
    let system = build_system(spec)?;
    let ac = system.sites.first().ok_or(Error::NoCrossingFound)?.representative().clone();
    let lambda0 = spec.lambda0;
    let schedule = if sudden {
        let mut segs = vec![Segment::Jump { lambda_to: -lambda0 }];
        segs.extend(sudden_switch(&ac, spec.swap_fraction, lambda0)?);
        ControlSchedule::new(0.0, segs)?
    } else {
        let mut spec = spec.clone();
        spec.lambda_start = Auto::Fixed(-lambda0);
        spec.lambda_end = Auto::Fixed(lambda0);
        let steps = [crate::config::StepRef { action: crate::config::StepAction::Adiabatic, site: 1 }];
        let proto = protocol(&spec, &system, &steps, 0, 1)?;
        compile(&proto, &system.crossings, &crate::setup::compile_options(&spec))?
    };
    let cfg = integrator(spec);
    let closed = closed_problem(&system, schedule.clone(), PureState::basis(2, 0), &PureState::basis(2, 1), sudden);
    let traj = evolve(&closed, &cfg)?;

    let mut out = Outcome::default();
    describe_system(&mut out, &system);
    out.final_fidelity = Some(traj.final_fidelity());
    out.total_time = Some(traj.total_time());
    out.metric_push("closed_final_fidelity", traj.final_fidelity());
    if sudden {
        let report = mt_bound_report(&traj, |t| system.model.hamiltonian(schedule.lambda_at(t).unwrap_or(0.0)), MT_TOLERANCE)?;
        out.metric_push("mt_max_slack", report.max_slack);
        out.metric_push("mt_violations", report.violations.len() as f64);
        out.metric_push("mt_saturated", if report.saturated() { 1.0 } else { 0.0 });
        for (i, h) in report.holds.iter().enumerate() {
            out.metric_push(format!("mt_hold_{}_end_bound", i + 1), h.end_bound);
            out.metric_push(format!("mt_hold_{}_end_slack", i + 1), h.end_slack);
        }
    }
    out.trajectory("trajectory_closed", traj);
    for (i, gamma0) in spec.gamma0.iter().enumerate() {
        let traj = evolve(&open_problem(spec, &system, &closed, *gamma0)?, &cfg)?;
        out.metric_push(format!("open_{}_gamma0", i + 1), *gamma0);
        out.metric_push(format!("open_{}_final_fidelity", i + 1), traj.final_fidelity());
        out.metric_push(format!("open_{}_final_purity", i + 1), traj.final_purity());
        out.trajectory(&format!("trajectory_gamma_{}", i + 1), traj);
    }
    out.note("temperature", format_number(spec.temperature.resolve(system.delta_ref)));
    out.texts.push(("schedule.txt".into(), schedule.to_text()));
    out.texts.push(("plot.gp".into(), plot_script(&out)));
    Ok(out)
}

fn labels(spec: &RunSpec, system: &System) -> Result<(usize, usize), RunError> {
    match (spec.start_label, spec.goal_label) {
        (Auto::Fixed(s), Auto::Fixed(g)) => Ok((label_index(system, s, "start_label")?, label_index(system, g, "goal_label")?)),
        _ => Err(ConfigError::Invalid(format!(
            "scenario {} needs fixed start_label and goal_label (use path-search to discover them)",
            spec.scenario
        ))
        .into()),
    }
}

fn four_level(spec: &RunSpec) -> Result<Outcome, RunError> {
    let system = build_system(spec)?;
    let (start, goal) = labels(spec, &system)?;
    let proto = protocol(spec, &system, &spec.steps, start, goal)?;
    let schedule = compile(&proto, &system.crossings, &crate::setup::compile_options(spec))?;
    let cfg = integrator(spec);
    let closed = closed_problem(
        &system,
        schedule.clone(),
        system.diabatic.state(start).clone(),
        system.diabatic.state(goal),
        false,
    );
    let traj = evolve(&closed, &cfg)?;

    let mut out = Outcome::default();
    describe_system(&mut out, &system);
    out.note("pattern", proto.pattern());
    out.final_fidelity = Some(traj.final_fidelity());
    out.total_time = Some(traj.total_time());
    out.metric_push("closed_final_fidelity", traj.final_fidelity());
    out.metric_push("total_time", traj.total_time());
    for (i, (_, a, b, lambda)) in schedule.holds().into_iter().enumerate() {
        out.metric_push(format!("hold_{}_duration", i + 1), b - a);
        out.metric_push(format!("hold_{}_lambda", i + 1), lambda);
    }
    out.trajectory("trajectory_closed", traj);
    for (i, gamma0) in spec.gamma0.iter().enumerate() {
        let traj = evolve(&open_problem(spec, &system, &closed, *gamma0)?, &cfg)?;
        let d = traj.diagnostics;
        out.metric_push(format!("open_{}_gamma0", i + 1), *gamma0);
        out.metric_push(format!("open_{}_final_fidelity", i + 1), traj.final_fidelity());
        out.metric_push(format!("open_{}_final_purity", i + 1), traj.final_purity());
        out.metric_push(format!("open_{}_max_trace_error", i + 1), d.max_trace_error);
        out.metric_push(format!("open_{}_max_hermiticity_correction", i + 1), d.max_hermiticity_correction);
        out.metric_push(format!("open_{}_min_eigenvalue", i + 1), d.min_eigenvalue);
        out.trajectory(&format!("trajectory_open_{}", i + 1), traj);
    }
    out.note("temperature", format_number(spec.temperature.resolve(system.delta_ref)));
    out.tables.push(("crossings.csv".into(), crossings_table(&system)));
    out.texts.push(("schedule.txt".into(), schedule.to_text()));
    out.texts.push(("plot.gp".into(), plot_script(&out)));
    Ok(out)
}

fn gamma_sweep(spec: &RunSpec) -> Result<Outcome, RunError> {
    let system = build_system(spec)?;
    let (start, goal) = labels(spec, &system)?;
    let cfg = integrator(spec);
    let mut out = Outcome::default();
    describe_system(&mut out, &system);
    let mut table = Table::new(["gamma0", "method", "final_fidelity"]);
    let mut failures = Vec::new();
    let methods = [("S-D", spec.steps.clone()), ("A-D", adiabatic_variant(&spec.steps))];
    for (name, steps) in &methods {
        let proto = protocol(spec, &system, steps, start, goal)?;
        let schedule = compile(&proto, &system.crossings, &crate::setup::compile_options(spec))?;
        out.note(format!("{name}_pattern"), proto.pattern());
        out.metric_push(format!("{name}_total_time"), schedule.total_duration());
        let closed = closed_problem(&system, schedule, system.diabatic.state(start).clone(), system.diabatic.state(goal), false);
        for gamma0 in &spec.gamma0 {
            match open_problem(spec, &system, &closed, *gamma0).and_then(|p| evolve(&p, &cfg)) {
                Ok(traj) => {
                    out.diagnostics.add(&traj);
                    table.push(vec![(*gamma0).into(), (*name).into(), traj.final_fidelity().into()]);
                    out.metric_push(format!("{name}_{}", format_number(*gamma0)), traj.final_fidelity());
                }
                Err(e) => failures.push(format!("{name} gamma0={}: {e}", format_number(*gamma0))),
            }
        }
    }
    for (i, f) in failures.iter().enumerate() {
        out.note(format!("failed_row_{}", i + 1), f.clone());
    }
    out.tables.push(("sweep.csv".into(), table));
    Ok(out)
}

fn search_scenario(spec: &RunSpec) -> Result<Outcome, RunError> {
    let system = build_system(spec)?;
    let lambda_start = match spec.lambda_start {
        Auto::Fixed(l) => l,
        Auto::Auto => crossnav_core::control::asymptotic_lambda(&system.crossings, true).ok_or(Error::NoCrossingFound)?,
    };
    let opts = SearchOptions::from_spec(spec, lambda_start);
    let pin = |label: Auto<usize>, key| match label {
        Auto::Fixed(l) => label_index(&system, l, key).map(Some),
        Auto::Auto => Ok(None),
    };
    let (start, goal) = (pin(spec.start_label, "start_label")?, pin(spec.goal_label, "goal_label")?);
    let result = match (start, goal) {
        (Some(s), Some(g)) => path_search(&system, s, g, &opts)?,
        _ => discover_pair(&system, start, goal, spec.pattern.as_deref(), &opts)?,
    };

    let mut out = Outcome::default();
    describe_system(&mut out, &system);
    let mut table = Table::new(["pattern", "steps", "closed_fidelity", "total_time", "swaps"]);
    for c in &result.candidates {
        table.push(vec![
            c.pattern.as_str().into(),
            format_steps(&c.steps).replace(',', " ").as_str().into(),
            c.fidelity.into(),
            c.total_time.into(),
            Cell::Num(c.swaps as f64),
        ]);
    }
    out.tables.push(("candidates.csv".into(), table));
    out.note("pairs_searched", if start.is_some() && goal.is_some() { "1" } else { "all unpinned" });
    out.note("start_label", (result.start + 1).to_string());
    out.note("goal_label", (result.goal + 1).to_string());
    out.note("pattern", result.best.pattern.clone());
    out.note("steps", format_steps(&result.best.steps));
    out.metric_push("explored", result.candidates.len() as f64);
    out.metric_push("rejected", result.rejected as f64);
    out.metric_push("closed_fidelity", result.best.fidelity);
    out.metric_push("total_time", result.best.total_time);
    for (i, d) in result.hold_durations(&opts, &system)?.iter().enumerate() {
        out.metric_push(format!("hold_{}_duration", i + 1), *d);
    }
    out.final_fidelity = Some(result.best.fidelity);
    out.total_time = Some(result.best.total_time);

    if !result.protocol.steps.is_empty() {
        let schedule = compile(&result.protocol, &system.crossings, &opts.compile)?;
        let problem = closed_problem(
            &system,
            schedule.clone(),
            system.diabatic.state(result.start).clone(),
            system.diabatic.state(result.goal),
            false,
        );
        let traj = evolve(&problem, &opts.integrator)?;
        out.texts.push(("schedule.txt".into(), schedule.to_text()));
        out.trajectory("trajectory_closed", traj);
        out.texts.push(("plot.gp".into(), plot_script(&out)));
    }
    out.search = Some(result);
    Ok(out)
}

/// gnuplot script plotting fidelity against tau for every trajectory CSV.
fn plot_script(out: &Outcome) -> String {
    let files: Vec<String> = out
        .tables
        .iter()
        .filter(|(name, _)| name.starts_with("trajectory"))
        .map(|(name, _)| format!("'{name}' using 2:4 with lines title '{}'", name.trim_end_matches(".csv")))
        .collect();
    format!(
        "set datafile separator ','\nset xlabel 'tau'\nset ylabel 'fidelity'\nset yrange [0:1.05]\nplot {}\n",
        files.join(", \\\n     ")
    )
}

fn report(parsed: &ParsedConfig, out: &Outcome, files: &[String]) -> String {
    let mut r = String::from("# run report\n\n## configuration\n");
    let mut section = "";
    for line in parsed.spec.serialize().lines() {
        let trimmed = line.trim();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name {
                "model" => "model",
                "bath" => "bath",
                "schedule" => "schedule",
                "integrator" => "integrator",
                _ => "output",
            };
            r.push_str(line);
            r.push('\n');
            continue;
        }
        let key = trimmed.split('=').next().unwrap_or("").trim();
        if !section.is_empty() && parsed.defaulted.contains(&format!("{section}.{key}")) {
            r.push_str(&format!("{line}  # default\n"));
        } else if !line.is_empty() {
            r.push_str(line);
            r.push('\n');
        } else {
            r.push('\n');
        }
    }
    r.push_str("\n## derived\n");
    for (k, v) in &out.notes {
        r.push_str(&format!("{k} = {v}\n"));
    }
    r.push_str("\n## results\n");
    let opt = |x: Option<f64>| x.map_or("n/a".to_string(), format_number);
    r.push_str(&format!("final_fidelity = {}\n", opt(out.final_fidelity)));
    r.push_str(&format!("total_time = {}\n", opt(out.total_time)));
    for (k, v) in &out.metrics {
        r.push_str(&format!("{k} = {}\n", format_number(*v)));
    }
    let d = &out.diagnostics;
    r.push_str("\n## diagnostics\n");
    r.push_str(&format!("runs = {}\n", d.runs));
    r.push_str(&format!("integration_steps = {}\n", d.steps));
    r.push_str(&format!("max_trace_error = {}\n", format_number(d.max_trace_error)));
    r.push_str(&format!("min_eigenvalue = {}\n", opt(d.min_eigenvalue)));
    r.push_str(&format!("max_norm_drift = {}\n", format_number(d.max_norm_drift)));
    r.push_str(&format!("max_hermiticity_correction = {}\n", format_number(d.max_hermiticity_correction)));
    r.push_str(&format!("positivity_warnings = {}\n", d.positivity_warnings));
    r.push_str("\n## files\n");
    for f in files {
        r.push_str(f);
        r.push('\n');
    }
    r
}

#[derive(Debug)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub outcome: Outcome,
}

/// Execute `parsed` and write its outputs under `out_dir` (or the configured
/// `[output] dir`). Files written before a failure are removed.
pub fn run(parsed: &ParsedConfig, out_dir: Option<&Path>) -> Result<RunSummary, RunError> {
    let outcome = execute(&parsed.spec)?;
    let root = out_dir.map_or_else(|| PathBuf::from(&parsed.spec.dir), Path::to_path_buf);
    let mut dir = RunDir::create(&root)?;
    match write_all(&mut dir, parsed, &outcome) {
        Ok(()) => Ok(RunSummary { dir: root, files: dir.written().to_vec(), outcome }),
        Err(e) => {
            dir.discard();
            Err(e.into())
        }
    }
}

fn write_all(dir: &mut RunDir, parsed: &ParsedConfig, outcome: &Outcome) -> Result<(), OutputError> {
    let mut names = Vec::new();
    for (name, table) in &outcome.tables {
        dir.write_table(name, table)?;
        names.push(name.clone());
    }
    for (name, text) in &outcome.texts {
        dir.write_text(name, text)?;
        names.push(name.clone());
    }
    dir.write_text("report.txt", &report(parsed, outcome, &names))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Config(ConfigError::Invalid("x".into())).exit_code(), 2);
        assert_eq!(RunError::Core(Error::TraceDrift { t: 1.0, drift: 1.0 }).exit_code(), 3);
        assert_eq!(RunError::Core(Error::InvalidParameter("x".into())).exit_code(), 2);
        assert_eq!(RunError::Core(Error::NoCrossingFound).exit_code(), 1);
        assert_eq!(RunError::Search(SearchError::NoPathFound { best: 0.1, threshold: 0.95 }).exit_code(), 1);
    }

    #[test]
    fn spectrum_reports_crossings() {
        let out = execute(&RunSpec::defaults(Scenario::Spectrum)).unwrap();
        assert_eq!(out.metric("crossings"), Some(4.0));
        assert_eq!(out.tables[0].1.header, ["lambda", "e_1", "e_2", "e_3", "e_4"]);
        assert_eq!(out.tables[0].1.rows.len(), 601);
    }

    #[test]
    fn sudden_switch_scenario_closed_only() {
        let mut spec = RunSpec::defaults(Scenario::TwoLevelSs);
        spec.gamma0.clear();
        let out = execute(&spec).unwrap();
        assert!(out.final_fidelity.unwrap() >= 0.999);
        assert!((out.total_time.unwrap() - std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(out.metric("mt_saturated"), Some(1.0));
    }
}
