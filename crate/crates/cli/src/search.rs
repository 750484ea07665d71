//! Exhaustive search over diabatic/swap sequences through the crossing
//! sites.

use crossnav_core::control::{compile, Action, ProtocolSpec, ProtocolStep, Segment};
use crossnav_core::dynamics::{evolve_closed, EvolutionProblem, IntegratorConfig, QuantumState};
use crossnav_core::linalg::DensityMatrix;
use crossnav_core::Error;

use crate::config::{StepAction, StepRef};
use crate::setup::{compile_options, System};

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("no path reaches the goal: best fidelity {best} below threshold {threshold}")]
    NoPathFound { best: f64, threshold: f64 },
    #[error(transparent)]
    Core(#[from] Error),
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_steps: usize,
    pub tie_tolerance: f64,
    pub threshold: f64,
    pub swap_fraction: f64,
    pub diabatic_multiple: f64,
    pub lambda_start: f64,
    pub compile: crossnav_core::control::CompileOptions,
    pub integrator: IntegratorConfig,
}

impl SearchOptions {
    pub fn from_spec(spec: &crate::config::RunSpec, lambda_start: f64) -> Self {
        Self {
            max_steps: spec.max_steps,
            tie_tolerance: spec.tie_tolerance,
            threshold: spec.threshold,
            swap_fraction: spec.swap_fraction,
            diabatic_multiple: spec.diabatic_multiple,
            lambda_start,
            compile: compile_options(spec),
            integrator: crate::setup::integrator(spec),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub steps: Vec<StepRef>,
    pub pattern: String,
    pub fidelity: f64,
    pub total_time: f64,
    pub swaps: usize,
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub start: usize,
    pub goal: usize,
    pub best: Candidate,
    pub protocol: ProtocolSpec,
    /// Every compiled candidate in enumeration order.
    pub candidates: Vec<Candidate>,
    /// Sequences rejected before integration (unreachable or degenerate).
    pub rejected: usize,
}

impl SearchResult {
    /// Hold durations of the best protocol, in schedule order.
    pub fn hold_durations(&self, opts: &SearchOptions, system: &System) -> Result<Vec<f64>, Error> {
        let schedule = compile(&self.protocol, &system.crossings, &opts.compile)?;
        Ok(schedule
            .segments()
            .iter()
            .filter_map(|s| match s {
                Segment::Hold { duration, .. } => Some(*duration),
                _ => None,
            })
            .collect())
    }
}

/// All sequences of at most `max_steps` steps. The forward pass visits
/// sites `0..=j` in order; after a swap at `j` it may turn back and revisit
/// `j, j-1, ..., k`. Sites are 1-based in the returned references.
pub fn enumerate_paths(sites: usize, max_steps: usize) -> Vec<Vec<StepRef>> {
    let actions = [StepAction::Diabatic, StepAction::Swap];
    let mut out = Vec::new();
    for j in 0..sites {
        if j + 1 > max_steps {
            break;
        }
        for prefix in choices(j + 1, &actions) {
            let forward: Vec<StepRef> =
                prefix.iter().enumerate().map(|(i, a)| StepRef { action: *a, site: i + 1 }).collect();
            out.push(forward.clone());
            if forward[j].action != StepAction::Swap {
                continue;
            }
            for k in (0..=j).rev() {
                let back_len = j - k + 1;
                if j + 1 + back_len > max_steps {
                    break;
                }
                for back in choices(back_len, &actions) {
                    let mut path = forward.clone();
                    path.extend(back.iter().enumerate().map(|(i, a)| StepRef { action: *a, site: j - i + 1 }));
                    out.push(path);
                }
            }
        }
    }
    out
}

fn choices(len: usize, actions: &[StepAction]) -> Vec<Vec<StepAction>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                actions.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(*a);
                    p
                })
            })
            .collect();
    }
    out
}

fn to_protocol(system: &System, steps: &[StepRef], start: usize, goal: usize, opts: &SearchOptions) -> Result<ProtocolSpec, Error> {
    let steps = steps
        .iter()
        .map(|s| ProtocolStep {
            crossing: system.sites[s.site - 1].representative().clone(),
            action: match s.action {
                StepAction::Swap => Action::Swap { fraction: opts.swap_fraction },
                _ => Action::Diabatic { speed_multiple: opts.diabatic_multiple },
            },
        })
        .collect();
    let mut spec =
        ProtocolSpec { start_label: start, goal_label: goal, steps, lambda_start: opts.lambda_start, lambda_end: opts.lambda_start };
    spec.lambda_end = crossnav_core::control::natural_end(&spec, &system.crossings, &opts.compile)?;
    Ok(spec)
}

fn rejected(e: &Error) -> bool {
    matches!(e, Error::UnreachablePath(_) | Error::DegenerateGap(_) | Error::ZeroSpan(_))
}

/// Closed-system search for the best protocol from `start` to `goal`
/// (0-based diabatic indices).
pub fn path_search(system: &System, start: usize, goal: usize, opts: &SearchOptions) -> Result<SearchResult, SearchError> {
    let n = system.diabatic.len();
    for idx in [start, goal] {
        if idx >= n {
            return Err(Error::InvalidParameter(format!("label {} outside 1..={n}", idx + 1)).into());
        }
    }
    let initial = QuantumState::Pure(system.diabatic.state(start).clone());
    let goal_rho = DensityMatrix::from_pure(system.diabatic.state(goal));
    if start == goal {
        let protocol = ProtocolSpec {
            start_label: start,
            goal_label: goal,
            steps: Vec::new(),
            lambda_start: opts.lambda_start,
            lambda_end: opts.lambda_start,
        };
        let best = Candidate { steps: Vec::new(), pattern: String::new(), fidelity: 1.0, total_time: 0.0, swaps: 0 };
        return Ok(SearchResult { start, goal, best: best.clone(), protocol, candidates: vec![best], rejected: 0 });
    }

    let mut candidates = Vec::new();
    let mut protocols = Vec::new();
    let mut rejected_count = 0;
    for steps in enumerate_paths(system.sites.len(), opts.max_steps) {
        let compiled = to_protocol(system, &steps, start, goal, opts)
            .and_then(|p| compile(&p, &system.crossings, &opts.compile).map(|s| (p, s)));
        let (protocol, schedule) = match compiled {
            Ok(x) => x,
            Err(e) if rejected(&e) => {
                rejected_count += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let problem = EvolutionProblem {
            model: system.model.clone(),
            schedule,
            initial: initial.clone(),
            goal: goal_rho.clone(),
            diabatic: system.diabatic.clone(),
            open_system: false,
            delta_ref: system.delta_ref,
            keep_states: false,
        };
        let traj = evolve_closed(&problem, &opts.integrator)?;
        candidates.push(Candidate {
            pattern: protocol.pattern(),
            swaps: protocol.swap_count(),
            steps,
            fidelity: traj.final_fidelity(),
            total_time: traj.total_time(),
        });
        protocols.push(protocol);
    }

    let top = candidates.iter().map(|c| c.fidelity).fold(f64::NEG_INFINITY, f64::max);
    if candidates.is_empty() || top < opts.threshold {
        return Err(SearchError::NoPathFound { best: top.max(0.0), threshold: opts.threshold });
    }
    let mut chosen = None::<usize>;
    for (i, c) in candidates.iter().enumerate() {
        if top - c.fidelity > opts.tie_tolerance {
            continue;
        }
        let better = match chosen {
            None => true,
            Some(b) => {
                let b = &candidates[b];
                (c.total_time, c.swaps) < (b.total_time, b.swaps)
            }
        };
        if better {
            chosen = Some(i);
        }
    }
    let i = chosen.expect("at least one candidate within tolerance");
    Ok(SearchResult {
        start,
        goal,
        best: candidates[i].clone(),
        protocol: protocols[i].clone(),
        candidates,
        rejected: rejected_count,
    })
}

/// Whether the two swap holds of `durations` stand in a 2:1 ratio.
pub fn two_to_one_holds(durations: &[f64]) -> bool {
    if durations.len() != 2 {
        return false;
    }
    let (lo, hi) = (durations[0].min(durations[1]), durations[0].max(durations[1]));
    lo > 0.0 && (hi / lo - 2.0).abs() <= 0.05 * 2.0
}

/// Search every ordered label pair and keep the best one whose protocol
/// uses two swaps with holds in a 2:1 ratio and, if given, follows
/// `pattern`. Pairs within the tie tolerance go to the lowest labels.
/// `start`/`goal` pin one side.
pub fn discover_pair(
    system: &System,
    start: Option<usize>,
    goal: Option<usize>,
    pattern: Option<&str>,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let n = system.diabatic.len();
    let mut qualifying: Vec<SearchResult> = Vec::new();
    for s in 0..n {
        if start.is_some_and(|x| x != s) {
            continue;
        }
        for g in 0..n {
            if g == s || goal.is_some_and(|x| x != g) {
                continue;
            }
            let result = match path_search(system, s, g, opts) {
                Ok(r) => r,
                Err(SearchError::NoPathFound { .. }) => continue,
                Err(e) => return Err(e),
            };
            if pattern.is_some_and(|p| p != result.best.pattern) {
                continue;
            }
            if !two_to_one_holds(&result.hold_durations(opts, system)?) {
                continue;
            }
            qualifying.push(result);
        }
    }
    // Mirror-image pairs tie up to rounding; keep the first in label order.
    let top = qualifying.iter().map(|r| r.best.fidelity).fold(f64::NEG_INFINITY, f64::max);
    qualifying
        .into_iter()
        .find(|r| top - r.best.fidelity <= opts.tie_tolerance)
        .ok_or(SearchError::NoPathFound { best: top.max(0.0), threshold: opts.threshold })
}
