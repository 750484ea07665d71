//! Fixed-step RK4 integration of the Schrödinger and master equations along a
//! control schedule, plus the exact constant-`lambda` propagators used as
//! oracles.

use num_complex::Complex64 as C64;
use smallvec::SmallVec;

use crate::control::{ControlSchedule, Segment};
use crate::error::{Error, Result};
use crate::linalg::{expm, fidelity, hermitian_spectral_norm, purity, ComplexMatrix, DensityMatrix, PureState, I};
use crate::models::{devectorize, vectorize, Model, OpenGenerator};
use crate::spectrum::DiabaticBasis;

pub const NORM_DRIFT_LIMIT: f64 = 1e-6;
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;
pub const HERMITICITY_CORRECTION_LIMIT: f64 = 1e-9;
/// Eigenvalues below this are counted as positivity warnings.
pub const POSITIVITY_WARNING: f64 = -1e-6;
/// Eigenvalues below this abort an open run.
pub const POSITIVITY_ABORT: f64 = -1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub dt_max: f64,
    /// Steps satisfy `dt * ||H||_2 <= eta`.
    pub eta: f64,
    /// Record observables every this many steps (segment ends are always
    /// recorded).
    pub sample_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt_max: 0.05, eta: 0.01, sample_stride: 10 }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        if !(self.eta > 0.0 && self.eta <= 0.1) {
            return Err(Error::InvalidParameter(format!("eta must be in (0, 0.1], got {}", self.eta)));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParameter("sample_stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn dim(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.dim(),
            QuantumState::Mixed(r) => r.dim(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(p) => DensityMatrix::from_pure(p),
            QuantumState::Mixed(r) => r.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionProblem {
    pub model: Model,
    pub schedule: ControlSchedule,
    pub initial: QuantumState,
    pub goal: DensityMatrix,
    pub diabatic: DiabaticBasis,
    pub open_system: bool,
    /// Gap used to express time as `tau = t * delta_ref`.
    pub delta_ref: f64,
    /// Keep the pure state at every recorded point (closed runs only).
    pub keep_states: bool,
}

impl EvolutionProblem {
    fn validate(&self) -> Result<()> {
        let n = self.model.dim();
        for found in [self.initial.dim(), self.goal.dim()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        if let Some(s) = self.diabatic.states.first() {
            if s.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.dim() });
            }
        }
        if self.open_system && self.model.bath().is_none() {
            return Err(Error::MissingBath);
        }
        if !(self.delta_ref > 0.0 && self.delta_ref.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta_ref must be positive, got {}", self.delta_ref)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub tau: f64,
    pub lambda: f64,
    pub fidelity: f64,
    pub purity: f64,
    pub populations: Vec<f64>,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

/// Worst values of the monitored invariants over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
    pub max_norm_drift: f64,
    pub max_hermiticity_correction: f64,
    pub positivity_warnings: usize,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    pub final_state: DensityMatrix,
    /// Final wavefunction of a closed run.
    pub final_pure: Option<PureState>,
    /// Pure state at every point, when requested.
    pub pure_states: Vec<PureState>,
    pub schedule: ControlSchedule,
    pub open_system: bool,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn final_fidelity(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.fidelity)
    }

    pub fn final_purity(&self) -> f64 {
        self.points.last().map_or(f64::NAN, |p| p.purity)
    }

    pub fn total_time(&self) -> f64 {
        self.schedule.total_duration()
    }
}

/// Observables of `state` at one instant.
pub fn observables(
    state: &DensityMatrix,
    goal: &DensityMatrix,
    diabatic: &DiabaticBasis,
    t: f64,
    lambda: f64,
    delta_ref: f64,
) -> Result<TrajectoryPoint> {
    let populations = diabatic
        .states
        .iter()
        .map(|phi| {
            if phi.dim() == state.dim() {
                Ok(state.population(phi))
            } else {
                Err(Error::DimensionMismatch { expected: state.dim(), found: phi.dim() })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrajectoryPoint {
        t,
        tau: t * delta_ref,
        lambda,
        fidelity: fidelity(state, goal)?,
        purity: purity(state),
        populations,
        trace_error: (state.trace() - 1.0).abs(),
        min_eigenvalue: state.min_eigenvalue(),
    })
}

/// Uniform subdivision of a segment: `(steps, dt)` with `dt <= eta / ||H||`
/// at both endpoints. `||H||` is convex in `lambda`, so the endpoint bound
/// holds along the whole ramp.
fn segment_steps(model: &Model, seg: &Segment, cfg: &IntegratorConfig) -> Result<(usize, f64)> {
    let d = seg.duration();
    let norm = hermitian_spectral_norm(&model.hamiltonian(seg.lambda_start()))?
        .max(hermitian_spectral_norm(&model.hamiltonian(seg.lambda_end()))?);
    let dt_rule = if norm > 0.0 { cfg.dt_max.min(cfg.eta / norm) } else { cfg.dt_max };
    let n = (d / dt_rule).ceil().max(1.0) as usize;
    Ok((n, d / n as f64))
}

trait Stepper {
    fn step(&mut self, lambda0: f64, lambda_mid: f64, lambda1: f64, dt: f64, t_end: f64) -> Result<()>;
    fn density(&self) -> DensityMatrix;
    fn pure(&self) -> Option<PureState>;
}

type Amps = SmallVec<[C64; 4]>;

struct ClosedStepper<'a> {
    h_const: &'a ComplexMatrix,
    h_slope: &'a ComplexMatrix,
    psi: Amps,
    max_norm_drift: f64,
}

impl ClosedStepper<'_> {
    fn wavefunction(&self) -> PureState {
        PureState::from_raw(self.psi.clone())
    }

    /// `-i H(lambda) v`
    fn deriv(&self, lambda: f64, v: &[C64]) -> Amps {
        let a = self.h_const.apply(v);
        let b = self.h_slope.apply(v);
        a.iter().zip(&b).map(|(x, y)| -I * (x + y * lambda)).collect()
    }
}

fn offset(base: &[C64], k: &[C64], h: f64) -> Amps {
    base.iter().zip(k).map(|(b, k)| b + k * h).collect()
}

impl Stepper for ClosedStepper<'_> {
    fn step(&mut self, l0: f64, lm: f64, l1: f64, dt: f64, t_end: f64) -> Result<()> {
        let k1 = self.deriv(l0, &self.psi);
        let k2 = self.deriv(lm, &offset(&self.psi, &k1, dt / 2.0));
        let k3 = self.deriv(lm, &offset(&self.psi, &k2, dt / 2.0));
        let k4 = self.deriv(l1, &offset(&self.psi, &k3, dt));
        for (i, p) in self.psi.iter_mut().enumerate() {
            *p += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
        let drift = (self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs();
        self.max_norm_drift = self.max_norm_drift.max(drift);
        if drift > NORM_DRIFT_LIMIT {
            return Err(Error::NormDrift { t: t_end, drift });
        }
        Ok(())
    }

    fn density(&self) -> DensityMatrix {
        DensityMatrix::from_raw(self.wavefunction().projector())
    }

    fn pure(&self) -> Option<PureState> {
        Some(self.wavefunction())
    }
}

struct OpenStepper {
    generator: OpenGenerator,
    rho: ComplexMatrix,
    max_trace_error: f64,
    max_correction: f64,
}

impl Stepper for OpenStepper {
    fn step(&mut self, l0: f64, lm: f64, l1: f64, dt: f64, t_end: f64) -> Result<()> {
        let g = &self.generator;
        let k1 = g.rhs(l0, &self.rho);
        let mut y = self.rho.clone();
        y.axpy(C64::new(dt / 2.0, 0.0), &k1);
        let k2 = g.rhs(lm, &y);
        let mut y = self.rho.clone();
        y.axpy(C64::new(dt / 2.0, 0.0), &k2);
        let k3 = g.rhs(lm, &y);
        let mut y = self.rho.clone();
        y.axpy(C64::new(dt, 0.0), &k3);
        let k4 = g.rhs(l1, &y);

        let w = C64::new(dt / 6.0, 0.0);
        self.rho.axpy(w, &k1);
        self.rho.axpy(w * 2.0, &k2);
        self.rho.axpy(w * 2.0, &k3);
        self.rho.axpy(w, &k4);

        let correction = self.rho.hermiticity_error() / 2.0;
        self.rho = self.rho.hermitian_part();
        self.max_correction = self.max_correction.max(correction);
        if correction > HERMITICITY_CORRECTION_LIMIT {
            return Err(Error::HermiticityDrift { t: t_end, correction });
        }
        let drift = (self.rho.trace().re - 1.0).abs();
        self.max_trace_error = self.max_trace_error.max(drift);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(Error::TraceDrift { t: t_end, drift });
        }
        Ok(())
    }

    fn density(&self) -> DensityMatrix {
        DensityMatrix::from_raw(self.rho.clone())
    }

    fn pure(&self) -> Option<PureState> {
        None
    }
}

struct Recorder<'a> {
    problem: &'a EvolutionProblem,
    points: Vec<TrajectoryPoint>,
    states: Vec<PureState>,
    min_eigenvalue: f64,
    warnings: usize,
}

impl Recorder<'_> {
    /// Record a point; a point at the same time as the previous one replaces
    /// it, so jumps leave only the post-jump value.
    fn record(&mut self, stepper: &dyn Stepper, t: f64, lambda: f64) -> Result<()> {
        let p = self.problem;
        let rho = stepper.density();
        let mut point = observables(&rho, &p.goal, &p.diabatic, t, lambda, p.delta_ref)?;
        if p.open_system {
            self.min_eigenvalue = self.min_eigenvalue.min(point.min_eigenvalue);
            if point.min_eigenvalue < POSITIVITY_WARNING {
                self.warnings += 1;
            }
            if point.min_eigenvalue < POSITIVITY_ABORT {
                return Err(Error::PositivityBreach { t, min_eigenvalue: point.min_eigenvalue });
            }
        } else {
            point.min_eigenvalue = 0.0;
        }
        let replace = self.points.last().is_some_and(|last| last.t == t);
        if replace {
            self.points.pop();
            if p.keep_states {
                self.states.pop();
            }
        }
        self.points.push(point);
        if let (true, Some(psi)) = (p.keep_states, stepper.pure()) {
            self.states.push(psi);
        }
        Ok(())
    }
}

fn run(
    problem: &EvolutionProblem,
    cfg: &IntegratorConfig,
    stepper: &mut dyn Stepper,
) -> Result<(Vec<TrajectoryPoint>, Vec<PureState>, f64, usize, usize)> {
    let schedule = &problem.schedule;
    let mut rec = Recorder { problem, points: Vec::new(), states: Vec::new(), min_eigenvalue: f64::INFINITY, warnings: 0 };
    let mut steps = 0usize;
    rec.record(stepper, schedule.t0(), schedule.initial_lambda())?;

    for (index, seg) in schedule.segments().iter().enumerate() {
        let start = schedule.segment_start(index);
        let end = schedule.segment_end(index);
        if let Segment::Jump { lambda_to } = *seg {
            rec.record(stepper, start, lambda_to)?;
            continue;
        }
        let (n, dt) = segment_steps(&problem.model, seg, cfg)?;
        let elapsed = |k: usize| if k == n { seg.duration() } else { k as f64 * dt };
        for k in 0..n {
            let (e0, e1) = (elapsed(k), elapsed(k + 1));
            let t1 = if k + 1 == n { end } else { start + e1 };
            stepper.step(seg.lambda_at(e0), seg.lambda_at((e0 + e1) / 2.0), seg.lambda_at(e1), e1 - e0, t1)?;
            steps += 1;
            if k + 1 == n || (k + 1) % cfg.sample_stride == 0 {
                rec.record(stepper, t1, seg.lambda_at(e1))?;
            }
        }
    }
    Ok((rec.points, rec.states, rec.min_eigenvalue, rec.warnings, steps))
}

/// Schrödinger evolution `i dpsi/dt = H(lambda(t)) psi`. The norm is
/// monitored but never renormalized.
pub fn evolve_closed(problem: &EvolutionProblem, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    problem.validate()?;
    if problem.open_system {
        return Err(Error::InvalidParameter("evolve_closed called on an open-system problem".into()));
    }
    let QuantumState::Pure(psi0) = &problem.initial else {
        return Err(Error::InvalidState("closed evolution needs a pure initial state".into()));
    };
    let (h_const, h_slope) = problem.model.hamiltonian_parts();
    let mut stepper = ClosedStepper { h_const, h_slope, psi: psi0.amplitudes().iter().copied().collect(), max_norm_drift: 0.0 };
    let (points, states, _, _, steps) = run(problem, cfg, &mut stepper)?;
    let final_pure = stepper.wavefunction();
    Ok(Trajectory {
        points,
        final_state: stepper.density(),
        final_pure: Some(final_pure),
        pure_states: states,
        schedule: problem.schedule.clone(),
        open_system: false,
        diagnostics: Diagnostics {
            max_trace_error: 0.0,
            min_eigenvalue: 0.0,
            max_norm_drift: stepper.max_norm_drift,
            max_hermiticity_correction: 0.0,
            positivity_warnings: 0,
            steps,
        },
    })
}

/// Master-equation evolution with per-step Hermitian symmetrization and
/// trace/positivity monitoring.
pub fn evolve_open(problem: &EvolutionProblem, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    problem.validate()?;
    if !problem.open_system {
        return Err(Error::InvalidParameter("evolve_open called on a closed-system problem".into()));
    }
    let mut stepper = OpenStepper {
        generator: OpenGenerator::new(&problem.model)?,
        rho: problem.initial.to_density().into_matrix(),
        max_trace_error: 0.0,
        max_correction: 0.0,
    };
    let (points, _, min_eig, warnings, steps) = run(problem, cfg, &mut stepper)?;
    let max_trace_error = points.iter().map(|p| p.trace_error).fold(stepper.max_trace_error, f64::max);
    Ok(Trajectory {
        points,
        final_state: stepper.density(),
        final_pure: None,
        pure_states: Vec::new(),
        schedule: problem.schedule.clone(),
        open_system: true,
        diagnostics: Diagnostics {
            max_trace_error,
            min_eigenvalue: min_eig,
            max_norm_drift: 0.0,
            max_hermiticity_correction: stepper.max_correction,
            positivity_warnings: warnings,
            steps,
        },
    })
}

/// Dispatch on `problem.open_system`.
pub fn evolve(problem: &EvolutionProblem, cfg: &IntegratorConfig) -> Result<Trajectory> {
    if problem.open_system {
        evolve_open(problem, cfg)
    } else {
        evolve_closed(problem, cfg)
    }
}

/// Exact propagation over `dt` at fixed `lambda`: `expm(-i H dt) psi` for
/// pure states, `expm(L dt) vec(rho)` for density matrices (closed Liouvillian
/// when the model has no bath).
pub fn exact_step(model: &Model, lambda: f64, dt: f64, state: &QuantumState) -> Result<QuantumState> {
    if state.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: state.dim() });
    }
    Ok(match state {
        QuantumState::Pure(psi) => {
            let u = expm(&model.hamiltonian(lambda).scale(-I * dt));
            QuantumState::Pure(PureState::from_raw(u.apply(psi.amplitudes())))
        }
        QuantumState::Mixed(rho) => {
            let propagator = expm(&model.superoperator(lambda).scale(C64::new(dt, 0.0)));
            let v = propagator.apply(&vectorize(rho.matrix()));
            QuantumState::Mixed(DensityMatrix::from_raw(devectorize(&v)))
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub gamma0: f64,
    pub result: Result<f64>,
}

/// One open run per coupling constant, in input order. A failed row keeps its
/// error and the sweep carries on.
pub fn sweep_gamma(template: &EvolutionProblem, gammas: &[f64], cfg: &IntegratorConfig) -> Vec<SweepRow> {
    gammas
        .iter()
        .map(|&gamma0| {
            let result = template.model.with_gamma0(gamma0).and_then(|model| {
                let problem = EvolutionProblem { model, open_system: true, keep_states: false, ..template.clone() };
                evolve_open(&problem, cfg).map(|traj| traj.final_fidelity())
            });
            SweepRow { gamma0, result }
        })
        .collect()
}
