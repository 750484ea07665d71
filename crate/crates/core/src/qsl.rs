//! Quantum speed limit: the Mandelstam-Tamm bound `arccos(|<psi0|psi_t>|) / dH`
//! and a checker that compares it with the time actually spent on each
//! constant-Hamiltonian hold of a closed trajectory.

use crate::control::Segment;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, PureState};

/// Default tolerance on `bound <= elapsed`.
pub const MT_TOLERANCE: f64 = 1e-6;
const MIN_VARIANCE_SCALE: f64 = 1e-12;

/// Energy spread `sqrt(<H^2> - <H>^2)`, computed as `||(H - <H>) psi||` so
/// it stays non-negative and is unchanged by `H -> H + c I`.
pub fn energy_spread(h: &ComplexMatrix, psi: &PureState) -> Result<f64> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi.dim() });
    }
    let mean = psi.expectation(h).re;
    let hv = h.apply(psi.amplitudes());
    let spread: f64 = hv.iter().zip(psi.amplitudes()).map(|(a, b)| (a - b * mean).norm_sqr()).sum();
    Ok(spread.sqrt())
}

fn overlap(a: &PureState, b: &PureState) -> f64 {
    (a.inner(b).norm() / (a.norm() * b.norm())).min(1.0)
}

/// Shortest time in which `h0` can carry `psi0` to `goal`:
/// `arccos(|<psi0|goal>|) / dH`.
pub fn qsl_time(h0: &ComplexMatrix, psi0: &PureState, goal: &PureState) -> Result<f64> {
    if goal.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: psi0.dim(), found: goal.dim() });
    }
    let angle = overlap(psi0, goal).acos();
    let spread = energy_spread(h0, psi0)?;
    if angle == 0.0 {
        return Ok(0.0);
    }
    if spread < MIN_VARIANCE_SCALE {
        return Err(Error::ZeroVariance);
    }
    Ok(angle / spread)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoldReport {
    pub segment_index: usize,
    pub start: f64,
    pub end: f64,
    pub samples: usize,
    /// Bound and `elapsed - bound` at the last sample of the hold.
    pub end_bound: f64,
    pub end_slack: f64,
    /// Largest `bound - elapsed` over the hold (positive means the bound was
    /// beaten, which would be a violation).
    pub max_excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MtReport {
    pub holds: Vec<HoldReport>,
    pub tolerance: f64,
    pub max_slack: f64,
    /// `(t, bound - elapsed)` for every sample exceeding the tolerance.
    pub violations: Vec<(f64, f64)>,
}

impl MtReport {
    pub fn holds_bound(&self) -> bool {
        self.violations.is_empty()
    }

    /// Whether every hold ends on the bound within the tolerance.
    pub fn saturated(&self) -> bool {
        !self.holds.is_empty() && self.holds.iter().all(|h| h.end_slack.abs() <= self.tolerance)
    }
}

/// Check the bound at every recorded sample of every hold segment of a
/// closed trajectory. `h_of_t` gives the Hamiltonian at a time inside the
/// hold.
pub fn mt_bound_report(traj: &Trajectory, h_of_t: impl Fn(f64) -> ComplexMatrix, tolerance: f64) -> Result<MtReport> {
    if traj.open_system || traj.pure_states.len() != traj.points.len() || traj.points.is_empty() {
        return Err(Error::NotPureTrajectory);
    }
    let schedule = &traj.schedule;
    let mut holds = Vec::new();
    let mut violations = Vec::new();
    let mut max_slack = 0.0_f64;

    for (index, seg) in schedule.segments().iter().enumerate() {
        if !matches!(seg, Segment::Hold { .. }) {
            continue;
        }
        let (start, end) = (schedule.segment_start(index), schedule.segment_end(index));
        let Some(first) = traj.points.iter().position(|p| p.t == start) else {
            continue;
        };
        let h = h_of_t(start);
        let psi0 = &traj.pure_states[first];
        let spread = energy_spread(&h, psi0)?;
        let mut report = HoldReport {
            segment_index: index,
            start,
            end,
            samples: 0,
            end_bound: 0.0,
            end_slack: 0.0,
            max_excess: f64::NEG_INFINITY,
        };
        for (point, psi) in traj.points[first..].iter().zip(&traj.pure_states[first..]) {
            if point.t > end {
                break;
            }
            let elapsed = point.t - start;
            let angle = overlap(psi0, psi).acos();
            let bound = if angle == 0.0 {
                0.0
            } else if spread < MIN_VARIANCE_SCALE {
                f64::INFINITY
            } else {
                angle / spread
            };
            let excess = bound - elapsed;
            report.samples += 1;
            report.end_bound = bound;
            report.end_slack = -excess;
            report.max_excess = report.max_excess.max(excess);
            max_slack = max_slack.max(-excess);
            if excess > tolerance {
                violations.push((point.t, excess));
            }
        }
        holds.push(report);
    }
    Ok(MtReport { holds, tolerance, max_slack, violations })
}
