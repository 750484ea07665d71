//! Piecewise control waveforms `lambda(t)` and the compiler that turns a
//! per-crossing action list into one.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::numfmt::format_number;
use crate::spectrum::{AvoidedCrossing, DEGENERATE_GAP};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Segment {
    Hold { lambda: f64, duration: f64 },
    Ramp { lambda_from: f64, lambda_to: f64, duration: f64 },
    /// Instantaneous change of the control parameter.
    Jump { lambda_to: f64 },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match *self {
            Segment::Hold { duration, .. } | Segment::Ramp { duration, .. } => duration,
            Segment::Jump { .. } => 0.0,
        }
    }

    pub fn lambda_start(&self) -> f64 {
        match *self {
            Segment::Hold { lambda, .. } => lambda,
            Segment::Ramp { lambda_from, .. } => lambda_from,
            Segment::Jump { lambda_to } => lambda_to,
        }
    }

    pub fn lambda_end(&self) -> f64 {
        match *self {
            Segment::Hold { lambda, .. } => lambda,
            Segment::Ramp { lambda_to, .. } | Segment::Jump { lambda_to } => lambda_to,
        }
    }

    /// `lambda` at `elapsed` time into the segment.
    pub fn lambda_at(&self, elapsed: f64) -> f64 {
        match *self {
            Segment::Hold { lambda, .. } => lambda,
            Segment::Jump { lambda_to } => lambda_to,
            Segment::Ramp { lambda_from, lambda_to, duration } => {
                let frac = (elapsed / duration).clamp(0.0, 1.0);
                lambda_from + (lambda_to - lambda_from) * frac
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let lambdas_ok = self.lambda_start().is_finite() && self.lambda_end().is_finite();
        let duration_ok = match self {
            Segment::Jump { .. } => true,
            _ => self.duration() > 0.0 && self.duration().is_finite(),
        };
        if lambdas_ok && duration_ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid segment {self:?}")))
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlSchedule {
    segments: Vec<Segment>,
    t0: f64,
    /// Start time of every segment, then the end time.
    boundaries: Vec<f64>,
}

impl ControlSchedule {
    pub fn new(t0: f64, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("schedule needs at least one segment".into()));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("start time {t0}")));
        }
        let mut boundaries = Vec::with_capacity(segments.len() + 1);
        let mut acc = CompensatedSum::default();
        for seg in &segments {
            seg.validate()?;
            boundaries.push(t0 + acc.value());
            acc.add(seg.duration());
        }
        boundaries.push(t0 + acc.value());
        Ok(Self { segments, t0, boundaries })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn total_duration(&self) -> f64 {
        self.end_time() - self.t0
    }

    pub fn end_time(&self) -> f64 {
        *self.boundaries.last().expect("boundaries are never empty")
    }

    pub fn segment_start(&self, index: usize) -> f64 {
        self.boundaries[index]
    }

    pub fn segment_end(&self, index: usize) -> f64 {
        self.boundaries[index + 1]
    }

    pub fn initial_lambda(&self) -> f64 {
        self.segments[0].lambda_start()
    }

    pub fn final_lambda(&self) -> f64 {
        self.segments.last().expect("schedule is non-empty").lambda_end()
    }

    /// Piecewise evaluation; right-continuous at jumps.
    pub fn lambda_at(&self, t: f64) -> Result<f64> {
        let (start, end) = (self.t0, self.end_time());
        if !(t >= start && t <= end) {
            return Err(Error::OutOfRange { t, start, end });
        }
        let index = self
            .boundaries
            .iter()
            .take(self.segments.len())
            .rposition(|&b| b <= t)
            .expect("t >= t0 = boundaries[0]");
        Ok(self.segments[index].lambda_at(t - self.boundaries[index]))
    }

    /// `(segment index, start, end, lambda)` of every hold.
    pub fn holds(&self) -> Vec<(usize, f64, f64, f64)> {
        self.segments
            .iter()
            .enumerate()
            .filter_map(|(i, seg)| match *seg {
                Segment::Hold { lambda, .. } => Some((i, self.segment_start(i), self.segment_end(i), lambda)),
                _ => None,
            })
            .collect()
    }

    /// One segment per line: `HOLD lambda duration`, `RAMP from to duration`
    /// or `JUMP to`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match *seg {
                Segment::Hold { lambda, duration } => {
                    writeln!(out, "HOLD {} {}", format_number(lambda), format_number(duration))
                }
                Segment::Ramp { lambda_from, lambda_to, duration } => writeln!(
                    out,
                    "RAMP {} {} {}",
                    format_number(lambda_from),
                    format_number(lambda_to),
                    format_number(duration)
                ),
                Segment::Jump { lambda_to } => writeln!(out, "JUMP {}", format_number(lambda_to)),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Inverse of [`ControlSchedule::to_text`]; the schedule starts at `t = 0`.
    /// Blank lines and `#` comments are ignored.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut segments = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::InvalidParameter(format!("schedule line {}: {msg}: `{raw}`", lineno + 1));
            let mut fields = line.split_whitespace();
            let keyword = fields.next().expect("line is non-empty");
            let numbers = fields
                .map(|f| f.parse::<f64>().map_err(|_| err("bad number")))
                .collect::<Result<Vec<_>>>()?;
            let seg = match (keyword, numbers.as_slice()) {
                ("HOLD", &[lambda, duration]) => Segment::Hold { lambda, duration },
                ("RAMP", &[lambda_from, lambda_to, duration]) => Segment::Ramp { lambda_from, lambda_to, duration },
                ("JUMP", &[lambda_to]) => Segment::Jump { lambda_to },
                ("HOLD" | "RAMP" | "JUMP", _) => return Err(err("wrong number of fields")),
                _ => return Err(err("unknown segment kind")),
            };
            seg.validate().map_err(|_| err("invalid segment"))?;
            segments.push(seg);
        }
        Self::new(0.0, segments)
    }
}

/// Jump onto the crossing, hold for `fraction * pi / gap`, jump to
/// `lambda_exit`. With `fraction = 1` the hold fully exchanges the two
/// diabatic states of the crossing.
pub fn sudden_switch(ac: &AvoidedCrossing, fraction: f64, lambda_exit: f64) -> Result<Vec<Segment>> {
    if ac.degenerate || !(ac.gap > DEGENERATE_GAP) {
        return Err(Error::DegenerateGap(ac.gap));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("swap fraction must be in (0, 1], got {fraction}")));
    }
    Ok(vec![
        Segment::Jump { lambda_to: ac.lambda_star },
        Segment::Hold { lambda: ac.lambda_star, duration: fraction * PI / ac.gap },
        Segment::Jump { lambda_to: lambda_exit },
    ])
}

/// Linear sweep at constant `speed`.
pub fn ramp(lambda_from: f64, lambda_to: f64, speed: f64) -> Result<Segment> {
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::NonpositiveSpeed(speed));
    }
    if lambda_from == lambda_to {
        return Err(Error::ZeroSpan(lambda_from));
    }
    Ok(Segment::Ramp { lambda_from, lambda_to, duration: (lambda_to - lambda_from).abs() / speed })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    /// Sweep through the crossing at `speed_multiple` times its critical
    /// velocity.
    Diabatic { speed_multiple: f64 },
    /// Sweep through the crossing at `speed_fraction` of its critical
    /// velocity.
    Adiabatic { speed_fraction: f64 },
    /// Sudden switch with hold `fraction * pi / gap`.
    Swap { fraction: f64 },
}

impl Action {
    pub const DEFAULT_DIABATIC: Action = Action::Diabatic { speed_multiple: 100.0 };
    pub const DEFAULT_ADIABATIC: Action = Action::Adiabatic { speed_fraction: 0.01 };
    pub const FULL_SWAP: Action = Action::Swap { fraction: 1.0 };

    /// One-letter code: `D`, `A` or `S`.
    pub fn code(&self) -> char {
        match self {
            Action::Diabatic { .. } => 'D',
            Action::Adiabatic { .. } => 'A',
            Action::Swap { .. } => 'S',
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Action::Diabatic { speed_multiple } => speed_multiple > 1.0 && speed_multiple.is_finite(),
            Action::Adiabatic { speed_fraction } => speed_fraction > 0.0 && speed_fraction < 1.0,
            Action::Swap { fraction } => fraction > 0.0 && fraction <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid action {self:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolStep {
    pub crossing: AvoidedCrossing,
    pub action: Action,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    /// Index into the diabatic basis.
    pub start_label: usize,
    pub goal_label: usize,
    pub steps: Vec<ProtocolStep>,
    pub lambda_start: f64,
    pub lambda_end: f64,
}

impl ProtocolSpec {
    /// Action codes joined by dashes, e.g. `D-S-D-S`.
    pub fn pattern(&self) -> String {
        self.steps
            .iter()
            .map(|s| s.action.code().to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    pub fn swap_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s.action, Action::Swap { .. })).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompileOptions {
    /// Diabatic/adiabatic ramps span this many half-widths either side of a
    /// crossing.
    pub window_half_widths: f64,
    /// Ramps between crossing windows run at this multiple of the smallest
    /// critical velocity among the crossings.
    pub transit_multiple: f64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { window_half_widths: 10.0, transit_multiple: 100.0 }
    }
}

/// Asymptotic start point: `20` half-widths of the outermost crossing on the
/// requested side beyond it.
pub fn asymptotic_lambda(crossings: &[AvoidedCrossing], left: bool) -> Option<f64> {
    let outer = if left {
        crossings.iter().min_by(|a, b| a.lambda_star.total_cmp(&b.lambda_star))?
    } else {
        crossings.iter().max_by(|a, b| a.lambda_star.total_cmp(&b.lambda_star))?
    };
    let offset = 20.0 * outer.half_width();
    Some(if left { outer.lambda_star - offset } else { outer.lambda_star + offset })
}

struct Walk {
    segments: Vec<Segment>,
    position: f64,
}

fn transit_speed(crossings: &[AvoidedCrossing], opts: &CompileOptions) -> Option<f64> {
    crossings
        .iter()
        .filter(|c| !c.degenerate)
        .map(AvoidedCrossing::critical_velocity)
        .min_by(f64::total_cmp)
        .map(|v| v * opts.transit_multiple)
}

fn check_transit(from: f64, to: f64, crossings: &[AvoidedCrossing]) -> Result<()> {
    let (lo, hi) = if from < to { (from, to) } else { (to, from) };
    if let Some(c) = crossings.iter().find(|c| c.lambda_star > lo && c.lambda_star < hi) {
        return Err(Error::UnreachablePath(format!(
            "transit from {from} to {to} would sweep through the crossing at {} without an action",
            c.lambda_star
        )));
    }
    Ok(())
}

fn walk(spec: &ProtocolSpec, crossings: &[AvoidedCrossing], opts: &CompileOptions, finish: bool) -> Result<Walk> {
    let transit = transit_speed(crossings, opts);
    let transit_ramp = |from: f64, to: f64| -> Result<Segment> {
        check_transit(from, to, crossings)?;
        let speed = transit.ok_or_else(|| Error::UnreachablePath("no crossing sets a transit speed".into()))?;
        ramp(from, to, speed)
    };

    let mut segments = vec![Segment::Jump { lambda_to: spec.lambda_start }];
    let mut position = spec.lambda_start;
    let mut direction = 1.0_f64;

    for step in &spec.steps {
        step.action.validate()?;
        let ac = &step.crossing;
        if ac.lambda_star != position {
            direction = (ac.lambda_star - position).signum();
        }
        let reach = opts.window_half_widths * ac.half_width();
        let exit = ac.lambda_star + direction * reach;
        let speed = match step.action {
            Action::Swap { fraction } => {
                segments.extend(sudden_switch(ac, fraction, exit)?);
                position = exit;
                continue;
            }
            Action::Diabatic { speed_multiple } => speed_multiple * ac.critical_velocity(),
            Action::Adiabatic { speed_fraction } => speed_fraction * ac.critical_velocity(),
        };
        if ac.degenerate {
            return Err(Error::DegenerateGap(ac.gap));
        }
        let entry = ac.lambda_star - direction * reach;
        if (entry - position) * direction > 0.0 {
            segments.push(transit_ramp(position, entry)?);
            position = entry;
        }
        segments.push(ramp(position, exit, speed)?);
        position = exit;
    }

    if finish && position != spec.lambda_end {
        segments.push(transit_ramp(position, spec.lambda_end)?);
        position = spec.lambda_end;
    }
    Ok(Walk { segments, position })
}

/// Where the control parameter sits after the last step, before any final
/// transit to `lambda_end`.
pub fn natural_end(spec: &ProtocolSpec, crossings: &[AvoidedCrossing], opts: &CompileOptions) -> Result<f64> {
    walk(spec, crossings, opts, false).map(|w| w.position)
}

/// Expand a protocol into a schedule starting at `t = 0`: sudden switches for
/// `Swap` steps, windowed ramps at the per-crossing speed for `Diabatic` and
/// `Adiabatic` steps, and transit ramps in between. A transit that would pass
/// a crossing not named by any step is rejected as unreachable.
pub fn compile(spec: &ProtocolSpec, crossings: &[AvoidedCrossing], opts: &CompileOptions) -> Result<ControlSchedule> {
    ControlSchedule::new(0.0, walk(spec, crossings, opts, true)?.segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lz_crossing(gap: f64) -> AvoidedCrossing {
        AvoidedCrossing { lambda_star: 0.0, gap, lower_level: 0, slopes: (1.0, -1.0), degenerate: false }
    }

    #[test]
    fn lambda_at_examples() {
        let s = ControlSchedule::new(0.0, vec![Segment::Hold { lambda: 2.0, duration: 1.0 }]).unwrap();
        assert_eq!(s.lambda_at(0.5).unwrap(), 2.0);

        let s = ControlSchedule::new(0.0, vec![Segment::Ramp { lambda_from: 0.0, lambda_to: 1.0, duration: 2.0 }]).unwrap();
        assert_eq!(s.lambda_at(1.0).unwrap(), 0.5);

        let s = ControlSchedule::new(0.0, vec![
            Segment::Hold { lambda: -5.0, duration: 1.0 },
            Segment::Jump { lambda_to: 0.0 },
            Segment::Hold { lambda: 0.0, duration: 1.0 },
        ])
        .unwrap();
        assert_eq!(s.lambda_at(1.0).unwrap(), 0.0);
        assert_eq!(s.lambda_at(1.0 - 1e-12).unwrap(), -5.0);
        assert_eq!(s.lambda_at(1.0 + 1e-12).unwrap(), 0.0);
        assert!(matches!(s.lambda_at(2.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(s.lambda_at(-0.1), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn schedule_rejects_bad_segments() {
        assert!(ControlSchedule::new(0.0, vec![]).is_err());
        assert!(ControlSchedule::new(0.0, vec![Segment::Hold { lambda: 0.0, duration: 0.0 }]).is_err());
        assert!(ControlSchedule::new(0.0, vec![Segment::Ramp { lambda_from: 0.0, lambda_to: 1.0, duration: -1.0 }]).is_err());
    }

    #[test]
    fn sudden_switch_examples() {
        let delta = 1.3;
        let segs = sudden_switch(&lz_crossing(delta), 1.0, 20.0).unwrap();
        assert_eq!(segs[0], Segment::Jump { lambda_to: 0.0 });
        assert_eq!(segs[1], Segment::Hold { lambda: 0.0, duration: PI / delta });
        assert_eq!(segs[2], Segment::Jump { lambda_to: 20.0 });

        let segs = sudden_switch(&lz_crossing(2.0 * delta), 1.0, 20.0).unwrap();
        assert_abs_diff_eq!(segs[1].duration(), PI / (2.0 * delta), epsilon = 1e-15);

        let segs = sudden_switch(&lz_crossing(delta), 0.5, 20.0).unwrap();
        assert_abs_diff_eq!(segs[1].duration(), PI / (2.0 * delta), epsilon = 1e-15);
    }

    #[test]
    fn sudden_switch_errors() {
        let mut flat = lz_crossing(1e-12);
        flat.degenerate = true;
        assert!(matches!(sudden_switch(&flat, 1.0, 1.0), Err(Error::DegenerateGap(_))));
        assert!(sudden_switch(&lz_crossing(1.0), 0.0, 1.0).is_err());
        assert!(sudden_switch(&lz_crossing(1.0), 1.5, 1.0).is_err());
    }

    #[test]
    fn ramp_examples() {
        assert_eq!(ramp(0.0, 10.0, 5.0).unwrap().duration(), 2.0);
        assert_eq!(ramp(10.0, 0.0, 5.0).unwrap().duration(), 2.0);
        assert!(matches!(ramp(0.0, 1.0, 0.0), Err(Error::NonpositiveSpeed(_))));
        assert!(matches!(ramp(1.0, 1.0, 2.0), Err(Error::ZeroSpan(_))));
    }

    #[test]
    fn compile_empty_protocol() {
        let spec = ProtocolSpec { start_label: 0, goal_label: 0, steps: vec![], lambda_start: -3.0, lambda_end: -3.0 };
        let s = compile(&spec, &[lz_crossing(1.0)], &CompileOptions::default()).unwrap();
        assert_eq!(s.total_duration(), 0.0);
        assert_eq!(s.initial_lambda(), -3.0);
        assert_eq!(s.final_lambda(), -3.0);
    }

    #[test]
    fn compile_single_swap_is_the_sudden_switch() {
        let ac = lz_crossing(1.0);
        let spec = ProtocolSpec {
            start_label: 0,
            goal_label: 1,
            steps: vec![ProtocolStep { crossing: ac.clone(), action: Action::FULL_SWAP }],
            lambda_start: -20.0,
            lambda_end: 20.0,
        };
        let opts = CompileOptions { window_half_widths: 40.0, ..Default::default() };
        let s = compile(&spec, &[ac], &opts).unwrap();
        assert_eq!(s.segments(), &[
            Segment::Jump { lambda_to: -20.0 },
            Segment::Jump { lambda_to: 0.0 },
            Segment::Hold { lambda: 0.0, duration: PI },
            Segment::Jump { lambda_to: 20.0 },
        ]);
        assert_eq!(s.total_duration(), PI);
    }

    #[test]
    fn compile_respects_speed_bounds() {
        let ac = lz_crossing(1.0);
        let vc = ac.critical_velocity();
        for action in [Action::DEFAULT_DIABATIC, Action::DEFAULT_ADIABATIC] {
            let spec = ProtocolSpec {
                start_label: 0,
                goal_label: 0,
                steps: vec![ProtocolStep { crossing: ac.clone(), action }],
                lambda_start: -20.0,
                lambda_end: 20.0,
            };
            let s = compile(&spec, &[ac.clone()], &CompileOptions::default()).unwrap();
            let window = s
                .segments()
                .iter()
                .find(|seg| matches!(seg, Segment::Ramp { lambda_from, .. } if *lambda_from == -5.0))
                .unwrap();
            let speed = (window.lambda_end() - window.lambda_start()).abs() / window.duration();
            match action {
                Action::Diabatic { speed_multiple } => assert!(speed >= speed_multiple * vc * (1.0 - 1e-12)),
                Action::Adiabatic { speed_fraction } => assert!(speed <= speed_fraction * vc * (1.0 + 1e-12)),
                _ => unreachable!(),
            }
            assert_eq!(s.final_lambda(), 20.0);
        }
    }

    #[test]
    fn compile_rejects_skipped_crossings() {
        let a = lz_crossing(1.0);
        let b = AvoidedCrossing { lambda_star: 30.0, ..lz_crossing(1.0) };
        let spec = ProtocolSpec {
            start_label: 0,
            goal_label: 0,
            steps: vec![ProtocolStep { crossing: a.clone(), action: Action::DEFAULT_DIABATIC }],
            lambda_start: -20.0,
            lambda_end: 50.0,
        };
        assert!(matches!(compile(&spec, &[a, b], &CompileOptions::default()), Err(Error::UnreachablePath(_))));
    }

    #[test]
    fn schedule_text_round_trip() {
        let s = ControlSchedule::new(0.0, vec![
            Segment::Jump { lambda_to: -1.5643527987140184 },
            Segment::Ramp { lambda_from: -1.5643527987140184, lambda_to: -0.1, duration: 0.1 + 0.2 },
            Segment::Hold { lambda: 0.0, duration: PI / 4.47124036410532 },
            Segment::Jump { lambda_to: 1e-300 },
        ])
        .unwrap();
        let text = s.to_text();
        assert!(text.starts_with("JUMP -1.5643527987140184\nRAMP "));
        let back = ControlSchedule::from_text(&text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn schedule_text_errors() {
        assert!(ControlSchedule::from_text("HOLD 1").is_err());
        assert!(ControlSchedule::from_text("WAIT 1 2").is_err());
        assert!(ControlSchedule::from_text("HOLD 1 x").is_err());
        assert!(ControlSchedule::from_text("HOLD 1 -2").is_err());
    }
}
