//! Turn a [`RunSpec`] into a model, its crossings, a diabatic basis and
//! compiled protocols.

use crossnav_core::control::{asymptotic_lambda, natural_end, Action, CompileOptions, ProtocolSpec, ProtocolStep};
use crossnav_core::dynamics::IntegratorConfig;
use crossnav_core::models::{LzParams, Model, TwoSpinParams};
use crossnav_core::spectrum::{diabatic_basis, find_avoided_crossings, scan_spectrum, AvoidedCrossing, DiabaticBasis};
use crossnav_core::{Error, Result};

use crate::config::{Auto, ModelKindName, RunSpec, StepAction, StepRef};

/// Crossings sharing one `lambda_star` (within [`SITE_TOLERANCE`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Site {
    pub lambda_star: f64,
    pub crossings: Vec<AvoidedCrossing>,
}

impl Site {
    /// The crossing actions at this site are applied to: the lowest pair.
    pub fn representative(&self) -> &AvoidedCrossing {
        &self.crossings[0]
    }
}

pub const SITE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct System {
    /// Closed model; baths are attached per run.
    pub model: Model,
    pub crossings: Vec<AvoidedCrossing>,
    pub sites: Vec<Site>,
    pub diabatic: DiabaticBasis,
    pub delta_ref: f64,
}

pub fn build_model(spec: &RunSpec) -> Result<Model> {
    Ok(match spec.kind {
        ModelKindName::Lz => Model::landau_zener(LzParams::new(spec.alpha, spec.delta)?),
        ModelKindName::TwoSpin => Model::two_spin(TwoSpinParams::new(spec.delta_a, spec.delta_b, spec.coupling)?),
    })
}

pub fn group_sites(crossings: &[AvoidedCrossing]) -> Vec<Site> {
    let mut sites: Vec<Site> = Vec::new();
    for ac in crossings {
        match sites.last_mut() {
            Some(site) if (ac.lambda_star - site.lambda_star).abs() <= SITE_TOLERANCE => site.crossings.push(ac.clone()),
            _ => sites.push(Site { lambda_star: ac.lambda_star, crossings: vec![ac.clone()] }),
        }
    }
    for site in &mut sites {
        site.crossings.sort_by_key(|c| c.lower_level);
    }
    sites
}

pub fn build_system(spec: &RunSpec) -> Result<System> {
    let model = build_model(spec)?;
    let scan = scan_spectrum(&model, spec.scan_min, spec.scan_max, spec.scan_points)?;
    let crossings = find_avoided_crossings(&scan, &model)?;
    let sites = group_sites(&crossings);
    let outermost = crossings.iter().map(|c| c.lambda_star.abs()).fold(0.0, f64::max);
    let lambda_ref = match spec.lambda_ref {
        Auto::Fixed(l) => l,
        Auto::Auto => asymptotic_lambda(&crossings, true).ok_or(Error::NoCrossingFound)?.min(-3.0 * outermost),
    };
    let diabatic = diabatic_basis(&model, lambda_ref, &crossings)?;
    let delta_ref = match spec.delta_ref {
        Auto::Fixed(d) => d,
        Auto::Auto => match spec.kind {
            ModelKindName::Lz => spec.delta,
            ModelKindName::TwoSpin => crossings
                .iter()
                .filter(|c| !c.degenerate)
                .map(|c| c.gap)
                .min_by(f64::total_cmp)
                .ok_or(Error::NoCrossingFound)?,
        },
    };
    Ok(System { model, crossings, sites, diabatic, delta_ref })
}

pub fn compile_options(spec: &RunSpec) -> CompileOptions {
    CompileOptions { window_half_widths: spec.window_half_widths, transit_multiple: spec.transit_multiple }
}

pub fn integrator(spec: &RunSpec) -> IntegratorConfig {
    IntegratorConfig { dt_max: spec.dt_max, eta: spec.eta, sample_stride: spec.sample_stride }
}

pub fn action(spec: &RunSpec, a: StepAction) -> Action {
    match a {
        StepAction::Diabatic => Action::Diabatic { speed_multiple: spec.diabatic_multiple },
        StepAction::Swap => Action::Swap { fraction: spec.swap_fraction },
        StepAction::Adiabatic => Action::Adiabatic { speed_fraction: spec.adiabatic_fraction },
    }
}

/// Map 1-based labels onto basis indices.
pub fn label_index(system: &System, label: usize, key: &str) -> Result<usize> {
    if label >= 1 && label <= system.diabatic.len() {
        Ok(label - 1)
    } else {
        Err(Error::InvalidParameter(format!("{key} {label} outside 1..={}", system.diabatic.len())))
    }
}

/// Build a protocol from step references; `lambda_end = auto` ends where the
/// last step leaves the control parameter.
pub fn protocol(spec: &RunSpec, system: &System, steps: &[StepRef], start: usize, goal: usize) -> Result<ProtocolSpec> {
    let steps = steps
        .iter()
        .map(|s| {
            let site = system.sites.get(s.site - 1).ok_or_else(|| {
                Error::InvalidParameter(format!("step site {} outside 1..={}", s.site, system.sites.len()))
            })?;
            Ok(ProtocolStep { crossing: site.representative().clone(), action: action(spec, s.action) })
        })
        .collect::<Result<Vec<_>>>()?;
    let lambda_start = match spec.lambda_start {
        Auto::Fixed(l) => l,
        Auto::Auto => asymptotic_lambda(&system.crossings, true).ok_or(Error::NoCrossingFound)?,
    };
    let mut out = ProtocolSpec { start_label: start, goal_label: goal, steps, lambda_start, lambda_end: lambda_start };
    out.lambda_end = match spec.lambda_end {
        Auto::Fixed(l) => l,
        Auto::Auto => natural_end(&out, &system.crossings, &compile_options(spec))?,
    };
    Ok(out)
}

/// The same path with every sudden switch replaced by an adiabatic sweep.
pub fn adiabatic_variant(steps: &[StepRef]) -> Vec<StepRef> {
    steps
        .iter()
        .map(|s| match s.action {
            StepAction::Swap => StepRef { action: StepAction::Adiabatic, site: s.site },
            _ => *s,
        })
        .collect()
}
