//! Spectrum scans, avoided-crossing detection and the frozen diabatic basis.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, EigenSystem, PureState};
use crate::models::{LzParams, Model};

/// Ternary-search iteration cap when refining a crossing.
pub const REFINE_MAX_ITER: usize = 200;
/// Target width of the refined crossing location.
pub const REFINE_LAMBDA_TOL: f64 = 1e-8;
/// Gaps below this are reported as (numerically) exact crossings.
pub const DEGENERATE_GAP: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpectrumScan {
    pub lambdas: Vec<f64>,
    /// `branches[i]` holds the ascending eigenvalues at `lambdas[i]`.
    pub branches: Vec<Vec<f64>>,
    pub start_basis: EigenSystem,
    pub end_basis: EigenSystem,
}

impl SpectrumScan {
    /// Separation between branches `k` and `k + 1` at every grid point.
    pub fn adjacent_gaps(&self, k: usize) -> Vec<f64> {
        self.branches.iter().map(|e| e[k + 1] - e[k]).collect()
    }
}

pub fn scan_spectrum(model: &Model, lambda_min: f64, lambda_max: f64, n: usize) -> Result<SpectrumScan> {
    if n < 3 {
        return Err(Error::InvalidRange(format!("need at least 3 grid points, got {n}")));
    }
    if !(lambda_min < lambda_max) || !lambda_min.is_finite() || !lambda_max.is_finite() {
        return Err(Error::InvalidRange(format!("[{lambda_min}, {lambda_max}]")));
    }
    let step = (lambda_max - lambda_min) / (n - 1) as f64;
    let lambdas: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { lambda_max } else { lambda_min + step * i as f64 })
        .collect();
    let branches = lambdas
        .iter()
        .map(|&l| hermitian_eigen(&model.hamiltonian(l)).map(|e| e.values))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumScan {
        start_basis: hermitian_eigen(&model.hamiltonian(lambda_min))?,
        end_basis: hermitian_eigen(&model.hamiltonian(lambda_max))?,
        lambdas,
        branches,
    })
}

/// Local minimum of the separation between adiabatic branches `lower_level`
/// and `lower_level + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AvoidedCrossing {
    pub lambda_star: f64,
    pub gap: f64,
    pub lower_level: usize,
    /// Asymptotic diabatic slopes `dE/dlambda`. `slopes.0` belongs to the
    /// diabatic state that is the lower branch on the left of the crossing.
    pub slopes: (f64, f64),
    pub degenerate: bool,
}

impl AvoidedCrossing {
    /// Half the slope difference: the `alpha` of the equivalent two-level
    /// model.
    pub fn alpha_eff(&self) -> f64 {
        (self.slopes.0 - self.slopes.1).abs() / 2.0
    }

    /// Local two-level reduction `(alpha_eff, gap)`.
    pub fn local_lz(&self) -> Result<LzParams> {
        LzParams::new(self.alpha_eff(), self.gap)
    }

    pub fn critical_velocity(&self) -> f64 {
        PI * self.gap * self.gap / (4.0 * self.alpha_eff())
    }

    /// Width in lambda over which the two branches mix: `gap / (2 alpha_eff)`.
    pub fn half_width(&self) -> f64 {
        self.gap / (2.0 * self.alpha_eff())
    }
}

fn branch_gap(model: &Model, k: usize, lambda: f64) -> Result<f64> {
    let e = hermitian_eigen(&model.hamiltonian(lambda))?;
    Ok(e.values[k + 1] - e.values[k])
}

/// Hellmann-Feynman slopes of branches `k` and `k + 1`.
fn branch_slopes(model: &Model, k: usize, lambda: f64) -> Result<(f64, f64)> {
    let e = hermitian_eigen(&model.hamiltonian(lambda))?;
    let dh = model.dh_dlambda();
    Ok((e.vector(k).expectation(dh).re, e.vector(k + 1).expectation(dh).re))
}

fn refine_minimum(model: &Model, k: usize, mut lo: f64, mut hi: f64) -> Result<(f64, f64)> {
    for _ in 0..REFINE_MAX_ITER {
        if hi - lo <= REFINE_LAMBDA_TOL {
            break;
        }
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if branch_gap(model, k, a)? <= branch_gap(model, k, b)? {
            hi = b;
        } else {
            lo = a;
        }
    }
    let star = 0.5 * (lo + hi);
    Ok((star, branch_gap(model, k, star)?))
}

/// Slopes measured at `lambda* ± x` are bent by the level repulsion. Fitting
/// them to `E0 + c (l - l*) ± sqrt(a^2 (l - l*)^2 + gap^2 / 4)` recovers the
/// asymptotic slopes `c ± a`.
fn asymptotic_slopes(model: &Model, k: usize, star: f64, gap: f64, x: f64) -> Result<(f64, f64)> {
    let (lower_left, upper_left) = branch_slopes(model, k, star - x)?;
    let (lower_right, upper_right) = branch_slopes(model, k, star + x)?;
    let mean = (lower_left + upper_left + lower_right + upper_right) / 4.0;
    let half = (lower_left + upper_right - upper_left - lower_right) / 4.0;
    let a = if half > 0.0 {
        let h2 = half * half;
        let x2 = x * x;
        ((h2 * x2 + (h2 * h2 * x2 * x2 + h2 * gap * gap * x2).sqrt()) / (2.0 * x2)).sqrt()
    } else {
        half.abs()
    };
    Ok((mean + a, mean - a))
}

/// Detect every interior local minimum of adjacent-branch separation in
/// `scan`, refine it on the exact spectrum of `model`, and measure the
/// asymptotic diabatic slopes at `lambda* ± 5 gap / |s1 - s2|`.
pub fn find_avoided_crossings(scan: &SpectrumScan, model: &Model) -> Result<Vec<AvoidedCrossing>> {
    let n = scan.lambdas.len();
    let levels = scan.branches.first().map_or(0, Vec::len);
    let spacing = scan.lambdas[1] - scan.lambdas[0];
    let mut found = Vec::new();

    for k in 0..levels.saturating_sub(1) {
        let gaps = scan.adjacent_gaps(k);
        for i in 1..n - 1 {
            if !(gaps[i] < gaps[i - 1] && gaps[i] <= gaps[i + 1]) {
                continue;
            }
            let (star, gap) = refine_minimum(model, k, scan.lambdas[i - 1], scan.lambdas[i + 1])?;

            // The probe offset depends on the slope difference it measures;
            // start from a grid-scale guess and iterate to self-consistency.
            let mut offset = 2.0 * spacing;
            let mut slopes = asymptotic_slopes(model, k, star, gap, offset)?;
            for _ in 0..4 {
                let diff = (slopes.0 - slopes.1).abs();
                if diff == 0.0 {
                    break;
                }
                offset = (5.0 * gap / diff).max(REFINE_LAMBDA_TOL);
                slopes = asymptotic_slopes(model, k, star, gap, offset)?;
            }

            found.push(AvoidedCrossing {
                lambda_star: star,
                gap,
                lower_level: k,
                slopes,
                degenerate: gap < DEGENERATE_GAP,
            });
        }
    }
    if found.is_empty() {
        return Err(Error::NoCrossingFound);
    }
    found.sort_by(|a, b| {
        a.lambda_star
            .total_cmp(&b.lambda_star)
            .then(a.lower_level.cmp(&b.lower_level))
    });
    Ok(found)
}

/// Eigenstates of `H(lambda_ref)` far from every crossing, frozen for the
/// whole run and labelled `1..=dim` by ascending energy.
#[derive(Clone, Debug, PartialEq)]
pub struct DiabaticBasis {
    pub states: Vec<PureState>,
    pub labels: Vec<String>,
    pub lambda_ref: f64,
}

impl DiabaticBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, index: usize) -> &PureState {
        &self.states[index]
    }

    /// Index of the state with the given label.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Largest `|<a|b> - delta_ab|` over the basis.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.states.iter().enumerate() {
            for (j, b) in self.states.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.inner(b).norm() - target).abs());
            }
        }
        worst
    }
}

pub fn diabatic_basis(model: &Model, lambda_ref: f64, crossings: &[AvoidedCrossing]) -> Result<DiabaticBasis> {
    let outermost = crossings.iter().map(|c| c.lambda_star.abs()).fold(0.0, f64::max);
    if !lambda_ref.is_finite() || lambda_ref.abs() <= 2.0 * outermost {
        return Err(Error::ReferenceTooClose { lambda_ref, outermost });
    }
    let eig = hermitian_eigen(&model.hamiltonian(lambda_ref))?;
    let states: Vec<PureState> = (0..eig.dim()).map(|k| eig.vector(k)).collect();
    let labels = (1..=states.len()).map(|k| k.to_string()).collect();
    Ok(DiabaticBasis { states, labels, lambda_ref })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{LzParams, TwoSpinParams};
    use approx::assert_abs_diff_eq;

    fn lz_model(alpha: f64, delta: f64) -> Model {
        Model::landau_zener(LzParams::new(alpha, delta).unwrap())
    }

    #[test]
    fn scan_rejects_bad_ranges() {
        let m = lz_model(1.0, 1.0);
        assert!(matches!(scan_spectrum(&m, 0.0, 1.0, 2), Err(Error::InvalidRange(_))));
        assert!(matches!(scan_spectrum(&m, 1.0, 1.0, 10), Err(Error::InvalidRange(_))));
        assert!(matches!(scan_spectrum(&m, 2.0, 1.0, 10), Err(Error::InvalidRange(_))));
    }

    #[test]
    fn scan_grid_and_ordering() {
        let m = lz_model(1.0, 1.0);
        let scan = scan_spectrum(&m, -10.0, 10.0, 201).unwrap();
        assert_eq!(scan.lambdas.len(), 201);
        assert_eq!(*scan.lambdas.last().unwrap(), 10.0);
        assert!(scan.lambdas.windows(2).all(|w| w[0] < w[1]));
        assert!(scan.branches.iter().all(|e| e.windows(2).all(|w| w[0] <= w[1])));
    }

    #[test]
    fn lz_has_one_crossing_at_origin() {
        let m = lz_model(1.0, 1.0);
        let scan = scan_spectrum(&m, -10.0, 10.0, 201).unwrap();
        let acs = find_avoided_crossings(&scan, &m).unwrap();
        assert_eq!(acs.len(), 1);
        let ac = &acs[0];
        assert_abs_diff_eq!(ac.lambda_star, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(ac.gap, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ac.slopes.0, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(ac.slopes.1, -1.0, epsilon = 1e-9);
        assert!(!ac.degenerate);
    }

    #[test]
    fn lz_crossing_gap_matches_delta() {
        for delta in [0.5, 1.0, 2.43] {
            let m = lz_model(1.0, delta);
            // Off-centre grid so the minimum never sits on a grid point.
            let scan = scan_spectrum(&m, -9.0, 10.0, 150).unwrap();
            let acs = find_avoided_crossings(&scan, &m).unwrap();
            assert_eq!(acs.len(), 1);
            assert_abs_diff_eq!(acs[0].gap, delta, epsilon = 1e-8);
        }
    }

    #[test]
    fn no_crossing_when_branches_separate_monotonically() {
        let m = lz_model(1.0, 1.0);
        let scan = scan_spectrum(&m, 1.0, 5.0, 50).unwrap();
        assert!(matches!(find_avoided_crossings(&scan, &m), Err(Error::NoCrossingFound)));
    }

    #[test]
    fn two_spin_has_four_crossings() {
        let m = Model::two_spin(TwoSpinParams::default());
        let scan = scan_spectrum(&m, -3.0, 3.0, 601).unwrap();
        let acs = find_avoided_crossings(&scan, &m).unwrap();
        assert_eq!(acs.len(), 4);
        let central: Vec<_> = acs.iter().filter(|c| c.lambda_star.abs() < 1e-6).collect();
        let side: Vec<_> = acs.iter().filter(|c| c.lambda_star.abs() > 0.5).collect();
        assert_eq!(central.len(), 2);
        assert_eq!(side.len(), 2);
        assert_abs_diff_eq!(side[0].lambda_star, -side[1].lambda_star, epsilon = 1e-6);
        // Central gaps are close to twice the side gap for coupling = delta_a / 2.
        assert_abs_diff_eq!(central[0].gap, 2.0 * side[0].gap, epsilon = 2e-3);
        for c in &acs {
            assert_abs_diff_eq!(c.alpha_eff(), 50.0, epsilon = 0.1);
        }
    }

    #[test]
    fn local_lz_reduction_fits_crossing_branches() {
        let m = Model::two_spin(TwoSpinParams::default());
        let scan = scan_spectrum(&m, -3.0, 3.0, 601).unwrap();
        for ac in find_avoided_crossings(&scan, &m).unwrap() {
            let (s1, s2) = ac.slopes;
            let a = ac.alpha_eff();
            let c = (s1 + s2) / 2.0;
            let e_star = hermitian_eigen(&m.hamiltonian(ac.lambda_star)).unwrap().values;
            let e0 = (e_star[ac.lower_level] + e_star[ac.lower_level + 1]) / 2.0;
            let reach = ac.gap / (s1 - s2).abs();
            for j in -10..=10 {
                let x = reach * j as f64 / 10.0;
                let e = hermitian_eigen(&m.hamiltonian(ac.lambda_star + x)).unwrap().values;
                let root = ((a * x).powi(2) + (ac.gap / 2.0).powi(2)).sqrt();
                for (actual, model_e) in [(e[ac.lower_level], e0 + c * x - root), (e[ac.lower_level + 1], e0 + c * x + root)] {
                    let rel = (actual - model_e).abs() / root;
                    assert!(rel <= 1e-2, "residual {rel} at offset {x}");
                }
            }
        }
    }

    #[test]
    fn lz_diabatic_basis_is_computational() {
        let m = lz_model(1.0, 1.0);
        let scan = scan_spectrum(&m, -10.0, 10.0, 201).unwrap();
        let acs = find_avoided_crossings(&scan, &m).unwrap();
        let left = diabatic_basis(&m, -20.0, &acs).unwrap();
        assert_eq!(left.labels, vec!["1", "2"]);
        assert!(1.0 - left.state(0).inner(&PureState::basis(2, 0)).norm_sqr() < 1e-3);
        assert!(1.0 - left.state(1).inner(&PureState::basis(2, 1)).norm_sqr() < 1e-3);
        assert!(left.orthonormality_error() < 1e-10);

        // The branch correspondence is exchanged on the other side.
        let right = diabatic_basis(&m, 20.0, &acs).unwrap();
        assert!(left.state(0).inner(right.state(1)).norm_sqr() > 0.999);
        assert!(left.state(1).inner(right.state(0)).norm_sqr() > 0.999);
    }

    #[test]
    fn diabatic_basis_reference_must_be_far() {
        let m = Model::two_spin(TwoSpinParams::default());
        let scan = scan_spectrum(&m, -3.0, 3.0, 301).unwrap();
        let acs = find_avoided_crossings(&scan, &m).unwrap();
        let outer = acs.iter().map(|c| c.lambda_star.abs()).fold(0.0, f64::max);
        assert!(matches!(
            diabatic_basis(&m, -1.5 * outer, &acs),
            Err(Error::ReferenceTooClose { .. })
        ));
        let basis = diabatic_basis(&m, -3.0 * outer, &acs).unwrap();
        assert_eq!(basis.len(), 4);
        assert_eq!(basis.labels, vec!["1", "2", "3", "4"]);
        assert!(basis.orthonormality_error() < 1e-10);
    }
}
