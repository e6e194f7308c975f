//! Trace distance and the Breuer–Laine–Piilo non-Markovianity measure.
//!
//! `N = max over pairs of ∫_{σ>0} σ dt` with `σ = dD/dt`. On a sampled grid
//! the integral over the growth intervals is the sum of the positive
//! increments of `D`, which is what is computed here.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::amplitude::{propagator_series, Backend, PropagatorSample};
use crate::error::{Error, Result};
use crate::model::{dyn_matrix, hermitian_eigenvalues, validate_params, QubitState, SiteParams, TimeGrid};
use crate::single_qubit::evolve_qubit;

/// Increments of `D` smaller than this are treated as quadrature noise.
pub const INCREMENT_FLOOR: f64 = 1e-12;
/// `N` below this counts as Markovian.
pub const MARKOVIAN_THRESHOLD: f64 = 1e-6;
/// Allowed relative change of `N` under 2x grid refinement.
pub const REFINEMENT_REL_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePair {
    pub rho1: QubitState,
    pub rho2: QubitState,
}

impl StatePair {
    pub fn new(rho1: QubitState, rho2: QubitState) -> Self {
        Self { rho1, rho2 }
    }

    /// Antipodal pure states with Bloch vectors `±(sin θ, 0, cos θ)`.
    pub fn antipodal(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            rho1: QubitState::from_bloch(s, 0.0, c).expect("unit Bloch vector"),
            rho2: QubitState::from_bloch(-s, 0.0, -c).expect("unit Bloch vector"),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            rho1: self.rho2,
            rho2: self.rho1,
        }
    }

    fn evolved(&self, prop: &PropagatorSample) -> Self {
        Self {
            rho1: evolve_qubit(&self.rho1, prop),
            rho2: evolve_qubit(&self.rho2, prop),
        }
    }
}

/// Candidate initial pairs for the maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct PairGrid {
    pairs: Vec<StatePair>,
}

impl PairGrid {
    pub fn new(pairs: Vec<StatePair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidState("empty pair family".into()));
        }
        Ok(Self { pairs })
    }

    /// Antipodal pure pairs at polar angles `θ = k π/(2 steps)`, `k = 0..=steps`,
    /// in the x-z plane. `steps = 8` gives the default `{0, π/16, ..., π/2}`.
    pub fn antipodal_meridian(steps: usize) -> Self {
        let steps = steps.max(1);
        Self {
            pairs: (0..=steps)
                .map(|k| StatePair::antipodal(FRAC_PI_2 * k as f64 / steps as f64))
                .collect(),
        }
    }

    /// The single pair `(|+>, |->)`.
    pub fn equatorial() -> Self {
        Self {
            pairs: vec![StatePair::antipodal(FRAC_PI_2)],
        }
    }

    pub fn pairs(&self) -> &[StatePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl Default for PairGrid {
    fn default() -> Self {
        Self::antipodal_meridian(8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlpResult {
    pub n_value: f64,
    pub argmax_pair: StatePair,
    /// Position of the maximizing pair in the family.
    pub argmax_index: usize,
    pub grid: TimeGrid,
    /// `D(t)` of the maximizing pair on `grid`.
    pub d_trace: Vec<f64>,
}

impl BlpResult {
    pub fn is_markovian(&self) -> bool {
        self.n_value < MARKOVIAN_THRESHOLD
    }
}

/// Half the trace norm of `ρ1 - ρ2`.
pub fn trace_distance(pair: &StatePair) -> f64 {
    let diff = dyn_matrix(&(pair.rho1.matrix() - pair.rho2.matrix()));
    0.5 * hermitian_eigenvalues(&diff).iter().map(|e| e.abs()).sum::<f64>()
}

/// Sum of the positive increments above [`INCREMENT_FLOOR`].
pub fn positive_increment_sum(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > INCREMENT_FLOOR)
        .sum()
}

/// Default time grid for `N`: `gamma1 t ∈ [0, 50]` with 20001 points.
pub fn default_blp_grid() -> TimeGrid {
    TimeGrid::span(50.0, 20001).expect("static grid")
}

fn best_pair(props: &[PropagatorSample], family: &PairGrid) -> (usize, f64, Vec<f64>) {
    family
        .pairs
        .par_iter()
        .enumerate()
        .map(|(i, pair)| {
            let d: Vec<f64> = props.iter().map(|s| trace_distance(&pair.evolved(s))).collect();
            (i, positive_increment_sum(&d), d)
        })
        .reduce_with(|a, b| {
            // ties go to the lower index so the reduction is order independent
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("non-empty family")
}

fn check_refinement(coarse: f64, fine: f64) -> Result<()> {
    if fine >= MARKOVIAN_THRESHOLD && (coarse - fine).abs() > REFINEMENT_REL_TOL * fine {
        return Err(Error::GridTooCoarse { coarse, fine });
    }
    Ok(())
}

pub fn blp_measure(p: &SiteParams, grid: &TimeGrid, family: &PairGrid) -> Result<BlpResult> {
    blp_measure_with(p, grid, family, Backend::Analytic)
}

/// BLP measure over `family`. The same computation on the 2x refined grid
/// must agree to 1%, otherwise [`Error::GridTooCoarse`].
pub fn blp_measure_with(
    p: &SiteParams,
    grid: &TimeGrid,
    family: &PairGrid,
    backend: Backend,
) -> Result<BlpResult> {
    let p = validate_params(*p)?;
    if family.is_empty() {
        return Err(Error::InvalidState("empty pair family".into()));
    }
    let props = propagator_series(&p, grid, backend)?.samples;
    let (argmax_index, n_value, d_trace) = best_pair(&props, family);

    let fine = propagator_series(&p, &grid.refined(), backend)?.samples;
    let (_, n_fine, _) = best_pair(&fine, family);
    check_refinement(n_value, n_fine)?;

    Ok(BlpResult {
        n_value,
        argmax_pair: family.pairs[argmax_index],
        argmax_index,
        grid: *grid,
        d_trace,
    })
}

/// For `(|+>, |->)` the trace distance is exactly `|z_t|`, so `N` for that
/// pair is the positive variation of `|z_t|`.
pub fn equatorial_pair_shortcut(p: &SiteParams, grid: &TimeGrid) -> Result<f64> {
    let p = validate_params(*p)?;
    let coarse = positive_increment_sum(&propagator_series(&p, grid, Backend::Analytic)?.z_moduli());
    let fine = positive_increment_sum(&propagator_series(&p, &grid.refined(), Backend::Analytic)?.z_moduli());
    check_refinement(coarse, fine)?;
    Ok(coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn identical_states_have_zero_distance() {
        let rho = QubitState::from_bloch(0.2, 0.3, -0.1).unwrap();
        assert!(trace_distance(&StatePair::new(rho, rho)).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_pure_states_have_unit_distance() {
        let d = trace_distance(&StatePair::new(QubitState::ground(), QubitState::excited()));
        assert!((d - 1.0).abs() < 1e-15);
        for theta in [0.0, 0.3, FRAC_PI_2] {
            assert!((trace_distance(&StatePair::antipodal(theta)) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn evolved_distance_matches_closed_form() {
        // Δρ11 = a, Δρ10 = b  =>  D = sqrt(u² a² + u |b|²)
        let rho1 = QubitState::from_bloch(0.3, 0.2, 0.6).unwrap();
        let rho2 = QubitState::from_bloch(-0.5, 0.1, -0.2).unwrap();
        let a = rho1.rho11() - rho2.rho11();
        let b = rho1.rho10() - rho2.rho10();
        for z in [Complex64::new(0.8, -0.1), Complex64::new(0.05, 0.3), Complex64::new(-0.6, 0.6)] {
            let prop = PropagatorSample::from_z(z);
            let u = prop.u;
            let expected = (u * u * a * a + u * b.norm_sqr()).sqrt();
            let got = trace_distance(&StatePair::new(rho1, rho2).evolved(&prop));
            assert!((got - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn increments_below_floor_are_dropped() {
        assert!((positive_increment_sum(&[1.0, 0.5, 0.7, 0.6, 0.9]) - 0.5).abs() < 1e-15);
        assert_eq!(positive_increment_sum(&[0.0, 1e-13, 2e-13]), 0.0);
    }

    #[test]
    fn markovian_weak_coupling_point() {
        let res = blp_measure(&SiteParams::resonant(0.24, 0.0, 0.5), &default_blp_grid(), &PairGrid::default()).unwrap();
        assert!(res.is_markovian(), "N = {}", res.n_value);
        assert!((res.d_trace[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn large_cavity_coupling_is_non_markovian() {
        let res = blp_measure(&SiteParams::resonant(0.24, 2.0, 0.5), &default_blp_grid(), &PairGrid::default()).unwrap();
        assert!(res.n_value > 1e-3);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let coarse = TimeGrid::span(50.0, 30).unwrap();
        let err = blp_measure(&SiteParams::resonant(2.0, 0.0, 0.5), &coarse, &PairGrid::default());
        assert!(matches!(err, Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn empty_family_is_rejected() {
        assert!(PairGrid::new(vec![]).is_err());
    }

    #[test]
    fn shortcut_matches_singleton_family() {
        let p = SiteParams::resonant(0.4, 0.0, 0.5);
        let grid = default_blp_grid();
        let direct = blp_measure(&p, &grid, &PairGrid::equatorial()).unwrap().n_value;
        let shortcut = equatorial_pair_shortcut(&p, &grid).unwrap();
        assert!((direct - shortcut).abs() < 1e-10);
    }
}
