//! Reduced qubit dynamics and the l1 coherence measure.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::{propagator_series, Backend, PropagatorSample};
use crate::error::Result;
use crate::model::{validate_params, PureQubitInit, QubitState, SiteParams, TimeGrid};

/// Relative spread allowed over the tail window for a trace to count as
/// stationary.
pub const STATIONARY_REL_TOL: f64 = 1e-3;
/// Shortest horizon (in `1/gamma1`) on which stationarity is judged.
pub const STATIONARY_MIN_HORIZON: f64 = 200.0;
/// Fraction of the horizon where the tail window starts.
pub const TAIL_WINDOW_START: f64 = 0.9;

/// Long-time value of a quantity that may or may not survive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trapping {
    Trapped(f64),
    NotTrapped,
}

impl Trapping {
    pub fn value(&self) -> Option<f64> {
        match self {
            Trapping::Trapped(v) => Some(*v),
            Trapping::NotTrapped => None,
        }
    }

    /// Trapped value, or 0 when nothing survives.
    pub fn value_or_zero(&self) -> f64 {
        self.value().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceTrace {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

/// Applies the amplitude-damping-like map with parameters `(u, z)`:
/// `ρ11 -> u ρ11`, `ρ10 -> z ρ10`, `ρ00 -> 1 - u ρ11`.
pub fn evolve_qubit(rho0: &QubitState, prop: &PropagatorSample) -> QubitState {
    let rho11 = prop.u * rho0.rho11();
    let rho10 = prop.z * rho0.rho10();
    QubitState::from_matrix_unchecked(Matrix2::new(
        Complex64::new(rho11, 0.0),
        rho10,
        rho10.conj(),
        Complex64::new(1.0 - rho11, 0.0),
    ))
}

/// Sum of the moduli of the off-diagonal elements.
pub fn coherence(rho: &QubitState) -> f64 {
    rho.rho10().norm() + rho.rho01().norm()
}

/// Closed-form long-time coherence `2|αβ| J²/(J² + κ²)`, available only for a
/// lossless second cavity at resonance.
pub fn asymptotic_coherence(init: &PureQubitInit, p: &SiteParams) -> Trapping {
    if !p.supports_trapping() {
        return Trapping::NotTrapped;
    }
    let j2 = p.j_coupling * p.j_coupling;
    let k2 = p.kappa * p.kappa;
    if j2 + k2 == 0.0 {
        // free qubit: coherence is conserved
        return Trapping::Trapped(init.coherence());
    }
    Trapping::Trapped(init.coherence() * j2 / (j2 + k2))
}

pub fn coherence_trace(
    init: &PureQubitInit,
    p: &SiteParams,
    grid: &TimeGrid,
    backend: Backend,
) -> Result<CoherenceTrace> {
    let p = validate_params(*p)?;
    let rho0 = QubitState::from_pure(init);
    let series = propagator_series(&p, grid, backend)?;
    Ok(CoherenceTrace {
        grid: *grid,
        values: series
            .samples
            .iter()
            .map(|s| coherence(&evolve_qubit(&rho0, s)))
            .collect(),
    })
}

/// Stationarity of the tail `[0.9 t_end, t_end]`: spread relative to the
/// final value below [`STATIONARY_REL_TOL`]. Traces that vanish on the tail
/// count as stationary.
pub fn tail_is_stationary(grid: &TimeGrid, values: &[f64]) -> bool {
    let start = TAIL_WINDOW_START * grid.t_end();
    let tail: Vec<f64> = grid
        .times()
        .zip(values)
        .filter(|(t, _)| *t >= start)
        .map(|(_, &v)| v)
        .collect();
    let Some(&last) = tail.last() else {
        return false;
    };
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi.abs() < 1e-12 {
        return true;
    }
    (hi - lo) / last.abs().max(hi.abs()) < STATIONARY_REL_TOL
}

/// Trapped coherence judged on a simulated trace: the horizon must be at least
/// [`STATIONARY_MIN_HORIZON`] and the tail stationary and nonzero.
pub fn trapped_coherence(trace: &CoherenceTrace) -> Trapping {
    let last = *trace.values.last().unwrap_or(&0.0);
    if trace.grid.t_end() >= STATIONARY_MIN_HORIZON
        && last > 1e-12
        && tail_is_stationary(&trace.grid, &trace.values)
    {
        Trapping::Trapped(last)
    } else {
        Trapping::NotTrapped
    }
}
