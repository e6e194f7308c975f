//! Two independent qubits, each in its own two-cavity site: evolved state,
//! concurrence, entanglement sudden death and entanglement trapping.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::{laplace_poles, propagator, propagator_series, Backend, LaplacePoles, PropagatorSample};
use crate::error::{Error, Result};
use crate::model::{validate_params, SiteParams, TimeGrid, TwoQubitState, STATE_TRACE_TOL};
use crate::single_qubit::{Trapping, STATIONARY_REL_TOL, TAIL_WINDOW_START};

/// Concurrence at or below this value counts as zero.
pub const ZERO_CONCURRENCE: f64 = 1e-6;
/// Horizon (in `1/gamma`) at which trapped concurrence is read off.
pub const TRAPPING_HORIZON: f64 = 5000.0;
const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-9;
const X_FORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoSiteParams {
    pub site_a: SiteParams,
    pub site_b: SiteParams,
}

impl TwoSiteParams {
    pub fn new(site_a: SiteParams, site_b: SiteParams) -> Result<Self> {
        let site_a = validate_params(site_a)?;
        let site_b = validate_params(site_b)?;
        if site_a.gamma1 != site_b.gamma1 {
            return Err(Error::MismatchedGamma1 {
                a: site_a.gamma1,
                b: site_b.gamma1,
            });
        }
        Ok(Self { site_a, site_b })
    }

    /// Resonant sites with `gamma = 1` and a shared second-cavity loss.
    pub fn resonant(kappa_a: f64, kappa_b: f64, j_a: f64, j_b: f64, gamma2: f64) -> Self {
        Self {
            site_a: SiteParams::resonant(kappa_a, j_a, gamma2),
            site_b: SiteParams::resonant(kappa_b, j_b, gamma2),
        }
    }

    fn validated(&self) -> Result<Self> {
        Self::new(self.site_a, self.site_b)
    }
}

/// `alpha|00> + beta|11>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellLikeInit {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl BellLikeInit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sq - 1.0).abs() > STATE_TRACE_TOL || !norm_sq.is_finite() {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { alpha, beta })
    }

    /// Real weights with `beta = sqrt(1 - alpha^2)`.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::NotNormalized { norm_sq: alpha * alpha });
        }
        Ok(Self {
            alpha: Complex64::new(alpha, 0.0),
            beta: Complex64::new((1.0 - alpha * alpha).sqrt(), 0.0),
        })
    }

    /// Initial concurrence `2|alpha beta|`.
    pub fn concurrence(&self) -> f64 {
        2.0 * (self.alpha * self.beta).norm()
    }

    pub fn state(&self) -> TwoQubitState {
        let (a, b) = (self.alpha, self.beta);
        let mut rho = Matrix4::zeros();
        rho[(0, 0)] = b * b.conj();
        rho[(3, 3)] = a * a.conj();
        rho[(0, 3)] = b * a.conj();
        rho[(3, 0)] = a * b.conj();
        TwoQubitState::from_matrix_unchecked(rho)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcurrenceTrace {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

/// Kraus operators of the single-qubit map in the basis `{|1>, |0>}`.
fn kraus(prop: &PropagatorSample) -> [Matrix2<Complex64>; 2] {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let decay = Complex64::new((1.0 - prop.u).max(0.0).sqrt(), 0.0);
    [
        Matrix2::new(prop.z, zero, zero, one),
        Matrix2::new(zero, zero, decay, zero),
    ]
}

/// Evolved two-qubit state: the tensor product of the two local maps applied
/// to `rho0`.
pub fn compose_two_qubit(rho0: &TwoQubitState, prop_a: &PropagatorSample, prop_b: &PropagatorSample) -> TwoQubitState {
    let ka = kraus(prop_a);
    let kb = kraus(prop_b);
    let mut out = Matrix4::zeros();
    for a in &ka {
        for b in &kb {
            let k: Matrix4<Complex64> = a.kronecker(b);
            out += k * rho0.matrix() * k.adjoint();
        }
    }
    TwoQubitState::from_matrix_unchecked(out)
}

fn spin_flip() -> Matrix4<Complex64> {
    // σy ⊗ σy, identical in either basis order
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut m = Matrix4::zeros();
    m[(0, 3)] = c(-1.0);
    m[(1, 2)] = c(1.0);
    m[(2, 1)] = c(1.0);
    m[(3, 0)] = c(-1.0);
    m
}

/// Wootters concurrence `max{0, λ1 - λ2 - λ3 - λ4}`, where the `λi` are the
/// square roots of the eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)` in decreasing
/// order.
///
/// The `λi` are obtained as the singular values of `τ = V† (σy⊗σy) V*`, where
/// `ρ = V V†` is a pivoted Cholesky factorization.
pub fn concurrence_wootters(rho: &TwoQubitState) -> Result<f64> {
    let m = rho.matrix();
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -NEGATIVE_EIGENVALUE_TOL {
        return Err(Error::NegativeEigenvalue { value: min });
    }
    let v = pivoted_cholesky(&herm);
    let tau = v.adjoint() * spin_flip() * v.map(|x| x.conj());
    let mut lambda: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    let c = lambda[0] - lambda[1] - lambda[2] - lambda[3];
    Ok(c.clamp(0.0, 1.0))
}

/// `a = V V†` by diagonally pivoted Cholesky; stops at the first
/// non-positive pivot.
fn pivoted_cholesky(a: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let mut a = *a;
    let mut v = Matrix4::<Complex64>::zeros();
    let mut used = [false; 4];
    for k in 0..4 {
        let Some(p) = (0..4)
            .filter(|&i| !used[i])
            .max_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re))
        else {
            break;
        };
        let pivot = a[(p, p)].re;
        if pivot <= 0.0 {
            break;
        }
        let root = pivot.sqrt();
        let mut l = [Complex64::new(0.0, 0.0); 4];
        for i in (0..4).filter(|&i| !used[i]) {
            l[i] = a[(i, p)] / root;
        }
        l[p] = Complex64::new(root, 0.0);
        used[p] = true;
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] -= l[i] * l[j].conj();
            }
            v[(i, k)] = l[i];
        }
    }
    v
}

/// Closed-form concurrence of an X state,
/// `2 max{0, |ρ14| - sqrt(ρ22 ρ33), |ρ23| - sqrt(ρ11 ρ44)}`.
pub fn concurrence_x(rho: &TwoQubitState) -> Result<f64> {
    let m = rho.matrix();
    let mut off = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 {
                off = off.max(m[(i, j)].norm());
            }
        }
    }
    if off > X_FORM_TOL {
        return Err(Error::NotXState { magnitude: off });
    }
    let d = |k: usize| m[(k, k)].re.max(0.0);
    let outer = m[(0, 3)].norm() - (d(1) * d(2)).sqrt();
    let inner = m[(1, 2)].norm() - (d(0) * d(3)).sqrt();
    Ok((2.0 * outer.max(inner).max(0.0)).min(1.0))
}

fn bell_concurrence(init: &BellLikeInit, a: &PropagatorSample, b: &PropagatorSample) -> f64 {
    concurrence_x(&compose_two_qubit(&init.state(), a, b)).expect("Bell-like states stay X-shaped")
}

pub fn concurrence_trace(
    params: &TwoSiteParams,
    init: &BellLikeInit,
    grid: &TimeGrid,
    backend: Backend,
) -> Result<ConcurrenceTrace> {
    let params = params.validated()?;
    let a = propagator_series(&params.site_a, grid, backend)?.samples;
    let b = propagator_series(&params.site_b, grid, backend)?.samples;
    Ok(ConcurrenceTrace {
        grid: *grid,
        values: a.iter().zip(&b).map(|(pa, pb)| bell_concurrence(init, pa, pb)).collect(),
    })
}

/// Propagator evaluable at any time: closed form when the poles are simple,
/// otherwise one ODE integration per call.
enum SitePropagator {
    Analytic(LaplacePoles),
    Ode(SiteParams),
}

impl SitePropagator {
    fn new(p: &SiteParams, backend: Backend) -> Result<Self> {
        if backend == Backend::Analytic {
            match laplace_poles(p) {
                Ok(poles) => return Ok(Self::Analytic(poles)),
                Err(Error::RepeatedRoots { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(Self::Ode(*p))
    }

    fn at(&self, t: f64) -> Result<PropagatorSample> {
        match self {
            Self::Analytic(poles) => Ok(PropagatorSample::from_z(poles.z(t))),
            Self::Ode(p) => propagator(p, t, Backend::Ode).map(|o| o.sample),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EsdOutcome {
    /// Concurrence vanishes from `t_star` up to the horizon. `first_zero` is
    /// the first time it touched zero (earlier than `t_star` when it revived).
    Dies { t_star: f64, first_zero: f64 },
    /// Concurrence is still positive and stationary at the horizon.
    NeverDies { tail_value: f64 },
}

impl EsdOutcome {
    pub fn t_star(&self) -> Option<f64> {
        match self {
            EsdOutcome::Dies { t_star, .. } => Some(*t_star),
            EsdOutcome::NeverDies { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsdOptions {
    /// Zero-concurrence threshold.
    pub epsilon: f64,
    /// Scan spacing; `None` picks `max(0.01, horizon / 2e5)`.
    pub sample_step: Option<f64>,
    pub backend: Backend,
}

impl Default for EsdOptions {
    fn default() -> Self {
        Self {
            epsilon: ZERO_CONCURRENCE,
            sample_step: None,
            backend: Backend::Analytic,
        }
    }
}

/// Sampled concurrence on `[0, horizon]` plus the means to evaluate it
/// anywhere, so several thresholds can share one scan.
pub struct ConcurrenceScan {
    init: BellLikeInit,
    prop_a: SitePropagator,
    prop_b: SitePropagator,
    grid: TimeGrid,
    values: Vec<f64>,
}

impl ConcurrenceScan {
    pub fn new(params: &TwoSiteParams, init: &BellLikeInit, horizon: f64, options: &EsdOptions) -> Result<Self> {
        let params = params.validated()?;
        if horizon.is_nan() || horizon <= 0.0 {
            return Err(Error::InvalidGrid(format!("horizon {horizon} must be positive")));
        }
        let step = options.sample_step.unwrap_or((horizon / 2e5).max(0.01));
        let n = (horizon / step).ceil() as usize + 1;
        let grid = TimeGrid::span(horizon, n.max(2))?;
        let trace = concurrence_trace(&params, init, &grid, options.backend)?;
        Ok(Self {
            init: *init,
            prop_a: SitePropagator::new(&params.site_a, options.backend)?,
            prop_b: SitePropagator::new(&params.site_b, options.backend)?,
            grid,
            values: trace.values,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn at(&self, t: f64) -> Result<f64> {
        Ok(bell_concurrence(&self.init, &self.prop_a.at(t)?, &self.prop_b.at(t)?))
    }

    /// Crossing of `epsilon` inside `(lo, hi)`, where `C(lo) > epsilon >= C(hi)`.
    fn bisect(&self, mut lo: f64, mut hi: f64, epsilon: f64) -> Result<f64> {
        for _ in 0..200 {
            if hi - lo <= 1e-10 * hi.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.at(mid)? > epsilon {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Death time for the threshold `epsilon`.
    pub fn esd(&self, epsilon: f64) -> Result<EsdOutcome> {
        let v = &self.values;
        if v[0] <= epsilon {
            return Ok(EsdOutcome::Dies {
                t_star: 0.0,
                first_zero: 0.0,
            });
        }
        let last_alive = v.iter().rposition(|&c| c > epsilon).expect("v[0] is alive");
        if last_alive + 1 == v.len() {
            let tail: Vec<f64> = self
                .grid
                .times()
                .zip(v)
                .filter(|(t, _)| *t >= TAIL_WINDOW_START * self.grid.t_end())
                .map(|(_, &c)| c)
                .collect();
            if window_is_stationary(&tail) {
                return Ok(EsdOutcome::NeverDies {
                    tail_value: *v.last().unwrap(),
                });
            }
            return Err(Error::HorizonTooShort {
                horizon: self.grid.t_end(),
            });
        }
        let t_star = self.bisect(self.grid.at(last_alive), self.grid.at(last_alive + 1), epsilon)?;
        let first_dead = v.iter().position(|&c| c <= epsilon).expect("some sample is dead");
        let first_zero = self.bisect(self.grid.at(first_dead - 1), self.grid.at(first_dead), epsilon)?;
        Ok(EsdOutcome::Dies { t_star, first_zero })
    }
}

/// Spread of `values` relative to the last value below the stationarity
/// tolerance.
pub(crate) fn window_is_stationary(values: &[f64]) -> bool {
    let Some(&last) = values.last() else {
        return false;
    };
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    last > 0.0 && (hi - lo) / last < STATIONARY_REL_TOL
}

/// Last entanglement death time before `horizon` (see [`EsdOutcome`]).
pub fn esd_time(params: &TwoSiteParams, init: &BellLikeInit, horizon: f64) -> Result<EsdOutcome> {
    esd_time_with(params, init, horizon, &EsdOptions::default())
}

pub fn esd_time_with(params: &TwoSiteParams, init: &BellLikeInit, horizon: f64, options: &EsdOptions) -> Result<EsdOutcome> {
    ConcurrenceScan::new(params, init, horizon, options)?.esd(options.epsilon)
}

/// Steady concurrence at `gamma t = 5000`, provided both sites have a lossless
/// second cavity at resonance and the tail window `[4500, 5000]` is
/// stationary and above the zero threshold.
pub fn trapped_concurrence(params: &TwoSiteParams, init: &BellLikeInit) -> Result<Trapping> {
    let params = params.validated()?;
    if !(params.site_a.supports_trapping() && params.site_b.supports_trapping()) {
        return Ok(Trapping::NotTrapped);
    }
    let prop_a = SitePropagator::new(&params.site_a, Backend::Analytic)?;
    let prop_b = SitePropagator::new(&params.site_b, Backend::Analytic)?;
    let start = TAIL_WINDOW_START * TRAPPING_HORIZON;
    let n = 501;
    let values = (0..n)
        .map(|i| {
            let t = start + (TRAPPING_HORIZON - start) * i as f64 / (n - 1) as f64;
            Ok(bell_concurrence(init, &prop_a.at(t)?, &prop_b.at(t)?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let last = *values.last().unwrap();
    if last > ZERO_CONCURRENCE && window_is_stationary(&values) {
        Ok(Trapping::Trapped(last))
    } else {
        Ok(Trapping::NotTrapped)
    }
}

/// Long-time concurrence predicted from the single-site bound-state
/// amplitudes `|z_inf| = J²/(J² + κ²)`.
pub fn asymptotic_concurrence(params: &TwoSiteParams, init: &BellLikeInit) -> Trapping {
    let site = |p: &SiteParams| {
        let j2 = p.j_coupling * p.j_coupling;
        let k2 = p.kappa * p.kappa;
        if j2 + k2 == 0.0 {
            1.0
        } else {
            j2 / (j2 + k2)
        }
    };
    if !(params.site_a.supports_trapping() && params.site_b.supports_trapping()) {
        return Trapping::NotTrapped;
    }
    let a = PropagatorSample::from_z(Complex64::new(site(&params.site_a), 0.0));
    let b = PropagatorSample::from_z(Complex64::new(site(&params.site_b), 0.0));
    let c = bell_concurrence(init, &a, &b);
    if c > ZERO_CONCURRENCE {
        Trapping::Trapped(c)
    } else {
        Trapping::NotTrapped
    }
}
