//! Single-excitation amplitudes of the qubit + two-cavity system and the
//! propagator `(u_t, z_t)` of the reduced qubit dynamics.
//!
//! Three routes compute the same quantity:
//!
//! * [`laplace`]: partial-fraction inversion of the transfer function
//!   `N(s)/G(s)` (the default, O(1) per time point);
//! * [`ode`]: adaptive integration of the three amplitude equations;
//! * [`lindblad`]: fixed-step integration of the full master equation on the
//!   4-state sector `{|100>, |010>, |001>, |000>}`, used as a test oracle.

pub mod laplace;
pub mod lindblad;
pub mod ode;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_params, SiteParams, TimeGrid};

pub use laplace::{laplace_poles, LaplacePoles};
pub use lindblad::lindblad_oracle;
pub use ode::{evolve_ode, OdeTolerances};

/// Unnormalized amplitudes `(h, c1, c2)` of the states `|100>`, `|010>`,
/// `|001>`. The missing norm is the vacuum population `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeVector {
    pub h: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
}

impl AmplitudeVector {
    pub fn new(h: Complex64, c1: Complex64, c2: Complex64) -> Self {
        Self { h, c1, c2 }
    }

    /// Qubit excited, both cavities empty.
    pub fn excited_qubit() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default())
    }

    /// The decay-free bound state `(J|100> - kappa|001>) / sqrt(J^2 + kappa^2)`
    /// of a resonant site with a lossless second cavity.
    pub fn dark_state(kappa: f64, j_coupling: f64) -> Self {
        let norm = j_coupling.hypot(kappa);
        Self::new(
            Complex64::new(j_coupling / norm, 0.0),
            Complex64::default(),
            Complex64::new(-kappa / norm, 0.0),
        )
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    /// Vacuum population `1 - |h|^2 - |c1|^2 - |c2|^2`.
    pub fn lambda(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn moduli(&self) -> [f64; 3] {
        [self.h.norm(), self.c1.norm(), self.c2.norm()]
    }

    pub(crate) fn scale(&self, factor: Complex64) -> Self {
        Self::new(self.h * factor, self.c1 * factor, self.c2 * factor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeTrajectory {
    pub grid: TimeGrid,
    pub samples: Vec<AmplitudeVector>,
}

impl AmplitudeTrajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.times()
    }
}

/// The pair `(u_t, z_t)` defining the qubit map at one time; `u = |z|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSample {
    pub u: f64,
    pub z: Complex64,
}

impl PropagatorSample {
    pub fn from_z(z: Complex64) -> Self {
        Self { u: z.norm_sqr(), z }
    }

    pub fn identity() -> Self {
        Self::from_z(Complex64::new(1.0, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Analytic,
    Ode,
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Backend::Analytic),
            "ode" => Ok(Backend::Ode),
            other => Err(Error::parse(format!(
                "unknown backend `{other}` (expected analytic or ode)"
            ))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Analytic => "analytic",
            Backend::Ode => "ode",
        })
    }
}

/// Propagator values together with the backend that actually produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorSeries {
    pub samples: Vec<PropagatorSample>,
    /// Backend used after any fallback.
    pub backend: Backend,
    /// Set when the analytic backend was requested but the poles were
    /// (nearly) repeated and the ODE backend was used instead.
    pub fell_back: bool,
}

impl PropagatorSeries {
    pub fn z_moduli(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.z.norm()).collect()
    }
}

/// Propagator at a single time, with the backend that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorOutcome {
    pub sample: PropagatorSample,
    pub backend: Backend,
    pub fell_back: bool,
}

/// Propagator at a single time `t >= 0`.
pub fn propagator(p: &SiteParams, t: f64, backend: Backend) -> Result<PropagatorOutcome> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidGrid(format!("t = {t} must be >= 0")));
    }
    if t == 0.0 {
        validate_params(*p)?;
        return Ok(PropagatorOutcome {
            sample: PropagatorSample::identity(),
            backend,
            fell_back: false,
        });
    }
    let series = propagator_series(p, &TimeGrid::span(t, 2)?, backend)?;
    Ok(PropagatorOutcome {
        sample: series.samples[1],
        backend: series.backend,
        fell_back: series.fell_back,
    })
}

/// Propagator on every point of `grid`. A repeated-root failure of the
/// analytic backend switches transparently to the ODE backend.
pub fn propagator_series(p: &SiteParams, grid: &TimeGrid, backend: Backend) -> Result<PropagatorSeries> {
    let p = validate_params(*p)?;
    if backend == Backend::Analytic {
        match laplace_poles(&p) {
            Ok(poles) => {
                return Ok(PropagatorSeries {
                    samples: grid
                        .times()
                        .map(|t| PropagatorSample::from_z(poles.z(t)))
                        .collect(),
                    backend: Backend::Analytic,
                    fell_back: false,
                })
            }
            Err(Error::RepeatedRoots { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let tol = OdeTolerances::default();
    let mut start = AmplitudeVector::excited_qubit();
    let shifted = if grid.t_start() > 0.0 {
        // the equations are autonomous: reach t_start, then integrate the
        // grid shifted back to the origin
        start = evolve_ode(&p, start, &TimeGrid::span(grid.t_start(), 2)?, tol)?.samples[1];
        TimeGrid::span(grid.t_end() - grid.t_start(), grid.len())?
    } else {
        *grid
    };
    let samples = evolve_ode(&p, start, &shifted, tol)?
        .samples
        .iter()
        .map(|a| PropagatorSample::from_z(a.h))
        .collect();
    Ok(PropagatorSeries {
        samples,
        backend: Backend::Ode,
        fell_back: backend == Backend::Analytic,
    })
}

/// Propagator at arbitrary, not necessarily uniform, times. Falls back to the
/// ODE backend per point when the poles are repeated.
pub fn propagator_at(p: &SiteParams, times: &[f64]) -> Result<Vec<PropagatorSample>> {
    let p = validate_params(*p)?;
    match laplace_poles(&p) {
        Ok(poles) => Ok(times.iter().map(|&t| PropagatorSample::from_z(poles.z(t))).collect()),
        Err(Error::RepeatedRoots { .. }) => times
            .iter()
            .map(|&t| propagator(&p, t, Backend::Ode).map(|o| o.sample))
            .collect(),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_is_identity_at_zero() {
        let p = SiteParams::resonant(0.4, 1.0, 0.5);
        for backend in [Backend::Analytic, Backend::Ode] {
            let s = propagator(&p, 0.0, backend).unwrap().sample;
            assert_eq!(s, PropagatorSample::identity());
        }
    }

    #[test]
    fn repeated_roots_fall_back_to_ode() {
        // kappa = J = 0 with gamma1 = gamma2 gives a double root at -1/2
        let p = SiteParams::resonant(0.0, 0.0, 1.0).with_detuning(0.3);
        let grid = TimeGrid::span(2.0, 5).unwrap();
        let series = propagator_series(&p, &grid, Backend::Analytic).unwrap();
        assert!(series.fell_back);
        assert_eq!(series.backend, Backend::Ode);
        for (t, s) in grid.times().zip(&series.samples) {
            let exact = Complex64::new(0.0, -0.3 * t).exp();
            assert!((s.z - exact).norm() < 1e-9);
        }
    }

    #[test]
    fn both_backends_agree_on_modulus() {
        let p = SiteParams::resonant(0.4, 2.0, 0.5);
        for t in [0.5, 1.0, 5.0, 20.0] {
            let analytic = propagator(&p, t, Backend::Analytic).unwrap();
            assert!(!analytic.fell_back);
            let a = analytic.sample;
            let o = propagator(&p, t, Backend::Ode).unwrap().sample;
            assert!((a.z.norm() - o.z.norm()).abs() < 1e-8, "t = {t}");
            assert!((a.u - a.z.norm_sqr()).abs() < 1e-10);
        }
    }

    #[test]
    fn lossless_resonant_site_approaches_bound_value() {
        let (kappa, j) = (0.24, 1.0);
        let p = SiteParams::resonant(kappa, j, 0.0);
        let s = propagator(&p, 3000.0, Backend::Analytic).unwrap().sample;
        let expected = j * j / (j * j + kappa * kappa);
        assert!((s.z.norm() - expected).abs() < 1e-9);
    }

    #[test]
    fn negative_time_is_rejected() {
        let p = SiteParams::resonant(0.4, 2.0, 0.5);
        assert!(propagator(&p, -1.0, Backend::Analytic).is_err());
    }
}
