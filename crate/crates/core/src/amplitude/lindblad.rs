//! Master-equation oracle on the sector `{|100>, |010>, |001>, |000>}`.
//!
//! Integrates
//!
//! ```text
//! dρ/dt = -i[H, ρ] - Σ_n (Γn/2)(a_n† a_n ρ - 2 a_n ρ a_n† + ρ a_n† a_n)
//! ```
//!
//! with a fixed-step classical RK4, independently of the amplitude equations.
//! The single-excitation/vacuum coherences `ρ[k][vac]` evolve on their own
//! (the jump terms only feed the vacuum population), so seeding them with the
//! initial amplitudes makes the evolved column carry `ψ_k(t)` including its
//! phase, while the diagonal blocks follow `|ψ><ψ| + λ|000><000|` exactly.

use nalgebra::Matrix4;
use num_complex::Complex64;

use super::{AmplitudeTrajectory, AmplitudeVector};
use crate::error::{Error, Result};
use crate::model::{validate_params, SiteParams, TimeGrid};

const VAC: usize = 3;

/// Default RK4 step, in units of `1/gamma1`.
pub const ORACLE_STEP: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladTrajectory {
    pub grid: TimeGrid,
    pub states: Vec<Matrix4<Complex64>>,
}

impl LindbladTrajectory {
    pub fn amplitudes(&self) -> AmplitudeTrajectory {
        AmplitudeTrajectory {
            grid: self.grid,
            samples: self
                .states
                .iter()
                .map(|r| AmplitudeVector::new(r[(0, VAC)], r[(1, VAC)], r[(2, VAC)]))
                .collect(),
        }
    }

    pub fn traces(&self) -> Vec<f64> {
        self.states.iter().map(|r| r.trace().re).collect()
    }

    pub fn vacuum_populations(&self) -> Vec<f64> {
        self.states.iter().map(|r| r[(VAC, VAC)].re).collect()
    }
}

struct Generator {
    hamiltonian: Matrix4<Complex64>,
    lowering: [Matrix4<Complex64>; 2],
    rates: [f64; 2],
}

impl Generator {
    fn new(p: &SiteParams) -> Self {
        let c = |x: f64| Complex64::new(x, 0.0);
        let mut h = Matrix4::zeros();
        h[(0, 0)] = c(p.omega + p.detuning);
        h[(1, 1)] = c(p.omega);
        h[(2, 2)] = c(p.omega);
        h[(0, 1)] = c(p.kappa);
        h[(1, 0)] = c(p.kappa);
        h[(1, 2)] = c(p.j_coupling);
        h[(2, 1)] = c(p.j_coupling);
        let mut a1 = Matrix4::zeros();
        a1[(VAC, 1)] = c(1.0);
        let mut a2 = Matrix4::zeros();
        a2[(VAC, 2)] = c(1.0);
        Self {
            hamiltonian: h,
            lowering: [a1, a2],
            rates: [p.gamma1, p.gamma2],
        }
    }

    fn apply(&self, rho: &Matrix4<Complex64>) -> Matrix4<Complex64> {
        let mi = Complex64::new(0.0, -1.0);
        let mut out = (self.hamiltonian * rho - rho * self.hamiltonian) * mi;
        for (a, &g) in self.lowering.iter().zip(&self.rates) {
            if g == 0.0 {
                continue;
            }
            let ad = a.adjoint();
            let n = ad * a;
            out += (a * rho * ad * Complex64::new(2.0, 0.0) - n * rho - rho * n) * Complex64::new(g / 2.0, 0.0);
        }
        out
    }

    fn rk4_step(&self, rho: &Matrix4<Complex64>, h: f64) -> Matrix4<Complex64> {
        let hc = Complex64::new(h, 0.0);
        let half = Complex64::new(h / 2.0, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + k1 * half));
        let k3 = self.apply(&(rho + k2 * half));
        let k4 = self.apply(&(rho + k3 * hc));
        rho + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * (hc / 6.0)
    }
}

/// Full 4x4 density-matrix trajectory from the seeded initial operator
/// `|ψ><ψ| + λ|000><000| + |ψ><000| + |000><ψ|` (see module docs).
pub fn lindblad_evolve(
    p: &SiteParams,
    init: AmplitudeVector,
    grid: &TimeGrid,
    max_step: f64,
) -> Result<LindbladTrajectory> {
    let p = validate_params(*p)?;
    grid.require_zero_start()?;
    let norm_sq = init.norm_sqr();
    if norm_sq > 1.0 + 1e-12 {
        return Err(Error::NotNormalized { norm_sq });
    }
    if max_step.is_nan() || max_step <= 0.0 {
        return Err(Error::Integration(format!("invalid oracle step {max_step}")));
    }

    let psi = [init.h, init.c1, init.c2, Complex64::new(0.0, 0.0)];
    let mut rho = Matrix4::from_fn(|i, j| psi[i] * psi[j].conj());
    rho[(VAC, VAC)] = Complex64::new(1.0 - norm_sq, 0.0);
    for k in 0..3 {
        rho[(k, VAC)] = psi[k];
        rho[(VAC, k)] = psi[k].conj();
    }

    let generator = Generator::new(&p);
    let dt = grid.step();
    let substeps = (dt / max_step).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;

    let mut states = Vec::with_capacity(grid.len());
    states.push(rho);
    for _ in 1..grid.len() {
        for _ in 0..substeps {
            rho = generator.rk4_step(&rho, h);
        }
        states.push(rho);
    }
    Ok(LindbladTrajectory {
        grid: *grid,
        states,
    })
}

/// Amplitudes read off the evolved master-equation solution. Validation only.
pub fn lindblad_oracle(p: &SiteParams, init: AmplitudeVector, grid: &TimeGrid) -> Result<AmplitudeTrajectory> {
    lindblad_evolve(p, init, grid, ORACLE_STEP).map(|t| t.amplitudes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_is_preserved_and_vacuum_matches_lost_norm() {
        let p = SiteParams::resonant(0.3, 0.7, 0.2).with_detuning(0.4);
        let grid = TimeGrid::span(5.0, 51).unwrap();
        let traj = lindblad_evolve(&p, AmplitudeVector::excited_qubit(), &grid, ORACLE_STEP).unwrap();
        let amps = traj.amplitudes();
        for ((tr, vac), a) in traj.traces().iter().zip(traj.vacuum_populations()).zip(&amps.samples) {
            assert!((tr - 1.0).abs() < 1e-10);
            assert!((vac - a.lambda()).abs() < 1e-9);
        }
        assert_eq!(amps.samples[0], AmplitudeVector::excited_qubit());
    }

    #[test]
    fn single_excitation_block_stays_rank_one() {
        let p = SiteParams::resonant(0.5, 1.0, 0.3);
        let grid = TimeGrid::span(3.0, 4).unwrap();
        let traj = lindblad_evolve(&p, AmplitudeVector::excited_qubit(), &grid, ORACLE_STEP).unwrap();
        for rho in &traj.states {
            let psi = [rho[(0, VAC)], rho[(1, VAC)], rho[(2, VAC)]];
            for i in 0..3 {
                for j in 0..3 {
                    assert!((rho[(i, j)] - psi[i] * psi[j].conj()).norm() < 1e-10);
                }
            }
        }
    }
}
