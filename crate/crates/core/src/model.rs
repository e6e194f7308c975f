//! Domain types shared by every module: site parameters, time grids and
//! qubit density matrices.
//!
//! Rates are dimensionless multiples of the decay rate `gamma1` of the cavity
//! that hosts the qubit; times are therefore `gamma1 * t`.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trace tolerance for states built from user input.
pub const STATE_TRACE_TOL: f64 = 1e-12;
/// Tolerance used when checking states produced by the dynamics.
pub const PSD_TOL: f64 = 1e-9;

/// Physical parameters of one qubit + two coupled cavities site.
///
/// The qubit couples to cavity C1 with strength `kappa`, C1 couples to C2
/// with strength `j_coupling`, and the cavities leak photons at `gamma1` and
/// `gamma2`. `detuning` is the qubit-cavity detuning and `omega` the common
/// cavity frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteParams {
    pub kappa: f64,
    pub j_coupling: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub detuning: f64,
    #[serde(default)]
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingRegime {
    Weak,
    Strong,
}

impl SiteParams {
    /// Resonant site with `gamma1 = 1` and `omega = 0`.
    pub fn resonant(kappa: f64, j_coupling: f64, gamma2: f64) -> Self {
        Self {
            kappa,
            j_coupling,
            gamma1: 1.0,
            gamma2,
            detuning: 0.0,
            omega: 0.0,
        }
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// Qubit-C1 coupling regime: weak iff `kappa <= gamma1 / 4`.
    pub fn regime(&self) -> CouplingRegime {
        if self.kappa <= self.gamma1 / 4.0 {
            CouplingRegime::Weak
        } else {
            CouplingRegime::Strong
        }
    }

    /// True when the second cavity is lossless and the qubit is resonant,
    /// the only case with a decay-free bound state.
    pub fn supports_trapping(&self) -> bool {
        self.gamma2 == 0.0 && self.detuning == 0.0
    }

    /// Same parameters expressed in units of `gamma1` (so `gamma1` becomes 1).
    pub fn scaled_to_gamma1(&self) -> Self {
        let g = self.gamma1;
        Self {
            kappa: self.kappa / g,
            j_coupling: self.j_coupling / g,
            gamma1: 1.0,
            gamma2: self.gamma2 / g,
            detuning: self.detuning / g,
            omega: self.omega / g,
        }
    }
}

pub fn validate_params(p: SiteParams) -> Result<SiteParams> {
    let rates = [
        ("kappa", p.kappa),
        ("j_coupling", p.j_coupling),
        ("gamma1", p.gamma1),
        ("gamma2", p.gamma2),
    ];
    for (name, value) in rates {
        if value.is_nan() || value < 0.0 {
            return Err(Error::NegativeRate { name, value });
        }
        if !value.is_finite() {
            return Err(Error::InvalidState(format!("{name} is not finite")));
        }
    }
    if !p.detuning.is_finite() || !p.omega.is_finite() {
        return Err(Error::InvalidState("detuning and omega must be finite".into()));
    }
    if p.gamma1 == 0.0 {
        return Err(Error::ZeroGamma1);
    }
    Ok(p)
}

/// Uniform, strictly increasing sampling of `[t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_points: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if t_start < 0.0 {
            return Err(Error::InvalidGrid(format!("t_start = {t_start} < 0")));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {n_points}"
            )));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "t_end = {t_end} must exceed t_start = {t_start}"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            n_points,
        })
    }

    /// Grid on `[0, t_end]`.
    pub fn span(t_end: f64, n_points: usize) -> Result<Self> {
        Self::new(0.0, t_end, n_points)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_points - 1) as f64
    }

    pub fn at(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        if i + 1 == self.n_points {
            return self.t_end;
        }
        self.t_start + (self.t_end - self.t_start) * (i as f64 / (self.n_points - 1) as f64)
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.at(i))
    }

    /// Same span with `2n - 1` points: every original point is kept and a
    /// midpoint is inserted in each interval.
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }

    pub(crate) fn require_zero_start(&self) -> Result<()> {
        if self.t_start != 0.0 {
            return Err(Error::InvalidGrid(format!(
                "trajectories start at t = 0, got t_start = {}",
                self.t_start
            )));
        }
        Ok(())
    }
}

/// Pure single-qubit state `alpha|0> + beta|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureQubitInit {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl PureQubitInit {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sq - 1.0).abs() > STATE_TRACE_TOL || !norm_sq.is_finite() {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { alpha, beta })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// `(|0> + |1>) / sqrt(2)`.
    pub fn plus() -> Self {
        let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { alpha: a, beta: a }
    }

    /// Initial coherence `2|alpha beta|`.
    pub fn coherence(&self) -> f64 {
        2.0 * (self.alpha * self.beta).norm()
    }
}

/// Single-qubit density matrix in the basis `{|1>, |0>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState(Matrix2<Complex64>);

impl QubitState {
    /// Validated constructor: Hermitian, unit trace and positive semidefinite
    /// to within 1e-12.
    pub fn new(rho: Matrix2<Complex64>) -> Result<Self> {
        check_state(&dyn_matrix(&rho), STATE_TRACE_TOL)?;
        Ok(Self(rho))
    }

    pub(crate) fn from_matrix_unchecked(rho: Matrix2<Complex64>) -> Self {
        Self(rho)
    }

    pub fn from_pure(init: &PureQubitInit) -> Self {
        // basis order {|1>, |0>}
        let (b, a) = (init.beta, init.alpha);
        Self(Matrix2::new(
            b * b.conj(),
            b * a.conj(),
            a * b.conj(),
            a * a.conj(),
        ))
    }

    /// `(I + r.sigma) / 2` with `sigma_z = |1><1| - |0><0|`; `|r| <= 1`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if r2 > 1.0 + STATE_TRACE_TOL {
            return Err(Error::InvalidState(format!("Bloch vector length^2 {r2} > 1")));
        }
        Ok(Self(Matrix2::new(
            Complex64::new((1.0 + z) / 2.0, 0.0),
            Complex64::new(x / 2.0, -y / 2.0),
            Complex64::new(x / 2.0, y / 2.0),
            Complex64::new((1.0 - z) / 2.0, 0.0),
        )))
    }

    pub fn excited() -> Self {
        Self(Matrix2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ))
    }

    pub fn ground() -> Self {
        Self(Matrix2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ))
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }

    /// Excited-state population.
    pub fn rho11(&self) -> f64 {
        self.0[(0, 0)].re
    }

    pub fn rho10(&self) -> Complex64 {
        self.0[(0, 1)]
    }

    pub fn rho01(&self) -> Complex64 {
        self.0[(1, 0)]
    }

    pub fn rho00(&self) -> f64 {
        self.0[(1, 1)].re
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        check_state(&dyn_matrix(&self.0), tol).is_ok()
    }
}

/// Two-qubit density matrix in the basis `{|11>, |10>, |01>, |00>}` (qubit A
/// first).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState(Matrix4<Complex64>);

impl TwoQubitState {
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        check_state(&dyn_matrix(&rho), STATE_TRACE_TOL)?;
        Ok(Self(rho))
    }

    pub(crate) fn from_matrix_unchecked(rho: Matrix4<Complex64>) -> Self {
        Self(rho)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    /// 1-based element access matching the `rho_lm` labelling of the basis.
    pub fn element(&self, l: usize, m: usize) -> Complex64 {
        self.0[(l - 1, m - 1)]
    }

    pub fn maximally_mixed() -> Self {
        Self(Matrix4::identity() * Complex64::new(0.25, 0.0))
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        check_state(&dyn_matrix(&self.0), tol).is_ok()
    }
}

pub(crate) fn dyn_matrix<R, C, S>(m: &nalgebra::Matrix<Complex64, R, C, S>) -> DMatrix<Complex64>
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<Complex64, R, C>,
{
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn check_state(m: &DMatrix<Complex64>, tol: f64) -> Result<()> {
    let trace: Complex64 = m.trace();
    if (trace.re - 1.0).abs() > tol || trace.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace = {trace}")));
    }
    if !psd_check(m, tol)? {
        return Err(Error::InvalidState(
            "not Hermitian positive semidefinite".into(),
        ));
    }
    Ok(())
}

/// Eigenvalues of a Hermitian matrix (the anti-Hermitian part is dropped).
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().copied().collect()
}

/// True iff `m` is Hermitian within `tol` and its smallest eigenvalue is at
/// least `-tol`.
pub fn psd_check(m: &DMatrix<Complex64>, tol: f64) -> Result<bool> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                return Ok(false);
            }
        }
    }
    let min = hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(min >= -tol)
}
