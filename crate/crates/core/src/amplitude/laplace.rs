//! Closed-form propagator from the Laplace transform of the amplitude
//! equations.
//!
//! With `h(0) = 1` and empty cavities, the qubit amplitude transforms to
//! `H(s) = N(s) / G(s)` where, in the frame rotating at the cavity frequency,
//!
//! ```text
//! N(s) = (2s + Γ1)(2s + Γ2) + 4J²
//! G(s) = (s + iδ) N(s) + 2κ²(2s + Γ2)
//! ```
//!
//! `G` is a cubic, so `z_t = Σ_k N(s_k)/G'(s_k) · exp(s_k t)` over its three
//! simple roots. Lab-frame poles are the rotating-frame ones shifted by `-iω`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_params, SiteParams};

/// Below this pole separation (in units of `gamma1`) partial fractions are
/// considered ill-conditioned.
pub const REPEATED_ROOT_THRESHOLD: f64 = 1e-8;

const NEWTON_POLISH_STEPS: usize = 2;

/// Poles of `N(s)/G(s)` (lab frame) and their residues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacePoles {
    pub poles: [Complex64; 3],
    pub residues: [Complex64; 3],
    omega: f64,
}

impl LaplacePoles {
    /// `z_t`, the qubit amplitude at time `t` starting from `h(0) = 1`.
    pub fn z(&self, t: f64) -> Complex64 {
        let rotating: Complex64 = self
            .poles
            .iter()
            .zip(&self.residues)
            .map(|(&s, &r)| r * ((s + Complex64::new(0.0, self.omega)) * t).exp())
            .sum();
        rotating * Complex64::new(0.0, -self.omega * t).exp()
    }

    pub fn residue_sum(&self) -> Complex64 {
        self.residues.iter().sum()
    }

    pub fn max_real_part(&self) -> f64 {
        self.poles.iter().map(|s| s.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Monic coefficients `(a, b, c)` of `G(s)/4 = s³ + a s² + b s + c` in the
/// rotating frame.
fn monic_denominator(p: &SiteParams) -> [Complex64; 3] {
    let i = Complex64::i();
    let (g1, g2) = (p.gamma1, p.gamma2);
    let (j2, k2) = (p.j_coupling * p.j_coupling, p.kappa * p.kappa);
    let n0 = g1 * g2 + 4.0 * j2;
    let a = Complex64::new((g1 + g2) / 2.0, p.detuning);
    let b = (Complex64::new(n0 + 4.0 * k2, 0.0) + i * (2.0 * p.detuning * (g1 + g2))) / 4.0;
    let c = (i * (p.detuning * n0) + 2.0 * k2 * g2) / 4.0;
    [a, b, c]
}

fn numerator(p: &SiteParams, s: Complex64) -> Complex64 {
    (2.0 * s + p.gamma1) * (2.0 * s + p.gamma2) + 4.0 * p.j_coupling * p.j_coupling
}

fn eval_monic(coeffs: &[Complex64; 3], s: Complex64) -> (Complex64, Complex64) {
    let [a, b, c] = *coeffs;
    let value = ((s + a) * s + b) * s + c;
    let slope = (3.0 * s + 2.0 * a) * s + b;
    (value, slope)
}

/// Roots of `s³ + a s² + b s + c` with complex coefficients by Cardano's
/// formula, then polished with Newton steps on the cubic.
pub fn cubic_roots(coeffs: [Complex64; 3]) -> [Complex64; 3] {
    let [a, b, c] = coeffs;
    let shift = a / 3.0;
    // depressed cubic x³ + px + q, s = x - a/3
    let p = b - a * shift;
    let q = 2.0 * shift * shift * shift - b * shift + c;

    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let root = disc.sqrt();
    // pick the branch with the larger modulus to avoid cancellation
    let w = {
        let plus = -q / 2.0 + root;
        let minus = -q / 2.0 - root;
        if plus.norm() >= minus.norm() {
            plus
        } else {
            minus
        }
    };

    let unit = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let mut roots = [Complex64::default(); 3];
    if w.norm() == 0.0 {
        // p = q = 0: triple root
        roots = [-shift; 3];
    } else {
        let cbrt = w.cbrt();
        let mut rot = Complex64::new(1.0, 0.0);
        for r in roots.iter_mut() {
            let u = cbrt * rot;
            *r = u - p / (3.0 * u) - shift;
            rot *= unit;
        }
    }

    for r in roots.iter_mut() {
        for _ in 0..NEWTON_POLISH_STEPS {
            let (value, slope) = eval_monic(&coeffs, *r);
            if slope.norm() == 0.0 || !value.is_finite() {
                break;
            }
            let next = *r - value / slope;
            if next.is_finite() {
                *r = next;
            }
        }
    }
    roots
}

/// Poles and residues of the qubit transfer function.
///
/// Fails with [`Error::RepeatedRoots`] when two poles are closer than
/// [`REPEATED_ROOT_THRESHOLD`] (in units of `gamma1`); callers then fall back
/// to integrating the amplitude equations.
pub fn laplace_poles(p: &SiteParams) -> Result<LaplacePoles> {
    let p = validate_params(*p)?;
    let coeffs = monic_denominator(&p);
    let roots = cubic_roots(coeffs);

    let mut separation = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            separation = separation.min((roots[i] - roots[j]).norm() / p.gamma1);
        }
    }
    if separation < REPEATED_ROOT_THRESHOLD {
        return Err(Error::RepeatedRoots { separation });
    }

    let mut residues = [Complex64::default(); 3];
    for (res, &s) in residues.iter_mut().zip(&roots) {
        // G'(s) = 4 * (monic)'(s)
        let (_, slope) = eval_monic(&coeffs, s);
        *res = numerator(&p, s) / (4.0 * slope);
    }
    let shift = Complex64::new(0.0, -p.omega);
    Ok(LaplacePoles {
        poles: roots.map(|s| s + shift),
        residues,
        omega: p.omega,
    })
}
