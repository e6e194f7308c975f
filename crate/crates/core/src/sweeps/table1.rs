use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fig7a_init, fig7a_sites};
use crate::amplitude::Backend;
use crate::error::{Error, Result};
use crate::two_qubit::{ConcurrenceScan, EsdOptions, EsdOutcome, ZERO_CONCURRENCE};

/// Initial scan horizon in units of `1/gamma`.
pub const TABLE1_HORIZON: f64 = 2e4;
/// The horizon doubles while the concurrence is still alive, up to this cap.
pub const TABLE1_HORIZON_CAP: f64 = 1e5;
/// Alternative zero thresholds reported next to each lifetime.
pub const TABLE1_SENSITIVITY_EPS: [f64; 2] = [1e-4, 1e-8];
pub const TABLE1_GAMMA2_RATIOS: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const TABLE1_COUPLINGS: [(f64, f64); 2] = [(0.5, 0.5), (0.5, 1.0)];
/// Band of the reference rate `gamma`, in MHz.
const GAMMA_BAND_MHZ: (f64, f64) = (1.0, 10.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub gamma2_ratio: f64,
    pub j_a: f64,
    pub j_b: f64,
    /// `t* gamma`.
    pub t_star_scaled: f64,
    /// `t*` in microseconds for `gamma` = 10 MHz and 1 MHz.
    pub t_star_range_us: (f64, f64),
    /// `t* gamma` at the thresholds of [`TABLE1_SENSITIVITY_EPS`]; `None` when
    /// the capped horizon was not enough.
    pub sensitivity: Vec<(f64, Option<f64>)>,
    pub horizon: f64,
}

fn lifetime(gamma2_ratio: f64, j_a: f64, j_b: f64) -> Result<Table1Row> {
    let params = fig7a_sites(j_a, j_b, gamma2_ratio);
    let init = fig7a_init();
    let options = EsdOptions {
        backend: Backend::Analytic,
        ..EsdOptions::default()
    };
    let thresholds: Vec<f64> = std::iter::once(ZERO_CONCURRENCE).chain(TABLE1_SENSITIVITY_EPS).collect();

    let mut horizon = TABLE1_HORIZON;
    loop {
        let scan = ConcurrenceScan::new(&params, &init, horizon, &options)?;
        let outcomes: Vec<Result<EsdOutcome>> = thresholds.iter().map(|&eps| scan.esd(eps)).collect();
        let short = outcomes
            .iter()
            .any(|o| matches!(o, Err(Error::HorizonTooShort { .. }) | Ok(EsdOutcome::NeverDies { .. })));
        if short && horizon < TABLE1_HORIZON_CAP {
            horizon = (2.0 * horizon).min(TABLE1_HORIZON_CAP);
            continue;
        }
        let mut outcomes = outcomes.into_iter();
        let t_star_scaled = match outcomes.next().expect("main threshold")? {
            EsdOutcome::Dies { t_star, .. } => t_star,
            EsdOutcome::NeverDies { .. } => return Err(Error::HorizonTooShort { horizon }),
        };
        let sensitivity = TABLE1_SENSITIVITY_EPS
            .iter()
            .zip(outcomes)
            .map(|(&eps, o)| (eps, o.ok().and_then(|o| o.t_star())))
            .collect();
        return Ok(Table1Row {
            gamma2_ratio,
            j_a,
            j_b,
            t_star_scaled,
            t_star_range_us: (t_star_scaled / GAMMA_BAND_MHZ.1, t_star_scaled / GAMMA_BAND_MHZ.0),
            sensitivity,
            horizon,
        });
    }
}

/// Entanglement lifetimes for every `(gamma2/gamma, (J_A, J_B))` combination,
/// ordered by ratio then coupling pair, with the other parameters as in the
/// lossless-trapping figure (`kappa_A = 0.2`, `kappa_B = 0.3`,
/// `alpha = sqrt(1/3)`).
pub fn table1(gamma2_ratios: &[f64], coupling_pairs: &[(f64, f64)]) -> Result<Vec<Table1Row>> {
    let cells: Vec<(f64, (f64, f64))> = gamma2_ratios
        .iter()
        .flat_map(|&g| coupling_pairs.iter().map(move |&c| (g, c)))
        .collect();
    cells.par_iter().map(|&(g, (ja, jb))| lifetime(g, ja, jb)).collect()
}

pub fn table1_default() -> Result<Vec<Table1Row>> {
    table1(&TABLE1_GAMMA2_RATIOS, &TABLE1_COUPLINGS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_follows_from_scaled_lifetime() {
        let row = lifetime(1e-2, 0.5, 0.5).unwrap();
        assert!((row.t_star_range_us.0 - row.t_star_scaled / 10.0).abs() < 1e-12);
        assert!((row.t_star_range_us.1 - row.t_star_scaled).abs() < 1e-12);
        assert_eq!(row.horizon, TABLE1_HORIZON);
        let sens: Vec<f64> = row.sensitivity.iter().map(|s| s.1.unwrap()).collect();
        assert!(sens[0] < row.t_star_scaled && row.t_star_scaled < sens[1]);
    }
}
