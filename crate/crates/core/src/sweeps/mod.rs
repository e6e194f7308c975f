//! One-parameter sweeps over any observable, executed row-parallel with an
//! order-preserving gather.

mod presets;
mod table1;

pub use presets::{preset, Layout, Panel, Preset, PRESET_NAMES, PRESET_VERSION};
pub use presets::{fig3_params, fig4_panels, fig7a_init, fig7a_sites, fig8_sites};
pub use table1::{
    table1, table1_default, Table1Row, TABLE1_COUPLINGS, TABLE1_GAMMA2_RATIOS, TABLE1_HORIZON, TABLE1_HORIZON_CAP,
    TABLE1_SENSITIVITY_EPS,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::Backend;
use crate::error::{Error, Result};
use crate::model::{PureQubitInit, SiteParams, TimeGrid};
use crate::nonmarkov::{blp_measure_with, PairGrid};
use crate::single_qubit::{coherence_trace, trapped_coherence, Trapping};
use crate::two_qubit::{concurrence_trace, esd_time_with, trapped_concurrence, BellLikeInit, EsdOptions, EsdOutcome, TwoSiteParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Coherence,
    Blp,
    Concurrence,
    EsdTime,
    Trapped,
}

impl Observable {
    pub fn as_str(&self) -> &'static str {
        match self {
            Observable::Coherence => "coherence",
            Observable::Blp => "blp",
            Observable::Concurrence => "concurrence",
            Observable::EsdTime => "esd_time",
            Observable::Trapped => "trapped",
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherence" => Ok(Observable::Coherence),
            "blp" => Ok(Observable::Blp),
            "concurrence" => Ok(Observable::Concurrence),
            "esd_time" => Ok(Observable::EsdTime),
            "trapped" => Ok(Observable::Trapped),
            other => Err(Error::InvalidSweep(format!("unknown observable `{other}`"))),
        }
    }
}

/// The fixed part of a sweep: system parameters and initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    Site { params: SiteParams, init: PureQubitInit },
    TwoSite { params: TwoSiteParams, init: BellLikeInit },
}

impl System {
    /// Copy of `self` with the named parameter set to `value`.
    ///
    /// Single site: `kappa`, `j`, `gamma1`, `gamma2`, `delta`, `omega`, `alpha`
    /// (real weights, `beta = sqrt(1 - alpha^2)`).
    /// Two sites: `kappa_a`, `kappa_b`, `j_a`, `j_b`, `gamma2_a`, `gamma2_b`,
    /// `delta_a`, `delta_b`, plus `kappa`, `j`, `gamma2`, `delta` acting on
    /// both sites, and `alpha`.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        let unknown = || Error::InvalidSweep(format!("unknown sweep parameter `{name}`"));
        match *self {
            System::Site { mut params, mut init } => {
                match name {
                    "alpha" => init = PureQubitInit::real(value, (1.0 - value * value).max(0.0).sqrt())?,
                    _ => set_site(&mut params, name, value).ok_or_else(unknown)?,
                }
                Ok(System::Site { params, init })
            }
            System::TwoSite { mut params, mut init } => {
                match name {
                    "alpha" => init = BellLikeInit::from_alpha(value)?,
                    _ => {
                        let (site, field) = match name.rsplit_once('_') {
                            Some((field, "a")) => (Some(0), field),
                            Some((field, "b")) => (Some(1), field),
                            _ => (None, name),
                        };
                        if field == "gamma1" {
                            return Err(Error::InvalidSweep("gamma1 is the unit and cannot be swept".into()));
                        }
                        let sites = [&mut params.site_a, &mut params.site_b];
                        for (k, s) in sites.into_iter().enumerate() {
                            if site.is_none_or(|i| i == k) {
                                set_site(s, field, value).ok_or_else(unknown)?;
                            }
                        }
                    }
                }
                Ok(System::TwoSite { params, init })
            }
        }
    }
}

fn set_site(p: &mut SiteParams, name: &str, value: f64) -> Option<()> {
    let slot = match name {
        "kappa" => &mut p.kappa,
        "j" => &mut p.j_coupling,
        "gamma1" => &mut p.gamma1,
        "gamma2" => &mut p.gamma2,
        "delta" => &mut p.detuning,
        "omega" => &mut p.omega,
        _ => return None,
    };
    *slot = value;
    Some(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    pub system: System,
    pub observable: Observable,
    /// Trace grid; for `blp` the evaluation grid, for `esd_time` its end is
    /// the horizon, for a single-site `trapped` the simulated window.
    pub grid: TimeGrid,
    #[serde(default)]
    pub backend: Backend,
}

impl SweepSpec {
    pub fn new(
        parameter: impl Into<String>,
        values: Vec<f64>,
        system: System,
        observable: Observable,
        grid: TimeGrid,
    ) -> Result<Self> {
        let spec = Self {
            parameter: parameter.into(),
            values,
            system,
            observable,
            grid,
            backend: Backend::Analytic,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let Some(&first) = self.values.first() else {
            return Err(Error::InvalidSweep("empty value list".into()));
        };
        self.system.with_parameter(&self.parameter, first)?;
        let two_site = matches!(self.system, System::TwoSite { .. });
        let ok = match self.observable {
            Observable::Coherence | Observable::Blp => !two_site,
            Observable::Concurrence | Observable::EsdTime => two_site,
            Observable::Trapped => true,
        };
        if !ok {
            return Err(Error::InvalidSweep(format!(
                "observable `{}` does not apply to a {} system",
                self.observable,
                if two_site { "two-site" } else { "single-site" }
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowValue {
    Trace(Vec<f64>),
    Scalar(f64),
    Esd(EsdOutcome),
    Trapping(Trapping),
}

#[derive(Debug)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<RowValue>,
}

#[derive(Debug)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.outcome.is_err())
    }
}

/// Evaluates the observable for one system.
pub fn evaluate(system: &System, observable: Observable, grid: &TimeGrid, backend: Backend) -> Result<RowValue> {
    match (system, observable) {
        (System::Site { params, init }, Observable::Coherence) => {
            Ok(RowValue::Trace(coherence_trace(init, params, grid, backend)?.values))
        }
        (System::Site { params, .. }, Observable::Blp) => Ok(RowValue::Scalar(
            blp_measure_with(params, grid, &PairGrid::default(), backend)?.n_value,
        )),
        (System::Site { params, init }, Observable::Trapped) => Ok(RowValue::Trapping(trapped_coherence(
            &coherence_trace(init, params, grid, backend)?,
        ))),
        (System::TwoSite { params, init }, Observable::Concurrence) => {
            Ok(RowValue::Trace(concurrence_trace(params, init, grid, backend)?.values))
        }
        (System::TwoSite { params, init }, Observable::EsdTime) => {
            let options = EsdOptions {
                backend,
                ..EsdOptions::default()
            };
            Ok(RowValue::Esd(esd_time_with(params, init, grid.t_end(), &options)?))
        }
        (System::TwoSite { params, init }, Observable::Trapped) => {
            Ok(RowValue::Trapping(trapped_concurrence(params, init)?))
        }
        (_, obs) => Err(Error::InvalidSweep(format!("observable `{obs}` does not apply to this system"))),
    }
}

/// One row per value, in input order. A row whose computation fails carries
/// its error; the other rows are unaffected.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let rows = spec
        .values
        .par_iter()
        .map(|&value| SweepRow {
            value,
            outcome: spec
                .system
                .with_parameter(&spec.parameter, value)
                .and_then(|sys| evaluate(&sys, spec.observable, &spec.grid, spec.backend)),
        })
        .collect();
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

/// `start, start + step, ...` up to and including `end` (within rounding).
pub fn linspace_step(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + step * k as f64).collect()
}
