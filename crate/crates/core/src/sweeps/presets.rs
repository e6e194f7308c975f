use std::f64::consts::FRAC_1_SQRT_2;

use super::{linspace_step, Observable, SweepSpec, System};
use crate::error::{Error, Result};
use crate::model::{PureQubitInit, SiteParams, TimeGrid};
use crate::nonmarkov::default_blp_grid;
use crate::two_qubit::{BellLikeInit, TwoSiteParams};

/// Bumped whenever a preset definition changes its output.
pub const PRESET_VERSION: u32 = 1;

pub const PRESET_NAMES: [&str; 15] = [
    "fig2a", "fig2b", "fig2c", "fig2d", "fig3", "fig4", "fig5", "fig6a", "fig6b", "fig6c", "fig6d", "fig7a", "fig7b",
    "fig8", "table1",
];

/// How the rows of a panel are laid out in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// One file per swept value holding its trace.
    FilePerRow,
    /// One file for the panel: swept value, time and observable in long form.
    Long,
    /// One file for the panel: swept value and a scalar observable.
    Scalar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    /// File stem, e.g. `fig3_kappa0.24`; `FilePerRow` appends `_<label><value>`.
    pub stem: String,
    /// Label of the swept value in file names (`FilePerRow`) or its column
    /// name (`Long`, `Scalar`).
    pub label: &'static str,
    pub layout: Layout,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub panels: Vec<Panel>,
}

pub fn fig7a_sites(j_a: f64, j_b: f64, gamma2: f64) -> TwoSiteParams {
    TwoSiteParams::resonant(0.2, 0.3, j_a, j_b, gamma2)
}

/// `alpha = sqrt(1/3)`, `beta = sqrt(2/3)`.
pub fn fig7a_init() -> BellLikeInit {
    BellLikeInit::from_alpha((1.0_f64 / 3.0).sqrt()).expect("valid weight")
}

pub fn fig8_sites() -> TwoSiteParams {
    fig7a_sites(0.5, 1.0, 0.0)
}

pub fn fig3_params(kappa: f64, j: f64) -> SiteParams {
    SiteParams::resonant(kappa, j, 0.5)
}

/// The four panels of the detuning density plots, tagged `a` to `d`.
pub fn fig4_panels() -> [(char, SiteParams); 4] {
    [
        ('a', SiteParams::resonant(0.24, 0.5, 0.2)),
        ('b', SiteParams::resonant(0.24, 1.0, 0.2)),
        ('c', SiteParams::resonant(0.4, 0.5, 0.5)),
        ('d', SiteParams::resonant(0.4, 1.0, 0.5)),
    ]
}

fn grid(t_end: f64, n: usize) -> TimeGrid {
    TimeGrid::span(t_end, n).expect("static grid")
}

fn panel(stem: impl Into<String>, label: &'static str, layout: Layout, spec: Result<SweepSpec>) -> Panel {
    Panel {
        stem: stem.into(),
        label,
        layout,
        spec: spec.expect("static preset"),
    }
}

fn site(params: SiteParams) -> System {
    System::Site {
        params,
        init: PureQubitInit::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2).expect("normalized"),
    }
}

fn two_site(params: TwoSiteParams, init: BellLikeInit) -> System {
    System::TwoSite { params, init }
}

fn coherence_vs_j(name: &str, kappa: f64, gamma2: f64, t_end: f64) -> Vec<Panel> {
    let spec = SweepSpec::new(
        "j",
        vec![0.0, 0.5, 1.0, 2.0],
        site(SiteParams::resonant(kappa, 0.0, gamma2)),
        Observable::Coherence,
        grid(t_end, (t_end * 100.0) as usize + 1),
    );
    vec![panel(name, "J", Layout::FilePerRow, spec)]
}

fn concurrence_vs_j(stem: &str, sites: TwoSiteParams, init: BellLikeInit, js: Vec<f64>, g: TimeGrid, layout: Layout) -> Panel {
    panel(stem, "J", layout, SweepSpec::new("j", js, two_site(sites, init), Observable::Concurrence, g))
}

/// Looks up a figure preset. `table1` is listed in [`PRESET_NAMES`] but has
/// no sweep panels; it is produced by [`super::table1_default`].
pub fn preset(name: &str) -> Result<Preset> {
    let (name, panels) = match name {
        "fig2a" => ("fig2a", coherence_vs_j("fig2a", 0.24, 0.5, 15.0)),
        "fig2b" => ("fig2b", coherence_vs_j("fig2b", 0.4, 0.5, 15.0)),
        "fig2c" => ("fig2c", coherence_vs_j("fig2c", 0.24, 0.0, 50.0)),
        "fig2d" => ("fig2d", coherence_vs_j("fig2d", 0.4, 0.0, 50.0)),
        "fig3" => (
            "fig3",
            [0.24, 0.4]
                .into_iter()
                .map(|kappa| {
                    let spec = SweepSpec::new(
                        "j",
                        linspace_step(0.0, 3.0, 0.1),
                        site(fig3_params(kappa, 0.0)),
                        Observable::Blp,
                        default_blp_grid(),
                    );
                    panel(format!("fig3_kappa{kappa}"), "J_over_gamma1", Layout::Scalar, spec)
                })
                .collect(),
        ),
        "fig4" => (
            "fig4",
            fig4_panels()
                .into_iter()
                .map(|(tag, params)| {
                    let spec = SweepSpec::new(
                        "delta",
                        linspace_step(-3.0, 3.0, 0.25),
                        site(params),
                        Observable::Coherence,
                        grid(15.0, 151),
                    );
                    panel(format!("fig4{tag}"), "delta", Layout::Long, spec)
                })
                .collect(),
        ),
        "fig5" => (
            "fig5",
            [('a', 0.24), ('b', 0.4)]
                .into_iter()
                .map(|(tag, kappa)| {
                    let spec = SweepSpec::new(
                        "delta",
                        vec![0.0, 0.5, 1.0, 2.0],
                        site(SiteParams::resonant(kappa, 0.3, 0.0)),
                        Observable::Coherence,
                        grid(100.0, 10001),
                    );
                    panel(format!("fig5{tag}"), "delta", Layout::FilePerRow, spec)
                })
                .collect(),
        ),
        "fig6a" => {
            let init = BellLikeInit::from_alpha((0.1_f64).sqrt()).expect("valid weight");
            let sites = TwoSiteParams::resonant(0.2, 0.2, 0.0, 0.0, 0.2);
            let js = vec![0.0, 0.5, 1.0, 2.0];
            ("fig6a", vec![concurrence_vs_j("fig6a", sites, init, js, grid(30.0, 3001), Layout::FilePerRow)])
        }
        "fig6b" => {
            let sites = TwoSiteParams::resonant(2.0, 2.0, 0.0, 0.0, 0.2);
            let js = vec![0.0, 1.0, 3.0];
            let pair = SweepSpec::new(
                "j_b",
                vec![5.0],
                two_site(TwoSiteParams::resonant(2.0, 2.0, 4.0, 0.0, 0.2), fig7a_init()),
                Observable::Concurrence,
                grid(60.0, 6001),
            );
            (
                "fig6b",
                vec![
                    concurrence_vs_j("fig6b", sites, fig7a_init(), js, grid(30.0, 3001), Layout::FilePerRow),
                    panel("fig6b_JA4", "JB", Layout::FilePerRow, pair),
                ],
            )
        }
        "fig6c" => {
            let init = BellLikeInit::from_alpha((0.1_f64).sqrt()).expect("valid weight");
            let sites = TwoSiteParams::resonant(0.2, 0.2, 0.0, 0.0, 0.2);
            let js = linspace_step(0.0, 3.0, 0.1);
            ("fig6c", vec![concurrence_vs_j("fig6c", sites, init, js, grid(30.0, 301), Layout::Long)])
        }
        "fig6d" => {
            let sites = TwoSiteParams::resonant(2.0, 2.0, 0.0, 0.0, 0.2);
            let js = linspace_step(0.0, 5.0, 0.1);
            ("fig6d", vec![concurrence_vs_j("fig6d", sites, fig7a_init(), js, grid(20.0, 401), Layout::Long)])
        }
        "fig7a" => {
            let js = vec![0.0, 0.5, 1.0, 2.0, 3.0];
            let g = grid(100.0, 10001);
            ("fig7a", vec![concurrence_vs_j("fig7a", fig7a_sites(0.0, 0.0, 0.0), fig7a_init(), js, g, Layout::FilePerRow)])
        }
        "fig7b" => {
            let sites = TwoSiteParams::resonant(2.0, 2.0, 0.0, 0.0, 0.0);
            let pair = SweepSpec::new(
                "j_b",
                vec![3.0],
                two_site(TwoSiteParams::resonant(2.0, 2.0, 2.0, 0.0, 0.0), fig7a_init()),
                Observable::Concurrence,
                grid(50.0, 5001),
            );
            (
                "fig7b",
                vec![
                    concurrence_vs_j("fig7b", sites, fig7a_init(), vec![0.0, 1.0, 3.0], grid(50.0, 5001), Layout::FilePerRow),
                    panel("fig7b_JA2", "JB", Layout::FilePerRow, pair),
                ],
            )
        }
        "fig8" => {
            let alphas = linspace_step(0.05, 0.95, 0.05);
            let system = two_site(fig8_sites(), fig7a_init());
            (
                "fig8",
                vec![
                    panel(
                        "fig8",
                        "alpha",
                        Layout::Long,
                        SweepSpec::new("alpha", alphas.clone(), system, Observable::Concurrence, grid(50.0, 501)),
                    ),
                    panel(
                        "fig8_trapped",
                        "alpha",
                        Layout::Scalar,
                        SweepSpec::new("alpha", alphas, system, Observable::Trapped, grid(50.0, 501)),
                    ),
                ],
            )
        }
        "table1" => ("table1", Vec::new()),
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(Preset { name, panels })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_resolves() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert_eq!(p.name, name);
            for panel in &p.panels {
                panel.spec.validate().unwrap();
            }
        }
        assert!(matches!(preset("nosuch"), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn fig3_has_one_panel_per_kappa() {
        let p = preset("fig3").unwrap();
        let stems: Vec<_> = p.panels.iter().map(|p| p.stem.as_str()).collect();
        assert_eq!(stems, ["fig3_kappa0.24", "fig3_kappa0.4"]);
        assert_eq!(p.panels[0].spec.values.len(), 31);
    }

    #[test]
    fn fig8_alpha_grid() {
        let p = preset("fig8").unwrap();
        let v = &p.panels[0].spec.values;
        assert_eq!(v.len(), 19);
        assert!((v[0] - 0.05).abs() < 1e-15 && (v[18] - 0.95).abs() < 1e-12);
    }
}
