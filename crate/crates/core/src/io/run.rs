use std::path::{Path, PathBuf};

use serde_json::Value;

use super::config::{Format, Mode, RunConfig};
use super::table::{emit, Cell, Meta, Table};
use crate::amplitude::propagator_series;
use crate::error::{Error, Result};
use crate::nonmarkov::{blp_measure_with, default_blp_grid, PairGrid};
use crate::single_qubit::{asymptotic_coherence, coherence_trace, trapped_coherence};
use crate::sweeps::{
    preset, run_sweep, table1_default, Layout, Observable, Panel, RowValue, SweepResult, System, Table1Row,
    PRESET_VERSION, TABLE1_SENSITIVITY_EPS,
};
use crate::two_qubit::{asymptotic_concurrence, concurrence_trace, EsdOutcome};

fn config_meta(cfg: &RunConfig) -> Meta {
    Meta::new(serde_json::to_value(cfg).expect("configuration serializes")).with_backend(cfg.backend())
}

fn time_column(system: &System) -> &'static str {
    match system {
        System::Site { .. } => "gamma1_t",
        System::TwoSite { .. } => "gamma_t",
    }
}

fn value_columns(system: &System, observable: Observable) -> Vec<&'static str> {
    match (observable, system) {
        (Observable::Coherence, _) => vec!["coherence"],
        (Observable::Concurrence, _) => vec!["concurrence"],
        (Observable::Blp, _) => vec!["N"],
        (Observable::EsdTime, _) => vec!["tstar_gamma", "first_zero_gamma"],
        (Observable::Trapped, System::Site { .. }) => vec!["trapped_coherence"],
        (Observable::Trapped, System::TwoSite { .. }) => vec!["trapped_concurrence"],
    }
}

fn scalar_cells(value: &RowValue) -> Vec<Cell> {
    match value {
        RowValue::Scalar(x) => vec![(*x).into()],
        RowValue::Trapping(t) => vec![t.value_or_zero().into()],
        RowValue::Esd(EsdOutcome::Dies { t_star, first_zero }) => vec![(*t_star).into(), (*first_zero).into()],
        RowValue::Esd(EsdOutcome::NeverDies { .. }) => vec![f64::INFINITY.into(), f64::INFINITY.into()],
        RowValue::Trace(_) => unreachable!("trace observables use a long or per-row layout"),
    }
}

fn note_failures(meta: &mut Meta, result: &SweepResult) {
    let failed: Vec<Value> = result
        .failed()
        .map(|r| serde_json::json!({ "value": r.value, "error": r.outcome.as_ref().unwrap_err().to_string() }))
        .collect();
    if !failed.is_empty() {
        meta.summarize("failed_rows", failed);
    }
}

/// Lays out a finished sweep as `(file stem, table)` pairs.
pub fn sweep_tables(result: &SweepResult, stem: &str, label: &str, layout: Layout, meta: Meta) -> Vec<(String, Table)> {
    let spec = &result.spec;
    let time_col = time_column(&spec.system);
    let value_cols = value_columns(&spec.system, spec.observable);
    let mut meta = meta;
    note_failures(&mut meta, result);
    let nan_row = |n: usize| vec![Cell::Real(f64::NAN); n];

    match layout {
        Layout::FilePerRow => result
            .rows
            .iter()
            .map(|row| {
                let mut m = meta.clone();
                m.summarize(label, row.value);
                let mut t = Table::new(std::iter::once(time_col).chain(value_cols.iter().copied()), m);
                match &row.outcome {
                    Ok(RowValue::Trace(values)) => {
                        for (time, v) in spec.grid.times().zip(values) {
                            t.push(vec![time.into(), (*v).into()]);
                        }
                    }
                    Ok(other) => t.push([vec![Cell::Real(f64::NAN)], scalar_cells(other)].concat()),
                    Err(_) => t.push(nan_row(1 + value_cols.len())),
                }
                (format!("{stem}_{label}{}", row.value), t)
            })
            .collect(),
        Layout::Long => {
            let columns = [label, time_col].into_iter().chain(value_cols.iter().copied());
            let mut t = Table::new(columns, meta);
            for row in &result.rows {
                match &row.outcome {
                    Ok(RowValue::Trace(values)) => {
                        for (time, v) in spec.grid.times().zip(values) {
                            t.push(vec![row.value.into(), time.into(), (*v).into()]);
                        }
                    }
                    Ok(other) => t.push([vec![row.value.into(), Cell::Real(f64::NAN)], scalar_cells(other)].concat()),
                    Err(_) => t.push([vec![row.value.into()], nan_row(1 + value_cols.len())].concat()),
                }
            }
            vec![(stem.to_string(), t)]
        }
        Layout::Scalar => {
            let mut t = Table::new(std::iter::once(label).chain(value_cols.iter().copied()), meta);
            for row in &result.rows {
                let cells = match &row.outcome {
                    Ok(v) => scalar_cells(v),
                    Err(_) => nan_row(value_cols.len()),
                };
                t.push([vec![row.value.into()], cells].concat());
            }
            vec![(stem.to_string(), t)]
        }
    }
}

pub fn table1_table(rows: &[Table1Row], meta: Meta) -> Table {
    let mut columns = vec![
        "gamma2_ratio".to_string(),
        "jA".into(),
        "jB".into(),
        "tstar_gamma".into(),
        "tstar_us_low".into(),
        "tstar_us_high".into(),
    ];
    columns.extend(TABLE1_SENSITIVITY_EPS.iter().map(|e| format!("tstar_gamma_eps{e:e}")));
    columns.push("horizon_gamma".into());
    let mut t = Table::new(columns, meta);
    for r in rows {
        let mut cells: Vec<Cell> = vec![
            r.gamma2_ratio.into(),
            r.j_a.into(),
            r.j_b.into(),
            r.t_star_scaled.into(),
            r.t_star_range_us.0.into(),
            r.t_star_range_us.1.into(),
        ];
        cells.extend(r.sensitivity.iter().map(|(_, t)| Cell::Real(t.unwrap_or(f64::NAN))));
        cells.push(r.horizon.into());
        t.push(cells);
    }
    t
}

/// Runs a single (non-reproduce) configuration and returns its table.
pub fn run(cfg: &RunConfig) -> Result<Table> {
    cfg.validate()?;
    let mut meta = config_meta(cfg);
    let backend = cfg.backend();
    match cfg.mode()? {
        Mode::Simulate => {
            let p = cfg.site_params()?;
            let grid = cfg.grid()?;
            let series = propagator_series(&p, &grid, backend)?;
            meta.summarize("backend_used", series.backend.to_string());
            meta.summarize("fell_back", series.fell_back);
            let mut t = Table::new(["gamma1_t", "z_re", "z_im", "abs_z", "u"], meta);
            for (time, s) in grid.times().zip(&series.samples) {
                t.push(vec![time.into(), s.z.re.into(), s.z.im.into(), s.z.norm().into(), s.u.into()]);
            }
            Ok(t)
        }
        Mode::Coherence => {
            let p = cfg.site_params()?;
            let init = cfg.qubit_init()?;
            let trace = coherence_trace(&init, &p, &cfg.grid()?, backend)?;
            meta.summarize("asymptotic_coherence", asymptotic_coherence(&init, &p));
            meta.summarize("trapped_on_grid", trapped_coherence(&trace));
            let mut t = Table::new(["gamma1_t", "coherence"], meta);
            for (time, c) in trace.grid.times().zip(&trace.values) {
                t.push(vec![time.into(), (*c).into()]);
            }
            Ok(t)
        }
        Mode::Nonmarkov => {
            let p = cfg.site_params()?;
            let grid = if cfg.t_end.is_none() && cfg.n.is_none() {
                default_blp_grid()
            } else {
                cfg.grid()?
            };
            let res = blp_measure_with(&p, &grid, &PairGrid::default(), backend)?;
            meta.summarize("N", res.n_value);
            meta.summarize("markovian", res.is_markovian());
            meta.summarize("argmax_pair_index", res.argmax_index);
            let mut t = Table::new(["gamma1_t", "trace_distance"], meta);
            for (time, d) in grid.times().zip(&res.d_trace) {
                t.push(vec![time.into(), (*d).into()]);
            }
            Ok(t)
        }
        Mode::Twoqubit => {
            let p = cfg.two_site_params()?;
            let init = cfg.bell_init()?;
            let trace = concurrence_trace(&p, &init, &cfg.grid()?, backend)?;
            meta.summarize("initial_concurrence", init.concurrence());
            meta.summarize("asymptotic_concurrence", asymptotic_concurrence(&p, &init));
            let mut t = Table::new(["gamma_t", "concurrence"], meta);
            for (time, c) in trace.grid.times().zip(&trace.values) {
                t.push(vec![time.into(), (*c).into()]);
            }
            Ok(t)
        }
        Mode::Sweep => {
            let spec = cfg.sweep_spec()?;
            let result = run_sweep(&spec)?;
            let layout = match spec.observable {
                Observable::Coherence | Observable::Concurrence => Layout::Long,
                _ => Layout::Scalar,
            };
            let label = spec.parameter.clone();
            let mut tables = sweep_tables(&result, "sweep", &label, layout, meta);
            Ok(tables.remove(0).1)
        }
        Mode::Reproduce => Err(Error::InvalidSweep(
            "reproduce writes several files; use `reproduce` instead of `run`".into(),
        )),
    }
}

fn panel_tables(name: &str, panel: &Panel) -> Result<Vec<(String, Table)>> {
    let result = run_sweep(&panel.spec)?;
    let meta = Meta::new(serde_json::to_value(&panel.spec).expect("spec serializes"))
        .with_backend(panel.spec.backend)
        .with_preset(name, PRESET_VERSION);
    Ok(sweep_tables(&result, &panel.stem, panel.label, panel.layout, meta))
}

/// All `(file stem, table)` pairs of a named preset.
pub fn preset_tables(name: &str) -> Result<Vec<(String, Table)>> {
    let p = preset(name)?;
    if p.name == "table1" {
        let rows = table1_default()?;
        let meta = Meta::new(serde_json::to_value(&rows).expect("rows serialize"))
            .with_backend("analytic")
            .with_preset("table1", PRESET_VERSION);
        return Ok(vec![("table1".into(), table1_table(&rows, meta))]);
    }
    let mut out = Vec::new();
    for panel in &p.panels {
        out.extend(panel_tables(p.name, panel)?);
    }
    Ok(out)
}

/// Writes every data file of the preset into `out_dir`.
pub fn reproduce(name: &str, out_dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut written = Vec::new();
    for (stem, table) in preset_tables(name)? {
        written.extend(emit(&table, format, &out_dir.join(format!("{stem}.{ext}")))?);
    }
    Ok(written)
}
