//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cavsim::amplitude::{evolve_ode, lindblad_oracle, propagator, AmplitudeVector, Backend, OdeTolerances, PropagatorSample};
use cavsim::model::PSD_TOL;
use cavsim::nonmarkov::{blp_measure, default_blp_grid, PairGrid};
use cavsim::single_qubit::{asymptotic_coherence, coherence_trace, evolve_qubit};
use cavsim::sweeps::{
    fig3_params, fig4_panels, fig7a_init, fig7a_sites, preset, run_sweep, table1_default, RowValue,
};
use cavsim::two_qubit::{
    compose_two_qubit, concurrence_wootters, concurrence_x, esd_time, trapped_concurrence, BellLikeInit, EsdOutcome,
};
use cavsim::{PureQubitInit, QubitState, SiteParams, TimeGrid, TwoQubitState};
use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn within(value: f64, target: f64, rel: f64) -> bool {
    ((value - target) / target).abs() <= rel
}

fn esd_baseline() -> Outcome {
    let start = Instant::now();
    let outcome = esd_time(&fig7a_sites(0.0, 0.0, 0.0), &fig7a_init(), 50.0).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let EsdOutcome::Dies { t_star, .. } = outcome else {
        return Err(format!("expected finite death time, got {outcome:?}"));
    };
    let msg = format!("t* = {t_star:.4} (target 6.69 ± 2%), {:.0} ms", elapsed.as_secs_f64() * 1e3);
    if within(t_star, 6.69, 0.02) && elapsed < Duration::from_secs(1) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn table1_cells() -> Outcome {
    let start = Instant::now();
    let rows = table1_default().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let targets = [(1e-2, 0.5, 0.5, 454.0), (1e-2, 0.5, 1.0, 974.0), (1e-3, 0.5, 0.5, 4481.0), (1e-3, 0.5, 1.0, 9686.0)];
    let mut parts = Vec::new();
    let mut ok = elapsed < Duration::from_secs(30);
    for (g2, ja, jb, target) in targets {
        let row = rows
            .iter()
            .find(|r| r.gamma2_ratio == g2 && r.j_a == ja && r.j_b == jb)
            .ok_or_else(|| format!("missing cell {g2} {ja} {jb}"))?;
        ok &= within(row.t_star_scaled, target, 0.02);
        let sens: Vec<String> = row
            .sensitivity
            .iter()
            .map(|(eps, t)| format!("{eps:e}:{}", t.map_or("-".into(), |t| format!("{t:.1}"))))
            .collect();
        parts.push(format!("{:.1}/{target} [{}]", row.t_star_scaled, sens.join(" ")));
    }
    let extended: Vec<String> = rows
        .iter()
        .filter(|r| r.gamma2_ratio == 1e-4)
        .map(|r| format!("{:.0}", r.t_star_scaled))
        .collect();
    let msg = format!(
        "{}; gamma2=1e-4: {}; {:.1} s",
        parts.join(", "),
        extended.join(", "),
        elapsed.as_secs_f64()
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn asymptotic_coherence_check() -> Outcome {
    let init = PureQubitInit::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2).unwrap();
    let grid = TimeGrid::span(5000.0, 50001).unwrap();
    let mut worst = 0.0_f64;
    for (j, kappa) in [(1.0, 1.0), (2.0, 0.24), (0.3, 0.4)] {
        let p = SiteParams::resonant(kappa, j, 0.0);
        let trace = coherence_trace(&init, &p, &grid, Backend::Analytic).map_err(|e| e.to_string())?;
        let simulated = *trace.values.last().unwrap();
        let predicted = asymptotic_coherence(&init, &p).value().unwrap();
        worst = worst.max((simulated - predicted).abs());
    }
    let msg = format!("max |C(5000) - 2|ab|J²/(J²+κ²)| = {worst:.2e} (tol 1e-4)");
    if worst < 1e-4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn blp_structure() -> Outcome {
    let grid = default_blp_grid();
    let family = PairGrid::default();
    let n = |kappa: f64, j: f64| blp_measure(&fig3_params(kappa, j), &grid, &family).map(|r| r.n_value);
    let weak0 = n(0.24, 0.0).map_err(|e| e.to_string())?;
    let weak2 = n(0.24, 2.0).map_err(|e| e.to_string())?;
    let fig3 = preset("fig3").unwrap();
    let strong = fig3.panels.iter().find(|p| p.stem == "fig3_kappa0.4").unwrap();
    let js: Vec<f64> = strong.spec.values.iter().copied().filter(|&j| j <= 1.5 + 1e-9).collect();
    let ns: Vec<f64> = js.iter().map(|&j| n(0.4, j)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let (imin, nmin) = ns
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let interior = imin > 0 && imin + 1 < ns.len();
    let ok = weak0 < 1e-6 && weak2 > 1e-3 && ns[0] > 1e-3 && interior && nmin < ns[0] / 2.0;
    let msg = format!(
        "κ=0.24: N(0)={weak0:.2e}, N(2)={weak2:.4}; κ=0.4: N(0)={:.4}, min N={nmin:.2e} at J={:.2}",
        ns[0], js[imin]
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn triple_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let times = [0.5, 1.0, 5.0, 20.0];
    let grid = TimeGrid::span(20.0, 41).unwrap();
    let idx: Vec<usize> = times.iter().map(|t| (t / grid.step()).round() as usize).collect();
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let p = SiteParams {
            kappa: rng.random_range(0.0..3.0),
            j_coupling: rng.random_range(0.0..3.0),
            gamma1: 1.0,
            gamma2: rng.random_range(0.0..3.0),
            detuning: rng.random_range(-2.0..2.0),
            omega: 0.0,
        };
        let ode = evolve_ode(&p, AmplitudeVector::excited_qubit(), &grid, OdeTolerances::default()).map_err(|e| e.to_string())?;
        let oracle = lindblad_oracle(&p, AmplitudeVector::excited_qubit(), &grid).map_err(|e| e.to_string())?;
        for (&t, &i) in times.iter().zip(&idx) {
            let analytic = propagator(&p, t, Backend::Analytic).map_err(|e| e.to_string())?.sample.z.norm();
            let a = ode.samples[i].h.norm();
            let b = oracle.samples[i].h.norm();
            worst = worst.max((analytic - a).abs()).max((analytic - b).abs()).max((a - b).abs());
        }
    }
    let msg = format!("20 random sets, max pairwise ||z| difference| = {worst:.2e} (tol 1e-8)");
    if worst < 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn random_propagator(rng: &mut ChaCha8Rng) -> PropagatorSample {
    let p = SiteParams {
        kappa: rng.random_range(0.0..3.0),
        j_coupling: rng.random_range(0.0..3.0),
        gamma1: 1.0,
        gamma2: rng.random_range(0.0..3.0),
        detuning: rng.random_range(-2.0..2.0),
        omega: 0.0,
    };
    let t = rng.random_range(0.0..30.0);
    propagator(&p, t, Backend::Analytic).expect("valid parameters").sample
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn cptp_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let (mut checked, mut failures, mut worst_gap) = (0usize, 0usize, 0.0_f64);

    for _ in 0..4000 {
        let r: f64 = rng.random_range(0.0..1.0_f64).cbrt();
        let (cz, phi): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(0.0..std::f64::consts::TAU));
        let s = (1.0 - cz * cz).sqrt();
        let rho0 = QubitState::from_bloch(r * s * phi.cos(), r * s * phi.sin(), r * cz).unwrap();
        let rho = evolve_qubit(&rho0, &random_propagator(&mut rng));
        checked += 1;
        failures += usize::from(!rho.is_physical(PSD_TOL));
    }

    for _ in 0..3000 {
        let (a, b) = (random_complex(&mut rng), random_complex(&mut rng));
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let init = BellLikeInit::new(a / norm, b / norm).unwrap();
        let rho = compose_two_qubit(&init.state(), &random_propagator(&mut rng), &random_propagator(&mut rng));
        checked += 1;
        failures += usize::from(!rho.is_physical(PSD_TOL));
        let cx = concurrence_x(&rho).map_err(|e| e.to_string())?;
        let cw = concurrence_wootters(&rho).map_err(|e| e.to_string())?;
        worst_gap = worst_gap.max((cx - cw).abs());
    }

    for _ in 0..3000 {
        let g = Matrix4::from_fn(|_, _| random_complex(&mut rng));
        let m = g * g.adjoint();
        let rho0 = TwoQubitState::new(m / m.trace()).unwrap();
        let rho = compose_two_qubit(&rho0, &random_propagator(&mut rng), &random_propagator(&mut rng));
        checked += 1;
        failures += usize::from(!rho.is_physical(PSD_TOL));
    }

    let msg = format!("{checked} evolved states, {failures} unphysical; max |C_x - C_W| = {worst_gap:.2e} (tol 1e-10)");
    if failures == 0 && worst_gap <= 1e-10 && checked >= 10_000 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn dark_state() -> Outcome {
    let grid = TimeGrid::span(100.0, 1001).unwrap();
    let mut worst = 0.0_f64;
    for (j, kappa) in [(1.0, 1.0), (2.0, 0.24), (0.3, 0.4), (0.5, 0.2), (3.0, 2.0)] {
        let init = AmplitudeVector::dark_state(kappa, j);
        let h0 = init.h.norm();
        let traj = evolve_ode(&SiteParams::resonant(kappa, j, 0.0), init, &grid, OdeTolerances::default())
            .map_err(|e| e.to_string())?;
        for s in &traj.samples {
            worst = worst.max((s.h.norm() - h0).abs());
        }
    }
    let msg = format!("5 (J, κ) pairs, max ||h(t)| - |h(0)|| = {worst:.2e} (tol 1e-9)");
    if worst < 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn trapping_structure() -> Outcome {
    let init = fig7a_init();
    let values: Vec<f64> = [0.5, 1.0, 2.0, 3.0]
        .iter()
        .map(|&j| trapped_concurrence(&fig7a_sites(j, j, 0.0), &init).map(|t| t.value_or_zero()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let monotone = values.windows(2).all(|w| w[1] >= w[0]) && values[0] > 0.0;

    let fig8 = preset("fig8").unwrap();
    let panel = fig8.panels.iter().find(|p| p.stem == "fig8_trapped").unwrap();
    let result = run_sweep(&panel.spec).map_err(|e| e.to_string())?;
    let trapped: Vec<(f64, bool)> = result
        .rows
        .iter()
        .map(|r| match &r.outcome {
            Ok(RowValue::Trapping(t)) => Ok((r.value, t.value().is_some())),
            other => Err(format!("alpha = {}: {other:?}", r.value)),
        })
        .collect::<Result<_, _>>()?;
    let first = trapped.iter().find(|(_, t)| *t).map(|(a, _)| *a);
    let consistent = first.is_some_and(|a0| trapped.iter().all(|&(a, t)| t == (a >= a0)));
    let in_band = first.is_some_and(|a0| (0.15..=0.25).contains(&a0));

    let msg = format!(
        "trapped C for J=0.5,1,2,3: {}; trapping starts at alpha = {}",
        values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", "),
        first.map_or("none".into(), |a| format!("{a:.2}"))
    );
    if monotone && consistent && in_band {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn detuning_benchmark() -> Outcome {
    let fig4 = preset("fig4").unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for (tag, params) in fig4_panels().into_iter().filter(|(_, p)| p.kappa < 0.25) {
        let panel = fig4.panels.iter().find(|p| p.stem == format!("fig4{tag}")).unwrap();
        let result = run_sweep(&panel.spec).map_err(|e| e.to_string())?;
        let (delta, _) = result
            .rows
            .iter()
            .map(|r| match &r.outcome {
                Ok(RowValue::Trace(v)) => (r.value, *v.last().unwrap()),
                _ => (r.value, f64::INFINITY),
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let step = panel.spec.values[1] - panel.spec.values[0];
        ok &= (delta - params.j_coupling).abs() <= step + 1e-12;
        parts.push(format!("panel {tag}: argmin delta = {delta} (J = {})", params.j_coupling));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("entanglement death time without cavity coupling", esd_baseline),
        ("entanglement lifetime table", table1_cells),
        ("asymptotic coherence", asymptotic_coherence_check),
        ("non-Markovianity structure", blp_structure),
        ("analytic / ODE / master-equation agreement", triple_equivalence),
        ("complete positivity and concurrence forms", cptp_suite),
        ("dark-state stationarity", dark_state),
        ("entanglement trapping structure", trapping_structure),
        ("detuning benchmark", detuning_benchmark),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
