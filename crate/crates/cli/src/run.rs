//! Runners for each scenario kind.

use serde_json::{Map, Value};
use sigrav::bounds::{self, UnitSystem};
use sigrav::channel::{GridChannel, GridHamiltonian};
use sigrav::evolve::{self, EvolutionConfig, Generator, GridLiouvillian, MAX_STEP_RATE};
use sigrav::interferometry::{self, InterferometerLiouvillian, KickModel};
use sigrav::linalg::CMatrix;
use sigrav::observables;
use sigrav::povm::PositionMarginal;
use sigrav::state::{fock, DensityMatrix, GridSpec, QubitOscillatorState, Subsystem, WaveFunction};

use crate::error::{building, running, CliError};
use crate::model::{self, Audit, BoundsSetup, GridSetup, InterferometerSetup};
use crate::output::{fmt_f64, json_f64, ResultBundle, Table};
use crate::scenario::{HamiltonianKind, InitialIn, Kind, Model, Numerics, Scenario};
use crate::units::Dimension;

const DEFAULT_RECORDS: usize = 100;

/// Least-squares slope; zero with fewer than two points.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    let mut out: Vec<f64> = Vec::with_capacity(phases.len());
    for &p in phases {
        let mut a = p;
        if let Some(&last) = out.last() {
            a += ((last - a) / tau).round() * tau;
        }
        out.push(a);
    }
    out
}

fn fail_on(audit: &Audit) -> Result<(), CliError> {
    match audit.first_failure() {
        Some(c) => Err(CliError::validation(c.name.clone(), &c.detail)),
        None => Ok(()),
    }
}

/// Step and record interval from the numerics block.
fn stepping(numerics: &Numerics, t_final: f64, max_rate: f64, bundle: &mut ResultBundle) -> Result<EvolutionConfig, CliError> {
    let dt = match &numerics.dt {
        Some(q) => {
            let dt = q.natural("numerics.dt", Dimension::Time)?;
            if dt * max_rate > MAX_STEP_RATE * (1.0 + 1e-12) {
                return Err(CliError::validation(
                    "numerics.dt",
                    format!("dt * max_rate = {:e} exceeds {MAX_STEP_RATE}", dt * max_rate),
                ));
            }
            dt
        }
        None => model::default_dt(t_final, max_rate),
    };
    let records = numerics.records.unwrap_or(DEFAULT_RECORDS).max(1);
    let steps = (t_final / dt).round() as usize;
    let every = (steps / records).max(1);
    bundle.numeric("dt", json_f64(dt));
    bundle.numeric("steps", steps);
    bundle.numeric("record_every", every);
    bundle.numeric("max_rate", json_f64(max_rate));
    EvolutionConfig::new(t_final, dt, every).map_err(building("numerics"))
}

// ---------------------------------------------------------------- grid

fn moments(grid: &GridSpec, cells: &[f64]) -> (f64, f64) {
    let pts = grid.points();
    let mean: f64 = pts.iter().zip(cells).map(|(x, p)| x * p).sum();
    let var: f64 = pts.iter().zip(cells).map(|(x, p)| (x - mean).powi(2) * p).sum();
    (mean, var)
}

fn reduced(rho: &DensityMatrix, i: usize, n: usize) -> Result<DensityMatrix, sigrav::Error> {
    match n {
        1 => Ok(rho.clone()),
        _ => rho.partial_trace(if i == 0 { Subsystem::Second } else { Subsystem::First }),
    }
}

fn grid_hamiltonian(s: &GridSetup) -> Result<GridHamiltonian, CliError> {
    Ok(match s.hamiltonian {
        HamiltonianKind::None => GridHamiltonian::zero(&s.grids),
        HamiltonianKind::Free => GridHamiltonian::free(&s.grids, &s.masses).map_err(building("model.particles"))?,
        HamiltonianKind::Coherent => {
            let (phi, k) = (s.potential, s.params.g_newton * s.masses[0] * s.masses[1]);
            GridHamiltonian::free(&s.grids, &s.masses)
                .and_then(|h| h.with_pair_potential(move |r| -k * phi.eval(r.abs())))
                .map_err(building("model.potential"))?
        }
    })
}

fn grid_channel(s: &GridSetup) -> Result<GridChannel, CliError> {
    GridChannel::new(s.params.clone(), s.grids.clone(), s.potential).map_err(building("model"))
}

fn run_grid_evolution(s: &GridSetup, numerics: &Numerics, bundle: &mut ResultBundle) -> Result<(), CliError> {
    let n = s.grids.len();
    let channel = match s.hamiltonian {
        HamiltonianKind::Coherent => None,
        _ => Some(grid_channel(s)?),
    };
    let gen = GridLiouvillian::new(grid_hamiltonian(s)?, channel.clone()).map_err(building("model"))?;
    let cfg = stepping(numerics, s.t_final, gen.max_rate(), bundle)?;

    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for q in ["x_mean", "x_var", "p_mean", "p_var"] {
            header.push(format!("{q}_{i}"));
        }
    }
    header.extend(["trace", "purity"].map(String::from));
    if n == 2 {
        header.push("log_negativity".into());
    }
    let mut table = Table::with_header("series", header);
    let momenta: Vec<CMatrix> = s.grids.iter().map(GridSpec::momentum_matrix).collect();
    let (mut ts, mut var_p) = (Vec::new(), vec![Vec::new(); n]);
    let mut max_ln: f64 = 0.0;
    let rho0 = DensityMatrix::from_pure(&s.psi0);
    let last = evolve::master_evolve_with(&rho0, &gen, &cfg, |t, rho| {
        let mut row = vec![t];
        for i in 0..n {
            let r = reduced(rho, i, n)?;
            let (g, cells) = r.position_marginal(0)?;
            let (xm, xv) = moments(&g, &cells);
            let p = &momenta[i];
            let pm = r.expectation(p).re;
            let pv = r.expectation(&(p * p)).re - pm * pm;
            row.extend([xm, xv, pm, pv]);
            var_p[i].push(pv);
        }
        row.extend([rho.trace().re, rho.purity()]);
        if n == 2 {
            let ln = rho.log_negativity()?;
            max_ln = max_ln.max(ln);
            row.push(ln);
        }
        ts.push(t);
        table.push_numbers(&row);
        Ok(())
    })
    .map_err(running)?;

    for i in 0..n {
        bundle.scalar(&format!("var_p_slope_{i}"), slope(&ts, &var_p[i]));
        bundle.scalar(&format!("backaction_rate_{i}"), s.params.couplings().gamma[i] / (4.0 * s.params.sigma.powi(2)));
    }
    if let Some(ch) = &channel {
        let reports = observables::momentum_variance_rate(&rho0, ch).map_err(running)?;
        for (i, r) in reports.iter().enumerate() {
            bundle.scalar(&format!("heating_backaction_{i}"), r.backaction);
            bundle.scalar(&format!("heating_shot_{i}"), r.shot);
            bundle.scalar(&format!("heating_cross_{i}"), r.cross);
            bundle.scalar(&format!("heating_total_{i}"), r.total);
        }
        let forces = observables::ehrenfest_force(&rho0, ch).map_err(running)?;
        for (i, f) in forces.iter().enumerate() {
            bundle.scalar(&format!("force_exact_{i}"), f.exact);
            bundle.scalar(&format!("force_factorized_{i}"), f.factorized);
        }
    }
    if n == 2 {
        bundle.scalar("max_log_negativity", max_ln);
    }
    bundle.scalar("final_trace", last.trace().re);
    bundle.scalar("final_purity", last.purity());
    bundle.tables.push(table);
    Ok(())
}

// ---------------------------------------------------------------- trajectories

/// Per particle: `<x>`, `<p>`, `<p^2>`.
fn wave_observables(psi: &WaveFunction, momenta: &[CMatrix]) -> Vec<f64> {
    let u = psi.to_unit_vector();
    let n = momenta.len();
    let mut out = Vec::with_capacity(3 * n);
    let dims: Vec<usize> = psi.grids().iter().map(GridSpec::len).collect();
    let m = CMatrix::from_fn(dims[0], if n == 2 { dims[1] } else { 1 }, |a, b| {
        u[if n == 2 { a * dims[1] + b } else { a }]
    });
    for (i, p) in momenta.iter().enumerate() {
        let (g, cells) = psi.position_marginal(i).expect("particle index in range");
        let (xm, _) = moments(&g, &cells);
        let pm = if i == 0 { p * &m } else { &m * p.transpose() };
        let mean = m.iter().zip(pm.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        out.extend([xm, mean, pm.norm_squared()]);
    }
    out
}

fn run_trajectories(s: &GridSetup, numerics: &Numerics, seed: u64, bundle: &mut ResultBundle) -> Result<(), CliError> {
    let n = s.grids.len();
    let ch = grid_channel(s)?;
    let h = grid_hamiltonian(s)?;
    let records = numerics.records.unwrap_or(DEFAULT_RECORDS).max(1);
    let count = s.trajectories.unwrap_or(1);
    let dt = s.t_final / records as f64;
    bundle.numeric("record_interval", json_f64(dt));
    bundle.numeric("trajectories", count);
    let cfg = EvolutionConfig::new(s.t_final, dt, 1).map_err(building("model.t_final"))?.with_trajectories(count, seed);
    let momenta: Vec<CMatrix> = s.grids.iter().map(GridSpec::momentum_matrix).collect();
    let observe = move |psi: &WaveFunction| wave_observables(psi, &momenta);
    let recs = evolve::trajectory_evolve(&s.psi0, &h, &ch, &cfg, &observe).map_err(running)?;

    let mut header = vec!["t".to_string()];
    for i in 0..n {
        for q in ["x_mean", "x_mean_se", "p_mean", "p_mean_se", "p2_mean", "p2_mean_se", "p_var"] {
            header.push(format!("{q}_{i}"));
        }
    }
    let mut table = Table::with_header("series", header);
    let mut var_p = vec![Vec::new(); n];
    let times;
    if count >= 2 {
        let st = evolve::ensemble_statistics(&recs).map_err(running)?;
        times = st.times.clone();
        for (t, (mean, se)) in st.times.iter().zip(st.mean.iter().zip(&st.std_error)) {
            let mut row = vec![*t];
            for i in 0..n {
                let v = mean[3 * i + 2] - mean[3 * i + 1].powi(2);
                row.extend([mean[3 * i], se[3 * i], mean[3 * i + 1], se[3 * i + 1], mean[3 * i + 2], se[3 * i + 2], v]);
                var_p[i].push(v);
            }
            table.push_numbers(&row);
        }
    } else {
        let r = &recs[0];
        times = r.times.clone();
        for (t, obs) in r.times.iter().zip(&r.observables) {
            let mut row = vec![*t];
            for i in 0..n {
                let v = obs[3 * i + 2] - obs[3 * i + 1].powi(2);
                row.extend([obs[3 * i], 0.0, obs[3 * i + 1], 0.0, obs[3 * i + 2], 0.0, v]);
                var_p[i].push(v);
            }
            table.push_numbers(&row);
        }
    }

    let mut jumps = Table::new("jumps", &["trajectory", "seed", "time", "particle", "outcome_index", "outcome_x"]);
    // Jumps form a Poisson process of rate sum(gamma), so their times are
    // uniform on [0, t_final]; -ln(1 - t/t_final) is then unit exponential.
    let mut rescaled = Vec::new();
    for r in &recs {
        for j in &r.jumps {
            jumps.push(vec![
                r.index.to_string(),
                r.seed.to_string(),
                fmt_f64(j.time),
                j.particle.to_string(),
                j.outcome.to_string(),
                fmt_f64(s.grids[j.particle].point(j.outcome)),
            ]);
            rescaled.push(-(1.0 - j.time / s.t_final).ln());
        }
    }
    let total_rate: f64 = s.params.couplings().gamma.iter().sum();
    let total = rescaled.len() as f64;
    bundle.scalar("total_jumps", total);
    bundle.scalar("mean_jumps_per_trajectory", total / count as f64);
    bundle.scalar("expected_jumps_per_trajectory", total_rate * s.t_final);
    if !rescaled.is_empty() {
        let ks = evolve::ks_exponential(&rescaled, 1.0).map_err(running)?;
        bundle.scalar("jump_time_ks_statistic", ks.statistic);
        bundle.scalar("jump_time_ks_p_value", ks.p_value);
    }
    for i in 0..n {
        bundle.scalar(&format!("var_p_slope_{i}"), slope(&times, &var_p[i]));
        bundle.scalar(&format!("backaction_rate_{i}"), s.params.couplings().gamma[i] / (4.0 * s.params.sigma.powi(2)));
    }
    bundle.tables.push(table);
    bundle.tables.push(jumps);
    Ok(())
}

// ---------------------------------------------------------------- interferometry

fn run_interferometry(s: &InterferometerSetup, numerics: &Numerics, bundle: &mut ResultBundle) -> Result<(), CliError> {
    let sc = s.scenario;
    sc.validate().map_err(building("model"))?;
    let analytic = !matches!(s.kick, KickModel::Shape(_));
    let mut gen = InterferometerLiouvillian::new(sc, s.n_fock, s.kick, analytic).map_err(building("model"))?;
    if !s.atom_dephasing {
        gen = gen.without_atom_dephasing();
    }
    bundle.numeric("n_fock", s.n_fock);
    let rho0 = match s.initial {
        InitialIn::Product => gen.product_state(),
        InitialIn::Boosted => QubitOscillatorState::boosted(sc.beta, sc.nbar, s.n_fock, sc.oscillator()).map(|q| q.rho),
    }
    .map_err(building("model.initial"))?;
    let cfg = stepping(numerics, s.t_final, gen.max_rate(), bundle)?;

    let mut table = Table::new("series", &["t", "re_sigma_minus", "im_sigma_minus", "visibility"]);
    let (mut ts, mut phase, mut ln_v) = (Vec::new(), Vec::new(), Vec::new());
    evolve::master_evolve_with(&rho0, &gen, &cfg, |t, rho| {
        let sm = fock::sigma_minus(rho);
        table.push_numbers(&[t, sm.re, sm.im, sm.norm()]);
        if sm.norm() > 0.0 {
            ts.push(t);
            phase.push(sm.arg());
            ln_v.push(sm.norm().ln());
        }
        Ok(())
    })
    .map_err(running)?;

    bundle.scalar("fitted_phase_rate", slope(&ts, &unwrap_phase(&phase)));
    bundle.scalar("fitted_decay_rate", -slope(&ts, &ln_v));
    bundle.scalar("fringe_frequency", sc.fringe_frequency());
    bundle.scalar("incoherent_phase_rate", interferometry::incoherent_phase_rate(&sc));
    bundle.scalar("gamma_incoh", sc.gamma_incoh());
    bundle.scalar("gamma_incoh_quoted", sc.gamma_incoh_quoted());
    bundle.scalar("theta", sc.theta());
    bundle.scalar("kappa", sc.kappa());
    bundle.scalar("z0", sc.z0());
    match interferometry::visibility_of_state(&sc, &rho0) {
        Ok(r) => {
            bundle.scalar("initial_log_visibility_rate", r.log_rate);
            bundle.summary.insert("initial_revival".into(), Value::Bool(r.revival));
        }
        Err(e) => bundle.warnings.push(format!("initial visibility rate: {e}")),
    }
    if s.initial == InitialIn::Boosted {
        bundle.scalar("boosted_ratio", interferometry::boosted_ratio_closed_form(&sc).ratio);
    }
    bundle.tables.push(table);
    Ok(())
}

// ---------------------------------------------------------------- bounds

fn run_bounds(s: &BoundsSetup, bundle: &mut ResultBundle) -> Result<(), CliError> {
    let units = UnitSystem::default();
    let map = bounds::exclusion_map(&units, &s.v_axis, &s.sigma_axis, &s.curves).map_err(running)?;
    let mut table = Table::new("exclusion", &["v", "sigma_m", "allowed", "excluded_by"]);
    for p in &map.points {
        table.push(vec![fmt_f64(p.v), fmt_f64(p.sigma), p.allowed().to_string(), p.excluded_by.join(";")]);
    }
    let mut edges = Table::new("boundaries", &["curve", "v", "sigma_m"]);
    for b in &map.boundaries {
        for (v, sigma) in &b.points {
            edges.push(vec![b.name.clone(), fmt_f64(*v), fmt_f64(*sigma)]);
        }
    }
    bundle.scalar("allowed_cells", map.allowed_count() as f64);
    bundle.scalar("total_cells", map.points.len() as f64);
    let mut curves = Map::new();
    for c in &s.curves {
        let excluded = map.points.iter().filter(|p| p.excluded_by.contains(&c.name)).count();
        curves.insert(
            c.name.clone(),
            serde_json::json!({
                "excluded_cells": excluded,
                "direction": format!("{:?}", c.direction()),
                "template_derived": c.template_derived,
                "description": c.description,
            }),
        );
    }
    bundle.summary.insert("curves".into(), Value::Object(curves));
    let mut points = Vec::new();
    for &(v, sigma) in &s.points {
        let heating = bounds::backaction_heating_kelvin_per_second(&units, v, sigma).map_err(running)?;
        let by: Vec<Value> = s
            .curves
            .iter()
            .filter_map(|c| match c.excludes(&units, v, sigma) {
                Ok(true) => Some(Ok(Value::String(c.name.clone()))),
                Ok(false) => None,
                Err(e) => Some(Err(running(e))),
            })
            .collect::<Result<_, _>>()?;
        points.push(serde_json::json!({
            "v": json_f64(v),
            "sigma_m": json_f64(sigma),
            "backaction_heating_k_per_s": json_f64(heating),
            "excluded_by": by,
        }));
    }
    bundle.summary.insert("points".into(), Value::Array(points));
    bundle.tables.push(table);
    bundle.tables.push(edges);
    Ok(())
}

// ---------------------------------------------------------------- dispatch

/// Runs a parsed scenario after its audit passes.
pub fn run(s: &Scenario, seed: u64) -> Result<ResultBundle, CliError> {
    let mut bundle = ResultBundle::default();
    let audit = model::audit(s)?;
    if s.kind != Kind::Validate {
        fail_on(&audit)?;
    }
    bundle.warnings = audit.warnings();
    match &s.model {
        Model::Grid(m) => {
            let setup = model::grid_setup(m, s.kind)?;
            match s.kind {
                Kind::Trajectories => run_trajectories(&setup, &s.numerics, seed, &mut bundle)?,
                _ => run_grid_evolution(&setup, &s.numerics, &mut bundle)?,
            }
        }
        Model::Interferometry(m) => {
            run_interferometry(&model::interferometer_setup(m, s.numerics.n_fock)?, &s.numerics, &mut bundle)?
        }
        Model::Bounds(m) => run_bounds(&model::bounds_setup(m, &s.base_dir)?, &mut bundle)?,
        Model::Validate(_) => {
            bundle.summary.insert("audit".into(), audit.to_json());
        }
    }
    Ok(bundle)
}
