//! Conversion of scenario models into library objects, and the audit of
//! derived quantities shown by `validate`.

use serde_json::{Map, Value};
use sigrav::bounds::{self, ConstraintCurve, LogAxis};
use sigrav::channel::{ModelParams, MultipoleOrder, PotentialFn};
use sigrav::evolve::MAX_STEP_RATE;
use sigrav::interferometry::{InterferometerScenario, KickModel, MULTIPOLE_LIMIT};
use sigrav::state::{fock, GridSpec, WaveFunction};
use sigrav::C64;

use crate::error::{building, CliError};
use crate::output::json_f64;
use crate::scenario::{
    BoundsModel, GridModel, HamiltonianKind, InitialIn, InterferometryModel, KickIn, Kind, Model, PotentialSpec,
    Scenario,
};
use crate::units::Dimension as D;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// Derived quantities and checks, in the order they were computed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Audit {
    pub values: Vec<(String, f64)>,
    pub checks: Vec<Check>,
}

impl Audit {
    fn value(&mut self, name: impl Into<String>, v: f64) {
        self.values.push((name.into(), v));
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
    }

    fn warn_unless(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let status = if ok { Status::Pass } else { Status::Warn };
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| c.status == Status::Fail)
    }

    pub fn warnings(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| c.status == Status::Warn)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect()
    }

    /// Human-readable lines for the terminal.
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.values.iter().map(|(k, v)| format!("value {k} = {v:e}")).collect();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Warn => "WARN",
                Status::Fail => "FAIL",
            };
            out.push(format!("check {}: {tag} {}", c.name, c.detail));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let values: Map<String, Value> = self.values.iter().map(|(k, v)| (k.clone(), json_f64(*v))).collect();
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                serde_json::json!({
                    "name": c.name,
                    "status": format!("{:?}", c.status).to_lowercase(),
                    "detail": c.detail,
                })
            })
            .collect();
        serde_json::json!({ "values": values, "checks": checks })
    }
}

// ---------------------------------------------------------------- grid

/// A grid model in natural units.
#[derive(Debug, Clone)]
pub struct GridSetup {
    pub params: ModelParams,
    pub grids: Vec<GridSpec>,
    pub potential: PotentialFn,
    pub psi0: WaveFunction,
    pub masses: Vec<f64>,
    pub hamiltonian: HamiltonianKind,
    pub t_final: f64,
    pub trajectories: Option<usize>,
}

fn potential(spec: &PotentialSpec) -> Result<PotentialFn, CliError> {
    Ok(match spec {
        PotentialSpec::Newtonian => PotentialFn::Newtonian,
        PotentialSpec::Softened { length } => {
            PotentialFn::Softened { length: length.natural("model.potential.length", D::Length)? }
        }
    })
}

/// Reads units and checks the shape of the model; physics constraints are
/// left to [`audit_grid`].
pub fn grid_setup(m: &GridModel, kind: Kind) -> Result<GridSetup, CliError> {
    let n = m.particles.len();
    if !(1..=2).contains(&n) {
        return Err(CliError::validation("model.particles", format!("need one or two particles, got {n}")));
    }
    match (kind, m.trajectories) {
        (Kind::Trajectories, None) => {
            return Err(CliError::validation("model.trajectories", "required for a trajectories scenario"))
        }
        (Kind::Trajectories, Some(0)) => return Err(CliError::validation("model.trajectories", "must be at least 1")),
        (Kind::GridEvolution, Some(_)) => {
            return Err(CliError::validation("model.trajectories", "only allowed for a trajectories scenario"))
        }
        _ => {}
    }
    if m.hamiltonian == HamiltonianKind::Coherent && (n != 2 || kind != Kind::GridEvolution) {
        return Err(CliError::validation(
            "model.hamiltonian",
            "the coherent comparison needs two particles and a grid-evolution scenario",
        ));
    }
    let mut masses = Vec::new();
    let mut grids = Vec::new();
    let mut packets = Vec::new();
    for (i, p) in m.particles.iter().enumerate() {
        let f = |s: &str| format!("model.particles[{i}].{s}");
        masses.push(p.mass.natural(&f("mass"), D::Mass)?);
        let g = &p.grid;
        let spacing = g.spacing.natural(&f("grid.spacing"), D::Length)?;
        let grid = GridSpec::centered(g.center.natural(&f("grid.center"), D::Length)?, spacing, g.points)
            .map_err(|e| CliError::validation(f("grid"), e))?;
        grids.push(grid);
        let k = &p.packet;
        let packet = WaveFunction::gaussian(
            grid,
            k.center.natural(&f("packet.center"), D::Length)?,
            k.width.natural(&f("packet.width"), D::Length)?,
            k.momentum.natural(&f("packet.momentum"), D::Wavenumber)?,
        )
        .map_err(building(&f("packet")))?;
        packets.push(packet);
    }
    let psi0 = match packets.as_slice() {
        [a] => a.clone(),
        [a, b] => WaveFunction::product(a, b).map_err(building("model.particles"))?,
        _ => unreachable!(),
    };
    let params = ModelParams::new(
        m.v.natural("model.v", D::Dimensionless)?,
        m.sigma.natural("model.sigma", D::Length)?,
        m.g_newton.natural("model.g_newton", D::Gravitational)?,
        masses.clone(),
    )
    .map_err(building("model"))?;
    Ok(GridSetup {
        params,
        grids,
        potential: potential(&m.potential)?,
        psi0,
        masses,
        hamiltonian: m.hamiltonian,
        t_final: m.t_final.natural("model.t_final", D::Time)?,
        trajectories: m.trajectories,
    })
}

pub fn audit_grid(s: &GridSetup) -> Audit {
    let mut a = Audit::default();
    let c = s.params.couplings();
    let n = s.grids.len();
    for i in 0..n {
        a.value(format!("gamma[{i}]"), c.gamma[i]);
    }
    for i in 0..n {
        for j in 0..n {
            if i != j {
                a.value(format!("eta[{i}][{j}]"), c.eta[i][j]);
                a.value(format!("alpha[{i}][{j}]"), c.alpha(i, j));
            }
        }
    }
    a.value("max_channel_rate", c.max_rate());
    a.value("backaction_rate[0]", c.gamma[0] / (4.0 * s.params.sigma * s.params.sigma));
    let dim: usize = s.grids.iter().map(GridSpec::len).product();
    a.value("dimension", dim as f64);

    if n == 2 {
        let g_mm = s.params.g_newton * s.masses[0] * s.masses[1];
        let worst = (0..2).map(|i| ((c.alpha(i, 1 - i) - g_mm) / g_mm).abs()).fold(0.0, f64::max);
        a.check("calibration", worst <= 1e-12, format!("alpha_ij = G m_i m_j to {worst:.1e}"));
    }
    let sigma = s.params.sigma;
    for (i, g) in s.grids.iter().enumerate() {
        let dx = g.spacing();
        a.check(
            &format!("grid-resolution[{i}]"),
            dx <= sigma / 4.0 * (1.0 + 1e-12),
            format!("dx = {dx:e}, sigma/4 = {:e}", sigma / 4.0),
        );
    }
    if n == 2 && s.potential.is_singular() {
        let gap = (s.grids[1].x_min() - s.grids[0].x_max()).max(s.grids[0].x_min() - s.grids[1].x_max());
        let dx = s.grids[0].spacing().max(s.grids[1].spacing());
        a.check("potential-regular", gap >= 10.0 * dx, format!("closest approach {gap:e}, needs >= 10 dx = {:e}", 10.0 * dx));
    }
    // Probability within 6 sigma of a grid edge, where the kernel is cut.
    for i in 0..n {
        let (g, cells) = sigrav::povm::PositionMarginal::position_marginal(&s.psi0, i).unwrap_or((s.grids[i], vec![]));
        let margin = sigrav::povm::EDGE_MARGIN_SIGMAS * sigma;
        let edge: f64 = g
            .points()
            .iter()
            .zip(&cells)
            .filter(|(&x, _)| x - g.x_min() < margin || g.x_max() - x < margin)
            .map(|(_, p)| p)
            .sum();
        a.warn_unless(&format!("kernel-margin[{i}]"), edge <= 1e-6, format!("initial probability near the edge {edge:.1e}"));
    }
    a
}

// ---------------------------------------------------------------- interferometry

#[derive(Debug, Clone)]
pub struct InterferometerSetup {
    pub scenario: InterferometerScenario,
    pub kick: KickModel,
    pub initial: InitialIn,
    pub atom_dephasing: bool,
    pub t_final: f64,
    pub n_fock: usize,
}

pub fn interferometer_setup(m: &InterferometryModel, n_fock: Option<usize>) -> Result<InterferometerSetup, CliError> {
    let beta = C64::new(
        m.beta.re.natural("model.beta.re", D::Dimensionless)?,
        m.beta.im.natural("model.beta.im", D::Dimensionless)?,
    );
    let nbar = m.nbar.natural("model.nbar", D::Dimensionless)?;
    // Built field by field so that `validate` can report on invalid input.
    let scenario = InterferometerScenario {
        big_m: m.source_mass.natural("model.source_mass", D::Mass)?,
        m: m.atom_mass.natural("model.atom_mass", D::Mass)?,
        ell: m.arm_separation.natural("model.arm_separation", D::Length)?,
        d: m.distance.natural("model.distance", D::Length)?,
        omega_m: m.omega.natural("model.omega", D::Frequency)?,
        nbar,
        beta,
        delta_z_m: m.source_width.natural("model.source_width", D::Length)?,
        v: m.v.natural("model.v", D::Dimensionless)?,
        sigma: m.sigma.natural("model.sigma", D::Length)?,
        g_newton: m.g_newton.natural("model.g_newton", D::Gravitational)?,
    };
    let kick = match m.kick {
        KickIn::Monopole => KickModel::Multipole(MultipoleOrder::Monopole),
        KickIn::Dipole => KickModel::Multipole(MultipoleOrder::Dipole),
        KickIn::Quadrupole => KickModel::Multipole(MultipoleOrder::Quadrupole),
        KickIn::QuadrupoleCross => KickModel::QuadrupoleCross,
        KickIn::Newtonian => KickModel::Shape(PotentialFn::Newtonian),
    };
    let beta_abs = if m.initial == InitialIn::Boosted { beta.norm() } else { 0.0 };
    Ok(InterferometerSetup {
        scenario,
        kick,
        initial: m.initial,
        atom_dephasing: m.atom_dephasing,
        t_final: m.t_final.natural("model.t_final", D::Time)?,
        n_fock: n_fock.unwrap_or_else(|| fock::default_cutoff(nbar, beta_abs)),
    })
}

pub fn audit_interferometer(s: &InterferometerSetup) -> Audit {
    let mut a = Audit::default();
    let sc = &s.scenario;
    let positive = [
        ("source_mass", sc.big_m),
        ("atom_mass", sc.m),
        ("arm_separation", sc.ell),
        ("distance", sc.d),
        ("source_width", sc.delta_z_m),
        ("v", sc.v),
        ("sigma", sc.sigma),
    ];
    let bad: Vec<&str> = positive.iter().filter(|(_, x)| !(*x > 0.0)).map(|(n, _)| *n).collect();
    let non_negative = sc.g_newton >= 0.0 && sc.omega_m >= 0.0 && sc.nbar >= 0.0;
    a.check(
        "parameters",
        bad.is_empty() && non_negative,
        if bad.is_empty() && non_negative {
            "positive masses, lengths, v and sigma; G, omega, nbar >= 0".to_string()
        } else {
            format!("non-positive: {bad:?}; G, omega, nbar >= 0: {non_negative}")
        },
    );
    a.value("theta", sc.theta());
    a.value("kappa", sc.kappa());
    a.value("z0", sc.z0());
    a.value("theta_sigma", sc.theta() * sc.sigma);
    a.value("theta_z0", sc.theta() * sc.z0());
    a.value("gamma_atom", sc.gamma_atom());
    a.value("gamma_source", sc.gamma_source());
    a.value("fringe_frequency", sc.fringe_frequency());
    a.value("gamma_incoh_model", sc.gamma_incoh());
    a.value("gamma_incoh_quoted", sc.gamma_incoh_quoted());
    a.value("n_fock", s.n_fock as f64);
    a.check(
        "multipole-validity",
        sc.multipole_valid(),
        format!("l/d = {:e}, z0/d = {:e}, limit {MULTIPOLE_LIMIT}", sc.ell / sc.d, sc.z0() / sc.d),
    );
    let needed = (10.0 * (sc.nbar + 1.0)).ceil() as usize;
    let beta2 = if s.initial == InitialIn::Boosted { sc.beta.norm_sqr() } else { 0.0 };
    a.check(
        "fock-cutoff",
        s.n_fock >= needed && beta2 <= s.n_fock as f64 / 4.0,
        format!("N = {}, thermal needs {needed}, |beta|^2 = {beta2:e} <= N/4", s.n_fock),
    );
    a
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Clone)]
pub struct BoundsSetup {
    pub v_axis: LogAxis,
    pub sigma_axis: LogAxis,
    pub curves: Vec<ConstraintCurve>,
    /// `(v, sigma in metres)`.
    pub points: Vec<(f64, f64)>,
}

pub fn bounds_setup(m: &BoundsModel, base: &std::path::Path) -> Result<BoundsSetup, CliError> {
    let axis = |name: &str, ax: &crate::scenario::AxisIn, dim: D| -> Result<LogAxis, CliError> {
        let min = ax.min.natural(&format!("model.{name}.min"), dim)?;
        let max = ax.max.natural(&format!("model.{name}.max"), dim)?;
        LogAxis::new(min, max, ax.points).map_err(building(&format!("model.{name}")))
    };
    let curves = match &m.benchmarks {
        Some(p) => bounds::load_benchmarks(&base.join(p)).map_err(building("model.benchmarks"))?,
        None => bounds::default_curves().map_err(building("model.benchmarks"))?,
    };
    let points = m
        .points
        .iter()
        .enumerate()
        .map(|(k, p)| {
            Ok((
                p.v.natural(&format!("model.points[{k}].v"), D::Dimensionless)?,
                p.sigma.metres(&format!("model.points[{k}].sigma"))?,
            ))
        })
        .collect::<Result<_, CliError>>()?;
    Ok(BoundsSetup {
        v_axis: axis("v_axis", &m.v_axis, D::Dimensionless)?,
        sigma_axis: axis("sigma_axis", &m.sigma_axis, D::Length)?,
        curves,
        points,
    })
}

pub fn audit_bounds(s: &BoundsSetup) -> Audit {
    let mut a = Audit::default();
    a.value("curves", s.curves.len() as f64);
    a.value("cells", (s.v_axis.points * s.sigma_axis.points) as f64);
    for c in &s.curves {
        a.warn_unless(&format!("curve[{}]", c.name), !c.template_derived, if c.template_derived {
            "built from the lost-particle template"
        } else {
            "dedicated formula"
        });
    }
    a
}

// ---------------------------------------------------------------- dispatch

/// The audit of any scenario; unit and shape errors are returned directly.
pub fn audit(s: &Scenario) -> Result<Audit, CliError> {
    match &s.model {
        Model::Grid(m) => Ok(audit_grid(&grid_setup(m, s.kind)?)),
        Model::Interferometry(m) => Ok(audit_interferometer(&interferometer_setup(m, s.numerics.n_fock)?)),
        Model::Bounds(m) => Ok(audit_bounds(&bounds_setup(m, &s.base_dir)?)),
        Model::Validate(inner) => audit(inner),
    }
}

/// Default step rule: `MAX_STEP_RATE / max_rate`, shortened so that it
/// divides `t_final`.
pub fn default_dt(t_final: f64, max_rate: f64) -> f64 {
    let dt = MAX_STEP_RATE / max_rate;
    if t_final <= 0.0 {
        return dt;
    }
    t_final / (t_final / dt).ceil()
}
