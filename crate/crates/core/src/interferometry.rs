//! Atom interferometer next to a (possibly oscillating) source mass: the
//! qubit (x) oscillator channel, coherence dynamics, the operator `P` and
//! the boosted-protocol ratio.
//!
//! Geometry: the atom sits at `d + (l/2) s` with `s = +1` on `|L>` and the
//! source at `z`. The source is measured with the Gaussian POVM in `z` and
//! kicks the atom; the atom's own measurement is taken in the two-outcome
//! limit, which dephases the qubit at `gamma_m`.

use crate::channel::{multipole_expand, MultipoleOrder, PotentialFn};
use crate::error::{require_positive, Error, Result};
use crate::evolve::Generator;
use crate::linalg::{self, CMatrix};
use crate::povm::TwoOutcomePovm;
use crate::state::{position_operator, thermal_state, Basis, DensityMatrix, Oscillator, QubitOscillatorState};
use crate::C64;

/// Largest accepted `l/d` and `dz_M/d`.
pub const MULTIPOLE_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerScenario {
    /// Source mass.
    pub big_m: f64,
    /// Atom mass.
    pub m: f64,
    pub ell: f64,
    pub d: f64,
    /// Source oscillator frequency; zero for a static source.
    pub omega_m: f64,
    pub nbar: f64,
    pub beta: C64,
    /// Source localisation width (the oscillator length when static).
    pub delta_z_m: f64,
    pub v: f64,
    pub sigma: f64,
    pub g_newton: f64,
}

impl InterferometerScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        big_m: f64,
        m: f64,
        ell: f64,
        d: f64,
        delta_z_m: f64,
        v: f64,
        sigma: f64,
        g_newton: f64,
    ) -> Result<Self> {
        let s = Self {
            big_m,
            m,
            ell,
            d,
            omega_m: 0.0,
            nbar: 0.0,
            beta: C64::new(0.0, 0.0),
            delta_z_m,
            v,
            sigma,
            g_newton,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_oscillator(mut self, omega_m: f64, nbar: f64, beta: C64) -> Result<Self> {
        self.omega_m = omega_m;
        self.nbar = nbar;
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("M", self.big_m)?;
        require_positive("m", self.m)?;
        require_positive("l", self.ell)?;
        require_positive("d", self.d)?;
        require_positive("dz_M", self.delta_z_m)?;
        require_positive("v", self.v)?;
        require_positive("sigma", self.sigma)?;
        if !(self.g_newton >= 0.0) || !(self.omega_m >= 0.0) || !(self.nbar >= 0.0) {
            return Err(Error::InvalidParameter("G_N, omega_M and nbar must be >= 0".into()));
        }
        if !self.multipole_valid() {
            return Err(Error::InvalidParameter(format!(
                "multipole expansion needs l/d and z0/d <= {MULTIPOLE_LIMIT} (l/d = {}, z0/d = {})",
                self.ell / self.d,
                self.z0() / self.d
            )));
        }
        Ok(())
    }

    pub fn multipole_valid(&self) -> bool {
        self.ell / self.d <= MULTIPOLE_LIMIT && self.z0() / self.d <= MULTIPOLE_LIMIT
    }

    /// Branch phase difference per unit source displacement,
    /// `theta = 2 G m l / v^2 d^3`.
    pub fn theta(&self) -> f64 {
        2.0 * self.g_newton * self.m * self.ell / (self.v * self.v * self.d.powi(3))
    }

    /// Dipole kick half-phase `kappa = G m l / 2 v^2 d^2`: each source
    /// measurement applies `exp(-i kappa sigma_z)` to the atom.
    pub fn kappa(&self) -> f64 {
        self.g_newton * self.m * self.ell / (2.0 * self.v * self.v * self.d * self.d)
    }

    /// Oscillator length: `1/sqrt(2 M omega)` if oscillating, else `dz_M`.
    pub fn z0(&self) -> f64 {
        if self.omega_m > 0.0 {
            (1.0 / (2.0 * self.big_m * self.omega_m)).sqrt()
        } else {
            self.delta_z_m
        }
    }

    pub fn oscillator(&self) -> Oscillator {
        Oscillator::with_zero_point_length(self.big_m, self.z0())
    }

    pub fn gamma_atom(&self) -> f64 {
        self.v * self.v * self.m
    }

    pub fn gamma_source(&self) -> f64 {
        self.v * self.v * self.big_m
    }

    /// Newtonian fringe frequency `G M m l / d^2`.
    pub fn fringe_frequency(&self) -> f64 {
        self.g_newton * self.big_m * self.m * self.ell / (self.d * self.d)
    }

    /// `G^2 M m^2 l^2 sigma^2 / d^6 v^2`, the leading-order decay rate as
    /// usually quoted.
    pub fn gamma_incoh_quoted(&self) -> f64 {
        let g = self.g_newton;
        g * g * self.big_m * self.m * self.m * self.ell * self.ell * self.sigma * self.sigma
            / (self.d.powi(6) * self.v * self.v)
    }

    /// Decay rate of the model for a point-like static source,
    /// `gamma_M (1 - exp(-theta^2 sigma^2 / 2))`.
    pub fn gamma_incoh(&self) -> f64 {
        let ts = self.theta() * self.sigma;
        self.gamma_source() * -(-ts * ts / 2.0).exp_m1()
    }
}

/// Which part of the source-to-atom kick is kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KickModel {
    /// `1/|r|` truncated at the given multipole order.
    Multipole(MultipoleOrder),
    /// Only the quadrupole cross term `-l s z / d^3`, which gives
    /// `exp(-i (theta/2) z sigma_z)`.
    QuadrupoleCross,
    /// An arbitrary shape of the full separation.
    Shape(PotentialFn),
}

impl KickModel {
    /// `eta phi` on branch `s` given source outcome `z`, with the attractive
    /// sign `eta = -G m / v^2`; the kick is `exp(-i eta phi)`.
    fn phase(&self, s: &InterferometerScenario, branch: f64, z: f64) -> Result<f64> {
        let strength = s.g_newton * s.m / (s.v * s.v);
        let r = s.d + 0.5 * s.ell * branch - z;
        let phi = match self {
            KickModel::Multipole(order) => multipole_expand(s.d, *order)?.eval(r),
            KickModel::Shape(p) => p.eval(r),
            KickModel::QuadrupoleCross => -s.ell * branch * z / s.d.powi(3),
        };
        Ok(-strength * phi)
    }

    /// `u(R) u(L)^*` as a linear phase `exp(i (c0 + c1 z))`, when the model
    /// is at most quadratic in the separation.
    fn relative_phase_linear(&self, s: &InterferometerScenario) -> Option<(f64, f64)> {
        let strength = s.g_newton * s.m / (s.v * s.v);
        let (dip, quad) = match self {
            KickModel::Multipole(MultipoleOrder::Monopole) => (false, false),
            KickModel::Multipole(MultipoleOrder::Dipole) => (true, false),
            KickModel::Multipole(MultipoleOrder::Quadrupole) => (true, true),
            KickModel::QuadrupoleCross => (false, true),
            KickModel::Shape(_) => return None,
        };
        // phase(R) - phase(L) with branch = -1, +1
        let c0 = if dip { strength * s.ell / (s.d * s.d) } else { 0.0 };
        let c1 = if quad { 2.0 * strength * s.ell / s.d.powi(3) } else { 0.0 };
        Some((c0, c1))
    }
}

/// Quadrature over the source outcome: spacing and half-range in `sigma`.
const QUAD_STEP_SIGMAS: f64 = 1.0 / 8.0;
const QUAD_RANGE_SIGMAS: f64 = 8.0;

fn gaussian_weight(offset: f64, sigma: f64) -> f64 {
    (-offset * offset / (2.0 * sigma * sigma)).exp() / (2.0 * std::f64::consts::PI * sigma * sigma).sqrt()
}

/// Qubit (x) oscillator Liouvillian for the interferometer.
#[derive(Debug, Clone)]
pub struct InterferometerLiouvillian {
    scenario: InterferometerScenario,
    n_fock: usize,
    /// Eigenvectors of `z_hat` (columns) and their eigenvalues.
    w: CMatrix,
    big_w: CMatrix,
    nodes: Vec<f64>,
    kernel: CMatrix,
    hamiltonian: CMatrix,
    atom_dephasing: bool,
}

impl InterferometerLiouvillian {
    /// Builds the generator. With `analytic` the source kernel uses the
    /// closed-form Gaussian integral (multipole models only); otherwise it is
    /// integrated over outcomes.
    pub fn new(scenario: InterferometerScenario, n_fock: usize, kick: KickModel, analytic: bool) -> Result<Self> {
        scenario.validate()?;
        if n_fock < 2 {
            return Err(Error::CutoffTooSmall { cutoff: n_fock, reason: "need at least two Fock levels".into() });
        }
        let z = position_operator(n_fock, scenario.z0());
        let (ev, w) = linalg::eigh(&z);
        let nodes: Vec<f64> = ev.iter().cloned().collect();
        let kernel = source_kernel(&scenario, &nodes, kick, analytic)?;
        let a = crate::state::annihilation(n_fock);
        let h_osc = a.adjoint() * &a * C64::new(scenario.omega_m, 0.0);
        let hamiltonian = linalg::identity(2).kronecker(&h_osc);
        let big_w = linalg::identity(2).kronecker(&w);
        Ok(Self { scenario, n_fock, w, big_w, nodes, kernel, hamiltonian, atom_dephasing: true })
    }

    /// Switches off the atom's own dephasing (`gamma_m` term).
    pub fn without_atom_dephasing(mut self) -> Self {
        self.atom_dephasing = false;
        self
    }

    pub fn scenario(&self) -> &InterferometerScenario {
        &self.scenario
    }

    pub fn n_fock(&self) -> usize {
        self.n_fock
    }

    pub fn kernel(&self) -> &CMatrix {
        &self.kernel
    }

    /// Eigenvalues of the truncated `z_hat`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `P` from the kernel: `K_{(R,n),(L,n)}` on the diagonal of the `z_hat`
    /// eigenbasis, returned in the Fock basis.
    pub fn calp(&self) -> CMatrix {
        let n = self.n_fock;
        let d = linalg::diag(&(0..n).map(|k| self.kernel[(n + k, k)]).collect::<Vec<_>>());
        &self.w * d * self.w.adjoint()
    }

    fn source_term(&self, rho: &CMatrix) -> CMatrix {
        let r = self.big_w.adjoint() * rho * &self.big_w;
        let k = self.kernel.component_mul(&r);
        (&self.big_w * k * self.big_w.adjoint() - rho) * C64::new(self.scenario.gamma_source(), 0.0)
    }

    fn atom_term(&self, rho: &CMatrix) -> CMatrix {
        let n = self.n_fock;
        let povm = TwoOutcomePovm;
        let mut out = -rho.clone();
        for p in povm.operators() {
            let big = p.kronecker(&linalg::identity(n));
            out += &big * rho * &big * C64::new(TwoOutcomePovm::OUTCOME_MEASURE, 0.0);
        }
        out * C64::new(self.scenario.gamma_atom(), 0.0)
    }

    /// A product initial state `|+><+| (x) rho_T(nbar)`.
    pub fn product_state(&self) -> Result<DensityMatrix> {
        let plus = CMatrix::from_element(2, 2, C64::new(0.5, 0.0));
        let th = thermal_state(self.scenario.nbar, self.n_fock)?;
        Ok(QubitOscillatorState::product(&plus, &th, self.scenario.oscillator(), self.scenario.nbar)?.rho)
    }
}

impl Generator for InterferometerLiouvillian {
    fn basis(&self) -> Basis {
        Basis::QubitFock(self.n_fock)
    }

    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let h_rho = &self.hamiltonian * rho;
        let mut out = (&h_rho - h_rho.adjoint()) * C64::new(0.0, -1.0);
        out += self.source_term(rho);
        if self.atom_dephasing {
            out += self.atom_term(rho);
        }
        out
    }

    fn max_rate(&self) -> f64 {
        let s = &self.scenario;
        let gamma = s.gamma_source() + if self.atom_dephasing { s.gamma_atom() } else { 0.0 };
        gamma.max(s.omega_m * (self.n_fock - 1) as f64)
    }
}

/// `K_{(s,n),(s',n')} = int dz P(z-x_n) P(z-x_n') u_z(s) u_z(s')^*` on the
/// `z_hat` eigenbasis, qubit index major.
fn source_kernel(s: &InterferometerScenario, nodes: &[f64], kick: KickModel, analytic: bool) -> Result<CMatrix> {
    let n = nodes.len();
    let sigma = s.sigma;
    let mut k = CMatrix::zeros(2 * n, 2 * n);
    let branch = [1.0, -1.0];
    if analytic {
        let (c0, c1) = kick.relative_phase_linear(s).ok_or_else(|| {
            Error::InvalidParameter("analytic kernel needs a multipole kick model".into())
        })?;
        for a in 0..n {
            for b in 0..n {
                let overlap = (-(nodes[a] - nodes[b]).powi(2) / (8.0 * sigma * sigma)).exp();
                let mid = 0.5 * (nodes[a] + nodes[b]);
                k[(a, b)] = C64::new(overlap, 0.0);
                k[(n + a, n + b)] = C64::new(overlap, 0.0);
                // (R, L) block: exp(i (c0 + c1 z)) averaged over the product kernel
                let rl = overlap * (-c1 * c1 * sigma * sigma / 2.0).exp();
                k[(n + a, b)] = C64::from_polar(rl, c0 + c1 * mid);
                k[(a, n + b)] = C64::from_polar(rl, -(c0 + c1 * mid));
            }
        }
        return Ok(k);
    }
    let lo = nodes.iter().cloned().fold(f64::INFINITY, f64::min) - QUAD_RANGE_SIGMAS * sigma;
    let hi = nodes.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + QUAD_RANGE_SIGMAS * sigma;
    let dz = QUAD_STEP_SIGMAS * sigma;
    let steps = ((hi - lo) / dz).ceil() as usize;
    for q in 0..=steps {
        let z = lo + q as f64 * dz;
        let amp: Vec<f64> = nodes.iter().map(|x| gaussian_weight(z - x, sigma).sqrt()).collect();
        let u = [
            C64::from_polar(1.0, -kick.phase(s, branch[0], z)?),
            C64::from_polar(1.0, -kick.phase(s, branch[1], z)?),
        ];
        for si in 0..2 {
            for sj in 0..2 {
                let uu = u[si] * u[sj].conj() * dz;
                for a in 0..n {
                    for b in 0..n {
                        k[(si * n + a, sj * n + b)] += uu * (amp[a] * amp[b]);
                    }
                }
            }
        }
    }
    Ok(k)
}

/// Dipole-order coherence for a static source, from an initial value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleCoherence {
    /// c-number source or coherent Newtonian potential: `exp(i G M m l t / d^2)`.
    pub classical: C64,
    /// The channel at first order in `G`: rotation at `2 kappa gamma_M`.
    pub incoherent: C64,
    /// The dipole channel to all orders: `exp(gamma_M (e^{2 i kappa} - 1) t)`.
    pub model: C64,
}

pub fn dipole_coherence(s: &InterferometerScenario, t: f64, initial: C64) -> DipoleCoherence {
    let g = s.gamma_source();
    let k2 = 2.0 * s.kappa();
    let model_rate = C64::new(k2.cos() - 1.0, k2.sin()) * g;
    DipoleCoherence {
        classical: initial * C64::from_polar(1.0, s.fringe_frequency() * t),
        incoherent: initial * C64::from_polar(1.0, k2 * g * t),
        model: initial * (model_rate * t).exp(),
    }
}

/// Rotation frequency of the coherence at first order in `G`, as built from
/// the channel's rate and kick: `gamma_M * 2 kappa`.
pub fn incoherent_phase_rate(s: &InterferometerScenario) -> f64 {
    s.gamma_source() * 2.0 * s.kappa()
}

/// `P = exp(i theta z_hat) exp(-theta^2 sigma^2 / 2)` in the Fock basis.
pub fn calp_operator(s: &InterferometerScenario, n_fock: usize) -> CMatrix {
    let theta = s.theta();
    let damp = (-theta * theta * s.sigma * s.sigma / 2.0).exp();
    let z = position_operator(n_fock, s.z0());
    linalg::hermitian_function(&z, |x| C64::from_polar(damp, theta * x))
}

/// `P` integrated numerically over source outcomes for any kick model.
pub fn calp_quadrature(s: &InterferometerScenario, n_fock: usize, kick: KickModel) -> Result<CMatrix> {
    Ok(InterferometerLiouvillian::new(*s, n_fock, kick, false)?.calp())
}

/// `d<sigma_->/dt = -gamma_m <sigma_-> - gamma_M (<sigma_-> - <P sigma_->)`.
pub fn coherence_ode_rhs(s: &InterferometerScenario, sigma_minus: C64, p_sigma_minus: C64) -> C64 {
    -sigma_minus * s.gamma_atom() - (sigma_minus - p_sigma_minus) * s.gamma_source()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityRate {
    /// `d ln V / dt`.
    pub log_rate: f64,
    /// `dV/dt`.
    pub rate: f64,
    pub revival: bool,
}

/// Visibility change from `<sigma_->` and `<P sigma_->`.
pub fn visibility_derivative(s: &InterferometerScenario, sigma_minus: C64, p_sigma_minus: C64) -> Result<VisibilityRate> {
    let v = sigma_minus.norm();
    if v < 1e-12 {
        return Err(Error::CoherenceVanished(v));
    }
    let ratio = p_sigma_minus / sigma_minus;
    let log_rate = -s.gamma_atom() - s.gamma_source() * (1.0 - ratio.re);
    Ok(VisibilityRate { log_rate, rate: v * log_rate, revival: log_rate > 0.0 })
}

/// Same, evaluated on a qubit (x) Fock state with the analytic `P`.
pub fn visibility_of_state(s: &InterferometerScenario, rho: &DensityMatrix) -> Result<VisibilityRate> {
    let n = rho.dim() / 2;
    let p = calp_operator(s, n);
    let sm = crate::state::fock::sigma_minus(rho);
    let psm = crate::state::fock::sigma_minus_with(rho, &p);
    visibility_derivative(s, sm, psm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostedRatio {
    /// `<P sigma_-> / <sigma_->` for the boosted state.
    pub ratio: f64,
    /// `<sigma_-> = exp(-(4 nbar + 2) |beta|^2) / 2`.
    pub sigma_minus: f64,
}

/// Closed form for the displaced thermal state with `beta_L = beta`:
/// `exp(-theta^2 sigma^2/2 - (nbar + 1/2) theta^2 z0^2 + (4 nbar + 2) theta z0 Im beta)`.
pub fn boosted_ratio_closed_form(s: &InterferometerScenario) -> BoostedRatio {
    let (theta, z0, nbar) = (s.theta(), s.z0(), s.nbar);
    let exponent = -theta * theta * s.sigma * s.sigma / 2.0 - (nbar + 0.5) * (theta * z0).powi(2)
        + (4.0 * nbar + 2.0) * theta * z0 * s.beta.im;
    BoostedRatio {
        ratio: exponent.exp(),
        sigma_minus: 0.5 * (-(4.0 * nbar + 2.0) * s.beta.norm_sqr()).exp(),
    }
}

/// The ratio as printed in the usual derivation, kept for comparison:
/// `exp(-theta^2 sigma^2 - (nbar + 1/2) theta^2 z0^2 - (4 nbar - 2) theta z0 Im beta)`.
pub fn boosted_ratio_quoted(s: &InterferometerScenario) -> f64 {
    let (theta, z0, nbar) = (s.theta(), s.z0(), s.nbar);
    (-(theta * s.sigma).powi(2) - (nbar + 0.5) * (theta * z0).powi(2) - (4.0 * nbar - 2.0) * theta * z0 * s.beta.im).exp()
}

/// The ratio from explicit Fock-space matrices.
pub fn boosted_ratio_brute_force(s: &InterferometerScenario, n_fock: usize) -> Result<f64> {
    let state = QubitOscillatorState::boosted(s.beta, s.nbar, n_fock, s.oscillator())?;
    let p = calp_operator(s, n_fock);
    let sm = state.sigma_minus();
    let psm = crate::state::fock::sigma_minus_with(&state.rho, &p);
    if sm.norm() < 1e-300 {
        return Err(Error::CoherenceVanished(sm.norm()));
    }
    Ok((psm / sm).re)
}

/// Monte-Carlo estimate of `int d^2 alpha P_T(alpha) exp(-2 alpha^* beta + 2 alpha beta^*)`
/// over the thermal Glauber distribution. Returns the mean and its standard error.
pub fn thermal_average_monte_carlo(nbar: f64, beta: C64, samples: usize, seed: u64) -> Result<(C64, f64)> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    if samples < 2 {
        return Err(Error::EmptyEnsemble(samples));
    }
    let scale = (nbar / 2.0).sqrt();
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum_sq) = (C64::new(0.0, 0.0), 0.0);
    for _ in 0..samples {
        let alpha = C64::new(normal.sample(&mut rng), normal.sample(&mut rng)) * scale;
        let value = (alpha * beta.conj() * 2.0 - alpha.conj() * beta * 2.0).exp();
        sum += value;
        sum_sq += value.norm_sqr();
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean.norm_sqr()) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Coherence under three source models for a static, localised source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CowComparison {
    pub classical: C64,
    pub coherent: C64,
    pub incoherent: C64,
}

pub fn classical_cow_comparison(s: &InterferometerScenario, t: f64, initial: C64) -> CowComparison {
    let phase = C64::from_polar(1.0, s.fringe_frequency() * t);
    CowComparison {
        classical: initial * phase,
        coherent: initial * phase,
        incoherent: initial * phase * (-s.gamma_incoh() * t).exp(),
    }
}
