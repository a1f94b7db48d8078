//! The measurement-and-feedback channel: feedback phases, jump operators, the
//! Lindblad generator on position grids, and coupling calibration.
//!
//! Sign convention: the realised two-body potential is `V = -G m_i m_j phi(r)`
//! (attractive), so the feedback phase applied to the target is
//! `exp(-i eta_signed phi)` with `eta_signed = -eta`.

use crate::error::{require_positive, Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::povm::GaussianPovm;
use crate::state::{Basis, DensityMatrix, GridSpec, WaveFunction};
use crate::C64;

/// The model's free parameters plus the particle masses.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub v: f64,
    pub sigma: f64,
    pub g_newton: f64,
    pub masses: Vec<f64>,
}

impl ModelParams {
    pub fn new(v: f64, sigma: f64, g_newton: f64, masses: Vec<f64>) -> Result<Self> {
        require_positive("v", v)?;
        require_positive("sigma", sigma)?;
        if !(g_newton >= 0.0) {
            return Err(Error::InvalidParameter(format!("G_N = {g_newton} must be >= 0")));
        }
        for &m in &masses {
            require_positive("mass", m)?;
        }
        Ok(Self { v, sigma, g_newton, masses })
    }

    pub fn couplings(&self) -> Couplings {
        Couplings::calibrate(self)
    }
}

/// Measurement rates `gamma_i = v^2 m_i` and kick strengths.
///
/// `eta[source][target] = G m_target / v^2` is the strength of the kick given
/// to `target` when `source` is measured, so that
/// `eta[j][i] * gamma[j] = G m_i m_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    pub gamma: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
}

impl Couplings {
    pub fn calibrate(p: &ModelParams) -> Self {
        let v2 = p.v * p.v;
        let gamma = p.masses.iter().map(|m| v2 * m).collect();
        let eta = p
            .masses
            .iter()
            .map(|_| p.masses.iter().map(|mt| p.g_newton * mt / v2).collect())
            .collect();
        Self { gamma, eta }
    }

    /// Physical coupling recovered from the stored factors: `eta[j][i] gamma[j]`.
    pub fn alpha(&self, i: usize, j: usize) -> f64 {
        self.eta[j][i] * self.gamma[j]
    }

    pub fn max_rate(&self) -> f64 {
        self.gamma.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MultipoleOrder {
    Monopole,
    Dipole,
    Quadrupole,
}

/// Potential shape `phi(r)` entering the feedback phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialFn {
    /// `1 / |r|`
    Newtonian,
    /// `1 / sqrt(r^2 + length^2)`
    Softened { length: f64 },
    /// Taylor expansion of `1/|r|` about `r = separation` (`separation > 0`),
    /// truncated at `order`.
    Multipole { separation: f64, order: MultipoleOrder },
}

impl PotentialFn {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            PotentialFn::Newtonian => 1.0 / r.abs(),
            PotentialFn::Softened { length } => 1.0 / (r * r + length * length).sqrt(),
            PotentialFn::Multipole { separation: d, order } => {
                let u = (r - d) / d;
                let mut s = 1.0;
                if order >= MultipoleOrder::Dipole {
                    s -= u;
                }
                if order >= MultipoleOrder::Quadrupole {
                    s += u * u;
                }
                s / d
            }
        }
    }

    /// `d phi / d r`.
    pub fn gradient(&self, r: f64) -> f64 {
        match *self {
            PotentialFn::Newtonian => -r.signum() / (r * r),
            PotentialFn::Softened { length } => -r / (r * r + length * length).powf(1.5),
            PotentialFn::Multipole { separation: d, order } => {
                let u = (r - d) / d;
                let mut g = 0.0;
                if order >= MultipoleOrder::Dipole {
                    g -= 1.0;
                }
                if order >= MultipoleOrder::Quadrupole {
                    g += 2.0 * u;
                }
                g / (d * d)
            }
        }
    }

    pub fn is_singular(&self) -> bool {
        matches!(self, PotentialFn::Newtonian)
    }
}

/// Multipole truncation of the Newtonian shape about separation `d`.
pub fn multipole_expand(d: f64, order: MultipoleOrder) -> Result<PotentialFn> {
    require_positive("separation", d)?;
    Ok(PotentialFn::Multipole { separation: d, order })
}

/// Diagonal of `U = exp(-i eta phi(x - x_hat))` on the target grid.
/// Fails for the bare Newtonian shape closer than one grid spacing.
pub fn feedback_unitary(eta: f64, phi: &PotentialFn, target: &GridSpec, outcome: f64) -> Result<Vec<C64>> {
    let dx = target.spacing();
    target
        .points()
        .iter()
        .map(|&xt| {
            let r = outcome - xt;
            if phi.is_singular() && r.abs() < dx {
                Err(Error::SingularPotential(r))
            } else {
                Ok(C64::from_polar(1.0, -eta * phi.eval(r)))
            }
        })
        .collect()
}

/// A jump operator `E_i(x) = P_i(x) (x) U_ij(x - x_hat_j)`, stored by its
/// single-particle diagonal factors (it is diagonal in position).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub factors: Vec<Vec<C64>>,
}

impl JumpOperator {
    /// Diagonal on the full product space (particle 1 index major).
    pub fn diagonal(&self) -> CVector {
        let mut v = CVector::from_element(1, C64::new(1.0, 0.0));
        for f in &self.factors {
            v = v.kronecker(&CVector::from_column_slice(f));
        }
        v
    }

    pub fn matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&self.diagonal())
    }
}

/// Measurement-and-feedback channel on one or two position grids.
#[derive(Debug, Clone)]
pub struct GridChannel {
    params: ModelParams,
    couplings: Couplings,
    grids: Vec<GridSpec>,
    povms: Vec<GaussianPovm>,
    potential: PotentialFn,
    /// `K_i = sum_x dx E_i(x)_k E_i(x)_l^*`, one per measured particle.
    kernels: Vec<CMatrix>,
    /// `sum_i gamma_i (K_i,kl - (K_i,kk + K_i,ll) / 2)`: the dissipator acts
    /// elementwise with this matrix.
    generator: CMatrix,
}

impl GridChannel {
    /// Builds the channel. One mass per grid. The bare Newtonian shape is only
    /// accepted when every outcome/target pair is at least ten spacings apart.
    pub fn new(params: ModelParams, grids: Vec<GridSpec>, potential: PotentialFn) -> Result<Self> {
        if grids.is_empty() || grids.len() > 2 {
            return Err(Error::BasisMismatch("grid channels support one or two particles".into()));
        }
        if params.masses.len() != grids.len() {
            return Err(Error::BasisMismatch(format!(
                "{} masses for {} grids",
                params.masses.len(),
                grids.len()
            )));
        }
        let povms = grids
            .iter()
            .map(|g| GaussianPovm::new(params.sigma, *g))
            .collect::<Result<Vec<_>>>()?;
        if potential.is_singular() && grids.len() == 2 {
            let closest = closest_approach(&grids[0], &grids[1]);
            let dx = grids[0].spacing().max(grids[1].spacing());
            if closest < 10.0 * dx {
                return Err(Error::SingularPotential(closest));
            }
        }
        let couplings = params.couplings();
        let mut ch = Self {
            params,
            couplings,
            grids,
            povms,
            potential,
            kernels: Vec::new(),
            generator: CMatrix::zeros(0, 0),
        };
        ch.kernels = (0..ch.grids.len()).map(|i| ch.build_kernel(i)).collect::<Result<_>>()?;
        let dim = ch.dim();
        let mut generator = CMatrix::zeros(dim, dim);
        for (k, &g) in ch.kernels.iter().zip(&ch.couplings.gamma) {
            for c in 0..dim {
                for r in 0..dim {
                    let norm = 0.5 * (k[(r, r)].re + k[(c, c)].re);
                    generator[(r, c)] += (k[(r, c)] - norm) * g;
                }
            }
        }
        ch.generator = generator;
        Ok(ch)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn grids(&self) -> &[GridSpec] {
        &self.grids
    }

    pub fn povm(&self, particle: usize) -> &GaussianPovm {
        &self.povms[particle]
    }

    pub fn potential(&self) -> &PotentialFn {
        &self.potential
    }

    pub fn basis(&self) -> Basis {
        Basis::Grid(self.grids.clone())
    }

    pub fn dim(&self) -> usize {
        self.grids.iter().map(GridSpec::len).product()
    }

    /// Signed kick strength on `target` when `source` is measured.
    pub fn signed_eta(&self, source: usize, target: usize) -> f64 {
        -self.couplings.eta[source][target]
    }

    /// Outcomes available when measuring `particle`.
    pub fn outcomes(&self, particle: usize) -> Vec<f64> {
        self.grids[particle].points()
    }

    /// `E_i(x)` for an outcome on the measured particle's grid.
    pub fn jump_operator(&self, particle: usize, x: f64) -> Result<JumpOperator> {
        let mut factors = Vec::with_capacity(self.grids.len());
        for (j, g) in self.grids.iter().enumerate() {
            if j == particle {
                let k = self.povms[j].kraus_at(x)?;
                factors.push(k.into_iter().map(|a| C64::new(a, 0.0)).collect());
            } else {
                factors.push(feedback_unitary(self.signed_eta(particle, j), &self.potential, g, x)?);
            }
        }
        Ok(JumpOperator { factors })
    }

    /// Applies outcome `x` on `particle` (POVM element plus feedback kick) to a
    /// wavefunction. Returns the renormalised state and the outcome density.
    pub fn apply_jump(&self, psi: &WaveFunction, particle: usize, x: f64) -> Result<(WaveFunction, f64)> {
        if psi.grids() != self.grids.as_slice() {
            return Err(Error::BasisMismatch("wavefunction grids differ from the channel".into()));
        }
        let e = self.jump_operator(particle, x)?.diagonal();
        let out = psi.amplitudes().component_mul(&e);
        let weight = out.norm_squared() * psi.cell_volume();
        if weight < 1e-14 {
            return Err(Error::ZeroProbability(weight));
        }
        Ok((WaveFunction::new(self.grids.clone(), out)?.normalize()?, weight))
    }

    fn build_kernel(&self, particle: usize) -> Result<CMatrix> {
        let dim = self.dim();
        let dx = self.grids[particle].spacing();
        let mut k = CMatrix::zeros(dim, dim);
        for x in self.outcomes(particle) {
            let e = self.jump_operator(particle, x)?.diagonal();
            for c in 0..dim {
                let ec = e[c].conj() * dx;
                for r in 0..dim {
                    k[(r, c)] += e[r] * ec;
                }
            }
        }
        Ok(k)
    }

    pub fn kernel(&self, particle: usize) -> &CMatrix {
        &self.kernels[particle]
    }

    /// Dissipator `sum_i gamma_i (K_i o rho - {N_i, rho}/2)` with the diagonal
    /// `N_i = sum_x dx E_i^dagger E_i`, which is the identity away from the
    /// grid edges.
    pub fn dissipator(&self, rho: &CMatrix) -> CMatrix {
        self.generator.component_mul(rho)
    }

    /// The dissipator summed term by term over outcomes (slow; for checks).
    pub fn dissipator_explicit(&self, rho: &CMatrix) -> Result<CMatrix> {
        let n = rho.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (i, &g) in self.couplings.gamma.iter().enumerate() {
            let dx = self.grids[i].spacing();
            for x in self.outcomes(i) {
                let e = self.jump_operator(i, x)?.diagonal();
                for c in 0..n {
                    for r in 0..n {
                        let jump = e[r] * rho[(r, c)] * e[c].conj();
                        let anti = 0.5 * (e[r].norm_sqr() + e[c].norm_sqr()) * rho[(r, c)];
                        out[(r, c)] += (jump - anti) * (g * dx);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest defect of `sum_x dx E_i^dagger E_i = 1` over the interior of
    /// the measured grid.
    pub fn completeness_defect(&self) -> f64 {
        self.povms.iter().map(GaussianPovm::completeness_defect).fold(0.0, f64::max)
    }
}

fn closest_approach(a: &GridSpec, b: &GridSpec) -> f64 {
    if a.x_max() < b.x_min() {
        b.x_min() - a.x_max()
    } else if b.x_max() < a.x_min() {
        a.x_min() - b.x_max()
    } else {
        0.0
    }
}

/// Hamiltonian on one or two grids: per-particle `p^2/2m + V_ext(x)` and an
/// optional coherent pair potential (used only for comparison runs).
#[derive(Debug, Clone)]
pub struct GridHamiltonian {
    grids: Vec<GridSpec>,
    local: Vec<CMatrix>,
    pair: Option<Vec<f64>>,
}

impl GridHamiltonian {
    /// Free particles (no external potential).
    pub fn free(grids: &[GridSpec], masses: &[f64]) -> Result<Self> {
        Self::with_external(grids, masses, |_, _| 0.0)
    }

    /// Zero Hamiltonian.
    pub fn zero(grids: &[GridSpec]) -> Self {
        let local = grids.iter().map(|g| CMatrix::zeros(g.len(), g.len())).collect();
        Self { grids: grids.to_vec(), local, pair: None }
    }

    /// `sum_i p_i^2 / 2 m_i + V_ext(i, x_i)`.
    pub fn with_external(grids: &[GridSpec], masses: &[f64], v_ext: impl Fn(usize, f64) -> f64) -> Result<Self> {
        if grids.len() != masses.len() {
            return Err(Error::BasisMismatch("one mass per grid".into()));
        }
        let local = grids
            .iter()
            .zip(masses)
            .enumerate()
            .map(|(i, (g, &m))| {
                let mut h = g.kinetic_matrix(m);
                for (k, x) in g.points().iter().enumerate() {
                    h[(k, k)] += C64::new(v_ext(i, *x), 0.0);
                }
                h
            })
            .collect();
        Ok(Self { grids: grids.to_vec(), local, pair: None })
    }

    /// Adds a coherent two-body term `V(x_1 - x_2)` (entangling).
    pub fn with_pair_potential(mut self, v: impl Fn(f64) -> f64) -> Result<Self> {
        if self.grids.len() != 2 {
            return Err(Error::BasisMismatch("pair potential needs two grids".into()));
        }
        let (p1, p2) = (self.grids[0].points(), self.grids[1].points());
        let v = &v;
        let diag = p1.iter().flat_map(|a| p2.iter().map(move |b| v(a - b))).collect();
        self.pair = Some(diag);
        Ok(self)
    }

    pub fn local(&self, particle: usize) -> &CMatrix {
        &self.local[particle]
    }

    pub fn grids(&self) -> &[GridSpec] {
        &self.grids
    }

    /// Spread (max - min) of the pair potential, zero without one.
    pub fn pair_spread(&self) -> f64 {
        self.pair.as_ref().map_or(0.0, |v| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        })
    }

    pub fn has_pair_potential(&self) -> bool {
        self.pair.is_some()
    }

    /// `H rho` without materialising `H` on the product space.
    pub fn apply_left(&self, rho: &CMatrix) -> CMatrix {
        match self.grids.len() {
            1 => &self.local[0] * rho,
            _ => {
                let (n1, n2) = (self.grids[0].len(), self.grids[1].len());
                let cols = rho.ncols();
                let mut out = CMatrix::zeros(n1 * n2, cols);
                let (h1, h2) = (&self.local[0], &self.local[1]);
                for c in 0..cols {
                    for a in 0..n1 {
                        for b in 0..n2 {
                            let mut acc = C64::new(0.0, 0.0);
                            for a2 in 0..n1 {
                                acc += h1[(a, a2)] * rho[(a2 * n2 + b, c)];
                            }
                            for b2 in 0..n2 {
                                acc += h2[(b, b2)] * rho[(a * n2 + b2, c)];
                            }
                            out[(a * n2 + b, c)] = acc;
                        }
                    }
                }
                if let Some(v) = &self.pair {
                    for c in 0..cols {
                        for r in 0..n1 * n2 {
                            out[(r, c)] += rho[(r, c)] * v[r];
                        }
                    }
                }
                out
            }
        }
    }

    /// `-i [H, rho]` for Hermitian `rho`.
    pub fn commutator_term(&self, rho: &CMatrix) -> CMatrix {
        let h_rho = self.apply_left(rho);
        (&h_rho - h_rho.adjoint()) * C64::new(0.0, -1.0)
    }

    /// Dense matrix on the full space (small systems and tests only).
    pub fn dense(&self) -> CMatrix {
        let d: usize = self.grids.iter().map(GridSpec::len).product();
        self.apply_left(&CMatrix::identity(d, d))
    }
}

/// `d rho / dt = -i[H, rho] + dissipator(rho)`.
pub fn lindblad_rhs(rho: &DensityMatrix, h: &GridHamiltonian, channel: &GridChannel) -> Result<DensityMatrix> {
    if rho.basis() != &channel.basis() || h.grids() != channel.grids() {
        return Err(Error::BasisMismatch("state, Hamiltonian and channel grids differ".into()));
    }
    let m = h.commutator_term(rho.matrix()) + channel.dissipator(rho.matrix());
    DensityMatrix::from_matrix_unchecked(rho.basis().clone(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    fn one_particle(sigma: f64) -> GridChannel {
        let g = GridSpec::centered(0.0, sigma / 4.0, 121).unwrap();
        let p = ModelParams::new(0.5, sigma, 1.0, vec![2.0]).unwrap();
        GridChannel::new(p, vec![g], PotentialFn::Softened { length: sigma }).unwrap()
    }

    fn two_particle() -> GridChannel {
        let g1 = GridSpec::centered(0.0, 0.0125, 41).unwrap();
        let g2 = GridSpec::centered(1.0, 0.0125, 39).unwrap();
        let p = ModelParams::new(0.7, 0.05, 0.8, vec![1.0, 3.0]).unwrap();
        GridChannel::new(p, vec![g1, g2], PotentialFn::Softened { length: 0.05 }).unwrap()
    }

    #[test]
    fn alpha_recovery() {
        for &(v, m1, m2) in &[(1e-3, 1.0, 5.0), (0.3, 2e3, 1e-2), (7.0, 1.0, 1.0)] {
            let c = ModelParams::new(v, 1.0, 0.37, vec![m1, m2]).unwrap().couplings();
            for (i, j) in [(0, 1), (1, 0)] {
                let m = [m1, m2];
                let expect = 0.37 * m[i] * m[j];
                assert!((c.alpha(i, j) - expect).abs() <= 1e-12 * expect);
            }
        }
    }

    #[test]
    fn feedback_unitary_is_pure_phase() {
        let g = GridSpec::centered(0.0, 0.1, 51).unwrap();
        let ident = feedback_unitary(0.0, &PotentialFn::Newtonian, &g, 10.0).unwrap();
        assert!(ident.iter().all(|u| (u - C64::new(1.0, 0.0)).norm() < 1e-15));
        let u = feedback_unitary(3.7, &PotentialFn::Softened { length: 0.3 }, &g, 0.0).unwrap();
        assert!(u.iter().all(|u| (u.norm() - 1.0).abs() < 1e-12));
        assert!(matches!(
            feedback_unitary(1.0, &PotentialFn::Newtonian, &g, 0.0),
            Err(Error::SingularPotential(_))
        ));
    }

    #[test]
    fn quadrupole_phase_on_qubit_positions() {
        // Atom branches at d + s l/2 about a source displaced by z; the cross
        // term of the quadrupole shape gives exp(-i theta z sigma_z) with
        // theta = G m l / v^2 d^3 (per branch).
        let (d, l, z) = (10.0, 0.2, 0.05);
        let phi = multipole_expand(d, MultipoleOrder::Quadrupole).unwrap();
        let cross = |s: f64| phi.eval(d + s * l / 2.0 - z) - phi.eval(d + s * l / 2.0) - phi.eval(d - z) + phi.eval(d);
        let expected = |s: f64| -2.0 * s * l / 2.0 * z / d.powi(3);
        for s in [1.0, -1.0] {
            assert!((cross(s) - expected(s)).abs() < 1e-15);
        }
    }

    #[test]
    fn multipole_truncations() {
        let d = 3.0;
        let mono = multipole_expand(d, MultipoleOrder::Monopole).unwrap();
        assert_eq!(mono.eval(d), 1.0 / d);
        let quad = multipole_expand(d, MultipoleOrder::Quadrupole).unwrap();
        let dip = multipole_expand(d, MultipoleOrder::Dipole).unwrap();
        assert_eq!(quad.eval(d), 1.0 / d);
        for u in [d / 100.0, -d / 100.0] {
            let exact = 1.0 / (d + u);
            let rel = (quad.eval(d + u) - exact).abs() / exact;
            assert!(rel <= 3.0 * (u / d).abs().powi(3), "{rel}");
            assert!((dip.eval(d + u) - (1.0 / d - u / (d * d))).abs() < 1e-15);
        }
        // gradient by finite differences
        for p in [quad, dip, PotentialFn::Softened { length: 0.4 }, PotentialFn::Newtonian] {
            let r = 2.7;
            let h = 1e-6;
            let fd = (p.eval(r + h) - p.eval(r - h)) / (2.0 * h);
            assert!((fd - p.gradient(r)).abs() < 1e-7);
        }
    }

    #[test]
    fn softened_matches_newtonian_far_away() {
        let s = PotentialFn::Softened { length: 1.0 };
        for r in [10.0, 15.0, -40.0] {
            let n = PotentialFn::Newtonian.eval(r);
            assert!((s.eval(r) - n).abs() / n < 0.01);
        }
        assert_eq!(s.eval(0.0), 1.0);
    }

    #[test]
    fn single_particle_jump_is_the_povm() {
        let ch = one_particle(1.0);
        let x = ch.outcomes(0)[60];
        let e = ch.jump_operator(0, x).unwrap();
        let k = ch.povm(0).kraus_at(x).unwrap();
        assert_eq!(e.factors.len(), 1);
        for (a, b) in e.diagonal().iter().zip(&k) {
            assert!((a.re - b).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn jump_operator_norm_is_local() {
        let ch = two_particle();
        let x = ch.outcomes(0)[6];
        let e = ch.jump_operator(0, x).unwrap();
        assert_eq!(e.factors.len(), 2);
        let ee = e.diagonal().map(|z| z.norm_sqr());
        let p = ch.povm(0).kraus_at(x).unwrap();
        for (k, w) in ee.iter().enumerate() {
            assert!((w - p[k / 39].powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_state_is_a_fixed_point() {
        let ch = one_particle(1.0);
        let rho = DensityMatrix::maximally_mixed(ch.basis());
        assert!(ch.dissipator(rho.matrix()).norm() < 1e-15);
        // Kernel diagonal against direct summation of P^2, and completeness
        // away from the edges.
        let g = ch.grids()[0];
        let dx = g.spacing();
        for (k, xk) in g.points().iter().enumerate() {
            let s: f64 = g.points().iter().map(|&x| ch.povm(0).weight(x - xk)).sum::<f64>() * dx;
            assert!((ch.kernel(0)[(k, k)].re - s).abs() < 1e-14);
            if xk - g.x_min() >= 6.0 && g.x_max() - xk >= 6.0 {
                assert!((s - 1.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn two_site_coherence_rate() {
        let sigma = 1.0;
        let ch = one_particle(sigma);
        let g = ch.grids()[0];
        let gamma = ch.couplings().gamma[0];
        for sep in [2usize, 4, 8, 20] {
            let (a, b) = (60 - sep / 2, 60 + sep / 2);
            let dx = sep as f64 * g.spacing();
            let expected = gamma * ((-dx * dx / (8.0 * sigma * sigma)).exp() - 1.0);
            let mut rho = CMatrix::zeros(g.len(), g.len());
            rho[(a, b)] = C64::new(1.0, 0.0);
            let d = ch.dissipator(&rho);
            assert!((d[(a, b)].re - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn implicit_and_explicit_dissipators_agree() {
        let ch = two_particle();
        let g = ch.grids();
        let a = WaveFunction::gaussian(g[0], 0.005, 0.012, 3.0).unwrap();
        let b = WaveFunction::gaussian(g[1], 0.995, 0.01, -2.0).unwrap();
        let rho = DensityMatrix::from_pure(&WaveFunction::product(&a, &b).unwrap());
        let fast = ch.dissipator(rho.matrix());
        let slow = ch.dissipator_explicit(rho.matrix()).unwrap();
        let scale = ch.couplings().max_rate();
        assert!((&fast - &slow).norm() < 1e-12 * scale);
        assert!(fast.trace().norm() < 1e-12 * scale);
        assert!(linalg::hermiticity_defect(&fast) < 1e-12);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let sigma = 1.0;
        let g = GridSpec::centered(0.0, 0.25, 129).unwrap();
        let p = ModelParams::new(0.5, sigma, 1.0, vec![2.0]).unwrap();
        let ch = GridChannel::new(p, vec![g], PotentialFn::Newtonian).unwrap();
        let h = GridHamiltonian::free(&[g], &[2.0]).unwrap();
        let psi = WaveFunction::gaussian(g, 0.0, 1.5, 0.4).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let d = lindblad_rhs(&rho, &h, &ch).unwrap();
        assert!(d.trace().norm() < 1e-8);
        assert!(d.hermiticity_defect() < 1e-10);
    }

    #[test]
    fn newtonian_guard_on_overlapping_grids() {
        let g = GridSpec::centered(0.0, 0.25, 9).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.0, vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            GridChannel::new(p, vec![g, g], PotentialFn::Newtonian),
            Err(Error::SingularPotential(_))
        ));
    }

    #[test]
    fn two_body_hamiltonian_matches_dense_kron() {
        let g1 = GridSpec::centered(0.0, 0.5, 5).unwrap();
        let g2 = GridSpec::centered(3.0, 0.5, 4).unwrap();
        let h = GridHamiltonian::with_external(&[g1, g2], &[1.0, 2.0], |i, x| 0.1 * (i as f64 + 1.0) * x * x)
            .unwrap()
            .with_pair_potential(|r| -1.0 / r.abs())
            .unwrap();
        let dense = h.dense();
        let expect = h.local(0).kronecker(&CMatrix::identity(4, 4)) + CMatrix::identity(5, 5).kronecker(h.local(1));
        let diff = &dense - &expect;
        // the remaining difference is the diagonal pair term
        for r in 0..20 {
            for c in 0..20 {
                if r != c {
                    assert!(diff[(r, c)].norm() < 1e-12);
                }
            }
        }
        assert!(linalg::hermiticity_defect(&dense) < 1e-12);
    }
}
