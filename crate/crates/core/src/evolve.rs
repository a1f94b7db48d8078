//! Time evolution: RK4 integration of the master equation and quantum-jump
//! trajectories with exact propagation between jumps.

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use rayon::prelude::*;

use crate::channel::{GridChannel, GridHamiltonian};
use crate::error::{require_positive, Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::state::{Basis, DensityMatrix, WaveFunction};
use crate::C64;

/// Largest allowed `dt * max_rate`.
pub const MAX_STEP_RATE: f64 = 0.05;
/// Snapshots with an eigenvalue below this fail with `PositivityLost`.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub t_final: f64,
    pub dt: f64,
    /// Record every this many steps (master) or every `record_every * dt`
    /// time units (trajectories).
    pub record_every: usize,
    pub seed: u64,
    pub trajectories: usize,
}

impl EvolutionConfig {
    pub fn new(t_final: f64, dt: f64, record_every: usize) -> Result<Self> {
        let cfg = Self { t_final, dt, record_every, seed: 0, trajectories: 1 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_trajectories(mut self, n: usize, seed: u64) -> Self {
        self.trajectories = n;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("dt", self.dt)?;
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter(format!("t_final = {}", self.t_final)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn record_times(&self) -> Vec<f64> {
        let n = self.n_steps();
        (0..=n).step_by(self.record_every).map(|k| k as f64 * self.dt).collect()
    }
}

/// A Liouvillian `rho -> d rho / dt` on a fixed basis.
pub trait Generator: Sync {
    fn basis(&self) -> Basis;
    fn rhs(&self, rho: &CMatrix) -> CMatrix;
    /// Fastest rate in the generator; bounds the usable step size.
    fn max_rate(&self) -> f64;
}

/// Grid dynamics: Hamiltonian plus an optional measurement channel.
#[derive(Debug, Clone)]
pub struct GridLiouvillian {
    pub hamiltonian: GridHamiltonian,
    pub channel: Option<GridChannel>,
    spread: f64,
}

impl GridLiouvillian {
    pub fn new(hamiltonian: GridHamiltonian, channel: Option<GridChannel>) -> Result<Self> {
        if let Some(ch) = &channel {
            if ch.grids() != hamiltonian.grids() {
                return Err(Error::BasisMismatch("Hamiltonian and channel grids differ".into()));
            }
        }
        let mut spread = 0.0;
        for i in 0..hamiltonian.grids().len() {
            let ev = linalg::eigvalsh(hamiltonian.local(i));
            spread += ev.max() - ev.min();
        }
        spread += hamiltonian.pair_spread();
        Ok(Self { hamiltonian, channel, spread })
    }
}

impl Generator for GridLiouvillian {
    fn basis(&self) -> Basis {
        Basis::Grid(self.hamiltonian.grids().to_vec())
    }

    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let mut out = self.hamiltonian.commutator_term(rho);
        if let Some(ch) = &self.channel {
            out += ch.dissipator(rho);
        }
        out
    }

    fn max_rate(&self) -> f64 {
        let gamma: f64 = self.channel.as_ref().map_or(0.0, |c| c.couplings().gamma.iter().sum());
        gamma.max(self.spread)
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub state: DensityMatrix,
}

/// Integrates the master equation with fixed-step RK4, calling `observe` at
/// each recorded time (including `t = 0`).
pub fn master_evolve_with(
    rho0: &DensityMatrix,
    generator: &impl Generator,
    cfg: &EvolutionConfig,
    mut observe: impl FnMut(f64, &DensityMatrix) -> Result<()>,
) -> Result<DensityMatrix> {
    cfg.validate()?;
    if rho0.basis() != &generator.basis() {
        return Err(Error::BasisMismatch("initial state and generator bases differ".into()));
    }
    let rate = generator.max_rate();
    if cfg.dt * rate > MAX_STEP_RATE * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt: cfg.dt, rate });
    }
    let basis = rho0.basis().clone();
    let mut rho = rho0.matrix().clone();
    let dt = C64::new(cfg.dt, 0.0);
    let half = C64::new(0.5 * cfg.dt, 0.0);
    let sixth = C64::new(cfg.dt / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);
    let record = |step: usize, rho: &CMatrix, observe: &mut dyn FnMut(f64, &DensityMatrix) -> Result<()>| {
        let t = step as f64 * cfg.dt;
        let state = DensityMatrix::from_matrix_unchecked(basis.clone(), rho.clone())?;
        let lowest = state.min_eigenvalue();
        if lowest < POSITIVITY_FLOOR {
            return Err(Error::PositivityLost { time: t, eigenvalue: lowest });
        }
        observe(t, &state)
    };
    record(0, &rho, &mut observe)?;
    for step in 1..=cfg.n_steps() {
        let k1 = generator.rhs(&rho);
        let k2 = generator.rhs(&(&rho + &k1 * half));
        let k3 = generator.rhs(&(&rho + &k2 * half));
        let k4 = generator.rhs(&(&rho + &k3 * dt));
        rho += (k1 + k2 * two + k3 * two + k4) * sixth;
        rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
        if step % cfg.record_every == 0 {
            record(step, &rho, &mut observe)?;
        }
    }
    DensityMatrix::from_matrix_unchecked(basis, rho)
}

/// [`master_evolve_with`] keeping every recorded state.
pub fn master_evolve(rho0: &DensityMatrix, generator: &impl Generator, cfg: &EvolutionConfig) -> Result<Vec<Snapshot>> {
    let mut out = Vec::new();
    master_evolve_with(rho0, generator, cfg, |time, state| {
        out.push(Snapshot { time, state: state.clone() });
        Ok(())
    })?;
    Ok(out)
}

/// One measurement event on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub particle: usize,
    /// Index of the outcome on the measured particle's grid.
    pub outcome: usize,
}

/// A single trajectory. Replaying `jumps` from the same initial state
/// reproduces it exactly.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub index: usize,
    pub seed: u64,
    pub jumps: Vec<JumpEvent>,
    pub times: Vec<f64>,
    pub observables: Vec<Vec<f64>>,
    pub final_state: WaveFunction,
}

impl TrajectoryRecord {
    /// Time between consecutive jumps (the first measured from `t = 0`).
    pub fn waiting_times(&self) -> Vec<f64> {
        let mut last = 0.0;
        self.jumps
            .iter()
            .map(|j| {
                let w = j.time - last;
                last = j.time;
                w
            })
            .collect()
    }
}

/// Exact `exp(-i H t)` on a wavefunction, factorised per axis when there is
/// no pair potential.
enum Propagator {
    PerAxis(Vec<(Vec<f64>, CMatrix)>, Vec<usize>),
    Full(Vec<f64>, CMatrix),
}

impl Propagator {
    fn new(h: &GridHamiltonian) -> Self {
        if h.has_pair_potential() {
            let (ev, v) = linalg::eigh(&h.dense());
            Propagator::Full(ev.iter().cloned().collect(), v)
        } else {
            let dims = h.grids().iter().map(|g| g.len()).collect();
            let parts = (0..h.grids().len())
                .map(|i| {
                    let (ev, v) = linalg::eigh(h.local(i));
                    (ev.iter().cloned().collect(), v)
                })
                .collect();
            Propagator::PerAxis(parts, dims)
        }
    }

    fn apply(&self, psi: &CVector, t: f64) -> CVector {
        let phase = |e: f64| C64::from_polar(1.0, -e * t);
        match self {
            Propagator::Full(ev, v) => {
                let mut c = v.adjoint() * psi;
                for (ci, e) in c.iter_mut().zip(ev) {
                    *ci *= phase(*e);
                }
                v * c
            }
            Propagator::PerAxis(parts, _) if parts.len() == 1 => {
                let (ev, v) = &parts[0];
                let mut c = v.adjoint() * psi;
                for (ci, e) in c.iter_mut().zip(ev) {
                    *ci *= phase(*e);
                }
                v * c
            }
            Propagator::PerAxis(parts, dims) => {
                let (n1, n2) = (dims[0], dims[1]);
                let ((e1, v1), (e2, v2)) = (&parts[0], &parts[1]);
                let m = CMatrix::from_row_slice(n1, n2, psi.as_slice());
                let mut c = v1.adjoint() * m * v2.conjugate();
                for a in 0..n1 {
                    for b in 0..n2 {
                        c[(a, b)] *= phase(e1[a] + e2[b]);
                    }
                }
                let out = v1 * c * v2.transpose();
                CVector::from_column_slice(out.transpose().as_slice())
            }
        }
    }
}

trait JumpSource {
    /// Next jump strictly after `t`, with the particle measured.
    fn next(&mut self, t: f64) -> Option<(f64, usize)>;
    fn outcome(&mut self, distribution: &[f64]) -> Result<usize>;
}

struct Sampled {
    rng: ChaCha8Rng,
    waiting: Exp<f64>,
    gamma: Vec<f64>,
    total: f64,
}

impl JumpSource for Sampled {
    fn next(&mut self, t: f64) -> Option<(f64, usize)> {
        let when = t + self.waiting.sample(&mut self.rng);
        let mut u = self.rng.random::<f64>() * self.total;
        let mut particle = self.gamma.len() - 1;
        for (i, g) in self.gamma.iter().enumerate() {
            if u < *g {
                particle = i;
                break;
            }
            u -= g;
        }
        Some((when, particle))
    }

    fn outcome(&mut self, distribution: &[f64]) -> Result<usize> {
        let w = WeightedIndex::new(distribution)
            .map_err(|_| Error::ZeroProbability(distribution.iter().sum::<f64>()))?;
        Ok(w.sample(&mut self.rng))
    }
}

struct Replayed<'a> {
    jumps: &'a [JumpEvent],
    next: usize,
}

impl JumpSource for Replayed<'_> {
    fn next(&mut self, _t: f64) -> Option<(f64, usize)> {
        self.jumps.get(self.next).map(|j| (j.time, j.particle))
    }

    fn outcome(&mut self, _distribution: &[f64]) -> Result<usize> {
        let k = self.jumps[self.next].outcome;
        self.next += 1;
        Ok(k)
    }
}

fn run_trajectory(
    psi0: &WaveFunction,
    prop: &Propagator,
    channel: &GridChannel,
    cfg: &EvolutionConfig,
    source: &mut dyn JumpSource,
    observe: &(dyn Fn(&WaveFunction) -> Vec<f64> + Sync),
) -> Result<(Vec<JumpEvent>, Vec<f64>, Vec<Vec<f64>>, WaveFunction)> {
    let grids = psi0.grids().to_vec();
    let times = cfg.record_times();
    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut jumps = Vec::new();
    let mut observables = Vec::with_capacity(times.len());
    let mut pending = source.next(0.0);
    let advance = |psi: &WaveFunction, dt: f64| -> Result<WaveFunction> {
        WaveFunction::new(grids.clone(), prop.apply(psi.amplitudes(), dt))
    };
    for &tr in &times {
        while let Some((tj, particle)) = pending.filter(|(tj, _)| *tj <= tr) {
            psi = advance(&psi, tj - t)?;
            t = tj;
            let dist = channel.povm(particle).outcome_distribution(&psi, particle)?;
            let k = source.outcome(&dist)?;
            let x = channel.grids()[particle].point(k);
            psi = channel.apply_jump(&psi, particle, x)?.0;
            jumps.push(JumpEvent { time: tj, particle, outcome: k });
            pending = source.next(t);
        }
        psi = advance(&psi, tr - t)?;
        t = tr;
        observables.push(observe(&psi));
    }
    Ok((jumps, times, observables, psi))
}

/// Runs `cfg.trajectories` quantum-jump trajectories in parallel. Trajectory
/// `k` uses seed `cfg.seed + k`. `observe` is evaluated at each record time.
pub fn trajectory_evolve(
    psi0: &WaveFunction,
    h: &GridHamiltonian,
    channel: &GridChannel,
    cfg: &EvolutionConfig,
    observe: &(dyn Fn(&WaveFunction) -> Vec<f64> + Sync),
) -> Result<Vec<TrajectoryRecord>> {
    cfg.validate()?;
    if psi0.grids() != channel.grids() || h.grids() != channel.grids() {
        return Err(Error::BasisMismatch("state, Hamiltonian and channel grids differ".into()));
    }
    if cfg.trajectories == 0 {
        return Err(Error::EmptyEnsemble(0));
    }
    let prop = Propagator::new(h);
    let gamma = channel.couplings().gamma.clone();
    let total: f64 = gamma.iter().sum();
    let waiting = Exp::new(total).map_err(|_| Error::NonPositiveInput { name: "total rate", value: total })?;
    (0..cfg.trajectories)
        .into_par_iter()
        .map(|index| {
            let seed = cfg.seed.wrapping_add(index as u64);
            let mut source = Sampled { rng: ChaCha8Rng::seed_from_u64(seed), waiting, gamma: gamma.clone(), total };
            let (jumps, times, observables, final_state) = run_trajectory(psi0, &prop, channel, cfg, &mut source, observe)?;
            Ok(TrajectoryRecord { index, seed, jumps, times, observables, final_state })
        })
        .collect()
}

/// Re-runs a trajectory from its recorded jumps, without randomness.
pub fn replay_trajectory(
    record: &TrajectoryRecord,
    psi0: &WaveFunction,
    h: &GridHamiltonian,
    channel: &GridChannel,
    cfg: &EvolutionConfig,
    observe: &(dyn Fn(&WaveFunction) -> Vec<f64> + Sync),
) -> Result<TrajectoryRecord> {
    let prop = Propagator::new(h);
    let mut source = Replayed { jumps: &record.jumps, next: 0 };
    let (jumps, times, observables, final_state) = run_trajectory(psi0, &prop, channel, cfg, &mut source, observe)?;
    Ok(TrajectoryRecord { index: record.index, seed: record.seed, jumps, times, observables, final_state })
}

/// Ensemble mean and standard error of each recorded observable.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    /// `mean[t][k]` for observable `k` at record time `t`.
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub count: usize,
}

pub fn ensemble_statistics(records: &[TrajectoryRecord]) -> Result<EnsembleStats> {
    let n = records.len();
    if n < 2 {
        return Err(Error::EmptyEnsemble(n));
    }
    let times = records[0].times.clone();
    let n_obs = records[0].observables.first().map_or(0, Vec::len);
    let mut mean = vec![vec![0.0; n_obs]; times.len()];
    let mut std_error = vec![vec![0.0; n_obs]; times.len()];
    for t in 0..times.len() {
        for k in 0..n_obs {
            let xs: Vec<f64> = records.iter().map(|r| r.observables[t][k]).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            mean[t][k] = m;
            std_error[t][k] = (var / n as f64).sqrt();
        }
    }
    Ok(EnsembleStats { times, mean, std_error, count: n })
}

/// Ensemble density matrix `E[|psi><psi|]` from final states.
pub fn ensemble_density(records: &[TrajectoryRecord]) -> Result<DensityMatrix> {
    let n = records.len();
    if n == 0 {
        return Err(Error::EmptyEnsemble(0));
    }
    let grids = records[0].final_state.grids().to_vec();
    let d = records[0].final_state.amplitudes().len();
    let mut m = CMatrix::zeros(d, d);
    for r in records {
        let u = r.final_state.to_unit_vector();
        m += &u * u.adjoint();
    }
    DensityMatrix::from_matrix_unchecked(Basis::Grid(grids), m / C64::new(n as f64, 0.0))
}

/// One-sample Kolmogorov-Smirnov test against an exponential law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_exponential(samples: &[f64], rate: f64) -> Result<KsResult> {
    require_positive("rate", rate)?;
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble(0));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = 1.0 - (-rate * x).exp();
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * statistic;
    Ok(KsResult { statistic, p_value: kolmogorov_q(lambda) })
}

fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ModelParams, PotentialFn};
    use crate::state::GridSpec;

    fn setup() -> (GridSpec, GridHamiltonian, GridChannel) {
        let g = GridSpec::centered(0.0, 0.25, 81).unwrap();
        let p = ModelParams::new(0.5, 1.0, 1.0, vec![2.0]).unwrap();
        let ch = GridChannel::new(p, vec![g], PotentialFn::Newtonian).unwrap();
        let h = GridHamiltonian::free(&[g], &[2.0]).unwrap();
        (g, h, ch)
    }

    fn mean_x(psi: &WaveFunction) -> Vec<f64> {
        let g = psi.grids()[0];
        vec![psi.cell_probabilities().iter().zip(g.points()).map(|(p, x)| p * x).sum()]
    }

    #[test]
    fn coherent_master_matches_exact_propagator() {
        let (g, h, _) = setup();
        let psi = WaveFunction::gaussian(g, 0.5, 1.2, 0.8).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi);
        let gen = GridLiouvillian::new(h.clone(), None).unwrap();
        let dt = 0.04 / gen.max_rate();
        let cfg = EvolutionConfig::new(200.0 * dt, dt, 100).unwrap();
        let snaps = master_evolve(&rho0, &gen, &cfg).unwrap();
        let last = snaps.last().unwrap();
        let u = linalg::unitary_propagator(&h.dense(), last.time);
        let exact = &u * rho0.matrix() * u.adjoint();
        assert_eq!(snaps.len(), 3);
        assert!((last.state.matrix() - exact).norm() < 1e-8);
    }

    #[test]
    fn step_guard() {
        let (g, h, ch) = setup();
        let gen = GridLiouvillian::new(h, Some(ch)).unwrap();
        let rho0 = DensityMatrix::from_pure(&WaveFunction::gaussian(g, 0.0, 1.0, 0.0).unwrap());
        let dt = 0.06 / gen.max_rate();
        let cfg = EvolutionConfig::new(dt * 3.0, dt, 1).unwrap();
        assert!(matches!(master_evolve(&rho0, &gen, &cfg), Err(Error::StepTooLarge { .. })));
    }

    struct Drain;

    impl Generator for Drain {
        fn basis(&self) -> Basis {
            Basis::Qubit
        }
        fn rhs(&self, _rho: &CMatrix) -> CMatrix {
            linalg::real_diag(&[1.0, -1.0])
        }
        fn max_rate(&self) -> f64 {
            1.0
        }
    }

    #[test]
    fn positivity_violation_is_reported() {
        let rho0 = DensityMatrix::maximally_mixed(Basis::Qubit);
        let cfg = EvolutionConfig::new(1.0, 0.01, 5).unwrap();
        match master_evolve(&rho0, &Drain, &cfg) {
            Err(Error::PositivityLost { time, eigenvalue }) => {
                assert!(time > 0.5 && time < 0.6);
                assert!(eigenvalue < POSITIVITY_FLOOR);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn trajectories_are_seeded_and_replayable() {
        let (g, h, ch) = setup();
        let psi = WaveFunction::gaussian(g, 0.0, 1.0, 0.0).unwrap();
        let cfg = EvolutionConfig::new(8.0, 0.5, 2).unwrap().with_trajectories(6, 42);
        let a = trajectory_evolve(&psi, &h, &ch, &cfg, &mean_x).unwrap();
        let b = trajectory_evolve(&psi, &h, &ch, &cfg, &mean_x).unwrap();
        assert!(a.iter().map(|r| r.jumps.len()).sum::<usize>() > 0);
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.jumps, rb.jumps);
            assert_eq!(ra.observables, rb.observables);
            assert_eq!(ra.seed, 42 + ra.index as u64);
            let re = replay_trajectory(ra, &psi, &h, &ch, &cfg, &mean_x).unwrap();
            assert_eq!(re.jumps, ra.jumps);
            assert!((re.final_state.amplitudes() - ra.final_state.amplitudes()).norm() < 1e-12);
        }
        assert_eq!(a[0].times, cfg.record_times());
        assert_eq!(a[0].times.len(), 9);
    }

    #[test]
    fn per_axis_propagation_matches_dense() {
        let g1 = GridSpec::centered(0.0, 0.5, 7).unwrap();
        let g2 = GridSpec::centered(5.0, 0.5, 6).unwrap();
        let h = GridHamiltonian::with_external(&[g1, g2], &[1.0, 0.5], |_, x| 0.05 * x).unwrap();
        let a = WaveFunction::gaussian(g1, 0.2, 0.8, 0.5).unwrap();
        let b = WaveFunction::gaussian(g2, 5.0, 0.7, -0.3).unwrap();
        let psi = WaveFunction::product(&a, &b).unwrap();
        let fast = Propagator::new(&h).apply(psi.amplitudes(), 1.7);
        let dense = linalg::unitary_propagator(&h.dense(), 1.7) * psi.amplitudes();
        assert!((fast - &dense).norm() < 1e-10 * dense.norm());
        let hp = h.clone().with_pair_potential(|r| 0.1 / r.abs()).unwrap();
        let full = Propagator::new(&hp).apply(psi.amplitudes(), 1.7);
        let dense = linalg::unitary_propagator(&hp.dense(), 1.7) * psi.amplitudes();
        assert!((full - &dense).norm() < 1e-10 * dense.norm());
    }

    #[test]
    fn waiting_times_are_exponential() {
        let (g, h, ch) = setup();
        let psi = WaveFunction::gaussian(g, 0.0, 1.0, 0.0).unwrap();
        let cfg = EvolutionConfig::new(20.0, 1.0, 20).unwrap().with_trajectories(50, 7);
        let recs = trajectory_evolve(&psi, &h, &ch, &cfg, &mean_x).unwrap();
        let waits: Vec<f64> = recs.iter().flat_map(|r| r.waiting_times()).collect();
        assert!(waits.len() > 300);
        let ks = ks_exponential(&waits, ch.couplings().gamma[0]).unwrap();
        assert!(ks.p_value > 0.01, "{ks:?}");
        let wrong = ks_exponential(&waits, 2.0 * ch.couplings().gamma[0]).unwrap();
        assert!(wrong.p_value < 1e-6);
    }

    #[test]
    fn statistics_need_two_records() {
        let (g, h, ch) = setup();
        let psi = WaveFunction::gaussian(g, 0.0, 1.0, 0.0).unwrap();
        let cfg = EvolutionConfig::new(1.0, 0.5, 1).unwrap();
        let recs = trajectory_evolve(&psi, &h, &ch, &cfg, &mean_x).unwrap();
        assert!(matches!(ensemble_statistics(&recs), Err(Error::EmptyEnsemble(1))));
        assert!(matches!(ensemble_statistics(&[]), Err(Error::EmptyEnsemble(0))));
    }

    #[test]
    fn kolmogorov_tail() {
        assert!((kolmogorov_q(1.36) - 0.049).abs() < 2e-3);
        assert_eq!(kolmogorov_q(0.0), 1.0);
    }
}
