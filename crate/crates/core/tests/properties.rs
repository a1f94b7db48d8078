use proptest::prelude::*;

use sigrav::bounds::{LogAxis, UnitSystem};
use sigrav::channel::{feedback_unitary, GridChannel, GridHamiltonian, ModelParams, PotentialFn};
use sigrav::evolve::{self, EvolutionConfig, Generator, GridLiouvillian};
use sigrav::linalg::{self, CMatrix};
use sigrav::povm::{GaussianPovm, TwoOutcomePovm};
use sigrav::state::{fock, Basis, DensityMatrix, GridSpec, Subsystem};
use sigrav::C64;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn random_density(basis: Basis, entries: &[(f64, f64)]) -> DensityMatrix {
    let n = basis.dim();
    let a = CMatrix::from_fn(n, n, |i, j| {
        let (re, im) = entries[(i * n + j) % entries.len()];
        C64::new(re + (i as f64 * 0.37 + j as f64).sin(), im)
    });
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_matrix(basis, m / C64::new(tr, 0.0)).unwrap()
}

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 16..64)
}

fn channel(v: f64, sigma: f64, g: f64, masses: Vec<f64>, points: usize) -> GridChannel {
    let n = masses.len();
    let dx = sigma / 4.0;
    let grids: Vec<GridSpec> = (0..n)
        .map(|i| GridSpec::centered(i as f64 * (20.0 * dx + points as f64 * dx), dx, points).unwrap())
        .collect();
    let params = ModelParams::new(v, sigma, g, masses).unwrap();
    GridChannel::new(params, grids, PotentialFn::Softened { length: sigma }).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn dissipator_is_traceless_and_hermitian(
        v in 0.05..1.0f64,
        sigma in 0.1..1.0f64,
        g in 0.1..2.0f64,
        m0 in 0.5..3.0f64,
        m1 in 0.5..3.0f64,
        pair in any::<bool>(),
        e in entries(),
    ) {
        let masses = if pair { vec![m0, m1] } else { vec![m0] };
        let ch = channel(v, sigma, g, masses, if pair { 7 } else { 15 });
        let rho = random_density(ch.basis(), &e);
        let d = ch.dissipator(rho.matrix());
        let scale = ch.couplings().max_rate().max(1e-300);
        prop_assert!(d.trace().norm() <= 1e-12 * scale);
        prop_assert!(linalg::hermiticity_defect(&d) <= 1e-12 * scale);
    }

    #[test]
    fn master_evolution_stays_physical(
        v in 0.1..1.0f64,
        sigma in 0.2..0.6f64,
        m in 0.5..2.0f64,
        e in entries(),
    ) {
        let ch = channel(v, sigma, 1.0, vec![m], 11);
        let h = GridHamiltonian::free(ch.grids(), &[m]).unwrap();
        let gen = GridLiouvillian::new(h, Some(ch)).unwrap();
        let rho0 = random_density(gen.basis(), &e);
        let dt = 0.05 / gen.max_rate();
        let cfg = EvolutionConfig::new(40.0 * dt, dt, 40).unwrap();
        let snaps = evolve::master_evolve(&rho0, &gen, &cfg).unwrap();
        for s in &snaps {
            prop_assert!((s.state.trace().re - 1.0).abs() < 1e-10);
            prop_assert!(s.state.hermiticity_defect() < 1e-10);
            prop_assert!(s.state.min_eigenvalue() > -1e-8);
        }
    }

    #[test]
    fn gaussian_povm_is_subnormalised(
        sigma in 0.05..2.0f64,
        ratio in 4.0..16.0f64,
        points in 5usize..80,
        cells in prop::collection::vec(0.0..1.0f64, 80),
    ) {
        let grid = GridSpec::centered(0.0, sigma / ratio, points).unwrap();
        let povm = GaussianPovm::new(sigma, grid).unwrap();
        let total: f64 = cells[..points].iter().sum();
        prop_assume!(total > 0.0);
        let p: Vec<f64> = cells[..points].iter().map(|c| c / total).collect();
        let dist = povm.distribution_from_cells(&p);
        prop_assert!(dist.iter().all(|&q| q >= 0.0));
        prop_assert!(dist.iter().sum::<f64>() <= 1.0 + 1e-12);
        // the effect operator sum_x dx P(x)^2 is diagonal with entries <= 1
        let dx = grid.spacing();
        for xk in grid.points() {
            let s: f64 = grid.points().iter().map(|&x| povm.weight(x - xk)).sum::<f64>() * dx;
            prop_assert!(s <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn measurement_update_is_a_state(
        sigma in 0.2..1.0f64,
        k in 0usize..15,
        e in entries(),
    ) {
        let grid = GridSpec::centered(0.0, sigma / 4.0, 15).unwrap();
        let povm = GaussianPovm::new(sigma, grid).unwrap();
        let rho = random_density(Basis::Grid(vec![grid]), &e);
        let x = grid.point(k);
        let (post, weight) = povm.apply_to_density(&rho, 0, x).unwrap();
        let p2 = povm.kraus_matrix_at(x).unwrap();
        prop_assert!((weight - rho.expectation(&(&p2 * &p2)).re).abs() < 1e-12 * weight.max(1.0));
        prop_assert!((post.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(post.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn unit_conversions_round_trip(exp in -30.0..30.0f64) {
        let u = UnitSystem::default();
        let x = 10f64.powf(exp);
        let pairs: [(f64, f64); 7] = [
            (u.mass_to_si(u.mass_to_natural(x)), x),
            (u.time_to_si(u.time_to_natural(x)), x),
            (u.length_to_si(u.length_to_natural(x)), x),
            (u.energy_to_si(u.energy_to_natural(x)), x),
            (u.temperature_to_si(u.temperature_to_natural(x)), x),
            (u.rate_to_si(u.rate_to_natural(x)), x),
            (u.power_to_si(u.power_to_natural(x)), x),
        ];
        for (back, orig) in pairs {
            prop_assert!((back - orig).abs() <= 1e-14 * orig);
        }
        // rates and times are reciprocal
        prop_assert!((u.rate_to_natural(x) * u.time_to_natural(1.0 / x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn displacement_is_unitary(re in -1.5..1.5f64, im in -1.5..1.5f64) {
        let n = 40;
        let d = fock::displacement_operator(C64::new(re, im), n).unwrap();
        prop_assert!((d.adjoint() * &d - CMatrix::identity(n, n)).norm() < 1e-9);
    }

    #[test]
    fn partial_trace_recovers_factors(e in entries(), f in entries()) {
        let g = GridSpec::centered(0.0, 0.1, 4).unwrap();
        let h = GridSpec::centered(5.0, 0.1, 3).unwrap();
        let a = random_density(Basis::Grid(vec![g]), &e);
        let b = random_density(Basis::Grid(vec![h]), &f);
        let ab = a.tensor(&b);
        let ra = ab.partial_trace(Subsystem::Second).unwrap();
        let rb = ab.partial_trace(Subsystem::First).unwrap();
        prop_assert!((ra.matrix() - a.matrix()).norm() < 1e-12);
        prop_assert!((rb.matrix() - b.matrix()).norm() < 1e-12);
        prop_assert!(ab.log_negativity().unwrap() < 1e-10);
    }

    #[test]
    fn feedback_is_a_phase(eta in -5.0..5.0f64, length in 0.05..1.0f64, outcome in -2.0..2.0f64) {
        let grid = GridSpec::centered(3.0, 0.05, 21).unwrap();
        let u = feedback_unitary(eta, &PotentialFn::Softened { length }, &grid, outcome).unwrap();
        prop_assert!(u.iter().all(|z| (z.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn log_axis_spans_its_range(lo in -30.0..0.0f64, span in 0.1..20.0f64, points in 2usize..200) {
        let (min, max) = (10f64.powf(lo), 10f64.powf(lo + span));
        let vals = LogAxis::new(min, max, points).unwrap().values();
        prop_assert_eq!(vals.len(), points);
        prop_assert!((vals[0] / min - 1.0).abs() < 1e-12);
        prop_assert!((vals[points - 1] / max - 1.0).abs() < 1e-12);
        prop_assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn two_outcome_completeness_is_identity() {
    let c = TwoOutcomePovm.completeness();
    assert!((c - CMatrix::identity(2, 2)).norm() < 1e-15);
}
