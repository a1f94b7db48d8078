//! Diagnostics: Ehrenfest force, the exact momentum-variance decomposition,
//! coherences and entanglement.

use crate::channel::GridChannel;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::state::{Basis, DensityMatrix, GridSpec, Subsystem};
use crate::C64;

/// `d<p_i>/dt` from the channel, exact and in the unentangled approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EhrenfestForce {
    pub exact: f64,
    pub factorized: f64,
}

/// Terms of `d Var(p_i) / dt` generated by the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingReport {
    /// From measuring particle `i` itself.
    pub backaction: f64,
    /// Second order in the kicks from partner measurements.
    pub shot: f64,
    /// First order in the kicks, after subtracting `2 <p> d<p>/dt`.
    pub cross: f64,
    /// Same shot term with the partner's measured density in place of the
    /// joint distribution.
    pub shot_factorized: f64,
    pub total: f64,
}

fn grids_of(rho: &DensityMatrix, channel: &GridChannel) -> Result<Vec<GridSpec>> {
    match rho.basis() {
        Basis::Grid(g) if g.as_slice() == channel.grids() => Ok(g.clone()),
        other => Err(Error::BasisMismatch(format!("{other:?} does not match the channel grids"))),
    }
}

/// Joint position probabilities `q[a][b]` with `a` on particle 0.
fn joint_diagonal(rho: &DensityMatrix, grids: &[GridSpec]) -> Vec<Vec<f64>> {
    let d = rho.diagonal();
    match grids.len() {
        1 => vec![d],
        _ => d.chunks(grids[1].len()).map(<[f64]>::to_vec).collect(),
    }
}

/// `sum_x dx P_j(x - x_a)^2 g(x - y_b)` for outcome-grid sums.
fn smeared(channel: &GridChannel, j: usize, xa: f64, yb: f64, g: impl Fn(f64) -> f64) -> f64 {
    let povm = channel.povm(j);
    let dx = channel.grids()[j].spacing();
    channel.outcomes(j).iter().map(|&x| povm.weight(x - xa) * g(x - yb)).sum::<f64>() * dx
}

/// Joint expectation over (measured `j`, kicked `i`) positions.
fn pair_average(q: &[Vec<f64>], j: usize, mut f: impl FnMut(usize, usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for (a, row) in q.iter().enumerate() {
        for (b, &p) in row.iter().enumerate() {
            if p != 0.0 {
                // (index on j, index on i)
                acc += p * if j == 0 { f(a, b) } else { f(b, a) };
            }
        }
    }
    acc
}

/// Mean force on each particle. A lone particle feels none.
pub fn ehrenfest_force(rho: &DensityMatrix, channel: &GridChannel) -> Result<Vec<EhrenfestForce>> {
    let grids = grids_of(rho, channel)?;
    if grids.len() == 1 {
        return Ok(vec![EhrenfestForce { exact: 0.0, factorized: 0.0 }]);
    }
    let q = joint_diagonal(rho, &grids);
    let gamma = &channel.couplings().gamma;
    let phi = *channel.potential();
    let mut out = Vec::with_capacity(2);
    for i in 0..2 {
        let j = 1 - i;
        let coupling = gamma[j] * channel.signed_eta(j, i);
        let (xj, xi) = (grids[j].points(), grids[i].points());
        let exact = coupling
            * pair_average(&q, j, |a, b| smeared(channel, j, xj[a], xi[b], |r| phi.gradient(r)));
        let pj = channel.povm(j).outcome_distribution(rho, j)?;
        let (_, cells_i) = crate::povm::PositionMarginal::position_marginal(rho, i)?;
        let factorized = coupling
            * channel
                .outcomes(j)
                .iter()
                .zip(&pj)
                .map(|(&x, &w)| w * xi.iter().zip(&cells_i).map(|(&y, &p)| p * phi.gradient(x - y)).sum::<f64>())
                .sum::<f64>();
        out.push(EhrenfestForce { exact, factorized });
    }
    Ok(out)
}

/// Block `M_{bb'} = rho[(a,b),(a,b')]` of particle `i` with partner `j`
/// fixed at index `a` (diagonal in `j`).
fn conditional_block(rho: &CMatrix, grids: &[GridSpec], j: usize, a: usize) -> CMatrix {
    let n1 = grids[1].len();
    if j == 0 {
        CMatrix::from_fn(n1, n1, |b, c| rho[(a * n1 + b, a * n1 + c)])
    } else {
        CMatrix::from_fn(grids[0].len(), grids[0].len(), |b, c| rho[(b * n1 + a, c * n1 + a)])
    }
}

fn expect(op: &CMatrix, rho: &CMatrix) -> f64 {
    (op * rho).trace().re
}

/// Exact `d Var(p_i)/dt` from the channel, term by term, for each particle.
pub fn momentum_variance_rate(rho: &DensityMatrix, channel: &GridChannel) -> Result<Vec<HeatingReport>> {
    let grids = grids_of(rho, channel)?;
    let n = grids.len();
    let gamma = &channel.couplings().gamma;
    let phi = *channel.potential();
    let q = joint_diagonal(rho, &grids);
    let mut reports = Vec::with_capacity(n);
    for i in 0..n {
        let reduced = match n {
            1 => rho.matrix().clone(),
            _ => rho.partial_trace(if i == 0 { Subsystem::Second } else { Subsystem::First })?.into_matrix(),
        };
        let p = grids[i].momentum_matrix();
        let p2 = &p * &p;
        let povm = channel.povm(i);
        let dx = grids[i].spacing();
        let pts = grids[i].points();
        // sum_x dx <P p^2 P> - <p^2>, with P diagonal
        let mut sandwich = 0.0;
        for &x in &channel.outcomes(i) {
            let k: Vec<f64> = pts.iter().map(|&y| povm.amplitude(x - y)).collect();
            for b in 0..pts.len() {
                for c in 0..pts.len() {
                    sandwich += (k[b] * k[c] * p2[(b, c)] * reduced[(c, b)]).re;
                }
            }
        }
        let backaction = gamma[i] * (sandwich * dx - expect(&p2, &reduced));

        let (mut shot, mut cross, mut shot_factorized) = (0.0, 0.0, 0.0);
        if n == 2 {
            let j = 1 - i;
            let eta = channel.signed_eta(j, i);
            let (xj, xi) = (grids[j].points(), grids[i].points());
            shot = gamma[j]
                * eta
                * eta
                * pair_average(&q, j, |a, b| smeared(channel, j, xj[a], xi[b], |r| phi.gradient(r).powi(2)));

            let mean_p = expect(&p, &reduced);
            let mean_force_part =
                pair_average(&q, j, |a, b| smeared(channel, j, xj[a], xi[b], |r| phi.gradient(r)));
            // <P_j^2 (x) {p_i, F}> via conditional blocks of particle i.
            let mut anti = 0.0;
            for a in 0..xj.len() {
                let m = conditional_block(rho.matrix(), &grids, j, a);
                if m.trace().re.abs() < 1e-300 {
                    continue;
                }
                for b in 0..xi.len() {
                    let mut s = C64::new(0.0, 0.0);
                    for c in 0..xi.len() {
                        s += p[(b, c)] * m[(c, b)] + p[(c, b)] * m[(b, c)];
                    }
                    if s.re != 0.0 {
                        anti += s.re * smeared(channel, j, xj[a], xi[b], |r| phi.gradient(r));
                    }
                }
            }
            cross = gamma[j] * eta * (anti - 2.0 * mean_p * mean_force_part);

            let pj = channel.povm(j).outcome_distribution(rho, j)?;
            let cells_i = reduced.diagonal().map(|z| z.re);
            shot_factorized = gamma[j]
                * eta
                * eta
                * channel
                    .outcomes(j)
                    .iter()
                    .zip(&pj)
                    .map(|(&x, &w)| {
                        w * xi.iter().zip(cells_i.iter()).map(|(&y, &c)| c * phi.gradient(x - y).powi(2)).sum::<f64>()
                    })
                    .sum::<f64>();
        }
        reports.push(HeatingReport { backaction, shot, cross, shot_factorized, total: backaction + shot + cross });
    }
    Ok(reports)
}

/// `v^2 m / 4 sigma^2`, the backaction rate of the Gaussian kernel.
pub fn backaction_rate(channel: &GridChannel, particle: usize) -> f64 {
    let s = channel.params().sigma;
    channel.couplings().gamma[particle] / (4.0 * s * s)
}

/// The matrix element `rho[(a, b)]`.
pub fn coherence(rho: &DensityMatrix, a: usize, b: usize) -> Result<C64> {
    let d = rho.dim();
    if a >= d || b >= d {
        return Err(Error::BadLabel(format!("({a}, {b}) outside a {d}-dimensional basis")));
    }
    Ok(rho.matrix()[(a, b)])
}

/// Coherence between two positions of a single-grid state.
pub fn coherence_at(rho: &DensityMatrix, xa: f64, xb: f64) -> Result<C64> {
    let g = match rho.basis() {
        Basis::Grid(g) if g.len() == 1 => g[0],
        other => return Err(Error::BasisMismatch(format!("{other:?} is not a single grid"))),
    };
    let idx = |x: f64| g.index_of(x).ok_or_else(|| Error::BadLabel(format!("x = {x} is not a grid point")));
    coherence(rho, idx(xa)?, idx(xb)?)
}

/// Largest log-negativity over a series of bipartite states.
pub fn entanglement_monitor<'a>(series: impl IntoIterator<Item = &'a DensityMatrix>) -> Result<f64> {
    let mut max = 0.0f64;
    for rho in series {
        max = max.max(rho.log_negativity()?);
    }
    Ok(max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ModelParams, PotentialFn};
    use crate::linalg;
    use crate::state::WaveFunction;

    fn pair(sep: f64, k: (f64, f64)) -> (GridChannel, DensityMatrix) {
        let g1 = GridSpec::centered(0.0, 0.25, 49).unwrap();
        let g2 = GridSpec::centered(sep, 0.25, 49).unwrap();
        let p = ModelParams::new(0.3, 1.0, 0.7, vec![2.0, 5.0]).unwrap();
        let ch = GridChannel::new(p, vec![g1, g2], PotentialFn::Newtonian).unwrap();
        let a = WaveFunction::gaussian(g1, 0.0, 0.5, k.0).unwrap();
        let b = WaveFunction::gaussian(g2, sep, 0.6, k.1).unwrap();
        let rho = DensityMatrix::from_pure(&WaveFunction::product(&a, &b).unwrap());
        (ch, rho)
    }

    #[test]
    fn lone_particle_feels_no_force() {
        let g = GridSpec::centered(0.0, 0.25, 65).unwrap();
        let p = ModelParams::new(0.3, 1.0, 0.7, vec![2.0]).unwrap();
        let ch = GridChannel::new(p, vec![g], PotentialFn::Newtonian).unwrap();
        let rho = DensityMatrix::from_pure(&WaveFunction::gaussian(g, 0.0, 1.0, 0.0).unwrap());
        let f = ehrenfest_force(&rho, &ch).unwrap();
        assert_eq!(f, vec![EhrenfestForce { exact: 0.0, factorized: 0.0 }]);
    }

    #[test]
    fn distant_packets_attract_newtonially() {
        let (ch, rho) = pair(30.0, (0.0, 0.0));
        let f = ehrenfest_force(&rho, &ch).unwrap();
        let newton = 0.7 * 2.0 * 5.0 / 900.0;
        assert!((f[0].exact - newton).abs() < 0.01 * newton, "{:?}", f[0]);
        assert!((f[1].exact + newton).abs() < 0.01 * newton);
        for fi in &f {
            assert!((fi.exact - fi.factorized).abs() < 1e-8 * newton);
        }
    }

    #[test]
    fn broad_packet_backaction() {
        let g = GridSpec::centered(0.0, 0.25, 161).unwrap();
        let p = ModelParams::new(0.3, 1.0, 0.7, vec![2.0]).unwrap();
        let ch = GridChannel::new(p, vec![g], PotentialFn::Newtonian).unwrap();
        let bound = backaction_rate(&ch, 0);
        for width in [4.0, 0.6] {
            let rho = DensityMatrix::from_pure(&WaveFunction::gaussian(g, 0.0, width, 0.5).unwrap());
            let r = momentum_variance_rate(&rho, &ch).unwrap()[0];
            assert!((r.backaction - bound).abs() < 0.02 * bound, "{r:?}");
            assert!(r.backaction <= bound * (1.0 + 1e-6));
            assert_eq!((r.shot, r.cross), (0.0, 0.0));
        }
    }

    #[test]
    fn cross_term_cancels_on_product_states() {
        let (ch, rho) = pair(16.0, (0.8, -0.4));
        let reports = momentum_variance_rate(&rho, &ch).unwrap();
        for r in &reports {
            assert!(r.backaction > 0.0 && r.shot > 0.0);
            assert!(r.cross.abs() <= 1e-6 * r.total, "{r:?}");
            assert!((r.shot - r.shot_factorized).abs() < 1e-10 * r.shot);
        }
    }

    #[test]
    fn coherence_labels() {
        let g = GridSpec::centered(0.0, 1.0, 4).unwrap();
        let v = linalg::CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let rho = DensityMatrix::from_vector(Basis::Grid(vec![g]), &v.normalize()).unwrap();
        assert!((coherence(&rho, 1, 2).unwrap() - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((coherence_at(&rho, g.point(1), g.point(2)).unwrap().re - 0.5).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(Basis::Grid(vec![g]));
        assert_eq!(coherence(&mixed, 1, 2).unwrap(), C64::new(0.0, 0.0));
        assert!(matches!(coherence(&rho, 1, 4), Err(Error::BadLabel(_))));
        assert!(matches!(coherence_at(&rho, 0.1, 0.5), Err(Error::BadLabel(_))));
    }

    #[test]
    fn bell_state_monitor() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = linalg::CVector::from_vec(vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)]);
        let bell = DensityMatrix::from_vector(Basis::Generic(vec![2, 2]), &v).unwrap();
        let series = vec![bell.clone(); 5];
        assert!((entanglement_monitor(&series).unwrap() - 1.0).abs() < 1e-6);
        assert!(matches!(
            entanglement_monitor(&[DensityMatrix::maximally_mixed(Basis::Qubit)]),
            Err(Error::BasisMismatch(_))
        ));
    }

    #[test]
    fn double_commutator_identity_on_smooth_vectors() {
        // [f, [f, p^2]] = -2 f'^2 on band-limited vectors, f Gaussian.
        let g = GridSpec::centered(0.0, 0.1, 256).unwrap();
        let p = g.momentum_matrix();
        let p2 = &p * &p;
        let f: Vec<f64> = g.points().iter().map(|x| (-x * x / 8.0).exp()).collect();
        let fp: Vec<f64> = g.points().iter().zip(&f).map(|(x, f)| -x / 4.0 * f).collect();
        let fm = linalg::real_diag(&f);
        let lhs = linalg::commutator(&fm, &linalg::commutator(&fm, &p2));
        let rhs = linalg::real_diag(&fp.iter().map(|d| -2.0 * d * d).collect::<Vec<_>>());
        for (x0, k0) in [(0.0, 0.0), (1.5, 2.0), (-2.0, -1.0)] {
            let psi = WaveFunction::gaussian(g, x0, 1.0, k0).unwrap().to_unit_vector();
            let err = (&lhs * &psi - &rhs * &psi).norm();
            assert!(err < 1e-6, "{err}");
        }
    }
}
