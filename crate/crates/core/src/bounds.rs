//! Parameter-space constraints on `(v, sigma)` and the exclusion map.
//!
//! Formulas are written in natural units (`hbar = c = k_B = 1`, lengths in
//! metres, so masses, energies and rates are inverse metres). [`UnitSystem`]
//! converts to and from SI.

use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use crate::channel::PotentialFn;
use crate::error::{require_positive, Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const C_LIGHT: f64 = 299_792_458.0;
pub const K_BOLTZMANN: f64 = 1.380_649e-23;
pub const G_NEWTON_SI: f64 = 6.674_30e-11;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
pub const ELECTRON_VOLT: f64 = 1.602_176_634e-19;

/// Short-range tests of the inverse-square law.
pub const SHORT_RANGE_LIMIT_M: f64 = 100e-6;

/// The benchmark file shipped with the crate.
pub const DEFAULT_BENCHMARKS: &str = include_str!("../data/benchmarks.toml");

/// Conversion between SI and natural units with lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub c: f64,
    pub k_b: f64,
    pub g_newton: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self { hbar: HBAR, c: C_LIGHT, k_b: K_BOLTZMANN, g_newton: G_NEWTON_SI }
    }
}

impl UnitSystem {
    /// kg -> 1/m
    pub fn mass_to_natural(&self, kg: f64) -> f64 {
        kg * self.c / self.hbar
    }
    pub fn mass_to_si(&self, m: f64) -> f64 {
        m * self.hbar / self.c
    }
    /// s -> m
    pub fn time_to_natural(&self, s: f64) -> f64 {
        s * self.c
    }
    pub fn time_to_si(&self, t: f64) -> f64 {
        t / self.c
    }
    /// Lengths are already in metres.
    pub fn length_to_natural(&self, m: f64) -> f64 {
        m
    }
    pub fn length_to_si(&self, l: f64) -> f64 {
        l
    }
    /// J -> 1/m
    pub fn energy_to_natural(&self, joule: f64) -> f64 {
        joule / (self.hbar * self.c)
    }
    pub fn energy_to_si(&self, e: f64) -> f64 {
        e * self.hbar * self.c
    }
    /// K -> 1/m
    pub fn temperature_to_natural(&self, kelvin: f64) -> f64 {
        kelvin * self.k_b / (self.hbar * self.c)
    }
    pub fn temperature_to_si(&self, t: f64) -> f64 {
        t * self.hbar * self.c / self.k_b
    }
    /// 1/s -> 1/m
    pub fn rate_to_natural(&self, per_second: f64) -> f64 {
        per_second / self.c
    }
    pub fn rate_to_si(&self, r: f64) -> f64 {
        r * self.c
    }
    /// W -> 1/m^2
    pub fn power_to_natural(&self, watt: f64) -> f64 {
        watt / (self.hbar * self.c * self.c)
    }
    pub fn power_to_si(&self, p: f64) -> f64 {
        p * self.hbar * self.c * self.c
    }
    /// kg/m^3 -> 1/m^4
    pub fn density_to_natural(&self, kg_per_m3: f64) -> f64 {
        kg_per_m3 * self.c / self.hbar
    }
    /// `G_N` in natural units: `hbar G / c^3` (m^2).
    pub fn g_natural(&self) -> f64 {
        self.hbar * self.g_newton / self.c.powi(3)
    }
}

fn require_non_negative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveInput { name, value })
    }
}

/// `gamma = v^2 m`.
pub fn collapse_rate(v: f64, m: f64) -> Result<f64> {
    require_non_negative("v", v)?;
    require_positive("m", m)?;
    Ok(v * v * m)
}

/// RMS kick energy `1 / m sigma^2`.
pub fn kick_energy(sigma: f64, m: f64) -> Result<f64> {
    require_positive("sigma", sigma)?;
    require_positive("m", m)?;
    Ok(1.0 / (m * sigma * sigma))
}

/// Backaction heating `v^2 / sigma^2` (energy per time), independent of mass.
pub fn backaction_heating_rate(v: f64, sigma: f64) -> Result<f64> {
    require_non_negative("v", v)?;
    require_positive("sigma", sigma)?;
    Ok(v * v / (sigma * sigma))
}

/// `gamma` in 1/s for a mass in kg.
pub fn collapse_rate_si(units: &UnitSystem, v: f64, mass_kg: f64) -> Result<f64> {
    Ok(units.rate_to_si(collapse_rate(v, units.mass_to_natural(mass_kg))?))
}

/// Kick energy in J.
pub fn kick_energy_si(units: &UnitSystem, sigma_m: f64, mass_kg: f64) -> Result<f64> {
    Ok(units.energy_to_si(kick_energy(sigma_m, units.mass_to_natural(mass_kg))?))
}

/// Backaction heating in W per particle.
pub fn backaction_heating_si(units: &UnitSystem, v: f64, sigma_m: f64) -> Result<f64> {
    Ok(units.power_to_si(backaction_heating_rate(v, sigma_m)?))
}

/// Backaction heating as a temperature rate, K/s.
pub fn backaction_heating_kelvin_per_second(units: &UnitSystem, v: f64, sigma_m: f64) -> Result<f64> {
    Ok(backaction_heating_si(units, v, sigma_m)? / units.k_b)
}

/// Inputs of the shot-noise bound, SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoiseBenchmark {
    pub mass_kg: f64,
    pub distance_m: f64,
    pub duration_s: f64,
    pub density_kg_m3: f64,
    pub de_broglie_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotNoise {
    /// `d<dp^2>/dt = G^2 m^2 rho0 / v^2 d`, natural units.
    pub heating_rate: f64,
    /// Added position variance after the hold time, m^2.
    pub delta_x2: f64,
    pub excluded: bool,
}

/// Shot-noise heating of an atom near a large mass. Excluded when the added
/// position spread exceeds the de Broglie wavelength.
pub fn shot_noise_heating(units: &UnitSystem, v: f64, b: &ShotNoiseBenchmark) -> Result<ShotNoise> {
    require_positive("v", v)?;
    for (name, x) in [
        ("mass", b.mass_kg),
        ("distance", b.distance_m),
        ("duration", b.duration_s),
        ("density", b.density_kg_m3),
        ("de Broglie wavelength", b.de_broglie_m),
    ] {
        require_positive(name, x)?;
    }
    let g = units.g_natural();
    let m = units.mass_to_natural(b.mass_kg);
    let rho0 = units.density_to_natural(b.density_kg_m3);
    let tau = units.time_to_natural(b.duration_s);
    let heating_rate = g * g * m * m * rho0 / (v * v * b.distance_m);
    let delta_x2 = tau.powi(3) / (m * m) * heating_rate;
    Ok(ShotNoise { heating_rate, delta_x2, excluded: delta_x2 > b.de_broglie_m.powi(2) })
}

/// Effective potential shape `1 / sqrt(r^2 + sigma^2)`.
pub fn softened_potential(sigma: f64) -> Result<PotentialFn> {
    require_positive("sigma", sigma)?;
    Ok(PotentialFn::Softened { length: sigma })
}

/// Excluded iff `sigma > 100 um`.
pub fn short_range_exclusion(sigma_m: f64) -> bool {
    sigma_m > SHORT_RANGE_LIMIT_M
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentType {
    AtomTrap,
    Interferometer,
    DilutionRefrigerator,
    PenningTrap,
    TorsionBalance,
}

/// Which way a curve's excluded region extends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionDirection {
    LargeV,
    SmallV,
    LargeSigma,
}

/// A bound family with its SI inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    /// Excluded iff `gamma tau >= 1` and `kick energy >= threshold`.
    LostParticle { mass_kg: f64, duration_s: f64, threshold_j: f64 },
    /// Excluded iff `N hbar c^2 v^2 / sigma^2 > P_cool`.
    Heating { atoms: f64, cooling_power_w: f64 },
    ShotNoise(ShotNoiseBenchmark),
    ShortRange { max_sigma_m: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCurve {
    pub name: String,
    pub experiment: ExperimentType,
    pub kind: CurveKind,
    pub description: String,
    /// Built from the lost-particle template rather than a dedicated formula.
    pub template_derived: bool,
}

impl ConstraintCurve {
    pub fn direction(&self) -> ExclusionDirection {
        match self.kind {
            CurveKind::LostParticle { .. } | CurveKind::Heating { .. } => ExclusionDirection::LargeV,
            CurveKind::ShotNoise(_) => ExclusionDirection::SmallV,
            CurveKind::ShortRange { .. } => ExclusionDirection::LargeSigma,
        }
    }

    /// Whether `(v, sigma)` (sigma in metres) is excluded.
    pub fn excludes(&self, units: &UnitSystem, v: f64, sigma_m: f64) -> Result<bool> {
        match self.kind {
            CurveKind::LostParticle { mass_kg, duration_s, threshold_j } => {
                let lost = collapse_rate_si(units, v, mass_kg)? * duration_s >= 1.0;
                Ok(lost && kick_energy_si(units, sigma_m, mass_kg)? >= threshold_j)
            }
            CurveKind::Heating { atoms, cooling_power_w } => {
                Ok(atoms * backaction_heating_si(units, v, sigma_m)? > cooling_power_w)
            }
            CurveKind::ShotNoise(b) => Ok(shot_noise_heating(units, v, &b)?.excluded),
            CurveKind::ShortRange { max_sigma_m } => {
                require_positive("sigma", sigma_m)?;
                Ok(sigma_m > max_sigma_m)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct Quantity {
    value: f64,
    unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dimension {
    Mass,
    Time,
    Energy,
    Power,
    Length,
    Density,
    Count,
}

/// SI factor and dimension of a unit name. Temperatures are read as `k_B T`.
fn unit_factor(unit: &str) -> Option<(Dimension, f64)> {
    use Dimension::*;
    Some(match unit {
        "kg" => (Mass, 1.0),
        "g" => (Mass, 1e-3),
        "u" => (Mass, ATOMIC_MASS_UNIT),
        "s" => (Time, 1.0),
        "min" => (Time, 60.0),
        "h" => (Time, 3600.0),
        "day" => (Time, 86_400.0),
        "J" => (Energy, 1.0),
        "eV" => (Energy, ELECTRON_VOLT),
        "K" => (Energy, K_BOLTZMANN),
        "mK" => (Energy, 1e-3 * K_BOLTZMANN),
        "uK" => (Energy, 1e-6 * K_BOLTZMANN),
        "nK" => (Energy, 1e-9 * K_BOLTZMANN),
        "W" => (Power, 1.0),
        "mW" => (Power, 1e-3),
        "uW" => (Power, 1e-6),
        "m" => (Length, 1.0),
        "mm" => (Length, 1e-3),
        "um" => (Length, 1e-6),
        "nm" => (Length, 1e-9),
        "kg/m^3" => (Density, 1.0),
        "g/cm^3" => (Density, 1e3),
        "1" => (Count, 1.0),
        _ => return None,
    })
}

/// One benchmark entry as stored in the data file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkExperiment {
    pub name: String,
    pub kind: ExperimentType,
    pub description: String,
    mass: Option<Quantity>,
    duration: Option<Quantity>,
    threshold: Option<Quantity>,
    atoms: Option<Quantity>,
    cooling_power: Option<Quantity>,
    distance: Option<Quantity>,
    density: Option<Quantity>,
    de_broglie: Option<Quantity>,
    max_sigma: Option<Quantity>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkFile {
    version: u32,
    #[serde(default)]
    experiment: Vec<BenchmarkExperiment>,
}

impl BenchmarkExperiment {
    fn field(&self, name: &str, q: &Option<Quantity>, dim: Dimension) -> Result<f64> {
        let q = q
            .as_ref()
            .ok_or_else(|| Error::Benchmark(format!("{}: missing field `{name}`", self.name)))?;
        let (d, factor) = unit_factor(&q.unit)
            .ok_or_else(|| Error::Benchmark(format!("{}.{name}: unknown unit `{}`", self.name, q.unit)))?;
        if d != dim {
            return Err(Error::Benchmark(format!("{}.{name}: `{}` is not a {dim:?} unit", self.name, q.unit)));
        }
        let si = q.value * factor;
        if !(si > 0.0) || !si.is_finite() {
            return Err(Error::Benchmark(format!("{}.{name} must be strictly positive", self.name)));
        }
        Ok(si)
    }

    /// The constraint this experiment imposes.
    pub fn curve(&self) -> Result<ConstraintCurve> {
        use Dimension::*;
        let kind = match self.kind {
            ExperimentType::AtomTrap | ExperimentType::PenningTrap => CurveKind::LostParticle {
                mass_kg: self.field("mass", &self.mass, Mass)?,
                duration_s: self.field("duration", &self.duration, Time)?,
                threshold_j: self.field("threshold", &self.threshold, Energy)?,
            },
            ExperimentType::DilutionRefrigerator => CurveKind::Heating {
                atoms: self.field("atoms", &self.atoms, Count)?,
                cooling_power_w: self.field("cooling_power", &self.cooling_power, Power)?,
            },
            ExperimentType::Interferometer => CurveKind::ShotNoise(ShotNoiseBenchmark {
                mass_kg: self.field("mass", &self.mass, Mass)?,
                distance_m: self.field("distance", &self.distance, Length)?,
                duration_s: self.field("duration", &self.duration, Time)?,
                density_kg_m3: self.field("density", &self.density, Density)?,
                de_broglie_m: self.field("de_broglie", &self.de_broglie, Length)?,
            }),
            ExperimentType::TorsionBalance => {
                CurveKind::ShortRange { max_sigma_m: self.field("max_sigma", &self.max_sigma, Length)? }
            }
        };
        Ok(ConstraintCurve {
            name: self.name.clone(),
            experiment: self.kind,
            kind,
            description: self.description.clone(),
            template_derived: self.kind == ExperimentType::PenningTrap,
        })
    }
}

/// Parses a benchmark file into constraint curves. A file with no
/// experiments is an `EmptyCurveSet`.
pub fn parse_benchmarks(text: &str) -> Result<Vec<ConstraintCurve>> {
    let file: BenchmarkFile = toml::from_str(text).map_err(|e| Error::Benchmark(e.to_string()))?;
    if file.version != 1 {
        return Err(Error::Benchmark(format!("unsupported benchmark file version {}", file.version)));
    }
    if file.experiment.is_empty() {
        return Err(Error::EmptyCurveSet);
    }
    file.experiment.iter().map(BenchmarkExperiment::curve).collect()
}

pub fn load_benchmarks(path: &Path) -> Result<Vec<ConstraintCurve>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Benchmark(format!("{}: {e}", path.display())))?;
    parse_benchmarks(&text)
}

pub fn default_curves() -> Result<Vec<ConstraintCurve>> {
    parse_benchmarks(DEFAULT_BENCHMARKS)
}

/// Log-spaced axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAxis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LogAxis {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min > 0.0 && max > min && max.is_finite()) || points < 2 {
            return Err(Error::InvalidGrid(format!("log axis [{min}, {max}] with {points} points")));
        }
        Ok(Self { min, max, points })
    }

    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.min.ln(), self.max.ln());
        (0..self.points)
            .map(|k| (a + (b - a) * k as f64 / (self.points - 1) as f64).exp())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapPoint {
    pub v: f64,
    pub sigma: f64,
    /// Names of the curves that exclude this point.
    pub excluded_by: Vec<String>,
}

impl MapPoint {
    pub fn allowed(&self) -> bool {
        self.excluded_by.is_empty()
    }
}

/// Points `(v, sigma)` between grid cells where a curve switches.
#[derive(Debug, Clone, PartialEq)]
pub struct Boundary {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExclusionMap {
    pub v: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Row-major in `v` (index `i * sigma.len() + j`).
    pub points: Vec<MapPoint>,
    pub boundaries: Vec<Boundary>,
}

impl ExclusionMap {
    pub fn point(&self, i: usize, j: usize) -> &MapPoint {
        &self.points[i * self.sigma.len() + j]
    }

    pub fn allowed_count(&self) -> usize {
        self.points.iter().filter(|p| p.allowed()).count()
    }
}

/// Evaluates every curve on a log grid. An empty curve set leaves every
/// point allowed.
pub fn exclusion_map(
    units: &UnitSystem,
    v_axis: &LogAxis,
    sigma_axis: &LogAxis,
    curves: &[ConstraintCurve],
) -> Result<ExclusionMap> {
    let v = v_axis.values();
    let sigma = sigma_axis.values();
    let ns = sigma.len();
    // flags[c][i * ns + j]
    let flags: Vec<Vec<bool>> = curves
        .par_iter()
        .map(|c| {
            (0..v.len() * ns)
                .into_par_iter()
                .map(|idx| c.excludes(units, v[idx / ns], sigma[idx % ns]))
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<_>>()?;
    let points = (0..v.len() * ns)
        .map(|idx| MapPoint {
            v: v[idx / ns],
            sigma: sigma[idx % ns],
            excluded_by: curves
                .iter()
                .zip(&flags)
                .filter(|(_, f)| f[idx])
                .map(|(c, _)| c.name.clone())
                .collect(),
        })
        .collect();
    let boundaries = curves
        .iter()
        .zip(&flags)
        .map(|(c, f)| {
            let mut pts = Vec::new();
            for i in 0..v.len() {
                for j in 0..ns {
                    if i + 1 < v.len() && f[i * ns + j] != f[(i + 1) * ns + j] {
                        pts.push(((v[i] * v[i + 1]).sqrt(), sigma[j]));
                    }
                    if j + 1 < ns && f[i * ns + j] != f[i * ns + j + 1] {
                        pts.push((v[i], (sigma[j] * sigma[j + 1]).sqrt()));
                    }
                }
            }
            pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
            Boundary { name: c.name.clone(), points: pts }
        })
        .collect();
    Ok(ExclusionMap { v, sigma, points, boundaries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn unit_round_trips() {
        let u = UnitSystem::default();
        for x in [1e-30, 3.7, 2e12] {
            assert!(rel(u.mass_to_si(u.mass_to_natural(x)), x) < 1e-12);
            assert!(rel(u.time_to_si(u.time_to_natural(x)), x) < 1e-12);
            assert!(rel(u.energy_to_si(u.energy_to_natural(x)), x) < 1e-12);
            assert!(rel(u.temperature_to_si(u.temperature_to_natural(x)), x) < 1e-12);
            assert!(rel(u.rate_to_si(u.rate_to_natural(x)), x) < 1e-12);
            assert!(rel(u.power_to_si(u.power_to_natural(x)), x) < 1e-12);
            assert_eq!(u.length_to_si(u.length_to_natural(x)), x);
        }
    }

    #[test]
    fn rates_and_kicks_against_si_formulas() {
        let u = UnitSystem::default();
        assert_eq!(collapse_rate(0.0, 2.0).unwrap(), 0.0);
        assert!(matches!(collapse_rate(-1.0, 2.0), Err(Error::NonPositiveInput { name: "v", .. })));
        assert!(matches!(kick_energy(0.0, 2.0), Err(Error::NonPositiveInput { .. })));
        let m = 85.0 * ATOMIC_MASS_UNIT;
        let gamma = collapse_rate_si(&u, 1e-15, m).unwrap();
        assert!(rel(gamma, 1e-30 * m * C_LIGHT * C_LIGHT / HBAR) < 1e-10);
        let sigma = 3e-9;
        let kick = kick_energy_si(&u, sigma, m).unwrap();
        assert!(rel(kick, HBAR * HBAR / (m * sigma * sigma)) < 1e-10);
        let shrunk = kick_energy_si(&u, sigma / 2f64.sqrt(), m).unwrap();
        assert!(rel(shrunk, 2.0 * kick) < 1e-12);
    }

    #[test]
    fn backaction_heating_numbers() {
        let u = UnitSystem::default();
        let k = backaction_heating_kelvin_per_second(&u, 1e-15, 1e-9).unwrap();
        let oracle = HBAR * C_LIGHT * C_LIGHT * 1e-30 / (K_BOLTZMANN * 1e-18);
        assert!(rel(k, oracle) < 1e-10);
        assert!(k > 0.5e-6 && k < 0.8e-6);
        let k10 = backaction_heating_kelvin_per_second(&u, 1e-14, 1e-9).unwrap();
        assert!(rel(k10, 100.0 * k) < 1e-12);
    }

    fn interferometer() -> ShotNoiseBenchmark {
        ShotNoiseBenchmark {
            mass_kg: 85.0 * ATOMIC_MASS_UNIT,
            distance_m: 1.0,
            duration_s: 20.0,
            density_kg_m3: 1800.0,
            de_broglie_m: 1e-6,
        }
    }

    #[test]
    fn shot_noise_bound() {
        let u = UnitSystem::default();
        let b = interferometer();
        let v = 1e-25;
        let s = shot_noise_heating(&u, v, &b).unwrap();
        let oracle = HBAR * G_NEWTON_SI.powi(2) * 1800.0 * 20f64.powi(3) / (C_LIGHT * C_LIGHT * v * v);
        assert!(rel(s.delta_x2, oracle) < 1e-10);
        assert!(!s.excluded);
        let v_crit = (oracle * v * v).sqrt() / 1e-6;
        assert!(shot_noise_heating(&u, 0.9 * v_crit, &b).unwrap().excluded);
        assert!(!shot_noise_heating(&u, 1.1 * v_crit, &b).unwrap().excluded);
        assert!(shot_noise_heating(&u, 1e30, &b).unwrap().delta_x2 < 1e-100);
        let far = ShotNoiseBenchmark { distance_m: 2.0, ..b };
        let r = shot_noise_heating(&u, v, &far).unwrap().heating_rate / s.heating_rate;
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn softening_and_short_range() {
        let p = softened_potential(2.0).unwrap();
        assert_eq!(p.eval(0.0), 0.5);
        assert!(rel(p.eval(20.0), 1.0 / 20.0) < 0.01);
        assert!(short_range_exclusion(1e-3));
        assert!(!short_range_exclusion(1e-6));
    }

    #[test]
    fn default_benchmarks_parse() {
        let curves = default_curves().unwrap();
        assert_eq!(curves.len(), 5);
        assert!(curves.iter().any(|c| c.template_derived));
        assert!(curves.iter().all(|c| !c.description.is_empty()));
        assert!(matches!(parse_benchmarks("version = 1"), Err(Error::EmptyCurveSet)));
        let bad_unit = DEFAULT_BENCHMARKS.replace("unit = \"mK\"", "unit = \"furlong\"");
        assert!(matches!(parse_benchmarks(&bad_unit), Err(Error::Benchmark(_))));
        let wrong_dim = DEFAULT_BENCHMARKS.replace("unit = \"mK\"", "unit = \"m\"");
        assert!(matches!(parse_benchmarks(&wrong_dim), Err(Error::Benchmark(_))));
        let extra = DEFAULT_BENCHMARKS.replace("version = 1", "version = 1\ncolour = 3");
        assert!(parse_benchmarks(&extra).is_err());
    }

    fn axes() -> (LogAxis, LogAxis) {
        (LogAxis::new(1e-30, 1e-5, 100).unwrap(), LogAxis::new(1e-12, 1e-1, 100).unwrap())
    }

    #[test]
    fn empty_and_single_curve_maps() {
        let u = UnitSystem::default();
        let (va, sa) = axes();
        let map = exclusion_map(&u, &va, &sa, &[]).unwrap();
        assert_eq!(map.allowed_count(), 100 * 100);
        let short: Vec<_> = default_curves()
            .unwrap()
            .into_iter()
            .filter(|c| c.experiment == ExperimentType::TorsionBalance)
            .collect();
        let map = exclusion_map(&u, &va, &sa, &short).unwrap();
        for p in &map.points {
            assert_eq!(p.allowed(), p.sigma <= SHORT_RANGE_LIMIT_M);
        }
        assert!(map.boundaries[0].points.iter().all(|&(_, s)| (s / SHORT_RANGE_LIMIT_M).ln().abs() < 0.2));
    }

    #[test]
    fn dilution_boundary_has_unit_slope() {
        let u = UnitSystem::default();
        let curve = default_curves()
            .unwrap()
            .into_iter()
            .find(|c| c.experiment == ExperimentType::DilutionRefrigerator)
            .unwrap();
        let CurveKind::Heating { atoms, cooling_power_w } = curve.kind else { panic!() };
        let v_star = |sigma: f64| (cooling_power_w / (atoms * HBAR * C_LIGHT * C_LIGHT)).sqrt() * sigma;
        for sigma in [1e-9, 1e-6] {
            assert!(curve.excludes(&u, 1.01 * v_star(sigma), sigma).unwrap());
            assert!(!curve.excludes(&u, 0.99 * v_star(sigma), sigma).unwrap());
        }
        let slope = (v_star(1e-6) / v_star(1e-9)).log10() / 3.0;
        assert!((slope - 1.0).abs() < 1e-12);
    }
}
