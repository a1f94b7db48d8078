//! Scenario files. Parsing is two-stage: the envelope first, then the
//! `model` object against the schema of the declared kind. Unknown keys are
//! rejected at both stages.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::units::Quantity;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    GridEvolution,
    Trajectories,
    Interferometry,
    Bounds,
    Validate,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::GridEvolution => "grid-evolution",
            Kind::Trajectories => "trajectories",
            Kind::Interferometry => "interferometry",
            Kind::Bounds => "bounds",
            Kind::Validate => "validate",
        }
    }
}

/// Method settings. Every field has a documented default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Worker threads; defaults to the number of cores.
    pub threads: Option<usize>,
    /// Fixed step; defaults to `0.05 / max_rate`, shortened to divide `t_final`.
    pub dt: Option<Quantity>,
    /// Number of output rows after `t = 0` (default 100).
    pub records: Option<usize>,
    /// Fock cutoff; defaults to `max(20, ceil(10 (nbar + 1) + 4 |beta|^2))`.
    pub n_fock: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope {
    kind: Kind,
    name: Option<String>,
    seed: Option<u64>,
    #[serde(default)]
    numerics: Numerics,
    #[serde(default)]
    output: Output,
    model: Value,
}

// ---------------------------------------------------------------- models

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianKind {
    /// No Hamiltonian: the channel alone.
    None,
    Free,
    /// Free plus the coherent pair potential (comparison mode, no channel).
    Coherent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Newtonian,
    Softened { length: Quantity },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpecIn {
    pub center: Quantity,
    pub spacing: Quantity,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketIn {
    pub center: Quantity,
    pub width: Quantity,
    pub momentum: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleIn {
    pub mass: Quantity,
    pub grid: GridSpecIn,
    pub packet: PacketIn,
}

/// Model of the `grid-evolution` and `trajectories` kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridModel {
    pub v: Quantity,
    pub sigma: Quantity,
    pub g_newton: Quantity,
    pub potential: PotentialSpec,
    pub hamiltonian: HamiltonianKind,
    pub particles: Vec<ParticleIn>,
    pub t_final: Quantity,
    /// Required for `trajectories`, rejected otherwise.
    pub trajectories: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KickIn {
    Monopole,
    Dipole,
    Quadrupole,
    QuadrupoleCross,
    /// Full `1/|r|`, integrated numerically.
    Newtonian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialIn {
    /// `|+><+| (x) rho_T(nbar)`.
    Product,
    /// Qubit-conditionally displaced thermal state with amplitude `beta`.
    Boosted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexIn {
    pub re: Quantity,
    pub im: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferometryModel {
    pub source_mass: Quantity,
    pub atom_mass: Quantity,
    pub arm_separation: Quantity,
    pub distance: Quantity,
    /// Source localisation width; used when `omega` is zero.
    pub source_width: Quantity,
    pub omega: Quantity,
    pub nbar: Quantity,
    pub beta: ComplexIn,
    pub v: Quantity,
    pub sigma: Quantity,
    pub g_newton: Quantity,
    pub kick: KickIn,
    pub initial: InitialIn,
    pub atom_dephasing: bool,
    pub t_final: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisIn {
    pub min: Quantity,
    pub max: Quantity,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointIn {
    pub v: Quantity,
    pub sigma: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsModel {
    pub v_axis: AxisIn,
    pub sigma_axis: AxisIn,
    /// Benchmark TOML relative to the scenario file; the built-in set if absent.
    pub benchmarks: Option<PathBuf>,
    #[serde(default)]
    pub points: Vec<PointIn>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Grid(GridModel),
    Interferometry(InterferometryModel),
    Bounds(BoundsModel),
    /// A nested scenario to audit without running it.
    Validate(Box<Scenario>),
}

/// A parsed scenario with its canonical form for hashing.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: Kind,
    pub name: String,
    pub seed: Option<u64>,
    pub numerics: Numerics,
    pub output: Output,
    pub model: Model,
    /// Directory of the scenario file, for relative paths.
    pub base_dir: PathBuf,
    pub canonical: Value,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario").to_string();
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &stem, &base)
    }

    pub fn parse(text: &str, default_name: &str, base_dir: &Path) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        Self::from_value(value, default_name, base_dir)
    }

    fn from_value(value: Value, default_name: &str, base_dir: &Path) -> Result<Self, CliError> {
        let canonical = value.clone();
        let env: Envelope = serde_json::from_value(value).map_err(|e| CliError::Parse(e.to_string()))?;
        let model_err = |e: serde_json::Error| CliError::Parse(format!("model: {e}"));
        let model = match env.kind {
            Kind::GridEvolution | Kind::Trajectories => {
                Model::Grid(serde_json::from_value(env.model).map_err(model_err)?)
            }
            Kind::Interferometry => Model::Interferometry(serde_json::from_value(env.model).map_err(model_err)?),
            Kind::Bounds => Model::Bounds(serde_json::from_value(env.model).map_err(model_err)?),
            Kind::Validate => {
                let inner = Self::from_value(env.model, default_name, base_dir)?;
                if inner.kind == Kind::Validate {
                    return Err(CliError::Parse("model: a validate scenario cannot wrap another".into()));
                }
                Model::Validate(Box::new(inner))
            }
        };
        Ok(Self {
            kind: env.kind,
            name: env.name.unwrap_or_else(|| default_name.to_string()),
            seed: env.seed,
            numerics: env.numerics,
            output: env.output,
            model,
            base_dir: base_dir.to_path_buf(),
            canonical,
        })
    }

    /// SHA-256 of the canonical (key-sorted, compact) JSON of the input.
    pub fn config_hash(&self) -> String {
        config_hash(&self.canonical)
    }
}

pub fn config_hash(canonical: &Value) -> String {
    let digest = Sha256::digest(canonical.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOUNDS: &str = r#"{
        "kind": "bounds",
        "model": {
            "v_axis": {"min": {"value": 1e-30, "unit": "1"}, "max": {"value": 1e-5, "unit": "1"}, "points": 10},
            "sigma_axis": {"min": {"value": 1e-12, "unit": "m"}, "max": {"value": 0.1, "unit": "m"}, "points": 10}
        }
    }"#;

    #[test]
    fn parses_and_hashes_independently_of_key_order() {
        let s = Scenario::parse(BOUNDS, "b", Path::new(".")).unwrap();
        assert_eq!(s.kind, Kind::Bounds);
        assert_eq!(s.name, "b");
        let reordered = r#"{"model": {"sigma_axis": {"points": 10, "max": {"unit": "m", "value": 0.1}, "min": {"value": 1e-12, "unit": "m"}},
            "v_axis": {"min": {"value": 1e-30, "unit": "1"}, "max": {"value": 1e-5, "unit": "1"}, "points": 10}}, "kind": "bounds"}"#;
        let t = Scenario::parse(reordered, "b", Path::new(".")).unwrap();
        assert_eq!(s.config_hash(), t.config_hash());
        assert_eq!(s.config_hash().len(), 64);
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let extra = BOUNDS.replacen("\"kind\"", "\"colour\": 1, \"kind\"", 1);
        assert!(matches!(Scenario::parse(&extra, "b", Path::new(".")), Err(CliError::Parse(_))));
        let nested = BOUNDS.replacen("\"points\": 10}", "\"points\": 10, \"step\": 2}", 1);
        let err = Scenario::parse(&nested, "b", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("step"), "{err}");
    }

    #[test]
    fn validate_wraps_a_scenario() {
        let text = format!(r#"{{"kind": "validate", "model": {BOUNDS}}}"#);
        let s = Scenario::parse(&text, "v", Path::new(".")).unwrap();
        assert!(matches!(s.model, Model::Validate(ref inner) if inner.kind == Kind::Bounds));
        let twice = format!(r#"{{"kind": "validate", "model": {text}}}"#);
        assert!(Scenario::parse(&twice, "v", Path::new(".")).is_err());
    }
}
