//! Versioned TOML experiment configuration.

use crate::error::{Error, Result};
use crate::lindblad::{ChainParams, ChainVariant, TopParams};
use crate::spectral::RatioConvention;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_SPECTRUM_DIM: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectorySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unraveling: Option<UnravelingSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<ClassicalSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Top(TopParams),
    Chain(ChainParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// One Haar-random state shared by every trajectory.
    Haar,
    /// Haar-random inside the eigenspace of total `S_z` with this value.
    HaarFixedSz(f64),
    Basis(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    /// Step size; chosen from a pilot run when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub horizon: f64,
    /// Steps between stored snapshots.
    #[serde(default = "one")]
    pub stride: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub initial_state: InitialState,
    /// Write every trajectory as a `QTRJ` snapshot file next to the CSV output.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub save_trajectories: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    /// Evaluation times; all snapshot times inside `window` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Late-time averaging window `[t̄, T]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_cutoff")]
    pub cutoff_fraction: f64,
    /// Ensemble sizes for a scale profile.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n_list: Vec<usize>,
    /// Subsampling intervals for single-trajectory datasets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delta_t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnravelingSpec {
    /// Complex shift `[re, im]` applied to every channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<[f64; 2]>,
    /// One complex shift per channel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shifts: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub energy_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    OmegaX,
    K,
    Delta,
    J2,
    Gamma2,
    /// Real uniform unraveling shift `ℓ`.
    Shift,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::OmegaX => "omega_x",
            Self::K => "k",
            Self::Delta => "delta",
            Self::J2 => "j2",
            Self::Gamma2 => "gamma2",
            Self::Shift => "shift",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumMode {
    /// One-period map `e^{τ𝓛₀}(U⊗U*)`; needs `tau`.
    Floquet,
    /// The generator `𝓛` itself; any kick is ignored.
    Autonomous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    /// Floquet when the model is kicked, autonomous otherwise, when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SpectrumMode>,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub convention: RatioConvention,
    /// Eigenvalues with smaller modulus are dropped before the statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_modulus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSpec {
    /// `[n_z, n_phi]` initial conditions on the unit sphere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[usize; 2]>,
    /// Further initial magnetizations `[m_x, m_y, m_z]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub initial: Vec<[f64; 3]>,
    pub dt: f64,
    pub horizon: f64,
    #[serde(default = "one")]
    pub stride: usize,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        Self {
            mode: None,
            max_dim: DEFAULT_MAX_SPECTRUM_DIM,
            bins: default_bins(),
            convention: RatioConvention::default(),
            min_modulus: None,
        }
    }
}

fn one() -> usize {
    1
}

fn default_cutoff() -> f64 {
    crate::dimension::DEFAULT_CUTOFF
}

fn default_max_dim() -> usize {
    DEFAULT_MAX_SPECTRUM_DIM
}

fn default_bins() -> usize {
    40
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the line of the offending entry.
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(src).map_err(|e| {
            let line = e.span().map(|s| line_of(src, s.start));
            Error::Config(match line {
                Some(l) => format!("line {l}: {}", e.message()),
                None => e.message().to_string(),
            })
        })?;
        cfg.validate().map_err(|(path, msg)| {
            let located = locate(src, &path).map(|l| format!("line {l}: ")).unwrap_or_default();
            Error::Config(format!("{located}{}: {msg}", path.join(".")))
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)?;
        Self::from_toml(&src).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn trajectory(&self) -> Result<&TrajectorySpec> {
        self.trajectory.as_ref().ok_or_else(|| Error::Config("missing [trajectory] block".into()))
    }

    pub fn analysis(&self) -> Result<&AnalysisSpec> {
        self.analysis.as_ref().ok_or_else(|| Error::Config("missing [analysis] block".into()))
    }

    pub fn classical(&self) -> Result<&ClassicalSpec> {
        self.classical.as_ref().ok_or_else(|| Error::Config("missing [classical] block".into()))
    }

    /// Sweep values, or a single unlabelled point.
    pub fn sweep_points(&self) -> Vec<Option<(SweepParameter, f64)>> {
        match &self.sweep {
            Some(s) => s.values.iter().map(|&v| Some((s.parameter, v))).collect(),
            None => vec![None],
        }
    }

    /// Copy with one sweep value substituted.
    pub fn at_point(&self, point: Option<(SweepParameter, f64)>) -> Self {
        let mut cfg = self.clone();
        let Some((param, v)) = point else { return cfg };
        if param == SweepParameter::Shift {
            let u = cfg.unraveling.get_or_insert(UnravelingSpec { shift: None, shifts: None, energy_offset: 0.0 });
            u.shift = Some([v, 0.0]);
            u.shifts = None;
            return cfg;
        }
        match (&mut cfg.model, param) {
            (ModelSpec::Top(p), SweepParameter::OmegaX) => p.omega_x = v,
            (ModelSpec::Top(p), SweepParameter::K) => p.k = v,
            (ModelSpec::Chain(p), SweepParameter::Delta) => p.delta = v,
            (ModelSpec::Chain(p), SweepParameter::J2) => p.j2 = v,
            (ModelSpec::Chain(p), SweepParameter::Gamma2) => {
                p.gamma2 = v;
                if p.variant == ChainVariant::D {
                    p.gamma3 = v;
                }
            }
            _ => unreachable!("validated sweep parameter"),
        }
        cfg
    }

    /// Semantic checks; the error names the offending key path.
    fn validate(&self) -> std::result::Result<(), (Vec<&'static str>, String)> {
        let err = |path: &[&'static str], msg: String| Err((path.to_vec(), msg));
        if self.schema_version != SCHEMA_VERSION {
            return err(&["schema_version"], format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version));
        }
        let model_check = match &self.model {
            ModelSpec::Top(p) => crate::lindblad::quantum_top_model(p).map(|_| ()),
            ModelSpec::Chain(p) => p.validate(),
        };
        if let Err(e) = model_check {
            return err(&["model"], e.to_string());
        }
        if let Some(t) = &self.trajectory {
            if t.dt.is_some_and(|dt| !(dt > 0.0)) {
                return err(&["trajectory", "dt"], "must be positive".into());
            }
            if !(t.horizon > 0.0) {
                return err(&["trajectory", "horizon"], "must be positive".into());
            }
            if t.stride == 0 {
                return err(&["trajectory", "stride"], "must be at least 1".into());
            }
            if t.trajectories == 0 {
                return err(&["trajectory", "trajectories"], "must be at least 1".into());
            }
            let dim = self.hilbert_dim();
            if let InitialState::Basis(i) = t.initial_state {
                if i >= dim {
                    return err(&["trajectory", "initial_state"], format!("basis index {i} out of range for dimension {dim}"));
                }
            }
        }
        if let Some(a) = &self.analysis {
            if !(a.cutoff_fraction > 0.0 && a.cutoff_fraction <= 1.0) {
                return err(&["analysis", "cutoff_fraction"], "must lie in (0, 1]".into());
            }
            if let Some(w) = a.window {
                if !(w[0] >= 0.0 && w[1] >= w[0]) {
                    return err(&["analysis", "window"], "needs 0 ≤ t̄ ≤ T".into());
                }
            }
            if a.times.as_ref().is_some_and(|t| t.is_empty()) {
                return err(&["analysis", "times"], "must not be empty".into());
            }
            if a.delta_t.iter().any(|&d| !(d > 0.0)) {
                return err(&["analysis", "delta_t"], "entries must be positive".into());
            }
            if a.n_list.iter().any(|&n| n < 3) {
                return err(&["analysis", "n_list"], "entries must be at least 3".into());
            }
        }
        if let Some(u) = &self.unraveling {
            if u.shift.is_some() && u.shifts.is_some() {
                return err(&["unraveling"], "give either shift or shifts, not both".into());
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return err(&["sweep", "values"], "sweep needs at least one value".into());
            }
            let allowed = matches!(
                (&self.model, s.parameter),
                (ModelSpec::Top(_), SweepParameter::OmegaX | SweepParameter::K)
                    | (ModelSpec::Chain(_), SweepParameter::Delta | SweepParameter::J2 | SweepParameter::Gamma2)
                    | (_, SweepParameter::Shift)
            );
            if !allowed {
                return err(&["sweep", "parameter"], format!("{} does not apply to this model", s.parameter.name()));
            }
            for point in self.sweep_points() {
                let cfg = self.at_point(point);
                let e = match &cfg.model {
                    ModelSpec::Top(p) => crate::lindblad::quantum_top_model(p).err(),
                    ModelSpec::Chain(p) => p.validate().err(),
                };
                if let Some(e) = e {
                    return err(&["sweep", "values"], e.to_string());
                }
            }
        }
        if let Some(s) = &self.spectrum {
            if s.bins == 0 {
                return err(&["spectrum", "bins"], "must be at least 1".into());
            }
            if s.mode == Some(SpectrumMode::Floquet) {
                if let ModelSpec::Top(p) = &self.model {
                    if p.tau.is_none() {
                        return err(&["spectrum", "mode"], "floquet mode needs model.tau".into());
                    }
                } else {
                    return err(&["spectrum", "mode"], "floquet mode needs a kicked top".into());
                }
            }
        }
        if let Some(c) = &self.classical {
            if !matches!(self.model, ModelSpec::Top(_)) {
                return err(&["classical"], "the classical limit exists for the top only".into());
            }
            if c.grid.is_some_and(|g| g[0] == 0 || g[1] == 0) {
                return err(&["classical", "grid"], "needs at least one point per axis".into());
            }
            if c.grid.is_none() && c.initial.is_empty() {
                return err(&["classical"], "needs a grid or initial conditions".into());
            }
            if c.initial.iter().flatten().any(|x| !x.is_finite()) {
                return err(&["classical", "initial"], "entries must be finite".into());
            }
            if !(c.dt > 0.0) {
                return err(&["classical", "dt"], "must be positive".into());
            }
            if !(c.horizon >= 0.0) {
                return err(&["classical", "horizon"], "must be non-negative".into());
            }
            if c.stride == 0 {
                return err(&["classical", "stride"], "must be at least 1".into());
            }
        }
        Ok(())
    }

    fn hilbert_dim(&self) -> usize {
        match &self.model {
            ModelSpec::Top(p) => (2.0 * p.spin).round() as usize + 1,
            ModelSpec::Chain(p) => 1 << p.sites,
        }
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Line of the deepest key along `path` present in the document.
fn locate(src: &str, path: &[&str]) -> Option<usize> {
    let doc = toml::de::DeTable::parse(src).ok()?;
    let mut table = doc.get_ref();
    let mut found = None;
    for key in path {
        let (k, v) = table.iter().find(|(k, _)| k.get_ref() == key)?;
        found = Some(line_of(src, k.span().start));
        match v.get_ref().as_table() {
            Some(t) => table = t,
            None => break,
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOP: &str = r#"
schema_version = 1

[model]
kind = "top"
spin = 10
omega_z = 1.0
g = 5.0
gamma = 2.0

[trajectory]
horizon = 20.0
stride = 20
trajectories = 50
seed = 7
initial_state = { basis = 0 }

[analysis]
window = [10.0, 20.0]
n_list = [10, 20]

[sweep]
parameter = "omega_x"
values = [0.0, 2.0, 4.0]
"#;

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml(TOP).unwrap();
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.sweep_points().len(), 3);
        let chain = r#"
schema_version = 1
[model]
kind = "chain"
variant = "D"
sites = 4
delta = 0.5
gamma2 = 1.0
gamma3 = 1.0
bond_normalization = "tabulated"
[trajectory]
dt = 0.01
horizon = 5.0
trajectories = 10
seed = 1
initial_state = { haar_fixed_sz = 0.0 }
[unraveling]
shifts = [[0.5, 0.0], [0.0, 1.0]]
[spectrum]
mode = "autonomous"
convention = "reciprocal"
[sweep]
parameter = "gamma2"
values = [0.5]
"#;
        let cfg = ExperimentConfig::from_toml(chain).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        let ModelSpec::Chain(p) = cfg.at_point(cfg.sweep_points()[0]).model else { panic!() };
        assert_eq!((p.gamma2, p.gamma3), (0.5, 0.5));
    }

    fn config_error(src: &str) -> String {
        match ExperimentConfig::from_toml(src) {
            Err(Error::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_line() {
        let typo = TOP.replace("stride = 20", "strid = 20");
        let m = config_error(&typo);
        assert!(m.contains("line 13") && m.contains("strid"), "{m}");

        let empty = TOP.replace("values = [0.0, 2.0, 4.0]", "values = []");
        let m = config_error(&empty);
        assert!(m.starts_with("line 24") && m.contains("sweep.values"), "{m}");

        let bad_sweep = TOP.replace("\"omega_x\"", "\"delta\"");
        assert!(config_error(&bad_sweep).starts_with("line 23"));

        let m = config_error(&TOP.replace("g = 5.0", "gg = 5.0"));
        assert!(m.starts_with("line ") && m.contains("gg"), "{m}");

        let version = TOP.replace("schema_version = 1", "schema_version = 2");
        assert!(config_error(&version).starts_with("line 2"));

        let kick = TOP.replace("gamma = 2.0", "gamma = 2.0\nk = 1.0");
        assert!(config_error(&kick).contains("period"));
    }
}
