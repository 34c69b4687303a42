//! Experiment configuration: a strict, sectioned schema (TOML by default,
//! JSON accepted) that maps onto the library types. Unknown keys are
//! rejected everywhere and the RNG seed is mandatory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use drb_core::connectivity::Connectivity;
use drb_core::error::Result as CoreResult;
use drb_core::noise::{ErrorModel, ErrorModelKind, SspamMode, WeightProfile};
use drb_core::protocol::ExperimentDesign;
use drb_core::rng;
use drb_core::sampling::{OneQubitPool, SamplingDistribution};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    MonteCarlo,
    Exact,
    Rmatrix,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed for every derived random stream.
    pub seed: u64,
    #[serde(default = "default_mode")]
    pub mode: RunMode,
    pub connectivity: ConnectivitySection,
    #[serde(default)]
    pub omega: OmegaSection,
    #[serde(default)]
    pub design: DesignSection,
    #[serde(default)]
    pub noise: Option<NoiseSection>,
    #[serde(default)]
    pub gateset: Option<GateSetSection>,
    #[serde(default)]
    pub scramble: ScrambleSection,
    pub output: OutputSection,
}

fn default_mode() -> RunMode {
    RunMode::Exact
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum ConnectivitySection {
    AllToAll { n: usize },
    Linear { n: usize },
    Ring { n: usize },
    Custom { n: usize, edges: Vec<(usize, usize)> },
}

impl ConnectivitySection {
    pub fn n(&self) -> usize {
        match *self {
            ConnectivitySection::AllToAll { n }
            | ConnectivitySection::Linear { n }
            | ConnectivitySection::Ring { n }
            | ConnectivitySection::Custom { n, .. } => n,
        }
    }

    pub fn build(&self) -> CoreResult<Connectivity> {
        Ok(match self {
            ConnectivitySection::AllToAll { n } => Connectivity::all_to_all(*n),
            ConnectivitySection::Linear { n } => Connectivity::linear(*n),
            ConnectivitySection::Ring { n } => Connectivity::ring(*n),
            ConnectivitySection::Custom { n, edges } => {
                Connectivity::new(*n, edges.iter().copied())?
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolName {
    Clifford24,
    X90Y90I,
    X90Ztheta,
}

impl From<PoolName> for OneQubitPool {
    fn from(p: PoolName) -> OneQubitPool {
        match p {
            PoolName::Clifford24 => OneQubitPool::Clifford24,
            PoolName::X90Y90I => OneQubitPool::X90Y90I,
            PoolName::X90Ztheta => OneQubitPool::X90ZTheta,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum OmegaSection {
    EdgeGrab {
        xi_bar: f64,
        #[serde(default = "default_pool")]
        pool: PoolName,
    },
    G2,
    G3,
    G4 {
        #[serde(default)]
        correlated: bool,
    },
}

fn default_pool() -> PoolName {
    PoolName::Clifford24
}

impl Default for OmegaSection {
    fn default() -> Self {
        OmegaSection::EdgeGrab {
            xi_bar: 0.0,
            pool: PoolName::Clifford24,
        }
    }
}

impl OmegaSection {
    pub fn build(&self) -> SamplingDistribution {
        match self {
            OmegaSection::EdgeGrab { xi_bar, pool } => SamplingDistribution::EdgeGrab {
                xi_bar: *xi_bar,
                pool: (*pool).into(),
            },
            OmegaSection::G2 => SamplingDistribution::G2,
            OmegaSection::G3 => SamplingDistribution::G3,
            OmegaSection::G4 { correlated } => SamplingDistribution::G4 {
                correlated: *correlated,
            },
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    #[serde(default = "default_k_d")]
    pub k_d: usize,
    #[serde(default = "default_n_shots")]
    pub n_shots: usize,
    #[serde(default = "default_true")]
    pub randomize_target: bool,
}

fn default_depths() -> Vec<usize> {
    vec![0, 1, 2, 4, 8, 16, 32, 64, 128]
}

fn default_k_d() -> usize {
    30
}

fn default_n_shots() -> usize {
    40
}

fn default_true() -> bool {
    true
}

impl Default for DesignSection {
    fn default() -> Self {
        DesignSection {
            depths: default_depths(),
            k_d: default_k_d(),
            n_shots: default_n_shots(),
            randomize_target: true,
        }
    }
}

impl DesignSection {
    pub fn build(&self, n: usize, omega: &OmegaSection, seed: u64) -> ExperimentDesign {
        ExperimentDesign {
            n,
            depths: self.depths.clone(),
            k_d: self.k_d,
            n_shots: self.n_shots,
            omega: omega.build(),
            randomize_target: self.randomize_target,
            rng_seed: seed,
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum NoiseKindSection {
    GlobalDepolarizing {
        lambda: f64,
    },
    /// Uniform per-qubit depolarization (one ε for all qubits).
    LocalDepolarizing {
        eps: f64,
    },
    WeightedLocal {
        alpha: f64,
        eps_tilde: f64,
    },
    /// A reproducible random 12-generator Markovian model with total rate ε,
    /// drawn from the config seed.
    MarkovianSampled {
        epsilon: f64,
    },
    /// Explicit per-label Markovian generator rates.
    MarkovianGenerators {
        rates: BTreeMap<String, [f64; 12]>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub model: NoiseKindSection,
    #[serde(default)]
    pub noisy_sspam: bool,
    #[serde(default)]
    pub readout_flip: f64,
}

/// Substream tag for drawing sampled Markovian models.
pub const MODEL_STREAM: u64 = 5;

impl NoiseSection {
    pub fn build(&self, n: usize, seed: u64) -> CoreResult<ErrorModel> {
        let kind = match &self.model {
            NoiseKindSection::GlobalDepolarizing { lambda } => {
                ErrorModelKind::GlobalDepolarizing { lambda: *lambda }
            }
            NoiseKindSection::LocalDepolarizing { eps } => ErrorModelKind::LocalDepolarizing {
                eps: vec![*eps; n],
            },
            NoiseKindSection::WeightedLocal { alpha, eps_tilde } => {
                ErrorModelKind::WeightedLocal {
                    profile: WeightProfile {
                        alpha: *alpha,
                        eps_tilde: *eps_tilde,
                    },
                }
            }
            NoiseKindSection::MarkovianSampled { epsilon } => {
                let mut rng = rng::substream(seed, 0, 0, MODEL_STREAM);
                let model = drb_core::noise::sample_markovian_model(&["*"], *epsilon, &mut rng)?;
                model.kind
            }
            NoiseKindSection::MarkovianGenerators { rates } => {
                ErrorModelKind::MarkovianGenerators {
                    rates: rates.clone(),
                }
            }
        };
        let mode = if self.noisy_sspam {
            SspamMode::Noisy
        } else {
            SspamMode::Perfect
        };
        Ok(ErrorModel::new(n, kind)?
            .with_sspam(mode)
            .with_readout_flip(self.readout_flip))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateSetFamily {
    /// ±90° rotations about X and Y, uniform.
    Xy90,
    /// The 24-element single-qubit Clifford group, uniform.
    Clifford1,
    /// The single-qubit Pauli group {I, X, Y, Z}, uniform.
    Pauli1,
    /// {√Z·H, Z·√Z·H}, uniform.
    Szh,
    /// {√Z·H, Z·√Z·H, I}, uniform.
    SzhWithIdentity,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSetSection {
    pub family: GateSetFamily,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScrambleSection {
    #[serde(default)]
    pub correlated: bool,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_k_max() -> usize {
    16
}

fn default_trials() -> usize {
    100_000
}

fn default_delta() -> f64 {
    0.05
}

impl Default for ScrambleSection {
    fn default() -> Self {
        ScrambleSection {
            correlated: false,
            k_max: default_k_max(),
            trials: default_trials(),
            delta: default_delta(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Directory all artifact files are written into (created if missing).
    pub dir: PathBuf,
}

/// A parsed config together with the exact text it came from (hashed into
/// every output file).
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub hash: String,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<LoadedConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e == "json");
        let config: ExperimentConfig = if is_json {
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        };
        Ok(LoadedConfig {
            hash: drb_core::io::config_hash(&text),
            config,
        })
    }
}
