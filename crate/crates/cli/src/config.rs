//! TOML pipeline configuration, one table per stage.
//!
//! ```toml
//! [paths]
//! corpus = "out/corpus.jsonl"
//!
//! [synth]
//! k = 2000
//! p_o = 0.2
//!
//! [embed]
//! dim = 32
//! ```
//!
//! Missing keys take the library defaults; unknown keys are rejected.
//! Command-line flags override values read from the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trailaug::annindex::LshConfig;
use trailaug::convmodel::{LrHyper, SplitFractions};
use trailaug::embed::TrainParams;
use trailaug::seedexp::ExpansionParams;
use trailaug::synthgen::SynthConfig;

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub include: Option<PathBuf>,
    pub exclude: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub seed: u64,
    pub train: f64,
    pub validation: f64,
    /// Seed for the prediction times of non-converters.
    pub cutoff_seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        let f = SplitFractions::default();
        Self { seed: 0, train: f.train, validation: f.validation, cutoff_seed: 0 }
    }
}

impl SplitConfig {
    pub fn fractions(&self) -> SplitFractions {
        SplitFractions { train: self.train, validation: self.validation }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub synth: SynthConfig,
    pub embed: TrainParams,
    pub lsh: LshConfig,
    pub expansion: ExpansionParams,
    pub lr: LrHyper,
    pub split: SplitConfig,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    /// Desk-scale settings used by `repro` when no config file is given.
    pub fn desk_scale() -> Self {
        Self {
            synth: SynthConfig { k: 2000, ..SynthConfig::default() },
            embed: TrainParams { dim: 32, ..TrainParams::default() },
            ..Self::default()
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Every stage seed derived from one value.
    pub fn reseed(&mut self, seed: u64) {
        self.synth.rng_seed = seed;
        self.embed.rng_seed = seed;
        self.lsh.rng_seed = seed;
        self.expansion.lsh_seed = seed;
        self.lr.rng_seed = seed;
        self.split.seed = seed;
        self.split.cutoff_seed = seed;
    }
}
