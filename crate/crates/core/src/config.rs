//! TOML configuration files for the command-line tool.
//!
//! ```toml
//! blocklength = 128          # M (alias: m)
//! blocks = 16                # G (alias: g)
//! permutation_seed = 0
//! row_signs = true           # false: plain row permutations
//!
//! [[layers]]
//! sparsity = 1
//! alphabet = [1.0]
//!
//! [[layers]]
//! sparsity = 1
//! alphabet = [-1.0]
//!
//! [crc]                      # optional
//! width = 8
//! polynomial = 0x07
//!
//! [list]                     # needed by decoder = "list"
//! sizes = [2, 2]
//!
//! [simulation]
//! eb_n0_db = [0.0, 1.0, 2.0]
//! decoder = "map"            # map | os | list
//! min_errors = 200
//! max_trials = 10000000
//! seed = 1
//! out = "bler.csv"
//! workers = 0                # 0: all cores
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ca_boss::{CrcConfig, ListConfig};
use crate::code_params::{CodeParams, Layer};
use crate::error::{Error, Result};
use crate::sim::{CampaignConfig, DecoderChoice};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(alias = "m")]
    pub blocklength: usize,
    #[serde(alias = "g")]
    pub blocks: usize,
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub permutation_seed: u64,
    #[serde(default = "yes")]
    pub row_signs: bool,
    #[serde(default)]
    pub crc: Option<CrcConfig>,
    #[serde(default)]
    pub list: Option<ListConfig>,
    #[serde(default)]
    pub simulation: SimulationSection,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub eb_n0_db: Vec<f64>,
    pub decoder: DecoderChoice,
    pub min_errors: u64,
    pub max_trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub batch: usize,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            eb_n0_db: Vec::new(),
            decoder: DecoderChoice::Map,
            min_errors: CampaignConfig::DEFAULT_MIN_ERRORS,
            max_trials: CampaignConfig::DEFAULT_MAX_TRIALS,
            seed: 0,
            out: None,
            workers: 0,
            batch: CampaignConfig::DEFAULT_BATCH,
        }
    }
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn code_params(&self) -> CodeParams {
        CodeParams {
            blocklength: self.blocklength,
            blocks: self.blocks,
            layers: self.layers.clone(),
            permutation_seed: self.permutation_seed,
            row_signs: self.row_signs,
            crc: self.crc,
        }
    }

    /// Validated campaign. A relative `out` path is kept as written.
    pub fn campaign(&self) -> Result<CampaignConfig> {
        let s = &self.simulation;
        let mut cfg = CampaignConfig::new(
            self.code_params().validate()?,
            s.decoder,
            s.eb_n0_db.clone(),
        );
        cfg.list = self.list.clone();
        cfg.min_errors = s.min_errors;
        cfg.max_trials = s.max_trials;
        cfg.seed = s.seed;
        cfg.out = s.out.clone();
        cfg.workers = s.workers;
        cfg.batch = s.batch;
        Ok(cfg)
    }
}
