//! JSON configuration file. Every key is optional; command-line flags win
//! over config keys, which win over built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::failure::Failure;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolConfig {
    pub field: FieldBlock,
    pub construction: ConstructionBlock,
    pub analysis: AnalysisBlock,
    pub channel: ChannelBlock,
    pub paths: PathsBlock,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldBlock {
    pub b: Option<u32>,
    pub prim_poly: Option<u16>,
    /// Row k is the coordinate mask of α^k.
    pub basis: Option<Vec<u8>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Random,
    Peg,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructionBlock {
    pub method: Option<Method>,
    pub n_q: Option<usize>,
    pub d_l: Option<usize>,
    pub d_r: Option<usize>,
    /// Irregular profile; overrides `n_q`, `d_l` and `d_r` when both are given.
    pub var_degrees: Option<Vec<usize>>,
    pub check_degrees: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub dedupe_simplex: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisBlock {
    pub w_max: Option<usize>,
    pub budget: Option<u64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelBlock {
    pub epsilons: Option<Vec<f64>>,
    pub max_trials: Option<u64>,
    pub max_frame_errors: Option<u64>,
    pub seed: Option<u64>,
    pub decoders: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsBlock {
    pub bundle: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl ToolConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))
    }
}

/// First of flag, config value, default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
