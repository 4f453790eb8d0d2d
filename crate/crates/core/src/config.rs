//! Run configuration: the φ-roster, the c.e. sets `S_e`, the machine roster
//! and every cap the construction honours.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::BitString;
use crate::error::ConfigError;
use crate::machines::{Builtin, RosterFile, UniversalMachine};
use crate::phi::PhiSpec;

/// One enumerated member of `S_e` and the stage at which it appears.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetMember {
    pub string: BitString,
    #[serde(default)]
    pub stage: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SetSpec {
    #[serde(default)]
    pub members: Vec<SetMember>,
}

impl SetSpec {
    pub fn new(members: impl IntoIterator<Item = (BitString, u64)>) -> Self {
        SetSpec {
            members: members
                .into_iter()
                .map(|(string, stage)| SetMember { string, stage })
                .collect(),
        }
    }

    /// `S_e[s]`.
    pub fn at_stage(&self, s: u64) -> impl Iterator<Item = &BitString> {
        self.members
            .iter()
            .filter(move |m| m.stage <= s)
            .map(|m| &m.string)
    }
}

/// The lower bound a `G_e` node's `l_α` must exceed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GBound {
    /// `2^{2^{e+1} + 2^{c+1}}`, saturating.
    #[default]
    DoublyExponential,
    /// `4·(e + c + 1)`.
    Linear,
}

impl GBound {
    pub fn eval(self, e: u32, c: u32) -> u64 {
        match self {
            GBound::DoublyExponential => {
                let exp = 1u64
                    .checked_shl(e + 1)
                    .and_then(|a| 1u64.checked_shl(c + 1).and_then(|b| a.checked_add(b)));
                match exp {
                    Some(x) if x < 64 => 1u64 << x,
                    _ => u64::MAX,
                }
            }
            GBound::Linear => 4 * (e as u64 + c as u64 + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest `n` a `G_e` node searches.
    pub position_cap: u64,
    /// Longest program enumerated for any complexity value.
    pub program_length_cap: usize,
    /// Step horizon standing in for unbounded running time.
    pub step_horizon: u64,
    /// Largest argument a `D_i` node evaluates.
    pub x_cap: u64,
    /// Largest interval index that may be moved in.
    pub max_interval: u32,
    /// Nodes exist only at tree depths below this. Defaults to two levels
    /// per configured requirement pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree_depth: Option<usize>,
}

fn default_window() -> f64 {
    0.2
}

fn default_snapshot() -> usize {
    64
}

/// The on-disk shape of a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    /// Roster file, relative to the config file.
    pub roster: PathBuf,
    pub max_stage: u64,
    #[serde(default)]
    pub g_bound: GBound,
    #[serde(default = "default_window")]
    pub stability_window: f64,
    #[serde(default = "default_snapshot")]
    pub snapshot_len: usize,
    pub caps: Caps,
    #[serde(default)]
    pub phi: Vec<PhiSpec>,
    #[serde(default)]
    pub sets: Vec<SetSpec>,
}

/// A validated configuration with its roster resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub roster: UniversalMachine,
    pub phi: Vec<PhiSpec>,
    pub sets: Vec<SetSpec>,
    pub caps: Caps,
    pub g_bound: GBound,
    pub stability_window: f64,
    pub snapshot_len: usize,
    pub max_stage: u64,
}

/// Everything the trace depends on except the stage count and snapshot
/// length, in a fixed field order.
#[derive(Serialize)]
struct HashedConfig<'a> {
    roster: RosterFile,
    phi: &'a [PhiSpec],
    sets: &'a [SetSpec],
    caps: &'a Caps,
    tree_depth: usize,
    g_bound: GBound,
    stability_window: f64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ConfigFile = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let roster = UniversalMachine::load(&base.join(&file.roster))?;
        RunConfig::from_parts(file, roster)
    }

    pub fn from_parts(file: ConfigFile, roster: UniversalMachine) -> Result<Self, ConfigError> {
        let config = RunConfig {
            roster,
            phi: file.phi,
            sets: file.sets,
            caps: file.caps,
            g_bound: file.g_bound,
            stability_window: file.stability_window,
            snapshot_len: file.snapshot_len,
            max_stage: file.max_stage,
        };
        config.validate()?;
        Ok(config)
    }

    /// The on-disk form, pointing at `roster_path` for the roster.
    pub fn to_file(&self, roster_path: impl Into<PathBuf>) -> ConfigFile {
        ConfigFile {
            roster: roster_path.into(),
            max_stage: self.max_stage,
            g_bound: self.g_bound,
            stability_window: self.stability_window,
            snapshot_len: self.snapshot_len,
            caps: self.caps.clone(),
            phi: self.phi.clone(),
            sets: self.sets.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let caps = &self.caps;
        for (name, v) in [
            ("caps.position_cap", caps.position_cap),
            ("caps.program_length_cap", caps.program_length_cap as u64),
            ("caps.step_horizon", caps.step_horizon),
            ("caps.x_cap", caps.x_cap),
        ] {
            if v == 0 {
                return Err(ConfigError::invalid(name, "must be positive"));
            }
        }
        if caps.program_length_cap > 24 {
            return Err(ConfigError::invalid(
                "caps.program_length_cap",
                "exhaustive enumeration beyond 24 bits is out of reach",
            ));
        }
        if caps.max_interval >= 31 || (1usize << caps.max_interval) - 1 > caps.program_length_cap {
            return Err(ConfigError::invalid(
                "caps.max_interval",
                format!(
                    "moving in I_{} enumerates programs of length {}, above program_length_cap {}",
                    caps.max_interval,
                    (1u64 << caps.max_interval.min(62)) - 1,
                    caps.program_length_cap
                ),
            ));
        }
        if caps.tree_depth == Some(0) {
            return Err(ConfigError::invalid("caps.tree_depth", "must be positive"));
        }
        if !(self.stability_window > 0.0 && self.stability_window <= 1.0) {
            return Err(ConfigError::invalid(
                "stability_window",
                "must lie in (0, 1]",
            ));
        }
        for (i, phi) in self.phi.iter().enumerate() {
            phi.validate(&format!("phi[{i}]"))?;
        }
        if self.roster.builtin_index(Builtin::ChopM).is_none() {
            return Err(ConfigError::invalid("roster", "no chop_m builtin"));
        }
        for i in 0..self.phi.len() as u32 {
            if self.roster.builtin_index(Builtin::TruncateN { i }).is_none() {
                return Err(ConfigError::invalid(
                    format!("phi[{i}]"),
                    format!("roster has no truncate_n builtin with i = {i}"),
                ));
            }
        }
        Ok(())
    }

    pub fn tree_depth(&self) -> usize {
        self.caps
            .tree_depth
            .unwrap_or(2 * self.phi.len().max(self.sets.len()).max(1))
    }

    /// `φ_i`, divergent beyond the configured list.
    pub fn phi(&self, i: u32) -> PhiSpec {
        self.phi
            .get(i as usize)
            .cloned()
            .unwrap_or_else(PhiSpec::divergent)
    }

    /// `S_e`, empty beyond the configured list.
    pub fn set(&self, e: u32) -> SetSpec {
        self.sets.get(e as usize).cloned().unwrap_or_default()
    }

    /// Hex SHA-256 of the canonical JSON of everything that shapes a trace.
    pub fn hash(&self) -> String {
        let hashed = HashedConfig {
            roster: self.roster.to_file(),
            phi: &self.phi,
            sets: &self.sets,
            caps: &self.caps,
            tree_depth: self.tree_depth(),
            g_bound: self.g_bound,
            stability_window: self.stability_window,
        };
        let json = serde_json::to_vec(&hashed).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
