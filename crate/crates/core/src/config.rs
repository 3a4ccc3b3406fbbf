//! Run configuration, loadable from TOML.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::longtape::LongTapeConfig;
use crate::replicators::{self, ProgramParseError};
use crate::soup::{MutationPolicy, Placement, Topology};
use crate::substrate::{LanguageId, LONG_TAPE_LEN, PROGRAM_LEN};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("mutation rate {0} outside [0, 1]")]
    Rate(f64),
    #[error("a well-mixed soup needs an even number of programs, got {0}")]
    OddCount(usize),
    #[error("{0} needs {1}-byte programs")]
    ProgramLength(LanguageId, usize),
    #[error("long-tape runs support bff and forth-copy, not {0}")]
    LongTapeLanguage(LanguageId),
    #[error("dense window start {0} is after its end {1}")]
    DenseWindow(u64, u64),
    #[error("cannot read replicator `{path}`: {source}")]
    ReplicatorFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Replicator(#[from] ProgramParseError),
    #[error("replicator `{0}` is written for {1}, but the run uses {2}")]
    ReplicatorLanguage(String, LanguageId, LanguageId),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    TomlWrite(#[from] toml::ser::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    WellMixed,
    Grid2d,
    Longtape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub language: LanguageId,
    pub topology: TopologyKind,
    pub num_programs: usize,
    pub grid_width: usize,
    pub grid_height: usize,
    /// Wrap the grid into a torus instead of clipping at the edges.
    pub torus: bool,
    /// Bytes per program.
    pub tape_len: usize,
    /// Epochs, or generations for long-tape runs.
    pub epochs: u64,
    /// Instruction budget per interaction; the language default if unset.
    pub budget: Option<u64>,
    pub mutation_rate: f64,
    pub seed: u64,
    pub trace: bool,
    pub stats_every: u64,
    /// Sample stats every epoch inside `[start, end]`.
    pub dense_window: Option<[u64; 2]>,
    /// 0 disables snapshots.
    pub snapshot_every: u64,
    pub out: Option<PathBuf>,
    /// Built-in replicator name or path to a program file.
    pub seed_replicator: Option<String>,
    pub placement: Placement,
    pub fixed_shuffle: bool,
    pub workers: usize,
    /// Stop this many epochs after the first transition.
    pub stop_after_transition: Option<u64>,
    pub transition_threshold: f64,
    pub long_tape: LongTapeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            language: LanguageId::Bff,
            topology: TopologyKind::WellMixed,
            num_programs: 1 << 17,
            grid_width: 240,
            grid_height: 135,
            torus: false,
            tape_len: PROGRAM_LEN,
            epochs: 16_000,
            budget: None,
            mutation_rate: MutationPolicy::default().rate,
            seed: 0,
            trace: false,
            stats_every: 10,
            dense_window: None,
            snapshot_every: 0,
            out: None,
            seed_replicator: None,
            placement: Placement::Random,
            fixed_shuffle: false,
            workers: 1,
            stop_after_transition: None,
            transition_threshold: crate::analysis::DEFAULT_TRANSITION_THRESHOLD,
            long_tape: LongTapeConfig { tape_len: LONG_TAPE_LEN, ..LongTapeConfig::default() },
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn budget(&self) -> u64 {
        self.budget.unwrap_or_else(|| self.language.default_budget())
    }

    pub fn mutation(&self) -> MutationPolicy {
        MutationPolicy::with_rate(self.mutation_rate)
    }

    pub fn soup_topology(&self) -> Topology {
        match self.topology {
            TopologyKind::Grid2d => {
                Topology::Grid2d { width: self.grid_width, height: self.grid_height, wrap: self.torus }
            }
            _ => Topology::WellMixed,
        }
    }

    pub fn program_count(&self) -> usize {
        match self.topology {
            TopologyKind::WellMixed => self.num_programs,
            TopologyKind::Grid2d => self.grid_width * self.grid_height,
            TopologyKind::Longtape => 1,
        }
    }

    pub fn long_tape_config(&self) -> LongTapeConfig {
        LongTapeConfig { language: self.language, ..self.long_tape }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(ConfigError::Rate(self.mutation_rate));
        }
        if self.stats_every == 0 {
            return Err(ConfigError::NotPositive("stats_every"));
        }
        if self.workers == 0 {
            return Err(ConfigError::NotPositive("workers"));
        }
        if let Some([a, b]) = self.dense_window {
            if a > b {
                return Err(ConfigError::DenseWindow(a, b));
            }
        }
        match self.topology {
            TopologyKind::WellMixed => {
                if self.num_programs == 0 {
                    return Err(ConfigError::NotPositive("num_programs"));
                }
                if !self.num_programs.is_multiple_of(2) {
                    return Err(ConfigError::OddCount(self.num_programs));
                }
            }
            TopologyKind::Grid2d => {
                if self.grid_width == 0 || self.grid_height == 0 {
                    return Err(ConfigError::NotPositive("grid dimensions"));
                }
            }
            TopologyKind::Longtape => {
                if !matches!(self.language, LanguageId::Bff | LanguageId::ForthCopy) {
                    return Err(ConfigError::LongTapeLanguage(self.language));
                }
                let lt = &self.long_tape;
                if lt.tape_len == 0 {
                    return Err(ConfigError::NotPositive("long_tape.tape_len"));
                }
                if lt.mutation_interval == 0 {
                    return Err(ConfigError::NotPositive("long_tape.mutation_interval"));
                }
                return Ok(());
            }
        }
        if self.tape_len == 0 {
            return Err(ConfigError::NotPositive("tape_len"));
        }
        if self.language == LanguageId::ForthSoup && self.tape_len != PROGRAM_LEN {
            return Err(ConfigError::ProgramLength(self.language, PROGRAM_LEN));
        }
        Ok(())
    }

    /// Resolves `seed_replicator` to bytes. Built-in names are checked
    /// against the run language; files are parsed in the run language's
    /// text format.
    pub fn load_replicator(&self) -> Result<Option<Vec<u8>>, ConfigError> {
        let Some(name) = &self.seed_replicator else {
            return Ok(None);
        };
        if let Some((lang, bytes)) = replicators::by_name(name) {
            if lang != self.language {
                return Err(ConfigError::ReplicatorLanguage(name.clone(), lang, self.language));
            }
            return Ok(Some(bytes));
        }
        let text = std::fs::read_to_string(name)
            .map_err(|source| ConfigError::ReplicatorFile { path: name.clone(), source })?;
        Ok(Some(replicators::parse_program(self.language, &text)?))
    }
}
