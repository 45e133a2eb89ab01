//! `--config` files: JSON objects whose keys mirror the long flag names.
//! Flags given on the command line win over the file, the file over the
//! built-in defaults.

use std::path::Path;

use hardlinrl_core::reward::{self, RewardParams};
use serde::{Deserialize, Serialize};

use crate::args::{AgentKind, ModeArg, ParamArgs};
use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub b: Option<usize>,
    pub rounds: Option<usize>,
    pub mode: Option<ModeArg>,
    pub agent: Option<AgentKind>,
    pub episodes: Option<usize>,
    pub budget: Option<u64>,
    pub v: Option<Vec<usize>>,
    pub v_cap: Option<usize>,
    pub sweep_instances: Option<usize>,
    pub sweep_v: Option<usize>,
    pub sweep_h: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Flag values layered over this file's values.
    pub fn params(&self, flags: &ParamArgs) -> ParamArgs {
        ParamArgs {
            p: flags.p.or(self.p),
            q: flags.q.or(self.q),
            alpha: flags.alpha.or(self.alpha),
            epsilon: flags.epsilon.or(self.epsilon),
            b: flags.b.or(self.b),
            rounds: flags.rounds.or(self.rounds),
        }
    }
}

/// Resolved reward settings, recorded in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSettings {
    pub p: u32,
    pub q: u32,
    pub alpha: f64,
    pub epsilon: f64,
    pub b: usize,
    pub rounds: Option<usize>,
}

impl ParamSettings {
    pub fn resolve(a: &ParamArgs) -> Self {
        Self {
            p: a.p.unwrap_or(reward::DEFAULT_P),
            q: a.q.unwrap_or(reward::DEFAULT_Q),
            alpha: a.alpha.unwrap_or(reward::DEFAULT_ALPHA),
            epsilon: a.epsilon.unwrap_or(reward::DEFAULT_EPSILON),
            b: a.b.unwrap_or(reward::DEFAULT_B),
            rounds: a.rounds,
        }
    }

    pub fn for_v(&self, v: usize) -> Result<RewardParams, CliError> {
        let params = RewardParams::new(self.p, self.q, self.alpha, v, self.epsilon, self.b)?;
        Ok(match self.rounds {
            Some(h) => params.with_rounds(h)?,
            None => params,
        })
    }
}
