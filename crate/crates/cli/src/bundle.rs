//! Instance bundles: a directory holding `instance.json` (everything needed
//! to rebuild the MDP) and `metadata.json` (derived sizes and flags).

use std::fs;
use std::path::{Path, PathBuf};

use hardlinrl_core::cnf::{parse_dimacs, Assignment, ParseMode};
use hardlinrl_core::mdp::{InstanceOptions, MdpInstance, Mode};
use hardlinrl_core::reward::RewardParams;
use serde::{Deserialize, Serialize};

use crate::args::ModeArg;
use crate::error::CliError;

pub const INSTANCE_FORMAT: &str = "hardlinrl.instance/1";
pub const INSTANCE_FILE: &str = "instance.json";
pub const METADATA_FILE: &str = "metadata.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: String,
    pub dimacs: String,
    pub params: RewardParams,
    pub mode: ModeArg,
    /// Satisfying assignment as a 0/1 string; absent for unsatisfiable input.
    pub wstar: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub v: usize,
    pub m: usize,
    pub b: usize,
    pub b_achieved: usize,
    pub h: usize,
    pub horizon: usize,
    pub d: u128,
    pub satisfiable: bool,
    /// No satisfying assignment, so every reward is zero.
    pub zero_reward: bool,
    pub wstar: Option<String>,
    pub gap_threshold: usize,
    pub transformed: bool,
}

impl InstanceFile {
    pub fn build(&self, mode: Option<ModeArg>) -> Result<MdpInstance, CliError> {
        let f = parse_dimacs(&self.dimacs, ParseMode::Strict)?;
        let wstar = self
            .wstar
            .as_deref()
            .map(|s| Assignment::from_bit_string(s).ok_or_else(|| CliError::Usage(format!("bad wstar string {s:?}"))))
            .transpose()?;
        let mode: Mode = mode.unwrap_or(self.mode).into();
        // Without a satisfying assignment the instance is built in simulator
        // form, which skips the exhaustive search, then switched back; its
        // rewards are zero in either mode.
        let build_mode = if wstar.is_some() { mode } else { Mode::Simulator };
        let inst = MdpInstance::build_with(
            f,
            self.params.clone(),
            InstanceOptions {
                mode: build_mode,
                wstar,
                ..InstanceOptions::default()
            },
        )?;
        Ok(inst.with_mode(mode))
    }
}

pub fn write_bundle(dir: &Path, inst: &InstanceFile, meta: &Metadata) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for (name, text) in [
        (INSTANCE_FILE, serde_json::to_string_pretty(inst)),
        (METADATA_FILE, serde_json::to_string_pretty(meta)),
    ] {
        let path = dir.join(name);
        let text = text.expect("bundle files serialize") + "\n";
        fs::write(&path, text).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

/// Accepts the bundle directory or the instance file itself.
pub fn read_instance(path: &Path) -> Result<InstanceFile, CliError> {
    let file: PathBuf = if path.is_dir() { path.join(INSTANCE_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file).map_err(|e| CliError::io(&file, e))?;
    let inst: InstanceFile =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
    if inst.format != INSTANCE_FORMAT {
        return Err(CliError::Usage(format!(
            "{}: unknown format {:?}",
            file.display(),
            inst.format
        )));
    }
    Ok(inst)
}
