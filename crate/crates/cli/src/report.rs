//! Run reports and seeding.

use std::collections::BTreeMap;

use hardlinrl_core::mdp::QueryCounters;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const REPORT_FORMAT: &str = "hardlinrl.run_report/1";

/// JSON schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/run_report.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub command: String,
    pub argv: Vec<String>,
    /// Fully resolved configuration; `config_hash` is its SHA-256.
    pub config: Value,
    pub config_hash: String,
    pub seed: u64,
    pub passed: Vec<String>,
    pub failed: Vec<String>,
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counters: Option<QueryCounters>,
    /// Only present with `--timing`, so default reports are byte-identical
    /// across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wallclock_ms: Option<u64>,
}

impl RunReport {
    pub fn new<C: Serialize>(command: &str, argv: &[String], config: &C, seed: u64) -> Self {
        let config = serde_json::to_value(config).expect("configs serialize");
        Self {
            format: REPORT_FORMAT.to_string(),
            command: command.to_string(),
            argv: argv.to_vec(),
            config_hash: config_hash(&config),
            config,
            seed,
            passed: Vec::new(),
            failed: Vec::new(),
            values: BTreeMap::new(),
            counters: None,
            wallclock_ms: None,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, ok: bool) -> bool {
        if ok {
            self.passed.push(name.into());
        } else {
            self.failed.push(name.into());
        }
        ok
    }

    pub fn value(&mut self, key: &str, v: impl Serialize) {
        self.values
            .insert(key.to_string(), serde_json::to_value(v).expect("values serialize"));
    }

    pub fn all_passed(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// SHA-256 of the compact JSON encoding (object keys sorted).
pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("values serialize");
    format!("{:x}", Sha256::digest(bytes))
}

/// Generator for sub-task `stream` of a run: one ChaCha key from the seed,
/// one stream per sub-task, so parallel work does not change results.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A 64-bit seed for sub-task `stream`.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    use rand::RngCore;
    stream_rng(seed, stream).next_u64()
}
