mod features;
mod gen;
mod reduce;
mod run;
mod transform;
mod verify;

use std::path::Path;

use hardlinrl_core::cnf::{parse_dimacs, Formula, ParseMode};

use crate::args::{Cli, Command};
use crate::config::FileConfig;
use crate::error::CliError;
use crate::report::RunReport;

/// Settings shared by every subcommand.
pub struct Context<'a> {
    pub file: FileConfig,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<&'a Path>,
    pub argv: &'a [String],
}

impl Context<'_> {
    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| CliError::Other(e.into()))
    }
}

pub fn execute(cli: &Cli, argv: &[String]) -> Result<RunReport, CliError> {
    let file = FileConfig::load(cli.common.config.as_deref())?;
    let jobs = cli.common.jobs.or(file.jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let ctx = Context {
        seed: cli.common.seed.or(file.seed).unwrap_or(0),
        jobs,
        out: cli.common.out.as_deref(),
        argv,
        file,
    };
    match &cli.command {
        Command::Gen(a) => gen::run(&ctx, a),
        Command::VerifyClaims(a) => verify::run(&ctx, a),
        Command::Run(a) => run::run(&ctx, a),
        Command::Reduce(a) => reduce::run(&ctx, a),
        Command::Transform(a) => transform::run(&ctx, a),
        Command::Features(a) => features::run(&ctx, a),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_formula(path: &Path, lenient: bool) -> Result<Formula, CliError> {
    let mode = if lenient { ParseMode::Lenient } else { ParseMode::Strict };
    parse_dimacs(&read_text(path)?, mode).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
