use hardlinrl_core::agents::{a_sat, GreedyLearner, RandomLearner, SatLearner};
use hardlinrl_core::cnf;
use serde::Serialize;

use super::{read_formula, Context};
use crate::args::{AgentKind, ReduceArgs};
use crate::config::ParamSettings;
use crate::error::CliError;
use crate::report::{stream_seed, RunReport};

#[derive(Serialize)]
struct ReduceConfig {
    dimacs: String,
    agent: AgentKind,
    budget: u64,
    episodes: usize,
    params: ParamSettings,
}

pub fn run(ctx: &Context, a: &ReduceArgs) -> Result<RunReport, CliError> {
    let f = read_formula(&a.cnf, false)?;
    let cfg = ReduceConfig {
        dimacs: f.to_dimacs(),
        agent: a.agent.or(ctx.file.agent).unwrap_or(AgentKind::Greedy),
        budget: a.budget.or(ctx.file.budget).unwrap_or(1_000_000),
        episodes: a.episodes.or(ctx.file.episodes).unwrap_or(10),
        params: ParamSettings::resolve(&ctx.file.params(&a.params)),
    };
    let params = cfg.params.for_v(f.num_vars())?;
    let mut learner: Box<dyn SatLearner> = match cfg.agent {
        AgentKind::Greedy => Box::new(GreedyLearner::exhaustive(&f, cnf::DEFAULT_EXHAUSTIVE_LIMIT)?),
        AgentKind::Random => Box::new(RandomLearner::new(stream_seed(ctx.seed, 0), cfg.episodes)),
        AgentKind::Optimal => {
            return Err(CliError::Usage(
                "the optimal agent needs exact rewards, which the reduction's simulator does not pay".into(),
            ))
        }
    };
    let rep = a_sat(&f, &params, learner.as_mut(), cfg.budget, stream_seed(ctx.seed, 1))?;

    let mut report = RunReport::new("reduce", ctx.argv, &cfg, ctx.seed);
    report.value("answer", rep.answer);
    report.value("witness", rep.witness.as_ref().map(|w| w.to_bit_string()));
    report.value("queries", rep.queries);
    report.value("budget_exhausted", rep.budget_exhausted);
    report.value("learner", &rep.learner);
    report.value("h", params.h);
    report.value("horizon", params.horizon);
    report.counters = Some(rep.counters);
    Ok(report)
}
