use std::io::Write;

use hardlinrl_core::agents::{argmax, exact_value_dp, greedy_action, rollout, OracleError, StepRecord};
use hardlinrl_core::mdp::{MdpInstance, MdpState, Mode, OracleSession, QueryCounters, TerminalKind, NUM_ACTIONS};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Context;
use crate::args::{AgentKind, ModeArg, RunArgs};
use crate::bundle::{read_instance, InstanceFile};
use crate::error::CliError;
use crate::report::{stream_rng, stream_seed, RunReport};

#[derive(Serialize)]
struct RunConfig {
    instance: InstanceFile,
    agent: AgentKind,
    episodes: usize,
    mode: ModeArg,
    budget: u64,
}

#[derive(Serialize)]
struct Episode {
    episode: usize,
    steps: usize,
    terminal: Option<TerminalKind>,
    /// Sum of the sampled rewards.
    sampled_return: f64,
    /// Exact mean of the terminal reward (full mode with a known `w*`).
    expected_return: Option<f64>,
    #[serde(skip)]
    records: Vec<StepRecord>,
    #[serde(skip)]
    counters: QueryCounters,
}

#[derive(Serialize)]
struct TrajectoryLine<'a> {
    episode: usize,
    #[serde(flatten)]
    record: &'a StepRecord,
}

#[derive(Serialize)]
struct EpisodeEnd {
    episode: usize,
    terminal: Option<TerminalKind>,
    sampled_return: f64,
    expected_return: Option<f64>,
}

pub fn run(ctx: &Context, a: &RunArgs) -> Result<RunReport, CliError> {
    let file = read_instance(&a.instance)?;
    let cfg = RunConfig {
        agent: a.agent.or(ctx.file.agent).unwrap_or(AgentKind::Greedy),
        episodes: a.episodes.or(ctx.file.episodes).unwrap_or(1),
        mode: a.mode.or(ctx.file.mode).unwrap_or(file.mode),
        budget: a.budget.or(ctx.file.budget).unwrap_or(1_000_000),
        instance: file,
    };
    let inst = cfg.instance.build(Some(cfg.mode))?;
    if cfg.agent == AgentKind::Greedy && inst.wstar().is_none() {
        return Err(CliError::Usage("the greedy agent needs a satisfying assignment".into()));
    }
    let episodes: Vec<Episode> = ctx.pool()?.install(|| {
        (0..cfg.episodes)
            .into_par_iter()
            .map(|e| episode(&inst, &cfg, ctx.seed, e))
            .collect::<Result<_, CliError>>()
    })?;

    if let Some(path) = &a.trajectories {
        write_trajectories(path, &episodes)?;
    }
    let mut report = RunReport::new("run", ctx.argv, &cfg, ctx.seed);
    let mut counters = QueryCounters::default();
    for ep in &episodes {
        counters.transitions += ep.counters.transitions;
        counters.rewards += ep.counters.rewards;
        counters.features += ep.counters.features;
    }
    let n = episodes.len().max(1) as f64;
    report.value("mean_sampled_return", episodes.iter().map(|e| e.sampled_return).sum::<f64>() / n);
    if episodes.iter().all(|e| e.expected_return.is_some()) {
        report.value(
            "mean_expected_return",
            episodes.iter().filter_map(|e| e.expected_return).sum::<f64>() / n,
        );
    }
    report.value("episodes", &episodes);
    report.counters = Some(counters);
    Ok(report)
}

fn episode(inst: &MdpInstance, cfg: &RunConfig, seed: u64, e: usize) -> Result<Episode, CliError> {
    let mut session = OracleSession::new(inst, stream_seed(seed, 2 * e as u64));
    let mut rng = stream_rng(seed, 2 * e as u64 + 1);
    let mut choose = |o: &mut OracleSession<'_>, s: &MdpState, _: usize| -> Result<usize, OracleError> {
        let inst = o.instance();
        match cfg.agent {
            AgentKind::Greedy => Ok(greedy_action(inst, s, inst.wstar().expect("checked above"))?),
            AgentKind::Random => Ok(rng.gen_range(0..NUM_ACTIONS)),
            AgentKind::Optimal => optimal_action(inst, s, cfg.budget),
        }
    };
    let traj = rollout(&mut session, &mut choose)?;
    let last = traj.last_state();
    let expected_return = match (inst.mode(), inst.wstar()) {
        (Mode::Full, Some(_)) => Some(inst.terminal_mean(last)?),
        _ => None,
    };
    Ok(Episode {
        episode: e,
        steps: traj.records.len(),
        terminal: last.terminal_kind(),
        sampled_return: traj.total_reward,
        expected_return,
        counters: session.counters,
        records: traj.records,
    })
}

/// Argmax over actions of the exact `Q*`; refuses beyond `budget` nodes.
fn optimal_action(inst: &MdpInstance, s: &MdpState, budget: u64) -> Result<usize, OracleError> {
    let mut q = [0.0; NUM_ACTIONS];
    for (a, qa) in q.iter_mut().enumerate() {
        let t = inst.transition(s, a)?;
        *qa = if t.is_terminal() {
            inst.terminal_mean(&t)?
        } else {
            exact_value_dp(inst, &t, budget)?
        };
    }
    Ok(argmax(&q))
}

fn write_trajectories(path: &std::path::Path, episodes: &[Episode]) -> Result<(), CliError> {
    let io = |e| CliError::io(path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for ep in episodes {
        for record in &ep.records {
            let line = serde_json::to_string(&TrajectoryLine {
                episode: ep.episode,
                record,
            })
            .expect("records serialize");
            writeln!(w, "{line}").map_err(io)?;
        }
        let end = serde_json::to_string(&EpisodeEnd {
            episode: ep.episode,
            terminal: ep.terminal,
            sampled_return: ep.sampled_return,
            expected_return: ep.expected_return,
        })
        .expect("records serialize");
        writeln!(w, "{end}").map_err(io)?;
    }
    w.flush().map_err(io)
}
