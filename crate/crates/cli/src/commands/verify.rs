use hardlinrl_core::agents::sweep_tree;
use hardlinrl_core::mdp::{MdpInstance, Mode};
use hardlinrl_core::random::{planted_3cnf, random_assignment};
use hardlinrl_core::reward::{self, ClaimReport};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::Context;
use crate::args::VerifyArgs;
use crate::config::ParamSettings;
use crate::error::CliError;
use crate::report::{stream_rng, RunReport};

const LINEARITY_TOL: f64 = 1e-8;
const OPTIMALITY_TOL: f64 = 1e-9;
const SWEEP_BUDGET: u64 = 50_000_000;

#[derive(Serialize)]
struct VerifyConfig {
    params: ParamSettings,
    v: Vec<usize>,
    v_cap: usize,
    sweep_instances: usize,
    sweep_v: usize,
    sweep_h: usize,
}

#[derive(Serialize)]
struct SweepSummary {
    instance: usize,
    dimacs: String,
    wstar: String,
    states: u64,
    max_linearity_error: f64,
    max_optimality_gap: f64,
    root_optimal: f64,
}

pub fn run(ctx: &Context, a: &VerifyArgs) -> Result<RunReport, CliError> {
    let f = &ctx.file;
    let cfg = VerifyConfig {
        params: ParamSettings::resolve(&f.params(&a.params)),
        v: a.v.clone().or_else(|| f.v.clone()).unwrap_or_else(|| vec![10, 100]),
        v_cap: a.v_cap.or(f.v_cap).unwrap_or(64),
        sweep_instances: a.sweep_instances.or(f.sweep_instances).unwrap_or(5),
        sweep_v: a.sweep_v.or(f.sweep_v).unwrap_or(4),
        sweep_h: a.sweep_h.or(f.sweep_h).unwrap_or(2),
    };
    let mut report = RunReport::new("verify-claims", ctx.argv, &cfg, ctx.seed);
    let pool = ctx.pool()?;

    // Parameter errors surface before any grid work.
    let grid_params = cfg.v.iter().map(|&v| cfg.params.for_v(v)).collect::<Result<Vec<_>, _>>()?;
    let claims: Vec<(ClaimReport, ClaimReport)> = pool.install(|| {
        grid_params
            .par_iter()
            .map(|p| (reward::verify_claim_range(p), reward::verify_claim_monotone_step(p)))
            .collect()
    });
    for (v, (range, mono)) in cfg.v.iter().zip(claims) {
        report.check(format!("range[v={v}]"), range.pass);
        report.check(format!("monotone_step[v={v}]"), mono.pass);
        report.value(&format!("range[v={v}]"), range);
        report.value(&format!("monotone_step[v={v}]"), mono);
    }

    if cfg.v_cap > 0 {
        // Validity does not improve as v shrinks, so checking the cap suffices.
        cfg.params.for_v(cfg.v_cap)?;
        let (reports, v_min) =
            reward::monotone_step_v_min(cfg.v_cap, |v| cfg.params.for_v(v).expect("validated at the cap"));
        report.check("monotone_step_v_min", v_min.is_some());
        let failing: Vec<usize> = reports.iter().filter(|r| !r.pass).map(|r| r.params.v).collect();
        let counterexamples: Vec<_> = reports.iter().filter_map(|r| r.counterexample.clone()).collect();
        report.value("monotone_step_v_min", v_min);
        report.value("monotone_step_failing_v", failing);
        report.value("monotone_step_counterexamples", counterexamples);
    }

    if cfg.sweep_instances > 0 {
        let sweeps = pool.install(|| {
            (0..cfg.sweep_instances)
                .into_par_iter()
                .map(|i| sweep_one(&cfg, ctx.seed, i))
                .collect::<Result<Vec<_>, CliError>>()
        })?;
        let lin = sweeps.iter().map(|s| s.max_linearity_error).fold(0.0, f64::max);
        let gap = sweeps.iter().map(|s| s.max_optimality_gap).fold(0.0, f64::max);
        report.check("linearity", lin <= LINEARITY_TOL);
        report.check("greedy_optimality", gap <= OPTIMALITY_TOL);
        report.value("max_linearity_error", lin);
        report.value("max_optimality_gap", gap);
        report.value("sweeps", sweeps);
    }
    Ok(report)
}

/// Planted instance `i` of the sweep, drawn from its own stream until the
/// instance builds and its root is not terminal.
fn sweep_one(cfg: &VerifyConfig, seed: u64, i: usize) -> Result<SweepSummary, CliError> {
    let v = cfg.sweep_v;
    let params = cfg.params.for_v(v)?.with_rounds(cfg.sweep_h)?;
    let mut rng = stream_rng(seed, 1 + i as u64);
    for _ in 0..10_000 {
        let w = random_assignment(&mut rng, v);
        let m = rng.gen_range(v..=2 * v);
        let Some(f) = planted_3cnf(&mut rng, &w, m, params.b) else {
            continue;
        };
        let Ok(inst) = MdpInstance::build(f.clone(), params.clone(), Some(w.clone()), Mode::Full) else {
            continue;
        };
        if inst.initial_state().is_terminal() {
            continue;
        }
        let rep = sweep_tree(&inst, SWEEP_BUDGET)?;
        return Ok(SweepSummary {
            instance: i,
            dimacs: f.to_dimacs(),
            wstar: w.to_bit_string(),
            states: rep.states,
            max_linearity_error: rep.max_linearity_error,
            max_optimality_gap: rep.max_optimality_gap,
            root_optimal: rep.root_optimal,
        });
    }
    Err(CliError::Refused(format!(
        "no usable planted instance with v = {v} after 10000 draws"
    )))
}
