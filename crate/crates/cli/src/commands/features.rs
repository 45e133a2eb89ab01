use hardlinrl_core::agents::greedy_value;
use hardlinrl_core::cnf::Assignment;
use hardlinrl_core::mdp::{MdpError, MdpInstance, MdpState, NUM_ACTIONS};
use hardlinrl_core::polyfeat::{inner_product, theta_vector};
use serde::Serialize;

use super::Context;
use crate::args::FeaturesArgs;
use crate::bundle::{read_instance, InstanceFile};
use crate::error::CliError;
use crate::report::RunReport;

const LINEARITY_TOL: f64 = 1e-8;

#[derive(Serialize)]
struct FeaturesConfig {
    instance: InstanceFile,
    actions: Vec<usize>,
}

/// One nonzero coordinate: the monomial over `vars` (1-based).
#[derive(Serialize)]
struct Term {
    vars: Vec<usize>,
    coeff: f64,
}

#[derive(Serialize)]
struct ActionValue {
    action: usize,
    linear: f64,
    exact: f64,
}

fn sparse(inst: &MdpInstance, psi: &[f64]) -> Result<Vec<Term>, CliError> {
    let index = inst.subset_index()?;
    Ok(index
        .iter()
        .zip(psi)
        .filter(|(_, &c)| c != 0.0)
        .map(|(mask, &coeff)| Term {
            vars: (0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect(),
            coeff,
        })
        .collect())
}

fn value_of(inst: &MdpInstance, s: &MdpState, w: &Assignment) -> Result<f64, CliError> {
    Ok(if s.is_terminal() {
        inst.terminal_mean(s)?
    } else {
        greedy_value(inst, s, w)?
    })
}

pub fn run(ctx: &Context, a: &FeaturesArgs) -> Result<RunReport, CliError> {
    let cfg = FeaturesConfig {
        instance: read_instance(&a.instance)?,
        actions: a.actions.clone(),
    };
    let inst = cfg.instance.build(None)?;
    let mut s = inst.initial_state();
    for (step, &act) in cfg.actions.iter().enumerate() {
        if s.is_terminal() {
            return Err(CliError::Usage(format!("state is terminal before action {step}")));
        }
        if act >= NUM_ACTIONS {
            return Err(CliError::Usage(format!("action {act} is not in 0..{NUM_ACTIONS}")));
        }
        s = inst.transition(&s, act)?;
    }

    let psi = inst.features_state(&s)?;
    let mut report = RunReport::new("features", ctx.argv, &cfg, ctx.seed);
    report.value("state_digest", s.digest());
    report.value("terminal", s.terminal_kind());
    report.value("d", inst.feature_dim());
    report.value("psi", sparse(&inst, &psi)?);

    if let Some(w) = inst.wstar() {
        let theta = theta_vector(w, inst.subset_index()?).map_err(MdpError::from)?;
        let linear = inner_product(&psi, &theta).map_err(MdpError::from)?;
        let exact = if s.is_terminal() { 0.0 } else { greedy_value(&inst, &s, w)? };
        let mut worst = (linear - exact).abs();
        let mut actions = Vec::new();
        if !s.is_terminal() {
            for act in 0..NUM_ACTIONS {
                let psa = inst.features_state_action(&s, act)?;
                let q = inner_product(&psa, &theta).map_err(MdpError::from)?;
                let exact = value_of(&inst, &inst.transition(&s, act)?, w)?;
                worst = worst.max((q - exact).abs());
                actions.push(ActionValue { action: act, linear: q, exact });
            }
        }
        report.check("linearity", worst <= LINEARITY_TOL);
        report.value("value_linear", linear);
        report.value("value_exact", exact);
        report.value("q", actions);
        report.value("max_linearity_error", worst);
    }
    Ok(report)
}
