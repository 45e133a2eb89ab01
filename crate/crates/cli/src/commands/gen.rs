use hardlinrl_core::cnf::{self, occurrence_bound, Assignment, CnfError};
use hardlinrl_core::gapsat::bounded_occurrence_transform;
use serde::Serialize;

use super::{read_formula, Context};
use crate::args::{GenArgs, ModeArg};
use crate::bundle::{write_bundle, InstanceFile, Metadata, INSTANCE_FORMAT};
use crate::config::ParamSettings;
use crate::error::CliError;
use crate::report::RunReport;

#[derive(Serialize)]
struct GenConfig {
    dimacs: String,
    params: ParamSettings,
    mode: ModeArg,
    wstar: Option<String>,
    lenient: bool,
    transform: bool,
}

pub fn run(ctx: &Context, a: &GenArgs) -> Result<RunReport, CliError> {
    let dir = ctx
        .out
        .ok_or_else(|| CliError::Usage("gen needs --out DIR for the bundle".into()))?;
    let input = read_formula(&a.cnf, a.lenient)?;
    let settings = ParamSettings::resolve(&ctx.file.params(&a.params));
    let mode = a.mode.or(ctx.file.mode).unwrap_or(ModeArg::Full);
    let given = a
        .wstar
        .as_deref()
        .map(|s| Assignment::from_bit_string(s).ok_or_else(|| CliError::Usage(format!("--wstar {s:?} is not a 0/1 string"))))
        .transpose()?;

    let (f, given) = if a.transform {
        let t = bounded_occurrence_transform(&input, settings.b)?;
        let lifted = given.map(|w| t.lift(&w));
        (t.formula, lifted)
    } else {
        (input.clone(), given)
    };
    f.check_strict().map_err(|e| {
        CliError::Usage(format!("{e}; the MDP needs strict 3-CNF (try --transform)"))
    })?;

    let wstar = match given {
        Some(w) => {
            cnf::check_assignment(&f, &w)?;
            if cnf::satisfied_count(&f, &w) != f.num_clauses() {
                return Err(CliError::Usage("--wstar does not satisfy the formula".into()));
            }
            Some(w)
        }
        None => cnf::brute_force_sat(&f, cnf::DEFAULT_EXHAUSTIVE_LIMIT).map_err(|e| match e {
            CnfError::TooManyVariables { v, limit } => CliError::Refused(format!(
                "cannot decide satisfiability: {v} variables exceed the exhaustive limit {limit}; pass --wstar"
            )),
            e => e.into(),
        })?,
    };

    let params = settings.for_v(f.num_vars())?;
    let file = InstanceFile {
        format: INSTANCE_FORMAT.into(),
        dimacs: f.to_dimacs(),
        params: params.clone(),
        mode,
        wstar: wstar.as_ref().map(Assignment::to_bit_string),
    };
    let inst = file.build(None)?;
    let meta = Metadata {
        v: f.num_vars(),
        m: f.num_clauses(),
        b: params.b,
        b_achieved: occurrence_bound(&f),
        h: params.h,
        horizon: params.horizon,
        d: inst.feature_dim(),
        satisfiable: wstar.is_some(),
        zero_reward: wstar.is_none(),
        wstar: file.wstar.clone(),
        gap_threshold: inst.gap_threshold(),
        transformed: a.transform,
    };
    write_bundle(dir, &file, &meta)?;

    let config = GenConfig {
        dimacs: input.to_dimacs(),
        params: settings,
        mode,
        wstar: a.wstar.clone(),
        lenient: a.lenient,
        transform: a.transform,
    };
    let mut report = RunReport::new("gen", ctx.argv, &config, ctx.seed);
    report.value("bundle", dir.display().to_string());
    report.value("metadata", &meta);
    Ok(report)
}
