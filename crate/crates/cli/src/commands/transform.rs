use hardlinrl_core::cnf::{self, max_sat_exceeds, occurrence_bound, Formula};
use hardlinrl_core::gapsat::bounded_occurrence_transform;
use hardlinrl_core::reward;
use serde::Serialize;

use super::{read_formula, Context};
use crate::args::TransformArgs;
use crate::error::CliError;
use crate::report::RunReport;

const SEARCH_BUDGET: u64 = 100_000_000;

#[derive(Serialize)]
struct TransformConfig {
    dimacs: String,
    b: usize,
    lenient: bool,
    check: bool,
}

#[derive(Serialize)]
struct Size {
    v: usize,
    m: usize,
    occurrence_bound: usize,
}

fn size(f: &Formula) -> Size {
    Size {
        v: f.num_vars(),
        m: f.num_clauses(),
        occurrence_bound: occurrence_bound(f),
    }
}

pub fn run(ctx: &Context, a: &TransformArgs) -> Result<RunReport, CliError> {
    let f = read_formula(&a.cnf, a.lenient)?;
    let cfg = TransformConfig {
        dimacs: f.to_dimacs(),
        b: a.b.or(ctx.file.b).unwrap_or(reward::DEFAULT_B),
        lenient: a.lenient,
        check: a.check,
    };
    let t = bounded_occurrence_transform(&f, cfg.b)?;
    let out = &t.formula;
    if let Some(path) = &a.out_cnf {
        std::fs::write(path, out.to_dimacs()).map_err(|e| CliError::io(path, e))?;
    }

    let mut report = RunReport::new("transform", ctx.argv, &cfg, ctx.seed);
    let ratio = t.size_ratio(&f);
    report.check("occurrence_bound", occurrence_bound(out) <= cfg.b);
    report.check("strict", out.is_strict());
    report.check("size_ratio", ratio <= t.size_constant as f64);
    report.value("input", size(&f));
    report.value("output", size(out));
    report.value("size_ratio", ratio);
    report.value("size_constant", t.size_constant);
    if a.out_cnf.is_none() {
        report.value("dimacs", out.to_dimacs());
    }

    if a.check {
        let input_sat = cnf::brute_force_sat(&f, cnf::DEFAULT_EXHAUSTIVE_LIMIT)?;
        let output_sat = max_sat_exceeds(out, out.num_clauses() - 1, SEARCH_BUDGET)?;
        report.check("satisfiability_equivalence", input_sat.is_some() == output_sat.is_some());
        // Lifting a satisfying input assignment must satisfy the output.
        if let Some(w) = &input_sat {
            report.check("lift", cnf::satisfied_count(out, &t.lift(w)) == out.num_clauses());
        }
        let (input_max, _) = cnf::brute_force_max_sat(&f, cnf::DEFAULT_EXHAUSTIVE_LIMIT)?;
        let cap = input_max + out.num_clauses() - f.num_clauses();
        let above = max_sat_exceeds(out, cap, SEARCH_BUDGET)?;
        report.check("max_sat_bound", above.is_none());
        report.value("input_max_sat", input_max);
        report.value("output_max_sat_cap", cap);
    }
    Ok(report)
}
