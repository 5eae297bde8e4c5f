//! Re-solving one instance across a list of `a:b` weightings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::exact::{search_space, solve_offline_exact_with, ExactConfig};
use crate::heuristic::aps_offline;
use crate::instance::{accuracy_term, cost_term, objective_value, ProblemInstance, SamplingPlan, WEIGHT_SUM_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    /// Exact when the instance has a grid and fits the search limit, else APS.
    #[default]
    Auto,
    Exact,
    Aps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Exact,
    Aps,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Aps => "aps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub a: f64,
    pub b: f64,
    pub solver: SolverKind,
    pub accuracy_term: f64,
    pub cost_term: f64,
    pub objective: f64,
    #[serde(skip)]
    pub plan: SamplingPlan,
}

pub fn sweep_ab(inst: &ProblemInstance, ratios: &[(f64, f64)]) -> Result<Vec<SweepRow>, SolveError> {
    sweep_ab_with(inst, ratios, SolverChoice::Auto, &ExactConfig::default())
}

/// Rows come back sorted by `a` ascending (equivalently `a/b` ascending).
pub fn sweep_ab_with(
    inst: &ProblemInstance,
    ratios: &[(f64, f64)],
    choice: SolverChoice,
    cfg: &ExactConfig,
) -> Result<Vec<SweepRow>, SolveError> {
    let kind = match choice {
        SolverChoice::Exact => SolverKind::Exact,
        SolverChoice::Aps => SolverKind::Aps,
        SolverChoice::Auto => match search_space(inst) {
            Some(n) if n <= cfg.search_limit => SolverKind::Exact,
            _ => SolverKind::Aps,
        },
    };
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
    sorted
        .into_iter()
        .map(|(a, b)| {
            let inst = inst.with_params(inst.params().with_weights(a, b)?);
            let plan = match kind {
                SolverKind::Exact => solve_offline_exact_with(&inst, cfg)?.plan,
                SolverKind::Aps => aps_offline(&inst)?,
            };
            Ok(SweepRow {
                a,
                b,
                solver: kind,
                accuracy_term: accuracy_term(&plan, &inst)?,
                cost_term: cost_term(&plan, &inst)?,
                objective: objective_value(&plan, &inst)?,
                plan,
            })
        })
        .collect()
}

/// `a,b,solver,accuracy_term,cost_term,objective`
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("a,b,solver,accuracy_term,cost_term,objective\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.a,
            r.b,
            r.solver.as_str(),
            r.accuracy_term,
            r.cost_term,
            r.objective
        );
    }
    out
}

/// Parses `0.2:0.8,0.5:0.5`. Each pair must be non-negative and sum to 1.
pub fn parse_ratios(text: &str) -> Result<Vec<(f64, f64)>, String> {
    let ratios = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (a, b) = item.split_once(':').ok_or_else(|| format!("ratio `{item}` is not of the form a:b"))?;
            let a: f64 = a.trim().parse().map_err(|_| format!("bad weight `{a}` in `{item}`"))?;
            let b: f64 = b.trim().parse().map_err(|_| format!("bad weight `{b}` in `{item}`"))?;
            if a < 0.0 || b < 0.0 || (a + b - 1.0).abs() > WEIGHT_SUM_EPS {
                return Err(format!("ratio `{item}` must be non-negative and sum to 1"));
            }
            Ok((a, b))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ratios.is_empty() {
        return Err("ratio list is empty".into());
    }
    Ok(ratios)
}
