//! SQL text to optimization trace: parse, build one graph per block, plan
//! CTE blocks first so their row estimates feed the blocks that read them,
//! and pick the planner for each block by relation count.

use std::collections::HashMap;

use thiserror::Error;

use crate::catalog::Catalog;
use crate::cost::CostParams;
use crate::dp::{plan_dp, DpError};
use crate::geqo::{run_geqo, GeqoError};
use crate::query::{build_block_graph, parse_query, QueryError, QueryGraph};
use crate::trace::{OptimizationTrace, PlannerRun, RelationRef, RunKind, TraceSink};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Geqo(#[from] GeqoError),
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Query(e) => e.code(),
            PipelineError::Dp(_) | PipelineError::Geqo(_) => "internal_error",
        }
    }

    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            PipelineError::Query(e) => e.position(),
            _ => None,
        }
    }

    /// Client errors are caused by the request; the rest are planner faults.
    pub fn is_client_error(&self) -> bool {
        matches!(self, PipelineError::Query(_))
    }
}

/// The planner a block of `n` relations is routed to.
pub fn planner_kind(n: usize, params: &CostParams) -> RunKind {
    if n >= params.geqo_threshold as usize && n >= 2 {
        RunKind::Geqo
    } else {
        RunKind::Dp
    }
}

/// Plans one block with the planner chosen by [`planner_kind`].
pub fn plan_block(
    graph: &QueryGraph,
    params: &CostParams,
    sink: &mut dyn TraceSink,
) -> Result<PlannerRun, PipelineError> {
    let relations = graph
        .rels
        .iter()
        .map(|r| RelationRef {
            ordinal: r.ordinal,
            alias: r.alias.clone(),
            relation: r.relation.clone(),
            cte: r.from_cte,
        })
        .collect();
    let mut warnings = graph.hints.warnings.clone();
    let kind = planner_kind(graph.len(), params);
    let run = match kind {
        RunKind::Dp => {
            let out = plan_dp(graph, params, sink)?;
            warnings.extend(out.warnings);
            PlannerRun {
                label: graph.label.clone(),
                kind,
                relations,
                plan: out.plan,
                dp: Some(out.trace),
                geqo: None,
                warnings,
            }
        }
        RunKind::Geqo => {
            let out = run_geqo(graph, params, sink)?;
            warnings.extend(out.warnings);
            PlannerRun {
                label: graph.label.clone(),
                kind,
                relations,
                plan: out.plan,
                dp: None,
                geqo: Some(out.trace),
                warnings,
            }
        }
    };
    Ok(run)
}

/// Plans every block of `sql`. `params` must already be validated.
pub fn optimize(
    sql: &str,
    catalog: &Catalog,
    params: &CostParams,
    query_id: &str,
) -> Result<OptimizationTrace, PipelineError> {
    optimize_with_sink(sql, catalog, params, query_id, &mut ())
}

pub fn optimize_with_sink(
    sql: &str,
    catalog: &Catalog,
    params: &CostParams,
    query_id: &str,
    sink: &mut dyn TraceSink,
) -> Result<OptimizationTrace, PipelineError> {
    let spec = parse_query(sql)?;
    let mut cte_rows: HashMap<String, f64> = HashMap::new();
    let mut runs = Vec::with_capacity(spec.blocks.len());
    for block in &spec.blocks {
        let graph = build_block_graph(block, catalog, &cte_rows)?;
        let run = plan_block(&graph, params, sink)?;
        cte_rows.insert(block.label.clone(), run.plan.rows.to_f64());
        runs.push(run);
    }
    Ok(OptimizationTrace {
        query_id: query_id.to_string(),
        sql: sql.to_string(),
        params: params.clone(),
        runs,
    })
}
