//! Canonical optimization trace: the record of every planner run for one
//! query plus the chosen plan trees, and its JSON form.
//!
//! JSON output is deterministic: keys appear in declaration order and every
//! cost, row count and bias is written with exactly six decimals. The
//! published schema lives in `schema/trace.v1.schema.json`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostParams, JoinMethod};
use crate::dp::{DpTrace, RelOptSet};
use crate::fixed::Fixed6;
use crate::geqo::{Generation, GeqoTrace};
use crate::query::MAIN_LABEL;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("malformed plan spine: {0}")]
    MalformedSpine(String),
    #[error("invalid trace: {0}")]
    Invalid(String),
    #[error("trace JSON error: {0}")]
    Json(String),
}

fn invalid(message: impl Into<String>) -> TraceError {
    TraceError::Invalid(message.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PathType {
    SeqScan,
    IndexScan,
    #[serde(rename = "CTEScan")]
    CteScan,
    NestLoop,
    HashJoin,
    MergeJoin,
}

impl PathType {
    pub const ALL: [PathType; 6] = [
        PathType::SeqScan,
        PathType::IndexScan,
        PathType::CteScan,
        PathType::NestLoop,
        PathType::HashJoin,
        PathType::MergeJoin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PathType::SeqScan => "SeqScan",
            PathType::IndexScan => "IndexScan",
            PathType::CteScan => "CTEScan",
            PathType::NestLoop => "NestLoop",
            PathType::HashJoin => "HashJoin",
            PathType::MergeJoin => "MergeJoin",
        }
    }

    pub fn from_name(name: &str) -> Option<PathType> {
        PathType::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn is_scan(self) -> bool {
        matches!(
            self,
            PathType::SeqScan | PathType::IndexScan | PathType::CteScan
        )
    }
}

impl From<JoinMethod> for PathType {
    fn from(method: JoinMethod) -> Self {
        match method {
            JoinMethod::NestLoop => PathType::NestLoop,
            JoinMethod::HashJoin => PathType::HashJoin,
            JoinMethod::MergeJoin => PathType::MergeJoin,
        }
    }
}

impl fmt::Display for PathType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanTree {
    #[serde(rename = "type")]
    pub node_type: PathType,
    /// Alias for scans, `None` for joins.
    pub label: Option<String>,
    pub startup: Fixed6,
    pub total: Fixed6,
    pub rows: Fixed6,
    pub children: Vec<PlanTree>,
}

impl PlanTree {
    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(PlanTree::node_count)
            .sum::<usize>()
    }

    /// Scan labels, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.children.is_empty() {
            out.push(self.label.as_deref().unwrap_or(""));
        }
        for child in &self.children {
            child.collect_leaves(out);
        }
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        let expected = if self.node_type.is_scan() { 0 } else { 2 };
        if self.children.len() != expected {
            return Err(invalid(format!(
                "{} node has {} children",
                self.node_type,
                self.children.len()
            )));
        }
        if self.startup.is_negative() || self.startup > self.total {
            return Err(invalid(format!(
                "{} node has startup {} and total {}",
                self.node_type, self.startup, self.total
            )));
        }
        for child in &self.children {
            if child.total > self.total {
                return Err(invalid(format!(
                    "{} node total {} is below child total {}",
                    self.node_type, self.total, child.total
                )));
            }
            child.validate()?;
        }
        Ok(())
    }
}

/// One segment of a plan's stacked cost bar.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSegment {
    /// Child indices from the root; empty for the root itself.
    pub node_path: Vec<usize>,
    pub node_type: PathType,
    pub label: Option<String>,
    pub exclusive_cost: Fixed6,
    pub percent: f64,
}

/// Per-operator share of the root's total cost, in pre-order.
///
/// A node's exclusive cost is its total minus its children's totals; the
/// exclusive costs sum to the root total exactly.
pub fn plan_cost_breakdown(plan: &PlanTree) -> Vec<CostSegment> {
    fn walk(node: &PlanTree, path: &mut Vec<usize>, out: &mut Vec<CostSegment>) {
        let children: Fixed6 = node.children.iter().map(|c| &c.total).sum();
        out.push(CostSegment {
            node_path: path.clone(),
            node_type: node.node_type,
            label: node.label.clone(),
            exclusive_cost: &node.total - &children,
            percent: 0.0,
        });
        for (i, child) in node.children.iter().enumerate() {
            path.push(i);
            walk(child, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(plan, &mut Vec::new(), &mut out);
    let root = plan.total.to_f64();
    for (i, segment) in out.iter_mut().enumerate() {
        segment.percent = if root > 0.0 {
            segment.exclusive_cost.to_f64() / root * 100.0
        } else if i == 0 {
            100.0
        } else {
            0.0
        };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunKind {
    Dp,
    Geqo,
}

impl RunKind {
    pub fn name(self) -> &'static str {
        match self {
            RunKind::Dp => "dp",
            RunKind::Geqo => "geqo",
        }
    }
}

/// A base relation of a run's query block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationRef {
    pub ordinal: usize,
    pub alias: String,
    pub relation: String,
    pub cte: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerRun {
    pub label: String,
    pub kind: RunKind,
    pub relations: Vec<RelationRef>,
    pub plan: PlanTree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp: Option<DpTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geqo: Option<GeqoTrace>,
    pub warnings: Vec<String>,
}

impl PlannerRun {
    pub fn validate(&self) -> Result<(), TraceError> {
        let context = |e: TraceError| match e {
            TraceError::Invalid(m) => invalid(format!("run `{}`: {m}", self.label)),
            other => other,
        };
        match (self.kind, &self.dp, &self.geqo) {
            (RunKind::Dp, Some(dp), None) => dp.validate(self.relations.len()).map_err(context)?,
            (RunKind::Geqo, None, Some(geqo)) => {
                geqo.validate(self.relations.len()).map_err(context)?
            }
            _ => {
                return Err(invalid(format!(
                    "run `{}` of kind {} must carry exactly the matching trace",
                    self.label,
                    self.kind.name()
                )))
            }
        }
        for (i, rel) in self.relations.iter().enumerate() {
            if rel.ordinal != i + 1 {
                return Err(invalid(format!(
                    "run `{}`: relation ordinals must be 1..N in order",
                    self.label
                )));
            }
        }
        self.plan.validate().map_err(context)?;
        if self.kind == RunKind::Dp && extract_plan_tree(self)? != self.plan {
            return Err(invalid(format!(
                "run `{}`: plan differs from the chosen DP paths",
                self.label
            )));
        }
        Ok(())
    }

    fn alias_of(&self, ordinal: usize) -> Option<&str> {
        self.relations
            .get(ordinal.wrapping_sub(1))
            .map(|r| r.alias.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizationTrace {
    pub query_id: String,
    pub sql: String,
    pub params: CostParams,
    pub runs: Vec<PlannerRun>,
}

impl OptimizationTrace {
    pub fn validate(&self) -> Result<(), TraceError> {
        let mut labels = HashSet::new();
        for run in &self.runs {
            if !labels.insert(run.label.as_str()) {
                return Err(invalid(format!("duplicate run label `{}`", run.label)));
            }
            run.validate()?;
        }
        match self.runs.last() {
            Some(run) if run.label == MAIN_LABEL => Ok(()),
            _ => Err(invalid("the last run must be labelled `main`")),
        }
    }

    pub fn run(&self, label: &str) -> Option<&PlannerRun> {
        self.runs.iter().find(|r| r.label == label)
    }

    pub fn main(&self) -> &PlannerRun {
        self.runs.last().expect("a valid trace has a main run")
    }
}

pub fn serialize_trace(trace: &OptimizationTrace) -> String {
    serde_json::to_string_pretty(trace).expect("trace serialization is infallible")
}

/// Parses and validates trace JSON. Unknown fields are rejected.
pub fn deserialize_trace(text: &str) -> Result<OptimizationTrace, TraceError> {
    let trace: OptimizationTrace =
        serde_json::from_str(text).map_err(|e| TraceError::Json(e.to_string()))?;
    trace.validate()?;
    Ok(trace)
}

/// One-line JSON for a plan tree.
pub fn plan_to_json_line(plan: &PlanTree) -> String {
    serde_json::to_string(plan).expect("plan serialization is infallible")
}

/// Returns the run's final plan. For DP runs the tree is rebuilt from the
/// paths flagged as chosen, outer child first.
pub fn extract_plan_tree(run: &PlannerRun) -> Result<PlanTree, TraceError> {
    match (&run.kind, &run.dp) {
        (RunKind::Dp, Some(dp)) => plan_from_spine(run, dp),
        _ => Ok(run.plan.clone()),
    }
}

fn plan_from_spine(run: &PlannerRun, dp: &DpTrace) -> Result<PlanTree, TraceError> {
    let spine = |m: String| TraceError::MalformedSpine(m);
    let mut index: HashMap<u32, (&RelOptSet, usize)> = HashMap::new();
    for set in dp.levels.iter().flatten() {
        for (i, path) in set.paths.iter().enumerate() {
            index.insert(path.id, (set, i));
        }
    }
    let top = dp
        .levels
        .last()
        .and_then(|level| match level.as_slice() {
            [only] => Some(only),
            _ => None,
        })
        .ok_or_else(|| spine("top level must hold exactly one relation set".into()))?;
    let mut roots = top.paths.iter().filter(|p| p.chosen);
    let root = match (roots.next(), roots.next()) {
        (Some(root), None) => root.id,
        _ => {
            return Err(spine(
                "top relation set must have exactly one chosen path".into(),
            ))
        }
    };
    let chosen: BTreeSet<u32> = dp
        .levels
        .iter()
        .flatten()
        .flat_map(|s| s.paths.iter().filter(|p| p.chosen).map(|p| p.id))
        .collect();
    let mut visited = BTreeSet::new();

    fn build(
        id: u32,
        run: &PlannerRun,
        index: &HashMap<u32, (&RelOptSet, usize)>,
        visited: &mut BTreeSet<u32>,
    ) -> Result<PlanTree, TraceError> {
        let (set, i) = index
            .get(&id)
            .ok_or_else(|| TraceError::MalformedSpine(format!("path {id} does not exist")))?;
        let path = &set.paths[*i];
        if !path.chosen {
            return Err(TraceError::MalformedSpine(format!(
                "path {id} is a child on the spine but not flagged chosen"
            )));
        }
        if !visited.insert(id) {
            return Err(TraceError::MalformedSpine(format!(
                "path {id} reached twice"
            )));
        }
        let (children, label) = match (path.outer, path.inner) {
            (Some(outer), Some(inner)) => (
                vec![
                    build(outer, run, index, visited)?,
                    build(inner, run, index, visited)?,
                ],
                None,
            ),
            (None, None) => {
                let alias = set
                    .relids
                    .first()
                    .and_then(|o| run.alias_of(*o))
                    .ok_or_else(|| {
                        TraceError::MalformedSpine(format!("scan path {id} has no relation"))
                    })?;
                (Vec::new(), Some(alias.to_string()))
            }
            _ => {
                return Err(TraceError::MalformedSpine(format!(
                    "path {id} has only one child"
                )))
            }
        };
        Ok(PlanTree {
            node_type: path.path_type,
            label,
            startup: path.startup.clone(),
            total: path.total.clone(),
            rows: path.rows.clone(),
            children,
        })
    }

    let plan = build(root, run, &index, &mut visited)?;
    if let Some(dangling) = chosen.difference(&visited).next() {
        return Err(spine(format!(
            "path {dangling} is flagged chosen but not on the plan tree"
        )));
    }
    Ok(plan)
}

/// Receives trace records as a planner produces them.
pub trait TraceSink {
    /// A DP level's relation set, emitted when the level completes. The
    /// `chosen` flags are not yet set at this point.
    fn rel_opt_set(&mut self, _level: usize, _set: &RelOptSet) {}

    /// A GEQO pool snapshot.
    fn generation(&mut self, _generation: &Generation) {}
}

/// Discards everything.
impl TraceSink for () {}
