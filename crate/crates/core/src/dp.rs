//! Bottom-up (DPsize) join enumeration with a full trace of every generated
//! path.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

use crate::cost::{CostParams, JoinMethod, PathCost};
use crate::fixed::Fixed6;
use crate::paths::{cheapest, Candidate, PlanContext};
use crate::query::{mask_ordinals, QueryGraph};
use crate::trace::{PathType, PlanTree, TraceSink};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DpError {
    #[error("query block has no relations")]
    Empty,
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

/// One access path. Its relation set is that of the enclosing [`RelOptSet`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathNode {
    pub id: u32,
    #[serde(rename = "type")]
    pub path_type: PathType,
    pub startup: Fixed6,
    pub total: Fixed6,
    pub rows: Fixed6,
    pub outer: Option<u32>,
    pub inner: Option<u32>,
    pub chosen: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelOptSet {
    pub relids: Vec<usize>,
    pub rows: Fixed6,
    pub cheapest_total: u32,
    pub cheapest_startup: u32,
    pub paths: Vec<PathNode>,
}

impl RelOptSet {
    pub fn path(&self, id: u32) -> Option<&PathNode> {
        self.paths.iter().find(|p| p.id == id)
    }
}

/// `levels[k - 1]` holds the relation sets of size `k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpTrace {
    pub levels: Vec<Vec<RelOptSet>>,
}

impl DpTrace {
    pub fn path_count(&self) -> usize {
        self.levels.iter().flatten().map(|s| s.paths.len()).sum()
    }

    pub fn chosen_count(&self) -> usize {
        self.levels
            .iter()
            .flatten()
            .flat_map(|s| &s.paths)
            .filter(|p| p.chosen)
            .count()
    }

    /// Structural checks for a trace over `n` base relations.
    pub fn validate(&self, n: usize) -> Result<(), crate::trace::TraceError> {
        use crate::trace::TraceError::Invalid;
        let fail = |m: String| Err(Invalid(m));
        if self.levels.len() != n || n == 0 {
            return fail(format!(
                "expected {n} DP levels, found {}",
                self.levels.len()
            ));
        }
        let mut level_of: HashMap<u32, (usize, &[usize])> = HashMap::new();
        for (i, level) in self.levels.iter().enumerate() {
            let k = i + 1;
            let mut seen = BTreeSet::new();
            for set in level {
                if set.relids.len() != k
                    || set.relids.windows(2).any(|w| w[0] >= w[1])
                    || set.relids.iter().any(|&o| o == 0 || o > n)
                {
                    return fail(format!("level {k} holds relids {:?}", set.relids));
                }
                if !seen.insert(&set.relids) {
                    return fail(format!("relids {:?} listed twice", set.relids));
                }
                if set.paths.is_empty() {
                    return fail(format!("relids {:?} have no paths", set.relids));
                }
                for path in &set.paths {
                    if path.rows != set.rows {
                        return fail(format!("path {} rows differ from its set", path.id));
                    }
                    if path.startup.is_negative() || path.startup > path.total {
                        return fail(format!("path {} has startup above total", path.id));
                    }
                    match (path.outer, path.inner) {
                        (None, None) if path.path_type.is_scan() && k == 1 => {}
                        (Some(outer), Some(inner)) if !path.path_type.is_scan() => {
                            let lookup = |id: u32| {
                                level_of.get(&id).copied().ok_or_else(|| {
                                    Invalid(format!(
                                        "path {} references path {id} not created at a smaller level",
                                        path.id
                                    ))
                                })
                            };
                            let (_, a) = lookup(outer)?;
                            let (_, b) = lookup(inner)?;
                            let mut union: Vec<usize> = a.iter().chain(b).copied().collect();
                            union.sort_unstable();
                            if union != set.relids {
                                return fail(format!(
                                    "children of path {} do not partition {:?}",
                                    path.id, set.relids
                                ));
                            }
                        }
                        _ => return fail(format!("path {} has an invalid shape", path.id)),
                    }
                }
                let total = set.path(set.cheapest_total).ok_or_else(|| {
                    Invalid(format!("cheapest_total {} missing", set.cheapest_total))
                })?;
                if set.path(set.cheapest_startup).is_none() {
                    return fail(format!("cheapest_startup {} missing", set.cheapest_startup));
                }
                if set.paths.iter().any(|p| p.total < total.total) {
                    return fail(format!("cheapest_total of {:?} is not minimal", set.relids));
                }
            }
            for set in level {
                for path in &set.paths {
                    if level_of.insert(path.id, (k, &set.relids)).is_some() {
                        return fail(format!("path id {} is not unique", path.id));
                    }
                }
            }
        }
        if self.levels[0].len() != n {
            return fail("level 1 must hold one set per relation".into());
        }
        if self.levels[n - 1].len() != 1 {
            return fail("top level must hold exactly one set".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct WorkPath {
    path_type: PathType,
    cost: PathCost,
    outer: Option<u32>,
    inner: Option<u32>,
}

#[derive(Debug, Clone)]
struct WorkSet {
    mask: u64,
    rows: f64,
    /// Path ids in creation order.
    paths: Vec<u32>,
    cheapest_total: u32,
    cheapest_startup: u32,
}

enum PairRule {
    Reject,
    /// Needs a crossing edge unless the cartesian fallback is active.
    Normal,
    /// A Leading-prefix step; accepted even without a crossing edge.
    Forced,
}

/// The DP planner's mutable state for one query block.
pub struct DpPlanner<'g> {
    ctx: PlanContext<'g>,
    paths: Vec<WorkPath>,
}

/// Result of [`plan_dp`].
#[derive(Debug, Clone, PartialEq)]
pub struct DpOutcome {
    pub plan: PlanTree,
    pub trace: DpTrace,
    /// Unrounded cost of the chosen plan.
    pub best: PathCost,
    pub warnings: Vec<String>,
}

impl<'g> DpPlanner<'g> {
    pub fn new(graph: &'g QueryGraph, params: &'g CostParams) -> Self {
        DpPlanner {
            ctx: PlanContext::new(graph, params),
            paths: Vec::new(),
        }
    }

    fn add(&mut self, path: WorkPath) -> u32 {
        self.paths.push(path);
        self.paths.len() as u32
    }

    fn get(&self, id: u32) -> &WorkPath {
        &self.paths[id as usize - 1]
    }

    fn finish_set(&self, mask: u64, rows: f64, paths: Vec<u32>) -> WorkSet {
        let candidates: Vec<Candidate> = paths
            .iter()
            .map(|&id| Candidate {
                path_type: self.get(id).path_type,
                cost: self.get(id).cost,
            })
            .collect();
        let cheapest_total = paths[cheapest(&candidates).expect("set has paths")];
        let mut cheapest_startup = paths[0];
        for &id in &paths[1..] {
            let (a, b) = (&self.get(id).cost, &self.get(cheapest_startup).cost);
            if a.startup
                .total_cmp(&b.startup)
                .then(a.total.total_cmp(&b.total))
                .is_lt()
            {
                cheapest_startup = id;
            }
        }
        WorkSet {
            mask,
            rows,
            paths,
            cheapest_total,
            cheapest_startup,
        }
    }

    /// Level-1 relation set for one base relation.
    fn generate_scan_paths(&mut self, ordinal: usize) -> WorkSet {
        let mask = 1u64 << (ordinal - 1);
        let rows = self.ctx.rows(mask);
        let ids = self.ctx.scans[ordinal - 1]
            .clone()
            .into_iter()
            .map(|c| {
                self.add(WorkPath {
                    path_type: c.path_type,
                    cost: PathCost { rows, ..c.cost },
                    outer: None,
                    inner: None,
                })
            })
            .collect();
        self.finish_set(mask, rows, ids)
    }

    /// Join candidates for `left ⋈ right`, in generation order:
    /// NestLoop (left outer), NestLoop (right outer), HashJoin (left outer),
    /// HashJoin (right outer), MergeJoin.
    fn make_join_paths(&mut self, left: &WorkSet, right: &WorkSet) -> Vec<u32> {
        let mask = left.mask | right.mask;
        let rows = self.ctx.rows(mask);
        let (l, r) = (left.cheapest_total, right.cheapest_total);
        let allowed = self.ctx.allowed_methods(mask).to_vec();
        let order = [
            (JoinMethod::NestLoop, l, r),
            (JoinMethod::NestLoop, r, l),
            (JoinMethod::HashJoin, l, r),
            (JoinMethod::HashJoin, r, l),
            (JoinMethod::MergeJoin, l, r),
        ];
        let mut ids = Vec::new();
        for (method, outer, inner) in order {
            if !allowed.contains(&method) {
                continue;
            }
            let c = self
                .ctx
                .join(method, &self.get(outer).cost, &self.get(inner).cost, rows);
            ids.push(self.add(WorkPath {
                path_type: c.path_type,
                cost: c.cost,
                outer: Some(outer),
                inner: Some(inner),
            }));
        }
        ids
    }

    fn pair_rule(&self, left: u64, right: u64) -> PairRule {
        let Some(leading) = &self.ctx.leading else {
            return PairRule::Normal;
        };
        let prefix = |j: usize| leading[..j].iter().fold(0u64, |m, o| m | 1 << (o - 1));
        let all = prefix(leading.len());
        let union = left | right;
        if union & all == 0 || union & all == all {
            return PairRule::Normal;
        }
        if union & !all != 0 {
            return PairRule::Reject;
        }
        let j = union.count_ones() as usize;
        let step = 1u64 << (leading[j - 1] - 1);
        let head = prefix(j - 1);
        if union == prefix(j)
            && ((left == head && right == step) || (left == step && right == head))
        {
            PairRule::Forced
        } else {
            PairRule::Reject
        }
    }

    fn snapshot(&self, set: &WorkSet) -> RelOptSet {
        let rows = Fixed6::from_f64(set.rows);
        RelOptSet {
            relids: mask_ordinals(set.mask).collect(),
            rows: rows.clone(),
            cheapest_total: set.cheapest_total,
            cheapest_startup: set.cheapest_startup,
            paths: set
                .paths
                .iter()
                .map(|&id| {
                    let p = self.get(id);
                    PathNode {
                        id,
                        path_type: p.path_type,
                        startup: Fixed6::from_f64(p.cost.startup),
                        total: Fixed6::from_f64(p.cost.total),
                        rows: rows.clone(),
                        outer: p.outer,
                        inner: p.inner,
                        chosen: false,
                    }
                })
                .collect(),
        }
    }

    /// Runs the enumeration, streaming each completed level to `sink`.
    pub fn run(mut self, sink: &mut dyn TraceSink) -> Result<DpOutcome, DpError> {
        let graph = self.ctx.graph;
        let n = graph.len();
        if n == 0 {
            return Err(DpError::Empty);
        }
        let mut levels: Vec<Vec<WorkSet>> = Vec::with_capacity(n);
        let first: Vec<WorkSet> = (1..=n).map(|o| self.generate_scan_paths(o)).collect();
        levels.push(first);
        self.emit(1, &levels[0], sink);

        for k in 2..=n {
            let mut created: Vec<(u64, Vec<u32>)> = Vec::new();
            for cartesian in [false, true] {
                let mut index: HashMap<u64, usize> = HashMap::new();
                for left_size in (k.div_ceil(2)..k).rev() {
                    let right_size = k - left_size;
                    let (lefts, rights) = (&levels[left_size - 1], &levels[right_size - 1]);
                    for (li, left) in lefts.iter().enumerate() {
                        for (ri, right) in rights.iter().enumerate() {
                            if (left_size == right_size && ri <= li) || left.mask & right.mask != 0
                            {
                                continue;
                            }
                            let admitted = match self.pair_rule(left.mask, right.mask) {
                                PairRule::Reject => false,
                                PairRule::Forced => true,
                                PairRule::Normal => {
                                    cartesian || graph.connected(left.mask, right.mask)
                                }
                            };
                            if !admitted {
                                continue;
                            }
                            let ids = self.make_join_paths(left, right);
                            let union = left.mask | right.mask;
                            let slot = *index.entry(union).or_insert_with(|| {
                                created.push((union, Vec::new()));
                                created.len() - 1
                            });
                            created[slot].1.extend(ids);
                        }
                    }
                }
                if !created.is_empty() {
                    break;
                }
            }
            if created.is_empty() {
                return Err(DpError::Internal(format!("level {k} is empty")));
            }
            let level: Vec<WorkSet> = created
                .into_iter()
                .map(|(mask, ids)| {
                    let rows = self.ctx.rows(mask);
                    self.finish_set(mask, rows, ids)
                })
                .collect();
            self.emit(k, &level, sink);
            levels.push(level);
        }

        let top = match levels[n - 1].as_slice() {
            [top] if top.mask == graph.full_mask() => top.clone(),
            _ => {
                return Err(DpError::Internal(
                    "top level does not hold exactly the full relation set".into(),
                ))
            }
        };
        let mut chosen = BTreeSet::new();
        let mut stack = vec![top.cheapest_total];
        while let Some(id) = stack.pop() {
            chosen.insert(id);
            let p = self.get(id);
            stack.extend(p.outer);
            stack.extend(p.inner);
        }
        let mut trace = DpTrace {
            levels: levels
                .iter()
                .map(|level| level.iter().map(|s| self.snapshot(s)).collect())
                .collect(),
        };
        for path in trace.levels.iter_mut().flatten().flat_map(|s| &mut s.paths) {
            path.chosen = chosen.contains(&path.id);
        }
        let plan = self.plan_tree(top.cheapest_total);
        Ok(DpOutcome {
            plan,
            trace,
            best: self.get(top.cheapest_total).cost,
            warnings: self.ctx.warnings,
        })
    }

    fn plan_tree(&self, id: u32) -> PlanTree {
        let p = self.get(id);
        let (label, children) = match (p.outer, p.inner) {
            (Some(o), Some(i)) => (None, vec![self.plan_tree(o), self.plan_tree(i)]),
            _ => {
                let ordinal = self.ordinal_of_scan(id);
                (Some(self.ctx.graph.rel(ordinal).alias.clone()), Vec::new())
            }
        };
        PlanTree {
            node_type: p.path_type,
            label,
            startup: Fixed6::from_f64(p.cost.startup),
            total: Fixed6::from_f64(p.cost.total),
            rows: Fixed6::from_f64(p.cost.rows),
            children,
        }
    }

    /// Scan paths are created first, in ordinal order.
    fn ordinal_of_scan(&self, id: u32) -> usize {
        let mut next = 1u32;
        for (i, scans) in self.ctx.scans.iter().enumerate() {
            next += scans.len() as u32;
            if id < next {
                return i + 1;
            }
        }
        unreachable!("path {id} is not a scan")
    }

    fn emit(&self, k: usize, level: &[WorkSet], sink: &mut dyn TraceSink) {
        for set in level {
            sink.rel_opt_set(k, &self.snapshot(set));
        }
    }
}

/// Plans one query block with dynamic programming.
pub fn plan_dp(
    graph: &QueryGraph,
    params: &CostParams,
    sink: &mut dyn TraceSink,
) -> Result<DpOutcome, DpError> {
    DpPlanner::new(graph, params).run(sink)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::tpch_like;
    use crate::query::{build_query_graph, parse_query};
    use crate::trace::{extract_plan_tree, PlannerRun, RelationRef, RunKind};

    fn graph(sql: &str) -> QueryGraph {
        let spec = parse_query(sql).unwrap();
        build_query_graph(&spec, &tpch_like(), &HashMap::new())
            .unwrap()
            .pop()
            .unwrap()
    }

    fn plan(sql: &str) -> (QueryGraph, DpOutcome) {
        let g = graph(sql);
        let out = plan_dp(&g, &CostParams::default(), &mut ()).unwrap();
        (g, out)
    }

    fn relsets(trace: &DpTrace, k: usize) -> Vec<Vec<usize>> {
        trace.levels[k - 1]
            .iter()
            .map(|s| s.relids.clone())
            .collect()
    }

    const CHAIN: &str = "SELECT * FROM customer c, orders o, lineitem l \
                         WHERE c.c_custkey = o.o_custkey AND o.o_orderkey = l.l_orderkey";

    #[test]
    fn single_relation_plan_is_a_scan() {
        let (_, out) = plan("SELECT * FROM nation n");
        assert_eq!(out.trace.levels.len(), 1);
        assert!(out.plan.children.is_empty());
        assert_eq!(out.plan.label.as_deref(), Some("n"));
        assert_eq!(out.trace.chosen_count(), 1);
    }

    #[test]
    fn chain_skips_unconnected_pairs() {
        let (_, out) = plan(CHAIN);
        assert_eq!(relsets(&out.trace, 2), vec![vec![1, 2], vec![2, 3]]);
        assert_eq!(relsets(&out.trace, 3), vec![vec![1, 2, 3]]);
        assert_eq!(out.trace.chosen_count(), 5);
        out.trace.validate(3).unwrap();
    }

    #[test]
    fn disconnected_level_falls_back_to_cartesian() {
        let (_, out) = plan("SELECT * FROM nation n, region r");
        assert_eq!(relsets(&out.trace, 2), vec![vec![1, 2]]);
        let (_, out) = plan(
            "SELECT * FROM nation n, region r, supplier s WHERE n.n_nationkey = s.s_nationkey",
        );
        assert_eq!(relsets(&out.trace, 2), vec![vec![1, 3]]);
        assert_eq!(relsets(&out.trace, 3), vec![vec![1, 2, 3]]);
    }

    #[test]
    fn unhinted_pair_has_five_candidates() {
        let (_, out) = plan("SELECT * FROM customer c, orders o WHERE c.c_custkey = o.o_custkey");
        let types: Vec<_> = out.trace.levels[1][0]
            .paths
            .iter()
            .map(|p| p.path_type)
            .collect();
        assert_eq!(
            types,
            [
                PathType::NestLoop,
                PathType::NestLoop,
                PathType::HashJoin,
                PathType::HashJoin,
                PathType::MergeJoin
            ]
        );
    }

    #[test]
    fn join_hint_restricts_methods() {
        let (_, out) = plan(
            "/*+ HashJoin(c o) */ SELECT * FROM customer c, orders o \
             WHERE c.c_custkey = o.o_custkey",
        );
        let set = &out.trace.levels[1][0];
        assert_eq!(set.paths.len(), 2);
        assert!(set.paths.iter().all(|p| p.path_type == PathType::HashJoin));
        assert_ne!(set.paths[0].outer, set.paths[1].outer);
    }

    #[test]
    fn candidate_costs_match_cost_model() {
        let g = graph("SELECT * FROM customer c, orders o WHERE c.c_custkey = o.o_custkey");
        let params = CostParams::default();
        let out = plan_dp(&g, &params, &mut ()).unwrap();
        let ctx = PlanContext::new(&g, &params);
        let (c, o) = (ctx.cheapest_scan(1).cost, ctx.cheapest_scan(2).cost);
        let sel = crate::cost::join_selectivity(g.crossing_edges(1, 2));
        let expected = crate::cost::cost_join(JoinMethod::HashJoin, &o, &c, sel, &params);
        let hash = &out.trace.levels[1][0].paths[3];
        assert_eq!(hash.total, Fixed6::from_f64(expected.total));
        assert_eq!(hash.startup, Fixed6::from_f64(expected.startup));
    }

    #[test]
    fn leading_hint_fixes_the_prefix() {
        let (_, out) = plan(
            "/*+ Leading(l c) */ SELECT * FROM customer c, orders o, lineitem l \
             WHERE c.c_custkey = o.o_custkey AND o.o_orderkey = l.l_orderkey",
        );
        assert_eq!(relsets(&out.trace, 2), vec![vec![1, 3]]);
        let pair = out
            .plan
            .children
            .iter()
            .find(|c| !c.children.is_empty())
            .unwrap();
        let mut leaves = pair.leaves();
        leaves.sort_unstable();
        assert_eq!(leaves, ["c", "l"]);
    }

    #[test]
    fn spine_matches_extracted_plan() {
        let (g, out) = plan(CHAIN);
        let run = PlannerRun {
            label: "main".into(),
            kind: RunKind::Dp,
            relations: g
                .rels
                .iter()
                .map(|r| RelationRef {
                    ordinal: r.ordinal,
                    alias: r.alias.clone(),
                    relation: r.relation.clone(),
                    cte: r.from_cte,
                })
                .collect(),
            plan: out.plan.clone(),
            dp: Some(out.trace.clone()),
            geqo: None,
            warnings: vec![],
        };
        assert_eq!(extract_plan_tree(&run).unwrap(), out.plan);
        assert_eq!(out.plan.node_count(), 5);
        out.plan.validate().unwrap();
    }

    #[test]
    fn sink_sees_every_set_in_level_order() {
        struct Collect(Vec<(usize, Vec<usize>)>);
        impl TraceSink for Collect {
            fn rel_opt_set(&mut self, level: usize, set: &RelOptSet) {
                self.0.push((level, set.relids.clone()));
            }
        }
        let g = graph(CHAIN);
        let mut sink = Collect(Vec::new());
        let out = plan_dp(&g, &CostParams::default(), &mut sink).unwrap();
        let expected: Vec<_> = out
            .trace
            .levels
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().map(move |s| (i + 1, s.relids.clone())))
            .collect();
        assert_eq!(sink.0, expected);
    }
}
