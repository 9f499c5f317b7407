//! Cost model shared by both planners.
//!
//! Every path is charged page I/O plus per-tuple CPU work. The constants
//! default to PostgreSQL's documented values.
//!
//! | path      | startup                                   | total                                                       |
//! |-----------|-------------------------------------------|-------------------------------------------------------------|
//! | SeqScan   | 0                                         | seq_page·pages + (cpu_tuple + cpu_op·clauses)·tuples         |
//! | IndexScan | 0                                         | random_page·⌈s·pages⌉ + s·tuples·(cpu_index + cpu_tuple)     |
//! | NestLoop  | outer.startup + inner.startup             | outer.total + max(1, round(outer.rows))·inner.total + cpu_tuple·rows |
//! | HashJoin  | inner.total + cpu_op·inner.rows           | inner.total + outer.total + cpu_op·(inner.rows + outer.rows) + cpu_tuple·rows |
//! | MergeJoin | outer.total + inner.total + sort(o) + sort(i) | startup + cpu_tuple·rows                                 |
//!
//! with `sort(r) = 2·cpu_op·r·⌈log2(max(r, 2))⌉`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::RelationStats;
use crate::fixed::{decimal6, round6};
use crate::query::{CmpOp, JoinEdge, Restriction};

pub const SELECTIVITY_FLOOR: f64 = 1e-9;
pub const ROW_FLOOR: f64 = 1.0;
/// Selectivity of a range comparison (`<`, `>`, `<=`, `>=`).
pub const RANGE_SELECTIVITY: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error("unknown join method `{0}`")]
    UnknownMethod(String),
    #[error("invalid parameter {name}: {message}")]
    InvalidParam { name: &'static str, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ScanMethod {
    SeqScan,
    IndexScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JoinMethod {
    NestLoop,
    HashJoin,
    MergeJoin,
}

impl JoinMethod {
    pub const ALL: [JoinMethod; 3] = [
        JoinMethod::NestLoop,
        JoinMethod::HashJoin,
        JoinMethod::MergeJoin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JoinMethod::NestLoop => "NestLoop",
            JoinMethod::HashJoin => "HashJoin",
            JoinMethod::MergeJoin => "MergeJoin",
        }
    }
}

impl fmt::Display for JoinMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JoinMethod {
    type Err = CostError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JoinMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CostError::UnknownMethod(s.to_string()))
    }
}

/// Planner configuration. Cost constants have micro-unit resolution: they
/// are rounded to six decimals on validation so that a trace's echo of the
/// parameters reproduces the run exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    #[serde(with = "decimal6")]
    pub seq_page_cost: f64,
    #[serde(with = "decimal6")]
    pub random_page_cost: f64,
    #[serde(with = "decimal6")]
    pub cpu_tuple_cost: f64,
    #[serde(with = "decimal6")]
    pub cpu_index_tuple_cost: f64,
    #[serde(with = "decimal6")]
    pub cpu_operator_cost: f64,
    pub geqo_threshold: u32,
    pub geqo_effort: u32,
    /// 0 selects the size from `geqo_effort`.
    pub geqo_pool_size: u32,
    /// 0 means one generation per pool member.
    pub geqo_generations: u32,
    #[serde(with = "decimal6")]
    pub geqo_selection_bias: f64,
    pub rng_seed: u64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            seq_page_cost: 1.0,
            random_page_cost: 4.0,
            cpu_tuple_cost: 0.01,
            cpu_index_tuple_cost: 0.005,
            cpu_operator_cost: 0.0025,
            geqo_threshold: 12,
            geqo_effort: 5,
            geqo_pool_size: 0,
            geqo_generations: 0,
            geqo_selection_bias: 2.0,
            rng_seed: 42,
        }
    }
}

impl CostParams {
    /// Rounds cost constants to six decimals and checks every invariant.
    pub fn validated(mut self) -> Result<Self, CostError> {
        for (name, value) in [
            ("seq_page_cost", &mut self.seq_page_cost),
            ("random_page_cost", &mut self.random_page_cost),
            ("cpu_tuple_cost", &mut self.cpu_tuple_cost),
            ("cpu_index_tuple_cost", &mut self.cpu_index_tuple_cost),
            ("cpu_operator_cost", &mut self.cpu_operator_cost),
        ] {
            if !value.is_finite() {
                return Err(CostError::InvalidParam {
                    name,
                    message: "must be finite".into(),
                });
            }
            *value = round6(*value);
            if *value <= 0.0 {
                return Err(CostError::InvalidParam {
                    name,
                    message: "must be > 0 (at six-decimal resolution)".into(),
                });
            }
        }
        if self.geqo_threshold < 2 {
            return Err(CostError::InvalidParam {
                name: "geqo_threshold",
                message: "must be >= 2".into(),
            });
        }
        if !(1..=10).contains(&self.geqo_effort) {
            return Err(CostError::InvalidParam {
                name: "geqo_effort",
                message: "must be within 1..=10".into(),
            });
        }
        if self.geqo_pool_size == 1 {
            return Err(CostError::InvalidParam {
                name: "geqo_pool_size",
                message: "must be 0 (auto) or >= 2".into(),
            });
        }
        self.geqo_selection_bias = round6(self.geqo_selection_bias);
        if !(1.5..=2.0).contains(&self.geqo_selection_bias) {
            return Err(CostError::InvalidParam {
                name: "geqo_selection_bias",
                message: "must be within [1.5, 2.0]".into(),
            });
        }
        Ok(self)
    }

    /// Pool size after applying the automatic rule.
    pub fn effective_pool_size(&self) -> usize {
        if self.geqo_pool_size != 0 {
            self.geqo_pool_size as usize
        } else {
            (1usize << (self.geqo_effort + 1)).clamp(16, 1024)
        }
    }

    pub fn effective_generations(&self) -> usize {
        if self.geqo_generations != 0 {
            self.geqo_generations as usize
        } else {
            self.effective_pool_size()
        }
    }
}

/// Partial parameter set; unset fields keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParamsOverride {
    pub seq_page_cost: Option<f64>,
    pub random_page_cost: Option<f64>,
    pub cpu_tuple_cost: Option<f64>,
    pub cpu_index_tuple_cost: Option<f64>,
    pub cpu_operator_cost: Option<f64>,
    pub geqo_threshold: Option<u32>,
    pub geqo_effort: Option<u32>,
    pub geqo_pool_size: Option<u32>,
    pub geqo_generations: Option<u32>,
    pub geqo_selection_bias: Option<f64>,
    pub rng_seed: Option<u64>,
}

impl CostParamsOverride {
    pub fn apply(&self, base: &CostParams) -> Result<CostParams, CostError> {
        let mut p = base.clone();
        macro_rules! merge {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { p.$field = v; } )* };
        }
        merge!(
            seq_page_cost,
            random_page_cost,
            cpu_tuple_cost,
            cpu_index_tuple_cost,
            cpu_operator_cost,
            geqo_threshold,
            geqo_effort,
            geqo_pool_size,
            geqo_generations,
            geqo_selection_bias,
            rng_seed
        );
        p.validated()
    }
}

/// Startup/total cost and output rows of one path. Run cost is
/// `total - startup`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathCost {
    pub startup: f64,
    pub total: f64,
    pub rows: f64,
}

impl PathCost {
    pub fn run(&self) -> f64 {
        self.total - self.startup
    }
}

fn clamp_selectivity(s: f64) -> f64 {
    s.clamp(SELECTIVITY_FLOOR, 1.0)
}

fn clamp_rows(rows: f64) -> f64 {
    rows.max(ROW_FLOOR)
}

/// Equality → 1/n_distinct, range comparison → 1/3.
pub fn clause_selectivity(clause: &Restriction, stats: &RelationStats) -> f64 {
    let s = match clause.op {
        CmpOp::Eq => {
            let d = stats
                .column(&clause.column.column)
                .map_or(1, |c| c.n_distinct.max(1));
            1.0 / d as f64
        }
        CmpOp::Lt | CmpOp::Gt | CmpOp::Le | CmpOp::Ge => RANGE_SELECTIVITY,
    };
    clamp_selectivity(s)
}

/// Product of clause selectivities (a conjunction), clamped.
pub fn conjunction_selectivity<'a>(
    clauses: impl IntoIterator<Item = &'a Restriction>,
    stats: &RelationStats,
) -> f64 {
    clamp_selectivity(
        clauses
            .into_iter()
            .map(|c| clause_selectivity(c, stats))
            .product(),
    )
}

pub fn scan_rows(stats: &RelationStats, clauses: &[Restriction]) -> f64 {
    clamp_rows(stats.tuples as f64 * conjunction_selectivity(clauses, stats))
}

pub fn cost_seq_scan(
    stats: &RelationStats,
    clauses: &[Restriction],
    params: &CostParams,
) -> PathCost {
    let per_tuple = params.cpu_tuple_cost + params.cpu_operator_cost * clauses.len() as f64;
    PathCost {
        startup: 0.0,
        total: params.seq_page_cost * stats.pages as f64 + per_tuple * stats.tuples as f64,
        rows: scan_rows(stats, clauses),
    }
}

/// `None` when no clause references an indexed column.
pub fn cost_index_scan(
    stats: &RelationStats,
    clauses: &[Restriction],
    params: &CostParams,
) -> Option<PathCost> {
    let indexed: Vec<&Restriction> = clauses
        .iter()
        .filter(|c| {
            stats
                .column(&c.column.column)
                .is_some_and(|col| col.has_index)
        })
        .collect();
    if indexed.is_empty() {
        return None;
    }
    let s = conjunction_selectivity(indexed, stats);
    let pages_fetched = (s * stats.pages as f64).ceil();
    let tuples_fetched = s * stats.tuples as f64;
    Some(PathCost {
        startup: 0.0,
        total: params.random_page_cost * pages_fetched
            + tuples_fetched * (params.cpu_index_tuple_cost + params.cpu_tuple_cost),
        rows: scan_rows(stats, clauses),
    })
}

/// `1 / max(d_left, d_right)` for one equi-join edge.
pub fn edge_selectivity(edge: &JoinEdge) -> f64 {
    clamp_selectivity(1.0 / edge.left_distinct.max(edge.right_distinct).max(1) as f64)
}

/// Product over the edges crossing a join; 1.0 for a cartesian product.
pub fn join_selectivity<'a>(edges_crossing: impl IntoIterator<Item = &'a JoinEdge>) -> f64 {
    clamp_selectivity(edges_crossing.into_iter().map(edge_selectivity).product())
}

fn sort_cost(rows: f64, params: &CostParams) -> f64 {
    2.0 * params.cpu_operator_cost * rows * rows.max(2.0).log2().ceil()
}

/// Join cost where the caller supplies the output row estimate.
pub fn cost_join_with_rows(
    method: JoinMethod,
    outer: &PathCost,
    inner: &PathCost,
    out_rows: f64,
    params: &CostParams,
) -> PathCost {
    let (startup, total) = match method {
        JoinMethod::NestLoop => (
            outer.startup + inner.startup,
            outer.total
                + outer.rows.round().max(1.0) * inner.total
                + params.cpu_tuple_cost * out_rows,
        ),
        JoinMethod::HashJoin => (
            inner.total + params.cpu_operator_cost * inner.rows,
            inner.total
                + outer.total
                + params.cpu_operator_cost * (inner.rows + outer.rows)
                + params.cpu_tuple_cost * out_rows,
        ),
        JoinMethod::MergeJoin => {
            let startup = outer.total
                + inner.total
                + sort_cost(outer.rows, params)
                + sort_cost(inner.rows, params);
            (startup, startup + params.cpu_tuple_cost * out_rows)
        }
    };
    PathCost {
        startup,
        total,
        rows: out_rows,
    }
}

/// Join cost with `rows = max(1, outer.rows · inner.rows · sel)`.
pub fn cost_join(
    method: JoinMethod,
    outer: &PathCost,
    inner: &PathCost,
    sel: f64,
    params: &CostParams,
) -> PathCost {
    let out_rows = clamp_rows(outer.rows * inner.rows * sel);
    cost_join_with_rows(method, outer, inner, out_rows, params)
}

/// Estimated rows of a set of base relations: the product of their scan
/// rows and of every edge selectivity inside the set, floored at one row.
///
/// The estimate depends only on the set, never on how it was assembled,
/// so every path for a relation set reports the same rows.
pub fn joinrel_rows<'a>(
    base_rows: impl IntoIterator<Item = f64>,
    inner_edges: impl IntoIterator<Item = &'a JoinEdge>,
) -> f64 {
    let product: f64 = base_rows.into_iter().product();
    let sel: f64 = inner_edges.into_iter().map(edge_selectivity).product();
    clamp_rows(product * sel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ColumnStats;
    use crate::query::{ColumnRef, Literal};
    use proptest::prelude::*;

    fn stats(pages: u64, tuples: u64, d: u64, indexed: bool) -> RelationStats {
        RelationStats {
            name: "t".into(),
            pages,
            tuples,
            columns: vec![
                ColumnStats {
                    name: "x".into(),
                    n_distinct: d,
                    has_index: indexed,
                },
                ColumnStats {
                    name: "y".into(),
                    n_distinct: 1,
                    has_index: false,
                },
            ],
        }
    }

    fn clause(column: &str, op: CmpOp) -> Restriction {
        Restriction {
            column: ColumnRef {
                alias: "t".into(),
                column: column.into(),
            },
            op,
            value: Literal::Number("5".into()),
        }
    }

    fn edge(dl: u64, dr: u64) -> JoinEdge {
        JoinEdge {
            left: 1,
            right: 2,
            left_column: "x".into(),
            right_column: "x".into(),
            left_distinct: dl,
            right_distinct: dr,
        }
    }

    fn pc(startup: f64, total: f64, rows: f64) -> PathCost {
        PathCost {
            startup,
            total,
            rows,
        }
    }

    #[test]
    fn selectivities() {
        let s = stats(100, 1000, 50, false);
        assert_eq!(clause_selectivity(&clause("x", CmpOp::Eq), &s), 0.02);
        assert_eq!(clause_selectivity(&clause("x", CmpOp::Gt), &s), 1.0 / 3.0);
        let both = conjunction_selectivity(&[clause("x", CmpOp::Eq), clause("x", CmpOp::Lt)], &s);
        assert!((both - 0.02 / 3.0).abs() < 1e-15);
        assert!((both - 0.006667).abs() < 1e-6);
    }

    #[test]
    fn seq_scan_examples() {
        let p = CostParams::default();
        let s = stats(100, 1000, 50, false);
        assert_eq!(cost_seq_scan(&s, &[], &p), pc(0.0, 110.0, 1000.0));
        assert_eq!(
            cost_seq_scan(&stats(0, 0, 1, false), &[], &p),
            pc(0.0, 0.0, 1.0)
        );
        let c = cost_seq_scan(&s, &[clause("x", CmpOp::Eq)], &p);
        assert!((c.total - 112.5).abs() < 1e-9);
        assert!((c.rows - 20.0).abs() < 1e-9);
    }

    #[test]
    fn index_scan_examples() {
        let p = CostParams::default();
        let s = stats(100, 1000, 50, true);
        let c = cost_index_scan(&s, &[clause("x", CmpOp::Eq)], &p).unwrap();
        assert!((c.total - 8.3).abs() < 1e-9, "{}", c.total);
        assert!((c.rows - 20.0).abs() < 1e-9);
        assert_eq!(cost_index_scan(&s, &[], &p), None);
        // Non-indexed column only.
        assert_eq!(cost_index_scan(&s, &[clause("y", CmpOp::Eq)], &p), None);
        // s·pages below one page: page term is exactly one random page.
        let tiny = stats(100, 100_000, 100_000, true);
        let c = cost_index_scan(&tiny, &[clause("x", CmpOp::Eq)], &p).unwrap();
        let page_term = c.total - 1.0 * (p.cpu_index_tuple_cost + p.cpu_tuple_cost);
        assert!((page_term - 4.0).abs() < 1e-12);
    }

    #[test]
    fn index_rows_use_all_clauses() {
        let p = CostParams::default();
        let s = stats(100, 1000, 50, true);
        let c = cost_index_scan(&s, &[clause("x", CmpOp::Eq), clause("y", CmpOp::Gt)], &p).unwrap();
        assert!((c.rows - 1000.0 * 0.02 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn join_selectivity_examples() {
        assert_eq!(join_selectivity([&edge(100, 40)]), 0.01);
        assert_eq!(join_selectivity(std::iter::empty()), 1.0);
        let two = join_selectivity([&edge(100, 1), &edge(10, 10)]);
        assert!((two - 0.001).abs() < 1e-15);
    }

    #[test]
    fn join_cost_examples() {
        let p = CostParams::default();
        let nl = cost_join(
            JoinMethod::NestLoop,
            &pc(0.0, 110.0, 1000.0),
            &pc(0.0, 8.3, 20.0),
            0.05,
            &p,
        );
        assert!((nl.rows - 1000.0).abs() < 1e-9);
        assert!((nl.total - 8420.0).abs() < 1e-9);

        let hj = cost_join(
            JoinMethod::HashJoin,
            &pc(0.0, 220.0, 2000.0),
            &pc(0.0, 110.0, 1000.0),
            0.001,
            &p,
        );
        assert!((hj.rows - 2000.0).abs() < 1e-9);
        assert!((hj.startup - 112.5).abs() < 1e-9);
        assert!((hj.total - 357.5).abs() < 1e-9);
        assert!((hj.run() - 245.0).abs() < 1e-9);

        let one = pc(0.0, 0.0, 1.0);
        for m in JoinMethod::ALL {
            assert_eq!(cost_join(m, &one, &one, 1.0, &p).rows, 1.0);
        }
        assert!((cost_join(JoinMethod::NestLoop, &one, &one, 1.0, &p).total - 0.01).abs() < 1e-15);
    }

    #[test]
    fn merge_join_sorts_both_inputs() {
        let p = CostParams::default();
        let mj = cost_join(
            JoinMethod::MergeJoin,
            &pc(0.0, 10.0, 8.0),
            &pc(0.0, 20.0, 1.0),
            0.5,
            &p,
        );
        // sort(8) = 2·0.0025·8·3 = 0.12; sort(1) = 2·0.0025·1·1 = 0.005
        assert!((mj.startup - 30.125).abs() < 1e-12);
        assert!((mj.total - (30.125 + 0.01 * 4.0)).abs() < 1e-12);
    }

    #[test]
    fn method_names_parse() {
        assert_eq!(
            "HashJoin".parse::<JoinMethod>().unwrap(),
            JoinMethod::HashJoin
        );
        assert_eq!(
            "BitmapJoin".parse::<JoinMethod>(),
            Err(CostError::UnknownMethod("BitmapJoin".into()))
        );
    }

    #[test]
    fn params_validation() {
        let p = CostParams::default().validated().unwrap();
        assert_eq!(p, CostParams::default());
        assert_eq!(p.effective_pool_size(), 64);
        assert_eq!(p.effective_generations(), 64);
        let bad = CostParamsOverride {
            geqo_selection_bias: Some(2.5),
            ..Default::default()
        };
        assert!(bad.apply(&p).is_err());
        let bad = CostParamsOverride {
            cpu_tuple_cost: Some(1e-9),
            ..Default::default()
        };
        assert!(bad.apply(&p).is_err());
        let ok = CostParamsOverride {
            geqo_threshold: Some(5),
            ..Default::default()
        };
        assert_eq!(ok.apply(&p).unwrap().geqo_threshold, 5);
        let small = CostParams {
            geqo_effort: 1,
            ..CostParams::default()
        };
        assert_eq!(small.effective_pool_size(), 16);
        let big = CostParams {
            geqo_effort: 10,
            ..CostParams::default()
        };
        assert_eq!(big.effective_pool_size(), 1024);
    }

    #[test]
    fn params_json_uses_six_decimals() {
        let text = serde_json::to_string(&CostParams::default()).unwrap();
        assert!(text.contains("\"cpu_operator_cost\":0.002500"), "{text}");
        let back: CostParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, CostParams::default());
    }

    fn arb_cost() -> impl Strategy<Value = PathCost> {
        (0.0f64..1e6, 0.0f64..1e6, 1.0f64..1e6).prop_map(|(a, b, rows)| {
            let (startup, total) = if a <= b { (a, b) } else { (b, a) };
            PathCost {
                startup,
                total,
                rows,
            }
        })
    }

    fn arb_params() -> impl Strategy<Value = CostParams> {
        (
            0.01f64..10.0,
            0.01f64..10.0,
            0.0001f64..1.0,
            0.0001f64..1.0,
            0.0001f64..1.0,
        )
            .prop_map(|(a, b, c, d, e)| CostParams {
                seq_page_cost: a,
                random_page_cost: b,
                cpu_tuple_cost: c,
                cpu_index_tuple_cost: d,
                cpu_operator_cost: e,
                ..CostParams::default()
            })
    }

    proptest! {
        #[test]
        fn startup_never_exceeds_total(o in arb_cost(), i in arb_cost(), sel in 1e-9f64..=1.0, p in arb_params()) {
            for m in JoinMethod::ALL {
                let c = cost_join(m, &o, &i, sel, &p);
                prop_assert!(0.0 <= c.startup && c.startup <= c.total);
            }
        }

        #[test]
        fn rows_are_method_independent(o in arb_cost(), i in arb_cost(), sel in 1e-9f64..=1.0) {
            let p = CostParams::default();
            let rows: Vec<f64> = JoinMethod::ALL.iter().map(|m| cost_join(*m, &o, &i, sel, &p).rows).collect();
            prop_assert!(rows.iter().all(|r| *r == rows[0]));
            let swapped = cost_join(JoinMethod::HashJoin, &i, &o, sel, &p);
            prop_assert_eq!(swapped.rows, rows[1]);
        }

        #[test]
        fn raising_a_constant_never_lowers_a_total(
            o in arb_cost(), i in arb_cost(), sel in 1e-9f64..=1.0, p in arb_params(),
            which in 0usize..5, factor in 1.0f64..10.0,
            pages in 0u64..10_000, tuples in 1u64..100_000, d in 1u64..100,
        ) {
            let mut q = p.clone();
            match which {
                0 => q.seq_page_cost *= factor,
                1 => q.random_page_cost *= factor,
                2 => q.cpu_tuple_cost *= factor,
                3 => q.cpu_index_tuple_cost *= factor,
                _ => q.cpu_operator_cost *= factor,
            }
            for m in JoinMethod::ALL {
                prop_assert!(cost_join(m, &o, &i, sel, &q).total >= cost_join(m, &o, &i, sel, &p).total);
            }
            let s = stats(pages.max(1), tuples, d.min(tuples), true);
            let clauses = [clause("x", CmpOp::Eq)];
            prop_assert!(cost_seq_scan(&s, &clauses, &q).total >= cost_seq_scan(&s, &clauses, &p).total);
            prop_assert!(
                cost_index_scan(&s, &clauses, &q).unwrap().total
                    >= cost_index_scan(&s, &clauses, &p).unwrap().total
            );
        }
    }
}
