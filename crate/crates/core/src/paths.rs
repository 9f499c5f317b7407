//! Access-path construction shared by the DP and genetic planners.

use crate::cost::{
    cost_index_scan, cost_join_with_rows, cost_seq_scan, joinrel_rows, scan_rows, CostParams,
    JoinMethod, PathCost, ScanMethod,
};
use crate::query::{BaseRel, HintSet, QueryGraph};
use crate::trace::PathType;

/// A costed path before it is given an id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub path_type: PathType,
    pub cost: PathCost,
}

/// Scan paths for one base relation and an optional warning about an
/// inapplicable hint.
pub fn scan_candidates(
    rel: &BaseRel,
    hints: &HintSet,
    params: &CostParams,
) -> (Vec<Candidate>, Option<String>) {
    let seq = Candidate {
        path_type: if rel.from_cte {
            PathType::CteScan
        } else {
            PathType::SeqScan
        },
        cost: cost_seq_scan(&rel.stats, &rel.restrictions, params),
    };
    let index = if rel.from_cte {
        None
    } else {
        cost_index_scan(&rel.stats, &rel.restrictions, params).map(|cost| Candidate {
            path_type: PathType::IndexScan,
            cost,
        })
    };
    match (hints.scan_hints.get(&rel.alias), index) {
        (None, index) => (std::iter::once(seq).chain(index).collect(), None),
        (Some(ScanMethod::SeqScan), _) => (vec![seq], None),
        (Some(ScanMethod::IndexScan), Some(index)) => (vec![index], None),
        (Some(ScanMethod::IndexScan), None) => (
            vec![seq],
            Some(format!(
                "IndexScan({}) is not applicable: no restriction on an indexed column; using {}",
                rel.alias, seq.path_type
            )),
        ),
    }
}

/// The preferred candidate: lowest total, then lowest startup, then the
/// earliest generated.
pub fn cheapest(candidates: &[Candidate]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => {
                let b = &candidates[b].cost;
                c.cost
                    .total
                    .total_cmp(&b.total)
                    .then(c.cost.startup.total_cmp(&b.startup))
                    .is_lt()
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}

/// Per-graph planning state shared by both planners: scan candidates,
/// base row estimates, resolved hints and accumulated warnings.
#[derive(Debug, Clone)]
pub struct PlanContext<'g> {
    pub graph: &'g QueryGraph,
    pub params: &'g CostParams,
    /// Scan candidates indexed by `ordinal - 1`.
    pub scans: Vec<Vec<Candidate>>,
    base_rows: Vec<f64>,
    join_hints: Vec<(u64, Vec<JoinMethod>)>,
    /// Leading-hint ordinals, when the hint is usable.
    pub leading: Option<Vec<usize>>,
    pub warnings: Vec<String>,
}

impl<'g> PlanContext<'g> {
    pub fn new(graph: &'g QueryGraph, params: &'g CostParams) -> Self {
        let mut warnings = Vec::new();
        let mut scans = Vec::with_capacity(graph.len());
        for rel in &graph.rels {
            let (candidates, warning) = scan_candidates(rel, &graph.hints, params);
            warnings.extend(warning);
            scans.push(candidates);
        }
        let base_rows = graph
            .rels
            .iter()
            .map(|r| scan_rows(&r.stats, &r.restrictions))
            .collect();
        let mask_of = |aliases: &mut dyn Iterator<Item = &String>| -> Option<u64> {
            let mut mask = 0u64;
            for alias in aliases {
                mask |= 1u64 << (graph.ordinal_of(alias)? - 1);
            }
            Some(mask)
        };
        let join_hints = graph
            .hints
            .join_method_hints
            .iter()
            .filter_map(|(aliases, methods)| {
                let mask = mask_of(&mut aliases.iter())?;
                Some((mask, methods.iter().copied().collect()))
            })
            .collect();
        let leading = graph
            .hints
            .leading
            .as_ref()
            .and_then(|list| list.iter().map(|a| graph.ordinal_of(a)).collect());
        PlanContext {
            graph,
            params,
            scans,
            base_rows,
            join_hints,
            leading,
            warnings,
        }
    }

    /// Row estimate for a relation set; independent of join order.
    pub fn rows(&self, mask: u64) -> f64 {
        joinrel_rows(
            crate::query::mask_ordinals(mask).map(|o| self.base_rows[o - 1]),
            self.graph.edges.iter().filter(|e| e.within(mask)),
        )
    }

    /// Join methods allowed when the result is exactly `mask`.
    pub fn allowed_methods(&self, mask: u64) -> &[JoinMethod] {
        self.join_hints
            .iter()
            .find(|(m, _)| *m == mask)
            .map_or(&JoinMethod::ALL[..], |(_, methods)| methods.as_slice())
    }

    /// Cheapest scan candidate of a base relation.
    pub fn cheapest_scan(&self, ordinal: usize) -> Candidate {
        let scans = &self.scans[ordinal - 1];
        scans[cheapest(scans).expect("every relation has a scan path")]
    }

    pub fn join(
        &self,
        method: JoinMethod,
        outer: &PathCost,
        inner: &PathCost,
        out_rows: f64,
    ) -> Candidate {
        Candidate {
            path_type: method.into(),
            cost: cost_join_with_rows(method, outer, inner, out_rows, self.params),
        }
    }
}
