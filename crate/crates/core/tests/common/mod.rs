#![allow(dead_code)]

use std::collections::HashMap;

use optlab_core::catalog::{tpch_like, Catalog, ColumnStats, RelationStats};
use optlab_core::cost::{
    cost_index_scan, cost_join_with_rows, cost_seq_scan, joinrel_rows, scan_rows, CostParams,
    JoinMethod, PathCost,
};
use optlab_core::presets::preset_by_name;
use optlab_core::query::{build_query_graph, parse_query, QueryGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random catalog and a connected query over it with `n` relations.
pub fn random_case(seed: u64, n: usize) -> (Catalog, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = n.div_ceil(2) + rng.gen_range(0..=n / 2);
    let relations: Vec<RelationStats> = (0..tables)
        .map(|t| {
            let pages = rng.gen_range(1..=4000u64);
            let tuples = pages * rng.gen_range(5..=120u64);
            let columns = (0..4)
                .map(|c| ColumnStats {
                    name: format!("c{c}"),
                    n_distinct: rng.gen_range(1..=tuples),
                    has_index: rng.gen_bool(0.4),
                })
                .collect();
            RelationStats {
                name: format!("t{t}"),
                pages,
                tuples,
                columns,
            }
        })
        .collect();
    let catalog = Catalog::new("random", relations).expect("generated catalog is valid");

    let from: Vec<String> = (0..n)
        .map(|i| format!("t{} a{i}", rng.gen_range(0..tables)))
        .collect();
    let mut predicates = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let col = |rng: &mut ChaCha8Rng| format!("c{}", rng.gen_range(0..4));
    for i in 1..n {
        let a = order[i];
        let b = order[rng.gen_range(0..i)];
        predicates.push(format!("a{a}.{} = a{b}.{}", col(&mut rng), col(&mut rng)));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            predicates.push(format!("a{a}.{} = a{b}.{}", col(&mut rng), col(&mut rng)));
        }
    }
    for _ in 0..rng.gen_range(0..=n) {
        let op = ["=", "<", ">=", "="][rng.gen_range(0..4)];
        predicates.push(format!(
            "a{}.{} {op} {}",
            rng.gen_range(0..n),
            col(&mut rng),
            rng.gen_range(0..1000)
        ));
    }
    predicates.shuffle(&mut rng);
    let mut sql = format!("SELECT * FROM {}", from.join(", "));
    if !predicates.is_empty() {
        sql += " WHERE ";
        sql += &predicates.join(" AND ");
    }
    (catalog, sql)
}

pub fn main_graph(catalog: &Catalog, sql: &str) -> QueryGraph {
    let spec = parse_query(sql).unwrap_or_else(|e| panic!("{sql}: {e}"));
    build_query_graph(&spec, catalog, &HashMap::new())
        .unwrap_or_else(|e| panic!("{sql}: {e}"))
        .pop()
        .expect("main block")
}

pub fn preset_graph(name: &str) -> QueryGraph {
    main_graph(
        &tpch_like(),
        preset_by_name(name).expect("preset exists").sql,
    )
}

/// Brute-force join search kept independent of the planners: it walks
/// every cross-product-free binary tree and costs it with the cost-model
/// functions directly.
pub struct Oracle<'g> {
    graph: &'g QueryGraph,
    params: &'g CostParams,
    base_rows: Vec<f64>,
    scans: Vec<PathCost>,
}

impl<'g> Oracle<'g> {
    pub fn new(graph: &'g QueryGraph, params: &'g CostParams) -> Self {
        let base_rows: Vec<f64> = graph
            .rels
            .iter()
            .map(|r| scan_rows(&r.stats, &r.restrictions))
            .collect();
        let scans = graph
            .rels
            .iter()
            .map(|r| {
                let seq = cost_seq_scan(&r.stats, &r.restrictions, params);
                match cost_index_scan(&r.stats, &r.restrictions, params) {
                    Some(index) if index.total < seq.total => index,
                    _ => seq,
                }
            })
            .collect();
        Oracle {
            graph,
            params,
            base_rows,
            scans,
        }
    }

    fn rows(&self, mask: u64) -> f64 {
        let ordinals = (0..64).filter(|i| mask & (1 << i) != 0);
        joinrel_rows(
            ordinals.map(|i| self.base_rows[i]),
            self.graph
                .edges
                .iter()
                .filter(|e| mask & (1 << (e.left - 1)) != 0 && mask & (1 << (e.right - 1)) != 0),
        )
    }

    fn linked(&self, a: u64, b: u64) -> bool {
        self.graph.edges.iter().any(|e| {
            let (l, r) = (1u64 << (e.left - 1), 1u64 << (e.right - 1));
            (l & a != 0 && r & b != 0) || (l & b != 0 && r & a != 0)
        })
    }

    /// Every tree over `mask`, one cost per tree. With `all_methods` each
    /// join node is expanded into all three methods; otherwise only the
    /// cheapest method per node is kept (parent totals depend on child
    /// totals monotonically, so this preserves the minimum).
    pub fn trees(&self, mask: u64, all_methods: bool) -> Vec<PathCost> {
        if mask.count_ones() == 1 {
            let mut scan = self.scans[mask.trailing_zeros() as usize];
            scan.rows = self.rows(mask);
            return vec![scan];
        }
        let rows = self.rows(mask);
        let mut out = Vec::new();
        let mut left = (mask - 1) & mask;
        while left != 0 {
            let right = mask & !left;
            if self.linked(left, right) {
                let outers = self.trees(left, all_methods);
                let inners = self.trees(right, all_methods);
                for o in &outers {
                    for i in &inners {
                        let costs = JoinMethod::ALL
                            .map(|m| cost_join_with_rows(m, o, i, rows, self.params));
                        if all_methods {
                            out.extend(costs);
                        } else {
                            let best = costs
                                .into_iter()
                                .min_by(|a, b| a.total.total_cmp(&b.total))
                                .expect("three methods");
                            out.push(best);
                        }
                    }
                }
            }
            left = (left - 1) & mask;
        }
        out
    }

    pub fn best_total(&self, all_methods: bool) -> f64 {
        self.trees(self.graph.full_mask(), all_methods)
            .iter()
            .map(|c| c.total)
            .min_by(f64::total_cmp)
            .expect("connected graph has a tree")
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

pub fn geqo_params(seed: u64, pool: u32, generations: u32) -> CostParams {
    CostParams {
        geqo_pool_size: pool,
        geqo_generations: generations,
        rng_seed: seed,
        ..CostParams::default()
    }
}
