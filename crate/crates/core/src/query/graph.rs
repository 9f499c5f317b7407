use std::collections::HashMap;

use crate::catalog::{Catalog, ColumnStats, RelationStats};

use super::{FromSource, HintSet, QueryBlock, QueryError, QuerySpec, Restriction};

/// Largest block the planners accept; relation sets are 64-bit masks.
pub const MAX_RELATIONS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct BaseRel {
    /// 1-based position in the FROM list.
    pub ordinal: usize,
    pub alias: String,
    /// Catalog relation name, or the CTE label for CTE-derived relations.
    pub relation: String,
    pub from_cte: bool,
    pub stats: RelationStats,
    pub restrictions: Vec<Restriction>,
}

impl BaseRel {
    pub fn column(&self, name: &str) -> Option<&ColumnStats> {
        self.stats.column(name)
    }
}

/// Binary equi-join edge between two base relations.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinEdge {
    pub left: usize,
    pub right: usize,
    pub left_column: String,
    pub right_column: String,
    pub left_distinct: u64,
    pub right_distinct: u64,
}

impl JoinEdge {
    fn mask(&self) -> u64 {
        (1u64 << (self.left - 1)) | (1u64 << (self.right - 1))
    }

    /// True when the edge has one endpoint in each of two disjoint sets.
    pub fn crosses(&self, a: u64, b: u64) -> bool {
        let (l, r) = (1u64 << (self.left - 1), 1u64 << (self.right - 1));
        (l & a != 0 && r & b != 0) || (l & b != 0 && r & a != 0)
    }

    /// True when both endpoints lie inside `set`.
    pub fn within(&self, set: u64) -> bool {
        self.mask() & set == self.mask()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryGraph {
    pub label: String,
    pub rels: Vec<BaseRel>,
    pub edges: Vec<JoinEdge>,
    pub hints: HintSet,
}

impl QueryGraph {
    pub fn len(&self) -> usize {
        self.rels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rels.is_empty()
    }

    pub fn rel(&self, ordinal: usize) -> &BaseRel {
        &self.rels[ordinal - 1]
    }

    pub fn ordinal_of(&self, alias: &str) -> Option<usize> {
        self.rels
            .iter()
            .find(|r| r.alias == alias)
            .map(|r| r.ordinal)
    }

    /// Bitmask with every ordinal set.
    pub fn full_mask(&self) -> u64 {
        if self.rels.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.rels.len()) - 1
        }
    }

    pub fn crossing_edges(&self, a: u64, b: u64) -> impl Iterator<Item = &JoinEdge> {
        self.edges.iter().filter(move |e| e.crosses(a, b))
    }

    pub fn connected(&self, a: u64, b: u64) -> bool {
        self.crossing_edges(a, b).next().is_some()
    }

    /// Aliases of the ordinals in `set`, in ordinal order.
    pub fn aliases(&self, set: u64) -> Vec<&str> {
        mask_ordinals(set)
            .map(|o| self.rel(o).alias.as_str())
            .collect()
    }
}

/// Ordinals (1-based) contained in a relation-set mask, ascending.
pub fn mask_ordinals(mask: u64) -> impl Iterator<Item = usize> {
    (0..64)
        .filter(move |i| mask & (1u64 << i) != 0)
        .map(|i| i + 1)
}

fn cte_stats(label: &str, rows: f64) -> RelationStats {
    let tuples = rows.round().max(1.0) as u64;
    RelationStats {
        name: label.to_string(),
        pages: tuples.div_ceil(100),
        tuples,
        columns: vec![ColumnStats {
            name: "*".to_string(),
            n_distinct: tuples,
            has_index: false,
        }],
    }
}

/// Builds the graph for one block. CTE references need a planned row count
/// in `cte_rows`.
pub fn build_block_graph(
    block: &QueryBlock,
    catalog: &Catalog,
    cte_rows: &HashMap<String, f64>,
) -> Result<QueryGraph, QueryError> {
    if block.from.len() > MAX_RELATIONS {
        return Err(QueryError::Unsupported {
            feature: format!("more than {MAX_RELATIONS} relations in one block"),
            line: 1,
            column: 1,
        });
    }
    let mut rels = Vec::with_capacity(block.from.len());
    for (i, item) in block.from.iter().enumerate() {
        let (relation, from_cte, stats) = match &item.source {
            FromSource::Relation(name) => {
                let stats = catalog
                    .relation_stats(name)
                    .map_err(|_| QueryError::UnknownRelation(name.clone()))?;
                (name.clone(), false, stats.clone())
            }
            FromSource::Cte(label) => {
                let rows = cte_rows
                    .get(label)
                    .ok_or_else(|| QueryError::MissingCteEstimate(label.clone()))?;
                (label.clone(), true, cte_stats(label, *rows))
            }
        };
        rels.push(BaseRel {
            ordinal: i + 1,
            alias: item.alias.clone(),
            relation,
            from_cte,
            stats,
            restrictions: Vec::new(),
        });
    }
    let index: HashMap<&str, usize> = rels.iter().map(|r| (r.alias.as_str(), r.ordinal)).collect();
    let lookup = |alias: &str, column: &str| -> Result<(usize, u64), QueryError> {
        let ordinal = *index.get(alias).ok_or_else(|| QueryError::UnknownAlias {
            alias: alias.to_string(),
            position: None,
        })?;
        let stats = rels[ordinal - 1]
            .column(column)
            .ok_or_else(|| QueryError::UnknownColumn {
                alias: alias.to_string(),
                column: column.to_string(),
            })?;
        Ok((ordinal, stats.n_distinct))
    };
    let mut edges = Vec::with_capacity(block.joins.len());
    for join in &block.joins {
        let (left, left_distinct) = lookup(&join.left.alias, &join.left.column)?;
        let (right, right_distinct) = lookup(&join.right.alias, &join.right.column)?;
        edges.push(JoinEdge {
            left,
            right,
            left_column: join.left.column.clone(),
            right_column: join.right.column.clone(),
            left_distinct,
            right_distinct,
        });
    }
    let mut placed = Vec::with_capacity(block.restrictions.len());
    for restriction in &block.restrictions {
        let (ordinal, _) = lookup(&restriction.column.alias, &restriction.column.column)?;
        placed.push((ordinal, restriction.clone()));
    }
    for (ordinal, restriction) in placed {
        rels[ordinal - 1].restrictions.push(restriction);
    }
    Ok(QueryGraph {
        label: block.label.clone(),
        rels,
        edges,
        hints: block.hints.clone(),
    })
}

/// One graph per block in dependency order (CTEs before `main`).
pub fn build_query_graph(
    spec: &QuerySpec,
    catalog: &Catalog,
    cte_rows: &HashMap<String, f64>,
) -> Result<Vec<QueryGraph>, QueryError> {
    spec.blocks
        .iter()
        .map(|block| build_block_graph(block, catalog, cte_rows))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn catalog() -> Catalog {
        Catalog::from_json(
            r#"{"name":"t","relations":[
            {"name":"a","pages":10,"tuples":1000,"columns":[
                {"name":"x","n_distinct":100,"has_index":true},
                {"name":"y","n_distinct":10,"has_index":false}]},
            {"name":"b","pages":20,"tuples":2000,"columns":[
                {"name":"x","n_distinct":40,"has_index":false},
                {"name":"y","n_distinct":20,"has_index":false}]},
            {"name":"c","pages":5,"tuples":500,"columns":[
                {"name":"y","n_distinct":50,"has_index":true}]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn ordinals_follow_from_order() {
        let spec = parse_query("SELECT * FROM c, a, b WHERE a.x = b.x").unwrap();
        let graphs = build_query_graph(&spec, &catalog(), &HashMap::new()).unwrap();
        let aliases: Vec<_> = graphs[0].rels.iter().map(|r| r.alias.as_str()).collect();
        assert_eq!(aliases, ["c", "a", "b"]);
        assert_eq!(
            graphs[0].rels.iter().map(|r| r.ordinal).collect::<Vec<_>>(),
            [1, 2, 3]
        );
    }

    #[test]
    fn chain_produces_two_edges() {
        let spec = parse_query("SELECT * FROM a, b, c WHERE a.x = b.x AND b.y = c.y").unwrap();
        let graph = &build_query_graph(&spec, &catalog(), &HashMap::new()).unwrap()[0];
        let pairs: Vec<_> = graph.edges.iter().map(|e| (e.left, e.right)).collect();
        assert_eq!(pairs, [(1, 2), (2, 3)]);
        assert_eq!(graph.edges[0].left_distinct, 100);
        assert_eq!(graph.edges[0].right_distinct, 40);
        assert!(!graph.connected(0b001, 0b100));
    }

    #[test]
    fn cte_gets_synthetic_stats() {
        let spec = parse_query(
            "WITH k AS (SELECT * FROM a WHERE a.y = 1) SELECT * FROM k, b WHERE k.x = b.x",
        )
        .unwrap();
        let rows = HashMap::from([("k".to_string(), 500.0)]);
        let graphs = build_query_graph(&spec, &catalog(), &rows).unwrap();
        let cte = graphs[1].rel(1);
        assert!(cte.from_cte);
        assert_eq!(cte.stats.tuples, 500);
        assert_eq!(cte.stats.pages, 5);
        assert_eq!(cte.stats.columns.len(), 1);
        assert_eq!(cte.column("x").unwrap().n_distinct, 500);
        assert!(!cte.column("anything").unwrap().has_index);
        assert_eq!(graphs[1].edges[0].left_distinct, 500);
    }

    #[test]
    fn missing_inputs_are_errors() {
        let spec = parse_query("SELECT * FROM zzz").unwrap();
        assert_eq!(
            build_query_graph(&spec, &catalog(), &HashMap::new()).unwrap_err(),
            QueryError::UnknownRelation("zzz".into())
        );
        let spec = parse_query("SELECT * FROM a WHERE a.nope = 1").unwrap();
        assert!(matches!(
            build_query_graph(&spec, &catalog(), &HashMap::new()),
            Err(QueryError::UnknownColumn { .. })
        ));
        let spec = parse_query("WITH k AS (SELECT * FROM a) SELECT * FROM k").unwrap();
        assert_eq!(
            build_query_graph(&spec, &catalog(), &HashMap::new()).unwrap_err(),
            QueryError::MissingCteEstimate("k".into())
        );
    }

    #[test]
    fn restrictions_attach_to_their_relation() {
        let spec =
            parse_query("SELECT * FROM a, b WHERE b.y > 3 AND a.x = 7 AND a.x = b.x").unwrap();
        let graph = &build_query_graph(&spec, &catalog(), &HashMap::new()).unwrap()[0];
        assert_eq!(graph.rel(1).restrictions.len(), 1);
        assert_eq!(graph.rel(2).restrictions.len(), 1);
    }
}
