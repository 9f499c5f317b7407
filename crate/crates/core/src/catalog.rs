//! Table statistics consumed by the cost model.
//!
//! A [`Catalog`] is a named collection of [`RelationStats`]. Statistics are
//! intentionally small: page and tuple counts per relation and, per column, a
//! distinct-value count and whether an index exists on it. Names are
//! case-insensitive and stored lower-cased.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Name of the preset catalog bundled with the crate.
pub const TPCH_LIKE: &str = "tpch-like";

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog file {path} could not be read: {source}")]
    FileMissing {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("schema violation at `{field}`: {message}")]
    SchemaViolation { field: String, message: String },
    #[error("duplicate relation `{0}`")]
    DuplicateRelation(String),
    #[error("invariant violation in relation `{relation}`: {message}")]
    InvariantViolation { relation: String, message: String },
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("could not write catalog: {0}")]
    Write(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnStats {
    pub name: String,
    pub n_distinct: u64,
    pub has_index: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationStats {
    pub name: String,
    pub pages: u64,
    pub tuples: u64,
    pub columns: Vec<ColumnStats>,
}

impl RelationStats {
    /// Looks up a column by (case-insensitive) name.
    ///
    /// Relations synthesized for CTE outputs carry a single wildcard column
    /// named `*` that stands in for every column of the CTE.
    pub fn column(&self, name: &str) -> Option<&ColumnStats> {
        let lowered = name.to_ascii_lowercase();
        self.columns
            .iter()
            .find(|c| c.name == lowered)
            .or_else(|| match self.columns.as_slice() {
                [only] if only.name == "*" => Some(only),
                _ => None,
            })
    }

    fn normalize(&mut self) {
        self.name = self.name.to_ascii_lowercase();
        for column in &mut self.columns {
            column.name = column.name.to_ascii_lowercase();
        }
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let violation = |message: String| CatalogError::InvariantViolation {
            relation: self.name.clone(),
            message,
        };
        if self.name.is_empty() {
            return Err(violation("relation name is empty".into()));
        }
        if self.tuples > 0 && self.pages == 0 {
            return Err(violation(format!(
                "{} tuples stored in zero pages",
                self.tuples
            )));
        }
        let mut seen = HashSet::new();
        for column in &self.columns {
            if column.name.is_empty() {
                return Err(violation("column name is empty".into()));
            }
            if !seen.insert(column.name.as_str()) {
                return Err(violation(format!("duplicate column `{}`", column.name)));
            }
            if column.n_distinct == 0 {
                return Err(violation(format!(
                    "column `{}` has n_distinct = 0",
                    column.name
                )));
            }
            if column.n_distinct > self.tuples.max(1) {
                return Err(violation(format!(
                    "column `{}` has n_distinct {} > tuples {}",
                    column.name, column.n_distinct, self.tuples
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    name: String,
    relations: Vec<RelationStats>,
}

/// Immutable statistics catalog.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    name: String,
    relations: Vec<RelationStats>,
}

impl Catalog {
    /// Builds a catalog, normalizing names and checking every invariant.
    pub fn new(
        name: impl Into<String>,
        relations: Vec<RelationStats>,
    ) -> Result<Self, CatalogError> {
        let mut relations = relations;
        let mut seen = HashSet::new();
        for relation in &mut relations {
            relation.normalize();
            if !seen.insert(relation.name.clone()) {
                return Err(CatalogError::DuplicateRelation(relation.name.clone()));
            }
            relation.validate()?;
        }
        Ok(Self {
            name: name.into().to_ascii_lowercase(),
            relations,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Relations in file order.
    pub fn relations(&self) -> &[RelationStats] {
        &self.relations
    }

    pub fn relation_stats(&self, name: &str) -> Result<&RelationStats, CatalogError> {
        let lowered = name.to_ascii_lowercase();
        self.relations
            .iter()
            .find(|r| r.name == lowered)
            .ok_or(CatalogError::UnknownRelation(lowered))
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: CatalogFile = serde_path_to_error::deserialize(de).map_err(|err| {
            let field = err.path().to_string();
            CatalogError::SchemaViolation {
                field,
                message: err.into_inner().to_string(),
            }
        })?;
        Catalog::new(file.name, file.relations)
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            name: self.name.clone(),
            relations: self.relations.clone(),
        };
        serde_json::to_string_pretty(&file).expect("catalog serialization is infallible")
    }
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| CatalogError::FileMissing {
        path: path.display().to_string(),
        source,
    })?;
    Catalog::from_json(&text)
}

pub fn write_catalog(catalog: &Catalog, path: impl AsRef<Path>) -> Result<(), CatalogError> {
    fs::write(path, catalog.to_json()).map_err(|e| CatalogError::Write(e.to_string()))
}

fn col(name: &str, n_distinct: u64, has_index: bool) -> ColumnStats {
    ColumnStats {
        name: name.to_string(),
        n_distinct,
        has_index,
    }
}

fn rel(name: &str, pages: u64, tuples: u64, columns: Vec<ColumnStats>) -> RelationStats {
    RelationStats {
        name: name.to_string(),
        pages,
        tuples,
        columns,
    }
}

/// The bundled `tpch-like` catalog: the eight TPC-H table names with
/// round-number sizes. The numbers are fixtures only.
pub fn tpch_like() -> Catalog {
    let relations = vec![
        rel(
            "region",
            1,
            5,
            vec![col("r_regionkey", 5, true), col("r_name", 5, false)],
        ),
        rel(
            "nation",
            1,
            25,
            vec![
                col("n_nationkey", 25, true),
                col("n_regionkey", 5, false),
                col("n_name", 25, false),
            ],
        ),
        rel(
            "supplier",
            200,
            10_000,
            vec![
                col("s_suppkey", 10_000, true),
                col("s_nationkey", 25, false),
                col("s_acctbal", 9_000, false),
            ],
        ),
        rel(
            "customer",
            3_500,
            150_000,
            vec![
                col("c_custkey", 150_000, true),
                col("c_nationkey", 25, false),
                col("c_mktsegment", 5, false),
                col("c_acctbal", 140_000, false),
            ],
        ),
        rel(
            "part",
            4_000,
            200_000,
            vec![
                col("p_partkey", 200_000, true),
                col("p_brand", 25, false),
                col("p_type", 150, false),
                col("p_size", 50, false),
            ],
        ),
        rel(
            "partsupp",
            17_000,
            800_000,
            vec![
                col("ps_partkey", 200_000, true),
                col("ps_suppkey", 10_000, false),
                col("ps_supplycost", 100_000, false),
            ],
        ),
        rel(
            "orders",
            26_000,
            1_500_000,
            vec![
                col("o_orderkey", 1_500_000, true),
                col("o_custkey", 100_000, true),
                col("o_orderdate", 2_400, false),
                col("o_orderpriority", 5, false),
                col("o_orderstatus", 3, false),
            ],
        ),
        rel(
            "lineitem",
            110_000,
            6_000_000,
            vec![
                col("l_orderkey", 1_500_000, true),
                col("l_partkey", 200_000, false),
                col("l_suppkey", 10_000, false),
                col("l_shipdate", 2_500, false),
                col("l_returnflag", 3, false),
                col("l_quantity", 50, false),
                col("l_shipmode", 7, false),
            ],
        ),
    ];
    Catalog::new(TPCH_LIKE, relations).expect("bundled catalog is valid")
}
