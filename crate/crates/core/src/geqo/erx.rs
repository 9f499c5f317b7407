//! Edge recombination crossover over linear join sequences.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use super::GeqoError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSource {
    Parent1,
    Parent2,
    Both,
}

/// Undirected adjacency `a < b` and the parents it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErxEdge {
    pub a: usize,
    pub b: usize,
    pub source: EdgeSource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EdgeTable {
    /// Sorted by `(a, b)`.
    pub edges: Vec<ErxEdge>,
}

impl EdgeTable {
    pub fn build(parent1: &[usize], parent2: &[usize]) -> EdgeTable {
        let mut map: BTreeMap<(usize, usize), EdgeSource> = BTreeMap::new();
        let key = |x: usize, y: usize| (x.min(y), x.max(y));
        for w in parent1.windows(2) {
            map.insert(key(w[0], w[1]), EdgeSource::Parent1);
        }
        for w in parent2.windows(2) {
            map.entry(key(w[0], w[1]))
                .and_modify(|s| *s = EdgeSource::Both)
                .or_insert(EdgeSource::Parent2);
        }
        EdgeTable {
            edges: map
                .into_iter()
                .map(|((a, b), source)| ErxEdge { a, b, source })
                .collect(),
        }
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        let (a, b) = (x.min(y), x.max(y));
        self.edges
            .binary_search_by(|e| (e.a, e.b).cmp(&(a, b)))
            .is_ok()
    }

    /// Neighbours of `x` with a shared-edge flag, ascending.
    pub fn neighbors(&self, x: usize) -> Vec<(usize, bool)> {
        let mut out: Vec<(usize, bool)> = self
            .edges
            .iter()
            .filter_map(|e| {
                let other = if e.a == x {
                    e.b
                } else if e.b == x {
                    e.a
                } else {
                    return None;
                };
                Some((other, e.source == EdgeSource::Both))
            })
            .collect();
        out.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErxOutcome {
    pub offspring: Vec<usize>,
    pub edge_failures: u32,
    pub edge_table: EdgeTable,
}

fn check_parents(parent1: &[usize], parent2: &[usize]) -> Result<(), GeqoError> {
    let a: BTreeSet<usize> = parent1.iter().copied().collect();
    let b: BTreeSet<usize> = parent2.iter().copied().collect();
    if parent1.is_empty() || a.len() != parent1.len() || b.len() != parent2.len() || a != b {
        return Err(GeqoError::ParentMismatch);
    }
    Ok(())
}

/// Builds one offspring from two parents.
///
/// Starting at `parent1[0]`, each step moves to the unvisited neighbour with
/// the fewest unvisited neighbours of its own, preferring edges both parents
/// share and breaking remaining ties with `rng`. A node with no unvisited
/// neighbours forces a jump to a random unvisited node, counted as an edge
/// failure.
pub fn erx_crossover<R: Rng + ?Sized>(
    parent1: &[usize],
    parent2: &[usize],
    rng: &mut R,
) -> Result<ErxOutcome, GeqoError> {
    check_parents(parent1, parent2)?;
    let table = EdgeTable::build(parent1, parent2);
    let adjacency: BTreeMap<usize, Vec<(usize, bool)>> =
        parent1.iter().map(|&x| (x, table.neighbors(x))).collect();
    let mut unvisited: BTreeSet<usize> = parent1.iter().copied().collect();
    let remaining = |x: usize, unvisited: &BTreeSet<usize>| {
        adjacency[&x]
            .iter()
            .filter(|(y, _)| unvisited.contains(y))
            .count()
    };

    let mut offspring = Vec::with_capacity(parent1.len());
    let mut failures = 0u32;
    let mut current = parent1[0];
    loop {
        unvisited.remove(&current);
        offspring.push(current);
        if unvisited.is_empty() {
            break;
        }
        let options: Vec<(usize, bool, usize)> = adjacency[&current]
            .iter()
            .filter(|(y, _)| unvisited.contains(y))
            .map(|&(y, shared)| (y, shared, remaining(y, &unvisited)))
            .collect();
        current = match options.iter().map(|o| o.2).min() {
            Some(fewest) => {
                let mut ties: Vec<&(usize, bool, usize)> =
                    options.iter().filter(|o| o.2 == fewest).collect();
                if ties.iter().any(|o| o.1) {
                    ties.retain(|o| o.1);
                }
                if ties.len() == 1 {
                    ties[0].0
                } else {
                    ties[rng.gen_range(0..ties.len())].0
                }
            }
            None => {
                failures += 1;
                let pool: Vec<usize> = unvisited.iter().copied().collect();
                pool[rng.gen_range(0..pool.len())]
            }
        };
    }
    Ok(ErxOutcome {
        offspring,
        edge_failures: failures,
        edge_table: table,
    })
}
