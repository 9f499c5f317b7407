//! Genetic join-order search.
//!
//! A pool of join sequences is evolved one offspring per generation: two
//! parents are drawn with a linear rank bias, recombined with ERX, and the
//! offspring is inserted at its sorted position before the worst member is
//! dropped. Genes are scored by the cost of their left-deep plan.

mod erx;

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostParams, JoinMethod, PathCost};
use crate::fixed::{decimal6, Fixed6};
use crate::paths::{cheapest, Candidate, PlanContext};
use crate::query::QueryGraph;
use crate::trace::{PlanTree, TraceError, TraceSink};

pub use erx::{erx_crossover, EdgeSource, EdgeTable, ErxEdge, ErxOutcome};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeqoError {
    #[error("pool size {0} is too small; at least 2 genes are required")]
    PoolTooSmall(usize),
    #[error("genetic search needs at least 2 relations, got {0}")]
    TooFewRelations(usize),
    #[error("parents are not permutations of the same relations")]
    ParentMismatch,
    #[error("sequence {0:?} is not a permutation of the block's relations")]
    InvalidSequence(Vec<usize>),
}

/// A gene as recorded in a trace snapshot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gene {
    pub sequence: Vec<usize>,
    pub cost: Fixed6,
    /// Pool indices of the parents in the previous generation.
    pub parents: Option<[usize; 2]>,
    pub edge_failures: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generation {
    pub index: usize,
    /// Position of this generation's offspring, or `None` for generation 0
    /// and for generations whose offspring was itself the worst gene.
    pub offspring_index: Option<usize>,
    pub pool: Vec<Gene>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeqoTrace {
    pub pool_size: usize,
    pub generation_count: usize,
    #[serde(with = "decimal6")]
    pub bias: f64,
    pub seed: u64,
    pub generations: Vec<Generation>,
}

impl Eq for GeqoTrace {}

impl GeqoTrace {
    pub fn best(&self) -> Option<&Gene> {
        self.generations.last().and_then(|g| g.pool.first())
    }

    /// Structural checks for a trace over `n` base relations.
    pub fn validate(&self, n: usize) -> Result<(), TraceError> {
        let fail = |m: String| Err(TraceError::Invalid(m));
        if self.pool_size < 2 {
            return fail(format!("pool size {} is below 2", self.pool_size));
        }
        if self.generations.len() != self.generation_count + 1 {
            return fail(format!(
                "expected {} generations, found {}",
                self.generation_count + 1,
                self.generations.len()
            ));
        }
        let ordinals: BTreeSet<usize> = (1..=n).collect();
        for (g, generation) in self.generations.iter().enumerate() {
            if generation.index != g {
                return fail(format!("generation {g} has index {}", generation.index));
            }
            let pool = &generation.pool;
            if pool.len() != self.pool_size {
                return fail(format!("generation {g} holds {} genes", pool.len()));
            }
            for gene in pool {
                let set: BTreeSet<usize> = gene.sequence.iter().copied().collect();
                if gene.sequence.len() != n || set != ordinals {
                    return fail(format!(
                        "generation {g}: {:?} is not a permutation of 1..{n}",
                        gene.sequence
                    ));
                }
                if gene.cost.is_negative() {
                    return fail(format!("generation {g}: negative gene cost"));
                }
            }
            if pool.windows(2).any(|w| w[0].cost > w[1].cost) {
                return fail(format!("generation {g}: pool is not sorted by cost"));
            }
            if g == 0 {
                if generation.offspring_index.is_some()
                    || pool
                        .iter()
                        .any(|x| x.parents.is_some() || x.edge_failures != 0)
                {
                    return fail("generation 0 must hold only initial genes".into());
                }
                continue;
            }
            let previous = &self.generations[g - 1].pool;
            match generation.offspring_index {
                None => {
                    if pool != previous {
                        return fail(format!(
                            "generation {g}: pool changed without a surviving offspring"
                        ));
                    }
                }
                Some(o) => {
                    if o >= pool.len() {
                        return fail(format!("generation {g}: offspring index {o} out of range"));
                    }
                    let survivors = pool[..o].iter().chain(&pool[o + 1..]);
                    if !survivors.eq(previous[..previous.len() - 1].iter()) {
                        return fail(format!(
                            "generation {g}: pool is not the previous pool plus the offspring minus the worst gene"
                        ));
                    }
                    match pool[o].parents {
                        Some([a, b]) if a != b && a < self.pool_size && b < self.pool_size => {}
                        _ => return fail(format!("generation {g}: offspring has invalid parents")),
                    }
                }
            }
        }
        Ok(())
    }
}

/// A pool member with its unrounded fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub sequence: Vec<usize>,
    pub cost: f64,
    pub parents: Option<(usize, usize)>,
    pub edge_failures: u32,
}

impl Individual {
    pub fn to_gene(&self) -> Gene {
        Gene {
            sequence: self.sequence.clone(),
            cost: Fixed6::from_f64(self.cost),
            parents: self.parents.map(|(a, b)| [a, b]),
            edge_failures: self.edge_failures,
        }
    }
}

/// Scores join sequences as left-deep plans.
pub struct Evaluator<'g> {
    ctx: PlanContext<'g>,
}

impl<'g> Evaluator<'g> {
    pub fn new(graph: &'g QueryGraph, params: &'g CostParams) -> Self {
        Evaluator {
            ctx: PlanContext::new(graph, params),
        }
    }

    pub fn warnings(&self) -> &[String] {
        &self.ctx.warnings
    }

    /// Ordinals pinned to the front of every sequence by a Leading hint.
    pub fn leading(&self) -> &[usize] {
        self.ctx.leading.as_deref().unwrap_or(&[])
    }

    fn check(&self, sequence: &[usize]) -> Result<(), GeqoError> {
        let n = self.ctx.graph.len();
        let set: BTreeSet<usize> = sequence.iter().copied().collect();
        if sequence.len() != n || set.len() != n || set.iter().any(|&o| o == 0 || o > n) {
            return Err(GeqoError::InvalidSequence(sequence.to_vec()));
        }
        Ok(())
    }

    /// Cost of the left-deep plan plus the candidate chosen at each step.
    fn walk(&self, sequence: &[usize]) -> Vec<(Candidate, usize)> {
        let first = sequence[0];
        let mut mask = 1u64 << (first - 1);
        let mut acc = self.ctx.cheapest_scan(first);
        acc.cost.rows = self.ctx.rows(mask);
        let mut steps = vec![(acc, first)];
        for &ordinal in &sequence[1..] {
            let mut scan = self.ctx.cheapest_scan(ordinal);
            scan.cost.rows = self.ctx.rows(1u64 << (ordinal - 1));
            mask |= 1u64 << (ordinal - 1);
            let rows = self.ctx.rows(mask);
            let candidates: Vec<Candidate> = JoinMethod::ALL
                .into_iter()
                .filter(|m| self.ctx.allowed_methods(mask).contains(m))
                .map(|m| self.ctx.join(m, &acc.cost, &scan.cost, rows))
                .collect();
            acc = candidates[cheapest(&candidates).expect("a join method is allowed")];
            steps.push((scan, ordinal));
            steps.push((acc, 0));
        }
        steps
    }

    pub fn cost(&self, sequence: &[usize]) -> Result<PathCost, GeqoError> {
        self.check(sequence)?;
        Ok(self.walk(sequence).last().expect("non-empty").0.cost)
    }

    pub fn evaluate(&self, sequence: &[usize]) -> Result<(PathCost, PlanTree), GeqoError> {
        self.check(sequence)?;
        let mut steps = self.walk(sequence).into_iter();
        let node = |c: &Candidate, label: Option<String>, children: Vec<PlanTree>| PlanTree {
            node_type: c.path_type,
            label,
            startup: Fixed6::from_f64(c.cost.startup),
            total: Fixed6::from_f64(c.cost.total),
            rows: Fixed6::from_f64(c.cost.rows),
            children,
        };
        let alias = |o: usize| Some(self.ctx.graph.rel(o).alias.clone());
        let (first, ordinal) = steps.next().expect("non-empty");
        let mut cost = first.cost;
        let mut tree = node(&first, alias(ordinal), Vec::new());
        while let (Some((scan, ordinal)), Some((join, _))) = (steps.next(), steps.next()) {
            let inner = node(&scan, alias(ordinal), Vec::new());
            tree = node(&join, None, vec![tree, inner]);
            cost = join.cost;
        }
        Ok((cost, tree))
    }

    fn individual(&self, sequence: Vec<usize>) -> Individual {
        let cost = self.walk(&sequence).last().expect("non-empty").0.cost.total;
        Individual {
            sequence,
            cost,
            parents: None,
            edge_failures: 0,
        }
    }
}

/// Total cost and plan of the left-deep tree joining `sequence` in order.
pub fn evaluate_gene(
    sequence: &[usize],
    graph: &QueryGraph,
    params: &CostParams,
) -> Result<(f64, PlanTree), GeqoError> {
    let (cost, tree) = Evaluator::new(graph, params).evaluate(sequence)?;
    Ok((cost.total, tree))
}

/// `pool_size` shuffled sequences, scored and stably sorted by cost. A
/// Leading hint pins its prefix and only the remainder is shuffled.
pub fn init_pool<R: Rng + ?Sized>(
    evaluator: &Evaluator<'_>,
    pool_size: usize,
    rng: &mut R,
) -> Result<Vec<Individual>, GeqoError> {
    if pool_size < 2 {
        return Err(GeqoError::PoolTooSmall(pool_size));
    }
    let n = evaluator.ctx.graph.len();
    let prefix = evaluator.leading().to_vec();
    let rest: Vec<usize> = (1..=n).filter(|o| !prefix.contains(o)).collect();
    let mut pool: Vec<Individual> = (0..pool_size)
        .map(|_| {
            let mut tail = rest.clone();
            tail.shuffle(rng);
            let sequence = prefix.iter().copied().chain(tail).collect();
            evaluator.individual(sequence)
        })
        .collect();
    pool.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    Ok(pool)
}

/// Weight of rank `r` in a pool of `p`: `bias - 2(bias - 1) r / (p - 1)`.
pub fn rank_weight(r: usize, p: usize, bias: f64) -> f64 {
    if p < 2 {
        return 1.0;
    }
    (bias - 2.0 * (bias - 1.0) * r as f64 / (p - 1) as f64).max(0.0)
}

/// One rank drawn with the linear bias.
pub fn draw_rank<R: Rng + ?Sized>(pool_len: usize, bias: f64, rng: &mut R) -> usize {
    let weights: Vec<f64> = (0..pool_len)
        .map(|r| rank_weight(r, pool_len, bias))
        .collect();
    WeightedIndex::new(&weights)
        .map(|d| d.sample(rng))
        .unwrap_or_else(|_| rng.gen_range(0..pool_len))
}

/// Two distinct ranks. The second is drawn from the biased distribution
/// conditioned on differing from the first, which is what redrawing until
/// distinct converges to; when every other rank has zero weight it falls
/// back to a uniform choice among them.
pub fn select_parents<R: Rng + ?Sized>(pool_len: usize, bias: f64, rng: &mut R) -> (usize, usize) {
    assert!(pool_len >= 2, "parent selection needs two genes");
    let first = draw_rank(pool_len, bias, rng);
    let weights: Vec<f64> = (0..pool_len)
        .map(|r| {
            if r == first {
                0.0
            } else {
                rank_weight(r, pool_len, bias)
            }
        })
        .collect();
    let second = match WeightedIndex::new(&weights) {
        Ok(d) => d.sample(rng),
        Err(_) => {
            let r = rng.gen_range(0..pool_len - 1);
            if r >= first {
                r + 1
            } else {
                r
            }
        }
    };
    (first, second)
}

/// Moves `prefix` to the front of `sequence`, keeping the rest in order.
fn pin_prefix(sequence: Vec<usize>, prefix: &[usize]) -> Vec<usize> {
    if prefix.is_empty() {
        return sequence;
    }
    prefix
        .iter()
        .copied()
        .chain(sequence.into_iter().filter(|o| !prefix.contains(o)))
        .collect()
}

/// Result of [`run_geqo`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeqoOutcome {
    pub plan: PlanTree,
    pub trace: GeqoTrace,
    pub best: Individual,
    pub warnings: Vec<String>,
}

/// Runs the genetic search, streaming each generation to `sink`.
pub fn run_geqo(
    graph: &QueryGraph,
    params: &CostParams,
    sink: &mut dyn TraceSink,
) -> Result<GeqoOutcome, GeqoError> {
    let n = graph.len();
    if n < 2 {
        return Err(GeqoError::TooFewRelations(n));
    }
    let evaluator = Evaluator::new(graph, params);
    let pool_size = params.effective_pool_size();
    let generation_count = params.effective_generations();
    let bias = params.geqo_selection_bias;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);

    let mut pool = init_pool(&evaluator, pool_size, &mut rng)?;
    let snapshot = |index, offspring_index, pool: &[Individual]| Generation {
        index,
        offspring_index,
        pool: pool.iter().map(Individual::to_gene).collect(),
    };
    let mut generations = Vec::with_capacity(generation_count + 1);
    generations.push(snapshot(0, None, &pool));
    sink.generation(&generations[0]);

    for index in 1..=generation_count {
        let (a, b) = select_parents(pool.len(), bias, &mut rng);
        let cross = erx_crossover(&pool[a].sequence, &pool[b].sequence, &mut rng)?;
        let mut child = evaluator.individual(pin_prefix(cross.offspring, evaluator.leading()));
        child.parents = Some((a, b));
        child.edge_failures = cross.edge_failures;
        let at = pool.partition_point(|x| x.cost <= child.cost);
        pool.insert(at, child);
        pool.pop();
        let offspring_index = (at < pool.len()).then_some(at);
        generations.push(snapshot(index, offspring_index, &pool));
        sink.generation(generations.last().expect("just pushed"));
    }

    let best = pool[0].clone();
    let (_, plan) = evaluator.evaluate(&best.sequence)?;
    Ok(GeqoOutcome {
        plan,
        trace: GeqoTrace {
            pool_size,
            generation_count,
            bias: crate::fixed::round6(bias),
            seed: params.rng_seed,
            generations,
        },
        best,
        warnings: evaluator.warnings().to_vec(),
    })
}
