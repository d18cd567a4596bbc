//! Slices: every solution of an integral problem from its join-irreducibles.
//!
//! For an event `(i, k)` the join-irreducible `J(i, k)` is the least feasible
//! vector with `G[i] >= k`. The distinct such vectors above the least
//! solution form a poset whose down-closed subsets correspond one-to-one to
//! the feasible vectors: each subset maps to the join of its members and the
//! least solution.

use serde::Serialize;

use crate::constraints::{conjoin, Constraint};
use crate::engine::{pool, solve, ExecutionMode, LatticeProblem, Outcome, SolveOptions};
use crate::error::{Error, Result};
use crate::value::LatticeValue;

pub const DEFAULT_EVENT_LIMIT: u64 = 100_000;
pub const DEFAULT_SOLUTION_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JoinIrreducible<V> {
    pub index: usize,
    pub level: u64,
    /// `None` when no feasible vector reaches the level.
    pub vector: Option<Vec<V>>,
}

impl<V> JoinIrreducible<V> {
    pub fn exists(&self) -> bool {
        self.vector.is_some()
    }
}

/// Least feasible vector of `base` whose component `index` is at least
/// `level`.
pub fn join_irreducible<P: LatticeProblem>(
    base: &P,
    index: usize,
    level: u64,
) -> Result<JoinIrreducible<P::Value>> {
    let mut floor = vec![P::Value::ZERO; base.dim()];
    floor[index] = P::Value::from_level(level);
    let bounded = conjoin(base, vec![Constraint::LowerBound(floor)])?;
    let vector = match solve(&bounded, SolveOptions::sequential())?.outcome {
        Outcome::Feasible(g) => Some(g),
        Outcome::Infeasible { .. } => None,
    };
    Ok(JoinIrreducible {
        index,
        level,
        vector,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct SliceOptions {
    pub event_limit: u64,
    pub mode: ExecutionMode,
}

impl Default for SliceOptions {
    fn default() -> Self {
        SliceOptions {
            event_limit: DEFAULT_EVENT_LIMIT,
            mode: ExecutionMode::Sequential,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlicePoset<V> {
    bottom: Option<Vec<V>>,
    /// Sorted by component sum, then lexicographically: a linear extension.
    elements: Vec<Vec<V>>,
    /// `below[k]`: elements strictly below element `k`.
    below: Vec<Vec<usize>>,
}

fn leq<V: PartialOrd>(a: &[V], b: &[V]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn join<V: LatticeValue>(acc: &mut [V], v: &[V]) {
    for (a, &x) in acc.iter_mut().zip(v) {
        *a = a.max_of(x);
    }
}

fn lex<V: PartialOrd>(a: &[V], b: &[V]) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

impl<V: LatticeValue> SlicePoset<V> {
    fn assemble(bottom: Option<Vec<V>>, mut elements: Vec<Vec<V>>) -> Self {
        let level_sum = |v: &[V]| v.iter().map(|x| x.to_f64()).sum::<f64>();
        elements.sort_by(|a, b| {
            level_sum(a)
                .partial_cmp(&level_sum(b))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| lex(a, b))
        });
        elements.dedup();
        let below = (0..elements.len())
            .map(|k| {
                (0..k)
                    .filter(|&m| leq(&elements[m], &elements[k]))
                    .collect()
            })
            .collect();
        SlicePoset {
            bottom,
            elements,
            below,
        }
    }

    /// The least solution; `None` when the problem is infeasible.
    pub fn bottom(&self) -> Option<&[V]> {
        self.bottom.as_deref()
    }

    pub fn elements(&self) -> &[Vec<V>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Covering pairs `(lower, upper)` of the element order.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (k, below) in self.below.iter().enumerate() {
            for &m in below {
                let covered = below.iter().any(|&c| c != m && self.below[c].contains(&m));
                if !covered {
                    out.push((m, k));
                }
            }
        }
        out
    }

    /// Visits every down-closed subset as a membership mask; stops early when
    /// `visit` returns false.
    fn for_each_ideal(&self, mut visit: impl FnMut(&[bool]) -> bool) {
        fn go<V>(
            s: &SlicePoset<V>,
            k: usize,
            chosen: &mut Vec<bool>,
            visit: &mut dyn FnMut(&[bool]) -> bool,
        ) -> bool {
            if k == s.elements.len() {
                return visit(chosen);
            }
            if !go(s, k + 1, chosen, visit) {
                return false;
            }
            if s.below[k].iter().all(|&m| chosen[m]) {
                chosen[k] = true;
                let more = go(s, k + 1, chosen, visit);
                chosen[k] = false;
                return more;
            }
            true
        }
        if self.bottom.is_none() {
            return;
        }
        let mut chosen = vec![false; self.elements.len()];
        go(self, 0, &mut chosen, &mut visit);
    }

    /// Number of down-closed subsets, i.e. of feasible vectors.
    pub fn count_ideals(&self) -> u128 {
        let mut count = 0u128;
        self.for_each_ideal(|_| {
            count += 1;
            true
        });
        count
    }

    /// Greatest solution: the join of all elements and the bottom.
    pub fn top_solution(&self) -> Option<Vec<V>> {
        let mut acc = self.bottom.clone()?;
        for e in &self.elements {
            join(&mut acc, e);
        }
        Some(acc)
    }
}

/// Computes every join-irreducible of an integral problem and assembles the
/// slice.
pub fn build_slice<P: LatticeProblem>(
    base: &P,
    opts: SliceOptions,
) -> Result<SlicePoset<P::Value>> {
    let levels: Vec<u64> = base
        .top()
        .iter()
        .map(|t| {
            t.as_level()
                .ok_or_else(|| Error::InvalidInstance(format!("top component {t} is not integral")))
        })
        .collect::<Result<_>>()?;
    let events: u64 = levels.iter().fold(0u64, |acc, &l| acc.saturating_add(l));
    if events > opts.event_limit {
        return Err(Error::EventSpaceTooLarge {
            events,
            limit: opts.event_limit,
        });
    }

    let bottom = match solve(base, SolveOptions::sequential())?.outcome {
        Outcome::Feasible(g) => g,
        Outcome::Infeasible { .. } => return Ok(SlicePoset::assemble(None, Vec::new())),
    };

    // events at or below the bottom only reproduce it
    let seeds: Vec<(usize, u64)> = levels
        .iter()
        .enumerate()
        .flat_map(|(i, &top)| {
            let from = bottom[i].as_level().unwrap_or(0) + 1;
            (from..=top).map(move |k| (i, k))
        })
        .collect();

    let computed = match opts.mode {
        ExecutionMode::Sequential => compute(base, &seeds, false)?,
        ExecutionMode::Parallel { threads } => {
            pool::install(threads.max(1), || compute(base, &seeds, true))?
        }
    };
    let elements = computed
        .into_iter()
        .filter_map(|ji| ji.vector)
        .filter(|v| v != &bottom)
        .collect();
    Ok(SlicePoset::assemble(Some(bottom), elements))
}

fn compute<P: LatticeProblem>(
    base: &P,
    seeds: &[(usize, u64)],
    parallel: bool,
) -> Result<Vec<JoinIrreducible<P::Value>>> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return seeds
            .par_iter()
            .map(|&(i, k)| join_irreducible(base, i, k))
            .collect();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;

    seeds
        .iter()
        .map(|&(i, k)| join_irreducible(base, i, k))
        .collect()
}

/// All feasible vectors, sorted lexicographically. Fails with the exact count
/// when there are more than `limit`.
pub fn enumerate_solutions<V: LatticeValue>(
    s: &SlicePoset<V>,
    limit: usize,
) -> Result<Vec<Vec<V>>> {
    let Some(bottom) = s.bottom() else {
        return Ok(Vec::new());
    };
    let count = s.count_ideals();
    if count > limit as u128 {
        return Err(Error::TooManySolutions { count, limit });
    }
    let mut out = Vec::with_capacity(count as usize);
    s.for_each_ideal(|chosen| {
        let mut acc = bottom.to_vec();
        for (k, _) in chosen.iter().enumerate().filter(|(_, &c)| c) {
            join(&mut acc, &s.elements[k]);
        }
        out.push(acc);
        true
    });
    out.sort_by(|a, b| lex(a, b));
    out.dedup();
    Ok(out)
}
