//! The generic lattice-linear predicate detection engine.
//!
//! A problem is a predicate over vectors of a finite product of chains,
//! bounded above by a top vector. The engine starts from the all-zero vector
//! and, round by round, raises every forbidden component to its advance
//! value until no component is forbidden (the least feasible vector) or some
//! advance value exceeds the top (no feasible vector exists).
//!
//! Rounds are synchronous: the forbidden set and all advance values of a
//! round are computed against one immutable snapshot and written together at
//! the end of the round. Sequential and parallel execution therefore produce
//! identical results and traces.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::value::LatticeValue;

/// A lattice-linear predicate together with its advancement function.
///
/// Implementations must be pure functions of the state vector: the engine
/// may evaluate `step` for different indices concurrently.
pub trait LatticeProblem: Sync {
    type Value: LatticeValue;

    /// Per-round data derived from a snapshot and shared by every index
    /// (for example the set of fixed vertices of a shortest-path round).
    type Context: Sync;

    fn dim(&self) -> usize;

    fn top(&self) -> &[Self::Value];

    /// Strictly positive lower bound on any advancement. Only used for the
    /// termination bound, never to advance.
    fn min_step(&self) -> Self::Value;

    fn context(&self, g: &[Self::Value]) -> Self::Context;

    fn is_forbidden(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> bool;

    /// Value that a forbidden component `j` must at least reach.
    fn advance(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> Self::Value;

    /// `Some(advance)` when `j` is forbidden.
    fn step(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> Option<Self::Value> {
        if self.is_forbidden(ctx, g, j) {
            Some(self.advance(ctx, g, j))
        } else {
            None
        }
    }

    fn forbidden_indices(&self, g: &[Self::Value]) -> Vec<usize> {
        let ctx = self.context(g);
        (0..self.dim())
            .filter(|&j| self.is_forbidden(&ctx, g, j))
            .collect()
    }

    fn is_feasible(&self, g: &[Self::Value]) -> bool {
        let ctx = self.context(g);
        (0..self.dim()).all(|j| !self.is_forbidden(&ctx, g, j))
    }
}

impl<P: LatticeProblem + ?Sized> LatticeProblem for &P {
    type Value = P::Value;
    type Context = P::Context;

    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn top(&self) -> &[Self::Value] {
        (**self).top()
    }
    fn min_step(&self) -> Self::Value {
        (**self).min_step()
    }
    fn context(&self, g: &[Self::Value]) -> Self::Context {
        (**self).context(g)
    }
    fn is_forbidden(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> bool {
        (**self).is_forbidden(ctx, g, j)
    }
    fn advance(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> Self::Value {
        (**self).advance(ctx, g, j)
    }
    fn step(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> Option<Self::Value> {
        (**self).step(ctx, g, j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    #[default]
    Sequential,
    /// Round-parallel evaluation on a pool of `threads` workers. Falls back to
    /// sequential evaluation when the `parallel` feature is disabled.
    Parallel { threads: usize },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    pub mode: ExecutionMode,
    pub trace: bool,
}

impl SolveOptions {
    pub fn sequential() -> Self {
        Self::default()
    }

    pub fn parallel(threads: usize) -> Self {
        SolveOptions {
            mode: ExecutionMode::Parallel { threads },
            trace: false,
        }
    }

    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<V> {
    Feasible(Vec<V>),
    /// Advancing `witness` to `attempted` would exceed the top vector.
    Infeasible {
        witness: usize,
        attempted: V,
    },
}

/// One record per round: the snapshot and its forbidden set.
///
/// Record `r` holds the state after `r` completed rounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord<V> {
    pub round: usize,
    #[serde(rename = "G")]
    pub state: Vec<V>,
    pub forbidden: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<V> {
    pub outcome: Outcome<V>,
    /// Number of completed advancement rounds.
    pub rounds: usize,
    pub trace: Option<Vec<TraceRecord<V>>>,
}

impl<V: LatticeValue> SolveResult<V> {
    pub fn solution(&self) -> Option<&[V]> {
        match &self.outcome {
            Outcome::Feasible(g) => Some(g),
            Outcome::Infeasible { .. } => None,
        }
    }

    /// Total advancement performed on integral problems: the sum of the final
    /// components.
    pub fn advancement_steps(&self) -> Option<u64> {
        self.solution()?
            .iter()
            .map(|v| v.as_level())
            .sum::<Option<u64>>()
    }
}

/// Upper bound on the number of rounds: `sum_i ceil(top[i] / min_step)`.
pub fn termination_bound<P: LatticeProblem>(problem: &P) -> u128 {
    let delta = problem.min_step();
    problem
        .top()
        .iter()
        .map(|&t| P::Value::steps(t, delta))
        .fold(0u128, |acc, s| acc.saturating_add(s))
}

/// Finds the least vector below the top that satisfies the problem's
/// predicate, or reports infeasibility.
pub fn solve<P: LatticeProblem>(problem: &P, opts: SolveOptions) -> Result<SolveResult<P::Value>> {
    match opts.mode {
        ExecutionMode::Sequential => run(problem, opts.trace, false),
        ExecutionMode::Parallel { threads } => {
            pool::install(threads.max(1), || run(problem, opts.trace, true))
        }
    }
}

fn run<P: LatticeProblem>(
    problem: &P,
    trace: bool,
    parallel: bool,
) -> Result<SolveResult<P::Value>> {
    let n = problem.dim();
    let top = problem.top();
    let mut g = vec![P::Value::ZERO; n];
    let mut records = trace.then(Vec::new);
    let mut rounds = 0;

    loop {
        let ctx = problem.context(&g);
        let moves = collect_moves(problem, &ctx, &g, parallel);

        if let Some(records) = records.as_mut() {
            records.push(TraceRecord {
                round: rounds,
                state: g.clone(),
                forbidden: moves.iter().map(|&(j, _)| j).collect(),
            });
        }

        if moves.is_empty() {
            return Ok(SolveResult {
                outcome: Outcome::Feasible(g),
                rounds,
                trace: records,
            });
        }

        for &(j, alpha) in &moves {
            if alpha.partial_cmp(&g[j]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::ProblemContractViolation {
                    index: j,
                    current: g[j].to_string(),
                    advance: alpha.to_string(),
                });
            }
        }

        if let Some(&(witness, attempted)) = moves.iter().find(|&&(j, alpha)| alpha > top[j]) {
            return Ok(SolveResult {
                outcome: Outcome::Infeasible { witness, attempted },
                rounds,
                trace: records,
            });
        }

        for (j, alpha) in moves {
            g[j] = alpha;
        }
        rounds += 1;
    }
}

fn collect_moves<P: LatticeProblem>(
    problem: &P,
    ctx: &P::Context,
    g: &[P::Value],
    parallel: bool,
) -> Vec<(usize, P::Value)> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return (0..problem.dim())
            .into_par_iter()
            .filter_map(|j| problem.step(ctx, g, j).map(|a| (j, a)))
            .collect();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = parallel;

    (0..problem.dim())
        .filter_map(|j| problem.step(ctx, g, j).map(|a| (j, a)))
        .collect()
}

/// Brute-force check that `candidate` is the least feasible vector, over the
/// integer grid below the top. The top must be integral.
pub fn check_least<P: LatticeProblem>(problem: &P, candidate: &[P::Value]) -> Result<bool> {
    check_least_with_limit(problem, candidate, 10_000_000)
}

pub fn check_least_with_limit<P: LatticeProblem>(
    problem: &P,
    candidate: &[P::Value],
    limit: u128,
) -> Result<bool> {
    let levels: Vec<u64> = problem
        .top()
        .iter()
        .map(|t| {
            t.as_level()
                .ok_or_else(|| Error::InvalidInstance(format!("top component {t} is not integral")))
        })
        .collect::<Result<_>>()?;
    let points = levels
        .iter()
        .fold(1u128, |acc, &l| acc.saturating_mul(l as u128 + 1));
    if points > limit {
        return Err(Error::DomainTooLarge { points, limit });
    }
    if candidate.len() != problem.dim() || !problem.is_feasible(candidate) {
        return Ok(false);
    }

    let mut digits = vec![0u64; levels.len()];
    let mut point = vec![P::Value::ZERO; levels.len()];
    loop {
        if problem.is_feasible(&point) && point.iter().zip(candidate).any(|(v, c)| v < c) {
            return Ok(false);
        }
        // odometer increment
        let mut k = 0;
        loop {
            if k == digits.len() {
                return Ok(true);
            }
            if digits[k] < levels[k] {
                digits[k] += 1;
                point[k] = P::Value::from_level(digits[k]);
                break;
            }
            digits[k] = 0;
            point[k] = P::Value::ZERO;
            k += 1;
        }
    }
}

#[cfg(feature = "parallel")]
pub(crate) mod pool {
    use std::collections::HashMap;
    use std::sync::{Arc, Mutex, OnceLock};

    use rayon::{ThreadPool, ThreadPoolBuilder};

    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();

    pub fn install<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
        let pool = {
            let mut pools = POOLS
                .get_or_init(Default::default)
                .lock()
                .unwrap_or_else(|e| e.into_inner());
            pools
                .entry(threads)
                .or_insert_with(|| {
                    Arc::new(
                        ThreadPoolBuilder::new()
                            .num_threads(threads)
                            .build()
                            .expect("failed to build thread pool"),
                    )
                })
                .clone()
        };
        pool.install(f)
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) mod pool {
    pub fn install<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> R {
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Least `g` with `g[j] >= floor[j]`.
    struct Floor {
        floor: Vec<u64>,
        top: Vec<u64>,
    }

    impl LatticeProblem for Floor {
        type Value = u64;
        type Context = ();
        fn dim(&self) -> usize {
            self.floor.len()
        }
        fn top(&self) -> &[u64] {
            &self.top
        }
        fn min_step(&self) -> u64 {
            1
        }
        fn context(&self, _: &[u64]) {}
        fn is_forbidden(&self, _: &(), g: &[u64], j: usize) -> bool {
            g[j] < self.floor[j]
        }
        fn advance(&self, _: &(), g: &[u64], j: usize) -> u64 {
            g[j] + 1
        }
    }

    struct Broken;

    impl LatticeProblem for Broken {
        type Value = u64;
        type Context = ();
        fn dim(&self) -> usize {
            1
        }
        fn top(&self) -> &[u64] {
            &[5]
        }
        fn min_step(&self) -> u64 {
            1
        }
        fn context(&self, _: &[u64]) {}
        fn is_forbidden(&self, _: &(), _: &[u64], _: usize) -> bool {
            true
        }
        fn advance(&self, _: &(), g: &[u64], j: usize) -> u64 {
            g[j]
        }
    }

    #[test]
    fn bottom_already_feasible() {
        let p = Floor {
            floor: vec![0, 0],
            top: vec![3, 3],
        };
        let r = solve(&p, SolveOptions::sequential()).unwrap();
        assert_eq!(r.outcome, Outcome::Feasible(vec![0, 0]));
        assert_eq!(r.rounds, 0);
    }

    #[test]
    fn unit_steps_reach_floor() {
        let p = Floor {
            floor: vec![2, 3],
            top: vec![3, 3],
        };
        let r = solve(&p, SolveOptions::sequential().traced()).unwrap();
        assert_eq!(r.outcome, Outcome::Feasible(vec![2, 3]));
        assert_eq!(r.rounds, 3);
        let trace = r.trace.unwrap();
        assert_eq!(trace.len(), 4);
        assert_eq!(trace[0].forbidden, vec![0, 1]);
        assert_eq!(trace[2].state, vec![2, 2]);
        assert_eq!(trace[2].forbidden, vec![1]);
        assert!(trace[3].forbidden.is_empty());
    }

    #[test]
    fn overshoot_is_infeasible_with_witness() {
        let p = Floor {
            floor: vec![1, 4],
            top: vec![3, 3],
        };
        let r = solve(&p, SolveOptions::sequential()).unwrap();
        assert_eq!(
            r.outcome,
            Outcome::Infeasible {
                witness: 1,
                attempted: 4
            }
        );
        assert_eq!(r.rounds, 3);
    }

    #[test]
    fn non_advancing_problem_is_rejected() {
        let err = solve(&Broken, SolveOptions::sequential()).unwrap_err();
        assert!(matches!(
            err,
            Error::ProblemContractViolation { index: 0, .. }
        ));
    }

    #[test]
    fn parallel_matches_sequential() {
        let p = Floor {
            floor: vec![2, 0, 3, 1],
            top: vec![3; 4],
        };
        let a = solve(&p, SolveOptions::sequential().traced()).unwrap();
        for t in [1, 2, 8] {
            let b = solve(&p, SolveOptions::parallel(t).traced()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn check_least_on_floor() {
        let p = Floor {
            floor: vec![1, 2],
            top: vec![3, 3],
        };
        assert!(check_least(&p, &[1, 2]).unwrap());
        assert!(!check_least(&p, &[1, 3]).unwrap());
        assert!(!check_least(&p, &[0, 2]).unwrap());
    }

    #[test]
    fn check_least_guards_domain() {
        let p = Floor {
            floor: vec![0; 8],
            top: vec![100; 8],
        };
        let err = check_least(&p, &[0; 8]).unwrap_err();
        assert!(matches!(err, Error::DomainTooLarge { .. }));
    }

    #[test]
    fn bound_sums_ceilings() {
        let p = Floor {
            floor: vec![0, 0],
            top: vec![3, 5],
        };
        assert_eq!(termination_bound(&p), 8);
    }
}
