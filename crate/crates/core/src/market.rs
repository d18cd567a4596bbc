//! Minimum market clearing prices for a square assignment market.
//!
//! `G[i]` is the price of item `i`. Bidder `b` demands the items that
//! maximize `v[b][i] - G[i]`; prices clear the market when the demand graph
//! has a perfect matching. Each round raises the prices of one minimal
//! over-demanded item set.

use serde::{Deserialize, Serialize};

use crate::constraints::{conjoin, Conjoined, Constraint};
use crate::engine::{solve, LatticeProblem, SolveOptions, SolveResult};
use crate::error::{Error, Result};

/// `v[b][i]`: bidder `b`'s valuation of item `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionInstance {
    #[serde(rename = "valuations")]
    v: Vec<Vec<u64>>,
}

impl AuctionInstance {
    pub fn new(v: Vec<Vec<u64>>) -> Result<Self> {
        let inst = AuctionInstance { v };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.v.len();
        if n == 0 {
            return Err(Error::InvalidInstance("auction has no bidders".into()));
        }
        if self.v.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInstance(format!(
                "valuations must be {n} x {n}: one item per bidder"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn valuations(&self) -> &[Vec<u64>] {
        &self.v
    }

    /// `T[i] = max_b v[b][i]`.
    pub fn top(&self) -> Vec<u64> {
        (0..self.n())
            .map(|i| self.v.iter().map(|row| row[i]).max().unwrap_or(0))
            .collect()
    }

    fn payoff(&self, b: usize, i: usize, g: &[u64]) -> i64 {
        self.v[b][i] as i64 - g[i] as i64
    }
}

/// Items demanded by each bidder, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandGraph {
    pub demand: Vec<Vec<usize>>,
}

impl DemandGraph {
    /// `(item, bidder)` pairs, sorted by item.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .demand
            .iter()
            .enumerate()
            .flat_map(|(b, items)| items.iter().map(move |&i| (i, b)))
            .collect();
        out.sort_unstable();
        out
    }

    /// Bidders whose whole demand lies in `items`.
    pub fn confined_to(&self, items: &[bool]) -> Vec<usize> {
        (0..self.demand.len())
            .filter(|&b| self.demand[b].iter().all(|&i| items[i]))
            .collect()
    }
}

pub fn demand_graph(inst: &AuctionInstance, g: &[u64]) -> DemandGraph {
    let n = inst.n();
    let demand = (0..n)
        .map(|b| {
            let best = (0..n).map(|i| inst.payoff(b, i, g)).max().unwrap_or(0);
            (0..n).filter(|&i| inst.payoff(b, i, g) == best).collect()
        })
        .collect();
    DemandGraph { demand }
}

/// Maximum matching of `bidders` into their demanded items by augmenting
/// paths. Returns `owner[item]`.
fn max_matching(dg: &DemandGraph, bidders: &[usize]) -> Vec<Option<usize>> {
    fn augment(b: usize, dg: &DemandGraph, seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &i in &dg.demand[b] {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            if owner[i].is_none_or(|o| augment(o, dg, seen, owner)) {
                owner[i] = Some(b);
                return true;
            }
        }
        false
    }
    let n = dg.demand.len();
    let mut owner = vec![None; n];
    for &b in bidders {
        let mut seen = vec![false; n];
        augment(b, dg, &mut seen, &mut owner);
    }
    owner
}

/// A bidder set `U` with `N(U) = J` and `|U| > |J|`, grown by alternating
/// paths from the smallest bidder left unmatched by a maximum matching of
/// `bidders`. `None` when every bidder in `bidders` is matched.
fn hall_violator(dg: &DemandGraph, bidders: &[usize]) -> Option<Vec<usize>> {
    let owner = max_matching(dg, bidders);
    let n = dg.demand.len();
    let mut matched = vec![false; n];
    for b in owner.iter().flatten() {
        matched[*b] = true;
    }
    let seed = *bidders.iter().filter(|&&b| !matched[b]).min()?;
    let mut in_j = vec![false; n];
    let mut stack = vec![seed];
    let mut visited = vec![false; n];
    visited[seed] = true;
    while let Some(b) = stack.pop() {
        for &i in &dg.demand[b] {
            if !in_j[i] {
                in_j[i] = true;
                // every reached item is matched, else the matching would augment
                if let Some(o) = owner[i] {
                    if !visited[o] {
                        visited[o] = true;
                        stack.push(o);
                    }
                }
            }
        }
    }
    Some((0..n).filter(|&i| in_j[i]).collect())
}

/// `J` is over-demanded iff the bidders confined to `J` demand all of `J`
/// and outnumber it.
pub fn is_overdemanded(dg: &DemandGraph, items: &[usize]) -> bool {
    let n = dg.demand.len();
    let mut mask = vec![false; n];
    for &i in items {
        mask[i] = true;
    }
    let confined = dg.confined_to(&mask);
    let mut covered = vec![false; n];
    for &b in &confined {
        for &i in &dg.demand[b] {
            covered[i] = true;
        }
    }
    confined.len() > items.len() && items.iter().all(|&i| covered[i])
}

/// An over-demanded item set with no over-demanded proper subset, or `None`
/// when the prices clear the market.
///
/// Descends from the alternating-path set: a proper over-demanded subset of
/// `J` avoids some `x` in `J`, and then the bidders confined to `J \ {x}`
/// violate Hall's condition inside `J \ {x}`, which yields a smaller
/// over-demanded set.
pub fn minimal_overdemanded(inst: &AuctionInstance, g: &[u64]) -> Option<Vec<usize>> {
    let dg = demand_graph(inst, g);
    let all: Vec<usize> = (0..inst.n()).collect();
    let mut j = hall_violator(&dg, &all)?;
    'descend: loop {
        for &x in &j {
            let mut mask = vec![false; inst.n()];
            for &i in &j {
                mask[i] = i != x;
            }
            let confined = dg.confined_to(&mask);
            if let Some(smaller) = hall_violator(&dg, &confined) {
                j = smaller;
                continue 'descend;
            }
        }
        return Some(j);
    }
}

/// Perfect matching of the demand graph as `bidder_of[item]`, if one exists.
pub fn clearing_assignment(inst: &AuctionInstance, g: &[u64]) -> Option<Vec<usize>> {
    let dg = demand_graph(inst, g);
    let all: Vec<usize> = (0..inst.n()).collect();
    max_matching(&dg, &all).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceStep {
    /// Raise by one price unit per round.
    #[default]
    Unit,
    /// Raise by the least amount that lets some confined bidder switch to an
    /// item outside the set.
    Accelerated,
}

#[derive(Debug, Clone)]
pub struct ClearingProblem {
    inst: AuctionInstance,
    top: Vec<u64>,
    step: PriceStep,
}

#[derive(Debug, Clone)]
pub struct RaisedSet {
    pub members: Vec<bool>,
    pub raise: u64,
}

impl ClearingProblem {
    pub fn new(inst: AuctionInstance, step: PriceStep) -> Self {
        ClearingProblem {
            top: inst.top(),
            inst,
            step,
        }
    }

    pub fn instance(&self) -> &AuctionInstance {
        &self.inst
    }

    fn accelerated_raise(&self, g: &[u64], set: &[bool]) -> u64 {
        let n = self.inst.n();
        let dg = demand_graph(&self.inst, g);
        dg.confined_to(set)
            .into_iter()
            .filter_map(|b| {
                let inside = (0..n)
                    .filter(|&i| set[i])
                    .map(|i| self.inst.payoff(b, i, g))
                    .max()?;
                let outside = (0..n)
                    .filter(|&i| !set[i])
                    .map(|i| self.inst.payoff(b, i, g))
                    .max()?;
                Some((inside - outside) as u64)
            })
            .min()
            .unwrap_or(1)
            .max(1)
    }
}

impl LatticeProblem for ClearingProblem {
    type Value = u64;
    type Context = Option<RaisedSet>;

    fn dim(&self) -> usize {
        self.inst.n()
    }

    fn top(&self) -> &[u64] {
        &self.top
    }

    fn min_step(&self) -> u64 {
        1
    }

    fn context(&self, g: &[u64]) -> Option<RaisedSet> {
        let j = minimal_overdemanded(&self.inst, g)?;
        let mut members = vec![false; self.inst.n()];
        for i in j {
            members[i] = true;
        }
        let raise = match self.step {
            PriceStep::Unit => 1,
            PriceStep::Accelerated => self.accelerated_raise(g, &members),
        };
        Some(RaisedSet { members, raise })
    }

    fn is_forbidden(&self, ctx: &Option<RaisedSet>, _: &[u64], j: usize) -> bool {
        ctx.as_ref().is_some_and(|s| s.members[j])
    }

    fn advance(&self, ctx: &Option<RaisedSet>, g: &[u64], j: usize) -> u64 {
        g[j] + ctx.as_ref().map_or(1, |s| s.raise)
    }
}

pub fn clearing_problem(
    inst: &AuctionInstance,
    cs: Vec<Constraint<u64>>,
    step: PriceStep,
) -> Result<Conjoined<ClearingProblem>> {
    conjoin(ClearingProblem::new(inst.clone(), step), cs)
}

pub fn clearing_prices(
    inst: &AuctionInstance,
    cs: Vec<Constraint<u64>>,
    step: PriceStep,
    opts: SolveOptions,
) -> Result<SolveResult<u64>> {
    solve(&clearing_problem(inst, cs, step)?, opts)
}
