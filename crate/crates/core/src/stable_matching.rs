//! Constrained stable matching over the proposal event model.
//!
//! Man `j`'s component `G[j]` counts the proposals he has made; when
//! `G[j] >= 1` he holds woman `mpref[j][G[j]]` (ranks are 1-based). Events
//! are `(man, rank)` pairs, ordered along each man's preference list and,
//! optionally, across men by precedence edges. Without precedence edges the
//! solver reduces to round-synchronous Gale-Shapley.

use std::collections::VecDeque;

use serde::Serialize;

use crate::engine::LatticeProblem;
use crate::error::{Error, Result};

/// The proposal of `man` (0-based) to the woman at position `rank` (1-based)
/// of his preference list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    pub man: usize,
    pub rank: u32,
}

/// `from` must be executed before `to` can be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecedenceEdge {
    pub from: Event,
    pub to: Event,
}

/// A stable matching instance with `n` men and `n` women, 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SmpInstance {
    n: usize,
    mpref: Vec<Vec<usize>>,
    wpref: Vec<Vec<usize>>,
    /// `rank[z][i]`: position (1-based) of man `i` in woman `z`'s list.
    rank: Vec<Vec<u32>>,
    /// `mrank[i][z]`: position (1-based) of woman `z` in man `i`'s list.
    mrank: Vec<Vec<u32>>,
    cross_edges: Vec<PrecedenceEdge>,
    forbidden_pairs: Vec<(usize, usize)>,
    forced_pairs: Vec<(usize, usize)>,
}

fn inverse_permutation(row: &[usize], n: usize, what: &str) -> Result<Vec<u32>> {
    if row.len() != n {
        return Err(Error::InvalidInstance(format!(
            "{what} has {} entries, expected {n}",
            row.len()
        )));
    }
    let mut inv = vec![0u32; n];
    for (k, &x) in row.iter().enumerate() {
        if x >= n || inv[x] != 0 {
            return Err(Error::InvalidInstance(format!(
                "{what} is not a permutation"
            )));
        }
        inv[x] = k as u32 + 1;
    }
    Ok(inv)
}

impl SmpInstance {
    pub fn new(mpref: Vec<Vec<usize>>, wpref: Vec<Vec<usize>>) -> Result<Self> {
        let n = mpref.len();
        if n == 0 || wpref.len() != n {
            return Err(Error::InvalidInstance(
                "need the same positive number of men and women".into(),
            ));
        }
        let mrank = mpref
            .iter()
            .enumerate()
            .map(|(i, row)| inverse_permutation(row, n, &format!("preference list of man {i}")))
            .collect::<Result<_>>()?;
        let rank = wpref
            .iter()
            .enumerate()
            .map(|(z, row)| inverse_permutation(row, n, &format!("preference list of woman {z}")))
            .collect::<Result<_>>()?;
        Ok(SmpInstance {
            n,
            mpref,
            wpref,
            rank,
            mrank,
            cross_edges: Vec::new(),
            forbidden_pairs: Vec::new(),
            forced_pairs: Vec::new(),
        })
    }

    pub fn with_cross_edges(
        mut self,
        edges: impl IntoIterator<Item = PrecedenceEdge>,
    ) -> Result<Self> {
        for e in edges {
            for ev in [e.from, e.to] {
                if ev.man >= self.n || ev.rank == 0 || ev.rank as usize > self.n {
                    return Err(Error::InvalidInstance(format!(
                        "precedence event {ev:?} out of range"
                    )));
                }
            }
            if e.from.man == e.to.man {
                return Err(Error::InvalidInstance(format!(
                    "precedence edge {e:?} must relate different men"
                )));
            }
            self.cross_edges.push(e);
        }
        precedence_reach(self.n, &self.cross_edges)?;
        Ok(self)
    }

    /// Adds the constraint "man `i`'s regret is at most man `j`'s": for every
    /// rank `r`, man `j`'s rank-`r` proposal precedes man `i`'s.
    pub fn with_regret_at_most(self, i: usize, j: usize) -> Result<Self> {
        let n = self.n as u32;
        self.with_cross_edges((1..=n).map(|r| PrecedenceEdge {
            from: Event { man: j, rank: r },
            to: Event { man: i, rank: r },
        }))
    }

    pub fn with_forbidden_pair(mut self, man: usize, woman: usize) -> Result<Self> {
        self.check_pair(man, woman)?;
        self.forbidden_pairs.push((man, woman));
        Ok(self)
    }

    pub fn with_forced_pair(mut self, man: usize, woman: usize) -> Result<Self> {
        self.check_pair(man, woman)?;
        self.forced_pairs.push((man, woman));
        Ok(self)
    }

    fn check_pair(&self, man: usize, woman: usize) -> Result<()> {
        if man >= self.n || woman >= self.n {
            return Err(Error::InvalidInstance(format!(
                "pair ({man}, {woman}) out of range"
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mpref(&self) -> &[Vec<usize>] {
        &self.mpref
    }

    pub fn wpref(&self) -> &[Vec<usize>] {
        &self.wpref
    }

    /// Position (1-based) of man `man` in woman `woman`'s list.
    pub fn woman_rank(&self, woman: usize, man: usize) -> u32 {
        self.rank[woman][man]
    }

    /// Position (1-based) of woman `woman` in man `man`'s list.
    pub fn man_rank(&self, man: usize, woman: usize) -> u32 {
        self.mrank[man][woman]
    }

    /// Woman proposed to in event `(man, rank)`.
    pub fn woman_at(&self, man: usize, rank: u32) -> usize {
        self.mpref[man][rank as usize - 1]
    }

    pub fn cross_edges(&self) -> &[PrecedenceEdge] {
        &self.cross_edges
    }

    pub fn forbidden_pairs(&self) -> &[(usize, usize)] {
        &self.forbidden_pairs
    }

    pub fn forced_pairs(&self) -> &[(usize, usize)] {
        &self.forced_pairs
    }

    /// Pairs that may not appear in a solution: the explicit forbidden pairs
    /// plus, for each forced pair `(m, w)`, every `(m', w)` with `m' != m`.
    pub fn excluded_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = self.forbidden_pairs.clone();
        for &(m, w) in &self.forced_pairs {
            out.extend((0..self.n).filter(|&o| o != m).map(|o| (o, w)));
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Man to woman assignment, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Matching {
    pub wife: Vec<usize>,
}

impl Matching {
    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.wife.len()];
        self.wife
            .iter()
            .all(|&w| w < seen.len() && !std::mem::replace(&mut seen[w], true))
    }

    /// The proposal vector realizing this matching.
    pub fn proposal_vector(&self, inst: &SmpInstance) -> Vec<u32> {
        self.wife
            .iter()
            .enumerate()
            .map(|(m, &w)| inst.man_rank(m, w))
            .collect()
    }

    /// Reads the held women off a proposal vector; `None` unless every man
    /// has proposed and no woman is held twice.
    pub fn from_proposals(inst: &SmpInstance, g: &[u32]) -> Option<Self> {
        if g.len() != inst.n() || g.iter().any(|&r| r == 0 || r as usize > inst.n()) {
            return None;
        }
        let m = Matching {
            wife: g
                .iter()
                .enumerate()
                .map(|(j, &r)| inst.woman_at(j, r))
                .collect(),
        };
        m.is_bijection().then_some(m)
    }
}

/// Last executed event of every man that has proposed.
pub fn frontier(g: &[u32]) -> Vec<Event> {
    g.iter()
        .enumerate()
        .filter(|&(_, &r)| r >= 1)
        .map(|(man, &rank)| Event { man, rank })
        .collect()
}

/// True iff no man and woman prefer each other to their partners.
pub fn is_stable(inst: &SmpInstance, m: &Matching) -> bool {
    let n = inst.n();
    let mut husband = vec![0; n];
    for (man, &w) in m.wife.iter().enumerate() {
        husband[w] = man;
    }
    (0..n).all(|a| {
        let own = inst.man_rank(a, m.wife[a]);
        (1..own).all(|r| {
            let b = inst.woman_at(a, r);
            inst.woman_rank(b, a) > inst.woman_rank(b, husband[b])
        })
    })
}

/// For every event, the earliest event of each other man that it precedes in
/// the transitive closure of chains and cross edges. Empty lists when there
/// are no cross edges.
fn precedence_reach(n: usize, cross: &[PrecedenceEdge]) -> Result<Vec<Vec<(usize, u32)>>> {
    let events = n * n;
    if cross.is_empty() {
        return Ok(vec![Vec::new(); events]);
    }
    let id = |e: Event| e.man * n + (e.rank as usize - 1);
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); events];
    for man in 0..n {
        for r in 1..n {
            succ[man * n + r - 1].push(man * n + r);
        }
    }
    for e in cross {
        succ[id(e.from)].push(id(e.to));
    }

    let mut indeg = vec![0usize; events];
    for s in succ.iter().flatten() {
        indeg[*s] += 1;
    }
    let mut queue: VecDeque<usize> = (0..events).filter(|&e| indeg[e] == 0).collect();
    let mut order = Vec::with_capacity(events);
    while let Some(e) = queue.pop_front() {
        order.push(e);
        for &s in &succ[e] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                queue.push_back(s);
            }
        }
    }
    if order.len() < events {
        let stuck = (0..events).find(|&e| indeg[e] > 0).unwrap_or(0);
        return Err(Error::CyclicPrecedence {
            man: stuck / n,
            rank: (stuck % n) as u32 + 1,
        });
    }

    let mut reach: Vec<Vec<(usize, u32)>> = vec![Vec::new(); events];
    let mut best = vec![u32::MAX; n];
    for &e in order.iter().rev() {
        let own = e / n;
        best.fill(u32::MAX);
        for &s in &succ[e] {
            let (sm, sr) = (s / n, (s % n) as u32 + 1);
            if sm != own {
                best[sm] = best[sm].min(sr);
            }
            for &(m, r) in &reach[s] {
                if m != own {
                    best[m] = best[m].min(r);
                }
            }
        }
        reach[e] = (0..n)
            .filter(|&m| best[m] != u32::MAX)
            .map(|m| (m, best[m]))
            .collect();
    }
    Ok(reach)
}

/// The constrained stable matching predicate with unit advancement.
#[derive(Debug, Clone)]
pub struct SmpProblem {
    inst: SmpInstance,
    top: Vec<u32>,
    reach: Vec<Vec<(usize, u32)>>,
    /// Ranks each man may not stop at (pair restrictions).
    banned: Vec<Vec<u32>>,
}

pub fn smp_problem(inst: &SmpInstance) -> Result<SmpProblem> {
    let n = inst.n();
    let reach = precedence_reach(n, &inst.cross_edges)?;
    let mut banned = vec![Vec::new(); n];
    for (m, w) in inst.excluded_pairs() {
        banned[m].push(inst.man_rank(m, w));
    }
    Ok(SmpProblem {
        inst: inst.clone(),
        top: vec![n as u32; n],
        reach,
        banned,
    })
}

impl SmpProblem {
    pub fn instance(&self) -> &SmpInstance {
        &self.inst
    }
}

/// Per-round bookkeeping: for every woman, the best position (in her list)
/// of any man who has proposed to her so far.
#[derive(Debug, Clone)]
pub struct ProposalBook {
    best: Vec<u32>,
}

impl LatticeProblem for SmpProblem {
    type Value = u32;
    type Context = ProposalBook;

    fn dim(&self) -> usize {
        self.inst.n
    }

    fn top(&self) -> &[u32] {
        &self.top
    }

    fn min_step(&self) -> u32 {
        1
    }

    fn context(&self, g: &[u32]) -> ProposalBook {
        let mut best = vec![u32::MAX; self.inst.n];
        for (i, &gi) in g.iter().enumerate() {
            for &z in &self.inst.mpref[i][..gi as usize] {
                best[z] = best[z].min(self.inst.rank[z][i]);
            }
        }
        ProposalBook { best }
    }

    fn is_forbidden(&self, book: &ProposalBook, g: &[u32], j: usize) -> bool {
        let gj = g[j];
        if gj == 0 {
            return true;
        }
        // someone she prefers has proposed to the woman man j holds
        let z = self.inst.woman_at(j, gj);
        if book.best[z] < self.inst.rank[z][j] {
            return true;
        }
        if self.banned[j].contains(&gj) {
            return true;
        }
        // man j's next proposal precedes an executed event
        if (gj as usize) < self.inst.n {
            let next = j * self.inst.n + gj as usize;
            return self.reach[next].iter().any(|&(i, s)| g[i] >= s);
        }
        false
    }

    fn advance(&self, _: &ProposalBook, g: &[u32], j: usize) -> u32 {
        g[j] + 1
    }
}
