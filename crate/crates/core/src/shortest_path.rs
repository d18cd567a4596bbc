//! Constrained single-source shortest paths.
//!
//! `G[i]` is a lower bound on the cost of reaching vertex `i` from the source
//! (vertex 0). Vertex `i` is a parent of `j` when the edge `(i, j)` justifies
//! `G[j]`, i.e. `G[j] >= G[i] + w[i, j]`. A vector is feasible when every
//! non-source vertex has a parent; the least feasible vector holds the
//! shortest-path distances.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::constraints::{conjoin, Conjoined, Constraint};
use crate::engine::{solve, LatticeProblem, SolveOptions, SolveResult};
use crate::error::{Error, Result};
use crate::value::{integral_step, REAL_STEP_EPSILON};

/// Directed graph with strictly positive weights; vertex 0 is the source.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    /// `pre[j]`: incoming `(i, w[i, j])`.
    pre: Vec<Vec<(usize, f64)>>,
}

/// JSON form `{"n":5,"edges":[[0,1,9],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphInput {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedDigraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance(
                "graph needs at least the source vertex".into(),
            ));
        }
        let mut pre = vec![Vec::new(); n];
        for &(i, j, w) in &edges {
            if i >= n || j >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge ({i}, {j}) out of range"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "edge ({i}, {j}) has weight {w}; weights must be strictly positive"
                )));
            }
            pre[j].push((i, w));
        }
        Ok(WeightedDigraph { n, edges, pre })
    }

    pub fn from_input(input: GraphInput) -> Result<Self> {
        Self::new(input.n, input.edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn pre(&self, j: usize) -> &[(usize, f64)] {
        &self.pre[j]
    }

    /// Non-source vertices without incoming edges.
    pub fn orphans(&self) -> Vec<usize> {
        (1..self.n).filter(|&j| self.pre[j].is_empty()).collect()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).fold(0.0, f64::max)
    }

    /// `min{G[i] + w[i,j] | i in pre(j)}`, infinite when `pre(j)` is empty.
    fn cheapest_entry(&self, g: &[f64], j: usize) -> f64 {
        self.pre[j]
            .iter()
            .map(|&(i, w)| g[i] + w)
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn parent(j: usize, i: usize, g: &[f64], graph: &WeightedDigraph) -> bool {
    graph.pre[j]
        .iter()
        .any(|&(p, w)| p == i && g[j] >= g[i] + w)
}

/// Every non-source vertex has a parent.
pub fn is_path_feasible(g: &[f64], graph: &WeightedDigraph) -> bool {
    (1..graph.n).all(|j| graph.pre[j].iter().any(|&(i, w)| g[j] >= g[i] + w))
}

/// Vertices connected to the source through parent edges.
pub fn fixed_set(g: &[f64], graph: &WeightedDigraph) -> Vec<bool> {
    let mut out_parent: Vec<Vec<usize>> = vec![Vec::new(); graph.n];
    for &(i, j, w) in &graph.edges {
        if g[j] >= g[i] + w {
            out_parent[i].push(j);
        }
    }
    let mut fixed = vec![false; graph.n];
    fixed[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(i) = queue.pop_front() {
        for &j in &out_parent[i] {
            if !fixed[j] {
                fixed[j] = true;
                queue.push_back(j);
            }
        }
    }
    fixed
}

/// Cheapest tentative cost over edges from fixed to non-fixed vertices;
/// `None` when no such edge exists.
pub fn beta(g: &[f64], graph: &WeightedDigraph, fixed: &[bool]) -> Option<f64> {
    graph
        .edges
        .iter()
        .filter(|&&(i, j, _)| fixed[i] && !fixed[j])
        .map(|&(i, _, w)| g[i] + w)
        .min_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
}

fn path_top(graph: &WeightedDigraph) -> Vec<f64> {
    vec![graph.n as f64 * graph.max_weight(); graph.n]
}

fn path_step(graph: &WeightedDigraph) -> f64 {
    integral_step(graph.edges.iter().map(|e| e.2)).unwrap_or(REAL_STEP_EPSILON)
}

/// Per-vertex advancement to the cheapest incoming tentative cost.
#[derive(Debug, Clone)]
pub struct ShortestPathA {
    graph: WeightedDigraph,
    top: Vec<f64>,
    delta: f64,
}

impl ShortestPathA {
    pub fn new(graph: WeightedDigraph) -> Self {
        ShortestPathA {
            top: path_top(&graph),
            delta: path_step(&graph),
            graph,
        }
    }
}

impl LatticeProblem for ShortestPathA {
    type Value = f64;
    type Context = ();

    fn dim(&self) -> usize {
        self.graph.n
    }
    fn top(&self) -> &[f64] {
        &self.top
    }
    fn min_step(&self) -> f64 {
        self.delta
    }
    fn context(&self, _: &[f64]) {}

    fn is_forbidden(&self, _: &(), g: &[f64], j: usize) -> bool {
        j != 0 && !self.graph.pre[j].iter().any(|&(i, w)| g[j] >= g[i] + w)
    }

    fn advance(&self, _: &(), g: &[f64], j: usize) -> f64 {
        self.graph.cheapest_entry(g, j)
    }
}

/// Advancement of every non-fixed vertex to at least the cut threshold.
#[derive(Debug, Clone)]
pub struct ShortestPathB {
    graph: WeightedDigraph,
    top: Vec<f64>,
    delta: f64,
}

impl ShortestPathB {
    pub fn new(graph: WeightedDigraph) -> Self {
        ShortestPathB {
            top: path_top(&graph),
            delta: path_step(&graph),
            graph,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedCut {
    pub fixed: Vec<bool>,
    pub beta: Option<f64>,
}

impl LatticeProblem for ShortestPathB {
    type Value = f64;
    type Context = FixedCut;

    fn dim(&self) -> usize {
        self.graph.n
    }
    fn top(&self) -> &[f64] {
        &self.top
    }
    fn min_step(&self) -> f64 {
        self.delta
    }

    fn context(&self, g: &[f64]) -> FixedCut {
        let fixed = fixed_set(g, &self.graph);
        let beta = beta(g, &self.graph, &fixed);
        FixedCut { fixed, beta }
    }

    fn is_forbidden(&self, cut: &FixedCut, _: &[f64], j: usize) -> bool {
        !cut.fixed[j]
    }

    fn advance(&self, cut: &FixedCut, g: &[f64], j: usize) -> f64 {
        match cut.beta {
            Some(b) => b.max(self.graph.cheapest_entry(g, j)),
            None => f64::INFINITY,
        }
    }
}

pub fn shortest_a_problem(
    graph: &WeightedDigraph,
    cs: Vec<Constraint<f64>>,
) -> Result<Conjoined<ShortestPathA>> {
    conjoin(ShortestPathA::new(graph.clone()), cs)
}

pub fn shortest_b_problem(
    graph: &WeightedDigraph,
    cs: Vec<Constraint<f64>>,
) -> Result<Conjoined<ShortestPathB>> {
    conjoin(ShortestPathB::new(graph.clone()), cs)
}

pub fn shortest_a(
    graph: &WeightedDigraph,
    cs: Vec<Constraint<f64>>,
    opts: SolveOptions,
) -> Result<SolveResult<f64>> {
    solve(&shortest_a_problem(graph, cs)?, opts)
}

pub fn shortest_b(
    graph: &WeightedDigraph,
    cs: Vec<Constraint<f64>>,
    opts: SolveOptions,
) -> Result<SolveResult<f64>> {
    solve(&shortest_b_problem(graph, cs)?, opts)
}

/// One parent per non-source vertex (the lowest-numbered), `None` for the
/// source or when no parent exists.
pub fn parents(g: &[f64], graph: &WeightedDigraph) -> Vec<Option<usize>> {
    (0..graph.n)
        .map(|j| {
            if j == 0 {
                return None;
            }
            graph.pre[j]
                .iter()
                .filter(|&&(i, w)| g[j] >= g[i] + w)
                .map(|&(i, _)| i)
                .min()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DijkstraOutput {
    pub dist: Vec<f64>,
    /// Vertices in the order they became fixed.
    pub order: Vec<usize>,
}

#[derive(PartialEq)]
struct Label(f64);

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// The sequential specialization: advance only the vertex that attains the
/// cut threshold, found with a heap of tentative labels.
pub fn dijkstra_mode(graph: &WeightedDigraph) -> Result<DijkstraOutput> {
    let n = graph.n;
    let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(i, j, w) in &graph.edges {
        out[i].push((j, w));
    }
    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::from([(Reverse(Label(0.0)), Reverse(0usize))]);
    while let Some((Reverse(Label(d)), Reverse(v))) = heap.pop() {
        if dist[v].is_some() {
            continue;
        }
        dist[v] = Some(d);
        order.push(v);
        for &(u, w) in &out[v] {
            if dist[u].is_none() {
                heap.push((Reverse(Label(d + w)), Reverse(u)));
            }
        }
    }
    if order.len() < n {
        let unreachable = (0..n).filter(|&v| dist[v].is_none()).collect();
        return Err(Error::UnreachableVertex {
            unreachable,
            partial: dist,
        });
    }
    Ok(DijkstraOutput {
        dist: dist
            .into_iter()
            .map(|d| d.unwrap_or(f64::INFINITY))
            .collect(),
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{check_least, termination_bound, Outcome};
    use crate::oracle;

    pub(crate) fn example_graph() -> WeightedDigraph {
        WeightedDigraph::new(
            5,
            vec![
                (0, 1, 9.0),
                (0, 2, 2.0),
                (1, 3, 3.0),
                (2, 3, 6.0),
                (4, 3, 8.0),
                (1, 4, 2.0),
                (2, 4, 5.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn parent_examples() {
        let g = example_graph();
        let v = [0.0, 2.0, 3.0, 5.0, 8.0];
        assert!(parent(2, 0, &v, &g));
        assert!(parent(4, 1, &v, &g));
        assert!(parent(4, 2, &v, &g));
        assert!(!parent(1, 0, &v, &g));
        let zero = [0.0; 5];
        for &(i, j, _) in g.edges() {
            assert!(!parent(j, i, &zero, &g));
        }
    }

    #[test]
    fn fixed_sets_and_beta() {
        let g = example_graph();
        let zero = [0.0; 5];
        let f = fixed_set(&zero, &g);
        assert_eq!(f, vec![true, false, false, false, false]);
        assert_eq!(beta(&zero, &g, &f), Some(2.0));

        let mid = [0.0, 9.0, 2.0, 3.0, 2.0];
        let f = fixed_set(&mid, &g);
        assert_eq!(f, vec![true, true, true, false, false]);
        assert_eq!(beta(&mid, &g, &f), Some(7.0));

        let end = [0.0, 9.0, 2.0, 8.0, 7.0];
        assert!(fixed_set(&end, &g).iter().all(|&x| x));

        let line = WeightedDigraph::new(2, vec![(0, 1, 5.0)]).unwrap();
        let v = [0.0, 5.0];
        assert_eq!(beta(&v, &line, &fixed_set(&v, &line)), None);
    }

    #[test]
    fn b_reproduces_two_round_trace() {
        let r = shortest_b(
            &example_graph(),
            vec![],
            SolveOptions::sequential().traced(),
        )
        .unwrap();
        assert_eq!(r.outcome, Outcome::Feasible(vec![0.0, 9.0, 2.0, 8.0, 7.0]));
        assert_eq!(r.rounds, 2);
        let t = r.trace.unwrap();
        assert_eq!(t[1].state, vec![0.0, 9.0, 2.0, 3.0, 2.0]);
        assert_eq!(t[1].forbidden, vec![3, 4]);
        assert!(t[2].forbidden.is_empty());
    }

    #[test]
    fn a_reaches_same_distances() {
        let g = example_graph();
        let r = shortest_a(&g, vec![], SolveOptions::sequential()).unwrap();
        assert_eq!(r.outcome, Outcome::Feasible(vec![0.0, 9.0, 2.0, 8.0, 7.0]));
        assert_eq!(
            dijkstra_mode(&g).unwrap().dist,
            vec![0.0, 9.0, 2.0, 8.0, 7.0]
        );
        let bf = oracle::oracle_bellman_ford(&g);
        assert_eq!(
            bf,
            vec![Some(0.0), Some(9.0), Some(2.0), Some(8.0), Some(7.0)]
        );
    }

    #[test]
    fn join_of_feasible_vectors_need_not_be_feasible() {
        let g = example_graph();
        assert!(is_path_feasible(&[0.0, 10.0, 3.0, 14.0, 8.0], &g));
        assert!(is_path_feasible(&[0.0, 9.0, 10.0, 12.0, 11.0], &g));
        assert!(!is_path_feasible(&[0.0, 10.0, 10.0, 14.0, 11.0], &g));
        // meet is feasible
        assert!(is_path_feasible(&[0.0, 9.0, 3.0, 12.0, 8.0], &g));
    }

    #[test]
    fn trivial_graphs() {
        let single = WeightedDigraph::new(1, vec![]).unwrap();
        for algo in [shortest_a, shortest_b] {
            let r = algo(&single, vec![], SolveOptions::sequential()).unwrap();
            assert_eq!(r.outcome, Outcome::Feasible(vec![0.0]));
        }
        let cut = WeightedDigraph::new(2, vec![(1, 1, 1.0)]).unwrap();
        for algo in [shortest_a, shortest_b] {
            let r = algo(&cut, vec![], SolveOptions::sequential()).unwrap();
            assert!(matches!(r.outcome, Outcome::Infeasible { witness: 1, .. }));
        }
        let orphan = WeightedDigraph::new(2, vec![]).unwrap();
        assert_eq!(orphan.orphans(), vec![1]);
        let r = shortest_a(&orphan, vec![], SolveOptions::sequential()).unwrap();
        assert!(matches!(r.outcome, Outcome::Infeasible { witness: 1, .. }));
        assert!(matches!(
            dijkstra_mode(&orphan),
            Err(Error::UnreachableVertex { ref unreachable, .. }) if unreachable == &vec![1]
        ));
    }

    #[test]
    fn chain_in_two_rounds() {
        let g = WeightedDigraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(
            oracle::oracle_bellman_ford(&g),
            vec![Some(0.0), Some(1.0), Some(2.0)]
        );
        let r = shortest_b(&g, vec![], SolveOptions::sequential()).unwrap();
        assert_eq!(r.outcome, Outcome::Feasible(vec![0.0, 1.0, 2.0]));
        assert_eq!(r.rounds, 2);
    }

    #[test]
    fn star_graph_dijkstra() {
        let g = WeightedDigraph::new(4, vec![(0, 1, 3.0), (0, 2, 1.0), (0, 3, 2.0)]).unwrap();
        let out = dijkstra_mode(&g).unwrap();
        assert_eq!(out.dist, vec![0.0, 3.0, 1.0, 2.0]);
        assert_eq!(out.order, vec![0, 2, 3, 1]);
    }

    #[test]
    fn constrained_paths_are_least() {
        let g = WeightedDigraph::new(4, vec![(0, 1, 1.0), (0, 2, 3.0), (1, 3, 1.0), (2, 3, 1.0)])
            .unwrap();
        let cs = vec![
            Constraint::AtMost(2, 1),
            Constraint::Implies {
                i: 3,
                k: 1.0,
                j: 3,
                m: 3.0,
            },
        ];
        let pa = shortest_a_problem(&g, cs.clone()).unwrap();
        let pb = shortest_b_problem(&g, cs).unwrap();
        let ra = solve(&pa, SolveOptions::sequential()).unwrap();
        let rb = solve(&pb, SolveOptions::sequential()).unwrap();
        assert_eq!(ra.outcome, rb.outcome);
        let sol = ra.solution().unwrap().to_vec();
        assert_eq!(sol, vec![0.0, 3.0, 3.0, 4.0]);
        assert!(check_least(&pa, &sol).unwrap());
        assert!(check_least(&pb, &sol).unwrap());
        assert!(ra.rounds as u128 <= termination_bound(&pa));
    }

    #[test]
    fn parents_at_termination() {
        let g = example_graph();
        let p = parents(&[0.0, 9.0, 2.0, 8.0, 7.0], &g);
        assert_eq!(p, vec![None, Some(0), Some(0), Some(2), Some(2)]);
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(WeightedDigraph::new(2, vec![(0, 1, 0.0)]).is_err());
        assert!(WeightedDigraph::new(2, vec![(0, 2, 1.0)]).is_err());
    }
}
