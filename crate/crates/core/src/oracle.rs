//! Naive reference answers by exhaustive enumeration.
//!
//! Only instance types are used from the rest of the crate; nothing here
//! goes through the fixed-point engine.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::demo::JobInstance;
use crate::error::{Error, Result};
use crate::market::AuctionInstance;
use crate::shortest_path::WeightedDigraph;
use crate::stable_matching::{Matching, SmpInstance};

pub const MAX_ORACLE_SMP: usize = 8;
pub const MAX_ORACLE_AUCTION: usize = 4;
pub const MAX_ORACLE_PRICE: u64 = 8;

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub problem: String,
    pub answers: serde_json::Value,
    pub enumerated: u64,
    #[serde(rename = "elapsed_ms")]
    #[serde(serialize_with = "as_millis")]
    pub elapsed: Duration,
}

fn as_millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

impl OracleReport {
    pub fn run<T: Serialize>(problem: &str, f: impl FnOnce() -> Result<(T, u64)>) -> Result<Self> {
        let start = Instant::now();
        let (answers, enumerated) = f()?;
        Ok(OracleReport {
            problem: problem.to_string(),
            answers: serde_json::to_value(answers)
                .map_err(|e| Error::InvalidInstance(e.to_string()))?,
            enumerated,
            elapsed: start.elapsed(),
        })
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                go(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

fn no_blocking_pair(inst: &SmpInstance, wife: &[usize]) -> bool {
    let n = wife.len();
    let mut husband = vec![0; n];
    for (m, &w) in wife.iter().enumerate() {
        husband[w] = m;
    }
    wife.iter().enumerate().all(|(m, &own)| {
        husband.iter().enumerate().all(|(w, &h)| {
            let he_prefers = inst.man_rank(m, w) < inst.man_rank(m, own);
            let she_prefers = inst.woman_rank(w, m) < inst.woman_rank(w, h);
            !(he_prefers && she_prefers)
        })
    })
}

/// Every stable matching that also respects the instance's precedence edges
/// and pair restrictions, sorted.
pub fn oracle_stable_matchings(inst: &SmpInstance) -> Result<Vec<Matching>> {
    Ok(stable_matchings_counted(inst)?.0)
}

pub fn stable_matchings_counted(inst: &SmpInstance) -> Result<(Vec<Matching>, u64)> {
    let n = inst.n();
    if n > MAX_ORACLE_SMP {
        return Err(Error::TooLarge(format!(
            "{n} men, oracle handles at most {MAX_ORACLE_SMP}"
        )));
    }
    let perms = permutations(n);
    let count = perms.len() as u64;
    let mut out: Vec<Matching> = perms
        .into_iter()
        .filter(|wife| no_blocking_pair(inst, wife))
        .filter(|wife| {
            inst.forbidden_pairs().iter().all(|&(m, w)| wife[m] != w)
                && inst.forced_pairs().iter().all(|&(m, w)| wife[m] == w)
        })
        .filter(|wife| {
            let g: Vec<u32> = (0..n).map(|m| inst.man_rank(m, wife[m])).collect();
            inst.cross_edges()
                .iter()
                .all(|e| g[e.to.man] < e.to.rank || g[e.from.man] >= e.from.rank)
        })
        .map(|wife| Matching { wife })
        .collect();
    out.sort();
    Ok((out, count))
}

/// Textbook man-proposing deferred acceptance.
pub fn oracle_gale_shapley(inst: &SmpInstance) -> Matching {
    let n = inst.n();
    let mut next = vec![0usize; n];
    let mut husband: Vec<Option<usize>> = vec![None; n];
    let mut free: Vec<usize> = (0..n).rev().collect();
    while let Some(m) = free.pop() {
        let w = inst.mpref()[m][next[m]];
        next[m] += 1;
        match husband[w] {
            None => husband[w] = Some(m),
            Some(h) if inst.woman_rank(w, m) < inst.woman_rank(w, h) => {
                husband[w] = Some(m);
                free.push(h);
            }
            Some(_) => free.push(m),
        }
    }
    let mut wife = vec![0; n];
    for (w, h) in husband.iter().enumerate() {
        wife[h.expect("deferred acceptance matches everyone")] = w;
    }
    Matching { wife }
}

/// Single-source distances from vertex 0, `None` for unreachable vertices.
pub fn oracle_bellman_ford(graph: &WeightedDigraph) -> Vec<Option<f64>> {
    let n = graph.n();
    let mut dist: Vec<Option<f64>> = vec![None; n];
    dist[0] = Some(0.0);
    for _ in 1..n.max(2) {
        let mut changed = false;
        for &(i, j, w) in graph.edges() {
            if let Some(di) = dist[i] {
                if dist[j].is_none_or(|dj| di + w < dj) {
                    dist[j] = Some(di + w);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

fn has_perfect_demand_matching(v: &[Vec<u64>], prices: &[u64], perms: &[Vec<usize>]) -> bool {
    let payoff = |b: usize, i: usize| v[b][i] as i64 - prices[i] as i64;
    let best: Vec<i64> = (0..v.len())
        .map(|b| (0..v.len()).map(|i| payoff(b, i)).max().unwrap_or(0))
        .collect();
    perms.iter().any(|item_of| {
        item_of
            .iter()
            .enumerate()
            .all(|(b, &i)| payoff(b, i) == best[b])
    })
}

/// Every integral clearing price vector below `T[i] = max_b v[b][i]`, in
/// lexicographic order.
pub fn oracle_clearing_prices(inst: &AuctionInstance) -> Result<Vec<Vec<u64>>> {
    Ok(clearing_prices_counted(inst)?.0)
}

pub fn clearing_prices_counted(inst: &AuctionInstance) -> Result<(Vec<Vec<u64>>, u64)> {
    let n = inst.n();
    let v = inst.valuations();
    let top: Vec<u64> = (0..n)
        .map(|i| v.iter().map(|row| row[i]).max().unwrap_or(0))
        .collect();
    if n > MAX_ORACLE_AUCTION || top.iter().any(|&t| t > MAX_ORACLE_PRICE) {
        return Err(Error::TooLarge(format!(
            "oracle handles at most {MAX_ORACLE_AUCTION} items with valuations up to {MAX_ORACLE_PRICE}"
        )));
    }
    let perms = permutations(n);
    let mut out = Vec::new();
    let mut g = vec![0u64; n];
    let mut count = 0u64;
    loop {
        count += 1;
        if has_perfect_demand_matching(v, &g, &perms) {
            out.push(g.clone());
        }
        // odometer, last index fastest
        let Some(k) = (0..n).rev().find(|&k| g[k] < top[k]) else {
            break;
        };
        g[k] += 1;
        g[k + 1..].fill(0);
    }
    Ok((out, count))
}

/// Component-wise minimum of a set of vectors.
pub fn componentwise_min<T: Copy + Ord>(vectors: &[Vec<T>]) -> Option<Vec<T>> {
    let first = vectors.first()?;
    Some(
        (0..first.len())
            .map(|k| vectors.iter().map(|v| v[k]).min().expect("non-empty"))
            .collect(),
    )
}

pub fn componentwise_max<T: Copy + Ord>(vectors: &[Vec<T>]) -> Option<Vec<T>> {
    let first = vectors.first()?;
    Some(
        (0..first.len())
            .map(|k| vectors.iter().map(|v| v[k]).max().expect("non-empty"))
            .collect(),
    )
}

/// Earliest completion times by longest path over the prerequisite DAG.
pub fn oracle_job_schedule(inst: &JobInstance) -> Result<Vec<f64>> {
    let n = inst.t.len();
    let mut finish: Vec<Option<f64>> = vec![None; n];
    for _ in 0..n {
        for j in 0..n {
            if finish[j].is_some() {
                continue;
            }
            let pre = inst.pre.get(j).map_or(&[][..], Vec::as_slice);
            if pre.iter().all(|&i| finish[i].is_some()) {
                let start = pre
                    .iter()
                    .map(|&i| finish[i].unwrap_or(0.0))
                    .fold(0.0, f64::max);
                finish[j] = Some(start + inst.t[j]);
            }
        }
    }
    finish
        .into_iter()
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::InvalidInstance("prerequisites are cyclic".into()))
}

pub fn oracle_exclusive_scan(a: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    a.iter()
        .map(|x| {
            let out = acc;
            acc += x;
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn smp(m: &[&[usize]], w: &[&[usize]]) -> SmpInstance {
        SmpInstance::new(
            m.iter().map(|r| r.to_vec()).collect(),
            w.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    fn example() -> SmpInstance {
        let m = |v: [usize; 4]| v.iter().map(|x| x - 1).collect::<Vec<_>>();
        SmpInstance::new(
            vec![
                m([4, 1, 2, 3]),
                m([2, 3, 1, 4]),
                m([3, 1, 4, 2]),
                m([2, 4, 3, 1]),
            ],
            vec![
                m([4, 1, 3, 2]),
                m([1, 4, 2, 3]),
                m([1, 2, 4, 3]),
                m([3, 1, 4, 2]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn example_stable_set() {
        let all = oracle_stable_matchings(&example()).unwrap();
        for wife in [[3, 2, 0, 1], [0, 2, 3, 1], [1, 2, 3, 0]] {
            assert!(all.contains(&Matching {
                wife: wife.to_vec()
            }));
        }
        assert_eq!(
            oracle_gale_shapley(&example()),
            Matching {
                wife: vec![3, 2, 0, 1]
            }
        );
    }

    #[test]
    fn small_smp_counts() {
        assert_eq!(
            oracle_stable_matchings(&smp(&[&[0]], &[&[0]]))
                .unwrap()
                .len(),
            1
        );
        // each side's first choice is the other side's last
        let opposed = smp(&[&[0, 1], &[1, 0]], &[&[1, 0], &[0, 1]]);
        assert_eq!(oracle_stable_matchings(&opposed).unwrap().len(), 2);
    }

    #[test]
    fn stable_set_is_a_lattice() {
        let inst = example();
        let vs: Vec<Vec<u32>> = oracle_stable_matchings(&inst)
            .unwrap()
            .iter()
            .map(|m| m.proposal_vector(&inst))
            .collect();
        for a in &vs {
            for b in &vs {
                let meet: Vec<u32> = a.iter().zip(b).map(|(x, y)| *x.min(y)).collect();
                let join: Vec<u32> = a.iter().zip(b).map(|(x, y)| *x.max(y)).collect();
                assert!(vs.contains(&meet) && vs.contains(&join));
            }
        }
    }

    #[test]
    fn rejects_large_smp() {
        let n = 9;
        let row: Vec<usize> = (0..n).collect();
        let inst = SmpInstance::new(vec![row.clone(); n], vec![row; n]).unwrap();
        assert!(matches!(
            oracle_stable_matchings(&inst),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn bellman_ford_cases() {
        let g = WeightedDigraph::new(
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
        .unwrap();
        let want = [0.0, 9.0, 2.0, 8.0, 7.0].map(Some).to_vec();
        assert_eq!(oracle_bellman_ford(&g), want);
        let cut = WeightedDigraph::new(3, vec![(0, 1, 1.0)]).unwrap();
        assert_eq!(oracle_bellman_ford(&cut), vec![Some(0.0), Some(1.0), None]);
    }

    #[test]
    fn clearing_minimums() {
        for (v, want) in [
            (vec![vec![4, 1], vec![3, 2]], vec![1, 0]),
            (vec![vec![1, 0], vec![0, 1]], vec![0, 0]),
            (vec![vec![0, 0], vec![0, 0]], vec![0, 0]),
        ] {
            let all = oracle_clearing_prices(&AuctionInstance::new(v).unwrap()).unwrap();
            let min = componentwise_min(&all).unwrap();
            assert_eq!(min, want);
            assert!(all.contains(&min));
        }
    }

    #[test]
    fn clearing_set_is_meet_closed() {
        let inst = AuctionInstance::new(vec![vec![3, 5, 1], vec![4, 4, 2], vec![2, 6, 0]]).unwrap();
        let all = oracle_clearing_prices(&inst).unwrap();
        for a in &all {
            for b in &all {
                let meet: Vec<u64> = a.iter().zip(b).map(|(x, y)| *x.min(y)).collect();
                assert!(all.contains(&meet));
            }
        }
    }

    #[test]
    fn jobs_and_scan() {
        let inst =
            JobInstance::new(vec![2.0, 3.0, 1.0], vec![vec![], vec![0], vec![0, 1]]).unwrap();
        assert_eq!(oracle_job_schedule(&inst).unwrap(), vec![2.0, 5.0, 6.0]);
        let cyclic = JobInstance::new(vec![1.0, 1.0], vec![vec![1], vec![0]]).unwrap();
        assert!(oracle_job_schedule(&cyclic).is_err());
        assert_eq!(oracle_exclusive_scan(&[1.0, 2.0, 3.0]), vec![0.0, 1.0, 3.0]);
    }

    #[test]
    fn report_records_size() {
        let r = OracleReport::run("smp", || stable_matchings_counted(&example())).unwrap();
        assert_eq!(r.enumerated, 24);
        assert!(r.answers.as_array().is_some_and(|a| !a.is_empty()));
    }

    #[test]
    fn oracle_stays_off_the_engine() {
        let src = include_str!("oracle.rs");
        let body = src.split("#[cfg(test)]").next().unwrap();
        for banned in [
            "crate::engine",
            "crate::constraints",
            "crate::slice",
            "smp_problem",
            "is_stable(",
            "shortest_a",
            "shortest_b",
            "dijkstra_mode",
            "clearing_problem",
            "demand_graph(",
            "minimal_overdemanded",
            "max_matching",
            "job_problem",
            "prefix_problem",
            "solve(",
        ] {
            assert!(!body.contains(banned), "oracle mentions {banned}");
        }
    }
}
