//! JSON instance documents and output helpers.
//!
//! A document holds exactly one instance key (`jobs`, `prefix`, `smp`,
//! `graph` or `auction`) and an optional `constraints` list. Stable matching
//! documents use 1-based men, women and ranks; everything else is 0-based.

use serde::Deserialize;
use serde_json::{json, Value};

use crate::demo::{JobInstance, PrefixInstance};
use crate::engine::TraceRecord;
use crate::error::{Error, Result};
use crate::market::AuctionInstance;
use crate::shortest_path::{GraphInput, WeightedDigraph};
use crate::stable_matching::{Event, PrecedenceEdge, SmpInstance};
use crate::value::LatticeValue;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub jobs: Option<JobInstance>,
    pub prefix: Option<PrefixInstance>,
    pub smp: Option<SmpInput>,
    pub graph: Option<GraphInput>,
    pub auction: Option<AuctionInstance>,
    #[serde(default)]
    pub constraints: Vec<Value>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CrossEdgeInput {
    pub from: (usize, u32),
    pub to: (usize, u32),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SmpInput {
    pub mpref: Vec<Vec<usize>>,
    pub wpref: Vec<Vec<usize>>,
    #[serde(default)]
    pub cross_edges: Vec<CrossEdgeInput>,
    #[serde(default)]
    pub forbidden_pairs: Vec<(usize, usize)>,
    #[serde(default)]
    pub forced_pairs: Vec<(usize, usize)>,
}

fn zero_based(x: usize, what: &str) -> Result<usize> {
    x.checked_sub(1)
        .ok_or_else(|| Error::InvalidInstance(format!("{what} uses 1-based indices, got 0")))
}

impl SmpInput {
    pub fn into_instance(self) -> Result<SmpInstance> {
        let shift = |rows: Vec<Vec<usize>>, what: &str| -> Result<Vec<Vec<usize>>> {
            rows.into_iter()
                .map(|row| row.into_iter().map(|x| zero_based(x, what)).collect())
                .collect()
        };
        let mut inst = SmpInstance::new(shift(self.mpref, "mpref")?, shift(self.wpref, "wpref")?)?;
        let edges = self
            .cross_edges
            .iter()
            .map(|e| {
                Ok(PrecedenceEdge {
                    from: Event {
                        man: zero_based(e.from.0, "crossEdges")?,
                        rank: e.from.1,
                    },
                    to: Event {
                        man: zero_based(e.to.0, "crossEdges")?,
                        rank: e.to.1,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if !edges.is_empty() {
            inst = inst.with_cross_edges(edges)?;
        }
        for (m, w) in self.forbidden_pairs {
            inst = inst.with_forbidden_pair(
                zero_based(m, "forbiddenPairs")?,
                zero_based(w, "forbiddenPairs")?,
            )?;
        }
        for (m, w) in self.forced_pairs {
            inst = inst
                .with_forced_pair(zero_based(m, "forcedPairs")?, zero_based(w, "forcedPairs")?)?;
        }
        Ok(inst)
    }
}

/// The single instance held by a document.
#[derive(Debug, Clone)]
pub enum Instance {
    Jobs(JobInstance),
    Prefix(PrefixInstance),
    Smp(SmpInstance),
    Graph(WeightedDigraph),
    Auction(AuctionInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Jobs(_) => "jobs",
            Instance::Prefix(_) => "prefix",
            Instance::Smp(_) => "smp",
            Instance::Graph(_) => "graph",
            Instance::Auction(_) => "auction",
        }
    }
}

/// Error raised for documents that parse but have the wrong shape.
pub fn schema_error(msg: impl Into<String>) -> Error {
    Error::InvalidInstance(msg.into())
}

impl Document {
    pub fn parse(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn instance(&self) -> Result<Instance> {
        let mut found = Vec::new();
        if let Some(j) = &self.jobs {
            j.validate()?;
            found.push(Instance::Jobs(j.clone()));
        }
        if let Some(p) = &self.prefix {
            p.validate()?;
            found.push(Instance::Prefix(p.clone()));
        }
        if let Some(s) = &self.smp {
            found.push(Instance::Smp(s.clone().into_instance()?));
        }
        if let Some(g) = &self.graph {
            found.push(Instance::Graph(WeightedDigraph::from_input(g.clone())?));
        }
        if let Some(a) = &self.auction {
            a.validate()?;
            found.push(Instance::Auction(a.clone()));
        }
        match found.len() {
            1 => Ok(found.remove(0)),
            0 => Err(schema_error(
                "document holds no instance (jobs, prefix, smp, graph or auction)",
            )),
            _ => Err(schema_error("document holds more than one instance")),
        }
    }
}

/// A JSON number, written as an integer when the value is integral.
pub fn number<V: LatticeValue>(x: V) -> Value {
    match x.as_level() {
        Some(level) => json!(level),
        None => json!(x.to_f64()),
    }
}

pub fn numbers<V: LatticeValue>(xs: &[V]) -> Value {
    Value::Array(xs.iter().map(|&x| number(x)).collect())
}

pub fn trace_line<V: LatticeValue>(r: &TraceRecord<V>) -> Value {
    json!({"round": r.round, "G": numbers(&r.state), "forbidden": r.forbidden})
}

pub const SUBCOMMANDS: &[&str] = &[
    "schedule", "prefix", "smp", "path", "clearing", "slice", "oracle",
];

/// Expected input for a subcommand, as an annotated JSON example.
pub fn schema(subcommand: &str) -> Option<&'static str> {
    Some(match subcommand {
        "schedule" => SCHEDULE_SCHEMA,
        "prefix" => PREFIX_SCHEMA,
        "smp" => SMP_SCHEMA,
        "path" => PATH_SCHEMA,
        "clearing" => CLEARING_SCHEMA,
        "slice" => SLICE_SCHEMA,
        "oracle" => ORACLE_SCHEMA,
        _ => return None,
    })
}

const CONSTRAINTS_NOTE: &str = r#"constraints (optional, 0-based indices):
  {"atMost":[i,j]}                       G[i] <= G[j]
  {"equal":[i,j]}                        G[i] == G[j]
  {"implies":{"i":i,"k":k,"j":j,"m":m}}  G[i] >= k implies G[j] >= m
  {"lowerBound":[f0,...,fn-1]}           G[i] >= f[i]
  {"withinDelta":[i,j,d]}                |G[i] - G[j]| <= d"#;

const SCHEDULE_SCHEMA: &str = r#"{"jobs":{"t":[2,3,1],"pre":[[],[0],[0,1]]},"constraints":[]}
  t    positive durations
  pre  pre[j] lists the jobs (0-based) that must finish before j starts"#;

const PREFIX_SCHEMA: &str = r#"{"prefix":{"a":[1,2,3]},"constraints":[]}
  a  non-negative entries; the solution is the exclusive prefix sum"#;

const SMP_SCHEMA: &str = r#"{"smp":{"mpref":[[4,1,2,3],...],"wpref":[[4,1,3,2],...],
        "crossEdges":[{"from":[1,2],"to":[2,2]}],
        "forbiddenPairs":[[1,4]],"forcedPairs":[[3,1]]},"constraints":[]}
  mpref[m]   man m's list of women, most preferred first (1-based)
  wpref[w]   woman w's list of men, most preferred first (1-based)
  crossEdges event [man,rank] in "from" must happen before event "to" (1-based)
  solution   G[m] is the rank of man m's partner in his list"#;

const PATH_SCHEMA: &str = r#"{"graph":{"n":5,"edges":[[0,1,9],[0,2,2]]},"constraints":[]}
  n      vertex count; vertex 0 is the source
  edges  [from,to,weight] with weight > 0 (0-based)
  --algo a|b|dijkstra; dijkstra takes no constraints"#;

const CLEARING_SCHEMA: &str = r#"{"auction":{"valuations":[[4,1],[3,2]]},"constraints":[]}
  valuations[b][i]  bidder b's integer value for item i (square)
  --algo unit|accelerated"#;

const SLICE_SCHEMA: &str = r#"an "smp" or "auction" document, as for the smp and clearing subcommands
  --enumerate  also list every solution
  --count      only report the number of solutions"#;

const ORACLE_SCHEMA: &str = r#"any instance document; constraints are ignored
  smp      all stable matchings (at most 8 men)
  graph    Bellman-Ford distances
  auction  all clearing price vectors (at most 4 items, values up to 8)
  jobs     longest-path completion times
  prefix   exclusive prefix sum"#;

pub fn constraints_help() -> &'static str {
    CONSTRAINTS_NOTE
}
