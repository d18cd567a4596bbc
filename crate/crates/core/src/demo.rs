//! Job scheduling with prerequisites and exclusive prefix sums.

use serde::{Deserialize, Serialize};

use crate::engine::LatticeProblem;
use crate::error::{Error, Result};
use crate::value::{integral_step, REAL_STEP_EPSILON};

/// Jobs with durations `t` and prerequisite lists `pre`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobInstance {
    pub t: Vec<f64>,
    #[serde(default)]
    pub pre: Vec<Vec<usize>>,
}

impl JobInstance {
    pub fn new(t: Vec<f64>, pre: Vec<Vec<usize>>) -> Result<Self> {
        let inst = JobInstance { t, pre };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t.len();
        if n == 0 {
            return Err(Error::InvalidInstance("no jobs".into()));
        }
        if let Some(t) = self.t.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidInstance(format!(
                "job duration {t} must be positive"
            )));
        }
        if self.pre.len() > n {
            return Err(Error::InvalidInstance(
                "more prerequisite lists than jobs".into(),
            ));
        }
        if self.pre.iter().flatten().any(|&i| i >= n) {
            return Err(Error::InvalidInstance(
                "prerequisite index out of range".into(),
            ));
        }
        Ok(())
    }

    pub fn prerequisites(&self, j: usize) -> &[usize] {
        self.pre.get(j).map_or(&[], Vec::as_slice)
    }
}

/// Least completion times: `G[j] >= max(t_j, max{G[i] + t_j | i in pre(j)})`.
///
/// The top is `n * max(t)`, so cyclic prerequisites end as infeasible.
#[derive(Debug, Clone)]
pub struct JobProblem {
    inst: JobInstance,
    top: Vec<f64>,
    delta: f64,
}

pub fn job_problem(inst: JobInstance) -> Result<JobProblem> {
    inst.validate()?;
    let n = inst.t.len();
    let max_t = inst.t.iter().copied().fold(0.0, f64::max);
    let delta = integral_step(inst.t.iter().copied()).unwrap_or(REAL_STEP_EPSILON);
    Ok(JobProblem {
        top: vec![n as f64 * max_t; n],
        inst,
        delta,
    })
}

impl JobProblem {
    fn alpha(&self, g: &[f64], j: usize) -> f64 {
        let t = self.inst.t[j];
        self.inst
            .prerequisites(j)
            .iter()
            .map(|&i| g[i] + t)
            .fold(t, f64::max)
    }
}

impl LatticeProblem for JobProblem {
    type Value = f64;
    type Context = ();

    fn dim(&self) -> usize {
        self.inst.t.len()
    }

    fn top(&self) -> &[f64] {
        &self.top
    }

    fn min_step(&self) -> f64 {
        self.delta
    }

    fn context(&self, _: &[f64]) {}

    fn is_forbidden(&self, _: &(), g: &[f64], j: usize) -> bool {
        g[j] < self.alpha(g, j)
    }

    fn advance(&self, _: &(), g: &[f64], j: usize) -> f64 {
        self.alpha(g, j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixInstance {
    pub a: Vec<f64>,
}

impl PrefixInstance {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        let inst = PrefixInstance { a };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() {
            return Err(Error::InvalidInstance("prefix array is empty".into()));
        }
        if self.a.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidInstance(
                "prefix entries must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Exclusive prefix sum as the least `G` with `G[j] >= G[j-1] + A[j-1]`.
#[derive(Debug, Clone)]
pub struct PrefixProblem {
    a: Vec<f64>,
    top: Vec<f64>,
    delta: f64,
}

pub fn prefix_problem(inst: PrefixInstance) -> Result<PrefixProblem> {
    inst.validate()?;
    let total: f64 = inst.a.iter().sum();
    let delta = integral_step(inst.a.iter().copied()).unwrap_or(REAL_STEP_EPSILON);
    Ok(PrefixProblem {
        top: vec![total; inst.a.len()],
        a: inst.a,
        delta,
    })
}

impl LatticeProblem for PrefixProblem {
    type Value = f64;
    type Context = ();

    fn dim(&self) -> usize {
        self.a.len()
    }

    fn top(&self) -> &[f64] {
        &self.top
    }

    fn min_step(&self) -> f64 {
        self.delta
    }

    fn context(&self, _: &[f64]) {}

    fn is_forbidden(&self, _: &(), g: &[f64], j: usize) -> bool {
        j > 0 && g[j] < g[j - 1] + self.a[j - 1]
    }

    fn advance(&self, _: &(), g: &[f64], j: usize) -> f64 {
        g[j - 1] + self.a[j - 1]
    }
}
