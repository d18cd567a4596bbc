//! Lattice-linear side constraints over cost and price vectors, and the
//! conjunction combinator that attaches them to any base problem.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::LatticeProblem;
use crate::error::{Error, Result};
use crate::value::{gcd, LatticeValue};

/// A lattice-linear predicate on a state vector `G`.
///
/// JSON form: `{"atMost":[i,j]}`, `{"equal":[i,j]}`,
/// `{"implies":{"i":i,"k":k,"j":j,"m":m}}`, `{"lowerBound":[...]}`,
/// `{"withinDelta":[i,j,delta]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub enum Constraint<V> {
    /// `G[i] <= G[j]`
    AtMost(usize, usize),
    /// `G[i] == G[j]`
    Equal(usize, usize),
    /// `G[i] >= k  =>  G[j] >= m`
    Implies { i: usize, k: V, j: usize, m: V },
    /// `G[i] >= F[i]` for every `i`
    LowerBound(Vec<V>),
    /// `|G[i] - G[j]| <= delta`
    WithinDelta(usize, usize, V),
}

/// A constraint that was refused because it is not lattice-linear.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("constraint rejected: {description}")]
pub struct RejectedConstraint {
    pub description: String,
}

/// Keys that name predicates we know are not lattice-linear.
const REJECTED_KEYS: &[(&str, &str)] = &[
    (
        "sum",
        "G[i] + G[j] >= k is not lattice-linear: neither index is forbidden when it fails",
    ),
    (
        "atLeastSum",
        "G[i] + G[j] >= k is not lattice-linear: neither index is forbidden when it fails",
    ),
];

impl<V: LatticeValue> Constraint<V> {
    /// Advance value this constraint demands for index `j` at `g`, if `j` is
    /// forbidden by it.
    pub fn alpha_for(&self, g: &[V], j: usize) -> Option<V> {
        match *self {
            Constraint::AtMost(a, b) => (j == b && g[b] < g[a]).then(|| g[a]),
            Constraint::Equal(a, b) => {
                if j == b && g[b] < g[a] {
                    Some(g[a])
                } else if j == a && g[a] < g[b] {
                    Some(g[b])
                } else {
                    None
                }
            }
            Constraint::Implies { i, k, j: target, m } => {
                (j == target && g[i] >= k && g[target] < m).then_some(m)
            }
            Constraint::LowerBound(ref floor) => floor.get(j).copied().filter(|&f| g[j] < f),
            Constraint::WithinDelta(a, b, delta) => {
                if j == b && g[a] > g[b] + delta {
                    Some(g[a] - delta)
                } else if j == a && g[b] > g[a] + delta {
                    Some(g[b] - delta)
                } else {
                    None
                }
            }
        }
    }

    /// Indices touched by this constraint.
    fn indices(&self) -> Vec<usize> {
        match *self {
            Constraint::AtMost(a, b)
            | Constraint::Equal(a, b)
            | Constraint::WithinDelta(a, b, _) => {
                vec![a, b]
            }
            Constraint::Implies { i, j, .. } => vec![i, j],
            Constraint::LowerBound(ref f) => (0..f.len()).collect(),
        }
    }

    pub fn holds(&self, g: &[V]) -> bool {
        constraint_forbidden(g, self).is_empty()
    }

    /// Checks index ranges against dimension `n` and that constants are
    /// non-negative.
    pub fn validate(&self, n: usize) -> Result<()> {
        if let Constraint::LowerBound(f) = self {
            if f.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "lowerBound has {} components, expected {n}",
                    f.len()
                )));
            }
        }
        if let Some(bad) = self.indices().into_iter().find(|&i| i >= n) {
            return Err(Error::InvalidInstance(format!(
                "constraint index {bad} out of range for dimension {n}"
            )));
        }
        let constants: Vec<V> = match self {
            Constraint::Implies { k, m, .. } => vec![*k, *m],
            Constraint::LowerBound(f) => f.clone(),
            Constraint::WithinDelta(_, _, d) => vec![*d],
            _ => vec![],
        };
        if constants.iter().any(|c| {
            !matches!(
                c.partial_cmp(&V::ZERO),
                Some(Ordering::Greater | Ordering::Equal)
            )
        }) {
            return Err(Error::InvalidInstance(
                "constraint constants must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Input constants that can become component values.
    pub fn constants(&self) -> Vec<V> {
        match self {
            Constraint::Implies { m, .. } => vec![*m],
            Constraint::LowerBound(f) => f.clone(),
            Constraint::WithinDelta(_, _, d) => vec![*d],
            _ => vec![],
        }
    }
}

impl<V: LatticeValue + for<'de> Deserialize<'de>> Constraint<V> {
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        if let Some(obj) = value.as_object() {
            for (key, why) in REJECTED_KEYS {
                if obj.contains_key(*key) {
                    return Err(RejectedConstraint {
                        description: format!("{key}: {why}"),
                    }
                    .into());
                }
            }
        }
        serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidInstance(format!("malformed constraint {value}: {e}")))
    }
}

/// Parses and validates a JSON constraint list for dimension `n`.
pub fn parse_constraints<V>(values: &[serde_json::Value], n: usize) -> Result<Vec<Constraint<V>>>
where
    V: LatticeValue + for<'de> Deserialize<'de>,
{
    values
        .iter()
        .map(|v| {
            let c = Constraint::from_json(v)?;
            c.validate(n)?;
            Ok(c)
        })
        .collect()
}

/// Forbidden indices of `c` at `g` with their advance values. Empty exactly
/// when `c` holds.
pub fn constraint_forbidden<V: LatticeValue>(g: &[V], c: &Constraint<V>) -> Vec<(usize, V)> {
    let mut idx = c.indices();
    idx.sort_unstable();
    idx.dedup();
    idx.into_iter()
        .filter_map(|j| c.alpha_for(g, j).map(|a| (j, a)))
        .collect()
}

/// A base problem conjoined with side constraints: an index is forbidden if
/// the base or any constraint forbids it, and advances to the largest of the
/// applicable advance values.
#[derive(Debug, Clone)]
pub struct Conjoined<P: LatticeProblem> {
    base: P,
    constraints: Vec<Constraint<P::Value>>,
    by_index: Vec<Vec<usize>>,
    step: P::Value,
}

pub fn conjoin<P: LatticeProblem>(
    base: P,
    constraints: Vec<Constraint<P::Value>>,
) -> Result<Conjoined<P>> {
    let n = base.dim();
    let mut by_index = vec![Vec::new(); n];
    for (ci, c) in constraints.iter().enumerate() {
        c.validate(n)?;
        let mut idx = c.indices();
        idx.sort_unstable();
        idx.dedup();
        for j in idx {
            by_index[j].push(ci);
        }
    }
    let step = joint_step(base.min_step(), &constraints);
    Ok(Conjoined {
        base,
        constraints,
        by_index,
        step,
    })
}

/// Constraint constants can introduce values off the base problem's step
/// grid; on integral grids the gcd keeps the step valid.
fn joint_step<V: LatticeValue>(base: V, constraints: &[Constraint<V>]) -> V {
    let Some(mut g) = base.as_level() else {
        return base;
    };
    for c in constraints {
        for v in c.constants() {
            match v.as_level() {
                Some(level) => g = gcd(g, level),
                None => return base,
            }
        }
    }
    V::from_level(g.max(1))
}

impl<P: LatticeProblem> Conjoined<P> {
    pub fn base(&self) -> &P {
        &self.base
    }

    pub fn constraints(&self) -> &[Constraint<P::Value>] {
        &self.constraints
    }
}

impl<P: LatticeProblem> LatticeProblem for Conjoined<P> {
    type Value = P::Value;
    type Context = P::Context;

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn top(&self) -> &[Self::Value] {
        self.base.top()
    }

    fn min_step(&self) -> Self::Value {
        self.step
    }

    fn context(&self, g: &[Self::Value]) -> Self::Context {
        self.base.context(g)
    }

    fn is_forbidden(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> bool {
        self.step(ctx, g, j).is_some()
    }

    fn advance(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> Self::Value {
        self.step(ctx, g, j).unwrap_or(g[j])
    }

    fn step(&self, ctx: &Self::Context, g: &[Self::Value], j: usize) -> Option<Self::Value> {
        self.by_index[j]
            .iter()
            .filter_map(|&ci| self.constraints[ci].alpha_for(g, j))
            .chain(self.base.step(ctx, g, j))
            .reduce(LatticeValue::max_of)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{check_least, solve, LatticeProblem, Outcome, SolveOptions};
    use proptest::prelude::*;

    /// Unconstrained problem over a box: the predicate is always true.
    struct Free(Vec<u64>);

    impl LatticeProblem for Free {
        type Value = u64;
        type Context = ();
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn top(&self) -> &[u64] {
            &self.0
        }
        fn min_step(&self) -> u64 {
            1
        }
        fn context(&self, _: &[u64]) {}
        fn is_forbidden(&self, _: &(), _: &[u64], _: usize) -> bool {
            false
        }
        fn advance(&self, _: &(), g: &[u64], j: usize) -> u64 {
            g[j]
        }
    }

    #[test]
    fn at_most_forbids_the_larger_side() {
        assert_eq!(
            constraint_forbidden(&[5u64, 2], &Constraint::AtMost(0, 1)),
            vec![(1, 5)]
        );
    }

    #[test]
    fn equal_when_already_equal() {
        assert!(constraint_forbidden(&[3u64, 3], &Constraint::Equal(0, 1)).is_empty());
        assert_eq!(
            constraint_forbidden(&[3u64, 1], &Constraint::Equal(0, 1)),
            vec![(1, 3)]
        );
        assert_eq!(
            constraint_forbidden(&[1u64, 3], &Constraint::Equal(0, 1)),
            vec![(0, 3)]
        );
    }

    #[test]
    fn implies_forces_target() {
        let c = Constraint::Implies {
            i: 0,
            k: 2u64,
            j: 1,
            m: 7,
        };
        assert_eq!(constraint_forbidden(&[4, 0], &c), vec![(1, 7)]);
        assert!(constraint_forbidden(&[1, 0], &c).is_empty());
        assert!(constraint_forbidden(&[4, 7], &c).is_empty());
    }

    #[test]
    fn lower_bound_per_component() {
        let c = Constraint::LowerBound(vec![1u64, 0, 4]);
        assert_eq!(constraint_forbidden(&[0, 0, 2], &c), vec![(0, 1), (2, 4)]);
    }

    #[test]
    fn within_delta_both_directions() {
        let c = Constraint::WithinDelta(0, 1, 2u64);
        assert_eq!(constraint_forbidden(&[7, 1], &c), vec![(1, 5)]);
        assert_eq!(constraint_forbidden(&[1, 7], &c), vec![(0, 5)]);
        assert!(constraint_forbidden(&[3, 1], &c).is_empty());
    }

    #[test]
    fn json_syntax() {
        let parse = |s: &str| Constraint::<u64>::from_json(&serde_json::from_str(s).unwrap());
        assert_eq!(
            parse(r#"{"atMost":[0,1]}"#).unwrap(),
            Constraint::AtMost(0, 1)
        );
        assert_eq!(
            parse(r#"{"equal":[2,1]}"#).unwrap(),
            Constraint::Equal(2, 1)
        );
        assert_eq!(
            parse(r#"{"implies":{"i":0,"k":2,"j":1,"m":7}}"#).unwrap(),
            Constraint::Implies {
                i: 0,
                k: 2,
                j: 1,
                m: 7
            }
        );
        assert_eq!(
            parse(r#"{"lowerBound":[0,2,0]}"#).unwrap(),
            Constraint::LowerBound(vec![0, 2, 0])
        );
        assert_eq!(
            parse(r#"{"withinDelta":[0,1,3]}"#).unwrap(),
            Constraint::WithinDelta(0, 1, 3)
        );
        assert!(matches!(
            parse(r#"{"sum":[0,1,4]}"#),
            Err(Error::RejectedConstraint(_))
        ));
        assert!(matches!(
            parse(r#"{"bogus":[0]}"#),
            Err(Error::InvalidInstance(_))
        ));
    }

    #[test]
    fn validation() {
        assert!(Constraint::<u64>::AtMost(0, 3).validate(3).is_err());
        assert!(Constraint::<u64>::LowerBound(vec![1, 2])
            .validate(3)
            .is_err());
        assert!(Constraint::<f64>::WithinDelta(0, 1, -1.0)
            .validate(3)
            .is_err());
        assert!(Constraint::<u64>::Equal(0, 2).validate(3).is_ok());
    }

    #[test]
    fn conjoined_free_problem_finds_least_constrained_vector() {
        let cs = vec![
            Constraint::LowerBound(vec![2, 0, 0]),
            Constraint::AtMost(0, 1),
            Constraint::Implies {
                i: 1,
                k: 2,
                j: 2,
                m: 3,
            },
        ];
        let p = conjoin(Free(vec![4, 4, 4]), cs).unwrap();
        let r = solve(&p, SolveOptions::sequential()).unwrap();
        assert_eq!(r.outcome, Outcome::Feasible(vec![2, 2, 3]));
        assert!(check_least(&p, &[2, 2, 3]).unwrap());
    }

    #[test]
    fn unrepairable_constraint_is_infeasible() {
        let cs = vec![Constraint::Implies {
            i: 0,
            k: 0,
            j: 1,
            m: 9,
        }];
        let p = conjoin(Free(vec![4, 4]), cs).unwrap();
        let r = solve(&p, SolveOptions::sequential()).unwrap();
        assert_eq!(
            r.outcome,
            Outcome::Infeasible {
                witness: 1,
                attempted: 9
            }
        );
    }

    fn arb_constraint(n: usize) -> impl Strategy<Value = Constraint<u64>> {
        prop_oneof![
            (0..n, 0..n).prop_map(|(i, j)| Constraint::AtMost(i, j)),
            (0..n, 0..n).prop_map(|(i, j)| Constraint::Equal(i, j)),
            (0..n, 0..6u64, 0..n, 0..6u64).prop_map(|(i, k, j, m)| Constraint::Implies {
                i,
                k,
                j,
                m
            }),
            proptest::collection::vec(0..6u64, n).prop_map(Constraint::LowerBound),
            (0..n, 0..n, 0..4u64).prop_map(|(i, j, d)| Constraint::WithinDelta(i, j, d)),
        ]
    }

    proptest! {
        #[test]
        fn meet_of_satisfying_vectors_satisfies(
            c in arb_constraint(3),
            v in proptest::collection::vec(0..8u64, 3),
            w in proptest::collection::vec(0..8u64, 3),
        ) {
            prop_assume!(c.holds(&v) && c.holds(&w));
            let meet: Vec<u64> = v.iter().zip(&w).map(|(a, b)| *a.min(b)).collect();
            prop_assert!(c.holds(&meet));
        }

        #[test]
        fn forbidden_index_cannot_be_kept(
            c in arb_constraint(3),
            g in proptest::collection::vec(0..6u64, 3),
            bump in proptest::collection::vec(0..4u64, 3),
        ) {
            // every H >= G that keeps a forbidden component below its advance
            // value still violates the constraint
            for (j, alpha) in constraint_forbidden(&g, &c) {
                prop_assert!(alpha > g[j]);
                let mut h: Vec<u64> = g.iter().zip(&bump).map(|(a, b)| a + b).collect();
                h[j] = g[j] + (alpha - g[j] - 1).min(bump[j]);
                prop_assert!(!c.holds(&h));
            }
        }
    }
}
