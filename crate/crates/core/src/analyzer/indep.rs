//! Exact verdicts on joint distributions.
//!
//! `I(A;B|C) = 0` holds iff `N(a,b,c)·N(c) = N(a,c)·N(b,c)` for every
//! assignment, where `N` counts atoms. All comparisons are on integers; the
//! mutual information in bits is computed separately and only reported.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Serialize;

use super::joint::{JointDistribution, Value, Var};
use crate::error::{Error, Result};

/// An assignment showing why a condition fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub assignment: BTreeMap<String, Value>,
    pub counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict", content = "witness")]
pub enum Verdict {
    Holds,
    Violated(Witness),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndepCheck {
    pub verdict: Verdict,
    /// `I(A;B|C)` in bits. Informational only.
    pub leakage_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SureCheck {
    pub verdict: Verdict,
    /// Probability of the atoms that fail the predicate.
    pub violating_mass: Ratio<u64>,
}

type Key = Vec<Value>;

fn project(atom: &[Value], idx: &[usize]) -> Key {
    idx.iter().map(|&i| atom[i].clone()).collect()
}

fn assignment(vars: &[Var], values: &[Value], out: &mut BTreeMap<String, Value>) {
    for (v, x) in vars.iter().zip(values) {
        out.insert(v.name().into(), x.clone());
    }
}

/// Exact test of `I(A;B|C) = 0`.
pub fn check_cond_indep(dist: &JointDistribution, a: &[Var], b: &[Var], c: &[Var]) -> Result<IndepCheck> {
    let sets = [a, b, c];
    for (i, s) in sets.iter().enumerate() {
        for v in s.iter() {
            if sets[i + 1..].iter().any(|t| t.contains(v)) || s.iter().filter(|&w| w == v).count() > 1 {
                return Err(Error::OverlappingVariables(v.name().into()));
            }
        }
    }
    let ia: Vec<usize> = a.iter().map(|&v| dist.index_of(v)).collect::<Result<_>>()?;
    let ib: Vec<usize> = b.iter().map(|&v| dist.index_of(v)).collect::<Result<_>>()?;
    let ic: Vec<usize> = c.iter().map(|&v| dist.index_of(v)).collect::<Result<_>>()?;

    let mut n_abc: BTreeMap<(Key, Key, Key), u64> = BTreeMap::new();
    let mut n_ac: BTreeMap<(Key, Key), u64> = BTreeMap::new();
    let mut n_bc: BTreeMap<(Key, Key), u64> = BTreeMap::new();
    let mut n_c: BTreeMap<Key, u64> = BTreeMap::new();
    for (atom, count) in dist.atoms() {
        let (ka, kb, kc) = (project(atom, &ia), project(atom, &ib), project(atom, &ic));
        *n_abc.entry((kc.clone(), ka.clone(), kb.clone())).or_insert(0) += count;
        *n_ac.entry((kc.clone(), ka)).or_insert(0) += count;
        *n_bc.entry((kc.clone(), kb)).or_insert(0) += count;
        *n_c.entry(kc).or_insert(0) += count;
    }

    let witness = |ka: &Key, kb: &Key, kc: &Key, abc: u64| {
        let mut assignment_map = BTreeMap::new();
        assignment(a, ka, &mut assignment_map);
        assignment(b, kb, &mut assignment_map);
        assignment(c, kc, &mut assignment_map);
        let counts = BTreeMap::from([
            ("abc".to_string(), abc),
            ("ac".to_string(), n_ac[&(kc.clone(), ka.clone())]),
            ("bc".to_string(), n_bc[&(kc.clone(), kb.clone())]),
            ("c".to_string(), n_c[kc]),
        ]);
        Witness { assignment: assignment_map, counts }
    };

    // Present pairs are enough: if the identity holds on all of them, summing
    // gives Σ N(ac)N(bc) = N(c)² over present pairs alone, which leaves
    // N(ac)N(bc) = 0 for every absent pair.
    let total = dist.denominator() as f64;
    let mut leakage = 0.0f64;
    let mut first_bad: Option<Witness> = None;
    for ((kc, ka, kb), &abc) in &n_abc {
        let ac = n_ac[&(kc.clone(), ka.clone())];
        let bc = n_bc[&(kc.clone(), kb.clone())];
        let cc = n_c[kc];
        if abc as u128 * cc as u128 != ac as u128 * bc as u128 && first_bad.is_none() {
            first_bad = Some(witness(ka, kb, kc, abc));
        }
        leakage += abc as f64 / total * ((abc as f64 * cc as f64) / (ac as f64 * bc as f64)).log2();
    }
    let verdict = match first_bad {
        Some(w) => Verdict::Violated(w),
        None => Verdict::Holds,
    };
    Ok(IndepCheck { verdict, leakage_bits: leakage.max(0.0) })
}

/// A view of one atom by variable.
pub struct Atom<'a> {
    dist: &'a JointDistribution,
    values: &'a [Value],
}

impl<'a> Atom<'a> {
    pub fn get(&self, var: Var) -> &'a Value {
        &self.values[self.dist.index_of(var).expect("predicate uses tracked variables")]
    }
}

/// Exact test that every atom with positive count satisfies `predicate`.
pub fn check_almost_sure(dist: &JointDistribution, predicate: impl Fn(&Atom<'_>) -> bool) -> SureCheck {
    let mut bad = 0u64;
    let mut first: Option<Witness> = None;
    for (values, count) in dist.atoms() {
        if !predicate(&Atom { dist, values }) {
            bad += count;
            if first.is_none() {
                let mut map = BTreeMap::new();
                assignment(dist.vars(), values, &mut map);
                first = Some(Witness { assignment: map, counts: BTreeMap::from([("atom".to_string(), count)]) });
            }
        }
    }
    SureCheck {
        verdict: first.map_or(Verdict::Holds, Verdict::Violated),
        violating_mass: Ratio::new(bad, dist.denominator().max(1)),
    }
}
