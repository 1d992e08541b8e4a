//! The ideal model: a trusted party computes `f` on the submitted inputs.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::joint::{JointDistribution, Value, Var};
use super::InputLaw;
use crate::engine::PartyId;
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::protocol::Protocol;

/// How the substituting party picks the input it submits, given its true one.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Channel {
    /// Submit the true input.
    #[default]
    Identity,
    /// Always submit `value`.
    Constant { value: Vec<u64> },
    /// Deterministic map; unlisted inputs are submitted unchanged.
    Map { entries: Vec<MapEntry> },
    /// Submit a uniform input regardless of the true one.
    Uniform,
    /// Conditional weights `P(submitted | true)`; rows need not be normalized.
    Weighted { entries: Vec<WeightedEntry> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapEntry {
    pub from: Vec<u64>,
    pub to: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedEntry {
    pub from: Vec<u64>,
    pub to: Vec<u64>,
    pub weight: u64,
}

type Row = Vec<(Vec<FieldElement>, u64)>;

impl Channel {
    fn row(&self, protocol: &Protocol, party: PartyId, input: &[FieldElement]) -> Result<Row> {
        let own: Vec<u64> = input.iter().map(|e| e.index() as u64).collect();
        let parse = |v: &[u64]| protocol.parse_input(party, v);
        Ok(match self {
            Channel::Identity => vec![(input.to_vec(), 1)],
            Channel::Constant { value } => vec![(parse(value)?, 1)],
            Channel::Map { entries } => match entries.iter().find(|e| e.from == own) {
                Some(e) => vec![(parse(&e.to)?, 1)],
                None => vec![(input.to_vec(), 1)],
            },
            Channel::Uniform => protocol.inputs().into_iter().map(|s| (s, 1)).collect(),
            Channel::Weighted { entries } => {
                let row: Row = entries
                    .iter()
                    .filter(|e| e.from == own && e.weight > 0)
                    .map(|e| Ok((parse(&e.to)?, e.weight)))
                    .collect::<Result<_>>()?;
                if row.is_empty() {
                    return Err(Error::InputLaw(format!("channel has no weight for input {own:?}")));
                }
                row
            }
        })
    }
}

/// Exact distribution of `W = f(x̄, y)` (or `f(x, ȳ)`) when `party` submits
/// through `channel` and the other input is honest.
pub fn ideal_output_distribution(
    protocol: &Protocol,
    law: &InputLaw,
    party: PartyId,
    channel: &Channel,
) -> Result<JointDistribution> {
    if party == PartyId::Charlie {
        return Err(Error::InputLaw("charlie submits no input".into()));
    }
    let starts = law.starts(protocol)?;
    let rows: Vec<Row> = starts
        .iter()
        .map(|s| channel.row(protocol, party, if party == PartyId::Alice { &s.x } else { &s.y }))
        .collect::<Result<_>>()?;
    // Scale every row to a common total so the counts stay integral.
    let totals: Vec<u64> = rows.iter().map(|r| r.iter().map(|(_, w)| w).sum()).collect();
    let common = totals.iter().fold(1u64, |acc, &t| acc.lcm(&t));
    let mut dist = JointDistribution::new(vec![Var::W])?;
    for ((start, row), total) in starts.iter().zip(&rows).zip(&totals) {
        for (sub, w) in row {
            let value = match party {
                PartyId::Alice => protocol.evaluate(sub, &start.y),
                _ => protocol.evaluate(&start.x, sub),
            };
            dist.add(vec![Value::Int(value)], start.weight * (common / total) * w);
        }
    }
    Ok(dist)
}

/// `½ Σ |p − q|` as an exact fraction.
pub fn total_variation(d1: &JointDistribution, d2: &JointDistribution) -> Result<Ratio<u128>> {
    if d1.vars() != d2.vars() {
        let names = |d: &JointDistribution| d.vars().iter().map(|v| v.name()).collect::<Vec<_>>().join(",");
        return Err(Error::DomainMismatch(names(d1), names(d2)));
    }
    let (t1, t2) = (d1.denominator() as u128, d2.denominator() as u128);
    let mut keys: BTreeMap<&[Value], (u128, u128)> = BTreeMap::new();
    for (k, c) in d1.atoms() {
        keys.entry(k).or_default().0 = c as u128;
    }
    for (k, c) in d2.atoms() {
        keys.entry(k).or_default().1 = c as u128;
    }
    let num: u128 = keys.values().map(|&(a, b)| (a * t2).abs_diff(b * t1)).sum();
    Ok(Ratio::new(num, 2 * t1 * t2))
}

/// Probability that `var` takes a value outside `range`.
pub fn mass_outside(dist: &JointDistribution, var: Var, range: &BTreeSet<u64>) -> Result<Ratio<u64>> {
    let i = dist.index_of(var)?;
    let bad: u64 =
        dist.atoms().filter(|(k, _)| !matches!(k[i], Value::Int(v) if range.contains(&v))).map(|(_, c)| c).sum();
    Ok(Ratio::new(bad, dist.denominator().max(1)))
}
