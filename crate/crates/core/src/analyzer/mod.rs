//! Exact joint distributions of protocol executions and the security checks
//! run on them.

mod ideal;
mod indep;
mod joint;
mod suite;

use serde::{Deserialize, Serialize};

use crate::adversary::Deviation;
use crate::engine::exact::{explore, required_atoms, Observe, Order, Start};
use crate::engine::{EngineError, PartyId};
use crate::error::{Error, Result};
use crate::protocol::Protocol;

pub use ideal::{ideal_output_distribution, mass_outside, total_variation, Channel};
pub use indep::{check_almost_sure, check_cond_indep, Atom, IndepCheck, SureCheck, Verdict, Witness};
pub use joint::{JointDistribution, Value, Var};
pub use suite::{
    attack_demo, check_active_suite, check_passive_suite, AttackReport, ConditionRecord, SecurityReport, Status,
    VerdictTag,
};

/// Default number of atoms an analysis may stand for.
pub const DEFAULT_BUDGET: u128 = 10_000_000_000;

/// Distribution of the inputs `(X, Y)`, as integer weights.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InputLaw {
    /// Uniform over all input pairs.
    #[default]
    Uniform,
    /// Independent uniform bits in every position of both inputs.
    IidBernoulliHalf,
    /// Explicit weights; unlisted pairs have weight zero.
    Table { entries: Vec<LawEntry> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawEntry {
    pub x: Vec<u64>,
    pub y: Vec<u64>,
    pub weight: u64,
}

impl InputLaw {
    pub fn point(x: Vec<u64>, y: Vec<u64>) -> Self {
        InputLaw::Table { entries: vec![LawEntry { x, y, weight: 1 }] }
    }

    /// Input pairs with positive weight, in canonical order.
    pub fn starts(&self, protocol: &Protocol) -> Result<Vec<Start>> {
        let pairs = |inputs: Vec<Vec<_>>| -> Vec<Start> {
            inputs
                .iter()
                .flat_map(|x| inputs.iter().map(move |y| Start { x: x.clone(), y: y.clone(), weight: 1 }))
                .collect()
        };
        match self {
            InputLaw::Uniform => Ok(pairs(protocol.inputs())),
            InputLaw::IidBernoulliHalf => {
                let bits: Vec<_> = protocol.inputs().into_iter().filter(|s| s.iter().all(|e| e.index() <= 1)).collect();
                if protocol.alphabet().len() < 2 {
                    return Err(Error::InputLaw("alphabet has no two symbols".into()));
                }
                Ok(pairs(bits))
            }
            InputLaw::Table { entries } => {
                let mut merged: std::collections::BTreeMap<(Vec<u64>, Vec<u64>), u64> = Default::default();
                for e in entries {
                    protocol.parse_input(PartyId::Alice, &e.x)?;
                    protocol.parse_input(PartyId::Bob, &e.y)?;
                    *merged.entry((e.x.clone(), e.y.clone())).or_insert(0) += e.weight;
                }
                let starts: Vec<Start> = merged
                    .into_iter()
                    .filter(|(_, w)| *w > 0)
                    .map(|((x, y), weight)| Start {
                        x: protocol.parse_input(PartyId::Alice, &x).expect("checked"),
                        y: protocol.parse_input(PartyId::Bob, &y).expect("checked"),
                        weight,
                    })
                    .collect();
                if starts.is_empty() {
                    return Err(Error::InputLaw("all weights are zero".into()));
                }
                Ok(starts)
            }
        }
    }
}

/// Controls shared by every analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub budget: u128,
    pub order: Order,
}

impl Default for Options {
    fn default() -> Self {
        Options { budget: DEFAULT_BUDGET, order: Order::Canonical }
    }
}

/// Where the effective input of a deviating party comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectiveInput {
    /// The protocol's extractor applied to the delivered payloads.
    Extractor,
    /// The input the deviation substitutes.
    Declared,
    /// The true input.
    Identity,
}

fn effective_input(protocol: &Protocol, deviation: &Deviation, party: PartyId) -> Option<EffectiveInput> {
    if protocol.extractor_slots(party).is_some() {
        Some(EffectiveInput::Extractor)
    } else if deviation.target() == Some(party) && deviation.declared_input().is_some() {
        Some(EffectiveInput::Declared)
    } else if deviation.target() != Some(party) {
        Some(EffectiveInput::Identity)
    } else {
        None
    }
}

/// Exact joint distribution of `vars` over all inputs and joint tapes.
///
/// Counts are the input weight times the number of joint tapes leading to
/// each atom. The budget bounds the number of such (input, tape) atoms.
pub fn build_joint(
    protocol: &Protocol,
    deviation: &Deviation,
    law: &InputLaw,
    vars: &[Var],
    options: &Options,
) -> Result<JointDistribution> {
    let mut dist = JointDistribution::new(vars.to_vec())?;
    let starts = law.starts(protocol)?;
    let programs = deviation.programs(protocol);
    let required = required_atoms(&programs, &starts);
    if required > options.budget {
        return Err(EngineError::BudgetExceeded { required, budget: options.budget }.into());
    }

    let mut observe = Observe::default();
    for (var, party) in [(Var::M1, PartyId::Alice), (Var::M2, PartyId::Bob), (Var::M3, PartyId::Charlie)] {
        observe.views[party.index()] = vars.contains(&var);
    }
    let mut extract_from: [Option<(EffectiveInput, std::ops::Range<usize>)>; 2] = [None, None];
    for (var, party) in [(Var::Xbar, PartyId::Alice), (Var::Ybar, PartyId::Bob)] {
        if !vars.contains(&var) {
            continue;
        }
        let source =
            effective_input(protocol, deviation, party).ok_or(Error::NoExtractor { party, protocol: protocol.id() })?;
        let mut range = 0..0;
        if source == EffectiveInput::Extractor {
            let slots = protocol.extractor_slots(party).expect("extractor");
            range = observe.capture.len()..observe.capture.len() + slots.len();
            observe.capture.extend(slots);
        }
        extract_from[party.index()] = Some((source, range));
    }

    let outcomes = explore(protocol.schedule(), &programs, &starts, &observe, options.order);
    for (outcome, count) in outcomes {
        let start = &starts[outcome.start];
        let effective = |party: PartyId| -> Value {
            let (source, range) = extract_from[party.index()].as_ref().expect("tracked");
            let own = if party == PartyId::Alice { &start.x } else { &start.y };
            match source {
                EffectiveInput::Extractor => {
                    Value::seq(&protocol.extract(party, &outcome.captured[range.clone()]).expect("extractor"))
                }
                EffectiveInput::Declared => Value::seq(deviation.declared_input().expect("declared")),
                EffectiveInput::Identity => Value::seq(own),
            }
        };
        let values = vars
            .iter()
            .map(|var| match var {
                Var::X => Value::seq(&start.x),
                Var::Y => Value::seq(&start.y),
                Var::U => Value::output(&outcome.outputs[0]),
                Var::V => Value::output(&outcome.outputs[1]),
                Var::W => Value::output(&outcome.outputs[2]),
                Var::M1 => Value::view(outcome.views[0].as_ref().expect("observed")),
                Var::M2 => Value::view(outcome.views[1].as_ref().expect("observed")),
                Var::M3 => Value::view(outcome.views[2].as_ref().expect("observed")),
                Var::Xbar => effective(PartyId::Alice),
                Var::Ybar => effective(PartyId::Bob),
                Var::F => Value::Int(protocol.evaluate(&start.x, &start.y)),
            })
            .collect();
        dist.add(values, count);
    }
    Ok(dist)
}

/// The function evaluated on input values as stored in atoms.
pub(crate) fn evaluate_values(protocol: &Protocol, x: &Value, y: &Value) -> Option<u64> {
    let decode = |v: &Value| -> Option<Vec<_>> {
        let Value::Words(w) = v else { return None };
        w.iter().map(|&i| protocol.field().element(i).ok()).collect()
    };
    Some(protocol.evaluate(&decode(x)?, &decode(y)?))
}
