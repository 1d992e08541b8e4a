//! Admissible deviations: one party's program replaced, the others untouched.
//!
//! Every deviation is built from the target's honest program by a wrapper
//! that can substitute the input, rewrite or omit scheduled payloads, draw
//! extra uniform symbols from an enlarged tape, and output what it saw.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bgw;
use crate::engine::{
    Envelope, Inbox, LocalState, Message, MessageKind, PartyId, PartyOutput, PartyProgram, Permutation, Program,
    Programs, TapeSpace,
};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};
use crate::protocol::{Protocol, ProtocolKind};

/// How a tampered slot's payload is produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum TamperAction {
    /// Send nothing on the slot.
    Omit,
    /// Send a fixed payload.
    Replace { payload: Vec<u64> },
    /// Set one position of a sequence to zero.
    ZeroAt { position: usize },
    /// Look the honest payload up; unmatched payloads pass unchanged.
    Table { entries: Vec<TableEntry> },
    /// A fixed pseudo-random function of the honest payload.
    RandomTable { seed: u64 },
    /// A fresh uniform payload drawn from extra tape symbols.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub from: Vec<u64>,
    pub to: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRule")]
pub struct TamperRule {
    /// Label of one of the target's outbound slots.
    pub slot: String,
    #[serde(flatten)]
    pub action: TamperAction,
}

// `flatten` would ignore unknown keys, so rules are read flat and strictly.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRule {
    slot: String,
    action: String,
    payload: Option<Vec<u64>>,
    position: Option<usize>,
    entries: Option<Vec<TableEntry>>,
    seed: Option<u64>,
}

impl TryFrom<RawRule> for TamperRule {
    type Error = String;

    fn try_from(raw: RawRule) -> std::result::Result<Self, String> {
        let RawRule { slot, action, payload, position, entries, seed } = raw;
        let missing = |field: &str| format!("action `{action}` needs `{field}`");
        let action_value = match action.as_str() {
            "omit" => TamperAction::Omit,
            "uniform" => TamperAction::Uniform,
            "replace" => TamperAction::Replace { payload: payload.clone().ok_or_else(|| missing("payload"))? },
            "zero_at" => TamperAction::ZeroAt { position: position.ok_or_else(|| missing("position"))? },
            "table" => TamperAction::Table { entries: entries.clone().ok_or_else(|| missing("entries"))? },
            "random_table" => TamperAction::RandomTable { seed: seed.ok_or_else(|| missing("seed"))? },
            other => return Err(format!("unknown tamper action `{other}`")),
        };
        let used = match &action_value {
            TamperAction::Replace { .. } => "payload",
            TamperAction::ZeroAt { .. } => "position",
            TamperAction::Table { .. } => "entries",
            TamperAction::RandomTable { .. } => "seed",
            _ => "",
        };
        let given = [
            ("payload", payload.is_some()),
            ("position", position.is_some()),
            ("entries", entries.is_some()),
            ("seed", seed.is_some()),
        ];
        if let Some((field, _)) = given.iter().find(|(f, set)| *set && *f != used) {
            return Err(format!("action `{action}` takes no `{field}`"));
        }
        Ok(TamperRule { slot, action: action_value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    #[default]
    Honest,
    InputSubstitution,
    UniformFinalShare,
    MessageTamper,
    LeakView,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<u64>>,
    /// Output the true input alongside the substitution.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub leak_input: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<TamperRule>,
}

/// Deviation as written in scenario files.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<PartyId>,
    #[serde(default)]
    pub kind: DeviationKind,
    #[serde(default)]
    pub params: DeviationParams,
}

/// A protocol variant with at most one replaced party.
#[derive(Debug, Clone)]
pub struct Deviation {
    pub label: String,
    target: Option<(PartyId, Program)>,
    declared_input: Option<Vec<FieldElement>>,
}

impl Deviation {
    pub fn honest() -> Self {
        Deviation { label: "honest".into(), target: None, declared_input: None }
    }

    pub fn target(&self) -> Option<PartyId> {
        self.target.as_ref().map(|(p, _)| *p)
    }

    /// The effective input the deviation itself commits to, when it has one.
    pub fn declared_input(&self) -> Option<&[FieldElement]> {
        self.declared_input.as_deref()
    }

    /// Honest programs with the target's replaced.
    pub fn programs(&self, protocol: &Protocol) -> Programs {
        let mut programs = protocol.honest_programs();
        if let Some((party, program)) = &self.target {
            programs[party.index()] = program.clone();
        }
        programs
    }

    /// Runs the honest program on `input` instead of the true one.
    pub fn input_substitution(protocol: &Protocol, target: PartyId, input: &[u64], leak_input: bool) -> Result<Self> {
        if target == PartyId::Charlie {
            return Err(Error::Deviation("charlie has no input to substitute".into()));
        }
        let substitute = protocol.parse_input(target, input)?;
        let mut d = Deviant::new(protocol, target, Vec::new())?;
        d.substitute = Some(substitute.clone());
        if leak_input {
            d.leak = Leak::Input;
        }
        Ok(Deviation {
            label: format!("input_substitution({target}, {input:?})"),
            target: Some((target, Arc::new(d))),
            declared_input: Some(substitute),
        })
    }

    /// Honest shares, but a uniform value in place of the final share.
    pub fn uniform_final_share(protocol: &Protocol, target: PartyId) -> Result<Self> {
        let slot = match (protocol.kind(), target) {
            (ProtocolKind::Bgw(_), PartyId::Alice) => bgw::ALICE_R,
            (ProtocolKind::Bgw(_), PartyId::Bob) => bgw::BOB_R,
            (ProtocolKind::Bgw(_), PartyId::Charlie) => {
                return Err(Error::Deviation("charlie sends no final share".into()))
            }
            _ => {
                return Err(Error::ProtocolMismatch {
                    deviation: "uniform_final_share".into(),
                    protocol: protocol.id(),
                })
            }
        };
        let rule = TamperRule { slot: slot.into(), action: TamperAction::Uniform };
        let d = Deviant::new(protocol, target, vec![rule])?;
        Ok(Deviation {
            label: format!("uniform_final_share({target})"),
            target: Some((target, Arc::new(d))),
            declared_input: None,
        })
    }

    pub fn message_tamper(protocol: &Protocol, target: PartyId, rules: Vec<TamperRule>) -> Result<Self> {
        let summary: Vec<String> = rules.iter().map(|r| format!("{}:{}", r.slot, action_name(&r.action))).collect();
        let d = Deviant::new(protocol, target, rules)?;
        Ok(Deviation {
            label: format!("message_tamper({target}, {})", summary.join(",")),
            target: Some((target, Arc::new(d))),
            declared_input: None,
        })
    }

    /// Behaves honestly but outputs its input and every message it received.
    pub fn leak_view(protocol: &Protocol, target: PartyId) -> Result<Self> {
        let mut d = Deviant::new(protocol, target, Vec::new())?;
        d.leak = Leak::View;
        Ok(Deviation {
            label: format!("leak_view({target})"),
            target: Some((target, Arc::new(d))),
            declared_input: None,
        })
    }

    pub fn from_spec(protocol: &Protocol, spec: &DeviationSpec) -> Result<Self> {
        let target = || spec.target.ok_or_else(|| Error::Deviation(format!("{:?} needs a target", spec.kind)));
        match spec.kind {
            DeviationKind::Honest => {
                if spec.target.is_some() {
                    return Err(Error::Deviation("honest deviation takes no target".into()));
                }
                Ok(Deviation::honest())
            }
            DeviationKind::InputSubstitution => {
                let input = spec
                    .params
                    .input
                    .as_ref()
                    .ok_or_else(|| Error::Deviation("input_substitution needs params.input".into()))?;
                Deviation::input_substitution(protocol, target()?, input, spec.params.leak_input)
            }
            DeviationKind::UniformFinalShare => Deviation::uniform_final_share(protocol, target()?),
            DeviationKind::MessageTamper => Deviation::message_tamper(protocol, target()?, spec.params.rules.clone()),
            DeviationKind::LeakView => Deviation::leak_view(protocol, target()?),
        }
    }
}

fn action_name(a: &TamperAction) -> String {
    match a {
        TamperAction::Omit => "omit".into(),
        TamperAction::Replace { payload } => format!("replace{payload:?}"),
        TamperAction::ZeroAt { position } => format!("zero_at[{position}]"),
        TamperAction::Table { entries } => format!("table[{}]", entries.len()),
        TamperAction::RandomTable { seed } => format!("random_table[{seed}]"),
        TamperAction::Uniform => "uniform".into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leak {
    None,
    Input,
    View,
}

#[derive(Debug)]
struct CompiledRule {
    round: usize,
    to: PartyId,
    label: &'static str,
    kind: MessageKind,
    action: TamperAction,
}

#[derive(Debug)]
struct Deviant {
    inner: Program,
    party: PartyId,
    field: Field,
    n: usize,
    substitute: Option<Vec<FieldElement>>,
    leak: Leak,
    rules: Vec<CompiledRule>,
    inner_widths: Vec<usize>,
}

impl Deviant {
    fn new(protocol: &Protocol, party: PartyId, rules: Vec<TamperRule>) -> Result<Self> {
        let schedule = protocol.schedule();
        let field = schedule.field;
        let mut compiled: Vec<CompiledRule> = Vec::new();
        for rule in rules {
            let (_, slot) = schedule
                .slots
                .iter()
                .enumerate()
                .find(|(_, s)| s.from == party && s.label == rule.slot)
                .ok_or_else(|| Error::Deviation(format!("{party} sends nothing on slot `{}`", rule.slot)))?;
            if compiled.iter().any(|c| c.label == slot.label) {
                return Err(Error::Deviation(format!("slot `{}` tampered twice", slot.label)));
            }
            match &rule.action {
                TamperAction::Replace { payload } => {
                    payload_message(slot.kind, payload, field)?;
                }
                TamperAction::Table { entries } => {
                    for e in entries {
                        payload_message(slot.kind, &e.to, field)?;
                    }
                }
                TamperAction::ZeroAt { position } => {
                    if !matches!(slot.kind, MessageKind::Sequence | MessageKind::NonzeroSequence) {
                        return Err(Error::Deviation(format!("slot `{}` is not a sequence", slot.label)));
                    }
                    if *position >= schedule.n {
                        return Err(Error::Deviation(format!("position {position} out of range")));
                    }
                }
                _ => {}
            }
            compiled.push(CompiledRule {
                round: slot.round,
                to: slot.to,
                label: slot.label,
                kind: slot.kind,
                action: rule.action,
            });
        }
        let inner = protocol.honest_programs()[party.index()].clone();
        let space = inner.tape_space();
        let inner_widths = (0..space.round_count()).map(|r| space.round(r).len()).collect();
        Ok(Deviant {
            inner,
            inner_widths,
            party,
            field,
            n: schedule.n,
            substitute: None,
            leak: Leak::None,
            rules: compiled,
        })
    }

    fn extra_radices(&self, round: usize) -> Vec<u32> {
        let q = self.field.order();
        self.rules
            .iter()
            .filter(|r| r.round == round && r.action == TamperAction::Uniform)
            .flat_map(|r| match r.kind {
                MessageKind::Sequence => vec![q; self.n],
                MessageKind::NonzeroSequence => vec![q - 1; self.n],
                MessageKind::Permutation => (1..=self.n as u32).rev().collect(),
                MessageKind::Share => vec![q],
            })
            .collect()
    }

    fn element(&self, idx: u32) -> FieldElement {
        self.field.element(idx as u64).expect("index within field")
    }

    fn uniform_payload(&self, kind: MessageKind, symbols: &[u32]) -> Message {
        match kind {
            MessageKind::Sequence => Message::sequence(symbols.iter().map(|&s| self.element(s))),
            MessageKind::NonzeroSequence => Message::sequence(symbols.iter().map(|&s| self.element(s + 1))),
            MessageKind::Permutation => Message::Permutation(Permutation::from_lehmer(symbols)),
            MessageKind::Share => Message::Share(self.element(symbols[0])),
        }
    }

    fn random_payload(&self, kind: MessageKind, seed: u64, label: &str, honest: &Message) -> Message {
        let mut h = splitmix(seed);
        for b in label.bytes() {
            h = splitmix(h ^ b as u64);
        }
        for w in message_words(honest) {
            h = splitmix(h ^ w);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let q = self.field.order();
        match kind {
            MessageKind::Sequence | MessageKind::NonzeroSequence => {
                Message::sequence((0..self.n).map(|_| self.element(rng.gen_range(0..q))))
            }
            MessageKind::Permutation => {
                let digits: Vec<u32> = (1..=self.n as u32).rev().map(|r| rng.gen_range(0..r)).collect();
                Message::Permutation(Permutation::from_lehmer(&digits))
            }
            MessageKind::Share => Message::Share(self.element(rng.gen_range(0..q))),
        }
    }

    fn tamper(&self, rule: &CompiledRule, honest: Message, extra: &mut &[u32]) -> Option<Message> {
        match &rule.action {
            TamperAction::Omit => None,
            TamperAction::Replace { payload } => {
                Some(payload_message(rule.kind, payload, self.field).expect("validated"))
            }
            TamperAction::ZeroAt { position } => match honest {
                Message::Sequence(mut s) => {
                    s[*position] = self.field.zero();
                    Some(Message::Sequence(s))
                }
                other => Some(other),
            },
            TamperAction::Table { entries } => {
                let key = message_words(&honest);
                match entries.iter().find(|e| e.from == key) {
                    Some(e) => Some(payload_message(rule.kind, &e.to, self.field).expect("validated")),
                    None => Some(honest),
                }
            }
            TamperAction::RandomTable { seed } => Some(self.random_payload(rule.kind, *seed, rule.label, &honest)),
            TamperAction::Uniform => {
                let width = match rule.kind {
                    MessageKind::Share => 1,
                    _ => self.n,
                };
                let (mine, rest) = extra.split_at(width);
                *extra = rest;
                Some(self.uniform_payload(rule.kind, mine))
            }
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Integers describing a payload: element indices, permutation images, or
/// nothing for a missing message.
pub fn message_words(m: &Message) -> Vec<u64> {
    match m {
        Message::Sequence(s) => s.iter().map(|e| e.index() as u64).collect(),
        Message::Permutation(p) => p.images().map(|i| i as u64).collect(),
        Message::Share(e) => vec![e.index() as u64],
        Message::Missing => Vec::new(),
    }
}

/// Builds a payload of the slot's shape from integers. Sequences may have any
/// length and may contain zeros; receivers sanitize them.
pub fn payload_message(kind: MessageKind, payload: &[u64], field: Field) -> Result<Message> {
    let elems =
        || -> Result<Vec<FieldElement>> { payload.iter().map(|&v| field.element(v).map_err(Error::from)).collect() };
    Ok(match kind {
        MessageKind::Sequence | MessageKind::NonzeroSequence => Message::sequence(elems()?),
        MessageKind::Permutation => {
            Message::Permutation(Permutation::new(payload.iter().map(|&v| v as usize).collect())?)
        }
        MessageKind::Share => match elems()?.as_slice() {
            [e] => Message::Share(*e),
            _ => return Err(Error::Deviation(format!("share payload {payload:?} needs one value"))),
        },
    })
}

// State layout when leaking: [inner state length, inner state..., leaked
// words...]. Otherwise the inner state as is.
fn split_state(state: &LocalState) -> (LocalState, &[u32]) {
    let len = state[0] as usize;
    (LocalState::from_slice(&state[1..1 + len]), &state[1 + len..])
}

fn join_state(inner: &LocalState, leaked: &[u32]) -> LocalState {
    let mut s = LocalState::with_capacity(1 + inner.len() + leaked.len());
    s.push(inner.len() as u32);
    s.extend_from_slice(inner);
    s.extend_from_slice(leaked);
    s
}

/// Puts a new inner state in front of the leaked words already in `state`.
fn replace_inner(state: &mut LocalState, inner: &LocalState) {
    let old = state[0] as usize;
    state[0] = inner.len() as u32;
    if old == inner.len() {
        state[1..1 + old].copy_from_slice(inner);
    } else {
        state.drain(1..1 + old);
        state.insert_many(1, inner.iter().copied());
    }
}

impl PartyProgram for Deviant {
    fn name(&self) -> String {
        format!("deviant/{}/{}", self.party, self.inner.name())
    }

    fn tape_space(&self) -> TapeSpace {
        let inner = self.inner.tape_space();
        let rounds = self.rules.iter().map(|r| r.round + 1).max().unwrap_or(0);
        let mut space = TapeSpace::deterministic();
        for round in 0..rounds.max(inner.round_count()) {
            space = space.with_round(round, inner.round(round).iter().copied());
            space = space.with_round(round, self.extra_radices(round));
        }
        space
    }

    fn start(&self, input: &[FieldElement]) -> LocalState {
        let used = self.substitute.as_deref().unwrap_or(input);
        let inner = self.inner.start(used);
        match self.leak {
            Leak::None => inner,
            Leak::Input | Leak::View => {
                let leaked: Vec<u32> = input.iter().map(FieldElement::index).collect();
                join_state(&inner, &leaked)
            }
        }
    }

    fn send(&self, round: usize, state: &mut LocalState, tape: &[u32]) -> Vec<Envelope> {
        let k = self.inner_widths.get(round).copied().unwrap_or(0);
        let (inner_tape, mut extra) = tape.split_at(k);
        let mut envelopes = match self.leak {
            Leak::None => self.inner.send(round, state, inner_tape),
            _ => {
                let (mut inner, _) = split_state(state);
                let envelopes = self.inner.send(round, &mut inner, inner_tape);
                replace_inner(state, &inner);
                envelopes
            }
        };
        for rule in self.rules.iter().filter(|r| r.round == round) {
            let pos = envelopes.iter().position(|e| e.to == rule.to && e.label == rule.label);
            let honest = match pos {
                Some(i) => envelopes.remove(i).message,
                None => Message::Missing,
            };
            if let Some(message) = self.tamper(rule, honest, &mut extra) {
                envelopes.push(Envelope::new(rule.to, rule.label, message));
            }
        }
        envelopes
    }

    fn receive(&self, round: usize, state: &mut LocalState, inbox: &Inbox<'_>) {
        if self.leak == Leak::None {
            return self.inner.receive(round, state, inbox);
        }
        let (mut inner, _) = split_state(state);
        self.inner.receive(round, &mut inner, inbox);
        replace_inner(state, &inner);
        if self.leak == Leak::View {
            for (_, message) in inbox.iter() {
                let words = message_words(message);
                state.push(words.len() as u32);
                state.extend(words.iter().map(|&w| w as u32));
            }
        }
    }

    fn finalize(&self, state: &LocalState) -> PartyOutput {
        match self.leak {
            Leak::None => self.inner.finalize(state),
            Leak::Input | Leak::View => PartyOutput::Words(split_state(state).1.to_vec()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_parse_from_toml() {
        let spec: DeviationSpec = toml::from_str(
            r#"
            target = "alice"
            kind = "message_tamper"
            [[params.rules]]
            slot = "Z"
            action = "zero_at"
            position = 1
            [[params.rules]]
            slot = "A"
            action = "omit"
            "#,
        )
        .unwrap();
        assert_eq!(spec.target, Some(PartyId::Alice));
        assert_eq!(spec.params.rules[0].action, TamperAction::ZeroAt { position: 1 });
        assert_eq!(spec.params.rules[1].slot, "A");
        assert_eq!(spec.params.rules[1].action, TamperAction::Omit);
        let back: DeviationSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn unknown_rule_fields_are_rejected() {
        let bad = r#"
            kind = "message_tamper"
            [[params.rules]]
            slot = "Z"
            action = "omit"
            position = 1
        "#;
        assert!(toml::from_str::<DeviationSpec>(bad).is_err());
        assert!(toml::from_str::<DeviationSpec>("kind = \"honest\"\nmood = 1").is_err());
    }

    #[test]
    fn splitmix_is_a_fixed_function() {
        assert_eq!(splitmix(0), splitmix(0));
        assert_ne!(splitmix(0), splitmix(1));
    }
}
