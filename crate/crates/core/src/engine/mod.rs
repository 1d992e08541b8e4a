//! Deterministic three-party execution over pairwise channels.
//!
//! A protocol declares a fixed [`Schedule`] of message slots. Each party runs a
//! [`PartyProgram`]: a deterministic state machine driven by its input, an
//! explicit random tape and the messages delivered to it. Every delivery passes
//! through [`sanitize`], so receivers only ever see well-formed payloads.
//!
//! Two drivers share the same programs: [`run`] replays a single execution and
//! produces an [`ExecutionRecord`], while [`exact::explore`] pushes whole
//! tape spaces through the schedule and returns exact outcome counts.

pub mod exact;
mod message;
mod tape;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::field::{Field, FieldElement};

pub use message::{sanitize, sanitized, Message, MessageKind, Permutation, Seq};
pub use tape::{enumerate_tapes, TapeIter, TapeSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("tape for {party} does not match its tape space: {reason}")]
    TapeMismatch { party: PartyId, reason: String },
    #[error("enumeration needs {required} atoms but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("input for {party} has length {got}, expected {expected}")]
    InputLength { party: PartyId, got: usize, expected: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartyId {
    Alice,
    Bob,
    Charlie,
}

impl PartyId {
    pub const ALL: [PartyId; 3] = [PartyId::Alice, PartyId::Bob, PartyId::Charlie];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Output variable name of this party: U, V or W.
    pub fn output_name(self) -> &'static str {
        ["U", "V", "W"][self.index()]
    }

    /// View variable name of this party: M1, M2 or M3.
    pub fn view_name(self) -> &'static str {
        ["M1", "M2", "M3"][self.index()]
    }
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PartyId::Alice => "alice",
            PartyId::Bob => "bob",
            PartyId::Charlie => "charlie",
        })
    }
}

impl std::str::FromStr for PartyId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alice" => Ok(PartyId::Alice),
            "bob" => Ok(PartyId::Bob),
            "charlie" => Ok(PartyId::Charlie),
            other => Err(format!("unknown party `{other}`")),
        }
    }
}

/// One scheduled message: who sends what to whom in which round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub round: usize,
    pub from: PartyId,
    pub to: PartyId,
    pub label: &'static str,
    pub kind: MessageKind,
}

/// The fixed communication pattern of a protocol.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub n: usize,
    pub field: Field,
    pub rounds: usize,
    pub slots: Vec<Slot>,
}

impl Schedule {
    pub fn slot_index(&self, round: usize, from: PartyId, to: PartyId, label: &str) -> Option<usize> {
        self.slots.iter().position(|s| s.round == round && s.from == from && s.to == to && s.label == label)
    }

    pub fn slot_by_label(&self, label: &str) -> Option<(usize, &Slot)> {
        self.slots.iter().enumerate().find(|(_, s)| s.label == label)
    }

    /// Slots delivered to `party` in `round`, in schedule order.
    pub fn inbound(&self, round: usize, party: PartyId) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().enumerate().filter(move |(_, s)| s.round == round && s.to == party).map(|(i, _)| i)
    }

    /// Slots sent by `party` in `round`, in schedule order.
    pub fn outbound(&self, round: usize, party: PartyId) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().enumerate().filter(move |(_, s)| s.round == round && s.from == party).map(|(i, _)| i)
    }

    pub fn sanitize(&self, slot: usize, message: &Message) -> Message {
        sanitize(self.slots[slot].kind, message, self.n, self.field)
    }
}

/// A message as emitted by a program. The round is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub to: PartyId,
    pub label: &'static str,
    pub message: Message,
}

impl Envelope {
    pub fn new(to: PartyId, label: &'static str, message: Message) -> Self {
        Envelope { to, label, message }
    }
}

/// Messages delivered to one party in one round, already sanitized.
#[derive(Debug, Default)]
pub struct Inbox<'a> {
    entries: SmallVec<[(&'static str, &'a Message); 4]>,
}

impl<'a> Inbox<'a> {
    pub fn new() -> Self {
        Inbox { entries: SmallVec::new() }
    }

    pub fn push(&mut self, label: &'static str, message: &'a Message) {
        self.entries.push((label, message));
    }

    pub fn get(&self, label: &str) -> Option<&'a Message> {
        // Labels are usually the same static string; skip the byte compare then.
        self.entries.iter().find(|(l, _)| std::ptr::eq(*l, label) || *l == label).map(|(_, m)| *m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &'a Message)> + '_ {
        self.entries.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Payload of a sequence slot. Panics if the schedule has no such slot,
    /// which is a programming error: sanitized slots always carry their kind.
    pub fn sequence(&self, label: &str) -> &'a [FieldElement] {
        match self.get(label) {
            Some(Message::Sequence(s)) => s,
            other => panic!("inbox slot `{label}` is not a sequence: {other:?}"),
        }
    }

    pub fn permutation(&self, label: &str) -> &'a Permutation {
        match self.get(label) {
            Some(Message::Permutation(p)) => p,
            other => panic!("inbox slot `{label}` is not a permutation: {other:?}"),
        }
    }

    pub fn share(&self, label: &str) -> FieldElement {
        match self.get(label) {
            Some(Message::Share(v)) => *v,
            other => panic!("inbox slot `{label}` is not a share: {other:?}"),
        }
    }
}

/// Working memory of a program between steps. Programs encode field elements
/// by canonical index; the encoding is private to each program.
pub type LocalState = SmallVec<[u32; 16]>;

/// A party's final output.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum PartyOutput {
    /// The null output.
    #[default]
    Null,
    Value(u64),
    /// Arbitrary data a deviating party chose to output.
    Words(Vec<u32>),
}

impl PartyOutput {
    pub fn is_null(&self) -> bool {
        matches!(self, PartyOutput::Null)
    }
}

impl Serialize for PartyOutput {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PartyOutput::Null => s.serialize_none(),
            PartyOutput::Value(v) => s.serialize_u64(*v),
            PartyOutput::Words(w) => w.serialize(s),
        }
    }
}

/// A party's behaviour: a deterministic function of its input, its random
/// tape and the messages delivered to it.
///
/// Per round the engine calls `send` for every party, delivers the sanitized
/// messages, then calls `receive` for every party. `finalize` runs after the
/// last round. `send` receives exactly the tape symbols declared for that round
/// by [`TapeSpace`].
pub trait PartyProgram: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn tape_space(&self) -> TapeSpace;
    fn start(&self, input: &[FieldElement]) -> LocalState;
    fn send(&self, round: usize, state: &mut LocalState, tape: &[u32]) -> Vec<Envelope>;
    fn receive(&self, round: usize, state: &mut LocalState, inbox: &Inbox<'_>);
    fn finalize(&self, state: &LocalState) -> PartyOutput;
}

pub type Program = Arc<dyn PartyProgram>;

/// The three programs of one execution, indexed by [`PartyId::index`].
pub type Programs = [Program; 3];

/// A message a party received, as part of its view.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Received {
    pub round: usize,
    pub label: &'static str,
    pub message: Message,
}

/// Everything a party observes: its input, its tape and what it received.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct View {
    pub input: Vec<FieldElement>,
    pub tape: Vec<u32>,
    pub received: Vec<Received>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Delivery {
    pub from: PartyId,
    pub to: PartyId,
    pub label: &'static str,
    pub sent: Message,
    pub delivered: Message,
    pub defaulted: bool,
}

/// A message that matched no scheduled slot and was ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dropped {
    pub from: PartyId,
    pub to: PartyId,
    pub label: &'static str,
    pub message: Message,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RoundLog {
    pub round: usize,
    pub deliveries: Vec<Delivery>,
    pub dropped: Vec<Dropped>,
}

/// One complete execution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecutionRecord {
    pub x: Vec<FieldElement>,
    pub y: Vec<FieldElement>,
    pub tapes: [Vec<u32>; 3],
    pub rounds: Vec<RoundLog>,
    pub views: [View; 3],
    pub outputs: [PartyOutput; 3],
}

impl ExecutionRecord {
    pub fn output(&self, party: PartyId) -> &PartyOutput {
        &self.outputs[party.index()]
    }

    pub fn view(&self, party: PartyId) -> &View {
        &self.views[party.index()]
    }

    /// The sanitized message delivered on the slot with this label.
    pub fn delivered(&self, label: &str) -> Option<&Message> {
        self.rounds.iter().flat_map(|r| &r.deliveries).find(|d| d.label == label).map(|d| &d.delivered)
    }
}

pub(crate) fn party_inputs<'a>(x: &'a [FieldElement], y: &'a [FieldElement]) -> [&'a [FieldElement]; 3] {
    [x, y, &[]]
}

/// Executes one run of the schedule with explicit tapes.
///
/// Messages on channels or labels the schedule does not list are recorded as
/// dropped; scheduled slots left empty are delivered as [`Message::Missing`]
/// and therefore replaced by their default.
pub fn run(
    schedule: &Schedule,
    programs: &Programs,
    x: &[FieldElement],
    y: &[FieldElement],
    tapes: &[Vec<u32>; 3],
) -> Result<ExecutionRecord, EngineError> {
    for (party, input) in [(PartyId::Alice, x), (PartyId::Bob, y)] {
        if input.len() != schedule.n {
            return Err(EngineError::InputLength { party, got: input.len(), expected: schedule.n });
        }
    }
    let spaces: Vec<TapeSpace> = programs.iter().map(|p| p.tape_space()).collect();
    let mut chunks: Vec<Vec<&[u32]>> = Vec::with_capacity(3);
    for party in PartyId::ALL {
        let i = party.index();
        let split = spaces[i]
            .split(&tapes[i], schedule.rounds)
            .map_err(|reason| EngineError::TapeMismatch { party, reason })?;
        chunks.push(split);
    }

    let inputs = party_inputs(x, y);
    let mut states: Vec<LocalState> =
        PartyId::ALL.iter().map(|p| programs[p.index()].start(inputs[p.index()])).collect();
    let mut views: [View; 3] = Default::default();
    for party in PartyId::ALL {
        views[party.index()].input = inputs[party.index()].to_vec();
        views[party.index()].tape = tapes[party.index()].clone();
    }

    let mut rounds = Vec::with_capacity(schedule.rounds);
    for round in 0..schedule.rounds {
        let mut sent: Vec<Option<Message>> = vec![None; schedule.slots.len()];
        let mut dropped = Vec::new();
        for party in PartyId::ALL {
            let i = party.index();
            let envelopes = programs[i].send(round, &mut states[i], chunks[i][round]);
            for env in envelopes {
                match schedule.slot_index(round, party, env.to, env.label) {
                    Some(slot) if sent[slot].is_none() => sent[slot] = Some(env.message),
                    _ => dropped.push(Dropped { from: party, to: env.to, label: env.label, message: env.message }),
                }
            }
        }

        let mut deliveries = Vec::new();
        let mut delivered: Vec<Option<Message>> = vec![None; schedule.slots.len()];
        for (idx, slot) in schedule.slots.iter().enumerate().filter(|(_, s)| s.round == round) {
            let raw = sent[idx].take().unwrap_or(Message::Missing);
            let clean = schedule.sanitize(idx, &raw);
            deliveries.push(Delivery {
                from: slot.from,
                to: slot.to,
                label: slot.label,
                defaulted: clean != raw,
                sent: raw,
                delivered: clean.clone(),
            });
            delivered[idx] = Some(clean);
        }

        for party in PartyId::ALL {
            let i = party.index();
            let mut inbox = Inbox::new();
            for slot in schedule.inbound(round, party) {
                let msg = delivered[slot].as_ref().expect("delivered this round");
                inbox.push(schedule.slots[slot].label, msg);
                views[i].received.push(Received { round, label: schedule.slots[slot].label, message: msg.clone() });
            }
            programs[i].receive(round, &mut states[i], &inbox);
        }
        rounds.push(RoundLog { round, deliveries, dropped });
    }

    let outputs =
        [programs[0].finalize(&states[0]), programs[1].finalize(&states[1]), programs[2].finalize(&states[2])];
    Ok(ExecutionRecord { x: x.to_vec(), y: y.to_vec(), tapes: tapes.clone(), rounds, views, outputs })
}
