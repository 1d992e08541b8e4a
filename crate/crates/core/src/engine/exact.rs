//! Exact outcome distributions over all inputs and tapes.
//!
//! [`explore`] walks the schedule round by round. For every reachable
//! configuration it expands each party's tape chunk for the round, delivers
//! the sanitized messages, lets every party receive, and merges configurations
//! that became identical. Merging is exact because programs are deterministic:
//! the future of a run depends only on the current configuration and on the
//! tape symbols not consumed yet. Counts are integers throughout.
//!
//! [`explore_exhaustive`] computes the same counts by calling [`run`] once per
//! input and joint tape. It is the reference the merged walk is tested
//! against, and is practical only for small tape spaces.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::rc::Rc;

use super::{
    enumerate_tapes, party_inputs, run, EngineError, Inbox, LocalState, Message, PartyId, PartyOutput, Programs,
    Received, Schedule, View,
};
use crate::field::FieldElement;

/// One input pair with its integer weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Start {
    pub x: Vec<FieldElement>,
    pub y: Vec<FieldElement>,
    pub weight: u64,
}

/// What to keep from each execution besides the outputs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Observe {
    /// Keep the full view of these parties.
    pub views: [bool; 3],
    /// Keep the sanitized messages delivered on these slots.
    pub capture: Vec<usize>,
}

/// The observable result of a class of executions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Outcome {
    /// Index into the `starts` slice.
    pub start: usize,
    pub outputs: [PartyOutput; 3],
    pub views: [Option<View>; 3],
    /// Messages on the observed slots, in the order of [`Observe::capture`].
    pub captured: Vec<Message>,
}

/// Order in which inputs and tapes are visited. Results never depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    Canonical,
    Shuffled(u64),
}

impl Order {
    fn arrange<T>(&self, items: &mut [T], salt: u64) {
        if let Order::Shuffled(seed) = self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(salt.wrapping_mul(0x9E37_79B9)));
            items.shuffle(&mut rng);
        }
    }
}

/// Dense ids for values seen during a walk.
struct Interner<T> {
    items: Vec<T>,
    ids: FxHashMap<T, u32>,
}

impl<T: Clone + Eq + std::hash::Hash> Interner<T> {
    fn new() -> Self {
        Interner { items: Vec::new(), ids: FxHashMap::default() }
    }

    fn id(&mut self, item: T) -> u32 {
        if let Some(&id) = self.ids.get(&item) {
            return id;
        }
        let id = self.items.len() as u32;
        self.items.push(item.clone());
        self.ids.insert(item, id);
        id
    }

    fn get(&self, id: u32) -> &T {
        &self.items[id as usize]
    }
}

const UNKNOWN: u32 = u32::MAX;
const MAX_TABLE_CELLS: usize = 1 << 24;

/// Dense three-way table that grows as new ids show up. Gives up (returns
/// `None`) instead of growing past [`MAX_TABLE_CELLS`].
struct Table {
    dims: [usize; 3],
    cells: Vec<u32>,
}

impl Table {
    fn new() -> Self {
        Table { dims: [0; 3], cells: Vec::new() }
    }

    #[inline]
    fn get(&self, [a, b, c]: [u32; 3]) -> u32 {
        let [_, db, dc] = self.dims;
        let (a, b, c) = (a as usize, b as usize, c as usize);
        if a < self.dims[0] && b < db && c < dc {
            self.cells[(a * db + b) * dc + c]
        } else {
            UNKNOWN
        }
    }

    fn set(&mut self, key: [u32; 3], value: u32) -> Option<()> {
        let need: [usize; 3] = std::array::from_fn(|i| key[i] as usize + 1);
        if need.iter().zip(&self.dims).any(|(n, d)| n > d) {
            let dims: [usize; 3] =
                std::array::from_fn(
                    |i| if need[i] > self.dims[i] { need[i].max(2 * self.dims[i]) } else { self.dims[i] },
                );
            let size = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))?;
            if size > MAX_TABLE_CELLS {
                return None;
            }
            let mut cells = vec![UNKNOWN; size];
            let [da, db, dc] = self.dims;
            for i in 0..da {
                for j in 0..db {
                    let from = (i * db + j) * dc;
                    let to = (i * dims[1] + j) * dims[2];
                    cells[to..to + dc].copy_from_slice(&self.cells[from..from + dc]);
                }
            }
            self.dims = dims;
            self.cells = cells;
        }
        let [_, db, dc] = self.dims;
        self.cells[(key[0] as usize * db + key[1] as usize) * dc + key[2] as usize] = value;
        Some(())
    }
}

// States are ids into `Walk::states`, captured messages ids into
// `Walk::messages`.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Config {
    states: [u32; 3],
    views: [Option<View>; 3],
    captured: Vec<Option<u32>>,
}

struct SendOutcome {
    state: u32,
    messages: Vec<u32>,
    chunk: Vec<u32>,
    mult: u64,
    /// For each recipient, the id of what this outcome contributes to its
    /// receive step: the sender's own state if it is the recipient, and the
    /// messages it sent to the recipient.
    parts: [u32; 3],
}

/// Sends by (round, state id).
type SendMemo = FxHashMap<(u32, u32), Rc<Vec<SendOutcome>>>;

/// What one sender contributes to one recipient.
type Part = SmallVec<[u32; 4]>;

/// Interned values and memoized steps, shared by every input of a walk.
/// Programs are deterministic, so a send depends only on the round and the
/// state, and a receive only on the round, the state and the inbox.
struct Walk<'a> {
    schedule: &'a Schedule,
    programs: &'a Programs,
    observe: &'a Observe,
    plan: RoundPlan,
    states: [Interner<LocalState>; 3],
    messages: Interner<Message>,
    sends: [SendMemo; 3],
    /// Per round, recipient and sender.
    parts: Vec<[[Interner<Part>; 3]; 3]>,
    /// Per round and recipient: post-receive state by the three part ids.
    receives: Vec<[Table; 3]>,
}

fn weigh(a: u64, b: u64) -> u64 {
    a.checked_mul(b).expect("outcome count overflows u64")
}

impl<'a> Walk<'a> {
    fn new(schedule: &'a Schedule, programs: &'a Programs, observe: &'a Observe, order: Order) -> Self {
        Walk {
            schedule,
            programs,
            observe,
            plan: RoundPlan::new(schedule, programs, observe, order),
            states: std::array::from_fn(|_| Interner::new()),
            messages: Interner::new(),
            sends: Default::default(),
            parts: (0..schedule.rounds)
                .map(|_| std::array::from_fn(|_| std::array::from_fn(|_| Interner::new())))
                .collect(),
            receives: (0..schedule.rounds).map(|_| std::array::from_fn(|_| Table::new())).collect(),
        }
    }

    /// Runs one party's `send` for every tape chunk of the round and merges
    /// chunks that lead to the same state and messages.
    fn sends(&mut self, party: usize, round: usize, state: u32) -> Rc<Vec<SendOutcome>> {
        if let Some(found) = self.sends[party].get(&(round as u32, state)) {
            return Rc::clone(found);
        }
        let schedule = self.schedule;
        let outbound = &self.plan.outbound[round][party];
        let keep_chunk = self.observe.views[party];
        let mut merged: FxHashMap<(u32, Vec<u32>, Vec<u32>), usize> = FxHashMap::default();
        let mut outcomes: Vec<SendOutcome> = Vec::new();
        for chunk in &self.plan.chunks[round][party] {
            let mut st = self.states[party].get(state).clone();
            let envelopes = self.programs[party].send(round, &mut st, chunk);
            let mut slots: Vec<Option<Message>> = vec![None; outbound.len()];
            for env in envelopes {
                let hit = outbound.iter().position(|&s| {
                    let slot = &schedule.slots[s];
                    slot.to == env.to && slot.label == env.label
                });
                if let Some(pos) = hit {
                    if slots[pos].is_none() {
                        slots[pos] = Some(env.message);
                    }
                }
            }
            let messages: Vec<u32> = slots
                .into_iter()
                .zip(outbound)
                .map(|(m, &s)| self.messages.id(schedule.sanitize(s, &m.unwrap_or(Message::Missing))))
                .collect();
            let st = self.states[party].id(st);
            let chunk = if keep_chunk { chunk.clone() } else { Vec::new() };
            let key = (st, messages, chunk);
            match merged.get(&key) {
                Some(&i) => outcomes[i].mult += 1,
                None => {
                    let parts = std::array::from_fn(|to| {
                        let mut part: SmallVec<[u32; 4]> = SmallVec::new();
                        if to == party {
                            part.push(st);
                        }
                        for &(from, pos) in &self.plan.sources[round][to] {
                            if from == party {
                                part.push(key.1[pos]);
                            }
                        }
                        self.parts[round][to][party].id(part)
                    });
                    outcomes.push(SendOutcome {
                        state: st,
                        messages: key.1.clone(),
                        chunk: key.2.clone(),
                        mult: 1,
                        parts,
                    });
                    merged.insert(key, outcomes.len() - 1);
                }
            }
        }
        let outcomes = Rc::new(outcomes);
        self.sends[party].insert((round as u32, state), Rc::clone(&outcomes));
        outcomes
    }

    fn receive(&mut self, party: usize, round: usize, outs: [&SendOutcome; 3]) -> u32 {
        let key = [outs[0].parts[party], outs[1].parts[party], outs[2].parts[party]];
        let known = self.receives[round][party].get(key);
        if known != UNKNOWN {
            return known;
        }
        let mut st = self.states[party].get(outs[party].state).clone();
        let mut inbox = Inbox::new();
        for (&slot, &(from, pos)) in self.plan.inbound[round][party].iter().zip(&self.plan.sources[round][party]) {
            inbox.push(self.schedule.slots[slot].label, self.messages.get(outs[from].messages[pos]));
        }
        self.programs[party].receive(round, &mut st, &inbox);
        let next = self.states[party].id(st);
        // A table that would grow too large just stops memoizing.
        let _ = self.receives[round][party].set(key, next);
        next
    }

    fn explore_start(&mut self, s: &Start) -> FxHashMap<Config, u64> {
        let schedule = self.schedule;
        let inputs = party_inputs(&s.x, &s.y);
        let initial = Config {
            states: std::array::from_fn(|p| self.states[p].id(self.programs[p].start(inputs[p]))),
            views: std::array::from_fn(|p| {
                self.observe.views[p].then(|| View { input: inputs[p].to_vec(), ..View::default() })
            }),
            captured: vec![None; self.observe.capture.len()],
        };
        let mut current: FxHashMap<Config, u64> = FxHashMap::default();
        current.insert(initial, s.weight);

        for round in 0..schedule.rounds {
            let mut next: FxHashMap<Config, u64> = FxHashMap::default();
            for (cfg, weight) in current {
                let sends: [Rc<Vec<SendOutcome>>; 3] = std::array::from_fn(|p| self.sends(p, round, cfg.states[p]));
                let mut scratch = cfg.clone();
                for a in sends[0].iter() {
                    for b in sends[1].iter() {
                        let wab = weigh(weigh(weight, a.mult), b.mult);
                        for c in sends[2].iter() {
                            let outs = [a, b, c];
                            for p in 0..3 {
                                if self.observe.views[p] {
                                    let mut view = cfg.views[p].clone().expect("observed");
                                    for (&slot, &(from, pos)) in
                                        self.plan.inbound[round][p].iter().zip(&self.plan.sources[round][p])
                                    {
                                        view.received.push(Received {
                                            round,
                                            label: schedule.slots[slot].label,
                                            message: self.messages.get(outs[from].messages[pos]).clone(),
                                        });
                                    }
                                    view.tape.extend_from_slice(&outs[p].chunk);
                                    scratch.views[p] = Some(view);
                                }
                                scratch.states[p] = self.receive(p, round, outs);
                            }
                            for &(ci, slot) in &self.plan.capture[round] {
                                let from = schedule.slots[slot].from.index();
                                scratch.captured[ci] = Some(outs[from].messages[self.plan.position[round][slot]]);
                            }
                            let w = weigh(wab, c.mult);
                            match next.get_mut(&scratch) {
                                Some(total) => *total += w,
                                None => {
                                    next.insert(scratch.clone(), w);
                                }
                            }
                        }
                    }
                }
            }
            current = next;
        }
        current
    }
}

/// Exact outcome counts, merging identical intermediate configurations.
///
/// The count of an outcome is the sum over inputs of the input weight times
/// the number of joint tapes producing it. Inputs are processed one at a
/// time; their counts only meet in the final merge.
pub fn explore(
    schedule: &Schedule,
    programs: &Programs,
    starts: &[Start],
    observe: &Observe,
    order: Order,
) -> Vec<(Outcome, u64)> {
    let mut walk = Walk::new(schedule, programs, observe, order);
    let mut start_order: Vec<usize> = (0..starts.len()).collect();
    order.arrange(&mut start_order, 0);

    let mut outcomes: FxHashMap<Outcome, u64> = FxHashMap::default();
    for &i in &start_order {
        let s = &starts[i];
        if s.weight == 0 {
            continue;
        }
        for (cfg, weight) in walk.explore_start(s) {
            let outputs = std::array::from_fn(|p| programs[p].finalize(walk.states[p].get(cfg.states[p])));
            let outcome = Outcome {
                start: i,
                outputs,
                views: cfg.views,
                captured: cfg
                    .captured
                    .into_iter()
                    .map(|m| walk.messages.get(m.expect("captured slot was delivered")).clone())
                    .collect(),
            };
            *outcomes.entry(outcome).or_insert(0) += weight;
        }
    }
    outcomes.into_iter().collect()
}

/// Per-round slot bookkeeping shared by every input.
struct RoundPlan {
    outbound: Vec<[Vec<usize>; 3]>,
    inbound: Vec<[Vec<usize>; 3]>,
    /// Position of each slot in its sender's outbound list, per round.
    position: Vec<Vec<usize>>,
    capture: Vec<Vec<(usize, usize)>>,
    /// Sender and outbound position of each inbound slot, per round and party.
    sources: Vec<[Vec<(usize, usize)>; 3]>,
    chunks: Vec<[Vec<Vec<u32>>; 3]>,
}

impl RoundPlan {
    fn new(schedule: &Schedule, programs: &Programs, observe: &Observe, order: Order) -> Self {
        let spaces: Vec<_> = programs.iter().map(|p| p.tape_space()).collect();
        let mut plan = RoundPlan {
            outbound: Vec::new(),
            inbound: Vec::new(),
            position: Vec::new(),
            capture: Vec::new(),
            sources: Vec::new(),
            chunks: Vec::new(),
        };
        for round in 0..schedule.rounds {
            let outbound: [Vec<usize>; 3] =
                std::array::from_fn(|p| schedule.outbound(round, PartyId::ALL[p]).collect());
            let mut position = vec![usize::MAX; schedule.slots.len()];
            for list in &outbound {
                for (pos, &slot) in list.iter().enumerate() {
                    position[slot] = pos;
                }
            }
            let inbound: [Vec<usize>; 3] = std::array::from_fn(|p| schedule.inbound(round, PartyId::ALL[p]).collect());
            plan.sources.push(std::array::from_fn(|p| {
                inbound[p].iter().map(|&s| (schedule.slots[s].from.index(), position[s])).collect()
            }));
            plan.inbound.push(inbound);
            plan.outbound.push(outbound);
            plan.position.push(position);
            plan.capture.push(
                observe
                    .capture
                    .iter()
                    .enumerate()
                    .filter(|(_, &s)| schedule.slots[s].round == round)
                    .map(|(ci, &s)| (ci, s))
                    .collect(),
            );
            plan.chunks.push(std::array::from_fn(|p| {
                let mut c: Vec<Vec<u32>> = spaces[p].chunks(round).collect();
                order.arrange(&mut c, (round * 3 + p + 1) as u64);
                c
            }));
        }
        plan
    }
}

/// Number of single runs an exhaustive enumeration performs.
pub fn required_atoms(programs: &Programs, starts: &[Start]) -> u128 {
    let tapes: u128 = programs.iter().map(|p| p.tape_space().size()).product();
    starts.iter().filter(|s| s.weight > 0).count() as u128 * tapes
}

/// Same counts as [`explore`], by one [`run`] per input and joint tape.
pub fn explore_exhaustive(
    schedule: &Schedule,
    programs: &Programs,
    starts: &[Start],
    observe: &Observe,
    order: Order,
    budget: u128,
) -> Result<Vec<(Outcome, u64)>, EngineError> {
    let required = required_atoms(programs, starts);
    if required > budget {
        return Err(EngineError::BudgetExceeded { required, budget });
    }
    let mut tapes: Vec<[Vec<u32>; 3]> = enumerate_tapes(programs, budget)?.collect();
    order.arrange(&mut tapes, 1);
    let mut start_order: Vec<usize> = (0..starts.len()).collect();
    order.arrange(&mut start_order, 0);

    let mut outcomes: FxHashMap<Outcome, u64> = FxHashMap::default();
    for &i in &start_order {
        let s = &starts[i];
        if s.weight == 0 {
            continue;
        }
        for tape in &tapes {
            let record = run(schedule, programs, &s.x, &s.y, tape)?;
            let captured = observe
                .capture
                .iter()
                .map(|&slot| {
                    let sl = &schedule.slots[slot];
                    record.rounds[sl.round]
                        .deliveries
                        .iter()
                        .find(|d| d.from == sl.from && d.to == sl.to && d.label == sl.label)
                        .map(|d| d.delivered.clone())
                        .expect("every scheduled slot is delivered")
                })
                .collect();
            let views = std::array::from_fn(|p| observe.views[p].then(|| record.views[p].clone()));
            let outcome = Outcome { start: i, outputs: record.outputs, views, captured };
            *outcomes.entry(outcome).or_insert(0) += s.weight;
        }
    }
    Ok(outcomes.into_iter().collect())
}
