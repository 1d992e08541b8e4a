//! Quadratic distance by degree-1 Shamir sharing over a prime field.
//!
//! Alice shares each `x_i` as `p_i(e) = α_i e + x_i`, Bob shares `y_i` as
//! `q_i(e) = β_i e + y_i`. Party `j` evaluates the degree-2 polynomial
//! `r(e) = Σ (p_i(e) − q_i(e))²` at its own abscissa; Charlie collects the three
//! values and interpolates `r(0) = Σ (x_i − y_i)²`. With `N > n(s−1)²` the
//! residue equals the integer distance.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::engine::{
    Envelope, Inbox, LocalState, Message, MessageKind, PartyId, PartyOutput, PartyProgram, Programs, Schedule, Seq,
    Slot, TapeSpace,
};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

pub const ALICE_TO_BOB: &str = "p(2)";
pub const ALICE_TO_CHARLIE: &str = "p(3)";
pub const BOB_TO_ALICE: &str = "q(1)";
pub const BOB_TO_CHARLIE: &str = "q(3)";
pub const ALICE_R: &str = "r(1)";
pub const BOB_R: &str = "r(2)";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BgwParams {
    pub n: usize,
    /// Inputs are drawn from `{0, .., s−1}`.
    pub s: u32,
    pub modulus: u32,
    pub field: Field,
    /// Evaluation points of Alice, Bob and Charlie.
    pub abscissas: [u32; 3],
}

impl BgwParams {
    pub fn new(n: usize, s: u32, modulus: u32, abscissas: Option<[u32; 3]>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Params("sequence length must be at least 1".into()));
        }
        if n > 8 {
            return Err(Error::Params(format!("sequence length {n} exceeds the supported 8")));
        }
        if s < 2 {
            return Err(Error::Params(format!("alphabet size {s} must be at least 2")));
        }
        let field = Field::prime(modulus)?;
        let bound = n as u64 * (s as u64 - 1).pow(2);
        if modulus as u64 <= bound {
            return Err(Error::Params(format!("modulus {modulus} must exceed n(s-1)^2 = {bound}")));
        }
        let abscissas = abscissas.unwrap_or([1, 2, 3]);
        let reduced: Vec<u32> = abscissas.iter().map(|&e| e % modulus).collect();
        if reduced.contains(&0) {
            return Err(Error::Params(format!("abscissas {abscissas:?} include a multiple of the modulus {modulus}")));
        }
        if reduced[0] == reduced[1] || reduced[0] == reduced[2] || reduced[1] == reduced[2] {
            return Err(Error::Params(format!("abscissas {abscissas:?} are not distinct modulo {modulus}")));
        }
        Ok(BgwParams { n, s, modulus, field, abscissas })
    }

    pub fn abscissa(&self, party: PartyId) -> FieldElement {
        self.field.from_int(self.abscissas[party.index()] as i64)
    }

    pub fn weights(&self) -> [FieldElement; 3] {
        lagrange_weights_at_zero(std::array::from_fn(|p| self.abscissa(PartyId::ALL[p])))
    }

    pub fn schedule(&self) -> Schedule {
        use PartyId::*;
        let slot = |round, from, to, label, kind| Slot { round, from, to, label, kind };
        Schedule {
            n: self.n,
            field: self.field,
            rounds: 2,
            slots: vec![
                slot(0, Alice, Bob, ALICE_TO_BOB, MessageKind::Sequence),
                slot(0, Alice, Charlie, ALICE_TO_CHARLIE, MessageKind::Sequence),
                slot(0, Bob, Alice, BOB_TO_ALICE, MessageKind::Sequence),
                slot(0, Bob, Charlie, BOB_TO_CHARLIE, MessageKind::Sequence),
                slot(1, Alice, Charlie, ALICE_R, MessageKind::Share),
                slot(1, Bob, Charlie, BOB_R, MessageKind::Share),
            ],
        }
    }

    /// One uniform slope per position, drawn in round 0.
    pub fn dealer_tape_space(&self) -> TapeSpace {
        TapeSpace::deterministic().with_round(0, vec![self.modulus; self.n])
    }

    pub fn honest_programs(&self) -> Programs {
        [
            Arc::new(Dealer { params: self.clone(), party: PartyId::Alice }),
            Arc::new(Dealer { params: self.clone(), party: PartyId::Bob }),
            Arc::new(Combiner { params: self.clone() }),
        ]
    }
}

/// `coeff · e + value`.
pub fn share(value: FieldElement, coeff: FieldElement, e: FieldElement) -> FieldElement {
    coeff * e + value
}

/// `Σ (p_i − q_i)²` over one party's shares.
pub fn local_r_share(p: &[FieldElement], q: &[FieldElement]) -> FieldElement {
    assert_eq!(p.len(), q.len(), "share lists differ in length");
    let field = p.first().or(q.first()).map(|e| e.field());
    p.iter()
        .zip(q)
        .map(|(&a, &b)| (a - b) * (a - b))
        .reduce(|acc, t| acc + t)
        .unwrap_or_else(|| field.map(|f| f.zero()).expect("empty share lists"))
}

// Same sum on residues. Elements of a prime field are indexed by residue.
fn r_share_residue(modulus: u32, p: impl Iterator<Item = u32>, q: impl Iterator<Item = u32>) -> u32 {
    let n = modulus as u64;
    let sum: u64 = p
        .zip(q)
        .map(|(a, b)| {
            let d = if a >= b { a - b } else { a + modulus - b } as u64;
            d * d
        })
        .sum();
    (sum % n) as u32
}

/// Lagrange basis values `L_j(0) = Π_{m≠j} e_m / (e_m − e_j)`.
pub fn lagrange_weights_at_zero(e: [FieldElement; 3]) -> [FieldElement; 3] {
    std::array::from_fn(|j| {
        let f = e[j].field();
        (0..3).filter(|&m| m != j).fold(f.one(), |acc, m| acc * e[m] / (e[m] - e[j]))
    })
}

pub fn interpolate_at_zero(r: [FieldElement; 3], weights: [FieldElement; 3]) -> FieldElement {
    r[0] * weights[0] + r[1] * weights[1] + r[2] * weights[2]
}

/// Interpolation at the default abscissas 1, 2, 3.
pub fn interpolate_r0(r1: FieldElement, r2: FieldElement, r3: FieldElement) -> FieldElement {
    let f = r1.field();
    let w = lagrange_weights_at_zero([f.from_int(1), f.from_int(2), f.from_int(3)]);
    interpolate_at_zero([r1, r2, r3], w)
}

/// `Σ (x_i − y_i)²` over the integers.
pub fn quadratic_distance(x: &[u64], y: &[u64]) -> u64 {
    x.iter().zip(y).map(|(&a, &b)| a.abs_diff(b).pow(2)).sum()
}

/// Every value the distance can take: `{Σ d_i² : |d_i| ≤ s−1}`.
pub fn output_range(n: usize, s: u32) -> BTreeSet<u64> {
    let squares: Vec<u64> = (0..s as u64).map(|d| d * d).collect();
    let mut sums = BTreeSet::from([0u64]);
    for _ in 0..n {
        sums = sums.iter().flat_map(|&t| squares.iter().map(move |&q| t + q)).collect();
    }
    sums
}

fn decode(f: Field, words: &[u32]) -> Seq {
    words.iter().map(|&w| f.element(w as u64).expect("index within field")).collect()
}

/// Alice or Bob: shares the input, then reports the local value of `r`.
#[derive(Debug)]
struct Dealer {
    params: BgwParams,
    party: PartyId,
}

impl Dealer {
    fn labels(&self) -> (&'static str, &'static str, &'static str, &'static str, PartyId) {
        match self.party {
            PartyId::Alice => (ALICE_TO_BOB, ALICE_TO_CHARLIE, BOB_TO_ALICE, ALICE_R, PartyId::Bob),
            _ => (BOB_TO_ALICE, BOB_TO_CHARLIE, ALICE_TO_BOB, BOB_R, PartyId::Alice),
        }
    }
}

impl PartyProgram for Dealer {
    fn name(&self) -> String {
        format!("bgw/{}", self.party)
    }

    fn tape_space(&self) -> TapeSpace {
        self.params.dealer_tape_space()
    }

    fn start(&self, input: &[FieldElement]) -> LocalState {
        input.iter().map(FieldElement::index).collect()
    }

    fn send(&self, round: usize, state: &mut LocalState, tape: &[u32]) -> Vec<Envelope> {
        let f = self.params.field;
        let (to_peer, to_charlie, _, r_label, peer) = self.labels();
        match round {
            0 => {
                let input = decode(f, state);
                let slopes = decode(f, tape);
                let at = |party: PartyId| -> Seq {
                    let e = self.params.abscissa(party);
                    input.iter().zip(&slopes).map(|(&v, &c)| share(v, c, e)).collect()
                };
                let own = at(self.party);
                let envelopes = vec![
                    Envelope::new(peer, to_peer, Message::Sequence(at(peer))),
                    Envelope::new(PartyId::Charlie, to_charlie, Message::Sequence(at(PartyId::Charlie))),
                ];
                *state = own.iter().map(FieldElement::index).collect();
                envelopes
            }
            1 => {
                let r = f.element(state[0] as u64).expect("index within field");
                state.clear();
                vec![Envelope::new(PartyId::Charlie, r_label, Message::Share(r))]
            }
            _ => Vec::new(),
        }
    }

    fn receive(&self, round: usize, state: &mut LocalState, inbox: &Inbox<'_>) {
        if round == 0 {
            let (_, _, from_peer, _, _) = self.labels();
            let peer = inbox.sequence(from_peer);
            assert_eq!(state.len(), peer.len(), "share lists differ in length");
            let r = r_share_residue(self.params.modulus, state.iter().copied(), peer.iter().map(FieldElement::index));
            state.clear();
            state.push(r);
        }
    }

    fn finalize(&self, _state: &LocalState) -> PartyOutput {
        PartyOutput::Null
    }
}

/// Charlie: computes `r(e₃)` from the round-0 shares and interpolates.
#[derive(Debug)]
struct Combiner {
    params: BgwParams,
}

impl PartyProgram for Combiner {
    fn name(&self) -> String {
        "bgw/charlie".into()
    }

    fn tape_space(&self) -> TapeSpace {
        TapeSpace::deterministic()
    }

    fn start(&self, _input: &[FieldElement]) -> LocalState {
        LocalState::new()
    }

    fn send(&self, _round: usize, _state: &mut LocalState, _tape: &[u32]) -> Vec<Envelope> {
        Vec::new()
    }

    fn receive(&self, round: usize, state: &mut LocalState, inbox: &Inbox<'_>) {
        let f = self.params.field;
        match round {
            0 => {
                let (p, q) = (inbox.sequence(ALICE_TO_CHARLIE), inbox.sequence(BOB_TO_CHARLIE));
                assert_eq!(p.len(), q.len(), "share lists differ in length");
                let r3 = r_share_residue(
                    self.params.modulus,
                    p.iter().map(FieldElement::index),
                    q.iter().map(FieldElement::index),
                );
                state.push(r3);
            }
            1 => {
                let r3 = f.element(state[0] as u64).expect("index within field");
                let r = [inbox.share(ALICE_R), inbox.share(BOB_R), r3];
                let w = interpolate_at_zero(r, self.params.weights());
                state.clear();
                state.push(w.index());
            }
            _ => {}
        }
    }

    fn finalize(&self, state: &LocalState) -> PartyOutput {
        PartyOutput::Value(state[0] as u64)
    }
}
