//! Masked Hamming distance between two field sequences.
//!
//! Alice draws a uniform mask `R`, uniform nonzero scalars `Z` and a uniform
//! permutation `π`, hands all three to Bob and sends `A = π(Z ⊗ (X ⊖ R))` to
//! Charlie. Bob sends `B = π(Z ⊗ (R ⊖ Y))`. Charlie outputs the Hamming weight
//! of `A ⊕ B = π(Z ⊗ (X ⊖ Y))`, which is the number of positions where `X` and
//! `Y` differ. Alice and Bob output nothing.

use std::sync::Arc;

use crate::engine::{
    Envelope, Inbox, LocalState, Message, MessageKind, PartyId, PartyOutput, PartyProgram, Permutation, Programs,
    Schedule, Seq, Slot, TapeSpace,
};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement};

pub const MASK: &str = "R";
pub const SCALARS: &str = "Z";
pub const PERMUTATION: &str = "pi";
pub const ALICE_TO_CHARLIE: &str = "A";
pub const BOB_TO_CHARLIE: &str = "B";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HamDistParams {
    pub n: usize,
    pub field: Field,
    /// Negative-control variant: Alice always uses the identity permutation.
    pub identity_permutation: bool,
}

impl HamDistParams {
    pub fn new(n: usize, field: Field) -> Result<Self> {
        if n == 0 {
            return Err(Error::Params("sequence length must be at least 1".into()));
        }
        if n > 8 {
            // Lehmer digits and the enumeration budget both assume short sequences.
            return Err(Error::Params(format!("sequence length {n} exceeds the supported 8")));
        }
        Ok(HamDistParams { n, field, identity_permutation: false })
    }

    pub fn with_identity_permutation(mut self) -> Self {
        self.identity_permutation = true;
        self
    }

    pub fn schedule(&self) -> Schedule {
        let slot = |round, from, to, label, kind| Slot { round, from, to, label, kind };
        use PartyId::*;
        Schedule {
            n: self.n,
            field: self.field,
            rounds: 2,
            slots: vec![
                slot(0, Alice, Bob, MASK, MessageKind::Sequence),
                slot(0, Alice, Bob, SCALARS, MessageKind::NonzeroSequence),
                slot(0, Alice, Bob, PERMUTATION, MessageKind::Permutation),
                slot(0, Alice, Charlie, ALICE_TO_CHARLIE, MessageKind::Sequence),
                slot(1, Bob, Charlie, BOB_TO_CHARLIE, MessageKind::Sequence),
            ],
        }
    }

    /// Alice's randomness: `R` (n uniform elements), `Z` (n uniform nonzero
    /// elements) and the Lehmer digits of `π`, all drawn in round 0.
    pub fn alice_tape_space(&self) -> TapeSpace {
        let q = self.field.order();
        let mut radices: Vec<u32> = vec![q; self.n];
        radices.extend(std::iter::repeat_n(q - 1, self.n));
        if !self.identity_permutation {
            radices.extend((1..=self.n as u32).rev());
        }
        TapeSpace::deterministic().with_round(0, radices)
    }

    /// Decodes Alice's round-0 tape into `(R, Z, π)`.
    pub fn decode_tape(&self, tape: &[u32]) -> (Seq, Seq, Permutation) {
        let n = self.n;
        let f = self.field;
        let r = tape[..n].iter().map(|&s| elem(f, s)).collect();
        let z = tape[n..2 * n].iter().map(|&s| elem(f, s + 1)).collect();
        let pi = if self.identity_permutation {
            Permutation::identity(n)
        } else {
            Permutation::from_lehmer(&tape[2 * n..3 * n])
        };
        (r, z, pi)
    }

    pub fn honest_programs(&self) -> Programs {
        [
            Arc::new(HonestAlice { params: self.clone() }),
            Arc::new(HonestBob { params: self.clone() }),
            Arc::new(HonestCharlie { params: self.clone() }),
        ]
    }
}

fn elem(f: Field, idx: u32) -> FieldElement {
    f.element(idx as u64).expect("index within field")
}

fn decode(f: Field, words: &[u32]) -> Seq {
    words.iter().map(|&w| elem(f, w)).collect()
}

fn encode(seq: &[FieldElement]) -> impl Iterator<Item = u32> + '_ {
    seq.iter().map(FieldElement::index)
}

/// `A = π(Z ⊗ (X ⊖ R))`.
pub fn alice_round(x: &[FieldElement], r: &[FieldElement], z: &[FieldElement], pi: &Permutation) -> Seq {
    let masked: Seq = x.iter().zip(r).zip(z).map(|((&xi, &ri), &zi)| zi * (xi - ri)).collect();
    pi.apply(&masked)
}

/// `B = π(Z ⊗ (R ⊖ Y))`.
pub fn bob_round(y: &[FieldElement], r: &[FieldElement], z: &[FieldElement], pi: &Permutation) -> Seq {
    let masked: Seq = r.iter().zip(y).zip(z).map(|((&ri, &yi), &zi)| zi * (ri - yi)).collect();
    pi.apply(&masked)
}

/// Hamming weight of `A ⊕ B`.
pub fn charlie_finalize(a: &[FieldElement], b: &[FieldElement]) -> u64 {
    a.iter().zip(b).filter(|(&ai, &bi)| !(ai + bi).is_zero()).count() as u64
}

/// Input Alice effectively committed to: `X̄ = R̄ ⊕ (π̄⁻¹(Ā) ⊘ Z̄)`.
pub fn extract_alice_input(r: &[FieldElement], z: &[FieldElement], pi: &Permutation, a: &[FieldElement]) -> Seq {
    let unpermuted = pi.apply_inverse(a);
    r.iter().zip(&unpermuted).zip(z).map(|((&ri, &ai), &zi)| ri + ai / zi).collect()
}

/// Input Bob effectively committed to: `Ȳ = R ⊖ (π⁻¹(B̄) ⊘ Z)`.
pub fn extract_bob_input(r: &[FieldElement], z: &[FieldElement], pi: &Permutation, b: &[FieldElement]) -> Seq {
    let unpermuted = pi.apply_inverse(b);
    r.iter().zip(&unpermuted).zip(z).map(|((&ri, &bi), &zi)| ri - bi / zi).collect()
}

/// Number of positions where the sequences differ.
pub fn hamming_distance(x: &[FieldElement], y: &[FieldElement]) -> u64 {
    x.iter().zip(y).filter(|(a, b)| a != b).count() as u64
}

#[derive(Debug)]
struct HonestAlice {
    params: HamDistParams,
}

impl PartyProgram for HonestAlice {
    fn name(&self) -> String {
        "hamdist/alice".into()
    }

    fn tape_space(&self) -> TapeSpace {
        self.params.alice_tape_space()
    }

    fn start(&self, input: &[FieldElement]) -> LocalState {
        encode(input).collect()
    }

    fn send(&self, round: usize, state: &mut LocalState, tape: &[u32]) -> Vec<Envelope> {
        if round != 0 {
            return Vec::new();
        }
        let x = decode(self.params.field, state);
        let (r, z, pi) = self.params.decode_tape(tape);
        let a = alice_round(&x, &r, &z, &pi);
        state.clear();
        vec![
            Envelope::new(PartyId::Bob, MASK, Message::Sequence(r)),
            Envelope::new(PartyId::Bob, SCALARS, Message::Sequence(z)),
            Envelope::new(PartyId::Bob, PERMUTATION, Message::Permutation(pi)),
            Envelope::new(PartyId::Charlie, ALICE_TO_CHARLIE, Message::Sequence(a)),
        ]
    }

    fn receive(&self, _round: usize, _state: &mut LocalState, _inbox: &Inbox<'_>) {}

    fn finalize(&self, _state: &LocalState) -> PartyOutput {
        PartyOutput::Null
    }
}

#[derive(Debug)]
struct HonestBob {
    params: HamDistParams,
}

impl PartyProgram for HonestBob {
    fn name(&self) -> String {
        "hamdist/bob".into()
    }

    fn tape_space(&self) -> TapeSpace {
        TapeSpace::deterministic()
    }

    fn start(&self, input: &[FieldElement]) -> LocalState {
        encode(input).collect()
    }

    fn send(&self, round: usize, state: &mut LocalState, _tape: &[u32]) -> Vec<Envelope> {
        if round != 1 {
            return Vec::new();
        }
        // State: y, R, Z, then the Lehmer digits of π.
        let n = self.params.n;
        let f = self.params.field;
        let y = decode(f, &state[..n]);
        let r = decode(f, &state[n..2 * n]);
        let z = decode(f, &state[2 * n..3 * n]);
        let pi = Permutation::from_lehmer(&state[3 * n..4 * n]);
        let b = bob_round(&y, &r, &z, &pi);
        state.clear();
        vec![Envelope::new(PartyId::Charlie, BOB_TO_CHARLIE, Message::Sequence(b))]
    }

    fn receive(&self, round: usize, state: &mut LocalState, inbox: &Inbox<'_>) {
        if round == 0 {
            state.extend(encode(inbox.sequence(MASK)));
            state.extend(encode(inbox.sequence(SCALARS)));
            state.extend(inbox.permutation(PERMUTATION).lehmer());
        }
    }

    fn finalize(&self, _state: &LocalState) -> PartyOutput {
        PartyOutput::Null
    }
}

#[derive(Debug)]
struct HonestCharlie {
    params: HamDistParams,
}

impl PartyProgram for HonestCharlie {
    fn name(&self) -> String {
        "hamdist/charlie".into()
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
        match round {
            0 => state.extend(encode(inbox.sequence(ALICE_TO_CHARLIE))),
            1 => {
                let a = decode(self.params.field, state);
                let w = charlie_finalize(&a, inbox.sequence(BOB_TO_CHARLIE));
                state.clear();
                state.push(w as u32);
            }
            _ => {}
        }
    }

    fn finalize(&self, state: &LocalState) -> PartyOutput {
        PartyOutput::Value(state[0] as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf3() -> Field {
        Field::prime(3).unwrap()
    }

    fn s(f: Field, v: &[u64]) -> Seq {
        v.iter().map(|&i| f.element(i).unwrap()).collect()
    }

    fn swap() -> Permutation {
        Permutation::new(vec![1, 0]).unwrap()
    }

    #[test]
    fn alice_round_examples() {
        let f = gf3();
        let a = alice_round(&s(f, &[1, 2]), &s(f, &[0, 0]), &s(f, &[1, 1]), &Permutation::identity(2));
        assert_eq!(a, s(f, &[1, 2]));
        // 2·(1−2) = 1 and 2·(2−1) = 2, swapped.
        let a = alice_round(&s(f, &[1, 2]), &s(f, &[2, 1]), &s(f, &[2, 2]), &swap());
        assert_eq!(a, s(f, &[2, 1]));
        let x = s(f, &[2, 1]);
        assert_eq!(alice_round(&x, &x, &s(f, &[2, 1]), &swap()), s(f, &[0, 0]));
    }

    #[test]
    fn bob_round_examples() {
        let f = gf3();
        let r = s(f, &[2, 1]);
        assert_eq!(bob_round(&r, &r, &s(f, &[2, 2]), &swap()), s(f, &[0, 0]));
        // 2·(2−0) = 1 and 2·(1−2) = 1, swapped.
        assert_eq!(bob_round(&s(f, &[0, 2]), &r, &s(f, &[2, 2]), &swap()), s(f, &[1, 1]));
        let ones = s(f, &[1, 1]);
        let y = s(f, &[1, 0]);
        let expect = swap().apply(&[r[0] - y[0], r[1] - y[1]]);
        assert_eq!(bob_round(&y, &r, &ones, &swap()), expect);
    }

    #[test]
    fn charlie_examples() {
        let f2 = Field::prime(2).unwrap();
        assert_eq!(charlie_finalize(&s(f2, &[1, 1]), &s(f2, &[1, 1])), 0);
        let f = gf3();
        assert_eq!(charlie_finalize(&s(f, &[1, 0]), &s(f, &[2, 0])), 0);
        assert_eq!(charlie_finalize(&s(f, &[1, 0]), &s(f, &[1, 0])), 1);
    }

    #[test]
    fn extractor_examples() {
        let f = gf3();
        let r = s(f, &[2, 1]);
        let z = s(f, &[2, 2]);
        assert_eq!(extract_alice_input(&r, &z, &swap(), &s(f, &[2, 1])), s(f, &[1, 2]));
        assert_eq!(extract_alice_input(&r, &z, &swap(), &s(f, &[0, 0])), r);
        assert_eq!(extract_bob_input(&r, &z, &swap(), &s(f, &[1, 1])), s(f, &[0, 2]));
        assert_eq!(extract_bob_input(&r, &z, &swap(), &s(f, &[0, 0])), r);
    }

    #[test]
    fn extractors_invert_honest_rounds() {
        for order in [2, 3, 4, 5] {
            let f = Field::of_order(order).unwrap();
            let p = HamDistParams::new(2, f).unwrap();
            for tape in p.alice_tape_space().tapes() {
                let (r, z, pi) = p.decode_tape(&tape);
                for x0 in f.elements() {
                    for x1 in f.elements() {
                        let x = [x0, x1];
                        let a = alice_round(&x, &r, &z, &pi);
                        assert_eq!(extract_alice_input(&r, &z, &pi, &a).as_slice(), &x);
                        let b = bob_round(&x, &r, &z, &pi);
                        assert_eq!(extract_bob_input(&r, &z, &pi, &b).as_slice(), &x);
                    }
                }
            }
        }
    }

    #[test]
    fn tape_space_counts() {
        let p = HamDistParams::new(2, gf3()).unwrap();
        assert_eq!(p.alice_tape_space().size(), 72);
        assert_eq!(p.clone().with_identity_permutation().alice_tape_space().size(), 36);
        let p3 = HamDistParams::new(3, Field::of_order(4).unwrap()).unwrap();
        assert_eq!(p3.alice_tape_space().size(), 64 * 27 * 6);
    }

    #[test]
    fn decoded_tapes_are_uniform_over_randomness() {
        // Every (R, Z, π) with nonzero Z appears exactly once.
        let f = gf3();
        let p = HamDistParams::new(2, f).unwrap();
        let mut seen = std::collections::HashSet::new();
        for tape in p.alice_tape_space().tapes() {
            let (r, z, pi) = p.decode_tape(&tape);
            assert!(z.iter().all(|e| !e.is_zero()));
            assert!(seen.insert((r, z, pi)));
        }
        assert_eq!(seen.len(), 72);
    }

    #[test]
    fn rejects_empty_sequences() {
        assert!(HamDistParams::new(0, gf3()).is_err());
    }
}
