use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bgw::{self, BgwParams};
use crate::engine::{Message, PartyId, Permutation, Programs, Schedule};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElement, FieldSpec};
use crate::hamdist::{self, HamDistParams};

/// Protocol selection as written in scenario files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolSpec {
    Hamdist {
        n: usize,
        field: FieldSpec,
        /// Negative control: drop the permutation.
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        identity_permutation: bool,
    },
    Bgw {
        n: usize,
        s: u32,
        #[serde(rename = "N")]
        modulus: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        abscissas: Option<[u32; 3]>,
    },
}

#[derive(Debug, Clone)]
pub enum ProtocolKind {
    HamDist(HamDistParams),
    Bgw(BgwParams),
}

/// A protocol with its schedule and honest programs.
#[derive(Debug, Clone)]
pub struct Protocol {
    kind: ProtocolKind,
    schedule: Schedule,
    honest: Programs,
}

impl Protocol {
    pub fn hamdist(params: HamDistParams) -> Self {
        Protocol { schedule: params.schedule(), honest: params.honest_programs(), kind: ProtocolKind::HamDist(params) }
    }

    pub fn bgw(params: BgwParams) -> Self {
        Protocol { schedule: params.schedule(), honest: params.honest_programs(), kind: ProtocolKind::Bgw(params) }
    }

    pub fn from_spec(spec: &ProtocolSpec) -> Result<Self> {
        match spec {
            ProtocolSpec::Hamdist { n, field, identity_permutation } => {
                let mut params = HamDistParams::new(*n, Field::new(field.clone())?)?;
                if *identity_permutation {
                    params = params.with_identity_permutation();
                }
                Ok(Protocol::hamdist(params))
            }
            ProtocolSpec::Bgw { n, s, modulus, abscissas } => {
                Ok(Protocol::bgw(BgwParams::new(*n, *s, *modulus, *abscissas)?))
            }
        }
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            ProtocolKind::HamDist(_) => "hamdist",
            ProtocolKind::Bgw(_) => "bgw",
        }
    }

    pub fn kind(&self) -> &ProtocolKind {
        &self.kind
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn honest_programs(&self) -> Programs {
        self.honest.clone()
    }

    pub fn n(&self) -> usize {
        self.schedule.n
    }

    pub fn field(&self) -> Field {
        self.schedule.field
    }

    /// Values a single input position may take.
    pub fn alphabet(&self) -> Vec<FieldElement> {
        match &self.kind {
            ProtocolKind::HamDist(p) => p.field.elements(),
            ProtocolKind::Bgw(p) => (0..p.s as u64).map(|v| p.field.element(v).expect("s < N")).collect(),
        }
    }

    /// Every input sequence in lexicographic order of element indices.
    pub fn inputs(&self) -> Vec<Vec<FieldElement>> {
        let alphabet = self.alphabet();
        let mut all = vec![Vec::new()];
        for _ in 0..self.n() {
            all = all
                .into_iter()
                .flat_map(|prefix| {
                    alphabet.iter().map(move |&a| {
                        let mut next = prefix.clone();
                        next.push(a);
                        next
                    })
                })
                .collect();
        }
        all
    }

    /// Parses integers (element indices) into an input sequence.
    pub fn parse_input(&self, party: PartyId, values: &[u64]) -> Result<Vec<FieldElement>> {
        let alphabet = self.alphabet();
        let bad = || Error::InputAlphabet { party, input: values.to_vec() };
        if values.len() != self.n() {
            return Err(bad());
        }
        values.iter().map(|&v| alphabet.iter().copied().find(|a| a.index() as u64 == v).ok_or_else(bad)).collect()
    }

    /// The function the protocol computes.
    pub fn evaluate(&self, x: &[FieldElement], y: &[FieldElement]) -> u64 {
        match &self.kind {
            ProtocolKind::HamDist(_) => hamdist::hamming_distance(x, y),
            ProtocolKind::Bgw(_) => bgw::quadratic_distance(&indices(x), &indices(y)),
        }
    }

    /// Every value `f` can take on the input alphabet.
    pub fn output_range(&self) -> BTreeSet<u64> {
        match &self.kind {
            ProtocolKind::HamDist(p) => (0..=p.n as u64).collect(),
            ProtocolKind::Bgw(p) => bgw::output_range(p.n, p.s),
        }
    }

    /// Slots whose sanitized payloads determine the effective input of a
    /// deviating `party`, if the protocol has an extractor for it.
    pub fn extractor_slots(&self, party: PartyId) -> Option<Vec<usize>> {
        let ProtocolKind::HamDist(_) = self.kind else { return None };
        let last = match party {
            PartyId::Alice => hamdist::ALICE_TO_CHARLIE,
            PartyId::Bob => hamdist::BOB_TO_CHARLIE,
            PartyId::Charlie => return None,
        };
        let labels = [hamdist::MASK, hamdist::SCALARS, hamdist::PERMUTATION, last];
        Some(labels.iter().map(|l| self.schedule.slot_by_label(l).expect("scheduled").0).collect())
    }

    /// Applies the extractor to payloads captured on [`Protocol::extractor_slots`].
    pub fn extract(&self, party: PartyId, captured: &[Message]) -> Option<Vec<FieldElement>> {
        self.extractor_slots(party)?;
        let seq = |m: &Message| match m {
            Message::Sequence(s) => s.clone(),
            other => panic!("extractor slot carries {other:?}"),
        };
        let r = seq(&captured[0]);
        let z = seq(&captured[1]);
        let pi: Permutation = match &captured[2] {
            Message::Permutation(p) => p.clone(),
            other => panic!("extractor slot carries {other:?}"),
        };
        let last = seq(&captured[3]);
        let out = match party {
            PartyId::Alice => hamdist::extract_alice_input(&r, &z, &pi, &last),
            _ => hamdist::extract_bob_input(&r, &z, &pi, &last),
        };
        Some(out.to_vec())
    }
}

pub fn indices(seq: &[FieldElement]) -> Vec<u64> {
    seq.iter().map(|e| e.index() as u64).collect()
}
