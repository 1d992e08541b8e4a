use std::borrow::Cow;

use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use super::EngineError;
use crate::field::{Field, FieldElement};

pub type Seq = SmallVec<[FieldElement; 8]>;

/// A bijection on `{0, .., n-1}` stored by images: `images[i] = π(i)`.
///
/// Applying π to a sequence moves position `i` to position `π(i)`, so output
/// position `j` holds input position `π⁻¹(j)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(SmallVec<[u16; 8]>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, EngineError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &img in &images {
            if img >= n || std::mem::replace(&mut seen[img], true) {
                return Err(EngineError::InvalidPermutation(format!("{images:?} is not a bijection")));
            }
        }
        Ok(Permutation(images.into_iter().map(|i| i as u16).collect()))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u16).collect())
    }

    /// Decodes Lehmer digits `d_i ∈ [0, n - i)`: position `i` takes the
    /// `d_i`-th smallest image not used yet. All-zero digits give the identity.
    pub fn from_lehmer(digits: &[u32]) -> Self {
        let n = digits.len();
        let mut free: SmallVec<[u16; 8]> = (0..n as u16).collect();
        let images = digits.iter().map(|&d| free.remove(d as usize)).collect();
        Permutation(images)
    }

    /// Inverse of [`Permutation::from_lehmer`].
    pub fn lehmer(&self) -> Vec<u32> {
        let mut free: Vec<u16> = (0..self.len() as u16).collect();
        self.0
            .iter()
            .map(|img| {
                let pos = free.iter().position(|f| f == img).expect("bijection");
                free.remove(pos);
                pos as u32
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i as usize)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv: SmallVec<[u16; 8]> = SmallVec::from_elem(0, self.len());
        for (i, &img) in self.0.iter().enumerate() {
            inv[img as usize] = i as u16;
        }
        Permutation(inv)
    }

    pub fn apply<T: Copy>(&self, seq: &[T]) -> SmallVec<[T; 8]> {
        assert_eq!(seq.len(), self.len(), "permutation length mismatch");
        let mut out: SmallVec<[T; 8]> = seq.into();
        for (i, &img) in self.0.iter().enumerate() {
            out[img as usize] = seq[i];
        }
        out
    }

    pub fn apply_inverse<T: Copy>(&self, seq: &[T]) -> SmallVec<[T; 8]> {
        assert_eq!(seq.len(), self.len(), "permutation length mismatch");
        self.0.iter().map(|&img| seq[img as usize]).collect()
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Payload on a channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Message {
    Sequence(Seq),
    Permutation(Permutation),
    Share(FieldElement),
    Missing,
}

impl Message {
    pub fn sequence(items: impl IntoIterator<Item = FieldElement>) -> Self {
        Message::Sequence(items.into_iter().collect())
    }
}

/// What a scheduled slot expects to carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    /// `n` elements of the protocol field.
    Sequence,
    /// `n` nonzero elements of the protocol field.
    NonzeroSequence,
    /// A bijection on `n` positions.
    Permutation,
    /// One element of the protocol field.
    Share,
}

fn valid(kind: MessageKind, message: &Message, n: usize, field: Field) -> bool {
    let in_field = |e: &FieldElement| e.field() == field;
    match (kind, message) {
        (MessageKind::Sequence, Message::Sequence(s)) => s.len() == n && s.iter().all(in_field),
        (MessageKind::NonzeroSequence, Message::Sequence(s)) => {
            s.len() == n && s.iter().all(|e| in_field(e) && !e.is_zero())
        }
        (MessageKind::Permutation, Message::Permutation(p)) => p.len() == n,
        (MessageKind::Share, Message::Share(e)) => in_field(e),
        _ => false,
    }
}

fn default_message(kind: MessageKind, n: usize, field: Field) -> Message {
    match kind {
        MessageKind::Sequence | MessageKind::NonzeroSequence => Message::Sequence(SmallVec::from_elem(field.one(), n)),
        MessageKind::Permutation => Message::Permutation(Permutation::identity(n)),
        MessageKind::Share => Message::Share(field.zero()),
    }
}

/// Replaces invalid or missing payloads by the receiver's default.
///
/// Sequences of the wrong length or with foreign elements, and nonzero
/// sequences containing a zero, become the all-one sequence; a permutation of
/// the wrong size becomes the identity; a bad share becomes zero. Valid
/// payloads pass unchanged.
pub fn sanitize(kind: MessageKind, message: &Message, n: usize, field: Field) -> Message {
    sanitized(kind, message, n, field).into_owned()
}

/// Borrowing form of [`sanitize`].
pub fn sanitized(kind: MessageKind, message: &Message, n: usize, field: Field) -> Cow<'_, Message> {
    if valid(kind, message, n, field) {
        Cow::Borrowed(message)
    } else {
        Cow::Owned(default_message(kind, n, field))
    }
}
