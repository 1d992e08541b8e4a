use rand::Rng;

use super::{EngineError, Programs};

/// The finite set a program's random tape is drawn from, uniformly.
///
/// A tape is a sequence of symbols; symbol `i` is uniform on `[0, radix_i)`.
/// Symbols are grouped by the round in which [`super::PartyProgram::send`]
/// consumes them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TapeSpace {
    rounds: Vec<Vec<u32>>,
}

impl TapeSpace {
    /// The single empty tape.
    pub fn deterministic() -> Self {
        TapeSpace::default()
    }

    pub fn new(rounds: Vec<Vec<u32>>) -> Self {
        assert!(rounds.iter().flatten().all(|&r| r >= 1), "tape radices must be positive");
        TapeSpace { rounds }
    }

    /// Appends symbols to the given round.
    pub fn with_round(mut self, round: usize, radices: impl IntoIterator<Item = u32>) -> Self {
        if self.rounds.len() <= round {
            self.rounds.resize(round + 1, Vec::new());
        }
        self.rounds[round].extend(radices);
        assert!(self.rounds[round].iter().all(|&r| r >= 1), "tape radices must be positive");
        self
    }

    /// Number of rounds with declared symbols, including empty ones in between.
    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }

    pub fn round(&self, round: usize) -> &[u32] {
        self.rounds.get(round).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn radices(&self) -> Vec<u32> {
        self.rounds.concat()
    }

    /// Number of symbols on a tape.
    pub fn len(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of distinct tapes.
    pub fn size(&self) -> u128 {
        self.rounds.iter().flatten().map(|&r| r as u128).product()
    }

    pub fn round_size(&self, round: usize) -> u128 {
        self.round(round).iter().map(|&r| r as u128).product()
    }

    /// Splits a full tape into per-round chunks, checking every symbol.
    pub fn split<'t>(&self, tape: &'t [u32], rounds: usize) -> Result<Vec<&'t [u32]>, String> {
        if self.rounds.len() > rounds {
            return Err(format!("tape space uses {} rounds, schedule has {rounds}", self.rounds.len()));
        }
        if tape.len() != self.len() {
            return Err(format!("expected {} symbols, got {}", self.len(), tape.len()));
        }
        let mut out = Vec::with_capacity(rounds);
        let mut rest = tape;
        for r in 0..rounds {
            let radices = self.round(r);
            let (chunk, tail) = rest.split_at(radices.len());
            if let Some((i, (&s, &radix))) = chunk.iter().zip(radices).enumerate().find(|(_, (&s, &radix))| s >= radix)
            {
                return Err(format!("round {r} symbol {i} is {s}, radix {radix}"));
            }
            out.push(chunk);
            rest = tail;
        }
        Ok(out)
    }

    /// Every chunk for one round, in lexicographic order.
    pub fn chunks(&self, round: usize) -> MixedRadix {
        MixedRadix::new(self.round(round).to_vec())
    }

    /// Every full tape, in lexicographic order.
    pub fn tapes(&self) -> MixedRadix {
        MixedRadix::new(self.radices())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        self.rounds.iter().flatten().map(|&r| rng.gen_range(0..r)).collect()
    }
}

/// Odometer over a mixed-radix digit vector; the last digit turns fastest.
#[derive(Debug, Clone)]
pub struct MixedRadix {
    radices: Vec<u32>,
    next: Option<Vec<u32>>,
}

impl MixedRadix {
    pub fn new(radices: Vec<u32>) -> Self {
        let next = Some(vec![0; radices.len()]);
        MixedRadix { radices, next }
    }
}

impl Iterator for MixedRadix {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for (digit, &radix) in succ.iter_mut().zip(&self.radices).rev() {
            *digit += 1;
            if *digit < radix {
                carried = false;
                break;
            }
            *digit = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(current)
    }
}

/// Joint tape assignments for three programs in canonical order.
pub struct TapeIter {
    lens: [usize; 3],
    inner: MixedRadix,
    total: u128,
}

impl TapeIter {
    pub fn total(&self) -> u128 {
        self.total
    }
}

impl Iterator for TapeIter {
    type Item = [Vec<u32>; 3];

    fn next(&mut self) -> Option<Self::Item> {
        let flat = self.inner.next()?;
        let (a, rest) = flat.split_at(self.lens[0]);
        let (b, c) = rest.split_at(self.lens[1]);
        Some([a.to_vec(), b.to_vec(), c.to_vec()])
    }
}

/// Enumerates the Cartesian product of the three tape spaces.
///
/// Fails when the number of joint tapes exceeds `budget`.
pub fn enumerate_tapes(programs: &Programs, budget: u128) -> Result<TapeIter, EngineError> {
    let spaces: Vec<_> = programs.iter().map(|p| p.tape_space()).collect();
    let total: u128 = spaces.iter().map(TapeSpace::size).product();
    if total > budget {
        return Err(EngineError::BudgetExceeded { required: total, budget });
    }
    let lens = [spaces[0].len(), spaces[1].len(), spaces[2].len()];
    let radices = spaces.iter().flat_map(TapeSpace::radices).collect();
    Ok(TapeIter { lens, inner: MixedRadix::new(radices), total })
}
