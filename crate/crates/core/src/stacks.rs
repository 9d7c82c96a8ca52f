//! Site-indexed instruction stacks.
//!
//! Each vertex carries an up-stack U(v) and a down-stack D(v) of i.i.d.
//! instructions. Entries are keyed random words, so a stack is never stored:
//! only its consumption counter is.

use std::collections::HashMap;

use crate::model::{down_instruction_from_word, up_instruction_from_word, ModelParams, Step, Vertex};
use crate::rng::{KeyedStream, StreamKind};

/// Which stack of a vertex to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StackKind {
    Up,
    Down,
}

impl StackKind {
    fn stream_kind(self) -> StreamKind {
        match self {
            StackKind::Up => StreamKind::Up,
            StackKind::Down => StreamKind::Down,
        }
    }
}

/// The `index`-th (0-based) up-instruction at the vertex with `path_hash`.
#[inline]
pub fn up_instruction(trial_seed: u64, path_hash: u64, params: &ModelParams, index: u64) -> Step {
    let word = KeyedStream::new(trial_seed, path_hash, StreamKind::Up).word(index);
    up_instruction_from_word(params, word)
}

/// The `index`-th (0-based) down-instruction at the vertex with `path_hash`.
#[inline]
pub fn down_instruction(trial_seed: u64, path_hash: u64, d: u32, index: u64) -> u8 {
    let word = KeyedStream::new(trial_seed, path_hash, StreamKind::Down).word(index);
    down_instruction_from_word(d, word)
}

/// Stand-alone stacks keyed by [`Vertex`], with consumption counters.
/// The simulators keep their counters in tree sites instead; this type is
/// the reference view of the same randomness.
#[derive(Debug, Clone)]
pub struct InstructionStacks {
    trial_seed: u64,
    params: ModelParams,
    consumed: HashMap<(Vertex, StackKind), u64>,
}

impl InstructionStacks {
    pub fn new(trial_seed: u64, params: ModelParams) -> Self {
        Self {
            trial_seed,
            params,
            consumed: HashMap::new(),
        }
    }

    fn path_hash(v: &Vertex) -> u64 {
        v.path()
            .iter()
            .fold(crate::rng::ROOT_HASH, |h, &k| crate::rng::child_hash(h, k))
    }

    fn bump(&mut self, v: &Vertex, kind: StackKind) -> u64 {
        let n = self.consumed.entry((v.clone(), kind)).or_insert(0);
        let index = *n;
        *n += 1;
        index
    }

    /// Consumes the next up-instruction at `v`.
    pub fn next_up(&mut self, v: &Vertex) -> Step {
        let index = self.bump(v, StackKind::Up);
        up_instruction(self.trial_seed, Self::path_hash(v), &self.params, index)
    }

    /// Consumes the next down-instruction at `v`.
    pub fn next_down(&mut self, v: &Vertex) -> u8 {
        let index = self.bump(v, StackKind::Down);
        down_instruction(self.trial_seed, Self::path_hash(v), self.params.d(), index)
    }

    /// Reads an entry without consuming it.
    pub fn peek(&self, v: &Vertex, kind: StackKind, index: u64) -> u64 {
        KeyedStream::new(self.trial_seed, Self::path_hash(v), kind.stream_kind()).word(index)
    }

    pub fn consumed(&self, v: &Vertex, kind: StackKind) -> u64 {
        self.consumed.get(&(v.clone(), kind)).copied().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consumption_is_in_index_order() {
        let params = ModelParams::from_rho(2, 0.6).unwrap();
        let mut stacks = InstructionStacks::new(11, params);
        let v: Vertex = "1.2".parse().unwrap();
        let first = up_instruction_from_word(&params, stacks.peek(&v, StackKind::Up, 0));
        let second = up_instruction_from_word(&params, stacks.peek(&v, StackKind::Up, 1));
        assert_eq!(stacks.next_up(&v), first);
        assert_eq!(stacks.consumed(&v, StackKind::Up), 1);
        assert_eq!(stacks.next_up(&v), second);
        assert_eq!(stacks.consumed(&v, StackKind::Up), 2);
        assert_eq!(stacks.consumed(&v, StackKind::Down), 0);
    }

    #[test]
    fn degenerate_rho_one() {
        let params = ModelParams::from_rho(3, 1.0).unwrap();
        let mut stacks = InstructionStacks::new(3, params);
        let v: Vertex = "3".parse().unwrap();
        for _ in 0..200 {
            assert_eq!(stacks.next_up(&v), Step::Parent);
        }
    }

    #[test]
    fn empirical_up_law() {
        let params = ModelParams::from_rho(2, 0.6).unwrap();
        let mut stacks = InstructionStacks::new(2024, params);
        let v = Vertex::root().child(1);
        let n = 100_000;
        let mut counts = [0u32; 3];
        for _ in 0..n {
            match stacks.next_up(&v) {
                Step::Parent => counts[0] += 1,
                Step::Child(k) => counts[usize::from(k)] += 1,
            }
        }
        for (c, p) in counts.iter().zip([0.6, 0.2, 0.2]) {
            let se = (p * (1.0 - p) / f64::from(n)).sqrt();
            assert!((f64::from(*c) / f64::from(n) - p).abs() < 3.0 * se, "{counts:?}");
        }
    }

    #[test]
    fn down_law_is_uniform() {
        let params = ModelParams::new(4, 0.2).unwrap();
        let mut stacks = InstructionStacks::new(5, params);
        let v = Vertex::root();
        let n = 40_000;
        let mut counts = [0u32; 4];
        for _ in 0..n {
            counts[usize::from(stacks.next_down(&v)) - 1] += 1;
        }
        let se = (f64::from(n) * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((f64::from(c) - f64::from(n) / 4.0).abs() < 3.0 * se);
        }
    }
}
