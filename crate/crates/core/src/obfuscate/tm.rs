//! Step-bounded single-tape Turing machines over `{0, 1, blank}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

pub const BLANK: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmRule {
    pub write: u8,
    /// -1, 0 or 1.
    pub shift: i8,
    pub next: u8,
}

/// State `0` starts, state `n_states` halts. `rules[q][s]` fires in state `q`
/// reading `s`. The machine stops after `max_steps` even if it has not
/// halted; the output is the first `output_len` cells with blanks read as 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmProgram {
    pub input_len: usize,
    pub output_len: usize,
    pub max_steps: u32,
    pub rules: Vec<[TmRule; 3]>,
}

impl TmProgram {
    pub fn n_states(&self) -> usize {
        self.rules.len()
    }

    pub fn is_well_formed(&self) -> bool {
        let halt = self.rules.len();
        self.rules.len() < u8::MAX as usize
            && self.rules.iter().flatten().all(|r| r.write <= BLANK && (-1..=1).contains(&r.shift) && r.next as usize <= halt)
    }

    /// Halts at once; outputs the input truncated or zero-padded to `output_len`.
    pub fn identity(input_len: usize, output_len: usize) -> Self {
        let stay = |s| TmRule { write: s, shift: 0, next: 1 };
        Self { input_len, output_len, max_steps: 1, rules: vec![[stay(0), stay(1), stay(BLANK)]] }
    }

    /// Flips every input bit, then halts on the first blank.
    pub fn complement(input_len: usize) -> Self {
        let rules = vec![[
            TmRule { write: 1, shift: 1, next: 0 },
            TmRule { write: 0, shift: 1, next: 0 },
            TmRule { write: BLANK, shift: 0, next: 1 },
        ]];
        Self { input_len, output_len: input_len, max_steps: input_len as u32 + 1, rules }
    }

    pub fn random<R: Rng + ?Sized>(n_states: usize, input_len: usize, output_len: usize, max_steps: u32, rng: &mut R) -> Self {
        let rule = |rng: &mut R| TmRule {
            write: rng.gen_range(0..=BLANK),
            shift: rng.gen_range(-1..=1),
            next: rng.gen_range(0..=n_states) as u8,
        };
        let rules = (0..n_states).map(|_| [rule(rng), rule(rng), rule(rng)]).collect();
        Self { input_len, output_len, max_steps, rules }
    }

    /// Runs on `x`; returns the output bits and the number of steps taken.
    pub fn run(&self, x: &[bool]) -> (Vec<bool>, u32) {
        let mut tape: Vec<u8> = x.iter().map(|&b| u8::from(b)).collect();
        let (mut head, mut state, mut steps) = (0usize, 0usize, 0u32);
        while state < self.rules.len() && steps < self.max_steps {
            if head >= tape.len() {
                tape.resize(head + 1, BLANK);
            }
            let r = self.rules[state][tape[head] as usize];
            tape[head] = r.write;
            head = match r.shift {
                -1 => head.saturating_sub(1),
                1 => head + 1,
                _ => head,
            };
            state = r.next as usize;
            steps += 1;
        }
        let out = (0..self.output_len).map(|i| tape.get(i) == Some(&1)).collect();
        (out, steps)
    }
}
