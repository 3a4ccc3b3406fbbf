//! Shared tape/token representation and the execution interface every
//! language VM implements.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU8, Ordering};

use serde::{Deserialize, Serialize};

use crate::lang::{bff, forth, subleq};

/// Bytes per program in the soup.
pub const PROGRAM_LEN: usize = 64;
/// Length of the concatenated execution view of two programs.
pub const PAIR_LEN: usize = 2 * PROGRAM_LEN;
/// Default length of a long tape.
pub const LONG_TAPE_LEN: usize = 65_536;

/// The instruction sets this crate can execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LanguageId {
    #[serde(rename = "bff")]
    Bff,
    #[serde(rename = "forth-soup")]
    ForthSoup,
    #[serde(rename = "forth-copy")]
    ForthCopy,
    #[serde(rename = "subleq")]
    Subleq,
    #[serde(rename = "rsubleq4")]
    Rsubleq4,
}

impl LanguageId {
    pub const ALL: [LanguageId; 5] = [
        LanguageId::Bff,
        LanguageId::ForthSoup,
        LanguageId::ForthCopy,
        LanguageId::Subleq,
        LanguageId::Rsubleq4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LanguageId::Bff => "bff",
            LanguageId::ForthSoup => "forth-soup",
            LanguageId::ForthCopy => "forth-copy",
            LanguageId::Subleq => "subleq",
            LanguageId::Rsubleq4 => "rsubleq4",
        }
    }

    /// Step budget used when a run does not override it.
    pub fn default_budget(self) -> u64 {
        match self {
            LanguageId::ForthCopy => 1000,
            _ => 8192,
        }
    }

    /// Byte values that are not no-ops. Long-tape mutations draw from this set.
    pub fn valid_instructions(self) -> Vec<u8> {
        match self {
            LanguageId::Bff => bff::COMMANDS.to_vec(),
            LanguageId::ForthSoup => (0x00..=0x0D).chain(0x40..=0xFF).collect(),
            LanguageId::ForthCopy => (0x00..=0x23).collect(),
            // every byte is a meaningful operand
            LanguageId::Subleq | LanguageId::Rsubleq4 => (0..=255).collect(),
        }
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language `{0}` (expected one of bff, forth-soup, forth-copy, subleq, rsubleq4)")]
pub struct UnknownLanguage(pub String);

impl FromStr for LanguageId {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageId::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| UnknownLanguage(s.to_string()))
    }
}

/// Why an execution stopped. Every variant is a normal termination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    BudgetExhausted,
    PcOutOfBounds,
    /// An operand address (SUBLEQ family) pointed outside the tape.
    OperandOutOfBounds,
    UnmatchedBracket,
    StackUnderflow,
    StackOverflow,
    /// Reserved for instruction sets with a halt opcode; none of the shipped ones have one.
    ExplicitHalt,
}

impl HaltReason {
    pub const ALL: [HaltReason; 7] = [
        HaltReason::BudgetExhausted,
        HaltReason::PcOutOfBounds,
        HaltReason::OperandOutOfBounds,
        HaltReason::UnmatchedBracket,
        HaltReason::StackUnderflow,
        HaltReason::StackOverflow,
        HaltReason::ExplicitHalt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HaltReason::BudgetExhausted => "budget_exhausted",
            HaltReason::PcOutOfBounds => "pc_out_of_bounds",
            HaltReason::OperandOutOfBounds => "operand_out_of_bounds",
            HaltReason::UnmatchedBracket => "unmatched_bracket",
            HaltReason::StackUnderflow => "stack_underflow",
            HaltReason::StackOverflow => "stack_overflow",
            HaltReason::ExplicitHalt => "explicit_halt",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one VM execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecReport {
    /// Instruction fetches, no-op bytes included.
    pub steps_executed: u64,
    pub halt_reason: HaltReason,
}

/// A 64-bit lineage tag: 24 bits of epoch, 32 bits of position, 8 bits of
/// the byte value it currently annotates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TracerToken(pub u64);

impl TracerToken {
    pub const EPOCH_BITS: u32 = 24;
    pub const MAX_EPOCH: u64 = (1 << Self::EPOCH_BITS) - 1;

    pub fn new(epoch: u64, position: u64, byte: u8) -> Self {
        debug_assert!(epoch <= Self::MAX_EPOCH);
        debug_assert!(position <= u32::MAX as u64);
        TracerToken(((epoch & Self::MAX_EPOCH) << 40) | ((position & 0xFFFF_FFFF) << 8) | byte as u64)
    }

    pub fn epoch(self) -> u64 {
        self.0 >> 40
    }

    pub fn position(self) -> u64 {
        (self.0 >> 8) & 0xFFFF_FFFF
    }

    pub fn byte(self) -> u8 {
        self.0 as u8
    }

    #[inline(always)]
    pub fn with_byte(self, byte: u8) -> Self {
        TracerToken((self.0 & !0xFF) | byte as u64)
    }
}

impl fmt::Debug for TracerToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TracerToken(epoch={}, pos={}, char={:#04x})",
            self.epoch(),
            self.position(),
            self.byte()
        )
    }
}

/// Token maintenance hooks called by the interpreters.
///
/// Copy instructions move the source token to the destination; every other
/// write only refreshes the char sub-field of the token already there.
pub trait Tracer {
    fn copy(&mut self, src: usize, dst: usize);
    fn set_byte(&mut self, pos: usize, byte: u8);
}

/// Tracing disabled. Compiles to nothing.
pub struct Untraced;

impl Tracer for Untraced {
    #[inline(always)]
    fn copy(&mut self, _src: usize, _dst: usize) {}
    #[inline(always)]
    fn set_byte(&mut self, _pos: usize, _byte: u8) {}
}

/// Tokens stored in a slice parallel to the tape.
pub struct Traced<'a>(pub &'a mut [u64]);

impl Tracer for Traced<'_> {
    #[inline(always)]
    fn copy(&mut self, src: usize, dst: usize) {
        self.0[dst] = self.0[src];
    }

    #[inline(always)]
    fn set_byte(&mut self, pos: usize, byte: u8) {
        self.0[pos] = TracerToken(self.0[pos]).with_byte(byte).0;
    }
}

/// Byte storage a VM can run on: a plain slice, or a shared atomic tape for
/// the unsynchronized long-tape mode.
pub trait Cells {
    fn len(&self) -> usize;
    fn load(&self, i: usize) -> u8;
    fn store(&mut self, i: usize, v: u8);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Cells for [u8] {
    #[inline(always)]
    fn len(&self) -> usize {
        <[u8]>::len(self)
    }
    #[inline(always)]
    fn load(&self, i: usize) -> u8 {
        self[i]
    }
    #[inline(always)]
    fn store(&mut self, i: usize, v: u8) {
        self[i] = v;
    }
}

/// A view of a tape shared between threads without locking. Loads and
/// stores are individually atomic (relaxed), so concurrent windows may
/// observe each other's partial progress.
pub struct SharedCells<'a>(pub &'a [AtomicU8]);

impl Cells for SharedCells<'_> {
    #[inline(always)]
    fn len(&self) -> usize {
        self.0.len()
    }
    #[inline(always)]
    fn load(&self, i: usize) -> u8 {
        self.0[i].load(Ordering::Relaxed)
    }
    #[inline(always)]
    fn store(&mut self, i: usize, v: u8) {
        self.0[i].store(v, Ordering::Relaxed)
    }
}

/// Runs `tape` as a program of `language` from `start_pc` for at most
/// `budget` instruction fetches, mutating it (and `tokens`) in place.
///
/// BFF heads start at position 0. `tokens`, when given, must be as long as
/// the tape. Forth-soup requires a 128-byte view.
pub fn execute(
    language: LanguageId,
    tape: &mut [u8],
    tokens: Option<&mut [u64]>,
    budget: u64,
    start_pc: usize,
) -> ExecReport {
    match tokens {
        Some(tokens) => {
            assert_eq!(tokens.len(), tape.len(), "token array must parallel the tape");
            execute_with(language, tape, &mut Traced(tokens), budget, start_pc)
        }
        None => execute_with(language, tape, &mut Untraced, budget, start_pc),
    }
}

/// Monomorphized form of [`execute`] for a caller-chosen tracer.
pub fn execute_with<T: Tracer>(
    language: LanguageId,
    tape: &mut [u8],
    tracer: &mut T,
    budget: u64,
    start_pc: usize,
) -> ExecReport {
    match language {
        LanguageId::Bff => {
            let mut state = bff::BffState::new(start_pc);
            bff::run(&mut state, tape, tracer, budget)
        }
        LanguageId::ForthSoup => {
            let mut state = forth::ForthSoupState::new(start_pc);
            forth::run_soup(&mut state, tape, tracer, budget)
        }
        LanguageId::ForthCopy => {
            let mut state = forth::ForthCopyState::new(start_pc);
            forth::run_copy(&mut state, tape, tracer, budget)
        }
        LanguageId::Subleq => subleq::run_subleq(&mut subleq::SubleqState::new(start_pc), tape, tracer, budget),
        LanguageId::Rsubleq4 => {
            subleq::run_rsubleq4(&mut subleq::SubleqState::new(start_pc), tape, tracer, budget)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_fields_round_trip() {
        let t = TracerToken::new(0xAB_CDEF, 0x1234_5678, 0x9A);
        assert_eq!(t.epoch(), 0xAB_CDEF);
        assert_eq!(t.position(), 0x1234_5678);
        assert_eq!(t.byte(), 0x9A);
        assert_eq!(t.with_byte(0x9B).with_byte(0x9A), t);
    }

    #[test]
    fn language_names_parse() {
        for l in LanguageId::ALL {
            assert_eq!(l.name().parse::<LanguageId>().unwrap(), l);
        }
        assert!("bff_noheads".parse::<LanguageId>().is_err());
    }

    #[test]
    fn zero_bff_tape_walks_off_the_end() {
        let mut tape = [0u8; PAIR_LEN];
        let report = execute(LanguageId::Bff, &mut tape, None, 8192, 0);
        assert_eq!(report.steps_executed, 128);
        assert_eq!(report.halt_reason, HaltReason::PcOutOfBounds);
        assert!(tape.iter().all(|&b| b == 0));
    }

    #[test]
    fn zero_budget_halts_immediately() {
        for l in LanguageId::ALL {
            let mut tape = [0u8; PAIR_LEN];
            let report = execute(l, &mut tape, None, 0, 0);
            assert_eq!(report.steps_executed, 0);
            assert_eq!(report.halt_reason, HaltReason::BudgetExhausted);
        }
    }
}
