//! Subtract-and-branch-if-nonpositive machines.
//!
//! Tape bytes are read as signed 8-bit operands. `subleq` uses absolute
//! addresses; `rsubleq4` addresses every operand relative to `pc`. Any
//! operand or jump that would leave the tape halts the machine.

use std::fmt;

use crate::substrate::{ExecReport, HaltReason, Tracer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubleqState {
    pub pc: i64,
}

impl SubleqState {
    pub fn new(pc: usize) -> Self {
        SubleqState { pc: pc as i64 }
    }
}

#[inline(always)]
fn operand(tape: &[u8], i: usize) -> i64 {
    tape[i] as i8 as i64
}

#[inline(always)]
fn in_range(addr: i64, len: usize) -> Option<usize> {
    if addr >= 0 && (addr as usize) < len {
        Some(addr as usize)
    } else {
        None
    }
}

/// `*a -= *b; if *a <= 0 goto c else pc += 3`.
/// The caller guarantees `pc..pc+3` is readable.
#[inline(always)]
pub fn subleq_step<T: Tracer>(
    state: &mut SubleqState,
    tape: &mut [u8],
    tracer: &mut T,
) -> Result<(), HaltReason> {
    let len = tape.len();
    let pc = state.pc as usize;
    let a = in_range(operand(tape, pc), len).ok_or(HaltReason::OperandOutOfBounds)?;
    let b = in_range(operand(tape, pc + 1), len).ok_or(HaltReason::OperandOutOfBounds)?;
    let c = operand(tape, pc + 2);
    let v = tape[a].wrapping_sub(tape[b]);
    tape[a] = v;
    tracer.set_byte(a, v);
    state.pc = if (v as i8) <= 0 { c } else { state.pc + 3 };
    Ok(())
}

pub fn run_subleq<T: Tracer>(
    state: &mut SubleqState,
    tape: &mut [u8],
    tracer: &mut T,
    budget: u64,
) -> ExecReport {
    run_with(state, tape, tracer, budget, 3, subleq_step)
}

/// `*(pc+a) = *(pc+b) - *(pc+c); if *(pc+a) <= 0 goto pc+d else pc += 4`.
#[inline(always)]
pub fn rsubleq4_step<T: Tracer>(
    state: &mut SubleqState,
    tape: &mut [u8],
    tracer: &mut T,
) -> Result<(), HaltReason> {
    let len = tape.len();
    let pc = state.pc;
    let p = pc as usize;
    let a = in_range(pc + operand(tape, p), len).ok_or(HaltReason::OperandOutOfBounds)?;
    let b = in_range(pc + operand(tape, p + 1), len).ok_or(HaltReason::OperandOutOfBounds)?;
    let c = in_range(pc + operand(tape, p + 2), len).ok_or(HaltReason::OperandOutOfBounds)?;
    let d = operand(tape, p + 3);
    let v = tape[b].wrapping_sub(tape[c]);
    tape[a] = v;
    tracer.set_byte(a, v);
    state.pc = if (v as i8) <= 0 { pc + d } else { pc + 4 };
    Ok(())
}

pub fn run_rsubleq4<T: Tracer>(
    state: &mut SubleqState,
    tape: &mut [u8],
    tracer: &mut T,
    budget: u64,
) -> ExecReport {
    run_with(state, tape, tracer, budget, 4, rsubleq4_step)
}

#[inline(always)]
fn run_with<T: Tracer>(
    state: &mut SubleqState,
    tape: &mut [u8],
    tracer: &mut T,
    budget: u64,
    width: i64,
    step: fn(&mut SubleqState, &mut [u8], &mut T) -> Result<(), HaltReason>,
) -> ExecReport {
    let len = tape.len() as i64;
    let mut steps = 0u64;
    let halt_reason = loop {
        if steps == budget {
            break HaltReason::BudgetExhausted;
        }
        if state.pc < 0 || state.pc + width > len {
            break HaltReason::PcOutOfBounds;
        }
        steps += 1;
        if let Err(reason) = step(state, tape, tracer) {
            break reason;
        }
    };
    ExecReport { steps_executed: steps, halt_reason }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsmError {
    #[error("token `{0}` is not a signed decimal byte")]
    BadToken(String),
    #[error("value {0} does not fit in a signed byte")]
    OutOfRange(i64),
}

/// Parses a whitespace-separated list of signed decimal bytes, e.g.
/// `"9 16 20 4 -3"`.
pub fn assemble(text: &str) -> Result<Vec<u8>, AsmError> {
    text.split_whitespace()
        .map(|tok| {
            let v: i64 = tok.parse().map_err(|_| AsmError::BadToken(tok.to_string()))?;
            if !(-128..=127).contains(&v) {
                return Err(AsmError::OutOfRange(v));
            }
            Ok(v as i8 as u8)
        })
        .collect()
}

/// Inverse of [`assemble`].
pub fn disassemble(bytes: &[u8]) -> String {
    Listing(bytes).to_string()
}

struct Listing<'a>(&'a [u8]);

impl fmt::Display for Listing<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", b as i8)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substrate::Untraced;

    #[test]
    fn zero_tape_spins_at_origin() {
        let mut tape = vec![0u8; 128];
        let mut st = SubleqState::new(0);
        let r = run_subleq(&mut st, &mut tape, &mut Untraced, 500);
        assert_eq!(r.halt_reason, HaltReason::BudgetExhausted);
        assert_eq!(st.pc, 0);
        let mut st = SubleqState::new(0);
        let r = run_rsubleq4(&mut st, &mut tape, &mut Untraced, 500);
        assert_eq!(r.halt_reason, HaltReason::BudgetExhausted);
        assert_eq!(st.pc, 0);
    }

    #[test]
    fn negative_address_halts() {
        let mut tape = vec![0u8; 128];
        tape[0] = (-1i8) as u8;
        let r = run_subleq(&mut SubleqState::new(0), &mut tape, &mut Untraced, 500);
        assert_eq!(r.halt_reason, HaltReason::OperandOutOfBounds);
        assert_eq!(r.steps_executed, 1);
    }

    #[test]
    fn positive_result_falls_through() {
        // tape[5] = 3 - (-2) = 5 > 0 -> pc = 3
        let mut tape = vec![5, 6, 100, 0, 0, 3, (-2i8) as u8, 0];
        let mut st = SubleqState::new(0);
        run_subleq(&mut st, &mut tape, &mut Untraced, 1);
        assert_eq!(tape[5], 5);
        assert_eq!(st.pc, 3);
    }

    #[test]
    fn jump_target_out_of_range_halts_without_fetch() {
        let mut tape = vec![3, 3, 120, 0];
        let mut st = SubleqState::new(0);
        let r = run_subleq(&mut st, &mut tape, &mut Untraced, 10);
        assert_eq!(r.halt_reason, HaltReason::PcOutOfBounds);
        assert_eq!(r.steps_executed, 1);
    }

    #[test]
    fn rsubleq4_addresses_are_relative() {
        // at pc 4: *(4+8) = *(4+9) - *(4+10)
        let mut tape = vec![0u8; 16];
        tape[4..8].copy_from_slice(&[8, 9, 10, 4]);
        tape[13] = 10;
        tape[14] = 4;
        let mut st = SubleqState::new(4);
        run_rsubleq4(&mut st, &mut tape, &mut Untraced, 1);
        assert_eq!(tape[12], 6);
        assert_eq!(st.pc, 8);
        tape[14] = 20;
        let mut st = SubleqState::new(4);
        run_rsubleq4(&mut st, &mut tape, &mut Untraced, 1);
        assert_eq!(tape[12] as i8, -10);
        assert_eq!(st.pc, 8);
        tape[7] = (-4i8) as u8;
        let mut st = SubleqState::new(4);
        run_rsubleq4(&mut st, &mut tape, &mut Untraced, 1);
        assert_eq!(st.pc, 0);
    }

    #[test]
    fn listing_round_trips() {
        let text = "9 16 20 4 -3 -128 127 0";
        assert_eq!(disassemble(&assemble(text).unwrap()), text);
        assert!(matches!(assemble("1 x"), Err(AsmError::BadToken(_))));
        assert_eq!(assemble("200"), Err(AsmError::OutOfRange(200)));
    }
}
