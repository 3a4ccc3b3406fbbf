//! Extended Brainfuck where code and data share one tape and the I/O
//! commands are replaced by head-to-head copies.
//!
//! | byte | effect                                  |
//! |------|-----------------------------------------|
//! | `<`  | head0 -= 1                              |
//! | `>`  | head0 += 1                              |
//! | `{`  | head1 -= 1                              |
//! | `}`  | head1 += 1                              |
//! | `-`  | tape[head0] -= 1                        |
//! | `+`  | tape[head0] += 1                        |
//! | `.`  | tape[head1] = tape[head0]               |
//! | `,`  | tape[head0] = tape[head1]               |
//! | `[`  | if tape[head0] == 0: jump past matching `]` |
//! | `]`  | if tape[head0] != 0: jump past matching `[` |
//!
//! Heads wrap modulo the tape length; the instruction pointer does not.

use crate::substrate::{Cells, ExecReport, HaltReason, Tracer};

pub const COMMANDS: [u8; 10] = *b"<>{}-+.,[]";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BffState {
    pub pc: usize,
    pub head0: usize,
    pub head1: usize,
}

impl BffState {
    pub fn new(pc: usize) -> Self {
        BffState { pc, head0: 0, head1: 0 }
    }

    pub fn with_heads(pc: usize, head0: usize, head1: usize) -> Self {
        BffState { pc, head0, head1 }
    }
}

pub fn is_command(b: u8) -> bool {
    COMMANDS.contains(&b)
}

/// Position of the `]` matching the `[` at `open`.
pub fn match_forward<C: Cells + ?Sized>(tape: &C, open: usize) -> Option<usize> {
    let mut depth = 1usize;
    for i in open + 1..tape.len() {
        match tape.load(i) {
            b'[' => depth += 1,
            b']' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Position of the `[` matching the `]` at `close`.
pub fn match_backward<C: Cells + ?Sized>(tape: &C, close: usize) -> Option<usize> {
    let mut depth = 1usize;
    for i in (0..close).rev() {
        match tape.load(i) {
            b']' => depth += 1,
            b'[' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Executes the instruction at `state.pc`. The caller guarantees `pc` is in range.
#[inline(always)]
pub fn step<C: Cells + ?Sized, T: Tracer>(
    state: &mut BffState,
    tape: &mut C,
    tracer: &mut T,
) -> Option<HaltReason> {
    let len = tape.len();
    let pc = state.pc;
    match tape.load(pc) {
        b'<' => state.head0 = if state.head0 == 0 { len - 1 } else { state.head0 - 1 },
        b'>' => state.head0 = if state.head0 + 1 == len { 0 } else { state.head0 + 1 },
        b'{' => state.head1 = if state.head1 == 0 { len - 1 } else { state.head1 - 1 },
        b'}' => state.head1 = if state.head1 + 1 == len { 0 } else { state.head1 + 1 },
        b'-' => {
            let v = tape.load(state.head0).wrapping_sub(1);
            tape.store(state.head0, v);
            tracer.set_byte(state.head0, v);
        }
        b'+' => {
            let v = tape.load(state.head0).wrapping_add(1);
            tape.store(state.head0, v);
            tracer.set_byte(state.head0, v);
        }
        b'.' => {
            tape.store(state.head1, tape.load(state.head0));
            tracer.copy(state.head0, state.head1);
        }
        b',' => {
            tape.store(state.head0, tape.load(state.head1));
            tracer.copy(state.head1, state.head0);
        }
        b'[' => {
            if tape.load(state.head0) == 0 {
                match match_forward(tape, pc) {
                    Some(close) => {
                        state.pc = close + 1;
                        return None;
                    }
                    None => return Some(HaltReason::UnmatchedBracket),
                }
            }
        }
        b']'
            if tape.load(state.head0) != 0 => {
                match match_backward(tape, pc) {
                    Some(open) => {
                        state.pc = open + 1;
                        return None;
                    }
                    None => return Some(HaltReason::UnmatchedBracket),
                }
            }
        _ => {}
    }
    state.pc = pc + 1;
    None
}

pub fn run<C: Cells + ?Sized, T: Tracer>(
    state: &mut BffState,
    tape: &mut C,
    tracer: &mut T,
    budget: u64,
) -> ExecReport {
    let len = tape.len();
    debug_assert!(len == 0 || (state.head0 < len && state.head1 < len));
    let mut steps = 0u64;
    let halt_reason = loop {
        if steps == budget {
            break HaltReason::BudgetExhausted;
        }
        if state.pc >= len {
            break HaltReason::PcOutOfBounds;
        }
        steps += 1;
        if let Some(reason) = step(state, tape, tracer) {
            break reason;
        }
    };
    ExecReport { steps_executed: steps, halt_reason }
}

/// Renders a tape the way the trace printer shows it: commands as
/// themselves, zero as `0`, anything else as a space.
pub fn render(tape: &[u8]) -> String {
    tape.iter()
        .map(|&b| match b {
            0 => '0',
            b if is_command(b) => b as char,
            _ => ' ',
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicators;
    use crate::substrate::{Traced, TracerToken, Untraced};

    fn pair_with_zeros(program: &[u8]) -> Vec<u8> {
        let mut tape = program.to_vec();
        tape.resize(128, 0);
        tape
    }

    #[test]
    fn increment_hits_own_opcode() {
        let mut tape = *b"+";
        let mut st = BffState::new(0);
        step(&mut st, &mut tape[..], &mut Untraced);
        assert_eq!(tape[0], 0x2C);
    }

    #[test]
    fn unmatched_open_bracket_halts() {
        let mut tape = [0u8; 8];
        tape[0] = b'[';
        // head0 sits on position 1 which is zero
        let mut st = BffState::with_heads(0, 1, 0);
        let r = run(&mut st, &mut tape[..], &mut Untraced, 100);
        assert_eq!(r.halt_reason, HaltReason::UnmatchedBracket);
        assert_eq!(r.steps_executed, 1);
    }

    #[test]
    fn unmatched_close_bracket_halts() {
        let mut tape = *b"]x";
        let mut st = BffState::with_heads(0, 1, 0);
        let r = run(&mut st, &mut tape[..], &mut Untraced, 100);
        assert_eq!(r.halt_reason, HaltReason::UnmatchedBracket);
    }

    #[test]
    fn not_taken_close_bracket_needs_no_match() {
        let mut tape = [b']', 0];
        let mut st = BffState::with_heads(0, 1, 0);
        let r = run(&mut st, &mut tape[..], &mut Untraced, 100);
        assert_eq!(r.halt_reason, HaltReason::PcOutOfBounds);
        assert_eq!(r.steps_executed, 2);
    }

    #[test]
    fn heads_wrap_both_ways() {
        let mut tape = *b"<{>}";
        let mut st = BffState::new(0);
        step(&mut st, &mut tape[..], &mut Untraced);
        assert_eq!(st.head0, 3);
        step(&mut st, &mut tape[..], &mut Untraced);
        assert_eq!(st.head1, 3);
        step(&mut st, &mut tape[..], &mut Untraced);
        assert_eq!(st.head0, 0);
        step(&mut st, &mut tape[..], &mut Untraced);
        assert_eq!(st.head1, 0);
    }

    #[test]
    fn nested_brackets_match() {
        let tape = b"[[]x[]]";
        assert_eq!(match_forward(&tape[..], 0), Some(6));
        assert_eq!(match_forward(&tape[..], 1), Some(2));
        assert_eq!(match_backward(&tape[..], 6), Some(0));
        assert_eq!(match_backward(&tape[..], 5), Some(4));
    }

    #[test]
    fn copy_moves_tokens_and_increment_keeps_origin() {
        let mut tape = *b".+-";
        let mut tokens: Vec<u64> =
            (0..3).map(|i| TracerToken::new(0, i, tape[i as usize]).0).collect();
        let orig = tokens.clone();
        let mut st = BffState::with_heads(0, 0, 2);
        run(&mut st, &mut tape[..], &mut Traced(&mut tokens), 1);
        // '.' copied tape[0] over tape[2]
        assert_eq!(tokens[2], orig[0]);
        assert_eq!(tape[2], b'.');
        // '+' then '-' on a data cell restores the token exactly
        let mut tape = *b"+-x";
        let mut tokens: Vec<u64> =
            (0..3).map(|i| TracerToken::new(0, i, tape[i as usize]).0).collect();
        let before = tokens.clone();
        let mut st = BffState::with_heads(0, 2, 0);
        run(&mut st, &mut tape[..], &mut Traced(&mut tokens), 1);
        assert_eq!(TracerToken(tokens[2]).byte(), b'y');
        assert_eq!(TracerToken(tokens[2]).position(), 2);
        run(&mut st, &mut tape[..], &mut Traced(&mut tokens), 1);
        assert_eq!(tokens, before);
    }

    #[test]
    fn palindrome_write_head_wraps_and_first_copy_lands_at_end() {
        let mut tape = pair_with_zeros(&replicators::bff_palindrome());
        let mut st = BffState::new(0);
        let r = run(&mut st, &mut tape[..], &mut Untraced, 4);
        assert_eq!(r.steps_executed, 4);
        assert_eq!(st.head1, 127);
        assert_eq!(tape[127], b'[');
    }
}
