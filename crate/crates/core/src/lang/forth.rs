//! Two stack-machine variants.
//!
//! `forth-soup` runs on the 128-byte concatenation of two programs and uses
//! a circular 64-cell byte stack that can never underflow or overflow.
//!
//! `forth-copy` runs on a long shared tape with a bounded word stack; stack
//! underflow and overflow are its only errors.

use crate::substrate::{Cells, ExecReport, HaltReason, Tracer};

/// Bytes per half of the forth-soup execution view.
pub const HALF: usize = 64;
pub const STACK_CELLS: usize = 64;

/// Circular zero-initialized byte stack. `top` is `cells[sp - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoupStack {
    pub cells: [u8; STACK_CELLS],
    pub sp: usize,
}

impl Default for SoupStack {
    fn default() -> Self {
        SoupStack { cells: [0; STACK_CELLS], sp: 0 }
    }
}

impl SoupStack {
    #[inline(always)]
    fn top_idx(&self) -> usize {
        (self.sp + STACK_CELLS - 1) % STACK_CELLS
    }

    #[inline(always)]
    pub fn top(&self) -> u8 {
        self.cells[self.top_idx()]
    }

    /// `<top - n>`
    #[inline(always)]
    pub fn below(&self, n: usize) -> u8 {
        self.cells[(self.sp + STACK_CELLS - 1 - n % STACK_CELLS) % STACK_CELLS]
    }

    #[inline(always)]
    fn set_top(&mut self, v: u8) {
        let i = self.top_idx();
        self.cells[i] = v;
    }

    #[inline(always)]
    fn set_below(&mut self, n: usize, v: u8) {
        let i = (self.sp + STACK_CELLS - 1 - n % STACK_CELLS) % STACK_CELLS;
        self.cells[i] = v;
    }

    #[inline(always)]
    pub fn push(&mut self, v: u8) {
        self.cells[self.sp] = v;
        self.sp = (self.sp + 1) % STACK_CELLS;
    }

    #[inline(always)]
    pub fn pop(&mut self) -> u8 {
        let v = self.top();
        self.sp = self.top_idx();
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForthSoupState {
    pub pc: i64,
    pub stack: SoupStack,
}

impl ForthSoupState {
    pub fn new(pc: usize) -> Self {
        ForthSoupState { pc: pc as i64, stack: SoupStack::default() }
    }
}

#[inline(always)]
fn lo(addr: u8) -> usize {
    addr as usize % HALF
}

#[inline(always)]
fn hi(addr: u8) -> usize {
    addr as usize % HALF + HALF
}

/// Executes the forth-soup instruction at `state.pc` (caller checks range).
#[inline(always)]
pub fn soup_step<T: Tracer>(state: &mut ForthSoupState, tape: &mut [u8], tracer: &mut T) {
    let pc = state.pc;
    let op = tape[pc as usize];
    let st = &mut state.stack;
    let mut next = pc + 1;
    match op {
        0x00 => {
            let v = tape[lo(st.top())];
            st.set_top(v);
        }
        0x01 => {
            let v = tape[hi(st.top())];
            st.set_top(v);
        }
        0x02 => {
            let a = lo(st.top());
            let v = st.below(1);
            tape[a] = v;
            tracer.set_byte(a, v);
            st.pop();
            st.pop();
        }
        0x03 => {
            let a = hi(st.top());
            let v = st.below(1);
            tape[a] = v;
            tracer.set_byte(a, v);
            st.pop();
            st.pop();
        }
        0x04 => {
            let v = st.top();
            st.push(v);
        }
        0x05 => {
            st.pop();
        }
        0x06 => {
            let (t, u) = (st.top(), st.below(1));
            st.set_top(u);
            st.set_below(1, t);
        }
        0x07 => {
            if st.top() != 0 {
                next += 1;
            }
        }
        0x08 => st.set_top(st.top().wrapping_add(1)),
        0x09 => st.set_top(st.top().wrapping_sub(1)),
        0x0A => {
            let v = st.top().wrapping_add(st.below(1));
            st.set_below(1, v);
            st.pop();
        }
        0x0B => {
            let v = st.top().wrapping_sub(st.below(1));
            st.set_below(1, v);
            st.pop();
        }
        0x0C => {
            let (src, dst) = (lo(st.top()), hi(st.top()));
            tape[dst] = tape[src];
            tracer.copy(src, dst);
            st.pop();
        }
        0x0D => {
            let (dst, src) = (lo(st.top()), hi(st.top()));
            tape[dst] = tape[src];
            tracer.copy(src, dst);
            st.pop();
        }
        0x0E..=0x3F => {}
        0x40..=0x7F => st.push(op & 0x3F),
        0x80..=0xFF => {
            let dist = (op & 0x3F) as i64 + 1;
            next = if op & 0x40 != 0 { pc - dist } else { pc + dist };
        }
    }
    state.pc = next;
}

pub fn run_soup<T: Tracer>(
    state: &mut ForthSoupState,
    tape: &mut [u8],
    tracer: &mut T,
    budget: u64,
) -> ExecReport {
    assert_eq!(tape.len(), 2 * HALF, "forth-soup executes on a 128-byte view");
    let len = tape.len() as i64;
    let mut steps = 0u64;
    let halt_reason = loop {
        if steps == budget {
            break HaltReason::BudgetExhausted;
        }
        if state.pc < 0 || state.pc >= len {
            break HaltReason::PcOutOfBounds;
        }
        steps += 1;
        soup_step(state, tape, tracer);
    };
    ExecReport { steps_executed: steps, halt_reason }
}

/// Bounded stack of signed 32-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CopyStack {
    cells: [i32; STACK_CELLS],
    depth: usize,
}

impl Default for CopyStack {
    fn default() -> Self {
        CopyStack { cells: [0; STACK_CELLS], depth: 0 }
    }
}

impl CopyStack {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.cells[..self.depth]
    }

    #[inline(always)]
    fn push(&mut self, v: i32) -> Result<(), HaltReason> {
        if self.depth == STACK_CELLS {
            return Err(HaltReason::StackOverflow);
        }
        self.cells[self.depth] = v;
        self.depth += 1;
        Ok(())
    }

    #[inline(always)]
    fn require(&self, n: usize) -> Result<(), HaltReason> {
        if self.depth < n {
            Err(HaltReason::StackUnderflow)
        } else {
            Ok(())
        }
    }

    #[inline(always)]
    fn top_mut(&mut self) -> Result<&mut i32, HaltReason> {
        self.require(1)?;
        Ok(&mut self.cells[self.depth - 1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForthCopyState {
    pub pc: i64,
    pub stack: CopyStack,
}

impl ForthCopyState {
    pub fn new(pc: usize) -> Self {
        ForthCopyState { pc: pc as i64, stack: CopyStack::default() }
    }
}

#[inline(always)]
fn wrap(addr: i64, len: usize) -> usize {
    addr.rem_euclid(len as i64) as usize
}

/// Executes the forth-copy instruction at `state.pc` (caller checks range).
/// Addresses are relative to the following instruction.
#[inline(always)]
pub fn copy_step<C: Cells + ?Sized, T: Tracer>(
    state: &mut ForthCopyState,
    tape: &mut C,
    tracer: &mut T,
) -> Result<(), HaltReason> {
    let len = tape.len();
    let op = tape.load(state.pc as usize);
    let base = state.pc + 1;
    let st = &mut state.stack;
    let mut next = base;
    match op {
        0x00..=0x0F => st.push(((op << 4) as i8 >> 4) as i32)?,
        0x10..=0x1F => {
            let top = st.top_mut()?;
            *top = top.wrapping_shl(4).wrapping_add((op & 0x0F) as i32);
        }
        0x20 => {
            st.require(2)?;
            let offset = st.cells[st.depth - 2] as i64;
            let delta = st.cells[st.depth - 1] as i64;
            let src = wrap(base + offset, len);
            let dst = wrap(base + offset + delta, len);
            tape.store(dst, tape.load(src));
            tracer.copy(src, dst);
            st.depth -= 1;
        }
        0x21 => {
            let top = st.top_mut()?;
            *top = top.wrapping_add(1);
        }
        0x22 => {
            let top = st.top_mut()?;
            *top = top.wrapping_sub(1);
        }
        0x23 => {
            st.require(2)?;
            let offset = st.cells[st.depth - 2] as i64;
            let cond = st.cells[st.depth - 1];
            st.depth -= 2;
            if cond != 0 {
                next = base + offset;
            }
        }
        _ => {}
    }
    state.pc = next;
    Ok(())
}

pub fn run_copy<C: Cells + ?Sized, T: Tracer>(
    state: &mut ForthCopyState,
    tape: &mut C,
    tracer: &mut T,
    budget: u64,
) -> ExecReport {
    let len = tape.len() as i64;
    let mut steps = 0u64;
    let halt_reason = loop {
        if steps == budget {
            break HaltReason::BudgetExhausted;
        }
        if state.pc < 0 || state.pc >= len {
            break HaltReason::PcOutOfBounds;
        }
        steps += 1;
        if let Err(reason) = copy_step(state, tape, tracer) {
            break reason;
        }
    };
    ExecReport { steps_executed: steps, halt_reason }
}

/// Mnemonic for a forth-soup opcode.
pub fn soup_mnemonic(op: u8) -> String {
    match op {
        0x00 => "READ".into(),
        0x01 => "READ+64".into(),
        0x02 => "WRITE".into(),
        0x03 => "WRITE+64".into(),
        0x04 => "DUP".into(),
        0x05 => "POP".into(),
        0x06 => "SWAP".into(),
        0x07 => "SKIPNZ".into(),
        0x08 => "INC".into(),
        0x09 => "DEC".into(),
        0x0A => "ADD".into(),
        0x0B => "SUB".into(),
        0x0C => "COPY+64".into(),
        0x0D => "COPY-64".into(),
        0x0E..=0x3F => "NOP".into(),
        0x40..=0x7F => format!("PUSH {}", op & 0x3F),
        0x80..=0xFF => {
            let dist = (op & 0x3F) as i32 + 1;
            if op & 0x40 != 0 {
                format!("JUMP -{dist}")
            } else {
                format!("JUMP +{dist}")
            }
        }
    }
}

/// Mnemonic for a forth-copy opcode.
pub fn copy_mnemonic(op: u8) -> String {
    match op {
        0x00..=0x0F => format!("PUSH {}", (op << 4) as i8 >> 4),
        0x10..=0x1F => format!("SHIFT {}", op & 0x0F),
        0x20 => "COPY".into(),
        0x21 => "INC".into(),
        0x22 => "DEC".into(),
        0x23 => "JNZ".into(),
        _ => "NOP".into(),
    }
}

/// One `HH MNEMONIC` line per byte.
pub fn disassemble(bytes: &[u8], mnemonic: fn(u8) -> String) -> String {
    bytes
        .iter()
        .enumerate()
        .map(|(i, &b)| format!("{i:4}  {b:02X}  {}\n", mnemonic(b)))
        .collect()
}
