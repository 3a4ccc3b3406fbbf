//! Step-by-step execution traces for inspecting single programs.

use std::fmt;

use crate::lang::{bff, forth, subleq};
use crate::substrate::{ExecReport, HaltReason, LanguageId, Untraced};

/// Interpreter state for any language, advanced one instruction at a time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Machine {
    Bff(bff::BffState),
    ForthSoup(forth::ForthSoupState),
    ForthCopy(forth::ForthCopyState),
    Subleq(subleq::SubleqState),
    Rsubleq4(subleq::SubleqState),
}

impl Machine {
    pub fn new(language: LanguageId, pc: usize) -> Self {
        match language {
            LanguageId::Bff => Machine::Bff(bff::BffState::new(pc)),
            LanguageId::ForthSoup => Machine::ForthSoup(forth::ForthSoupState::new(pc)),
            LanguageId::ForthCopy => Machine::ForthCopy(forth::ForthCopyState::new(pc)),
            LanguageId::Subleq => Machine::Subleq(subleq::SubleqState::new(pc)),
            LanguageId::Rsubleq4 => Machine::Rsubleq4(subleq::SubleqState::new(pc)),
        }
    }

    /// Runs at most one instruction. A report with one step and
    /// `BudgetExhausted` means the machine can continue.
    pub fn step(&mut self, tape: &mut [u8]) -> ExecReport {
        match self {
            Machine::Bff(s) => bff::run(s, tape, &mut Untraced, 1),
            Machine::ForthSoup(s) => forth::run_soup(s, tape, &mut Untraced, 1),
            Machine::ForthCopy(s) => forth::run_copy(s, tape, &mut Untraced, 1),
            Machine::Subleq(s) => subleq::run_subleq(s, tape, &mut Untraced, 1),
            Machine::Rsubleq4(s) => subleq::run_rsubleq4(s, tape, &mut Untraced, 1),
        }
    }

    pub fn pc(&self) -> i64 {
        match self {
            Machine::Bff(s) => s.pc as i64,
            Machine::ForthSoup(s) => s.pc,
            Machine::ForthCopy(s) => s.pc,
            Machine::Subleq(s) | Machine::Rsubleq4(s) => s.pc,
        }
    }

    pub fn detail(&self) -> StepDetail {
        match self {
            Machine::Bff(s) => StepDetail::Heads { head0: s.head0, head1: s.head1 },
            Machine::ForthSoup(s) => {
                StepDetail::Stack((0..4).rev().map(|n| s.stack.below(n) as i64).collect())
            }
            Machine::ForthCopy(s) => StepDetail::Stack(s.stack.as_slice().iter().map(|&v| v as i64).collect()),
            Machine::Subleq(_) | Machine::Rsubleq4(_) => StepDetail::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepDetail {
    Heads { head0: usize, head1: usize },
    /// Stack contents, bottom to top. Forth-soup shows its top four cells.
    Stack(Vec<i64>),
    None,
}

impl fmt::Display for StepDetail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepDetail::Heads { head0, head1 } => write!(f, "h0={head0:<3} h1={head1:<3}"),
            StepDetail::Stack(v) => {
                let items: Vec<String> = v.iter().map(i64::to_string).collect();
                write!(f, "[{}]", items.join(" "))
            }
            StepDetail::None => Ok(()),
        }
    }
}

/// Machine state before one instruction executes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    /// 1-based index of the instruction about to run.
    pub step: u64,
    pub pc: i64,
    pub detail: StepDetail,
    pub tape: String,
}

impl fmt::Display for TraceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>6} {:>4} {} {}", self.step, self.pc, self.detail, self.tape)
    }
}

/// Text form of a tape: BFF commands as characters, other languages as hex.
pub fn render_tape(language: LanguageId, tape: &[u8]) -> String {
    match language {
        LanguageId::Bff => bff::render(tape),
        _ => hex::encode(tape),
    }
}

pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub report: ExecReport,
}

/// Executes `tape` while recording a row before every instruction.
pub fn trace(language: LanguageId, tape: &mut [u8], budget: u64, start_pc: usize) -> Trace {
    let mut m = Machine::new(language, start_pc);
    let mut rows = Vec::new();
    let mut steps = 0;
    let halt_reason = loop {
        if steps == budget {
            break HaltReason::BudgetExhausted;
        }
        let row = TraceRow { step: steps + 1, pc: m.pc(), detail: m.detail(), tape: render_tape(language, tape) };
        let r = m.step(tape);
        if r.steps_executed == 0 {
            break r.halt_reason;
        }
        rows.push(row);
        steps += 1;
        if r.halt_reason != HaltReason::BudgetExhausted {
            break r.halt_reason;
        }
    };
    Trace { rows, report: ExecReport { steps_executed: steps, halt_reason } }
}

/// Hex dump with 16 bytes per line and an offset column.
pub fn hex_dump(tape: &[u8]) -> String {
    tape.chunks(16)
        .enumerate()
        .map(|(i, c)| {
            let bytes: Vec<String> = c.iter().map(|b| format!("{b:02x}")).collect();
            format!("{:04x}  {}\n", i * 16, bytes.join(" "))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replicators;
    use crate::substrate::execute;

    #[test]
    fn trace_agrees_with_direct_execution() {
        for (lang, prog) in [
            (LanguageId::Bff, replicators::bff_palindrome()),
            (LanguageId::ForthSoup, replicators::forth_six_byte()),
            (LanguageId::Rsubleq4, replicators::rsubleq4_25()),
        ] {
            let mut a = prog.clone();
            a.resize(128, 0);
            let mut b = a.clone();
            let t = trace(lang, &mut a, 5000, 0);
            let r = execute(lang, &mut b, None, 5000, 0);
            assert_eq!(t.report, r, "{lang}");
            assert_eq!(t.rows.len() as u64, r.steps_executed);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn empty_program_halts_immediately() {
        let t = trace(LanguageId::Bff, &mut [], 100, 0);
        assert_eq!(t.report, ExecReport { steps_executed: 0, halt_reason: HaltReason::PcOutOfBounds });
        assert!(t.rows.is_empty());
    }

    #[test]
    fn first_bff_rows() {
        let mut tape = replicators::bff_palindrome();
        tape.resize(128, 0);
        let t = trace(LanguageId::Bff, &mut tape, 4, 0);
        let heads: Vec<_> = t.rows.iter().map(|r| (r.pc, r.detail.clone())).collect();
        assert_eq!(heads[3], (3, StepDetail::Heads { head0: 0, head1: 127 }));
        assert!(t.rows[0].to_string().contains("[[{.>]-]"));
    }

    #[test]
    fn hex_dump_layout() {
        let d = hex_dump(&(0u8..20).collect::<Vec<_>>());
        assert_eq!(d.lines().count(), 2);
        assert!(d.starts_with("0000  00 01 02"));
        assert!(d.lines().nth(1).unwrap().starts_with("0010  10 11 12 13"));
    }
}
