//! One long shared tape with no program boundaries. Each window starts
//! at a random pc and runs until the VM halts or the window budget runs
//! out. Mutations are driven by the number of executed instructions.

use std::sync::atomic::{AtomicU64, AtomicU8, Ordering};

use serde::{Deserialize, Serialize};

use crate::analysis::{high_order_entropy, AnalysisError, Compressor};
use crate::lang::{bff, forth};
use crate::rng::{RngStream, StreamKind};
use crate::substrate::{Cells, ExecReport, LanguageId, SharedCells, Untraced, LONG_TAPE_LEN};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LongTapeError {
    #[error("long-tape mode supports bff and forth-copy, not {0}")]
    Language(LanguageId),
    #[error("tape length must be positive")]
    EmptyTape,
    #[error("mutation interval must be positive")]
    ZeroInterval,
    #[error("program of {len} bytes does not fit at offset {offset} of a {tape_len}-byte tape")]
    DoesNotFit { len: usize, offset: usize, tape_len: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LongTapeConfig {
    pub language: LanguageId,
    pub tape_len: usize,
    pub window_budget: u64,
    /// Executed instructions per mutation.
    pub mutation_interval: u64,
    /// Distance from head0 to head1 at the start of a BFF window.
    pub head1_offset: usize,
    pub windows_per_generation: u64,
}

impl Default for LongTapeConfig {
    fn default() -> Self {
        LongTapeConfig {
            language: LanguageId::ForthCopy,
            tape_len: LONG_TAPE_LEN,
            window_budget: 1000,
            mutation_interval: 400_000,
            head1_offset: 16,
            windows_per_generation: 10_000,
        }
    }
}

impl LongTapeConfig {
    pub fn validate(&self) -> Result<(), LongTapeError> {
        if !matches!(self.language, LanguageId::Bff | LanguageId::ForthCopy) {
            return Err(LongTapeError::Language(self.language));
        }
        if self.tape_len == 0 {
            return Err(LongTapeError::EmptyTape);
        }
        if self.mutation_interval == 0 {
            return Err(LongTapeError::ZeroInterval);
        }
        Ok(())
    }
}

/// Per-generation row of the long-tape stats CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: u64,
    pub high_order_entropy: f64,
    pub mean_instructions_per_window: f64,
    pub mutations_applied: u64,
}

pub const LONG_TAPE_COLUMNS: [&str; 4] =
    ["generation", "high_order_entropy", "mean_instructions_per_window", "mutations_applied"];

#[derive(Debug, Clone, PartialEq)]
pub struct LongTapeWorld {
    tape: Vec<u8>,
    config: LongTapeConfig,
    seed: u64,
    valid: Vec<u8>,
    instructions_executed: u64,
    /// Instructions executed since the last mutation.
    pending: u64,
    mutations_applied: u64,
    windows_run: u64,
    generation: u64,
}

impl LongTapeWorld {
    /// Uniform random tape.
    pub fn random(config: LongTapeConfig, seed: u64) -> Result<Self, LongTapeError> {
        let mut tape = vec![0u8; config.tape_len];
        RngStream::new(seed, StreamKind::Init.at(0)).fill_bytes(&mut tape);
        Self::from_tape(config, tape, seed)
    }

    pub fn zeros(config: LongTapeConfig, seed: u64) -> Result<Self, LongTapeError> {
        Self::from_tape(config, vec![0u8; config.tape_len], seed)
    }

    pub fn from_tape(mut config: LongTapeConfig, tape: Vec<u8>, seed: u64) -> Result<Self, LongTapeError> {
        config.tape_len = tape.len();
        config.validate()?;
        Ok(LongTapeWorld {
            tape,
            config,
            seed,
            valid: config.language.valid_instructions(),
            instructions_executed: 0,
            pending: 0,
            mutations_applied: 0,
            windows_run: 0,
            generation: 0,
        })
    }

    pub fn tape(&self) -> &[u8] {
        &self.tape
    }

    pub fn tape_mut(&mut self) -> &mut [u8] {
        &mut self.tape
    }

    pub fn config(&self) -> &LongTapeConfig {
        &self.config
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn instructions_executed(&self) -> u64 {
        self.instructions_executed
    }

    pub fn mutations_applied(&self) -> u64 {
        self.mutations_applied
    }

    pub fn windows_run(&self) -> u64 {
        self.windows_run
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn set_generation(&mut self, generation: u64) {
        self.generation = generation;
    }

    /// Copies `program` onto the tape at `offset`.
    pub fn seed_program(&mut self, program: &[u8], offset: usize) -> Result<(), LongTapeError> {
        let end = offset
            .checked_add(program.len())
            .filter(|&e| e <= self.tape.len())
            .ok_or(LongTapeError::DoesNotFit { len: program.len(), offset, tape_len: self.tape.len() })?;
        self.tape[offset..end].copy_from_slice(program);
        Ok(())
    }

    /// Runs one window from a uniform random pc.
    pub fn run_window(&mut self) -> ExecReport {
        let mut rng = RngStream::new(self.seed, StreamKind::Window.at(self.windows_run));
        let pc = rng.below(self.tape.len() as u64) as usize;
        self.run_window_at(pc)
    }

    /// Runs one window from `pc`; mutation bookkeeping is the same as for
    /// [`run_window`](Self::run_window).
    pub fn run_window_at(&mut self, pc: usize) -> ExecReport {
        let r = run_from(&self.config, &mut self.tape[..], pc);
        self.windows_run += 1;
        self.account(r.steps_executed);
        r
    }

    /// Adds executed instructions to the accumulator and applies every
    /// mutation that has come due.
    pub fn account(&mut self, steps: u64) {
        self.instructions_executed += steps;
        self.pending += steps;
        while self.pending >= self.config.mutation_interval {
            self.pending -= self.config.mutation_interval;
            let mut rng = RngStream::new(self.seed, StreamKind::LongTapeMutation.at(self.mutations_applied));
            let pos = rng.below(self.tape.len() as u64) as usize;
            self.tape[pos] = self.valid[rng.below(self.valid.len() as u64) as usize];
            self.mutations_applied += 1;
        }
    }

    /// Runs one generation of windows and measures the tape afterwards.
    pub fn run_generation(&mut self, compressor: &dyn Compressor) -> Result<GenerationStats, AnalysisError> {
        let (steps0, muts0) = (self.instructions_executed, self.mutations_applied);
        let windows = self.config.windows_per_generation;
        for _ in 0..windows {
            self.run_window();
        }
        self.finish_generation(windows, steps0, muts0, compressor)
    }

    /// Like [`run_generation`](Self::run_generation), but `workers` threads
    /// share the tape without locking. Windows observe each other's partial
    /// writes, so results are not reproducible.
    pub fn run_generation_unsynchronized(
        &mut self,
        workers: usize,
        compressor: &dyn Compressor,
    ) -> Result<GenerationStats, AnalysisError> {
        let workers = workers.max(1) as u64;
        let (steps0, muts0) = (self.instructions_executed, self.mutations_applied);
        let windows = self.config.windows_per_generation;
        let cells: Vec<AtomicU8> = self.tape.iter().map(|&b| AtomicU8::new(b)).collect();
        let executed = AtomicU64::new(0);
        let base_window = self.windows_run;
        let (config, seed, valid) = (self.config, self.seed, &self.valid);
        let start_total = self.instructions_executed;
        let start_pending = self.pending;
        let mutation_base = self.mutations_applied;
        std::thread::scope(|s| {
            for w in 0..workers {
                let (cells, executed) = (&cells[..], &executed);
                s.spawn(move || {
                    let mut shared = SharedCells(cells);
                    let mut k = w;
                    while k < windows {
                        let mut rng = RngStream::new(seed, StreamKind::Window.at(base_window + k));
                        let pc = rng.below(cells.len() as u64) as usize;
                        let steps = run_from(&config, &mut shared, pc).steps_executed;
                        let before = executed.fetch_add(steps, Ordering::Relaxed);
                        let due_before = (start_pending + before) / config.mutation_interval;
                        let due_after = (start_pending + before + steps) / config.mutation_interval;
                        for m in due_before..due_after {
                            let mut mrng = RngStream::new(seed, StreamKind::LongTapeMutation.at(mutation_base + m));
                            let pos = mrng.below(cells.len() as u64) as usize;
                            shared.store(pos, valid[mrng.below(valid.len() as u64) as usize]);
                        }
                        k += workers;
                    }
                });
            }
        });
        let executed = executed.into_inner();
        for (dst, src) in self.tape.iter_mut().zip(&cells) {
            *dst = src.load(Ordering::Relaxed);
        }
        let due = (start_pending + executed) / self.config.mutation_interval;
        self.instructions_executed = start_total + executed;
        self.pending = (start_pending + executed) % self.config.mutation_interval;
        self.mutations_applied += due;
        self.windows_run += windows;
        self.finish_generation(windows, steps0, muts0, compressor)
    }

    fn finish_generation(
        &mut self,
        windows: u64,
        steps0: u64,
        muts0: u64,
        compressor: &dyn Compressor,
    ) -> Result<GenerationStats, AnalysisError> {
        self.generation += 1;
        let steps = self.instructions_executed - steps0;
        Ok(GenerationStats {
            generation: self.generation,
            high_order_entropy: high_order_entropy(&self.tape, compressor)?,
            mean_instructions_per_window: if windows == 0 { 0.0 } else { steps as f64 / windows as f64 },
            mutations_applied: self.mutations_applied - muts0,
        })
    }

    /// Runs `generations` generations, handing each row to `sink`.
    pub fn run_generations<F>(
        &mut self,
        generations: u64,
        compressor: &dyn Compressor,
        mut sink: F,
    ) -> Result<Vec<GenerationStats>, AnalysisError>
    where
        F: FnMut(&GenerationStats),
    {
        let mut out = Vec::with_capacity(generations as usize);
        for _ in 0..generations {
            let row = self.run_generation(compressor)?;
            sink(&row);
            out.push(row);
        }
        Ok(out)
    }
}

fn run_from<C: Cells + ?Sized>(config: &LongTapeConfig, tape: &mut C, pc: usize) -> ExecReport {
    match config.language {
        LanguageId::Bff => {
            let head1 = (pc + config.head1_offset) % tape.len();
            let mut st = bff::BffState::with_heads(pc, pc, head1);
            bff::run(&mut st, tape, &mut Untraced, config.window_budget)
        }
        LanguageId::ForthCopy => {
            let mut st = forth::ForthCopyState::new(pc);
            forth::run_copy(&mut st, tape, &mut Untraced, config.window_budget)
        }
        other => unreachable!("{other} rejected by LongTapeConfig::validate"),
    }
}

pub fn write_generation_csv<W: std::io::Write>(w: W, rows: &[GenerationStats]) -> Result<(), AnalysisError> {
    let mut wr = csv::Writer::from_writer(w);
    if rows.is_empty() {
        wr.write_record(LONG_TAPE_COLUMNS)?;
    }
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush().map_err(csv::Error::from)?;
    Ok(())
}
