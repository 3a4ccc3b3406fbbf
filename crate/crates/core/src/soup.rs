//! Population dynamics: a fixed set of fixed-length programs that interact
//! by concatenate, execute, split.
//!
//! An epoch has three phases separated by barriers. Pairing is sequential
//! and driven by the shuffle streams. Pair execution touches disjoint data
//! and may run on a thread pool. Mutation comes last. Every random draw
//! comes from a counter-based stream keyed by (seed, purpose, epoch), so
//! the result does not depend on the number of workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::{bernoulli_positions, RngStream, StreamKind};
use crate::substrate::{execute, ExecReport, HaltReason, LanguageId, TracerToken, PROGRAM_LEN};

/// Seed used for pairings when a run asks for a fixed shuffle sequence.
pub const FIXED_SHUFFLE_SEED: u64 = 0x5348_5546_464C_4521;

/// Token epoch reserved for bytes written by [`Soup::seed_replicator`], so
/// seeding never collides with initialization or mutation tokens.
pub const SEEDING_TOKEN_EPOCH: u64 = TracerToken::MAX_EPOCH;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SoupError {
    #[error("a well-mixed soup needs an even number of programs, got {0}")]
    OddCount(usize),
    #[error("soup must contain at least one program")]
    Empty,
    #[error("program of {len} bytes does not fit a {tape_len}-byte tape")]
    ProgramTooLong { len: usize, tape_len: usize },
    #[error("tape index {index} out of range for {count} tapes")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("{0} executes on 64-byte programs only")]
    ProgramLength(LanguageId),
    #[error("token array length {tokens} does not match {bytes} soup bytes")]
    TokenLength { tokens: usize, bytes: usize },
    #[error("mutation rate {0} outside [0, 1]")]
    Rate(f64),
    #[error("tracer tokens hold 32-bit positions; soup has {0} bytes")]
    TooLarge(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    WellMixed,
    /// Programs on a `width x height` grid interacting within radius 2.
    /// `wrap` turns the grid into a torus; otherwise edges clip.
    Grid2d { width: usize, height: usize, wrap: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutationPolicy {
    /// Per-byte, per-epoch probability of replacement by a uniform byte.
    pub rate: f64,
    pub enabled: bool,
}

impl Default for MutationPolicy {
    fn default() -> Self {
        MutationPolicy { rate: 0.00024, enabled: true }
    }
}

impl MutationPolicy {
    pub fn off() -> Self {
        MutationPolicy { rate: 0.0, enabled: false }
    }

    pub fn with_rate(rate: f64) -> Self {
        MutationPolicy { rate, enabled: rate > 0.0 }
    }

    fn effective_rate(&self) -> f64 {
        if self.enabled {
            self.rate
        } else {
            0.0
        }
    }
}

/// Everything an epoch needs besides the soup itself.
#[derive(Debug, Clone, Copy)]
pub struct EpochParams {
    pub language: LanguageId,
    pub budget: u64,
    pub mutation: MutationPolicy,
    pub seed: u64,
    pub fixed_shuffle: bool,
}

impl EpochParams {
    pub fn new(language: LanguageId, seed: u64) -> Self {
        EpochParams {
            language,
            budget: language.default_budget(),
            mutation: MutationPolicy::default(),
            seed,
            fixed_shuffle: false,
        }
    }

    fn pairing_seed(&self) -> u64 {
        if self.fixed_shuffle {
            FIXED_SHUFFLE_SEED
        } else {
            self.seed
        }
    }
}

/// Aggregate of all executions in one epoch.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EpochReport {
    /// The epoch that just completed (1-based).
    pub epoch: u64,
    pub pairs: u64,
    pub total_steps: u64,
    pub halts: [u64; HaltReason::ALL.len()],
    pub mutations: u64,
}

impl EpochReport {
    pub fn mean_steps(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.total_steps as f64 / self.pairs as f64
        }
    }

    pub fn halts_for(&self, reason: HaltReason) -> u64 {
        self.halts[reason.index()]
    }

    fn record(&mut self, r: &ExecReport) {
        self.pairs += 1;
        self.total_steps += r.steps_executed;
        self.halts[r.halt_reason.index()] += 1;
    }
}

/// Pair execution backend. One worker runs inline; more use a rayon pool.
pub struct Workers {
    pool: Option<rayon::ThreadPool>,
}

impl Workers {
    pub fn new(count: usize) -> Self {
        let pool = (count > 1).then(|| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(count)
                .build()
                .expect("thread pool")
        });
        Workers { pool }
    }

    pub fn sequential() -> Self {
        Workers { pool: None }
    }

    pub fn count(&self) -> usize {
        self.pool.as_ref().map_or(1, |p| p.current_num_threads())
    }
}

/// Where [`Soup::seed_replicator`] writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Random,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Soup {
    programs: Vec<u8>,
    tokens: Option<Vec<u64>>,
    program_len: usize,
    topology: Topology,
    epoch: u64,
}

impl Soup {
    /// Uniform random soup. Tokens, if enabled, are `(0, position, byte)`.
    pub fn random(
        topology: Topology,
        count: usize,
        program_len: usize,
        seed: u64,
        tracing: bool,
    ) -> Result<Self, SoupError> {
        let count = Self::check_shape(topology, count)?;
        let mut programs = vec![0u8; count * program_len];
        RngStream::new(seed, StreamKind::Init.at(0)).fill_bytes(&mut programs);
        Self::with_bytes(programs, topology, program_len, tracing)
    }

    /// Every byte zero.
    pub fn zeros(
        topology: Topology,
        count: usize,
        program_len: usize,
        tracing: bool,
    ) -> Result<Self, SoupError> {
        let count = Self::check_shape(topology, count)?;
        Self::with_bytes(vec![0u8; count * program_len], topology, program_len, tracing)
    }

    fn with_bytes(
        programs: Vec<u8>,
        topology: Topology,
        program_len: usize,
        tracing: bool,
    ) -> Result<Self, SoupError> {
        if programs.len() > u32::MAX as usize {
            return Err(SoupError::TooLarge(programs.len()));
        }
        let tokens = tracing.then(|| {
            programs
                .iter()
                .enumerate()
                .map(|(i, &b)| TracerToken::new(0, i as u64, b).0)
                .collect()
        });
        Ok(Soup { programs, tokens, program_len, topology, epoch: 0 })
    }

    /// Rebuilds a soup from stored parts (e.g. a snapshot).
    pub fn from_parts(
        programs: Vec<u8>,
        tokens: Option<Vec<u64>>,
        program_len: usize,
        topology: Topology,
        epoch: u64,
    ) -> Result<Self, SoupError> {
        if program_len == 0 || programs.is_empty() || !programs.len().is_multiple_of(program_len) {
            return Err(SoupError::Empty);
        }
        Self::check_shape(topology, programs.len() / program_len)?;
        if let Some(t) = &tokens {
            if t.len() != programs.len() {
                return Err(SoupError::TokenLength { tokens: t.len(), bytes: programs.len() });
            }
        }
        Ok(Soup { programs, tokens, program_len, topology, epoch })
    }

    fn check_shape(topology: Topology, count: usize) -> Result<usize, SoupError> {
        match topology {
            Topology::WellMixed => {
                if count == 0 {
                    Err(SoupError::Empty)
                } else if !count.is_multiple_of(2) {
                    Err(SoupError::OddCount(count))
                } else {
                    Ok(count)
                }
            }
            Topology::Grid2d { width, height, .. } => {
                if width * height == 0 {
                    Err(SoupError::Empty)
                } else {
                    Ok(width * height)
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.programs.len() / self.program_len
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn program_len(&self) -> usize {
        self.program_len
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Completed epochs.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    /// All programs concatenated in index order.
    pub fn bytes(&self) -> &[u8] {
        &self.programs
    }

    pub fn tokens(&self) -> Option<&[u64]> {
        self.tokens.as_deref()
    }

    pub fn program(&self, i: usize) -> &[u8] {
        &self.programs[i * self.program_len..(i + 1) * self.program_len]
    }

    /// Overwrites whole programs without touching tokens; for building test
    /// fixtures and benchmarks.
    pub fn bytes_mut(&mut self) -> &mut [u8] {
        &mut self.programs
    }

    /// Writes `program` at offset 0 of one tape and gives the written bytes
    /// fresh tokens. Returns the tape index used.
    pub fn seed_replicator(
        &mut self,
        program: &[u8],
        placement: Placement,
        seed: u64,
    ) -> Result<usize, SoupError> {
        if program.len() > self.program_len {
            return Err(SoupError::ProgramTooLong { len: program.len(), tape_len: self.program_len });
        }
        let count = self.len();
        let index = match placement {
            Placement::Index(i) if i >= count => {
                return Err(SoupError::IndexOutOfRange { index: i, count })
            }
            Placement::Index(i) => i,
            Placement::Random => {
                RngStream::new(seed, StreamKind::Seeding.at(self.epoch)).below(count as u64) as usize
            }
        };
        let start = index * self.program_len;
        self.programs[start..start + program.len()].copy_from_slice(program);
        if let Some(tokens) = &mut self.tokens {
            for (k, &b) in program.iter().enumerate() {
                tokens[start + k] = TracerToken::new(SEEDING_TOKEN_EPOCH, (start + k) as u64, b).0;
            }
        }
        Ok(index)
    }

    /// Runs one epoch with the pairing rule of this soup's topology.
    pub fn run_epoch(
        &mut self,
        params: &EpochParams,
        workers: &Workers,
    ) -> Result<EpochReport, SoupError> {
        match self.topology {
            Topology::WellMixed => epoch_well_mixed(self, params, workers),
            Topology::Grid2d { .. } => epoch_grid2d(self, params, workers),
        }
    }

    fn check_params(&self, params: &EpochParams) -> Result<(), SoupError> {
        if !(0.0..=1.0).contains(&params.mutation.rate) {
            return Err(SoupError::Rate(params.mutation.rate));
        }
        if params.language == LanguageId::ForthSoup && self.program_len != PROGRAM_LEN {
            return Err(SoupError::ProgramLength(params.language));
        }
        Ok(())
    }

    fn execute_pairs(
        &mut self,
        pairs: &[(u32, u32)],
        params: &EpochParams,
        workers: &Workers,
        report: &mut EpochReport,
    ) {
        let len = self.program_len;
        let programs = &self.programs;
        let tokens = self.tokens.as_deref();
        let run = |&(a, b): &(u32, u32)| {
            let (a, b) = (a as usize * len, b as usize * len);
            let mut view = Vec::with_capacity(2 * len);
            view.extend_from_slice(&programs[a..a + len]);
            view.extend_from_slice(&programs[b..b + len]);
            let mut view_tokens = tokens.map(|t| {
                let mut v = Vec::with_capacity(2 * len);
                v.extend_from_slice(&t[a..a + len]);
                v.extend_from_slice(&t[b..b + len]);
                v
            });
            let r = execute(params.language, &mut view, view_tokens.as_deref_mut(), params.budget, 0);
            (view, view_tokens, r)
        };
        let results: Vec<_> = match &workers.pool {
            Some(pool) => pool.install(|| pairs.par_iter().map(run).collect()),
            None => pairs.iter().map(run).collect(),
        };
        for (&(a, b), (view, view_tokens, r)) in pairs.iter().zip(results) {
            let (a, b) = (a as usize * len, b as usize * len);
            self.programs[a..a + len].copy_from_slice(&view[..len]);
            self.programs[b..b + len].copy_from_slice(&view[len..]);
            if let (Some(t), Some(vt)) = (&mut self.tokens, view_tokens) {
                t[a..a + len].copy_from_slice(&vt[..len]);
                t[b..b + len].copy_from_slice(&vt[len..]);
            }
            report.record(&r);
        }
    }

    /// Replaces each byte with a uniform random byte with probability `rate`.
    fn mutate(&mut self, params: &EpochParams, epoch: u64) -> u64 {
        let rate = params.mutation.effective_rate();
        if rate <= 0.0 {
            return 0;
        }
        let mut mask = RngStream::new(params.seed, StreamKind::MutationMask.at(epoch));
        let mut values = RngStream::new(params.seed, StreamKind::MutationValue.at(epoch));
        let hits = bernoulli_positions(&mut mask, self.programs.len(), rate);
        let token_epoch = epoch & TracerToken::MAX_EPOCH;
        for &pos in &hits {
            let v = values.byte();
            self.programs[pos] = v;
            if let Some(t) = &mut self.tokens {
                t[pos] = TracerToken::new(token_epoch, pos as u64, v).0;
            }
        }
        hits.len() as u64
    }

    fn finish_epoch(&mut self, params: &EpochParams, mut report: EpochReport) -> EpochReport {
        let epoch = self.epoch + 1;
        report.mutations = self.mutate(params, epoch);
        report.epoch = epoch;
        self.epoch = epoch;
        report
    }
}

/// Pairs come from consecutive entries of a fresh permutation, so every
/// program takes part in exactly one interaction per epoch.
pub fn well_mixed_pairs(count: usize, seed: u64, epoch: u64) -> Vec<(u32, u32)> {
    let perm = RngStream::new(seed, StreamKind::Shuffle.at(epoch)).shuffle(count);
    perm.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

pub fn epoch_well_mixed(
    soup: &mut Soup,
    params: &EpochParams,
    workers: &Workers,
) -> Result<EpochReport, SoupError> {
    soup.check_params(params)?;
    let epoch = soup.epoch + 1;
    let pairs = well_mixed_pairs(soup.len(), params.pairing_seed(), epoch);
    let mut report = EpochReport::default();
    soup.execute_pairs(&pairs, params, workers, &mut report);
    Ok(soup.finish_epoch(params, report))
}

/// Cells within Chebyshev distance 2 of `index`, excluding itself.
pub fn grid_neighbors(index: usize, width: usize, height: usize, wrap: bool, out: &mut Vec<u32>) {
    out.clear();
    let (x, y) = ((index % width) as i64, (index / width) as i64);
    let (w, h) = (width as i64, height as i64);
    for dy in -2..=2i64 {
        for dx in -2..=2i64 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let (mut nx, mut ny) = (x + dx, y + dy);
            if wrap {
                nx = nx.rem_euclid(w);
                ny = ny.rem_euclid(h);
            } else if nx < 0 || ny < 0 || nx >= w || ny >= h {
                continue;
            }
            let n = (ny * w + nx) as u32;
            if n as usize != index && !out.contains(&n) {
                out.push(n);
            }
        }
    }
}

/// Random-order neighbor pairing on the grid. Returns ordered pairs
/// `(program, chosen neighbor)`; no program appears twice.
pub fn grid_pairs(width: usize, height: usize, wrap: bool, seed: u64, epoch: u64) -> Vec<(u32, u32)> {
    let n = width * height;
    let order = RngStream::new(seed, StreamKind::Shuffle.at(epoch)).shuffle(n);
    let mut pick = RngStream::new(seed, StreamKind::Pairing.at(epoch));
    let mut taken = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2);
    let mut nbrs = Vec::with_capacity(24);
    for p in order {
        grid_neighbors(p as usize, width, height, wrap, &mut nbrs);
        if nbrs.is_empty() {
            continue;
        }
        let q = nbrs[pick.below(nbrs.len() as u64) as usize];
        if !taken[p as usize] && !taken[q as usize] {
            taken[p as usize] = true;
            taken[q as usize] = true;
            pairs.push((p, q));
        }
    }
    pairs
}

pub fn epoch_grid2d(
    soup: &mut Soup,
    params: &EpochParams,
    workers: &Workers,
) -> Result<EpochReport, SoupError> {
    soup.check_params(params)?;
    let Topology::Grid2d { width, height, wrap } = soup.topology else {
        return epoch_well_mixed(soup, params, workers);
    };
    let epoch = soup.epoch + 1;
    let pairs = grid_pairs(width, height, wrap, params.pairing_seed(), epoch);
    let mut report = EpochReport::default();
    soup.execute_pairs(&pairs, params, workers, &mut report);
    Ok(soup.finish_epoch(params, report))
}
