//! Drives a configured run: builds the world, steps it, samples stats,
//! writes CSV and snapshots, and watches for the state transition.

use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::{write_stats_csv, AnalysisError, Brotli, Compressor, EpochStats};
use crate::config::{ConfigError, RunConfig, TopologyKind};
use crate::longtape::{write_generation_csv, GenerationStats, LongTapeError, LongTapeWorld};
use crate::snapshot::Snapshot;
use crate::soup::{EpochParams, EpochReport, Soup, SoupError, Workers};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Soup(#[from] SoupError),
    #[error(transparent)]
    LongTape(#[from] LongTapeError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_at(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.to_path_buf(), source }
}

pub enum World {
    Soup(Soup),
    LongTape(LongTapeWorld),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutcome {
    pub stats: Vec<EpochStats>,
    pub generations: Vec<GenerationStats>,
    /// First sampled epoch (or generation) reaching the threshold.
    pub transition: Option<u64>,
    pub epochs_run: u64,
    /// Tape index chosen for the seeded replicator, if any.
    pub seeded_at: Option<usize>,
    pub snapshots: Vec<PathBuf>,
}

pub struct Experiment {
    config: RunConfig,
    world: World,
    workers: Workers,
    compressor: Box<dyn Compressor>,
    seeded_at: Option<usize>,
}

impl Experiment {
    pub fn new(config: RunConfig) -> Result<Self, RunError> {
        config.validate()?;
        let replicator = config.load_replicator()?;
        let mut seeded_at = None;
        let world = match config.topology {
            TopologyKind::Longtape => {
                let mut w = LongTapeWorld::random(config.long_tape_config(), config.seed)?;
                if let Some(p) = &replicator {
                    w.seed_program(p, 0)?;
                    seeded_at = Some(0);
                }
                World::LongTape(w)
            }
            _ => {
                let mut soup = Soup::random(
                    config.soup_topology(),
                    config.program_count(),
                    config.tape_len,
                    config.seed,
                    config.trace,
                )?;
                if let Some(p) = &replicator {
                    seeded_at = Some(soup.seed_replicator(p, config.placement, config.seed)?);
                }
                World::Soup(soup)
            }
        };
        Ok(Experiment {
            workers: Workers::new(config.workers),
            compressor: Box::new(Brotli::default()),
            config,
            world,
            seeded_at,
        })
    }

    pub fn with_compressor(mut self, compressor: Box<dyn Compressor>) -> Self {
        self.compressor = compressor;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn soup(&self) -> Option<&Soup> {
        match &self.world {
            World::Soup(s) => Some(s),
            World::LongTape(_) => None,
        }
    }

    pub fn params(&self) -> EpochParams {
        EpochParams {
            language: self.config.language,
            budget: self.config.budget(),
            mutation: self.config.mutation(),
            seed: self.config.seed,
            fixed_shuffle: self.config.fixed_shuffle,
        }
    }

    fn sample_due(&self, epoch: u64) -> bool {
        let dense = self.config.dense_window.is_some_and(|[a, b]| (a..=b).contains(&epoch));
        dense || epoch.is_multiple_of(self.config.stats_every) || epoch == self.config.epochs
    }

    fn measure(&self, soup: &Soup, mean_steps: f64) -> Result<EpochStats, RunError> {
        Ok(EpochStats::measure(soup.epoch(), soup.bytes(), soup.tokens(), mean_steps, &*self.compressor)?)
    }

    fn snapshot(&self, dir: &Path) -> Result<PathBuf, RunError> {
        let snap = match &self.world {
            World::Soup(s) => Snapshot::of_soup(s, self.config.language, self.config.seed),
            World::LongTape(w) => Snapshot::of_long_tape(w),
        };
        let path = dir.join(format!("snapshot_{:08}.rsoup", snap.epoch));
        snap.save(&path).map_err(io_at(&path))?;
        Ok(path)
    }

    /// Runs to completion. `on_sample` sees every stats row as it is taken.
    pub fn run<F: FnMut(&EpochStats)>(&mut self, mut on_sample: F) -> Result<RunOutcome, RunError> {
        if let Some(dir) = &self.config.out {
            fs::create_dir_all(dir).map_err(io_at(dir))?;
        }
        let mut out = RunOutcome { seeded_at: self.seeded_at, ..Default::default() };
        match self.config.topology {
            TopologyKind::Longtape => self.run_long_tape(&mut out)?,
            _ => self.run_soup(&mut out, &mut on_sample)?,
        }
        if let Some(dir) = self.config.out.clone() {
            let path = dir.join("stats.csv");
            let file = fs::File::create(&path).map_err(io_at(&path))?;
            match self.config.topology {
                TopologyKind::Longtape => write_generation_csv(file, &out.generations)?,
                _ => write_stats_csv(file, &out.stats)?,
            }
        }
        Ok(out)
    }

    fn run_soup<F: FnMut(&EpochStats)>(
        &mut self,
        out: &mut RunOutcome,
        on_sample: &mut F,
    ) -> Result<(), RunError> {
        let params = self.params();
        let threshold = self.config.transition_threshold;
        let snapshot_dir = self.config.out.clone().filter(|_| self.config.snapshot_every > 0);
        let World::Soup(soup) = &self.world else { unreachable!() };
        let row = self.measure(soup, 0.0)?;
        on_sample(&row);
        if row.high_order_entropy >= threshold {
            out.transition = Some(0);
        }
        out.stats.push(row);
        if let Some(dir) = &snapshot_dir {
            out.snapshots.push(self.snapshot(dir)?);
        }
        let mut window = EpochReport::default();
        for epoch in 1..=self.config.epochs {
            if let (Some(t), Some(extra)) = (out.transition, self.config.stop_after_transition) {
                if epoch > t + extra {
                    break;
                }
            }
            let World::Soup(soup) = &mut self.world else { unreachable!() };
            let r = soup.run_epoch(&params, &self.workers)?;
            window.pairs += r.pairs;
            window.total_steps += r.total_steps;
            out.epochs_run = epoch;
            if self.sample_due(epoch) {
                let World::Soup(soup) = &self.world else { unreachable!() };
                let row = self.measure(soup, window.mean_steps())?;
                window = EpochReport::default();
                on_sample(&row);
                if out.transition.is_none() && row.high_order_entropy >= threshold {
                    out.transition = Some(epoch);
                }
                out.stats.push(row);
            }
            if let Some(dir) = &snapshot_dir {
                if epoch % self.config.snapshot_every == 0 {
                    out.snapshots.push(self.snapshot(dir)?);
                }
            }
        }
        Ok(())
    }

    fn run_long_tape(&mut self, out: &mut RunOutcome) -> Result<(), RunError> {
        let threshold = self.config.transition_threshold;
        let snapshot_dir = self.config.out.clone().filter(|_| self.config.snapshot_every > 0);
        for generation in 1..=self.config.epochs {
            if let (Some(t), Some(extra)) = (out.transition, self.config.stop_after_transition) {
                if generation > t + extra {
                    break;
                }
            }
            let World::LongTape(w) = &mut self.world else { unreachable!() };
            let row = if self.config.workers > 1 {
                w.run_generation_unsynchronized(self.config.workers, &*self.compressor)?
            } else {
                w.run_generation(&*self.compressor)?
            };
            if out.transition.is_none() && row.high_order_entropy >= threshold {
                out.transition = Some(generation);
            }
            out.generations.push(row);
            out.epochs_run = generation;
            if let Some(dir) = &snapshot_dir {
                if generation % self.config.snapshot_every == 0 {
                    out.snapshots.push(self.snapshot(dir)?);
                }
            }
        }
        Ok(())
    }
}

/// Convenience wrapper: build and run without a sample callback.
pub fn run(config: RunConfig) -> Result<RunOutcome, RunError> {
    Experiment::new(config)?.run(|_| {})
}
