//! Runs forth-copy on a single long tape seeded with the short replicator
//! and prints per-generation statistics.
//!
//! cargo run --release --example long_tape -- [generations]

use soupworks::analysis::Brotli;
use soupworks::longtape::{LongTapeConfig, LongTapeWorld};
use soupworks::replicators;

fn main() -> anyhow::Result<()> {
    let generations: u64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(20);
    let config = LongTapeConfig { tape_len: 1 << 14, windows_per_generation: 2000, ..Default::default() };
    let mut world = LongTapeWorld::random(config, 1)?;
    world.seed_program(&replicators::forth_copy_short(), 0)?;
    let compressor = Brotli::default();
    for _ in 0..generations {
        let g = world.run_generation(&compressor)?;
        println!(
            "generation {:>4}  entropy {:>7.3}  instr/window {:>7.1}  mutations {}",
            g.generation, g.high_order_entropy, g.mean_instructions_per_window, g.mutations_applied
        );
    }
    Ok(())
}
