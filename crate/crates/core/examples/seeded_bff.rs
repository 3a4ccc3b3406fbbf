//! Seeds one BFF replicator into a random soup without background mutation
//! and counts how often it takes over within 128 epochs.
//!
//! cargo run --release --example seeded_bff -- [runs]

use soupworks::config::RunConfig;
use soupworks::experiment::run;
use soupworks::LanguageId;

fn main() -> anyhow::Result<()> {
    let runs: u64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(10);
    let mut taken = 0;
    for seed in 1..=runs {
        let out = run(RunConfig {
            language: LanguageId::Bff,
            num_programs: 8192,
            epochs: 128,
            mutation_rate: 0.0,
            seed,
            seed_replicator: Some("bff_palindrome".into()),
            stats_every: 16,
            ..Default::default()
        })?;
        let last = out.stats.last().unwrap();
        println!(
            "seed {seed:>3}: replicator at tape {:>5}, final entropy {:.3}",
            out.seeded_at.unwrap(),
            last.high_order_entropy
        );
        taken += out.transition.is_some() as u32;
    }
    println!("takeover in {taken}/{runs} runs");
    Ok(())
}
