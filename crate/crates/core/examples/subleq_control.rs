//! SUBLEQ-family soups: random ones stay flat, while a seeded RSUBLEQ4
//! replicator spreads.
//!
//! cargo run --release --example subleq_control -- [epochs]

use soupworks::analysis::EpochStats;
use soupworks::config::RunConfig;
use soupworks::experiment::run;
use soupworks::LanguageId;

fn peak(stats: &[EpochStats]) -> f64 {
    stats.iter().map(|s| s.high_order_entropy).fold(f64::MIN, f64::max)
}

fn main() -> anyhow::Result<()> {
    let epochs: u64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(2000);
    for language in [LanguageId::Subleq, LanguageId::Rsubleq4] {
        let out = run(RunConfig { language, num_programs: 4096, epochs, seed: 1, ..Default::default() })?;
        println!("{:>9} unseeded: peak entropy {:.3} over {epochs} epochs", language.name(), peak(&out.stats));
    }
    let out = run(RunConfig {
        language: LanguageId::Rsubleq4,
        num_programs: 4096,
        epochs: 500,
        seed: 1,
        seed_replicator: Some("rsubleq4_25".into()),
        ..Default::default()
    })?;
    println!("rsubleq4 seeded: transition {:?}, peak entropy {:.3}", out.transition, peak(&out.stats));
    Ok(())
}
