//! Well-mixed forth-soup run that stops shortly after self-replicators
//! take over.
//!
//! cargo run --release --example forth_soup_emergence -- [seed] [programs] [epochs]

use std::time::Instant;

use soupworks::config::RunConfig;
use soupworks::experiment::Experiment;
use soupworks::LanguageId;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>());
    let seed = args.next().transpose()?.unwrap_or(1);
    let programs = args.next().transpose()?.unwrap_or(8192) as usize;
    let epochs = args.next().transpose()?.unwrap_or(2000);
    let config = RunConfig {
        language: LanguageId::ForthSoup,
        num_programs: programs,
        epochs,
        seed,
        stop_after_transition: Some(0),
        ..Default::default()
    };
    let start = Instant::now();
    let out = Experiment::new(config)?.run(|row| {
        if row.epoch % 100 == 0 {
            println!("epoch {:>5}  high-order entropy {:>7.3}", row.epoch, row.high_order_entropy);
        }
    })?;
    match out.transition {
        Some(e) => println!("seed {seed}: transition at epoch {e}"),
        None => println!("seed {seed}: no transition in {epochs} epochs"),
    }
    println!("{} epochs in {:.1?}", out.epochs_run, start.elapsed());
    Ok(())
}
