//! Follows tracer tokens through a forth-soup run: unique tokens collapse
//! as replicators copy themselves over the soup.
//!
//! cargo run --release --example tracer_tokens -- [seed]

use soupworks::config::RunConfig;
use soupworks::experiment::run;
use soupworks::LanguageId;

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(3);
    let out = run(RunConfig {
        language: LanguageId::ForthSoup,
        num_programs: 8192,
        epochs: 2000,
        seed,
        trace: true,
        stats_every: 50,
        stop_after_transition: Some(200),
        ..Default::default()
    })?;
    for s in &out.stats {
        println!(
            "epoch {:>5}  entropy {:>7.3}  unique {:>7}  top32 {:>7}",
            s.epoch,
            s.high_order_entropy,
            s.unique_token_count.unwrap(),
            s.top32_token_count.unwrap()
        );
    }
    println!("transition: {:?}", out.transition);
    Ok(())
}
