//! Saves a soup mid-run, restores it and checks that the resumed run ends
//! in exactly the same state as an uninterrupted one.
//!
//! cargo run --release --example snapshot_resume

use soupworks::snapshot::Snapshot;
use soupworks::soup::{EpochParams, Soup, Topology, Workers};
use soupworks::LanguageId;

fn main() -> anyhow::Result<()> {
    let (lang, seed) = (LanguageId::Bff, 9);
    let params = EpochParams::new(lang, seed);
    let workers = Workers::sequential();

    let mut soup = Soup::random(Topology::WellMixed, 1024, 64, seed, true)?;
    for _ in 0..50 {
        soup.run_epoch(&params, &workers)?;
    }
    let path = std::env::temp_dir().join("soupworks_resume.rsoup");
    Snapshot::of_soup(&soup, lang, seed).save(&path)?;

    for _ in 0..50 {
        soup.run_epoch(&params, &workers)?;
    }
    let mut resumed = Snapshot::load(&path)?.into_soup()?;
    for _ in 0..50 {
        resumed.run_epoch(&params, &workers)?;
    }
    println!("epoch {} vs {}", soup.epoch(), resumed.epoch());
    println!("bytes identical: {}", soup.bytes() == resumed.bytes());
    println!("tokens identical: {}", soup.tokens() == resumed.tokens());
    std::fs::remove_file(path)?;
    Ok(())
}
