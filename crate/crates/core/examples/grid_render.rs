//! Runs forth-soup on a 2D grid and writes the final state as a PPM image,
//! one 8x8 block per program.
//!
//! cargo run --release --example grid_render -- [epochs] [out.ppm]

use soupworks::config::{RunConfig, TopologyKind};
use soupworks::experiment::Experiment;
use soupworks::render::render_snapshot;
use soupworks::snapshot::Snapshot;
use soupworks::LanguageId;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let epochs: u64 = args.next().map(|a| a.parse()).transpose()?.unwrap_or(500);
    let path = args.next().unwrap_or_else(|| "grid.ppm".into());
    let config = RunConfig {
        language: LanguageId::ForthSoup,
        topology: TopologyKind::Grid2d,
        grid_width: 96,
        grid_height: 54,
        epochs,
        seed: 4,
        stats_every: 50,
        ..Default::default()
    };
    let mut exp = Experiment::new(config)?;
    exp.run(|row| println!("epoch {:>5}  entropy {:.3}", row.epoch, row.high_order_entropy))?;
    let snap = Snapshot::of_soup(exp.soup().unwrap(), LanguageId::ForthSoup, 4);
    let (w, h) = render_snapshot(&snap, std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    println!("wrote {w}x{h} {path}");
    Ok(())
}
