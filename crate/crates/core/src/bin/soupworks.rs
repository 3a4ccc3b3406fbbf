use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use soupworks::config::{RunConfig, TopologyKind};
use soupworks::experiment::Experiment;
use soupworks::render::render_snapshot;
use soupworks::replicators::{self, parse_program};
use soupworks::snapshot::Snapshot;
use soupworks::soup::Placement;
use soupworks::substrate::{LanguageId, PAIR_LEN, PROGRAM_LEN};
use soupworks::trace::{hex_dump, trace};

#[derive(Parser)]
#[command(name = "soupworks", version, about = "Primordial soups of self-modifying programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a soup or long-tape experiment.
    Run(Box<RunArgs>),
    /// Execute one program and print a step-by-step trace.
    Exec(ExecArgs),
    /// Render a grid snapshot as a PPM image.
    Render2d {
        snapshot: PathBuf,
        output: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lang: Option<LanguageId>,
    /// well-mixed, grid2d or longtape
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    num_programs: Option<usize>,
    /// Grid size as WxH, e.g. 240x135.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    torus: bool,
    #[arg(long)]
    tape_len: Option<usize>,
    /// Epochs, or generations for long-tape runs.
    #[arg(long)]
    epochs: Option<u64>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Attach tracer tokens to every byte.
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    stats_every: Option<u64>,
    /// Sample every epoch in START:END.
    #[arg(long)]
    dense_window: Option<String>,
    #[arg(long)]
    snapshot_every: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Built-in replicator name or program file.
    #[arg(long)]
    seed_replicator: Option<String>,
    /// `random` or a tape index.
    #[arg(long)]
    placement: Option<String>,
    #[arg(long)]
    fixed_shuffle: bool,
    #[arg(long)]
    workers: Option<usize>,
    /// Stop K epochs after the first transition (default 0).
    #[arg(long, num_args = 0..=1, default_missing_value = "0")]
    stop_on_transition: Option<u64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    long_tape_len: Option<usize>,
    #[arg(long)]
    window_budget: Option<u64>,
    #[arg(long)]
    mutation_interval: Option<u64>,
    #[arg(long)]
    head1_offset: Option<usize>,
    #[arg(long)]
    windows_per_generation: Option<u64>,
}

#[derive(Args)]
struct ExecArgs {
    #[arg(long)]
    lang: LanguageId,
    /// Hex (or signed decimal for subleq/rsubleq4), a program file, or a
    /// built-in replicator name.
    program: String,
    /// `zeros` or a program file filling the second half of the view.
    #[arg(long, default_value = "zeros")]
    context: String,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    start_pc: usize,
    /// Execution view length in bytes.
    #[arg(long, default_value_t = PAIR_LEN)]
    view_len: usize,
    /// Only print the final tape.
    #[arg(long)]
    quiet: bool,
}

fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s.split_once(['x', 'X']).context("grid must look like WxH")?;
    Ok((w.trim().parse()?, h.trim().parse()?))
}

fn build_config(a: RunArgs) -> Result<RunConfig> {
    let mut c = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = a.lang {
        c.language = v;
    }
    if let Some(t) = &a.topology {
        c.topology = match t.as_str() {
            "well-mixed" => TopologyKind::WellMixed,
            "grid2d" => TopologyKind::Grid2d,
            "longtape" => TopologyKind::Longtape,
            other => bail!("unknown topology `{other}`"),
        };
    }
    if let Some(v) = a.num_programs {
        c.num_programs = v;
    }
    if let Some(g) = &a.grid {
        (c.grid_width, c.grid_height) = parse_grid(g)?;
        if a.topology.is_none() {
            c.topology = TopologyKind::Grid2d;
        }
    }
    c.torus |= a.torus;
    c.trace |= a.trace;
    c.fixed_shuffle |= a.fixed_shuffle;
    if let Some(v) = a.tape_len {
        c.tape_len = v;
    }
    if let Some(v) = a.epochs {
        c.epochs = v;
    }
    if a.budget.is_some() {
        c.budget = a.budget;
    }
    if let Some(v) = a.mutation_rate {
        c.mutation_rate = v;
    }
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if let Some(v) = a.stats_every {
        c.stats_every = v;
    }
    if let Some(d) = &a.dense_window {
        let (s, e) = d.split_once(':').context("dense window must look like START:END")?;
        c.dense_window = Some([s.parse()?, e.parse()?]);
    }
    if let Some(v) = a.snapshot_every {
        c.snapshot_every = v;
    }
    if a.out.is_some() {
        c.out = a.out;
    }
    if a.seed_replicator.is_some() {
        c.seed_replicator = a.seed_replicator;
    }
    if let Some(p) = &a.placement {
        c.placement = match p.as_str() {
            "random" => Placement::Random,
            n => Placement::Index(n.parse().context("placement must be `random` or an index")?),
        };
    }
    if let Some(v) = a.workers {
        c.workers = v;
    }
    if a.stop_on_transition.is_some() {
        c.stop_after_transition = a.stop_on_transition;
    }
    if let Some(v) = a.threshold {
        c.transition_threshold = v;
    }
    if let Some(v) = a.long_tape_len {
        c.long_tape.tape_len = v;
    }
    if let Some(v) = a.window_budget {
        c.long_tape.window_budget = v;
    }
    if let Some(v) = a.mutation_interval {
        c.long_tape.mutation_interval = v;
    }
    if let Some(v) = a.head1_offset {
        c.long_tape.head1_offset = v;
    }
    if let Some(v) = a.windows_per_generation {
        c.long_tape.windows_per_generation = v;
    }
    c.validate()?;
    Ok(c)
}

fn cmd_run(config: RunConfig) -> Result<()> {
    let mut exp = Experiment::new(config)?;
    let out = exp.run(|row| {
        eprintln!("epoch {:>8}  hoe {:>8.4}  steps {:>8.1}", row.epoch, row.high_order_entropy, row.mean_steps_executed)
    })?;
    for g in &out.generations {
        eprintln!(
            "generation {:>6}  hoe {:>8.4}  instr/window {:>8.1}",
            g.generation, g.high_order_entropy, g.mean_instructions_per_window
        );
    }
    if let Some(i) = out.seeded_at {
        println!("seeded replicator at tape {i}");
    }
    match out.transition {
        Some(e) => println!("transition at epoch {e}"),
        None => println!("no transition in {} epochs", out.epochs_run),
    }
    Ok(())
}

fn load_program(language: LanguageId, arg: &str) -> Result<Vec<u8>> {
    if let Some((lang, bytes)) = replicators::by_name(arg) {
        if lang != language {
            bail!("replicator `{arg}` is written for {lang}");
        }
        return Ok(bytes);
    }
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Ok(parse_program(language, &text)?);
    }
    Ok(parse_program(language, arg)?)
}

fn cmd_exec(a: ExecArgs) -> Result<()> {
    let program = load_program(a.lang, &a.program)?;
    if program.len() > a.view_len {
        bail!("program of {} bytes does not fit a {}-byte view", program.len(), a.view_len);
    }
    if a.lang == LanguageId::ForthSoup && a.view_len != PAIR_LEN {
        bail!("forth-soup executes on a {PAIR_LEN}-byte view");
    }
    let mut tape = program;
    if !tape.is_empty() || a.context != "zeros" {
        tape.resize(tape.len().max(PROGRAM_LEN.min(a.view_len)), 0);
        if a.context != "zeros" {
            tape.extend(load_program(a.lang, &a.context)?);
        }
        tape.resize(a.view_len, 0);
    }
    let budget = a.budget.unwrap_or_else(|| a.lang.default_budget());
    let t = trace(a.lang, &mut tape, budget, a.start_pc);
    let mut out = std::io::stdout().lock();
    if !a.quiet {
        for row in &t.rows {
            writeln!(out, "{row}")?;
        }
    }
    writeln!(out, "halt: {} after {} steps", t.report.halt_reason, t.report.steps_executed)?;
    write!(out, "{}", hex_dump(&tape))?;
    Ok(())
}

fn cmd_render2d(snapshot: &Path, output: &Path) -> Result<()> {
    let snap = Snapshot::load(snapshot).with_context(|| format!("loading {}", snapshot.display()))?;
    let file = std::fs::File::create(output).with_context(|| format!("creating {}", output.display()))?;
    let (w, h) = render_snapshot(&snap, std::io::BufWriter::new(file))?;
    println!("wrote {w}x{h} image to {}", output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => match build_config(*a) {
            Ok(c) => cmd_run(c),
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
        },
        Command::Exec(a) => cmd_exec(a),
        Command::Render2d { snapshot, output } => cmd_render2d(&snapshot, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
