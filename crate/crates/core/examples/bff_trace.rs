//! Steps through the BFF palindrome replicator and shows the moment its
//! second half becomes a copy of the first.
//!
//! cargo run --example bff_trace

use soupworks::replicators;
use soupworks::trace::{render_tape, Machine};
use soupworks::LanguageId;

fn main() {
    let program = replicators::bff_palindrome();
    let mut tape = program.clone();
    tape.resize(128, 0);
    let mut m = Machine::new(LanguageId::Bff, 0);
    for step in 1..=8192 {
        if step <= 15 {
            println!("{step:>4} ip={:<3} {}", m.pc(), m.detail());
        }
        m.step(&mut tape);
        if tape[64..] == program[..] {
            println!("full copy after {step} steps");
            break;
        }
    }
    println!("{}", render_tape(LanguageId::Bff, &tape));
}
