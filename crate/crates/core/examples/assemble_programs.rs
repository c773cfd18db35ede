// SPDX-License-Identifier: Apache-2.0

// Assemble every built-in model template, write it as binary and read it
// back through the disassembler.

use darwin3::isa::{assemble, binary, disassemble};
use darwin3::models::template;
use darwin3::models::templates::NAMES;
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for name in NAMES {
        let t = template(name).ok_or("missing template")?;
        let program = assemble(t.source)?;
        let bytes = binary::write_program(&program.words);
        let back = binary::read_program(&bytes)?;
        assert_eq!(back, program.words);
        // disassembly assembles to the same words
        assert_eq!(assemble(&disassemble(&back))?.words, program.words);
        println!("{name:>14}: {:>2} instructions, {:>3} bytes", program.words.len(), bytes.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
