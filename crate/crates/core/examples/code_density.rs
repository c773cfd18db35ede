// SPDX-License-Identifier: Apache-2.0

// Instruction counts of the built-in templates against a conventional
// instruction lowering of the same update equations.

use darwin3::isa::assemble;
use darwin3::models::density::{lowered_count, model_equations, TABLE_MODELS};
use darwin3::models::template;
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("{:>14} {:>8} {:>8} {:>6}", "model", "native", "lowered", "ratio");
    for name in TABLE_MODELS {
        let native = assemble(template(name).ok_or("missing template")?.source)?.words.len();
        let lowered = lowered_count(&model_equations(name).ok_or("missing equations")?);
        println!("{name:>14} {native:>8} {lowered:>8} {:>5.1}x", lowered as f64 / native as f64);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
