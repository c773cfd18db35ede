// SPDX-License-Identifier: Apache-2.0

//! Static cycle model. The datapath multiplies gated terms in parallel
//! (2 cycles when any multiplication is present) and then adds the terms
//! one per cycle.

use crate::isa::{nhvm, uptis, Instruction};

fn upt(mults: u32, terms: u32) -> u32 {
    let m = if mults > 0 { 2 } else { 0 };
    m + terms.saturating_sub(1)
}

pub fn instruction_cycles(instr: &Instruction) -> u32 {
    match *instr {
        Instruction::Uptvm { nhvm: f } => {
            let mults = (f & (nhvm::V | nhvm::I | nhvm::V_ADP)).count_ones();
            upt(mults, f.count_ones())
        }
        Instruction::Uptis { ohis, nhip } => {
            let mut c = 0;
            if ohis & uptis::TARGET_V_ADP != 0 {
                let mults = (nhip & (uptis::P3 | uptis::P4)).count_ones();
                c += upt(mults, mults + (nhip & uptis::C1 != 0) as u32);
            }
            if ohis & uptis::TARGET_G != 0 {
                let mults = (nhip & (uptis::P5 | uptis::P6)).count_ones();
                c += upt(mults, mults);
            }
            if ohis & uptis::TARGET_I != 0 {
                let mults = 1 + (nhip & uptis::P7 != 0) as u32;
                c += upt(mults, mults);
            }
            c
        }
        Instruction::Uptls { .. } => upt(1, 2),
        Instruction::Uptwt { n, .. } => 2 * n.count_ones() + 1,
        Instruction::Uptts { n, .. } => upt(1, 1 + (n < 3) as u32),
        Instruction::Gsprs { .. } => 0,
        Instruction::Mul { .. } | Instruction::Exp { .. } => 2,
        Instruction::Div { .. } => 3,
        _ => 1,
    }
}

/// Sum of the static per-instruction costs.
pub fn program_cycle_cost(program: &[Instruction]) -> u64 {
    program.iter().map(|i| instruction_cycles(i) as u64).sum()
}
