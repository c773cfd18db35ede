// SPDX-License-Identifier: Apache-2.0

//! Neuron core: per-neuron interpreter, cycle model and tick orchestration.

mod core;
mod cost;
mod exec;
mod state;

pub use self::core::{
    CoreConfig, CoreCounters, CoreFault, CoreMode, Emitted, InputTarget, LearningSweep, NeuronCore, PlasticSynapse,
    TickOutput, MAX_NEURONS,
};
pub use cost::{instruction_cycles, program_cycle_cost};
pub use exec::{fixed_div, Exec, ExecFault, Program, RunStats, SynapseMemory, DEFAULT_BUDGET, SCRATCH_WORDS};
pub use state::*;
