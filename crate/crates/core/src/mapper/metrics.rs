// SPDX-License-Identifier: Apache-2.0

use super::{MapOutput, MemoryUsage};
use crate::connectivity::{memory_footprint, Baselines, CoreAddr, Footprint};
use crate::neuron::{program_cycle_cost, Program};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreMetrics {
    pub addr: CoreAddr,
    pub population: String,
    pub neurons: u64,
    pub inference_instructions: u64,
    pub learning_instructions: u64,
    pub plastic_synapses: u64,
    /// Static program cost for one tick with every plastic synapse visited.
    pub cycles_per_tick: u64,
    pub footprint: Footprint,
    pub usage: MemoryUsage,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub cores: Vec<CoreMetrics>,
    pub neurons: u64,
    pub instructions: u64,
    pub synapses: u64,
    pub cycles_per_tick: u64,
    pub footprint: Footprint,
    pub baselines: Baselines,
    pub axon_in_linkers: u64,
    pub axon_in_index_entries: u64,
    /// Normal-index weight bits over stored weight bits (0 without synapses).
    pub weight_ratio_normal_index: f64,
    /// Crossbar bits over all connectivity bits (0 without synapses).
    pub ratio_crossbar: f64,
    pub quantization_max_error: f64,
}

fn cost(words: &[crate::isa::InstructionWord]) -> u64 {
    Program::new(words.to_vec()).map(|p| program_cycle_cost(p.instructions())).unwrap_or(0)
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn report_metrics(m: &MapOutput) -> Metrics {
    let fp = memory_footprint(&m.tables);
    let mut out = Metrics {
        footprint: fp.total,
        baselines: fp.baselines,
        synapses: fp.synapses,
        axon_in_linkers: fp.axon_in_linkers,
        axon_in_index_entries: fp.axon_in_index_entries,
        quantization_max_error: m.quantization.max_abs_error,
        ..Metrics::default()
    };
    for img in &m.images {
        let plastic: u64 = img.axon_in.blocks.iter().filter(|b| b.plastic).map(|b| b.stored_weights() as u64).sum();
        let neurons = img.state.len() as u64;
        let c = CoreMetrics {
            addr: img.addr,
            population: img.population.clone(),
            neurons,
            inference_instructions: img.inference.len() as u64,
            learning_instructions: img.learning.len() as u64,
            plastic_synapses: plastic,
            cycles_per_tick: cost(&img.inference) * neurons + cost(&img.learning) * plastic,
            footprint: fp.per_core.get(&img.addr).copied().unwrap_or_default(),
            usage: img.usage(),
        };
        out.neurons += c.neurons;
        out.instructions += c.inference_instructions + c.learning_instructions;
        out.cycles_per_tick += c.cycles_per_tick;
        out.cores.push(c);
    }
    out.weight_ratio_normal_index = ratio(out.baselines.normal_index_weight_bits, out.footprint.weight_bits);
    out.ratio_crossbar = ratio(out.baselines.crossbar_bits, out.footprint.total());
    out
}
