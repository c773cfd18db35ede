// SPDX-License-Identifier: Apache-2.0

use crate::connectivity::{AxonInTable, AxonOutTable, CoreAddr};
use crate::fixed::Fixed;
use crate::isa::InstructionWord;
use crate::neuron::{CoreConfig, CoreFault, NeuronCore, NeuronRecord, ParameterBank, Program};
use crate::noc::{Fabric, MeshCoord};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Declared memory depths of one core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryDepths {
    pub instruction_words: usize,
    pub neuron_records: usize,
    pub axon_in_entries: usize,
    pub axon_out_entries: usize,
    pub weight_bits: u64,
}

impl Default for MemoryDepths {
    fn default() -> Self {
        MemoryDepths {
            instruction_words: 1024,
            neuron_records: 4096,
            axon_in_entries: 8192,
            axon_out_entries: 65536,
            weight_bits: 16 << 20,
        }
    }
}

/// Random external input of one core, drawn from a per-population stream so
/// the draws do not depend on how the population was split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StimulusImage {
    pub stream: u64,
    pub population_size: u32,
    pub first_neuron: u32,
    pub rate: f64,
    /// Raw amount added to the input register.
    pub raw: i64,
}

/// Draws for neurons `first..first + count` of a population at `tick`.
pub fn stimulus_draws(seed: u64, stream: u64, population_size: u32, tick: u64, first: u32, count: u32, rate: f64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * (tick as u128 * population_size as u128 + first as u128));
    (0..count).map(|_| ((rng.next_u64() >> 11) as f64 * (-53f64).exp2()) < rate).collect()
}

/// Everything one core needs to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreImage {
    pub addr: CoreAddr,
    pub coord: MeshCoord,
    pub population: String,
    pub first_neuron: u32,
    pub config: CoreConfig,
    pub inference: Vec<InstructionWord>,
    pub learning: Vec<InstructionWord>,
    pub params: ParameterBank,
    pub state: Vec<NeuronRecord>,
    /// Initial trace registers of every plastic synapse.
    pub trace_init: [Fixed; 9],
    pub axon_in: AxonInTable,
    pub axon_out: AxonOutTable,
    pub stimulus: Option<StimulusImage>,
}

/// Words used in each memory section.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MemoryUsage {
    pub instruction_words: usize,
    pub neuron_records: usize,
    pub axon_in_entries: usize,
    pub axon_out_entries: usize,
    pub weight_bits: u64,
}

impl CoreImage {
    pub fn usage(&self) -> MemoryUsage {
        MemoryUsage {
            instruction_words: self.inference.len() + self.learning.len(),
            neuron_records: self.state.len(),
            axon_in_entries: self.axon_in.linkers.len(),
            axon_out_entries: self.axon_out.entries.len(),
            weight_bits: self.axon_in.pools.iter().map(|p| p.bits()).sum(),
        }
    }

    /// First section exceeding its depth, as `(section, used, depth)`.
    pub fn check_depths(&self, d: &MemoryDepths) -> Option<(&'static str, u64, u64)> {
        let u = self.usage();
        [
            ("instruction", u.instruction_words as u64, d.instruction_words as u64),
            ("neuron state", u.neuron_records as u64, d.neuron_records as u64),
            ("axon-in", u.axon_in_entries as u64, d.axon_in_entries as u64),
            ("axon-out", u.axon_out_entries as u64, d.axon_out_entries as u64),
            ("weight", u.weight_bits, d.weight_bits),
        ]
        .into_iter()
        .find(|s| s.1 > s.2)
    }

    pub fn load(&self) -> Result<NeuronCore, CoreFault> {
        let program = |words: &[InstructionWord]| {
            Program::new(words.to_vec()).map_err(|e| CoreFault::Config { core: self.addr, message: e.to_string() })
        };
        let mut core = NeuronCore::new(
            self.addr,
            self.config.clone(),
            program(&self.inference)?,
            program(&self.learning)?,
            self.params,
            self.axon_in.clone(),
            self.axon_out.clone(),
        )?;
        if self.state.len() != core.records.len() {
            return Err(CoreFault::Config {
                core: self.addr,
                message: format!("{} state records for {} neurons", self.state.len(), core.records.len()),
            });
        }
        core.records.copy_from_slice(&self.state);
        core.traces.iter_mut().for_each(|t| *t = self.trace_init);
        Ok(core)
    }
}

/// Row of identical chips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FabricSpec {
    pub chip_w: u16,
    pub chip_h: u16,
    pub chips: u16,
}

impl FabricSpec {
    pub fn build(&self) -> Fabric {
        Fabric::row(self.chip_w, self.chip_h, self.chips)
    }
}

impl Default for FabricSpec {
    fn default() -> Self {
        FabricSpec { chip_w: crate::noc::CHIP_DIM as u16, chip_h: crate::noc::CHIP_DIM as u16, chips: 1 }
    }
}

impl std::str::FromStr for FabricSpec {
    type Err = String;

    /// `WxH` or `WxH,chips`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (dims, chips) = s.split_once(',').unwrap_or((s, "1"));
        let (w, h) = dims.split_once('x').ok_or_else(|| format!("expected WxH[,chips], got {s:?}"))?;
        let num = |v: &str| v.trim().parse::<u16>().map_err(|_| format!("bad number {v:?} in {s:?}"));
        let f = FabricSpec { chip_w: num(w)?, chip_h: num(h)?, chips: num(chips)? };
        if f.chip_w == 0 || f.chip_h == 0 || f.chips == 0 {
            return Err(format!("fabric dimensions must be positive: {s:?}"));
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceEntry {
    pub core: CoreAddr,
    pub first: u32,
    pub count: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopulationEntry {
    pub name: String,
    pub size: u32,
    pub slices: Vec<SliceEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub fabric: FabricSpec,
    pub depths: MemoryDepths,
    pub populations: Vec<PopulationEntry>,
    pub cores: usize,
}

pub const CONTAINER_FORMAT: &str = "darwin3-core-images";

/// One file holding the manifest and every core image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub manifest: Manifest,
    pub images: Vec<CoreImage>,
}

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("malformed container: {0}")]
    Format(String),
}

impl Container {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("container serializes")
    }

    pub fn from_json(text: &str) -> Result<Container, ContainerError> {
        let c: Container = serde_json::from_str(text).map_err(|e| ContainerError::Format(e.to_string()))?;
        if c.manifest.format != CONTAINER_FORMAT {
            return Err(ContainerError::Format(format!("unknown format {:?}", c.manifest.format)));
        }
        if c.manifest.cores != c.images.len() {
            return Err(ContainerError::Format(format!(
                "manifest lists {} cores, file holds {}",
                c.manifest.cores,
                c.images.len()
            )));
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<(), ContainerError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Container, ContainerError> {
        Container::from_json(&std::fs::read_to_string(path)?)
    }
}
