// SPDX-License-Identifier: Apache-2.0

//! Tick-level system simulation of mapped core images.
//!
//! Each tick: apply external input, advance every core (in parallel), inject
//! the emitted packets into the mesh, run the mesh until idle and hand each
//! delivery to its core. Deliveries are consumed before the next tick, so a
//! spike fired at tick `t` acts at tick `t + 1` whatever its cycle latency.

mod reference;

pub use reference::ReferenceSim;

use crate::connectivity::CoreAddr;
use crate::mapper::{stimulus_draws, Container, StimulusImage};
use crate::models::{estimate_energy, EnergyCoefficients, EnergyReport};
use crate::neuron::{CoreCounters, CoreFault, NeuronCore};
use crate::noc::{Fabric, NetStats, Network, NocConfig, NocError, SpikePacket};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub ticks: u64,
    pub seed: u64,
    pub workers: usize,
    /// Abort on the first fault instead of recording it and continuing.
    pub strict: bool,
    pub noc: NocConfig,
    pub trace: bool,
    pub energy: EnergyCoefficients,
    /// Wall-clock length of one tick, for power figures.
    pub tick_seconds: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            ticks: 100,
            seed: 0,
            workers: 1,
            strict: true,
            noc: NocConfig::default(),
            trace: false,
            energy: EnergyCoefficients::default(),
            tick_seconds: 1e-3,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("tick {tick}: {source}")]
    Core { tick: u64, source: CoreFault },
    #[error("tick {tick}: {source}")]
    Noc { tick: u64, source: NocError },
    #[error("tick {tick}: packet for {dst} where no core image is loaded")]
    NoImage { tick: u64, dst: CoreAddr },
    #[error("{0}")]
    Setup(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultRecord {
    pub tick: u64,
    pub message: String,
}

/// A neuron spike in population coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Spike {
    pub tick: u64,
    pub population: u32,
    pub neuron: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub ticks: u64,
    pub spikes: Vec<Spike>,
    /// One line per delivered packet:
    /// `tick cycle src_chip sx sy src_neuron dst_chip dx dy axon_in sub`.
    pub trace: String,
    pub counters: Vec<(CoreAddr, CoreCounters)>,
    pub network: NetStats,
    pub faults: Vec<FaultRecord>,
    pub sops: u64,
    pub neurons: u64,
    pub energy: EnergyReport,
}

struct Meta {
    population: u32,
    first: u32,
    stimulus: Option<StimulusImage>,
}

pub struct Simulator {
    cores: Vec<NeuronCore>,
    meta: Vec<Meta>,
    index: HashMap<CoreAddr, usize>,
    populations: Vec<(String, u32)>,
    fabric: Fabric,
    network: Network,
    pool: rayon::ThreadPool,
    config: SimConfig,
    tick: u64,
    spikes: Vec<Spike>,
    trace: String,
    faults: Vec<FaultRecord>,
}

impl Simulator {
    pub fn new(container: &Container, config: SimConfig) -> Result<Simulator, SimError> {
        let fabric = container.manifest.fabric.build();
        let populations: Vec<(String, u32)> =
            container.manifest.populations.iter().map(|p| (p.name.clone(), p.size)).collect();
        let mut cores = Vec::new();
        let mut meta = Vec::new();
        let mut index = HashMap::new();
        for img in &container.images {
            if !fabric.is_core(img.addr) {
                return Err(SimError::Setup(format!("image for {} lies outside the fabric", img.addr)));
            }
            let population = populations
                .iter()
                .position(|p| p.0 == img.population)
                .ok_or_else(|| SimError::Setup(format!("image names unknown population {:?}", img.population)))?;
            let core = img.load().map_err(|e| SimError::Setup(e.to_string()))?;
            if index.insert(img.addr, cores.len()).is_some() {
                return Err(SimError::Setup(format!("two images for core {}", img.addr)));
            }
            cores.push(core);
            meta.push(Meta { population: population as u32, first: img.first_neuron, stimulus: img.stimulus });
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers.max(1))
            .build()
            .map_err(|e| SimError::Setup(e.to_string()))?;
        Ok(Simulator {
            network: Network::new(fabric.clone(), config.noc),
            fabric,
            cores,
            meta,
            index,
            populations,
            pool,
            config,
            tick: 0,
            spikes: Vec::new(),
            trace: String::new(),
            faults: Vec::new(),
        })
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn cores(&self) -> &[NeuronCore] {
        &self.cores
    }

    pub fn core(&self, addr: CoreAddr) -> Option<&NeuronCore> {
        self.index.get(&addr).map(|&i| &self.cores[i])
    }

    pub fn population_index(&self, name: &str) -> Option<usize> {
        self.populations.iter().position(|p| p.0 == name)
    }

    fn locate(&self, population: usize, neuron: u32) -> Option<(usize, u16)> {
        self.meta.iter().enumerate().find_map(|(i, m)| {
            let n = self.cores[i].neuron_count() as u32;
            (m.population as usize == population && (m.first..m.first + n).contains(&neuron))
                .then(|| (i, (neuron - m.first) as u16))
        })
    }

    /// Current stored weight of the synapse `src -> dst`, found by following
    /// the source's axon-out entries to the destination core.
    pub fn synapse_weight(&self, src_pop: usize, src: u32, dst_pop: usize, dst: u32) -> Option<i32> {
        let (si, local) = self.locate(src_pop, src)?;
        let (di, dst_local) = self.locate(dst_pop, dst)?;
        let (from, to) = (self.cores[si].addr, self.cores[di].addr);
        let mut found = None;
        self.cores[si]
            .axon_out
            .for_each_target(local, |t| {
                if found.is_none() && from.x + t.dx as i32 == to.x && from.y + t.dy as i32 == to.y {
                    let _ = self.cores[di].axon_in.for_each(t.axon_in as u32, t.sub, |r| {
                        if r.neuron == dst_local {
                            found = Some(r.weight);
                        }
                    });
                }
            })
            .ok()?;
        found
    }

    /// Add `raw` to a neuron's input for the next tick.
    pub fn inject(&mut self, population: usize, neuron: u32, raw: i64) -> Result<(), SimError> {
        let (i, local) = self
            .locate(population, neuron)
            .ok_or_else(|| SimError::Setup(format!("no neuron {neuron} in population {population}")))?;
        self.cores[i].inject(local, raw);
        Ok(())
    }

    /// Raise the reward flag on every core of a population for the next tick.
    pub fn set_reward(&mut self, population: usize) {
        for (c, m) in self.cores.iter_mut().zip(&self.meta) {
            if m.population as usize == population {
                c.reward = true;
            }
        }
    }

    fn fault(&mut self, e: SimError) -> Result<(), SimError> {
        if self.config.strict {
            return Err(e);
        }
        self.faults.push(FaultRecord { tick: self.tick, message: e.to_string() });
        Ok(())
    }

    /// Advance one tick; returns the spikes fired during it.
    pub fn step(&mut self) -> Result<Vec<Spike>, SimError> {
        let tick = self.tick;
        let seed = self.config.seed;
        for (c, m) in self.cores.iter_mut().zip(&self.meta) {
            if let Some(s) = m.stimulus {
                let n = c.neuron_count() as u32;
                let draws = stimulus_draws(seed, s.stream, s.population_size, tick, s.first_neuron, n, s.rate);
                for (j, _) in draws.iter().enumerate().filter(|d| *d.1) {
                    c.inject(j as u16, s.raw);
                }
            }
        }

        let cores = &mut self.cores;
        let outputs: Vec<_> = self.pool.install(|| cores.par_iter_mut().map(|c| c.advance_tick()).collect());

        let mut fired = Vec::new();
        let mut packets = Vec::new();
        for (i, out) in outputs.into_iter().enumerate() {
            match out {
                Ok(out) => {
                    let m = &self.meta[i];
                    fired.extend(out.fired.iter().map(|&n| Spike { tick, population: m.population, neuron: m.first + n as u32 }));
                    let src = self.cores[i].addr;
                    packets.extend(out.packets.iter().map(|e| SpikePacket {
                        id: 0,
                        dx: e.target.dx as i32,
                        dy: e.target.dy as i32,
                        axon_in: e.target.axon_in,
                        sub: e.target.sub,
                        src,
                        src_neuron: e.neuron,
                        tick,
                    }));
                }
                Err(source) => self.fault(SimError::Core { tick, source })?,
            }
        }
        for p in packets {
            if let Err(source) = self.network.inject(p) {
                self.fault(SimError::Noc { tick, source })?;
            }
        }
        let deliveries = match self.network.run_until_idle() {
            Ok(d) => d,
            Err(source) => {
                self.network.clear();
                self.fault(SimError::Noc { tick, source })?;
                Vec::new()
            }
        };
        for d in deliveries {
            let Some(&i) = self.index.get(&d.dst) else {
                self.fault(SimError::NoImage { tick, dst: d.dst })?;
                continue;
            };
            if let Err(source) = self.cores[i].receive_spike(d.packet.axon_in as u32, d.packet.sub) {
                self.fault(SimError::Core { tick, source })?;
                continue;
            }
            if self.config.trace {
                let s = self.fabric.locate(d.packet.src).expect("source on fabric");
                let t = self.fabric.locate(d.dst).expect("destination on fabric");
                let _ = writeln!(
                    self.trace,
                    "{tick} {} {} {} {} {} {} {} {} {} {}",
                    d.cycle, s.chip, s.x, s.y, d.packet.src_neuron, t.chip, t.x, t.y, d.packet.axon_in, d.packet.sub
                );
            }
        }
        self.spikes.extend_from_slice(&fired);
        self.tick += 1;
        Ok(fired)
    }

    pub fn run(&mut self, ticks: u64) -> Result<(), SimError> {
        for _ in 0..ticks {
            self.step()?;
        }
        Ok(())
    }

    pub fn finish(self) -> SimResult {
        let counters: Vec<(CoreAddr, CoreCounters)> = self.cores.iter().map(|c| (c.addr, c.counters)).collect();
        let sops = counters.iter().map(|c| c.1.sops).sum();
        let neurons = self.cores.iter().map(|c| c.neuron_count() as u64).sum();
        let duration = self.tick as f64 * self.config.tick_seconds;
        let mut spikes = self.spikes;
        spikes.sort();
        SimResult {
            ticks: self.tick,
            spikes,
            trace: self.trace,
            counters,
            network: self.network.stats,
            faults: self.faults,
            sops,
            neurons,
            energy: estimate_energy(&self.config.energy, neurons, sops, duration),
        }
    }
}

/// Load a container and run it for `config.ticks` ticks.
pub fn simulate(container: &Container, config: SimConfig) -> Result<SimResult, SimError> {
    let ticks = config.ticks;
    let mut sim = Simulator::new(container, config)?;
    sim.run(ticks)?;
    Ok(sim.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapper::{map_network, MapConfig, NetworkDescription};

    const RING: &str = "
[population ring]
size = 8
model = lif
p0 = 0.5
v_th = 0.75

[projection next]
source = ring
target = ring
pattern = explicit
pairs = 0>1:256, 1>2:256, 2>3:256, 3>4:256, 4>5:256, 5>6:256, 6>7:256, 7>0:256
bits = 16
";

    fn ring(chunk: u16) -> (NetworkDescription, Container) {
        let n = NetworkDescription::parse(RING).unwrap();
        let cfg = MapConfig { max_neurons_per_core: chunk, ..MapConfig::default() };
        let c = map_network(&n, &cfg).unwrap().container(&n);
        (n, c)
    }

    #[test]
    fn ring_circulates() {
        let (_, c) = ring(3);
        let mut sim = Simulator::new(&c, SimConfig { trace: true, ..SimConfig::default() }).unwrap();
        sim.inject(0, 0, 256).unwrap();
        sim.run(10).unwrap();
        let r = sim.finish();
        let seq: Vec<(u64, u32)> = r.spikes.iter().map(|s| (s.tick, s.neuron)).collect();
        let expect: Vec<(u64, u32)> = (0..10).map(|t| (t, (t % 8) as u32)).collect();
        assert_eq!(seq, expect);
        assert_eq!(r.trace.lines().count(), 10);
        assert_eq!(r.sops, 10);
    }

    #[test]
    fn zero_ticks_empty_trace() {
        let (_, c) = ring(8);
        let r = simulate(&c, SimConfig { ticks: 0, trace: true, ..SimConfig::default() }).unwrap();
        assert!(r.trace.is_empty() && r.spikes.is_empty());
    }

    #[test]
    fn matches_reference() {
        let (n, c) = ring(3);
        let mut sim = Simulator::new(&c, SimConfig::default()).unwrap();
        let mut reference = ReferenceSim::new(&n, 0).unwrap();
        sim.inject(0, 0, 256).unwrap();
        reference.inject(0, 0, 256);
        for _ in 0..20 {
            assert_eq!(sim.step().unwrap(), reference.step().unwrap());
        }
    }
}
