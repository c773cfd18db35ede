// SPDX-License-Identifier: Apache-2.0

use super::exec::{Exec, ExecFault, Program, SynapseMemory, DEFAULT_BUDGET, SCRATCH_WORDS};
use super::state::{ExpLut, NeuronRecord, ParameterBank, H, I, R2, X2, Y2};
use crate::connectivity::{AxonInTable, AxonOutTable, ConnError, CoreAddr, Target, WeightArray};
use crate::fixed::{Alu, Fixed, QFormat};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const MAX_NEURONS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoreMode {
    Inference,
    Learning,
    Both,
}

impl CoreMode {
    pub fn inference(self) -> bool {
        self != CoreMode::Learning
    }

    pub fn learning(self) -> bool {
        self != CoreMode::Inference
    }
}

/// State register receiving the summed synaptic input at tick entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputTarget {
    H,
    I,
}

impl InputTarget {
    fn index(self) -> usize {
        match self {
            InputTarget::H => H,
            InputTarget::I => I,
        }
    }
}

/// Which plastic synapses the learning program visits each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LearningSweep {
    /// Every plastic synapse, every tick.
    All,
    /// Only synapses with a pre event or whose target fired this tick.
    Activated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreConfig {
    pub neuron_count: u16,
    pub mode: CoreMode,
    pub format: QFormat,
    pub input_target: InputTarget,
    /// Left shift applied to a stored weight before it is accumulated.
    pub weight_shift: u8,
    pub budget: u32,
    pub inference_entry: usize,
    pub learning_entry: usize,
    pub sweep: LearningSweep,
    pub exp_lut: ExpLut,
}

impl Default for CoreConfig {
    fn default() -> Self {
        CoreConfig {
            neuron_count: 0,
            mode: CoreMode::Inference,
            format: QFormat::Q8_8,
            input_target: InputTarget::I,
            weight_shift: 0,
            budget: DEFAULT_BUDGET,
            inference_entry: 0,
            learning_entry: 0,
            sweep: LearningSweep::All,
            exp_lut: ExpLut::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreFault {
    #[error("core {core}: neuron {neuron}: {fault}")]
    Exec { core: CoreAddr, neuron: u16, fault: ExecFault },
    #[error("core {core}: {source}")]
    Table { core: CoreAddr, source: ConnError },
    #[error("core {core}: {message}")]
    Config { core: CoreAddr, message: String },
}

/// Location of one plastic synapse inside the axon-in table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlasticSynapse {
    pub axon_in: u32,
    pub sub: u16,
    pub neuron: u16,
    pub pool: u16,
    pub element: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreCounters {
    pub ticks: u64,
    pub packets_in: u64,
    /// Synaptic operations: resolved (neuron, weight) pairs.
    pub sops: u64,
    pub spikes: u64,
    pub packets_out: u64,
    pub instructions: u64,
    pub cycles: u64,
    pub learning_runs: u64,
    pub saturations: u64,
    pub weight_clips: u64,
}

/// Outgoing packet before node offsets are resolved by the fabric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Emitted {
    pub neuron: u16,
    pub target: Target,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TickOutput {
    pub fired: Vec<u16>,
    pub packets: Vec<Emitted>,
}

/// One neuron core: programs, parameter memory, neuron state, axon tables.
#[derive(Debug, Clone)]
pub struct NeuronCore {
    pub addr: CoreAddr,
    pub config: CoreConfig,
    pub inference: Program,
    pub learning: Program,
    pub params: ParameterBank,
    pub records: Vec<NeuronRecord>,
    pub axon_in: AxonInTable,
    pub axon_out: AxonOutTable,
    /// Plastic synapses in ascending (axon-in, sub, column) order.
    pub plastic: Vec<PlasticSynapse>,
    /// Learning traces, parallel to `plastic`.
    pub traces: Vec<[Fixed; 9]>,
    pub counters: CoreCounters,
    pub reward: bool,
    plastic_rows: BTreeMap<(u32, u16), (usize, usize)>,
    pre_events: Vec<bool>,
    pending: Vec<i64>,
    scratch: [Fixed; SCRATCH_WORDS],
}

struct SynapseView<'a> {
    plastic: &'a [PlasticSynapse],
    pools: &'a mut [WeightArray],
    traces: &'a mut [[Fixed; 9]],
    clips: u64,
}

impl SynapseMemory for SynapseView<'_> {
    fn synapse_count(&self) -> usize {
        self.plastic.len()
    }

    fn weight(&self, addr: usize) -> Fixed {
        let p = self.plastic[addr];
        Fixed(self.pools[p.pool as usize].get(p.element as usize).clamp(i16::MIN as i32, i16::MAX as i32) as i16)
    }

    fn set_weight(&mut self, addr: usize, w: Fixed) {
        let p = self.plastic[addr];
        self.clips += self.pools[p.pool as usize].set_saturating(p.element as usize, w.0 as i32) as u64;
    }

    fn traces(&self, addr: usize) -> [Fixed; 9] {
        self.traces[addr]
    }

    fn set_traces(&mut self, addr: usize, traces: [Fixed; 9]) {
        self.traces[addr] = traces;
    }
}

impl NeuronCore {
    pub fn new(
        addr: CoreAddr,
        config: CoreConfig,
        inference: Program,
        learning: Program,
        params: ParameterBank,
        axon_in: AxonInTable,
        axon_out: AxonOutTable,
    ) -> Result<NeuronCore, CoreFault> {
        let n = config.neuron_count as usize;
        if n > MAX_NEURONS {
            return Err(CoreFault::Config { core: addr, message: format!("{n} neurons exceed {MAX_NEURONS}") });
        }
        let mut plastic = Vec::new();
        let mut plastic_rows = BTreeMap::new();
        for i in 0..axon_in.linkers.len() {
            let b = axon_in.block(i as u32).map_err(|source| CoreFault::Table { core: addr, source })?;
            if !b.plastic {
                continue;
            }
            for sub in 0..b.rows {
                let first = plastic.len();
                axon_in
                    .for_each(i as u32, sub, |r| {
                        plastic.push(PlasticSynapse {
                            axon_in: i as u32,
                            sub,
                            neuron: r.neuron,
                            pool: r.pool,
                            element: r.element,
                        })
                    })
                    .map_err(|source| CoreFault::Table { core: addr, source })?;
                plastic_rows.insert((i as u32, sub), (first, plastic.len()));
            }
        }
        let p = plastic.len();
        Ok(NeuronCore {
            addr,
            inference,
            learning,
            params,
            records: vec![NeuronRecord::default(); n],
            axon_in,
            axon_out,
            traces: vec![[Fixed::ZERO; 9]; p],
            plastic,
            counters: CoreCounters::default(),
            reward: false,
            plastic_rows,
            pre_events: vec![false; p],
            pending: vec![0; n],
            scratch: [Fixed::ZERO; SCRATCH_WORDS],
            config,
        })
    }

    pub fn neuron_count(&self) -> usize {
        self.records.len()
    }

    /// Accumulate one incoming packet into the pending inputs. No program runs.
    pub fn receive_spike(&mut self, axon_in: u32, sub: u16) -> Result<(), CoreFault> {
        let shift = self.config.weight_shift;
        let pending = &mut self.pending;
        let mut sops = 0u64;
        self.axon_in
            .for_each(axon_in, sub, |r| {
                pending[r.neuron as usize] += (r.weight as i64) << shift;
                sops += 1;
            })
            .map_err(|source| CoreFault::Table { core: self.addr, source })?;
        if let Some(&(a, b)) = self.plastic_rows.get(&(axon_in, sub)) {
            self.pre_events[a..b].iter_mut().for_each(|e| *e = true);
        }
        self.counters.packets_in += 1;
        self.counters.sops += sops;
        Ok(())
    }

    /// External stimulus in raw fixed-point units, applied at the next tick.
    pub fn inject(&mut self, neuron: u16, raw: i64) {
        self.pending[neuron as usize] += raw;
    }

    pub fn pending(&self, neuron: u16) -> i64 {
        self.pending[neuron as usize]
    }

    /// Weight of plastic synapse `i` as stored.
    pub fn plastic_weight(&self, i: usize) -> i32 {
        let p = self.plastic[i];
        self.axon_in.pools[p.pool as usize].get(p.element as usize)
    }

    /// Apply pending input, run inference per neuron, run learning per
    /// plastic synapse, then collect outgoing packets.
    pub fn advance_tick(&mut self) -> Result<TickOutput, CoreFault> {
        let core = self.addr;
        let mut alu = Alu::new(self.config.format);
        let target = self.config.input_target.index();
        let p8 = self.params.ip[8];
        for (rec, pend) in self.records.iter_mut().zip(self.pending.iter_mut()) {
            let decayed = alu.mul(p8, rec.s[target]);
            rec.s[target] = alu.add_wide(decayed, *pend);
            *pend = 0;
        }

        let mut out = TickOutput::default();
        let mut fired = vec![false; self.records.len()];
        if self.config.mode.inference() {
            let mut exec = Exec {
                alu: &mut alu,
                memory: &self.params,
                lut: &self.config.exp_lut,
                scratch: &mut self.scratch,
                synapses: None,
                budget: self.config.budget,
            };
            for (n, rec) in self.records.iter_mut().enumerate() {
                let st = exec
                    .run(&self.inference, self.config.inference_entry, rec)
                    .map_err(|fault| CoreFault::Exec { core, neuron: n as u16, fault })?;
                self.counters.instructions += st.instructions as u64;
                self.counters.cycles += st.cycles;
                if st.fired {
                    fired[n] = true;
                    out.fired.push(n as u16);
                }
            }
        }

        if self.config.mode.learning() && !self.plastic.is_empty() {
            let mut view = SynapseView {
                plastic: &self.plastic,
                pools: &mut self.axon_in.pools,
                traces: &mut self.traces,
                clips: 0,
            };
            for i in 0..view.plastic.len() {
                let syn = view.plastic[i];
                let pre = self.pre_events[i];
                let post = fired[syn.neuron as usize];
                if self.config.sweep == LearningSweep::Activated && !pre && !post && !self.reward {
                    continue;
                }
                let mut ctx = self.records[syn.neuron as usize];
                ctx.ls = view.traces[i];
                ctx.ls[X2] = if pre { self.config.format.one() } else { Fixed::ZERO };
                ctx.ls[Y2] = if post { self.config.format.one() } else { Fixed::ZERO };
                ctx.ls[R2] = if self.reward { self.config.format.one() } else { Fixed::ZERO };
                ctx.w = view.weight(i);
                let st = Exec {
                    alu: &mut alu,
                    memory: &self.params,
                    lut: &self.config.exp_lut,
                    scratch: &mut self.scratch,
                    synapses: Some(&mut view),
                    budget: self.config.budget,
                }
                .run(&self.learning, self.config.learning_entry, &mut ctx)
                .map_err(|fault| CoreFault::Exec { core, neuron: syn.neuron, fault })?;
                self.counters.instructions += st.instructions as u64;
                self.counters.cycles += st.cycles;
                self.counters.learning_runs += 1;
                ctx.ls[X2] = Fixed::ZERO;
                ctx.ls[Y2] = Fixed::ZERO;
                ctx.ls[R2] = Fixed::ZERO;
                view.traces[i] = ctx.ls;
                view.set_weight(i, ctx.w);
            }
            self.counters.weight_clips += view.clips;
        }
        self.pre_events.iter_mut().for_each(|e| *e = false);
        self.reward = false;

        for &n in &out.fired {
            self.axon_out
                .for_each_target(n, |target| out.packets.push(Emitted { neuron: n, target }))
                .map_err(|source| CoreFault::Table { core, source })?;
        }
        self.counters.ticks += 1;
        self.counters.spikes += out.fired.len() as u64;
        self.counters.packets_out += out.packets.len() as u64;
        self.counters.saturations += alu.saturations;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::{Geometry, TableBuilder, WeightFormat};

    fn q(x: f64) -> Fixed {
        QFormat::Q8_8.from_f64(x).unwrap()
    }

    fn lif_core(n: u16, tables: Option<(AxonInTable, AxonOutTable)>) -> NeuronCore {
        let mut params = ParameterBank::default();
        params.ip[0] = q(0.5);
        params.ip[1] = q(1.0);
        let cfg = CoreConfig { neuron_count: n, ..CoreConfig::default() };
        let (ai, ao) = tables.unwrap_or_default();
        let mut c = NeuronCore::new(
            CoreAddr::new(1, 0),
            cfg,
            Program::from_text("UPTVM 0xD\nGSPRS 0xD").unwrap(),
            Program::default(),
            params,
            ai,
            ao,
        )
        .unwrap();
        for r in &mut c.records {
            r.s[super::super::state::V_TH] = q(1.0);
        }
        c
    }

    #[test]
    fn zero_neurons_is_inert() {
        let mut c = lif_core(0, None);
        let out = c.advance_tick().unwrap();
        assert!(out.fired.is_empty() && out.packets.is_empty());
    }

    #[test]
    fn subthreshold_decays() {
        let mut c = lif_core(1, None);
        c.records[0].s[0] = q(0.75);
        c.advance_tick().unwrap();
        assert_eq!(c.records[0].s[0], q(0.375));
    }

    #[test]
    fn input_drives_spike_and_reset() {
        let mut c = lif_core(1, None);
        c.records[0].v0 = q(-0.25);
        c.inject(0, q(2.0).0 as i64);
        let out = c.advance_tick().unwrap();
        assert_eq!(out.fired, vec![0]);
        assert_eq!(c.records[0].s[0], q(-0.25));
    }

    #[test]
    fn pending_is_additive() {
        let a = CoreAddr::new(1, 0);
        let g: Geometry = [(a, 8)].into_iter().collect();
        let mut b = TableBuilder::new(g);
        let f = WeightFormat::new(8, true).unwrap();
        b.add_block(a, &[0], a, &[7], &[2], f, false).unwrap();
        b.add_block(a, &[1], a, &[7], &[5], f, false).unwrap();
        let t = b.finish().unwrap();
        let ct = t.cores[&a].clone();
        let mut c = lif_core(8, Some((ct.axon_in, ct.axon_out)));
        let ins = c.axon_out.lookup_targets(0).unwrap()[0];
        let ins2 = c.axon_out.lookup_targets(1).unwrap()[0];
        c.receive_spike(ins.axon_in as u32, ins.sub).unwrap();
        c.receive_spike(ins2.axon_in as u32, ins2.sub).unwrap();
        assert_eq!(c.pending(7), 7);
        assert_eq!(c.counters.sops, 2);
    }

    #[test]
    fn missing_axon_in_faults() {
        let mut c = lif_core(4, None);
        assert!(matches!(c.receive_spike(3, 0), Err(CoreFault::Table { .. })));
    }

    #[test]
    fn runaway_program_faults() {
        let mut c = lif_core(1, None);
        c.inference = Program::from_text("top: CMP FLAG, W\nADDI TR0, 1\nCMP TR0, W\nJMP top").unwrap();
        c.records[0].tr[0] = q(1.0);
        let e = c.advance_tick().unwrap_err();
        assert!(matches!(e, CoreFault::Exec { fault: ExecFault::Runaway { .. }, .. }));
    }

    #[test]
    fn learning_potentiates_on_pre_post_pair() {
        let a = CoreAddr::new(1, 0);
        let g: Geometry = [(a, 2)].into_iter().collect();
        let mut b = TableBuilder::new(g);
        let f = WeightFormat::new(16, true).unwrap();
        b.add_block(a, &[0], a, &[1], &[512], f, true).unwrap();
        let t = b.finish().unwrap().cores[&a].clone();
        let mut c = lif_core(2, Some((t.axon_in, t.axon_out)));
        c.config.mode = CoreMode::Both;
        c.learning = Program::from_text("UPTLS k=0 l=0 m=0 n=0\nUPTWT m=1 n=0b100001000").unwrap();
        c.params.lp[0] = q(0.5);
        c.params.lp[1] = q(0.25);
        c.params.lc[0] = q(1.0);
        c.inject(0, q(2.0).0 as i64);
        let o = c.advance_tick().unwrap();
        assert_eq!(o.fired, vec![0]);
        assert_eq!(c.plastic_weight(0), 512);
        let e = o.packets[0].target;
        c.receive_spike(e.axon_in as u32, e.sub).unwrap();
        let o = c.advance_tick().unwrap();
        assert_eq!(o.fired, vec![1]);
        // x0 = 1, y2 = 1: w += 0.25
        assert_eq!(c.plastic_weight(0), 512 + 64);
        assert_eq!(c.traces[0][X2], Fixed::ZERO);
        assert_eq!(c.traces[0][0], q(1.0));
    }
}
