// SPDX-License-Identifier: Apache-2.0

//! Single-process simulation straight from a network description: dense
//! per-population state and an explicit synapse list, no tables and no mesh.
//! Programs run through the same interpreter as the cores; synapse-addressed
//! instructions are not available here.

use super::{SimError, Spike};
use crate::connectivity::WeightFormat;
use crate::fixed::{Alu, Fixed};
use crate::mapper::{expand_projection, resolve_population, stimulus_draws, NetworkDescription, ResolvedPopulation};
use crate::neuron::{Exec, InputTarget, NeuronRecord, Program, DEFAULT_BUDGET, H, I, R2, SCRATCH_WORDS, X2, Y2};

struct Pop {
    r: ResolvedPopulation,
    inference: Program,
    learning: Program,
    records: Vec<NeuronRecord>,
    pending: Vec<i64>,
    scratch: [Fixed; SCRATCH_WORDS],
    shift: u8,
    sparse: bool,
    reward: bool,
    input: Option<(f64, u32)>,
}

struct Synapse {
    dst_pop: usize,
    dst: u32,
    weight: i32,
    format: WeightFormat,
    plastic: bool,
    traces: [Fixed; 9],
    pre: bool,
}

pub struct ReferenceSim {
    pops: Vec<Pop>,
    synapses: Vec<Synapse>,
    /// Outgoing synapse indices per population and neuron.
    out: Vec<Vec<Vec<usize>>>,
    seed: u64,
    tick: u64,
}

impl ReferenceSim {
    pub fn new(net: &NetworkDescription, seed: u64) -> Result<ReferenceSim, SimError> {
        let setup = |e: crate::mapper::MapError| SimError::Setup(e.to_string());
        let mut pops = Vec::new();
        for p in &net.populations {
            let (r, _) = resolve_population(p).map_err(setup)?;
            pops.push(Pop {
                inference: r.model.program(),
                learning: r.learning.as_ref().map(|l| l.program()).unwrap_or_default(),
                records: vec![r.record; p.size as usize],
                pending: vec![0; p.size as usize],
                scratch: [Fixed::ZERO; SCRATCH_WORDS],
                shift: p.weight_shift,
                sparse: p.sparse_learning,
                reward: false,
                input: p.input.map(|i| (i.rate, p.size)),
                r,
            });
        }
        let mut synapses = Vec::new();
        let mut out: Vec<Vec<Vec<usize>>> = net.populations.iter().map(|p| vec![Vec::new(); p.size as usize]).collect();
        for j in &net.projections {
            let (si, _) = net.population(&j.source).unwrap();
            let (ti, _) = net.population(&j.target).unwrap();
            let (list, format) = expand_projection(net, j).map_err(setup)?;
            for (s, t, w) in list {
                out[si][s as usize].push(synapses.len());
                synapses.push(Synapse {
                    dst_pop: ti,
                    dst: t,
                    weight: w,
                    format,
                    plastic: j.plastic,
                    traces: pops[ti].r.trace_init,
                    pre: false,
                });
            }
        }
        Ok(ReferenceSim { pops, synapses, out, seed, tick: 0 })
    }

    pub fn inject(&mut self, population: usize, neuron: u32, raw: i64) {
        self.pops[population].pending[neuron as usize] += raw;
    }

    pub fn set_reward(&mut self, population: usize) {
        self.pops[population].reward = true;
    }

    pub fn records(&self, population: usize) -> &[NeuronRecord] {
        &self.pops[population].records
    }

    /// Current stored weights in synapse-list order.
    pub fn weights(&self) -> Vec<i32> {
        self.synapses.iter().map(|s| s.weight).collect()
    }

    pub fn step(&mut self) -> Result<Vec<Spike>, SimError> {
        let tick = self.tick;
        let fault = |e: crate::neuron::ExecFault| SimError::Setup(format!("reference tick {tick}: {e}"));
        for (pi, p) in self.pops.iter_mut().enumerate() {
            if let Some((rate, size)) = p.input {
                for (j, d) in stimulus_draws(self.seed, pi as u64, size, tick, 0, size, rate).into_iter().enumerate() {
                    if d {
                        p.pending[j] += p.r.stimulus_raw;
                    }
                }
            }
        }
        let mut fired: Vec<Vec<bool>> = Vec::with_capacity(self.pops.len());
        for p in &mut self.pops {
            let mut alu = Alu::new(p.r.format);
            let target = match p.r.model.input_target {
                InputTarget::H => H,
                InputTarget::I => I,
            };
            for (rec, pend) in p.records.iter_mut().zip(p.pending.iter_mut()) {
                let decayed = alu.mul(p.r.params.ip[8], rec.s[target]);
                rec.s[target] = alu.add_wide(decayed, *pend);
                *pend = 0;
            }
            let lut = crate::neuron::ExpLut::default();
            let mut exec = Exec {
                alu: &mut alu,
                memory: &p.r.params,
                lut: &lut,
                scratch: &mut p.scratch,
                synapses: None,
                budget: DEFAULT_BUDGET,
            };
            let entry = p.r.model.entry_point();
            let mut f = vec![false; p.records.len()];
            for (n, rec) in p.records.iter_mut().enumerate() {
                f[n] = exec.run(&p.inference, entry, rec).map_err(fault)?.fired;
            }
            fired.push(f);
        }

        for s in &mut self.synapses {
            let p = &mut self.pops[s.dst_pop];
            if !s.plastic || p.r.learning.is_none() {
                continue;
            }
            let post = fired[s.dst_pop][s.dst as usize];
            if p.sparse && !s.pre && !post && !p.reward {
                continue;
            }
            let one = p.r.format.one();
            let flag = |b: bool| if b { one } else { Fixed::ZERO };
            let mut ctx = p.records[s.dst as usize];
            ctx.ls = s.traces;
            ctx.ls[X2] = flag(s.pre);
            ctx.ls[Y2] = flag(post);
            ctx.ls[R2] = flag(p.reward);
            ctx.w = Fixed(s.weight.clamp(i16::MIN as i32, i16::MAX as i32) as i16);
            let mut alu = Alu::new(p.r.format);
            let lut = crate::neuron::ExpLut::default();
            let entry = p.r.learning.as_ref().unwrap().entry_point();
            Exec { alu: &mut alu, memory: &p.r.params, lut: &lut, scratch: &mut p.scratch, synapses: None, budget: DEFAULT_BUDGET }
                .run(&p.learning, entry, &mut ctx)
                .map_err(fault)?;
            ctx.ls[X2] = Fixed::ZERO;
            ctx.ls[Y2] = Fixed::ZERO;
            ctx.ls[R2] = Fixed::ZERO;
            s.traces = ctx.ls;
            let (lo, hi) = s.format.range();
            s.weight = (ctx.w.0 as i32).clamp(lo, hi);
        }
        self.synapses.iter_mut().for_each(|s| s.pre = false);
        self.pops.iter_mut().for_each(|p| p.reward = false);

        let mut spikes = Vec::new();
        for (pi, f) in fired.iter().enumerate() {
            for (n, _) in f.iter().enumerate().filter(|x| *x.1) {
                spikes.push(Spike { tick, population: pi as u32, neuron: n as u32 });
                for &si in &self.out[pi][n] {
                    let s = &mut self.synapses[si];
                    let shift = self.pops[s.dst_pop].shift;
                    self.pops[s.dst_pop].pending[s.dst as usize] += (s.weight as i64) << shift;
                    s.pre = true;
                }
            }
        }
        self.tick += 1;
        Ok(spikes)
    }

    pub fn run(&mut self, ticks: u64) -> Result<Vec<Spike>, SimError> {
        let mut all = Vec::new();
        for _ in 0..ticks {
            all.extend(self.step()?);
        }
        Ok(all)
    }
}
