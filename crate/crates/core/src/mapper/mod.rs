// SPDX-License-Identifier: Apache-2.0

//! Network description to placed core images.
//!
//! Populations are placed greedily in row-major core order, each on cores of
//! its own (parameters are per core), split into chunks of at most
//! `max_neurons_per_core`. Projections are lowered pattern by pattern into
//! compressed tables.

mod image;
mod metrics;
mod netdesc;
mod quantize;

pub use image::{
    stimulus_draws, Container, ContainerError, CoreImage, FabricSpec, Manifest, MemoryDepths, MemoryUsage,
    PopulationEntry, SliceEntry, StimulusImage, CONTAINER_FORMAT,
};
pub use metrics::{report_metrics, CoreMetrics, Metrics};
pub use netdesc::{ConvSpec, DescError, NetworkDescription, Pattern, PoissonInput, Population, Projection, WeightSpec};
pub use quantize::{quantize_params, QuantReport, RangeError};

use crate::connectivity::{ConnError, CoreAddr, Geometry, TableBuilder, TableSet, WeightFormat};
use crate::fixed::{Fixed, QFormat};
use crate::models::{template, ModelTemplate, Slot, TemplateKind};
use crate::neuron::{CoreConfig, CoreMode, LearningSweep, NeuronRecord, ParameterBank, MAX_NEURONS};
use crate::noc::MeshCoord;
use std::cmp::Reverse;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MapError {
    #[error(transparent)]
    Desc(#[from] DescError),
    #[error("population {population}: unknown {kind} template {name:?}")]
    UnknownTemplate { population: String, kind: &'static str, name: String },
    #[error("population {population}: unknown parameter {key:?} (known: {known})")]
    UnknownParam { population: String, key: String, known: String },
    #[error("population {population}: {a} and {b} share one register")]
    SlotConflict { population: String, a: String, b: String },
    #[error("population {population}: {source}")]
    Quantize { population: String, source: RangeError },
    #[error("projection {projection}: {message}")]
    Weight { projection: String, message: String },
    #[error("fabric capacity exceeded: {required} cores required, {available} available")]
    Capacity { required: usize, available: usize },
    #[error("core {core}: {section} memory needs depth {required}, declared {depth}")]
    Depth { core: CoreAddr, section: &'static str, required: u64, depth: u64 },
    #[error(transparent)]
    Conn(#[from] ConnError),
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MapConfig {
    pub fabric: FabricSpec,
    pub depths: MemoryDepths,
    pub max_neurons_per_core: u16,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig { fabric: FabricSpec::default(), depths: MemoryDepths::default(), max_neurons_per_core: MAX_NEURONS as u16 }
    }
}

/// Contiguous run of one population on one core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slice {
    pub population: usize,
    pub first: u32,
    pub count: u16,
    pub core: CoreAddr,
    pub coord: MeshCoord,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Placement {
    pub slices: Vec<Slice>,
    /// Neurons per full slice.
    pub chunk: u32,
}

impl Placement {
    pub fn of(&self, population: usize) -> impl Iterator<Item = &Slice> {
        self.slices.iter().filter(move |s| s.population == population)
    }

    /// Core and local index of a population neuron.
    pub fn locate(&self, population: usize, neuron: u32) -> Option<(CoreAddr, u16)> {
        let s = self.of(population).nth((neuron / self.chunk) as usize)?;
        (neuron < s.first + s.count as u32).then(|| (s.core, (neuron - s.first) as u16))
    }
}

#[derive(Debug, Clone)]
pub struct MapOutput {
    pub config: MapConfig,
    pub placement: Placement,
    pub images: Vec<CoreImage>,
    pub tables: TableSet,
    pub quantization: QuantReport,
}

impl MapOutput {
    pub fn container(&self, net: &NetworkDescription) -> Container {
        let populations = net
            .populations
            .iter()
            .enumerate()
            .map(|(i, p)| PopulationEntry {
                name: p.name.clone(),
                size: p.size,
                slices: self.placement.of(i).map(|s| SliceEntry { core: s.core, first: s.first, count: s.count }).collect(),
            })
            .collect();
        Container {
            manifest: Manifest {
                format: CONTAINER_FORMAT.to_string(),
                version: 1,
                fabric: self.config.fabric,
                depths: self.config.depths,
                populations,
                cores: self.images.len(),
            },
            images: self.images.clone(),
        }
    }
}

/// Per-population values derived from templates and overrides.
#[derive(Debug, Clone)]
pub struct ResolvedPopulation {
    pub model: ModelTemplate,
    pub learning: Option<ModelTemplate>,
    pub format: QFormat,
    pub params: ParameterBank,
    pub record: NeuronRecord,
    pub trace_init: [Fixed; 9],
    pub stimulus_raw: i64,
}

/// Apply template defaults and overrides, then quantize.
pub fn resolve_population(p: &Population) -> Result<(ResolvedPopulation, QuantReport), MapError> {
    let unknown = |kind, name: &str| MapError::UnknownTemplate { population: p.name.clone(), kind, name: name.to_string() };
    let model = template(&p.model).filter(|t| t.kind == TemplateKind::Neuron).ok_or_else(|| unknown("neuron", &p.model))?;
    let learning = match &p.learning {
        None => None,
        Some(l) => {
            let mut t = template(l).filter(|t| t.kind == TemplateKind::Learning).ok_or_else(|| unknown("learning", l))?;
            if p.output_layer {
                if !t.source.contains("LayerO:") {
                    return Err(unknown("output-layer learning", l));
                }
                t.entry = Some("LayerO");
            }
            Some(t)
        }
    };
    let schema: Vec<_> = model.schema.iter().chain(learning.iter().flat_map(|l| l.schema.iter())).collect();
    for key in p.params.keys() {
        if !schema.iter().any(|e| e.key == key) {
            let known: Vec<&str> = schema.iter().map(|e| e.key).collect();
            return Err(MapError::UnknownParam { population: p.name.clone(), key: key.clone(), known: known.join(", ") });
        }
    }
    let mut by_slot: BTreeMap<Slot, &str> = BTreeMap::new();
    for e in &schema {
        if let Some(prev) = by_slot.insert(e.slot, e.key) {
            if prev != e.key {
                return Err(MapError::SlotConflict { population: p.name.clone(), a: prev.to_string(), b: e.key.to_string() });
            }
        }
    }
    let format = model.format;
    let values: Vec<(String, f64)> = schema
        .iter()
        .map(|e| (e.key.to_string(), p.params.get(e.key).copied().unwrap_or(e.default)))
        .collect();
    let (q, report) =
        quantize_params(&values, format).map_err(|source| MapError::Quantize { population: p.name.clone(), source })?;
    let mut r = ResolvedPopulation {
        model: model.clone(),
        learning: learning.clone(),
        format,
        params: ParameterBank::default(),
        record: NeuronRecord::default(),
        trace_init: [Fixed::ZERO; 9],
        stimulus_raw: 0,
    };
    for (e, v) in schema.iter().zip(q) {
        match e.slot {
            Slot::Param(reg) => r.params.set(reg, v),
            Slot::State(reg) => r.record.write(reg, v),
            Slot::Trace(i) => r.trace_init[i as usize] = v,
        }
    }
    if let Some(i) = p.input {
        r.stimulus_raw = (i.weight * (format.frac_bits as f64).exp2()).round_ties_even() as i64;
    }
    Ok((r, report))
}

/// Stored integer weights of a projection in pattern order, plus the format.
fn raw_weights(net: &NetworkDescription, j: &Projection) -> Result<(Vec<i32>, WeightFormat), MapError> {
    let (_, tgt) = net.population(&j.target).expect("validated");
    let err = |message: String| MapError::Weight { projection: j.name.clone(), message };
    let count = match &j.pattern {
        Pattern::AllToAll { .. } => net.population(&j.source).unwrap().1.size as usize * tgt.size as usize,
        Pattern::OneToOne | Pattern::OneToAll { .. } => tgt.size as usize,
        Pattern::Explicit(p) => p.len(),
        Pattern::Conv2d(c) => c.kernel_len(),
    };
    let mut w = match &j.weights {
        WeightSpec::Raw(w) if w.is_empty() => vec![0; count],
        WeightSpec::Raw(w) => w.clone(),
        WeightSpec::Uniform(v) => {
            let f = template(&tgt.model).map(|t| t.format.frac_bits).unwrap_or(8) as i32 - tgt.weight_shift as i32;
            let raw = (v * (f as f64).exp2()).round_ties_even();
            if !raw.is_finite() || raw.abs() > i32::MAX as f64 {
                return Err(err(format!("weight {v} is not representable")));
            }
            vec![raw as i32; count]
        }
    };
    if let Pattern::Explicit(pairs) = &j.pattern {
        for (x, p) in w.iter_mut().zip(pairs) {
            if let Some(o) = p.2 {
                *x = o;
            }
        }
    }
    let format = match j.bits {
        Some(bits) => {
            let f = WeightFormat::new(bits, w.iter().any(|&x| x < 0)).ok_or_else(|| err(format!("bad width {bits}")))?;
            if let Some(x) = w.iter().find(|&&x| !f.fits(x)) {
                return Err(err(format!("weight {x} does not fit {bits} bits")));
            }
            f
        }
        None => WeightFormat::smallest_for(w.iter().copied()).ok_or_else(|| err("weights exceed 16 bits".into()))?,
    };
    Ok((w, format))
}

/// Every synapse of a projection as `(source, target, stored weight)`,
/// expanded directly from the description, plus the weight format.
pub fn expand_projection(
    net: &NetworkDescription,
    j: &Projection,
) -> Result<(Vec<(u32, u32, i32)>, WeightFormat), MapError> {
    let (w, format) = raw_weights(net, j)?;
    let s = net.population(&j.source).unwrap().1.size;
    let t = net.population(&j.target).unwrap().1.size;
    let same = j.source == j.target;
    let mut out = Vec::new();
    match &j.pattern {
        Pattern::AllToAll { allow_self } => {
            for a in 0..s {
                for b in 0..t {
                    if *allow_self || !same || a != b {
                        out.push((a, b, w[(a * t + b) as usize]));
                    }
                }
            }
        }
        Pattern::OneToOne => out.extend((0..s).map(|a| (a, a, w[a as usize]))),
        Pattern::OneToAll { source_neuron } => out.extend((0..t).map(|b| (*source_neuron, b, w[b as usize]))),
        Pattern::Explicit(pairs) => out.extend(pairs.iter().zip(&w).map(|(p, &x)| (p.0, p.1, x))),
        Pattern::Conv2d(c) => {
            for oy in 0..c.out_h() {
                for ox in 0..c.out_w() {
                    for co in 0..c.out_c {
                        for ky in 0..c.kernel {
                            for kx in 0..c.kernel {
                                for ci in 0..c.in_c {
                                    let (iy, ix) = (oy * c.stride + ky, ox * c.stride + kx);
                                    let src = (iy * c.in_w + ix) * c.in_c + ci;
                                    let dst = (oy * c.out_w() + ox) * c.out_c + co;
                                    out.push((src, dst, w[c.weight_index(co, ci, ky, kx)]));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok((out, format))
}

fn place(net: &NetworkDescription, config: &MapConfig) -> Result<Placement, MapError> {
    let chunk = config.max_neurons_per_core.clamp(1, MAX_NEURONS as u16) as u32;
    let fabric = config.fabric.build();
    let nodes = fabric.core_nodes();
    let required: usize = net.populations.iter().map(|p| p.size.div_ceil(chunk) as usize).sum();
    if required > nodes.len() {
        return Err(MapError::Capacity { required, available: nodes.len() });
    }
    let mut it = nodes.into_iter();
    let mut slices = Vec::new();
    for (i, p) in net.populations.iter().enumerate() {
        let mut first = 0;
        while first < p.size {
            let count = chunk.min(p.size - first);
            let core = it.next().expect("capacity checked");
            slices.push(Slice {
                population: i,
                first,
                count: count as u16,
                core,
                coord: fabric.locate(core).expect("placed on fabric"),
            });
            first += count;
        }
    }
    Ok(Placement { slices, chunk })
}

fn lower(
    b: &mut TableBuilder,
    net: &NetworkDescription,
    placement: &Placement,
    j: &Projection,
) -> Result<(), MapError> {
    let (si, _) = net.population(&j.source).unwrap();
    let (ti, tp) = net.population(&j.target).unwrap();
    let (w, format) = raw_weights(net, j)?;
    let t_size = tp.size;
    let src_slices: Vec<Slice> = placement.of(si).copied().collect();
    let dst_slices: Vec<Slice> = placement.of(ti).copied().collect();
    let plastic = j.plastic;
    match &j.pattern {
        Pattern::AllToAll { allow_self } => {
            let skip_self = !allow_self && si == ti;
            for a in &src_slices {
                for d in &dst_slices {
                    let sources: Vec<u16> = (0..a.count).collect();
                    let row = |i: u16| -> Vec<i32> {
                        let g = (a.first + i as u32) * t_size + d.first;
                        w[g as usize..(g + d.count as u32) as usize].to_vec()
                    };
                    if skip_self && a.core == d.core {
                        for &i in &sources {
                            let targets: Vec<u16> = (0..d.count).filter(|&x| x != i).collect();
                            if targets.is_empty() {
                                continue;
                            }
                            let full = row(i);
                            let ws: Vec<i32> = targets.iter().map(|&x| full[x as usize]).collect();
                            b.add_block(a.core, &[i], d.core, &targets, &ws, format, plastic)?;
                        }
                    } else {
                        let targets: Vec<u16> = (0..d.count).collect();
                        let ws: Vec<i32> = sources.iter().flat_map(|&i| row(i)).collect();
                        b.add_block(a.core, &sources, d.core, &targets, &ws, format, plastic)?;
                    }
                }
            }
        }
        Pattern::OneToOne => {
            for a in &src_slices {
                for d in &dst_slices {
                    let lo = a.first.max(d.first);
                    let hi = (a.first + a.count as u32).min(d.first + d.count as u32);
                    if lo >= hi {
                        continue;
                    }
                    let sources: Vec<u16> = (lo..hi).map(|g| (g - a.first) as u16).collect();
                    let ws = &w[lo as usize..hi as usize];
                    let start = (lo - d.first) as u16;
                    if plastic {
                        for (k, &s) in sources.iter().enumerate() {
                            b.add_block(a.core, &[s], d.core, &[start + k as u16], &ws[k..k + 1], format, true)?;
                        }
                    } else {
                        b.add_diagonal(a.core, &sources, d.core, start, ws, format)?;
                    }
                }
            }
        }
        Pattern::OneToAll { source_neuron } => {
            let (core, local) = placement.locate(si, *source_neuron).expect("validated");
            for d in &dst_slices {
                let targets: Vec<u16> = (0..d.count).collect();
                let ws = &w[d.first as usize..d.first as usize + d.count as usize];
                b.add_block(core, &[local], d.core, &targets, ws, format, plastic)?;
            }
        }
        Pattern::Explicit(pairs) => {
            let mut groups: BTreeMap<(u32, CoreAddr), Vec<(u16, i32)>> = BTreeMap::new();
            for (p, &x) in pairs.iter().zip(&w) {
                let (dc, dl) = placement.locate(ti, p.1).expect("validated");
                groups.entry((p.0, dc)).or_default().push((dl, x));
            }
            for ((s, dc), mut list) in groups {
                list.sort();
                let (sc, sl) = placement.locate(si, s).expect("validated");
                let targets: Vec<u16> = list.iter().map(|e| e.0).collect();
                let ws: Vec<i32> = list.iter().map(|e| e.1).collect();
                b.add_block(sc, &[sl], dc, &targets, &ws, format, plastic)?;
            }
        }
        Pattern::Conv2d(c) => {
            // One block per (input neuron, kernel row): its targets are one
            // output row, so its weights are a contiguous slice of that
            // kernel row and shared with every other input using it.
            struct ConvBlock {
                dst: CoreAddr,
                src: (CoreAddr, u16),
                ky: u32,
                targets: Vec<u16>,
                weights: Vec<i32>,
            }
            let mut blocks = Vec::new();
            for iy in 0..c.in_h {
                for ix in 0..c.in_w {
                    for ci in 0..c.in_c {
                        let src_g = (iy * c.in_w + ix) * c.in_c + ci;
                        let src = placement.locate(si, src_g).expect("validated");
                        for ky in 0..c.kernel {
                            if iy < ky || (iy - ky) % c.stride != 0 || (iy - ky) / c.stride >= c.out_h() {
                                continue;
                            }
                            let oy = (iy - ky) / c.stride;
                            let mut by_core: BTreeMap<CoreAddr, (Vec<u16>, Vec<i32>)> = BTreeMap::new();
                            for ox in 0..c.out_w() {
                                let Some(kx) = ix.checked_sub(ox * c.stride).filter(|&k| k < c.kernel) else { continue };
                                for co in 0..c.out_c {
                                    let dst_g = (oy * c.out_w() + ox) * c.out_c + co;
                                    let (dc, dl) = placement.locate(ti, dst_g).expect("validated");
                                    let e = by_core.entry(dc).or_default();
                                    e.0.push(dl);
                                    e.1.push(w[c.weight_index(co, ci, ky, kx)]);
                                }
                            }
                            for (dst, (targets, weights)) in by_core {
                                blocks.push(ConvBlock { dst, src, ky, targets, weights });
                            }
                        }
                    }
                }
            }
            // longest runs first so shorter ones find them already stored
            blocks.sort_by_key(|x| (x.dst, Reverse(x.targets.len()), x.src, x.ky));
            for x in blocks {
                b.add_block(x.src.0, &[x.src.1], x.dst, &x.targets, &x.weights, format, plastic)?;
            }
        }
    }
    Ok(())
}

/// Place, lower and quantize. A pure function of its inputs.
pub fn map_network(net: &NetworkDescription, config: &MapConfig) -> Result<MapOutput, MapError> {
    net.validate()?;
    let placement = place(net, config)?;
    let mut quantization = QuantReport::default();
    let mut resolved = Vec::new();
    for p in &net.populations {
        let (r, q) = resolve_population(p)?;
        quantization.merge(q);
        resolved.push(r);
    }
    let geometry: Geometry = placement.slices.iter().map(|s| (s.core, s.count)).collect();
    let mut b = TableBuilder::new(geometry).with_axon_in_depth(config.depths.axon_in_entries);
    for j in &net.projections {
        lower(&mut b, net, &placement, j)?;
    }
    let tables = b.finish().map_err(|e| match e {
        ConnError::AxonInDepth { core, required, depth } => {
            MapError::Depth { core, section: "axon-in", required: required as u64, depth: depth as u64 }
        }
        e => MapError::Conn(e),
    })?;
    let mut images = Vec::new();
    for s in &placement.slices {
        let pop = &net.populations[s.population];
        let r = &resolved[s.population];
        let t = &tables.cores[&s.core];
        let learning = r.learning.as_ref();
        let config_core = CoreConfig {
            neuron_count: s.count,
            mode: if learning.is_some() { CoreMode::Both } else { CoreMode::Inference },
            format: r.format,
            input_target: r.model.input_target,
            weight_shift: pop.weight_shift,
            inference_entry: r.model.entry_point(),
            learning_entry: learning.map(|l| l.entry_point()).unwrap_or(0),
            sweep: if pop.sparse_learning { LearningSweep::Activated } else { LearningSweep::All },
            ..CoreConfig::default()
        };
        let image = CoreImage {
            addr: s.core,
            coord: s.coord,
            population: pop.name.clone(),
            first_neuron: s.first,
            config: config_core,
            inference: r.model.program().words,
            learning: learning.map(|l| l.program().words).unwrap_or_default(),
            params: r.params,
            state: vec![r.record; s.count as usize],
            trace_init: r.trace_init,
            axon_in: t.axon_in.clone(),
            axon_out: t.axon_out.clone(),
            stimulus: pop.input.map(|i| StimulusImage {
                stream: s.population as u64,
                population_size: pop.size,
                first_neuron: s.first,
                rate: i.rate,
                raw: r.stimulus_raw,
            }),
        };
        if let Some((section, required, depth)) = image.check_depths(&config.depths) {
            return Err(MapError::Depth { core: s.core, section, required, depth });
        }
        images.push(image);
    }
    Ok(MapOutput { config: config.clone(), placement, images, tables, quantization })
}
