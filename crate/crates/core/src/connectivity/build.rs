// SPDX-License-Identifier: Apache-2.0

use super::tables::{AxonInLinker, AxonInTable, AxonOutTable, Case, InBlock, OutEntry, OutLinker, Shape};
use super::weights::{WeightArray, WeightFormat};
use super::{ConnError, Connection, CoreAddr, DenseMatrix, Geometry, AXON_IN_INDEX_BITS, SUB_INDEX_BITS};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// `(index bits, weight bits)` of one block stored under `case`.
/// `s` rows, `k` targets per row, `w` weight width.
pub fn case_bits(case: Case, s: usize, k: usize, w: u8) -> (u64, u64) {
    let (s, k, w) = (s as u64, k as u64, w as u64);
    match case {
        Case::All => (16, s * k * w),
        Case::Range => (40, s * k * w),
        Case::Diagonal => (40, s * w),
        Case::Indexed => (28 + 12 * k, s * k * w),
        Case::Shared => (28, w),
        Case::Explicit => (12 + 12 * k, k * w),
    }
}

fn total(case: Case, s: usize, k: usize, w: u8) -> u64 {
    let (a, b) = case_bits(case, s, k, w);
    a + b
}

fn contiguous(targets: &[u16]) -> bool {
    targets.windows(2).all(|p| p[1] == p[0] + 1)
}

/// Cases that can represent an `s x k` block, in preference order, with
/// their total bit cost.
pub fn applicable_cases(targets: &[u16], core_neurons: u16, weights: &[i32], s: usize, w: u8) -> Vec<(Case, u64)> {
    let k = targets.len();
    let mut v = Vec::new();
    if k == core_neurons as usize && targets.iter().enumerate().all(|(i, &t)| t as usize == i) {
        v.push(Case::All);
    }
    if contiguous(targets) {
        v.push(Case::Range);
    }
    v.push(Case::Indexed);
    if k == 1 && weights.windows(2).all(|p| p[0] == p[1]) {
        v.push(Case::Shared);
    }
    if s == 1 {
        v.push(Case::Explicit);
    }
    v.into_iter().map(|c| (c, total(c, s, k, w))).collect()
}

/// First minimal-cost case in preference order.
fn choose(cands: &[(Case, u64)]) -> Case {
    let best = cands.iter().map(|c| c.1).min().expect("indexed case always applies");
    cands.iter().find(|c| c.1 == best).unwrap().0
}

/// Metadata of one emitted block (kept for accounting and checks).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub src_core: CoreAddr,
    pub dst_core: CoreAddr,
    pub sources: Vec<u16>,
    pub targets: Vec<u16>,
    pub case: Case,
    pub format: WeightFormat,
    pub axon_in: u32,
    pub synapses: usize,
    pub plastic: bool,
}

impl BlockInfo {
    pub fn bits(&self) -> (u64, u64) {
        case_bits(self.case, self.sources.len(), self.targets.len(), self.format.bits)
    }
}

#[derive(Debug, Clone)]
struct Pending {
    src_core: CoreAddr,
    dst_core: CoreAddr,
    sources: Vec<u16>,
    targets: Vec<u16>,
    shape: Shape,
    stored: Vec<i32>,
    format: WeightFormat,
    plastic: bool,
    synapses: usize,
}

/// Per-core compressed tables.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoreTables {
    pub neurons: u16,
    pub axon_in: AxonInTable,
    pub axon_out: AxonOutTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TableSet {
    pub cores: BTreeMap<CoreAddr, CoreTables>,
    pub blocks: Vec<BlockInfo>,
}

impl TableSet {
    /// Expand back to an explicit connection map.
    pub fn expand_dense(&self) -> Result<DenseMatrix, ConnError> {
        let mut m = DenseMatrix::new();
        for (&src_core, t) in &self.cores {
            for n in 0..t.neurons {
                let targets = t.axon_out.lookup_targets(n)?;
                for tg in targets {
                    let dst_core = CoreAddr::new(src_core.x + tg.dx as i32, src_core.y + tg.dy as i32);
                    let dt = self.cores.get(&dst_core).ok_or(ConnError::UnknownCore(dst_core))?;
                    dt.axon_in.for_each(tg.axon_in as u32, tg.sub, |r| {
                        *m.entry((src_core, n, dst_core, r.neuron)).or_insert(0) += r.weight;
                    })?;
                }
            }
        }
        Ok(m)
    }
}

/// Stored runs up to this length also serve any of their contiguous sub-runs.
const SHARED_SUBRUN_MAX: usize = 64;

/// Incremental table construction from explicit blocks.
pub struct TableBuilder {
    geometry: Geometry,
    axon_in_depth: usize,
    pending: Vec<Pending>,
}

impl TableBuilder {
    pub fn new(geometry: Geometry) -> TableBuilder {
        TableBuilder { geometry, axon_in_depth: 1 << AXON_IN_INDEX_BITS, pending: Vec::new() }
    }

    /// Per-core axon-in depth (D1).
    pub fn with_axon_in_depth(mut self, depth: usize) -> TableBuilder {
        self.axon_in_depth = depth.min(1 << AXON_IN_INDEX_BITS);
        self
    }

    fn check_neurons(&self, core: CoreAddr, ids: &[u16]) -> Result<(), ConnError> {
        let count = *self.geometry.get(&core).ok_or(ConnError::UnknownCore(core))?;
        match ids.iter().find(|&&n| n >= count) {
            Some(&neuron) => Err(ConnError::NeuronRange { core, neuron, count }),
            None => Ok(()),
        }
    }

    fn check_weights(weights: &[i32], format: WeightFormat) -> Result<(), ConnError> {
        match weights.iter().find(|&&w| !format.fits(w)) {
            Some(&weight) => Err(ConnError::WeightOverflow { weight, bits: format.bits }),
            None => Ok(()),
        }
    }

    /// Add an `S x K` block: every source in `sources` reaches every neuron of
    /// `targets` (strictly ascending) with row-major `weights`. The row of a
    /// source is its position in `sources`. Plastic blocks are split into one
    /// explicit run per source so each synapse owns its weight.
    #[allow(clippy::too_many_arguments)]
    pub fn add_block(
        &mut self,
        src_core: CoreAddr,
        sources: &[u16],
        dst_core: CoreAddr,
        targets: &[u16],
        weights: &[i32],
        format: WeightFormat,
        plastic: bool,
    ) -> Result<(), ConnError> {
        let (s, k) = (sources.len(), targets.len());
        if s == 0 || k == 0 || weights.len() != s * k {
            return Err(ConnError::Invalid(format!("{s}x{k} block with {} weights", weights.len())));
        }
        if !targets.windows(2).all(|p| p[0] < p[1]) {
            return Err(ConnError::Invalid("targets must be strictly ascending".into()));
        }
        if s > 1 << SUB_INDEX_BITS {
            return Err(ConnError::Invalid(format!("{s} rows exceed the sub-index range")));
        }
        self.check_neurons(src_core, sources)?;
        self.check_neurons(dst_core, targets)?;
        Self::check_weights(weights, format)?;
        if plastic {
            for (r, &src) in sources.iter().enumerate() {
                self.pending.push(Pending {
                    src_core,
                    dst_core,
                    sources: vec![src],
                    targets: targets.to_vec(),
                    shape: Shape::Explicit { targets: targets.to_vec() },
                    stored: weights[r * k..(r + 1) * k].to_vec(),
                    format,
                    plastic: true,
                    synapses: k,
                });
            }
            return Ok(());
        }
        let n = self.geometry[&dst_core];
        let case = choose(&applicable_cases(targets, n, weights, s, format.bits));
        let (shape, stored) = match case {
            Case::All => (Shape::All { n }, weights.to_vec()),
            Case::Range => (Shape::Range { start: targets[0], count: k as u16 }, weights.to_vec()),
            Case::Indexed => (Shape::Indexed { targets: targets.to_vec() }, weights.to_vec()),
            Case::Shared => (Shape::Shared { target: targets[0] }, vec![weights[0]]),
            Case::Explicit => (Shape::Explicit { targets: targets.to_vec() }, weights.to_vec()),
            Case::Diagonal => unreachable!(),
        };
        self.pending.push(Pending {
            src_core,
            dst_core,
            sources: sources.to_vec(),
            targets: targets.to_vec(),
            shape,
            stored,
            format,
            plastic: false,
            synapses: s * k,
        });
        Ok(())
    }

    /// Add a one-to-one run: `sources[r]` reaches `start + r` with `weights[r]`.
    pub fn add_diagonal(
        &mut self,
        src_core: CoreAddr,
        sources: &[u16],
        dst_core: CoreAddr,
        start: u16,
        weights: &[i32],
        format: WeightFormat,
    ) -> Result<(), ConnError> {
        let s = sources.len();
        if s == 0 || weights.len() != s || s > 1 << SUB_INDEX_BITS {
            return Err(ConnError::Invalid(format!("diagonal of {s} rows with {} weights", weights.len())));
        }
        let targets: Vec<u16> = (0..s).map(|r| start + r as u16).collect();
        self.check_neurons(src_core, sources)?;
        self.check_neurons(dst_core, &targets)?;
        Self::check_weights(weights, format)?;
        self.pending.push(Pending {
            src_core,
            dst_core,
            sources: sources.to_vec(),
            targets,
            shape: Shape::Diagonal { start, count: s as u16 },
            stored: weights.to_vec(),
            format,
            plastic: false,
            synapses: s,
        });
        Ok(())
    }

    pub fn finish(self) -> Result<TableSet, ConnError> {
        let mut set = TableSet::default();
        for (&core, &n) in &self.geometry {
            set.cores.insert(
                core,
                CoreTables {
                    neurons: n,
                    axon_out: AxonOutTable { linkers: vec![None; n as usize], entries: Vec::new() },
                    ..Default::default()
                },
            );
        }
        // arrival side
        let mut dedup: HashMap<(CoreAddr, u16, Vec<i32>), u32> = HashMap::new();
        let mut routes: BTreeMap<(CoreAddr, u16), Vec<(CoreAddr, u32, u16)>> = BTreeMap::new();
        for p in self.pending {
            let table = &mut set.cores.get_mut(&p.dst_core).unwrap().axon_in;
            let axon_in = table.linkers.len();
            if axon_in >= self.axon_in_depth {
                return Err(ConnError::AxonInDepth { core: p.dst_core, required: axon_in + 1, depth: self.axon_in_depth });
            }
            let pool = match table.pools.iter().position(|a| a.format == p.format) {
                Some(i) => i as u16,
                None => {
                    table.pools.push(WeightArray::new(p.format));
                    (table.pools.len() - 1) as u16
                }
            };
            let key = (p.dst_core, pool, p.stored);
            let offset = match dedup.get(&key) {
                Some(&off) if !p.plastic => off,
                _ => {
                    let arr = &mut table.pools[pool as usize];
                    let off = arr.len() as u32;
                    for &w in &key.2 {
                        arr.push(w).expect("weights validated");
                    }
                    if !p.plastic {
                        let (core, pool, run) = key;
                        if run.len() <= SHARED_SUBRUN_MAX {
                            for a in 0..run.len() {
                                for b in a + 1..=run.len() {
                                    dedup.entry((core, pool, run[a..b].to_vec())).or_insert(off + a as u32);
                                }
                            }
                        } else {
                            dedup.insert((core, pool, run), off);
                        }
                    }
                    off
                }
            };
            let rows = p.sources.len() as u16;
            table.blocks.push(InBlock { shape: p.shape.clone(), rows, pool, offset, plastic: p.plastic });
            table.linkers.push(AxonInLinker { info_address: (table.blocks.len() - 1) as u32, case: p.shape.case() });
            for (r, &src) in p.sources.iter().enumerate() {
                routes.entry((p.src_core, src)).or_default().push((p.dst_core, axon_in as u32, r as u16));
            }
            set.blocks.push(BlockInfo {
                src_core: p.src_core,
                dst_core: p.dst_core,
                sources: p.sources,
                targets: p.targets,
                case: p.shape.case(),
                format: p.format,
                axon_in: axon_in as u32,
                synapses: p.synapses,
                plastic: p.plastic,
            });
        }
        // departure side
        let mut runs: HashMap<(CoreAddr, Vec<OutEntry>), u32> = HashMap::new();
        for ((src_core, src), mut list) in routes {
            list.sort();
            let base = list.iter().map(|e| e.2).min().unwrap();
            let mut entries = Vec::with_capacity(list.len());
            for (i, &(dst, axon_in, row)) in list.iter().enumerate() {
                let (dx, dy) = (dst.x - src_core.x, dst.y - src_core.y);
                let (Ok(dx), Ok(dy)) = (i8::try_from(dx), i8::try_from(dy)) else {
                    return Err(ConnError::OffsetRange { src: src_core, dst });
                };
                entries.push(OutEntry { dx, dy, axon_in: axon_in as u16, sub: row - base, last: i + 1 == list.len() });
            }
            let out = &mut set.cores.get_mut(&src_core).unwrap().axon_out;
            let address = match runs.get(&(src_core, entries.clone())) {
                Some(&a) => a,
                None => {
                    let a = out.entries.len() as u32;
                    out.entries.extend_from_slice(&entries);
                    runs.insert((src_core, entries), a);
                    a
                }
            };
            out.linkers[src as usize] = Some(OutLinker { info_address: address, sub: base });
        }
        Ok(set)
    }
}

/// Greedy compression of an explicit connection list.
///
/// Per (source core, target core) pair, sources with identical target sets
/// form one block; remaining single-target sources whose targets advance by
/// one are merged into one-to-one runs. When `format` is `None` the narrowest
/// format holding every weight is used.
pub fn build_tables(
    connections: &[Connection],
    geometry: &Geometry,
    format: Option<WeightFormat>,
) -> Result<TableSet, ConnError> {
    let format = match format {
        Some(f) => f,
        None => WeightFormat::smallest_for(connections.iter().map(|c| c.weight))
            .ok_or(ConnError::WeightOverflow { weight: connections.iter().map(|c| c.weight.abs()).max().unwrap_or(0), bits: 16 })?,
    };
    type Rows = BTreeMap<u16, BTreeMap<u16, i32>>;
    let mut pairs: BTreeMap<(CoreAddr, CoreAddr), Rows> = BTreeMap::new();
    for c in connections {
        let row = pairs.entry((c.src_core, c.dst_core)).or_default().entry(c.src).or_default();
        if let Some(&old) = row.get(&c.dst) {
            if old != c.weight {
                return Err(ConnError::Conflict { src_core: c.src_core, src: c.src, dst_core: c.dst_core, dst: c.dst });
            }
        }
        row.insert(c.dst, c.weight);
    }
    let mut b = TableBuilder::new(geometry.clone());
    for ((sc, dc), rows) in pairs {
        let mut groups: BTreeMap<Vec<u16>, Vec<u16>> = BTreeMap::new();
        for (&src, row) in &rows {
            groups.entry(row.keys().copied().collect()).or_default().push(src);
        }
        let mut singles: Vec<(u16, u16, i32)> = Vec::new();
        let mut blocks: Vec<(u16, Vec<u16>, Vec<u16>)> = Vec::new();
        for (targets, sources) in groups {
            if targets.len() == 1 && sources.len() == 1 {
                let s = sources[0];
                singles.push((s, targets[0], rows[&s][&targets[0]]));
            } else {
                blocks.push((sources[0], sources, targets));
            }
        }
        singles.sort();
        let mut diagonals: Vec<(u16, Vec<(u16, u16, i32)>)> = Vec::new();
        for s in singles {
            match diagonals.last_mut() {
                Some((_, run)) if run.last().unwrap().1 as u32 + 1 == s.1 as u32 => run.push(s),
                _ => diagonals.push((s.0, vec![s])),
            }
        }
        enum Item {
            Block(Vec<u16>, Vec<u16>),
            Diag(Vec<(u16, u16, i32)>),
        }
        let mut items: Vec<(u16, Item)> = blocks.into_iter().map(|(k, s, t)| (k, Item::Block(s, t))).collect();
        items.extend(diagonals.into_iter().map(|(k, run)| (k, Item::Diag(run))));
        items.sort_by_key(|(k, _)| *k);
        for (_, item) in items {
            match item {
                Item::Block(sources, targets) => {
                    let weights: Vec<i32> =
                        sources.iter().flat_map(|s| targets.iter().map(|t| rows[s][t]).collect::<Vec<_>>()).collect();
                    b.add_block(sc, &sources, dc, &targets, &weights, format, false)?;
                }
                Item::Diag(run) if run.len() == 1 => {
                    let (s, t, w) = run[0];
                    b.add_block(sc, &[s], dc, &[t], &[w], format, false)?;
                }
                Item::Diag(run) => {
                    let sources: Vec<u16> = run.iter().map(|r| r.0).collect();
                    let weights: Vec<i32> = run.iter().map(|r| r.2).collect();
                    b.add_diagonal(sc, &sources, dc, run[0].1, &weights, format)?;
                }
            }
        }
    }
    b.finish()
}
