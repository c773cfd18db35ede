// SPDX-License-Identifier: Apache-2.0

use super::build::{case_bits, TableSet};
use super::CoreAddr;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const AXON_OUT_LINKER_BITS: u64 = 28;
pub const AXON_OUT_ENTRY_BITS: u64 = 42;
pub const AXON_IN_LINKER_BITS: u64 = 19;
/// Neuron index width used by the baselines.
pub const INDEX_BITS: u64 = 12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Footprint {
    pub axon_out_bits: u64,
    pub axon_in_bits: u64,
    pub weight_bits: u64,
}

impl Footprint {
    pub fn total(&self) -> u64 {
        self.axon_out_bits + self.axon_in_bits + self.weight_bits
    }

    fn add(&mut self, o: &Footprint) {
        self.axon_out_bits += o.axon_out_bits;
        self.axon_in_bits += o.axon_in_bits;
        self.weight_bits += o.weight_bits;
    }
}

/// The same topology stored under conventional schemes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Baselines {
    /// Distinct incoming sources x core neurons x width, per target core.
    pub crossbar_bits: u64,
    /// One (index, weight) pair per synapse.
    pub normal_index_bits: u64,
    /// Weight part of the normal-index scheme.
    pub normal_index_weight_bits: u64,
    /// One header per source group plus per-target indexes and weights.
    pub population_index_bits: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootprintReport {
    pub per_core: BTreeMap<CoreAddr, Footprint>,
    pub total: Footprint,
    pub baselines: Baselines,
    pub axon_in_linkers: u64,
    pub axon_in_index_entries: u64,
    pub synapses: u64,
}

/// Exact bit accounting of built tables plus baseline footprints.
pub fn memory_footprint(tables: &TableSet) -> FootprintReport {
    let mut r = FootprintReport::default();
    for (&core, t) in &tables.cores {
        let out_linkers = t.axon_out.linkers.iter().filter(|l| l.is_some()).count() as u64;
        let fp = Footprint {
            axon_out_bits: out_linkers * AXON_OUT_LINKER_BITS + t.axon_out.entries.len() as u64 * AXON_OUT_ENTRY_BITS,
            axon_in_bits: t.axon_in.linkers.len() as u64 * AXON_IN_LINKER_BITS,
            weight_bits: t.axon_in.pools.iter().map(|p| p.bits()).sum(),
        };
        r.per_core.insert(core, fp);
    }
    let mut sources: BTreeMap<CoreAddr, (BTreeSet<(CoreAddr, u16)>, u8)> = BTreeMap::new();
    for b in &tables.blocks {
        let (index_bits, _) = case_bits(b.case, b.sources.len(), b.targets.len(), b.format.bits);
        r.per_core.get_mut(&b.dst_core).unwrap().axon_in_bits += index_bits;
        r.axon_in_index_entries += match b.case {
            super::Case::Indexed | super::Case::Explicit => b.targets.len() as u64,
            super::Case::Shared => 1,
            _ => 0,
        };
        let w = b.format.bits as u64;
        let syn = b.synapses as u64;
        r.synapses += syn;
        r.baselines.normal_index_bits += syn * (INDEX_BITS + w);
        r.baselines.normal_index_weight_bits += syn * w;
        r.baselines.population_index_bits += 13 + INDEX_BITS * b.targets.len() as u64 + syn * w;
        let e = sources.entry(b.dst_core).or_default();
        e.0.extend(b.sources.iter().map(|&s| (b.src_core, s)));
        e.1 = e.1.max(b.format.bits);
    }
    for (core, (srcs, w)) in sources {
        let n = tables.cores[&core].neurons as u64;
        r.baselines.crossbar_bits += srcs.len() as u64 * n * w as u64;
    }
    for fp in r.per_core.values() {
        r.total.add(fp);
    }
    r.axon_in_linkers = tables.cores.values().map(|t| t.axon_in.linkers.len() as u64).sum();
    r
}

/// Fan-in / fan-out pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanBounds {
    pub fan_in: u64,
    pub fan_out: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityBounds {
    pub per_core: FanBounds,
    pub per_chip: FanBounds,
    pub crossbar: FanBounds,
    pub normal_index: FanBounds,
    pub synaptic_expansion: FanBounds,
    pub population_index: FanBounds,
    pub warning: Option<String>,
}

/// Fan-in/fan-out bounds for axon-in depth `d1`, axon-out depth `d2`,
/// `n` neurons per core and `m` cores per chip.
pub fn capacity_bounds(d1: u64, d2: u64, n: u64, m: u64) -> CapacityBounds {
    let (fan_out, warning) = if n >= d2 {
        (0, Some(format!("N={n} is not below D2={d2}: no axon-out entries left for fan-out")))
    } else {
        ((d2 - n) * n, None)
    };
    let fan_in = d1.saturating_sub(1) * n;
    CapacityBounds {
        per_core: FanBounds { fan_in, fan_out },
        per_chip: FanBounds { fan_in: fan_in * m, fan_out: fan_out * n },
        crossbar: FanBounds { fan_in: d2, fan_out: d1 },
        normal_index: FanBounds { fan_in: d1, fan_out: d2 },
        synaptic_expansion: FanBounds { fan_in: d1, fan_out: d2 * m },
        population_index: FanBounds { fan_in: d1 * n, fan_out: d2 },
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::{build_tables, Connection, Geometry};

    #[test]
    fn capacity_examples() {
        let b = capacity_bounds(1024, 8192, 4096, 575);
        assert_eq!(b.per_core.fan_in, 4_190_208);
        assert_eq!(b.population_index.fan_in, 1024 * 4096);
        let b = capacity_bounds(1024, 4096, 4096, 1);
        assert_eq!(b.per_core.fan_out, 0);
        assert!(b.warning.is_some());
    }

    #[test]
    fn one_to_all_accounting() {
        let a = CoreAddr::new(1, 0);
        let d = CoreAddr::new(2, 0);
        let g: Geometry = [(a, 1), (d, 4096)].into_iter().collect();
        let conns: Vec<_> =
            (0..4096).map(|t| Connection { src_core: a, src: 0, dst_core: d, dst: t, weight: (t % 100) as i32 }).collect();
        let t = build_tables(&conns, &g, crate::connectivity::WeightFormat::new(8, false)).unwrap();
        let r = memory_footprint(&t);
        assert_eq!(r.total.weight_bits, 4096 * 8);
        assert_eq!(r.total.axon_in_bits, AXON_IN_LINKER_BITS + 16);
        assert_eq!(r.baselines.normal_index_bits, 4096 * 20);
        assert_eq!(r.axon_in_linkers, 1);
        assert_eq!(r.axon_in_index_entries, 0);
        assert_eq!(r.baselines.crossbar_bits, 4096 * 8);
    }

    #[test]
    fn empty_topology_overhead_only() {
        let g: Geometry = [(CoreAddr::new(1, 0), 8)].into_iter().collect();
        let r = memory_footprint(&build_tables(&[], &g, None).unwrap());
        assert_eq!(r.total.total(), 0);
        assert_eq!(r.baselines, Baselines::default());
    }
}
