// SPDX-License-Identifier: Apache-2.0

//! Compressed synaptic connectivity.
//!
//! The departure side (axon-out) maps a firing neuron to a run of
//! `(node offset, axon-in index, sub-index)` entries; linkers whose canonical
//! runs coincide share one run. The arrival side (axon-in) maps an index to a
//! typed info run ([`Case`]) and a slice of a packed weight pool.
//!
//! Entry layouts used for bit accounting:
//!
//! | structure          | fields                                          | bits |
//! |--------------------|-------------------------------------------------|------|
//! | axon-out linker    | info address 16, sub-index 12                   | 28   |
//! | axon-out entry     | dx 8, dy 8, axon-in 13, sub 12, LF 1            | 42   |
//! | axon-in linker     | info address 16, type 3                         | 19   |
//! | `1*` info          | weight address 16                               | 16   |
//! | `4*` info          | start 12, count 12, weight address 16           | 40   |
//! | `3*` info          | weight address 16, count 12, K x index 12       | 28+12K |
//! | `2*` info          | index 12, weight address 16                     | 28   |
//! | explicit info      | count 12, K x index 12                          | 12+12K |

mod build;
mod footprint;
mod tables;
mod weights;

pub use build::{applicable_cases, build_tables, case_bits, BlockInfo, TableBuilder, TableSet};
pub use footprint::{capacity_bounds, memory_footprint, Baselines, CapacityBounds, Footprint, FootprintReport};
pub use tables::{
    AxonInLinker, AxonInTable, AxonOutTable, Case, InBlock, OutEntry, OutLinker, Resolved, Shape, Target,
};
pub use weights::{WeightArray, WeightFormat, WIDTHS};

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const MAX_NEURONS_PER_CORE: usize = 4096;
pub const AXON_IN_INDEX_BITS: u32 = 13;
pub const SUB_INDEX_BITS: u32 = 12;

/// Global mesh coordinate of a neuron core. Orders row-major (y, then x).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoreAddr {
    pub x: i32,
    pub y: i32,
}

impl CoreAddr {
    pub const fn new(x: i32, y: i32) -> CoreAddr {
        CoreAddr { x, y }
    }
}

impl Ord for CoreAddr {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for CoreAddr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CoreAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Neuron count of each core taking part in a build.
pub type Geometry = BTreeMap<CoreAddr, u16>;

/// One synapse in an explicit connection list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Connection {
    pub src_core: CoreAddr,
    pub src: u16,
    pub dst_core: CoreAddr,
    pub dst: u16,
    pub weight: i32,
}

/// Dense form: (src core, src neuron, dst core, dst neuron) -> weight.
pub type DenseMatrix = BTreeMap<(CoreAddr, u16, CoreAddr, u16), i32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConnError {
    #[error("weight {weight} does not fit in {bits} bits")]
    WeightOverflow { weight: i32, bits: u8 },
    #[error("conflicting weights for {src_core}:{src} -> {dst_core}:{dst}")]
    Conflict { src_core: CoreAddr, src: u16, dst_core: CoreAddr, dst: u16 },
    #[error("core {0} is not part of the geometry")]
    UnknownCore(CoreAddr),
    #[error("neuron {neuron} out of range for core {core} ({count} neurons)")]
    NeuronRange { core: CoreAddr, neuron: u16, count: u16 },
    #[error("core {core} needs {required} axon-in entries, depth is {depth}")]
    AxonInDepth { core: CoreAddr, required: usize, depth: usize },
    #[error("node offset {src} -> {dst} does not fit the 8-bit offset fields")]
    OffsetRange { src: CoreAddr, dst: CoreAddr },
    #[error("axon-in index {0} not present")]
    MissingAxonIn(u32),
    #[error("dangling info address {0}")]
    DanglingAddress(u32),
    #[error("sub-index {sub} out of range for axon-in index {axon_in}")]
    SubIndex { axon_in: u32, sub: u16 },
    #[error("invalid block: {0}")]
    Invalid(String),
}
