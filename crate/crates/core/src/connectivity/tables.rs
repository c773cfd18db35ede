// SPDX-License-Identifier: Apache-2.0

use super::weights::WeightArray;
use super::ConnError;
use serde::{Deserialize, Serialize};
use std::fmt::{self, Write as _};

/// Compression case of an axon-in block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Case {
    /// `1*`: every neuron of the core, weights stored sequentially.
    All,
    /// `4*`: contiguous target range, `{start, count}` plus a weight matrix.
    Range,
    /// `4*` one-to-one: row `r` reaches only `start + r`.
    Diagonal,
    /// `3*`: one target index list shared by all rows, weights by source order.
    Indexed,
    /// `2*`: a single target and one shared weight.
    Shared,
    /// Per-source explicit list of `(target, weight)`.
    Explicit,
}

impl Case {
    pub fn label(self) -> &'static str {
        match self {
            Case::All => "1*",
            Case::Range | Case::Diagonal => "4*",
            Case::Indexed => "3*",
            Case::Shared => "2*",
            Case::Explicit => "explicit",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Target description of one axon-in info run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shape {
    All { n: u16 },
    Range { start: u16, count: u16 },
    Diagonal { start: u16, count: u16 },
    Indexed { targets: Vec<u16> },
    Shared { target: u16 },
    Explicit { targets: Vec<u16> },
}

impl Shape {
    pub fn case(&self) -> Case {
        match self {
            Shape::All { .. } => Case::All,
            Shape::Range { .. } => Case::Range,
            Shape::Diagonal { .. } => Case::Diagonal,
            Shape::Indexed { .. } => Case::Indexed,
            Shape::Shared { .. } => Case::Shared,
            Shape::Explicit { .. } => Case::Explicit,
        }
    }

    /// Number of targets reached by one row.
    pub fn cols(&self) -> usize {
        match self {
            Shape::All { n } => *n as usize,
            Shape::Range { count, .. } => *count as usize,
            Shape::Diagonal { .. } | Shape::Shared { .. } => 1,
            Shape::Indexed { targets } | Shape::Explicit { targets } => targets.len(),
        }
    }
}

/// One axon-in info run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InBlock {
    pub shape: Shape,
    /// Number of source rows (valid sub-indexes are `0..rows`).
    pub rows: u16,
    pub pool: u16,
    /// Element offset of the first weight in the pool.
    pub offset: u32,
    pub plastic: bool,
}

impl InBlock {
    /// Weight elements read by one sub-index.
    fn row_weights(&self, sub: usize) -> (usize, usize) {
        match &self.shape {
            Shape::Shared { .. } => (self.offset as usize, 1),
            Shape::Diagonal { .. } => (self.offset as usize + sub, 1),
            s => {
                let k = s.cols();
                (self.offset as usize + sub * k, k)
            }
        }
    }

    /// Distinct weight elements stored for this block.
    pub fn stored_weights(&self) -> usize {
        match &self.shape {
            Shape::Shared { .. } => 1,
            Shape::Diagonal { count, .. } => *count as usize,
            s => s.cols() * self.rows as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxonInLinker {
    pub info_address: u32,
    pub case: Case,
}

/// Arrival side: axon-in index -> (neuron, weight) list.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxonInTable {
    pub linkers: Vec<AxonInLinker>,
    pub blocks: Vec<InBlock>,
    pub pools: Vec<WeightArray>,
}

/// One resolved synapse: target neuron, weight, and where the weight lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolved {
    pub neuron: u16,
    pub weight: i32,
    pub pool: u16,
    pub element: u32,
}

impl AxonInTable {
    pub fn block(&self, axon_in: u32) -> Result<&InBlock, ConnError> {
        let l = self.linkers.get(axon_in as usize).ok_or(ConnError::MissingAxonIn(axon_in))?;
        self.blocks.get(l.info_address as usize).ok_or(ConnError::DanglingAddress(l.info_address))
    }

    /// Visit every `(neuron, weight)` reached by a packet.
    pub fn for_each(&self, axon_in: u32, sub: u16, mut f: impl FnMut(Resolved)) -> Result<(), ConnError> {
        let b = self.block(axon_in)?;
        if sub >= b.rows {
            return Err(ConnError::SubIndex { axon_in, sub });
        }
        let pool = &self.pools[b.pool as usize];
        let (first, count) = b.row_weights(sub as usize);
        let mut emit = |neuron: u16, j: usize| {
            let element = first + j;
            f(Resolved { neuron, weight: pool.get(element), pool: b.pool, element: element as u32 })
        };
        match &b.shape {
            Shape::All { .. } => (0..count).for_each(|j| emit(j as u16, j)),
            Shape::Range { start, .. } => (0..count).for_each(|j| emit(start + j as u16, j)),
            Shape::Diagonal { start, .. } => emit(start + sub, 0),
            Shape::Shared { target } => emit(*target, 0),
            Shape::Indexed { targets } | Shape::Explicit { targets } => {
                targets.iter().enumerate().for_each(|(j, &t)| emit(t, j))
            }
        }
        Ok(())
    }

    pub fn resolve_incoming(&self, axon_in: u32, sub: u16) -> Result<Vec<(u16, i32)>, ConnError> {
        let mut out = Vec::new();
        self.for_each(axon_in, sub, |r| out.push((r.neuron, r.weight)))?;
        Ok(out)
    }

    /// One line per linker and decoded run.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (i, l) in self.linkers.iter().enumerate() {
            let b = &self.blocks[l.info_address as usize];
            let _ = write!(s, "in {i} case={} rows={} ", l.case, b.rows);
            let _ = match &b.shape {
                Shape::All { n } => write!(s, "all n={n}"),
                Shape::Range { start, count } => write!(s, "range start={start} count={count}"),
                Shape::Diagonal { start, count } => write!(s, "diag start={start} count={count}"),
                Shape::Indexed { targets } => write!(s, "indexed {targets:?}"),
                Shape::Shared { target } => write!(s, "shared target={target}"),
                Shape::Explicit { targets } => write!(s, "explicit {targets:?}"),
            };
            let pool = &self.pools[b.pool as usize];
            let w: Vec<i32> = (0..b.stored_weights()).map(|j| pool.get(b.offset as usize + j)).collect();
            let _ = writeln!(s, " w{}={:?}", pool.format.bits, w);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutLinker {
    pub info_address: u32,
    pub sub: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutEntry {
    pub dx: i8,
    pub dy: i8,
    pub axon_in: u16,
    pub sub: u16,
    /// Last entry of the run.
    pub last: bool,
}

/// Departure side: neuron -> run of (node offset, axon-in index) entries.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AxonOutTable {
    pub linkers: Vec<Option<OutLinker>>,
    pub entries: Vec<OutEntry>,
}

/// One packet destination of a firing neuron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Target {
    pub dx: i8,
    pub dy: i8,
    pub axon_in: u16,
    pub sub: u16,
}

impl AxonOutTable {
    pub fn for_each_target(&self, neuron: u16, mut f: impl FnMut(Target)) -> Result<(), ConnError> {
        let Some(Some(l)) = self.linkers.get(neuron as usize) else { return Ok(()) };
        let mut a = l.info_address as usize;
        loop {
            let e = self.entries.get(a).ok_or(ConnError::DanglingAddress(a as u32))?;
            f(Target { dx: e.dx, dy: e.dy, axon_in: e.axon_in, sub: l.sub + e.sub });
            if e.last {
                return Ok(());
            }
            a += 1;
        }
    }

    pub fn lookup_targets(&self, neuron: u16) -> Result<Vec<Target>, ConnError> {
        let mut v = Vec::new();
        self.for_each_target(neuron, |t| v.push(t))?;
        Ok(v)
    }

    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (n, l) in self.linkers.iter().enumerate() {
            if let Some(l) = l {
                let _ = writeln!(s, "out {n} addr={} sub={}", l.info_address, l.sub);
            }
        }
        for (a, e) in self.entries.iter().enumerate() {
            let _ = writeln!(s, "entry {a} d=({},{}) in={} sub={} lf={}", e.dx, e.dy, e.axon_in, e.sub, e.last as u8);
        }
        s
    }
}
