// SPDX-License-Identifier: Apache-2.0

//! Mesh network of routers with relative-offset XY routing.
//!
//! Nodes are addressed by global coordinates: chip `(cx, cy)` of a
//! `W x H` fabric covers `x in [cx*W, (cx+1)*W)`. Packets carry only the
//! remaining offset, so crossing a chip edge needs no address translation.

mod network;

pub use network::{Delivery, NetStats, Network, NocConfig};

use crate::connectivity::CoreAddr;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const CHIP_DIM: u16 = 24;
/// Cycles from a router forwarding a packet to it being ready at the next router.
pub const HOP_CYCLES: u64 = 4;
/// Cycles from the destination router to the local core.
pub const EJECT_CYCLES: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Port {
    North,
    East,
    South,
    West,
    Local,
}

impl Port {
    pub const ALL: [Port; 5] = [Port::North, Port::East, Port::South, Port::West, Port::Local];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Port {
        match self {
            Port::North => Port::South,
            Port::South => Port::North,
            Port::East => Port::West,
            Port::West => Port::East,
            Port::Local => Port::Local,
        }
    }

    /// Unit step `(dx, dy)`; north is +y.
    pub fn step(self) -> (i32, i32) {
        match self {
            Port::North => (0, 1),
            Port::East => (1, 0),
            Port::South => (0, -1),
            Port::West => (-1, 0),
            Port::Local => (0, 0),
        }
    }
}

/// XY routing: resolve x first, then y, then deliver locally.
pub fn route_decision(dx: i32, dy: i32) -> Port {
    if dx > 0 {
        Port::East
    } else if dx < 0 {
        Port::West
    } else if dy > 0 {
        Port::North
    } else if dy < 0 {
        Port::South
    } else {
        Port::Local
    }
}

/// Chip-local coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeshCoord {
    pub chip: u16,
    pub x: u16,
    pub y: u16,
}

impl fmt::Display for MeshCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.chip, self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NocError {
    #[error("chip {0} does not exist")]
    UnknownChip(u16),
    #[error("chip slot {direction:?} of chip {chip} is already occupied")]
    Occupied { chip: u16, direction: Port },
    #[error("packet {id} from {src} leaves the fabric at {at} heading {port:?}")]
    Undeliverable { id: u64, src: CoreAddr, at: CoreAddr, port: Port },
    #[error("packet {id} addressed to {at}, which has no neuron core")]
    NoCore { id: u64, at: CoreAddr },
    #[error("injection at {0}, which is outside the fabric")]
    OutsideFabric(CoreAddr),
    #[error("no progress for {stalled} cycles with {in_flight} packets in flight at cycle {cycle}")]
    Deadlock { cycle: u64, stalled: u64, in_flight: usize },
}

/// A set of equally sized chips placed on a grid of chip slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fabric {
    pub chip_w: u16,
    pub chip_h: u16,
    /// Chip slot -> chip id.
    pub chips: BTreeMap<(i32, i32), u16>,
}

impl Fabric {
    pub fn single(chip_w: u16, chip_h: u16) -> Fabric {
        assert!(chip_w > 0 && chip_h > 0);
        Fabric { chip_w, chip_h, chips: [((0, 0), 0)].into_iter().collect() }
    }

    /// A row of `n` chips joined east to west.
    pub fn row(chip_w: u16, chip_h: u16, n: u16) -> Fabric {
        let mut f = Fabric::single(chip_w, chip_h);
        for i in 1..n {
            f.attach_chip(i - 1, Port::East).expect("fresh slot");
        }
        f
    }

    fn slot_of(&self, chip: u16) -> Option<(i32, i32)> {
        self.chips.iter().find(|(_, &c)| c == chip).map(|(&s, _)| s)
    }

    /// Connect a new chip on the `direction` edge of `chip`; returns its id.
    pub fn attach_chip(&mut self, chip: u16, direction: Port) -> Result<u16, NocError> {
        let (sx, sy) = self.slot_of(chip).ok_or(NocError::UnknownChip(chip))?;
        let (dx, dy) = direction.step();
        if direction == Port::Local {
            return Err(NocError::Occupied { chip, direction });
        }
        let slot = (sx + dx, sy + dy);
        if self.chips.contains_key(&slot) {
            return Err(NocError::Occupied { chip, direction });
        }
        let id = self.chips.len() as u16;
        self.chips.insert(slot, id);
        Ok(id)
    }

    pub fn chip_count(&self) -> usize {
        self.chips.len()
    }

    pub fn locate(&self, g: CoreAddr) -> Option<MeshCoord> {
        let (w, h) = (self.chip_w as i32, self.chip_h as i32);
        let slot = (g.x.div_euclid(w), g.y.div_euclid(h));
        self.chips.get(&slot).map(|&chip| MeshCoord {
            chip,
            x: g.x.rem_euclid(w) as u16,
            y: g.y.rem_euclid(h) as u16,
        })
    }

    pub fn global(&self, c: MeshCoord) -> Option<CoreAddr> {
        let (sx, sy) = self.slot_of(c.chip)?;
        Some(CoreAddr::new(sx * self.chip_w as i32 + c.x as i32, sy * self.chip_h as i32 + c.y as i32))
    }

    pub fn contains(&self, g: CoreAddr) -> bool {
        self.locate(g).is_some()
    }

    /// Whether `g` hosts a neuron core (node (0,0) of each chip does not).
    pub fn is_core(&self, g: CoreAddr) -> bool {
        matches!(self.locate(g), Some(c) if (c.x, c.y) != (0, 0))
    }

    /// Every node in row-major order, chip slots first.
    pub fn nodes(&self) -> Vec<CoreAddr> {
        let mut v = Vec::new();
        for &(sx, sy) in self.chips.keys() {
            for y in 0..self.chip_h as i32 {
                for x in 0..self.chip_w as i32 {
                    v.push(CoreAddr::new(sx * self.chip_w as i32 + x, sy * self.chip_h as i32 + y));
                }
            }
        }
        v
    }

    /// Neuron-core nodes in placement order: chip by chip, row-major.
    pub fn core_nodes(&self) -> Vec<CoreAddr> {
        let mut by_chip: Vec<(u16, CoreAddr)> =
            self.nodes().into_iter().filter(|&g| self.is_core(g)).map(|g| (self.locate(g).unwrap().chip, g)).collect();
        by_chip.sort_by_key(|&(c, g)| (c, g.y, g.x));
        by_chip.into_iter().map(|(_, g)| g).collect()
    }
}

/// Address-event packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpikePacket {
    pub id: u64,
    /// Remaining offset to the destination node.
    pub dx: i32,
    pub dy: i32,
    pub axon_in: u16,
    pub sub: u16,
    pub src: CoreAddr,
    pub src_neuron: u16,
    pub tick: u64,
}

/// Hops for an uncongested packet travelling `(dx, dy)`.
pub fn hop_count(dx: i32, dy: i32) -> u64 {
    (dx.unsigned_abs() + dy.unsigned_abs()) as u64
}

/// Uncongested latency for a path through `n` routers after the source.
pub fn nominal_latency(n: u64) -> u64 {
    2 * n + 2 * (n + 1)
}
