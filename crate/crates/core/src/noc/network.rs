// SPDX-License-Identifier: Apache-2.0

use super::{route_decision, Fabric, NocError, Port, SpikePacket, EJECT_CYCLES, HOP_CYCLES};
use crate::connectivity::CoreAddr;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NocConfig {
    pub queue_depth: usize,
    /// Cycles without any forward or delivery before a deadlock is declared.
    pub stall_budget: u64,
}

impl Default for NocConfig {
    fn default() -> Self {
        NocConfig { queue_depth: 4, stall_budget: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub cycle: u64,
    pub injected: u64,
    pub dst: CoreAddr,
    pub packet: SpikePacket,
}

impl Delivery {
    pub fn latency(&self) -> u64 {
        self.cycle - self.injected
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetStats {
    pub injected: u64,
    pub delivered: u64,
    pub hops: u64,
    pub stall_cycles: u64,
    pub max_latency: u64,
}

#[derive(Debug, Clone, Copy)]
struct Flit {
    ready: u64,
    injected: u64,
    packet: SpikePacket,
}

#[derive(Debug, Clone, Default)]
struct Router {
    inputs: [VecDeque<Flit>; 5],
    /// Round-robin pointer per output port.
    rr: [u8; 5],
}

impl Router {
    fn is_empty(&self) -> bool {
        self.inputs.iter().all(|q| q.is_empty())
    }
}

struct Move {
    from: usize,
    input: usize,
    out: Port,
}

/// Cycle-stepped router mesh. Each cycle, every router offers the head of
/// each input queue whose packet is ready; each output port accepts at most
/// one (round-robin) if the downstream queue had room at the start of the
/// cycle. Decisions are computed from that snapshot and then committed, so
/// router order within a cycle does not matter.
pub struct Network {
    pub fabric: Fabric,
    pub config: NocConfig,
    index: HashMap<CoreAddr, usize>,
    nodes: Vec<CoreAddr>,
    routers: Vec<Router>,
    active: BTreeSet<usize>,
    cycle: u64,
    next_id: u64,
    in_flight: usize,
    pub stats: NetStats,
}

impl Network {
    pub fn new(fabric: Fabric, config: NocConfig) -> Network {
        let nodes = fabric.nodes();
        let index = nodes.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        let routers = vec![Router::default(); nodes.len()];
        Network {
            fabric,
            config,
            index,
            nodes,
            routers,
            active: BTreeSet::new(),
            cycle: 0,
            next_id: 0,
            in_flight: 0,
            stats: NetStats::default(),
        }
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight
    }

    /// Queue a packet at its source router's local port, ready this cycle.
    /// Assigns and returns the packet id.
    pub fn inject(&mut self, mut packet: SpikePacket) -> Result<u64, NocError> {
        let &i = self.index.get(&packet.src).ok_or(NocError::OutsideFabric(packet.src))?;
        packet.id = self.next_id;
        self.next_id += 1;
        self.routers[i].inputs[Port::Local.index()].push_back(Flit { ready: self.cycle, injected: self.cycle, packet });
        self.active.insert(i);
        self.in_flight += 1;
        self.stats.injected += 1;
        Ok(packet.id)
    }

    fn neighbor(&self, i: usize, p: Port) -> Option<usize> {
        let (sx, sy) = p.step();
        let g = self.nodes[i];
        self.index.get(&CoreAddr::new(g.x + sx, g.y + sy)).copied()
    }

    /// Advance one cycle; returns packets handed to local cores.
    pub fn step(&mut self) -> Result<Vec<Delivery>, NocError> {
        let now = self.cycle;
        let depth = self.config.queue_depth;
        let mut moves = Vec::new();
        for &i in &self.active {
            let r = &self.routers[i];
            let mut want: [Option<Port>; 5] = [None; 5];
            for (q, slot) in r.inputs.iter().zip(want.iter_mut()) {
                if let Some(f) = q.front() {
                    if f.ready <= now {
                        *slot = Some(route_decision(f.packet.dx, f.packet.dy));
                    }
                }
            }
            for out in Port::ALL {
                let start = r.rr[out.index()] as usize;
                let Some(input) = (0..5).map(|k| (start + k) % 5).find(|&k| want[k] == Some(out)) else {
                    continue;
                };
                if out != Port::Local {
                    let Some(n) = self.neighbor(i, out) else {
                        let f = r.inputs[input].front().unwrap();
                        return Err(NocError::Undeliverable { id: f.packet.id, src: f.packet.src, at: self.nodes[i], port: out });
                    };
                    if self.routers[n].inputs[out.opposite().index()].len() >= depth {
                        continue;
                    }
                }
                moves.push(Move { from: i, input, out });
            }
        }

        let mut delivered = Vec::new();
        for m in &moves {
            let r = &mut self.routers[m.from];
            r.rr[m.out.index()] = ((m.input + 1) % 5) as u8;
            let mut f = r.inputs[m.input].pop_front().unwrap();
            if r.is_empty() {
                self.active.remove(&m.from);
            }
            if m.out == Port::Local {
                let at = self.nodes[m.from];
                if !self.fabric.is_core(at) {
                    return Err(NocError::NoCore { id: f.packet.id, at });
                }
                let d = Delivery { cycle: now + EJECT_CYCLES, injected: f.injected, dst: at, packet: f.packet };
                self.stats.max_latency = self.stats.max_latency.max(d.latency());
                delivered.push(d);
                self.in_flight -= 1;
                self.stats.delivered += 1;
            } else {
                let (sx, sy) = m.out.step();
                f.packet.dx -= sx;
                f.packet.dy -= sy;
                f.ready = now + HOP_CYCLES;
                let n = self.neighbor(m.from, m.out).unwrap();
                self.routers[n].inputs[m.out.opposite().index()].push_back(f);
                self.active.insert(n);
                self.stats.hops += 1;
            }
        }
        if moves.is_empty() && self.in_flight > 0 {
            self.stats.stall_cycles += 1;
        }
        self.cycle += 1;
        Ok(delivered)
    }

    /// Drop every queued packet; returns how many were dropped.
    pub fn clear(&mut self) -> usize {
        for &i in &self.active {
            self.routers[i].inputs.iter_mut().for_each(|q| q.clear());
        }
        self.active.clear();
        std::mem::take(&mut self.in_flight)
    }

    /// Earliest cycle at which some queued packet becomes ready.
    fn next_ready(&self) -> Option<u64> {
        self.active
            .iter()
            .flat_map(|&i| self.routers[i].inputs.iter().filter_map(|q| q.front().map(|f| f.ready)))
            .min()
    }

    /// Step until no packet remains, skipping idle cycles. Deliveries are in
    /// (cycle, commit) order.
    pub fn run_until_idle(&mut self) -> Result<Vec<Delivery>, NocError> {
        let mut all = Vec::new();
        let mut last_progress = self.cycle;
        while self.in_flight > 0 {
            if let Some(t) = self.next_ready() {
                if t > self.cycle {
                    self.cycle = t;
                    last_progress = t;
                }
            }
            let before = (self.stats.hops, self.stats.delivered);
            let d = self.step()?;
            all.extend(d);
            if (self.stats.hops, self.stats.delivered) != before {
                last_progress = self.cycle;
            } else if self.cycle - last_progress > self.config.stall_budget {
                return Err(NocError::Deadlock {
                    cycle: self.cycle,
                    stalled: self.cycle - last_progress,
                    in_flight: self.in_flight,
                });
            }
        }
        all.sort_by_key(|d| d.cycle);
        Ok(all)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noc::nominal_latency;

    fn pkt(src: CoreAddr, dx: i32, dy: i32) -> SpikePacket {
        SpikePacket { id: 0, dx, dy, axon_in: 0, sub: 0, src, src_neuron: 0, tick: 0 }
    }

    #[test]
    fn single_packet_latency() {
        let mut n = Network::new(Fabric::single(24, 24), NocConfig::default());
        n.inject(pkt(CoreAddr::new(2, 2), 2, 1)).unwrap();
        let d = n.run_until_idle().unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].latency(), nominal_latency(3));
        assert_eq!(d[0].dst, CoreAddr::new(4, 3));
    }

    #[test]
    fn contention_delays_one_slot() {
        let mut n = Network::new(Fabric::single(24, 24), NocConfig::default());
        let a = n.inject(pkt(CoreAddr::new(4, 5), 3, 0)).unwrap();
        for _ in 0..4 {
            assert!(n.step().unwrap().is_empty());
        }
        // arrives at (5,5) east output together with `a`
        let c = n.inject(pkt(CoreAddr::new(5, 5), 2, 0)).unwrap();
        let d = n.run_until_idle().unwrap();
        let lat = |id| d.iter().find(|x| x.packet.id == id).unwrap().latency();
        assert_eq!(lat(a), nominal_latency(3));
        assert_eq!(lat(c), nominal_latency(2) + 1);
    }

    #[test]
    fn crosses_chip_boundary() {
        let f = Fabric::row(24, 24, 2);
        let mut n = Network::new(f, NocConfig::default());
        n.inject(pkt(CoreAddr::new(23, 5), 1, 0)).unwrap();
        let d = n.run_until_idle().unwrap();
        assert_eq!(n.fabric.locate(d[0].dst).unwrap().chip, 1);
        assert_eq!(d[0].latency(), 6);
    }

    #[test]
    fn unattached_edge_faults() {
        let mut n = Network::new(Fabric::single(24, 24), NocConfig::default());
        n.inject(pkt(CoreAddr::new(23, 5), 1, 0)).unwrap();
        assert!(matches!(n.run_until_idle(), Err(NocError::Undeliverable { .. })));
    }

    #[test]
    fn management_node_is_not_a_destination() {
        let mut n = Network::new(Fabric::single(4, 4), NocConfig::default());
        n.inject(pkt(CoreAddr::new(1, 0), -1, 0)).unwrap();
        assert!(matches!(n.run_until_idle(), Err(NocError::NoCore { .. })));
    }

    #[test]
    fn all_pairs_small_two_chip() {
        let f = Fabric::row(3, 2, 2);
        let cores = f.core_nodes();
        let mut n = Network::new(f, NocConfig::default());
        let mut expected = HashMap::new();
        for &a in &cores {
            for &b in &cores {
                let id = n.inject(pkt(a, b.x - a.x, b.y - a.y)).unwrap();
                expected.insert(id, b);
            }
        }
        let d = n.run_until_idle().unwrap();
        assert_eq!(d.len(), expected.len());
        let ids: BTreeSet<u64> = d.iter().map(|d| d.packet.id).collect();
        assert_eq!(ids.len(), expected.len());
        for x in &d {
            assert_eq!(x.dst, expected[&x.packet.id]);
            let hops = crate::noc::hop_count(x.dst.x - x.packet.src.x, x.dst.y - x.packet.src.y);
            assert!(x.latency() >= nominal_latency(hops));
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::noc::{hop_count, nominal_latency};
    use proptest::prelude::*;

    fn core() -> impl Strategy<Value = CoreAddr> {
        // x = 0 holds the management nodes
        (1i32..24, 0i32..24).prop_map(|(x, y)| CoreAddr::new(x, y))
    }

    proptest! {
        #[test]
        fn lone_packet_has_nominal_latency(a in core(), b in core()) {
            let mut n = Network::new(Fabric::single(24, 24), NocConfig::default());
            n.inject(SpikePacket { id: 0, dx: b.x - a.x, dy: b.y - a.y, axon_in: 0, sub: 0, src: a, src_neuron: 0, tick: 0 }).unwrap();
            let d = n.run_until_idle().unwrap();
            prop_assert_eq!(d.len(), 1);
            prop_assert_eq!(d[0].dst, b);
            prop_assert_eq!(d[0].latency(), nominal_latency(hop_count(b.x - a.x, b.y - a.y)));
        }

        #[test]
        fn every_packet_arrives_once(pairs in prop::collection::vec((core(), core()), 1..200)) {
            let mut n = Network::new(Fabric::single(24, 24), NocConfig::default());
            let mut expected = HashMap::new();
            for (a, b) in pairs {
                let p = SpikePacket { id: 0, dx: b.x - a.x, dy: b.y - a.y, axon_in: 0, sub: 0, src: a, src_neuron: 0, tick: 0 };
                expected.insert(n.inject(p).unwrap(), b);
            }
            let d = n.run_until_idle().unwrap();
            prop_assert_eq!(d.len(), expected.len());
            let ids: BTreeSet<u64> = d.iter().map(|x| x.packet.id).collect();
            prop_assert_eq!(ids.len(), expected.len());
            for x in &d {
                prop_assert_eq!(x.dst, expected[&x.packet.id]);
                prop_assert!(x.latency() >= nominal_latency(hop_count(x.dst.x - x.packet.src.x, x.dst.y - x.packet.src.y)));
            }
        }
    }
}
