// SPDX-License-Identifier: Apache-2.0

// Route spike packets across a mesh with XY routing, first alone and then
// under contention.

use darwin3::connectivity::CoreAddr;
use darwin3::noc::{hop_count, nominal_latency, Fabric, Network, NocConfig, SpikePacket};
use std::error::Error;

fn packet(src: CoreAddr, dst: CoreAddr) -> SpikePacket {
    SpikePacket { id: 0, dx: dst.x - src.x, dy: dst.y - src.y, axon_in: 0, sub: 0, src, src_neuron: 0, tick: 0 }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fabric = Fabric::single(24, 24);
    let mut net = Network::new(fabric.clone(), NocConfig::default());
    let (src, dst) = (CoreAddr::new(1, 1), CoreAddr::new(9, 6));
    net.inject(packet(src, dst))?;
    let d = net.run_until_idle()?;
    let hops = hop_count(dst.x - src.x, dst.y - src.y);
    println!("{src} -> {dst}: {hops} hops, {} cycles (nominal {})", d[0].latency(), nominal_latency(hops));

    // every core in a row sends to the same destination
    let mut net = Network::new(fabric, NocConfig::default());
    for x in 1..=20 {
        net.inject(packet(CoreAddr::new(x, 3), CoreAddr::new(10, 12)))?;
    }
    let d = net.run_until_idle()?;
    let worst = d.iter().map(|d| d.latency()).max().unwrap_or(0);
    let stats = net.stats;
    println!("hotspot: {} packets, worst latency {worst} cycles, {} stall cycles", d.len(), stats.stall_cycles);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
