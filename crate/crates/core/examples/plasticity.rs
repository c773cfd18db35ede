// SPDX-License-Identifier: Apache-2.0

// Pair-based STDP on a one-to-one projection. Each output neuron follows its
// input one tick later, but the dense input also lands after output spikes,
// and the depression side wins at this rate.

use darwin3::mapper::{map_network, MapConfig, NetworkDescription};
use darwin3::sim::{SimConfig, Simulator};
use std::error::Error;

const NET: &str = "
[population pre]
size = 8
model = lif
input_rate = 0.5
input_weight = 2

[population post]
size = 8
model = lif
learning = stdp
v_th = 0.5

[projection pair]
source = pre
target = post
pattern = one_to_one
weight = 1
bits = 16
plastic = true
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = NetworkDescription::parse(NET)?;
    let container = map_network(&net, &MapConfig::default())?.container(&net);
    let mut sim = Simulator::new(&container, SimConfig { seed: 3, ..SimConfig::default() })?;
    let before: Vec<i32> = (0..8).map(|i| sim.synapse_weight(0, i, 1, i).unwrap_or(0)).collect();
    sim.run(100)?;
    let after: Vec<i32> = (0..8).map(|i| sim.synapse_weight(0, i, 1, i).unwrap_or(0)).collect();
    println!("raw weights before: {before:?}");
    println!("raw weights after:  {after:?}");
    let r = sim.finish();
    println!("{} spikes, {} SOPs", r.spikes.len(), r.sops);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
