// SPDX-License-Identifier: Apache-2.0

// Drive one population of each neuron model with the same Poisson input
// and report firing rates.

use darwin3::mapper::{map_network, MapConfig, NetworkDescription, PoissonInput, Population};
use darwin3::sim::{simulate, SimConfig};
use std::error::Error;

const MODELS: [&str; 7] = ["lif", "cuba", "adlif", "coba", "qif", "expif", "izhikevich"];

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let ticks = 200;
    for model in MODELS {
        let mut p = Population::new("cells", 50, model);
        p.input = Some(PoissonInput { rate: 0.3, weight: 0.75 });
        if model == "izhikevich" {
            p.weight_shift = 4;
        }
        let net = NetworkDescription { populations: vec![p], projections: Vec::new() };
        let container = map_network(&net, &MapConfig::default())?.container(&net);
        let r = simulate(&container, SimConfig { ticks, seed: 7, ..SimConfig::default() })?;
        let rate = r.spikes.len() as f64 / (50 * ticks) as f64;
        println!("{model:>10}: {:>5} spikes, {rate:.3} per neuron per tick", r.spikes.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
