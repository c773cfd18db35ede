// SPDX-License-Identifier: Apache-2.0

// Map a small layered network onto the fabric, save the core images, load
// them back and simulate with an energy estimate.

use darwin3::mapper::{map_network, report_metrics, Container, MapConfig, NetworkDescription};
use darwin3::models::EnergyCoefficients;
use darwin3::sim::{simulate, SimConfig};
use std::error::Error;

const NET: &str = "
[population input]
size = 200
model = lif
input_rate = 0.2
input_weight = 1.5

[population hidden]
size = 300
model = adlif
v_th = 1

[population output]
size = 10
model = lif
layer = output

[projection in_hidden]
source = input
target = hidden
pattern = all_to_all
weight = 0.05

[projection hidden_out]
source = hidden
target = output
pattern = all_to_all
weight = 0.02
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let net = NetworkDescription::parse(NET)?;
    let mapped = map_network(&net, &MapConfig { max_neurons_per_core: 128, ..MapConfig::default() })?;
    let m = report_metrics(&mapped);
    println!("{} cores, {} synapses, {} bits of table memory", m.cores.len(), m.synapses, m.footprint.total());

    let dir = std::env::temp_dir().join(format!("darwin3-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("net.json");
    mapped.container(&net).save(&path)?;
    let container = Container::load(&path)?;
    std::fs::remove_dir_all(&dir)?;

    let energy = EnergyCoefficients { p_i: 1500.0, p_b: 250.0, p_n: 3.0, p_s: 5.47 };
    let r = simulate(&container, SimConfig { ticks: 100, energy, ..SimConfig::default() })?;
    let out = r.spikes.iter().filter(|s| s.population == 2).count();
    println!(
        "{} spikes ({out} from the output layer), {} SOPs, {} packets, {:.1} pJ",
        r.spikes.len(),
        r.sops,
        r.network.delivered,
        r.energy.energy_pj
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
