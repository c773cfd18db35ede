// SPDX-License-Identifier: Apache-2.0

//! Random network generation shared by integration tests.

#![allow(dead_code)]

use darwin3::mapper::{ConvSpec, NetworkDescription, Pattern, PoissonInput, Population, Projection, WeightSpec};
use darwin3::sim::{ReferenceSim, SimConfig, Simulator, Spike};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NEURON_MODELS: [&str; 6] = ["lif", "cuba", "adlif", "coba", "qif", "izhikevich"];
const LEARNING: [&str; 3] = ["stdp", "triplet_stdp", "rstdp"];

/// A network of at most `max_neurons` neurons with mixed models, patterns
/// and plasticity, driven by random input.
pub fn random_network(seed: u64, max_neurons: u32) -> NetworkDescription {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = NetworkDescription { populations: Vec::new(), projections: Vec::new() };
    let pops = rng.gen_range(2..=4);
    let mut budget = max_neurons;
    let conv = rng.gen_bool(0.3);
    for i in 0..pops {
        let size = if conv && i < 2 {
            [64, 72][i]
        } else {
            rng.gen_range(1..=(budget / (pops - i) as u32).clamp(1, 400))
        };
        budget -= size.min(budget);
        let model = *NEURON_MODELS.choose(&mut rng).unwrap();
        let mut p = Population::new(&format!("p{i}"), size, model);
        if model == "izhikevich" {
            p.weight_shift = 4;
        } else {
            p = p.param("v_th", rng.gen_range(2..8) as f64 * 0.25);
        }
        if i == 0 || rng.gen_bool(0.4) {
            p.input = Some(PoissonInput { rate: rng.gen_range(0.05..0.4), weight: rng.gen_range(1..=6) as f64 * 0.25 });
        }
        if rng.gen_bool(0.5) {
            p.learning = Some(LEARNING.choose(&mut rng).unwrap().to_string());
            p.sparse_learning = rng.gen_bool(0.5);
        }
        net.populations.push(p);
    }
    if conv {
        let spec = ConvSpec { in_w: 8, in_h: 8, in_c: 1, kernel: 3, stride: 1, out_c: 2 };
        let w: Vec<i32> = (0..spec.kernel_len()).map(|_| rng.gen_range(-64..=128)).collect();
        let mut j = Projection::new("conv", "p0", "p1", Pattern::Conv2d(spec), WeightSpec::Raw(w));
        j.bits = Some(16);
        net.projections.push(j);
    }
    for k in 0..rng.gen_range(1..=5) {
        let s = rng.gen_range(0..pops);
        let t = rng.gen_range(0..pops);
        let (ss, ts) = (net.populations[s].size, net.populations[t].size);
        let pattern = match rng.gen_range(0..4) {
            0 if ss * ts <= 40_000 => Pattern::AllToAll { allow_self: s != t || rng.gen_bool(0.5) },
            1 if ss == ts => Pattern::OneToOne,
            2 => Pattern::OneToAll { source_neuron: rng.gen_range(0..ss) },
            _ => {
                let n = rng.gen_range(1..=(ss * ts).min(3000));
                let mut pairs: Vec<(u32, u32, Option<i32>)> =
                    (0..n).map(|_| (rng.gen_range(0..ss), rng.gen_range(0..ts), Some(rng.gen_range(-40..=160)))).collect();
                pairs.sort_by_key(|p| (p.0, p.1));
                pairs.dedup_by_key(|p| (p.0, p.1));
                Pattern::Explicit(pairs)
            }
        };
        let dense = matches!(pattern, Pattern::AllToAll { .. });
        let weights = if rng.gen_bool(0.5) {
            WeightSpec::Uniform(rng.gen_range(-2..=8) as f64 * if dense { 0.01 } else { 0.125 })
        } else {
            let count = match &pattern {
                Pattern::AllToAll { .. } => (ss * ts) as usize,
                Pattern::Explicit(p) => p.len(),
                _ => ts as usize,
            };
            WeightSpec::Raw((0..count).map(|_| rng.gen_range(-20..=if dense { 20 } else { 200 })).collect())
        };
        let mut j = Projection::new(&format!("j{k}"), &format!("p{s}"), &format!("p{t}"), pattern, weights);
        j.plastic = net.populations[t].learning.is_some() && rng.gen_bool(0.7);
        if j.plastic || rng.gen_bool(0.3) {
            j.bits = Some(16);
        }
        net.projections.push(j);
    }
    net
}

/// Spikes per tick from the mapped simulation and from the reference, each
/// tick sorted.
pub fn compare_runs(net: &NetworkDescription, chunk: u16, seed: u64, ticks: u64, workers: usize) -> Result<(Vec<Spike>, String), String> {
    let config = darwin3::mapper::MapConfig { max_neurons_per_core: chunk, ..Default::default() };
    let mapped = darwin3::mapper::map_network(net, &config).map_err(|e| e.to_string())?;
    let container = mapped.container(net);
    let mut sim = Simulator::new(&container, SimConfig { seed, workers, trace: true, ..SimConfig::default() })
        .map_err(|e| e.to_string())?;
    let mut reference = ReferenceSim::new(net, seed).map_err(|e| e.to_string())?;
    let mut all = Vec::new();
    for t in 0..ticks {
        let mut a = sim.step().map_err(|e| e.to_string())?;
        let mut b = reference.step().map_err(|e| e.to_string())?;
        a.sort();
        b.sort();
        if a != b {
            return Err(format!("tick {t}: mapped {} spikes, reference {}", a.len(), b.len()));
        }
        all.extend(a);
    }
    Ok((all, sim.finish().trace))
}
