// SPDX-License-Identifier: Apache-2.0
//! Every example runs to completion.

#[allow(dead_code)]
mod assemble_programs {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/assemble_programs.rs"));
}

#[test]
fn assemble_programs_runs() {
    assemble_programs::run_example().expect("assemble_programs example runs");
}

#[allow(dead_code)]
mod neuron_dynamics {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/neuron_dynamics.rs"));
}

#[test]
fn neuron_dynamics_runs() {
    neuron_dynamics::run_example().expect("neuron_dynamics example runs");
}

#[allow(dead_code)]
mod plasticity {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/plasticity.rs"));
}

#[test]
fn plasticity_runs() {
    plasticity::run_example().expect("plasticity example runs");
}

#[allow(dead_code)]
mod connectivity_compression {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/connectivity_compression.rs"));
}

#[test]
fn connectivity_compression_runs() {
    connectivity_compression::run_example().expect("connectivity_compression example runs");
}

#[allow(dead_code)]
mod noc_routing {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/noc_routing.rs"));
}

#[test]
fn noc_routing_runs() {
    noc_routing::run_example().expect("noc_routing example runs");
}

#[allow(dead_code)]
mod map_and_simulate {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/map_and_simulate.rs"));
}

#[test]
fn map_and_simulate_runs() {
    map_and_simulate::run_example().expect("map_and_simulate example runs");
}

#[allow(dead_code)]
mod maze {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/maze.rs"));
}

#[test]
fn maze_runs() {
    maze::run_example().expect("maze example runs");
}

#[allow(dead_code)]
mod code_density {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/code_density.rs"));
}

#[test]
fn code_density_runs() {
    code_density::run_example().expect("code_density example runs");
}
