// SPDX-License-Identifier: Apache-2.0

// Build compressed synapse tables for a few connection shapes and compare
// their memory against crossbar and index-per-synapse storage.

use darwin3::connectivity::{build_tables, memory_footprint, Connection, CoreAddr, Geometry};
use std::error::Error;

fn report(name: &str, conns: &[Connection], g: &Geometry) -> Result<(), Box<dyn Error>> {
    let tables = build_tables(conns, g, None)?;
    let f = memory_footprint(&tables);
    // the tables must expand back to exactly the input
    let dense = tables.expand_dense()?;
    assert_eq!(dense.len(), conns.len());
    let mut cases: Vec<&str> = tables.blocks.iter().map(|b| b.case.label()).collect();
    cases.dedup();
    println!(
        "{name:>12}: {:>6} synapses, {:>8} bits (crossbar {:>8}, normal index {:>8}) blocks {cases:?}",
        conns.len(),
        f.total.total(),
        f.baselines.crossbar_bits,
        f.baselines.normal_index_bits
    );
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (a, b) = (CoreAddr::new(1, 0), CoreAddr::new(2, 0));
    let g: Geometry = [(a, 256), (b, 256)].into_iter().collect();
    let conn = |s: u16, d: u16, w: i32| Connection { src_core: a, src: s, dst_core: b, dst: d, weight: w };

    let all: Vec<Connection> = (0..256).flat_map(|s| (0..256).map(move |d| conn(s, d, 3))).collect();
    report("all-to-all", &all, &g)?;
    let diagonal: Vec<Connection> = (0..256).map(|i| conn(i, i, (i % 5) as i32)).collect();
    report("one-to-one", &diagonal, &g)?;
    let ranged: Vec<Connection> = (0..64).flat_map(|s| (s..s + 16).map(move |d| conn(s, d, 1 + (d % 3) as i32))).collect();
    report("banded", &ranged, &g)?;
    let sparse: Vec<Connection> = (0..256u16).map(|s| conn(s, s.wrapping_mul(37) % 256, -2)).collect();
    report("scattered", &sparse, &g)?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
