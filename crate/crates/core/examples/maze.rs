// SPDX-License-Identifier: Apache-2.0

// Solve a random maze by letting a spike wave spread from the start cell
// and following the potentiated synapses back from the goal.

use darwin3::maze::{solve, Maze, MazeConfig};
use std::error::Error;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = MazeConfig::default();
    // first seed whose maze has a path
    for seed in 0..50 {
        let maze = Maze::random(15, 15, 0.3, seed);
        if maze.bfs_distance().is_none() {
            continue;
        }
        let out = solve(&maze, &config)?;
        print!("{}", maze.render(out.path.as_deref().unwrap_or(&[])));
        println!("seed {seed}: {out}");
        assert_eq!(out.path.map(|p| p.len() - 1), maze.bfs_distance());
        return Ok(());
    }
    Err("no solvable maze in 50 seeds".into())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
