// SPDX-License-Identifier: Apache-2.0

//! Maze solving by spike propagation. Each cell is one neuron: free cells
//! are excitatory and fire once, obstacles are inhibitory and never fire.
//! A spike injected at the start spreads as a wavefront; STDP strengthens
//! every synapse along which the wavefront advanced, and the path is read
//! back by following strengthened synapses from the goal.

use crate::mapper::{map_network, MapConfig, MapError, NetworkDescription, Pattern, Population, Projection, WeightSpec};
use crate::sim::{SimConfig, SimError, Simulator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

pub type Cell = (u16, u16);

/// Stored weight of a fresh excitatory synapse: 1.0 in Q8.8.
pub const INITIAL_WEIGHT: i32 = 256;

#[derive(Debug, Error)]
pub enum MazeError {
    #[error("maze line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Maze {
    pub width: u16,
    pub height: u16,
    /// Row-major, `true` for an obstacle.
    pub walls: Vec<bool>,
    pub start: Cell,
    pub goal: Cell,
}

impl Maze {
    fn idx(&self, (x, y): Cell) -> usize {
        y as usize * self.width as usize + x as usize
    }

    pub fn is_wall(&self, c: Cell) -> bool {
        self.walls[self.idx(c)]
    }

    pub fn neighbors(&self, (x, y): Cell) -> impl Iterator<Item = Cell> + '_ {
        let (w, h) = (self.width as i32, self.height as i32);
        [(0, -1), (-1, 0), (1, 0), (0, 1)].into_iter().filter_map(move |(dx, dy)| {
            let (nx, ny) = (x as i32 + dx, y as i32 + dy);
            (nx >= 0 && ny >= 0 && nx < w && ny < h).then_some((nx as u16, ny as u16))
        })
    }

    /// Random obstacles at the given density; start top-left, goal bottom-right.
    pub fn random(width: u16, height: u16, density: f64, seed: u64) -> Maze {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut walls: Vec<bool> = (0..width as usize * height as usize).map(|_| rng.gen_bool(density)).collect();
        let (start, goal) = ((0, 0), (width - 1, height - 1));
        walls[0] = false;
        walls[width as usize * height as usize - 1] = false;
        Maze { width, height, walls, start, goal }
    }

    /// `#` obstacle, `.` free, `S` start, `G` goal.
    pub fn parse(text: &str) -> Result<Maze, MazeError> {
        let rows: Vec<(usize, &str)> =
            text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()).collect();
        let err = |line, message: &str| MazeError::Parse { line, message: message.to_string() };
        let width = rows.first().ok_or_else(|| err(1, "empty maze"))?.1.chars().count();
        let (mut walls, mut start, mut goal) = (Vec::new(), None, None);
        for (y, (line, row)) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(err(*line, "row width differs from the first row"));
            }
            for (x, ch) in row.chars().enumerate() {
                let c = (x as u16, y as u16);
                match ch {
                    '#' => walls.push(true),
                    '.' => walls.push(false),
                    'S' => {
                        start = Some(c);
                        walls.push(false)
                    }
                    'G' => {
                        goal = Some(c);
                        walls.push(false)
                    }
                    _ => return Err(err(*line, &format!("unexpected character {ch:?}"))),
                }
            }
        }
        if width > u16::MAX as usize || rows.len() > u16::MAX as usize {
            return Err(MazeError::Invalid("maze too large".into()));
        }
        Ok(Maze {
            width: width as u16,
            height: rows.len() as u16,
            walls,
            start: start.ok_or_else(|| err(1, "no start cell S"))?,
            goal: goal.ok_or_else(|| err(1, "no goal cell G"))?,
        })
    }

    /// Text form, with `path` cells drawn as `*`.
    pub fn render(&self, path: &[Cell]) -> String {
        let mut s = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let c = (x, y);
                s.push(match () {
                    _ if c == self.start => 'S',
                    _ if c == self.goal => 'G',
                    _ if self.is_wall(c) => '#',
                    _ if path.contains(&c) => '*',
                    _ => '.',
                });
            }
            s.push('\n');
        }
        s
    }

    /// Breadth-first shortest path length in steps, if the goal is reachable.
    pub fn bfs_distance(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.walls.len()];
        let mut queue = VecDeque::from([self.start]);
        dist[self.idx(self.start)] = 0;
        while let Some(c) = queue.pop_front() {
            if c == self.goal {
                return Some(dist[self.idx(c)]);
            }
            for n in self.neighbors(c) {
                if !self.is_wall(n) && dist[self.idx(n)] == usize::MAX {
                    dist[self.idx(n)] = dist[self.idx(c)] + 1;
                    queue.push_back(n);
                }
            }
        }
        None
    }

    /// Starts at start, ends at goal, moves between 4-neighbors, avoids obstacles.
    pub fn is_valid_path(&self, path: &[Cell]) -> bool {
        path.first() == Some(&self.start)
            && path.last() == Some(&self.goal)
            && path.iter().all(|&c| c.0 < self.width && c.1 < self.height && !self.is_wall(c))
            && path.windows(2).all(|p| p[0].0.abs_diff(p[1].0) + p[0].1.abs_diff(p[1].1) == 1)
    }

    fn check(&self) -> Result<(), MazeError> {
        if self.walls.len() != self.width as usize * self.height as usize {
            return Err(MazeError::Invalid("obstacle map does not match the grid size".into()));
        }
        for (name, c) in [("start", self.start), ("goal", self.goal)] {
            if c.0 >= self.width || c.1 >= self.height || self.is_wall(c) {
                return Err(MazeError::Invalid(format!("{name} {c:?} is not a free cell")));
            }
        }
        Ok(())
    }
}

/// Population-local neuron numbering of the cells.
struct Layout {
    /// Per cell: population (0 free, 1 walls) and neuron index.
    neuron: Vec<(usize, u32)>,
    free: u32,
    walls: u32,
}

impl Layout {
    fn new(m: &Maze) -> Layout {
        let (mut free, mut walls) = (0, 0);
        let neuron = m
            .walls
            .iter()
            .map(|&w| {
                let c = if w { &mut walls } else { &mut free };
                *c += 1;
                (w as usize, *c - 1)
            })
            .collect();
        Layout { neuron, free, walls }
    }
}

/// The maze as a network: `free` cells fire once on any excitatory input and
/// learn with STDP; `walls` never fire and their synapses are fixed.
pub fn maze_network(m: &Maze) -> Result<NetworkDescription, MazeError> {
    m.check()?;
    let l = Layout::new(m);
    // adaptation stays at 1 after the first spike and holds v far below threshold
    let mut free = Population::new("free", l.free, "adlif")
        .param("p0", 0.0)
        .param("p1", 1.0)
        .param("p2", -16.0)
        .param("p3", 1.0)
        .param("p4", 0.0)
        .param("c2", 1.0)
        .param("v_th", 0.5)
        .param("P0", 0.125);
    free.learning = Some("stdp".into());
    free.sparse_learning = true;
    let mut net = NetworkDescription { populations: vec![free], projections: Vec::new() };
    if l.walls > 0 {
        net.populations.push(Population::new("walls", l.walls, "lif").param("v_th", 64.0));
    }

    let mut pairs = [Vec::new(), Vec::new(), Vec::new()];
    for y in 0..m.height {
        for x in 0..m.width {
            let (sp, s) = l.neuron[m.idx((x, y))];
            for n in m.neighbors((x, y)) {
                let (tp, t) = l.neuron[m.idx(n)];
                match (sp, tp) {
                    (0, 0) => pairs[0].push((s, t, None)),
                    (1, 0) => pairs[1].push((s, t, None)),
                    (0, 1) => pairs[2].push((s, t, None)),
                    _ => {}
                }
            }
        }
    }
    let [ff, wf, fw] = pairs;
    let specs = [
        ("corridor", "free", "free", ff, INITIAL_WEIGHT, true),
        ("block", "walls", "free", wf, -INITIAL_WEIGHT, false),
        ("sense", "free", "walls", fw, INITIAL_WEIGHT, false),
    ];
    for (name, src, dst, pairs, w, plastic) in specs {
        if pairs.is_empty() {
            continue;
        }
        let n = pairs.len();
        let mut p = Projection::new(name, src, dst, Pattern::Explicit(pairs), WeightSpec::Raw(vec![w; n]));
        p.bits = Some(16);
        p.plastic = plastic;
        net.projections.push(p);
    }
    Ok(net)
}

#[derive(Debug, Clone)]
pub struct MazeConfig {
    pub map: MapConfig,
    pub workers: usize,
    /// Defaults to the cell count when zero.
    pub tick_budget: u64,
}

impl Default for MazeConfig {
    fn default() -> Self {
        MazeConfig { map: MapConfig::default(), workers: 1, tick_budget: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeOutcome {
    /// `None` when the wavefront never reached the goal.
    pub path: Option<Vec<Cell>>,
    /// Simulated ticks until the goal fired or the wavefront died out.
    pub ticks: u64,
    pub spikes: usize,
    pub cores: usize,
}

impl fmt::Display for MazeOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "path length {} steps", p.len() - 1)?,
            None => write!(f, "unreachable")?,
        }
        write!(f, ", {} ticks, {} spikes on {} cores", self.ticks, self.spikes, self.cores)
    }
}

pub fn solve(m: &Maze, config: &MazeConfig) -> Result<MazeOutcome, MazeError> {
    let net = maze_network(m)?;
    let mapped = map_network(&net, &config.map)?;
    let container = mapped.container(&net);
    let mut sim = Simulator::new(&container, SimConfig { workers: config.workers, ..SimConfig::default() })?;
    let l = Layout::new(m);
    let cell = |c: Cell| l.neuron[m.idx(c)].1;
    sim.inject(0, cell(m.start), INITIAL_WEIGHT as i64)?;

    let budget = if config.tick_budget == 0 { m.walls.len() as u64 + 1 } else { config.tick_budget };
    let (mut spikes, mut reached) = (0, false);
    while sim.tick() < budget {
        let fired = sim.step()?;
        spikes += fired.len();
        if fired.iter().any(|s| s.population == 0 && s.neuron == cell(m.goal)) {
            reached = true;
            break;
        }
        if fired.is_empty() {
            break;
        }
    }
    let ticks = sim.tick();
    let cores = sim.cores().len();
    if !reached {
        return Ok(MazeOutcome { path: None, ticks, spikes, cores });
    }

    // Each strengthened synapse joins cells that fired on consecutive ticks,
    // so the walk back from the goal always terminates at the start.
    let mut path = vec![m.goal];
    let mut at = m.goal;
    while at != m.start {
        let prev = m
            .neighbors(at)
            .filter(|&n| !m.is_wall(n))
            .find(|&n| sim.synapse_weight(0, cell(n), 0, cell(at)).is_some_and(|w| w > INITIAL_WEIGHT))
            .ok_or_else(|| MazeError::Invalid(format!("no strengthened synapse into {at:?}")))?;
        if path.len() > m.walls.len() {
            return Err(MazeError::Invalid("backtracking did not terminate".into()));
        }
        path.push(prev);
        at = prev;
    }
    path.reverse();
    Ok(MazeOutcome { path: Some(path), ticks, spikes, cores })
}
