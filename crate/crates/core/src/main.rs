// SPDX-License-Identifier: Apache-2.0

use clap::{Parser, Subcommand};
use darwin3::isa::{assemble, binary, disassemble};
use darwin3::mapper::{map_network, report_metrics, Container, FabricSpec, MapConfig, NetworkDescription};
use darwin3::maze::{solve, Maze, MazeConfig};
use darwin3::models::EnergyCoefficients;
use darwin3::sim::{simulate, SimConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "darwin3", version, about = "Assembler, mapper and simulator for a neuromorphic many-core fabric")]
struct Cli {
    /// Fabric as WxH or WxH,chips (chips in a row).
    #[arg(long, global = true, default_value = "24x24")]
    fabric: FabricSpec,
    #[arg(long, global = true, default_value_t = 100)]
    ticks: u64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Stop at the first fault instead of recording it.
    #[arg(long, global = true)]
    strict: bool,
    /// Write the delivery-ordered spike trace here.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Energy coefficients "PI,PB,PN,PS" (pW, pW, pW per neuron, pJ per SOP).
    #[arg(long, global = true)]
    energy: Option<EnergyCoefficients>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a text program into binary words.
    Asm {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print a binary program as text.
    Disasm {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Map a network description to a core-image container.
    Map {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the metrics report (JSON).
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run a core-image container.
    Sim {
        input: PathBuf,
        /// Write the full report (JSON) here instead of a summary on stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve a maze by spike propagation.
    Maze {
        /// Maze file (`#` obstacle, `.` free, `S` start, `G` goal).
        #[arg(long, conflicts_with = "size")]
        file: Option<PathBuf>,
        /// Side of a random square maze.
        #[arg(long, default_value_t = 15)]
        size: u16,
        /// Obstacle density of a random maze.
        #[arg(long, default_value_t = 0.3)]
        density: f64,
    },
    /// Map a network description and print its metrics (JSON).
    Metrics { input: PathBuf },
}

/// Exit status 2 for bad input, 3 for a simulation fault.
enum Failure {
    Input(String),
    Sim(String),
}

fn input<E: std::fmt::Display>(context: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{}: {e}", context.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(input(path))
}

fn load_net(path: &Path) -> Result<NetworkDescription, Failure> {
    NetworkDescription::load(path).map_err(input(path))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let map_config = MapConfig { fabric: cli.fabric, ..MapConfig::default() };
    match cli.command {
        Command::Asm { input: src, output } => {
            let text = std::fs::read_to_string(&src).map_err(input(&src))?;
            let program = assemble(&text).map_err(input(&src))?;
            write(&output, &binary::write_program(&program.words))
        }
        Command::Disasm { input: src, output } => {
            let bytes = std::fs::read(&src).map_err(input(&src))?;
            let text = disassemble(&binary::read_program(&bytes).map_err(input(&src))?);
            match output {
                Some(o) => write(&o, text.as_bytes()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Map { input: src, output, metrics } => {
            let net = load_net(&src)?;
            let mapped = map_network(&net, &map_config).map_err(input(&src))?;
            mapped.container(&net).save(&output).map_err(input(&output))?;
            let m = report_metrics(&mapped);
            println!(
                "{} cores, {} neurons, {} synapses, {} bits of table memory",
                m.cores.len(),
                m.neurons,
                m.synapses,
                m.footprint.total()
            );
            if let Some(path) = metrics {
                write(&path, serde_json::to_string_pretty(&m).expect("metrics serialize").as_bytes())?;
            }
            Ok(())
        }
        Command::Sim { input: src, report } => {
            let container = Container::load(&src).map_err(input(&src))?;
            let config = SimConfig {
                ticks: cli.ticks,
                seed: cli.seed,
                workers: cli.workers,
                strict: cli.strict,
                trace: cli.trace.is_some(),
                energy: cli.energy.unwrap_or_default(),
                ..SimConfig::default()
            };
            let result = simulate(&container, config).map_err(|e| Failure::Sim(e.to_string()))?;
            if let Some(path) = &cli.trace {
                write(path, result.trace.as_bytes())?;
            }
            for f in &result.faults {
                eprintln!("fault at tick {}: {}", f.tick, f.message);
            }
            match report {
                Some(path) => write(&path, serde_json::to_string_pretty(&result).expect("report serializes").as_bytes())?,
                None => println!(
                    "{} ticks, {} spikes, {} SOPs, {} packets, {:.3} pJ ({:.3} pJ per SOP)",
                    result.ticks,
                    result.spikes.len(),
                    result.sops,
                    result.network.delivered,
                    result.energy.energy_pj,
                    result.energy.marginal_pj_per_sop
                ),
            }
            if result.faults.is_empty() {
                Ok(())
            } else {
                Err(Failure::Sim(format!("{} faults recorded", result.faults.len())))
            }
        }
        Command::Maze { file, size, density } => {
            let maze = match &file {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(input(path))?;
                    Maze::parse(&text).map_err(input(path))?
                }
                None => {
                    if size < 2 || !(0.0..1.0).contains(&density) {
                        return Err(Failure::Input("maze needs size >= 2 and density in [0, 1)".into()));
                    }
                    Maze::random(size, size, density, cli.seed)
                }
            };
            let config = MazeConfig { map: map_config, workers: cli.workers, tick_budget: 0 };
            let out = solve(&maze, &config).map_err(|e| match e {
                darwin3::maze::MazeError::Sim(e) => Failure::Sim(e.to_string()),
                e => Failure::Input(e.to_string()),
            })?;
            print!("{}", maze.render(out.path.as_deref().unwrap_or(&[])));
            println!("{out}");
            Ok(())
        }
        Command::Metrics { input: src } => {
            let net = load_net(&src)?;
            let mapped = map_network(&net, &map_config).map_err(input(&src))?;
            println!("{}", serde_json::to_string_pretty(&report_metrics(&mapped)).expect("metrics serialize"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Sim(m)) => {
            eprintln!("simulation fault: {m}");
            ExitCode::from(3)
        }
    }
}
