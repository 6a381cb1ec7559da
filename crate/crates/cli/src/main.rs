use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use plantsim_core::bench::{
    self, benchmark_suite, checkpoint_agent, evaluate_checkpoint, find_optimal_source_clock,
    run_simulation_logged, save_training, summary_table, train_agent, write_metrics_csv, RunLogs,
    RunOptions, SuiteAgent, SuiteOptions, SCENARIOS,
};
use plantsim_core::dqn::{Checkpoint, Hyperparams};
use plantsim_core::heuristics::Heuristic;
use plantsim_core::{Agent, Error, PlantConfig, Result};

#[derive(Parser)]
#[command(
    name = "plantsim",
    version,
    about = "AGV dispatching in a simulated production plant"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentKind {
    Fifo,
    Nn,
    CostTable,
    Ddqn,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and print its metrics row.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        agent: AgentKind,
        /// Replace the config's fleet with N AGVs.
        #[arg(long)]
        agvs: Option<usize>,
        #[arg(long)]
        source_clock: Option<f64>,
        #[arg(long, default_value_t = 12.0)]
        horizon_hours: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the event trace (JSON lines).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the decision log (JSON lines).
        #[arg(long)]
        decisions: Option<PathBuf>,
        /// Network for `--agent ddqn`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Find the lowest deadlock-free source clock for an agent.
    SearchClock {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        agent: AgentKind,
        #[arg(long, default_value_t = bench::DEFAULT_CLOCK_LO)]
        lo: u32,
        #[arg(long, default_value_t = bench::DEFAULT_CLOCK_HI)]
        hi: u32,
        #[arg(long, default_value_t = 12.0)]
        horizon_hours: f64,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train a DDQN agent on a shipped scenario.
    Train {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 300)]
        episodes: usize,
        /// JSON file overriding hyperparameters.
        #[arg(long)]
        hyper: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        horizon_hours: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a trained network greedily on its scenario at source clock 0.
    Evaluate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 12.0)]
        horizon_hours: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every shipped scenario with every agent.
    Benchmark {
        #[arg(long)]
        out: PathBuf,
        /// Directory with `<scenario>/model.ckpt` for the DDQN rows.
        #[arg(long, default_value = "checkpoints")]
        checkpoints: PathBuf,
        /// Restrict to these scenarios (comma separated).
        #[arg(long, value_delimiter = ',')]
        scenarios: Vec<String>,
        /// Restrict to these agents (comma separated).
        #[arg(long, value_enum, value_delimiter = ',')]
        agents: Vec<AgentKind>,
        #[arg(long, default_value_t = 12.0)]
        horizon_hours: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write 0 for wall time so reruns produce identical files.
        #[arg(long)]
        no_wall_time: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn hours(h: f64) -> Result<f64> {
    if h.is_finite() && h >= 0.0 {
        Ok(h * 3600.0)
    } else {
        Err(Error::InvalidArgument(format!(
            "horizon must be non-negative, got {h}"
        )))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn make_agent(
    kind: AgentKind,
    config: &PlantConfig,
    checkpoint: Option<&Path>,
) -> Result<Box<dyn Agent>> {
    Ok(match kind {
        AgentKind::Fifo => Box::new(Heuristic::Fifo),
        AgentKind::Nn => Box::new(Heuristic::NearestNeighbor),
        AgentKind::CostTable => Box::new(Heuristic::CostTable),
        AgentKind::Ddqn => {
            let path = checkpoint
                .ok_or_else(|| Error::InvalidArgument("--agent ddqn needs --checkpoint".into()))?;
            Box::new(checkpoint_agent(&Checkpoint::load(path)?, config)?)
        }
    })
}

fn stdout_metrics(rows: &[bench::Metrics]) -> Result<()> {
    write_metrics_csv(io::stdout().lock(), rows)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            agent,
            agvs,
            source_clock,
            horizon_hours,
            seed,
            trace,
            decisions,
            checkpoint,
        } => {
            let mut plant = PlantConfig::load(&config)?;
            if let Some(n) = agvs {
                plant = plant.with_agv_count(n);
            }
            if let Some(c) = source_clock {
                plant = plant.with_source_clock(c);
            }
            let mut agent = make_agent(agent, &plant, checkpoint.as_deref())?;
            let mut logs = RunLogs::default();
            if let Some(p) = &trace {
                logs.trace = Some(Box::new(create(p)?));
            }
            if let Some(p) = &decisions {
                logs.decisions = Some(Box::new(create(p)?));
            }
            let options = RunOptions {
                scenario: scenario_label(&config),
                horizon: hours(horizon_hours)?,
                seed,
                ..RunOptions::default()
            };
            let row = run_simulation_logged(agent.as_mut(), &plant, &options, logs)?;
            stdout_metrics(&[row])
        }
        Command::SearchClock {
            config,
            agent,
            lo,
            hi,
            horizon_hours,
            checkpoint,
        } => {
            let plant = PlantConfig::load(&config)?;
            let mut agent = make_agent(agent, &plant, checkpoint.as_deref())?;
            let options = RunOptions {
                scenario: scenario_label(&config),
                horizon: hours(horizon_hours)?,
                ..RunOptions::default()
            };
            let clock = find_optimal_source_clock(agent.as_mut(), &plant, lo, hi, &options)?;
            println!("{clock}");
            Ok(())
        }
        Command::Train {
            scenario,
            episodes,
            hyper,
            out,
            horizon_hours,
            seed,
        } => {
            let scenario = bench::scenario(&scenario)?;
            let hyper = match hyper {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    serde_json::from_str::<Hyperparams>(&text)?
                }
                None => Hyperparams::default(),
            };
            let training = train_agent(scenario, &hyper, episodes, hours(horizon_hours)?, seed)?;
            let path = save_training(&training, &out)?;
            println!(
                "{} episodes, final 10-episode mean parts {:.1}, checkpoint {}",
                training.curve.len(),
                training.final_mean_parts(10),
                path.display()
            );
            Ok(())
        }
        Command::Evaluate {
            scenario,
            checkpoint,
            horizon_hours,
            seed,
        } => {
            let scenario = bench::scenario(&scenario)?;
            let checkpoint = Checkpoint::load(&checkpoint)?;
            let row = evaluate_checkpoint(scenario, &checkpoint, hours(horizon_hours)?, seed)?;
            stdout_metrics(&[row])
        }
        Command::Benchmark {
            out,
            checkpoints,
            scenarios,
            agents,
            horizon_hours,
            seed,
            no_wall_time,
        } => {
            let selected: Vec<_> = if scenarios.is_empty() {
                SCENARIOS.to_vec()
            } else {
                scenarios
                    .iter()
                    .map(|s| bench::scenario(s).copied())
                    .collect::<Result<_>>()?
            };
            let agents: Vec<SuiteAgent> = if agents.is_empty() {
                SuiteAgent::ALL.to_vec()
            } else {
                agents.into_iter().map(suite_agent).collect()
            };
            let options = SuiteOptions {
                horizon: hours(horizon_hours)?,
                seed,
                checkpoints: Some(checkpoints),
                record_wall_time: !no_wall_time,
                ..SuiteOptions::default()
            };
            let report = benchmark_suite(&selected, &agents, &options);
            let mut file = create(&out)?;
            write_metrics_csv(&mut file, &report.rows)?;
            file.flush().map_err(|e| Error::io(&out, e))?;
            print!("{}", summary_table(&report.rows));
            for f in &report.failures {
                eprintln!(
                    "skipped {} / {} / {} AGVs: {}",
                    f.scenario, f.agent, f.n_agvs, f.reason
                );
            }
            Ok(())
        }
    }
}

fn suite_agent(kind: AgentKind) -> SuiteAgent {
    match kind {
        AgentKind::Fifo => SuiteAgent::Static(Heuristic::Fifo),
        AgentKind::Nn => SuiteAgent::Static(Heuristic::NearestNeighbor),
        AgentKind::CostTable => SuiteAgent::Static(Heuristic::CostTable),
        AgentKind::Ddqn => SuiteAgent::Ddqn,
    }
}

fn scenario_label(config: &Path) -> String {
    config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "custom".into())
}
