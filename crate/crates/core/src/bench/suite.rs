use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;

use super::runner::{run_simulation, Metrics, RunOptions};
use super::scenario::Scenario;
use super::train::{evaluate_checkpoint, CHECKPOINT_FILE};
use super::{find_optimal_source_clock, DEFAULT_CLOCK_HI, DEFAULT_CLOCK_LO};
use crate::dqn::Checkpoint;
use crate::error::Result;
use crate::heuristics::Heuristic;
use crate::sim::TWELVE_HOURS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteAgent {
    Static(Heuristic),
    Ddqn,
}

impl SuiteAgent {
    pub const ALL: [SuiteAgent; 4] = [
        SuiteAgent::Static(Heuristic::Fifo),
        SuiteAgent::Static(Heuristic::NearestNeighbor),
        SuiteAgent::Static(Heuristic::CostTable),
        SuiteAgent::Ddqn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteAgent::Static(h) => h.name(),
            SuiteAgent::Ddqn => "ddqn",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub horizon: f64,
    pub seed: u64,
    pub clock_lo: u32,
    pub clock_hi: u32,
    /// Directory holding `<scenario>/model.ckpt` files for the DDQN rows.
    pub checkpoints: Option<PathBuf>,
    /// When false, `wall_seconds` is written as 0 so reruns are byte-identical.
    pub record_wall_time: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            horizon: TWELVE_HOURS,
            seed: 0,
            clock_lo: DEFAULT_CLOCK_LO,
            clock_hi: DEFAULT_CLOCK_HI,
            checkpoints: None,
            record_wall_time: true,
        }
    }
}

/// A suite job that produced no row.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteFailure {
    pub scenario: String,
    pub agent: String,
    pub n_agvs: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub rows: Vec<Metrics>,
    pub failures: Vec<SuiteFailure>,
}

struct Job<'a> {
    scenario: &'a Scenario,
    agent: SuiteAgent,
    n_agvs: usize,
}

/// Static agents run every AGV variant at their searched clock; DDQN runs
/// the trained variant at clock zero. Jobs run in parallel; row order
/// follows (scenario, AGV count, agent).
pub fn benchmark_suite(
    scenarios: &[Scenario],
    agents: &[SuiteAgent],
    options: &SuiteOptions,
) -> SuiteReport {
    let mut jobs = Vec::new();
    for scenario in scenarios {
        for &n_agvs in scenario.agv_counts {
            for &agent in agents {
                if agent == SuiteAgent::Ddqn && n_agvs != scenario.agv_counts[0] {
                    continue;
                }
                jobs.push(Job {
                    scenario,
                    agent,
                    n_agvs,
                });
            }
        }
    }
    let results: Vec<_> = jobs.par_iter().map(|job| run_job(job, options)).collect();
    let mut report = SuiteReport::default();
    for (job, result) in jobs.iter().zip(results) {
        match result {
            Ok(mut row) => {
                if !options.record_wall_time {
                    row = row.without_wall_time();
                }
                report.rows.push(row);
            }
            Err(e) => report.failures.push(SuiteFailure {
                scenario: job.scenario.name.to_string(),
                agent: job.agent.name().to_string(),
                n_agvs: job.n_agvs,
                reason: e.to_string(),
            }),
        }
    }
    report
}

fn run_job(job: &Job<'_>, options: &SuiteOptions) -> Result<Metrics> {
    match job.agent {
        SuiteAgent::Static(mut h) => {
            let config = job.scenario.config_with_agvs(job.n_agvs)?;
            let run = RunOptions {
                scenario: job.scenario.name.to_string(),
                horizon: options.horizon,
                seed: options.seed,
                score: job.scenario.score.unwrap_or_default(),
            };
            let clock = find_optimal_source_clock(
                &mut h,
                &config,
                options.clock_lo,
                options.clock_hi,
                &run,
            )?;
            run_simulation(&mut h, &config.with_source_clock(f64::from(clock)), &run)
        }
        SuiteAgent::Ddqn => {
            let dir = options
                .checkpoints
                .clone()
                .unwrap_or_else(|| PathBuf::from("checkpoints"));
            let path = dir.join(job.scenario.name).join(CHECKPOINT_FILE);
            let checkpoint = Checkpoint::load(&path)?;
            evaluate_checkpoint(job.scenario, &checkpoint, options.horizon, options.seed)
        }
    }
}

/// Plain-text tables of throughput and total parts, one line per
/// (scenario, AGV count) and one column per agent.
pub fn summary_table(rows: &[Metrics]) -> String {
    let mut agents: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(String, usize), BTreeMap<&str, &Metrics>> = BTreeMap::new();
    let mut order: Vec<(String, usize)> = Vec::new();
    for row in rows {
        if !agents.contains(&row.agent.as_str()) {
            agents.push(&row.agent);
        }
        let key = (row.scenario.clone(), row.n_agvs);
        if !cells.contains_key(&key) {
            order.push(key.clone());
        }
        cells.entry(key).or_default().insert(&row.agent, row);
    }
    let mut out = String::new();
    for (title, cell) in [
        (
            "throughput (pph)",
            (|m: &Metrics| format!("{:.1}", m.throughput_pph)) as fn(&Metrics) -> String,
        ),
        ("total parts", |m: &Metrics| m.total_parts.to_string()),
        ("source clock (s)", |m: &Metrics| {
            format!("{}", m.source_clock_s)
        }),
    ] {
        let _ = writeln!(out, "{title}");
        let _ = write!(out, "{:<18}{:>5}", "scenario", "agvs");
        for a in &agents {
            let _ = write!(out, "{a:>12}");
        }
        out.push('\n');
        for key in &order {
            let _ = write!(out, "{:<18}{:>5}", key.0, key.1);
            for a in &agents {
                let text = match cells[key].get(a) {
                    Some(m) if m.deadlocked => format!("{}*", cell(m)),
                    Some(m) => cell(m),
                    None => "-".into(),
                };
                let _ = write!(out, "{text:>12}");
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out.push_str("* run ended in deadlock\n");
    out
}
