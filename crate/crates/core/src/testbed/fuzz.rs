use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::codegen::{compile, to_minisim, MapCatalog, PlacementConfig};
use crate::ir::Scenario;

use super::agent::EgoPolicy;
use super::mutate::{mutate, MutationKind};
use super::sim::{run, BugReport, BugSignature, SimConfig};

#[derive(Debug, Clone)]
pub struct FuzzConfig {
    pub iterations: usize,
    pub seed: u64,
    pub catalog: MapCatalog,
    pub placement: PlacementConfig,
    pub sim: SimConfig,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
}

impl FuzzConfig {
    pub fn new(iterations: usize, seed: u64) -> FuzzConfig {
        FuzzConfig {
            iterations,
            seed,
            catalog: MapCatalog::builtin(),
            placement: PlacementConfig::default(),
            sim: SimConfig::default(),
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FuzzError {
    #[error("no seed survived the dry run ({dropped} dropped)")]
    NoValidSeeds { dropped: usize },
    #[error("the iteration budget must be at least 1")]
    EmptyBudget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedSeed {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TimelineEntry {
    pub iteration: usize,
    pub mutation: MutationKind,
    pub seed_index: usize,
    pub signature: BugSignature,
    pub distinct_so_far: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FuzzStats {
    pub iterations: usize,
    pub seed: u64,
    pub agent: String,
    pub active_seeds: Vec<usize>,
    pub dropped_seeds: Vec<DroppedSeed>,
    pub distinct_bugs: usize,
    /// 1-based iteration of the first bug, if any.
    pub first_bug_iteration: Option<usize>,
    pub total_reports: usize,
    pub inapplicable_mutations: usize,
    pub compile_failures: usize,
    pub signatures: Vec<BugSignature>,
    pub timeline: Vec<TimelineEntry>,
}

impl FuzzStats {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("stats serialize");
        s.push('\n');
        s
    }

    /// One row per newly discovered signature.
    pub fn timeline_csv(&self) -> String {
        let mut o = String::from("iteration,mutation,seed_index,kind,participants,lane,distinct_bugs\n");
        for e in &self.timeline {
            let _ = writeln!(
                o,
                "{},{},{},{},{},{},{}",
                e.iteration,
                e.mutation,
                e.seed_index,
                e.signature.kind.as_str(),
                e.signature.participants.join("+"),
                e.signature.lane,
                e.distinct_so_far
            );
        }
        o
    }
}

enum Outcome {
    Bugs(Vec<BugReport>),
    Inapplicable,
    CompileFailed,
}

fn execute(s: &Scenario, config: &FuzzConfig, agent: &dyn EgoPolicy) -> Result<Vec<BugReport>, String> {
    let cs = compile(s, &config.catalog, config.seed, &config.placement).map_err(|e| e.to_string())?;
    let out = run(&to_minisim(&cs), agent, &config.sim).map_err(|e| e.to_string())?;
    Ok(out.bugs)
}

/// Drops seeds that fail to compile or already trigger an oracle with no
/// mutation applied. Returns the indices of the survivors.
pub fn dry_run(seeds: &[Scenario], config: &FuzzConfig, agent: &dyn EgoPolicy) -> (Vec<usize>, Vec<DroppedSeed>) {
    let mut active = Vec::new();
    let mut dropped = Vec::new();
    for (index, s) in seeds.iter().enumerate() {
        match execute(s, config, agent) {
            Ok(bugs) if bugs.is_empty() => active.push(index),
            Ok(bugs) => dropped.push(DroppedSeed {
                index,
                reason: format!("triggers {} without mutation", bugs[0].signature()),
            }),
            Err(e) => dropped.push(DroppedSeed { index, reason: e }),
        }
    }
    (active, dropped)
}

fn iteration(
    it: usize,
    seeds: &[Scenario],
    active: &[usize],
    config: &FuzzConfig,
    agent: &dyn EgoPolicy,
) -> (MutationKind, usize, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(it as u64);
    let seed_index = active[(it - 1) % active.len()];
    let op = *MutationKind::ALL.choose(&mut rng).expect("non-empty");
    let outcome = match mutate(&seeds[seed_index], op, rng.next_u64()) {
        Err(_) => Outcome::Inapplicable,
        Ok(m) => match execute(&m, config, agent) {
            Ok(bugs) => Outcome::Bugs(bugs),
            Err(_) => Outcome::CompileFailed,
        },
    };
    (op, seed_index, outcome)
}

/// Mutation-based fuzzing over a seed corpus: dry-run filtering, then per
/// iteration one round-robin seed, one random mutation and one simulation,
/// with bug signatures deduplicated across the run. Iterations draw their
/// randomness from `(seed, iteration)` only, so the result is the same for
/// any number of jobs.
pub fn fuzz(seeds: &[Scenario], agent: &dyn EgoPolicy, config: &FuzzConfig) -> Result<FuzzStats, FuzzError> {
    if config.iterations == 0 {
        return Err(FuzzError::EmptyBudget);
    }
    let (active, dropped) = dry_run(seeds, config, agent);
    if active.is_empty() {
        return Err(FuzzError::NoValidSeeds { dropped: dropped.len() });
    }

    let jobs = config.jobs.max(1);
    let its: Vec<usize> = (1..=config.iterations).collect();
    let chunk = its.len().div_ceil(jobs);
    let mut results: Vec<(usize, MutationKind, usize, Outcome)> = std::thread::scope(|scope| {
        let handles: Vec<_> = its
            .chunks(chunk)
            .map(|part| {
                let active = &active;
                scope.spawn(move || {
                    part.iter()
                        .map(|&it| {
                            let (op, idx, out) = iteration(it, seeds, active, config, agent);
                            (it, op, idx, out)
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("fuzz worker panicked"))
            .collect()
    });
    results.sort_by_key(|r| r.0);

    let mut seen = BTreeSet::new();
    let mut timeline = Vec::new();
    let mut total_reports = 0;
    let mut inapplicable = 0;
    let mut compile_failures = 0;
    for (it, op, seed_index, outcome) in results {
        match outcome {
            Outcome::Inapplicable => inapplicable += 1,
            Outcome::CompileFailed => compile_failures += 1,
            Outcome::Bugs(bugs) => {
                total_reports += bugs.len();
                for b in bugs {
                    let sig = b.signature();
                    if seen.insert(sig.clone()) {
                        timeline.push(TimelineEntry {
                            iteration: it,
                            mutation: op,
                            seed_index,
                            signature: sig,
                            distinct_so_far: seen.len(),
                        });
                    }
                }
            }
        }
    }
    Ok(FuzzStats {
        iterations: config.iterations,
        seed: config.seed,
        agent: agent.name().to_string(),
        active_seeds: active,
        dropped_seeds: dropped,
        distinct_bugs: seen.len(),
        first_bug_iteration: timeline.first().map(|e| e.iteration),
        total_reports,
        inapplicable_mutations: inapplicable,
        compile_failures,
        signatures: seen.into_iter().collect(),
        timeline,
    })
}
