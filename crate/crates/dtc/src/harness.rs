//! Deterministic in-process master-workers-aggregator simulator.
//!
//! The master is the routing rule itself: an edge is unicast when both
//! endpoints hash to one worker and broadcast otherwise. Workers own their
//! state and never communicate; the aggregator merges flushed deltas in
//! (worker, sequence) order. A run is a pure function of (config, stream,
//! query points). The parallel mode executes workers on threads but
//! produces bit-identical output to the sequential mode, because each
//! worker's event sequence and PRNG stream are independent of scheduling.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use dtc_core::aggregation::{AggregationError, Aggregator, CountSnapshot, WorkerDelta};
use dtc_core::metrics::{evaluate_runs, RunReport};
use dtc_core::oracle::exact_at_positions;
use dtc_core::routing::{Partitioner, RoutingDecision, WorkerId};
use dtc_core::sampling::{AdaptivePool, PairingState, SamplingError};
use dtc_core::stream::StreamError;
use dtc_core::workers::{ArWorker, FdWorker, WorkerError};
use dtc_core::{rng, CanonicalStream, Sign, SignedEdge};

/// Which estimator the cluster runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// Insertion-only, adaptive sampling-ratio pool.
    AdaptiveRatio { ratio_threshold: f64, total_budget: u64 },
    /// Fully dynamic random-pairing sampler.
    FullyDynamic,
}

/// Default total budget when none is given: 64 reservoirs per worker.
pub const DEFAULT_BUDGET_FACTOR: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    pub algorithm: Algorithm,
    pub workers: u32,
    /// Per-worker reservoir capacity k.
    pub budget: u64,
    /// Base seed; per-worker sampler streams derive from it.
    pub seed: u64,
    /// Seed of the node-partitioning hash.
    pub hash_seed: u64,
}

impl ClusterConfig {
    pub fn adaptive_ratio(
        workers: u32,
        budget: u64,
        ratio_threshold: f64,
        total_budget: Option<u64>,
    ) -> Self {
        let total = total_budget.unwrap_or(budget.saturating_mul(DEFAULT_BUDGET_FACTOR));
        Self {
            algorithm: Algorithm::AdaptiveRatio { ratio_threshold, total_budget: total },
            workers,
            budget,
            seed: 0,
            hash_seed: 0,
        }
    }

    pub fn fully_dynamic(workers: u32, budget: u64) -> Self {
        Self {
            algorithm: Algorithm::FullyDynamic,
            workers,
            budget,
            seed: 0,
            hash_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_hash_seed(mut self, hash_seed: u64) -> Self {
        self.hash_seed = hash_seed;
        self
    }

    pub fn algo_name(&self) -> &'static str {
        match self.algorithm {
            Algorithm::AdaptiveRatio { .. } => "ar",
            Algorithm::FullyDynamic => "fd",
        }
    }

    pub fn ratio_threshold(&self) -> Option<f64> {
        match self.algorithm {
            Algorithm::AdaptiveRatio { ratio_threshold, .. } => Some(ratio_threshold),
            Algorithm::FullyDynamic => None,
        }
    }

    pub fn total_budget(&self) -> Option<u64> {
        match self.algorithm {
            Algorithm::AdaptiveRatio { total_budget, .. } => Some(total_budget),
            Algorithm::FullyDynamic => None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.workers < 1 {
            return Err(HarnessError::NoWorkers);
        }
        if self.budget < 2 {
            return Err(HarnessError::BudgetTooSmall(self.budget));
        }
        if let Algorithm::AdaptiveRatio { ratio_threshold, total_budget } = self.algorithm {
            if !(ratio_threshold > 0.0 && ratio_threshold <= 1.0) {
                return Err(HarnessError::InvalidRatioThreshold(ratio_threshold));
            }
            if total_budget < self.budget {
                return Err(HarnessError::TotalBudgetBelowReservoir {
                    total_budget,
                    budget: self.budget,
                });
            }
        }
        Ok(())
    }
}

/// How run segments execute between flush points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecutionMode {
    Sequential,
    Parallel,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration needs at least one worker")]
    NoWorkers,
    #[error("per-worker budget {0} too small (need k >= 2)")]
    BudgetTooSmall(u64),
    #[error("ratio threshold {0} outside (0, 1]")]
    InvalidRatioThreshold(f64),
    #[error("total budget {total_budget} below one reservoir of {budget}")]
    TotalBudgetBelowReservoir { total_budget: u64, budget: u64 },
    #[error("adaptive-ratio runs take insertion-only streams; deletion at event {index}")]
    DeletionUnsupported { index: usize },
    #[error("query position {position} beyond stream length {len}")]
    QueryBeyondStream { position: u64, len: u64 },
    #[error("sweep needs at least one run")]
    NoRuns,
    #[error("sweep needs at least one configuration")]
    EmptyGrid,
    #[error(transparent)]
    Worker(#[from] WorkerError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

/// Per-worker counters for the run report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkerReport {
    pub worker: WorkerId,
    pub received: u64,
    pub offered: u64,
    pub stored_peak: u64,
    pub rotations: u64,
    pub budget_exhaustion_events: u64,
    pub deletions_sampled: u64,
    pub deletions_unsampled: u64,
}

/// Output of one cluster run.
#[derive(Debug, Clone)]
pub struct RunResult {
    /// One snapshot per flush position, ascending; the last is end-of-stream.
    pub snapshots: Vec<CountSnapshot>,
    pub worker_reports: Vec<WorkerReport>,
    pub wall: Duration,
}

impl RunResult {
    pub fn final_snapshot(&self) -> &CountSnapshot {
        self.snapshots.last().expect("runs always flush at end of stream")
    }

    pub fn budget_exhaustion_events(&self) -> u64 {
        self.worker_reports.iter().map(|w| w.budget_exhaustion_events).sum()
    }
}

enum EngineWorker {
    Ar(ArWorker),
    Fd(FdWorker),
}

impl EngineWorker {
    fn build(config: &ClusterConfig, partitioner: Partitioner, id: WorkerId) -> Result<Self, HarnessError> {
        let sampler_seed = rng::mix64(config.seed ^ id as u64);
        Ok(match config.algorithm {
            Algorithm::AdaptiveRatio { ratio_threshold, total_budget } => EngineWorker::Ar(
                ArWorker::new(
                    id,
                    partitioner,
                    AdaptivePool::new(config.budget, ratio_threshold, total_budget, sampler_seed)?,
                ),
            ),
            Algorithm::FullyDynamic => EngineWorker::Fd(FdWorker::new(
                id,
                partitioner,
                PairingState::new(config.budget, sampler_seed),
            )),
        })
    }

    fn id(&self) -> WorkerId {
        match self {
            EngineWorker::Ar(w) => w.id(),
            EngineWorker::Fd(w) => w.id(),
        }
    }

    fn process(&mut self, event: SignedEdge) -> Result<(), WorkerError> {
        match self {
            EngineWorker::Ar(w) => w.process(event),
            EngineWorker::Fd(w) => w.process(event),
        }
    }

    fn take_pending(&mut self) -> dtc_core::workers::LocalCounts {
        match self {
            EngineWorker::Ar(w) => w.take_pending(),
            EngineWorker::Fd(w) => w.take_pending(),
        }
    }

    fn report(&self) -> WorkerReport {
        match self {
            EngineWorker::Ar(w) => {
                let stats = w.stats();
                WorkerReport {
                    worker: w.id(),
                    received: stats.received,
                    offered: stats.offered,
                    stored_peak: stats.stored_peak,
                    rotations: w.pool().segments().len() as u64,
                    budget_exhaustion_events: w.pool().exhaustion_events(),
                    deletions_sampled: 0,
                    deletions_unsampled: 0,
                }
            }
            EngineWorker::Fd(w) => {
                let stats = w.stats();
                WorkerReport {
                    worker: w.id(),
                    received: stats.received,
                    offered: stats.offered,
                    stored_peak: stats.stored_peak,
                    rotations: 0,
                    budget_exhaustion_events: 0,
                    deletions_sampled: w.pairing().deletions_sampled(),
                    deletions_unsampled: w.pairing().deletions_unsampled(),
                }
            }
        }
    }
}

/// Flush positions for a run: the normalized query points plus end-of-stream.
fn flush_positions(query_points: &[u64], len: u64) -> Result<Vec<u64>, HarnessError> {
    let mut positions: Vec<u64> = query_points.to_vec();
    positions.sort_unstable();
    positions.dedup();
    if let Some(&last) = positions.last() {
        if last > len {
            return Err(HarnessError::QueryBeyondStream { position: last, len });
        }
    }
    if positions.last() != Some(&len) {
        positions.push(len);
    }
    Ok(positions)
}

/// Drives `stream` through a cluster, flushing worker deltas at each query
/// point and at end of stream. Deterministic given (config, stream, query
/// points): the execution mode changes scheduling only.
pub fn run_stream(
    config: &ClusterConfig,
    stream: &CanonicalStream,
    query_points: &[u64],
    mode: ExecutionMode,
) -> Result<RunResult, HarnessError> {
    config.validate()?;
    if matches!(config.algorithm, Algorithm::AdaptiveRatio { .. }) && !stream.is_insertion_only() {
        let index = stream
            .events()
            .iter()
            .position(|e| e.sign == Sign::Delete)
            .expect("non-insertion-only stream has a deletion");
        return Err(HarnessError::DeletionUnsupported { index });
    }

    let positions = flush_positions(query_points, stream.len() as u64)?;
    let partitioner = Partitioner::new(config.workers, config.hash_seed);
    let mut workers: Vec<EngineWorker> = (0..config.workers)
        .map(|id| EngineWorker::build(config, partitioner, id))
        .collect::<Result<_, _>>()?;
    let mut aggregator = Aggregator::new(config.workers);

    let start = Instant::now();
    let mut cursor = 0u64;
    for (flush_index, &position) in positions.iter().enumerate() {
        let segment = &stream.events()[cursor as usize..position as usize];
        match mode {
            ExecutionMode::Sequential => {
                for event in segment {
                    match partitioner.route(event.edge) {
                        RoutingDecision::Unicast(w) => workers[w as usize].process(*event)?,
                        RoutingDecision::Broadcast => {
                            for worker in workers.iter_mut() {
                                worker.process(*event)?;
                            }
                        }
                    }
                }
            }
            ExecutionMode::Parallel => {
                workers.par_iter_mut().try_for_each(|worker| -> Result<(), WorkerError> {
                    let id = worker.id();
                    for event in segment {
                        if partitioner.delivers_to(id, event.edge) {
                            worker.process(*event)?;
                        }
                    }
                    Ok(())
                })?;
            }
        }
        for worker in workers.iter_mut() {
            aggregator.accumulate(WorkerDelta {
                worker: worker.id(),
                sequence: flush_index as u64,
                counts: worker.take_pending(),
            })?;
        }
        aggregator.mark_position(position);
        cursor = position;
    }
    let wall = start.elapsed();

    Ok(RunResult {
        snapshots: aggregator.snapshots().to_vec(),
        worker_reports: workers.iter().map(|w| w.report()).collect(),
        wall,
    })
}

/// One sweep cell: a configuration scored over `runs` seeded repetitions.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub config: ClusterConfig,
    pub report: RunReport,
    pub wall_total: Duration,
    pub budget_exhaustion_events: u64,
}

/// Runs every configuration `runs` times (run `i` uses seed `base + i`) and
/// scores the final estimates against the exact oracle. Runs execute in
/// parallel across (cell, run) pairs; results are grouped positionally, so
/// the output is deterministic.
pub fn sweep(
    configs: &[ClusterConfig],
    stream: &CanonicalStream,
    runs: u32,
    mode: ExecutionMode,
) -> Result<Vec<SweepCell>, HarnessError> {
    if configs.is_empty() {
        return Err(HarnessError::EmptyGrid);
    }
    if runs < 1 {
        return Err(HarnessError::NoRuns);
    }
    for config in configs {
        config.validate()?;
    }
    let exact = exact_at_positions(stream, &[stream.len() as u64])?
        .pop()
        .expect("one snapshot requested");

    let jobs: Vec<(usize, u32)> =
        (0..configs.len()).flat_map(|c| (0..runs).map(move |r| (c, r))).collect();
    let outcomes: Vec<(CountSnapshot, Duration, u64)> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let config = configs[c].with_seed(configs[c].seed.wrapping_add(r as u64));
            run_stream(&config, stream, &[], mode).map(|result| {
                (
                    result.final_snapshot().clone(),
                    result.wall,
                    result.budget_exhaustion_events(),
                )
            })
        })
        .collect::<Result<_, _>>()?;

    let mut cells = Vec::with_capacity(configs.len());
    for (c, config) in configs.iter().enumerate() {
        let slice = &outcomes[c * runs as usize..(c + 1) * runs as usize];
        let finals: Vec<CountSnapshot> = slice.iter().map(|(s, _, _)| s.clone()).collect();
        cells.push(SweepCell {
            config: *config,
            report: evaluate_runs(&exact, &finals),
            wall_total: slice.iter().map(|(_, w, _)| *w).sum(),
            budget_exhaustion_events: slice.iter().map(|(_, _, e)| e).sum(),
        });
    }
    Ok(cells)
}
