use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{AdversarySpec, ExperimentConfig};
use crate::boosting::{boost, split_edges};
use crate::error::{Error, Result};
use crate::metrics::{
    closeness_strong, cut_cost, delta_bounds, grothendieck_residual, within_cost, BoundInputs,
    DeltaBounds, ResidualReport, GROTHENDIECK_BOUND,
};
use crate::recovery::{compute_cores, greedy_recover, weak_to_strong, CoreParams, RecoveryReport};
use crate::rng::derive_seed;
use crate::sbm::{
    apply_monotone_adversary, apply_outlier_adversary, sample_sbm, Graph, Partition, SbmParams,
};
use crate::sdp::solve_sdp;

const STREAM_SAMPLE: u64 = 1;
const STREAM_ADVERSARY: u64 = 2;
const STREAM_SPLIT: u64 = 3;
const STREAM_SOLVER: u64 = 4;
const STREAM_BOOST: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpSummary {
    pub objective: f64,
    /// Cut of the planted partition in the graph the solver saw.
    pub planted_objective: f64,
    pub converged: bool,
    pub feasible: bool,
    pub worst_violation: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub edges: usize,
    pub edits: usize,
    pub sdp: SdpSummary,
    pub recovery: RecoveryReport,
    pub delta_boosted: Option<f64>,
    /// δ of the final partition: boosted when boosting is on.
    pub delta: f64,
    pub residual: ResidualReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTimes {
    pub seed: u64,
    pub sample_ms: f64,
    pub corrupt_ms: f64,
    pub solve_ms: f64,
    pub recover_ms: f64,
    pub boost_ms: f64,
    pub evaluate_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub mean_delta: f64,
    pub median_delta: f64,
    pub min_delta: f64,
    pub max_delta: f64,
    pub mean_delta_weak: f64,
    pub unconverged: usize,
    pub infeasible: usize,
    pub residual_violations: usize,
}

impl Aggregate {
    pub fn from_deltas(deltas: &[f64], weak: &[f64], unconverged: usize, infeasible: usize, residual_violations: usize) -> Self {
        let runs = deltas.len();
        let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
        Aggregate {
            runs,
            mean_delta: mean(deltas),
            median_delta: median(deltas),
            min_delta: deltas.iter().copied().fold(f64::INFINITY, f64::min),
            max_delta: deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_delta_weak: mean(weak),
            unconverged,
            infeasible,
            residual_violations,
        }
    }
}

/// Median with the mean of the two middle values for even lengths; NaN when
/// empty.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Volatile {
    pub threads: usize,
    pub total_ms: f64,
    pub stages: Vec<StageTimes>,
}

/// Everything except `volatile` is a pure function of the configuration and
/// seeds.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub rows: Vec<SeedRecord>,
    pub aggregate: Aggregate,
    pub bounds: DeltaBounds,
    pub volatile: Volatile,
}

impl RunRecord {
    /// JSON of the record without the `volatile` section.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("record serialises");
        if let Some(m) = v.as_object_mut() {
            m.remove("volatile");
        }
        serde_json::to_string_pretty(&v).expect("value serialises")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serialises")
    }
}

fn stage<T>(name: &'static str, seed: u64, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name, seed))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Applies `spec` to `g` and returns the corrupted graph with its edit count.
pub fn apply_adversary(
    g: &Graph,
    planted: &Partition,
    params: &SbmParams,
    spec: &AdversarySpec,
    seed: u64,
) -> Result<(Graph, usize)> {
    spec.validate()?;
    let m = params.expected_edges();
    match spec {
        AdversarySpec::None => Ok((g.clone(), 0)),
        AdversarySpec::Outlier { strategy, .. } => {
            let budget = spec.budget()?.expect("outlier budget");
            let c = apply_outlier_adversary(g, planted, &budget, params, *strategy, seed)?;
            let edits = c.edit_count();
            Ok((c.graph, edits))
        }
        AdversarySpec::Monotone {
            add_fraction,
            remove_fraction,
            clamp,
        } => {
            let fl = |x: f64| (x + 1e-9).floor().max(0.0) as usize;
            let (mut add, mut remove) = (fl(add_fraction * m), fl(remove_fraction * m));
            if *clamp {
                let (n, k) = (params.n, params.k);
                let within_pairs = k * n * (n.saturating_sub(1)) / 2;
                add = add.min(within_pairs - within_cost(g, planted));
                remove = remove.min(cut_cost(g, planted));
            }
            let h = apply_monotone_adversary(g, planted, add, remove, seed)?;
            Ok((h, add + remove))
        }
    }
}

/// Runs every pipeline stage for one seed. Stage seeds are derived from
/// `seed`, so the result does not depend on which other seeds run.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<(SeedRecord, StageTimes)> {
    let p = &cfg.params;
    let t = Instant::now();
    let (g, planted) = stage("sample", seed, sample_sbm(p, derive_seed(seed, STREAM_SAMPLE)))?;
    let sample_ms = ms(t);

    let t = Instant::now();
    let (corrupted, edits) = stage(
        "corrupt",
        seed,
        apply_adversary(&g, &planted, p, &cfg.adversary, derive_seed(seed, STREAM_ADVERSARY)),
    )?;
    let corrupt_ms = ms(t);

    let t = Instant::now();
    let split = match cfg.boost {
        Some(_) => Some(stage("split", seed, split_edges(&corrupted, derive_seed(seed, STREAM_SPLIT)))?),
        None => None,
    };
    let (solve_graph, solve_params) = match &split {
        Some(s) => (&s.e1, p.halved()),
        None => (&corrupted, *p),
    };
    let mut solver = cfg.solver.clone();
    solver.seed = derive_seed(seed ^ cfg.solver.seed, STREAM_SOLVER);
    let sol = stage("solve", seed, solve_sdp::<f64>(solve_graph, &solve_params, &solver))?;
    let solve_ms = ms(t);

    let t = Instant::now();
    let weak = stage("recover", seed, greedy_recover(&sol.embedding, p.n, cfg.rho))?;
    let strong = stage("recover", seed, weak_to_strong(&weak, p.n, p.k))?;
    let core_params = stage("recover", seed, CoreParams::new(cfg.rho))?;
    let cores = stage("recover", seed, compute_cores(&sol.embedding, &planted, &core_params))?;
    let recovery = stage(
        "recover",
        seed,
        RecoveryReport::new(seed, &weak, &strong, &planted, Some(&cores)),
    )?;
    let recover_ms = ms(t);

    let t = Instant::now();
    let delta_boosted = match (&cfg.boost, &split) {
        (Some(bc), Some(s)) => {
            let mut bc = bc.clone();
            bc.seed = derive_seed(seed ^ bc.seed, STREAM_BOOST);
            let boosted = stage("boost", seed, boost(&s.e2, &strong, p.n, p.k, &bc))?;
            Some(stage("boost", seed, closeness_strong(&boosted, &planted))?.delta)
        }
        _ => None,
    };
    let boost_ms = ms(t);

    let t = Instant::now();
    let residual = stage(
        "evaluate",
        seed,
        grothendieck_residual(&g, &planted, p, &sol.embedding, cfg.residual_s, GROTHENDIECK_BOUND),
    )?;
    let sdp = SdpSummary {
        objective: sol.objective,
        planted_objective: cut_cost(solve_graph, &planted) as f64,
        converged: sol.converged,
        feasible: sol.feasibility.passed,
        worst_violation: sol.feasibility.worst(),
        iterations: sol.iterations,
    };
    let delta = delta_boosted.unwrap_or(recovery.delta_strong);
    let evaluate_ms = ms(t);

    Ok((
        SeedRecord {
            seed,
            edges: corrupted.edge_count(),
            edits,
            sdp,
            recovery,
            delta_boosted,
            delta,
            residual,
        },
        StageTimes {
            seed,
            sample_ms,
            corrupt_ms,
            solve_ms,
            recover_ms,
            boost_ms,
            evaluate_ms,
        },
    ))
}

pub fn bound_inputs(cfg: &ExperimentConfig) -> BoundInputs {
    BoundInputs::new(cfg.params, cfg.adversary.epsilon())
}

/// Runs all seeds of `cfg` in parallel on the current rayon pool and
/// aggregates. The first failing seed, in seed order, aborts with its stage.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let seeds = cfg.seeds.seeds();
    let results: Vec<Result<(SeedRecord, StageTimes)>> =
        seeds.par_iter().map(|&s| run_seed(cfg, s)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut stages = Vec::with_capacity(results.len());
    for r in results {
        let (row, times) = r?;
        rows.push(row);
        stages.push(times);
    }
    Ok(RunRecord {
        config_hash: cfg.config_hash(),
        config: cfg.clone(),
        aggregate: aggregate_rows(&rows),
        bounds: delta_bounds(&bound_inputs(cfg)),
        rows,
        volatile: Volatile {
            threads: rayon::current_num_threads(),
            total_ms: ms(start),
            stages,
        },
    })
}

pub fn aggregate_rows(rows: &[SeedRecord]) -> Aggregate {
    let deltas: Vec<f64> = rows.iter().map(|r| r.delta).collect();
    let weak: Vec<f64> = rows.iter().map(|r| r.recovery.delta_weak).collect();
    Aggregate::from_deltas(
        &deltas,
        &weak,
        rows.iter().filter(|r| !r.sdp.converged).count(),
        rows.iter().filter(|r| !r.sdp.feasible).count(),
        rows.iter().filter(|r| r.residual.violated).count(),
    )
}

/// Stage name of a pipeline error, if it carries one.
pub fn failed_stage(e: &Error) -> Option<&'static str> {
    match e {
        Error::Stage { stage, .. } => Some(stage),
        _ => None,
    }
}
