use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{AdversarySpec, ExperimentConfig};
use super::run::{median, run_seed, SeedRecord};
use crate::error::Result;
use crate::sbm::Strategy;

/// Axes of a sweep. An empty axis keeps the base configuration's value; an
/// empty `epsilon` axis keeps the base adversary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub n: Vec<usize>,
    pub k: Vec<usize>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub strategy: Vec<Strategy>,
}

fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

impl SweepGrid {
    /// Cartesian product in the order n, k, a, b, ε, strategy.
    pub fn configs(&self, base: &ExperimentConfig) -> Vec<ExperimentConfig> {
        let p = base.params;
        let base_strategy = match base.adversary {
            AdversarySpec::Outlier { strategy, .. } => strategy,
            _ => Strategy::Uniform,
        };
        let mut out = Vec::new();
        for &n in &axis(&self.n, p.n) {
            for &k in &axis(&self.k, p.k) {
                for &a in &axis(&self.a, p.a) {
                    for &b in &axis(&self.b, p.b) {
                        let eps: Vec<Option<f64>> = if self.epsilon.is_empty() {
                            vec![None]
                        } else {
                            self.epsilon.iter().copied().map(Some).collect()
                        };
                        for e in eps {
                            for &st in &axis(&self.strategy, base_strategy) {
                                let mut c = base.clone();
                                c.params.n = n;
                                c.params.k = k;
                                c.params.a = a;
                                c.params.b = b;
                                match (e, &mut c.adversary) {
                                    (Some(e), _) => c.adversary = AdversarySpec::outlier(e, st),
                                    (None, AdversarySpec::Outlier { strategy, .. }) => *strategy = st,
                                    _ => {}
                                }
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// One line of the per-seed store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub config_hash: String,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub adversary: String,
    pub status: String,
    pub stage: Option<String>,
    pub delta: Option<f64>,
    pub delta_weak: Option<f64>,
    pub delta_boosted: Option<f64>,
    pub objective: Option<f64>,
    pub planted_objective: Option<f64>,
    pub converged: Option<bool>,
    pub edits: Option<usize>,
    pub error: Option<String>,
}

fn adversary_label(cfg: &ExperimentConfig) -> String {
    match &cfg.adversary {
        AdversarySpec::None => "none".into(),
        AdversarySpec::Outlier { strategy, .. } => format!("outlier-{strategy}"),
        AdversarySpec::Monotone { .. } => "monotone".into(),
    }
}

impl SweepRow {
    fn base(cfg: &ExperimentConfig, hash: &str, seed: u64) -> Self {
        SweepRow {
            config_hash: hash.to_string(),
            seed,
            n: cfg.params.n,
            k: cfg.params.k,
            a: cfg.params.a,
            b: cfg.params.b,
            epsilon: cfg.adversary.epsilon(),
            adversary: adversary_label(cfg),
            status: "ok".into(),
            stage: None,
            delta: None,
            delta_weak: None,
            delta_boosted: None,
            objective: None,
            planted_objective: None,
            converged: None,
            edits: None,
            error: None,
        }
    }

    pub fn from_record(cfg: &ExperimentConfig, hash: &str, r: &SeedRecord) -> Self {
        SweepRow {
            delta: Some(r.delta),
            delta_weak: Some(r.recovery.delta_weak),
            delta_boosted: r.delta_boosted,
            objective: Some(r.sdp.objective),
            planted_objective: Some(r.sdp.planted_objective),
            converged: Some(r.sdp.converged),
            edits: Some(r.edits),
            ..SweepRow::base(cfg, hash, r.seed)
        }
    }

    fn failed(cfg: &ExperimentConfig, hash: &str, seed: u64, e: &crate::Error) -> Self {
        SweepRow {
            status: "failed".into(),
            stage: super::run::failed_stage(e).map(str::to_string),
            error: Some(e.to_string()),
            ..SweepRow::base(cfg, hash, seed)
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Per-configuration summary written to the aggregate CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub config_hash: String,
    pub n: usize,
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub adversary: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_delta: f64,
    pub median_delta: f64,
    pub max_delta: f64,
}

pub fn aggregate_sweep_rows(rows: &[SweepRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<&str, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(&r.config_hash).or_default().push(r);
    }
    let mut out: Vec<AggregateRow> = groups
        .into_values()
        .map(|g| {
            let first = g[0];
            let deltas: Vec<f64> = g.iter().filter(|r| r.is_ok()).filter_map(|r| r.delta).collect();
            let mean = if deltas.is_empty() {
                f64::NAN
            } else {
                deltas.iter().sum::<f64>() / deltas.len() as f64
            };
            AggregateRow {
                config_hash: first.config_hash.clone(),
                n: first.n,
                k: first.k,
                a: first.a,
                b: first.b,
                epsilon: first.epsilon,
                adversary: first.adversary.clone(),
                runs: deltas.len(),
                failures: g.iter().filter(|r| !r.is_ok()).count(),
                mean_delta: mean,
                median_delta: median(&deltas),
                max_delta: deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect();
    out.sort_by(|x, y| {
        (x.n, x.k)
            .cmp(&(y.n, y.k))
            .then(x.a.total_cmp(&y.a))
            .then(x.b.total_cmp(&y.b))
            .then(x.epsilon.total_cmp(&y.epsilon))
            .then_with(|| x.adversary.cmp(&y.adversary))
            .then_with(|| x.config_hash.cmp(&y.config_hash))
    });
    out
}

pub fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for r in rd.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub executed: usize,
    pub skipped: usize,
    pub failed: usize,
    pub aggregates: Vec<AggregateRow>,
}

/// Runs every (configuration, seed) pair of the grid that has no `ok` row in
/// `rows.csv` under `dir`, appending one row per run, then rewrites
/// `aggregate.csv` from the full row store.
pub fn sweep(grid: &SweepGrid, base: &ExperimentConfig, dir: &Path) -> Result<SweepSummary> {
    std::fs::create_dir_all(dir)?;
    let rows_path = dir.join("rows.csv");
    let done: HashSet<(String, u64)> = read_rows(&rows_path)?
        .into_iter()
        .filter(SweepRow::is_ok)
        .map(|r| (r.config_hash, r.seed))
        .collect();

    let mut jobs = Vec::new();
    let configs = grid.configs(base);
    for cfg in &configs {
        cfg.validate()?;
    }
    let mut skipped = 0;
    for cfg in &configs {
        let hash = cfg.config_hash();
        for s in cfg.seeds.seeds() {
            if done.contains(&(hash.clone(), s)) {
                skipped += 1;
            } else {
                jobs.push((cfg, hash.clone(), s));
            }
        }
    }

    let fresh = !rows_path.exists() || std::fs::metadata(&rows_path)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(&rows_path)?;
    let writer = Mutex::new(
        csv::WriterBuilder::new()
            .has_headers(fresh)
            .from_writer(file),
    );
    let failed: usize = jobs
        .par_iter()
        .map(|(cfg, hash, s)| -> Result<usize> {
            let (row, bad) = match run_seed(cfg, *s) {
                Ok((rec, _)) => (SweepRow::from_record(cfg, hash, &rec), 0),
                Err(e) => (SweepRow::failed(cfg, hash, *s, &e), 1),
            };
            let mut w = writer.lock().expect("writer lock");
            w.serialize(&row)?;
            w.flush()?;
            Ok(bad)
        })
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum();
    drop(writer);

    let all = read_rows(&rows_path)?;
    let aggregates = aggregate_sweep_rows(&all);
    let mut agg = csv::Writer::from_writer(File::create(dir.join("aggregate.csv"))?);
    for a in &aggregates {
        agg.serialize(a)?;
    }
    agg.flush()?;
    Ok(SweepSummary {
        executed: jobs.len(),
        skipped,
        failed,
        aggregates,
    })
}
