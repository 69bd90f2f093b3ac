use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde_json::{json, Value};

use robust_sbm::boosting::{boost, split_edges};
use robust_sbm::lower_bounds::{
    distinguishing_game, lb_adversary_with_report, lb_bound_values, overlap, suggest_rho,
    LbAdversaryConfig, PoissonPair,
};
use robust_sbm::metrics::{closeness_strong, delta_bounds, BoundInputs};
use robust_sbm::pipeline::{
    apply_adversary, run_pipeline, sweep, AdversarySpec, ExperimentConfig, SeedSpec, SweepGrid,
    SweepRow,
};
use robust_sbm::recovery::{
    compute_cores, greedy_recover, weak_to_strong, CoreParams, RecoveryReport, WeakPartition,
    LISTING_RHO,
};
use robust_sbm::sbm::io::{format_edge_list, format_partition, read_edge_list, read_partition};
use robust_sbm::sbm::{sample_poisson_sbm, sample_sbm, Graph, Partition, SbmParams, Strategy};
use robust_sbm::sdp::{format_embedding, read_embedding, solve_sdp, Embedding};

use crate::output::{emit, render, write_file};
use crate::{Command, Format, GlobalArgs, ParamArgs};

fn load_config(g: &GlobalArgs) -> Result<Option<ExperimentConfig>> {
    let Some(path) = &g.config else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = ExperimentConfig::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(cfg))
}

/// Flags override the configuration's parameters.
fn resolve_params(p: &ParamArgs, cfg: Option<&ExperimentConfig>) -> Result<SbmParams> {
    let base = cfg.map(|c| c.params);
    let pick = |flag: Option<f64>, from: Option<f64>, name: &str| {
        flag.or(from).ok_or_else(|| anyhow!("missing --{name} (or a --config providing it)"))
    };
    let n = p.n.or(base.map(|b| b.n)).ok_or_else(|| anyhow!("missing --n"))?;
    let k = p.k.or(base.map(|b| b.k)).ok_or_else(|| anyhow!("missing --k"))?;
    let a = pick(p.a, base.map(|b| b.a), "a")?;
    let b = pick(p.b, base.map(|b| b.b), "b")?;
    Ok(SbmParams::new(n, k, a, b)?)
}

fn single_seed(g: &GlobalArgs, cfg: Option<&ExperimentConfig>) -> Result<u64> {
    if let Some(s) = g.seed {
        return Ok(s);
    }
    if let Some(s) = &g.seeds {
        let seeds = SeedSpec::parse(s)?.seeds();
        return seeds.first().copied().ok_or_else(|| anyhow!("empty seed range"));
    }
    Ok(cfg.and_then(|c| c.seeds.seeds().first().copied()).unwrap_or(0))
}

fn out_dir(g: &GlobalArgs, cfg: Option<&ExperimentConfig>) -> PathBuf {
    g.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}

fn read_graph(path: &Path) -> Result<Graph> {
    read_edge_list(open(path)?).with_context(|| format!("reading graph {}", path.display()))
}

fn read_part(path: &Path, k: Option<usize>) -> Result<Partition> {
    read_partition(open(path)?, k).with_context(|| format!("reading partition {}", path.display()))
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

pub(crate) fn dispatch(cmd: Command, g: &GlobalArgs) -> Result<()> {
    let cfg = load_config(g)?;
    let cfg = cfg.as_ref();
    match cmd {
        Command::Generate { params, poisson } => {
            let p = resolve_params(&params, cfg)?;
            let seed = single_seed(g, cfg)?;
            let (graph, planted) = if poisson {
                sample_poisson_sbm(&p, seed)?
            } else {
                sample_sbm(&p, seed)?
            };
            let dir = out_dir(g, cfg);
            let (gp, pp) = (dir.join("graph.txt"), dir.join("planted.txt"));
            write_file(&gp, &format_edge_list(&graph))?;
            write_file(&pp, &format_partition(&planted))?;
            emit(
                &[json!({
                    "seed": seed,
                    "vertices": graph.vertex_count(),
                    "edges": graph.edge_count(),
                    "graph": display(&gp),
                    "planted": display(&pp),
                })],
                g.format,
            )
        }
        Command::Corrupt {
            graph,
            planted,
            params,
            monotone,
            lower_bound,
            epsilon,
            epsilon1,
            epsilon2,
            strategy,
            add_fraction,
            remove_fraction,
            clamp,
            rho_fraction,
        } => {
            let p = resolve_params(&params, cfg)?;
            let graph = read_graph(&graph)?;
            let planted = read_part(&planted, Some(p.k))?;
            let seed = single_seed(g, cfg)?;
            let (out, summary) = if lower_bound {
                let rho = match rho_fraction {
                    Some(r) => r,
                    None => suggest_rho(epsilon, p.a, p.b)
                        .ok_or_else(|| anyhow!("--rho-fraction is required when a = b"))?,
                };
                let (h, rep) = lb_adversary_with_report(&graph, &planted, &p, &LbAdversaryConfig::new(rho, seed)?)?;
                (h, serde_json::to_value(rep)?)
            } else {
                let spec = if monotone {
                    AdversarySpec::Monotone {
                        add_fraction,
                        remove_fraction,
                        clamp,
                    }
                } else {
                    AdversarySpec::Outlier {
                        epsilon,
                        epsilon1,
                        epsilon2,
                        strategy: strategy.parse::<Strategy>()?,
                    }
                };
                let (h, edits) = apply_adversary(&graph, &planted, &p, &spec, seed)?;
                (h, json!({ "adversary": spec, "edits": edits }))
            };
            let path = out_dir(g, cfg).join("corrupted.txt");
            write_file(&path, &format_edge_list(&out))?;
            let mut v = json!({ "seed": seed, "edges": out.edge_count(), "graph": display(&path) });
            v["report"] = summary;
            emit(&[v], g.format)
        }
        Command::Solve { graph, params } => {
            let p = resolve_params(&params, cfg)?;
            let graph = read_graph(&graph)?;
            let mut solver = cfg.map(|c| c.solver.clone()).unwrap_or_default();
            if let Some(s) = g.seed {
                solver.seed = s;
            }
            let sol = solve_sdp::<f64>(&graph, &p, &solver)?;
            let path = out_dir(g, cfg).join("embedding.txt");
            write_file(&path, &format_embedding(&sol.embedding))?;
            emit(
                &[json!({
                    "objective": sol.objective,
                    "converged": sol.converged,
                    "iterations": sol.iterations,
                    "feasibility": sol.feasibility,
                    "restart_objectives": sol.restart_objectives,
                    "embedding": display(&path),
                })],
                g.format,
            )
        }
        Command::Recover {
            embedding,
            params,
            rho,
            planted,
        } => {
            let e: Embedding<f64> = read_embedding(open(&embedding)?)
                .with_context(|| format!("reading embedding {}", embedding.display()))?;
            let (n, k) = cluster_shape(&params, cfg, e.vertex_count())?;
            let rho = rho.or(cfg.map(|c| c.rho)).unwrap_or(LISTING_RHO);
            let weak = greedy_recover(&e, n, rho)?;
            let strong = weak_to_strong(&weak, n, k)?;
            let dir = out_dir(g, cfg);
            let path = dir.join("partition.txt");
            write_file(&path, &format_partition(&strong))?;
            write_file(&dir.join("weak.txt"), &format_weak(&weak))?;
            let mut v = json!({
                "weak_cluster_count": weak.count(),
                "partition": display(&path),
            });
            if let Some(pp) = planted {
                let planted = read_part(&pp, Some(k))?;
                let cores = compute_cores(&e, &planted, &CoreParams::new(rho)?)?;
                let rep = RecoveryReport::new(single_seed(g, cfg)?, &weak, &strong, &planted, Some(&cores))?;
                v["report"] = serde_json::to_value(rep)?;
            }
            emit(&[v], g.format)
        }
        Command::Boost {
            graph,
            params,
            base,
            threshold,
            rho,
            planted,
        } => {
            let p = resolve_params(&params, cfg)?;
            let graph = read_graph(&graph)?;
            let seed = single_seed(g, cfg)?;
            let split = split_edges(&graph, seed)?;
            let base = match base {
                Some(path) => read_part(&path, Some(p.k))?,
                None => {
                    let mut solver = cfg.map(|c| c.solver.clone()).unwrap_or_default();
                    solver.seed = seed;
                    let sol = solve_sdp::<f64>(&split.e1, &p.halved(), &solver)?;
                    let rho = rho.or(cfg.map(|c| c.rho)).unwrap_or(LISTING_RHO);
                    weak_to_strong(&greedy_recover(&sol.embedding, p.n, rho)?, p.n, p.k)?
                }
            };
            let mut bc = cfg.and_then(|c| c.boost.clone()).unwrap_or_default();
            if threshold.is_some() {
                bc.threshold = threshold;
            }
            bc.seed = seed;
            let boosted = boost(&split.e2, &base, p.n, p.k, &bc)?;
            let path = out_dir(g, cfg).join("partition.txt");
            write_file(&path, &format_partition(&boosted))?;
            let mut v = json!({
                "seed": seed,
                "threshold": bc.threshold_for(&p),
                "e1_edges": split.e1.edge_count(),
                "e2_edges": split.e2.edge_count(),
                "partition": display(&path),
            });
            if let Some(pp) = planted {
                let planted = read_part(&pp, Some(p.k))?;
                v["delta_base"] = json!(closeness_strong(&base, &planted)?.delta);
                v["delta_boosted"] = json!(closeness_strong(&boosted, &planted)?.delta);
            }
            emit(&[v], g.format)
        }
        Command::Evaluate {
            partition,
            planted,
            params,
            epsilon,
        } => {
            let planted = read_part(&planted, None)?;
            let part = read_part(&partition, Some(planted.k()))?;
            let c = closeness_strong(&part, &planted)?;
            let mut v = json!({ "delta": c.delta, "sigma": c.sigma, "overlap": c.overlap });
            if let Ok(p) = resolve_params(&params, cfg) {
                let eps = if epsilon > 0.0 { epsilon } else { cfg.map_or(0.0, |c| c.adversary.epsilon()) };
                v["bounds"] = serde_json::to_value(delta_bounds(&BoundInputs::new(p, eps)))?;
            }
            emit(&[v], g.format)
        }
        Command::Lowerbound {
            coupling,
            game,
            trials,
            bounds,
            epsilon,
            params,
        } => {
            let mut records = Vec::new();
            if let Some(l) = coupling {
                let pair = PoissonPair::new(l[0], l[1])?;
                records.push(json!({
                    "lambda1": l[0],
                    "lambda2": l[1],
                    "truncation": pair.truncation,
                    "overlap": overlap(l[0], l[1])?,
                }));
            }
            if let Some(l) = game {
                records.push(serde_json::to_value(distinguishing_game(l[0], l[1], trials, single_seed(g, cfg)?)?)?);
            }
            if let Some(delta) = bounds {
                let p = resolve_params(&params, cfg)?;
                records.push(serde_json::to_value(lb_bound_values(&p, epsilon, delta)?)?);
            }
            if records.is_empty() {
                bail!("nothing to do: pass --coupling, --game or --bounds");
            }
            emit(&records, g.format)
        }
        Command::Run => {
            let mut c = cfg.cloned().ok_or_else(|| anyhow!("run needs --config"))?;
            if let Some(s) = g.seed {
                c.seeds = SeedSpec::List(vec![s]);
            } else if let Some(s) = &g.seeds {
                c.seeds = SeedSpec::parse(s)?;
            }
            let rec = run_pipeline(&c)?;
            let text = match g.format {
                Format::Json => rec.to_json() + "\n",
                Format::Csv => {
                    let rows: Vec<Value> = rec
                        .rows
                        .iter()
                        .map(|r| serde_json::to_value(SweepRow::from_record(&c, &rec.config_hash, r)))
                        .collect::<Result<_, _>>()?;
                    render(&rows, Format::Csv)?
                }
            };
            if let Some(dir) = g.out.clone().or(c.output.clone().map(PathBuf::from)) {
                let name = match g.format {
                    Format::Json => "run.json",
                    Format::Csv => "run.csv",
                };
                write_file(&dir.join(name), &text)?;
            }
            print!("{text}");
            Ok(())
        }
        Command::Sweep { grid } => {
            let mut c = cfg.cloned().ok_or_else(|| anyhow!("sweep needs --config"))?;
            if let Some(s) = &g.seeds {
                c.seeds = SeedSpec::parse(s)?;
            } else if let Some(s) = g.seed {
                c.seeds = SeedSpec::List(vec![s]);
            }
            let text = std::fs::read_to_string(&grid).with_context(|| format!("reading {}", grid.display()))?;
            let grid: SweepGrid = serde_json::from_str(&text).with_context(|| format!("parsing {}", grid.display()))?;
            let summary = sweep(&grid, &c, &out_dir(g, Some(&c)))?;
            match g.format {
                Format::Json => emit(&[serde_json::to_value(&summary)?], Format::Json),
                Format::Csv => {
                    let rows: Vec<Value> = summary
                        .aggregates
                        .iter()
                        .map(serde_json::to_value)
                        .collect::<Result<_, _>>()?;
                    emit(&rows, Format::Csv)
                }
            }
        }
    }
}

/// (n, k) for an embedding: flags or config first, otherwise `k` from the
/// flags and `n = N / k`.
fn cluster_shape(p: &ParamArgs, cfg: Option<&ExperimentConfig>, vertices: usize) -> Result<(usize, usize)> {
    let k = p.k.or(cfg.map(|c| c.params.k)).ok_or_else(|| anyhow!("missing --k"))?;
    let n = match p.n.or(cfg.map(|c| c.params.n)) {
        Some(n) => n,
        None if k > 0 && vertices.is_multiple_of(k) => vertices / k,
        None => bail!("{vertices} vertices do not split into {k} clusters"),
    };
    Ok((n, k))
}

fn format_weak(w: &WeakPartition) -> String {
    let mut s = String::new();
    for c in w.clusters() {
        let ids: Vec<String> = c.iter().map(usize::to_string).collect();
        s.push_str(&ids.join(" "));
        s.push('\n');
    }
    s
}
