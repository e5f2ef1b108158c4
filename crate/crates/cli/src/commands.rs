use std::path::Path;
use std::time::Instant;

use ndarray::Array1;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use sdib::{
    adjusted_rand_index, ami_with, contingency, default_bandwidths, run_sparse_dib_with,
    tune_sparsity, Bandwidths64, DataMatrix64, DibResult64, Partition, SparseDibConfig,
    SparseDibResult64,
};
use sdib::{generate, LabeledDataset, MixtureSpec};

use crate::cli::{ClusterArgs, EvalArgs, GenerateArgs, SimulateArgs, TuneArgs};
use crate::config::{self, ClusterConfig, DataConfig, GenerateConfig, SimulateConfig, TuneConfig};
use crate::error::{CliError, CliResult};
use crate::io::{self, Table};
use crate::plot;

struct Loaded {
    names: Vec<String>,
    x: DataMatrix64,
    bandwidths: Bandwidths64,
}

fn load_data(cfg: &DataConfig) -> CliResult<Loaded> {
    cfg.validate()?;
    let Table { names, values } = io::read_matrix(&cfg.input, cfg.header)?;
    let mut x = DataMatrix64::new(values)?;
    if cfg.standardize {
        x = x.standardized()?;
    }
    let bandwidths = if cfg.bandwidths == "auto" {
        default_bandwidths(&x)?
    } else {
        let v = io::read_numbers(Path::new(&cfg.bandwidths))?;
        if v.len() != x.p() {
            return Err(sdib::Error::DimensionMismatch {
                what: "bandwidths",
                expected: x.p(),
                found: v.len(),
            }
            .into());
        }
        Bandwidths64::new(Array1::from(v))?
    };
    Ok(Loaded {
        names,
        x,
        bandwidths,
    })
}

fn num(v: f64) -> String {
    v.to_string()
}

fn one_based(ix: &[usize]) -> Vec<usize> {
    ix.iter().map(|&i| i + 1).collect()
}

/// First 16 hex digits of SHA-256 over the comma-joined 1-based support.
pub fn support_hash(support: &[usize]) -> String {
    let text = one_based(support)
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",");
    Sha256::digest(text.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Serialize)]
struct DibSummary<'a> {
    mi: f64,
    ht: f64,
    beta_final: f64,
    iterations: usize,
    converged: bool,
    collapsed: bool,
    restart: usize,
    objective_trace: &'a [f64],
    beta_trace: &'a [f64],
}

impl<'a> From<&'a DibResult64> for DibSummary<'a> {
    fn from(d: &'a DibResult64) -> Self {
        Self {
            mi: d.mi,
            ht: d.ht,
            beta_final: d.beta_final,
            iterations: d.iterations,
            converged: d.converged,
            collapsed: d.collapsed,
            restart: d.restart,
            objective_trace: &d.objective_trace,
            beta_trace: &d.beta_trace,
        }
    }
}

fn fully_converged(r: &SparseDibResult64) -> bool {
    r.converged && r.projection_converged && r.dib.converged
}

fn write_partition(path: &Path, part: &Partition) -> CliResult<()> {
    io::write_csv(
        path,
        &["observation", "cluster"],
        part.labels()
            .iter()
            .enumerate()
            .map(|(i, &c)| [(i + 1).to_string(), (c + 1).to_string()]),
    )
}

pub fn cluster(args: &ClusterArgs) -> CliResult<()> {
    let mut cfg: ClusterConfig = config::load(args.run.config.as_deref())?;
    cfg.data.apply(&args.input);
    args.solver.apply(&mut cfg.solver);
    cfg.strict |= args.run.strict;
    cfg.solver.validate()?;
    let data = load_data(&cfg.data)?;
    let res = run_sparse_dib_with(&data.x, &data.bandwidths, &cfg.solver, None)?;

    let out = &args.run.output_dir;
    io::create_dir(out)?;
    write_partition(&out.join("partition.csv"), &res.partition)?;
    io::write_csv(
        &out.join("weights.csv"),
        &["feature", "name", "weight", "mi"],
        (0..data.x.p()).map(|m| {
            [
                (m + 1).to_string(),
                data.names[m].clone(),
                num(res.weights[m]),
                num(res.per_feature_mi[m]),
            ]
        }),
    )?;
    let support = res.weights.support();
    let summary = json!({
        "command": "cluster",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "n": data.x.n(),
        "p": data.x.p(),
        "init": cfg.solver.init,
        "seed": cfg.solver.dib.seed,
        "bandwidths": data.bandwidths.values().to_vec(),
        "outer_iterations": res.outer_iterations,
        "converged": res.converged,
        "projection_converged": res.projection_converged,
        "weight_change_trace": res.weight_change_trace,
        "nonzero_count": res.nonzero_count,
        "weight_entropy": res.weight_entropy,
        "selected_features": one_based(&support),
        "selected_names": support.iter().map(|&m| data.names[m].as_str()).collect::<Vec<_>>(),
        "cluster_sizes": res.partition.sizes(),
        "dib": DibSummary::from(&res.dib),
    });
    io::write_json(&out.join("summary.json"), &summary)?;
    if cfg.strict && !fully_converged(&res) {
        return Err(CliError::NotConverged(format!(
            "sparse DIB did not converge within {} outer iterations",
            cfg.solver.max_outer
        )));
    }
    Ok(())
}

pub fn tune(args: &TuneArgs) -> CliResult<()> {
    let mut cfg: TuneConfig = config::load(args.run.config.as_deref())?;
    cfg.data.apply(&args.input);
    args.solver.apply(&mut cfg.solver);
    if let Some(g) = &args.u_grid {
        cfg.u_grid = config::parse_grid(g)?;
    }
    cfg.plot |= args.plot;
    if args.independent {
        cfg.solver.sweep_warm_start = false;
    }
    cfg.strict |= args.run.strict;
    cfg.solver.validate()?;
    let data = load_data(&cfg.data)?;
    let traj = tune_sparsity(&data.x, &data.bandwidths, &cfg.solver, &cfg.u_grid)?;

    let out = &args.run.output_dir;
    io::create_dir(out)?;
    io::write_csv(
        &out.join("trajectory.csv"),
        &[
            "u",
            "normalized_entropy",
            "nonzero_count",
            "support_hash",
            "budget_active",
            "converged",
        ],
        traj.points.iter().map(|pt| {
            [
                num(pt.u),
                num(pt.normalized_entropy),
                pt.nonzero_count.to_string(),
                support_hash(&pt.support),
                pt.budget_active.to_string(),
                pt.converged.to_string(),
            ]
        }),
    )?;
    io::write_csv(
        &out.join("trajectory_weights.csv"),
        &["u", "feature", "weight"],
        traj.points.iter().flat_map(|pt| {
            pt.weights
                .iter()
                .enumerate()
                .map(move |(m, &w)| [num(pt.u), (m + 1).to_string(), num(w)])
        }),
    )?;
    let plateau = match &traj.plateau {
        None => Value::String("none".into()),
        Some(p) => json!({
            "u_low": p.u_low,
            "u_high": p.u_high,
            "points": p.end - p.start + 1,
            "size": p.support.len(),
            "support": one_based(&p.support),
            "support_names": p.support.iter().map(|&m| data.names[m].as_str()).collect::<Vec<_>>(),
            "support_hash": support_hash(&p.support),
        }),
    };
    let violations: Vec<f64> = traj
        .monotonicity_violations
        .iter()
        .map(|&i| traj.points[i].u)
        .collect();
    let report = json!({
        "plateau": plateau,
        "grid_points": traj.points.len(),
        "monotonicity_violations": violations,
    });
    io::write_json(&out.join("plateau.json"), &report)?;
    let all_converged = traj.points.iter().all(|pt| pt.converged);
    io::write_json(
        &out.join("summary.json"),
        &json!({
            "command": "tune",
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "n": data.x.n(),
            "p": data.x.p(),
            "bandwidths": data.bandwidths.values().to_vec(),
            "all_converged": all_converged,
            "report": report,
        }),
    )?;
    if cfg.plot {
        let u: Vec<f64> = traj.points.iter().map(|pt| pt.u).collect();
        let h: Vec<f64> = traj.points.iter().map(|pt| pt.normalized_entropy).collect();
        let shade = traj.plateau.as_ref().map(|p| (p.u_low, p.u_high));
        io::write_text(
            &out.join("trajectory.svg"),
            &plot::trajectory_svg(&u, &h, shade),
        )?;
    }
    if cfg.strict && !all_converged {
        return Err(CliError::NotConverged(
            "at least one grid point did not converge".into(),
        ));
    }
    Ok(())
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r`; shared across settings so they see common random numbers.
pub fn replicate_seed(base: u64, r: usize) -> u64 {
    splitmix(base ^ splitmix(r as u64))
}

fn settings(cfg: &SimulateConfig) -> Vec<MixtureSpec> {
    let mut out = Vec::new();
    for &p in &cfg.p {
        for &q in &cfg.q {
            for &k in &cfg.clusters {
                for &balance in &cfg.balance {
                    for &shape in &cfg.shape {
                        for &separation in &cfg.separation {
                            out.push(MixtureSpec {
                                n: cfg.n,
                                p,
                                q_ratio: q,
                                k,
                                balance,
                                shape,
                                separation,
                                seed: 0,
                                shuffle_columns: false,
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

struct Outcome {
    ari: f64,
    ami: f64,
    precision: f64,
    recall: f64,
    selected: usize,
    outer_iterations: usize,
    converged: bool,
}

fn run_replicate(
    spec: &MixtureSpec,
    cfg: &SimulateConfig,
) -> sdib::Result<(LabeledDataset<f64>, Outcome)> {
    let ds = generate::<f64>(spec)?;
    let x = if cfg.standardize {
        ds.data.standardized()?
    } else {
        ds.data.clone()
    };
    let mut solver: SparseDibConfig = cfg.solver.clone();
    solver.dib.k = spec.k;
    solver.dib.seed = spec.seed;
    let b = default_bandwidths(&x)?;
    let res = run_sparse_dib_with(&x, &b, &solver, None)?;
    let truth = ds.labels.labels();
    let found = res.partition.labels();
    let table = contingency(truth, found)?;
    let support = res.weights.support();
    let hits = support
        .iter()
        .filter(|m| ds.informative.contains(m))
        .count();
    let outcome = Outcome {
        ari: adjusted_rand_index(truth, found)?,
        ami: ami_with(&table, sdib::AmiNormalizer::Arithmetic),
        precision: if support.is_empty() {
            0.0
        } else {
            hits as f64 / support.len() as f64
        },
        recall: hits as f64 / ds.informative.len() as f64,
        selected: support.len(),
        outer_iterations: res.outer_iterations,
        converged: fully_converged(&res),
    };
    Ok((ds, outcome))
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    v.retain(|x| x.is_finite());
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[h]
    } else {
        (v[h - 1] + v[h]) / 2.0
    })
}

pub fn simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut cfg: SimulateConfig = config::load(args.run.config.as_deref())?;
    if args.solver.k.is_some() {
        return Err(CliError::Invalid(
            "simulate takes the cluster count from --clusters".into(),
        ));
    }
    args.solver.apply(&mut cfg.solver);
    if let Some(seed) = args.solver.seed {
        cfg.seed = seed;
    }
    macro_rules! take {
        ($field:ident) => {
            if let Some(v) = &args.$field {
                cfg.$field = v.iter().map(|&x| x.into()).collect();
            }
        };
    }
    take!(p);
    take!(q);
    take!(clusters);
    take!(balance);
    take!(shape);
    take!(separation);
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(s) = args.standardize {
        cfg.standardize = s.is_on();
    }
    cfg.emit_datasets |= args.emit_datasets;
    cfg.strict |= args.run.strict;
    if cfg.replicates == 0 {
        return Err(CliError::Invalid("replicates must be at least 1".into()));
    }
    cfg.solver.validate()?;
    let grid = settings(&cfg);
    if grid.is_empty() {
        return Err(CliError::Invalid("empty setting grid".into()));
    }
    for spec in &grid {
        spec.validate()?;
    }

    let jobs: Vec<(usize, usize, MixtureSpec)> = grid
        .iter()
        .enumerate()
        .flat_map(|(s, spec)| {
            (0..cfg.replicates).map(move |r| {
                let spec = MixtureSpec {
                    seed: replicate_seed(cfg.seed, r),
                    ..spec.clone()
                };
                (s, r, spec)
            })
        })
        .collect();
    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|(_, _, spec)| {
            let start = Instant::now();
            let res = run_replicate(spec, &cfg);
            (res, start.elapsed().as_secs_f64() * 1e3)
        })
        .collect();

    let out = &args.run.output_dir;
    io::create_dir(out)?;
    if cfg.emit_datasets {
        io::create_dir(&out.join("datasets"))?;
    }
    let mut rows = Vec::with_capacity(jobs.len());
    let mut timings = Vec::with_capacity(jobs.len());
    let mut all_converged = true;
    for ((s, r, spec), (res, ms)) in jobs.iter().zip(&outcomes) {
        let mut row = vec![
            s.to_string(),
            r.to_string(),
            spec.seed.to_string(),
            spec.n.to_string(),
            spec.p.to_string(),
            num(spec.q_ratio),
            spec.k.to_string(),
            json_tag(&spec.balance),
            json_tag(&spec.shape),
            num(spec.separation),
        ];
        match res {
            Ok((ds, o)) => {
                all_converged &= o.converged;
                row.extend([
                    num(o.ari),
                    num(o.ami),
                    num(o.precision),
                    num(o.recall),
                    o.selected.to_string(),
                    o.outer_iterations.to_string(),
                    o.converged.to_string(),
                    "ok".into(),
                ]);
                if cfg.emit_datasets {
                    let stem = out.join("datasets").join(format!("s{s}_r{r}"));
                    let gen = GenerateConfig {
                        spec: spec.clone(),
                        header: false,
                    };
                    write_dataset(&stem, &gen, ds)?;
                }
            }
            Err(e) => {
                all_converged = false;
                row.extend(["", "", "", "", "", "", "false"].map(String::from));
                row.push(e.to_string());
            }
        }
        rows.push(row);
        timings.push([s.to_string(), r.to_string(), format!("{ms:.3}")]);
    }
    io::write_csv(
        &out.join("results.csv"),
        &[
            "setting",
            "replicate",
            "seed",
            "n",
            "p",
            "q",
            "k",
            "balance",
            "shape",
            "separation",
            "ari",
            "ami",
            "precision",
            "recall",
            "selected",
            "outer_iterations",
            "converged",
            "status",
        ],
        rows,
    )?;
    io::write_csv(
        &out.join("timings.csv"),
        &["setting", "replicate", "runtime_ms"],
        timings,
    )?;

    let per_setting: Vec<Value> = grid
        .iter()
        .enumerate()
        .map(|(s, spec)| {
            let mine: Vec<&Outcome> = jobs
                .iter()
                .zip(&outcomes)
                .filter(|((js, _, _), _)| *js == s)
                .filter_map(|(_, (res, _))| res.as_ref().ok().map(|(_, o)| o))
                .collect();
            let pick = |f: fn(&Outcome) -> f64| median(mine.iter().map(|o| f(o)).collect());
            json!({
                "setting": s,
                "p": spec.p,
                "q": spec.q_ratio,
                "k": spec.k,
                "balance": spec.balance,
                "shape": spec.shape,
                "separation": spec.separation,
                "completed": mine.len(),
                "converged": mine.iter().filter(|o| o.converged).count(),
                "median_ari": pick(|o| o.ari),
                "median_ami": pick(|o| o.ami),
                "median_precision": pick(|o| o.precision),
                "median_recall": pick(|o| o.recall),
            })
        })
        .collect();
    io::write_json(
        &out.join("summary.json"),
        &json!({
            "command": "simulate",
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "rows": jobs.len(),
            "settings": per_setting,
        }),
    )?;
    if cfg.strict && !all_converged {
        return Err(CliError::NotConverged(
            "at least one replicate failed or did not converge".into(),
        ));
    }
    Ok(())
}

fn json_tag<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

fn write_dataset(stem: &Path, cfg: &GenerateConfig, ds: &LabeledDataset<f64>) -> CliResult<()> {
    let p = ds.data.p();
    let names: Vec<String> = (1..=p).map(|m| format!("V{m}")).collect();
    let values = ds.data.values();
    let data_path = stem.with_extension("csv");
    let werr = |e: csv::Error| CliError::Write {
        path: data_path.clone(),
        source: e.into(),
    };
    let mut w = csv::Writer::from_path(&data_path).map_err(werr)?;
    if cfg.header {
        w.write_record(&names).map_err(werr)?;
    }
    for row in values.rows() {
        w.write_record(row.iter().map(|v| num(*v))).map_err(werr)?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: data_path.clone(),
        source,
    })?;
    let labels: Vec<usize> = ds.labels.labels().iter().map(|&c| c + 1).collect();
    io::write_json(
        &stem.with_extension("json"),
        &json!({
            "command": "generate",
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "labels": labels,
            "informative": one_based(&ds.informative),
            "column_permutation": ds.column_permutation.as_ref().map(|c| one_based(c)),
            "means": ds.means,
            "variances": ds.variances,
        }),
    )
}

pub fn generate_cmd(args: &GenerateArgs) -> CliResult<()> {
    let mut cfg: GenerateConfig = config::load(args.config.as_deref())?;
    let spec = &mut cfg.spec;
    macro_rules! set {
        ($arg:ident => $field:ident) => {
            if let Some(v) = args.$arg {
                spec.$field = v.into();
            }
        };
    }
    set!(n => n);
    set!(p => p);
    set!(q => q_ratio);
    set!(clusters => k);
    set!(balance => balance);
    set!(shape => shape);
    set!(separation => separation);
    set!(seed => seed);
    spec.shuffle_columns |= args.shuffle;
    cfg.header |= args.header;
    let ds = generate::<f64>(&cfg.spec)?;
    io::create_dir(&args.output_dir)?;
    write_dataset(&args.output_dir.join("data"), &cfg, &ds)?;
    write_partition(&args.output_dir.join("labels.csv"), &ds.labels)
}

pub fn eval(args: &EvalArgs) -> CliResult<String> {
    let a = io::read_labels(&args.a, args.header)?;
    let b = io::read_labels(&args.b, args.header)?;
    let ari = adjusted_rand_index(&a, &b)?;
    let ami = ami_with(&contingency(&a, &b)?, args.normalizer.into());
    Ok(json!({ "ari": ari, "ami": ami }).to_string())
}
