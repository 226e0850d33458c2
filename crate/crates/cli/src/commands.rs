//! Subcommand implementations. Each takes a validated configuration.

use std::f64::consts::LN_2;
use std::path::Path;

use covertree_core::analytic::{centering, run_suite};
use covertree_core::gff::sample_gff_max;
use covertree_core::harness::{
    derive_seed, fit_centering, map_replicas, threshold_scan, FitResult, ReplicaSummary,
    ScanConfig, Workers,
};
use covertree_core::rayknight::{sample_field_with, uncover_probability, SampleOptions};
use covertree_core::walk::{run_until_cover, run_until_inverse_local_time};
use covertree_core::TreeParams;
use serde_json::{json, Value};

use crate::config::{Command, Engine, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::records::{
    fmt_f64, fmt_opt, read_jsonl, read_meta, write_jsonl, write_meta, FieldRecord, GffRecord,
    SummaryLine, Table, WalkRecord,
};

/// Cover-threshold log-correction in `√t` units, `-1/(2√log 2)`.
pub fn cover_asymptotic_b() -> f64 {
    -1.0 / (2.0 * LN_2.sqrt())
}

/// Free-field log-correction after dividing by `√2`, `-3/(4√log 2)`.
pub fn gff_asymptotic_b() -> f64 {
    -3.0 / (4.0 * LN_2.sqrt())
}

pub fn execute(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.command {
        Command::Walk => walk(cfg),
        Command::Field => field(cfg),
        Command::Gff => gff(cfg),
        Command::Scan => scan(cfg),
        Command::Fit => fit(cfg),
        Command::CompareCenterings => compare_centerings(cfg),
        Command::VerifyAnalytic => verify_analytic(cfg),
        Command::Summarize => summarize(cfg),
        Command::PlotData => plot_data(cfg),
    }
}

fn workers(cfg: &ExperimentConfig) -> Workers {
    cfg.workers.map_or(Workers::Auto, Workers::Fixed)
}

// Validated keys; `validate` has already reported their absence.
fn req<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing required key `{key}`")))
}

/// Records go to `out` (summary to stdout) or to stdout (summary to stderr).
fn finish_run(cfg: &ExperimentConfig, statistic: &str, summary: &ReplicaSummary) -> Result<()> {
    let line = SummaryLine::new(statistic, summary);
    match &cfg.out {
        Some(out) => {
            write_meta(out, cfg, json!({ "statistic": statistic, "summary": line }))?;
            println!("{}", line.to_json());
        }
        None => eprintln!("{}", line.to_json()),
    }
    Ok(())
}

fn walk(cfg: &ExperimentConfig) -> Result<()> {
    let p = TreeParams::new(req(cfg.depth, "depth")?)?;
    let (replicas, seed) = (req(cfg.replicas, "replicas")?, req(cfg.seed, "seed")?);
    let cover_only = cfg.cover_only;
    let t = cfg.t;
    let records: Vec<WalkRecord> = map_replicas(replicas, seed, workers(cfg), |i, rng| {
        let out = match t {
            Some(t) if !cover_only => run_until_inverse_local_time(&p, t, rng, false)?,
            _ => run_until_cover(&p, rng)?,
        };
        Ok(WalkRecord {
            replica: i,
            seed,
            tau_t: out.tau_t,
            cover_time: out.cover_time,
            covered: out.covered_by_tau_t,
            jumps: out.jump_count,
        })
    })
    .into_iter()
    .collect::<std::result::Result<_, covertree_core::Error>>()?;
    let statistic = if cover_only { "cover_time" } else { "tau_t" };
    let values: Vec<f64> = records
        .iter()
        .map(|r| if cover_only { r.cover_time } else { r.tau_t }.unwrap_or(f64::NAN))
        .collect();
    let summary = ReplicaSummary::from_values(&values, seed);
    write_jsonl(records, cfg.out.as_deref())?;
    finish_run(cfg, statistic, &summary)
}

fn field(cfg: &ExperimentConfig) -> Result<()> {
    let p = TreeParams::new(req(cfg.depth, "depth")?)?;
    let t = req(cfg.t, "t")?;
    let (replicas, seed) = (req(cfg.replicas, "replicas")?, req(cfg.seed, "seed")?);
    let opts = SampleOptions {
        prune: true,
        emit_levels: cfg.emit_levels,
    };
    let records: Vec<FieldRecord> = map_replicas(replicas, seed, workers(cfg), |i, rng| {
        let s = sample_field_with(&p, t, rng, opts, None)?;
        let (level_min, level_mean) = match s.levels {
            Some(l) => (Some(l.min), Some(l.mean)),
            None => (None, None),
        };
        Ok(FieldRecord {
            replica: i,
            min_leaf: s.min_leaf,
            zero_leaves: s.zero_leaf_count,
            covered: s.covered,
            level_min,
            level_mean,
        })
    })
    .into_iter()
    .collect::<std::result::Result<_, covertree_core::Error>>()?;
    let values: Vec<f64> = records.iter().map(|r| r.covered as u8 as f64).collect();
    let summary = ReplicaSummary::from_values(&values, seed);
    write_jsonl(records, cfg.out.as_deref())?;
    finish_run(cfg, "covered", &summary)
}

fn gff_records(p: &TreeParams, replicas: u64, seed: u64, w: Workers) -> Result<Vec<GffRecord>> {
    Ok(map_replicas(replicas, seed, w, |i, rng| {
        sample_gff_max(p, rng).map(|s| GffRecord {
            replica: i,
            max_all: s.max_all,
            max_leaf: s.max_leaf,
            argmax_level: s.argmax_level,
        })
    })
    .into_iter()
    .collect::<std::result::Result<_, covertree_core::Error>>()?)
}

fn gff(cfg: &ExperimentConfig) -> Result<()> {
    let (replicas, seed) = (req(cfg.replicas, "replicas")?, req(cfg.seed, "seed")?);
    if let Some(d) = cfg.depth {
        let records = gff_records(&TreeParams::new(d)?, replicas, seed, workers(cfg))?;
        let values: Vec<f64> = records.iter().map(|r| r.max_leaf).collect();
        let summary = ReplicaSummary::from_values(&values, seed);
        write_jsonl(records, cfg.out.as_deref())?;
        return finish_run(cfg, "max_leaf", &summary);
    }
    let mut table = Table::new(&[
        "n",
        "replicas",
        "seed",
        "mean_max_leaf",
        "stderr_max_leaf",
        "mean_max_all",
        "stderr_max_all",
    ]);
    for n in cfg.depths() {
        let s = derive_seed(seed, n as u64);
        let records = gff_records(&TreeParams::new(n)?, replicas, s, workers(cfg))?;
        let leaf: Vec<f64> = records.iter().map(|r| r.max_leaf).collect();
        let all: Vec<f64> = records.iter().map(|r| r.max_all).collect();
        let (a, b) = (
            ReplicaSummary::from_values(&leaf, s),
            ReplicaSummary::from_values(&all, s),
        );
        eprintln!(
            "gff n={n} mean max_leaf {:.4} ± {:.4}",
            a.estimate, a.stderr
        );
        table.push(vec![
            n.to_string(),
            replicas.to_string(),
            s.to_string(),
            fmt_f64(a.estimate),
            fmt_f64(a.stderr),
            fmt_f64(b.estimate),
            fmt_f64(b.stderr),
        ]);
    }
    table.write(cfg.out.as_deref())?;
    if let Some(out) = &cfg.out {
        write_meta(
            out,
            cfg,
            json!({ "per_depth_seed": "derive_seed(seed, n)" }),
        )?;
    }
    Ok(())
}

fn scan(cfg: &ExperimentConfig) -> Result<()> {
    let scfg = ScanConfig {
        target: req(cfg.target, "target")?,
        tolerance: req(cfg.tol, "tol")?,
        seed: req(cfg.seed, "seed")?,
        replicas_per_probe: req(cfg.replicas, "replicas")?,
        max_probes: req(cfg.budget, "budget")?,
        workers: workers(cfg),
    };
    let mut table = Table::new(&[
        "n",
        "t_star",
        "sqrt_t_star",
        "ci_lo",
        "ci_hi",
        "probes",
        "flagged",
        "partial",
        "t_first_order",
        "t_plus",
        "t_minus",
        "pre_asymptotic",
    ]);
    let mut probe_log = serde_json::Map::new();
    for n in cfg.depths() {
        let r = threshold_scan(&TreeParams::new(n)?, &scfg)?;
        eprintln!(
            "scan n={n} sqrt(t*) {:.4} in [{:.4}, {:.4}]{}{}",
            r.sqrt_t_star,
            r.ci.0.sqrt(),
            r.ci.1.sqrt(),
            if r.flagged { " flagged" } else { "" },
            if r.partial { " partial" } else { "" }
        );
        let c = centering(n).ok();
        let first_order = covertree_core::analytic::centering::first_order_root(n as f64).powi(2);
        table.push(vec![
            n.to_string(),
            fmt_f64(r.t_star),
            fmt_f64(r.sqrt_t_star),
            fmt_f64(r.ci.0),
            fmt_f64(r.ci.1),
            r.probes.len().to_string(),
            r.flagged.to_string(),
            r.partial.to_string(),
            fmt_f64(first_order),
            fmt_opt(c.as_ref().map(|c| c.t_plus)),
            fmt_opt(c.as_ref().map(|c| c.t_minus)),
            c.as_ref()
                .map(|c| c.pre_asymptotic.to_string())
                .unwrap_or_default(),
        ]);
        let probes: Vec<Value> = r
            .probes
            .iter()
            .map(|p| json!({ "sqrt_t": p.sqrt_t, "covered": p.covered, "stderr": p.stderr, "seed": p.seed }))
            .collect();
        probe_log.insert(n.to_string(), Value::Array(probes));
    }
    table.write(cfg.out.as_deref())?;
    if let Some(out) = &cfg.out {
        write_meta(
            out,
            cfg,
            json!({ "target": scfg.target, "probes": probe_log }),
        )?;
    }
    Ok(())
}

/// The value column a summary table is fitted on.
fn fit_column(t: &Table) -> Result<&'static str> {
    ["sqrt_t_star", "mean_max_leaf"]
        .into_iter()
        .find(|c| t.has(c))
        .ok_or_else(|| CliError::Data("table has neither `sqrt_t_star` nor `mean_max_leaf`".into()))
}

pub fn fit_table(path: &Path) -> Result<(&'static str, FitResult)> {
    let t = Table::read(path)?;
    let col = fit_column(&t)?;
    let pts: Vec<(f64, f64)> = t.column("n")?.into_iter().zip(t.column(col)?).collect();
    Ok((col, fit_centering(&pts)?))
}

fn fit(cfg: &ExperimentConfig) -> Result<()> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("missing `in`".into()))?;
    let (col, f) = fit_table(input)?;
    let mut t = Table::new(&[
        "model",
        "column",
        "A",
        "B",
        "C",
        "residual_rms",
        "n_min",
        "n_max",
    ]);
    t.push(vec![
        cfg.model.clone().unwrap_or_default(),
        col.to_string(),
        fmt_f64(f.a),
        fmt_f64(f.b),
        fmt_f64(f.c),
        fmt_f64(f.residual_rms),
        fmt_f64(f.n_min),
        fmt_f64(f.n_max),
    ]);
    t.write(cfg.out.as_deref())
}

fn compare_centerings(cfg: &ExperimentConfig) -> Result<()> {
    let missing = || CliError::Usage("missing input".into());
    let (_, cover) = fit_table(cfg.cover.as_deref().ok_or_else(missing)?)?;
    let (_, gff) = fit_table(cfg.gff.as_deref().ok_or_else(missing)?)?;
    let rows = [
        (
            "cover_sqrt_t",
            cover.a,
            cover.b,
            cover.b,
            cover_asymptotic_b(),
        ),
        (
            "gff_over_sqrt2",
            gff.a,
            gff.b,
            gff.b / 2f64.sqrt(),
            gff_asymptotic_b(),
        ),
    ];
    let mut t = Table::new(&[
        "series",
        "fitted_A",
        "fitted_B",
        "comparable_B",
        "asymptotic_B",
        "B_negative",
    ]);
    for (name, a, b, cb, asym) in rows {
        t.push(vec![
            name.to_string(),
            fmt_f64(a),
            fmt_f64(b),
            fmt_f64(cb),
            fmt_f64(asym),
            (cb < 0.0).to_string(),
        ]);
    }
    t.write(cfg.out.as_deref())?;
    let bad: Vec<&str> = rows.iter().filter(|r| !(r.3 < 0.0)).map(|r| r.0).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!(
            "fitted B is not negative for {}",
            bad.join(", ")
        )))
    }
}

fn verify_analytic(cfg: &ExperimentConfig) -> Result<()> {
    let rows = run_suite(req(cfg.seed, "seed")?, workers(cfg))?;
    let mut t = Table::new(&["check", "statistic", "threshold", "pass"]);
    for r in &rows {
        t.push(vec![
            r.check.clone(),
            fmt_f64(r.statistic),
            fmt_f64(r.threshold),
            r.pass.to_string(),
        ]);
    }
    t.write(cfg.out.as_deref())?;
    if let Some(out) = &cfg.out {
        write_meta(out, cfg, json!({}))?;
    }
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.check.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join("; ")))
    }
}

/// Recomputes the summary of a JSONL run from its records and sidecar.
pub fn summarize_file(path: &Path) -> Result<SummaryLine> {
    let meta = read_meta(path)?;
    let statistic = meta["statistic"]
        .as_str()
        .ok_or_else(|| CliError::Data("sidecar has no `statistic`".into()))?
        .to_string();
    let seed = meta["seed"]
        .as_u64()
        .ok_or_else(|| CliError::Data("sidecar has no `seed`".into()))?;
    let mut records = read_jsonl(path)?;
    records.sort_by_key(|r| r["replica"].as_u64().unwrap_or(u64::MAX));
    let values = records
        .iter()
        .map(|r| match &r[statistic.as_str()] {
            Value::Bool(b) => Ok(*b as u8 as f64),
            Value::Number(x) => x
                .as_f64()
                .ok_or_else(|| CliError::Data("bad number".into())),
            other => Err(CliError::Data(format!(
                "`{statistic}` is {other} in a record"
            ))),
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SummaryLine::new(
        &statistic,
        &ReplicaSummary::from_values(&values, seed),
    ))
}

fn summarize(cfg: &ExperimentConfig) -> Result<()> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::Usage("missing `in`".into()))?;
    println!("{}", summarize_file(input)?.to_json());
    Ok(())
}

fn plot_data(cfg: &ExperimentConfig) -> Result<()> {
    let mut out = Table::new(&["x", "y", "yerr"]);
    if let Some(input) = &cfg.input {
        let t = Table::read(input)?;
        let n = t.column("n")?;
        let (y, err) = if t.has("sqrt_t_star") {
            let lo = t.column("ci_lo")?;
            let hi = t.column("ci_hi")?;
            let err = lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| 0.5 * (b.sqrt() - a.sqrt()))
                .collect();
            (t.column("sqrt_t_star")?, err)
        } else if t.has("mean_max_leaf") {
            (t.column("mean_max_leaf")?, t.column("stderr_max_leaf")?)
        } else {
            return Err(CliError::Data(
                "unrecognized table: expected scan or gff CSV".into(),
            ));
        };
        for i in 0..n.len() {
            out.push(vec![fmt_f64(n[i]), fmt_f64(y[i]), fmt_f64(err[i])]);
        }
        return out.write(cfg.out.as_deref());
    }

    // coverage probability against t
    let p = TreeParams::new(req(cfg.depth, "depth")?)?;
    let (replicas, seed) = (req(cfg.replicas, "replicas")?, req(cfg.seed, "seed")?);
    let grid = cfg.t_grid.clone().unwrap_or_default();
    for (j, &t) in grid.iter().enumerate() {
        let s = derive_seed(seed, j as u64);
        let covered = match cfg.engine {
            Some(Engine::Walk) => {
                let v: Vec<f64> = map_replicas(replicas, s, workers(cfg), |_, rng| {
                    run_until_inverse_local_time(&p, t, rng, false)
                        .map(|o| o.covered_by_tau_t as u8 as f64)
                })
                .into_iter()
                .collect::<std::result::Result<_, covertree_core::Error>>()?;
                ReplicaSummary::from_values(&v, s)
            }
            _ => {
                let u = uncover_probability(&p, t, replicas, s, workers(cfg))?;
                ReplicaSummary {
                    estimate: 1.0 - u.estimate,
                    ..u
                }
            }
        };
        out.push(vec![
            fmt_f64(t),
            fmt_f64(covered.estimate),
            fmt_f64(covered.stderr),
        ]);
    }
    out.write(cfg.out.as_deref())?;
    if let Some(o) = &cfg.out {
        write_meta(
            o,
            cfg,
            json!({ "y": "P(covered at tau(t))", "per_point_seed": "derive_seed(seed, index)" }),
        )?;
    }
    Ok(())
}
