//! Scaling benchmark harness: sweeps (m, n, b, kernel) configurations over
//! seeded random nets and reports median solve times as CSV.
//!
//! Every benched instance is solved by all requested kernels and their
//! slacks compared; a mismatch writes a reproducer file and aborts, so
//! benchmark runs double as a differential fuzzer.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Deserialize;
use serde_json::json;

use bufopt::solver::{Kernel, PruneMode};
use bufopt::{gen_net, solve};

use crate::{write_output, CliError, ModeArg};

pub const CSV_HEADER: &str = "m,n,b,kernel,median_seconds,normalized,candidates_peak";

#[derive(Args)]
pub struct BenchArgs {
    /// JSON config file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sink counts to sweep.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Buffer-position counts to sweep.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Library sizes to sweep.
    #[arg(long, value_delimiter = ',')]
    b: Vec<usize>,
    /// Repetitions per configuration (median reported).
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Kernels to bench: fast, baseline.
    #[arg(long, value_delimiter = ',')]
    kernels: Vec<String>,
    /// Prune mode applied to every kernel.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Worker threads; timings are cleanest at 1.
    #[arg(long)]
    jobs: Option<usize>,
    /// CSV destination (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BenchConfigFile {
    #[serde(default)]
    m: Vec<usize>,
    #[serde(default)]
    n: Vec<usize>,
    #[serde(default)]
    b: Vec<usize>,
    reps: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    kernels: Vec<String>,
    mode: Option<String>,
    jobs: Option<usize>,
    out: Option<String>,
}

struct BenchConfig {
    m: Vec<usize>,
    n: Vec<usize>,
    b: Vec<usize>,
    reps: usize,
    seed: u64,
    kernels: Vec<Kernel>,
    mode: PruneMode,
    jobs: usize,
    out: Option<PathBuf>,
}

fn parse_kernel(name: &str) -> Result<Kernel, CliError> {
    match name {
        "fast" => Ok(Kernel::Fast),
        "baseline" => Ok(Kernel::Baseline),
        other => Err(CliError::Validation(format!(
            "unknown bench kernel `{other}` (expected fast or baseline)"
        ))),
    }
}

fn resolve_config(args: &BenchArgs) -> Result<BenchConfig, CliError> {
    let file: BenchConfigFile = match &args.config {
        Some(path) => {
            let body = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            serde_json::from_str(&body)
                .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))?
        }
        None => BenchConfigFile::default(),
    };

    let m = if args.m.is_empty() { file.m } else { args.m.clone() };
    let n = if args.n.is_empty() { file.n } else { args.n.clone() };
    let b = if args.b.is_empty() { file.b } else { args.b.clone() };
    let kernel_names = if args.kernels.is_empty() {
        if file.kernels.is_empty() {
            vec!["fast".to_string(), "baseline".to_string()]
        } else {
            file.kernels
        }
    } else {
        args.kernels.clone()
    };
    let mode = match (&args.mode, file.mode.as_deref()) {
        (Some(m), _) => m.to_mode(),
        (None, Some("destructive")) => PruneMode::Destructive,
        (None, Some("copy")) => PruneMode::Copy,
        (None, Some(other)) => {
            return Err(CliError::Validation(format!(
                "unknown bench mode `{other}`"
            )))
        }
        (None, None) => PruneMode::Destructive,
    };

    for (name, list) in [("m", &m), ("n", &n), ("b", &b)] {
        if list.is_empty() {
            return Err(CliError::Validation(format!(
                "bench needs at least one value for {name}"
            )));
        }
    }
    if m.iter().any(|&v| v == 0) || b.iter().any(|&v| v == 0) {
        return Err(CliError::Validation(
            "bench m and b values must be at least 1".into(),
        ));
    }

    let kernels = kernel_names
        .iter()
        .map(|k| parse_kernel(k))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(BenchConfig {
        m,
        n,
        b,
        reps: args.reps.or(file.reps).unwrap_or(5).max(1),
        seed: args.seed.or(file.seed).unwrap_or(1),
        kernels,
        mode,
        jobs: args.jobs.or(file.jobs).unwrap_or(1).max(1),
        out: args.out.clone().or(file.out.map(PathBuf::from)),
    })
}

struct Row {
    m: usize,
    n: usize,
    b: usize,
    kernel: Kernel,
    median_seconds: f64,
    normalized: f64,
    candidates_peak: usize,
    slack: f64,
}

fn kernel_name(k: Kernel) -> &'static str {
    match k {
        Kernel::Fast => "fast",
        Kernel::Baseline => "baseline",
    }
}

fn median(mut times: Vec<f64>) -> f64 {
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = times.len();
    if k % 2 == 1 {
        times[k / 2]
    } else {
        0.5 * (times[k / 2 - 1] + times[k / 2])
    }
}

/// Benches one (m, n, b) instance with every kernel. Returns one row per
/// kernel, or the slack disagreement if the kernels diverge.
fn run_instance(cfg: &BenchConfig, m: usize, n: usize, b: usize) -> Result<Vec<Row>, CliError> {
    let (tree, lib) = gen_net(m, n, b, cfg.seed);
    let mut rows = Vec::with_capacity(cfg.kernels.len());
    for &kernel in &cfg.kernels {
        let mut times = Vec::with_capacity(cfg.reps);
        let mut peak = 0usize;
        let mut slack = f64::NAN;
        for _ in 0..cfg.reps {
            let start = Instant::now();
            let res = solve(&tree, &lib, kernel, cfg.mode)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            times.push(start.elapsed().as_secs_f64());
            peak = res.stats.peak_list_len;
            slack = res.slack;
        }
        rows.push(Row {
            m,
            n,
            b,
            kernel,
            median_seconds: median(times),
            normalized: 1.0,
            candidates_peak: peak,
            slack,
        });
    }
    // Differential check: every kernel must report the same slack.
    if let Some(first) = rows.first() {
        for row in &rows[1..] {
            if row.slack != first.slack {
                return Err(CliError::Validation(format!(
                    "kernel disagreement on m={m} n={n} b={b}: {} {:e} vs {} {:e}",
                    kernel_name(first.kernel),
                    first.slack,
                    kernel_name(row.kernel),
                    row.slack
                )));
            }
        }
    }
    Ok(rows)
}

/// Fills the `normalized` column: per kernel, divide by the smallest-b row
/// of the same (m, n) group when b is swept, else by the smallest-n row of
/// the same (m, b) group when n is swept.
fn normalize(cfg: &BenchConfig, rows: &mut [Row]) {
    let key_of = |r: &Row| -> (usize, usize, Kernel, usize) {
        if cfg.b.len() > 1 {
            (r.m, r.n, r.kernel, r.b)
        } else {
            (r.m, r.b, r.kernel, r.n)
        }
    };
    if cfg.b.len() <= 1 && cfg.n.len() <= 1 {
        return;
    }
    let mut denominators: Vec<((usize, usize, Kernel), (usize, f64))> = Vec::new();
    for r in rows.iter() {
        let (a, b_, k, sweep) = key_of(r);
        match denominators.iter_mut().find(|(key, _)| *key == (a, b_, k)) {
            Some((_, best)) if sweep < best.0 => *best = (sweep, r.median_seconds),
            Some(_) => {}
            None => denominators.push(((a, b_, k), (sweep, r.median_seconds))),
        }
    }
    for r in rows.iter_mut() {
        let (a, b_, k, _) = key_of(r);
        let (_, base) = denominators
            .iter()
            .find(|(key, _)| *key == (a, b_, k))
            .expect("own group exists")
            .1;
        r.normalized = if base > 0.0 {
            r.median_seconds / base
        } else {
            1.0
        };
    }
}

fn write_reproducer(cfg: &BenchConfig, m: usize, n: usize, b: usize, msg: &str) -> PathBuf {
    let path = cfg
        .out
        .as_ref()
        .and_then(|p| p.parent().map(|d| d.join("bench-mismatch.json")))
        .unwrap_or_else(|| PathBuf::from("bench-mismatch.json"));
    let body = serde_json::to_string_pretty(&json!({
        "error": msg,
        "seed": cfg.seed,
        "m": [m],
        "n": [n],
        "b": [b],
        "reps": cfg.reps,
        "kernels": cfg.kernels.iter().map(|&k| kernel_name(k)).collect::<Vec<_>>(),
        "mode": match cfg.mode { PruneMode::Destructive => "destructive", PruneMode::Copy => "copy" },
    }))
    .expect("reproducer serialization cannot fail");
    let _ = std::fs::write(&path, body + "\n");
    path
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let cfg = resolve_config(args)?;

    let mut instances: Vec<(usize, usize, usize)> = Vec::new();
    for &m in &cfg.m {
        for &n in &cfg.n {
            for &b in &cfg.b {
                instances.push((m, n, b));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("worker pool: {e}")))?;
    let results: Vec<Result<Vec<Row>, CliError>> = pool.install(|| {
        use rayon::prelude::*;
        instances
            .par_iter()
            .map(|&(m, n, b)| run_instance(&cfg, m, n, b))
            .collect()
    });

    // Rows merge in configuration order regardless of completion order.
    let mut rows = Vec::new();
    for (result, &(m, n, b)) in results.into_iter().zip(&instances) {
        match result {
            Ok(r) => rows.extend(r),
            Err(e) => {
                let repro = write_reproducer(&cfg, m, n, b, e.message());
                return Err(CliError::Validation(format!(
                    "{} (reproducer written to {})",
                    e.message(),
                    repro.display()
                )));
            }
        }
    }
    normalize(&cfg, &mut rows);

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{:e},{},{}\n",
            r.m,
            r.n,
            r.b,
            kernel_name(r.kernel),
            r.median_seconds,
            r.normalized,
            r.candidates_peak
        ));
    }
    write_output(&cfg.out, &csv)
}
