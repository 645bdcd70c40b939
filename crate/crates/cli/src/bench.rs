//! Closure over a directory of instances, one CSV row each. An instance
//! counts as solved when the closure is exact within the per-instance
//! budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use circa::closure::BudgetUnit;
use circa::{free_for_negation_all, FfnConfig, ScheduleConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::load_cnf;
use crate::BenchArgs;

#[derive(Serialize, Debug)]
struct Row {
    instance: String,
    verdict: &'static str,
    time_ms: f64,
    solver_calls: u64,
    conflicts: u64,
}

fn instances(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        if path.is_file() && matches!(ext, "cnf" | "dimacs") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn run_one(path: &Path, budget_ms: u64, seed: u64) -> Row {
    let instance = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let schedule = ScheduleConfig {
        unit: BudgetUnit::Millis,
        initial: budget_ms.clamp(1, 1000),
        max: budget_ms.max(1),
        ffn: FfnConfig {
            seed,
            ..FfnConfig::default()
        },
        ..ScheduleConfig::default()
    };
    let started = Instant::now();
    let result = load_cnf(path).and_then(|phi| Ok(free_for_negation_all(&phi, &schedule)?));
    let time_ms = started.elapsed().as_secs_f64() * 1000.0;
    match result {
        Ok(r) => Row {
            instance,
            verdict: if r.exact && time_ms <= budget_ms as f64 {
                "EXACT"
            } else {
                "UNKNOWN"
            },
            time_ms,
            solver_calls: r.stats.solver_calls,
            conflicts: r.stats.conflicts,
        },
        Err(e) => {
            eprintln!("error: {}: {e:#}", path.display());
            Row {
                instance,
                verdict: "ERROR",
                time_ms,
                solver_calls: 0,
                conflicts: 0,
            }
        }
    }
}

pub fn run(a: BenchArgs) -> Result<u8> {
    let paths = instances(&a.dir)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(a.workers.max(1)).build()?;
    let rows: Vec<Row> = pool.install(|| paths.par_iter().map(|p| run_one(p, a.budget_ms, a.seed)).collect());

    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(std::io::stdout().lock());
    w.write_record(["instance", "verdict", "time_ms", "solver_calls", "conflicts"])?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    drop(w);
    if !rows.is_empty() {
        let solved: Vec<&Row> = rows.iter().filter(|r| r.verdict == "EXACT").collect();
        let mean = if solved.is_empty() {
            0.0
        } else {
            solved.iter().map(|r| r.time_ms).sum::<f64>() / solved.len() as f64
        };
        println!("# solved {}/{} mean_time_ms {mean:.3}", solved.len(), rows.len());
    }
    Ok(0)
}
