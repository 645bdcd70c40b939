use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use circa::closure::{ClosureResult, RoundInfo};
use circa::{Assignment, FlipDescriptor, RunStats, VarSet};
use serde::Serialize;

/// Machine-readable result of one invocation. The schema lives in
/// `schema/report.schema.json`.
#[derive(Serialize, Debug, Default)]
pub struct RunReport {
    pub command: &'static str,
    pub verdict: &'static str,
    pub universe: u32,
    pub iterations: u64,
    pub solver_calls: u64,
    pub conflicts: u64,
    pub time_ms: f64,
    pub seed: u64,
    pub vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<Descriptor>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub variables: Vec<VarRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<RoundRow>,
}

#[derive(Serialize, Debug)]
pub struct Descriptor {
    pub to_zero: Vec<u32>,
    pub varying_to_zero: Vec<u32>,
    pub varying_to_one: Vec<u32>,
}

#[derive(Serialize, Debug)]
pub struct VarRow {
    pub var: u32,
    pub status: &'static str,
}

#[derive(Serialize, Debug)]
pub struct RoundRow {
    pub budget: u64,
    pub tested: usize,
    pub resolved: usize,
    pub proven_free: Vec<u32>,
}

pub fn ids(set: &VarSet) -> Vec<u32> {
    set.iter().map(|v| v.get()).collect()
}

impl RunReport {
    pub fn new(command: &'static str, verdict: &'static str, stats: &RunStats, seed: u64) -> RunReport {
        RunReport {
            command,
            verdict,
            iterations: stats.iterations,
            solver_calls: stats.solver_calls,
            conflicts: stats.conflicts,
            time_ms: stats.elapsed.as_secs_f64() * 1000.0,
            seed,
            ..RunReport::default()
        }
    }

    pub fn with_witness(mut self, nu: &Assignment) -> RunReport {
        self.witness = Some(nu.lits().map(|l| l.to_dimacs()).collect());
        self
    }

    pub fn with_certificate(mut self, ds: &[FlipDescriptor]) -> RunReport {
        self.certificate = Some(
            ds.iter()
                .map(|d| Descriptor {
                    to_zero: ids(&d.to_zero),
                    varying_to_zero: ids(&d.varying_to_zero),
                    varying_to_one: ids(&d.varying_to_one),
                })
                .collect(),
        );
        self
    }

    pub fn with_closure(mut self, r: &ClosureResult) -> RunReport {
        self.free = Some(ids(&r.free));
        self.vacuous = r.vacuous;
        self.variables = r
            .status
            .iter()
            .map(|(v, s)| VarRow {
                var: v.get(),
                status: status_name(*s),
            })
            .collect();
        self.rounds = r.rounds.iter().map(round_row).collect();
        self
    }

    /// Writes the report as JSON; `-` means standard output.
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        if path == Path::new("-") {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        } else {
            fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn status_name(s: circa::VarStatus) -> &'static str {
    match s {
        circa::VarStatus::Free => "free",
        circa::VarStatus::NotFree => "not-free",
        circa::VarStatus::Unresolved => "unresolved",
    }
}

fn round_row(r: &RoundInfo) -> RoundRow {
    RoundRow {
        budget: r.budget,
        tested: r.tested,
        resolved: r.resolved,
        proven_free: r.proven_free.iter().map(|v| v.get()).collect(),
    }
}
