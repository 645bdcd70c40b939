use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use circa::closure::{BudgetUnit, UnitMode};
use circa::formula::{parse_dimacs, parse_partition, parse_query};
use circa::oracle::{all_models, ffn_bf, minimal_models};
use circa::sat::Budget;
use circa::{
    entails_min, free_for_negation, free_for_negation_all, CnfFormula, Encoding, EntailsConfig, FfnConfig,
    Partition, RunStats, ScheduleConfig, Var, Verdict,
};

use crate::report::{ids, status_name, RunReport};
use crate::{BudgetArgs, ClosureArgs, CommonArgs, EntailsArgs, FfnArgs, OracleArgs, OracleMode, ScheduleArgs, Unit};

pub const EXIT_YES: u8 = 10;
pub const EXIT_NO: u8 = 20;
pub const EXIT_UNKNOWN: u8 = 30;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_cnf(path: &Path) -> Result<CnfFormula> {
    let text = read(path)?;
    Ok(parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))?.formula)
}

fn load_partition(path: Option<&Path>, num_vars: u32) -> Result<Partition> {
    match path {
        None => Ok(Partition::all_min(num_vars)),
        Some(p) => parse_partition(&read(p)?, num_vars).with_context(|| format!("parsing {}", p.display())),
    }
}

fn budget(b: &BudgetArgs) -> Budget {
    Budget {
        conflicts: b.conflicts,
        time: b.timeout_ms.map(std::time::Duration::from_millis),
    }
}

fn encoding(c: &CommonArgs) -> Encoding {
    if c.naive_encoding {
        Encoding::Naive
    } else {
        Encoding::Shared
    }
}

fn print_stats(stats: &RunStats) {
    println!(
        "c iterations {} solver_calls {} conflicts {} time_ms {:.3}",
        stats.iterations,
        stats.solver_calls,
        stats.conflicts,
        stats.elapsed.as_secs_f64() * 1000.0
    );
}

fn finish(report: RunReport, common: &CommonArgs, code: u8) -> Result<u8> {
    if let Some(path) = &common.json {
        report.write(path)?;
    }
    Ok(code)
}

pub fn entails(a: EntailsArgs) -> Result<u8> {
    let phi = load_cnf(&a.cnf)?;
    let text = match (&a.query, &a.query_file) {
        (Some(q), _) => q.clone(),
        (None, Some(p)) => read(p)?,
        (None, None) => bail!("a query is required"),
    };
    let psi = parse_query(text.trim()).context("parsing query")?;
    let part = load_partition(a.partition.as_deref(), phi.num_vars())?;
    let cfg = EntailsConfig {
        total_budget: budget(&a.budget),
        encoding: encoding(&a.common),
        seed: a.common.seed,
        ..EntailsConfig::default()
    };
    let r = entails_min(&phi, &psi, &part, &cfg)?;
    let (verdict, code) = match &r.verdict {
        Verdict::Entailed { .. } => ("ENTAILED", EXIT_YES),
        Verdict::NotEntailed { .. } => ("NOT-ENTAILED", EXIT_NO),
        Verdict::Exhausted { .. } => ("UNKNOWN", EXIT_UNKNOWN),
    };
    let mut report = RunReport::new("entails", verdict, &r.stats, a.common.seed);
    report.universe = r.universe;
    report.vacuous = r.vacuous;
    println!("s {verdict}");
    match &r.verdict {
        Verdict::NotEntailed { witness } => {
            let full = phi.extended(r.universe);
            if !full.evaluate(witness)? || psi.evaluate(witness)? {
                bail!("internal error: witness {witness} fails its re-check");
            }
            println!("v {witness} 0");
            report = report.with_witness(witness);
        }
        Verdict::Entailed { certificate } => {
            if r.vacuous {
                println!("c vacuous: no minimal models");
            }
            println!("c certificate {} flip sets", certificate.len());
            report = report.with_certificate(certificate);
        }
        Verdict::Exhausted { .. } => {}
    }
    print_stats(&r.stats);
    finish(report, &a.common, code)
}

pub fn ffn(a: FfnArgs) -> Result<u8> {
    let phi = load_cnf(&a.cnf)?;
    let x = match Var::try_new(a.var) {
        Some(x) if a.var <= phi.num_vars() => x,
        _ => bail!("variable {} is not in 1..={}", a.var, phi.num_vars()),
    };
    let cfg = FfnConfig {
        budget: budget(&a.budget),
        encoding: encoding(&a.common),
        seed: a.common.seed,
        ..FfnConfig::default()
    };
    let o = free_for_negation(&phi, x, &cfg)?;
    let (verdict, code) = match o.answer() {
        Some(true) => ("TRUE", EXIT_YES),
        Some(false) => ("FALSE", EXIT_NO),
        None => ("UNKNOWN", EXIT_UNKNOWN),
    };
    println!("s {verdict}");
    print_stats(&o.stats);
    let mut report = RunReport::new("ffn", verdict, &o.stats, a.common.seed);
    report.universe = phi.num_vars();
    finish(report, &a.common, code)
}

pub fn schedule(s: &ScheduleArgs, common: &CommonArgs) -> ScheduleConfig {
    let base = match s.unit {
        Unit::Ms => ScheduleConfig::default(),
        Unit::Conflicts => ScheduleConfig::conflicts(),
        Unit::Unlimited => ScheduleConfig::unlimited(),
    };
    let initial = s.initial.unwrap_or(base.initial);
    let max = s.max.unwrap_or(if s.initial.is_some() { 32 * initial } else { base.max });
    ScheduleConfig {
        initial,
        max,
        multiplier: s.multiplier,
        unit_mode: if s.round_boundary {
            UnitMode::RoundBoundary
        } else {
            UnitMode::Greedy
        },
        parallel: s.parallel,
        ffn: FfnConfig {
            encoding: encoding(common),
            seed: common.seed,
            ..FfnConfig::default()
        },
        ..base
    }
}

pub fn closure(a: ClosureArgs) -> Result<u8> {
    let phi = load_cnf(&a.cnf)?;
    let cfg = schedule(&a.schedule, &a.common);
    let r = free_for_negation_all(&phi, &cfg)?;
    let (verdict, code) = if r.exact {
        ("EXACT", EXIT_YES)
    } else {
        ("APPROX", EXIT_UNKNOWN)
    };
    println!("s {verdict}");
    let free: Vec<String> = ids(&r.free).iter().map(u32::to_string).collect();
    if free.is_empty() {
        println!("f 0");
    } else {
        println!("f {} 0", free.join(" "));
    }
    if r.vacuous {
        println!("c vacuous: no minimal models");
    }
    println!("c var status");
    for (v, s) in &r.status {
        println!("c {v} {}", status_name(*s));
    }
    println!(
        "c rounds {} budget {}",
        r.rounds.len(),
        match cfg.unit {
            BudgetUnit::Millis => "ms",
            BudgetUnit::Conflicts => "conflicts",
            BudgetUnit::Unlimited => "unlimited",
        }
    );
    print_stats(&r.stats);
    if let Some(out) = &a.output {
        let closed = phi.with_negative_units(r.free.iter().copied())?;
        fs::write(out, closed.to_dimacs()).with_context(|| format!("writing {}", out.display()))?;
    }
    let mut report = RunReport::new("closure", verdict, &r.stats, a.common.seed).with_closure(&r);
    report.universe = phi.num_vars();
    finish(report, &a.common, code)
}

pub fn oracle(a: OracleArgs) -> Result<u8> {
    let phi = load_cnf(&a.cnf)?;
    match a.mode {
        OracleMode::Models | OracleMode::Minimal => {
            let models = if a.mode == OracleMode::Models {
                all_models(&phi)?
            } else {
                minimal_models(&phi, &load_partition(a.partition.as_deref(), phi.num_vars())?)?
            };
            println!("c {} assignments", models.len());
            for m in models {
                println!("v {m} 0");
            }
        }
        OracleMode::Free => {
            let free: Vec<String> = ids(&ffn_bf(&phi)?).iter().map(u32::to_string).collect();
            if free.is_empty() {
                println!("f 0");
            } else {
                println!("f {} 0", free.join(" "));
            }
        }
    }
    Ok(0)
}
