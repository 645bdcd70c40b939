use std::io::Read;

use super::{Clause, CnfFormula, FormulaError, Lit};

/// Result of reading a DIMACS CNF file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimacsParse {
    pub formula: CnfFormula,
    /// Clause count announced in the header.
    pub declared_clauses: usize,
    pub tautologies_dropped: usize,
    pub duplicate_literals_removed: usize,
}

fn err(line: usize, message: impl Into<String>) -> FormulaError {
    FormulaError::Dimacs {
        line,
        message: message.into(),
    }
}

/// Parses DIMACS CNF text.
///
/// Clauses may span lines and must be terminated by `0`. A line starting
/// with `%` ends the input (SATLIB convention).
pub fn parse_dimacs(text: &str) -> Result<DimacsParse, FormulaError> {
    let mut header: Option<(u32, usize)> = None;
    let mut formula = CnfFormula::default();
    let mut current: Vec<Lit> = Vec::new();
    let mut current_start = 0;
    let mut tautologies = 0;
    let mut duplicates = 0;

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('%') {
            break;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(err(lineno, "duplicate header"));
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 4 || fields[0] != "p" || fields[1] != "cnf" {
                return Err(err(
                    lineno,
                    "malformed header, expected `p cnf <vars> <clauses>`",
                ));
            }
            let nvars = fields[2]
                .parse::<u32>()
                .map_err(|_| err(lineno, format!("invalid variable count `{}`", fields[2])))?;
            let nclauses = fields[3]
                .parse::<usize>()
                .map_err(|_| err(lineno, format!("invalid clause count `{}`", fields[3])))?;
            header = Some((nvars, nclauses));
            formula = CnfFormula::new(nvars);
            continue;
        }
        let Some((nvars, _)) = header else {
            return Err(err(lineno, "clause before `p cnf` header"));
        };
        for tok in trimmed.split_whitespace() {
            let value: i64 = tok
                .parse()
                .map_err(|_| err(lineno, format!("invalid literal `{tok}`")))?;
            if value == 0 {
                let raw = current.len();
                match Clause::new(current.drain(..)) {
                    Some(c) => {
                        duplicates += raw - c.len();
                        formula.add_clause(c).expect("range checked per literal");
                    }
                    None => tautologies += 1,
                }
                continue;
            }
            if value.unsigned_abs() > u64::from(nvars) {
                return Err(err(
                    lineno,
                    format!("literal {value} exceeds declared variable count {nvars}"),
                ));
            }
            if current.is_empty() {
                current_start = lineno;
            }
            current.push(Lit::from_dimacs(value));
        }
    }

    let Some((_, declared_clauses)) = header else {
        return Err(err(text.lines().count().max(1), "missing `p cnf` header"));
    };
    if !current.is_empty() {
        return Err(err(current_start, "clause not terminated by 0"));
    }
    Ok(DimacsParse {
        formula,
        declared_clauses,
        tautologies_dropped: tautologies,
        duplicate_literals_removed: duplicates,
    })
}

/// Reads and parses DIMACS CNF from a byte stream.
pub fn read_dimacs(mut reader: impl Read) -> Result<DimacsParse, FormulaError> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| err(0, format!("read error: {e}")))?;
    let text = String::from_utf8_lossy(&bytes);
    parse_dimacs(&text)
}
