#![allow(dead_code)]

use circa::formula::{Role, VarSet};
use circa::{BoolExpr, CnfFormula, Lit, Partition, Var};
use rand::seq::index::sample;
use rand::Rng;

/// Uniform random 3-CNF: each clause has three distinct variables.
pub fn random_3cnf(rng: &mut impl Rng, n: u32, m: usize) -> CnfFormula {
    let mut f = CnfFormula::new(n);
    for _ in 0..m {
        let vars = sample(rng, n as usize, 3.min(n as usize));
        let lits: Vec<Lit> = vars
            .iter()
            .map(|i| Lit::new(Var::from_index(i), rng.gen_bool(0.5)))
            .collect();
        f.add_lits(lits).unwrap();
    }
    f
}

/// Clauses of width 1 to 3 with possibly repeated variables.
pub fn random_cnf(rng: &mut impl Rng, n: u32, m: usize) -> CnfFormula {
    let mut f = CnfFormula::new(n);
    for _ in 0..m {
        let k = rng.gen_range(1..=3);
        let lits: Vec<Lit> = (0..k)
            .map(|_| Lit::new(Var::new(rng.gen_range(1..=n)), rng.gen_bool(0.5)))
            .collect();
        f.add_lits(lits).unwrap();
    }
    f
}

/// Random query over variables `1..=n` with nesting depth at most `depth`.
pub fn random_query(rng: &mut impl Rng, n: u32, depth: u32) -> BoolExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..20) {
            0 => BoolExpr::Const(rng.gen_bool(0.5)),
            _ => BoolExpr::var(rng.gen_range(1..=n)),
        };
    }
    let sub = |rng: &mut _| random_query(rng, n, depth - 1);
    match rng.gen_range(0..5) {
        0 => BoolExpr::not(sub(rng)),
        1 => {
            let k = rng.gen_range(2..=3);
            BoolExpr::and((0..k).map(|_| sub(rng)).collect())
        }
        2 => {
            let k = rng.gen_range(2..=3);
            BoolExpr::or((0..k).map(|_| sub(rng)).collect())
        }
        3 => {
            let a = sub(rng);
            BoolExpr::implies(a, sub(rng))
        }
        _ => {
            let a = sub(rng);
            BoolExpr::iff(a, sub(rng))
        }
    }
}

pub fn random_partition(rng: &mut impl Rng, n: u32) -> Partition {
    Partition::from_roles(
        (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => Role::Min,
                1 => Role::Fixed,
                _ => Role::Varying,
            })
            .collect(),
    )
}

pub fn var_set(ids: impl IntoIterator<Item = u32>) -> VarSet {
    ids.into_iter().map(Var::new).collect()
}
