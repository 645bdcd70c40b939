mod common;

use circa::engine::Encoding;
use circa::entails::{derive_descriptor, find_smaller_model, EntailsEngine, FlipDescriptor};
use circa::formula::{parse_dimacs, parse_partition, parse_query};
use circa::oracle::{all_models, entails_min_bf, ffn_bf, minimal_models};
use circa::sat::{extension_exists, BackendKind, Budget};
use circa::{
    entails_min, free_for_negation, gcwa_closure, Assignment, BoolExpr, CnfFormula, EntailsConfig, FfnConfig,
    Partition, ScheduleConfig, Var, Verdict,
};
use common::{random_3cnf, random_cnf, random_partition, random_query, var_set};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn files_drive_the_engines() {
    let phi = parse_dimacs("c pq example\np cnf 2 1\n1 2 0\n").unwrap().formula;
    let part = parse_partition("min 1 0\nfix 2 0\n", 2).unwrap();
    let r = entails_min(&phi, &parse_query("!1").unwrap(), &part, &EntailsConfig::default()).unwrap();
    assert_eq!(
        r.verdict,
        Verdict::NotEntailed {
            witness: Assignment::from_str01("10")
        }
    );
    let part = parse_partition("min 1 0\nvar 2 0\n", 2).unwrap();
    let r = entails_min(&phi, &parse_query("!1").unwrap(), &part, &EntailsConfig::default()).unwrap();
    assert!(r.verdict.is_entailed());
}

#[test]
fn closure_of_implication() {
    let phi = CnfFormula::from_dimacs_clauses(2, &[&[-1, 2]]).unwrap();
    let g = gcwa_closure(&phi, &ScheduleConfig::conflicts()).unwrap();
    assert!(g.exact);
    assert_eq!(all_models(&g.formula).unwrap(), vec![Assignment::from_str01("00")]);
}

#[test]
fn certificate_alone_proves_entailment() {
    // Replaying the certificate on a fresh engine leaves ω unsatisfiable.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(3..=7);
        let phi = random_3cnf(&mut rng, n, 2 * n as usize);
        let psi = random_query(&mut rng, n, 3);
        let part = Partition::all_min(n);
        let r = entails_min(&phi, &psi, &part, &EntailsConfig::default()).unwrap();
        if let Verdict::Entailed { certificate } = r.verdict {
            let cfg = EntailsConfig {
                record_omega: true,
                ..EntailsConfig::default()
            };
            let mut e = EntailsEngine::new(&phi, &psi, &part, cfg).unwrap();
            for d in certificate {
                e.refine(d).unwrap();
            }
            let clauses = e.omega_clauses().unwrap().to_vec();
            let nv = e.omega_num_vars();
            assert!(!extension_exists(&clauses, nv, &Assignment::zeros(0)));
        }
    }
}

fn not_x(x: Var) -> BoolExpr {
    BoolExpr::not(BoolExpr::Var(x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ffn_equals_general_engine(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=10);
        let m = rng.gen_range(1..=3 * n as usize);
        let phi = random_cnf(&mut rng, n, m);
        let x = Var::new(rng.gen_range(1..=n));
        let special = free_for_negation(&phi, x, &FfnConfig::default()).unwrap().answer();
        let general = entails_min(&phi, &not_x(x), &Partition::all_min(n), &EntailsConfig::default())
            .unwrap()
            .verdict
            .decided();
        prop_assert_eq!(special, general);
        prop_assert_eq!(special, Some(ffn_bf(&phi).unwrap().contains(&x)));
    }

    #[test]
    fn entails_matches_oracle_under_all_settings(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=7);
        let m = rng.gen_range(1..=3 * n as usize);
        let phi = random_cnf(&mut rng, n, m);
        let psi = random_query(&mut rng, n, 3);
        let part = random_partition(&mut rng, n);
        let expected = entails_min_bf(&phi, &psi, &part).unwrap();
        for encoding in [Encoding::Shared, Encoding::Naive] {
            for backend in [BackendKind::Cdcl, BackendKind::Backtrack] {
                let cfg = EntailsConfig { encoding, backend, seed, ..EntailsConfig::default() };
                let r = entails_min(&phi, &psi, &part, &cfg).unwrap();
                prop_assert_eq!(r.verdict.decided(), Some(expected));
            }
        }
    }

    #[test]
    fn smaller_models_and_descriptors(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=7);
        let m = rng.gen_range(1..=3 * n as usize);
        let phi = random_cnf(&mut rng, n, m);
        let part = random_partition(&mut rng, n);
        let minimal = minimal_models(&phi, &part).unwrap();
        for nu in all_models(&phi).unwrap() {
            let found = find_smaller_model(&phi, &nu, &part, &Budget::unlimited()).unwrap().unwrap();
            match found {
                None => prop_assert!(minimal.contains(&nu)),
                Some(smaller) => {
                    prop_assert!(part.less(&smaller, &nu) && phi.evaluate(&smaller).unwrap());
                    let d: FlipDescriptor = derive_descriptor(&nu, &smaller, &part).unwrap();
                    prop_assert_eq!(d.apply(&nu), smaller);
                    prop_assert!(d.covers(&phi, &nu));
                }
            }
        }
    }

    #[test]
    fn budgets_never_give_wrong_answers(seed in any::<u64>(), conflicts in 0u64..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..=10);
        let phi = random_3cnf(&mut rng, n, 4 * n as usize);
        let psi = random_query(&mut rng, n, 3);
        let part = Partition::all_min(n);
        let cfg = EntailsConfig { total_budget: Budget::conflicts(conflicts), ..EntailsConfig::default() };
        let r = entails_min(&phi, &psi, &part, &cfg).unwrap();
        if let Some(v) = r.verdict.decided() {
            prop_assert_eq!(v, entails_min_bf(&phi, &psi, &part).unwrap());
        }
        let x = Var::new(rng.gen_range(1..=n));
        let cfg = FfnConfig { budget: Budget::conflicts(conflicts), ..FfnConfig::default() };
        if let Some(v) = free_for_negation(&phi, x, &cfg).unwrap().answer() {
            prop_assert_eq!(v, ffn_bf(&phi).unwrap().contains(&x));
        }
    }
}

#[test]
fn partition_growth_from_query() {
    // Variable 3 appears only in the query and is minimized.
    let phi = CnfFormula::from_dimacs_clauses(2, &[&[1, 2]]).unwrap();
    let part = Partition::from_sets(2, &var_set([1]), &var_set([2]), &var_set([])).unwrap();
    let psi = parse_query("!3 & (1 | 2)").unwrap();
    let r = entails_min(&phi, &psi, &part, &EntailsConfig::default()).unwrap();
    assert!(r.verdict.is_entailed());
    assert_eq!(r.universe, 3);
}
