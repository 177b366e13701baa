use proptest::prelude::*;

use optoscatter::fock::{fc_overlap, oracle_min_dim, oracle_overlap_matrix, FcTable};
use optoscatter::{Execution, ModelParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_form_matches_matrix(g1 in 0.0f64..1.0, g2 in 0.0f64..0.15, m in 0usize..3, n in 0usize..3) {
        let p = ModelParams::new(g1, g2, 0.1).unwrap();
        let block = oracle_overlap_matrix(m, n, &p, 8, oracle_min_dim(8)).unwrap();
        for j in 0..=8 {
            for s in 0..=8 {
                let d = (fc_overlap(m, j, n, s, &p).unwrap() - block[(j, s)]).norm();
                prop_assert!(d < 1e-9, "m={m} j={j} n={n} s={s}: {d:e}");
            }
        }
    }

    #[test]
    fn rows_are_unit_vectors(g1 in 0.0f64..1.0, g2 in 0.0f64..0.15, m in 0usize..3, n in 0usize..3, j in 0usize..6) {
        let p = ModelParams::new(g1, g2, 0.1).unwrap();
        let sum: f64 = (0..=70).map(|s| fc_overlap(m, j, n, s, &p).unwrap().norm_sqr()).sum();
        prop_assert!((sum - 1.0).abs() < 1e-8, "{sum}");
    }
}

#[test]
fn table_matches_direct_evaluation() {
    let p = ModelParams::new(0.6, 0.07, 0.1).unwrap();
    let seq = FcTable::build(&p, 10, Execution::Sequential).unwrap();
    let par = FcTable::build(&p, 10, Execution::Parallel).unwrap();
    for m in 0..=2 {
        for n in 0..=2 {
            for j in 0..=10 {
                for s in 0..=10 {
                    let direct = fc_overlap(m, j, n, s, &p).unwrap();
                    assert_eq!(seq.get(m, j, n, s), direct);
                    assert_eq!(par.get(m, j, n, s), direct);
                }
            }
        }
    }
}
