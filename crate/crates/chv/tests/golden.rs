//! Frozen brute-force results for small seeded instances. The fixture was
//! produced by the `chv brute-force` subcommand at n=10, m=2, B=1; ratios
//! are compared bit-for-bit (the CSV stores shortest round-trip floats).

use chv::oracle::brute_force_best;
use chv::{ChvInstance, Seed};

#[test]
fn brute_force_matches_frozen_fixture() {
    let text = include_str!("fixtures/oracle_golden.csv");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("seed,kappa,best_ratio,solution_count"));
    let mut rows = 0usize;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4, "bad fixture row {line:?}");
        let seed: u64 = fields[0].parse().unwrap();
        let kappa: f64 = fields[1].parse().unwrap();
        let want_ratio: f64 = fields[2].parse().unwrap();
        let want_count: u64 = fields[3].parse().unwrap();

        let inst = ChvInstance::sample(2, 10, 1, kappa, Seed::new(seed)).unwrap();
        let got = brute_force_best(&inst).unwrap();
        assert_eq!(
            got.best_ratio, want_ratio,
            "ratio drifted at seed {seed} kappa {kappa}"
        );
        assert_eq!(
            got.solution_count_at,
            Some((kappa, want_count)),
            "count drifted at seed {seed} kappa {kappa}"
        );
        rows += 1;
    }
    assert_eq!(rows, 18);
}
