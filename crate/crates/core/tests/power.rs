use gof_core::models::{named, ModelFamily};
use gof_core::power::*;
use gof_core::{Seed, StatisticKind};

fn pair(m: usize) -> PowerConfig {
    let mut c = PowerConfig::new(
        ModelFamily::FullySpecified(named::synth(m).unwrap()),
        named::synth_alt(m).unwrap(),
        StatisticKind::Rms,
        Seed(5),
    );
    c.sims_null = 1_000;
    c.sims_alt = 1_000;
    c
}

#[test]
fn min_n_is_monotone_in_alpha_and_beta() {
    let grid = SearchGrid::default();
    let base = pair(16);
    let at = |alpha: f64, beta: f64| {
        let c = PowerConfig { alpha, beta, ..base.clone() };
        min_draws_to_distinguish(&c, grid).unwrap().min_n.unwrap()
    };
    let strict = at(0.01, 0.99);
    assert!(at(0.05, 0.99) <= strict);
    assert!(at(0.01, 0.95) <= strict);
    assert!(at(0.05, 0.95) <= at(0.05, 0.99));
}

#[test]
fn search_records_the_table() {
    let r = min_draws_to_distinguish(&pair(16), SearchGrid::default()).unwrap();
    let n = r.min_n.unwrap();
    assert!(r.table.windows(2).all(|w| w[0].n < w[1].n));
    let hit = r.table.iter().find(|c| c.n == n).unwrap();
    assert!(hit.rate >= 0.99);
    // The largest tested n below the answer failed, within the grid step.
    let below = r.table.iter().filter(|c| c.n < n).map(|c| c.n).max().unwrap_or(0);
    assert!(n - below <= 5);
}

#[test]
fn rate_tables_are_bit_reproducible() {
    let c = pair(32);
    let mut a = PowerHarness::new(&c, &StatisticKind::ALL).unwrap();
    let mut b = PowerHarness::new(&c, &StatisticKind::ALL).unwrap();
    for n in [50, 120] {
        assert_eq!(a.rates(n).unwrap(), b.rates(n).unwrap());
    }
}

#[test]
fn parameterized_null_runs() {
    let mut c = PowerConfig::new(
        ModelFamily::ZipfExponent { m: 30 },
        named::zipf(30, 1.0).unwrap(),
        StatisticKind::Rms,
        Seed(2),
    );
    c.sims_null = 500;
    c.sims_alt = 500;
    c.calibration_draws = 100_000;
    let rate = detection_rate(&c, 200).unwrap();
    assert!(rate < 0.05, "{rate}");
}
