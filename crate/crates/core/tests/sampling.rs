use gof_core::sampling::{derive_stream, multinomial_draw, MultinomialSampler, Seed};
use gof_core::stats::ProbabilityVector;
use rayon::prelude::*;

/// All compositions of `n` into `m` parts.
fn outcomes(n: u64, m: usize) -> Vec<Vec<u64>> {
    if m == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|v| {
            outcomes(n - v, m - 1).into_iter().map(move |mut rest| {
                rest.insert(0, v);
                rest
            })
        })
        .collect()
}

fn multinomial_pmf(c: &[u64], p: &[f64]) -> f64 {
    let lf = |k: u64| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let n: u64 = c.iter().sum();
    let mut l = lf(n);
    for (&x, &q) in c.iter().zip(p) {
        if x > 0 {
            l += x as f64 * q.ln() - lf(x);
        }
    }
    l.exp()
}

#[test]
fn outcome_frequencies_match_the_multinomial_law() {
    let p = ProbabilityVector::new(vec![0.5, 0.3, 0.2]).unwrap();
    let sampler = MultinomialSampler::new(&p);
    let n = 4;
    let all = outcomes(n, 3);
    let draws = 200_000u64;
    let mut freq = std::collections::HashMap::new();
    for i in 0..draws {
        let c = sampler.draw(n, &mut derive_stream(Seed(77), i));
        *freq.entry(c.into_counts()).or_insert(0u64) += 1;
    }
    // Pearson χ² of the sampler against the exact pmf, 14 degrees of freedom;
    // 45 is beyond the 0.9999 quantile.
    let mut chi2 = 0.0;
    for c in &all {
        let e = multinomial_pmf(c, p.probs()) * draws as f64;
        let o = *freq.get(c).unwrap_or(&0) as f64;
        chi2 += (o - e) * (o - e) / e;
    }
    assert_eq!(all.len(), 15);
    assert!(chi2 < 45.0, "{chi2}");
}

#[test]
fn marginal_means_for_large_n() {
    let p = ProbabilityVector::from_weights((1..=50).map(|j| 1.0 / j as f64).collect()).unwrap();
    let sampler = MultinomialSampler::new(&p);
    let n = 10_000u64;
    let reps = 400u64;
    let mut sums = vec![0f64; 50];
    for i in 0..reps {
        let c = sampler.draw(n, &mut derive_stream(Seed(5), i));
        assert_eq!(c.total(), n);
        for (s, &x) in sums.iter_mut().zip(c.counts()) {
            *s += x as f64;
        }
    }
    for (j, s) in sums.iter().enumerate() {
        let pj = p.probs()[j];
        let mean = s / reps as f64;
        let sd = (n as f64 * pj * (1.0 - pj) / reps as f64).sqrt();
        assert!((mean - n as f64 * pj).abs() < 5.0 * sd, "bin {j}: {mean}");
    }
}

#[test]
fn draws_do_not_depend_on_scheduling() {
    let p = ProbabilityVector::uniform(7).unwrap();
    let seq: Vec<Vec<u64>> = (0..500)
        .map(|i| multinomial_draw(&p, 50, &mut derive_stream(Seed(1), i)).into_counts())
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let par: Vec<Vec<u64>> = pool.install(|| {
        (0..500usize)
            .into_par_iter()
            .rev()
            .map(|i| multinomial_draw(&p, 50, &mut derive_stream(Seed(1), i as u64)).into_counts())
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect()
    });
    assert_eq!(seq, par);
}

#[test]
fn child_seeds_are_distinct() {
    let s = Seed(42);
    let kids: std::collections::HashSet<u64> = (0..1000).map(|t| s.child(t).0).collect();
    assert_eq!(kids.len(), 1000);
    assert_ne!(s.child(1), Seed(43).child(1));
}
