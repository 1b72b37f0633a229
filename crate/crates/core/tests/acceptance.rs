//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line and enforcing its runtime budget.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use common::*;
use mci_core::{
    ablation, bivariate, check_valuation, mci_branch_and_bound, mci_exact, mci_k_bounded,
    mci_sampled, mci_stability_check, mkd, ndcg_at_k, rank, robustness_harness, sample_size,
    shapley_exact, shapley_sampled, CheckOptions, MethodSpec, PacParameters, PermutationPlan,
    Ranking, ValuationTable,
};
use rand::Rng;

fn finish(criterion: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    println!("[acceptance] {criterion}: PASS in {elapsed:.2?} (budget {budget:?})");
    assert!(elapsed <= budget, "{criterion} exceeded budget: {elapsed:?} > {budget:?}");
}

#[test]
fn criterion_1_shapley_matches_the_published_example() {
    let started = Instant::now();
    let v = andor_mi_valuation();
    let scores = shapley_exact(&v).unwrap().scores;
    let expected = [0.65, 0.15, 0.15];
    for f in 0..3 {
        assert!(
            (scores[f] - expected[f]).abs() <= 0.01,
            "feature {f}: {} vs {}",
            scores[f],
            expected[f]
        );
    }
    finish("criterion 1 (Shapley on the AND/OR game)", started, Duration::from_secs(1));
}

#[test]
fn criterion_2_duplication_shifts_shapley_but_not_mci() {
    let started = Instant::now();

    // Disambiguate the copy count with the independent permutation-average
    // oracle: collapse-extended tables with 2 and 3 extra copies of f1.
    let collapsed_table = |extra: usize| {
        let n = 3 + extra;
        ValuationTable::from_fn(n, |s| {
            let mut base = 0u64;
            for i in s.iter() {
                base |= if i == 0 || i >= 3 { 1 } else { 1 << i };
            }
            andor_closed_form(feature_set(3, base))
        })
        .unwrap()
    };
    let matches_paper = |scores: &[f64], n: usize| {
        let copy_ok = (0..n).filter(|&f| f == 0 || f >= 3).all(|f| (scores[f] - 0.15).abs() <= 0.01);
        copy_ok && (scores[1] - 0.18).abs() <= 0.01 && (scores[2] - 0.18).abs() <= 0.01
    };
    let two_extra = brute_force_shapley(&collapsed_table(2));
    let three_extra = brute_force_shapley(&collapsed_table(3));
    assert!(
        !matches_paper(&two_extra, 5),
        "three copies total should not reproduce the published figures: {two_extra:?}"
    );
    assert!(
        matches_paper(&three_extra, 6),
        "four copies total should reproduce the published figures: {three_extra:?}"
    );

    // The toolkit path: duplicate f1 three times on the MI valuation.
    let v = andor_mi_valuation();
    let base_mci = mci_exact(&v).unwrap().scores;
    let dup = v.duplicate_feature(0, 3).unwrap();
    let shapley = shapley_exact(&dup).unwrap().scores;
    assert!(matches_paper(&shapley, 6), "duplicated-game Shapley: {shapley:?}");

    let dup_mci = mci_exact(&dup).unwrap().scores;
    for f in 0..3 {
        assert!(
            (dup_mci[f] - base_mci[f]).abs() <= 1e-9,
            "MCI must be invariant for feature {f}: {} vs {}",
            dup_mci[f],
            base_mci[f]
        );
    }
    for copy in 3..6 {
        assert!((dup_mci[copy] - base_mci[0]).abs() <= 1e-9);
    }
    finish("criterion 2 (duplication example)", started, Duration::from_secs(5));
}

#[test]
fn criterion_3_exact_mci_equals_brute_force_on_500_tables() {
    let started = Instant::now();
    let mut r = rng(0xC3);
    for trial in 0..500 {
        let n = 3 + trial % 8; // n in 3..=10
        let table = random_table(n, &mut r);
        let scores = mci_exact(&to_valuation(&table)).unwrap();
        assert_eq!(scores.scores, brute_force_mci(&table), "trial {trial}, n = {n}");
    }
    finish("criterion 3 (Theorem-1 oracle equivalence, 500 tables)", started, Duration::from_secs(60));
}

#[test]
fn criterion_4_axiom_and_property_suite() {
    let started = Instant::now();
    const TOL: f64 = 1e-9;
    let mut r = rng(0xC4);
    for trial in 0..200usize {
        let n = 3 + trial % 6; // n in 3..=8
        let table = random_monotone_table(n, &mut r);
        let v = to_valuation(&table);
        let mci = mci_exact(&v).unwrap().scores;
        let shapley = shapley_exact(&v).unwrap().scores;
        let abl = ablation(&v).unwrap().scores;
        let biv = bivariate(&v).unwrap().scores;

        // marginal contribution, self-contribution, dominance
        for f in 0..n {
            assert!(mci[f] >= abl[f] - TOL, "marginal contribution, trial {trial}");
            assert!(mci[f] >= biv[f] - TOL, "self contribution, trial {trial}");
            assert!(mci[f] >= shapley[f] - TOL, "Shapley dominance, trial {trial}");
        }

        // elimination: every removal set can only lower every survivor
        for removed_mask in 0..1u64 << n {
            let removed = feature_set(n, removed_mask);
            let (reduced, mapping) = v.eliminate(removed);
            let reduced_scores = mci_exact(&reduced).unwrap().scores;
            for f in 0..n {
                if let Some(new_id) = mapping[f] {
                    assert!(
                        reduced_scores[new_id] <= mci[f] + TOL,
                        "elimination axiom, trial {trial}, T = {}",
                        removed.key()
                    );
                }
            }
        }

        // super-efficiency over every subset
        for mask in 0..1u64 << n {
            let s = feature_set(n, mask);
            let sum: f64 = s.iter().map(|f| mci[f]).sum();
            assert!(table.get(s).unwrap() <= sum + TOL, "super-efficiency, trial {trial}");
        }

        // dummy: an appended inert feature scores exactly zero
        let extended = {
            let mut t = ValuationTable::new(n + 1).unwrap();
            for mask in 1..1u64 << (n + 1) {
                let below = mask & ((1 << n) - 1);
                let value = if below == 0 { 0.0 } else { table.get(feature_set(n, below)).unwrap() };
                t.insert(feature_set(n + 1, mask), value).unwrap();
            }
            t
        };
        assert_eq!(mci_exact(&to_valuation(&extended)).unwrap().scores[n], 0.0, "dummy, trial {trial}");

        // symmetry: symmetrized features 0 and 1 tie
        let symmetric = {
            let swap = |mask: u64| (mask & !3) | (mask & 1) << 1 | (mask >> 1 & 1);
            let mut t = ValuationTable::new(n).unwrap();
            for mask in 1..1u64 << n {
                let a = table.get(feature_set(n, mask)).unwrap();
                let b = table.get(feature_set(n, swap(mask))).unwrap();
                t.insert(feature_set(n, mask), a.max(b)).unwrap();
            }
            t
        };
        let sym_scores = mci_exact(&to_valuation(&symmetric)).unwrap().scores;
        assert!((sym_scores[0] - sym_scores[1]).abs() <= TOL, "symmetry, trial {trial}");

        // sub-additivity against a fresh table on the same features
        let other = random_monotone_table(n, &mut r);
        let sum_table = {
            let mut t = ValuationTable::new(n).unwrap();
            for mask in 1..1u64 << n {
                let s = feature_set(n, mask);
                t.insert(s, table.get(s).unwrap() + other.get(s).unwrap()).unwrap();
            }
            t
        };
        let other_scores = mci_exact(&to_valuation(&other)).unwrap().scores;
        let sum_scores = mci_exact(&to_valuation(&sum_table)).unwrap().scores;
        for f in 0..n {
            assert!(sum_scores[f] <= mci[f] + other_scores[f] + TOL, "sub-additivity, trial {trial}");
        }

        // scaling by a positive factor
        let lambda = r.random_range(0.25..4.0);
        let scaled = {
            let mut t = ValuationTable::new(n).unwrap();
            for mask in 1..1u64 << n {
                let s = feature_set(n, mask);
                t.insert(s, lambda * table.get(s).unwrap()).unwrap();
            }
            t
        };
        let scaled_scores = mci_exact(&to_valuation(&scaled)).unwrap().scores;
        for f in 0..n {
            assert!((scaled_scores[f] - lambda * mci[f]).abs() <= TOL, "scaling, trial {trial}");
        }

        // monotonicity: bump feature 1 above feature 0 everywhere
        let bumped = {
            let mut t = ValuationTable::new(n).unwrap();
            for mask in 1..1u64 << n {
                let s = feature_set(n, mask);
                let bump = if s.contains(1) { 2.0 } else { 0.0 };
                t.insert(s, table.get(s).unwrap() + bump).unwrap();
            }
            t
        };
        let bumped_scores = mci_exact(&to_valuation(&bumped)).unwrap().scores;
        assert!(bumped_scores[0] <= bumped_scores[1] + TOL, "monotonicity, trial {trial}");

        // duplication invariance
        let source = trial % n;
        let dup = v.duplicate_feature(source, 2).unwrap();
        let dup_scores = mci_exact(&dup).unwrap().scores;
        for f in 0..n {
            assert!((dup_scores[f] - mci[f]).abs() <= 1e-12, "duplication, trial {trial}");
        }
        for copy in n..n + 2 {
            assert!((dup_scores[copy] - mci[source]).abs() <= 1e-12, "duplication, trial {trial}");
        }
    }
    finish("criterion 4 (axiom & property suite, 200 tables)", started, Duration::from_secs(120));
}

#[test]
fn criterion_5_branch_and_bound_and_k_bounded_contracts() {
    let started = Instant::now();
    let mut r = rng(0xC5);

    // intervals bracket the exact value; tolerance 0 converges to it
    for trial in 0..200usize {
        let n = 3 + trial % 10; // n in 3..=12
        let table = random_monotone_table(n, &mut r);
        let v = to_valuation(&table);
        let exact = brute_force_mci(&table);

        let loose = mci_branch_and_bound(&v, 0.1).unwrap();
        let intervals = loose.intervals.as_ref().unwrap();
        for f in 0..n {
            let (lo, hi) = intervals[f];
            assert!(lo <= exact[f] + 1e-12 && exact[f] <= hi + 1e-12, "bracket, trial {trial}");
        }

        let tight = mci_branch_and_bound(&v, 0.0).unwrap();
        assert_eq!(tight.scores, exact, "tolerance-0 convergence, trial {trial}");
        assert!(tight.valuation_calls <= 1 << n);
    }

    // rejection-sampled submodular tables: k = 0 already finds the optimum
    let mut accepted = 0;
    let mut attempts = 0;
    while accepted < 50 {
        attempts += 1;
        assert!(attempts < 100_000, "rejection sampling stalled");
        let n = 3 + accepted % 3; // n in 3..=5
        let candidate = random_noisy_coverage_table(n, &mut r);
        let v = to_valuation(&candidate);
        let report = check_valuation(&v, CheckOptions::default()).unwrap();
        if !(report.submodular && report.monotone) {
            continue;
        }
        accepted += 1;
        let exact = mci_exact(&v).unwrap().scores;
        let k0 = mci_k_bounded(&v, 0).unwrap();
        for f in 0..n {
            assert!((k0.scores[f] - exact[f]).abs() <= 1e-12, "k=0 on submodular table");
        }
    }
    finish("criterion 5 (bounds & k-bounded search, 200+50 tables)", started, Duration::from_secs(120));
}

/// Coverage plus a strictly concave cardinality term plus independent
/// per-subset noise. The noise amplitude is sized so a material fraction of
/// draws violates submodularity or monotonicity; the caller verifies and
/// rejects those.
fn random_noisy_coverage_table(n: usize, r: &mut rand::rngs::StdRng) -> ValuationTable {
    let amplitude = match n {
        3 => 0.2,
        4 => 0.05,
        _ => 0.02,
    };
    let base = random_coverage_table(n, r);
    let mut table = ValuationTable::new(n).unwrap();
    for mask in 1..1u64 << n {
        let s = feature_set(n, mask);
        let concave = 0.5 * (s.len() as f64).sqrt();
        table
            .insert(s, base.get(s).unwrap() + concave + r.random_range(0.0..amplitude))
            .unwrap();
    }
    table
}

#[test]
fn criterion_6_sampling_contracts_and_worker_determinism() {
    let started = Instant::now();
    let mut r = rng(0xC6);

    // sampled MCI is a pointwise lower bound, 500 trials
    for trial in 0..500usize {
        let n = 2 + trial % 7; // n in 2..=8
        let table = random_table(n, &mut r);
        let v = to_valuation(&table);
        let exact = mci_exact(&v).unwrap().scores;
        let plan = PermutationPlan::seeded(trial as u64, 8 + trial % 57, n);
        let sampled = mci_sampled(&v, &plan).unwrap();
        for f in 0..n {
            assert!(sampled.scores[f] <= exact[f], "lower bound, trial {trial}");
        }
    }

    // exhaustive-plan sampled Shapley equals the exact subset form
    for n in 1..=6usize {
        let table = random_table(n, &mut r);
        let v = to_valuation(&table);
        let exact = shapley_exact(&v).unwrap().scores;
        let all = shapley_sampled(&v, &PermutationPlan::exhaustive(n).unwrap()).unwrap();
        for f in 0..n {
            assert!((all.scores[f] - exact[f]).abs() <= 1e-9, "exhaustive plan, n = {n}");
        }
    }

    // byte-identical sampled output across worker counts 1, 2, 8
    let table = random_monotone_table(8, &mut r);
    let mut mci_outputs = Vec::new();
    let mut shapley_outputs = Vec::new();
    for workers in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        let (mci_json, shapley_json) = pool.install(|| {
            let plan = PermutationPlan::seeded(1234, 2048, 8);
            let a = mci_sampled(&to_valuation(&table), &plan).unwrap().to_json_string();
            let b = shapley_sampled(&to_valuation(&table), &plan).unwrap().to_json_string();
            (a, b)
        });
        mci_outputs.push(mci_json);
        shapley_outputs.push(shapley_json);
    }
    assert!(mci_outputs.iter().all(|o| o == &mci_outputs[0]), "mci-sampled varies with workers");
    assert!(
        shapley_outputs.iter().all(|o| o == &shapley_outputs[0]),
        "shapley-sampled varies with workers"
    );
    finish("criterion 6 (sampling contracts & determinism)", started, Duration::from_secs(60));
}

#[test]
fn criterion_7_pac_chain_and_sample_size() {
    let started = Instant::now();
    let mut r = rng(0xC7);
    for trial in 0..1000usize {
        let n = 3 + trial % 6; // n in 3..=8
        let truth = random_table(n, &mut r);
        let eta = r.random_range(0.001..0.3);
        let mut estimated = ValuationTable::new(n).unwrap();
        for mask in 1..1u64 << n {
            let s = feature_set(n, mask);
            let noisy = (truth.get(s).unwrap() + r.random_range(-eta..eta)).max(0.0);
            estimated.insert(s, noisy).unwrap();
        }
        let report =
            mci_stability_check(&to_valuation(&estimated), &to_valuation(&truth)).unwrap();
        assert!(
            report.holds,
            "stability violated at trial {trial}: gap {} > bound {}",
            report.max_score_gap, report.bound
        );
    }
    let m = sample_size(&PacParameters {
        epsilon: 0.1,
        delta: 0.05,
        hypothesis_count: 1000,
        feature_count: 10,
    })
    .unwrap();
    assert_eq!(m, 5058);
    finish("criterion 7 (PAC chain, 1000 pairs)", started, Duration::from_secs(30));
}

#[test]
fn criterion_8_metrics_against_brute_force_and_the_robustness_protocol() {
    let started = Instant::now();

    // MKD equals completion-enumeration brute force on all prefix pairs
    for universe_size in 1..=6usize {
        let universe: Vec<usize> = (0..universe_size).collect();
        for k in 0..=3.min(universe_size) {
            let prefixes = ordered_prefixes(&universe, k);
            for a in &prefixes {
                for b in &prefixes {
                    assert_eq!(
                        mkd(a, b, &universe).unwrap(),
                        brute_force_mkd(a, b, &universe),
                        "universe {universe_size}, prefixes {a:?} / {b:?}"
                    );
                }
            }
        }
    }

    // NDCG boundary cases
    let ranking = Ranking { order: vec![0, 1, 2, 3] };
    let top: HashSet<usize> = [0, 1].into_iter().collect();
    assert_eq!(ndcg_at_k(&ranking, &top, 2).unwrap(), 1.0);
    let bottom: HashSet<usize> = [2, 3].into_iter().collect();
    assert_eq!(ndcg_at_k(&ranking, &bottom, 2).unwrap(), 0.0);

    // robustness: MCI and bivariate are unmoved, Shapley loses its top pick
    let mut r = rng(0xC8);
    for trial in 0..10usize {
        let n = 4 + trial % 5; // n in 4..=8
        let table = random_monotone_table(n, &mut r);
        let v = to_valuation(&table);
        let ks: Vec<usize> = (1..=n).collect();
        for spec in [MethodSpec::MciExact, MethodSpec::Bivariate] {
            let report = robustness_harness(&v, &spec, 3, &ks).unwrap();
            assert!(
                report.mkd_at_k.values().all(|&d| d == 0),
                "{:?} must be duplication-invariant",
                spec.method()
            );
        }
    }
    let andor = andor_mi_valuation();
    let report = robustness_harness(&andor, &MethodSpec::ShapleyExact, 3, &[1]).unwrap();
    assert!(report.mkd_at_k[&1] > 0, "Shapley must change its top feature on the AND/OR game");

    // sanity: the harness agrees with ranking the scores directly
    let before = rank(&shapley_exact(&andor).unwrap(), None);
    assert_eq!(report.ranking_before, before);
    assert_eq!(before.order[0], 0);

    finish("criterion 8 (metrics & robustness protocol)", started, Duration::from_secs(60));
}

/// All ordered k-prefixes over the universe.
fn ordered_prefixes(universe: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for shorter in ordered_prefixes(universe, k - 1) {
        for &next in universe {
            if !shorter.contains(&next) {
                let mut longer = shorter.clone();
                longer.push(next);
                out.push(longer);
            }
        }
    }
    out
}
