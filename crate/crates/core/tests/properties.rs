use std::time::Duration;

use proptest::prelude::*;

use approvalmap::committees::{
    cohesiveness_level, greedy_pav, max_approval_score, pav_committee, pav_score,
    voters_in_1cohesive_fraction,
};
use approvalmap::correlation::spearman;
use approvalmap::cultures::{CultureSpec, EuclideanDim, VoteDistance};
use approvalmap::embedding::{embed, embedded_distance, EmbeddingConfig};
use approvalmap::experiments::{
    build_background, build_correlation_dataset, correlate, CorrelationScale,
};
use approvalmap::metrics::{pairwise_distances, Metric};
use approvalmap::{Election, RngSeed};

fn arb_spec() -> impl Strategy<Value = CultureSpec> {
    let unit = 0.0..=1.0f64;
    prop_oneof![
        (unit.clone(), unit.clone()).prop_map(|(p, phi)| CultureSpec::Resampling { p, phi }),
        (unit.clone(), unit.clone(), 1..=3usize).prop_map(|(p, phi, g)| CultureSpec::Disjoint {
            p,
            phi,
            g
        }),
        (unit.clone(), unit.clone(), any::<bool>()).prop_map(|(p, phi, j)| CultureSpec::Noise {
            p,
            phi,
            vote_distance: if j {
                VoteDistance::Jaccard
            } else {
                VoteDistance::Hamming
            },
        }),
        (0.0..=1.5f64, any::<bool>()).prop_map(|(radius, two)| CultureSpec::Euclidean {
            radius,
            dim: if two {
                EuclideanDim::Two
            } else {
                EuclideanDim::One
            },
        }),
        (unit.clone(), 0.0..=3.0f64).prop_map(|(p, alpha)| CultureSpec::Urn { p, alpha }),
        unit.clone().prop_map(|p| CultureSpec::Ic { p }),
        unit.prop_map(|p| CultureSpec::Id { p }),
        Just(CultureSpec::Empty),
        Just(CultureSpec::Full),
    ]
}

fn arb_election(max_m: usize, max_n: usize) -> impl Strategy<Value = Election> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), m), n).prop_map(
            move |rows| {
                let votes = rows
                    .iter()
                    .map(|r| (0..m).filter(|&c| r[c]).collect())
                    .collect();
                Election::new(m, votes).unwrap()
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samplers_are_valid_and_replayable(spec in arb_spec(), m in 3..=9usize, n in 1..=15usize, seed in any::<u64>()) {
        let e = spec.sample(m, n, RngSeed(seed)).unwrap();
        prop_assert_eq!(e.m(), m);
        prop_assert_eq!(e.n(), n);
        prop_assert!(e.votes().iter().all(|b| b.approved().iter().all(|&c| c < m)));
        prop_assert_eq!(spec.sample(m, n, RngSeed(seed)).unwrap().to_text(), e.to_text());
    }

    #[test]
    fn pav_is_never_worse_than_greedy(e in arb_election(8, 10), k in 1..=4usize) {
        prop_assume!(k <= e.m());
        let out = pav_committee(&e, k, Duration::from_secs(30)).unwrap();
        let greedy = greedy_pav(&e, k).unwrap();
        prop_assert!(out.score >= pav_score(&e, &greedy));
        prop_assert_eq!(out.committee.len(), k);
        prop_assert!(out.committee.members().iter().all(|&c| c < e.m()));
    }

    #[test]
    fn silencing_voters_never_raises_cohesiveness(e in arb_election(7, 9), k in 1..=4usize, keep in any::<u16>()) {
        prop_assume!(k <= e.m());
        // Voters outside the kept subset cast empty ballots, so n is unchanged.
        let kept: Vec<Vec<usize>> = e
            .votes()
            .iter()
            .enumerate()
            .map(|(v, b)| if keep >> (v % 16) & 1 == 1 { b.approved().to_vec() } else { Vec::new() })
            .collect();
        let sub = Election::new(e.m(), kept).unwrap();
        prop_assert!(cohesiveness_level(&sub, k).unwrap().level <= cohesiveness_level(&e, k).unwrap().level);
    }

    #[test]
    fn top_candidate_approvers_are_covered(e in arb_election(7, 12), k in 1..=4usize) {
        prop_assume!(k <= e.m());
        let top = max_approval_score(&e);
        let fraction = voters_in_1cohesive_fraction(&e, k).unwrap();
        if top * k as f64 >= 1.0 {
            prop_assert!(fraction >= top - 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&fraction));
    }

    #[test]
    fn statistics_ignore_voter_order(e in arb_election(6, 8), k in 1..=3usize, seed in any::<u64>()) {
        prop_assume!(k <= e.m());
        let mut order: Vec<usize> = (0..e.n()).collect();
        let mut rng = RngSeed(seed).rng();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let ident: Vec<usize> = (0..e.m()).collect();
        let f = e.relabel(&ident, &order).unwrap();
        prop_assert_eq!(cohesiveness_level(&e, k).unwrap().level, cohesiveness_level(&f, k).unwrap().level);
        prop_assert_eq!(voters_in_1cohesive_fraction(&e, k).unwrap(), voters_in_1cohesive_fraction(&f, k).unwrap());
        prop_assert_eq!(
            pav_committee(&e, k, Duration::from_secs(30)).unwrap().score,
            pav_committee(&f, k, Duration::from_secs(30)).unwrap().score
        );
    }

    #[test]
    fn distance_matrices_are_symmetric(seeds in proptest::collection::vec(any::<u64>(), 2..6)) {
        let elections: Vec<Election> = seeds
            .iter()
            .map(|&s| CultureSpec::Ic { p: 0.4 }.sample(4, 5, RngSeed(s)).unwrap())
            .collect();
        let labels: Vec<String> = (0..elections.len()).map(|i| format!("e{i}")).collect();
        for metric in [Metric::Approvalwise, Metric::IsomorphicHamming] {
            let dm = pairwise_distances(&labels, &elections, metric).unwrap();
            prop_assert_eq!(dm.len(), labels.len());
            for i in 0..dm.len() {
                prop_assert_eq!(dm.get(i, i), 0.0);
                for j in 0..dm.len() {
                    prop_assert_eq!(dm.get(i, j), dm.get(j, i));
                }
            }
        }
    }
}

#[test]
fn resampling_marginals_match_closed_form() {
    // One candidate, 10^5 voters: the approval count is binomial.
    let n = 100_000;
    for (p, phi) in [(1.0, 0.3), (0.0, 0.3), (1.0, 0.8), (0.0, 0.8)] {
        let e = CultureSpec::Resampling { p, phi }
            .sample(1, n, RngSeed(21))
            .unwrap();
        let want = if p == 1.0 {
            (1.0 - phi) + phi * p
        } else {
            phi * p
        };
        let got = e.approval_score(0).unwrap() as f64;
        let mean = want * n as f64;
        let var = mean * (1.0 - want);
        if var == 0.0 {
            assert_eq!(got, mean);
        } else {
            // χ² with one degree of freedom, 99.9% quantile.
            let chi2 = (got - mean).powi(2) / var;
            assert!(chi2 < 10.83, "p={p}, phi={phi}: chi2 {chi2}");
        }
    }
    // Interior p: m=10, p=0.3 gives three central candidates.
    let (p, phi) = (0.3, 0.4);
    let e = CultureSpec::Resampling { p, phi }
        .sample(10, n, RngSeed(22))
        .unwrap();
    let scores = e.approval_scores();
    let mut high: Vec<f64> = scores.iter().map(|&s| s as f64 / n as f64).collect();
    high.sort_by(|a, b| b.total_cmp(a));
    for (i, &f) in high.iter().enumerate() {
        let want = if i < 3 {
            (1.0 - phi) + phi * p
        } else {
            phi * p
        };
        let sigma = (want * (1.0 - want) / n as f64).sqrt();
        assert!(
            (f - want).abs() < 5.0 * sigma,
            "candidate {i}: {f} vs {want}"
        );
    }
}

#[test]
fn correlation_pairs_cover_every_unordered_pair() {
    let manifest = build_correlation_dataset(
        CorrelationScale::Desk {
            m: 4,
            n: 6,
            elections: 15,
        },
        RngSeed(2),
    )
    .unwrap();
    let elections: Vec<Election> = manifest
        .generate_all()
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let report = correlate(&manifest.labels(), &elections).unwrap();
    assert_eq!(report.pairs.len(), 15 * 14 / 2);
    let again = build_correlation_dataset(
        CorrelationScale::Desk {
            m: 4,
            n: 6,
            elections: 15,
        },
        RngSeed(2),
    )
    .unwrap();
    assert_eq!(again, manifest);
}

#[test]
fn embedded_p_lines_follow_analytic_distances() {
    let (m, n) = (50, 200);
    let bg = build_background(m, n, RngSeed(8)).unwrap();
    let elections: Vec<Election> = bg.generate_all().into_iter().map(Result::unwrap).collect();
    let labels = bg.labels();
    let dm = pairwise_distances(&labels, &elections, Metric::Approvalwise).unwrap();
    let points = embed(&dm, &EmbeddingConfig::default(), RngSeed(8)).unwrap();
    for i in 1..10 {
        let p = i as f64 / 10.0;
        let mut line: Vec<(usize, f64)> = bg
            .entries
            .iter()
            .enumerate()
            .filter_map(|(idx, e)| {
                let (q, phi) = e.resampling_parameters().unwrap();
                ((q - p).abs() < 1e-12).then_some((idx, phi))
            })
            .collect();
        line.sort_by(|a, b| a.1.total_cmp(&b.1));
        // Evenly spaced φ makes every consecutive analytic gap equal, so check
        // that embedded distance from the φ-smallest point grows along the chain.
        let along: Vec<f64> = line
            .iter()
            .map(|&(idx, _)| embedded_distance(&points[line[0].0], &points[idx]))
            .collect();
        let phis: Vec<f64> = line.iter().map(|&(_, phi)| phi).collect();
        let rho = spearman(&along, &phis).unwrap();
        assert!(rho >= 0.7, "p={p}: spearman {rho}");
    }
}
