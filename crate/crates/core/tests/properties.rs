use gkss::config::ModelConfig;
use gkss::ergm::ErgmModel;
use gkss::gof::{empirical_quantile, monte_carlo_p_value, weighted_v_statistic};
use gkss::graph::{
    change_statistic, count_statistic, pair_index, pair_of, parse_edge_list, summary_distribution,
    write_edge_list, Graph, Scaling, StatKind, StatisticSpec, SummaryKind,
};
use gkss::kernels::{gram, kernel_eval, KernelSpec};
use gkss::rng;
use gkss::stein::{gkss_full, SteinKernelCache, SteinMode};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn graph(n: usize, p: f64, seed: u64) -> Graph {
    Graph::erdos_renyi(n, p, &mut rng::stream(seed, 0))
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n, 0.0..=1.0f64, any::<u64>()).prop_map(|(n, p, seed)| graph(n, p, seed))
}

fn permutation(n: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::stream(seed, 1));
    perm
}

fn specs() -> Vec<StatisticSpec> {
    let mut out = Vec::new();
    for kind in [StatKind::Edges, StatKind::TwoStar, StatKind::Triangle, StatKind::KStar(3)] {
        out.push(StatisticSpec::new(kind.clone(), Scaling::RawCount));
        out.push(StatisticSpec::new(kind, Scaling::InjectionScaled));
    }
    out.push(StatisticSpec::raw(StatKind::AltKStar(0.5)));
    out
}

fn kernels() -> Vec<KernelSpec> {
    ["wl:3", "sp", "grw:0.01", "kstep:1,0.5", "gaussadj:1", "edgecount"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pair_index_is_a_bijection(n in 2usize..=64, a in any::<usize>(), b in any::<usize>()) {
        let (i, j) = (a % n, b % n);
        prop_assume!(i != j);
        let (i, j) = (i.min(j), i.max(j));
        let s = pair_index(i, j, n).unwrap();
        prop_assert!(s < n * (n - 1) / 2);
        prop_assert_eq!(pair_of(s, n).unwrap(), (i, j));
    }

    #[test]
    fn change_statistic_ignores_the_toggled_pair(g in arb_graph(9), s in any::<usize>()) {
        prop_assume!(g.n() >= 4);
        let s = s % g.num_pairs();
        for spec in specs() {
            let with = g.with_edge(s, true).unwrap();
            let without = g.with_edge(s, false).unwrap();
            let a = change_statistic(&with, s, &spec).unwrap();
            let b = change_statistic(&without, s, &spec).unwrap();
            prop_assert_eq!(a, b);
            let diff = count_statistic(&with, &spec).unwrap() - count_statistic(&without, &spec).unwrap();
            prop_assert!(close(a, diff, 1e-12), "{:?}: {} vs {}", spec.kind, a, diff);
        }
    }

    #[test]
    fn statistics_are_exchangeable(g in arb_graph(9), seed in any::<u64>()) {
        prop_assume!(g.n() >= 4);
        let h = g.permuted(&permutation(g.n(), seed)).unwrap();
        for spec in specs() {
            prop_assert!(close(count_statistic(&g, &spec).unwrap(), count_statistic(&h, &spec).unwrap(), 1e-12));
        }
    }

    #[test]
    fn summary_totals(g in arb_graph(12)) {
        let n = g.n() as u64;
        prop_assert_eq!(summary_distribution(&g, SummaryKind::Degree).total(), n);
        prop_assert_eq!(summary_distribution(&g, SummaryKind::TriadCensus).total(), n * (n - 1) * (n.saturating_sub(2)) / 6);
        prop_assert_eq!(summary_distribution(&g, SummaryKind::GeodesicDistance).total(), n * (n - 1) / 2);
    }

    #[test]
    fn conditional_probability_depends_on_the_rest_only(
        g in arb_graph(10),
        s in any::<usize>(),
        beta in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let model = ErgmModel::e2st(g.n(), beta).unwrap();
        let s = s % g.num_pairs();
        let p1 = model.conditional_edge_prob(&g.with_edge(s, true).unwrap(), s).unwrap();
        let p0 = model.conditional_edge_prob(&g.with_edge(s, false).unwrap(), s).unwrap();
        prop_assert_eq!(p0, p1);
        prop_assert!((0.0..=1.0).contains(&p0));
    }

    #[test]
    fn kernels_are_relabelling_invariant(a in arb_graph(8), seed in any::<u64>(), p in 0.0..1.0f64) {
        let b = graph(a.n(), p, seed);
        let perm = permutation(a.n(), seed);
        let (pa, pb) = (a.permuted(&perm).unwrap(), b.permuted(&perm).unwrap());
        for spec in kernels() {
            let k = kernel_eval(&spec, &a, &b).unwrap();
            prop_assert!(close(k, kernel_eval(&spec, &pa, &pb).unwrap(), 1e-9), "{}", spec);
            // relabelling only one argument also leaves these kernels unchanged
            prop_assert!(close(k, kernel_eval(&spec, &pa, &b).unwrap(), 1e-9) || spec.to_string() == "gaussadj:1");
        }
    }

    #[test]
    fn normalised_kernels_are_bounded(a in arb_graph(8), b in arb_graph(8)) {
        for spec in kernels().into_iter().chain(["veg:1".parse().unwrap()]) {
            let spec = spec.normalized();
            if spec.to_string().starts_with("gaussadj") && a.n() != b.n() {
                continue;
            }
            let k = kernel_eval(&spec, &a, &b).unwrap();
            prop_assert!(k.abs() <= 1.0 + 1e-12, "{}: {}", spec, k);
            let self_k = kernel_eval(&spec, &a, &a).unwrap();
            prop_assert!(self_k == 0.0 || (self_k - 1.0).abs() < 1e-12, "{}: {}", spec, self_k);
        }
    }

    #[test]
    fn gram_follows_batch_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let graphs: Vec<Graph> = (0..6).map(|i| graph(7, 0.4, seed.wrapping_add(i))).collect();
        let perm = permutation(graphs.len(), shuffle);
        let shuffled: Vec<Graph> = perm.iter().map(|&i| graphs[i].clone()).collect();
        for spec in [KernelSpec::wl(4), "sp:norm".parse().unwrap()] {
            let k = gram(&spec, &graphs).unwrap();
            let ks = gram(&spec, &shuffled).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    prop_assert_eq!(ks[(i, j)], k[(perm[i], perm[j])]);
                }
            }
        }
    }

    #[test]
    fn stein_kernel_is_symmetric_and_statistic_nonnegative(
        g in arb_graph(7),
        beta in prop::array::uniform3(-1.5..1.0f64),
        s in any::<usize>(),
        t in any::<usize>(),
    ) {
        let model = ErgmModel::e2st(g.n(), beta).unwrap();
        let (s, t) = (s % g.num_pairs(), t % g.num_pairs());
        for spec in kernels() {
            for mode in [SteinMode::Direct, SteinMode::Composite] {
                let cache = SteinKernelCache::new(&model, &g, &spec, mode, &[s, t]).unwrap();
                prop_assert_eq!(cache.stein_h(s, t).unwrap(), cache.stein_h(t, s).unwrap());
            }
            prop_assert!(gkss_full(&model, &g, &spec).unwrap().value >= 0.0);
        }
    }

    #[test]
    fn monte_carlo_decisions_are_consistent(
        null in prop::collection::vec(-10.0..10.0f64, 1..60),
        stat in -12.0..12.0f64,
        alpha in 0.001..0.999f64,
    ) {
        let threshold = empirical_quantile(&null, alpha);
        prop_assert!(null.contains(&threshold));
        let p = monte_carlo_p_value(stat, &null);
        prop_assert!(p > 0.0 && p <= 1.0);
        // at least a (1 - α) share of the null lies at or below the threshold
        let below = null.iter().filter(|&&v| v <= threshold).count() as f64;
        prop_assert!(below >= (1.0 - alpha) * null.len() as f64 - 1e-9);
        if stat > threshold {
            prop_assert!(null.iter().filter(|&&v| v >= stat).count() as f64 <= alpha * null.len() as f64 + 1e-9);
        }
    }

    #[test]
    fn wild_bootstrap_is_sign_symmetric(
        entries in prop::collection::vec(-5.0..5.0f64, 16),
        signs in prop::collection::vec(any::<bool>(), 4),
    ) {
        let a = DMatrix::from_row_slice(4, 4, &entries);
        let h = &a * a.transpose();
        let w: Vec<f64> = signs.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
        let flipped: Vec<f64> = w.iter().map(|x| -x).collect();
        prop_assert!(close(weighted_v_statistic(&h, &w), weighted_v_statistic(&h, &flipped), 1e-12));
        prop_assert!(close(weighted_v_statistic(&h, &[1.0; 4]), h.sum() / 16.0, 1e-12));
        prop_assert!(weighted_v_statistic(&h, &w) >= -1e-9);
    }

    #[test]
    fn edge_lists_round_trip(g in arb_graph(30)) {
        let mut text = Vec::new();
        write_edge_list(&g, &mut text).unwrap();
        let back = parse_edge_list(text.as_slice()).unwrap();
        prop_assert_eq!(&back, &g);
        let mut again = Vec::new();
        write_edge_list(&back, &mut again).unwrap();
        prop_assert_eq!(again, text);
    }

    #[test]
    fn model_configs_round_trip(
        n in 4usize..40,
        beta in prop::collection::vec(-3.0..3.0f64, 1..4),
        extra in subsequence(vec!["2star", "triangle", "kstar:3"], 0..3),
        injection in any::<bool>(),
    ) {
        let stats: Vec<&str> = std::iter::once("edges").chain(extra).collect();
        let config = ModelConfig {
            n,
            beta: beta.into_iter().take(stats.len()).collect(),
            stats: stats.iter().map(|s| s.to_string()).collect(),
            scaling: if injection { Scaling::InjectionScaled } else { Scaling::RawCount },
        };
        let back = ModelConfig::from_toml(&config.to_toml()).unwrap();
        prop_assert_eq!(&back, &config);
        if config.beta.len() == config.stats.len() {
            prop_assert!(config.build(None).is_ok());
        }
    }
}
