use std::f64::consts::PI;

use heatsample_core::graph::{count_components, block_labels, save_graph};
use heatsample_core::*;
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..24).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
        let m = pairs.len();
        (
            Just(n),
            Just(pairs),
            proptest::collection::vec((any::<bool>(), 0.1f64..5.0), m),
        )
            .prop_map(|(n, pairs, picks)| {
                let edges = pairs
                    .into_iter()
                    .zip(picks)
                    .filter(|(_, (keep, _))| *keep)
                    .map(|((i, j), (_, w))| (i, j, w));
                Graph::new(n, edges).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn laplacian_rows_sum_to_zero_and_spectrum_is_nonnegative(g in arb_graph()) {
        let l = build_laplacian(&g);
        let m = l.as_matrix();
        for r in 0..m.nrows() {
            prop_assert!(m.row(r).sum().abs() <= 1e-12);
        }
        let basis = eigendecompose(&l, Connectivity::AllowDisconnected).unwrap();
        prop_assert!(basis.eigenvalues()[0] >= -1e-10);
    }

    #[test]
    fn zero_eigenvalue_multiplicity_counts_components(g in arb_graph()) {
        let basis = eigendecompose(&build_laplacian(&g), Connectivity::AllowDisconnected).unwrap();
        let zeros = basis.eigenvalues().iter().filter(|&&s| s < 1e-8).count();
        prop_assert_eq!(zeros, count_components(&g));
    }
}

#[test]
fn cycle_spectrum_matches_cosine_formula() {
    for n in [3usize, 4, 7, 16, 64, 101] {
        let basis = eigendecompose(&build_laplacian(&gen_cycle(n).unwrap()), Connectivity::Require).unwrap();
        let mut want: Vec<f64> = (0..n)
            .map(|j| 2.0 - 2.0 * (2.0 * PI * j as f64 / n as f64).cos())
            .collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in basis.eigenvalues().iter().zip(&want) {
            assert!((got - want).abs() <= 1e-9, "n={n}: {got} vs {want}");
        }
    }
}

#[test]
fn community_block_densities_within_three_sigma() {
    let sizes = [10usize, 30];
    let g = gen_community(&sizes, 0.8, 0.02, 7).unwrap();
    assert!(g.is_connected());
    let labels = block_labels(&sizes);
    let (mut intra, mut inter) = (0usize, 0usize);
    for e in g.edges() {
        if labels[e.i] == labels[e.j] {
            intra += 1;
        } else {
            inter += 1;
        }
    }
    let intra_pairs = (10 * 9 / 2 + 30 * 29 / 2) as f64;
    let inter_pairs = (10 * 30) as f64;
    let check = |count: usize, pairs: f64, p: f64| {
        let mean = pairs * p;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        assert!((count as f64 - mean).abs() <= 3.0 * sd, "{count} vs {mean} +- {sd}");
    };
    check(intra, intra_pairs, 0.8);
    check(inter, inter_pairs, 0.02);
}

#[test]
fn saved_graphs_load_back_identically() {
    let dir = tempfile::tempdir().unwrap();
    for g in [
        gen_cycle(8).unwrap(),
        gen_community(&[5, 9], 0.9, 0.1, 3).unwrap(),
        Graph::new(3, [(0, 1, 0.1), (1, 2, 1.0 / 3.0)]).unwrap(),
    ] {
        let path = dir.path().join("g.txt");
        save_graph(&g, &path).unwrap();
        assert_eq!(load_graph(&path).unwrap(), g);
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_graph(dir.path().join("none.txt")), Err(Error::Io { .. })));
}
