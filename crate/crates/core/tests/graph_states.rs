mod common;

use common::*;
use mipt_core::graph::{graph_entropy, z_measure_graph, WeightedGraph};
use mipt_core::pauli::MeasurementOp;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Six-qubit example, 1-indexed labels. Qubit 2 touches 1, 3, 4 and 5.
const SIX_QUBIT: [(usize, usize); 7] = [(1, 2), (2, 3), (2, 4), (2, 5), (3, 4), (1, 4), (3, 6)];
// after Z on qubit 2
const AFTER_Z: [(usize, usize); 3] = [(1, 4), (3, 4), (3, 6)];
// after X on qubit 2 and a Hadamard on qubit 1
const AFTER_X: [(usize, usize); 5] = [(1, 4), (3, 6), (1, 3), (1, 5), (4, 5)];

fn six(edges: &[(usize, usize)]) -> WeightedGraph {
    let e: Vec<(usize, usize, u32)> = edges.iter().map(|&(a, b)| (a - 1, b - 1, 1)).collect();
    WeightedGraph::from_edges(6, md(2), &e).unwrap()
}

#[test]
fn z_measurement_drops_the_bonds() {
    let g = six(&SIX_QUBIT);
    let after = z_measure_graph(&g, 1).unwrap();
    assert_eq!(after, six(&AFTER_Z));
    let mut t = g.to_tableau();
    t.measure_site(&MeasurementOp::z(1)).unwrap();
    for r in all_regions(6) {
        assert_eq!(t.entropy_region(&r), graph_entropy(&after, &r));
    }
}

#[test]
fn x_measurement_matches_the_rewired_graph() {
    let mut t = six(&SIX_QUBIT).to_tableau();
    t.measure_site(&MeasurementOp::x(1)).unwrap();
    let target = six(&AFTER_X);
    let b = six(&AFTER_Z);
    let mut differs_from_z = false;
    for r in all_regions(6) {
        assert_eq!(t.entropy_region(&r), graph_entropy(&target, &r), "{r:?}");
        differs_from_z |= graph_entropy(&b, &r) != graph_entropy(&target, &r);
    }
    assert!(differs_from_z);
}

#[test]
fn isolated_vertex_is_untouched() {
    let g = WeightedGraph::from_edges(4, md(5), &[(0, 1, 3), (1, 2, 4)]).unwrap();
    assert_eq!(z_measure_graph(&g, 3).unwrap(), g);
    assert!(z_measure_graph(&g, 4).is_err());
}

fn random_graph(q: u32, n: usize, rng: &mut ChaCha8Rng) -> WeightedGraph {
    let mut g = WeightedGraph::empty(n, md(q));
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.5) {
                g.set_weight(i, j, rng.random_range(1..q)).unwrap();
            }
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_and_tableau_paths_agree(q in prop::sample::select(vec![2u32, 3, 5, 7]), n in 2usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(q, n, &mut rng);
        let t = g.to_tableau();
        let v = rng.random_range(0..n);
        let gz = z_measure_graph(&g, v).unwrap();
        let mut tz = t.clone();
        tz.measure_site(&MeasurementOp::z(v)).unwrap();
        for r in all_regions(n) {
            let s = graph_entropy(&g, &r);
            prop_assert_eq!(s, t.entropy_region(&r));
            prop_assert_eq!(s, graph_entropy(&g, &complement(&r, n)));
            prop_assert_eq!(graph_entropy(&gz, &r), tz.entropy_region(&r));
        }
    }
}
