use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use treelight::channels::{correlation_channel, correlator_path, otoc_channel, otoc_path};
use treelight::gate::*;
use treelight::hyperbolicity as hyp;
use treelight::linalg::{haar_unitary, regroup, Leg, ungroup, unitarity_residual};
use treelight::oracle::*;
use treelight::tree::{CayleyTree, Color, TwoColoring};
use treelight::{CMat, Gate, GateAssignment, OperatorBasis};

/// Kicked Ising gate with Haar dressing on every leg: tree-unitary for any
/// field and dressing.
fn dressed_kim(seed: u64, h: f64) -> Gate {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let us: Vec<CMat> = (0..3).map(|_| haar_unitary(2, &mut rng)).collect();
    let vs: Vec<CMat> = (0..3).map(|_| haar_unitary(2, &mut rng)).collect();
    dress(&kim_gate(&KimParams::self_dual(3, h)).unwrap(), Some(&us), Some(&vs)).unwrap()
}

fn haar_gate(seed: u64) -> Gate {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Gate::new(2, 3, haar_unitary(8, &mut rng)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dressing_preserves_tree_unitarity(seed in any::<u64>(), h in -3.0f64..3.0) {
        let g = dressed_kim(seed, h);
        prop_assert!(is_tree_unitary(&g, 1e-10).passed);
        prop_assert!(unitarity_residual(g.matrix()) < 1e-10);
    }

    #[test]
    fn channels_are_unital_and_contracting(seed in any::<u64>(), h in -3.0f64..3.0, e in 1usize..=3, d in 1usize..=2) {
        let g = dressed_kim(seed, h);
        let et = (e + d - 1) % 3 + 1;
        let c = correlation_channel(&g, e, et).unwrap();
        prop_assert!(c.unitality_residual() < 1e-10);
        prop_assert!(c.spectral_radius() <= 1.0 + 1e-10);
        let o = otoc_channel(&g, e, et).unwrap();
        prop_assert!(o.spectral_radius() <= 1.0 + 1e-9);
    }

    #[test]
    fn regroup_roundtrips(seed in any::<u64>(), split in 0usize..=6) {
        let g = haar_gate(seed);
        let mut legs: Vec<Leg> = (0..3).flat_map(|s| [Leg::Out(s), Leg::In(s)]).collect();
        legs.shuffle(&mut ChaCha20Rng::seed_from_u64(seed ^ 0x5eed));
        let (rows, cols) = legs.split_at(split);
        let m = regroup(g.matrix(), 2, 3, rows, cols);
        let back = ungroup(&m, 2, 3, rows, cols);
        prop_assert!((back - g.matrix()).norm() < 1e-12);
    }

    #[test]
    fn channel_correlators_match_dense_evolution(
        seed in any::<u64>(),
        h in -3.0f64..3.0,
        origin in 0usize..4,
        target in 0usize..22,
        first_a in any::<bool>(),
        a in 1usize..4,
        b in 1usize..4,
    ) {
        let tree = CayleyTree::new(3, 4, false).unwrap();
        let col = TwoColoring::new(&tree);
        let first = if first_a { Color::A } else { Color::B };
        prop_assume!(origin != target);
        let Ok(path) = col.path_to_channel_sequence(origin, target, first) else { return Ok(()) };
        let t = path.t();
        prop_assume!((1..=2).contains(&t));
        let assign = GateAssignment::Uniform(dressed_kim(seed, h));
        let basis = OperatorBasis::new(2).unwrap();
        let (va, vb) = (basis.unit(a), basis.unit(b));
        let c = *correlator_path(&assign, &path, &va, &vb).unwrap().values.last().unwrap();
        let ce = correlator_exact(&col, &assign, first, origin, target, t, basis.element(a), basis.element(b), DEFAULT_DENSE_CAP).unwrap();
        prop_assert!((c - ce).norm() < 1e-10, "{c} vs {ce}");
        let o = *otoc_path(&assign, &path, &va, &vb).unwrap().values.last().unwrap();
        let oe = otoc_exact(&col, &assign, first, origin, target, t, basis.element(a), basis.element(b), DEFAULT_DENSE_CAP).unwrap();
        prop_assert!((o - oe).abs() < 1e-10, "{o} vs {oe}");
        prop_assert!(o.abs() <= 1.0 + 1e-10);
    }

    #[test]
    fn tree_unitary_interior_vanishes(seed in any::<u64>(), h in -3.0f64..3.0, t in 1usize..=2, first_a in any::<bool>()) {
        let tree = CayleyTree::new(3, 5, false).unwrap();
        let col = TwoColoring::new(&tree);
        let first = if first_a { Color::A } else { Color::B };
        let assign = GateAssignment::Uniform(dressed_kim(seed, h));
        let p = cone_profile(&col, &assign, first, 0, t, &treelight::pauli::pauli_x(), 1e-8, DEFAULT_DENSE_CAP).unwrap();
        prop_assert!(p.interior_max < 1e-10);
    }

    #[test]
    fn arrival_time_within_one_of_distance(z in 3usize..=4, rooted in any::<bool>(), i in 0usize..40, j in 0usize..40, first_a in any::<bool>()) {
        let tree = CayleyTree::new(z, 3, rooted).unwrap();
        let n = tree.n_vertices();
        let (i, j) = (i % n, j % n);
        prop_assume!(i != j);
        let col = TwoColoring::new(&tree);
        let first = if first_a { Color::A } else { Color::B };
        if let Ok(t) = col.arrival_time(i, j, first) {
            let r = tree.distance(i, j);
            prop_assert!(t + 1 >= r && t <= r + 1);
        }
    }

    #[test]
    fn grid_level_sets_cover_every_distance(w in 2usize..8, h in 2usize..8, i in 0usize..64, j in 0usize..64) {
        let g = hyp::grid(&[w, h]).unwrap();
        let n = w * h;
        let (i, j) = (i % n, j % n);
        let rep = hyp::intersections(&g, i, j).unwrap();
        prop_assert!(rep.sets.iter().all(|s| !s.is_empty()));
        prop_assert_eq!(rep.sets.first().map(|s| s.len()), Some(1));
        prop_assert_eq!(rep.sets.last().map(|s| s.len()), Some(1));
    }
}

#[test]
fn trees_are_zero_hyperbolic() {
    for z in [3, 4] {
        for depth in 1..=4 {
            let t = CayleyTree::new(z, depth, true).unwrap();
            let g = hyp::tree_graph(&t);
            if g.n_vertices() >= 4 {
                assert_eq!(hyp::four_point_delta(&g, 400).unwrap().delta, 0.0, "z={z} depth={depth}");
            }
        }
    }
}

#[test]
fn generic_gates_leak_into_the_interior() {
    let tree = CayleyTree::new(3, 5, false).unwrap();
    let col = TwoColoring::new(&tree);
    let assign = GateAssignment::Uniform(haar_gate(1));
    let p = cone_profile(&col, &assign, Color::A, 0, 2, &treelight::pauli::pauli_z(), 1e-8, DEFAULT_DENSE_CAP).unwrap();
    assert!(p.interior_max > 1e-3, "{}", p.interior_max);
}
