use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use treelight::channels::{otoc_channel, otoc_path};
use treelight::gate::{is_clifford, kim_gate, CLIFFORD_FIELD};
use treelight::generation::{generate_tree_unitary, project_tc, GenerationConfig};
use treelight::hyperbolicity as hyp;
use treelight::oracle::{correlator_exact, DEFAULT_DENSE_CAP};
use treelight::pauli::{parse_qubit_operator, pauli_z};
use treelight::stabilizer::{entanglement_curve, BoundaryShift, TreeKind};
use treelight::tree::{CayleyTree, Color, LightConePath, TwoColoring};
use treelight::{GateAssignment, KimParams};

fn generation(c: &mut Criterion) {
    let gate = generate_tree_unitary(&GenerationConfig::new(2, 3, 0)).unwrap().gate;
    c.bench_function("project_tc q=2 z=3", |b| b.iter(|| project_tc(black_box(gate.matrix()), 2, 3).unwrap()));
    c.bench_function("generate tree-unitary q=2 z=3", |b| {
        b.iter_batched(|| GenerationConfig::new(2, 3, 1), |cfg| generate_tree_unitary(&cfg), BatchSize::SmallInput)
    });
}

fn channels(c: &mut Criterion) {
    let gate = kim_gate(&KimParams::self_dual(3, 0.6)).unwrap();
    c.bench_function("otoc channel", |b| b.iter(|| otoc_channel(black_box(&gate), 1, 2).unwrap()));
    let assign = GateAssignment::Uniform(gate);
    let path = LightConePath::constant(3, 1, 2, 60);
    let (a, z) = (parse_qubit_operator("xz").unwrap(), parse_qubit_operator("z").unwrap());
    c.bench_function("otoc path t=60", |b| b.iter(|| otoc_path(&assign, &path, &a, &z).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let tree = CayleyTree::new(3, 5, false).unwrap();
    let col = TwoColoring::new(&tree);
    let assign = GateAssignment::Uniform(kim_gate(&KimParams::self_dual(3, 0.6)).unwrap());
    let j = (0..tree.n_vertices()).find(|&j| tree.distance(0, j) == 2).unwrap();
    let z = pauli_z();
    c.bench_function("dense correlator t=2", |b| {
        b.iter(|| correlator_exact(&col, &assign, Color::A, 0, j, 2, &z, &z, DEFAULT_DENSE_CAP).unwrap())
    });
}

fn stabilizer(c: &mut Criterion) {
    let map = is_clifford(&kim_gate(&KimParams::self_dual(3, CLIFFORD_FIELD)).unwrap()).unwrap().unwrap();
    c.bench_function("entanglement curve z=3 r=5", |b| {
        b.iter(|| entanglement_curve(TreeKind::Unrooted, &map, 3, 5, 7, BoundaryShift::Aligned).unwrap())
    });
}

fn geometry(c: &mut Criterion) {
    let g = hyp::grid(&[8, 8]).unwrap();
    c.bench_function("four-point delta 8x8 grid", |b| b.iter(|| hyp::four_point_delta(black_box(&g), 400).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = generation, channels, oracle, stabilizer, geometry
}
criterion_main!(benches);
