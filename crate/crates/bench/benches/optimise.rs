use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use zxcliff::{
    cc2_lookup, find_path_cover, interpret, optimise, random_clifford_circuit, simple_form, translate,
    OptimiserConfig,
};

fn optimiser(c: &mut Criterion) {
    let mut g = c.benchmark_group("optimise_depth20");
    g.sample_size(20);
    let cfg = OptimiserConfig::default();
    for width in 1..=4 {
        let circuits: Vec<_> = (0..8).map(|i| random_clifford_circuit(width, 20, 1 + i)).collect();
        g.bench_with_input(BenchmarkId::from_parameter(width), &circuits, |b, cs| {
            b.iter(|| {
                for c in cs {
                    optimise(c, &cfg).unwrap();
                }
            })
        });
    }
    g.finish();
}

fn building_blocks(c: &mut Criterion) {
    let circuit = random_clifford_circuit(4, 30, 9);
    let d = translate(&circuit);
    c.bench_function("simple_form_w4_d30", |b| b.iter(|| simple_form(&d)));
    let s = simple_form(&d);
    c.bench_function("path_cover_w4_d30", |b| b.iter(|| find_path_cover(&s).unwrap()));
    c.bench_function("interpret_w4_d30", |b| b.iter(|| interpret(&s).unwrap()));
    let u = interpret(&simple_form(&translate(&random_clifford_circuit(2, 20, 3)))).unwrap();
    c.bench_function("cc2_lookup", |b| b.iter(|| cc2_lookup(&u).unwrap()));
}

criterion_group!(benches, optimiser, building_blocks);
criterion_main!(benches);
