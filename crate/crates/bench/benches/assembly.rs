use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use su2seq::hamiltonian::{assemble, assemble_electric, assemble_magnetic, spectrum};
use su2seq_bench::{ground_params, ladder};

fn ladders(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble_ladder");
    group.sample_size(10);
    for n in [2, 3, 4] {
        let tree = ladder(n);
        let p = ground_params(4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| assemble(black_box(&tree), &p).unwrap()));
    }
    group.finish();
}

fn parts(c: &mut Criterion) {
    let tree = ladder(3);
    let p = ground_params(4);
    let mut group = c.benchmark_group("parts");
    group.sample_size(10);
    group.bench_function("electric", |b| b.iter(|| assemble_electric(black_box(&tree), &p).unwrap()));
    group.bench_function("magnetic", |b| b.iter(|| assemble_magnetic(black_box(&tree), &p).unwrap()));
    group.finish();
}

fn single_rod_spectrum(c: &mut Criterion) {
    let tree = ladder(1);
    let h = assemble(&tree, &ground_params(127)).unwrap();
    c.bench_function("spectrum_single_rod_127", |b| b.iter(|| spectrum(black_box(&h), 5).unwrap()));
}

criterion_group!(benches, ladders, parts, single_rod_spectrum);
criterion_main!(benches);
