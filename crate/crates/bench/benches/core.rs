use std::hint::black_box;

use autobraid::braid::sl2::p3_to_f2;
use autobraid::estimate::sample_rng;
use autobraid::flow::{build_radial_bump, integrate};
use autobraid::trace::{extract_braid, make_loop};
use autobraid::{BraidWord, Configuration, FlowSpec, TwistSystem};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::Rng;

fn pure_braid(len: usize) -> BraidWord {
    let mut rng = sample_rng(11, 0);
    let s: Vec<i32> = (0..len).map(|_| [1, -1, 2, -2][rng.gen_range(0..4)]).collect();
    for fix in [&[][..], &[1], &[2], &[1, 2], &[2, 1], &[1, 2, 1]] {
        let w = BraidWord::from_signed(3, &[&s[..], fix].concat()).unwrap();
        if w.is_pure() {
            return w;
        }
    }
    unreachable!()
}

fn projection(c: &mut Criterion) {
    let mut g = c.benchmark_group("p3_to_f2");
    for len in [16, 128, 1024] {
        let w = pure_braid(len);
        g.bench_with_input(BenchmarkId::from_parameter(len), &w, |b, w| b.iter(|| p3_to_f2(black_box(w)).unwrap()));
    }
    g.finish();
}

fn bump() -> FlowSpec {
    FlowSpec::autonomous(build_radial_bump([0.0, 0.0], 0.9, 1.0, 3).unwrap(), 1.0).with_step(0.01)
}

fn rk4(c: &mut Criterion) {
    let spec = bump();
    c.bench_function("integrate bump, one point", |b| b.iter(|| integrate(&spec, black_box([0.3, 0.1])).unwrap()));
}

fn tracing(c: &mut Criterion) {
    let layout = TwistSystem::standard();
    let spec = layout.word_flow(&"xxY".parse().unwrap(), 0.01);
    let z = Configuration::new(layout.basepoints().to_vec()).unwrap();
    let x = Configuration::new(vec![[0.1, 0.2], [-0.4, -0.1], [0.5, 0.3]]).unwrap();
    c.bench_function("trace xxY loop", |b| {
        b.iter(|| {
            let bundle = make_loop(&spec, black_box(&x), &z, 1).unwrap();
            extract_braid(&bundle, 0.0).unwrap()
        })
    });
}

criterion_group!(benches, projection, rk4, tracing);
criterion_main!(benches);
