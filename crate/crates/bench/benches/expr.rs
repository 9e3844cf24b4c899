use criterion::{criterion_group, criterion_main, Criterion};
use minweier_core::{parse_expr, Complex64};
use std::hint::black_box;

fn bench_parse(c: &mut Criterion) {
    let src = "exp(2*z) / (cos(z) + 3) + (z^2 - 1) * sinh(z)";
    c.bench_function("parse_compound", |b| {
        b.iter(|| parse_expr(black_box(src)).unwrap())
    });
}

fn bench_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("eval");
    let at = Complex64::new(0.37, 0.61);
    for src in minweier_bench::DATA_SOURCES {
        let expr = parse_expr(src).unwrap();
        group.bench_function(src, |b| b.iter(|| expr.eval(black_box(at)).unwrap()));
    }
    group.finish();
}

fn bench_derivative_eval(c: &mut Criterion) {
    // second derivative trees are what the curvature gradient evaluates
    let expr = parse_expr("exp(2*z) / (cos(z) + 3)").unwrap();
    let d2 = expr.differentiate().differentiate();
    let at = Complex64::new(0.37, 0.61);
    c.bench_function("eval_second_derivative", |b| {
        b.iter(|| d2.eval(black_box(at)).unwrap())
    });
}

criterion_group!(benches, bench_parse, bench_eval, bench_derivative_eval);
criterion_main!(benches);
