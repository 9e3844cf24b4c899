//! Shared fixtures for the benchmarks.

use minweier_core::{parse_expr, Complex64, Rect, WeierstrassData, WeierstrassJob};

pub const DATA_SOURCES: [&str; 3] = ["z", "exp(z)", "z + z^3/3"];

pub fn enneper_job(n: usize) -> WeierstrassJob {
    WeierstrassJob::new(
        parse_expr("z").unwrap(),
        Complex64::new(0.6, 0.6),
        Rect::new(0.1, 1.1, 0.1, 1.1),
        (n, n),
    )
}

pub fn data(src: &str) -> WeierstrassData {
    WeierstrassData::new(parse_expr(src).unwrap())
}
