//! Adaptive complex line quadrature on straight segments.
//!
//! Fixed-order Gauss-Legendre panels with recursive bisection: a panel is
//! accepted when refining it changes the result by less than its share of
//! the absolute tolerance. Integrands are vector-valued so the three
//! surface integrals share their expensive expression evaluations.

use num_complex::Complex64;
use std::sync::OnceLock;
use thiserror::Error;

/// Panel order. The integrands are analytic away from zeros of the
/// denominator, so a moderately high fixed order converges fast and
/// adaptivity only kicks in near those zeros.
const GL_ORDER: usize = 15;

/// Default absolute tolerance per integral component.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default panel budget for one segment.
pub const DEFAULT_MAX_PANELS: usize = 1 << 14;

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Absolute tolerance per component.
    pub tol: f64,
    /// Subdivision budget in panels.
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: DEFAULT_TOL,
            max_panels: DEFAULT_MAX_PANELS,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(tol: f64) -> Self {
        QuadConfig {
            tol,
            ..QuadConfig::default()
        }
    }
}

/// Quadrature failure; `E` is the integrand's own error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadError<E> {
    #[error("quadrature did not converge within {panels} panels")]
    Budget { panels: usize },
    #[error(transparent)]
    Integrand(E),
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOutcome<const N: usize> {
    pub value: [Complex64; N],
    /// Accumulated refinement differences; a pessimistic bound on the error
    /// of the returned value.
    pub error_estimate: f64,
    pub panels: usize,
}

/// Nodes and weights of the Gauss-Legendre rule on `[-1, 1]`, computed once
/// by Newton iteration on the Legendre polynomial.
fn gl_rule() -> &'static [(f64, f64); GL_ORDER] {
    static RULE: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut rule = [(0.0, 0.0); GL_ORDER];
        for (k, slot) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

/// Legendre polynomial `P_n` and its derivative at `x` by the three-term
/// recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for j in 2..=n {
        let j = j as f64;
        let p_next = ((2.0 * j - 1.0) * x * p - (j - 1.0) * p_prev) / j;
        p_prev = p;
        p = p_next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

struct Adaptive<'f, F, const N: usize> {
    f: &'f F,
    panels: usize,
    max_panels: usize,
    error_estimate: f64,
}

impl<F, E, const N: usize> Adaptive<'_, F, N>
where
    F: Fn(Complex64) -> Result<[Complex64; N], E>,
{
    fn panel(&mut self, a: Complex64, b: Complex64) -> Result<[Complex64; N], QuadError<E>> {
        if self.panels >= self.max_panels {
            return Err(QuadError::Budget {
                panels: self.panels,
            });
        }
        self.panels += 1;
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = [Complex64::new(0.0, 0.0); N];
        for &(x, w) in gl_rule() {
            let v = (self.f)(mid + half * x).map_err(QuadError::Integrand)?;
            for (s, vi) in acc.iter_mut().zip(v) {
                *s += w * vi;
            }
        }
        for s in acc.iter_mut() {
            *s *= half;
        }
        Ok(acc)
    }

    fn refine(
        &mut self,
        a: Complex64,
        b: Complex64,
        whole: [Complex64; N],
        tol: f64,
    ) -> Result<[Complex64; N], QuadError<E>> {
        let mid = 0.5 * (a + b);
        let left = self.panel(a, mid)?;
        let right = self.panel(mid, b)?;
        let mut sum = [Complex64::new(0.0, 0.0); N];
        let mut diff: f64 = 0.0;
        for k in 0..N {
            sum[k] = left[k] + right[k];
            diff = diff.max((sum[k] - whole[k]).norm());
        }
        if diff <= tol {
            self.error_estimate += diff;
            return Ok(sum);
        }
        let l = self.refine(a, mid, left, 0.5 * tol)?;
        let r = self.refine(mid, b, right, 0.5 * tol)?;
        let mut out = [Complex64::new(0.0, 0.0); N];
        for k in 0..N {
            out[k] = l[k] + r[k];
        }
        Ok(out)
    }
}

/// Integrate `f` along the straight segment from `a` to `b`.
pub fn integrate_segment<F, E, const N: usize>(
    f: F,
    a: Complex64,
    b: Complex64,
    cfg: &QuadConfig,
) -> Result<QuadOutcome<N>, QuadError<E>>
where
    F: Fn(Complex64) -> Result<[Complex64; N], E>,
{
    if a == b {
        return Ok(QuadOutcome {
            value: [Complex64::new(0.0, 0.0); N],
            error_estimate: 0.0,
            panels: 0,
        });
    }
    let mut worker = Adaptive::<F, N> {
        f: &f,
        panels: 0,
        max_panels: cfg.max_panels,
        error_estimate: 0.0,
    };
    let whole = worker.panel(a, b)?;
    let value = worker.refine(a, b, whole, cfg.tol)?;
    Ok(QuadOutcome {
        value,
        error_estimate: worker.error_estimate,
        panels: worker.panels,
    })
}

/// Integrate `f` along a polyline, summing per-segment results. Each
/// segment gets the full per-component tolerance, so the result is within
/// `(pts.len()-1) * tol` of the true line integral.
pub fn integrate_polyline<F, E, const N: usize>(
    f: F,
    pts: &[Complex64],
    cfg: &QuadConfig,
) -> Result<QuadOutcome<N>, QuadError<E>>
where
    F: Fn(Complex64) -> Result<[Complex64; N], E>,
{
    let mut total = QuadOutcome {
        value: [Complex64::new(0.0, 0.0); N],
        error_estimate: 0.0,
        panels: 0,
    };
    for pair in pts.windows(2) {
        let seg = integrate_segment(&f, pair[0], pair[1], cfg)?;
        for k in 0..N {
            total.value[k] += seg.value[k];
        }
        total.error_estimate += seg.error_estimate;
        total.panels += seg.panels;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn ok1(f: impl Fn(Complex64) -> Complex64) -> impl Fn(Complex64) -> Result<[Complex64; 1], Infallible> {
        move |z| Ok([f(z)])
    }

    #[test]
    fn rule_is_symmetric_and_normalized() {
        let rule = gl_rule();
        let wsum: f64 = rule.iter().map(|&(_, w)| w).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        for &(x, w) in rule.iter() {
            let mirrored = rule
                .iter()
                .any(|&(x2, w2)| (x + x2).abs() < 1e-14 && (w - w2).abs() < 1e-14);
            assert!(mirrored, "node {x} weight {w} has no mirror");
        }
    }

    #[test]
    fn rule_integrates_polynomials_exactly() {
        // A single panel of order n is exact through degree 2n-1.
        let rule = gl_rule();
        for k in 0..30usize {
            let got: f64 = rule.iter().map(|&(x, w)| w * x.powi(k as i32)).sum();
            let want = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            assert!((got - want).abs() < 1e-13, "x^{k}: {got} vs {want}");
        }
    }

    #[test]
    fn segment_matches_antiderivatives() {
        let cfg = QuadConfig::default();
        // int_0^1 z^2 dz = 1/3
        let out = integrate_segment(
            ok1(|z| z * z),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            &cfg,
        )
        .unwrap();
        assert!((out.value[0] - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-14);

        // int_0^i z dz = -1/2
        let out = integrate_segment(
            ok1(|z| z),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 1.0),
            &cfg,
        )
        .unwrap();
        assert!((out.value[0] - Complex64::new(-0.5, 0.0)).norm() < 1e-14);

        // int along a slanted segment of exp
        let a = Complex64::new(-0.3, 0.2);
        let b = Complex64::new(1.1, -0.7);
        let out = integrate_segment(ok1(|z| z.exp()), a, b, &cfg).unwrap();
        assert!((out.value[0] - (b.exp() - a.exp())).norm() < 1e-13);
    }

    #[test]
    fn empty_segment_is_zero() {
        let a = Complex64::new(0.4, 0.4);
        let out = integrate_segment(ok1(|z| z), a, a, &QuadConfig::default()).unwrap();
        assert_eq!(out.value[0], Complex64::new(0.0, 0.0));
        assert_eq!(out.panels, 0);
    }

    #[test]
    fn adaptivity_resolves_near_singularity() {
        // 1/(z - p) with p just off the segment; compare with log difference
        let p = Complex64::new(0.5, 1e-3);
        let a = Complex64::new(0.0, 0.0);
        let b = Complex64::new(1.0, 0.0);
        let out = integrate_segment(ok1(move |z| 1.0 / (z - p)), a, b, &QuadConfig::default())
            .unwrap();
        let want = ((b - p) / (a - p)).ln();
        assert!(
            (out.value[0] - want).norm() < 1e-9,
            "got {} want {} ({} panels)",
            out.value[0],
            want,
            out.panels
        );
        assert!(out.panels > 1);
    }

    #[test]
    fn budget_exhaustion_reported() {
        let p = Complex64::new(0.5, 1e-6);
        let cfg = QuadConfig {
            tol: 1e-14,
            max_panels: 8,
        };
        let err = integrate_segment(
            ok1(move |z| 1.0 / (z - p)),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, QuadError::Budget { .. }));
    }

    #[test]
    fn integrand_errors_propagate() {
        #[derive(Debug, PartialEq)]
        struct Bad;
        let err = integrate_segment(
            |_z| -> Result<[Complex64; 1], Bad> { Err(Bad) },
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            &QuadConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, QuadError::Integrand(Bad)));
    }

    #[test]
    fn polyline_equals_segment_sum_for_holomorphic_integrand() {
        let cfg = QuadConfig::default();
        let a = Complex64::new(0.1, 0.1);
        let elbow = Complex64::new(0.9, 0.2);
        let b = Complex64::new(0.6, 1.0);
        let direct: QuadOutcome<1> =
            integrate_segment(ok1(|z| (z * z).exp()), a, b, &cfg).unwrap();
        let bent = integrate_polyline(ok1(|z| (z * z).exp()), &[a, elbow, b], &cfg).unwrap();
        assert!((direct.value[0] - bent.value[0]).norm() < 10.0 * cfg.tol);
    }
}
