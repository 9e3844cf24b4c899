//! The curvature function, Gauss map, and surface integrals of a
//! holomorphic datum `w(z)` over a validated rectangular parameter domain.
//!
//! Writing `w = u + iv` and `w' = du/dz`, the central quantity is
//!
//! ```text
//! mu(z) = |w'|^2 / (1 + |w|^2)^2
//! ```
//!
//! which equals `(u_x^2 + u_y^2) / (u^2 + v^2 + 1)^2` by the
//! Cauchy-Riemann relations. The normal curvature function of the
//! generated surface is `nu = 4 mu`, its Gauss map is the stereographic
//! image of `(u, v)`, and the immersion is recovered from the real parts
//! of three complex line integrals with integrands
//!
//! ```text
//! (w^2 - 1) / (2 w'),   -i (w^2 + 1) / (2 w'),   -w / w'
//! ```
//!
//! integrated from the base point `z0`, which is pinned to the origin.

use crate::expr::{EvalError, HolomorphicExpr, POLE_FLOOR};
use crate::quad::{integrate_polyline, integrate_segment, QuadConfig, QuadError};
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

pub const DEFAULT_MU_FLOOR: f64 = 1e-12;
pub const DEFAULT_REG_FLOOR: f64 = 1e-12;

/// Closed rectangle `[x_min, x_max] x [y_min, y_max]` in the parameter
/// plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Rect {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x_min && z.re <= self.x_max && z.im >= self.y_min && z.im <= self.y_max
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    pub fn diagonal(&self) -> f64 {
        let dx = self.x_max - self.x_min;
        let dy = self.y_max - self.y_min;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_valid(&self) -> bool {
        self.x_min < self.x_max && self.y_min < self.y_max
    }
}

/// Unit normal to the surface, i.e. one sample of the Gauss map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussVector {
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
}

impl GaussVector {
    pub fn new(xi: f64, eta: f64, zeta: f64) -> Self {
        GaussVector { xi, eta, zeta }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.xi, self.eta, self.zeta]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        GaussVector {
            xi: a[0],
            eta: a[1],
            zeta: a[2],
        }
    }

    pub fn norm(self) -> f64 {
        crate::vec3::norm(self.to_array())
    }
}

/// Per-grid-point admissibility. Only `Admissible` points receive surface
/// samples; the other flags record which condition failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFlag {
    /// All conditions hold: evaluable, `mu` above its floor, strong
    /// regularity `|mu_x mu_y|` above its floor.
    Admissible,
    /// `mu <= mu_floor`; the datum degenerates here.
    MuFloor,
    /// `|mu_x mu_y| < reg_floor`; strong regularity fails. The surface and
    /// its Gauss map remain well defined, but the point is excluded from
    /// generated output.
    RegFloor,
    /// Expression evaluation failed (pole or overflow).
    Pole,
}

/// A surface-generation request.
#[derive(Debug, Clone)]
pub struct WeierstrassJob {
    pub expr: HolomorphicExpr,
    /// Base point of the integrals; the surface position there is the
    /// origin.
    pub z0: Complex64,
    pub domain: Rect,
    /// Sample counts `(n_x, n_y)`, both at least 2.
    pub grid: (usize, usize),
    /// Absolute quadrature tolerance per position coordinate.
    pub quad_tol: f64,
    /// Minimum admissible `mu`.
    pub mu_floor: f64,
    /// Minimum admissible `|mu_x mu_y|`.
    pub reg_floor: f64,
}

impl WeierstrassJob {
    pub fn new(expr: HolomorphicExpr, z0: Complex64, domain: Rect, grid: (usize, usize)) -> Self {
        WeierstrassJob {
            expr,
            z0,
            domain,
            grid,
            quad_tol: crate::quad::DEFAULT_TOL,
            mu_floor: DEFAULT_MU_FLOOR,
            reg_floor: DEFAULT_REG_FLOOR,
        }
    }

    pub fn quad_config(&self) -> QuadConfig {
        QuadConfig::with_tol(self.quad_tol)
    }

    /// Structural validation; the message names the offending field.
    pub fn validate(&self) -> Result<(), SurfaceError> {
        if !self.domain.is_valid() {
            return Err(SurfaceError::InvalidJob(
                "domain: rectangle must have positive extent".into(),
            ));
        }
        if !self.domain.contains(self.z0) {
            return Err(SurfaceError::InvalidJob(
                "z0: base point must lie inside the domain".into(),
            ));
        }
        if self.grid.0 < 2 || self.grid.1 < 2 {
            return Err(SurfaceError::InvalidJob(
                "grid: at least 2 samples per direction".into(),
            ));
        }
        if !(self.quad_tol > 0.0) {
            return Err(SurfaceError::InvalidJob("quad_tol: must be positive".into()));
        }
        if !(self.mu_floor > 0.0) {
            return Err(SurfaceError::InvalidJob("mu_floor: must be positive".into()));
        }
        if !(self.reg_floor > 0.0) {
            return Err(SurfaceError::InvalidJob("reg_floor: must be positive".into()));
        }
        Ok(())
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSample {
    pub x: f64,
    pub y: f64,
    pub flag: PointFlag,
    pub position: Option<[f64; 3]>,
    pub normal: Option<GaussVector>,
    pub nu: Option<f64>,
}

/// Rectangular lattice of samples, row-major with the x index fastest:
/// sample `(i, j)` lives at `samples[j * nx + i]`.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub nx: usize,
    pub ny: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub samples: Vec<SurfaceSample>,
}

impl SurfaceGrid {
    pub fn sample(&self, i: usize, j: usize) -> &SurfaceSample {
        &self.samples[j * self.nx + i]
    }

    pub fn flag_counts(&self) -> FlagCounts {
        let mut counts = FlagCounts::default();
        for s in &self.samples {
            match s.flag {
                PointFlag::Admissible => counts.admissible += 1,
                PointFlag::MuFloor => counts.mu_floor += 1,
                PointFlag::RegFloor => counts.reg_floor += 1,
                PointFlag::Pole => counts.pole += 1,
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FlagCounts {
    pub admissible: usize,
    pub mu_floor: usize,
    pub reg_floor: usize,
    pub pole: usize,
}

impl FlagCounts {
    pub fn total(&self) -> usize {
        self.admissible + self.mu_floor + self.reg_floor + self.pole
    }
}

/// Errors from surface evaluation and integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("invalid job: {0}")]
    InvalidJob(String),
    #[error("evaluation failed at z = {z}: {source}")]
    Eval { z: Complex64, source: EvalError },
    #[error("w' vanishes at z = {z}")]
    VanishingDerivative { z: Complex64 },
    #[error("integration path crosses an inadmissible region at z = {z} (mu <= {floor:e})")]
    PathBlocked { z: Complex64, floor: f64 },
    #[error("quadrature did not converge within {panels} panels")]
    QuadratureBudget { panels: usize },
    #[error("point z = {z} is not evaluable (mu <= {floor:e})")]
    InadmissiblePoint { z: Complex64, floor: f64 },
    #[error("degenerate immersion at z = {z}: EG - F^2 is not positive")]
    DegenerateImmersion { z: Complex64 },
}

impl SurfaceError {
    fn from_quad(err: QuadError<SurfaceError>) -> SurfaceError {
        match err {
            QuadError::Budget { panels } => SurfaceError::QuadratureBudget { panels },
            QuadError::Integrand(e) => e,
        }
    }
}

/// A holomorphic datum together with its first two exact derivatives.
///
/// All evaluation is pure; the struct is safe to share across threads.
#[derive(Debug, Clone)]
pub struct WeierstrassData {
    w: HolomorphicExpr,
    w1: HolomorphicExpr,
    w2: HolomorphicExpr,
}

impl WeierstrassData {
    pub fn new(expr: HolomorphicExpr) -> Self {
        let w1 = expr.differentiate();
        let w2 = w1.differentiate();
        WeierstrassData { w: expr, w1, w2 }
    }

    pub fn expr(&self) -> &HolomorphicExpr {
        &self.w
    }

    /// `w` and `w'` at `z`.
    pub fn eval_first(&self, z: Complex64) -> Result<(Complex64, Complex64), EvalError> {
        Ok((self.w.eval(z)?, self.w1.eval(z)?))
    }

    /// `w`, `w'` and `w''` at `z`.
    pub fn eval_second(
        &self,
        z: Complex64,
    ) -> Result<(Complex64, Complex64, Complex64), EvalError> {
        Ok((self.w.eval(z)?, self.w1.eval(z)?, self.w2.eval(z)?))
    }

    /// `mu = |w'|^2 / (1 + |w|^2)^2`.
    pub fn eval_mu(&self, z: Complex64) -> Result<f64, EvalError> {
        let (w, w1) = self.eval_first(z)?;
        let denom = 1.0 + w.norm_sqr();
        Ok(w1.norm_sqr() / (denom * denom))
    }

    /// The normal curvature function `nu = 4 mu`.
    pub fn eval_nu(&self, z: Complex64) -> Result<f64, EvalError> {
        Ok(4.0 * self.eval_mu(z)?)
    }

    /// Closed-form gradient `(mu_x, mu_y)` from `w`, `w'`, `w''`.
    ///
    /// With `A = |w'|^2` and `B = 1 + |w|^2`, the Cauchy-Riemann relations
    /// give `A_x = 2 Re(conj(w') w'')`, `A_y = -2 Im(conj(w') w'')` and
    /// similarly for `B`, whence `mu_x = (A_x B - 2 A B_x) / B^3`.
    pub fn mu_gradient(&self, z: Complex64) -> Result<(f64, f64), EvalError> {
        let (w, w1, w2) = self.eval_second(z)?;
        let a = w1.norm_sqr();
        let cw12 = w1.conj() * w2;
        let ax = 2.0 * cw12.re;
        let ay = -2.0 * cw12.im;
        let b = 1.0 + w.norm_sqr();
        let cw01 = w.conj() * w1;
        let bx = 2.0 * cw01.re;
        let by = -2.0 * cw01.im;
        let b3 = b * b * b;
        Ok(((ax * b - 2.0 * a * bx) / b3, (ay * b - 2.0 * a * by) / b3))
    }

    /// `(nu_x, nu_y) = 4 (mu_x, mu_y)`.
    pub fn nu_gradient(&self, z: Complex64) -> Result<(f64, f64), EvalError> {
        let (mx, my) = self.mu_gradient(z)?;
        Ok((4.0 * mx, 4.0 * my))
    }

    /// Closed-form Laplacian of `ln nu`, via
    /// `ln nu = ln 4 + ln |w'|^2 - 2 ln(1 + |w|^2)`.
    ///
    /// Each term is handled by `lap_ln_shifted_sq`, which needs only the
    /// function and its derivative because the mixed second-derivative
    /// terms cancel inside a Laplacian. In exact arithmetic the result
    /// equals `-2 nu`; computing it this way keeps the value an honest
    /// measurement rather than a restatement of that identity.
    pub fn laplacian_ln_nu(&self, z: Complex64) -> Result<f64, EvalError> {
        let (w, w1, w2) = self.eval_second(z)?;
        Ok(lap_ln_shifted_sq(w1, w2, 0.0) - 2.0 * lap_ln_shifted_sq(w, w1, 1.0))
    }

    /// Gauss map: the stereographic image of `(u, v) = (Re w, Im w)` on the
    /// unit sphere, away from the north pole.
    pub fn gauss_map(&self, z: Complex64) -> Result<GaussVector, EvalError> {
        let w = self.w.eval(z)?;
        let (u, v) = (w.re, w.im);
        let d = u * u + v * v + 1.0;
        Ok(GaussVector::new(
            2.0 * u / d,
            2.0 * v / d,
            (u * u + v * v - 1.0) / d,
        ))
    }

    /// The three surface integrands
    /// `((w^2 - 1)/(2 w'), -i (w^2 + 1)/(2 w'), -w/w')`.
    pub fn integrand(&self, z: Complex64) -> Result<[Complex64; 3], SurfaceError> {
        let (w, w1) = self
            .eval_first(z)
            .map_err(|source| SurfaceError::Eval { z, source })?;
        if w1.norm() < POLE_FLOOR {
            return Err(SurfaceError::VanishingDerivative { z });
        }
        let w_sq = w * w;
        let half = Complex64::new(0.5, 0.0);
        let neg_half_i = Complex64::new(0.0, -0.5);
        Ok([
            half * (w_sq - 1.0) / w1,
            neg_half_i * (w_sq + 1.0) / w1,
            -w / w1,
        ])
    }

    fn guarded_integrand(
        &self,
        mu_floor: f64,
    ) -> impl Fn(Complex64) -> Result<[Complex64; 3], SurfaceError> + '_ {
        move |z| {
            let (w, w1) = self
                .eval_first(z)
                .map_err(|source| SurfaceError::Eval { z, source })?;
            let denom = 1.0 + w.norm_sqr();
            let mu = w1.norm_sqr() / (denom * denom);
            if mu <= mu_floor {
                return Err(SurfaceError::PathBlocked { z, floor: mu_floor });
            }
            let w_sq = w * w;
            Ok([
                Complex64::new(0.5, 0.0) * (w_sq - 1.0) / w1,
                Complex64::new(0.0, -0.5) * (w_sq + 1.0) / w1,
                -w / w1,
            ])
        }
    }

    /// Surface position at `z`, integrating along the straight segment from
    /// `from` and adding nothing for `from == z`. Positions are relative to
    /// the surface point over `from`.
    pub fn integrate_position(
        &self,
        from: Complex64,
        to: Complex64,
        quad: &QuadConfig,
        mu_floor: f64,
    ) -> Result<[f64; 3], SurfaceError> {
        let out = integrate_segment(self.guarded_integrand(mu_floor), from, to, quad)
            .map_err(SurfaceError::from_quad)?;
        Ok([out.value[0].re, out.value[1].re, out.value[2].re])
    }

    /// Surface position along an explicit polyline of parameter points, for
    /// domains where the straight segment would leave the admissible
    /// region. By holomorphy of the integrands the result agrees with any
    /// other admissible path.
    pub fn integrate_position_polyline(
        &self,
        path: &[Complex64],
        quad: &QuadConfig,
        mu_floor: f64,
    ) -> Result<[f64; 3], SurfaceError> {
        let out = integrate_polyline(self.guarded_integrand(mu_floor), path, quad)
            .map_err(SurfaceError::from_quad)?;
        Ok([out.value[0].re, out.value[1].re, out.value[2].re])
    }

    /// Admissibility of a single parameter point.
    pub fn point_flag(&self, z: Complex64, mu_floor: f64, reg_floor: f64) -> PointFlag {
        let mu = match self.eval_mu(z) {
            Ok(mu) => mu,
            Err(_) => return PointFlag::Pole,
        };
        if mu <= mu_floor {
            return PointFlag::MuFloor;
        }
        let (mx, my) = match self.mu_gradient(z) {
            Ok(g) => g,
            Err(_) => return PointFlag::Pole,
        };
        if (mx * my).abs() < reg_floor {
            return PointFlag::RegFloor;
        }
        PointFlag::Admissible
    }
}

/// `Delta ln(c + |f|^2)` for holomorphic `f` with derivative `f1`.
///
/// With `P = c + |f|^2` the Cauchy-Riemann relations give
/// `P_x = 2 Re(conj(f) f')`, `P_y = -2 Im(conj(f) f')` and
/// `P_xx + P_yy = 4 |f'|^2`, so the Laplacian of `ln P` is
/// `4 |f'|^2 / P - (P_x^2 + P_y^2) / P^2`.
fn lap_ln_shifted_sq(f: Complex64, f1: Complex64, c: f64) -> f64 {
    let p = c + f.norm_sqr();
    let cf = f.conj() * f1;
    let px = 2.0 * cf.re;
    let py = -2.0 * cf.im;
    4.0 * f1.norm_sqr() / p - (px * px + py * py) / (p * p)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| a + step * i as f64).collect()
}

/// Per-grid-point admissibility flags for a job, row-major with the x index
/// fastest.
pub fn validate_domain(job: &WeierstrassJob) -> Result<Vec<PointFlag>, SurfaceError> {
    job.validate()?;
    let data = WeierstrassData::new(job.expr.clone());
    let (nx, ny) = job.grid;
    let xs = linspace(job.domain.x_min, job.domain.x_max, nx);
    let ys = linspace(job.domain.y_min, job.domain.y_max, ny);
    Ok((0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let z = Complex64::new(xs[idx % nx], ys[idx / nx]);
            data.point_flag(z, job.mu_floor, job.reg_floor)
        })
        .collect())
}

/// Evaluate the full surface grid: flags everywhere, and position, Gauss
/// map and `nu` at every admissible point. Positions are obtained by
/// straight-segment integration from `z0`; a path through an inadmissible
/// region is an error.
pub fn generate_grid(job: &WeierstrassJob) -> Result<SurfaceGrid, SurfaceError> {
    job.validate()?;
    let data = WeierstrassData::new(job.expr.clone());
    let (nx, ny) = job.grid;
    let xs = linspace(job.domain.x_min, job.domain.x_max, nx);
    let ys = linspace(job.domain.y_min, job.domain.y_max, ny);
    let quad = job.quad_config();
    let samples: Result<Vec<SurfaceSample>, SurfaceError> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (xs[idx % nx], ys[idx / nx]);
            let z = Complex64::new(x, y);
            let flag = data.point_flag(z, job.mu_floor, job.reg_floor);
            if flag != PointFlag::Admissible {
                return Ok(SurfaceSample {
                    x,
                    y,
                    flag,
                    position: None,
                    normal: None,
                    nu: None,
                });
            }
            let position = data.integrate_position(job.z0, z, &quad, job.mu_floor)?;
            let normal = data
                .gauss_map(z)
                .map_err(|source| SurfaceError::Eval { z, source })?;
            let nu = data
                .eval_nu(z)
                .map_err(|source| SurfaceError::Eval { z, source })?;
            Ok(SurfaceSample {
                x,
                y,
                flag,
                position: Some(position),
                normal: Some(normal),
                nu: Some(nu),
            })
        })
        .collect();
    Ok(SurfaceGrid {
        nx,
        ny,
        xs,
        ys,
        samples: samples?,
    })
}
