//! Differential-geometric verification engine.
//!
//! Positions of the generated surface are sampled by fresh quadrature
//! around each evaluation point and differentiated with central
//! second-order stencils; the Gauss map and the curvature function come
//! from their closed forms. Every identity the construction promises is
//! turned into a nonnegative residual that must shrink at second order in
//! the stencil step:
//!
//! - canonical form of the fundamental coefficients:
//!   `E = G = 1/nu`, `F = 0`, `e = 1`, `f = 0`, `g = -1`;
//! - Codazzi consistency of the principal geodesic curvatures:
//!   `gamma1 = (sqrt nu)_y`, `gamma2 = -(sqrt nu)_x`;
//! - the six Frenet-type frame equations for `X = z_x/sqrt(E)`,
//!   `Y = z_y/sqrt(G)` and the unit normal `l`;
//! - the second-derivative system of the Gauss map and its summed form
//!   `l_xx + l_yy + 2 nu l = 0`;
//! - the first-derivative properties `l_x^2 = l_y^2 = nu`, `l_x l_y = 0`;
//! - the natural PDE `Delta ln nu + 2 nu = 0`, both from the closed-form
//!   Laplacian and from finite differences of `nu`;
//! - minimality, `H = 0`.
//!
//! Anchoring each stencil's integrals at the evaluation point makes the
//! shared quadrature error of the anchor cancel in every difference, so
//! the residuals measure stencil truncation rather than quadrature noise.
//!
//! Points where the datum is not evaluable (pole) or `mu` is below its
//! floor are refused; strong-regularity failures only affect the subclass
//! sign and are still checked.

use crate::expr::EvalError;
use crate::quad::QuadConfig;
use crate::vec3::{add, cross, dot, norm, scale, sub};
use crate::weierstrass::{linspace, Rect, SurfaceError, WeierstrassData};
use num_complex::Complex64;
use rayon::prelude::*;

/// Coefficients of the two fundamental forms plus the derived principal
/// curvatures and principal geodesic curvatures, all from central
/// differences of quadrature positions.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForms {
    pub E: f64,
    pub F: f64,
    pub G: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    /// `e / E`.
    pub nu1: f64,
    /// `g / G`.
    pub nu2: f64,
    /// `-E_y / (2 E sqrt(G))`.
    pub gamma1: f64,
    /// `G_x / (2 G sqrt(E))`.
    pub gamma2: f64,
}

impl FundamentalForms {
    /// Mean curvature `(e G - 2 f F + g E) / (2 (E G - F^2))`.
    pub fn mean_curvature(&self) -> f64 {
        (self.e * self.G - 2.0 * self.f * self.F + self.g * self.E)
            / (2.0 * (self.E * self.G - self.F * self.F))
    }
}

/// Residuals of the Gauss-map second-derivative system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussMapResidual {
    /// Largest residual norm over the three equations.
    pub system: f64,
    /// `|l_xx + l_yy + 2 nu l|`, the sum of the two diagonal equations.
    pub laplace: f64,
}

/// Residuals and recovered curvature from the Gauss map's first
/// derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussMapProperties {
    /// `|l_x . l_x - nu|`
    pub res_x: f64,
    /// `|l_y . l_y - nu|`
    pub res_y: f64,
    /// `|l_x . l_y|`
    pub res_orth: f64,
    /// `l_x . l_x`, the curvature function recovered from the map alone.
    pub nu_recovered: f64,
}

/// Residual of the natural PDE `Delta ln nu + 2 nu = 0`, computed along
/// two independent routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeResidual {
    /// Closed-form Laplacian from `w`, `w'`, `w''`.
    pub analytic: f64,
    /// Central-difference Laplacian of `ln nu`.
    pub finite_difference: f64,
}

/// Sign class of `nu_x nu_y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subclass {
    Positive,
    Negative,
    Degenerate,
}

/// Verification context: the datum, quadrature settings for position
/// sampling, and the evaluability floor.
pub struct GeometryChecks<'a> {
    data: &'a WeierstrassData,
    quad: QuadConfig,
    mu_floor: f64,
}

impl<'a> GeometryChecks<'a> {
    pub fn new(data: &'a WeierstrassData, quad: QuadConfig, mu_floor: f64) -> Self {
        GeometryChecks {
            data,
            quad,
            mu_floor,
        }
    }

    pub fn data(&self) -> &WeierstrassData {
        self.data
    }

    fn eval_err(&self, z: Complex64, source: EvalError) -> SurfaceError {
        SurfaceError::Eval { z, source }
    }

    /// Refuse poles and `mu`-floor violations; strong-regularity failures
    /// pass.
    fn ensure_evaluable(&self, z: Complex64) -> Result<(), SurfaceError> {
        let mu = self
            .data
            .eval_mu(z)
            .map_err(|source| self.eval_err(z, source))?;
        if mu <= self.mu_floor {
            return Err(SurfaceError::InadmissiblePoint {
                z,
                floor: self.mu_floor,
            });
        }
        Ok(())
    }

    /// Position relative to the surface point over `at`, by quadrature
    /// along the straight segment `at -> at + (dx, dy)`.
    fn rel_position(&self, at: Complex64, dx: f64, dy: f64) -> Result<[f64; 3], SurfaceError> {
        if dx == 0.0 && dy == 0.0 {
            return Ok([0.0, 0.0, 0.0]);
        }
        self.data
            .integrate_position(at, at + Complex64::new(dx, dy), &self.quad, self.mu_floor)
    }

    fn gauss(&self, z: Complex64) -> Result<[f64; 3], SurfaceError> {
        Ok(self
            .data
            .gauss_map(z)
            .map_err(|source| self.eval_err(z, source))?
            .to_array())
    }

    /// `(sqrt nu)_x` and `(sqrt nu)_y` from the closed-form gradient:
    /// `(sqrt nu)_x = nu_x / (2 sqrt nu) = 2 mu_x / sqrt(nu)`.
    fn sqrt_nu_gradient(&self, z: Complex64) -> Result<(f64, f64), SurfaceError> {
        let nu = self
            .data
            .eval_nu(z)
            .map_err(|source| self.eval_err(z, source))?;
        let (mx, my) = self
            .data
            .mu_gradient(z)
            .map_err(|source| self.eval_err(z, source))?;
        let s = nu.sqrt();
        Ok((2.0 * mx / s, 2.0 * my / s))
    }

    /// First and second fundamental forms at `at` from a 3x3 stencil of
    /// step `h`. The unit normal for the second form is the normalized
    /// cross product of the difference tangents, keeping this check
    /// independent of the closed-form Gauss map.
    pub fn fundamental_forms(
        &self,
        at: Complex64,
        h: f64,
    ) -> Result<FundamentalForms, SurfaceError> {
        self.ensure_evaluable(at)?;
        // p[a][b] is the relative position at offset ((a-1) h, (b-1) h)
        let mut p = [[[0.0f64; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                p[a][b] = self.rel_position(at, (a as f64 - 1.0) * h, (b as f64 - 1.0) * h)?;
            }
        }
        let inv2h = 1.0 / (2.0 * h);
        let invh2 = 1.0 / (h * h);
        let zx = scale(inv2h, sub(p[2][1], p[0][1]));
        let zy = scale(inv2h, sub(p[1][2], p[1][0]));
        let zxx = scale(invh2, sub(add(p[2][1], p[0][1]), scale(2.0, p[1][1])));
        let zyy = scale(invh2, sub(add(p[1][2], p[1][0]), scale(2.0, p[1][1])));
        let zxy = scale(0.25 * invh2, sub(add(p[2][2], p[0][0]), add(p[2][0], p[0][2])));

        let (first_e, first_f, first_g) = (dot(zx, zx), dot(zx, zy), dot(zy, zy));
        let n = cross(zx, zy);
        let area = norm(n);
        if !(area > 0.0) || first_e * first_g - first_f * first_f <= 0.0 {
            return Err(SurfaceError::DegenerateImmersion { z: at });
        }
        let n = scale(1.0 / area, n);
        let (e, f, g) = (dot(n, zxx), dot(n, zxy), dot(n, zyy));

        // E_y and G_x from tangents at the off-center stencil rows/columns
        let zx_plus = scale(inv2h, sub(p[2][2], p[0][2]));
        let zx_minus = scale(inv2h, sub(p[2][0], p[0][0]));
        let ey = (dot(zx_plus, zx_plus) - dot(zx_minus, zx_minus)) * inv2h;
        let zy_plus = scale(inv2h, sub(p[2][2], p[2][0]));
        let zy_minus = scale(inv2h, sub(p[0][2], p[0][0]));
        let gx = (dot(zy_plus, zy_plus) - dot(zy_minus, zy_minus)) * inv2h;

        Ok(FundamentalForms {
            E: first_e,
            F: first_f,
            G: first_g,
            e,
            f,
            g,
            nu1: e / first_e,
            nu2: g / first_g,
            gamma1: -ey / (2.0 * first_e * first_g.sqrt()),
            gamma2: gx / (2.0 * first_g * first_e.sqrt()),
        })
    }

    /// Largest residual norm over the six Frenet-type frame equations
    ///
    /// ```text
    /// D_X X =  (sqrt nu)_y Y + nu l     D_Y X = -(sqrt nu)_x Y
    /// D_X Y = -(sqrt nu)_y X            D_Y Y =  (sqrt nu)_x X - nu l
    /// D_X l = -nu X                     D_Y l =  nu Y
    /// ```
    ///
    /// with `X`, `Y` the normalized difference tangents, `l` the
    /// closed-form Gauss map, and the curvature data analytic.
    pub fn frame_residual(&self, at: Complex64, h: f64) -> Result<f64, SurfaceError> {
        self.ensure_evaluable(at)?;
        // diamond stencil: all offsets (a, b) with |a| + |b| <= 2
        let mut p = [[None::<[f64; 3]>; 5]; 5];
        for a in -2i32..=2 {
            for b in -2i32..=2 {
                if a.abs() + b.abs() <= 2 {
                    p[(a + 2) as usize][(b + 2) as usize] =
                        Some(self.rel_position(at, f64::from(a) * h, f64::from(b) * h)?);
                }
            }
        }
        let pos = |a: i32, b: i32| p[(a + 2) as usize][(b + 2) as usize].unwrap();
        let inv2h = 1.0 / (2.0 * h);
        let tangent_x = move |a: i32, b: i32| scale(inv2h, sub(pos(a + 1, b), pos(a - 1, b)));
        let tangent_y = move |a: i32, b: i32| scale(inv2h, sub(pos(a, b + 1), pos(a, b - 1)));
        let unit = |v: [f64; 3]| scale(1.0 / norm(v), v);

        let sqrt_e = norm(tangent_x(0, 0));
        let sqrt_g = norm(tangent_y(0, 0));
        if !(sqrt_e > 0.0 && sqrt_g > 0.0) {
            return Err(SurfaceError::DegenerateImmersion { z: at });
        }

        // frame fields at the five cross points
        let frame_at = |a: i32, b: i32| -> Result<([f64; 3], [f64; 3], [f64; 3]), SurfaceError> {
            let x = unit(tangent_x(a, b));
            let y = unit(tangent_y(a, b));
            let l = self.gauss(at + Complex64::new(f64::from(a) * h, f64::from(b) * h))?;
            Ok((x, y, l))
        };
        let (x0, y0, l0) = frame_at(0, 0)?;
        let (xpx, ypx, lpx) = frame_at(1, 0)?;
        let (xmx, ymx, lmx) = frame_at(-1, 0)?;
        let (xpy, ypy, lpy) = frame_at(0, 1)?;
        let (xmy, ymy, lmy) = frame_at(0, -1)?;

        // directional derivatives along the unit frame directions
        let d_x = |plus: [f64; 3], minus: [f64; 3]| scale(inv2h / sqrt_e, sub(plus, minus));
        let d_y = |plus: [f64; 3], minus: [f64; 3]| scale(inv2h / sqrt_g, sub(plus, minus));

        let nu = self
            .data
            .eval_nu(at)
            .map_err(|source| self.eval_err(at, source))?;
        let (snx, sny) = self.sqrt_nu_gradient(at)?;

        let residuals = [
            sub(d_x(xpx, xmx), add(scale(sny, y0), scale(nu, l0))),
            add(d_x(ypx, ymx), scale(sny, x0)),
            add(d_x(lpx, lmx), scale(nu, x0)),
            add(d_y(xpy, xmy), scale(snx, y0)),
            add(sub(d_y(ypy, ymy), scale(snx, x0)), scale(nu, l0)),
            sub(d_y(lpy, lmy), scale(nu, y0)),
        ];
        Ok(residuals.iter().map(|r| norm(*r)).fold(0.0f64, f64::max))
    }

    /// Residuals of the Gauss-map second-derivative system
    ///
    /// ```text
    /// l_xx =  (nu_x / 2nu) l_x - (nu_y / 2nu) l_y - nu l
    /// l_xy =  (nu_y / 2nu) l_x + (nu_x / 2nu) l_y
    /// l_yy = -(nu_x / 2nu) l_x + (nu_y / 2nu) l_y - nu l
    /// ```
    ///
    /// plus the summed form `l_xx + l_yy + 2 nu l = 0`.
    pub fn gauss_map_residual(
        &self,
        at: Complex64,
        h: f64,
    ) -> Result<GaussMapResidual, SurfaceError> {
        self.ensure_evaluable(at)?;
        let mut l = [[[0.0f64; 3]; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                l[a][b] =
                    self.gauss(at + Complex64::new((a as f64 - 1.0) * h, (b as f64 - 1.0) * h))?;
            }
        }
        let inv2h = 1.0 / (2.0 * h);
        let invh2 = 1.0 / (h * h);
        let lx = scale(inv2h, sub(l[2][1], l[0][1]));
        let ly = scale(inv2h, sub(l[1][2], l[1][0]));
        let lxx = scale(invh2, sub(add(l[2][1], l[0][1]), scale(2.0, l[1][1])));
        let lyy = scale(invh2, sub(add(l[1][2], l[1][0]), scale(2.0, l[1][1])));
        let lxy = scale(0.25 * invh2, sub(add(l[2][2], l[0][0]), add(l[2][0], l[0][2])));

        let nu = self
            .data
            .eval_nu(at)
            .map_err(|source| self.eval_err(at, source))?;
        let (nx, ny) = self
            .data
            .nu_gradient(at)
            .map_err(|source| self.eval_err(at, source))?;
        let a = nx / (2.0 * nu);
        let b = ny / (2.0 * nu);
        let l0 = l[1][1];

        let r1 = sub(lxx, sub(sub(scale(a, lx), scale(b, ly)), scale(nu, l0)));
        let r2 = sub(lxy, add(scale(b, lx), scale(a, ly)));
        let r3 = sub(lyy, sub(add(scale(-a, lx), scale(b, ly)), scale(nu, l0)));
        let system = norm(r1).max(norm(r2)).max(norm(r3));
        let laplace = norm(add(add(lxx, lyy), scale(2.0 * nu, l0)));
        Ok(GaussMapResidual { system, laplace })
    }

    /// First-derivative properties of the Gauss map:
    /// `l_x . l_x = l_y . l_y = nu` and `l_x . l_y = 0`.
    pub fn gauss_properties(
        &self,
        at: Complex64,
        h: f64,
    ) -> Result<GaussMapProperties, SurfaceError> {
        self.ensure_evaluable(at)?;
        let inv2h = 1.0 / (2.0 * h);
        let lx = scale(
            inv2h,
            sub(
                self.gauss(at + Complex64::new(h, 0.0))?,
                self.gauss(at - Complex64::new(h, 0.0))?,
            ),
        );
        let ly = scale(
            inv2h,
            sub(
                self.gauss(at + Complex64::new(0.0, h))?,
                self.gauss(at - Complex64::new(0.0, h))?,
            ),
        );
        let nu = self
            .data
            .eval_nu(at)
            .map_err(|source| self.eval_err(at, source))?;
        Ok(GaussMapProperties {
            res_x: (dot(lx, lx) - nu).abs(),
            res_y: (dot(ly, ly) - nu).abs(),
            res_orth: dot(lx, ly).abs(),
            nu_recovered: dot(lx, lx),
        })
    }

    /// Residual of the natural PDE `Delta ln nu + 2 nu = 0` along both
    /// routes: the closed-form Laplacian and a central-difference Laplacian
    /// of `ln nu` at step `h`.
    pub fn pde_residual(&self, at: Complex64, h: f64) -> Result<PdeResidual, SurfaceError> {
        self.ensure_evaluable(at)?;
        let nu0 = self
            .data
            .eval_nu(at)
            .map_err(|source| self.eval_err(at, source))?;
        let analytic = (self
            .data
            .laplacian_ln_nu(at)
            .map_err(|source| self.eval_err(at, source))?
            + 2.0 * nu0)
            .abs();

        let ln_nu = |z: Complex64| -> Result<f64, SurfaceError> {
            let nu = self
                .data
                .eval_nu(z)
                .map_err(|source| self.eval_err(z, source))?;
            if nu <= 0.0 {
                return Err(SurfaceError::InadmissiblePoint {
                    z,
                    floor: self.mu_floor,
                });
            }
            Ok(nu.ln())
        };
        let g0 = ln_nu(at)?;
        let invh2 = 1.0 / (h * h);
        let lap = (ln_nu(at + Complex64::new(h, 0.0))? - 2.0 * g0
            + ln_nu(at - Complex64::new(h, 0.0))?)
            * invh2
            + (ln_nu(at + Complex64::new(0.0, h))? - 2.0 * g0
                + ln_nu(at - Complex64::new(0.0, h))?)
                * invh2;
        Ok(PdeResidual {
            analytic,
            finite_difference: (lap + 2.0 * nu0).abs(),
        })
    }

    /// `|H|` from the finite-difference fundamental forms.
    pub fn mean_curvature(&self, at: Complex64, h: f64) -> Result<f64, SurfaceError> {
        Ok(self.fundamental_forms(at, h)?.mean_curvature().abs())
    }

    /// Sign of `nu_x nu_y`, degenerate when its magnitude falls below
    /// `reg_floor`.
    pub fn classify_subclass(
        &self,
        at: Complex64,
        reg_floor: f64,
    ) -> Result<Subclass, SurfaceError> {
        self.ensure_evaluable(at)?;
        let (nx, ny) = self
            .data
            .nu_gradient(at)
            .map_err(|source| self.eval_err(at, source))?;
        let prod = nx * ny;
        Ok(if prod.abs() < reg_floor {
            Subclass::Degenerate
        } else if prod > 0.0 {
            Subclass::Positive
        } else {
            Subclass::Negative
        })
    }
}

/// One residual evaluation at a parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// All evaluations of one named residual family over a survey grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub name: &'static str,
    pub samples: Vec<ResidualSample>,
}

/// Aggregates of a residual field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSummary {
    pub count: usize,
    pub max: f64,
    pub mean: f64,
    /// Parameter point of the maximum.
    pub argmax: (f64, f64),
}

impl ResidualField {
    pub fn summary(&self) -> Option<ResidualSummary> {
        let first = self.samples.first()?;
        let mut max = first.value;
        let mut argmax = (first.x, first.y);
        let mut sum = 0.0;
        for s in &self.samples {
            sum += s.value;
            if s.value > max {
                max = s.value;
                argmax = (s.x, s.y);
            }
        }
        Some(ResidualSummary {
            count: self.samples.len(),
            max,
            mean: sum / self.samples.len() as f64,
            argmax,
        })
    }
}

/// Canonical residual family order; reports list every family exactly once
/// in this order.
pub const FAMILY_NAMES: [&str; 19] = [
    "canonical_E",
    "canonical_F",
    "canonical_G",
    "canonical_e",
    "canonical_f",
    "canonical_g",
    "codazzi_gamma1",
    "codazzi_gamma2",
    "principal_sum",
    "principal_spread",
    "frame",
    "gaussmap_system",
    "gaussmap_laplace",
    "props_x",
    "props_y",
    "props_orth",
    "pde_analytic",
    "pde_fd",
    "mean_curvature",
];

/// Whether a family's residual depends on the stencil step (and is
/// therefore expected to shrink at second order when the step halves).
pub fn step_dependent(name: &str) -> bool {
    name != "pde_analytic"
}

/// Survey request: evaluate every residual family on a uniform grid.
#[derive(Debug, Clone, Copy)]
pub struct SurveyParams {
    pub domain: Rect,
    pub grid: (usize, usize),
    /// Stencil step.
    pub h: f64,
    /// Degeneracy threshold for the subclass sign.
    pub reg_floor: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubclassTally {
    pub positive: usize,
    pub negative: usize,
    pub degenerate: usize,
}

/// Survey outcome: one field per family plus point bookkeeping.
#[derive(Debug, Clone)]
pub struct Survey {
    pub fields: Vec<ResidualField>,
    /// Points refused outright (pole or `mu` floor).
    pub refused: usize,
    /// Evaluable points where some stencil computation failed.
    pub failed: usize,
    pub subclass: SubclassTally,
}

impl Survey {
    pub fn field(&self, name: &str) -> &ResidualField {
        self.fields
            .iter()
            .find(|f| f.name == name)
            .unwrap_or_else(|| panic!("unknown residual family '{name}'"))
    }
}

struct PointOutcome {
    x: f64,
    y: f64,
    refused: bool,
    failed: bool,
    subclass: Option<Subclass>,
    values: Vec<(usize, f64)>,
}

fn family_index(name: &str) -> usize {
    FAMILY_NAMES
        .iter()
        .position(|n| *n == name)
        .expect("residual family name")
}

/// Evaluate all residual families over a grid. Per-point work runs in
/// parallel; aggregation is sequential in grid order, so the outcome is
/// deterministic regardless of thread count.
pub fn residual_survey(checks: &GeometryChecks<'_>, params: &SurveyParams) -> Survey {
    let (nx, ny) = params.grid;
    let xs = linspace(params.domain.x_min, params.domain.x_max, nx);
    let ys = linspace(params.domain.y_min, params.domain.y_max, ny);
    let h = params.h;

    let outcomes: Vec<PointOutcome> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (xs[idx % nx], ys[idx / nx]);
            let at = Complex64::new(x, y);
            let mut out = PointOutcome {
                x,
                y,
                refused: false,
                failed: false,
                subclass: None,
                values: Vec::with_capacity(FAMILY_NAMES.len()),
            };
            if checks.ensure_evaluable(at).is_err() {
                out.refused = true;
                return out;
            }
            out.subclass = checks.classify_subclass(at, params.reg_floor).ok();

            let nu = match checks.data.eval_nu(at) {
                Ok(nu) => nu,
                Err(_) => {
                    out.failed = true;
                    return out;
                }
            };
            let mut push = |name: &str, value: f64| out.values.push((family_index(name), value));
            match (checks.fundamental_forms(at, h), checks.sqrt_nu_gradient(at)) {
                (Ok(forms), Ok((snx, sny))) => {
                    let inv_nu = 1.0 / nu;
                    push("canonical_E", (forms.E - inv_nu).abs());
                    push("canonical_F", forms.F.abs());
                    push("canonical_G", (forms.G - inv_nu).abs());
                    push("canonical_e", (forms.e - 1.0).abs());
                    push("canonical_f", forms.f.abs());
                    push("canonical_g", (forms.g + 1.0).abs());
                    push("codazzi_gamma1", (forms.gamma1 - sny).abs());
                    push("codazzi_gamma2", (forms.gamma2 + snx).abs());
                    push("principal_sum", (forms.nu1 + forms.nu2).abs());
                    push("principal_spread", ((forms.nu1 - forms.nu2) - 2.0 * nu).abs());
                    push("mean_curvature", forms.mean_curvature().abs());
                }
                _ => out.failed = true,
            }
            match checks.frame_residual(at, h) {
                Ok(r) => push("frame", r),
                Err(_) => out.failed = true,
            }
            match checks.gauss_map_residual(at, h) {
                Ok(r) => {
                    push("gaussmap_system", r.system);
                    push("gaussmap_laplace", r.laplace);
                }
                Err(_) => out.failed = true,
            }
            match checks.gauss_properties(at, h) {
                Ok(r) => {
                    push("props_x", r.res_x);
                    push("props_y", r.res_y);
                    push("props_orth", r.res_orth);
                }
                Err(_) => out.failed = true,
            }
            match checks.pde_residual(at, h) {
                Ok(r) => {
                    push("pde_analytic", r.analytic);
                    push("pde_fd", r.finite_difference);
                }
                Err(_) => out.failed = true,
            }
            out
        })
        .collect();

    let mut fields: Vec<ResidualField> = FAMILY_NAMES
        .iter()
        .map(|name| ResidualField {
            name,
            samples: Vec::new(),
        })
        .collect();
    let mut refused = 0;
    let mut failed = 0;
    let mut subclass = SubclassTally::default();
    for out in outcomes {
        if out.refused {
            refused += 1;
            continue;
        }
        if out.failed {
            failed += 1;
        }
        match out.subclass {
            Some(Subclass::Positive) => subclass.positive += 1,
            Some(Subclass::Negative) => subclass.negative += 1,
            Some(Subclass::Degenerate) => subclass.degenerate += 1,
            None => {}
        }
        for (k, value) in out.values {
            fields[k].samples.push(ResidualSample {
                x: out.x,
                y: out.y,
                value,
            });
        }
    }
    Survey {
        fields,
        refused,
        failed,
        subclass,
    }
}

/// Residuals below this level are rounding noise rather than stencil
/// truncation; convergence ratios computed from them are meaningless.
/// Some identities have residuals whose truncation term vanishes exactly
/// (polynomial immersions), which parks them here at every step.
pub const RICHARDSON_NOISE_FLOOR: f64 = 1e-11;

/// Evaluate only the natural-PDE residuals over a grid: cheaper than a
/// full survey when the other identities are not needed. Returns the
/// analytic field, the finite-difference field, and the number of refused
/// points.
pub fn pde_survey(
    checks: &GeometryChecks<'_>,
    domain: &Rect,
    grid: (usize, usize),
    h: f64,
) -> (ResidualField, ResidualField, usize) {
    let (nx, ny) = grid;
    let xs = linspace(domain.x_min, domain.x_max, nx);
    let ys = linspace(domain.y_min, domain.y_max, ny);
    let outcomes: Vec<(f64, f64, Option<PdeResidual>)> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let (x, y) = (xs[idx % nx], ys[idx / nx]);
            (x, y, checks.pde_residual(Complex64::new(x, y), h).ok())
        })
        .collect();
    let mut analytic = ResidualField {
        name: "pde_analytic",
        samples: Vec::new(),
    };
    let mut fd = ResidualField {
        name: "pde_fd",
        samples: Vec::new(),
    };
    let mut refused = 0;
    for (x, y, r) in outcomes {
        match r {
            Some(r) => {
                analytic.samples.push(ResidualSample {
                    x,
                    y,
                    value: r.analytic,
                });
                fd.samples.push(ResidualSample {
                    x,
                    y,
                    value: r.finite_difference,
                });
            }
            None => refused += 1,
        }
    }
    (analytic, fd, refused)
}

/// Max-residual ratios `coarse/fine` per family, for surveys at steps `h`
/// and `h/2`. Step-independent families, empty fields, and families whose
/// residual sits below [`RICHARDSON_NOISE_FLOOR`] yield `None`.
pub fn richardson_ratios(coarse: &Survey, fine: &Survey) -> Vec<(&'static str, Option<f64>)> {
    FAMILY_NAMES
        .iter()
        .map(|name| {
            if !step_dependent(name) {
                return (*name, None);
            }
            let c = coarse.field(name).summary();
            let f = fine.field(name).summary();
            match (c, f) {
                (Some(c), Some(f)) if f.max > RICHARDSON_NOISE_FLOOR => {
                    (*name, Some(c.max / f.max))
                }
                _ => (*name, None),
            }
        })
        .collect()
}
