//! Rebuild a surface from a rectangular grid of unit normals.
//!
//! A unit vector field with `l_x . l_x = l_y . l_y = nu > 0` and
//! `l_x . l_y = 0` determines a surface, unique up to a motion, through
//!
//! ```text
//! z_x = -(1/nu) l_x,      z_y = (1/nu) l_y .
//! ```
//!
//! Derivatives of the sampled field use central differences in the
//! interior and one-sided second-order stencils on the boundary; the
//! curvature function is recovered as `nu = l_x . l_x`. Positions come
//! from composite trapezoidal sums along a fixed sweep (the first grid row,
//! then up each column), after which the requested base sample is pinned
//! to the origin by subtraction. Because the sweep itself never moves,
//! re-basing changes positions by exactly one constant vector. The
//! transposed sweep (first column, then rows) is integrated as well; the
//! largest difference between the two is reported as the integrability
//! defect of the discrete field, and shrinks at second order in the grid
//! spacing.

use crate::vec3::{add, dot, scale, sub};
use crate::weierstrass::{GaussVector, Rect, SurfaceError, WeierstrassData};
use num_complex::Complex64;
use thiserror::Error;

/// Default floor for the recovered curvature; samples at or below it are
/// flagged and block integration.
pub const DEFAULT_NU_FLOOR: f64 = 1e-12;

/// Tolerance for the unit-norm invariant of field samples.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    #[error("gauss field needs at least 3x3 samples, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },
    #[error("grid spacing must be positive, got ({hx}, {hy})")]
    BadSpacing { hx: f64, hy: f64 },
    #[error("sample count {given} does not match grid {nx}x{ny}")]
    SampleCount { given: usize, nx: usize, ny: usize },
    #[error("base index ({i}, {j}) is outside the grid")]
    BaseOutOfRange { i: usize, j: usize },
    #[error("recovered curvature at sample ({i}, {j}) is at or below the floor {floor:e}")]
    FlaggedRegion { i: usize, j: usize, floor: f64 },
}

/// Uniform rectangular grid of Gauss-map samples, row-major with the x
/// index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussField {
    pub x0: f64,
    pub y0: f64,
    pub hx: f64,
    pub hy: f64,
    pub nx: usize,
    pub ny: usize,
    normals: Vec<GaussVector>,
}

/// Per-field validation outcome: finite-difference residuals of the
/// defining properties at interior points (one-sided boundary stencils
/// carry larger error and are excluded from the statistics), the recovered
/// curvature everywhere, and invariant violations.
#[derive(Debug, Clone)]
pub struct FieldValidation {
    /// `|l_x . l_x - l_y . l_y|`: the two tangent derivatives must have
    /// equal length.
    pub res_iso: crate::geometry::ResidualField,
    /// `|l_x . l_y|`: they must be orthogonal.
    pub res_orth: crate::geometry::ResidualField,
    /// Recovered `nu = l_x . l_x` at every sample, grid layout.
    pub nu: Vec<f64>,
    /// Indices whose sample is not unit length within [`UNIT_NORM_TOL`].
    pub norm_violations: Vec<(usize, usize)>,
    /// Indices whose recovered curvature is at or below the floor.
    pub flagged: Vec<(usize, usize)>,
}

/// Integrated positions plus the integrability defect.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub nx: usize,
    pub ny: usize,
    /// Row-major positions with the base sample at the origin.
    pub positions: Vec<[f64; 3]>,
    /// Largest difference between the row-first and column-first sweeps.
    pub commutator: f64,
}

impl GaussField {
    pub fn new(
        x0: f64,
        y0: f64,
        hx: f64,
        hy: f64,
        nx: usize,
        ny: usize,
        normals: Vec<GaussVector>,
    ) -> Result<Self, ReconstructError> {
        if nx < 3 || ny < 3 {
            return Err(ReconstructError::TooSmall { nx, ny });
        }
        if !(hx > 0.0 && hy > 0.0) {
            return Err(ReconstructError::BadSpacing { hx, hy });
        }
        if normals.len() != nx * ny {
            return Err(ReconstructError::SampleCount {
                given: normals.len(),
                nx,
                ny,
            });
        }
        Ok(GaussField {
            x0,
            y0,
            hx,
            hy,
            nx,
            ny,
            normals,
        })
    }

    /// Sample the Gauss map of a holomorphic datum over a rectangle.
    pub fn sample(
        data: &WeierstrassData,
        domain: &Rect,
        nx: usize,
        ny: usize,
    ) -> Result<Self, SurfaceError> {
        let xs = crate::weierstrass::linspace(domain.x_min, domain.x_max, nx);
        let ys = crate::weierstrass::linspace(domain.y_min, domain.y_max, ny);
        let mut normals = Vec::with_capacity(nx * ny);
        for &y in &ys {
            for &x in &xs {
                let z = Complex64::new(x, y);
                normals.push(
                    data.gauss_map(z)
                        .map_err(|source| SurfaceError::Eval { z, source })?,
                );
            }
        }
        GaussField::new(
            domain.x_min,
            domain.y_min,
            (domain.x_max - domain.x_min) / (nx - 1) as f64,
            (domain.y_max - domain.y_min) / (ny - 1) as f64,
            nx,
            ny,
            normals,
        )
        .map_err(|e| SurfaceError::InvalidJob(e.to_string()))
    }

    pub fn normal(&self, i: usize, j: usize) -> GaussVector {
        self.normals[j * self.nx + i]
    }

    pub fn normals(&self) -> &[GaussVector] {
        &self.normals
    }

    /// Parameter point of sample `(i, j)`.
    pub fn param(&self, i: usize, j: usize) -> (f64, f64) {
        (self.x0 + i as f64 * self.hx, self.y0 + j as f64 * self.hy)
    }

    fn l(&self, i: usize, j: usize) -> [f64; 3] {
        self.normals[j * self.nx + i].to_array()
    }

    /// x-derivative of the field: central in the interior, one-sided
    /// second-order on the boundary columns.
    pub fn d_x(&self, i: usize, j: usize) -> [f64; 3] {
        let inv = 1.0 / (2.0 * self.hx);
        if i == 0 {
            scale(
                inv,
                add(
                    sub(scale(4.0, self.l(1, j)), scale(3.0, self.l(0, j))),
                    scale(-1.0, self.l(2, j)),
                ),
            )
        } else if i == self.nx - 1 {
            let n = self.nx - 1;
            scale(
                inv,
                add(
                    sub(scale(3.0, self.l(n, j)), scale(4.0, self.l(n - 1, j))),
                    self.l(n - 2, j),
                ),
            )
        } else {
            scale(inv, sub(self.l(i + 1, j), self.l(i - 1, j)))
        }
    }

    /// y-derivative of the field, same stencils as [`GaussField::d_x`].
    pub fn d_y(&self, i: usize, j: usize) -> [f64; 3] {
        let inv = 1.0 / (2.0 * self.hy);
        if j == 0 {
            scale(
                inv,
                add(
                    sub(scale(4.0, self.l(i, 1)), scale(3.0, self.l(i, 0))),
                    scale(-1.0, self.l(i, 2)),
                ),
            )
        } else if j == self.ny - 1 {
            let n = self.ny - 1;
            scale(
                inv,
                add(
                    sub(scale(3.0, self.l(i, n)), scale(4.0, self.l(i, n - 1))),
                    self.l(i, n - 2),
                ),
            )
        } else {
            scale(inv, sub(self.l(i, j + 1), self.l(i, j - 1)))
        }
    }

    /// Check the defining properties of the field and recover the
    /// curvature.
    pub fn validate(&self, nu_floor: f64) -> FieldValidation {
        use crate::geometry::{ResidualField, ResidualSample};
        let mut res_iso = ResidualField {
            name: "field_iso",
            samples: Vec::new(),
        };
        let mut res_orth = ResidualField {
            name: "field_orth",
            samples: Vec::new(),
        };
        let mut nu = vec![0.0; self.nx * self.ny];
        let mut norm_violations = Vec::new();
        let mut flagged = Vec::new();
        for j in 0..self.ny {
            for i in 0..self.nx {
                let sample_norm = self.normal(i, j).norm();
                if (sample_norm - 1.0).abs() > UNIT_NORM_TOL {
                    norm_violations.push((i, j));
                }
                let lx = self.d_x(i, j);
                let ly = self.d_y(i, j);
                let nu_ij = dot(lx, lx);
                nu[j * self.nx + i] = nu_ij;
                if nu_ij <= nu_floor {
                    flagged.push((i, j));
                }
                if i > 0 && i < self.nx - 1 && j > 0 && j < self.ny - 1 {
                    let (x, y) = self.param(i, j);
                    res_iso.samples.push(ResidualSample {
                        x,
                        y,
                        value: (dot(lx, lx) - dot(ly, ly)).abs(),
                    });
                    res_orth.samples.push(ResidualSample {
                        x,
                        y,
                        value: dot(lx, ly).abs(),
                    });
                }
            }
        }
        FieldValidation {
            res_iso,
            res_orth,
            nu,
            norm_violations,
            flagged,
        }
    }

    /// Integrate the field into positions with sample `base` at the
    /// origin.
    pub fn integrate(
        &self,
        base: (usize, usize),
        nu_floor: f64,
    ) -> Result<Reconstruction, ReconstructError> {
        let (bi, bj) = base;
        if bi >= self.nx || bj >= self.ny {
            return Err(ReconstructError::BaseOutOfRange { i: bi, j: bj });
        }
        let (nx, ny) = (self.nx, self.ny);

        // tangent samples z_x = -(1/nu) l_x, z_y = (1/nu) l_y
        let mut zx = vec![[0.0; 3]; nx * ny];
        let mut zy = vec![[0.0; 3]; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let lx = self.d_x(i, j);
                let ly = self.d_y(i, j);
                let nu = dot(lx, lx);
                if nu <= nu_floor {
                    return Err(ReconstructError::FlaggedRegion {
                        i,
                        j,
                        floor: nu_floor,
                    });
                }
                zx[j * nx + i] = scale(-1.0 / nu, lx);
                zy[j * nx + i] = scale(1.0 / nu, ly);
            }
        }

        // row-first sweep: along row 0, then along each column
        let mut row_first = vec![[0.0; 3]; nx * ny];
        for i in 1..nx {
            row_first[i] = add(
                row_first[i - 1],
                scale(0.5 * self.hx, add(zx[i - 1], zx[i])),
            );
        }
        for i in 0..nx {
            for j in 1..ny {
                row_first[j * nx + i] = add(
                    row_first[(j - 1) * nx + i],
                    scale(0.5 * self.hy, add(zy[(j - 1) * nx + i], zy[j * nx + i])),
                );
            }
        }

        // column-first sweep for the integrability defect
        let mut col_first = vec![[0.0; 3]; nx * ny];
        for j in 1..ny {
            col_first[j * nx] = add(
                col_first[(j - 1) * nx],
                scale(0.5 * self.hy, add(zy[(j - 1) * nx], zy[j * nx])),
            );
        }
        for j in 0..ny {
            for i in 1..nx {
                col_first[j * nx + i] = add(
                    col_first[j * nx + i - 1],
                    scale(0.5 * self.hx, add(zx[j * nx + i - 1], zx[j * nx + i])),
                );
            }
        }

        let base_idx = bj * nx + bi;
        let row_base = row_first[base_idx];
        let col_base = col_first[base_idx];
        let mut commutator: f64 = 0.0;
        let mut positions = vec![[0.0; 3]; nx * ny];
        for idx in 0..nx * ny {
            positions[idx] = sub(row_first[idx], row_base);
            let alt = sub(col_first[idx], col_base);
            commutator = commutator.max(crate::vec3::norm(sub(positions[idx], alt)));
        }
        Ok(Reconstruction {
            nx,
            ny,
            positions,
            commutator,
        })
    }
}
