//! Minimal surfaces from holomorphic data in canonical principal parameters.
//!
//! The crate turns a holomorphic function `w(z)` into an immersed minimal
//! surface through three complex line integrals, verifies the differential
//! identities the construction promises (fundamental forms, frame
//! equations, Gauss-map properties, the natural PDE of the curvature
//! function), and reconstructs surfaces from sampled Gauss-map data.
//!
//! Modules:
//! - [`expr`]: parse, differentiate and evaluate holomorphic expressions.
//! - [`quad`]: adaptive Gauss-Legendre quadrature on complex segments.
//! - [`weierstrass`]: the curvature function, Gauss map and surface
//!   integrals over a validated parameter domain.
//! - [`geometry`]: finite-difference verification of the geometric
//!   identities, plus subclass classification.
//! - [`reconstruct`]: rebuild a surface from a grid of unit normals.
//! - [`io`]: meshes (OBJ/PLY), diagnostics reports, Gauss-field CSV.

pub mod expr;
pub mod geometry;
pub mod io;
pub mod quad;
pub mod reconstruct;
pub mod vec3;
pub mod weierstrass;

#[cfg(test)]
pub(crate) mod testutil;

pub use expr::{parse_expr, EvalError, HolomorphicExpr, ParseError, ParseErrorKind};
pub use geometry::{
    residual_survey, richardson_ratios, FundamentalForms, GeometryChecks, ResidualField,
    ResidualSummary, Subclass, Survey, SurveyParams,
};
pub use io::{grid_to_mesh, write_obj, write_ply, write_report, DiagnosticsReport, TriangleMesh};
pub use num_complex::Complex64;
pub use quad::{QuadConfig, QuadOutcome};
pub use reconstruct::{GaussField, Reconstruction};
pub use weierstrass::{
    generate_grid, validate_domain, GaussVector, PointFlag, Rect, SurfaceError, SurfaceGrid,
    SurfaceSample, WeierstrassData, WeierstrassJob,
};
