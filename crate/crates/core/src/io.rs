//! Meshes, diagnostics reports, and Gauss-field CSV.
//!
//! All outputs are ASCII for diffability. Every floating value is printed
//! with 17 significant digits, which round-trips `f64` exactly, and every
//! writer emits its records in a fixed order, so identical inputs produce
//! byte-identical files.

use crate::geometry::ResidualField;
use crate::reconstruct::GaussField;
use crate::vec3::{cross, dot, sub};
use crate::weierstrass::{GaussVector, PointFlag, SurfaceGrid};
use std::io::{BufRead, Write};
use thiserror::Error;

/// Print a float with 17 significant digits (lossless for `f64`).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Indexed triangle mesh. Triangles wind counterclockwise around the
/// outward normal, the frame orientation of the generating construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub positions: Vec<[f64; 3]>,
    /// Per-vertex unit normals, parallel to `positions` when present.
    pub normals: Option<Vec<[f64; 3]>>,
    pub triangles: Vec<[u32; 3]>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("grid contains no fully admissible quad")]
    NoAdmissibleQuads,
    #[error("mesh dimensions mismatch: {0}")]
    Shape(String),
}

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("mesh is empty")]
    EmptyMesh,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Triangulate the admissible part of a surface grid. Each fully
/// admissible quad becomes two triangles; quads touching a flagged point
/// are omitted, leaving holes. Vertex normals are the Gauss-map samples.
pub fn grid_to_mesh(grid: &SurfaceGrid) -> Result<TriangleMesh, MeshError> {
    let (nx, ny) = (grid.nx, grid.ny);
    let mut index = vec![u32::MAX; nx * ny];
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let s = grid.sample(i, j);
            if s.flag == PointFlag::Admissible {
                index[j * nx + i] = positions.len() as u32;
                positions.push(s.position.expect("admissible sample has position"));
                normals.push(s.normal.expect("admissible sample has normal").to_array());
            }
        }
    }
    let mut triangles = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v00 = index[j * nx + i];
            let v10 = index[j * nx + i + 1];
            let v01 = index[(j + 1) * nx + i];
            let v11 = index[(j + 1) * nx + i + 1];
            if v00 != u32::MAX && v10 != u32::MAX && v01 != u32::MAX && v11 != u32::MAX {
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
    }
    if triangles.is_empty() {
        return Err(MeshError::NoAdmissibleQuads);
    }
    Ok(TriangleMesh {
        positions,
        normals: Some(normals),
        triangles,
    })
}

/// Triangulate a full rectangular grid of positions (used for
/// reconstructed surfaces, which have no holes).
pub fn mesh_from_grid_positions(
    nx: usize,
    ny: usize,
    positions: Vec<[f64; 3]>,
    normals: Option<Vec<[f64; 3]>>,
) -> Result<TriangleMesh, MeshError> {
    if positions.len() != nx * ny {
        return Err(MeshError::Shape(format!(
            "{} positions for a {nx}x{ny} grid",
            positions.len()
        )));
    }
    if let Some(n) = &normals {
        if n.len() != positions.len() {
            return Err(MeshError::Shape(format!(
                "{} normals for {} vertices",
                n.len(),
                positions.len()
            )));
        }
    }
    if nx < 2 || ny < 2 {
        return Err(MeshError::NoAdmissibleQuads);
    }
    let mut triangles = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let v00 = (j * nx + i) as u32;
            let v10 = (j * nx + i + 1) as u32;
            let v01 = ((j + 1) * nx + i) as u32;
            let v11 = ((j + 1) * nx + i + 1) as u32;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Ok(TriangleMesh {
        positions,
        normals,
        triangles,
    })
}

impl TriangleMesh {
    /// Signed alignment of a triangle's winding with its vertices' normals;
    /// positive means the winding is consistent with the outward normal.
    pub fn winding_alignment(&self, t: usize) -> Option<f64> {
        let normals = self.normals.as_ref()?;
        let [a, b, c] = self.triangles[t];
        let pa = self.positions[a as usize];
        let face = cross(
            sub(self.positions[b as usize], pa),
            sub(self.positions[c as usize], pa),
        );
        Some(dot(face, normals[a as usize]))
    }
}

/// Wavefront OBJ: `v`/`vn`/`f` records, 1-based indices.
pub fn write_obj<W: Write>(mesh: &TriangleMesh, sink: &mut W) -> Result<(), WriteError> {
    if mesh.positions.is_empty() || mesh.triangles.is_empty() {
        return Err(WriteError::EmptyMesh);
    }
    for p in &mesh.positions {
        writeln!(sink, "v {} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]))?;
    }
    if let Some(normals) = &mesh.normals {
        for n in normals {
            writeln!(sink, "vn {} {} {}", fmt_f64(n[0]), fmt_f64(n[1]), fmt_f64(n[2]))?;
        }
        for t in &mesh.triangles {
            writeln!(
                sink,
                "f {}//{} {}//{} {}//{}",
                t[0] + 1,
                t[0] + 1,
                t[1] + 1,
                t[1] + 1,
                t[2] + 1,
                t[2] + 1
            )?;
        }
    } else {
        for t in &mesh.triangles {
            writeln!(sink, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
    }
    Ok(())
}

/// ASCII PLY 1.0 with double-precision vertex properties.
pub fn write_ply<W: Write>(mesh: &TriangleMesh, sink: &mut W) -> Result<(), WriteError> {
    if mesh.positions.is_empty() || mesh.triangles.is_empty() {
        return Err(WriteError::EmptyMesh);
    }
    writeln!(sink, "ply")?;
    writeln!(sink, "format ascii 1.0")?;
    writeln!(sink, "element vertex {}", mesh.positions.len())?;
    writeln!(sink, "property double x")?;
    writeln!(sink, "property double y")?;
    writeln!(sink, "property double z")?;
    if mesh.normals.is_some() {
        writeln!(sink, "property double nx")?;
        writeln!(sink, "property double ny")?;
        writeln!(sink, "property double nz")?;
    }
    writeln!(sink, "element face {}", mesh.triangles.len())?;
    writeln!(sink, "property list uchar int vertex_indices")?;
    writeln!(sink, "end_header")?;
    match &mesh.normals {
        Some(normals) => {
            for (p, n) in mesh.positions.iter().zip(normals) {
                writeln!(
                    sink,
                    "{} {} {} {} {} {}",
                    fmt_f64(p[0]),
                    fmt_f64(p[1]),
                    fmt_f64(p[2]),
                    fmt_f64(n[0]),
                    fmt_f64(n[1]),
                    fmt_f64(n[2])
                )?;
            }
        }
        None => {
            for p in &mesh.positions {
                writeln!(sink, "{} {} {}", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2]))?;
            }
        }
    }
    for t in &mesh.triangles {
        writeln!(sink, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

/// One residual family in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilySummary {
    pub name: String,
    pub count: usize,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub argmax: Option<(f64, f64)>,
    /// Max-residual ratio between the two stencil steps, when measured.
    pub richardson: Option<f64>,
}

impl FamilySummary {
    pub fn from_field(field: &ResidualField, richardson: Option<f64>) -> Self {
        match field.summary() {
            Some(s) => FamilySummary {
                name: field.name.to_string(),
                count: s.count,
                max: Some(s.max),
                mean: Some(s.mean),
                argmax: Some(s.argmax),
                richardson,
            },
            None => FamilySummary {
                name: field.name.to_string(),
                count: 0,
                max: None,
                mean: None,
                argmax: None,
                richardson,
            },
        }
    }
}

/// Aggregated diagnostics of one run, serialized with a stable key order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub command: String,
    /// Job echo: (key, value) in output order.
    pub job: Vec<(String, String)>,
    /// Point tallies: (key, value) in output order.
    pub counts: Vec<(String, usize)>,
    pub families: Vec<FamilySummary>,
    /// Additional scalar results, e.g. round-trip errors.
    pub extras: Vec<(String, String)>,
}

/// Write the report as a structured text document. Keys appear in a fixed
/// order, so identical reports serialize to identical bytes.
pub fn write_report<W: Write>(report: &DiagnosticsReport, sink: &mut W) -> std::io::Result<()> {
    debug_assert!(
        {
            let mut names: Vec<&str> = report.families.iter().map(|f| f.name.as_str()).collect();
            names.sort_unstable();
            names.windows(2).all(|w| w[0] != w[1])
        },
        "duplicate residual family in report"
    );
    writeln!(sink, "# minweier diagnostics")?;
    writeln!(sink, "command = {}", report.command)?;
    for (k, v) in &report.job {
        writeln!(sink, "{k} = {v}")?;
    }
    for (k, v) in &report.counts {
        writeln!(sink, "{k} = {v}")?;
    }
    for family in &report.families {
        writeln!(sink)?;
        writeln!(sink, "[family {}]", family.name)?;
        writeln!(sink, "count = {}", family.count)?;
        match (family.max, family.mean, family.argmax) {
            (Some(max), Some(mean), Some((ax, ay))) => {
                writeln!(sink, "max = {}", fmt_f64(max))?;
                writeln!(sink, "mean = {}", fmt_f64(mean))?;
                writeln!(sink, "argmax = {} {}", fmt_f64(ax), fmt_f64(ay))?;
            }
            _ => {
                writeln!(sink, "max = n/a")?;
                writeln!(sink, "mean = n/a")?;
                writeln!(sink, "argmax = n/a")?;
            }
        }
        match family.richardson {
            Some(r) => writeln!(sink, "richardson = {}", fmt_f64(r))?,
            None => writeln!(sink, "richardson = n/a")?,
        }
    }
    if !report.extras.is_empty() {
        writeln!(sink)?;
        writeln!(sink, "[extras]")?;
        for (k, v) in &report.extras {
            writeln!(sink, "{k} = {v}")?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsvError {
    #[error("line 1: expected header 'x,y,xi,eta,zeta'")]
    Header,
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("grid inference failed: {0}")]
    Grid(String),
    #[error("samples do not form a uniform grid: {0}")]
    NonUniform(String),
}

const CSV_HEADER: &str = "x,y,xi,eta,zeta";
const GRID_TOL: f64 = 1e-9;

/// Write a Gauss field as CSV with a single header line, samples in
/// row-major order.
pub fn write_gauss_csv<W: Write>(field: &GaussField, sink: &mut W) -> std::io::Result<()> {
    writeln!(sink, "{CSV_HEADER}")?;
    for j in 0..field.ny {
        for i in 0..field.nx {
            let (x, y) = field.param(i, j);
            let n = field.normal(i, j);
            writeln!(
                sink,
                "{},{},{},{},{}",
                fmt_f64(x),
                fmt_f64(y),
                fmt_f64(n.xi),
                fmt_f64(n.eta),
                fmt_f64(n.zeta)
            )?;
        }
    }
    Ok(())
}

/// Read a Gauss field from CSV. Rows may come in any order; the parameter
/// points must form a uniform rectangular grid within an absolute
/// tolerance of 1e-9.
pub fn read_gauss_csv<R: BufRead>(source: R) -> Result<GaussField, CsvError> {
    let mut lines = source.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(e))) => {
            return Err(CsvError::Row {
                line: 1,
                message: e.to_string(),
            })
        }
        None => return Err(CsvError::Header),
    };
    if header.split(',').map(str::trim).collect::<Vec<_>>()
        != CSV_HEADER.split(',').collect::<Vec<_>>()
    {
        return Err(CsvError::Header);
    }

    let mut rows: Vec<(f64, f64, GaussVector)> = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|e| CsvError::Row {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 5 {
            return Err(CsvError::Row {
                line: line_no,
                message: format!("expected 5 columns, found {}", cells.len()),
            });
        }
        let mut vals = [0.0f64; 5];
        for (k, cell) in cells.iter().enumerate() {
            vals[k] = cell.parse().map_err(|_| CsvError::Row {
                line: line_no,
                message: format!("column {} is not a number: '{cell}'", k + 1),
            })?;
        }
        rows.push((
            vals[0],
            vals[1],
            GaussVector::new(vals[2], vals[3], vals[4]),
        ));
    }

    let xs = distinct_sorted(rows.iter().map(|r| r.0));
    let ys = distinct_sorted(rows.iter().map(|r| r.1));
    let (nx, ny) = (xs.len(), ys.len());
    if nx * ny != rows.len() {
        return Err(CsvError::Grid(format!(
            "{} samples cannot fill a {nx}x{ny} grid",
            rows.len()
        )));
    }
    let hx = uniform_spacing(&xs).ok_or_else(|| {
        CsvError::NonUniform("x coordinates are not evenly spaced within 1e-9".into())
    })?;
    let hy = uniform_spacing(&ys).ok_or_else(|| {
        CsvError::NonUniform("y coordinates are not evenly spaced within 1e-9".into())
    })?;

    let mut normals = vec![None::<GaussVector>; nx * ny];
    for (x, y, n) in rows {
        let i = ((x - xs[0]) / hx).round() as usize;
        let j = ((y - ys[0]) / hy).round() as usize;
        let slot = &mut normals[j * nx + i];
        if slot.is_some() {
            return Err(CsvError::Grid(format!(
                "duplicate sample at ({x}, {y})"
            )));
        }
        *slot = Some(n);
    }
    let normals: Vec<GaussVector> = normals.into_iter().map(|n| n.unwrap()).collect();
    GaussField::new(xs[0], ys[0], hx, hy, nx, ny, normals)
        .map_err(|e| CsvError::Grid(e.to_string()))
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        if out.last().map(|&last| x - last > GRID_TOL).unwrap_or(true) {
            out.push(x);
        }
    }
    out
}

fn uniform_spacing(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let h = (values[values.len() - 1] - values[0]) / (values.len() - 1) as f64;
    if h <= 0.0 {
        return None;
    }
    for pair in values.windows(2) {
        if ((pair[1] - pair[0]) - h).abs() > GRID_TOL {
            return None;
        }
    }
    Some(h)
}
