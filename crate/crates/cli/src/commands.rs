//! The five subcommands. Each returns its exit code (0 success, 2 empty
//! admissible set) or an error message that the caller reports with exit
//! code 1.

use crate::config::{Format, Settings};
use minweier_core::geometry::{
    pde_survey, residual_survey, richardson_ratios, GeometryChecks, SubclassTally, Survey,
    SurveyParams,
};
use minweier_core::io::{
    fmt_f64, grid_to_mesh, mesh_from_grid_positions, read_gauss_csv, write_gauss_csv, write_obj,
    write_ply, write_report, DiagnosticsReport, FamilySummary, MeshError, TriangleMesh,
};
use minweier_core::reconstruct::ReconstructError;
use minweier_core::weierstrass::FlagCounts;
use minweier_core::{
    generate_grid, parse_expr, Complex64, GaussField, QuadConfig, WeierstrassData, WeierstrassJob,
};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

fn build_job(s: &Settings) -> Result<WeierstrassJob, String> {
    let src = s
        .expr
        .as_deref()
        .ok_or("missing required config key: expr")?;
    let expr = parse_expr(src).map_err(|e| format!("expr: {e}"))?;
    let mut job = WeierstrassJob::new(expr, s.z0_point(), s.domain, s.grid);
    job.quad_tol = s.quad_tol;
    job.mu_floor = s.mu_floor;
    job.reg_floor = s.reg_floor;
    job.validate().map_err(|e| e.to_string())?;
    Ok(job)
}

fn job_echo(job: &WeierstrassJob, fd_step: Option<f64>) -> Vec<(String, String)> {
    let mut echo = vec![
        ("expr".to_string(), job.expr.to_string()),
        (
            "z0".to_string(),
            format!("{} {}", fmt_f64(job.z0.re), fmt_f64(job.z0.im)),
        ),
        (
            "domain".to_string(),
            format!(
                "{} {} {} {}",
                fmt_f64(job.domain.x_min),
                fmt_f64(job.domain.x_max),
                fmt_f64(job.domain.y_min),
                fmt_f64(job.domain.y_max)
            ),
        ),
        ("grid".to_string(), format!("{} {}", job.grid.0, job.grid.1)),
        ("quad_tol".to_string(), fmt_f64(job.quad_tol)),
        ("mu_floor".to_string(), fmt_f64(job.mu_floor)),
        ("reg_floor".to_string(), fmt_f64(job.reg_floor)),
    ];
    if let Some(h) = fd_step {
        echo.push(("fd_step".to_string(), fmt_f64(h)));
    }
    echo
}

fn flag_counts_echo(counts: &FlagCounts) -> Vec<(String, usize)> {
    vec![
        ("points_total".to_string(), counts.total()),
        ("points_admissible".to_string(), counts.admissible),
        ("points_mu_floor".to_string(), counts.mu_floor),
        ("points_reg_floor".to_string(), counts.reg_floor),
        ("points_pole".to_string(), counts.pole),
    ]
}

fn subclass_echo(tally: &SubclassTally) -> Vec<(String, usize)> {
    vec![
        ("subclass_positive".to_string(), tally.positive),
        ("subclass_negative".to_string(), tally.negative),
        ("subclass_degenerate".to_string(), tally.degenerate),
    ]
}

fn survey_families(survey: &Survey, ratios: Option<&[(&'static str, Option<f64>)]>) -> Vec<FamilySummary> {
    survey
        .fields
        .iter()
        .map(|field| {
            let richardson = ratios
                .and_then(|rs| rs.iter().find(|(name, _)| *name == field.name))
                .and_then(|(_, r)| *r);
            FamilySummary::from_field(field, richardson)
        })
        .collect()
}

fn write_report_file(out: &Path, report: &DiagnosticsReport) -> Result<(), String> {
    std::fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let path = out.join("report.txt");
    let mut sink = BufWriter::new(
        File::create(&path).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
    );
    write_report(report, &mut sink).map_err(|e| format!("cannot write report: {e}"))?;
    sink.flush().map_err(|e| e.to_string())?;
    Ok(())
}

fn write_mesh_files(out: &Path, formats: &[Format], mesh: &TriangleMesh) -> Result<(), String> {
    std::fs::create_dir_all(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    for format in formats {
        match format {
            Format::Obj => {
                let path = out.join("surface.obj");
                let mut sink = BufWriter::new(
                    File::create(&path)
                        .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                );
                write_obj(mesh, &mut sink).map_err(|e| e.to_string())?;
                sink.flush().map_err(|e| e.to_string())?;
            }
            Format::Ply => {
                let path = out.join("surface.ply");
                let mut sink = BufWriter::new(
                    File::create(&path)
                        .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
                );
                write_ply(mesh, &mut sink).map_err(|e| e.to_string())?;
                sink.flush().map_err(|e| e.to_string())?;
            }
        }
    }
    Ok(())
}

/// Generate a surface: mesh plus full diagnostics.
pub fn cmd_generate(s: &Settings) -> Result<i32, String> {
    let job = build_job(s)?;
    let grid = generate_grid(&job).map_err(|e| e.to_string())?;
    let counts = grid.flag_counts();
    let h = s.fd_step_value();

    let data = WeierstrassData::new(job.expr.clone());
    let checks = GeometryChecks::new(&data, QuadConfig::with_tol(job.quad_tol), job.mu_floor);
    let survey = residual_survey(
        &checks,
        &SurveyParams {
            domain: job.domain,
            grid: job.grid,
            h,
            reg_floor: job.reg_floor,
        },
    );

    match grid_to_mesh(&grid) {
        Ok(mesh) => write_mesh_files(&s.out, &s.formats, &mesh)?,
        Err(MeshError::NoAdmissibleQuads) => {
            eprintln!("note: no admissible quads; mesh files skipped");
        }
        Err(e) => return Err(e.to_string()),
    }

    let mut report_counts = flag_counts_echo(&counts);
    report_counts.extend(subclass_echo(&survey.subclass));
    let report = DiagnosticsReport {
        command: "generate".into(),
        job: job_echo(&job, Some(h)),
        counts: report_counts,
        families: survey_families(&survey, None),
        extras: vec![],
    };
    write_report_file(&s.out, &report)?;
    Ok(if counts.admissible == 0 { 2 } else { 0 })
}

/// Run every residual family at two stencil steps and report convergence
/// ratios.
pub fn cmd_verify(s: &Settings) -> Result<i32, String> {
    let job = build_job(s)?;
    let h = s.fd_step_value();
    let data = WeierstrassData::new(job.expr.clone());
    let checks = GeometryChecks::new(&data, QuadConfig::with_tol(job.quad_tol), job.mu_floor);
    let mut params = SurveyParams {
        domain: job.domain,
        grid: job.grid,
        h,
        reg_floor: job.reg_floor,
    };
    let coarse = residual_survey(&checks, &params);
    params.h = 0.5 * h;
    let fine = residual_survey(&checks, &params);
    let ratios = richardson_ratios(&coarse, &fine);

    let total = job.grid.0 * job.grid.1;
    let mut counts = vec![
        ("points_total".to_string(), total),
        ("points_refused".to_string(), coarse.refused),
        ("points_failed".to_string(), coarse.failed),
    ];
    counts.extend(subclass_echo(&coarse.subclass));
    let report = DiagnosticsReport {
        command: "verify".into(),
        job: job_echo(&job, Some(h)),
        counts,
        families: survey_families(&coarse, Some(&ratios)),
        extras: vec![("fd_step_fine".to_string(), fmt_f64(0.5 * h))],
    };
    write_report_file(&s.out, &report)?;
    Ok(if coarse.refused == total { 2 } else { 0 })
}

/// Natural-PDE residuals only.
pub fn cmd_pde(s: &Settings) -> Result<i32, String> {
    let job = build_job(s)?;
    let h = s.fd_step_value();
    let data = WeierstrassData::new(job.expr.clone());
    let checks = GeometryChecks::new(&data, QuadConfig::with_tol(job.quad_tol), job.mu_floor);
    let (analytic, fd, refused) = pde_survey(&checks, &job.domain, job.grid, h);

    let total = job.grid.0 * job.grid.1;
    let report = DiagnosticsReport {
        command: "pde".into(),
        job: job_echo(&job, Some(h)),
        counts: vec![
            ("points_total".to_string(), total),
            ("points_refused".to_string(), refused),
        ],
        families: vec![
            FamilySummary::from_field(&analytic, None),
            FamilySummary::from_field(&fd, None),
        ],
        extras: vec![],
    };
    write_report_file(&s.out, &report)?;
    Ok(if refused == total { 2 } else { 0 })
}

/// Rebuild a surface from Gauss-map samples (CSV input), or round-trip the
/// generated map when only an expression is configured.
pub fn cmd_reconstruct(s: &Settings) -> Result<i32, String> {
    let (field, data) = match &s.gauss_csv {
        Some(path) => {
            let file =
                File::open(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let field = read_gauss_csv(BufReader::new(file)).map_err(|e| e.to_string())?;
            (field, None)
        }
        None => {
            let src = s
                .expr
                .as_deref()
                .ok_or("missing required config key: expr (or gauss_csv)")?;
            let expr = parse_expr(src).map_err(|e| format!("expr: {e}"))?;
            let data = WeierstrassData::new(expr);
            let field = GaussField::sample(&data, &s.domain, s.grid.0, s.grid.1)
                .map_err(|e| e.to_string())?;
            (field, Some(data))
        }
    };

    let validation = field.validate(s.nu_floor);
    let mut echo = vec![(
        "field".to_string(),
        format!(
            "{}x{} from ({}, {}) spacing ({}, {})",
            field.nx,
            field.ny,
            fmt_f64(field.x0),
            fmt_f64(field.y0),
            fmt_f64(field.hx),
            fmt_f64(field.hy)
        ),
    )];
    if let Some(path) = &s.gauss_csv {
        echo.push(("gauss_csv".to_string(), path.display().to_string()));
    }
    echo.push((
        "base".to_string(),
        format!("{} {}", s.base.0, s.base.1),
    ));
    echo.push(("nu_floor".to_string(), fmt_f64(s.nu_floor)));
    let counts = vec![
        ("samples_total".to_string(), field.nx * field.ny),
        ("norm_violations".to_string(), validation.norm_violations.len()),
        ("nu_flagged".to_string(), validation.flagged.len()),
    ];
    let mut families = vec![
        FamilySummary::from_field(&validation.res_iso, None),
        FamilySummary::from_field(&validation.res_orth, None),
    ];
    let mut extras = Vec::new();

    let rec = match field.integrate(s.base, s.nu_floor) {
        Ok(rec) => rec,
        Err(e @ ReconstructError::FlaggedRegion { .. }) => {
            // report what validation saw, then signal the empty admissible set
            let report = DiagnosticsReport {
                command: "reconstruct".into(),
                job: echo,
                counts,
                families,
                extras,
            };
            write_report_file(&s.out, &report)?;
            eprintln!("error: {e}");
            return Ok(2);
        }
        Err(e) => return Err(e.to_string()),
    };
    extras.push(("commutator".to_string(), fmt_f64(rec.commutator)));

    // Round-trip mode: save the sampled field beside the outputs and
    // compare against quadrature positions pinned at the same base sample.
    if let Some(data) = &data {
        std::fs::create_dir_all(&s.out)
            .map_err(|e| format!("cannot create {}: {e}", s.out.display()))?;
        let csv_path = s.out.join("gauss.csv");
        let mut sink = BufWriter::new(
            File::create(&csv_path)
                .map_err(|e| format!("cannot write {}: {e}", csv_path.display()))?,
        );
        write_gauss_csv(&field, &mut sink).map_err(|e| e.to_string())?;
        sink.flush().map_err(|e| e.to_string())?;

        let (bx, by) = field.param(s.base.0, s.base.1);
        let mut job = WeierstrassJob::new(
            data.expr().clone(),
            Complex64::new(bx, by),
            s.domain,
            s.grid,
        );
        job.quad_tol = s.quad_tol;
        job.mu_floor = s.mu_floor;
        job.reg_floor = s.reg_floor;
        let grid = generate_grid(&job).map_err(|e| e.to_string())?;
        let mut interior: f64 = 0.0;
        let mut overall: f64 = 0.0;
        let mut compared = 0usize;
        for j in 0..field.ny {
            for i in 0..field.nx {
                let Some(want) = grid.sample(i, j).position else {
                    continue;
                };
                compared += 1;
                let got = rec.positions[j * field.nx + i];
                let err = minweier_core::vec3::norm(minweier_core::vec3::sub(got, want));
                overall = overall.max(err);
                if i > 0 && i < field.nx - 1 && j > 0 && j < field.ny - 1 {
                    interior = interior.max(err);
                }
            }
        }
        extras.push(("round_trip_points".to_string(), compared.to_string()));
        extras.push(("round_trip_max_error".to_string(), fmt_f64(interior)));
        extras.push(("round_trip_max_error_with_boundary".to_string(), fmt_f64(overall)));
        families.push(FamilySummary {
            name: "round_trip".into(),
            count: compared,
            max: Some(overall),
            mean: None,
            argmax: None,
            richardson: None,
        });
    }

    let normals: Vec<[f64; 3]> = field.normals().iter().map(|n| n.to_array()).collect();
    let mesh = mesh_from_grid_positions(field.nx, field.ny, rec.positions.clone(), Some(normals))
        .map_err(|e| e.to_string())?;
    write_mesh_files(&s.out, &s.formats, &mesh)?;

    let report = DiagnosticsReport {
        command: "reconstruct".into(),
        job: echo,
        counts,
        families,
        extras,
    };
    write_report_file(&s.out, &report)?;
    Ok(0)
}

/// Subclass sign of `nu_x nu_y` over the grid.
pub fn cmd_classify(s: &Settings) -> Result<i32, String> {
    let job = build_job(s)?;
    let data = WeierstrassData::new(job.expr.clone());
    let checks = GeometryChecks::new(&data, QuadConfig::with_tol(job.quad_tol), job.mu_floor);

    use minweier_core::weierstrass::linspace;
    use rayon::prelude::*;
    let (nx, ny) = job.grid;
    let xs = linspace(job.domain.x_min, job.domain.x_max, nx);
    let ys = linspace(job.domain.y_min, job.domain.y_max, ny);
    let classes: Vec<Option<minweier_core::Subclass>> = (0..nx * ny)
        .into_par_iter()
        .map(|idx| {
            let z = Complex64::new(xs[idx % nx], ys[idx / nx]);
            checks.classify_subclass(z, job.reg_floor).ok()
        })
        .collect();
    let mut tally = SubclassTally::default();
    let mut refused = 0;
    for class in classes {
        match class {
            Some(minweier_core::Subclass::Positive) => tally.positive += 1,
            Some(minweier_core::Subclass::Negative) => tally.negative += 1,
            Some(minweier_core::Subclass::Degenerate) => tally.degenerate += 1,
            None => refused += 1,
        }
    }

    let total = nx * ny;
    let mut counts = vec![
        ("points_total".to_string(), total),
        ("points_refused".to_string(), refused),
    ];
    counts.extend(subclass_echo(&tally));
    let report = DiagnosticsReport {
        command: "classify".into(),
        job: job_echo(&job, None),
        counts,
        families: vec![],
        extras: vec![],
    };
    write_report_file(&s.out, &report)?;
    Ok(if refused == total { 2 } else { 0 })
}

