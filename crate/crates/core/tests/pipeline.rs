//! Cross-module integration: job -> grid -> mesh -> serialization, and
//! verification of data whose strong regularity fails everywhere.

use minweier_core::geometry::{residual_survey, GeometryChecks, SurveyParams};
use minweier_core::io::{grid_to_mesh, write_obj, write_ply};
use minweier_core::{
    generate_grid, parse_expr, Complex64, PointFlag, QuadConfig, Rect, WeierstrassData,
    WeierstrassJob,
};

#[test]
fn enneper_grid_to_mesh_to_files() {
    let job = WeierstrassJob::new(
        parse_expr("z").unwrap(),
        Complex64::new(0.6, 0.6),
        Rect::new(0.1, 1.1, 0.1, 1.1),
        (9, 9),
    );
    let grid = generate_grid(&job).unwrap();
    assert_eq!(grid.flag_counts().admissible, 81);

    let mesh = grid_to_mesh(&grid).unwrap();
    assert_eq!(mesh.positions.len(), 81);
    assert_eq!(mesh.triangles.len(), 2 * 8 * 8);
    for t in 0..mesh.triangles.len() {
        assert!(mesh.winding_alignment(t).unwrap() > 0.0);
    }

    let mut obj = Vec::new();
    write_obj(&mesh, &mut obj).unwrap();
    let obj = String::from_utf8(obj).unwrap();
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 81);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 128);

    let mut ply = Vec::new();
    write_ply(&mesh, &mut ply).unwrap();
    let ply = String::from_utf8(ply).unwrap();
    assert!(ply.contains("element vertex 81"));
    assert!(ply.contains("element face 128"));
}

/// The exponential datum fails strong regularity at every point (its
/// curvature function depends on x alone), which excludes it from mesh
/// generation but not from verification: the canonical identities hold on
/// the generated immersion regardless.
#[test]
fn catenoid_verifies_despite_regularity_failure() {
    let expr = parse_expr("exp(z)").unwrap();
    let job = WeierstrassJob::new(
        expr.clone(),
        Complex64::new(0.5, 0.5),
        Rect::new(0.1, 0.9, 0.1, 0.9),
        (5, 5),
    );
    let flags = minweier_core::validate_domain(&job).unwrap();
    assert!(flags.iter().all(|&f| f == PointFlag::RegFloor));
    let grid = generate_grid(&job).unwrap();
    assert_eq!(grid.flag_counts().admissible, 0);

    let data = WeierstrassData::new(expr);
    let checks = GeometryChecks::new(&data, QuadConfig::default(), 1e-12);
    let survey = residual_survey(
        &checks,
        &SurveyParams {
            domain: job.domain,
            grid: (5, 5),
            h: 1e-3,
            reg_floor: 1e-12,
        },
    );
    assert_eq!(survey.refused, 0);
    assert_eq!(survey.failed, 0);
    assert_eq!(survey.subclass.degenerate, 25);
    for name in [
        "canonical_E",
        "canonical_F",
        "canonical_G",
        "canonical_e",
        "canonical_f",
        "canonical_g",
        "frame",
        "gaussmap_system",
        "mean_curvature",
    ] {
        let max = survey.field(name).summary().unwrap().max;
        assert!(max < 1e-4, "{name}: {max:e}");
    }
}

/// Where the straight segment would skirt the degenerate point of the
/// quadratic datum, an explicit polyline on the same side agrees with a
/// straight path that stays admissible.
#[test]
fn polyline_override_matches_straight_path() {
    let data = WeierstrassData::new(parse_expr("z^2/2").unwrap());
    let quad = QuadConfig::default();
    let a = Complex64::new(0.8, 0.7);
    let b = Complex64::new(1.6, 1.5);
    let elbow = Complex64::new(1.5, 0.8);
    let straight = data.integrate_position(a, b, &quad, 1e-12).unwrap();
    let bent = data
        .integrate_position_polyline(&[a, elbow, b], &quad, 1e-12)
        .unwrap();
    for k in 0..3 {
        assert!((straight[k] - bent[k]).abs() < 10.0 * quad.tol);
    }
}
