//! Scenario loading, classification of the catalog and report emission.

use std::io::Write;

use hyperkin::app::report::{emit_report, Format};
use hyperkin::app::scenario::builtin;
use hyperkin::app::verify::invariant_suite;
use hyperkin::{builtin_scenarios, load_scenario, run_grid, Error, Report, Route, RunOptions};

const PLANE: &str = r#"
schema = "hyperkin-scenario/1"
name = "plane"
coords = ["u", "v"]
components = ["u", "v", "t"]
domain = [[0, 1], [0, 1]]
grid = [4, 4]
[ambient]
kind = "euclidean"
"#;

fn file_with(src: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    f.write_all(src.as_bytes()).unwrap();
    f
}

fn coarse(name: &str) -> Report {
    let s = builtin(name).unwrap();
    let grid = Some(vec![7; s.motion.m()]);
    run_grid(&s, &RunOptions { grid, ..Default::default() }).unwrap()
}

#[test]
fn loads_a_scenario_file() {
    let f = file_with(PLANE);
    let s = load_scenario(f.path()).unwrap();
    assert_eq!(s.name, "plane");
    assert_eq!(s.motion.m(), 2);
    let r = run_grid(&s, &RunOptions::default()).unwrap();
    assert_eq!(r.points.len(), 16);
    assert!(r.verdict.affine && r.verdict.isometric);
}

#[test]
fn unknown_variable_is_reported_with_its_field() {
    let f = file_with(&PLANE.replace("\"t\"]", "\"t*w\"]"));
    match load_scenario(f.path()).unwrap_err() {
        Error::Validation { field, message } => {
            assert_eq!(field, "components[3]");
            assert!(message.contains('w'), "{message}");
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn ambient_dimension_must_match_components() {
    let f = file_with(&PLANE.replace("kind = \"euclidean\"", "kind = \"euclidean\"\ndim = 4"));
    assert!(matches!(load_scenario(f.path()), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn missing_file_names_the_path() {
    let err = load_scenario("/nonexistent/dir/none.toml").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/dir/none.toml"));
}

#[test]
fn toml_syntax_error_has_line_and_column() {
    let f = file_with("name = \"x\"\ncoords = [\"u\",\n  = 3\n");
    match load_scenario(f.path()).unwrap_err() {
        Error::ScenarioParse { path, message } => {
            assert!(path.ends_with(".toml"));
            assert!(message.contains("line ") && message.contains("column "), "{message}");
        }
        e => panic!("unexpected {e:?}"),
    }
}

#[test]
fn catalog_classification() {
    for name in ["balloon", "cylinder-unroll", "rigid-translation", "sphere-killing-rotation", "parallel-sphere"] {
        assert!(coarse(name).verdict.affine, "{name} should be affine");
    }
    for name in ["parallel-ellipsoid", "normal-motion-vn-u", "hyperbolic-circle"] {
        assert!(!coarse(name).verdict.affine, "{name} should not be affine");
    }
    assert!(coarse("rigid-translation").verdict.isometric);
    assert!(!coarse("balloon").verdict.isometric);
}

#[test]
fn curved_ambient_routes_exclude_the_euclidean_form() {
    let r = coarse("hyperbolic-circle");
    let routes = &r.aggregates.routes;
    assert!(routes.contains(&Route::Normal));
    assert!(routes.contains(&Route::NormalExpanded));
    assert!(!routes.contains(&Route::EuclideanNormal));
    let flat = coarse("parallel-sphere");
    assert!(flat.aggregates.routes.contains(&Route::EuclideanNormal));
    assert!(flat.aggregates.routes.contains(&Route::Parallel));
}

#[test]
fn json_is_deterministic() {
    let a = coarse("balloon").to_json().unwrap();
    let b = coarse("balloon").to_json().unwrap();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema"], "hyperkin-report/1");
}

#[test]
fn csv_summary_has_a_header_row() {
    let csv = coarse("cylinder-unroll").to_csv().unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("point,"), "{header}");
    assert_eq!(lines.count(), 49);
}

#[test]
fn unwritable_output_echoes_the_path() {
    let r = coarse("rigid-translation");
    let err = emit_report(&r, Format::Json, "/nonexistent/dir/out.json").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("/nonexistent/dir/out.json"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    emit_report(&r, Format::Json, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), r.to_json().unwrap());
}

#[test]
fn every_builtin_passes_its_invariants() {
    for s in builtin_scenarios() {
        let grid = Some(vec![5; s.motion.m()]);
        let r = run_grid(&s, &RunOptions { grid, fd_validate: true, ..Default::default() }).unwrap();
        for c in invariant_suite(&r) {
            assert!(c.passed, "{} {}: {:e} > {:e}", s.name, c.name, c.residual, c.tolerance);
        }
    }
}
