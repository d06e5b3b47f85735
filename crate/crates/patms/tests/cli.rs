//! End-to-end checks of the command-line surface: exit codes, file formats,
//! determinism, and bit-exact agreement with direct library calls.

use std::fs;
use std::path::Path;
use std::process::Command;

fn patms() -> Command {
    Command::new(env!("CARGO_BIN_EXE_patms"))
}

fn run_ok(args: &[&str]) {
    let out = patms().args(args).output().expect("spawn patms");
    assert!(
        out.status.success(),
        "patms {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn usage_errors_exit_2() {
    // missing required --out
    let out = patms().args(["phantom"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty(), "usage goes to stderr");
    // unknown suite value
    let out = patms().args(["selftest", "--suite", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unknown subcommand
    let out = patms().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.afb");
    let out = patms()
        .args([
            "forward",
            "--in",
            missing.to_str().unwrap(),
            "--out",
            dir.path().join("g.afb").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // malformed array file
    let bad = dir.path().join("bad.afb");
    fs::write(&bad, b"not an array").unwrap();
    let out = patms()
        .args([
            "render",
            "--in",
            bad.to_str().unwrap(),
            "--out",
            dir.path().join("x.pgm").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn phantom_is_deterministic_and_padded() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.afb");
    let b = dir.path().join("b.afb");
    for path in [&a, &b] {
        run_ok(&[
            "phantom",
            "--kind",
            "disks",
            "--seed",
            "7",
            "--nx",
            "100",
            "--out",
            path.to_str().unwrap(),
        ]);
    }
    let bytes_a = fs::read(&a).unwrap();
    let bytes_b = fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same args give byte-identical files");
    let (dims, _) = patms::io::read_array(&a).unwrap();
    assert_eq!(dims, vec![200, 200], "padded field is 200x200 for nx=100");
}

fn write_small_pipeline(dir: &Path) -> (String, String) {
    let f = dir.join("f.afb");
    let g = dir.join("g.afb");
    run_ok(&[
        "phantom",
        "--kind",
        "smooth-bump",
        "--nx",
        "32",
        "--out",
        f.to_str().unwrap(),
    ]);
    run_ok(&[
        "forward",
        "--in",
        f.to_str().unwrap(),
        "--detectors",
        "60",
        "--nt",
        "48",
        "--out",
        g.to_str().unwrap(),
    ]);
    (f.to_str().unwrap().to_string(), g.to_str().unwrap().to_string())
}

#[test]
fn forward_dims_and_library_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let (f_path, g_path) = write_small_pipeline(dir.path());
    let (dims, data) = patms::io::read_array(Path::new(&g_path)).unwrap();
    assert_eq!(dims, vec![60, 48]);

    // direct library call produces bit-identical data
    let (fdims, fdata) = patms::io::read_array(Path::new(&f_path)).unwrap();
    let grid = patms::grid::Grid2D::new(fdims[0] / 2);
    let field = patms::grid::ScalarField2D::from_values(grid, fdata).unwrap();
    let ring = patms::wave::DetectorRing::new(60);
    let time = patms::wave::TimeGrid::new(48, grid.spacing());
    let g = patms::wave::wave_forward(&field, &ring, &time).unwrap();
    assert_eq!(g.values(), &data[..], "CLI equals library bit-exactly");
}

#[test]
fn measure_factor_one_is_passthrough_and_matrix_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let (_f, g_path) = write_small_pipeline(dir.path());
    let y1 = dir.path().join("y1.afb");
    run_ok(&[
        "measure",
        "--in",
        &g_path,
        "--matrix",
        "subsample",
        "--factor",
        "1",
        "--out",
        y1.to_str().unwrap(),
    ]);
    let (_, g_data) = patms::io::read_array(Path::new(&g_path)).unwrap();
    let (_, y_data) = patms::io::read_array(&y1).unwrap();
    assert_eq!(g_data, y_data, "factor 1 passes data through");

    // gaussian matrix: deterministic per seed, reloadable, reapplication identical
    let y2 = dir.path().join("y2.afb");
    let y3 = dir.path().join("y3.afb");
    let mat_path = dir.path().join("mat.afb");
    run_ok(&[
        "measure",
        "--in",
        &g_path,
        "--matrix",
        "gaussian",
        "--m",
        "15",
        "--seed",
        "11",
        "--save-matrix",
        mat_path.to_str().unwrap(),
        "--out",
        y2.to_str().unwrap(),
    ]);
    run_ok(&[
        "measure",
        "--in",
        &g_path,
        "--matrix",
        "gaussian",
        "--m",
        "15",
        "--seed",
        "11",
        "--out",
        y3.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(&y2).unwrap(), fs::read(&y3).unwrap());

    let (mdims, mdata) = patms::io::read_array(&mat_path).unwrap();
    assert_eq!(mdims, vec![15, 60]);
    let reloaded = patms::measure::MeasurementMatrix::from_dense(15, 60, mdata).unwrap();
    let direct = patms::measure::MeasurementMatrix::gaussian(15, 60, 11);
    assert_eq!(reloaded.to_dense(), direct.to_dense());
}

#[test]
fn reconstruct_writes_outputs_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let (f_path, g_path) = write_small_pipeline(dir.path());
    let y = dir.path().join("y.afb");
    run_ok(&[
        "measure",
        "--in",
        &g_path,
        "--matrix",
        "subsample",
        "--factor",
        "2",
        "--out",
        y.to_str().unwrap(),
    ]);
    let rec = dir.path().join("rec.afb");
    let factors = dir.path().join("factors");
    let metrics = dir.path().join("metrics.csv");
    run_ok(&[
        "reconstruct",
        "--y",
        y.to_str().unwrap(),
        "--factor",
        "2",
        "--method",
        "multiscale",
        "--scales",
        "3",
        "--iters",
        "15",
        "--nx",
        "32",
        "--out",
        rec.to_str().unwrap(),
        "--save-factors",
        factors.to_str().unwrap(),
        "--metrics-out",
        metrics.to_str().unwrap(),
        "--truth",
        &f_path,
    ]);
    let (dims, _) = patms::io::read_array(&rec).unwrap();
    assert_eq!(dims, vec![64, 64]);
    for j in 0..3 {
        assert!(factors.join(format!("factor_{j}.afb")).exists(), "factor file {j}");
    }
    let text = fs::read_to_string(&metrics).unwrap();
    assert!(text.starts_with("key,value\n"));
    assert!(text.contains("rel_l2_error,"));
    assert!(text.contains("iters_scale_0,"));
    assert!(text.contains("iters_scale_2,"));
    assert!(!text.contains('\r'), "LF line endings only");

    // l1 method dispatches and writes a field of the same shape
    let rec2 = dir.path().join("rec2.afb");
    run_ok(&[
        "reconstruct",
        "--y",
        y.to_str().unwrap(),
        "--factor",
        "2",
        "--method",
        "l1",
        "--iters",
        "15",
        "--nx",
        "32",
        "--out",
        rec2.to_str().unwrap(),
    ]);
    let (dims2, _) = patms::io::read_array(&rec2).unwrap();
    assert_eq!(dims2, vec![64, 64]);
}

#[test]
fn render_writes_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let arr = dir.path().join("x.afb");
    patms::io::write_array(&arr, &[2, 3], &[0.0, 0.25, 0.5, 0.75, 1.0, -1.0]).unwrap();
    let img = dir.path().join("x.pgm");
    run_ok(&["render", "--in", arr.to_str().unwrap(), "--out", img.to_str().unwrap(), "--norm", "minmax"]);
    let bytes = fs::read(&img).unwrap();
    assert!(bytes.starts_with(b"P5\n3 2\n65535\n"));
    assert_eq!(bytes.len(), b"P5\n3 2\n65535\n".len() + 12);
    // determinism
    let img2 = dir.path().join("x2.pgm");
    run_ok(&["render", "--in", arr.to_str().unwrap(), "--out", img2.to_str().unwrap(), "--norm", "minmax"]);
    assert_eq!(bytes, fs::read(&img2).unwrap());
}

#[test]
fn selftest_adjoint_suite_passes_quickly() {
    let out = patms()
        .args(["selftest", "--suite", "adjoint", "--nx", "24"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[adjoint]"));
    assert!(text.contains("checks passed"));
}
