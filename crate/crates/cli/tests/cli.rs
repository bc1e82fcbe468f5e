use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cartan_sym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartan-sym"))
        .args(args)
        .env_remove("CARTAN_SYM_THREADS")
        .output()
        .expect("spawn cartan-sym")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

fn example(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../docs/examples")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cartan-sym-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::File::create(&path)
        .unwrap()
        .write_all(contents.as_bytes())
        .unwrap();
    path
}

#[test]
fn boost_is_symmetric_in_both_modes() {
    let out = cartan_sym(&[
        "check",
        "--geometry",
        "minkowski4",
        "--vector",
        "boost_tx",
        "--mode",
        "both",
        "--report",
        "json",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let report = json(&out);
    assert_eq!(report["verdict"], "symmetric");
    let keys: Vec<_> = report["residuals"]
        .as_object()
        .unwrap()
        .keys()
        .cloned()
        .collect();
    assert_eq!(keys, ["lie_A", "lie_g", "tangency"]);
}

#[test]
fn dilation_fails_with_normalized_two() {
    let out = cartan_sym(&[
        "check",
        "--geometry",
        "minkowski4",
        "--vector",
        "dilation",
        "--report",
        "json",
    ]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["verdict"], "not_symmetric");
    let n = report["residuals"]["lie_g"]["normalized"].as_f64().unwrap();
    assert!((n - 2.0).abs() < 1e-12, "{n}");
}

#[test]
fn randers_rotation_is_not_an_isometry() {
    let out = cartan_sym(&[
        "check",
        "--geometry",
        "finsler_randers",
        "--vector",
        "rot_xy",
    ]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
}

#[test]
fn json_is_byte_identical_across_runs_and_threads() {
    let args = [
        "check",
        "--geometry",
        "schwarzschild",
        "--vector",
        "schw_rot_x",
        "--mode",
        "both",
        "--report",
        "json",
    ];
    let a = cartan_sym(&args);
    let b = cartan_sym(&args);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    let c = cartan_sym(&threaded);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn text_report_names_the_verdict() {
    let out = cartan_sym(&["check", "--geometry", "minkowski4", "--vector", "rot_xy"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("symmetric"), "{}", stdout(&out));
}

#[test]
fn bad_input_exits_three_with_error_on_stderr() {
    let unknown = cartan_sym(&[
        "check",
        "--geometry",
        "no_such_geometry",
        "--vector",
        "rot_xy",
    ]);
    assert_eq!(code(&unknown), 3);
    assert!(String::from_utf8_lossy(&unknown.stderr).starts_with("error:"));

    let broken = temp_file("broken.geom", "kind = riemannian\n");
    let out = cartan_sym(&[
        "check",
        "--geometry",
        broken.to_str().unwrap(),
        "--vector",
        "rot_xy",
    ]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let mismatch = cartan_sym(&[
        "check",
        "--geometry",
        "minkowski4",
        "--vector",
        "sph_shift_theta",
    ]);
    assert_eq!(code(&mismatch), 3);

    let usage = cartan_sym(&["check", "--geometry", "minkowski4"]);
    assert_eq!(code(&usage), 3);

    let tol = cartan_sym(&[
        "check",
        "--geometry",
        "minkowski4",
        "--vector",
        "rot_xy",
        "--tol",
        "-1",
    ]);
    assert_eq!(code(&tol), 3);
}

#[test]
fn example_files_check_from_disk() {
    let rn = example("reissner_nordstrom.geom");
    let out = cartan_sym(&[
        "check",
        "--geometry",
        &rn,
        "--vector",
        &example("rn_spin.vec"),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let randers = example("randers_plane.geom");
    assert_eq!(
        code(&cartan_sym(&[
            "check",
            "--geometry",
            &randers,
            "--vector",
            "e2_rot"
        ])),
        1
    );
    assert_eq!(
        code(&cartan_sym(&[
            "check",
            "--geometry",
            &randers,
            "--vector",
            "e2_trans_y"
        ])),
        0
    );
}

#[test]
fn list_shows_the_catalog() {
    let out = cartan_sym(&["list"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for name in [
        "minkowski4",
        "schwarzschild",
        "weitzenbock_identity",
        "boost_tx",
        "schw_rot_x",
    ] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn matrix_agrees_everywhere() {
    let out = cartan_sym(&["matrix"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let summary = text.lines().last().unwrap();
    assert!(summary.contains("0 disagree, 0 inconclusive"), "{summary}");
}

#[test]
fn oracle_converges_on_builtin_pairs() {
    let out = cartan_sym(&["oracle"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let single = cartan_sym(&[
        "oracle",
        "--geometry",
        "minkowski4",
        "--vector",
        "dilation",
        "--points",
        "4",
    ]);
    assert_eq!(code(&single), 0, "{}", stdout(&single));
    let affine = cartan_sym(&["oracle", "--geometry", "flat_affine", "--vector", "trans_x"]);
    assert_eq!(code(&affine), 3);
}
