use std::path::PathBuf;
use std::process::Command;

use cylint::cli::*;
use cylint::dynamics::parse_csv;
use cylint::verify::VerifyJson;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("cylint").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn tmp_file(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn list_and_describe() {
    let (code, out, _) = run(&["list"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().filter(|l| l.starts_with('F')).count(), 8);
    assert_eq!(run(&["list"]).1, out);
    let (code, out, _) = run(&["describe", "--family", "F2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("f1 < 0, f1/8 < beta1 < 0"));
    let (code, _, err) = run(&["describe", "--family", "F9"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("F9"));
}

#[test]
fn special_values() {
    assert_eq!(run(&["special", "K", "--k", "0"]).1, "1.5707963267948966\n");
    assert_eq!(
        run(&["special", "sn", "--u", "1", "--k", "1"]).1,
        "0.7615941559557649\n"
    );
    assert_eq!(run(&["special", "K", "--k", "1"]).0, EXIT_USAGE);
    assert_eq!(run(&["special", "dn", "--u", "1", "--k", "1.5"]).0, EXIT_USAGE);
}

#[test]
fn eval_reports_fields_and_integrals() {
    let (code, out, _) = run(&[
        "eval",
        "--family",
        "F1",
        "--r",
        "1.5",
        "--phi",
        "0.2",
        "--z",
        "-0.3",
        "--momenta",
        "0.1,-0.2,0.3",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    for key in ["B", "W", "H", "X1", "X2"] {
        assert!(out.contains(key), "{key} missing in {out}");
    }
    assert_eq!(
        run(&["eval", "--family", "F1", "--r", "1.5", "--momenta", "0.1,0.2"]).0,
        EXIT_USAGE
    );
    assert_eq!(run(&["eval", "--family", "F1", "--r", "0"]).0, EXIT_USAGE);
}

#[test]
fn larmor_simulation_closes() {
    let params = tmp_file("larmor.params", "mu0 = 1\n");
    let init = tmp_file("larmor.init", "r = 2\nphi = 0\nZ = 0\np_r = 0\np_phi = -4\np_Z = 0\n");
    let t_end = std::f64::consts::TAU.to_string();
    let args = [
        "simulate",
        "--family",
        "F1",
        "--params-file",
        params.to_str().unwrap(),
        "--initial-file",
        init.to_str().unwrap(),
        "--t-end",
        &t_end,
    ];
    let (code, out, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = parse_csv(&out).unwrap();
    assert_eq!(&header[..4], ["t", "r", "phi", "Z"]);
    let last = rows.last().unwrap();
    let (x, y) = (last[1] * last[2].cos(), last[1] * last[2].sin());
    assert!(((x - 2.0).powi(2) + y * y + last[3] * last[3]).sqrt() <= 1e-6);

    let mut bad = args.to_vec();
    bad.extend(["--dt", "0"]);
    assert_eq!(run(&bad).0, EXIT_USAGE);
    let mut bad = args.to_vec();
    bad.extend(["--integrator", "euler"]);
    assert_eq!(run(&bad).0, EXIT_USAGE);
}

#[test]
fn positivity_loss_truncates_with_partial_output() {
    let params = tmp_file(
        "f2_numeric.params",
        "profile = numeric\nf1 = -8\nbeta1 = -0.5\nbeta2 = 1\ngamma0 = 1\n",
    );
    let init = tmp_file(
        "f2_numeric.init",
        "r = 1\nphi = 0.3\nZ = 0\np_r = 0\np_phi = -5\np_Z = 0\n",
    );
    let (code, out, _) = run(&[
        "simulate",
        "--family",
        "F2",
        "--params-file",
        params.to_str().unwrap(),
        "--initial-file",
        init.to_str().unwrap(),
        "--t-end",
        "5",
    ]);
    assert_eq!(code, EXIT_TRUNCATED);
    let (_, rows) = parse_csv(&out).unwrap();
    assert!(rows.len() > 1 && rows.len() < 5001);

    let (code, out, _) = run(&[
        "profile",
        "gamma",
        "--coeffs",
        "-8,-0.5,1",
        "--y0",
        "1",
        "--end",
        "6.283185307179586",
    ]);
    assert_eq!(code, EXIT_TRUNCATED);
    assert!(parse_csv(&out).unwrap().1.iter().all(|row| row[1] > 0.0));
}

#[test]
fn bad_parameter_files_exit_2() {
    let unknown = tmp_file("unknown.params", "mu0 = 1\nbogus = 2\n");
    let (code, _, err) = run(&[
        "verify",
        "gauge",
        "--family",
        "F1",
        "--params-file",
        unknown.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("bogus"), "{err}");
    let closed = tmp_file("closed_bad.params", "f1 = 8\nbeta1 = -0.5\n");
    let (code, _, err) = run(&[
        "verify",
        "residuals",
        "--family",
        "F2",
        "--params-file",
        closed.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("f1"), "{err}");
}

#[test]
fn verify_exit_codes_and_determinism() {
    let args = [
        "verify",
        "commutation",
        "--family",
        "F1",
        "--samples",
        "30",
        "--seed",
        "4",
    ];
    let (code, a, _) = run(&args);
    assert_eq!(code, EXIT_OK);
    let (_, b, _) = run(&args);
    assert_eq!(a, b);
    let report = VerifyJson::from_json(&a).unwrap();
    assert!(report.pass);
    assert_eq!(report.seed, 4);

    let mut strict = args.to_vec();
    strict.extend(["--tol", "0"]);
    let (code, out, _) = run(&strict);
    assert_eq!(code, EXIT_FAIL);
    assert!(!VerifyJson::from_json(&out).unwrap().pass);

    for kind in ["residuals", "gauge", "conservation"] {
        let (code, out, _) = run(&["verify", kind, "--family", "F5", "--t-end", "1"]);
        assert_eq!(code, EXIT_OK, "{kind}: {out}");
    }
    assert_eq!(
        run(&["verify", "residuals", "--family", "F5", "--grid", "5x8"]).0,
        EXIT_USAGE
    );
    assert_eq!(run(&["verify", "sideways", "--family", "F5"]).0, EXIT_USAGE);
}

#[test]
fn binary_honours_rmin_override() {
    let bin = env!("CARGO_BIN_EXE_cylint");
    let ok = Command::new(bin)
        .args(["eval", "--family", "F1", "--r", "0.05"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let raised = Command::new(bin)
        .env(RMIN_ENV, "0.1")
        .args(["eval", "--family", "F1", "--r", "0.05"])
        .output()
        .unwrap();
    assert_eq!(raised.status.code(), Some(EXIT_USAGE));
    let garbage = Command::new(bin).env(RMIN_ENV, "abc").arg("list").output().unwrap();
    assert_eq!(garbage.status.code(), Some(EXIT_USAGE));
    let out = tmp_file("verify_out.json", "");
    let status = Command::new(bin)
        .args(["verify", "gauge", "--family", "F3", "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    assert!(
        VerifyJson::from_json(&std::fs::read_to_string(&out).unwrap())
            .unwrap()
            .pass
    );
}
