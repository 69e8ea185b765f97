use std::process::{Command, Output};

use cone_spectra_cli::{Document, Record};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cone-spectra"));
    c.env_remove("CONE_SPECTRA_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cone-spectra")
}

fn records(out: &Output) -> Vec<Record> {
    let doc: Document = serde_json::from_slice(&out.stdout).expect("valid json");
    doc.records
        .into_iter()
        .map(|v| serde_json::from_value(v).unwrap())
        .collect()
}

#[test]
fn solve_half_space_gives_one() {
    let out = run(&["solve", "--p", "2", "--n", "3", "--alpha", "pi/2"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 1);
    assert!((recs[0].lambda.unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(recs[0].status, "ok");
}

#[test]
fn anchors_include_conformal_exterior_row() {
    let out = run(&["anchors", "--p", "3", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    let row = recs
        .iter()
        .find(|r| r.lambda_exact == Some(-1.0))
        .expect("exterior half-space row");
    assert!((row.lambda.unwrap() + 1.0).abs() < 1e-6);
    assert!(row.provenance.as_deref().unwrap().contains("conformal"));
    assert!(recs.windows(2).all(|w| w[0].alpha <= w[1].alpha));
}

#[test]
fn fit_recovers_square_root_gap() {
    let out = run(&["fit", "--p", "3", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Document = serde_json::from_slice(&out.stdout).unwrap();
    let fit = &doc.extra["fit"];
    let e = fit["fitted_exponent"].as_f64().unwrap();
    assert!((e - 0.5).abs() / 0.5 < 0.05, "exponent {e}");
    assert_eq!(fit["law"]["kind"], "gap");
}

#[test]
fn json_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.json");
    let out = run(&[
        "sweep",
        "--p",
        "3",
        "--n",
        "4",
        "--alpha",
        "0.7,pi/2,2.9",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let doc: Document = serde_json::from_str(&text).unwrap();
    let recs: Vec<Record> = doc
        .records
        .iter()
        .map(|v| serde_json::from_value(v.clone()).unwrap())
        .collect();
    assert_eq!(recs.len(), 3);

    // Solve each aperture directly and compare bit patterns.
    for r in &recs {
        let pb = cone_spectra::ConeProblem::new(3.0, 4, r.alpha, r.branch).unwrap();
        let direct = cone_spectra::solve_lambda(&pb, &cone_spectra::Tolerances::default()).unwrap();
        assert_eq!(r.lambda.unwrap().to_bits(), direct.lambda.to_bits());
        assert_eq!(r.residual_ode.unwrap().to_bits(), direct.residual_ode.to_bits());
    }
}

#[test]
fn csv_header_is_stable() {
    let out = run(&["sweep", "--p", "2", "--n", "2", "--alpha", "1,2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha,p,n,branch,lambda,residual_alpha,residual_ode,status"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // Planar cone: lambda_1 = pi / (2 alpha) for p = 2.
    let lambda: f64 = first[4].parse().unwrap();
    assert!((lambda - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "--p", "0.5", "--n", "3", "--alpha", "1"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--p", "2", "--n", "3", "--alpha", "4"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--p", "2", "--n", "3", "--alpha", "1e-7"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--p", "2"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let bad_env = bin()
        .env("CONE_SPECTRA_THREADS", "many")
        .args(["solve", "--p", "2", "--n", "3", "--alpha", "1"])
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(64));
}

#[test]
fn sweep_with_mixed_failures_reports_numerical_exit() {
    let out = run(&["sweep", "--p", "2", "--n", "3", "--alpha", "1e-7,1"]);
    assert_eq!(out.status.code(), Some(2));
    let recs = records(&out);
    assert_eq!(recs[0].status, "numerical_error");
    assert!(recs[0].lambda.is_none());
    assert_eq!(recs[1].status, "ok");
}

#[test]
fn output_does_not_depend_on_thread_count() {
    let args = ["sweep", "--p", "4", "--n", "3", "--alpha-spec", "geometric:pi,1e-4,1e-2,7"];
    let one = bin().args(args).args(["--threads", "1"]).output().unwrap();
    let four = bin().args(args).env("CONE_SPECTRA_THREADS", "4").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn profile_csv_has_expected_shape() {
    let out = run(&[
        "profile", "--p", "2", "--n", "3", "--alpha", "pi/2", "--lambda", "1", "--spacing", "0.25", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "theta,phi,dphi");
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        // Exact profile is cos(theta).
        assert!((v[1] - v[0].cos()).abs() < 1e-8);
    }
}

#[test]
fn profile_rejects_wrong_sign_lambda() {
    let out = run(&["profile", "--p", "2", "--n", "3", "--alpha", "1", "--lambda", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}
