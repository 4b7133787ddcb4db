use std::process::Command;

use glrt_cli::CurvePointTable;

fn glrt(args: &[&str]) -> (String, String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_glrt"))
        .args(args)
        .output()
        .unwrap();
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
        out.status.code().unwrap(),
    )
}

#[test]
fn output_is_deterministic() {
    let args = [
        "audit", "--sigma2", "4", "--rounds", "3", "--dim", "2", "--trials", "500", "--seed", "5",
    ];
    assert_eq!(glrt(&args), glrt(&args));
    let args = ["profile", "--sensitivity", "0.5", "--eps-points", "20"];
    assert_eq!(glrt(&args), glrt(&args));
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    for cmd in [
        vec![
            "roc",
            "--adversary",
            "glrt-sym",
            "--points",
            "64",
            "--dim",
            "3",
        ],
        vec![
            "profile",
            "--adversary",
            "npo",
            "--eps-points",
            "30",
            "--gamma",
            "0.3",
        ],
    ] {
        let (csv, _, c1) = glrt(&[cmd.as_slice(), &["--format", "csv"]].concat());
        let (json, _, c2) = glrt(&[cmd.as_slice(), &["--format", "json"]].concat());
        assert_eq!((c1, c2), (0, 0));
        let a = CurvePointTable::from_csv(&csv).unwrap();
        let b = CurvePointTable::from_json(&json).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn roc_rows_are_sorted_and_in_the_unit_square() {
    let (out, _, code) = glrt(&["roc", "--sigma2", "0.5", "--dim", "7", "--rounds", "2"]);
    assert_eq!(code, 0);
    let t = CurvePointTable::from_csv(&out).unwrap();
    assert_eq!(t.points.len(), 512);
    assert!(t.points.windows(2).all(|w| w[1][0] > w[0][0]));
    assert!(t
        .points
        .iter()
        .all(|p| (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1])));
    assert_eq!(t.meta.dim, 7);
}

#[test]
fn profile_matches_closed_form_for_optimal_adversary() {
    let (out, _, code) = glrt(&[
        "profile",
        "--adversary",
        "npo",
        "--eps-max",
        "3",
        "--eps-points",
        "31",
    ]);
    assert_eq!(code, 0);
    let t = CurvePointTable::from_csv(&out).unwrap();
    for [eps, delta] in t.points {
        let want = glrt_core::conversion::gaussian_profile_delta(1.0, eps);
        assert!((delta - want).abs() <= 1e-6 + 1e-11 * want, "ε={eps}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(glrt(&["roc", "--sigma2", "0"]).2, 2);
    assert_eq!(glrt(&["nonsense"]).2, 2);
    assert_eq!(glrt(&["audit", "--cutoffs", "1"]).2, 2);
    let (out, err, code) = glrt(&["roc", "--points", "0"]);
    assert_eq!(code, 2);
    assert!(out.is_empty() && err.contains("--points"));
    assert_eq!(glrt(&["audit", "--trials", "20000", "--sigma2", "4"]).2, 0);
    assert_eq!(glrt(&["audit", "--trials", "200", "--tolerance", "0"]).2, 3);
    assert_eq!(glrt(&["--help"]).2, 0);
}

#[test]
fn tiny_audit_warns() {
    let (out, err, code) = glrt(&["audit", "--trials", "1"]);
    assert!(code == 0 || code == 3);
    assert!(err.contains("warning"));
    assert!(out.contains("status="));
}
