use std::process::Command;

fn wavebem(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wavebem")).args(args).output().expect("binary runs")
}

#[test]
fn convergence_writes_identical_csv_twice() {
    let dir = std::env::temp_dir().join(format!("wavebem-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for path in [&a, &b] {
        let out = wavebem(&[
            "convergence",
            "--case",
            "traveling",
            "--formulation",
            "energetic",
            "--L",
            "3",
            "--T",
            "6",
            "--levels",
            "2:4",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("level,N_total,error_l2,eoc\n2,16,"));
    assert_eq!(text.lines().count(), 4);
    assert!(!text.contains('\r'));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn spectral_prints_to_stdout() {
    let out = wavebem(&["spectral", "--L", "1", "--T", "1:2", "--m", "60"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "T,sqrt_lambda_max,conjectured,abs_diff");
    assert_eq!(rows[1], "1.00000e0,0.00000e0,0.00000e0,0.00000e0");
    let diff: f64 = rows[2].split(',').nth(3).unwrap().parse().unwrap();
    assert!(diff < 0.05);
}

#[test]
fn invalid_configuration_exits_with_two() {
    for args in [
        &["convergence", "--levels", "5:3"][..],
        &["convergence", "--case", "wiggly"],
        &["convergence", "--L", "-1", "--levels", "1:2"],
        &["spectral", "--T", "0:4"],
        &["spectral", "--m", "0", "--T", "1:1"],
    ] {
        let out = wavebem(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn fast_verify_passes() {
    let out = wavebem(&["verify", "--fast"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[PASS] spectral_constants"));
    assert!(!text.contains("FAIL"));
}
