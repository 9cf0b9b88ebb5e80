use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn splinedict(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splinedict"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn report_rows(dir: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("report.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn write_samples(path: &Path, values: impl Iterator<Item = f64>) {
    let text: String = values.map(|v| format!("{v}\n")).collect();
    fs::write(path, text).unwrap();
}

#[test]
fn constant_signal_gets_three_knots() {
    let dir = tempdir().unwrap();
    let input = dir.path().join("flat.txt");
    write_samples(&input, std::iter::repeat_n(0.5, 101));
    let out = dir.path().join("out");
    let res = splinedict(&[
        "adapt",
        "--input",
        input.to_str().unwrap(),
        "--interval",
        "0,1",
        "--level",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(stdout(&res).starts_with("3 knots"));
    let saved: Vec<f64> = serde_json::from_str(&fs::read_to_string(out.join("partition.json")).unwrap()).unwrap();
    assert_eq!(saved, vec![0.0, 0.5, 1.0]);
    assert!(fs::read_to_string(out.join("curvature.csv"))
        .unwrap()
        .starts_with("x,abs_curvature\n"));
}

#[test]
fn missing_input_fails_with_message() {
    let dir = tempdir().unwrap();
    let res = splinedict(&[
        "adapt",
        "--input",
        "/nonexistent/signal.txt",
        "--interval",
        "0,1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("signal.txt"));
}

#[test]
fn invalid_flags_are_rejected() {
    for args in [
        &["approx", "--signal", "chirp", "--tol-fraction", "1.5"][..],
        &["approx", "--signal", "chirp", "--order", "0"][..],
        &["adapt", "--signal", "chirp", "--level", "0"][..],
        &["adapt", "--signal", "phased-cosine", "--interval", "3,1"][..],
    ] {
        assert!(!splinedict(args).status.success(), "{args:?}");
    }
    let res = splinedict(&["adapt", "--out", tempdir().unwrap().path().to_str().unwrap()]);
    assert!(!res.status.success());
}

#[test]
fn single_subpartition_matches_the_basis() {
    let dir = tempdir().unwrap();
    let out = dir.path();
    let res = splinedict(&[
        "approx",
        "--signal",
        "phased-cosine",
        "--samples",
        "513",
        "--level",
        "9",
        "--order",
        "2",
        "--subpartitions",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let rows = report_rows(out);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2..5], rows[1][2..5]);
    let basis = fs::read_to_string(out.join("decomposition_basis.json")).unwrap();
    let dict = fs::read_to_string(out.join("decomposition_dict.json")).unwrap();
    assert_eq!(basis.replace("dictionary_basis.json", "dictionary.json"), dict);
    for name in ["partition.json", "dictionary.json", "recon_basis.csv", "recon_dict.csv"] {
        assert!(out.join(name).exists(), "{name}");
    }
}

#[test]
fn sweep_reports_every_count() {
    let dir = tempdir().unwrap();
    let out = dir.path();
    let res = splinedict(&[
        "sweep",
        "--signal",
        "phased-cosine",
        "--samples",
        "513",
        "--level",
        "9",
        "--order",
        "2",
        "--subpartitions",
        "2..6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(stdout(&res).contains("<- min K"));

    let knots: Vec<f64> = serde_json::from_str(&fs::read_to_string(out.join("partition.json")).unwrap()).unwrap();
    let interior = knots.len() - 2;
    let rows = report_rows(out);
    assert_eq!(rows.len(), 6);
    let sizes: Vec<usize> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    for (row, size) in rows.iter().zip(&sizes) {
        let n: usize = row[1].parse().unwrap();
        assert_eq!(*size, n * 2 + interior);
        assert_eq!(row[6], "true");
    }
    assert!(sizes.windows(2).all(|w| w[0] < w[1]));
    assert!(out.join("decomposition_dict_n4.json").exists());
    assert!(out.join("dictionary_n4.json").exists());
}

#[test]
fn saved_partition_is_reused() {
    let dir = tempdir().unwrap();
    let out = dir.path();
    let signal = out.join("chirp.txt");
    let gen = splinedict(&[
        "gen",
        "--signal",
        "chirp",
        "--samples",
        "1025",
        "--out",
        signal.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    assert_eq!(fs::read_to_string(&signal).unwrap().lines().count(), 1025);

    let partition = out.join("p.json");
    fs::write(&partition, "[0, 2, 4, 6, 8]").unwrap();
    let res = splinedict(&[
        "dict",
        "--input",
        signal.to_str().unwrap(),
        "--interval",
        "0,8",
        "--partition",
        partition.to_str().unwrap(),
        "--order",
        "4",
        "--subpartitions",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("dictionary.json")).unwrap()).unwrap();
    assert_eq!(meta["size"], 11);
    assert_eq!(meta["atoms"].as_array().unwrap().len(), 11);

    fs::write(&partition, "[0, 1]").unwrap();
    let res = splinedict(&[
        "dict",
        "--input",
        signal.to_str().unwrap(),
        "--interval",
        "0,8",
        "--partition",
        partition.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
}

#[test]
fn unreachable_tolerance_exits_with_two() {
    // a linear spline on two pieces cannot follow the chirp
    let dir = tempdir().unwrap();
    let out = dir.path();
    let partition = out.join("p.json");
    fs::write(&partition, "[0, 4, 8]").unwrap();
    let res = splinedict(&[
        "approx",
        "--signal",
        "chirp",
        "--samples",
        "257",
        "--partition",
        partition.to_str().unwrap(),
        "--order",
        "2",
        "--subpartitions",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(report_rows(out).iter().all(|r| r[6] == "false"));
}
