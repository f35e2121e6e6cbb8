use std::process::{Command, Output};

fn bisym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bisym")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).from_reader(text.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

#[test]
fn bounds_at_the_one_fold_corner() {
    let out = bisym(&["--no-timestamp", "bounds", "--alpha", "1", "--beta", "0", "--m", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows[0][0], "kind");
    for row in &rows[1..] {
        let first: f64 = row[4].parse().unwrap();
        let second: f64 = row[5].parse().unwrap();
        assert!((first - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(second, 5.0);
        assert_eq!(row[6], "true");
    }
}

#[test]
fn timestamp_header_is_present_by_default() {
    let out = bisym(&["bounds", "--alpha", "1/2"]);
    assert!(stdout(&out).starts_with("# generated at unix time "));
    let json = bisym(&["--format", "json", "bounds", "--alpha", "1/2"]);
    assert!(stdout(&json).starts_with('['));
}

#[test]
fn invert_matches_known_inverses() {
    // z + z^2 + z^3 + z^4 has inverse w - w^2 + w^3 - w^4 + ...
    let out = bisym(&["--no-timestamp", "invert", "--m", "1", "--coeffs", "1,1,1"]);
    let rows = csv_rows(&stdout(&out));
    let closed: Vec<&str> = rows[1..].iter().map(|r| r[1].as_str()).collect();
    assert_eq!(closed, ["-1", "1", "-1"]);
    assert!(rows[1..].iter().all(|r| r[3] == "0"));
}

#[test]
fn invert_with_negative_coefficients() {
    let out = bisym(&["--no-timestamp", "invert", "--m", "2", "--coeffs", "-1/2,3"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    // b3 = -a3, b5 = 3 a3^2 - a5
    assert_eq!(rows[1][1], "1/2");
    assert_eq!(rows[2][1], "-9/4");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["bounds", "--alpha", "0"][..],
        &["bounds", "--beta", "1"],
        &["bounds", "--alpha", "1", "--lambda", "2"],
        &["invert", "--m", "1", "--function", "nonsense"],
        &["no-such-command"],
        &["bounds", "--alpha", "x/y"],
    ] {
        assert_eq!(bisym(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn membership_of_the_geometric_function() {
    let pass = bisym(&["--no-timestamp", "membership", "--function", "geometric", "--beta", "2/5", "--angles", "180"]);
    assert_eq!(pass.status.code(), Some(0));
    let fail = bisym(&["--no-timestamp", "membership", "--function", "geometric", "--beta", "3/5", "--angles", "180"]);
    // a failed verdict is a result, not an error
    assert_eq!(fail.status.code(), Some(0));
    let rows = csv_rows(&stdout(&fail));
    let f_row = rows.iter().find(|r| r[4] == "f").unwrap();
    assert_eq!(f_row[5], "fail");
    assert!((f_row[7].parse::<f64>().unwrap() + 0.95).abs() < 1e-9);
}

#[test]
fn solve_coeffs_for_a_single_atom() {
    let out = bisym(&["--no-timestamp", "--format", "json", "solve-coeffs", "--beta", "1/2", "--p", "1@0"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let get = |q: &str| rows.as_array().unwrap().iter().find(|r| r["quantity"] == q).unwrap().clone();
    assert_eq!(get("a_m1")["value"], "1");
    assert_eq!(get("residual_addition")["magnitude"], 0.0);
    assert_eq!(get("ratio_a_m1")["magnitude"], 1.0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = std::env::temp_dir().join(format!("bisym-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("config.json");
    std::fs::write(&path, r#"{"alpha": ["1/2"], "m": [1, 2], "no_timestamp": true, "format": "json"}"#).unwrap();
    let config = path.to_str().unwrap();

    let from_file = bisym(&["--config", config, "bounds"]);
    let rows: serde_json::Value = serde_json::from_str(&stdout(&from_file)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[0]["alpha_or_beta"], "1/2");

    let overridden = bisym(&["--config", config, "--format", "csv", "bounds", "--m", "3"]);
    let rows = csv_rows(&stdout(&overridden));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][1], "3");

    std::fs::write(&path, "[1, 2]").unwrap();
    assert_eq!(bisym(&["--config", config, "bounds"]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn output_flag_writes_a_file() {
    let path = std::env::temp_dir().join(format!("bisym-out-{}.csv", std::process::id()));
    let out = bisym(&["--no-timestamp", "--output", path.to_str().unwrap(), "bounds", "--beta", "1/2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("kind,m,"));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn quick_selftest_passes_and_injected_fault_fails() {
    let ok = bisym(&["--no-timestamp", "selftest", "--quick"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = bisym(&["--no-timestamp", "selftest", "--quick", "--inject-fault"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("inverse-coefficients"));
}

#[test]
fn search_is_reproducible_and_within_bounds() {
    let args = ["--no-timestamp", "search", "--alpha", "1", "--m", "1", "--samples", "500", "--seed", "3"];
    let a = bisym(&args);
    let b = bisym(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rows = csv_rows(&stdout(&a));
    let ratio: f64 = rows[1][16].parse().unwrap();
    assert!(ratio <= 1.0 + 1e-10 && ratio > 0.5);
}

#[test]
fn caratheodory_samples_satisfy_the_lemma() {
    let out = bisym(&["--no-timestamp", "caratheodory-sample", "--samples", "25", "--m", "2", "--seed", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 26);
    assert!(rows[1..].iter().all(|r| r[9] == "true" && r[7].parse::<f64>().unwrap() <= 2.0 + 1e-12));
}
