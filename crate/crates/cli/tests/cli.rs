use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_seqentropy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

const FIXTURE: &str = "a,b,1\nb,a,2\na,b,3\na,c,4\n";

#[test]
fn analyze_four_events() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "in.csv", FIXTURE);
    let out = dir.path().join("a.csv");
    ok(&["analyze", "--input", s(&input), "--out", s(&out)]);

    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with(
        "segment,event_index,timestamp,n,s1,s2,s3,s1_max,s2_max,s3_max,s1_norm,s2_norm,s3_norm,s1_degenerate,s2_degenerate,s3_degenerate\n"
    ));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4);
    let last = &rows[3];
    assert_eq!(&last[..4], ["0", "4", "4", "3"]);
    let num = |i: usize| last[i].parse::<f64>().unwrap();
    assert!((num(4) - 0.562335).abs() < 1e-6);
    assert!((num(5) - 1.039721).abs() < 1e-6);
    assert!((num(6) - 3f64.ln()).abs() < 1e-8);
    assert!((num(8) - 1.791759).abs() < 1e-6);
    assert!((num(11) - 0.580280).abs() < 1e-6);
    assert_eq!(rows[0][15], "true");

    assert!(dir.path().join("a.csv.manifest.json").exists());
}

#[test]
fn analyze_stride_and_empty_input() {
    let dir = tempfile::tempdir().unwrap();
    let ten: String = (0..10)
        .map(|t| format!("n{},n{},{t}\n", t % 3, (t + 1) % 3))
        .collect();
    let input = write(&dir, "ten.csv", &ten);
    let out = dir.path().join("a.csv");
    ok(&[
        "analyze",
        "--input",
        s(&input),
        "--stride",
        "2",
        "--out",
        s(&out),
    ]);
    let idx: Vec<String> = csv_rows(&out).into_iter().map(|r| r[1].clone()).collect();
    assert_eq!(idx, ["2", "4", "6", "8", "10"]);

    let empty = write(&dir, "empty.csv", "");
    let res = run(&["analyze", "--input", s(&empty), "--out", s(&out)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("no events"));
}

#[test]
fn analyze_rejects_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.csv");
    let looped = write(&dir, "loop.csv", "a,b,1\na,a,5\n");
    let res = run(&["analyze", "--input", s(&looped), "--out", s(&out)]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("self-loop"));

    let unordered = write(&dir, "unordered.csv", "a,b,5\nb,c,1\n");
    assert!(
        !run(&["analyze", "--input", s(&unordered), "--out", s(&out)])
            .status
            .success()
    );
    ok(&[
        "analyze",
        "--input",
        s(&unordered),
        "--sort",
        "--out",
        s(&out),
    ]);
}

#[test]
fn analyze_segments_reset_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "in.csv", "a,b,1\nb,c,2\nc,d,5\nd,a,6\n");
    let out = dir.path().join("a.csv");
    ok(&[
        "analyze",
        "--input",
        s(&input),
        "--segments",
        "0,4,10",
        "--out",
        s(&out),
    ]);
    let rows = csv_rows(&out);
    let keys: Vec<(&str, &str, &str)> = rows
        .iter()
        .map(|r| (r[0].as_str(), r[1].as_str(), r[3].as_str()))
        .collect();
    assert_eq!(
        keys,
        [
            ("0", "1", "2"),
            ("0", "2", "3"),
            ("1", "1", "2"),
            ("1", "2", "3")
        ]
    );
}

#[test]
fn csv_and_jsonl_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "in.csv", FIXTURE);
    let csv = dir.path().join("z.csv");
    let jsonl = dir.path().join("z.jsonl");
    let common = [
        "zscore",
        "--input",
        s(&input),
        "--replicas",
        "5",
        "--seed",
        "3",
        "--trend",
    ];
    ok(&[&common[..], &["--out", s(&csv)]].concat());
    ok(&[&common[..], &["--out", s(&jsonl), "--emit", "jsonl"]].concat());

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let json_lines: Vec<serde_json::Value> = fs::read_to_string(&jsonl)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    for (line, obj) in lines.zip(&json_lines) {
        for (key, field) in header.iter().zip(line.split(',')) {
            let v = &obj[*key];
            if field == "null" {
                assert!(v.is_null(), "{key}");
            } else {
                assert_eq!(field.parse::<f64>().unwrap(), v.as_f64().unwrap(), "{key}");
            }
        }
    }
}

#[test]
fn baseline_is_deterministic_and_needs_two_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "in.csv", FIXTURE);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&[
        "baseline",
        "--input",
        s(&input),
        "--replicas",
        "8",
        "--seed",
        "9",
        "--out",
        s(&a),
    ]);
    ok(&[
        "baseline",
        "--input",
        s(&input),
        "--replicas",
        "8",
        "--seed",
        "9",
        "--workers",
        "3",
        "--out",
        s(&b),
    ]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let header = fs::read_to_string(&a)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned();
    assert_eq!(
        header,
        "segment,event_index,timestamp,s1_mean,s1_sd,s2_mean,s2_sd,s3_mean,s3_sd,s1_norm_mean,s1_norm_sd,s2_norm_mean,s2_norm_sd,s3_norm_mean,s3_norm_sd"
    );

    let empty = write(&dir, "empty.csv", "\n");
    assert!(!run(&["baseline", "--input", s(&empty), "--out", s(&a)])
        .status
        .success());
    assert!(!run(&[
        "baseline",
        "--input",
        s(&input),
        "--replicas",
        "1",
        "--out",
        s(&a)
    ])
    .status
    .success());
}

#[test]
fn zscore_split_mode() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "in.csv", FIXTURE);
    let real = dir.path().join("real.csv");
    let stats = dir.path().join("stats.csv");
    let z = dir.path().join("z.csv");
    ok(&["analyze", "--input", s(&input), "--out", s(&real)]);
    ok(&[
        "baseline",
        "--input",
        s(&input),
        "--replicas",
        "6",
        "--out",
        s(&stats),
    ]);
    ok(&[
        "zscore",
        "--real",
        s(&real),
        "--stats",
        s(&stats),
        "--out",
        s(&z),
    ]);
    assert_eq!(csv_rows(&z).len(), 4);

    // ensemble mean equal to the real series everywhere -> all-zero Z
    let real_rows = csv_rows(&real);
    let mut fake = String::from(
        "segment,event_index,timestamp,s1_mean,s1_sd,s2_mean,s2_sd,s3_mean,s3_sd,s1_norm_mean,s1_norm_sd,s2_norm_mean,s2_norm_sd,s3_norm_mean,s3_norm_sd\n",
    );
    for r in &real_rows {
        fake.push_str(&format!(
            "{},{},{},{},0.5,{},0.5,{},0.5,{},0.5,{},0.5,{},0.5\n",
            r[0], r[1], r[2], r[4], r[5], r[6], r[10], r[11], r[12]
        ));
    }
    let equal = write(&dir, "equal.csv", &fake);
    ok(&[
        "zscore",
        "--real",
        s(&real),
        "--stats",
        s(&equal),
        "--out",
        s(&z),
        "--trend",
    ]);
    for row in csv_rows(&z) {
        for field in &row[3..] {
            assert_eq!(field.parse::<f64>().unwrap(), 0.0, "{row:?}");
        }
    }

    // mismatched stride
    let strided = dir.path().join("strided.csv");
    ok(&[
        "baseline",
        "--input",
        s(&input),
        "--replicas",
        "6",
        "--stride",
        "2",
        "--out",
        s(&strided),
    ]);
    let res = run(&[
        "zscore",
        "--real",
        s(&real),
        "--stats",
        s(&strided),
        "--out",
        s(&z),
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("mismatch"));
}

#[test]
fn zscore_single_shot_first_checkpoint_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = (0..60)
        .map(|t| format!("{},{},{t}\n", t % 4, (t * 3 + 1) % 5 + 4))
        .collect();
    let input = write(&dir, "in.csv", &text);
    let single = dir.path().join("single.csv");
    ok(&[
        "zscore",
        "--input",
        s(&input),
        "--replicas",
        "10",
        "--out",
        s(&single),
    ]);
    let rows = csv_rows(&single);
    assert_eq!(rows.len(), 60);
    // one event: every replica agrees with the real value, so Z = 0
    assert!(rows[0][3..].iter().all(|f| f == "0"));
}

#[test]
fn validate_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(&dir, "good.csv", "a,b,1\na,c,2\nb,a,2\n");
    let out = ok(&["validate", "--input", s(&good)]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "valid: 3 events, 3 nodes\n"
    );

    let bad = write(&dir, "bad.csv", "a,b,2\nb,c,1\nc,c,3\n");
    let res = run(&["validate", "--input", s(&bad)]);
    assert_eq!(res.status.code(), Some(1));
    let text = String::from_utf8_lossy(&res.stdout);
    assert!(text.contains("line 2: timestamp 1 precedes previous timestamp 2"));
    assert!(text.contains("line 3: self-loop on node `c`"));

    let report = dir.path().join("report.txt");
    let res = run(&["validate", "--input", s(&bad), "--out", s(&report)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(fs::read_to_string(&report)
        .unwrap()
        .contains("invalid: 1 self-loop(s), 1 ordering"));
}

#[test]
fn segment_writes_parts() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "in.csv", "a,b,1\nb,c,2\nc,d,5\nd,a,6\n");
    let out = dir.path().join("parts");
    ok(&[
        "segment",
        "--input",
        s(&input),
        "--segments",
        "0,4,10",
        "--out",
        s(&out),
    ]);
    assert_eq!(
        fs::read_to_string(out.join("segment-000.csv")).unwrap(),
        "a,b,1\nb,c,2\n"
    );
    assert_eq!(
        fs::read_to_string(out.join("segment-001.csv")).unwrap(),
        "c,d,5\nd,a,6\n"
    );
    assert!(out.join("manifest.json").exists());

    let res = run(&[
        "segment",
        "--input",
        s(&input),
        "--segments",
        "4,0",
        "--out",
        s(&out),
    ]);
    assert!(!res.status.success());
}

#[test]
fn tab_separated_sensor_layout() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "contacts.dat", "20\t1\t2\n20\t3\t1\n40\t2\t3\n");
    let out = dir.path().join("a.jsonl");
    ok(&[
        "analyze",
        "--input",
        s(&input),
        "--delimiter",
        "tab",
        "--format",
        "1,2,0",
        "--emit",
        "jsonl",
        "--out",
        s(&out),
    ]);
    let last: serde_json::Value =
        serde_json::from_str(fs::read_to_string(&out).unwrap().lines().last().unwrap()).unwrap();
    assert_eq!(last["event_index"], 3);
    assert_eq!(last["timestamp"], 40);
    assert_eq!(last["n"], 3);
}
