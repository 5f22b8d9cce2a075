use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn no3l(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_no3l"))
        .args(args)
        .env("NO3L_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sample_construct_verify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (q, q2, s) = (
        path(dir.path(), "q.tsv"),
        path(dir.path(), "q2.tsv"),
        path(dir.path(), "s.tsv"),
    );
    for out in [&q, &q2] {
        let o = no3l(&[
            "sample", "--seed", "42", "--c", "0.1", "--window", "10", "--out", out,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read_to_string(&q).unwrap();
    assert_eq!(text, fs::read_to_string(&q2).unwrap());
    let meta = text.lines().nth(1).unwrap();
    assert_eq!(
        meta,
        r#"#meta {"kind":"sampled","seed":42,"c":0.1,"window_exponent":10}"#
    );

    let o = no3l(&[
        "construct",
        "--in",
        &q,
        "--method",
        "delete-max",
        "--out",
        &s,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(fs::read_to_string(&s)
        .unwrap()
        .contains(r#""kind":"constructed""#));
    let o = no3l(&["verify", "--in", &s]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "triples: 0\n");
}

#[test]
fn negative_constant_is_a_usage_error() {
    let o = no3l(&[
        "sample",
        "--seed",
        "1",
        "--c",
        "-1",
        "--window",
        "5",
        "--out",
        "/nonexistent/x",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--c"), "{}", stderr(&o));
    let o = no3l(&[
        "lemmas", "--tmin", "1", "--tmax", "2", "--c", "-0.5", "--trials", "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--c"));
}

#[test]
fn grid_has_eight_triples() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "grid.tsv");
    let mut text = String::from("#no3l v1\n#meta {\"kind\":\"baseline\",\"window_exponent\":2}\n");
    let mut pts: Vec<(i64, i64)> = (1..=3).flat_map(|x| (1..=3).map(move |y| (x, y))).collect();
    pts.sort_by_key(|&(x, y)| (x.max(y), x, y));
    for (x, y) in pts {
        text += &format!("{x}\t{y}\n");
    }
    fs::write(&f, text).unwrap();
    let o = no3l(&["verify", "--in", &f]);
    assert_eq!(
        (o.status.code(), stdout(&o)),
        (Some(1), "triples: 8\n".into())
    );
    let o = no3l(&["verify", "--in", &f, "--box", "2"]);
    assert_eq!(
        (o.status.code(), stdout(&o)),
        (Some(0), "triples: 0\n".into())
    );
}

#[test]
fn baselines() {
    let dir = tempfile::tempdir().unwrap();
    let f = path(dir.path(), "p.tsv");
    let o = no3l(&[
        "construct",
        "--method",
        "parabola",
        "--p",
        "101",
        "--out",
        &f,
    ]);
    assert!(o.status.success());
    let text = fs::read_to_string(&f).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 101);
    assert!(text.contains(r#""kind":"baseline""#));
    assert_eq!(no3l(&["verify", "--in", &f]).status.code(), Some(0));

    let o = no3l(&[
        "construct",
        "--method",
        "parabola",
        "--p",
        "100",
        "--out",
        &f,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("prime"));
    let o = no3l(&["construct", "--method", "parabola", "--out", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--p"));

    let g = path(dir.path(), "g.tsv");
    assert!(no3l(&[
        "construct",
        "--method",
        "greedy",
        "--window",
        "6",
        "--out",
        &g
    ])
    .status
    .success());
    assert_eq!(no3l(&["verify", "--in", &g]).status.code(), Some(0));

    let o = no3l(&[
        "construct",
        "--method",
        "delete-max",
        "--in",
        &path(dir.path(), "missing.tsv"),
        "--out",
        &g,
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.tsv"));
}

#[test]
fn lemma_csv_has_one_row_per_shell() {
    let o = no3l(&[
        "lemmas", "--tmin", "3", "--tmax", "6", "--c", "0.5", "--trials", "200", "--format", "csv",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("T,exact_ey,"));
    let o = no3l(&[
        "lemmas", "--tmin", "3", "--tmax", "4", "--c", "0.5", "--trials", "50",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows
        .iter()
        .all(|r| r["exact_ey"].is_f64() && r["mean_y"].is_f64()));
}

#[test]
fn bench_reports_failing_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path(), "bench.csv");
    let args = [
        "bench", "--window", "9", "--c", "0.2", "--trials", "3", "--nmin", "32", "--format", "csv",
        "--out", &out,
    ];
    let o = no3l(&[&args[..], &["--alpha", "1000"]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("n = 32, 64, 128, 256"),
        "{}",
        stderr(&o)
    );
    let csv = fs::read_to_string(&out).unwrap();
    // Header plus n = 16, 32, 64, 128, 256.
    assert_eq!(csv.lines().count(), 6);
    let o = no3l(&[&args[..], &["--alpha", "0"]].concat());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn stats_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let manifest = dir.path().join(format!("{run}.json"));
        let m = serde_json::json!({
            "base_seed": 7, "trial_count": 3, "c": 0.3, "window_exponent": 8,
            "output_dir": out_dir,
        });
        fs::write(&manifest, m.to_string()).unwrap();
        let o = no3l(&[
            "stats",
            "--manifest",
            manifest.to_str().unwrap(),
            "--format",
            "csv",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        // Header plus T = 1..7.
        assert_eq!(stdout(&o).lines().count(), 8);
        let mut files: Vec<_> = fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        let names: Vec<_> = files
            .iter()
            .map(|f| f.file_name().unwrap().to_owned())
            .collect();
        assert!(
            names.iter().any(|n| n == "s_8.tsv") && names.iter().any(|n| n == "aggregate.json")
        );
        outputs.push(
            files
                .iter()
                .map(|f| (f.file_name().unwrap().to_owned(), fs::read(f).unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    // The manifests differ only in output_dir, which aggregate.json echoes.
    for ((na, a), (nb, b)) in outputs[0].iter().zip(&outputs[1]) {
        assert_eq!(na, nb);
        if na != "aggregate.json" {
            assert!(a == b, "{na:?} differs");
        }
    }
}

#[test]
fn every_subcommand_documents_its_flags() {
    for (cmd, flags) in [
        ("sample", &["--seed", "--c", "--window", "--out"][..]),
        (
            "construct",
            &["--in", "--method", "--p", "--window", "--out"],
        ),
        ("verify", &["--in", "--box"]),
        ("stats", &["--manifest", "--format", "--out"]),
        (
            "lemmas",
            &["--tmin", "--tmax", "--c", "--trials", "--format", "--out"],
        ),
        (
            "bench",
            &[
                "--window", "--c", "--trials", "--nmin", "--alpha", "--format", "--out",
            ],
        ),
    ] {
        let help = stdout(&no3l(&[cmd, "-h"]));
        for f in flags {
            let line = help
                .lines()
                .find(|l| l.trim_start().starts_with(f))
                .unwrap_or_else(|| panic!("{cmd} {f}"));
            assert!(
                line.split("  ").filter(|s| !s.trim().is_empty()).count() >= 2,
                "{cmd} {f} undocumented"
            );
        }
    }
}
