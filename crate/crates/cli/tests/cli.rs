use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use arcnc::analysis::{et_upper_exact, format_exact, ho_bound};
use arcnc::topology::{combination_network, save_topology};

const EXAMPLE_KERNELS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/example.kernels");

fn arcnc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arcnc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_writes_combination_network() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.topo");
    let o = arcnc(&["gen", "comb", "--n", "4", "--m", "2", "--out", p(&file)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&file).unwrap();
    assert_eq!(text, save_topology(&combination_network(4, 2).unwrap()));
    assert!(text.starts_with("nodes 11\n"));

    let o = arcnc(&["gen", "comb", "--n", "2", "--m", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("sinks 3 4\n"));
}

#[test]
fn gen_rejects_bad_parameters() {
    let o = arcnc(&["gen", "comb", "--n", "2", "--m", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("m <= n"));
}

#[test]
fn trace_reproduces_golden_run() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("trial.json");
    let o = arcnc(&[
        "trace",
        "--topology",
        "example",
        "--override",
        EXAMPLE_KERNELS,
        "--out",
        p(&json),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("stopping times: 0 0 0 0 0 1\n"));
    assert!(text.contains("average stopping time 1/6, average code length 3/2, average memory 42/11 bits"));
    assert!(text.contains("  freeze: 0 1 4 5 6 7 8 9 10 11 12 13\n"));
    assert!(text.contains("decoding sink 10: delay 1"));
    let result: serde_json::Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(result["stopping_times"], serde_json::json!([0, 0, 0, 0, 0, 1]));
    assert_eq!(result["success"], true);
}

#[test]
fn trace_names_missing_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("short.kernels");
    let body: String = fs::read_to_string(EXAMPLE_KERNELS)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('k') || l.split_whitespace().nth(3) == Some("0"))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&script, body).unwrap();
    let o = arcnc(&[
        "trace",
        "--override",
        p(&script),
        "--out",
        p(&dir.path().join("t.json")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("(x0, 2)"), "{}", stderr(&o));
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            (
                f.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&f).unwrap(),
            )
        })
        .collect()
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let mut seen = Vec::new();
    for _ in 0..2 {
        let o = arcnc(&["run", "--trials", "1", "--seed", "5", "--out", p(&out)]);
        assert!(o.status.success(), "{}", stderr(&o));
        seen.push(read_outputs(&out));
    }
    assert_eq!(seen[0], seen[1]);

    // summary.json records the worker count, so compare it separately
    let mut runs = Vec::new();
    for workers in ["1", "3"] {
        let o = arcnc(&[
            "compare",
            "--trials",
            "300",
            "--seed",
            "9",
            "--q",
            "3",
            "--workers",
            workers,
            "--out",
            p(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        runs.push(read_outputs(&out));
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["rlnc.csv", "sinks.csv", "summary.json", "trials.csv"]);
    for (a, b) in runs[0].iter().zip(&runs[1]) {
        if a.0 != "summary.json" {
            assert_eq!(a, b);
        }
    }
    let engine = |bytes: &[u8]| serde_json::from_slice::<serde_json::Value>(bytes).unwrap()["engine"].clone();
    assert_eq!(engine(&runs[0][2].1), engine(&runs[1][2].1));
}

#[test]
fn summary_carries_analysis_and_rlnc_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = arcnc(&[
        "compare",
        "--trials",
        "400",
        "--q",
        "8",
        "--seed",
        "2",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    let et = format_exact(&et_upper_exact(2, 8).unwrap());
    assert_eq!(s["analysis"]["et_upper_exact"], et.as_str());
    assert_eq!(s["analysis"]["ho_bound_by_t"][0], ho_bound(6, 8, 8, 0).unwrap());
    assert_eq!(s["eta"], 8);
    assert_eq!(s["literature"]["label"], "literature value");
    assert_eq!(s["literature"]["bnc_min_block_length"], 2);
    assert_eq!(s["rlnc"]["fields"][0]["independent_full_rank_exact"], "441/512");
    assert!(s["engine"]["mean_avg_T"].as_f64().unwrap() < 0.5);
    let rlnc = fs::read_to_string(out.join("rlnc.csv")).unwrap();
    assert!(rlnc.starts_with("q,sink,success_fraction,ho_bound\n8,5,"));
    assert!(rlnc.contains(",0.765625\n"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    let out = dir.path().join("r");
    fs::write(
        &cfg,
        format!("topology = comb\nn = 5\nm = 2\nq = 3\ntrials = 7\nout = {}\n", p(&out)),
    )
    .unwrap();
    let o = arcnc(&["run", "--config", p(&cfg), "--trials", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["config"]["trials"], 4);
    assert_eq!(s["config"]["q"], 3);
    assert_eq!(s["topology"]["sinks"], 10);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cfg");
    assert_eq!(arcnc(&["run", "--config", p(&missing)]).status.code(), Some(2));
    assert_eq!(arcnc(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        arcnc(&["run", "--trials", "0", "--out", p(dir.path())]).status.code(),
        Some(1)
    );
    assert_eq!(
        arcnc(&["run", "--q", "6", "--out", p(dir.path())]).status.code(),
        Some(1)
    );
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "trials = lots\n").unwrap();
    let o = arcnc(&["run", "--config", p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"));
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = arcnc(&["run", "--trials", "1", "--out", p(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(arcnc(&["--help"]).status.code(), Some(0));
}

#[test]
fn bounds_table() {
    let o = arcnc(&[
        "bounds", "--m", "2", "--q", "2,8", "--n", "6", "--d", "1,6", "--eta", "2", "--t", "0,1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("quantity,m,q,n,d,eta,t,value,mode\n"));
    assert!(text.contains("ho_bound,,8,,1,2,0,49/64,exact\n"));
    assert!(text.contains("ho_bound,,2,,6,2,1,N/A,exact\n"));
    assert!(text.contains("et_upper,2,2,,,,,5/3,exact\n"));
    assert!(text.contains("var_upper,2,2,6,,,,686/675,exact\n"));
}
