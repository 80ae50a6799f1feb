//! End-to-end runs of the `sepe` binary.

mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::{curated_correspondences, session};
use sepe_cli::formats::{correspondences_to_file, CorrespondenceFile, ResultRow};

fn sepe() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sepe"));
    c.env("SEPE_SMT_SOLVER", env!("CARGO_BIN_EXE_sepe-qfbv"));
    c
}

fn write_curated(dir: &Path) -> PathBuf {
    let mut s = session();
    let set = curated_correspondences(&mut s);
    let path = dir.join("correspondences.json");
    let json = serde_json::to_string_pretty(&correspondences_to_file(&set)).unwrap();
    std::fs::write(&path, json + "\n").unwrap();
    path
}

#[test]
fn synth_writes_database_and_bench_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let status = sepe()
            .args([
                "synth",
                "--instr",
                "SUB",
                "--k",
                "1",
                "--min-len",
                "1",
                "--n-max",
                "1",
                "--timeout",
                "10000",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read_to_string(out_a.join("correspondences.json")).unwrap();
    let b = std::fs::read_to_string(out_b.join("correspondences.json")).unwrap();
    assert_eq!(a, b, "same config, byte-identical database");
    let parsed: CorrespondenceFile = serde_json::from_str(&a).unwrap();
    assert!(!parsed["SUB"].is_empty());
    assert!(parsed["SUB"].iter().all(|r| r.verified));
    assert!(out_a.join("synth_bench.csv").is_file());
}

#[test]
fn baseline_requires_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let output = sepe()
        .args([
            "synth",
            "--instr",
            "SUB",
            "--baseline",
            "iterative",
            "--k",
            "1",
            "--min-len",
            "1",
            "--n-max",
            "1",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("seed"));
}

#[test]
fn missing_solver_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_sepe"))
        .env("SEPE_SMT_SOLVER", "/nonexistent/solver-binary")
        .args(["synth", "--instr", "SUB", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn transform_reproduces_the_listing_two_block() {
    let dir = tempfile::tempdir().unwrap();
    let db = write_curated(dir.path());
    let out = dir.path().join("pairs");
    let status = sepe()
        .args(["transform", "--correspondences"])
        .arg(&db)
        .args(["--instr", "SUB", "--rd", "1", "--rs", "2,3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let pairs = std::fs::read_to_string(out.join("pairs.txt")).unwrap();
    let golden = include_str!("golden/listing2_sub.txt");
    assert_eq!(pairs, golden, "byte-exact pair block");
}

#[test]
fn transform_reports_uncovered_and_isolates_bad_entries() {
    let dir = tempfile::tempdir().unwrap();
    // empty database: everything requested is uncovered
    let db = dir.path().join("empty.json");
    std::fs::write(&db, "{}\n").unwrap();
    let out = dir.path().join("out");
    let status = sepe()
        .args(["transform", "--correspondences"])
        .arg(&db)
        .args(["--instr", "SUB,ADD", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(out.join("pairs.txt")).unwrap(), "");
    let uncovered = std::fs::read_to_string(out.join("uncovered.txt")).unwrap();
    assert_eq!(uncovered, "ADD\nSUB\n");

    // an 8-line chain exhausts the six temporaries but the good entry still
    // gets emitted
    let mut s = session();
    let set = curated_correspondences(&mut s);
    let mut file = correspondences_to_file(&set);
    let chain: Vec<u32> = vec![20; 8];
    let wiring: Vec<Vec<String>> = (0..8)
        .map(|i| vec![if i == 0 { "in0".to_string() } else { format!("t{}", i - 1) }])
        .collect();
    file.get_mut("SUB").unwrap().push(sepe_cli::formats::ProgramRecord {
        components: chain,
        wiring,
        attributes: vec![vec![0]; 8],
        verified: true,
    });
    let db = dir.path().join("with_bad.json");
    std::fs::write(&db, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let out2 = dir.path().join("out2");
    let status = sepe()
        .args(["transform", "--correspondences"])
        .arg(&db)
        .args(["--instr", "SUB", "--out"])
        .arg(&out2)
        .status()
        .unwrap();
    assert!(status.success());
    let pairs = std::fs::read_to_string(out2.join("pairs.txt")).unwrap();
    assert!(pairs.contains("#Original instruction"));
    let errors = std::fs::read_to_string(out2.join("transform_errors.txt")).unwrap();
    assert!(errors.contains("temporaries"));
}

#[test]
fn check_exits_one_on_violation_and_zero_on_control() {
    let dir = tempfile::tempdir().unwrap();
    let db = write_curated(dir.path());

    let out = dir.path().join("violated");
    let output = sepe()
        .args(["check", "--correspondences"])
        .arg(&db)
        .args([
            "--mutation",
            "ADD_OFF_BY_ONE_RS1_5",
            "--mode",
            "edsep",
            "--bound",
            "2",
            "--instr",
            "ADD",
            "--timeout",
            "30000",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "violation exit code");
    let rows: Vec<ResultRow> = sepe_cli::formats::read_csv(&out.join("results.csv")).unwrap();
    assert!(rows.iter().any(|r| r.verdict == "violated"));
    let trace_files: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("trace_"))
        .collect();
    assert!(!trace_files.is_empty());
    let trace = std::fs::read_to_string(trace_files[0].path()).unwrap();
    assert!(trace.starts_with("mode: EDSEP-V\n"));
    assert!(trace.contains("violated-pair:"));
    assert!(trace.contains("committed-instructions:"));

    let out = dir.path().join("control");
    let output = sepe()
        .args(["check", "--correspondences"])
        .arg(&db)
        .args([
            "--mutation",
            "none",
            "--mode",
            "both",
            "--bound",
            "1",
            "--instr",
            "ADD,SUB",
            "--timeout",
            "30000",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "control run holds");
    let rows: Vec<ResultRow> = sepe_cli::formats::read_csv(&out.join("results.csv")).unwrap();
    assert!(rows.iter().all(|r| r.verdict == "holds"));
}

#[test]
fn report_aggregates_and_rejects_malformed_input() {
    let dir = tempfile::tempdir().unwrap();
    let bench = dir.path().join("bench.csv");
    std::fs::write(
        &bench,
        "instruction,algorithm,wall_ms,solver_calls,programs_found\n\
         SUB,hpf,100,50,3\n\
         SUB,iterative,200,80,3\n",
    )
    .unwrap();
    let detect = dir.path().join("detect.csv");
    std::fs::write(
        &detect,
        "mutation_id,mode,bound,verdict,wall_ms,trace_len\n\
         ADD_OFF_BY_ONE_RS1_5,EDSEP-V,1,violated,10,4\n\
         ADD_OFF_BY_ONE_RS1_5,EDDI-V,2,holds,20,0\n",
    )
    .unwrap();
    let out = dir.path().join("report");
    let status = sepe()
        .args(["report", "--bench"])
        .arg(&bench)
        .arg("--detect")
        .arg(&detect)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("ratio 0.500"));
    assert!(out.join("speedup.csv").is_file());
    assert!(out.join("detection.csv").is_file());

    // malformed CSV -> exit 2
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "not,a,bench\n1,2\n").unwrap();
    let output = sepe()
        .args(["report", "--bench"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("r2"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    // empty input set -> empty report, exit 0
    let output = sepe()
        .args(["report", "--out"])
        .arg(dir.path().join("r3"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0));
}

#[test]
fn library_dump_matches_the_documented_shape() {
    let dir = tempfile::tempdir().unwrap();
    let status = sepe().args(["library", "--out"]).arg(dir.path()).status().unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(dir.path().join("library.json")).unwrap();
    let entries: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(entries.len(), 29);
    let nics = entries.iter().filter(|e| e["class"] == "NIC").count();
    let dics = entries.iter().filter(|e| e["class"] == "DIC").count();
    let cics = entries.iter().filter(|e| e["class"] == "CIC").count();
    assert_eq!((nics, dics, cics), (10, 10, 9));
}

#[test]
fn config_file_entries_are_applied_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    std::fs::write(&config, "k = 1\nmin-len = 1\nn-max = 1\ninstr = SUB\n").unwrap();
    let out = dir.path().join("out");
    let status = sepe()
        .args(["--config"])
        .arg(&config)
        .args(["--timeout", "10000", "synth", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("correspondences.json")).unwrap();
    let parsed: CorrespondenceFile = serde_json::from_str(&text).unwrap();
    assert!(parsed.contains_key("SUB"));
    assert_eq!(parsed.len(), 1, "config instr list applies");
}
