//! End-to-end CLI tests: the toy pipeline, both ingest paths, idempotence,
//! exit codes, and report rendering against the shipped reference tables.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ecgtl"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "ecgtl_pipe_{tag}_{}_{}",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap()
            .as_nanos()
    ));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_micro_config(dir: &Path) -> PathBuf {
    let path = dir.join("micro.conf");
    fs::write(
        &path,
        "[model]\nkind = 1dcnn\nblocks = 8:6:6:5:16,6:8:8:3:16\ntail_channels = 8\ntail_kernel = 3\nmlp = 16\ndropout = 0.1\n\n[training]\nmax_epochs = 2\nbatch_size = 16\n",
    )
    .unwrap();
    path
}

fn run_ok(cmd: &mut Command) {
    let output = cmd.output().expect("spawn ecgtl");
    assert!(
        output.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn exit_code(cmd: &mut Command) -> i32 {
    cmd.output().expect("spawn ecgtl").status.code().unwrap_or(-1)
}

#[test]
fn toy_pipeline_produces_a_17_row_results_table() {
    let dir = temp_dir("smoke");
    let config = write_micro_config(&dir);

    run_ok(bin().args(["gen-toy", "--out"]).arg(dir.join("real")).args([
        "--count", "150", "--noise", "0.02", "--seed", "1",
    ]));
    run_ok(bin().args(["gen-toy", "--out"]).arg(dir.join("syn")).args([
        "--count", "100", "--noise", "0.02", "--seed", "2",
    ]));
    run_ok(
        bin()
            .args(["split", "--store"])
            .arg(dir.join("real"))
            .args(["--mode", "real", "--seed", "5", "--out"])
            .arg(dir.join("split_real")),
    );
    run_ok(
        bin()
            .args(["split", "--store"])
            .arg(dir.join("syn"))
            .args(["--mode", "synthetic", "--seed", "6", "--out"])
            .arg(dir.join("split_syn")),
    );

    for param in ["hr", "qrs", "pr", "qt"] {
        run_ok(
            bin()
                .args(["train-regression", "--store"])
                .arg(dir.join("real"))
                .arg("--manifest")
                .arg(dir.join("split_real/manifest.csv"))
                .args(["--parameter", param, "--out"])
                .arg(dir.join("ckpt/real-setA").join(param))
                .arg("--config")
                .arg(&config)
                .args(["--seed", "3"]),
        );
        run_ok(
            bin()
                .args(["train-regression", "--store"])
                .arg(dir.join("syn"))
                .arg("--manifest")
                .arg(dir.join("split_syn/manifest.csv"))
                .args(["--parameter", param, "--out"])
                .arg(dir.join("ckpt/synthetic").join(param))
                .arg("--config")
                .arg(&config)
                .args(["--seed", "4"]),
        );
    }
    run_ok(
        bin()
            .args(["train-classification", "--store"])
            .arg(dir.join("real"))
            .arg("--manifest")
            .arg(dir.join("split_real/manifest.csv"))
            .arg("--out")
            .arg(dir.join("baseline"))
            .arg("--config")
            .arg(&config)
            .args(["--seed", "9"]),
    );
    assert!(dir.join("baseline/checkpoint.bin").is_file());
    assert!(dir.join("baseline/history.csv").is_file());

    run_ok(
        bin()
            .args(["transfer", "--store"])
            .arg(dir.join("real"))
            .arg("--manifest")
            .arg(dir.join("split_real/manifest.csv"))
            .arg("--checkpoints")
            .arg(dir.join("ckpt"))
            .arg("--out")
            .arg(dir.join("grid"))
            .arg("--config")
            .arg(&config)
            .args(["--seed", "11"]),
    );
    let results = fs::read_to_string(dir.join("grid/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 18, "header + 17 runs");

    run_ok(
        bin()
            .args(["report", "--results"])
            .arg(dir.join("grid/results.csv"))
            .arg("--out")
            .arg(dir.join("report"))
            .arg("--split-stats")
            .arg(dir.join("split_real/split_stats.csv")),
    );
    let tables = fs::read_to_string(dir.join("report/transfer_tables.md")).unwrap();
    assert!(tables.contains("Real-to-real transfer"));
    assert!(tables.contains("Synthetic-to-real transfer"));
    assert!(dir.join("report/plots/class_distribution.svg").is_file());
    assert!(dir.join("report/roc_baseline.csv").is_file());
    assert!(dir.join("report/plots/roc_baseline.svg").is_file());

    // every artifact directory carries its run.meta digest stamp
    for sub in ["real", "split_real", "baseline", "grid", "report"] {
        let meta = fs::read_to_string(dir.join(sub).join("run.meta")).unwrap();
        assert!(meta.starts_with("digest = "), "{sub} run.meta lacks digest");
    }

    fs::remove_dir_all(&dir).ok();
}

#[test]
fn rerun_without_force_is_already_exists() {
    let dir = temp_dir("idem");
    run_ok(bin().args(["gen-toy", "--out"]).arg(dir.join("toy")).args([
        "--count", "10", "--noise", "0", "--seed", "1",
    ]));
    // identical config digest -> refused
    let code = exit_code(bin().args(["gen-toy", "--out"]).arg(dir.join("toy")).args([
        "--count", "10", "--noise", "0", "--seed", "1",
    ]));
    assert_eq!(code, 4);
    // --force overwrites
    run_ok(bin().args(["gen-toy", "--out"]).arg(dir.join("toy")).args([
        "--count", "10", "--noise", "0", "--seed", "1", "--force",
    ]));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_artifacts_exit_3_and_bad_config_exits_2() {
    let dir = temp_dir("codes");
    let code = exit_code(
        bin()
            .args(["split", "--store"])
            .arg(dir.join("no_store"))
            .args(["--mode", "real", "--out"])
            .arg(dir.join("out")),
    );
    assert_eq!(code, 3);

    let bad = dir.join("bad.conf");
    fs::write(&bad, "key_without_section = 1\n").unwrap();
    run_ok(bin().args(["gen-toy", "--out"]).arg(dir.join("toy")).args([
        "--count", "20", "--noise", "0", "--seed", "0",
    ]));
    run_ok(
        bin()
            .args(["split", "--store"])
            .arg(dir.join("toy"))
            .args(["--mode", "synthetic", "--out"])
            .arg(dir.join("split")),
    );
    let code = exit_code(
        bin()
            .args(["train-regression", "--store"])
            .arg(dir.join("toy"))
            .arg("--manifest")
            .arg(dir.join("split/manifest.csv"))
            .args(["--parameter", "hr", "--out"])
            .arg(dir.join("run"))
            .arg("--config")
            .arg(&bad),
    );
    assert_eq!(code, 2);

    // unknown regression parameter is a config error too
    let code = exit_code(
        bin()
            .args(["train-regression", "--store"])
            .arg(dir.join("toy"))
            .arg("--manifest")
            .arg(dir.join("split/manifest.csv"))
            .args(["--parameter", "st", "--out"])
            .arg(dir.join("run2")),
    );
    assert_eq!(code, 2);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn diverged_training_exits_5() {
    let dir = temp_dir("diverge");
    run_ok(bin().args(["gen-toy", "--out"]).arg(dir.join("toy")).args([
        "--count", "40", "--noise", "0.02", "--seed", "2",
    ]));
    run_ok(
        bin()
            .args(["split", "--store"])
            .arg(dir.join("toy"))
            .args(["--mode", "synthetic", "--seed", "1", "--out"])
            .arg(dir.join("split")),
    );
    // An absurd learning rate overflows the forward pass to non-finite
    // values. It has to be enormous: batch norm re-normalizes the conv
    // stack, so only the MLP chain (weight ~lr each after one Adam step)
    // can push past f64 range.
    let config = dir.join("explode.conf");
    fs::write(
        &config,
        "[model]\nkind = 1dcnn\nblocks = 8:6:6:5:16,6:8:8:3:16\ntail_channels = 8\ntail_kernel = 3\nmlp = 16\ndropout = 0\n\n[training]\ninitial_lr = 1e155\nmax_epochs = 3\nbatch_size = 8\n",
    )
    .unwrap();
    let code = exit_code(
        bin()
            .args(["train-regression", "--store"])
            .arg(dir.join("toy"))
            .arg("--manifest")
            .arg(dir.join("split/manifest.csv"))
            .args(["--parameter", "hr", "--out"])
            .arg(dir.join("run"))
            .arg("--config")
            .arg(&config),
    );
    assert_eq!(code, 5);
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn ingest_synthetic_ascii_matrices() {
    let dir = temp_dir("asc");
    let input = dir.join("raw");
    fs::create_dir_all(&input).unwrap();
    for rec in 0..3 {
        let mut text = String::new();
        for r in 0..5000 {
            let row: Vec<String> = (0..8).map(|c| ((r + c * 7 + rec) % 512).to_string()).collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        fs::write(input.join(format!("df{rec:03}.asc")), text).unwrap();
    }
    // df002 has no label row and must be skipped
    fs::write(
        dir.join("labels.csv"),
        "record_id,hr_bpm,pr_ms,qt_ms,qrs_ms\ndf000,72.5,160,400,90\ndf001,80,,410,95\n",
    )
    .unwrap();

    run_ok(
        bin()
            .args(["ingest", "--kind", "synthetic", "--input"])
            .arg(&input)
            .arg("--labels")
            .arg(dir.join("labels.csv"))
            .arg("--out")
            .arg(dir.join("store")),
    );
    let meta = fs::read_to_string(dir.join("store/metadata.csv")).unwrap();
    let lines: Vec<&str> = meta.lines().collect();
    assert_eq!(lines.len(), 3); // header + 2 records
    assert!(lines[1].starts_with("df000,,72.5,160,400,90"));
    assert!(lines[2].starts_with("df001,,80,,410,95"));
    assert!(dir.join("store/records/df000.ecg8").is_file());
    assert!(!dir.join("store/records/df002.ecg8").exists());
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn ingest_clinical_headers_and_signals() {
    let dir = temp_dir("clin");
    let input = dir.join("raw");
    fs::create_dir_all(&input).unwrap();

    // two 12-lead records in 16-bit little-endian, sample-major interleaving
    for rec in 0..2 {
        let mut header = format!("rec{rec} 12 500 5000\n");
        for _ in 0..12 {
            header.push_str("16 1000 0\n");
        }
        fs::write(input.join(format!("rec{rec}.hea")), header).unwrap();
        let mut bytes = Vec::with_capacity(2 * 12 * 5000);
        for t in 0..5000i32 {
            for lead in 0..12i32 {
                let v = ((t * (lead + 1) + rec) % 2000 - 1000) as i16;
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
        fs::write(input.join(format!("rec{rec}.dat")), bytes).unwrap();
    }
    // rec1 is multi-label and must be dropped
    fs::write(
        dir.join("labels.csv"),
        "record_id,labels,hr_bpm,pr_ms,qt_ms,qrs_ms\nrec0,NORM,70,150,390,85\nrec1,MI;STTC,75,155,395,88\n",
    )
    .unwrap();

    run_ok(
        bin()
            .args(["ingest", "--kind", "clinical", "--input"])
            .arg(&input)
            .arg("--labels")
            .arg(dir.join("labels.csv"))
            .arg("--out")
            .arg(dir.join("store")),
    );
    let meta = fs::read_to_string(dir.join("store/metadata.csv")).unwrap();
    let lines: Vec<&str> = meta.lines().collect();
    assert_eq!(lines.len(), 2); // header + rec0 only
    assert!(lines[1].starts_with("rec0,NORM,70,150,390,85"));
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn report_renders_reference_tables_byte_stably() {
    let dir = temp_dir("ref");
    // minimal valid results file to aggregate
    let results = dir.join("results.csv");
    fs::write(
        &results,
        "setting,parameter,train_accuracy,train_auc,val_accuracy,val_auc,test_accuracy,test_auc,seed,config_digest,manifest_digest\nbaseline,-,0.5,0.6,0.5,0.6,0.5,0.6,1,abc,man\n",
    )
    .unwrap();

    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let expected = fs::read_to_string(fixtures.join("reference_tables.md")).unwrap();
    for out in ["r1", "r2"] {
        run_ok(
            bin()
                .args(["report", "--results"])
                .arg(&results)
                .arg("--out")
                .arg(dir.join(out))
                .arg("--reference")
                .arg(&fixtures),
        );
        let rendered = fs::read_to_string(dir.join(out).join("reference_tables.md")).unwrap();
        assert_eq!(rendered, expected, "reference rendering is not byte-stable");
    }
    fs::remove_dir_all(&dir).ok();
}

#[test]
fn report_refuses_mixed_manifest_digests() {
    let dir = temp_dir("mixed");
    let results = dir.join("results.csv");
    fs::write(
        &results,
        "setting,parameter,train_accuracy,train_auc,val_accuracy,val_auc,test_accuracy,test_auc,seed,config_digest,manifest_digest\nbaseline,-,0.5,0.6,0.5,0.6,0.5,0.6,1,abc,man1\nreal-setA none,HR,0.5,0.6,0.5,0.6,0.5,0.6,1,abc,man2\n",
    )
    .unwrap();
    let code = exit_code(
        bin()
            .args(["report", "--results"])
            .arg(&results)
            .arg("--out")
            .arg(dir.join("out")),
    );
    assert_eq!(code, 2);
    fs::remove_dir_all(&dir).ok();
}
