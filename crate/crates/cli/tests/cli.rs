use std::path::Path;
use std::process::{Command, Output};

fn superpix(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superpix"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn segment_eval_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert!(superpix(&["fixtures", "--out", "ds", "--count", "2", "--size", "48", "--set", "two-tone"], d)
        .status
        .success());
    let seg = superpix(&["segment", "ds/images/line_000.png", "--k", "36", "--out", "out/labels.png"], d);
    assert!(seg.status.success(), "{}", String::from_utf8_lossy(&seg.stderr));
    assert!(stdout(&seg).starts_with("K_out="));
    let sidecar = std::fs::read_to_string(d.join("out/labels.txt")).unwrap();
    assert!(sidecar.starts_with("K_out="));

    let eval = superpix(&["eval", "--gt", "ds/groundtruth/line_000.png", "--labels", "out/labels.png"], d);
    assert!(eval.status.success());
    let text = stdout(&eval);
    assert!(text.contains("br=") && text.contains("ue=") && text.contains("co="), "{text}");
}

#[test]
fn noise_and_edges_write_pngs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    superpix(&["fixtures", "--out", "ds", "--count", "1", "--size", "32"], d);
    let n = superpix(
        &["noise", "ds/images/line_000.png", "--kind", "gaussian", "--level", "0.1", "--seed", "4", "--out", "n.png"],
        d,
    );
    assert!(n.status.success());
    for det in ["sbed", "sobel", "canny"] {
        let out = format!("{det}.png");
        let e = superpix(&["edges", "n.png", "--detector", det, "--k", "30", "--out", &out], d);
        assert!(e.status.success(), "{det}: {}", String::from_utf8_lossy(&e.stderr));
        let ev = superpix(&["eval", "--gt", "ds/groundtruth/line_000.png", "--edges", &out], d);
        assert!(stdout(&ev).contains("psnr="));
    }
}

#[test]
fn bench_is_thread_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    superpix(&["fixtures", "--out", "ds", "--count", "3", "--size", "40"], d);
    let cfg = write_config(
        d,
        "dataset_dir = \"ds\"\nk_values = [16, 32]\nnoise = [\"none\", \"sp:0.1\"]\nseeds = [1, 2]\n",
    );
    let one = superpix(&["--config", &cfg, "--threads", "1", "bench", "--out", "r1"], d);
    let four = superpix(&["--config", &cfg, "--threads", "4", "bench", "--out", "r4"], d);
    assert_eq!(one.status.code(), Some(0), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(four.status.code(), Some(0));
    for f in ["benchmark.csv", "benchmark_aggregate.csv"] {
        let a = std::fs::read(d.join("r1").join(f)).unwrap();
        let b = std::fs::read(d.join("r4").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
    let raw = std::fs::read_to_string(d.join("r1/benchmark.csv")).unwrap();
    // 3 images x 4 methods x 2 k x 2 noise x 2 seeds, plus header.
    assert_eq!(raw.lines().count(), 1 + 3 * 4 * 2 * 2 * 2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let bad = write_config(d, "k_values = [40, 20]\n");
    assert_eq!(superpix(&["--config", &bad, "bench"], d).status.code(), Some(2));
    assert_eq!(superpix(&["--config", "missing.toml", "bench"], d).status.code(), Some(2));
    assert_eq!(superpix(&["bench", "--dataset", "nowhere"], d).status.code(), Some(2));
    assert_eq!(superpix(&["segment", "absent.png", "--out", "x.png"], d).status.code(), Some(1));
    assert_eq!(superpix(&["noise", "a.png", "--kind", "poisson", "--level", "0.1", "--out", "b.png"], d).status.code(), Some(2));

    // A truncated image passes ingestion but fails to decode: failed rows, exit code 1.
    superpix(&["fixtures", "--out", "ds", "--count", "2", "--size", "32"], d);
    let png = std::fs::read(d.join("ds/images/line_000.png")).unwrap();
    std::fs::write(d.join("ds/images/zz.png"), &png[..60]).unwrap();
    std::fs::copy(d.join("ds/groundtruth/line_000.png"), d.join("ds/groundtruth/zz.png")).unwrap();
    let cfg = write_config(d, "dataset_dir = \"ds\"\nk_values = [16]\nmethods = [\"slic\"]\n");
    let run = superpix(&["--config", &cfg, "bench", "--out", "r"], d);
    assert_eq!(run.status.code(), Some(1));
    let raw = std::fs::read_to_string(d.join("r/benchmark.csv")).unwrap();
    assert!(raw.lines().any(|l| l.starts_with("zz,") && l.contains("error")), "{raw}");
}
