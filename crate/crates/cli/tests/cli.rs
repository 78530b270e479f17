use std::path::Path;
use std::process::{Command, Output};

fn delaycount(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaycount"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    dir.join(name).display().to_string()
}

const CORPUS: &str = "[profile]\ngeometry = radial\nlayer = 3 -10\nlayer = 0.2 200\n[grid]\ne_min = 0.05\ne_max = 32\npoints = 2000\n[delay]\ne_star = 31\n";

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let ok = write(d, "ok.cfg", CORPUS);
    let out = delaycount(&["count", "--config", &ok, "--out", "o"], d);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(d.join("o/resonances.json").exists() && d.join("o/delay.csv").exists());

    assert_eq!(delaycount(&["count"], d).status.code(), Some(2));
    let bad = write(d, "bad.cfg", "[grid]\ne_min = 1\nbogus = 2\n");
    let out = delaycount(&["scan", "--config", &bad], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(
        delaycount(&["count", "--config", &ok, "--quantum", "planck"], d)
            .status
            .code(),
        Some(2)
    );

    assert_eq!(
        delaycount(&["scan", "--config", "missing.cfg"], d)
            .status
            .code(),
        Some(4)
    );
    let ing = write(d, "ing.cfg", "[ingest]\nfile = nowhere.csv\n");
    assert_eq!(
        delaycount(&["ingest", "--config", &ing], d).status.code(),
        Some(4)
    );

    let outside = write(d, "e.cfg", "[profile]\ngeometry = radial\nlayer = 1 -10\n[grid]\ne_min = 1\ne_max = 2\npoints = 10\n[delay]\ne_star = 5\n");
    assert_eq!(
        delaycount(&["count", "--config", &outside], d)
            .status
            .code(),
        Some(2)
    );

    // five periods are too few for the contraction fit
    let short = write(
        d,
        "s.cfg",
        "[oscillator]\nomega0 = 1\neps = 1e-3\nt_end = 30\ndt = 0.01\n",
    );
    assert_eq!(
        delaycount(&["oscillator", "--config", &short], d)
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn quantum_override_and_ingest() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let mut csv = String::from("E,delta\n");
    for i in 0..60 {
        let e = 0.5 + i as f64 * 0.01;
        csv.push_str(&format!("{e},{}\n", (0.04f64).atan2(0.8 - e)));
    }
    std::fs::write(d.join("table.csv"), csv).unwrap();
    let cfg = write(d, "ing.cfg", "[ingest]\nfile = table.csv\n");
    let out = delaycount(
        &[
            "ingest",
            "--config",
            &cfg,
            "--out",
            "o",
            "--quantum",
            "hbar",
        ],
        d,
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(d.join("o/report.txt")).unwrap();
    assert!(report.contains("selected quantum hbar"), "{report}");
    assert!(report.contains("1 resonance candidates"), "{report}");
}

#[test]
fn verify_is_thread_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = write(d, "v.cfg", "");
    let one = delaycount(
        &[
            "verify",
            "--config",
            &cfg,
            "--out",
            "t1",
            "--threads",
            "1",
            "--seed",
            "11",
        ],
        d,
    );
    let many = delaycount(
        &[
            "verify",
            "--config",
            &cfg,
            "--out",
            "t4",
            "--threads",
            "4",
            "--seed",
            "11",
        ],
        d,
    );
    assert_eq!(
        one.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&one.stdout)
    );
    assert_eq!(many.status.code(), Some(0));
    for f in ["verify.txt", "report.txt"] {
        assert_eq!(
            std::fs::read(d.join("t1").join(f)).unwrap(),
            std::fs::read(d.join("t4").join(f)).unwrap(),
            "{f}"
        );
    }
}
