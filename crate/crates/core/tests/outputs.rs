use std::path::Path;

use delaycount::io::config::parse_config;
use delaycount::run::{run, Command, RunOptions};

const CONFIG: &str = "
[profile]
geometry = radial
layer = 3 -10
layer = 0.2 200

[grid]
e_min = 0.05
e_max = 32
points = 2000

[delay]
e_star = 31

[fit]
phase_check = true

[oscillator]
omega0 = 1
eps = 1e-3
t_end = 1000
dt = 0.01

[wigner]
de = 0.02
points = 1000

[units]
mass_amu = 1.00866491588
length_nm = 10
";

#[test]
fn files_on_disk() {
    let cfg = parse_config(CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for cmd in [Command::Fit, Command::Oscillator, Command::Wigner] {
        run(cmd, &cfg, &RunOptions::default())
            .unwrap()
            .outputs
            .write_all(dir.path())
            .unwrap();
    }
    for f in [
        "delay.csv",
        "resonances.json",
        "report.txt",
        "oscillator.json",
        "wigner.json",
        "plot/tau.dat",
        "plot/integral.dat",
        "plot/phase.dat",
        "plot/spiral.dat",
        "plot/envelope.dat",
        "plot/gamma.dat",
        "plot/kernel.dat",
        "plot/wigner.dat",
        "plot/wigner_tau.dat",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("delay.csv")).unwrap();
    assert!(csv.starts_with("# delay.csv format_version=1\nE,tau,cumulative,count\n"));
    let first = csv.lines().nth(2).unwrap();
    assert!(
        first
            .split(',')
            .all(|v| v.contains('e') && v.parse::<f64>().is_ok()),
        "{first}"
    );
}

#[test]
fn report_has_verdicts_and_units() {
    let cfg = parse_config(CONFIG).unwrap();
    let out = run(
        Command::Fit,
        &cfg,
        &RunOptions {
            paper_sign: true,
            ..RunOptions::default()
        },
    )
    .unwrap();
    let r = &out.report;
    assert_eq!(r.matches("counts as one resonance").count(), 3, "{r}");
    assert!(r.contains("neV") && r.contains("ns"));
    assert!(r.contains("phase cross-check (paper-sign)"));
    // the sharp resonances need dE << Gamma; the broad profile is resolved
    let broad = CONFIG.replace(
        "layer = 3 -10\nlayer = 0.2 200",
        "layer = 1 -10\nlayer = 0.5 6",
    );
    let cfg = parse_config(&broad).unwrap();
    let wig = run(Command::Wigner, &cfg, &RunOptions::default()).unwrap();
    assert!(!wig.report.contains("warning"));
    let doc: serde_json::Value =
        serde_json::from_slice(&wig.outputs.files[Path::new("wigner.json")]).unwrap();
    assert!(
        doc["phase_space_relative_difference"]
            .as_f64()
            .unwrap()
            .abs()
            < 0.03
    );
    assert!(
        doc["correlation"]["relative_difference"]
            .as_f64()
            .unwrap()
            .abs()
            < 0.01
    );
    let sharp = run(
        Command::Wigner,
        &parse_config(CONFIG).unwrap(),
        &RunOptions::default(),
    )
    .unwrap();
    assert!(sharp.report.contains("does not resolve"));
}
