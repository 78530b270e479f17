//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines always show up in `cargo test` output.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use delaycount::corpus;
use delaycount::delay::{
    count_resonances, detect_resonances, hermiticity_defect, integrate_delay_with, q_matrix,
    time_delay, CountingQuantum, DelayOptions,
};
use delaycount::engine::{s_matrix_sample, EnergyGrid, SMatrixSample};
use delaycount::io::config::parse_config;
use delaycount::oscillator::{
    contraction_exponent, drift_sweep, integrate_oscillator, OscillatorConfig,
};
use delaycount::resonance::{
    bw_delay, bw_phase, bw_sample, classical_phase, fit_bw, fit_candidates, friction_to_width,
    width_to_friction, BWParams, PhaseConvention,
};
use delaycount::run::{run, Command, RunOptions};
use delaycount::units::{HBAR, PLANCK};
use delaycount::verify::{report, run_suite, synthetic_profile};
use delaycount::wigner::{
    correlation_integral, direct_delay_integral, phase_space_delay_integral, symmetric_q,
    tail_decay_rate, van_kampen_kernel, wigner_distribution, KernelOptions,
};

struct Line {
    id: &'static str,
    passed: bool,
    text: String,
}

fn criterion(id: &'static str, bound: Duration, f: impl FnOnce() -> (bool, String)) -> Line {
    let t = Instant::now();
    let (ok, detail) = f();
    let took = t.elapsed();
    let in_time = took < bound;
    let passed = ok && in_time;
    let text = format!(
        "{} {id}: {detail}; runtime {:.2} s (bound {} s{})",
        if passed { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        bound.as_secs(),
        if in_time { "" } else { ", exceeded" }
    );
    println!("{text}");
    Line { id, passed, text }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn ac1() -> (bool, String) {
    let bw = BWParams::new(5.0, 1e-3);
    let band = 1e3 * bw.gamma;
    let dp = synthetic_profile(&bw, bw.e0 - band, bw.e0 + band, 40_001).unwrap();
    let c = count_resonances(&dp, dp.grid().last(), CountingQuantum::Planck).unwrap();
    (
        (c.count_h - 1.0).abs() <= 2e-3,
        format!(
            "I/(2 pi hbar) = {:.6} (1 +- 0.002); I/hbar = {:.6} reported",
            c.count_h, c.count_hbar
        ),
    )
}

fn ac2() -> (bool, String) {
    let p = corpus::sharp_well().validate().unwrap();
    let grid = EnergyGrid::uniform(0.05, 32.0, 2000)
        .unwrap()
        .avoiding_thresholds(&p)
        .unwrap();
    let dp = integrate_delay_with(&p, &grid, p.support_end(), DelayOptions::default()).unwrap();
    let c = count_resonances(&dp, 31.0, CountingQuantum::Planck).unwrap();
    let oracle = corpus::SHARP_WELL_ORACLE_COUNT as f64;
    (
        (c.count_h - oracle).abs() < 0.15,
        format!("well 3 x -10 behind barrier 0.2 x 200, I(31)/h = {:.4}, Numerov count {oracle} (within 0.15)", c.count_h),
    )
}

/// The shallow profile (well -10 for r < 1, barrier 6 for 1 < r < 1.5) has
/// no sharp phase jumps, so its Numerov count is 0. Reported, not asserted.
fn shallow_profile_info() {
    let p = corpus::broad_well().validate().unwrap();
    let grid = EnergyGrid::uniform(0.05, 32.0, 2000)
        .unwrap()
        .avoiding_thresholds(&p)
        .unwrap();
    let dp = integrate_delay_with(&p, &grid, p.support_end(), DelayOptions::default()).unwrap();
    let c = count_resonances(&dp, 31.0, CountingQuantum::Planck).unwrap();
    println!(
        "INFO AC2 shallow profile (well -10 r<1, barrier 6 1<r<1.5): I(31)/h = {:.4}, {} delay peaks, Numerov phase-jump count 0",
        c.count_h,
        detect_resonances(&dp).len()
    );
}

fn ac3() -> (bool, String) {
    let (mut s_worst, mut q_worst, mut n) = (0.0f64, 0.0f64, 0);
    let profiles = corpus::all();
    for (_, prof) in &profiles {
        let p = prof.validate().unwrap();
        let grid = EnergyGrid::uniform(0.05, 40.0, 1000)
            .unwrap()
            .avoiding_thresholds(&p)
            .unwrap();
        for &e in grid.points() {
            let smp = s_matrix_sample(&p, e, p.support_end()).unwrap();
            s_worst = s_worst.max(smp.unitarity_defect());
            q_worst = q_worst.max(hermiticity_defect(&q_matrix(&smp).unwrap()));
            n += 1;
        }
    }
    (
        s_worst < 1e-12 && q_worst < 1e-10 && profiles.len() >= 5,
        format!(
            "{} profiles x 1000 energies ({n}): max |S^dag S - I| = {s_worst:.2e} (< 1e-12), max |Q - Q^dag| = {q_worst:.2e} (< 1e-10)",
            profiles.len()
        ),
    )
}

fn bw_band(e_max: f64, de: f64, gamma: f64) -> Vec<SMatrixSample> {
    let bw = BWParams::new(0.5 * e_max, gamma);
    (1..=(e_max / de) as usize)
        .map(|m| bw_sample(m as f64 * de, &bw))
        .collect()
}

fn ac4() -> (bool, String) {
    let mut sym = 0.0f64;
    for (prof, e) in [
        (corpus::broad_well(), 1.0),
        (corpus::square_well(), 3.0),
        (corpus::barrier(), 2.0),
        (corpus::sharp_well(), 6.74),
    ] {
        let p = prof.validate().unwrap();
        let a = p.support_end();
        let q = symmetric_q(&p, e, 1e-4, a).unwrap();
        sym = sym.max((q - time_delay(&s_matrix_sample(&p, e, a).unwrap()).unwrap()).norm());
    }

    let samples = bw_band(10.0, 0.005, 0.1);
    let corr = correlation_integral(&samples, 0.005).unwrap();
    let direct = direct_delay_integral(&samples, corr.band.0, corr.band.1).unwrap();
    let corr_rel = ((corr.derivative - direct) / direct).abs();

    let mut ps_rel = 0.0f64;
    let mut deficits = Vec::new();
    for (e_max, de) in [(10.0, 0.02), (20.0, 0.02), (40.0, 0.04)] {
        let samples = bw_band(e_max, de, 0.5);
        let kg = van_kampen_kernel(&samples, 0.0, KernelOptions::default()).unwrap();
        let ps = phase_space_delay_integral(&wigner_distribution(&kg), 0.0).unwrap();
        let direct = direct_delay_integral(&samples, ps.band.0, ps.band.1).unwrap();
        ps_rel = ps_rel.max(((ps.integral - direct) / direct).abs());
        deficits.push(2.0 * PI * HBAR - ps.integral);
    }
    let tightening = deficits.windows(2).all(|w| w[1].abs() < w[0].abs());
    (
        sym < 1e-7 && corr_rel < 1e-2 && ps_rel < 3e-2 && tightening,
        format!(
            "symmetric quotient vs tau {sym:.2e} (< 1e-7); correlation slope {:.3}% (< 1%); phase space {:.2e} (< 3%); deficit vs 2 pi hbar over bands 10/20/40: {:.4} {:.4} {:.4}",
            100.0 * corr_rel,
            ps_rel,
            deficits[0],
            deficits[1],
            deficits[2]
        ),
    )
}

fn ac5() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let w0: f64 = rng.random_range(0.1..10.0);
        let w: f64 = rng.random_range(0.0..20.0);
        let g: f64 = rng.random_range(1e-4..1.0);
        let gamma = friction_to_width(g).unwrap();
        for conv in [PhaseConvention::Standard, PhaseConvention::PaperSign] {
            let d = classical_phase(w, w0, g, conv)
                - bw_phase(HBAR * w, &BWParams::new(HBAR * w0, gamma), conv);
            worst = worst.max(d.abs());
        }
    }
    (
        worst <= 1e-12,
        format!("10^4 draws, both sign conventions: max difference {worst:.2e} (<= 1e-12)"),
    )
}

fn ac6() -> (bool, String) {
    let base = OscillatorConfig {
        omega0: 1.0,
        ramp_rate_eps: 0.0,
        x0: 1.0,
        p0: 0.0,
        t_end: 1000.0,
        dt: 0.01,
    };
    let still = integrate_oscillator(&base).unwrap().max_action_drift();
    let d = drift_sweep(&base, &[1e-3, 1e-4], 2.0).unwrap();
    let ratio = d[0] / d[1];
    (
        ratio >= 5.0 && still < 1e-8,
        format!(
            "drift(1e-3) / drift(1e-4) = {:.3e} / {:.3e} = {ratio:.2} (>= 5); drift(0) = {still:.2e} (< 1e-8)",
            d[0], d[1]
        ),
    )
}

fn ac7() -> (bool, String) {
    let cfg = OscillatorConfig {
        omega0: 1.0,
        ramp_rate_eps: 1e-3,
        x0: 1.0,
        p0: 0.0,
        t_end: 1000.0,
        dt: 0.01,
    };
    let c = contraction_exponent(&integrate_oscillator(&cfg).unwrap()).unwrap();
    let want = 0.5 * cfg.ramp_rate_eps * cfg.omega0;
    let rel = (c.gamma_at_start - want).abs() / want;
    let width = c.equivalent_width().unwrap();
    let back = width_to_friction(width).unwrap();
    let ulps = (back.to_bits() as i64 - c.gamma_at_start.to_bits() as i64).abs();
    (
        rel < 0.05 && ulps <= 1,
        format!(
            "gamma(0) = {:.6e} vs eps omega0 / 2 = {want:.1e}, off by {:.2}% (< 5%); Gamma_eq = {width:.6e}, round trip {ulps} ulp (<= 1)",
            c.gamma_at_start,
            100.0 * rel
        ),
    )
}

fn ac8() -> (bool, String) {
    let bw = BWParams::new(5.0, 0.5);
    let samples: Vec<SMatrixSample> = (1..=1000)
        .map(|m| bw_sample(m as f64 * 0.01, &bw))
        .collect();
    let kg = van_kampen_kernel(&samples, 0.0, KernelOptions::default()).unwrap();
    let rate = tail_decay_rate(&kg, 4.0 / bw.gamma, 20.0 / bw.gamma).unwrap();
    let want = bw.gamma / (2.0 * HBAR);
    let rel = (rate - want).abs() / want;
    (
        rel < 0.1,
        format!(
            "tail slope of ln|H| = -{rate:.5} vs -Gamma/2hbar = -{want:.5}, off by {:.3}% (< 10%)",
            100.0 * rel
        ),
    )
}

fn ac9() -> (bool, String) {
    let mut worst = 0.0f64;
    for (e0, g) in [(1.0, 1e-3), (3.3, 0.02), (7.5, 0.4)] {
        let samples: Vec<(f64, f64)> = (0..64)
            .map(|i| {
                let e = e0 - 5.0 * g + 10.0 * g * i as f64 / 63.0;
                (e, bw_delay(e, e0, g))
            })
            .collect();
        let f = fit_bw(&samples, None).unwrap();
        worst = worst
            .max(((f.params.e0 - e0) / e0).abs())
            .max(((f.params.gamma - g) / g).abs());
    }
    let p = corpus::sharp_well().validate().unwrap();
    let grid = EnergyGrid::uniform(0.05, 32.0, 2000)
        .unwrap()
        .avoiding_thresholds(&p)
        .unwrap();
    let dp = integrate_delay_with(&p, &grid, p.support_end(), DelayOptions::default()).unwrap();
    let fits = fit_candidates(&dp, &detect_resonances(&dp));
    let (oe, og) = corpus::SHARP_WELL_ORACLE_POLES[0];
    let f = fits[0].as_ref().unwrap();
    let de = (f.params.e0 - oe).abs() / oe;
    let dg = (f.params.gamma - og).abs() / og;
    (
        worst < 1e-6 && de < 0.02 && dg < 0.02,
        format!(
            "noiseless round trip {worst:.2e} (< 1e-6); sharpest corpus peak E0 {:.6} vs {oe:.6}, Gamma {:.5e} vs {og:.5e}, off by {:.2e} / {:.2e} (< 2%)",
            f.params.e0, f.params.gamma, de, dg
        ),
    )
}

fn ac10() -> (bool, String) {
    let pool = |n: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .unwrap()
    };
    let many = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(4)
        .max(2);
    let verify_one = pool(1).install(|| report(&run_suite(3).unwrap()));
    let verify_many = pool(many).install(|| report(&run_suite(3).unwrap()));

    let cfg = parse_config(
        "[profile]\ngeometry = radial\nlayer = 3 -10\nlayer = 0.2 200\n[grid]\ne_min = 0.05\ne_max = 32\npoints = 2000\n\
         [delay]\ne_star = 31\n[wigner]\nde = 0.02\npoints = 1000\n",
    )
    .unwrap();
    let opts = RunOptions::default();
    let mut same_files = true;
    for cmd in [Command::Fit, Command::Wigner] {
        let a = pool(1).install(|| run(cmd, &cfg, &opts).unwrap());
        let b = pool(many).install(|| run(cmd, &cfg, &opts).unwrap());
        same_files &= a.outputs == b.outputs;
    }
    (
        verify_one == verify_many && same_files,
        format!(
            "verify report identical on 1 and {many} threads: {}; fit and wigner outputs identical: {same_files}",
            verify_one == verify_many
        ),
    )
}

fn main() {
    // `cargo test -- --list` and filters come through here too
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let planck_ratio = PLANCK / HBAR;
    println!("acceptance criteria (counting quantum h = {planck_ratio:.6} hbar)");
    let lines = vec![
        criterion("AC1 synthetic count", secs(1), ac1),
        criterion("AC2 corpus count", secs(30), ac2),
        criterion("AC3 unitarity and Hermiticity", secs(10), ac3),
        criterion("AC4 identity chain", secs(120), ac4),
        criterion("AC5 twin phase identity", secs(1), ac5),
        criterion("AC6 adiabatic scaling", secs(10), ac6),
        criterion("AC7 contraction exponent", secs(10), ac7),
        criterion("AC8 kernel decay", secs(5), ac8),
        criterion("AC9 fit quality", secs(5), ac9),
        criterion("AC10 determinism", secs(600), ac10),
    ];
    shallow_profile_info();
    let failed: Vec<&Line> = lines.iter().filter(|l| !l.passed).collect();
    println!(
        "{} of {} criteria passed",
        lines.len() - failed.len(),
        lines.len()
    );
    if !failed.is_empty() {
        for l in failed {
            eprintln!("failed: {} ({})", l.id, l.text);
        }
        std::process::exit(1);
    }
}
