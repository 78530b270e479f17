//! Invariant suite behind the `verify` subcommand.
//!
//! Every check computes one measured quantity, compares it with a fixed
//! limit and records both. Random draws come from a seeded ChaCha stream, so
//! the report is reproducible.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::corpus;
use crate::delay::{
    count_resonances, detect_resonances, hermiticity_defect, integrate_delay_with, q_matrix,
    time_delay, CountingQuantum, DelayOptions, DelayProfile,
};
use crate::engine::{s_matrix_sample, EnergyGrid, SMatrixSample};
use crate::error::Result;
use crate::io::ingest::ingest_phase_shifts;
use crate::oscillator::{
    contraction_exponent, damped_response, integrate_oscillator, turning_points, wkb_envelope,
    OscillatorConfig,
};
use crate::potential::ValidatedProfile;
use crate::resonance::{
    bw_delay, bw_phase, bw_sample, classical_phase, fit_bw, fit_candidates, friction_to_width,
    wavepacket_survival, width_to_friction, BWParams, PhaseConvention,
};
use crate::units::{velocity, HBAR, PLANCK};
use crate::wigner::{
    band_samples, correlation_integral, direct_delay_integral, phase_space_delay_integral,
    tail_decay_rate, van_kampen_kernel, wigner_distribution, KernelOptions,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn below(name: &str, value: f64, limit: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value < limit,
            detail,
        }
    }

    fn above(name: &str, value: f64, limit: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value >= limit,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<34} value={:.6e} limit={:.6e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.limit,
            self.detail
        )
    }
}

fn validated(p: crate::potential::PotentialProfile) -> ValidatedProfile {
    p.validate().expect("bundled profiles are valid")
}

/// Analytic delay of an isolated resonance on a uniform grid.
pub fn synthetic_profile(p: &BWParams, lo: f64, hi: f64, n: usize) -> Result<DelayProfile> {
    let grid = EnergyGrid::uniform(lo, hi, n)?;
    let tau = grid
        .points()
        .iter()
        .map(|&e| bw_delay(e, p.e0, p.gamma))
        .collect();
    let phase = grid
        .points()
        .iter()
        .map(|&e| bw_phase(e, p, PhaseConvention::Standard))
        .collect();
    DelayProfile::from_samples(grid, tau, phase, 1)
}

/// Delay profile of the sharp corpus well on `[0.05, 32]` at the support end.
pub fn sharp_well_profile(points: usize) -> Result<(ValidatedProfile, DelayProfile)> {
    let p = validated(corpus::sharp_well());
    let grid = EnergyGrid::uniform(0.05, 32.0, points)?.avoiding_thresholds(&p)?;
    let dp = integrate_delay_with(&p, &grid, p.support_end(), DelayOptions::default())?;
    Ok((p, dp))
}

pub const CORPUS_E_STAR: f64 = 31.0;

fn counting(checks: &mut Vec<Check>) -> Result<()> {
    let bw = BWParams::new(5.0, 1e-3);
    let band = 1e3 * bw.gamma;
    let dp = synthetic_profile(&bw, (bw.e0 - band).max(1e-9), bw.e0 + band, 40_001)?;
    let c = count_resonances(&dp, dp.grid().last(), CountingQuantum::Planck)?;
    checks.push(Check::below(
        "count.synthetic_bw",
        (c.count - 1.0).abs(),
        2e-3,
        format!("I/h={:.6} I/hbar={:.6}", c.count, c.count_hbar),
    ));

    let (_, dp) = sharp_well_profile(2000)?;
    let c = count_resonances(&dp, CORPUS_E_STAR, CountingQuantum::Planck)?;
    checks.push(Check::below(
        "count.corpus",
        (c.count - corpus::SHARP_WELL_ORACLE_COUNT as f64).abs(),
        0.15,
        format!(
            "I/h={:.6} oracle={}",
            c.count,
            corpus::SHARP_WELL_ORACLE_COUNT
        ),
    ));
    let (_, fine) = sharp_well_profile(4000)?;
    let cf = count_resonances(&fine, CORPUS_E_STAR, CountingQuantum::Planck)?;
    checks.push(Check::below(
        "count.grid_convergence",
        ((cf.integral - c.integral) / c.integral).abs(),
        1e-3,
        format!("I(2000)={:.9} I(4000)={:.9}", c.integral, cf.integral),
    ));
    checks.push(Check::below(
        "count.stability",
        (cf.count - c.count).abs(),
        1e-2,
        format!("points {} vs {}", dp.len(), fine.len()),
    ));

    let found = detect_resonances(&dp);
    let per: Vec<String> = found
        .iter()
        .map(|r| format!("{:.4}", r.integral_quantum / PLANCK))
        .collect();
    let worst = found
        .iter()
        .map(|r| (r.integral_quantum / PLANCK - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::below(
        "count.per_resonance_quantum",
        worst,
        0.1,
        format!("{} candidates, quanta [{}]", found.len(), per.join(", ")),
    ));
    checks.push(Check::below(
        "detect.corpus_candidates",
        (found.len() as f64 - 3.0).abs(),
        0.5,
        format!("{} found", found.len()),
    ));

    let fits = fit_candidates(&dp, &found);
    let (e0, g0) = corpus::SHARP_WELL_ORACLE_POLES[0];
    let (de, dg) = match fits.first() {
        Some(Ok(f)) => (
            (f.params.e0 - e0).abs() / e0,
            (f.params.gamma - g0).abs() / g0,
        ),
        _ => (f64::INFINITY, f64::INFINITY),
    };
    checks.push(Check::below(
        "fit.corpus_sharpest",
        de.max(dg),
        0.02,
        format!("dE0/E0={de:.3e} dG/G={dg:.3e}"),
    ));
    Ok(())
}

fn reference_shift(checks: &mut Vec<Check>) -> Result<()> {
    let p = validated(corpus::sharp_well());
    let grid = EnergyGrid::uniform(0.5, 32.0, 3001)?;
    let opts = DelayOptions {
        refine: false,
        ..DelayOptions::default()
    };
    let a = p.support_end();
    let d = 0.5;
    let base = integrate_delay_with(&p, &grid, a, opts)?;
    let moved = integrate_delay_with(&p, &grid, a + d, opts)?;
    let scale = base.tau().iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let mut worst = 0.0f64;
    for ((e, t0), t1) in grid.points().iter().zip(base.tau()).zip(moved.tau()) {
        worst = worst.max((t1 - t0 - 2.0 * d / velocity(*e)).abs() / scale);
    }
    checks.push(Check::below(
        "delay.reference_shift_tau",
        worst,
        1e-8,
        format!("a={a} -> {}", a + d),
    ));
    let n = grid.len() - 1;
    let shift = moved.cumulative()[n] - base.cumulative()[n];
    let analytic = 2.0 * d * (grid.last().sqrt() - grid.first().sqrt());
    checks.push(Check::below(
        "delay.reference_shift_integral",
        (shift - analytic).abs(),
        1e-8,
        format!("numeric={shift:.12} analytic={analytic:.12}"),
    ));
    Ok(())
}

fn unitarity(checks: &mut Vec<Check>) -> Result<()> {
    let (mut s_worst, mut q_worst, mut count) = (0.0f64, 0.0f64, 0usize);
    for (_, prof) in corpus::all() {
        let p = validated(prof);
        let grid = EnergyGrid::uniform(0.05, 40.0, 1000)?.avoiding_thresholds(&p)?;
        let a = p.support_end();
        for &e in grid.points() {
            let smp = s_matrix_sample(&p, e, a)?;
            s_worst = s_worst.max(smp.unitarity_defect());
            q_worst = q_worst.max(hermiticity_defect(&q_matrix(&smp)?));
            count += 1;
        }
    }
    checks.push(Check::below(
        "engine.unitarity",
        s_worst,
        1e-12,
        format!("{count} samples"),
    ));
    checks.push(Check::below(
        "delay.hermiticity",
        q_worst,
        1e-10,
        format!("{count} samples"),
    ));
    Ok(())
}

fn identity_chain(checks: &mut Vec<Check>) -> Result<()> {
    let mut worst = 0.0f64;
    let cases = [
        (corpus::broad_well(), 1.0),
        (corpus::broad_well(), 7.0),
        (corpus::square_well(), 1.0),
        (corpus::barrier(), 2.0),
        (corpus::sharp_well(), 5.0),
    ];
    for (prof, e) in cases {
        let p = validated(prof);
        let a = p.support_end();
        let q = crate::wigner::symmetric_q(&p, e, 0.01, a)?;
        let tau = time_delay(&s_matrix_sample(&p, e, a)?)?;
        worst = worst.max((q - tau).norm());
    }
    checks.push(Check::below(
        "wigner.symmetric_q",
        worst,
        1e-7,
        "5 profile/energy pairs".into(),
    ));

    let bw = BWParams::new(5.0, 0.1);
    let de = 0.005;
    let lo = bw.e0 - 40.0 * bw.gamma;
    let samples: Vec<SMatrixSample> = (0..2001)
        .map(|m| bw_sample(lo + m as f64 * de, &bw))
        .collect();
    let c1 = correlation_integral(&samples, de)?;
    let c2 = correlation_integral(&samples, 2.0 * de)?;
    let d1 = direct_delay_integral(&samples, c1.band.0, c1.band.1)?;
    let d2 = direct_delay_integral(&samples, c2.band.0, c2.band.1)?;
    checks.push(Check::below(
        "wigner.correlation_derivative",
        ((c1.derivative - d1) / d1).abs(),
        1e-2,
        format!("derivative={:.6} direct={:.6}", c1.derivative, d1),
    ));
    let ratio = (c2.derivative - d2).abs() / (c1.derivative - d1).abs();
    checks.push(Check::below(
        "wigner.correlation_order",
        (ratio - 4.0).abs(),
        1.0,
        format!("error ratio {ratio:.3}"),
    ));

    let mut deficits = Vec::new();
    let mut worst_rel = 0.0f64;
    for (e_max, de) in [(10.0, 0.02), (20.0, 0.02), (40.0, 0.04)] {
        let bw = BWParams::new(0.5 * e_max, 0.5);
        let n = (e_max / de) as usize;
        let samples: Vec<SMatrixSample> = (1..=n).map(|m| bw_sample(m as f64 * de, &bw)).collect();
        let kg = van_kampen_kernel(&samples, 0.0, KernelOptions::default())?;
        let ps = phase_space_delay_integral(&wigner_distribution(&kg), 0.0)?;
        let direct = direct_delay_integral(&samples, ps.band.0, ps.band.1)?;
        worst_rel = worst_rel.max(((ps.integral - direct) / direct).abs());
        deficits.push(2.0 * PI * HBAR - ps.integral);
    }
    checks.push(Check::below(
        "wigner.phase_space_vs_direct",
        worst_rel,
        3e-2,
        "3 bands".into(),
    ));
    let monotone = deficits.windows(2).all(|w| w[1].abs() < w[0].abs());
    checks.push(Check {
        name: "wigner.band_tightening".into(),
        value: deficits[deficits.len() - 1].abs(),
        limit: deficits[0].abs(),
        passed: monotone,
        detail: format!(
            "deficits vs 2 pi hbar: {:.4e} {:.4e} {:.4e}",
            deficits[0], deficits[1], deficits[2]
        ),
    });

    let p = validated(corpus::broad_well());
    let a = p.support_end();
    let samples = band_samples(&p, 0.02, 1000, a)?;
    let kg = van_kampen_kernel(&samples, a, KernelOptions::default())?;
    let wg = wigner_distribution(&kg);
    let ps = phase_space_delay_integral(&wg, a)?;
    let grid = EnergyGrid::new(samples.iter().map(|s| s.energy).collect())?;
    let core = integrate_delay_with(
        &p,
        &grid,
        a,
        DelayOptions {
            refine: false,
            ..DelayOptions::default()
        },
    )?;
    let core_i = core.integral_at(ps.band.1)? - core.integral_at(ps.band.0)?;
    checks.push(Check::below(
        "wigner.phase_space_vs_core",
        ((ps.referenced_integral() - core_i) / core_i).abs(),
        3e-2,
        format!(
            "phase-space={:.6} core={:.6}",
            ps.referenced_integral(),
            core_i
        ),
    ));
    checks.push(Check::below(
        "wigner.realness",
        wg.imag_residue,
        1e-10,
        String::new(),
    ));

    let back = kg.reconstruct();
    let (lo, hi) = kg.interior();
    let (mut num, mut den) = (0.0, 0.0);
    for (j, s) in samples.iter().enumerate() {
        if s.energy >= lo && s.energy <= hi {
            let want = s.s[(0, 0)] * kg.weights[j];
            num += (back[j] - want).norm_sqr();
            den += want.norm_sqr();
        }
    }
    checks.push(Check::below(
        "wigner.kernel_round_trip",
        (num / den).sqrt(),
        1e-2,
        "interior RMS".into(),
    ));

    let bw = BWParams::new(5.0, 0.5);
    let samples: Vec<SMatrixSample> = (1..=1000)
        .map(|m| bw_sample(m as f64 * 0.01, &bw))
        .collect();
    let kg = van_kampen_kernel(&samples, 0.0, KernelOptions::default())?;
    let rate = tail_decay_rate(&kg, 4.0 / bw.gamma, 20.0 / bw.gamma)?;
    let expected = bw.gamma / (2.0 * HBAR);
    checks.push(Check::below(
        "wigner.kernel_tail",
        ((rate - expected) / expected).abs(),
        0.1,
        format!("rate={rate:.6} expected={expected:.6}"),
    ));
    let wg = wigner_distribution(&kg);
    let marg = wg.energy_marginal();
    let mut flat = 0.0f64;
    for (c, e) in wg.energy.iter().enumerate() {
        if *e >= wg.interior.0 && *e <= wg.interior.1 {
            flat = flat.max((marg[c] / wg.weights[c].powi(2) - 1.0).abs());
        }
    }
    checks.push(Check::below(
        "wigner.marginal_flat",
        flat,
        5e-2,
        "marginal / window^2".into(),
    ));

    let mut vals = Vec::new();
    for s in [0.0, 0.5, 1.0] {
        let bw = BWParams::new(5.0 * (1.0 + 1e-3 * s), 0.5);
        let shift = bw.e0 - 5.0;
        let samples: Vec<SMatrixSample> = (1..=500)
            .map(|m| bw_sample(shift + m as f64 * 0.02, &bw))
            .collect();
        let kg = van_kampen_kernel(&samples, 0.0, KernelOptions::default())?;
        vals.push(phase_space_delay_integral(&wigner_distribution(&kg), 0.0)?.integral);
    }
    let drift = vals
        .iter()
        .map(|v| ((v - vals[0]) / vals[0]).abs())
        .fold(0.0, f64::max);
    checks.push(Check::below(
        "wigner.adiabatic_ramp",
        drift,
        5e-3,
        "E0 -> E0 (1 + 1e-3 s)".into(),
    ));
    Ok(())
}

fn resonance_fit(checks: &mut Vec<Check>, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let w0: f64 = rng.random_range(0.1..10.0);
        let w: f64 = rng.random_range(0.0..20.0);
        let g: f64 = rng.random_range(1e-4..1.0);
        let a = classical_phase(w, w0, g, PhaseConvention::Standard);
        let b = bw_phase(
            HBAR * w,
            &BWParams::new(HBAR * w0, friction_to_width(g)?),
            PhaseConvention::Standard,
        );
        worst = worst.max((a - b).abs());
    }
    checks.push(Check {
        name: "fit.twin_identity".into(),
        value: worst,
        limit: 1e-12,
        passed: worst <= 1e-12,
        detail: "10000 draws".into(),
    });

    let mut worst = 0.0f64;
    let mut unconverged = 0;
    for _ in 0..50 {
        let e0 = rng.random_range(0.5..10.0);
        let g = 10f64.powf(rng.random_range(-3.0..0.0));
        let samples = lorentz(e0, g, 0.0, 64);
        let f = fit_bw(&samples, None)?;
        if !f.converged {
            unconverged += 1;
        }
        worst = worst
            .max(((f.params.e0 - e0) / e0).abs())
            .max(((f.params.gamma - g) / g).abs());
    }
    checks.push(Check::below(
        "fit.noiseless_round_trip",
        worst,
        1e-6,
        format!("50 draws, {unconverged} unconverged"),
    ));

    let (mut inside, mut total, mut worst_sigma) = (0, 0, 0.0f64);
    for _ in 0..50 {
        let e0 = rng.random_range(0.5..10.0);
        let g = 10f64.powf(rng.random_range(-3.0..0.0));
        let noise = Normal::new(0.0, 0.01 * 4.0 * HBAR / g).expect("positive sigma");
        let samples: Vec<(f64, f64)> = lorentz(e0, g, 0.0, 64)
            .into_iter()
            .map(|(e, t)| (e, t + noise.sample(rng)))
            .collect();
        let f = fit_bw(&samples, None)?;
        for z in [
            (f.params.e0 - e0) / f.sigma_e0(),
            (f.params.gamma - g) / f.sigma_gamma(),
        ] {
            total += 1;
            if z.abs() <= 3.0 {
                inside += 1;
            }
            worst_sigma = worst_sigma.max(z.abs());
        }
    }
    let frac = inside as f64 / total as f64;
    checks.push(Check::above(
        "fit.noisy_within_3_sigma",
        frac,
        0.95,
        format!("largest deviation {worst_sigma:.2} sigma"),
    ));

    let g = 0.37;
    let rt = width_to_friction(friction_to_width(g)?)?;
    checks.push(Check::below(
        "fit.width_friction_round_trip",
        (rt - g).abs(),
        f64::EPSILON * g,
        String::new(),
    ));
    let mut worst = 0.0f64;
    for k in 0..100 {
        let t = k as f64 * 0.1;
        worst = worst
            .max((wavepacket_survival(friction_to_width(g)?, t)? - (-2.0 * g * t).exp()).abs());
    }
    checks.push(Check::below(
        "fit.survival_vs_damping",
        worst,
        1e-14,
        String::new(),
    ));

    for (rows, tol) in [(50usize, 0.05), (500, 0.01)] {
        let bw = BWParams::new(0.77, 0.15);
        let mut csv = String::from("E,delta\n");
        for i in 0..rows {
            let e = bw.e0 - 5.0 * bw.gamma + 10.0 * bw.gamma * i as f64 / (rows - 1) as f64;
            csv.push_str(&format!(
                "{e:?},{:?}\n",
                bw_phase(e, &bw, PhaseConvention::Standard)
            ));
        }
        let dp = ingest_phase_shifts(&csv)?;
        let samples: Vec<(f64, f64)> = dp
            .energies()
            .iter()
            .copied()
            .zip(dp.tau().iter().copied())
            .collect();
        let f = fit_bw(&samples, None)?;
        let err = ((f.params.gamma - bw.gamma) / bw.gamma).abs();
        checks.push(Check::below(
            &format!("ingest.round_trip_{rows}"),
            err,
            tol,
            format!("gamma={:.6}", f.params.gamma),
        ));
    }
    Ok(())
}

fn lorentz(e0: f64, g: f64, c: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let e = e0 - 5.0 * g + 10.0 * g * i as f64 / (n - 1) as f64;
            (e, bw_delay(e, e0, g) + c)
        })
        .collect()
}

fn oscillator(checks: &mut Vec<Check>) -> Result<()> {
    let base = OscillatorConfig {
        omega0: 1.0,
        ramp_rate_eps: 0.0,
        x0: 1.0,
        p0: 0.0,
        t_end: 1000.0,
        dt: 0.01,
    };
    let drift0 = integrate_oscillator(&base)?.max_action_drift();
    checks.push(Check::below(
        "oscillator.static_drift",
        drift0,
        1e-8,
        String::new(),
    ));
    let drifts = crate::oscillator::drift_sweep(&base, &[1e-2, 1e-3, 1e-4], 2.0)?;
    let r1 = drifts[0] / drifts[1];
    let r2 = drifts[1] / drifts[2];
    checks.push(Check::above(
        "oscillator.adiabatic_scaling",
        r1.min(r2),
        5.0,
        format!(
            "drifts {:.3e} {:.3e} {:.3e}",
            drifts[0], drifts[1], drifts[2]
        ),
    ));

    let err = |dt: f64| -> Result<(f64, f64)> {
        let tr = integrate_oscillator(&OscillatorConfig {
            t_end: 100.0,
            dt,
            ..base
        })?;
        let n = tr.len() - 1;
        let t = tr.times[n];
        Ok((
            (tr.energy[n] - 0.5).abs(),
            (tr.x[n] - t.cos()).hypot(tr.p[n] + t.sin()),
        ))
    };
    let (e1, s1) = err(0.02)?;
    let (e2, s2) = err(0.01)?;
    checks.push(Check::below(
        "oscillator.rk4_state_order",
        (s1 / s2 - 16.0).abs(),
        2.0,
        format!("state ratio {:.3}", s1 / s2),
    ));
    checks.push(Check::above(
        "oscillator.rk4_energy_order",
        e1 / e2,
        16.0,
        format!("energy ratio {:.3}", e1 / e2),
    ));

    let cfg = OscillatorConfig {
        ramp_rate_eps: 1e-3,
        t_end: 1000.0,
        ..base
    };
    let tr = integrate_oscillator(&cfg)?;
    let tp = turning_points(&tr);
    let env = tp
        .iter()
        .map(|(t, a)| (a / wkb_envelope(&cfg, *t) - 1.0).abs())
        .fold(0.0, f64::max);
    checks.push(Check::below(
        "oscillator.wkb_envelope",
        env,
        1e-2,
        format!("{} turning points", tp.len()),
    ));
    let mono = tp.windows(2).all(|w| w[1].1 < w[0].1);
    checks.push(Check {
        name: "oscillator.spiral_monotone".into(),
        value: if mono { 1.0 } else { 0.0 },
        limit: 1.0,
        passed: mono,
        detail: String::new(),
    });
    let c = contraction_exponent(&tr)?;
    let want = 0.5 * cfg.ramp_rate_eps * cfg.omega0;
    checks.push(Check::below(
        "oscillator.gamma_at_start",
        ((c.gamma_at_start - want) / want).abs(),
        0.05,
        format!("gamma={:.6e} expected={want:.6e}", c.gamma_at_start),
    ));
    checks.push(Check::below(
        "oscillator.gamma_mean",
        ((c.mean_gamma - c.mean_expected) / c.mean_expected).abs(),
        0.05,
        format!(
            "mean gamma={:.6e} expected={:.6e}",
            c.mean_gamma, c.mean_expected
        ),
    ));
    let width = c.equivalent_width()?;
    checks.push(Check::below(
        "oscillator.equivalent_width",
        (width_to_friction(width)? - c.gamma_at_start).abs(),
        f64::EPSILON * c.gamma_at_start,
        format!("Gamma_eq={width:.6e}"),
    ));

    let (w0, g) = (1.0, 0.005);
    let mut worst = 0.0f64;
    for k in -10..=10 {
        let w = w0 + g * k as f64 / 10.0;
        let (_, lag) = damped_response(w, w0, g, 1.0);
        let cl = classical_phase(w, w0, g, PhaseConvention::Standard);
        worst = worst.max(((lag - cl) / cl).abs());
    }
    checks.push(Check::below(
        "oscillator.near_resonance_phase",
        worst,
        1e-2,
        String::new(),
    ));
    Ok(())
}

/// Runs the whole suite.
pub fn run_suite(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    unitarity(&mut checks)?;
    counting(&mut checks)?;
    reference_shift(&mut checks)?;
    identity_chain(&mut checks)?;
    resonance_fit(&mut checks, &mut rng)?;
    oscillator(&mut checks)?;
    Ok(checks)
}

pub fn report(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&c.line());
        s.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    s.push_str(&format!("{} checks, {} failed\n", checks.len(), failed));
    s
}
