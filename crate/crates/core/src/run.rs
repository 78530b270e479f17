//! Subcommand orchestration. Each stage computes in memory and returns the
//! files it wants written; nothing here touches the file system except
//! reading the ingest table.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::delay::{
    count_resonances, detect_resonances, integrate_delay_with, time_delay, CountingQuantum,
    DelayOptions, DelayProfile, ResonanceCandidate, ResonanceCount,
};
use crate::engine::{s_matrix_sample, EnergyGrid, SMatrixSample};
use crate::error::{Error, Result};
use crate::io::config::{RunConfig, WignerSource, FORMAT_VERSION};
use crate::io::emit::{delay_csv, kernel_dat, series_dat, stride_indices, wigner_dat, Outputs};
use crate::io::ingest::ingest_phase_shifts;
use crate::oscillator::{
    contraction_exponent, integrate_oscillator, turning_points, wkb_envelope, ContractionSeries,
};
use crate::potential::ValidatedProfile;
use crate::resonance::{
    bw_phase, bw_sample, fit_bw_phase, fit_candidates, wrap_angle, BWParams, FitResult,
    PhaseConvention,
};
use crate::units::{PhysicalUnits, PLANCK};
use crate::verify;
use crate::wigner::{
    band_samples, correlation_integral, direct_delay_integral, phase_space_delay_integral,
    symmetric_q, tail_decay_rate, van_kampen_kernel, wigner_distribution,
};

/// Rows kept in decimated plot files.
const PLOT_ROWS: usize = 20_000;
const HEATMAP_SIDE: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Scan,
    Count,
    Fit,
    Oscillator,
    Wigner,
    Ingest,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Count => "count",
            Command::Fit => "fit",
            Command::Oscillator => "oscillator",
            Command::Wigner => "wigner",
            Command::Ingest => "ingest",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Overrides the config's counting quantum.
    pub quantum: Option<CountingQuantum>,
    pub paper_sign: bool,
    pub seed: u64,
    /// Relative paths in the config resolve against this directory.
    pub base_dir: PathBuf,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            quantum: None,
            paper_sign: false,
            seed: 0,
            base_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub outputs: Outputs,
    pub report: String,
    /// An invariant check failed; the files are still worth writing.
    pub failed: bool,
}

pub fn run(cmd: Command, cfg: &RunConfig, opts: &RunOptions) -> Result<RunOutput> {
    let quantum = opts.quantum.unwrap_or(cfg.delay.quantum);
    let convention = if opts.paper_sign {
        PhaseConvention::PaperSign
    } else {
        cfg.fit.convention
    };
    let mut out = RunOutput {
        outputs: Outputs::default(),
        report: String::new(),
        failed: false,
    };
    let _ = writeln!(
        out.report,
        "delaycount {} (format_version {FORMAT_VERSION})\n",
        cmd.name()
    );
    match cmd {
        Command::Scan | Command::Count | Command::Fit => {
            let stage = DelayStage::compute(cfg)?;
            stage.emit(cmd, quantum, convention, cfg, &mut out)?;
        }
        Command::Ingest => {
            let rel = cfg.ingest.as_ref().ok_or_else(|| {
                missing("io-cli", "the ingest subcommand needs an [ingest] section")
            })?;
            let path = opts.base_dir.join(rel);
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let dp = ingest_phase_shifts(&text)?;
            let stage = DelayStage {
                source: format!("ingest:{}", rel.display()),
                profile: None,
                a: None,
                dp,
            };
            stage.emit(Command::Fit, quantum, convention, cfg, &mut out)?;
        }
        Command::Oscillator => oscillator_stage(cfg, &mut out)?,
        Command::Wigner => wigner_stage(cfg, &mut out)?,
        Command::Verify => {
            let checks = verify::run_suite(opts.seed)?;
            let text = verify::report(&checks);
            out.failed = checks.iter().any(|c| !c.passed);
            out.outputs.add("verify.txt", text.clone());
            let _ = writeln!(out.report, "seed {}\n", opts.seed);
            out.report.push_str(&text);
        }
    }
    out.outputs.add("report.txt", out.report.clone());
    Ok(out)
}

fn missing(module: &str, msg: &str) -> Error {
    Error::ConstraintViolation(format!("{module}: {msg}"))
}

struct DelayStage {
    source: String,
    profile: Option<ValidatedProfile>,
    a: Option<f64>,
    dp: DelayProfile,
}

impl DelayStage {
    fn compute(cfg: &RunConfig) -> Result<Self> {
        let profile = cfg
            .profile
            .as_ref()
            .ok_or_else(|| missing("potential-model", "a [profile] section is required"))?;
        let grid = cfg
            .grid
            .ok_or_else(|| missing("scattering-engine", "a [grid] section is required"))?;
        let p = profile.validate()?;
        let a = cfg.delay.reference.unwrap_or_else(|| p.support_end());
        let energies =
            EnergyGrid::uniform(grid.e_min, grid.e_max, grid.points)?.avoiding_thresholds(&p)?;
        let dp = integrate_delay_with(
            &p,
            &energies,
            a,
            DelayOptions {
                refine: grid.refine,
                ..DelayOptions::default()
            },
        )?;
        Ok(Self {
            source: "profile".into(),
            profile: Some(p),
            a: Some(a),
            dp,
        })
    }

    fn emit(
        &self,
        cmd: Command,
        quantum: CountingQuantum,
        conv: PhaseConvention,
        cfg: &RunConfig,
        out: &mut RunOutput,
    ) -> Result<()> {
        let dp = &self.dp;
        let e_star = match (cmd, cfg.delay.e_star) {
            (Command::Ingest, _) | (_, None) => dp.grid().last(),
            (_, Some(e)) => e,
        };
        let count = count_resonances(dp, e_star, quantum)?;
        out.outputs.add("delay.csv", delay_csv(dp, quantum.value()));
        let idx = stride_indices(dp.len(), PLOT_ROWS);
        let pick = |v: &[f64]| -> Vec<f64> { idx.iter().map(|&i| v[i]).collect() };
        let e = pick(dp.energies());
        out.outputs.add(
            "plot/tau.dat",
            series_dat(&["time delay tau(E)", "E tau"], &[&e, &pick(dp.tau())]),
        );
        out.outputs.add(
            "plot/integral.dat",
            series_dat(
                &["running integral I(E)", "E I"],
                &[&e, &pick(dp.cumulative())],
            ),
        );
        out.outputs.add(
            "plot/phase.dat",
            series_dat(
                &["half phase of det S, unwrapped", "E delta"],
                &[&e, &pick(dp.phase())],
            ),
        );

        let r = &mut out.report;
        let _ = writeln!(r, "source: {}", self.source);
        if let Some(p) = &self.profile {
            let _ = writeln!(
                r,
                "geometry: {:?}, {} layers, support ends at {}",
                p.geometry(),
                p.layers().len(),
                p.support_end()
            );
        }
        if let Some(a) = self.a {
            let _ = writeln!(r, "reference length a = {a}");
        }
        let _ = writeln!(
            r,
            "grid: {} points on [{}, {}]{}\n",
            dp.len(),
            dp.grid().first(),
            dp.grid().last(),
            if self.profile.is_some() && cfg.grid.is_some_and(|g| g.refine) {
                " after refinement"
            } else {
                ""
            }
        );
        write_count(r, &count);
        if dp.channels() > 1 {
            let _ = writeln!(
                r,
                "  note: tau is averaged over {} channels, so an isolated resonance adds h / {} to I",
                dp.channels(),
                dp.channels()
            );
        }

        if cmd == Command::Scan {
            return Ok(());
        }
        let cands = detect_resonances(dp);
        let fits = if cmd == Command::Fit {
            fit_candidates(dp, &cands)
        } else {
            Vec::new()
        };
        write_candidates(r, &cands, &fits, cfg.units);

        let mut phase_checks = Vec::new();
        if cmd == Command::Fit && cfg.fit.phase_check {
            for f in fits.iter().flatten() {
                phase_checks.push(phase_check(dp, &f.params, conv));
            }
            let _ = writeln!(r, "\nphase cross-check ({}):", convention_name(conv));
            for pc in &phase_checks {
                let _ = writeln!(r, "  {pc}");
            }
        }

        let doc = json!({
            "format_version": FORMAT_VERSION,
            "source": self.source,
            "reference_length": self.a,
            "grid": { "points": dp.len(), "e_min": dp.grid().first(), "e_max": dp.grid().last() },
            "count": count_json(&count),
            "candidates": cands.iter().map(candidate_json).collect::<Vec<_>>(),
            "fits": fits.iter().map(fit_json).collect::<Vec<_>>(),
            "phase_checks": phase_checks,
            "diagnostics": {
                "convention": convention_name(conv),
                "max_tau": dp.tau().iter().copied().fold(f64::NEG_INFINITY, f64::max),
                "min_tau": dp.tau().iter().copied().fold(f64::INFINITY, f64::min),
                "units": cfg.units.map(|u| json!({
                    "mass_amu": u.mass_amu,
                    "length_nm": u.length_nm,
                    "energy_unit_nev": u.energy_unit_nev(),
                    "time_unit_ns": u.time_unit_ns(),
                })),
            },
        });
        out.outputs.add_json("resonances.json", &doc)
    }
}

fn convention_name(c: PhaseConvention) -> &'static str {
    match c {
        PhaseConvention::Standard => "standard",
        PhaseConvention::PaperSign => "paper-sign",
    }
}

fn write_count(r: &mut String, c: &ResonanceCount) {
    let _ = writeln!(r, "I(E*) = {:.9} at E* = {}", c.integral, c.e_star);
    let _ = writeln!(r, "  I / h    = {:.6}", c.count_h);
    let _ = writeln!(r, "  I / hbar = {:.6}", c.count_hbar);
    let _ = writeln!(
        r,
        "  selected quantum {}: count {:.6}, nearest integer {}, residual {:+.6}",
        c.quantum.label(),
        c.count,
        c.nearest,
        c.residual
    );
}

fn count_json(c: &ResonanceCount) -> Value {
    json!({
        "e_star": c.e_star,
        "integral": c.integral,
        "selected_quantum": c.quantum.label(),
        "selected_quantum_value": c.quantum.value(),
        "count": c.count,
        "nearest": c.nearest,
        "residual": c.residual,
        "count_h": c.count_h,
        "count_hbar": c.count_hbar,
    })
}

fn candidate_json(c: &ResonanceCandidate) -> Value {
    json!({
        "e0": c.e0,
        "gamma": c.gamma,
        "peak_tau": c.peak_tau,
        "integral_quantum": c.integral_quantum,
        "quanta_h": c.integral_quantum / PLANCK,
        "quanta_hbar": c.integral_quantum,
        "window": [c.window.0, c.window.1],
    })
}

fn fit_json(f: &Result<FitResult>) -> Value {
    match f {
        Ok(f) => json!({
            "e0": f.params.e0,
            "gamma": f.params.gamma,
            "background_tau": f.background_tau,
            "sigma_e0": f.sigma_e0(),
            "sigma_gamma": f.sigma_gamma(),
            "covariance": f.covariance,
            "residual_norm": f.residual_norm,
            "iterations": f.iterations,
            "converged": f.converged,
            "condition_number": f.condition_number,
            "degenerate": f.is_degenerate(),
            "group_size": f.group_size,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn write_candidates(
    r: &mut String,
    cands: &[ResonanceCandidate],
    fits: &[Result<FitResult>],
    units: Option<PhysicalUnits>,
) {
    let _ = writeln!(r, "\n{} resonance candidates", cands.len());
    for (k, c) in cands.iter().enumerate() {
        let q = c.integral_quantum / PLANCK;
        let verdict = if (q - 1.0).abs() < 0.5 {
            "counts as one resonance"
        } else {
            "does not count as one"
        };
        let _ = writeln!(
            r,
            "  #{} E0 = {:.6} Gamma = {:.6e}: integral over E0 +- 5 Gamma = {:.6} = {:.4} h = {:.4} hbar, {verdict}",
            k + 1,
            c.e0,
            c.gamma,
            c.integral_quantum,
            q,
            c.integral_quantum
        );
        if let Some(f) = fits.get(k) {
            match f {
                Ok(f) => {
                    let _ = writeln!(
                        r,
                        "     fit E0 = {:.9} +- {:.2e}, Gamma = {:.6e} +- {:.2e}, condition {:.2e}{}",
                        f.params.e0,
                        f.sigma_e0(),
                        f.params.gamma,
                        f.sigma_gamma(),
                        f.condition_number,
                        if f.is_degenerate() { " (degenerate)" } else { "" }
                    );
                }
                Err(e) => {
                    let _ = writeln!(r, "     fit failed: {e}");
                }
            }
        }
        if let Some(u) = units {
            let _ = writeln!(
                r,
                "     physical: E0 = {:.6} neV, Gamma = {:.6e} neV, peak delay = {:.6e} ns",
                c.e0 * u.energy_unit_nev(),
                c.gamma * u.energy_unit_nev(),
                c.peak_tau * u.time_unit_ns()
            );
        }
    }
}

/// Phase fit over `E0 +- 5 Gamma`. Under the literal sign convention the
/// model sweeps downward, so the fit reports the mismatch instead of hiding it.
fn phase_check(dp: &DelayProfile, init: &BWParams, conv: PhaseConvention) -> String {
    let lo = init.e0 - 5.0 * init.gamma;
    let hi = init.e0 + 5.0 * init.gamma;
    let samples: Vec<(f64, f64)> = dp
        .energies()
        .iter()
        .zip(dp.phase())
        .filter(|(e, _)| **e >= lo && **e <= hi)
        .map(|(&e, &d)| (e, d))
        .collect();
    let rise = match (samples.first(), samples.last()) {
        (Some(a), Some(b)) => b.1 - a.1,
        _ => 0.0,
    };
    match fit_bw_phase(&samples, *init, conv) {
        Ok(f) => {
            let rms = (samples
                .iter()
                .map(|&(e, d)| wrap_angle(bw_phase(e, &f.params, conv) - d).powi(2))
                .sum::<f64>()
                / samples.len() as f64)
                .sqrt();
            if !(f.params.e0 >= lo && f.params.e0 <= hi) {
                return format!(
                    "the {} model does not follow the data: best fit leaves [{lo:.6}, {hi:.6}], rms residual {rms:.3e} rad, data rise {rise:+.4} rad",
                    convention_name(conv)
                );
            }
            format!(
                "E0 = {:.9}, Gamma = {:.6e}, data rise {:+.4} rad, model rise {:+.4} rad, rms residual {:.3e}",
                f.params.e0,
                f.params.gamma,
                rise,
                bw_phase(hi, &f.params, conv) - bw_phase(lo, &f.params, conv),
                rms
            )
        }
        Err(e) => format!("phase fit failed: {e} (data rise {rise:+.4} rad)"),
    }
}

fn oscillator_stage(cfg: &RunConfig, out: &mut RunOutput) -> Result<()> {
    let oc = cfg.oscillator.ok_or_else(|| {
        missing(
            "adiabatic-oscillator",
            "an [oscillator] section is required",
        )
    })?;
    let tr = integrate_oscillator(&oc)?;
    let drift = tr.max_action_drift();
    let tp = turning_points(&tr);
    let contraction: Option<ContractionSeries> = if oc.ramp_rate_eps > 0.0 {
        Some(contraction_exponent(&tr)?)
    } else {
        None
    };

    let idx = stride_indices(tr.len(), PLOT_ROWS);
    let pick = |v: &[f64]| -> Vec<f64> { idx.iter().map(|&i| v[i]).collect() };
    let frame = tr.adiabatic_frame();
    let fx: Vec<f64> = idx.iter().map(|&i| frame[i].0).collect();
    let fp: Vec<f64> = idx.iter().map(|&i| frame[i].1).collect();
    out.outputs.add(
        "plot/spiral.dat",
        series_dat(
            &["phase-space trajectory", "x p"],
            &[&pick(&tr.x), &pick(&tr.p)],
        ),
    );
    out.outputs.add(
        "plot/adiabatic_frame.dat",
        series_dat(
            &[
                "trajectory rescaled by the instantaneous frequency",
                "x*sqrt(omega) p/sqrt(omega)",
            ],
            &[&fx, &fp],
        ),
    );
    out.outputs.add(
        "plot/action.dat",
        series_dat(
            &["action J = E / omega", "t J"],
            &[&pick(&tr.times), &pick(&tr.action)],
        ),
    );
    let tt: Vec<f64> = tp.iter().map(|p| p.0).collect();
    let ta: Vec<f64> = tp.iter().map(|p| p.1).collect();
    let tw: Vec<f64> = tt.iter().map(|&t| wkb_envelope(&oc, t)).collect();
    out.outputs.add(
        "plot/envelope.dat",
        series_dat(
            &["turning-point amplitude and WKB envelope", "t |x| wkb"],
            &[&tt, &ta, &tw],
        ),
    );

    let r = &mut out.report;
    let _ = writeln!(
        r,
        "omega0 = {}, eps = {}, t_end = {}, dt = {} ({:.1} periods, {} steps)",
        oc.omega0,
        oc.ramp_rate_eps,
        oc.t_end,
        oc.dt,
        tr.periods(),
        tr.len() - 1
    );
    let _ = writeln!(r, "max relative action drift = {drift:.6e}");
    let env = tp
        .iter()
        .map(|(t, a)| (a / wkb_envelope(&oc, *t) - 1.0).abs())
        .fold(0.0, f64::max);
    let _ = writeln!(
        r,
        "{} turning points, max deviation from WKB envelope {env:.3e}",
        tp.len()
    );

    let mut doc = json!({
        "format_version": FORMAT_VERSION,
        "config": oc,
        "periods": tr.periods(),
        "steps": tr.len() - 1,
        "max_action_drift": drift,
        "turning_points": tp.len(),
        "envelope_max_deviation": env,
    });
    if let Some(c) = &contraction {
        let width = c.equivalent_width()?;
        out.outputs.add(
            "plot/gamma.dat",
            series_dat(
                &["contraction exponent", "t gamma expected"],
                &[&c.times, &c.gamma, &c.expected],
            ),
        );
        let want = 0.5 * oc.ramp_rate_eps * oc.omega0;
        let _ = writeln!(
            r,
            "gamma(0) = {:.6e} (eps omega0 / 2 = {want:.6e}, ratio {:.6})",
            c.gamma_at_start,
            c.gamma_at_start / want
        );
        let _ = writeln!(
            r,
            "mean gamma = {:.6e}, mean omega'/(2 omega) = {:.6e}",
            c.mean_gamma, c.mean_expected
        );
        let _ = writeln!(
            r,
            "equivalent width Gamma_eq = 2 hbar gamma(0) = {width:.6e}"
        );
        if let Some(u) = cfg.units {
            let _ = writeln!(
                r,
                "  physical: Gamma_eq = {:.6e} neV",
                width * u.energy_unit_nev()
            );
        }
        doc["contraction"] = json!({
            "gamma_at_start": c.gamma_at_start,
            "expected_at_start": want,
            "mean_gamma": c.mean_gamma,
            "mean_expected": c.mean_expected,
            "gamma_eq": width,
        });
    }
    out.outputs.add_json("oscillator.json", &doc)
}

fn wigner_stage(cfg: &RunConfig, out: &mut RunOutput) -> Result<()> {
    let ws = cfg
        .wigner
        .ok_or_else(|| missing("wigner-bridge", "a [wigner] section is required"))?;
    let (samples, a, profile, bw): (
        Vec<SMatrixSample>,
        f64,
        Option<ValidatedProfile>,
        Option<BWParams>,
    ) = match ws.source {
        WignerSource::Profile => {
            let p = cfg
                .profile
                .as_ref()
                .ok_or_else(|| {
                    missing(
                        "wigner-bridge",
                        "source = profile needs a [profile] section",
                    )
                })?
                .validate()?;
            let a = cfg.delay.reference.unwrap_or_else(|| p.support_end());
            (band_samples(&p, ws.de, ws.points, a)?, a, Some(p), None)
        }
        WignerSource::BreitWigner { e0, gamma } => {
            let bw = BWParams::new(e0, gamma);
            (
                (1..=ws.points)
                    .map(|m| bw_sample(m as f64 * ws.de, &bw))
                    .collect(),
                0.0,
                None,
                Some(bw),
            )
        }
    };
    let kg = van_kampen_kernel(&samples, a, ws.kernel)?;
    let wg = wigner_distribution(&kg);
    let ps = phase_space_delay_integral(&wg, a)?;
    let direct = direct_delay_integral(&samples, ps.band.0, ps.band.1)?;
    let corr = correlation_integral(&samples, ws.eps_steps as f64 * ws.de)?;
    let corr_direct = direct_delay_integral(&samples, corr.band.0, corr.band.1)?;

    let mut sym = 0.0f64;
    if let Some(p) = &profile {
        for k in 1..=5 {
            let e = samples[k * (samples.len() - 1) / 6].energy;
            let q = symmetric_q(p, e, ws.de, a)?;
            sym = sym.max((q - time_delay(&s_matrix_sample(p, e, a)?)?).norm());
        }
    }
    let tail = bw.map(|b| tail_decay_rate(&kg, 4.0 / b.gamma, 20.0 / b.gamma));

    let ps_rel = (ps.referenced_integral() - direct) / direct;
    let corr_rel = (corr.derivative - corr_direct) / corr_direct;
    let r = &mut out.report;
    let _ = writeln!(
        r,
        "{} samples, dE = {}, window {}, padding {}, reference a = {a}",
        samples.len(),
        ws.de,
        ws.kernel.window.name(),
        ws.kernel.padding
    );
    let _ = writeln!(r, "kernel: {} points, dzeta = {:.6e}", kg.len(), kg.dzeta());
    let _ = writeln!(
        r,
        "phase-space integral on [{:.6}, {:.6}] = {:.9}",
        ps.band.0,
        ps.band.1,
        ps.referenced_integral()
    );
    let _ = writeln!(
        r,
        "  direct integral of tau            = {direct:.9} (relative difference {ps_rel:+.3e})"
    );
    let _ = writeln!(
        r,
        "  window-weighted                   = {:.9}",
        ps.window_weighted
    );
    let _ = writeln!(
        r,
        "  free flight 2a/v part             = {:.9}",
        ps.free_flight
    );
    let _ = writeln!(
        r,
        "correlation slope at eps = {:.6e}: {:.9} vs direct {corr_direct:.9} (relative {corr_rel:+.3e})",
        corr.eps, corr.derivative
    );
    if profile.is_some() {
        let _ = writeln!(
            r,
            "symmetric difference quotient vs time delay, 5 energies: max {sym:.3e}"
        );
    }
    if let (Some(b), Some(t)) = (bw, &tail) {
        match t {
            Ok(rate) => {
                let _ = writeln!(
                    r,
                    "kernel tail decay rate {rate:.6} (Gamma / 2 hbar = {:.6})",
                    b.gamma / 2.0
                );
            }
            Err(e) => {
                let _ = writeln!(r, "kernel tail decay rate unavailable: {e}");
            }
        }
    }
    let _ = writeln!(r, "imaginary residue of W: {:.3e}", wg.imag_residue);
    if corr_rel.abs() > 1e-2 {
        let _ = writeln!(
            r,
            "warning: dE = {} does not resolve the delay structure; reduce de",
            ws.de
        );
    }

    let bw_phase_dat: Option<(Vec<f64>, Vec<f64>)> = bw.map(|b| {
        let e: Vec<f64> = samples.iter().map(|s| s.energy).collect();
        let d = e
            .iter()
            .map(|&x| bw_phase(x, &b, PhaseConvention::Standard))
            .collect();
        (e, d)
    });
    if let Some((e, d)) = bw_phase_dat {
        out.outputs.add(
            "plot/phase.dat",
            series_dat(&["Breit-Wigner phase", "E delta"], &[&e, &d]),
        );
    }
    out.outputs
        .add("plot/kernel.dat", kernel_dat(&kg, ws.plot_zeta_max));
    out.outputs.add(
        "plot/wigner.dat",
        wigner_dat(&wg.clipped(ws.plot_zeta_max), HEATMAP_SIDE, HEATMAP_SIDE),
    );
    out.outputs.add(
        "plot/wigner_tau.dat",
        series_dat(
            &["first zeta+ moment of W, the phase-space delay", "E tau"],
            &[&ps.energies, &ps.tau],
        ),
    );
    let doc = json!({
        "format_version": FORMAT_VERSION,
        "samples": samples.len(),
        "de": ws.de,
        "reference_length": a,
        "window": ws.kernel.window.name(),
        "padding": ws.kernel.padding,
        "dzeta": kg.dzeta(),
        "band": [ps.band.0, ps.band.1],
        "phase_space_integral": ps.referenced_integral(),
        "free_flight": ps.free_flight,
        "window_weighted": ps.window_weighted,
        "direct_integral": direct,
        "phase_space_relative_difference": ps_rel,
        "correlation": {
            "eps": corr.eps,
            "integral": [corr.integral.0, corr.integral.1],
            "derivative": corr.derivative,
            "band": [corr.band.0, corr.band.1],
            "direct": corr_direct,
            "relative_difference": corr_rel,
        },
        "symmetric_q_max_difference": profile.as_ref().map(|_| sym),
        "tail_decay_rate": tail.and_then(|t| t.ok()),
        "imag_residue": wg.imag_residue,
    });
    out.outputs.add_json("wigner.json", &doc)
}

/// Reads and parses a config file. IO problems map to exit code 4, format
/// problems to 2.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    crate::io::config::parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::parse_config;

    #[test]
    fn free_particle_scan_has_zero_delay() {
        let cfg = parse_config("[profile]\ngeometry = full-line\nfree = true\n[grid]\ne_min = 0.5\ne_max = 5\npoints = 50\n").unwrap();
        let out = run(Command::Scan, &cfg, &RunOptions::default()).unwrap();
        let csv = String::from_utf8(out.outputs.files[Path::new("delay.csv")].clone()).unwrap();
        let rows: Vec<&str> = csv.lines().skip(2).collect();
        assert_eq!(rows.len(), 50);
        for row in rows {
            let tau: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(tau, 0.0, "{row}");
        }
    }

    #[test]
    fn corpus_count_json() {
        let cfg = parse_config(
            "[profile]\ngeometry = radial\nlayer = 3 -10\nlayer = 0.2 200\n[grid]\ne_min = 0.05\ne_max = 32\npoints = 2000\n[delay]\ne_star = 31\n",
        )
        .unwrap();
        let out = run(Command::Fit, &cfg, &RunOptions::default()).unwrap();
        let doc: Value =
            serde_json::from_slice(&out.outputs.files[Path::new("resonances.json")]).unwrap();
        let cands = doc["candidates"].as_array().unwrap();
        assert_eq!(cands.len(), 3);
        for c in cands {
            let q = c["quanta_h"].as_f64().unwrap();
            assert!((0.9..=1.1).contains(&q), "{q}");
        }
        assert!(doc["count"]["count_h"].is_f64() && doc["count"]["count_hbar"].is_f64());
        assert!(out.report.contains("I / hbar"));
    }

    #[test]
    fn missing_sections_are_config_errors() {
        let cfg = parse_config("").unwrap();
        for cmd in [
            Command::Scan,
            Command::Oscillator,
            Command::Wigner,
            Command::Ingest,
        ] {
            assert_eq!(
                run(cmd, &cfg, &RunOptions::default())
                    .unwrap_err()
                    .exit_code(),
                2
            );
        }
    }

    #[test]
    fn ingest_missing_file_is_io() {
        let cfg = parse_config("[ingest]\nfile = /nonexistent/table.csv\n").unwrap();
        let e = run(Command::Ingest, &cfg, &RunOptions::default()).unwrap_err();
        assert_eq!(e.exit_code(), 4);
        assert!(e.to_string().contains("/nonexistent/table.csv"));
    }

    #[test]
    fn repeat_runs_are_identical() {
        let cfg =
            parse_config("[oscillator]\nomega0 = 1\neps = 1e-3\nt_end = 200\ndt = 0.01\n").unwrap();
        let a = run(Command::Oscillator, &cfg, &RunOptions::default()).unwrap();
        let b = run(Command::Oscillator, &cfg, &RunOptions::default()).unwrap();
        assert_eq!(a.outputs, b.outputs);
    }
}
