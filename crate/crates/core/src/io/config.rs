//! Line-oriented run configuration.
//!
//! ```text
//! file       := { line '\n' }
//! line       := ws [ section | assignment ] ws [ comment ]
//! section    := '[' name ']'
//! assignment := key ws '=' ws value
//! comment    := '#' { any }
//! ```
//!
//! Keys are unique within a section except `layer`, which repeats and keeps
//! its order. Numbers use Rust float syntax. Unknown sections and keys are
//! errors. See `docs/config.md` for every key.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::delay::{CountingQuantum, MAX_POINTS};
use crate::error::{Error, Result};
use crate::oscillator::OscillatorConfig;
use crate::potential::{Geometry, Layer, PotentialProfile};
use crate::resonance::PhaseConvention;
use crate::units::PhysicalUnits;
use crate::wigner::{KernelOptions, Window, MAX_OFFSET_STEPS};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub e_min: f64,
    pub e_max: f64,
    pub points: usize,
    pub refine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySpec {
    /// Reference length `a`; the support end when absent.
    pub reference: Option<f64>,
    /// Upper limit of the counting integral; `e_max` when absent.
    pub e_star: Option<f64>,
    pub quantum: CountingQuantum,
}

impl Default for DelaySpec {
    fn default() -> Self {
        Self {
            reference: None,
            e_star: None,
            quantum: CountingQuantum::Planck,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitSpec {
    pub convention: PhaseConvention,
    /// Also fit the phase directly as a cross-check.
    pub phase_check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WignerSource {
    /// S-matrix of the `[profile]` section.
    Profile,
    /// Isolated resonance `S = exp(2 i delta_BW)`.
    BreitWigner { e0: f64, gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerSpec {
    pub source: WignerSource,
    pub de: f64,
    pub points: usize,
    pub kernel: KernelOptions,
    /// Correlation offset in grid spacings.
    pub eps_steps: usize,
    /// Rows of the emitted heat map satisfy `|zeta+| <= plot_zeta_max`.
    pub plot_zeta_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub profile: Option<PotentialProfile>,
    pub grid: Option<GridSpec>,
    pub delay: DelaySpec,
    pub fit: FitSpec,
    pub oscillator: Option<OscillatorConfig>,
    pub wigner: Option<WignerSpec>,
    /// Phase-shift table, relative to the config file.
    pub ingest: Option<PathBuf>,
    pub units: Option<PhysicalUnits>,
    pub output: Option<PathBuf>,
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

#[derive(Default)]
struct Section {
    line: usize,
    entries: Vec<Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        let i = self.entries.iter().position(|e| e.key == key)?;
        Some(self.entries.remove(i))
    }

    fn take_all(&mut self, key: &str) -> Vec<Entry> {
        let (hit, rest): (Vec<Entry>, Vec<Entry>) = std::mem::take(&mut self.entries)
            .into_iter()
            .partition(|e| e.key == key);
        self.entries = rest;
        hit
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().next() {
            Some(e) => Err(Error::UnknownKey {
                line: e.line,
                key: e.key,
            }),
            None => Ok(()),
        }
    }

    fn f64(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|e| parse_f64(&e)).transpose()
    }

    fn req_f64(&mut self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| missing(self.line, key))
    }

    fn usize(&mut self, key: &str) -> Result<Option<usize>> {
        self.take(key)
            .map(|e| {
                e.value.parse::<usize>().map_err(|_| Error::Syntax {
                    line: e.line,
                    message: format!("`{}` is not a non-negative integer", e.value),
                })
            })
            .transpose()
    }

    fn bool(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key)
            .map(|e| match e.value.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                v => Err(Error::Syntax {
                    line: e.line,
                    message: format!("`{v}` is not true/false"),
                }),
            })
            .transpose()
    }

    fn string(&mut self, key: &str) -> Option<(usize, String)> {
        self.take(key).map(|e| (e.line, e.value))
    }
}

fn missing(line: usize, key: &str) -> Error {
    Error::Syntax {
        line,
        message: format!("missing required key `{key}`"),
    }
}

fn parse_f64(e: &Entry) -> Result<f64> {
    let v: f64 = e.value.parse().map_err(|_| Error::Syntax {
        line: e.line,
        message: format!("`{}` is not a number", e.value),
    })?;
    if !v.is_finite() {
        return Err(Error::Syntax {
            line: e.line,
            message: format!("`{}` is not finite", e.value),
        });
    }
    Ok(v)
}

const SECTIONS: [&str; 10] = [
    "",
    "profile",
    "grid",
    "delay",
    "fit",
    "oscillator",
    "wigner",
    "ingest",
    "units",
    "output",
];

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "" => &["format_version"],
        "profile" => &["geometry", "free", "layer"],
        "grid" => &["e_min", "e_max", "points", "refine"],
        "delay" => &["reference", "e_star", "quantum"],
        "fit" => &["convention", "phase_check"],
        "oscillator" => &["omega0", "eps", "x0", "p0", "t_end", "dt"],
        "wigner" => &[
            "source",
            "bw_e0",
            "bw_gamma",
            "de",
            "points",
            "window",
            "padding",
            "edge_fraction",
            "eps_steps",
            "plot_zeta_max",
        ],
        "ingest" => &["file"],
        "units" => &["mass_amu", "length_nm"],
        "output" => &["dir"],
        _ => &[],
    }
}

fn split(text: &str) -> Result<Vec<(String, Section)>> {
    let mut out: Vec<(String, Section)> = vec![(String::new(), Section::default())];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| Error::Syntax {
                    line,
                    message: "unterminated section header".into(),
                })?
                .trim();
            if !SECTIONS.contains(&name) || name.is_empty() {
                return Err(Error::Syntax {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            if out.iter().any(|(n, _)| n == name) {
                return Err(Error::Syntax {
                    line,
                    message: format!("section [{name}] repeated"),
                });
            }
            out.push((
                name.to_string(),
                Section {
                    line,
                    entries: Vec::new(),
                },
            ));
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::Syntax {
            line,
            message: "expected `key = value`".into(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(Error::Syntax {
                line,
                message: format!("bad key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::Syntax {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        let (name, section) = out.last_mut().expect("top level exists");
        if !known_keys(name).contains(&key) {
            return Err(Error::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if key != "layer" && section.entries.iter().any(|e| e.key == key) {
            return Err(Error::Syntax {
                line,
                message: format!("`{key}` given twice"),
            });
        }
        section.entries.push(Entry {
            line,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

fn violation(module: &str, e: impl std::fmt::Display) -> Error {
    Error::ConstraintViolation(format!("{module}: {e}"))
}

pub fn parse_quantum(s: &str) -> Result<CountingQuantum> {
    match s {
        "h" => Ok(CountingQuantum::Planck),
        "hbar" => Ok(CountingQuantum::ReducedPlanck),
        _ => {
            let v = s
                .strip_prefix("custom=")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "quantum must be h, hbar or custom=VALUE, got `{s}`"
                    ))
                })?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "custom quantum must be positive, got {v}"
                )));
            }
            Ok(CountingQuantum::Custom(v))
        }
    }
}

fn parse_profile(mut s: Section) -> Result<PotentialProfile> {
    let geometry = match s.string("geometry") {
        Some((_, g)) if g == "radial" => Geometry::RadialSWave,
        Some((_, g)) if g == "full-line" => Geometry::FullLine,
        Some((line, g)) => {
            return Err(Error::Syntax {
                line,
                message: format!("geometry must be radial or full-line, got `{g}`"),
            })
        }
        None => return Err(missing(s.line, "geometry")),
    };
    let free = s.bool("free")?.unwrap_or(false);
    let mut layers = Vec::new();
    for e in s.take_all("layer") {
        let parts: Vec<&str> = e.value.split_whitespace().collect();
        let nums: Option<Vec<f64>> = parts.iter().map(|p| p.parse::<f64>().ok()).collect();
        match nums.as_deref() {
            Some([w, h]) => layers.push(Layer::new(*w, *h)),
            _ => {
                return Err(Error::Syntax {
                    line: e.line,
                    message: format!("layer needs `width height`, got `{}`", e.value),
                })
            }
        }
    }
    s.finish()?;
    Ok(PotentialProfile {
        geometry,
        layers,
        free,
    })
}

fn parse_grid(mut s: Section) -> Result<GridSpec> {
    let g = GridSpec {
        e_min: s.req_f64("e_min")?,
        e_max: s.req_f64("e_max")?,
        points: s
            .usize("points")?
            .ok_or_else(|| missing(s.line, "points"))?,
        refine: s.bool("refine")?.unwrap_or(true),
    };
    s.finish()?;
    if !(g.e_min > 0.0) || !(g.e_max > g.e_min) {
        return Err(violation(
            "scattering-engine",
            format!("need 0 < e_min < e_max, got [{}, {}]", g.e_min, g.e_max),
        ));
    }
    if g.points < 2 || g.points > MAX_POINTS {
        return Err(violation(
            "scattering-engine",
            format!("points must lie in [2, {MAX_POINTS}], got {}", g.points),
        ));
    }
    Ok(g)
}

fn parse_delay(mut s: Section) -> Result<DelaySpec> {
    let d = DelaySpec {
        reference: s.f64("reference")?,
        e_star: s.f64("e_star")?,
        quantum: match s.string("quantum") {
            Some((line, q)) => parse_quantum(&q).map_err(|e| Error::Syntax {
                line,
                message: e.to_string(),
            })?,
            None => CountingQuantum::Planck,
        },
    };
    s.finish()?;
    Ok(d)
}

fn parse_fit(mut s: Section) -> Result<FitSpec> {
    let convention = match s.string("convention") {
        None => PhaseConvention::Standard,
        Some((_, c)) if c == "standard" => PhaseConvention::Standard,
        Some((_, c)) if c == "paper-sign" => PhaseConvention::PaperSign,
        Some((line, c)) => {
            return Err(Error::Syntax {
                line,
                message: format!("convention must be standard or paper-sign, got `{c}`"),
            })
        }
    };
    let f = FitSpec {
        convention,
        phase_check: s.bool("phase_check")?.unwrap_or(false),
    };
    s.finish()?;
    Ok(f)
}

fn parse_oscillator(mut s: Section) -> Result<OscillatorConfig> {
    let c = OscillatorConfig {
        omega0: s.req_f64("omega0")?,
        ramp_rate_eps: s.req_f64("eps")?,
        x0: s.f64("x0")?.unwrap_or(1.0),
        p0: s.f64("p0")?.unwrap_or(0.0),
        t_end: s.req_f64("t_end")?,
        dt: s.req_f64("dt")?,
    };
    s.finish()?;
    c.validate()
        .map_err(|e| violation("adiabatic-oscillator", e))?;
    Ok(c)
}

fn parse_wigner(mut s: Section) -> Result<WignerSpec> {
    let source = match s.string("source") {
        None => WignerSource::Profile,
        Some((_, v)) if v == "profile" => WignerSource::Profile,
        Some((_, v)) if v == "breit-wigner" => WignerSource::BreitWigner {
            e0: s.req_f64("bw_e0")?,
            gamma: s.req_f64("bw_gamma")?,
        },
        Some((line, v)) => {
            return Err(Error::Syntax {
                line,
                message: format!("source must be profile or breit-wigner, got `{v}`"),
            })
        }
    };
    let window = match s.string("window") {
        None => Window::Hann,
        Some((line, v)) => v.parse().map_err(|e: Error| Error::Syntax {
            line,
            message: e.to_string(),
        })?,
    };
    let defaults = KernelOptions::default();
    let w = WignerSpec {
        source,
        de: s.req_f64("de")?,
        points: s
            .usize("points")?
            .ok_or_else(|| missing(s.line, "points"))?,
        kernel: KernelOptions {
            window,
            padding: s.usize("padding")?.unwrap_or(defaults.padding),
            edge_fraction: s.f64("edge_fraction")?.unwrap_or(defaults.edge_fraction),
        },
        eps_steps: s.usize("eps_steps")?.unwrap_or(1),
        plot_zeta_max: s.f64("plot_zeta_max")?.unwrap_or(50.0),
    };
    s.finish()?;
    let bad = |m: String| Err(violation("wigner-bridge", m));
    if !(w.de > 0.0) {
        return bad(format!("de must be positive, got {}", w.de));
    }
    if w.points < 16 || w.points > 20_000 {
        return bad(format!("points must lie in [16, 20000], got {}", w.points));
    }
    if w.kernel.padding == 0 || w.kernel.padding > 16 {
        return bad(format!(
            "padding must lie in [1, 16], got {}",
            w.kernel.padding
        ));
    }
    if !(w.kernel.edge_fraction >= 0.0 && w.kernel.edge_fraction < 0.5) {
        return bad(format!(
            "edge_fraction must lie in [0, 0.5), got {}",
            w.kernel.edge_fraction
        ));
    }
    if w.eps_steps == 0 || w.eps_steps > MAX_OFFSET_STEPS {
        return bad(format!(
            "eps_steps must lie in [1, {MAX_OFFSET_STEPS}], got {}",
            w.eps_steps
        ));
    }
    if !(w.plot_zeta_max > 0.0) {
        return bad(format!(
            "plot_zeta_max must be positive, got {}",
            w.plot_zeta_max
        ));
    }
    if let WignerSource::BreitWigner { gamma, .. } = w.source {
        if !(gamma > 0.0) {
            return bad(format!("bw_gamma must be positive, got {gamma}"));
        }
    }
    Ok(w)
}

fn parse_units(mut s: Section) -> Result<PhysicalUnits> {
    let u = PhysicalUnits {
        mass_amu: s.req_f64("mass_amu")?,
        length_nm: s.req_f64("length_nm")?,
    };
    s.finish()?;
    if !(u.mass_amu > 0.0 && u.length_nm > 0.0) {
        return Err(violation(
            "io-cli",
            "unit block needs positive mass and length",
        ));
    }
    Ok(u)
}

fn parse_path(mut s: Section, key: &str) -> Result<PathBuf> {
    let p = s
        .string(key)
        .map(|(_, v)| PathBuf::from(v))
        .ok_or_else(|| missing(s.line, key))?;
    s.finish()?;
    Ok(p)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig {
        profile: None,
        grid: None,
        delay: DelaySpec::default(),
        fit: FitSpec::default(),
        oscillator: None,
        wigner: None,
        ingest: None,
        units: None,
        output: None,
    };
    for (name, mut sec) in split(text)? {
        match name.as_str() {
            "" => {
                if let Some(e) = sec.take("format_version") {
                    if e.value != FORMAT_VERSION.to_string() {
                        return Err(Error::Syntax {
                            line: e.line,
                            message: format!("unsupported format_version {}", e.value),
                        });
                    }
                }
                sec.finish()?;
            }
            "profile" => cfg.profile = Some(parse_profile(sec)?),
            "grid" => cfg.grid = Some(parse_grid(sec)?),
            "delay" => cfg.delay = parse_delay(sec)?,
            "fit" => cfg.fit = parse_fit(sec)?,
            "oscillator" => cfg.oscillator = Some(parse_oscillator(sec)?),
            "wigner" => cfg.wigner = Some(parse_wigner(sec)?),
            "ingest" => cfg.ingest = Some(parse_path(sec, "file")?),
            "units" => cfg.units = Some(parse_units(sec)?),
            "output" => cfg.output = Some(parse_path(sec, "dir")?),
            _ => unreachable!("sections are checked while splitting"),
        }
    }
    cfg.check()?;
    Ok(cfg)
}

impl RunConfig {
    /// Checks that span sections.
    fn check(&self) -> Result<()> {
        let validated = match &self.profile {
            Some(p) => Some(p.validate().map_err(|e| violation("potential-model", e))?),
            None => None,
        };
        if let (Some(a), Some(p)) = (self.delay.reference, &validated) {
            if !(a >= p.support_end()) {
                return Err(violation(
                    "scattering-engine",
                    format!(
                        "reference length {a} lies inside the support (ends at {})",
                        p.support_end()
                    ),
                ));
            }
        }
        if let Some(a) = self.delay.reference {
            if !(a >= 0.0) {
                return Err(violation(
                    "scattering-engine",
                    format!("reference length must be non-negative, got {a}"),
                ));
            }
        }
        if let (Some(es), Some(g)) = (self.delay.e_star, &self.grid) {
            if !(es >= g.e_min && es <= g.e_max) {
                return Err(violation(
                    "timedelay-core",
                    format!("e_star {es} outside [{}, {}]", g.e_min, g.e_max),
                ));
            }
        }
        if let Some(w) = &self.wigner {
            if w.source == WignerSource::Profile && self.profile.is_none() {
                return Err(violation(
                    "wigner-bridge",
                    "source = profile needs a [profile] section",
                ));
            }
        }
        Ok(())
    }

    /// Canonical text form; `parse_config(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "format_version = {FORMAT_VERSION}");
        if let Some(p) = &self.profile {
            let _ = writeln!(s, "\n[profile]");
            let g = match p.geometry {
                Geometry::RadialSWave => "radial",
                Geometry::FullLine => "full-line",
            };
            let _ = writeln!(s, "geometry = {g}");
            let _ = writeln!(s, "free = {}", p.free);
            for l in &p.layers {
                let _ = writeln!(s, "layer = {:?} {:?}", l.width, l.height);
            }
        }
        if let Some(g) = &self.grid {
            let _ = writeln!(s, "\n[grid]");
            let _ = writeln!(
                s,
                "e_min = {:?}\ne_max = {:?}\npoints = {}\nrefine = {}",
                g.e_min, g.e_max, g.points, g.refine
            );
        }
        let _ = writeln!(s, "\n[delay]");
        if let Some(a) = self.delay.reference {
            let _ = writeln!(s, "reference = {a:?}");
        }
        if let Some(e) = self.delay.e_star {
            let _ = writeln!(s, "e_star = {e:?}");
        }
        let q = match self.delay.quantum {
            CountingQuantum::Planck => "h".to_string(),
            CountingQuantum::ReducedPlanck => "hbar".to_string(),
            CountingQuantum::Custom(v) => format!("custom={v:?}"),
        };
        let _ = writeln!(s, "quantum = {q}");
        let _ = writeln!(s, "\n[fit]");
        let conv = match self.fit.convention {
            PhaseConvention::Standard => "standard",
            PhaseConvention::PaperSign => "paper-sign",
        };
        let _ = writeln!(
            s,
            "convention = {conv}\nphase_check = {}",
            self.fit.phase_check
        );
        if let Some(o) = &self.oscillator {
            let _ = writeln!(s, "\n[oscillator]");
            let _ = writeln!(
                s,
                "omega0 = {:?}\neps = {:?}\nx0 = {:?}\np0 = {:?}\nt_end = {:?}\ndt = {:?}",
                o.omega0, o.ramp_rate_eps, o.x0, o.p0, o.t_end, o.dt
            );
        }
        if let Some(w) = &self.wigner {
            let _ = writeln!(s, "\n[wigner]");
            match w.source {
                WignerSource::Profile => {
                    let _ = writeln!(s, "source = profile");
                }
                WignerSource::BreitWigner { e0, gamma } => {
                    let _ = writeln!(
                        s,
                        "source = breit-wigner\nbw_e0 = {e0:?}\nbw_gamma = {gamma:?}"
                    );
                }
            }
            let _ = writeln!(
                s,
                "de = {:?}\npoints = {}\nwindow = {}\npadding = {}\nedge_fraction = {:?}\neps_steps = {}\nplot_zeta_max = {:?}",
                w.de,
                w.points,
                w.kernel.window.name(),
                w.kernel.padding,
                w.kernel.edge_fraction,
                w.eps_steps,
                w.plot_zeta_max
            );
        }
        if let Some(p) = &self.ingest {
            let _ = writeln!(s, "\n[ingest]\nfile = {}", p.display());
        }
        if let Some(u) = &self.units {
            let _ = writeln!(
                s,
                "\n[units]\nmass_amu = {:?}\nlength_nm = {:?}",
                u.mass_amu, u.length_nm
            );
        }
        if let Some(p) = &self.output {
            let _ = writeln!(s, "\n[output]\ndir = {}", p.display());
        }
        s
    }
}
