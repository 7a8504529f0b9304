//! Scenario files, figure presets and CSV output for the command-line tool.
//!
//! A scenario is a flat `key = value` text file, one dotted key per line.
//! Blank lines and lines starting with `#` are ignored.
//!
//! | key | value | default |
//! |-----|-------|---------|
//! | `system` | preset key, see `hanle-obe presets list` | |
//! | `system.label`, `system.nuclear_spin`, `system.ground.{j,f,g}`, `system.excited.{j,f,g}`, `system.loss` | inline transition instead of a preset; `loss` is `hyperfine`, `closed` or a number | label `custom`, loss `hyperfine` |
//! | `polarization` | `linear_x`, `sigma_plus`, `sigma_minus` | `linear_x` |
//! | `laser.rabi_over_gamma` | Rabi frequency in units of Gamma | |
//! | `laser.intensity_mw_cm2` | intensity, converted with `rabi^2 = 2 I / I_sat` | |
//! | `laser.saturation_mw_cm2` | `I_sat` | preset value |
//! | `laser.detuning_over_gamma` | laser minus atomic frequency | `0` |
//! | `scan.min`, `scan.max` | field range as `mu_B B / (hbar Gamma)` | `-1`, `1` |
//! | `scan.points` | grid size, at least 3 | `201` |
//! | `mode` | `steady` or `integrated` | `steady` |
//! | `mode.t_int_gamma` | integration time in units of `1/Gamma` (integrated only) | |
//! | `outputs` | comma list of `pi_e`, `chi_im`, `ground_populations`, `coherence` | `pi_e, chi_im` |
//!
//! Exactly one of `laser.rabi_over_gamma` and `laser.intensity_mw_cm2` must be given.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::angular_momentum::AngularMomentum;
use crate::atomic_system::{build_system, system_preset, FieldConfig, LevelSpec, LossSpec, Polarization, TransitionSystem};
use crate::error::{Error, Result};
use crate::observables::{linspace, scan_lineshape_with, Execution, LineshapeScan, SolverMode};

/// Inline transition description.
#[derive(Clone, Debug, PartialEq)]
pub struct InlineSystem {
    pub label: String,
    pub nuclear_spin: AngularMomentum,
    pub ground_j: AngularMomentum,
    pub ground_f: AngularMomentum,
    pub ground_g: f64,
    pub excited_j: AngularMomentum,
    pub excited_f: AngularMomentum,
    pub excited_g: f64,
    pub loss: LossSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemSpec {
    Preset(String),
    Inline(InlineSystem),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntensitySpec {
    Rabi(f64),
    Intensity { mw_cm2: f64, saturation_mw_cm2: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

/// Optional CSV columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    PiE,
    ChiIm,
    GroundPopulations,
    Coherence,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::PiE => "pi_e",
            Output::ChiIm => "chi_im",
            Output::GroundPopulations => "ground_populations",
            Output::Coherence => "coherence",
        }
    }
}

impl FromStr for Output {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [Output::PiE, Output::ChiIm, Output::GroundPopulations, Output::Coherence]
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| format!("unknown output `{s}`"))
    }
}

/// A complete scan request.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub system: SystemSpec,
    pub polarization: Polarization,
    pub intensity: IntensitySpec,
    pub detuning: f64,
    pub scan: ScanRange,
    pub mode: SolverMode,
    /// Sorted, without duplicates.
    pub outputs: Vec<Output>,
}

const KEYS: [&str; 21] = [
    "system",
    "system.label",
    "system.nuclear_spin",
    "system.ground.j",
    "system.ground.f",
    "system.ground.g",
    "system.excited.j",
    "system.excited.f",
    "system.excited.g",
    "system.loss",
    "polarization",
    "laser.rabi_over_gamma",
    "laser.intensity_mw_cm2",
    "laser.saturation_mw_cm2",
    "laser.detuning_over_gamma",
    "scan.min",
    "scan.max",
    "scan.points",
    "mode",
    "mode.t_int_gamma",
    "outputs",
];

struct Entry {
    line: usize,
    value: String,
}

struct Fields {
    map: BTreeMap<&'static str, Entry>,
}

impl Fields {
    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.map
            .get(key)
            .map(|e| {
                e.value.parse::<T>().map_err(|err| Error::Parse { line: e.line, message: format!("`{key}`: {err}") })
            })
            .transpose()
    }

    fn require<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| Error::Config(format!("missing `{key}`")))
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        let v: Option<f64> = self.get(key)?;
        match v {
            Some(x) if !x.is_finite() => Err(range(key, x, "must be finite")),
            other => Ok(other),
        }
    }
}

fn range(key: &str, value: impl fmt::Display, reason: &str) -> Error {
    Error::Range { key: key.to_string(), value: value.to_string(), reason: reason.to_string() }
}

fn parse_loss(s: &str) -> std::result::Result<LossSpec, String> {
    match s {
        "hyperfine" => Ok(LossSpec::Hyperfine),
        "closed" => Ok(LossSpec::ForceClosed),
        other => other
            .parse::<f64>()
            .map(LossSpec::Explicit)
            .map_err(|_| format!("expected `hyperfine`, `closed` or a number, got `{other}`")),
    }
}

fn loss_text(loss: LossSpec) -> String {
    match loss {
        LossSpec::Hyperfine => "hyperfine".into(),
        LossSpec::ForceClosed => "closed".into(),
        LossSpec::Explicit(a) => a.to_string(),
    }
}

/// Parse scenario text.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| Error::Parse { line, message: format!("expected `key = value`, got `{trimmed}`") })?;
        let key = key.trim();
        let known = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| Error::Parse { line, message: format!("unknown key `{key}`") })?;
        let value = value.trim();
        if value.is_empty() {
            return Err(Error::Parse { line, message: format!("`{key}` has no value") });
        }
        if map.insert(*known, Entry { line, value: value.to_string() }).is_some() {
            return Err(Error::Parse { line, message: format!("duplicate key `{key}`") });
        }
    }
    build_config(&Fields { map })
}

fn build_config(f: &Fields) -> Result<ScenarioConfig> {
    let inline_keys: Vec<&str> = KEYS.iter().copied().filter(|k| k.starts_with("system.") && f.has(k)).collect();
    let system = match (f.get::<String>("system")?, inline_keys.is_empty()) {
        (Some(_), false) => {
            return Err(Error::Config(format!("`system` names a preset but inline keys are also given: {}", inline_keys.join(", "))))
        }
        (Some(key), true) => {
            system_preset(&key).map_err(|_| range("system", &key, "unknown preset"))?;
            SystemSpec::Preset(key)
        }
        (None, false) => SystemSpec::Inline(inline_system(f)?),
        (None, true) => return Err(Error::Config("missing `system` (preset key or inline `system.*` keys)".into())),
    };

    let polarization = match f.map.get("polarization") {
        Some(e) => e.value.parse().map_err(|err| Error::Parse { line: e.line, message: format!("`polarization`: {err}") })?,
        None => Polarization::LinearX,
    };

    let rabi = f.real("laser.rabi_over_gamma")?;
    let intensity = f.real("laser.intensity_mw_cm2")?;
    let saturation = f.real("laser.saturation_mw_cm2")?;
    let intensity = match (rabi, intensity) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "both `laser.rabi_over_gamma` and `laser.intensity_mw_cm2` are given; use exactly one".into(),
            ))
        }
        (None, None) => {
            return Err(Error::Config("missing intensity: give `laser.rabi_over_gamma` or `laser.intensity_mw_cm2`".into()))
        }
        (Some(r), None) => {
            if saturation.is_some() {
                return Err(Error::Config("`laser.saturation_mw_cm2` only applies with `laser.intensity_mw_cm2`".into()));
            }
            if r < 0.0 {
                return Err(range("laser.rabi_over_gamma", r, "must be >= 0"));
            }
            IntensitySpec::Rabi(r)
        }
        (None, Some(i)) => {
            if i < 0.0 {
                return Err(range("laser.intensity_mw_cm2", i, "must be >= 0"));
            }
            let sat = match (saturation, &system) {
                (Some(s), _) => s,
                (None, SystemSpec::Preset(key)) => system_preset(key)?.saturation_intensity,
                (None, SystemSpec::Inline(_)) => {
                    return Err(Error::Config("inline systems need `laser.saturation_mw_cm2`".into()))
                }
            };
            if !(sat > 0.0) {
                return Err(range("laser.saturation_mw_cm2", sat, "must be > 0"));
            }
            IntensitySpec::Intensity { mw_cm2: i, saturation_mw_cm2: sat }
        }
    };

    let detuning = f.real("laser.detuning_over_gamma")?.unwrap_or(0.0);

    let min = f.real("scan.min")?.unwrap_or(-1.0);
    let max = f.real("scan.max")?.unwrap_or(1.0);
    let points: i64 = f.get("scan.points")?.unwrap_or(201);
    if points < 3 {
        return Err(range("scan.points", points, "must be at least 3"));
    }
    if points > 1_000_000 {
        return Err(range("scan.points", points, "must be at most 1000000"));
    }
    if !(min < max) {
        return Err(range("scan.max", max, "must exceed scan.min"));
    }

    let mode_name: String = f.get("mode")?.unwrap_or_else(|| "steady".into());
    let t_int = f.real("mode.t_int_gamma")?;
    let mode = match (mode_name.as_str(), t_int) {
        ("steady", None) => SolverMode::Steady,
        ("steady", Some(_)) => return Err(Error::Config("`mode.t_int_gamma` requires `mode = integrated`".into())),
        ("integrated", Some(t)) if t > 0.0 => SolverMode::Integrated { t_int: t },
        ("integrated", Some(t)) => return Err(range("mode.t_int_gamma", t, "must be > 0")),
        ("integrated", None) => return Err(Error::Config("`mode = integrated` needs `mode.t_int_gamma`".into())),
        (other, _) => return Err(range("mode", other, "expected `steady` or `integrated`")),
    };

    let mut outputs = vec![Output::PiE, Output::ChiIm];
    if let Some(e) = f.map.get("outputs") {
        for item in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            outputs.push(item.parse().map_err(|message| Error::Parse { line: e.line, message })?);
        }
    }
    outputs.sort();
    outputs.dedup();

    Ok(ScenarioConfig {
        system,
        polarization,
        intensity,
        detuning,
        scan: ScanRange { min, max, points: points as usize },
        mode,
        outputs,
    })
}

fn inline_system(f: &Fields) -> Result<InlineSystem> {
    let loss = match f.map.get("system.loss") {
        Some(e) => parse_loss(&e.value).map_err(|message| Error::Parse { line: e.line, message })?,
        None => LossSpec::Hyperfine,
    };
    if let LossSpec::Explicit(a) = loss {
        if !(a >= 0.0 && a.is_finite()) {
            return Err(range("system.loss", a, "loss ratio must be finite and >= 0"));
        }
    }
    let g = |key: &str| -> Result<f64> { f.real(key)?.ok_or_else(|| Error::Config(format!("missing `{key}`"))) };
    Ok(InlineSystem {
        label: f.get("system.label")?.unwrap_or_else(|| "custom".into()),
        nuclear_spin: f.require("system.nuclear_spin")?,
        ground_j: f.require("system.ground.j")?,
        ground_f: f.require("system.ground.f")?,
        ground_g: g("system.ground.g")?,
        excited_j: f.require("system.excited.j")?,
        excited_f: f.require("system.excited.f")?,
        excited_g: g("system.excited.g")?,
        loss,
    })
}

/// Canonical text form; `parse_config` of the result reproduces `cfg`.
pub fn to_config_text(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    match &cfg.system {
        SystemSpec::Preset(key) => put("system", key.clone()),
        SystemSpec::Inline(s) => {
            put("system.label", s.label.clone());
            put("system.nuclear_spin", s.nuclear_spin.to_string());
            put("system.ground.j", s.ground_j.to_string());
            put("system.ground.f", s.ground_f.to_string());
            put("system.ground.g", s.ground_g.to_string());
            put("system.excited.j", s.excited_j.to_string());
            put("system.excited.f", s.excited_f.to_string());
            put("system.excited.g", s.excited_g.to_string());
            put("system.loss", loss_text(s.loss));
        }
    }
    put("polarization", cfg.polarization.to_string());
    match cfg.intensity {
        IntensitySpec::Rabi(r) => put("laser.rabi_over_gamma", r.to_string()),
        IntensitySpec::Intensity { mw_cm2, saturation_mw_cm2 } => {
            put("laser.intensity_mw_cm2", mw_cm2.to_string());
            put("laser.saturation_mw_cm2", saturation_mw_cm2.to_string());
        }
    }
    put("laser.detuning_over_gamma", cfg.detuning.to_string());
    put("scan.min", cfg.scan.min.to_string());
    put("scan.max", cfg.scan.max.to_string());
    put("scan.points", cfg.scan.points.to_string());
    match cfg.mode {
        SolverMode::Steady => put("mode", "steady".into()),
        SolverMode::Integrated { t_int } => {
            put("mode", "integrated".into());
            put("mode.t_int_gamma", t_int.to_string());
        }
    }
    put("outputs", cfg.outputs.iter().map(|o| o.name()).collect::<Vec<_>>().join(", "));
    out
}

impl ScenarioConfig {
    pub fn build_system(&self) -> Result<TransitionSystem> {
        match &self.system {
            SystemSpec::Preset(key) => system_preset(key)?.build(),
            SystemSpec::Inline(s) => {
                let ground = LevelSpec::new(s.ground_j, s.nuclear_spin, s.ground_f, s.ground_g)?;
                let excited = LevelSpec::new(s.excited_j, s.nuclear_spin, s.excited_f, s.excited_g)?;
                build_system(s.label.clone(), ground, excited, s.loss)
            }
        }
        .map_err(|e| Error::Config(format!("invalid transition: {e}")))
    }

    pub fn field(&self) -> Result<FieldConfig> {
        match self.intensity {
            IntensitySpec::Rabi(r) => FieldConfig::new(self.polarization, r, self.detuning),
            IntensitySpec::Intensity { mw_cm2, saturation_mw_cm2 } => {
                FieldConfig::from_intensity(self.polarization, mw_cm2, saturation_mw_cm2, self.detuning)
            }
        }
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn b_grid(&self) -> Result<Vec<f64>> {
        linspace(self.scan.min, self.scan.max, self.scan.points)
    }
}

/// Run the scan described by `cfg`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<LineshapeScan> {
    run_scenario_with(cfg, Execution::default())
}

pub fn run_scenario_with(cfg: &ScenarioConfig, execution: Execution) -> Result<LineshapeScan> {
    let system = cfg.build_system()?;
    let field = cfg.field()?;
    scan_lineshape_with(&system, &field, &cfg.b_grid()?, cfg.mode, execution)
}

/// Process exit status for an error: 1 config, 2 solver, 3 I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Range { .. } | Error::Config(_) => 1,
        Error::Io { .. } => 3,
        _ => 2,
    }
}

fn number(x: f64) -> String {
    format!("{x:.11e}")
}

fn projection_labels(n: usize) -> Vec<String> {
    let f = AngularMomentum::from_twice((n - 1) as u32);
    f.projections()
        .map(|m| if m.twice() > 0 { format!("m+{m}") } else { format!("m{m}") })
        .collect()
}

/// CSV text: `#` config echo, header, one row per field value.
pub fn to_csv_string(scan: &LineshapeScan, cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    for line in to_config_text(cfg).lines() {
        let _ = writeln!(out, "# {line}");
    }
    let mut header = vec!["b_larmor".to_string(), "pi_e".into(), "chi_im".into()];
    let pops = cfg.outputs.contains(&Output::GroundPopulations);
    let coh = cfg.outputs.contains(&Output::Coherence);
    if pops {
        let n = scan.ground_summary.first().map_or(0, |g| g.populations.len());
        header.extend(projection_labels(n).into_iter().map(|m| format!("ground_pop_{m}")));
    }
    if coh {
        header.push("coherence".into());
    }
    let _ = writeln!(out, "{}", header.join(","));
    for k in 0..scan.len() {
        let mut row = vec![number(scan.b_grid[k]), number(scan.pi_e[k]), number(scan.chi_im[k])];
        if pops {
            row.extend(scan.ground_summary[k].populations.iter().map(|&p| number(p)));
        }
        if coh {
            row.push(number(scan.ground_summary[k].coherence));
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Recover the scenario from the metadata block of a CSV file.
pub fn parse_csv_metadata(csv: &str) -> Result<ScenarioConfig> {
    let text: String = csv
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", l.trim_start_matches('#').trim_start()))
        .collect();
    parse_config(&text)
}

/// Write the CSV through a sibling temporary file; nothing is left behind
/// on failure.
pub fn write_csv(scan: &LineshapeScan, cfg: &ScenarioConfig, destination: &Path) -> Result<()> {
    let io = |source| Error::Io { path: destination.display().to_string(), source };
    let mut partial = PathBuf::from(destination);
    partial.as_mut_os_string().push(".partial");
    let result = (|| {
        let mut file = fs::File::create(&partial)?;
        file.write_all(to_csv_string(scan, cfg).as_bytes())?;
        file.sync_all()?;
        fs::rename(&partial, destination)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&partial);
        return Err(io(e));
    }
    Ok(())
}

/// A named, shipped scenario.
#[derive(Clone, Copy, Debug)]
pub struct FigurePreset {
    pub name: &'static str,
    pub description: &'static str,
    text: &'static str,
}

impl FigurePreset {
    pub fn config(&self) -> Result<ScenarioConfig> {
        parse_config(self.text)
    }

    pub fn text(&self) -> &'static str {
        self.text
    }
}

pub const FIGURE_PRESETS: [FigurePreset; 8] = [
    FigurePreset {
        name: "fig2_low",
        description: "87Rb F=2->3 fluorescence, linear light, s = 0.01: narrow bright peak",
        text: "system = rb87_2_3\nlaser.rabi_over_gamma = 0.05\nscan.min = -0.04\nscan.max = 0.04\nscan.points = 401\n",
    },
    FigurePreset {
        name: "fig2_circular",
        description: "87Rb F=2->3, circular light, s = 0.01: no narrow feature",
        text: "system = rb87_2_3\npolarization = sigma_plus\nlaser.rabi_over_gamma = 0.05\nscan.min = -0.04\nscan.max = 0.04\nscan.points = 401\n",
    },
    FigurePreset {
        name: "fig2_broad",
        description: "87Rb F=2->3, linear light, s = 0.01, whole homogeneous line",
        text: "system = rb87_2_3\nlaser.rabi_over_gamma = 0.05\nscan.min = -3\nscan.max = 3\nscan.points = 601\n",
    },
    FigurePreset {
        name: "fig2_high",
        description: "87Rb F=2->3, linear light, s = 100: reversed lineshape",
        text: "system = rb87_2_3\nlaser.rabi_over_gamma = 5\nscan.min = -6\nscan.max = 6\nscan.points = 241\n",
    },
    FigurePreset {
        name: "fig3_low",
        description: "85Rb F=3->4 absorption, linear light, s = 0.01",
        text: "system = rb85_3_4\nlaser.rabi_over_gamma = 0.05\nscan.min = -0.06\nscan.max = 0.06\nscan.points = 401\n",
    },
    FigurePreset {
        name: "fig4",
        description: "87Rb F=1->2 (open), integrated over 100/Gamma, s = 0.01: no bright resonance",
        text: "system = rb87_1_2_open\nlaser.rabi_over_gamma = 0.05\nscan.min = -0.04\nscan.max = 0.04\nscan.points = 201\nmode = integrated\nmode.t_int_gamma = 100\n",
    },
    FigurePreset {
        name: "fig5_low",
        description: "Cs F=4->5, linear light, s = 0.01",
        text: "system = cs_4_5\nlaser.rabi_over_gamma = 0.05\nscan.min = -0.08\nscan.max = 0.08\nscan.points = 201\n",
    },
    FigurePreset {
        name: "fig5_high",
        description: "Cs F=4->5, linear light, s = 100: minimum at zero field",
        text: "system = cs_4_5\nlaser.rabi_over_gamma = 5\nscan.min = -6\nscan.max = 6\nscan.points = 121\n",
    },
];

pub fn figure_preset(name: &str) -> Result<ScenarioConfig> {
    FIGURE_PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?
        .config()
}
