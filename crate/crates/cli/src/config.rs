//! Configuration ingestion: a sectioned TOML document with explicit units
//! in key names (ħ = 1, so "per_time" doubles as an energy unit), parsed
//! into a validated [`RunConfig`].

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Heom,
    IoHeom,
    MarkovScatter,
    OracleCompare,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Heom => "heom",
            Scenario::IoHeom => "io-heom",
            Scenario::MarkovScatter => "markov-scatter",
            Scenario::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Which 2×2 coupling operator the hierarchy scenarios use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingOp {
    SigmaZ,
    SigmaX,
    SigmaY,
}

/// Named initial emitter states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    Plus,
    Excited,
    Ground,
}

/// One (amplitude, rate) pair of an exponential series.
#[derive(Debug, Clone, Copy)]
pub struct ExpTerm {
    pub amplitude: Complex64,
    pub rate: Complex64,
}

/// One input/output field block of an io-HEOM scenario.
#[derive(Debug, Clone)]
pub struct FieldConfig {
    pub label: usize,
    pub dynamic: bool,
    /// (interaction-superoperator index, kernel term) pairs.
    pub terms: Vec<(usize, ExpTerm)>,
}

/// Hierarchy-scenario parameters (scenarios `heom` and `io-heom`).
#[derive(Debug, Clone)]
pub struct HierarchyRun {
    pub omega_s: f64,
    pub coupling: CouplingOp,
    pub initial_state: InitialState,
    pub n_max: usize,
    pub alpha0: Complex64,
    pub bath: Vec<ExpTerm>,
    pub fields: Vec<FieldConfig>,
    pub t_grid: Vec<f64>,
}

/// Scattering-scenario parameters (scenarios `markov-scatter` and
/// `oracle-compare`).
#[derive(Debug, Clone)]
pub struct ScatterRun {
    pub omega_s: f64,
    pub gamma: f64,
    pub x_in: f64,
    pub p_in: f64,
    pub sigma_in: f64,
    pub light_speed: f64,
    pub cell_dx: f64,
    pub x_grid: Vec<f64>,
    pub t_out: Vec<f64>,
    /// Oracle-compare tolerance, relative to the peak oracle density.
    pub tolerance_rel_peak: f64,
}

#[derive(Debug, Clone)]
pub enum ScenarioConfig {
    Hierarchy(HierarchyRun),
    Scatter(ScatterRun),
}

/// A fully validated run: scenario, parameters, and output destination.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub params: ScenarioConfig,
    pub out_path: Option<String>,
    pub format: Format,
    /// SHA-256 of the raw configuration bytes, for output provenance.
    pub config_hash: String,
}

// ---------------------------------------------------------------------------
// Raw (serde) layer
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    output: Option<RawOutput>,
    grid: Option<RawGrid>,
    system: Option<RawSystem>,
    hierarchy: Option<RawHierarchy>,
    bath: Option<RawBath>,
    #[serde(default)]
    field: Vec<RawField>,
    scatter: Option<RawScatter>,
    compare: Option<RawCompare>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<String>,
    format: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    #[serde(default)]
    t_start: f64,
    t_stop: f64,
    n_time: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    omega_s_per_time: f64,
    coupling: String,
    initial_state: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHierarchy {
    n_max: usize,
    alpha0_re: Option<f64>,
    alpha0_im: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    term: Vec<RawTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    amplitude_re: f64,
    #[serde(default)]
    amplitude_im: f64,
    rate_re_per_time: f64,
    #[serde(default)]
    rate_im_per_time: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    label: usize,
    kind: String,
    term: Vec<RawFieldTerm>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFieldTerm {
    alpha: usize,
    amplitude_re: f64,
    #[serde(default)]
    amplitude_im: f64,
    rate_re_per_time: f64,
    #[serde(default)]
    rate_im_per_time: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScatter {
    omega_s_per_time: f64,
    gamma_per_time: f64,
    x_in: f64,
    p_in_per_length: f64,
    sigma_in_per_length: f64,
    light_speed: Option<f64>,
    cell_dx: Option<f64>,
    x_start: f64,
    x_stop: f64,
    n_x: usize,
    t_out: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompare {
    tolerance_rel_peak: Option<f64>,
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{field}`: {msg}"))
}

fn require_finite(field: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(field, format!("must be finite, got {v}")))
    }
}

fn lin_grid(field: &str, start: f64, stop: f64, n: usize) -> Result<Vec<f64>, CliError> {
    require_finite(field, start)?;
    require_finite(field, stop)?;
    if n < 2 || !(stop > start) {
        return Err(bad(
            field,
            format!("needs at least 2 points with stop > start, got [{start}, {stop}] × {n}"),
        ));
    }
    Ok((0..n)
        .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
        .collect())
}

fn term(field: &str, raw: &RawTerm) -> Result<ExpTerm, CliError> {
    require_finite(field, raw.amplitude_re)?;
    require_finite(field, raw.amplitude_im)?;
    require_finite(field, raw.rate_re_per_time)?;
    require_finite(field, raw.rate_im_per_time)?;
    if raw.rate_re_per_time < 0.0 {
        return Err(bad(
            field,
            format!("rate_re_per_time must be non-negative, got {}", raw.rate_re_per_time),
        ));
    }
    Ok(ExpTerm {
        amplitude: Complex64::new(raw.amplitude_re, raw.amplitude_im),
        rate: Complex64::new(raw.rate_re_per_time, raw.rate_im_per_time),
    })
}

/// Parses and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_bytes(&bytes)
}

/// Parses and validates configuration bytes (the unit of testing; the hash
/// is over exactly these bytes).
pub fn parse_config_bytes(bytes: &[u8]) -> Result<RunConfig, CliError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| CliError::Config(format!("configuration is not UTF-8: {e}")))?;
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| CliError::Config(format!("TOML parse: {e}")))?;

    let scenario = match raw.scenario.as_deref() {
        None => return Err(bad("scenario", "missing required key")),
        Some("heom") => Scenario::Heom,
        Some("io-heom") => Scenario::IoHeom,
        Some("markov-scatter") => Scenario::MarkovScatter,
        Some("oracle-compare") => Scenario::OracleCompare,
        Some(other) => {
            return Err(bad(
                "scenario",
                format!("unknown scenario {other:?}; expected heom, io-heom, markov-scatter, or oracle-compare"),
            ))
        }
    };

    let (out_path, format) = match &raw.output {
        None => (None, Format::Csv),
        Some(o) => {
            let format = match o.format.as_deref() {
                None | Some("csv") => Format::Csv,
                Some("json") => Format::Json,
                Some(other) => {
                    return Err(bad("output.format", format!("expected csv or json, got {other:?}")))
                }
            };
            (o.path.clone(), format)
        }
    };

    let params = match scenario {
        Scenario::Heom | Scenario::IoHeom => {
            ScenarioConfig::Hierarchy(validate_hierarchy(&raw, scenario)?)
        }
        Scenario::MarkovScatter | Scenario::OracleCompare => {
            ScenarioConfig::Scatter(validate_scatter(&raw)?)
        }
    };

    use sha2::Digest;
    let config_hash: String = sha2::Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();

    Ok(RunConfig {
        scenario,
        params,
        out_path,
        format,
        config_hash,
    })
}

fn validate_hierarchy(raw: &RawConfig, scenario: Scenario) -> Result<HierarchyRun, CliError> {
    let system = raw
        .system
        .as_ref()
        .ok_or_else(|| bad("system", "section required for hierarchy scenarios"))?;
    let hier = raw
        .hierarchy
        .as_ref()
        .ok_or_else(|| bad("hierarchy", "section required for hierarchy scenarios"))?;
    let grid = raw
        .grid
        .as_ref()
        .ok_or_else(|| bad("grid", "section required for hierarchy scenarios"))?;

    let omega_s = require_finite("system.omega_s_per_time", system.omega_s_per_time)?;
    let coupling = match system.coupling.as_str() {
        "sigma_z" => CouplingOp::SigmaZ,
        "sigma_x" => CouplingOp::SigmaX,
        "sigma_y" => CouplingOp::SigmaY,
        other => {
            return Err(bad(
                "system.coupling",
                format!("expected sigma_z, sigma_x, or sigma_y, got {other:?}"),
            ))
        }
    };
    let initial_state = match system.initial_state.as_deref() {
        None | Some("plus") => InitialState::Plus,
        Some("excited") => InitialState::Excited,
        Some("ground") => InitialState::Ground,
        Some(other) => {
            return Err(bad(
                "system.initial_state",
                format!("expected plus, excited, or ground, got {other:?}"),
            ))
        }
    };

    let alpha0 = Complex64::new(
        require_finite("hierarchy.alpha0_re", hier.alpha0_re.unwrap_or(0.0))?,
        require_finite("hierarchy.alpha0_im", hier.alpha0_im.unwrap_or(-1.0))?,
    );
    if alpha0.norm() == 0.0 {
        return Err(bad("hierarchy.alpha0_re", "scaling parameter must be nonzero"));
    }

    let bath = raw
        .bath
        .as_ref()
        .map(|b| {
            b.term
                .iter()
                .map(|t| term("bath.term", t))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?
        .unwrap_or_default();

    let mut labels = BTreeSet::new();
    let mut fields = Vec::new();
    for f in &raw.field {
        if scenario == Scenario::Heom {
            return Err(bad("field", "fields require the io-heom scenario"));
        }
        let dynamic = match f.kind.as_str() {
            "static" => false,
            "dynamic" => true,
            other => return Err(bad("field.kind", format!("expected static or dynamic, got {other:?}"))),
        };
        if !labels.insert(f.label) {
            return Err(bad("field.label", format!("duplicate label {}", f.label)));
        }
        if f.term.is_empty() {
            return Err(bad("field.term", "each field needs at least one kernel term"));
        }
        let mut terms = Vec::new();
        for ft in &f.term {
            let t = term(
                "field.term",
                &RawTerm {
                    amplitude_re: ft.amplitude_re,
                    amplitude_im: ft.amplitude_im,
                    rate_re_per_time: ft.rate_re_per_time,
                    rate_im_per_time: ft.rate_im_per_time,
                },
            )?;
            terms.push((ft.alpha, t));
        }
        fields.push(FieldConfig {
            label: f.label,
            dynamic,
            terms,
        });
    }

    Ok(HierarchyRun {
        omega_s,
        coupling,
        initial_state,
        n_max: hier.n_max,
        alpha0,
        bath,
        fields,
        t_grid: lin_grid("grid", grid.t_start, grid.t_stop, grid.n_time)?,
    })
}

fn validate_scatter(raw: &RawConfig) -> Result<ScatterRun, CliError> {
    let s = raw
        .scatter
        .as_ref()
        .ok_or_else(|| bad("scatter", "section required for scattering scenarios"))?;
    let gamma = require_finite("scatter.gamma_per_time", s.gamma_per_time)?;
    if gamma < 0.0 {
        return Err(bad(
            "scatter.gamma_per_time",
            format!("decay rate must be non-negative, got {gamma}"),
        ));
    }
    let sigma_in = require_finite("scatter.sigma_in_per_length", s.sigma_in_per_length)?;
    if !(sigma_in > 0.0) {
        return Err(bad(
            "scatter.sigma_in_per_length",
            format!("momentum width must be positive, got {sigma_in}"),
        ));
    }
    let light_speed = require_finite("scatter.light_speed", s.light_speed.unwrap_or(1.0))?;
    if !(light_speed > 0.0) {
        return Err(bad("scatter.light_speed", "must be positive"));
    }
    let cell_dx = require_finite("scatter.cell_dx", s.cell_dx.unwrap_or(0.01))?;
    if !(cell_dx > 0.0) {
        return Err(bad("scatter.cell_dx", "must be positive"));
    }
    if s.t_out.is_empty() {
        return Err(bad("scatter.t_out", "needs at least one observation time"));
    }
    for (k, &t) in s.t_out.iter().enumerate() {
        require_finite("scatter.t_out", t)?;
        if t < 0.0 || (k > 0 && t <= s.t_out[k - 1]) {
            return Err(bad(
                "scatter.t_out",
                "observation times must be non-negative and strictly increasing",
            ));
        }
    }
    let tolerance_rel_peak = match &raw.compare {
        Some(c) => require_finite(
            "compare.tolerance_rel_peak",
            c.tolerance_rel_peak.unwrap_or(1e-3),
        )?,
        None => 1e-3,
    };
    if !(tolerance_rel_peak > 0.0) {
        return Err(bad("compare.tolerance_rel_peak", "must be positive"));
    }

    Ok(ScatterRun {
        omega_s: require_finite("scatter.omega_s_per_time", s.omega_s_per_time)?,
        gamma,
        x_in: require_finite("scatter.x_in", s.x_in)?,
        p_in: require_finite("scatter.p_in_per_length", s.p_in_per_length)?,
        sigma_in,
        light_speed,
        cell_dx,
        x_grid: lin_grid("scatter", s.x_start, s.x_stop, s.n_x)?,
        t_out: s.t_out.clone(),
        tolerance_rel_peak,
    })
}

/// Applies command-line overrides to a parsed configuration.
pub fn apply_overrides(
    cfg: &mut RunConfig,
    out: Option<String>,
    format: Option<String>,
    nmax: Option<usize>,
) -> Result<(), CliError> {
    if let Some(p) = out {
        cfg.out_path = Some(p);
    }
    match format.as_deref() {
        None => {}
        Some("csv") => cfg.format = Format::Csv,
        Some("json") => cfg.format = Format::Json,
        Some(other) => return Err(bad("--format", format!("expected csv or json, got {other:?}"))),
    }
    if let Some(n) = nmax {
        match &mut cfg.params {
            ScenarioConfig::Hierarchy(h) => h.n_max = n,
            ScenarioConfig::Scatter(_) => {
                return Err(bad("--nmax", "only meaningful for hierarchy scenarios"))
            }
        }
    }
    Ok(())
}
