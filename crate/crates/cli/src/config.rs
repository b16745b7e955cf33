//! Run configuration: a TOML document in user units (MHz, kHz, µs).
//!
//! Frequencies are ordinary frequencies; they are multiplied by 2π on the
//! way in, so `omega_ab_mhz = 10` means `Ω_ab = 2π·10 rad/µs`. Unknown keys
//! are rejected.

use std::f64::consts::PI;
use std::str::FromStr;

use esp_core::analysis::{linspace, Observable, SweepAxis};
use esp_core::dynamics::{PropagateOptions, SteadyStateMethod, SteadyStateOptions};
use esp_core::liouvillian::DensityMatrix;
use esp_core::model::{delta0, dressed_states, Gauge, Handedness, SystemParams};
use esp_core::{mhz_to_rad_per_us, rad_per_us_to_mhz};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Free-form description carried along with the configuration.
    #[serde(default)]
    pub note: Option<String>,
    #[serde(default)]
    pub handedness: HandednessSel,
    pub params: ParamsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub evolve: EvolveConfig,
    #[serde(default)]
    pub steady: SteadyConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub mixture: Option<MixtureConfig>,
    #[serde(default)]
    pub output: Option<OutputConfig>,
    #[serde(default)]
    pub molecule: Option<MoleculeInfo>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HandednessSel {
    L,
    R,
    #[default]
    Both,
}

impl HandednessSel {
    pub fn selected(self) -> Vec<Handedness> {
        match self {
            HandednessSel::L => vec![Handedness::Left],
            HandednessSel::R => vec![Handedness::Right],
            HandednessSel::Both => Handedness::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub omega_ab_mhz: f64,
    pub omega_ca_mhz: f64,
    pub omega_cb_mhz: f64,
    pub omega_ce_mhz: f64,
    pub gamma_mhz: f64,
    /// A number in MHz, or `"delta0"` / `"-delta0"`.
    pub delta_mhz: DeltaSpec,
    #[serde(default)]
    pub delta_c_mhz: f64,
    #[serde(default)]
    pub delta_e_mhz: f64,
    #[serde(default)]
    pub kappa_khz: f64,
    /// Left-handed microwave phase in radians, or `"pi"`.
    #[serde(default)]
    pub phi_l: Phase,
    #[serde(default = "default_n")]
    pub n: usize,
    /// Reserved for weighted decay channels; only `"equal"` is supported.
    #[serde(default)]
    pub branching: Branching,
}

fn default_n() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "NumberOrName")]
pub enum DeltaSpec {
    Mhz(f64),
    /// `sign · δ₀`.
    Delta0(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(try_from = "NumberOrName")]
pub struct Phase(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrName {
    Number(f64),
    Name(String),
}

impl TryFrom<NumberOrName> for DeltaSpec {
    type Error = String;

    fn try_from(v: NumberOrName) -> Result<Self, String> {
        match v {
            NumberOrName::Number(x) => Ok(DeltaSpec::Mhz(x)),
            NumberOrName::Name(s) => match s.as_str() {
                "delta0" | "+delta0" => Ok(DeltaSpec::Delta0(1.0)),
                "-delta0" => Ok(DeltaSpec::Delta0(-1.0)),
                _ => Err(format!(
                    "expected a number in MHz, \"delta0\" or \"-delta0\", got \"{s}\""
                )),
            },
        }
    }
}

impl TryFrom<NumberOrName> for Phase {
    type Error = String;

    fn try_from(v: NumberOrName) -> Result<Self, String> {
        match v {
            NumberOrName::Number(x) => Ok(Phase(x)),
            NumberOrName::Name(s) if s == "pi" => Ok(Phase(PI)),
            NumberOrName::Name(s) => Err(format!(
                "expected a phase in radians or \"pi\", got \"{s}\""
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branching {
    #[default]
    Equal,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub state: InitialKind,
    /// Diagonal weights for `state = "custom"`, one per level in basis order
    /// `b, a, c, e, x1, …`; normalised on use.
    #[serde(default)]
    pub diagonal: Option<Vec<f64>>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            state: InitialKind::UniformAbc,
            diagonal: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(try_from = "String")]
pub enum InitialKind {
    UniformAbc,
    UniformAb,
    PureA,
    PureB,
    PureDark,
    Custom,
}

impl FromStr for InitialKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "uniform-abc" => InitialKind::UniformAbc,
            "uniform-ab" => InitialKind::UniformAb,
            "pure:a" => InitialKind::PureA,
            "pure:b" => InitialKind::PureB,
            "pure:D" => InitialKind::PureDark,
            "custom" => InitialKind::Custom,
            _ => {
                return Err(format!(
                    "unknown initial state \"{s}\"; expected uniform-abc, uniform-ab, pure:a, pure:b, pure:D or custom"
                ))
            }
        })
    }
}

impl TryFrom<String> for InitialKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default = "default_t_end")]
    pub t_end_us: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_dt_max")]
    pub dt_max_us: f64,
}

fn default_t_end() -> f64 {
    2.0
}

fn default_samples() -> usize {
    200
}

fn default_dt_max() -> f64 {
    1e-3
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_end_us: default_t_end(),
            samples: default_samples(),
            dt_max_us: default_dt_max(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadyConfig {
    #[serde(default)]
    pub method: Option<MethodSel>,
    #[serde(default)]
    pub max_time_us: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSel {
    NullSpace,
    LongTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSel {
    Kappa,
    N,
    Delta,
    DeltaE,
}

impl AxisSel {
    pub fn axis(self) -> SweepAxis {
        match self {
            AxisSel::Kappa => SweepAxis::Kappa,
            AxisSel::N => SweepAxis::N,
            AxisSel::Delta => SweepAxis::Delta,
            AxisSel::DeltaE => SweepAxis::DeltaE,
        }
    }

    /// Column name of the axis in user units.
    pub fn column(self) -> &'static str {
        match self {
            AxisSel::Kappa => "kappa_khz",
            AxisSel::N => "n",
            AxisSel::Delta => "delta_mhz",
            AxisSel::DeltaE => "delta_e_mhz",
        }
    }
}

impl FromStr for AxisSel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "kappa" => Ok(AxisSel::Kappa),
            "n" => Ok(AxisSel::N),
            "delta" => Ok(AxisSel::Delta),
            "delta_e" => Ok(AxisSel::DeltaE),
            _ => Err(format!(
                "unknown sweep axis \"{s}\"; expected kappa, n, delta or delta_e"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepUnit {
    /// kHz for `kappa`, MHz for `delta` and `delta_e`, a count for `n`.
    #[default]
    Native,
    /// Multiples of `δ₀`; `delta` axis only.
    Delta0,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: AxisSel,
    #[serde(default)]
    pub unit: SweepUnit,
    #[serde(default)]
    pub min: Option<f64>,
    #[serde(default)]
    pub max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureConfig {
    pub f_left: f64,
    #[serde(default = "default_observable")]
    pub observable: ObservableSel,
    /// Minimum peak separation; defaults to `|δ₀|`.
    #[serde(default)]
    pub min_separation_mhz: Option<f64>,
    #[serde(default = "default_true")]
    pub calibrate: bool,
}

fn default_observable() -> ObservableSel {
    ObservableSel::A
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableSel {
    A,
    B,
}

impl ObservableSel {
    pub fn observable(self) -> Observable {
        match self {
            ObservableSel::A => Observable::A,
            ObservableSel::B => Observable::B,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
}

/// Descriptive molecular data. Not used by the simulation.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeInfo {
    pub name: String,
    pub rotational_a_mhz: f64,
    pub rotational_b_mhz: f64,
    pub rotational_c_mhz: f64,
    pub gap_c_b_mhz: f64,
    pub gap_a_b_mhz: f64,
    pub gap_c_a_mhz: f64,
    #[serde(default)]
    pub levels: Option<String>,
}

/// Parameters echoed back in the units they were configured in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamsEcho {
    pub omega_ab_mhz: f64,
    pub omega_ca_mhz: f64,
    pub omega_cb_mhz: f64,
    pub omega_ce_mhz: f64,
    pub gamma_mhz: f64,
    pub delta_mhz: f64,
    pub delta_c_mhz: f64,
    pub delta_e_mhz: f64,
    pub kappa_khz: f64,
    pub phi_l: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedSweep {
    pub axis: AxisSel,
    /// Axis values in internal units (rad/µs, or a count).
    pub internal: Vec<f64>,
    /// The same values in user units (kHz, MHz, or a count).
    pub user: Vec<f64>,
    /// Values as multiples of `δ₀`, when configured that way.
    pub in_delta0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedMixture {
    pub f_left: f64,
    pub observable: ObservableSel,
    /// rad/µs.
    pub min_separation: f64,
    pub min_separation_mhz: f64,
    pub calibrate: bool,
}

/// A configuration checked and converted to internal units.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: SystemParams,
    pub echo: ParamsEcho,
    pub handedness: Vec<Handedness>,
    pub initial: DensityMatrix,
    pub evolve: PropagateOptions,
    pub steady_method: Option<SteadyStateMethod>,
    pub steady: SteadyStateOptions,
    pub sweep: Option<ResolvedSweep>,
    pub mixture: Option<ResolvedMixture>,
    pub output: Option<String>,
    pub molecule: Option<MoleculeInfo>,
    pub note: Option<String>,
}

/// Upper bound on grid points and trajectory samples.
pub const MAX_POINTS: usize = 100_000;

/// Whether `n` leakage levels keep the superoperator within the assembly cap.
fn leakage_fits(n: usize) -> bool {
    n.checked_add(4)
        .and_then(|d| d.checked_mul(d))
        .is_some_and(|side| side <= esp_core::liouvillian::DEFAULT_ASSEMBLY_CAP)
}

fn khz_to_rad_per_us(khz: f64) -> f64 {
    mhz_to_rad_per_us(khz * 1e-3)
}

fn bad(key: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("`{key}`: {reason}"))
}

fn non_negative(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(bad(
            key,
            format!("must be finite and non-negative, got {v}"),
        ))
    }
}

fn finite(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, format!("must be finite, got {v}")))
    }
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(key, format!("must be finite and positive, got {v}")))
    }
}

impl RunConfig {
    /// Parses a TOML document. Errors carry the line, column and key.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Checks every value and converts to internal units.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let (params, echo) = self.resolve_params()?;
        let initial = self.resolve_initial(&params)?;

        let ev = &self.evolve;
        positive("evolve.t_end_us", ev.t_end_us)?;
        positive("evolve.dt_max_us", ev.dt_max_us)?;
        if ev.samples == 0 || ev.samples > MAX_POINTS {
            return Err(bad(
                "evolve.samples",
                format!("must lie in [1, {MAX_POINTS}], got {}", ev.samples),
            ));
        }

        let mut steady = SteadyStateOptions::default();
        if let Some(t) = self.steady.max_time_us {
            steady.max_time = positive("steady.max_time_us", t)?;
        }
        let steady_method = self.steady.method.map(|m| match m {
            MethodSel::NullSpace => SteadyStateMethod::NullSpace,
            MethodSel::LongTime => SteadyStateMethod::LongTime,
        });

        let sweep = self
            .sweep
            .as_ref()
            .map(|s| resolve_sweep(s, &params))
            .transpose()?;

        let mixture = match &self.mixture {
            None => None,
            Some(m) => {
                if !(0.0..=1.0).contains(&m.f_left) {
                    return Err(bad(
                        "mixture.f_left",
                        format!("must lie in [0, 1], got {}", m.f_left),
                    ));
                }
                let min_separation_mhz = match m.min_separation_mhz {
                    Some(v) => positive("mixture.min_separation_mhz", v)?,
                    None => {
                        let d0 = delta0(&params).map_err(|e| bad("params", e))?;
                        if d0 == 0.0 {
                            return Err(bad(
                                "mixture.min_separation_mhz",
                                "required when delta0 = 0 (omega_ca_mhz = omega_cb_mhz)",
                            ));
                        }
                        rad_per_us_to_mhz(d0.abs())
                    }
                };
                Some(ResolvedMixture {
                    f_left: m.f_left,
                    observable: m.observable,
                    min_separation: mhz_to_rad_per_us(min_separation_mhz),
                    min_separation_mhz,
                    calibrate: m.calibrate,
                })
            }
        };

        Ok(Resolved {
            params,
            echo,
            handedness: self.handedness.selected(),
            initial,
            evolve: PropagateOptions::new(ev.t_end_us, ev.dt_max_us, ev.samples),
            steady_method,
            steady,
            sweep,
            mixture,
            output: self.output.as_ref().and_then(|o| o.path.clone()),
            molecule: self.molecule.clone(),
            note: self.note.clone(),
        })
    }

    fn resolve_params(&self) -> Result<(SystemParams, ParamsEcho), CliError> {
        let c = &self.params;
        let mut p = SystemParams {
            omega_ab: mhz_to_rad_per_us(non_negative("params.omega_ab_mhz", c.omega_ab_mhz)?),
            omega_ca: mhz_to_rad_per_us(non_negative("params.omega_ca_mhz", c.omega_ca_mhz)?),
            omega_cb: mhz_to_rad_per_us(non_negative("params.omega_cb_mhz", c.omega_cb_mhz)?),
            omega_ce: mhz_to_rad_per_us(non_negative("params.omega_ce_mhz", c.omega_ce_mhz)?),
            gamma: mhz_to_rad_per_us(non_negative("params.gamma_mhz", c.gamma_mhz)?),
            kappa: khz_to_rad_per_us(non_negative("params.kappa_khz", c.kappa_khz)?),
            delta_c: mhz_to_rad_per_us(finite("params.delta_c_mhz", c.delta_c_mhz)?),
            delta_e: mhz_to_rad_per_us(finite("params.delta_e_mhz", c.delta_e_mhz)?),
            phi_l: finite("params.phi_l", c.phi_l.0)?,
            delta: 0.0,
            n: c.n,
        };
        let delta_mhz = match c.delta_mhz {
            DeltaSpec::Mhz(v) => {
                p.delta = mhz_to_rad_per_us(finite("params.delta_mhz", v)?);
                v
            }
            DeltaSpec::Delta0(sign) => {
                let d0 = delta0(&p).map_err(|e| bad("params.delta_mhz", e))?;
                p.delta = sign * d0;
                rad_per_us_to_mhz(p.delta)
            }
        };
        p.validate().map_err(|e| bad("params", e))?;
        if !leakage_fits(p.n) {
            return Err(bad(
                "params.n",
                format!("{} leakage levels exceed the superoperator size cap", p.n),
            ));
        }
        let echo = ParamsEcho {
            omega_ab_mhz: c.omega_ab_mhz,
            omega_ca_mhz: c.omega_ca_mhz,
            omega_cb_mhz: c.omega_cb_mhz,
            omega_ce_mhz: c.omega_ce_mhz,
            gamma_mhz: c.gamma_mhz,
            delta_mhz,
            delta_c_mhz: c.delta_c_mhz,
            delta_e_mhz: c.delta_e_mhz,
            kappa_khz: c.kappa_khz,
            phi_l: c.phi_l.0,
            n: c.n,
        };
        Ok((p, echo))
    }

    fn resolve_initial(&self, p: &SystemParams) -> Result<DensityMatrix, CliError> {
        let d = p.dim();
        let mut w = vec![0.0; d];
        let init = &self.initial;
        if init.diagonal.is_some() && init.state != InitialKind::Custom {
            return Err(bad(
                "initial.diagonal",
                "only allowed with state = \"custom\"",
            ));
        }
        use esp_core::model::HilbertSpace as H;
        match init.state {
            InitialKind::UniformAbc => {
                w[H::A] = 1.0;
                w[H::B] = 1.0;
                w[H::C] = 1.0;
            }
            InitialKind::UniformAb => {
                w[H::A] = 1.0;
                w[H::B] = 1.0;
            }
            InitialKind::PureA => w[H::A] = 1.0,
            InitialKind::PureB => w[H::B] = 1.0,
            InitialKind::PureDark => {
                let (dark, _) = dressed_states(p).map_err(|e| bad("initial.state", e))?;
                return DensityMatrix::pure(&dark).map_err(|e| bad("initial.state", e));
            }
            InitialKind::Custom => {
                let diag = init
                    .diagonal
                    .as_ref()
                    .ok_or_else(|| bad("initial.diagonal", "required for state = \"custom\""))?;
                if diag.len() != d {
                    return Err(bad(
                        "initial.diagonal",
                        format!("needs {d} entries (b, a, c, e, x1..), got {}", diag.len()),
                    ));
                }
                w.copy_from_slice(diag);
            }
        }
        DensityMatrix::from_diagonal(&w).map_err(|e| bad("initial", e))
    }
}

impl Resolved {
    pub fn gauge(&self) -> Result<Gauge, CliError> {
        Gauge::from_phase(self.params.phi_l).map_err(|e| bad("params.phi_l", e))
    }

    /// The configured sweep, or the default grid for `axis`.
    pub fn sweep_for(&self, axis: Option<AxisSel>) -> Result<ResolvedSweep, CliError> {
        match (&self.sweep, axis) {
            (Some(s), None) => Ok(s.clone()),
            (Some(s), Some(a)) if s.axis == a => Ok(s.clone()),
            (_, Some(a)) => default_sweep(a, &self.params),
            (None, None) => Err(CliError::Config(
                "no [sweep] table in the configuration and no --axis given".into(),
            )),
        }
    }
}

/// Grid used when no sweep is configured for an axis.
pub fn default_sweep(axis: AxisSel, p: &SystemParams) -> Result<ResolvedSweep, CliError> {
    let cfg = match axis {
        AxisSel::Kappa => SweepConfig {
            axis,
            unit: SweepUnit::Native,
            min: None,
            max: None,
            points: None,
            values: Some(vec![0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0]),
        },
        AxisSel::N => SweepConfig {
            axis,
            unit: SweepUnit::Native,
            min: Some(1.0),
            max: Some(15.0),
            points: Some(15),
            values: None,
        },
        AxisSel::Delta => SweepConfig {
            axis,
            unit: SweepUnit::Delta0,
            min: Some(-3.0),
            max: Some(3.0),
            points: Some(201),
            values: None,
        },
        AxisSel::DeltaE => SweepConfig {
            axis,
            unit: SweepUnit::Native,
            min: Some(-50.0),
            max: Some(50.0),
            points: Some(21),
            values: None,
        },
    };
    resolve_sweep(&cfg, p)
}

fn resolve_sweep(s: &SweepConfig, p: &SystemParams) -> Result<ResolvedSweep, CliError> {
    let raw = match (&s.values, s.min, s.max, s.points) {
        (Some(v), None, None, None) => {
            if v.is_empty() || v.len() > MAX_POINTS {
                return Err(bad(
                    "sweep.values",
                    format!("needs 1 to {MAX_POINTS} entries, got {}", v.len()),
                ));
            }
            v.clone()
        }
        (None, Some(lo), Some(hi), Some(points)) => {
            finite("sweep.min", lo)?;
            finite("sweep.max", hi)?;
            if hi < lo {
                return Err(bad(
                    "sweep.max",
                    format!("must not be below sweep.min ({hi} < {lo})"),
                ));
            }
            if points == 0 || (points == 1 && lo != hi) || points > MAX_POINTS {
                return Err(bad(
                    "sweep.points",
                    format!("need 2 to {MAX_POINTS} points for a range, got {points}"),
                ));
            }
            linspace(lo, hi, points)
        }
        _ => {
            return Err(bad(
                "sweep",
                "give either `values`, or all of `min`, `max` and `points`",
            ))
        }
    };
    for v in &raw {
        finite("sweep", *v)?;
    }

    let (internal, user, in_delta0) = match (s.axis, s.unit) {
        (AxisSel::Delta, SweepUnit::Delta0) => {
            let d0 = delta0(p).map_err(|e| bad("sweep.unit", e))?;
            if d0 == 0.0 {
                return Err(bad("sweep.unit", "delta0 = 0 for these couplings; use MHz"));
            }
            let internal: Vec<f64> = raw.iter().map(|m| m * d0.abs()).collect();
            let user = internal.iter().map(|v| rad_per_us_to_mhz(*v)).collect();
            (internal, user, Some(raw))
        }
        (_, SweepUnit::Delta0) => {
            return Err(bad(
                "sweep.unit",
                "\"delta0\" is only valid on the delta axis",
            ))
        }
        (AxisSel::Kappa, _) => {
            for v in &raw {
                positive("sweep (kappa_khz)", *v)?;
            }
            (
                raw.iter().map(|v| khz_to_rad_per_us(*v)).collect(),
                raw,
                None,
            )
        }
        (AxisSel::N, _) => {
            for v in &raw {
                if v.fract() != 0.0 || *v < 0.0 {
                    return Err(bad(
                        "sweep (n)",
                        format!("leakage counts must be non-negative integers, got {v}"),
                    ));
                }
                if !leakage_fits(*v as usize) {
                    return Err(bad(
                        "sweep (n)",
                        format!("{v} leakage levels exceed the superoperator size cap"),
                    ));
                }
            }
            (raw.clone(), raw, None)
        }
        (AxisSel::Delta | AxisSel::DeltaE, _) => (
            raw.iter().map(|v| mhz_to_rad_per_us(*v)).collect(),
            raw,
            None,
        ),
    };
    Ok(ResolvedSweep {
        axis: s.axis,
        internal,
        user,
        in_delta0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [params]
        omega_ab_mhz = 10
        omega_ca_mhz = 10.0
        omega_cb_mhz = 6.0
        omega_ce_mhz = 20.0
        gamma_mhz = 10.0
        delta_mhz = "delta0"
    "#;

    #[test]
    fn minimal_config_resolves_to_reference() {
        let r = RunConfig::parse(MINIMAL).unwrap().resolve().unwrap();
        let reference = SystemParams::reference();
        assert!((r.params.delta - reference.delta).abs() < 1e-12);
        assert!((r.params.omega_ab - reference.omega_ab).abs() < 1e-12);
        assert_eq!(r.params.n, 1);
        assert_eq!(r.params.kappa, 0.0);
        assert_eq!(r.handedness, Handedness::BOTH.to_vec());
        assert!((r.echo.delta_mhz - 16.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.echo.omega_ab_mhz, 10.0);
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let text = format!("{MINIMAL}\nkapa_khz = 1.0\n");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("kapa_khz"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn delta_names_and_phase() {
        let text = MINIMAL.replace("\"delta0\"", "\"-delta0\"") + "phi_l = \"pi\"\n";
        let r = RunConfig::parse(&text).unwrap().resolve().unwrap();
        assert!((r.params.delta + SystemParams::reference().delta).abs() < 1e-12);
        assert_eq!(r.params.phi_l, PI);
        assert!(RunConfig::parse(&MINIMAL.replace("\"delta0\"", "\"delta1\"")).is_err());
    }

    #[test]
    fn negative_rate_names_the_key() {
        let text = format!("{MINIMAL}kappa_khz = -1.0\n");
        let err = RunConfig::parse(&text)
            .unwrap()
            .resolve()
            .unwrap_err()
            .to_string();
        assert!(err.contains("params.kappa_khz"), "{err}");
    }

    #[test]
    fn custom_initial_state_needs_matching_length() {
        let text = format!("{MINIMAL}\n[initial]\nstate = \"custom\"\ndiagonal = [1.0, 1.0]\n");
        assert!(RunConfig::parse(&text).unwrap().resolve().is_err());
        let text = format!(
            "{MINIMAL}\n[initial]\nstate = \"custom\"\ndiagonal = [1.0, 3.0, 0.0, 0.0, 0.0]\n"
        );
        let r = RunConfig::parse(&text).unwrap().resolve().unwrap();
        assert!((r.initial.population(1) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn pure_dark_initial_state() {
        let text = format!("{MINIMAL}\n[initial]\nstate = \"pure:D\"\n");
        let r = RunConfig::parse(&text).unwrap().resolve().unwrap();
        let (d, _) = dressed_states(&r.params).unwrap();
        let p = d.matrix_element(r.initial.as_matrix(), &d).re;
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_units() {
        let text = format!("{MINIMAL}\n[sweep]\naxis = \"delta\"\nunit = \"delta0\"\nmin = -3\nmax = 3\npoints = 201\n");
        let r = RunConfig::parse(&text).unwrap().resolve().unwrap();
        let s = r.sweep.unwrap();
        assert_eq!(s.internal.len(), 201);
        assert!((s.internal[200] - 3.0 * SystemParams::reference().delta).abs() < 1e-12);
        assert!((s.user[200] - 16.0).abs() < 1e-12);

        let text = format!("{MINIMAL}\n[sweep]\naxis = \"kappa\"\nvalues = [1, 3]\n");
        let s = RunConfig::parse(&text)
            .unwrap()
            .resolve()
            .unwrap()
            .sweep
            .unwrap();
        assert_eq!(s.user, vec![1.0, 3.0]);
        assert!((s.internal[0] - std::f64::consts::TAU * 1e-3).abs() < 1e-15);

        let text = format!("{MINIMAL}\n[sweep]\naxis = \"n\"\nvalues = [1.5]\n");
        assert!(RunConfig::parse(&text).unwrap().resolve().is_err());
        let text =
            format!("{MINIMAL}\n[sweep]\naxis = \"kappa\"\nunit = \"delta0\"\nvalues = [1]\n");
        assert!(RunConfig::parse(&text).unwrap().resolve().is_err());
        let text = format!("{MINIMAL}\n[sweep]\naxis = \"kappa\"\nvalues = [1]\nmin = 0\n");
        assert!(RunConfig::parse(&text).unwrap().resolve().is_err());
    }

    #[test]
    fn grid_sizes_are_bounded() {
        let text = format!(
            "{MINIMAL}\n[sweep]\naxis = \"delta\"\nmin = -1\nmax = 1\npoints = 1000000000000\n"
        );
        assert!(RunConfig::parse(&text).unwrap().resolve().is_err());
        let text = format!("{MINIMAL}\n[evolve]\nsamples = 1000000000000\n");
        assert!(RunConfig::parse(&text).unwrap().resolve().is_err());
    }

    #[test]
    fn oversized_leakage_is_a_config_error() {
        let text = format!("{MINIMAL}n = 200\n");
        assert!(matches!(
            RunConfig::parse(&text).unwrap().resolve(),
            Err(CliError::Config(_))
        ));
        let text = format!("{MINIMAL}n = 9223372036854775807\n");
        assert!(matches!(
            RunConfig::parse(&text).unwrap().resolve(),
            Err(CliError::Config(_))
        ));
    }
}
