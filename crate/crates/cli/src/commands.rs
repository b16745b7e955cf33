//! Subcommand implementations. Each returns the rendered output; nothing here
//! touches the filesystem.

use esp_core::analysis::{
    calibrate, calibration_fractions, estimate_fractions, mixture_curve, purity, sweep,
    Calibration, MixtureSpec, SteadyPopulations,
};
use esp_core::dynamics::{propagate, steady_state_with, SteadyState, SteadyStateMethod};
use esp_core::liouvillian::Liouvillian;
use esp_core::model::{
    dark_state_residual, delta0, dressed_coupling, dressed_states, Gauge, Handedness, HilbertSpace,
};
use esp_core::rad_per_us_to_mhz;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AxisSel, MoleculeInfo, ObservableSel, ParamsEcho, Resolved};
use crate::error::CliError;
use crate::table::{Records, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Dark-state condition, dressed couplings and residuals.
    Dark,
    /// Time evolution of the populations.
    Evolve,
    /// Steady-state populations.
    Steady,
    /// Steady states along one parameter axis.
    Sweep,
    /// Two-peak enantiomer-fraction estimate for a mixture.
    Detect,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Output {
    pub body: String,
    pub warnings: Vec<String>,
    /// JSON report written next to a CSV data product.
    pub companion: Option<String>,
}

impl Output {
    fn body(body: String) -> Self {
        Self {
            body,
            ..Self::default()
        }
    }
}

pub fn run(
    cmd: Command,
    cfg: &Resolved,
    format: Option<Format>,
    axis: Option<AxisSel>,
) -> Result<Output, CliError> {
    match cmd {
        Command::Dark => dark(cfg, format.unwrap_or(Format::Csv)),
        Command::Evolve => evolve(cfg, format.unwrap_or(Format::Csv)),
        Command::Steady => steady(cfg, format.unwrap_or(Format::Csv)),
        Command::Sweep => run_sweep(cfg, format.unwrap_or(Format::Csv), axis),
        Command::Detect => detect(cfg, format.unwrap_or(Format::Json)),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
struct PerHandedness {
    left: f64,
    right: f64,
}

#[derive(Debug, Serialize)]
struct AbPair {
    a: f64,
    b: f64,
}

#[derive(Debug, Serialize)]
struct DarkReport<'a> {
    params: &'a ParamsEcho,
    delta0_mhz: f64,
    delta0_rad_per_us: f64,
    /// Handedness whose dark state is decoupled at `δ = +δ₀`.
    dark_at_plus_delta0: Handedness,
    dark_state: AbPair,
    bright_state: AbPair,
    coupling_mhz: PerHandedness,
    coupling_rad_per_us: PerHandedness,
    residual_rad_per_us: PerHandedness,
    #[serde(skip_serializing_if = "Option::is_none")]
    warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    molecule: Option<&'a MoleculeInfo>,
}

const VANISHING_DELTA0: &str = "delta0 = 0 because omega_ca = omega_cb: both handednesses share the dark state and discrimination vanishes";

fn dark(cfg: &Resolved, format: Format) -> Result<Output, CliError> {
    let p = &cfg.params;
    let gauge = cfg.gauge()?;
    let d0 = delta0(p)?;
    let (d, b) = dressed_states(p)?;
    let coef = |s: &esp_core::model::StateVector| AbPair {
        a: s.amplitudes()[HilbertSpace::A].re,
        b: s.amplitudes()[HilbertSpace::B].re,
    };
    let cl = dressed_coupling(p, Handedness::Left)?;
    let cr = dressed_coupling(p, Handedness::Right)?;
    let rl = dark_state_residual(p, Handedness::Left)?;
    let rr = dark_state_residual(p, Handedness::Right)?;
    let warning = (d0 == 0.0).then(|| VANISHING_DELTA0.to_string());

    let report = DarkReport {
        params: &cfg.echo,
        delta0_mhz: rad_per_us_to_mhz(d0),
        delta0_rad_per_us: d0,
        dark_at_plus_delta0: gauge.dark_at_positive_delta0(),
        dark_state: coef(&d),
        bright_state: coef(&b),
        coupling_mhz: PerHandedness {
            left: rad_per_us_to_mhz(cl),
            right: rad_per_us_to_mhz(cr),
        },
        coupling_rad_per_us: PerHandedness {
            left: cl,
            right: cr,
        },
        residual_rad_per_us: PerHandedness {
            left: rl,
            right: rr,
        },
        warning: warning.clone(),
        molecule: cfg.molecule.as_ref(),
    };
    let body = match format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let mut r = Records::default();
            echo_records(&mut r, &cfg.echo);
            r.push("delta0", report.delta0_mhz, "MHz");
            r.push("delta0", d0, "rad/us");
            r.push("dark_a", report.dark_state.a, "1");
            r.push("dark_b", report.dark_state.b, "1");
            r.push("bright_a", report.bright_state.a, "1");
            r.push("bright_b", report.bright_state.b, "1");
            r.push("coupling_L", report.coupling_mhz.left, "MHz");
            r.push("coupling_R", report.coupling_mhz.right, "MHz");
            r.push("coupling_L", cl, "rad/us");
            r.push("coupling_R", cr, "rad/us");
            r.push("residual_L", rl, "rad/us");
            r.push("residual_R", rr, "rad/us");
            r.to_csv()?
        }
    };
    Ok(Output {
        body,
        warnings: warning.into_iter().collect(),
        companion: None,
    })
}

fn echo_records(r: &mut Records, e: &ParamsEcho) {
    r.push("omega_ab", e.omega_ab_mhz, "MHz");
    r.push("omega_ca", e.omega_ca_mhz, "MHz");
    r.push("omega_cb", e.omega_cb_mhz, "MHz");
    r.push("omega_ce", e.omega_ce_mhz, "MHz");
    r.push("gamma", e.gamma_mhz, "MHz");
    r.push("delta", e.delta_mhz, "MHz");
    r.push("delta_c", e.delta_c_mhz, "MHz");
    r.push("delta_e", e.delta_e_mhz, "MHz");
    r.push("kappa", e.kappa_khz, "kHz");
    r.push("phi_l", e.phi_l, "rad");
    r.push("n", e.n as f64, "1");
}

#[derive(Debug, Serialize)]
struct TableReport<'a, M: Serialize> {
    params: &'a ParamsEcho,
    #[serde(flatten)]
    meta: M,
    #[serde(flatten)]
    table: &'a Table,
}

fn render<M: Serialize>(
    cfg: &Resolved,
    table: &Table,
    meta: M,
    format: Format,
) -> Result<String, CliError> {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => to_json(&TableReport {
            params: &cfg.echo,
            meta,
            table,
        }),
    }
}

fn evolve(cfg: &Resolved, format: Format) -> Result<Output, CliError> {
    let p = &cfg.params;
    let labels = p.space().labels();
    let has_dressed = dressed_states(p).is_ok();
    let trajectories = cfg
        .handedness
        .par_iter()
        .map(|h| {
            let l = Liouvillian::new(p, *h)?;
            let traj = propagate(&l, &cfg.initial, &cfg.evolve)?;
            let dressed = if has_dressed {
                Some(traj.dressed_series(p)?)
            } else {
                None
            };
            Ok((traj, dressed))
        })
        .collect::<Result<Vec<_>, esp_core::Error>>()?;

    let mut columns = vec!["t_us".to_string()];
    for h in &cfg.handedness {
        columns.extend(labels.iter().map(|s| format!("p_{s}_{h}")));
        if has_dressed {
            columns.push(format!("p_D_{h}"));
            columns.push(format!("p_B_{h}"));
        }
    }
    let mut table = Table::new(columns);
    let times = &trajectories[0].0.times;
    for (k, t) in times.iter().enumerate() {
        let mut row = vec![*t];
        for (traj, dressed) in &trajectories {
            let s = &traj.states[k];
            row.extend((0..s.dim()).map(|i| s.population(i)));
            if let Some((pd, pb)) = dressed {
                row.push(pd[k]);
                row.push(pb[k]);
            }
        }
        table.push(row);
    }

    #[derive(Serialize)]
    struct Meta {
        t_end_us: f64,
        dt_max_us: f64,
        samples: usize,
    }
    let meta = Meta {
        t_end_us: cfg.evolve.t_end,
        dt_max_us: cfg.evolve.dt_max,
        samples: cfg.evolve.samples,
    };
    Ok(Output::body(render(cfg, &table, meta, format)?))
}

fn method_name(m: SteadyStateMethod) -> &'static str {
    match m {
        SteadyStateMethod::NullSpace => "null-space",
        SteadyStateMethod::LongTime => "long-time",
    }
}

fn steady(cfg: &Resolved, format: Format) -> Result<Output, CliError> {
    let p = &cfg.params;
    let labels = p.space().labels();
    let dressed = dressed_states(p).ok();
    let states: Vec<SteadyState> = cfg
        .handedness
        .par_iter()
        .map(|h| {
            let l = Liouvillian::new(p, *h)?;
            steady_state_with(&l, Some(&cfg.initial), cfg.steady_method, &cfg.steady)
        })
        .collect::<Result<_, _>>()?;

    let mut columns = Vec::new();
    let mut row = Vec::new();
    for (h, ss) in cfg.handedness.iter().zip(&states) {
        columns.extend(labels.iter().map(|s| format!("p_{s}_{h}")));
        row.extend((0..ss.rho.dim()).map(|i| ss.rho.population(i)));
        if let Some((d, b)) = &dressed {
            columns.push(format!("p_D_{h}"));
            columns.push(format!("p_B_{h}"));
            row.push(d.matrix_element(ss.rho.as_matrix(), d).re);
            row.push(b.matrix_element(ss.rho.as_matrix(), b).re);
        }
        columns.push(format!("residual_{h}"));
        row.push(ss.residual);
    }
    if states.len() == 2 {
        let (l, r) = (&states[0].rho, &states[1].rho);
        for (name, i) in [("a", HilbertSpace::A), ("b", HilbertSpace::B)] {
            columns.push(format!("ratio_{name}"));
            row.push(l.population(i) / r.population(i));
        }
        for (name, i) in [("a", HilbertSpace::A), ("b", HilbertSpace::B)] {
            columns.push(format!("purity_{name}"));
            row.push(purity(l.population(i), r.population(i)).unwrap_or(f64::NAN));
        }
    }
    let mut table = Table::new(columns);
    table.push(row);

    #[derive(Serialize)]
    struct Meta {
        handedness: Vec<Handedness>,
        method: Vec<&'static str>,
        elapsed_us: Vec<Option<f64>>,
    }
    let meta = Meta {
        handedness: cfg.handedness.clone(),
        method: states.iter().map(|s| method_name(s.method)).collect(),
        elapsed_us: states.iter().map(|s| s.elapsed).collect(),
    };
    Ok(Output::body(render(cfg, &table, meta, format)?))
}

fn pop_columns(h: Handedness) -> [String; 4] {
    ["a", "b", "c", "e"].map(|s| format!("P_{s}_{h}"))
}

fn pop_values(p: &SteadyPopulations) -> [f64; 4] {
    [p.a, p.b, p.c, p.e]
}

fn run_sweep(cfg: &Resolved, format: Format, axis: Option<AxisSel>) -> Result<Output, CliError> {
    let rs = cfg.sweep_for(axis)?;
    let result = sweep(&cfg.params, rs.axis.axis(), &rs.internal)?;

    let mut columns = vec![rs.axis.column().to_string()];
    if rs.in_delta0.is_some() {
        columns.push("delta_over_delta0".into());
    }
    for h in Handedness::BOTH {
        columns.extend(pop_columns(h));
    }
    columns.extend(["ratio_a", "ratio_b", "residual_L", "residual_R"].map(String::from));
    let mut table = Table::new(columns);
    for (i, (l, r)) in result.left.iter().zip(&result.right).enumerate() {
        let mut row = vec![rs.user[i]];
        if let Some(m) = &rs.in_delta0 {
            row.push(m[i]);
        }
        row.extend(pop_values(l));
        row.extend(pop_values(r));
        row.extend([l.a / r.a, l.b / r.b, l.residual, r.residual]);
        table.push(row);
    }

    #[derive(Serialize)]
    struct Meta {
        axis: AxisSel,
    }
    Ok(Output::body(render(
        cfg,
        &table,
        Meta { axis: rs.axis },
        format,
    )?))
}

#[derive(Debug, Serialize)]
struct PeakOut {
    delta_mhz: f64,
    height: f64,
    index: usize,
    handedness: Handedness,
}

#[derive(Debug, Serialize)]
struct DetectReport<'a> {
    params: &'a ParamsEcho,
    observable: ObservableSel,
    f_left_true: f64,
    min_separation_mhz: f64,
    f_left_estimated: f64,
    f_right_estimated: f64,
    peaks: Vec<PeakOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<Calibration>,
}

fn detect(cfg: &Resolved, format: Format) -> Result<Output, CliError> {
    let mix = cfg
        .mixture
        .ok_or_else(|| CliError::Config("detect needs a [mixture] table with f_left".into()))?;
    let gauge: Gauge = cfg.gauge()?;
    let rs = cfg.sweep_for(Some(AxisSel::Delta))?;
    let result = sweep(&cfg.params, rs.axis.axis(), &rs.internal)?;
    let obs = mix.observable.observable();
    let left = result.curve(Handedness::Left, obs);
    let right = result.curve(Handedness::Right, obs);
    let signal = mixture_curve(&MixtureSpec::new(mix.f_left)?, &left, &right)?;
    let est = estimate_fractions(&signal, mix.min_separation, gauge)?;
    let calibration = if mix.calibrate {
        Some(calibrate(
            &left,
            &right,
            &calibration_fractions(),
            mix.min_separation,
            gauge,
        )?)
    } else {
        None
    };

    let report = DetectReport {
        params: &cfg.echo,
        observable: mix.observable,
        f_left_true: mix.f_left,
        min_separation_mhz: mix.min_separation_mhz,
        f_left_estimated: est.f_left,
        f_right_estimated: est.f_right,
        peaks: est
            .peaks
            .iter()
            .zip(est.assigned)
            .map(|(pk, h)| PeakOut {
                delta_mhz: rs.user[pk.index],
                height: pk.height,
                index: pk.index,
                handedness: h,
            })
            .collect(),
        calibration,
    };
    let json = to_json(&report)?;
    Ok(match format {
        Format::Json => Output::body(json),
        Format::Csv => {
            let o = match mix.observable {
                ObservableSel::A => "a",
                ObservableSel::B => "b",
            };
            let mut table = Table::new(vec![
                rs.axis.column().to_string(),
                "signal".into(),
                format!("P_{o}_L"),
                format!("P_{o}_R"),
            ]);
            for i in 0..signal.values.len() {
                table.push(vec![
                    rs.user[i],
                    signal.values[i],
                    left.values[i],
                    right.values[i],
                ]);
            }
            Output {
                body: table.to_csv()?,
                warnings: Vec::new(),
                companion: Some(json),
            }
        }
    })
}
