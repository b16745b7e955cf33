//! Parameter sweeps of the steady state, purity, and the two-peak
//! enantiodetection estimator.
//!
//! Grid points are independent and evaluated on the current rayon pool;
//! results always come back in axis order.

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{populations, steady_state};
use crate::liouvillian::Liouvillian;
use crate::model::{delta0, Gauge, Handedness, HilbertSpace, SystemParams};
use crate::{Error, Result};

/// Minimum number of grid points accepted by [`estimate_fractions`].
pub const MIN_CURVE_POINTS: usize = 21;
/// Relative margin below which a third maximum makes the peak pair ambiguous.
pub const AMBIGUITY_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Kappa,
    N,
    Delta,
    DeltaE,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Kappa => "kappa",
            SweepAxis::N => "n",
            SweepAxis::Delta => "delta",
            SweepAxis::DeltaE => "delta_e",
        }
    }

    /// `base` with the swept parameter set to `value` (rad/µs, or a count for `N`).
    pub fn apply(self, base: &SystemParams, value: f64) -> SystemParams {
        let mut p = *base;
        match self {
            SweepAxis::Kappa => p.kappa = value,
            SweepAxis::N => p.n = value as usize,
            SweepAxis::Delta => p.delta = value,
            SweepAxis::DeltaE => p.delta_e = value,
        }
        p
    }

    fn check(self, base: &SystemParams, values: &[f64]) -> Result<()> {
        if values.is_empty() {
            return Err(Error::InvalidSweep("empty axis".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("non-finite axis value".into()));
        }
        match self {
            SweepAxis::Kappa => {
                if let Some(v) = values.iter().find(|v| **v <= 0.0) {
                    return Err(Error::InvalidSweep(format!(
                        "kappa must be positive, got {v}"
                    )));
                }
            }
            SweepAxis::N => {
                if let Some(v) = values.iter().find(|v| **v < 1.0 || v.fract() != 0.0) {
                    return Err(Error::InvalidSweep(format!(
                        "n must be an integer >= 1, got {v}"
                    )));
                }
                if !(base.kappa > 0.0) {
                    return Err(Error::InvalidSweep("n sweep needs kappa > 0".into()));
                }
            }
            SweepAxis::Delta | SweepAxis::DeltaE => {
                if !(base.kappa > 0.0) {
                    return Err(Error::InvalidSweep(format!(
                        "{} sweep needs kappa > 0",
                        self.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Steady-state populations of the ground and excited levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyPopulations {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub residual: f64,
}

impl SteadyPopulations {
    pub fn get(&self, obs: Observable) -> f64 {
        match obs {
            Observable::A => self.a,
            Observable::B => self.b,
        }
    }
}

/// Steady populations of both enantiomers at one parameter point.
pub fn steady_pair(params: &SystemParams) -> Result<(SteadyPopulations, SteadyPopulations)> {
    let one = |h: Handedness| -> Result<SteadyPopulations> {
        let l = Liouvillian::new(params, h)?;
        let ss = steady_state(&l, None)?;
        let pops = populations(&ss.rho, params);
        Ok(SteadyPopulations {
            a: pops.bare[HilbertSpace::A],
            b: pops.bare[HilbertSpace::B],
            c: pops.bare[HilbertSpace::C],
            e: pops.bare[HilbertSpace::E],
            residual: ss.residual,
        })
    };
    Ok((one(Handedness::Left)?, one(Handedness::Right)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// Axis values in internal units (rad/µs, or a count for `n`).
    pub axis_values: Vec<f64>,
    pub left: Vec<SteadyPopulations>,
    pub right: Vec<SteadyPopulations>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.axis_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis_values.is_empty()
    }

    pub fn populations(&self, h: Handedness) -> &[SteadyPopulations] {
        match h {
            Handedness::Left => &self.left,
            Handedness::Right => &self.right,
        }
    }

    /// `P^(L)/P^(R)` of the chosen observable at each point.
    pub fn ratio(&self, obs: Observable) -> Vec<f64> {
        self.left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| l.get(obs) / r.get(obs))
            .collect()
    }

    pub fn curve(&self, h: Handedness, obs: Observable) -> Curve {
        Curve {
            deltas: self.axis_values.clone(),
            values: self.populations(h).iter().map(|p| p.get(obs)).collect(),
        }
    }
}

/// Steady states of both enantiomers along one parameter axis.
pub fn sweep(base: &SystemParams, axis: SweepAxis, values: &[f64]) -> Result<SweepResult> {
    base.validate()?;
    axis.check(base, values)?;
    let pairs: Vec<(SteadyPopulations, SteadyPopulations)> = values
        .par_iter()
        .map(|v| steady_pair(&axis.apply(base, *v)))
        .collect::<Result<_>>()?;
    let (left, right) = pairs.into_iter().unzip();
    Ok(SweepResult {
        axis,
        axis_values: values.to_vec(),
        left,
        right,
    })
}

pub fn sweep_kappa(base: &SystemParams, kappas: &[f64]) -> Result<SweepResult> {
    sweep(base, SweepAxis::Kappa, kappas)
}

pub fn sweep_n(base: &SystemParams, ns: &[usize]) -> Result<SweepResult> {
    let values: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    sweep(base, SweepAxis::N, &values)
}

pub fn sweep_delta(base: &SystemParams, deltas: &[f64]) -> Result<SweepResult> {
    sweep(base, SweepAxis::Delta, deltas)
}

pub fn sweep_delta_e(base: &SystemParams, delta_es: &[f64]) -> Result<SweepResult> {
    sweep(base, SweepAxis::DeltaE, delta_es)
}

/// `points` uniform values over `[lo, hi]`, inclusive.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Default detection grid: 201 points over `[−3δ₀, 3δ₀]`.
pub fn default_delta_grid(base: &SystemParams) -> Result<Vec<f64>> {
    let d0 = delta0(base)?.abs();
    Ok(linspace(-3.0 * d0, 3.0 * d0, 201))
}

/// True when every element is strictly smaller than its predecessor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// Steady-state population used as the detection signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    A,
    B,
}

/// Signal sampled on a strictly increasing `δ` grid [rad/µs].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
}

/// Enantiomer fractions of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureSpec {
    pub f_left: f64,
    pub f_right: f64,
}

impl MixtureSpec {
    pub fn new(f_left: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&f_left) {
            return Err(Error::InvalidMixture(format!(
                "f_left must lie in [0, 1], got {f_left}"
            )));
        }
        Ok(Self {
            f_left,
            f_right: 1.0 - f_left,
        })
    }

    pub fn from_fractions(f_left: f64, f_right: f64) -> Result<Self> {
        if !(f_left >= 0.0 && f_right >= 0.0) || (f_left + f_right - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMixture(format!(
                "fractions {f_left} + {f_right} must be non-negative and sum to 1"
            )));
        }
        Ok(Self { f_left, f_right })
    }
}

/// `f_L P^(L)(δ) + f_R P^(R)(δ)`.
pub fn mixture_curve(spec: &MixtureSpec, left: &Curve, right: &Curve) -> Result<Curve> {
    if left.deltas != right.deltas
        || left.values.len() != right.values.len()
        || left.values.len() != left.deltas.len()
    {
        return Err(Error::GridMismatch);
    }
    let values = left
        .values
        .iter()
        .zip(&right.values)
        .map(|(l, r)| spec.f_left * l + spec.f_right * r)
        .collect();
    Ok(Curve {
        deltas: left.deltas.clone(),
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub delta: f64,
    pub height: f64,
    pub index: usize,
}

/// Interior local maxima: strictly above both neighbours. A flat top counts
/// once, at its leftmost point, when both sides fall away.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut out = Vec::new();
    let n = values.len();
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                out.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    /// The two peaks in increasing `δ` order.
    pub peaks: [Peak; 2],
    /// Handedness assigned to each peak.
    pub assigned: [Handedness; 2],
    pub f_left: f64,
    pub f_right: f64,
    pub curve: Curve,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
}

impl DetectionReport {
    pub fn peak_positions(&self) -> [f64; 2] {
        [self.peaks[0].delta, self.peaks[1].delta]
    }

    pub fn peak_heights(&self) -> [f64; 2] {
        [self.peaks[0].height, self.peaks[1].height]
    }
}

/// Locates the two dominant peaks at least `min_separation` apart and returns
/// `f̂ = h₊/(h₊ + h₋)` for the handedness whose dark state sits at `+δ₀`
/// in the given gauge (the left-handed one for `φ_L = 0`).
pub fn estimate_fractions(
    curve: &Curve,
    min_separation: f64,
    gauge: Gauge,
) -> Result<DetectionReport> {
    let n = curve.values.len();
    if curve.deltas.len() != n {
        return Err(Error::GridMismatch);
    }
    if n < MIN_CURVE_POINTS {
        return Err(Error::InvalidSweep(format!(
            "curve needs at least {MIN_CURVE_POINTS} points, got {n}"
        )));
    }
    if curve.deltas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSweep(
            "delta grid must be strictly increasing".into(),
        ));
    }
    if curve.values.iter().any(|v| !v.is_finite()) || curve.deltas.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidSweep("curve has non-finite entries".into()));
    }
    if !(min_separation >= 0.0) {
        return Err(Error::InvalidSweep(format!(
            "min_separation must be non-negative, got {min_separation}"
        )));
    }

    let mut maxima: Vec<Peak> = local_maxima(&curve.values)
        .into_iter()
        .map(|i| Peak {
            delta: curve.deltas[i],
            height: curve.values[i],
            index: i,
        })
        .collect();
    // highest first; ties resolved towards smaller delta
    maxima.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.index.cmp(&b.index)));

    let Some(first) = maxima.first().copied() else {
        return Err(Error::PeaksNotFound { found: 0 });
    };
    let Some(second) = maxima[1..]
        .iter()
        .copied()
        .find(|p| (p.delta - first.delta).abs() >= min_separation)
    else {
        return Err(Error::PeaksNotFound { found: 1 });
    };
    let third = maxima.iter().find(|p| {
        p.index != first.index
            && p.index != second.index
            && (p.delta - first.delta).abs() >= min_separation
            && (p.delta - second.delta).abs() >= min_separation
    });
    if let Some(third) = third {
        if third.height >= (1.0 - AMBIGUITY_MARGIN) * second.height {
            return Err(Error::AmbiguousPeaks {
                second: second.height,
                third: third.height,
            });
        }
    }

    let (lower, upper) = if first.delta < second.delta {
        (first, second)
    } else {
        (second, first)
    };
    let upper_hand = gauge.dark_at_positive_delta0();
    let total = upper.height + lower.height;
    if !(total > 0.0) {
        return Err(Error::PeaksNotFound { found: 2 });
    }
    let f_upper = upper.height / total;
    let (f_left, f_right) = match upper_hand {
        Handedness::Left => (f_upper, 1.0 - f_upper),
        Handedness::Right => (1.0 - f_upper, f_upper),
    };
    Ok(DetectionReport {
        peaks: [lower, upper],
        assigned: [upper_hand.opposite(), upper_hand],
        f_left,
        f_right,
        curve: curve.clone(),
        calibration: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationRow {
    pub f_true: f64,
    pub f_estimated: f64,
    pub bias: f64,
}

/// Estimator response on synthetic mixtures of exact single-enantiomer curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub rows: Vec<CalibrationRow>,
    pub max_abs_bias: f64,
    /// `f̂_L` non-decreasing in `f_L` over the rows.
    pub monotone: bool,
}

pub fn calibrate(
    left: &Curve,
    right: &Curve,
    fractions: &[f64],
    min_separation: f64,
    gauge: Gauge,
) -> Result<Calibration> {
    let rows = fractions
        .iter()
        .map(|&f| {
            let mix = mixture_curve(&MixtureSpec::new(f)?, left, right)?;
            let est = estimate_fractions(&mix, min_separation, gauge)?.f_left;
            Ok(CalibrationRow {
                f_true: f,
                f_estimated: est,
                bias: est - f,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_bias = rows.iter().map(|r| r.bias.abs()).fold(0.0, f64::max);
    let monotone = rows
        .windows(2)
        .all(|w| w[1].f_estimated >= w[0].f_estimated);
    Ok(Calibration {
        rows,
        max_abs_bias,
        monotone,
    })
}

/// The synthetic calibration fractions `0.1, 0.2, …, 0.9`.
pub fn calibration_fractions() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

/// `ε = P^(L) / (P^(L) + P^(R))`.
pub fn purity(left: f64, right: f64) -> Result<f64> {
    if !(left >= 0.0 && right >= 0.0) {
        return Err(Error::InvalidParams {
            name: "population",
            reason: format!("must be non-negative, got ({left}, {right})"),
        });
    }
    if left + right == 0.0 {
        return Err(Error::Undefined);
    }
    Ok(left / (left + right))
}
