//! Time propagation of the master equation and steady-state extraction.
//!
//! [`propagate`] is a fixed-step classical Runge-Kutta integrator on the
//! matrix-free generator. The step never exceeds `0.05 / rate_scale`, where
//! `rate_scale` bounds the generator's spectral radius.
//!
//! Steady states come from one of two routes:
//! - [`SteadyStateMethod::NullSpace`]: the unique null vector of the assembled
//!   superoperator (singular value decomposition), only for `κ > 0`;
//! - [`SteadyStateMethod::LongTime`]: the same fixed-step integrator run until
//!   the state stops changing. For a time-independent linear generator one
//!   RK4 step is the polynomial `P(hS) = 1 + hS + (hS)²/2 + (hS)³/6 + (hS)⁴/24`
//!   of the assembled superoperator `S`, so long horizons are covered by
//!   powers of that matrix.

use serde::Serialize;

use crate::liouvillian::{
    unvectorize, vectorize, DensityMatrix, Liouvillian, DEFAULT_ASSEMBLY_CAP,
};
use crate::model::{dressed_states, HilbertSpace, Level, SystemParams};
use crate::{max_abs, CMatrix, Error, Result, C64};

/// Stability factor: `dt ≤ STABILITY_FACTOR / rate_scale`.
pub const STABILITY_FACTOR: f64 = 0.05;
/// Smallest admissible integration step [µs].
pub const MIN_STEP: f64 = 1e-9;

/// Uniformly sampled propagation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    /// Final time [µs].
    pub t_end: f64,
    /// Upper bound on the integration step [µs].
    pub dt_max: f64,
    /// Number of output intervals; the trajectory holds `samples + 1` states.
    pub samples: usize,
}

impl PropagateOptions {
    pub fn new(t_end: f64, dt_max: f64, samples: usize) -> Self {
        Self {
            t_end,
            dt_max,
            samples,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.samples.max(1);
        (0..=n).map(|i| self.t_end * i as f64 / n as f64).collect()
    }
}

/// States sampled at increasing times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states
            .last()
            .expect("trajectory always holds the initial state")
    }

    /// Population of basis index `index` at every sample.
    pub fn series(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.population(index)).collect()
    }

    /// Populations `(p_D, p_B)` of the dressed states at every sample.
    pub fn dressed_series(&self, params: &SystemParams) -> Result<(Vec<f64>, Vec<f64>)> {
        let (dark, bright) = dressed_states(params)?;
        let expect = |v: &crate::model::StateVector, s: &DensityMatrix| {
            v.matrix_element(s.as_matrix(), v).re
        };
        Ok(self
            .states
            .iter()
            .map(|s| (expect(&dark, s), expect(&bright, s)))
            .unzip())
    }

    pub fn populations(&self, params: &SystemParams) -> Vec<Populations> {
        self.states.iter().map(|s| populations(s, params)).collect()
    }
}

/// Step size obeying both the caller's bound and the stability bound.
pub fn stable_step(l: &Liouvillian, dt_max: f64) -> Result<f64> {
    if !(dt_max > 0.0) {
        return Err(Error::InvalidParams {
            name: "dt_max",
            reason: format!("must be positive, got {dt_max}"),
        });
    }
    let scale = l.rate_scale();
    let h = if scale > 0.0 {
        dt_max.min(STABILITY_FACTOR / scale)
    } else {
        dt_max
    };
    if h < MIN_STEP {
        return Err(Error::StepSizeUnderflow { required: h });
    }
    Ok(h)
}

fn rk4_step(l: &Liouvillian, rho: &CMatrix, h: f64) -> CMatrix {
    let half = C64::new(0.5 * h, 0.0);
    let k1 = l.rhs(rho);
    let k2 = l.rhs(&(rho + &k1 * half));
    let k3 = l.rhs(&(rho + &k2 * half));
    let k4 = l.rhs(&(rho + &k3 * C64::new(h, 0.0)));
    rho + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0)
}

/// Integrates from `t = 0` and samples uniformly up to `t_end`.
pub fn propagate(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    opts: &PropagateOptions,
) -> Result<Trajectory> {
    if !(opts.t_end > 0.0) || !opts.t_end.is_finite() {
        return Err(Error::InvalidParams {
            name: "t_end",
            reason: format!("must be positive, got {}", opts.t_end),
        });
    }
    propagate_at(l, rho0, &opts.times(), opts.dt_max)
}

/// Integrates from `t = 0` and records the state at each of `times`
/// (non-decreasing, starting at or after 0). The state is Hermitized after
/// each recorded sample.
pub fn propagate_at(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    times: &[f64],
    dt_max: f64,
) -> Result<Trajectory> {
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: rho0.dim(),
        });
    }
    rho0.check()?;
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams {
            name: "times",
            reason: "must be finite, non-negative and non-decreasing".into(),
        });
    }
    let h_max = stable_step(l, dt_max)?;

    let mut rho = rho0.as_matrix().clone();
    let mut t = 0.0;
    let mut states = Vec::with_capacity(times.len());
    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                rho = rk4_step(l, &rho, h);
            }
            t = target;
        }
        let mut sample = DensityMatrix::new_unchecked(rho);
        sample.hermitize();
        rho = sample.as_matrix().clone();
        states.push(sample);
    }
    if let Some(last) = states.last() {
        last.check()?;
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SteadyStateMethod {
    NullSpace,
    LongTime,
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    pub method: SteadyStateMethod,
    /// `‖apply_rhs(ρ)‖∞`.
    pub residual: f64,
    /// Propagation time used by the long-time route [µs].
    pub elapsed: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// A singular value counts as zero below `null_threshold · σ_max`.
    pub null_threshold: f64,
    /// Long-time stop: max entry change over one window.
    pub convergence_tol: f64,
    /// Long-time cap on the propagated time [µs].
    pub max_time: f64,
    /// Integration step bound for the long-time route [µs].
    pub dt_max: f64,
    pub assembly_cap: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            null_threshold: 1e-10,
            convergence_tol: 1e-10,
            max_time: 2e4,
            dt_max: 1e-3,
            assembly_cap: DEFAULT_ASSEMBLY_CAP,
        }
    }
}

/// Steady state with the default route: null space when `κ > 0`, otherwise
/// long-time propagation from `rho0`, which is then mandatory.
pub fn steady_state(l: &Liouvillian, rho0: Option<&DensityMatrix>) -> Result<SteadyState> {
    steady_state_with(l, rho0, None, &SteadyStateOptions::default())
}

pub fn steady_state_with(
    l: &Liouvillian,
    rho0: Option<&DensityMatrix>,
    method: Option<SteadyStateMethod>,
    opts: &SteadyStateOptions,
) -> Result<SteadyState> {
    let method = method.unwrap_or(if l.kappa() > 0.0 {
        SteadyStateMethod::NullSpace
    } else {
        SteadyStateMethod::LongTime
    });
    match method {
        SteadyStateMethod::NullSpace => {
            if l.kappa() == 0.0 {
                return Err(Error::InitialStateRequired);
            }
            null_space_steady_state(l, opts)
        }
        SteadyStateMethod::LongTime => {
            let rho0 = match rho0 {
                Some(r) => r.clone(),
                None if l.kappa() > 0.0 => DensityMatrix::maximally_mixed(l.dim()),
                None => return Err(Error::InitialStateRequired),
            };
            long_time_steady_state(l, &rho0, opts)
        }
    }
}

fn residual_of(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    max_abs(&l.rhs(rho.as_matrix()))
}

fn null_space_steady_state(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyState> {
    let d = l.dim();
    let sup = l.assemble_matrix_with_cap(opts.assembly_cap)?;
    let svd = sup.svd(false, true);
    let sigma = &svd.singular_values;
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");

    let s_max = sigma.max();
    let threshold = opts.null_threshold * s_max;
    let null_dim = sigma.iter().filter(|s| **s < threshold).count();
    if null_dim > 1 {
        return Err(Error::NonUniqueSteadyState { null_dim });
    }
    let (i_min, _) = sigma
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");

    let v = v_t.row(i_min).adjoint();
    let mut m = unvectorize(&v, d);
    let tr = m.trace();
    if tr.norm() < 1e-300 {
        return Err(Error::InvalidState("null vector is traceless".into()));
    }
    m /= tr;
    let mut rho = DensityMatrix::new_unchecked(m);
    rho.hermitize();
    rho.check()?;
    let residual = residual_of(l, &rho);
    Ok(SteadyState {
        rho,
        method: SteadyStateMethod::NullSpace,
        residual,
        elapsed: None,
    })
}

/// `M^k` by repeated squaring.
fn matrix_power(m: &CMatrix, mut k: usize) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// One RK4 step of size `h` for the linear system `v' = S v`.
pub fn rk4_step_matrix(sup: &CMatrix, h: f64) -> CMatrix {
    let n = sup.nrows();
    let hs = sup * C64::new(h, 0.0);
    // Horner: 1 + z(1 + z/2(1 + z/3(1 + z/4)))
    let eye = CMatrix::identity(n, n);
    let mut acc = &eye + &hs * C64::new(0.25, 0.0);
    acc = &eye + (&hs * acc) * C64::new(1.0 / 3.0, 0.0);
    acc = &eye + (&hs * acc) * C64::new(0.5, 0.0);
    &eye + &hs * acc
}

fn long_time_steady_state(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    opts: &SteadyStateOptions,
) -> Result<SteadyState> {
    let d = l.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho0.dim(),
        });
    }
    rho0.check()?;
    let scale = l.rate_scale();
    if scale == 0.0 {
        return Ok(SteadyState {
            rho: rho0.clone(),
            method: SteadyStateMethod::LongTime,
            residual: 0.0,
            elapsed: Some(0.0),
        });
    }
    let gamma = l.total_decay_rate();
    let window = if gamma > 0.0 {
        10.0 / gamma
    } else {
        10.0 / scale
    };
    let min_time = if l.kappa() > 0.0 {
        let from_gamma = if gamma > 0.0 { 20.0 / gamma } else { 0.0 };
        from_gamma.max(10.0 / l.kappa())
    } else {
        0.0
    };
    let rhs_tol = 1e-8 * gamma.max(l.jumps().iter().map(|j| j.rate).fold(l.kappa(), f64::max));

    let h_max = stable_step(l, opts.dt_max)?;
    let steps = (window / h_max).ceil().max(1.0) as usize;
    let sup = l.assemble_matrix_with_cap(opts.assembly_cap)?;
    let propagator = matrix_power(&rk4_step_matrix(&sup, window / steps as f64), steps);

    let mut v = vectorize(rho0.as_matrix());
    let mut t = 0.0;
    loop {
        let next = &propagator * &v;
        t += window;
        let mut rho = DensityMatrix::new_unchecked(unvectorize(&next, d));
        rho.hermitize();
        let next = vectorize(rho.as_matrix());
        let change = max_abs(&(&next - &v));
        v = next;
        if t >= min_time {
            let residual = residual_of(l, &rho);
            if change < opts.convergence_tol || residual < rhs_tol {
                rho.check()?;
                return Ok(SteadyState {
                    rho,
                    method: SteadyStateMethod::LongTime,
                    residual,
                    elapsed: Some(t),
                });
            }
        }
        if t > opts.max_time {
            return Err(Error::NoConvergence {
                t_max: opts.max_time,
            });
        }
    }
}

/// Bare and dressed populations of one state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Populations {
    pub labels: Vec<String>,
    pub bare: Vec<f64>,
    /// `⟨D|ρ|D⟩`; absent when the dressed basis is undefined.
    pub dark: Option<f64>,
    /// `⟨B|ρ|B⟩`.
    pub bright: Option<f64>,
}

impl Populations {
    pub fn get(&self, level: Level) -> f64 {
        self.bare[HilbertSpace::new(self.bare.len() - 4).index(level)]
    }

    pub fn total(&self) -> f64 {
        self.bare.iter().sum()
    }
}

pub fn populations(rho: &DensityMatrix, params: &SystemParams) -> Populations {
    let space = HilbertSpace::new(rho.dim().saturating_sub(4));
    let bare = (0..rho.dim()).map(|i| rho.population(i)).collect();
    let (dark, bright) = match dressed_states(params) {
        Ok((d, b)) if d.dim() == rho.dim() => (
            Some(d.matrix_element(rho.as_matrix(), &d).re),
            Some(b.matrix_element(rho.as_matrix(), &b).re),
        ),
        _ => (None, None),
    };
    Populations {
        labels: space.labels(),
        bare,
        dark,
        bright,
    }
}
