//! Hilbert-space layout, physical parameters and the handedness-dependent
//! Hamiltonians of the cyclic three-level system.
//!
//! The basis ordering is fixed: `b, a, c, e, x_1 .. x_n`, so the dimension is
//! always `n + 4`. Every other module indexes states through [`HilbertSpace`].
//!
//! Hamiltonians are written in the interaction picture where the microwave
//! drive is time independent (three-photon resonance `ω₃ = ω₁ + ω₂`). Only the
//! detunings enter; the bare level energies are never needed.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result, C64};

/// Tolerance used to decide whether `phi_L` sits on one of the two gauges.
const PHASE_TOL: f64 = 1e-12;

/// Molecular handedness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Handedness {
    Left,
    Right,
}

impl Handedness {
    pub const BOTH: [Handedness; 2] = [Handedness::Left, Handedness::Right];

    /// Overall phase of the `a-b` coupling; the right-handed molecule carries an extra `π`.
    pub fn loop_phase(self, phi_l: f64) -> f64 {
        match self {
            Handedness::Left => phi_l,
            Handedness::Right => phi_l + PI,
        }
    }

    /// Sign `ξ = e^{iφ_j}` of the `a-b` coupling. Only defined for `phi_L ∈ {0, π}`.
    pub fn xi(self, phi_l: f64) -> Result<f64> {
        let base = Gauge::from_phase(phi_l)?.sign();
        Ok(match self {
            Handedness::Left => base,
            Handedness::Right => -base,
        })
    }

    pub fn opposite(self) -> Self {
        match self {
            Handedness::Left => Handedness::Right,
            Handedness::Right => Handedness::Left,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Handedness::Left => "L",
            Handedness::Right => "R",
        }
    }
}

impl fmt::Display for Handedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// The two admissible microwave gauges for dark-state analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// `phi_L = 0`: the left-handed molecule has the dark state at `δ = δ₀`.
    Zero,
    /// `phi_L = π`: roles swapped.
    Pi,
}

impl Gauge {
    pub fn from_phase(phi_l: f64) -> Result<Self> {
        if !phi_l.is_finite() {
            return Err(Error::UnsupportedPhase(phi_l));
        }
        let r = phi_l.rem_euclid(TAU);
        if r < PHASE_TOL || TAU - r < PHASE_TOL {
            Ok(Gauge::Zero)
        } else if (r - PI).abs() < PHASE_TOL {
            Ok(Gauge::Pi)
        } else {
            Err(Error::UnsupportedPhase(phi_l))
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Gauge::Zero => 1.0,
            Gauge::Pi => -1.0,
        }
    }

    /// Handedness whose dark state sits at `δ = +δ₀`.
    pub fn dark_at_positive_delta0(self) -> Handedness {
        match self {
            Gauge::Zero => Handedness::Left,
            Gauge::Pi => Handedness::Right,
        }
    }
}

/// A labelled basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    B,
    A,
    C,
    E,
    /// Leakage level `x_k`, `k` starting at 1.
    X(usize),
}

impl Level {
    pub fn label(self) -> String {
        match self {
            Level::B => "b".into(),
            Level::A => "a".into(),
            Level::C => "c".into(),
            Level::E => "e".into(),
            Level::X(k) => format!("x{k}"),
        }
    }
}

/// Index layout `b → 0, a → 1, c → 2, e → 3, x_k → 3 + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertSpace {
    n: usize,
}

impl HilbertSpace {
    pub const B: usize = 0;
    pub const A: usize = 1;
    pub const C: usize = 2;
    pub const E: usize = 3;

    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Number of leakage levels.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n + 4
    }

    /// Panics if `level` is `X(k)` with `k` outside `1..=n`.
    pub fn index(&self, level: Level) -> usize {
        match level {
            Level::B => Self::B,
            Level::A => Self::A,
            Level::C => Self::C,
            Level::E => Self::E,
            Level::X(k) => {
                assert!(
                    k >= 1 && k <= self.n,
                    "leakage level x{k} outside 1..={}",
                    self.n
                );
                3 + k
            }
        }
    }

    pub fn level(&self, index: usize) -> Option<Level> {
        match index {
            0 => Some(Level::B),
            1 => Some(Level::A),
            2 => Some(Level::C),
            3 => Some(Level::E),
            i if i < self.dim() => Some(Level::X(i - 3)),
            _ => None,
        }
    }

    /// All levels in index order.
    pub fn levels(&self) -> impl Iterator<Item = Level> + '_ {
        (0..self.dim()).map(|i| self.level(i).expect("index in range"))
    }

    pub fn labels(&self) -> Vec<String> {
        self.levels().map(Level::label).collect()
    }
}

/// Physical control parameters. All frequencies and rates are angular, in rad/µs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// `a-b` microwave Rabi amplitude.
    pub omega_ab: f64,
    /// `c-a` microwave Rabi amplitude.
    pub omega_ca: f64,
    /// `c-b` microwave Rabi amplitude.
    pub omega_cb: f64,
    /// `c-e` laser Rabi amplitude.
    pub omega_ce: f64,
    /// Overall microwave phase of the left-handed molecule [rad].
    pub phi_l: f64,
    /// Two-photon detuning `δ = E_a − E_b − ω₁`.
    pub delta: f64,
    /// Detuning `Δ = E_c − E_b − ω₃`.
    pub delta_c: f64,
    /// Laser detuning `Δ_e = E_e − E_c − ω₄`.
    pub delta_e: f64,
    /// Total spontaneous decay rate of `e`.
    pub gamma: f64,
    /// Collisional relaxation rate.
    pub kappa: f64,
    /// Number of leakage levels.
    pub n: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega_ab: 0.0,
            omega_ca: 0.0,
            omega_cb: 0.0,
            omega_ce: 0.0,
            phi_l: 0.0,
            delta: 0.0,
            delta_c: 0.0,
            delta_e: 0.0,
            gamma: 0.0,
            kappa: 0.0,
            n: 0,
        }
    }
}

impl SystemParams {
    /// Reference pumping configuration: `Ω_ca = Ω_ab = 2π·10`, `Ω_cb = 2π·6`,
    /// `Ω_ce = 2π·20`, `γ = 2π·10` rad/µs, `φ_L = 0`, `Δ = Δ_e = 0`, `δ = δ₀`,
    /// `n = 1` and no collisions.
    pub fn reference() -> Self {
        let mut p = Self {
            omega_ab: TAU * 10.0,
            omega_ca: TAU * 10.0,
            omega_cb: TAU * 6.0,
            omega_ce: TAU * 20.0,
            gamma: TAU * 10.0,
            n: 1,
            ..Self::default()
        };
        p.delta = delta0(&p).expect("reference couplings are nonzero");
        p
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_delta_e(mut self, delta_e: f64) -> Self {
        self.delta_e = delta_e;
        self
    }

    pub fn with_phi_l(mut self, phi_l: f64) -> Self {
        self.phi_l = phi_l;
        self
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::new(self.n)
    }

    pub fn dim(&self) -> usize {
        self.n + 4
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("omega_ab", self.omega_ab),
            ("omega_ca", self.omega_ca),
            ("omega_cb", self.omega_cb),
            ("omega_ce", self.omega_ce),
            ("gamma", self.gamma),
            ("kappa", self.kappa),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams {
                    name,
                    reason: format!("must be finite and non-negative, got {v}"),
                });
            }
        }
        let finite = [
            ("phi_l", self.phi_l),
            ("delta", self.delta),
            ("delta_c", self.delta_c),
            ("delta_e", self.delta_e),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParams {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(())
    }

    fn z_squared(&self) -> f64 {
        self.omega_cb * self.omega_cb + self.omega_ca * self.omega_ca
    }
}

/// Pure state amplitudes in the fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(CVector);

impl StateVector {
    pub fn new(amplitudes: CVector) -> Self {
        Self(amplitudes)
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Self(v)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.0.dotc(&other.0)
    }

    /// `⟨self|M|other⟩`.
    pub fn matrix_element(&self, m: &CMatrix, other: &StateVector) -> C64 {
        self.0.dotc(&(m * &other.0))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> CMatrix {
        &self.0 * self.0.adjoint()
    }
}

/// A square complex matrix that is Hermitian up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Wraps `m`, rejecting non-square input or a Hermiticity residual above `1e-12`.
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let r = hermiticity_residual(&m);
        if !(r <= 1e-12) {
            return Err(Error::InvalidParams {
                name: "hamiltonian",
                reason: format!("not Hermitian (residual {r:e})"),
            });
        }
        Ok(Self(m))
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .0
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// `max_ij |M_ij − conj(M_ji)|`.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut r = 0.0_f64;
    for i in 0..d {
        for j in i..d {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// Three-level microwave Hamiltonian embedded in the full `d × d` space; the
/// `e` and `x_k` rows and columns are zero.
pub fn build_hamiltonian3(params: &SystemParams, h: Handedness) -> HermitianMatrix {
    let d = params.dim();
    let (b, a, c) = (HilbertSpace::B, HilbertSpace::A, HilbertSpace::C);
    let mut m = CMatrix::zeros(d, d);
    m[(c, c)] = C64::new(params.delta_c, 0.0);
    m[(a, a)] = C64::new(params.delta, 0.0);

    let half = |w: f64| C64::new(0.5 * w, 0.0);
    m[(c, a)] = half(params.omega_ca);
    m[(a, c)] = half(params.omega_ca);
    m[(c, b)] = half(params.omega_cb);
    m[(b, c)] = half(params.omega_cb);

    let ab = C64::from_polar(0.5 * params.omega_ab, h.loop_phase(params.phi_l));
    m[(a, b)] = ab;
    m[(b, a)] = ab.conj();
    HermitianMatrix(m)
}

/// [`build_hamiltonian3`] plus the laser term `Δ_e|e⟩⟨e| + Ω_ce(|c⟩⟨e| + |e⟩⟨c|)/2`.
pub fn build_hamiltonian_full(params: &SystemParams, h: Handedness) -> HermitianMatrix {
    let mut m = build_hamiltonian3(params, h).0;
    let (c, e) = (HilbertSpace::C, HilbertSpace::E);
    m[(e, e)] = C64::new(params.delta_e, 0.0);
    m[(c, e)] = C64::new(0.5 * params.omega_ce, 0.0);
    m[(e, c)] = C64::new(0.5 * params.omega_ce, 0.0);
    HermitianMatrix(m)
}

/// Dark and bright superpositions of `a` and `b`:
/// `|D⟩ = (Ω_cb|a⟩ − Ω_ca|b⟩)/Z`, `|B⟩ = (Ω_ca|a⟩ + Ω_cb|b⟩)/Z`.
pub fn dressed_states(params: &SystemParams) -> Result<(StateVector, StateVector)> {
    let z2 = params.z_squared();
    if !(z2 > 0.0) {
        return Err(Error::DegenerateCoupling);
    }
    let z = z2.sqrt();
    let d = params.dim();
    let mut dark = CVector::zeros(d);
    let mut bright = CVector::zeros(d);
    dark[HilbertSpace::A] = C64::new(params.omega_cb / z, 0.0);
    dark[HilbertSpace::B] = C64::new(-params.omega_ca / z, 0.0);
    bright[HilbertSpace::A] = C64::new(params.omega_ca / z, 0.0);
    bright[HilbertSpace::B] = C64::new(params.omega_cb / z, 0.0);
    Ok((StateVector(dark), StateVector(bright)))
}

/// Microwave-induced `D ↔ B` coupling
/// `[δ Ω_cb Ω_ca + ½ ξ Ω_ab (Ω_cb² − Ω_ca²)] / Z²`.
pub fn dressed_coupling(params: &SystemParams, h: Handedness) -> Result<f64> {
    let z2 = params.z_squared();
    if !(z2 > 0.0) {
        return Err(Error::DegenerateCoupling);
    }
    let xi = h.xi(params.phi_l)?;
    let (ab, ca, cb) = (params.omega_ab, params.omega_ca, params.omega_cb);
    Ok((params.delta * cb * ca + 0.5 * xi * ab * (cb * cb - ca * ca)) / z2)
}

/// Two-photon detuning `δ₀ = Ω_ab(Ω_ca² − Ω_cb²)/(2 Ω_cb Ω_ca)` at which the
/// left-handed `D ↔ B` coupling cancels (for `φ_L = 0`).
///
/// Returns 0 when `Ω_ca = Ω_cb`; the handednesses are then indistinguishable.
pub fn delta0(params: &SystemParams) -> Result<f64> {
    let (ab, ca, cb) = (params.omega_ab, params.omega_ca, params.omega_cb);
    if !(ca > 0.0 && cb > 0.0) {
        return Err(Error::DegenerateCoupling);
    }
    Ok(ab * (ca * ca - cb * cb) / (2.0 * cb * ca))
}

/// `‖H₃|D⟩ − ⟨D|H₃|D⟩|D⟩‖₂`: zero iff `|D⟩` is an eigenvector of the
/// three-level Hamiltonian.
pub fn dark_state_residual(params: &SystemParams, h: Handedness) -> Result<f64> {
    Gauge::from_phase(params.phi_l)?;
    let (dark, _) = dressed_states(params)?;
    let h3 = build_hamiltonian3(params, h);
    let hd = h3.as_matrix() * dark.amplitudes();
    let energy = dark.amplitudes().dotc(&hd);
    Ok((hd - dark.amplitudes() * energy).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fig2() -> SystemParams {
        SystemParams::reference()
    }

    #[test]
    fn index_map_is_bijective() {
        let space = HilbertSpace::new(3);
        assert_eq!(space.dim(), 7);
        let idx: Vec<usize> = space.levels().map(|l| space.index(l)).collect();
        assert_eq!(idx, (0..7).collect::<Vec<_>>());
        assert_eq!(space.labels(), ["b", "a", "c", "e", "x1", "x2", "x3"]);
        assert_eq!(space.level(7), None);
    }

    #[test]
    fn xi_follows_gauge() {
        assert_eq!(Handedness::Left.xi(0.0).unwrap(), 1.0);
        assert_eq!(Handedness::Right.xi(0.0).unwrap(), -1.0);
        assert_eq!(Handedness::Left.xi(PI).unwrap(), -1.0);
        assert_eq!(Handedness::Right.xi(-PI).unwrap(), 1.0);
        assert_eq!(Handedness::Left.xi(TAU).unwrap(), 1.0);
        assert!(matches!(
            Handedness::Left.xi(0.3),
            Err(Error::UnsupportedPhase(_))
        ));
    }

    #[test]
    fn zero_couplings_give_zero_matrix() {
        let p = SystemParams {
            n: 2,
            ..SystemParams::default()
        };
        let h = build_hamiltonian3(&p, Handedness::Left);
        assert!(h.as_matrix().iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert_eq!(h.dim(), 6);
    }

    #[test]
    fn ab_element_sign_by_handedness() {
        let p = fig2();
        let (a, b) = (HilbertSpace::A, HilbertSpace::B);
        let hl = build_hamiltonian3(&p, Handedness::Left);
        let hr = build_hamiltonian3(&p, Handedness::Right);
        assert_relative_eq!(hl.as_matrix()[(a, b)].re, p.omega_ab / 2.0, epsilon = 1e-12);
        assert_relative_eq!(
            hr.as_matrix()[(a, b)].re,
            -p.omega_ab / 2.0,
            epsilon = 1e-12
        );
        assert!(hr.as_matrix()[(a, b)].im.abs() < 1e-12);
    }

    #[test]
    fn resonant_hamiltonian_is_traceless() {
        let p = fig2().with_delta(0.0);
        let h = build_hamiltonian3(&p, Handedness::Left);
        assert!(h.hermiticity_residual() < 1e-12);
        let ev = h.eigenvalues();
        assert!(ev.iter().sum::<f64>().abs() < 1e-10);
    }

    #[test]
    fn laser_off_matches_three_level() {
        let mut p = fig2();
        p.omega_ce = 0.0;
        p.delta_e = 0.0;
        for h in Handedness::BOTH {
            assert_eq!(build_hamiltonian_full(&p, h), build_hamiltonian3(&p, h));
        }
    }

    #[test]
    fn laser_matrix_element() {
        let p = fig2();
        let h = build_hamiltonian_full(&p, Handedness::Right);
        assert_eq!(
            h.as_matrix()[(HilbertSpace::C, HilbertSpace::E)],
            C64::new(p.omega_ce / 2.0, 0.0)
        );
        assert_eq!(
            h.as_matrix()[(HilbertSpace::E, HilbertSpace::C)],
            C64::new(p.omega_ce / 2.0, 0.0)
        );
        // leakage rows stay empty
        let d = p.dim();
        for j in 0..d {
            assert_eq!(h.as_matrix()[(4, j)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn gauge_swap_is_exact() {
        let p = fig2();
        let shifted = p.with_phi_l(p.phi_l + PI);
        assert_eq!(
            build_hamiltonian3(&shifted, Handedness::Left),
            build_hamiltonian3(&p, Handedness::Right)
        );
    }

    #[test]
    fn symmetric_dressed_states() {
        let p = SystemParams {
            omega_ca: 3.0,
            omega_cb: 3.0,
            ..SystemParams::default()
        };
        let (d, b) = dressed_states(&p).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(d.amplitudes()[HilbertSpace::A].re, s, epsilon = 1e-15);
        assert_relative_eq!(d.amplitudes()[HilbertSpace::B].re, -s, epsilon = 1e-15);
        assert_relative_eq!(b.amplitudes()[HilbertSpace::A].re, s, epsilon = 1e-15);
        assert_relative_eq!(b.amplitudes()[HilbertSpace::B].re, s, epsilon = 1e-15);
    }

    #[test]
    fn reference_dressed_coefficients() {
        let (d, _) = dressed_states(&fig2()).unwrap();
        let root = 136f64.sqrt();
        assert_relative_eq!(
            d.amplitudes()[HilbertSpace::A].re,
            6.0 / root,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            d.amplitudes()[HilbertSpace::B].re,
            -10.0 / root,
            epsilon = 1e-14
        );
        assert_relative_eq!(d.amplitudes()[HilbertSpace::A].re, 0.5145, epsilon = 1e-4);
        assert_relative_eq!(d.amplitudes()[HilbertSpace::B].re, -0.8575, epsilon = 1e-4);
    }

    #[test]
    fn degenerate_coupling_errors() {
        let p = SystemParams {
            omega_ab: 1.0,
            ..SystemParams::default()
        };
        assert_eq!(dressed_states(&p).unwrap_err(), Error::DegenerateCoupling);
        assert_eq!(
            dressed_coupling(&p, Handedness::Left).unwrap_err(),
            Error::DegenerateCoupling
        );
        assert_eq!(delta0(&p).unwrap_err(), Error::DegenerateCoupling);
        let half = SystemParams { omega_ca: 1.0, ..p };
        assert_eq!(delta0(&half).unwrap_err(), Error::DegenerateCoupling);
        assert!(dressed_states(&half).is_ok());
    }

    #[test]
    fn delta0_values() {
        assert_relative_eq!(
            delta0(&fig2()).unwrap(),
            TAU * 16.0 / 3.0,
            max_relative = 1e-14
        );
        let sym = SystemParams {
            omega_ab: 2.0,
            omega_ca: 4.0,
            omega_cb: 4.0,
            ..SystemParams::default()
        };
        assert_eq!(delta0(&sym).unwrap(), 0.0);
        let off = SystemParams {
            omega_ab: 0.0,
            ..fig2()
        };
        assert_eq!(delta0(&off).unwrap(), 0.0);
    }

    #[test]
    fn dressed_coupling_values() {
        let p = fig2();
        assert!(dressed_coupling(&p, Handedness::Left).unwrap().abs() < 1e-12);
        let right = dressed_coupling(&p, Handedness::Right).unwrap();
        assert_relative_eq!(right, TAU * 640.0 / 136.0, max_relative = 1e-12);
        assert_relative_eq!(right, TAU * 4.70588, max_relative = 1e-6);

        let sym = SystemParams {
            omega_ab: 2.0,
            omega_ca: 4.0,
            omega_cb: 4.0,
            ..SystemParams::default()
        };
        for h in Handedness::BOTH {
            assert_eq!(dressed_coupling(&sym, h).unwrap(), 0.0);
        }
        assert!(matches!(
            dressed_coupling(&p.with_phi_l(1.0), Handedness::Left),
            Err(Error::UnsupportedPhase(_))
        ));
    }

    #[test]
    fn dressed_coupling_matches_matrix_element() {
        for delta in [-7.0, 0.0, 3.3, 33.5] {
            for phi in [0.0, PI] {
                let p = fig2().with_delta(delta).with_phi_l(phi);
                let (d, b) = dressed_states(&p).unwrap();
                for h in Handedness::BOTH {
                    let m = build_hamiltonian3(&p, h);
                    let elem = b.matrix_element(m.as_matrix(), &d);
                    assert!(elem.im.abs() < 1e-12);
                    assert!((elem.re - dressed_coupling(&p, h).unwrap()).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn bright_state_carries_the_c_coupling() {
        let p = fig2();
        let (d, b) = dressed_states(&p).unwrap();
        let c = StateVector::basis(p.dim(), HilbertSpace::C);
        let z = (p.omega_ca.powi(2) + p.omega_cb.powi(2)).sqrt();
        for h in Handedness::BOTH {
            let m = build_hamiltonian3(&p, h);
            assert!((c.matrix_element(m.as_matrix(), &b) - C64::new(z / 2.0, 0.0)).norm() < 1e-10);
            assert!(c.matrix_element(m.as_matrix(), &d).norm() < 1e-12);
        }
        assert!(d.inner(&b).norm() < 1e-15);
    }

    #[test]
    fn dark_state_residuals() {
        let p = fig2();
        assert!(dark_state_residual(&p, Handedness::Left).unwrap() < 1e-10);
        let r = dark_state_residual(&p, Handedness::Right).unwrap();
        assert_relative_eq!(r, TAU * 640.0 / 136.0, max_relative = 1e-10);

        let swapped = p.with_phi_l(PI);
        assert!(dark_state_residual(&swapped, Handedness::Right).unwrap() < 1e-10);
        assert!(dark_state_residual(&swapped, Handedness::Left).unwrap() > 1.0);
    }

    #[test]
    fn validate_rejects_negative_rates() {
        let mut p = fig2();
        p.gamma = -1.0;
        assert!(matches!(
            p.validate(),
            Err(Error::InvalidParams { name: "gamma", .. })
        ));
        let mut p = fig2();
        p.delta = f64::NAN;
        assert!(p.validate().is_err());
        assert!(fig2().validate().is_ok());
    }
}
