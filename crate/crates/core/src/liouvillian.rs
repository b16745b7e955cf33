//! Master-equation generator
//! `ρ̇ = −i[H′, ρ] + Σ_k L_{o_k}[ρ] + κ(Tr(ρ) I/d − ρ)`.
//!
//! Spontaneous decay of `e` is split equally over the `n + 3` ground levels.
//! Decay inside the ground manifold is neglected. The collision term relaxes
//! every state uniformly towards the maximally mixed state; it is written with
//! `Tr(ρ)` so the generator is linear and annihilates the trace of any input.
//!
//! Vectorization is column stacking: `vec(ρ)[i + d·j] = ρ_ij`.

use nalgebra::SymmetricEigen;

use crate::model::{
    build_hamiltonian_full, hermiticity_residual, Handedness, HermitianMatrix, HilbertSpace,
    StateVector, SystemParams,
};
use crate::{CMatrix, Error, Result, C64};

/// Default cap on the side length `d²` of the assembled superoperator.
pub const DEFAULT_ASSEMBLY_CAP: usize = 10_000;

/// Trace-one Hermitian positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-9;
    pub const MIN_EIGENVALUE: f64 = -1e-8;

    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(m: CMatrix) -> Result<Self> {
        let rho = Self(m);
        rho.check()?;
        Ok(rho)
    }

    /// Wraps without validation; used for intermediate integrator states.
    pub fn new_unchecked(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0))
    }

    /// Diagonal state with the given weights, normalized to unit trace.
    pub fn from_diagonal(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidState(
                "diagonal weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidState("diagonal weights sum to zero".into()));
        }
        let d = weights.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, w) in weights.iter().enumerate() {
            m[(i, i)] = C64::new(w / total, 0.0);
        }
        Ok(Self(m))
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        Ok(Self(psi.projector()))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self::pure(&StateVector::basis(dim, index)).expect("basis vectors are normalized")
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

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn population(&self, index: usize) -> f64 {
        self.0[(index, index)].re
    }

    pub fn hermiticity_residual(&self) -> f64 {
        hermiticity_residual(&self.0)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `ρ ← (ρ + ρ†)/2`.
    pub fn hermitize(&mut self) {
        self.0 = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
    }

    pub fn check(&self) -> Result<()> {
        if !self.0.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        if self
            .0
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let h = self.hermiticity_residual();
        if h > Self::HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("Hermiticity residual {h:e}")));
        }
        let t = self.trace();
        if (t - C64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {t} differs from 1")));
        }
        let lam = self.min_eigenvalue();
        if lam < Self::MIN_EIGENVALUE {
            return Err(Error::InvalidState(format!("negative eigenvalue {lam:e}")));
        }
        Ok(())
    }
}

/// Quantum jump `|to⟩⟨from|` with the given rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpOperator {
    pub from_index: usize,
    pub to_index: usize,
    pub rate: f64,
}

impl JumpOperator {
    /// Dense `|to⟩⟨from|` in dimension `dim`.
    pub fn matrix(&self, dim: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        m[(self.to_index, self.from_index)] = C64::new(1.0, 0.0);
        m
    }
}

/// Spontaneous decay channels `|s⟩⟨e|` for `s ∈ {c, a, b, x_1..x_n}`, each at `γ/(n+3)`.
pub fn build_jump_set(params: &SystemParams) -> Vec<JumpOperator> {
    let space = params.space();
    let rate = params.gamma / (params.n + 3) as f64;
    let targets = [HilbertSpace::C, HilbertSpace::A, HilbertSpace::B]
        .into_iter()
        .chain((1..=space.n()).map(|k| 3 + k));
    targets
        .map(|to_index| JumpOperator {
            from_index: HilbertSpace::E,
            to_index,
            rate,
        })
        .collect()
}

/// `Σ_k r_k (2 o_k ρ o_k† − o_k†o_k ρ − ρ o_k†o_k)/2` for `o_k = |t⟩⟨f|`.
///
/// Each jump moves `r ρ_ff` onto `(t, t)` and damps row and column `f` by `r/2`.
pub fn dissipator_action(rho: &CMatrix, jumps: &[JumpOperator]) -> CMatrix {
    let mut out = CMatrix::zeros(rho.nrows(), rho.ncols());
    add_dissipator(rho, jumps, &mut out);
    out
}

fn add_dissipator(rho: &CMatrix, jumps: &[JumpOperator], out: &mut CMatrix) {
    let d = rho.nrows();
    for jump in jumps {
        if jump.rate == 0.0 {
            continue;
        }
        let (f, t) = (jump.from_index, jump.to_index);
        let half = 0.5 * jump.rate;
        out[(t, t)] += rho[(f, f)] * jump.rate;
        for k in 0..d {
            out[(f, k)] -= rho[(f, k)] * half;
            out[(k, f)] -= rho[(k, f)] * half;
        }
    }
}

/// `κ(Tr(ρ) I/d − ρ)`; equals `κ(I/d − ρ)` on trace-one states.
pub fn collision_action(rho: &CMatrix, kappa: f64) -> CMatrix {
    let d = rho.nrows();
    let mut out = rho * C64::new(-kappa, 0.0);
    let fill = rho.trace() * (kappa / d as f64);
    for i in 0..d {
        out[(i, i)] += fill;
    }
    out
}

/// The full generator for one enantiomer.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    hamiltonian: HermitianMatrix,
    jumps: Vec<JumpOperator>,
    kappa: f64,
    dim: usize,
}

impl Liouvillian {
    /// Generator for handedness `h` with the extended Hamiltonian and equal-branching decay.
    pub fn new(params: &SystemParams, h: Handedness) -> Result<Self> {
        params.validate()?;
        Self::from_parts(
            build_hamiltonian_full(params, h),
            build_jump_set(params),
            params.kappa,
        )
    }

    pub fn from_parts(
        hamiltonian: HermitianMatrix,
        jumps: Vec<JumpOperator>,
        kappa: f64,
    ) -> Result<Self> {
        let dim = hamiltonian.dim();
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::InvalidParams {
                name: "kappa",
                reason: format!("must be non-negative, got {kappa}"),
            });
        }
        for j in &jumps {
            if j.from_index >= dim || j.to_index >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: j.from_index.max(j.to_index) + 1,
                });
            }
            if !j.rate.is_finite() || j.rate < 0.0 {
                return Err(Error::InvalidParams {
                    name: "rate",
                    reason: format!("must be non-negative, got {}", j.rate),
                });
            }
        }
        Ok(Self {
            hamiltonian,
            jumps,
            kappa,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpOperator] {
        &self.jumps
    }

    pub fn total_decay_rate(&self) -> f64 {
        self.jumps.iter().map(|j| j.rate).sum()
    }

    /// Upper bound on the generator's spectral radius:
    /// `2‖H′‖_∞ + Σ rates + κ`.
    pub fn rate_scale(&self) -> f64 {
        let h = self.hamiltonian.as_matrix();
        let row_max = h
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        2.0 * row_max + self.total_decay_rate() + self.kappa
    }

    /// `dρ/dt` for a raw matrix; callers guarantee the dimension.
    pub(crate) fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let h = self.hamiltonian.as_matrix();
        // −i(Hρ − ρH)
        let mut out = (h * rho - rho * h) * C64::new(0.0, -1.0);
        add_dissipator(rho, &self.jumps, &mut out);
        if self.kappa != 0.0 {
            out += collision_action(rho, self.kappa);
        }
        out
    }

    /// Matrix-free action of the generator.
    pub fn apply_rhs(&self, rho: &DensityMatrix) -> Result<CMatrix> {
        self.apply_raw(rho.as_matrix())
    }

    /// As [`apply_rhs`](Self::apply_rhs) for any square matrix, e.g. non-physical test inputs.
    pub fn apply_raw(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.nrows(),
            });
        }
        Ok(self.rhs(rho))
    }

    /// Explicit `d² × d²` superoperator in the column-stacking convention,
    /// built from Kronecker identities `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
    pub fn assemble_matrix(&self) -> Result<CMatrix> {
        self.assemble_matrix_with_cap(DEFAULT_ASSEMBLY_CAP)
    }

    pub fn assemble_matrix_with_cap(&self, cap: usize) -> Result<CMatrix> {
        let d = self.dim;
        let side = d * d;
        if side > cap {
            return Err(Error::CapExceeded { side, cap });
        }
        let h = self.hamiltonian.as_matrix();
        let eye = CMatrix::identity(d, d);
        let minus_i = C64::new(0.0, -1.0);

        // −i(I ⊗ H − Hᵀ ⊗ I)
        let mut sup = (eye.kronecker(h) - h.transpose().kronecker(&eye)) * minus_i;

        for jump in &self.jumps {
            if jump.rate == 0.0 {
                continue;
            }
            let o = jump.matrix(d);
            let odo = o.adjoint() * &o;
            let r = C64::new(jump.rate, 0.0);
            let half = C64::new(0.5 * jump.rate, 0.0);
            sup += o.conjugate().kronecker(&o) * r;
            sup -= eye.kronecker(&odo) * half;
            sup -= odo.transpose().kronecker(&eye) * half;
        }

        if self.kappa != 0.0 {
            // κ(vec(I) vec(I)ᵀ/d − 1)
            let k = C64::new(self.kappa, 0.0);
            let fill = C64::new(self.kappa / d as f64, 0.0);
            for col in 0..d {
                for row in 0..d {
                    sup[(row * (d + 1), col * (d + 1))] += fill;
                }
            }
            for i in 0..side {
                sup[(i, i)] -= k;
            }
        }
        Ok(sup)
    }
}

/// Column-stacked `vec(ρ)`.
pub fn vectorize(m: &CMatrix) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &nalgebra::DVector<C64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}
