use nalgebra::DMatrix;

use crate::fock::kernels;
use crate::fock::measure::{quadrature_bra, Quadrature};
use crate::fock::ops::{beamsplitter_blocks, displacement_matrix};
use crate::fock::state::{check_leakage, PureFockState, Tolerances};
use crate::{CatError, Result, C64};

/// Positive semidefinite operator on a truncated multimode Fock space, possibly
/// sub-normalized.
///
/// Stored in factored form `ρ = Σ_k |w_k⟩⟨w_k|`, so Hermiticity and
/// positivity hold by construction; [`DensityOperator::to_matrix`]
/// materializes the dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    cutoffs: Vec<usize>,
    factors: Vec<Vec<C64>>,
}

/// Measured invariant residuals of a dense density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantCheck {
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

impl InvariantCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.hermiticity_error <= tol && self.min_eigenvalue >= -tol && self.trace >= -tol && self.trace <= 1.0 + tol
    }
}

impl DensityOperator {
    pub fn from_pure(state: &PureFockState) -> Self {
        DensityOperator {
            cutoffs: state.cutoffs().to_vec(),
            factors: vec![state.amplitudes().to_vec()],
        }
    }

    /// Mixture `Σ_k |ψ_k⟩⟨ψ_k|` of unnormalized pure states.
    pub fn from_ensemble(states: &[PureFockState]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| CatError::InvalidArgument("empty ensemble".into()))?;
        if states.iter().any(|s| s.cutoffs() != first.cutoffs()) {
            return Err(CatError::InvalidArgument("ensemble members on different spaces".into()));
        }
        Ok(DensityOperator {
            cutoffs: first.cutoffs().to_vec(),
            factors: states.iter().map(|s| s.amplitudes().to_vec()).collect(),
        })
    }

    /// Factors a dense Hermitian PSD matrix through its eigendecomposition.
    pub fn from_matrix(cutoffs: &[usize], matrix: &DMatrix<C64>) -> Result<Self> {
        let dim: usize = cutoffs.iter().map(|c| c + 1).product();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(CatError::InvalidArgument(format!(
                "matrix is {}x{}, cutoffs {cutoffs:?} need {dim}x{dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm_err = (matrix - matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > 1e-10 {
            return Err(CatError::InvalidArgument(format!("matrix not Hermitian (error {herm_err:.2e})")));
        }
        let eig = matrix.clone().symmetric_eigen();
        let mut factors = Vec::new();
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda < -1e-10 {
                return Err(CatError::InvalidArgument(format!("negative eigenvalue {lambda:.3e}")));
            }
            if lambda > 0.0 {
                let s = lambda.sqrt();
                factors.push(eig.eigenvectors.column(k).iter().map(|z| z * s).collect());
            }
        }
        if factors.is_empty() {
            factors.push(vec![C64::new(0.0, 0.0); dim]);
        }
        Ok(DensityOperator {
            cutoffs: cutoffs.to_vec(),
            factors,
        })
    }

    fn from_factors(cutoffs: Vec<usize>, factors: Vec<Vec<C64>>) -> Self {
        let dim: usize = cutoffs.iter().map(|c| c + 1).product();
        let mut factors: Vec<Vec<C64>> = factors
            .into_iter()
            .filter(|w| kernels::norm_sqr(w) > 0.0)
            .collect();
        if factors.is_empty() {
            factors.push(vec![C64::new(0.0, 0.0); dim]);
        }
        DensityOperator { cutoffs, factors }
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn dims(&self) -> Vec<usize> {
        self.cutoffs.iter().map(|c| c + 1).collect()
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Number of stored factors (an upper bound on the rank).
    pub fn rank_bound(&self) -> usize {
        self.factors.len()
    }

    pub fn trace(&self) -> f64 {
        self.factors.iter().map(|w| kernels::norm_sqr(w)).sum()
    }

    /// `tr ρ² / (tr ρ)²`.
    pub fn purity(&self) -> f64 {
        let tr = self.trace();
        if tr == 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (j, a) in self.factors.iter().enumerate() {
            acc += kernels::norm_sqr(a).powi(2);
            for b in &self.factors[j + 1..] {
                acc += 2.0 * kernels::inner(a, b).norm_sqr();
            }
        }
        acc / (tr * tr)
    }

    /// `c ρ` for `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Self {
        assert!(c >= 0.0, "density operators scale by nonnegative factors");
        let s = c.sqrt();
        DensityOperator {
            cutoffs: self.cutoffs.clone(),
            factors: self.map_factors(|w| w.iter().map(|z| z * s).collect()),
        }
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let dim = self.dim();
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        for w in &self.factors {
            for i in 0..dim {
                if w[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..dim {
                    m[(i, j)] += w[i] * w[j].conj();
                }
            }
        }
        m
    }

    /// Residuals of the Hermiticity, positivity and trace invariants, measured
    /// on the dense matrix.
    pub fn check_invariants(&self) -> InvariantCheck {
        let m = self.to_matrix();
        let hermiticity_error = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let min_eigenvalue = m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        InvariantCheck {
            hermiticity_error,
            min_eigenvalue,
            trace: m.trace().re,
        }
    }

    fn check_mode(&self, mode: usize) {
        assert!(
            mode < self.cutoffs.len(),
            "mode {mode} out of range for a {}-mode operator",
            self.cutoffs.len()
        );
    }

    fn map_factors(&self, f: impl Fn(&[C64]) -> Vec<C64>) -> Vec<Vec<C64>> {
        self.factors.iter().map(|w| f(w)).collect()
    }

    pub fn displace(&self, mode: usize, beta: C64) -> Result<Self> {
        self.displace_with(mode, beta, &Tolerances::default())
    }

    /// `D(β) ρ D(β)†` on one mode.
    pub fn displace_with(&self, mode: usize, beta: C64, tol: &Tolerances) -> Result<Self> {
        self.check_mode(mode);
        let dims = self.dims();
        let d = displacement_matrix(beta, dims[mode]);
        let factors = self.map_factors(|w| kernels::apply_mode_matrix(&dims, w, mode, &d));
        let out = DensityOperator {
            cutoffs: self.cutoffs.clone(),
            factors,
        };
        // top-level weight of the whole mixture, not of each factor
        let top = *out.marginal(mode).last().unwrap();
        let tr = out.trace();
        if tr > 0.0 && top / tr > tol.unitary {
            return Err(CatError::CutoffTooSmall {
                context: format!("displacement by {beta} on mode {mode}"),
                mass: top / tr,
                tolerance: tol.unitary,
            });
        }
        Ok(out)
    }

    pub fn beamsplitter(&self, p: usize, q: usize, t: f64) -> Result<Self> {
        self.beamsplitter_with(p, q, t, &Tolerances::default())
    }

    pub fn beamsplitter_with(&self, p: usize, q: usize, t: f64, tol: &Tolerances) -> Result<Self> {
        self.check_mode(p);
        self.check_mode(q);
        assert_ne!(p, q, "beam splitter needs two distinct modes");
        let dims = self.dims();
        let blocks = beamsplitter_blocks(t, dims[p] + dims[q] - 2);
        let factors = self.map_factors(|w| kernels::apply_number_blocks(&dims, w, p, q, &blocks));
        let before = self.trace();
        let after: f64 = factors.iter().map(|w| kernels::norm_sqr(w)).sum();
        check_leakage(before, after, tol, || format!("beam splitter on modes ({p}, {q})"))?;
        Ok(DensityOperator {
            cutoffs: self.cutoffs.clone(),
            factors,
        })
    }

    /// `ρ ⊗ |ψ⟩⟨ψ|` with the pure state appended as the last modes.
    pub fn tensor_pure(&self, other: &PureFockState) -> Result<Self> {
        self.tensor_pure_with(other, &Tolerances::default())
    }

    pub fn tensor_pure_with(&self, other: &PureFockState, tol: &Tolerances) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        if dim > tol.max_dim {
            return Err(CatError::SizeOverflow { dim, limit: tol.max_dim });
        }
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(other.cutoffs());
        let factors = self.map_factors(|w| kernels::outer_product(w, other.amplitudes()));
        Ok(DensityOperator { cutoffs, factors })
    }

    /// Traces out the listed modes.
    pub fn partial_trace(&self, modes_to_drop: &[usize]) -> Self {
        let mut drop = modes_to_drop.to_vec();
        drop.sort_unstable();
        drop.dedup();
        for &m in &drop {
            self.check_mode(m);
        }
        let mut cutoffs = self.cutoffs.clone();
        let mut factors = self.factors.clone();
        // highest index first so lower indices stay valid
        for &m in drop.iter().rev() {
            let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
            factors = factors
                .iter()
                .flat_map(|w| (0..dims[m]).map(|n| kernels::pick_level(&dims, w, m, n)).collect::<Vec<_>>())
                .collect();
            cutoffs.remove(m);
        }
        Self::from_factors(cutoffs, factors)
    }

    fn conditioned(&self, mode: usize, factors: Vec<Vec<C64>>) -> (Self, f64) {
        let before = self.trace();
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.remove(mode);
        let out = Self::from_factors(cutoffs, factors);
        let prob = if before > 0.0 { out.trace() / before } else { 0.0 };
        (out, prob)
    }

    /// Conditions on `|n⟩` in `mode`; trace of the result equals the outcome
    /// probability times the incoming trace.
    pub fn project_fock(&self, mode: usize, n: usize) -> (Self, f64) {
        self.check_mode(mode);
        assert!(n <= self.cutoffs[mode], "level {n} beyond cutoff {}", self.cutoffs[mode]);
        let dims = self.dims();
        let factors = self.map_factors(|w| kernels::pick_level(&dims, w, mode, n));
        self.conditioned(mode, factors)
    }

    /// Click branch of the on/off detector `{|0⟩⟨0|, 1 − |0⟩⟨0|}`; the
    /// measured mode is traced out.
    pub fn apd_click(&self, mode: usize) -> (Self, f64) {
        self.check_mode(mode);
        let dims = self.dims();
        let factors = self
            .factors
            .iter()
            .flat_map(|w| (1..dims[mode]).map(|n| kernels::pick_level(&dims, w, mode, n)).collect::<Vec<_>>())
            .collect();
        self.conditioned(mode, factors)
    }

    pub fn apd_no_click(&self, mode: usize) -> (Self, f64) {
        self.project_fock(mode, 0)
    }

    /// Projects `mode` onto `⟨quad = q|`; returns the conditioned operator and
    /// the probability density at `q`.
    pub fn project_quadrature(&self, mode: usize, quadrature: Quadrature, q: f64) -> (Self, f64) {
        self.check_mode(mode);
        let dims = self.dims();
        let bra = quadrature_bra(quadrature, q, self.cutoffs[mode]);
        let factors = self.map_factors(|w| kernels::contract_bra(&dims, w, mode, &bra));
        self.conditioned(mode, factors)
    }

    /// Averages quadrature projections over `[q − w, q + w]` with composite
    /// Simpson weights on 21 nodes. The second value is the acceptance
    /// probability of the window.
    pub fn project_quadrature_window(&self, mode: usize, quadrature: Quadrature, q: f64, half_width: f64) -> (Self, f64) {
        self.check_mode(mode);
        let dims = self.dims();
        let mut factors = Vec::new();
        for (node, weight) in simpson_nodes(q - half_width, q + half_width, 21) {
            let bra = quadrature_bra(quadrature, node, self.cutoffs[mode]);
            let s = weight.sqrt();
            factors.extend(self.factors.iter().map(|w| {
                kernels::contract_bra(&dims, w, mode, &bra)
                    .into_iter()
                    .map(|z| z * s)
                    .collect::<Vec<_>>()
            }));
        }
        self.conditioned(mode, factors)
    }

    /// `⟨t|ρ|t⟩ / (‖t‖² tr ρ)`, padding mismatched cutoffs with zeros.
    pub fn fidelity_with_pure(&self, target: &PureFockState) -> Result<f64> {
        let nt = target.norm_sqr();
        let tr = self.trace();
        if nt < 1e-14 || tr < 1e-14 {
            return Err(CatError::ZeroNorm("fidelity of a zero-norm state"));
        }
        if target.n_modes() != self.n_modes() {
            return Err(CatError::InvalidArgument("fidelity between different mode counts".into()));
        }
        let dims = self.dims();
        let tdims = target.dims();
        let num: f64 = self
            .factors
            .iter()
            .map(|w| kernels::inner_padded(&tdims, target.amplitudes(), &dims, w).norm_sqr())
            .sum();
        Ok(num / (nt * tr))
    }

    /// Uhlmann fidelity `(tr|√ρ √σ|)² / (tr ρ tr σ)`. With `ρ = AA†` and
    /// `σ = BB†` the trace norm equals the nuclear norm of `A†B`.
    pub fn fidelity(&self, other: &DensityOperator) -> Result<f64> {
        let (ta, tb) = (self.trace(), other.trace());
        if ta < 1e-14 || tb < 1e-14 {
            return Err(CatError::ZeroNorm("fidelity of a zero-norm state"));
        }
        if self.n_modes() != other.n_modes() {
            return Err(CatError::InvalidArgument("fidelity between different mode counts".into()));
        }
        let (da, db) = (self.dims(), other.dims());
        let overlaps = DMatrix::from_fn(self.factors.len(), other.factors.len(), |i, j| {
            kernels::inner_padded(&da, &self.factors[i], &db, &other.factors[j])
        });
        let nuclear: f64 = overlaps.singular_values().iter().sum();
        Ok(nuclear * nuclear / (ta * tb))
    }

    pub fn tail_masses(&self) -> Vec<f64> {
        let tr = self.trace();
        let dims = self.dims();
        (0..self.n_modes())
            .map(|m| {
                let top: f64 = self
                    .factors
                    .iter()
                    .map(|w| *kernels::marginal(&dims, w, m).last().unwrap())
                    .sum();
                if tr > 0.0 { top / tr } else { 0.0 }
            })
            .collect()
    }

    /// Photon-number populations of one mode (unnormalized).
    pub fn marginal(&self, mode: usize) -> Vec<f64> {
        self.check_mode(mode);
        let dims = self.dims();
        let mut acc = vec![0.0; dims[mode]];
        for w in &self.factors {
            for (a, p) in acc.iter_mut().zip(kernels::marginal(&dims, w, mode)) {
                *a += p;
            }
        }
        acc
    }
}

pub(crate) fn simpson_nodes(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 3 && n % 2 == 1);
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|k| {
            let w = if k == 0 || k == n - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            (a + k as f64 * h, w * h / 3.0)
        })
        .collect()
}
