use crate::fock::density::DensityOperator;
use crate::fock::kernels;
use crate::fock::measure::{quadrature_bra, Quadrature};
use crate::fock::ops::{beamsplitter_blocks, displacement_matrix};
use crate::{CatError, Result, C64};

/// Numerical tolerances shared by the engine operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Largest truncated Poisson weight accepted when building a coherent state.
    pub tail: f64,
    /// Largest relative weight a unitary may push out of (or onto the top
    /// level of) the truncated space.
    pub unitary: f64,
    /// Largest total tensor dimension.
    pub max_dim: usize,
}

pub const DEFAULT_MAX_DIM: usize = 2_000_000;

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tail: 1e-10,
            unitary: 1e-8,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Default cutoff for a mode whose largest coherent amplitude is `mu`:
/// `ceil(|μ|² + 6|μ| + 10)`.
pub fn policy_cutoff(mu: f64) -> usize {
    let mu = mu.abs();
    (mu * mu + 6.0 * mu + 10.0).ceil() as usize
}

/// Poisson weight of a coherent state beyond level `cutoff`.
pub fn coherent_tail_mass(alpha: C64, cutoff: usize) -> f64 {
    let lambda = alpha.norm_sqr();
    if lambda == 0.0 {
        return 0.0;
    }
    // log p_n = −λ + n ln λ − ln n!
    let mut n = cutoff + 1;
    let mut log_p = -lambda + n as f64 * lambda.ln() - ln_factorial(n);
    let mut tail = 0.0;
    loop {
        let p = log_p.exp();
        tail += p;
        if (n as f64) > lambda && p <= tail * 1e-17 {
            break;
        }
        n += 1;
        log_p += lambda.ln() - (n as f64).ln();
        if n > cutoff + 10_000 {
            break;
        }
    }
    tail
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Pure state on a truncated multimode Fock space. Mode `k` spans levels
/// `0..=cutoffs[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureFockState {
    cutoffs: Vec<usize>,
    amps: Vec<C64>,
    norm_gain: f64,
}

impl PureFockState {
    pub fn from_amplitudes(cutoffs: &[usize], amps: Vec<C64>) -> Result<Self> {
        let dim: usize = cutoffs.iter().map(|c| c + 1).product();
        if amps.len() != dim {
            return Err(CatError::InvalidArgument(format!(
                "amplitude count {} does not match cutoffs {:?} (dimension {dim})",
                amps.len(),
                cutoffs
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(CatError::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(PureFockState {
            cutoffs: cutoffs.to_vec(),
            amps,
            norm_gain: 1.0,
        })
    }

    pub(crate) fn from_parts(cutoffs: Vec<usize>, amps: Vec<C64>, norm_gain: f64) -> Self {
        debug_assert_eq!(amps.len(), cutoffs.iter().map(|c| c + 1).product::<usize>());
        PureFockState {
            cutoffs,
            amps,
            norm_gain,
        }
    }

    pub fn vacuum(cutoffs: &[usize]) -> Self {
        let dim = cutoffs.iter().map(|c| c + 1).product();
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[0] = C64::new(1.0, 0.0);
        Self::from_parts(cutoffs.to_vec(), amps, 1.0)
    }

    /// Number state `|n_0, n_1, …⟩`.
    pub fn number_state(cutoffs: &[usize], levels: &[usize]) -> Result<Self> {
        if levels.len() != cutoffs.len() || levels.iter().zip(cutoffs).any(|(n, c)| n > c) {
            return Err(CatError::InvalidArgument(format!(
                "levels {levels:?} do not fit cutoffs {cutoffs:?}"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); cutoffs.iter().map(|c| c + 1).product()];
        let idx = levels
            .iter()
            .zip(cutoffs)
            .fold(0usize, |acc, (n, c)| acc * (c + 1) + n);
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self::from_parts(cutoffs.to_vec(), amps, 1.0))
    }

    /// Single-mode coherent state `e^{−|α|²/2} Σ αⁿ/√n! |n⟩`.
    pub fn coherent(alpha: C64, cutoff: usize) -> Result<Self> {
        Self::coherent_with(alpha, cutoff, &Tolerances::default())
    }

    pub fn coherent_with(alpha: C64, cutoff: usize, tol: &Tolerances) -> Result<Self> {
        if cutoff < 1 {
            return Err(CatError::InvalidArgument("cutoff must be at least 1".into()));
        }
        let tail = coherent_tail_mass(alpha, cutoff);
        if tail > tol.tail {
            return Err(CatError::CutoffTooSmall {
                context: format!("coherent state |{alpha}⟩ at cutoff {cutoff}"),
                mass: tail,
                tolerance: tol.tail,
            });
        }
        Ok(Self::from_parts(vec![cutoff], coherent_amplitudes(alpha, cutoff), 1.0))
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
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn amplitude(&self, levels: &[usize]) -> C64 {
        assert_eq!(levels.len(), self.cutoffs.len());
        let idx = levels
            .iter()
            .zip(&self.cutoffs)
            .fold(0usize, |acc, (n, c)| {
                assert!(n <= c, "level {n} beyond cutoff {c}");
                acc * (c + 1) + n
            });
        self.amps[idx]
    }

    /// Product of squared-norm ratios accumulated by non-unitary operations.
    pub fn norm_gain(&self) -> f64 {
        self.norm_gain
    }

    pub fn norm_sqr(&self) -> f64 {
        kernels::norm_sqr(&self.amps)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-14 {
            return Err(CatError::ZeroNorm("cannot normalize a zero vector"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self::from_parts(
            self.cutoffs.clone(),
            self.amps.iter().map(|a| a * factor).collect(),
            self.norm_gain,
        )
    }

    /// Sum of two states on the same space.
    pub fn add(&self, other: &PureFockState) -> Result<Self> {
        if self.cutoffs != other.cutoffs {
            return Err(CatError::InvalidArgument(format!(
                "cannot add states with cutoffs {:?} and {:?}",
                self.cutoffs, other.cutoffs
            )));
        }
        let amps = self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect();
        Ok(Self::from_parts(self.cutoffs.clone(), amps, self.norm_gain))
    }

    fn check_mode(&self, mode: usize) {
        assert!(
            mode < self.cutoffs.len(),
            "mode {mode} out of range for a {}-mode state",
            self.cutoffs.len()
        );
    }

    pub fn displace(&self, mode: usize, beta: C64) -> Result<Self> {
        self.displace_with(mode, beta, &Tolerances::default())
    }

    /// Applies `D(β)` to one mode. Fails with `CutoffTooSmall` when the
    /// displaced state puts more than `tol.unitary` of its weight on the top
    /// level of the mode.
    pub fn displace_with(&self, mode: usize, beta: C64, tol: &Tolerances) -> Result<Self> {
        self.check_mode(mode);
        let dims = self.dims();
        let d = displacement_matrix(beta, dims[mode]);
        let amps = kernels::apply_mode_matrix(&dims, &self.amps, mode, &d);
        let out = Self::from_parts(self.cutoffs.clone(), amps, self.norm_gain);
        check_top_level(&out.dims(), &out.amps, mode, tol, || format!("displacement by {beta} on mode {mode}"))?;
        Ok(out)
    }

    /// Applies the annihilation operator; the result is unnormalized and
    /// `norm_gain` is multiplied by the post/pre squared-norm ratio.
    pub fn annihilate(&self, mode: usize) -> Self {
        self.check_mode(mode);
        let before = self.norm_sqr();
        let amps = kernels::annihilate(&self.dims(), &self.amps, mode);
        let after = kernels::norm_sqr(&amps);
        let gain = if before > 0.0 { self.norm_gain * after / before } else { 0.0 };
        Self::from_parts(self.cutoffs.clone(), amps, gain)
    }

    pub fn beamsplitter(&self, p: usize, q: usize, t: f64) -> Result<Self> {
        self.beamsplitter_with(p, q, t, &Tolerances::default())
    }

    /// Beam splitter with amplitude transmissivity `t` and `r = √(1−t²)`:
    /// `a_p → t a_p + r a_q`, `a_q → t a_q − r a_p`.
    pub fn beamsplitter_with(&self, p: usize, q: usize, t: f64, tol: &Tolerances) -> Result<Self> {
        self.check_mode(p);
        self.check_mode(q);
        assert_ne!(p, q, "beam splitter needs two distinct modes");
        let dims = self.dims();
        let blocks = beamsplitter_blocks(t, dims[p] + dims[q] - 2);
        let amps = kernels::apply_number_blocks(&dims, &self.amps, p, q, &blocks);
        check_leakage(self.norm_sqr(), kernels::norm_sqr(&amps), tol, || {
            format!("beam splitter on modes ({p}, {q})")
        })?;
        Ok(Self::from_parts(self.cutoffs.clone(), amps, self.norm_gain))
    }

    pub fn tensor(&self, other: &PureFockState) -> Result<Self> {
        self.tensor_with(other, &Tolerances::default())
    }

    pub fn tensor_with(&self, other: &PureFockState, tol: &Tolerances) -> Result<Self> {
        let dim = self.dim().saturating_mul(other.dim());
        if dim > tol.max_dim {
            return Err(CatError::SizeOverflow { dim, limit: tol.max_dim });
        }
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        Ok(Self::from_parts(
            cutoffs,
            kernels::outer_product(&self.amps, &other.amps),
            self.norm_gain * other.norm_gain,
        ))
    }

    /// Conditions on `|n⟩` in `mode`, which is removed. Returns the
    /// unnormalized remaining state and the outcome probability relative to
    /// the incoming norm.
    pub fn project_fock(&self, mode: usize, n: usize) -> (Self, f64) {
        self.check_mode(mode);
        assert!(n <= self.cutoffs[mode], "level {n} beyond cutoff {}", self.cutoffs[mode]);
        let amps = kernels::pick_level(&self.dims(), &self.amps, mode, n);
        self.conditioned(mode, amps)
    }

    /// Projects `mode` onto the quadrature eigenstate `⟨quad = q|`. The second
    /// value is the probability density at `q`.
    pub fn project_quadrature(&self, mode: usize, quadrature: Quadrature, q: f64) -> (Self, f64) {
        self.check_mode(mode);
        let bra = quadrature_bra(quadrature, q, self.cutoffs[mode]);
        let amps = kernels::contract_bra(&self.dims(), &self.amps, mode, &bra);
        self.conditioned(mode, amps)
    }

    fn conditioned(&self, mode: usize, amps: Vec<C64>) -> (Self, f64) {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.remove(mode);
        let before = self.norm_sqr();
        let prob = if before > 0.0 { kernels::norm_sqr(&amps) / before } else { 0.0 };
        (Self::from_parts(cutoffs, amps, self.norm_gain), prob)
    }

    /// On/off detector click `1 − |0⟩⟨0|` on `mode`; the measured mode is
    /// traced out.
    pub fn apd_click(&self, mode: usize) -> (DensityOperator, f64) {
        DensityOperator::from_pure(self).apd_click(mode)
    }

    /// No-click branch `|0⟩⟨0|` of the on/off detector.
    pub fn apd_no_click(&self, mode: usize) -> (Self, f64) {
        self.project_fock(mode, 0)
    }

    /// `⟨self|other⟩`, padding the smaller cutoffs with zeros.
    pub fn overlap(&self, other: &PureFockState) -> C64 {
        kernels::inner_padded(&self.dims(), &self.amps, &other.dims(), &other.amps)
    }

    /// `|⟨t|a⟩|² / (‖t‖² ‖a‖²)`.
    pub fn fidelity(&self, actual: &PureFockState) -> Result<f64> {
        let nt = self.norm_sqr();
        let na = actual.norm_sqr();
        if nt < 1e-14 || na < 1e-14 {
            return Err(CatError::ZeroNorm("fidelity of a zero-norm state"));
        }
        Ok(self.overlap(actual).norm_sqr() / (nt * na))
    }

    /// Probability weight on the top level of each mode relative to the total.
    pub fn tail_masses(&self) -> Vec<f64> {
        let total = self.norm_sqr();
        let dims = self.dims();
        (0..self.n_modes())
            .map(|m| {
                let marg = kernels::marginal(&dims, &self.amps, m);
                if total > 0.0 { marg[marg.len() - 1] / total } else { 0.0 }
            })
            .collect()
    }

    /// Photon-number populations of one mode (unnormalized).
    pub fn marginal(&self, mode: usize) -> Vec<f64> {
        self.check_mode(mode);
        kernels::marginal(&self.dims(), &self.amps, mode)
    }

    /// Distribution of the total photon number over all modes (unnormalized).
    pub fn total_photon_distribution(&self) -> Vec<f64> {
        let dims = self.dims();
        let max_total: usize = self.cutoffs.iter().sum();
        let mut dist = vec![0.0; max_total + 1];
        let mut counter = vec![0usize; dims.len()];
        for a in &self.amps {
            dist[counter.iter().sum::<usize>()] += a.norm_sqr();
            for k in (0..dims.len()).rev() {
                counter[k] += 1;
                if counter[k] < dims[k] {
                    break;
                }
                counter[k] = 0;
            }
        }
        dist
    }
}

pub(crate) fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(cutoff + 1);
    amps.push(C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0));
    for n in 1..=cutoff {
        let prev = amps[n - 1];
        amps.push(prev * alpha / (n as f64).sqrt());
    }
    amps
}

pub(crate) fn check_top_level(
    dims: &[usize],
    amps: &[C64],
    mode: usize,
    tol: &Tolerances,
    context: impl FnOnce() -> String,
) -> Result<()> {
    let total = kernels::norm_sqr(amps);
    if total == 0.0 {
        return Ok(());
    }
    let marg = kernels::marginal(dims, amps, mode);
    let top = marg[marg.len() - 1] / total;
    if top > tol.unitary {
        return Err(CatError::CutoffTooSmall {
            context: context(),
            mass: top,
            tolerance: tol.unitary,
        });
    }
    Ok(())
}

pub(crate) fn check_leakage(
    before: f64,
    after: f64,
    tol: &Tolerances,
    context: impl FnOnce() -> String,
) -> Result<()> {
    if before == 0.0 {
        return Ok(());
    }
    let leaked = (before - after) / before;
    if leaked > tol.unitary {
        return Err(CatError::CutoffTooSmall {
            context: context(),
            mass: leaked,
            tolerance: tol.unitary,
        });
    }
    Ok(())
}
