//! Exact algebra over the nonorthogonal coherent basis `{|α⟩, |−α⟩}^⊗n`.
//!
//! Register coefficients are indexed by sign strings: bit `n_modes − 1 − k`
//! of the index is the sign of mode `k`, with `1 ↔ +α` and `0 ↔ −α`. For two
//! modes the storage order is therefore `[c₀₀, c₀₁, c₁₀, c₁₁]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::fock::{PureFockState, Quadrature, Tolerances};
use crate::{CatError, Result, C64};

const ZERO_NORM_FLOOR: f64 = 1e-14;

/// `⟨a|b⟩ = exp(a* b − |a|²/2 − |b|²/2)`.
pub fn coherent_overlap(a: C64, b: C64) -> C64 {
    (a.conj() * b - 0.5 * a.norm_sqr() - 0.5 * b.norm_sqr()).exp()
}

/// Closed-form `⟨quad = q|α⟩` under `x = (a + a†)/√2`.
///
/// `⟨x=q|α⟩ = π^{−1/4} exp(−q²/2 + √2αq − α²/2 − |α|²/2)`, and
/// `⟨p=q|α⟩ = ⟨x=q|−iα⟩`.
pub fn quadrature_amplitude(alpha: C64, quadrature: Quadrature, q: f64) -> C64 {
    let a = match quadrature {
        Quadrature::X => alpha,
        Quadrature::P => alpha * C64::new(0.0, -1.0),
    };
    let exponent = -0.5 * q * q + std::f64::consts::SQRT_2 * a * q - 0.5 * a * a - 0.5 * a.norm_sqr();
    exponent.exp() * PI.powf(-0.25)
}

/// Output of a non-unitary map together with the squared-norm ratio
/// output/input (a relative likelihood, not a probability).
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned<T> {
    pub state: T,
    pub norm_gain: f64,
}

/// Gram matrix of the basis `{|±α⟩}^⊗n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    alpha: C64,
    matrix: DMatrix<C64>,
}

impl GramMatrix {
    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `u† G v`.
    pub fn form(&self, u: &[C64], v: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                acc += ui.conj() * self.matrix[(i, j)] * vj;
            }
        }
        acc
    }
}

fn sign_amplitude(alpha: C64, index: usize, n_modes: usize, mode: usize) -> C64 {
    if (index >> (n_modes - 1 - mode)) & 1 == 1 {
        alpha
    } else {
        -alpha
    }
}

/// Gram matrix for one or two modes.
pub fn gram(alpha: C64, n_modes: usize) -> Result<GramMatrix> {
    if !(1..=2).contains(&n_modes) {
        return Err(CatError::InvalidArgument(format!("n_modes must be 1 or 2, got {n_modes}")));
    }
    let dim = 1 << n_modes;
    let matrix = DMatrix::from_fn(dim, dim, |i, j| {
        (0..n_modes)
            .map(|k| coherent_overlap(sign_amplitude(alpha, i, n_modes, k), sign_amplitude(alpha, j, n_modes, k)))
            .product()
    });
    Ok(GramMatrix { alpha, matrix })
}

/// Superposition of products of `|±α⟩` over one or two modes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentRegister {
    alpha: C64,
    n_modes: usize,
    coeffs: Vec<C64>,
}

impl CoherentRegister {
    pub fn new(alpha: C64, coeffs: Vec<C64>) -> Result<Self> {
        let n_modes = match coeffs.len() {
            2 => 1,
            4 => 2,
            n => {
                return Err(CatError::InvalidArgument(format!(
                    "expected 2 or 4 coefficients, got {n}"
                )))
            }
        };
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) || !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(CatError::InvalidArgument("non-finite register entry".into()));
        }
        Ok(CoherentRegister { alpha, n_modes, coeffs })
    }

    /// `c₁₁|α,α⟩ + c₁₀|α,−α⟩ + c₀₁|−α,α⟩ + c₀₀|−α,−α⟩`.
    pub fn two_mode(alpha: C64, c11: C64, c10: C64, c01: C64, c00: C64) -> Result<Self> {
        Self::new(alpha, vec![c00, c01, c10, c11])
    }

    /// `q₁ ⊗ q₂`; both qubits must share the basis amplitude.
    pub fn product(first: &CoherentQubit, second: &CoherentQubit) -> Result<Self> {
        if (first.alpha - second.alpha).norm() > 1e-12 {
            return Err(CatError::InvalidArgument(format!(
                "basis amplitudes differ: {} vs {}",
                first.alpha, second.alpha
            )));
        }
        let a = [first.y, first.x];
        let b = [second.y, second.x];
        Self::new(first.alpha, vec![a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient for the sign string (`true ↔ +α`), mode 0 first.
    pub fn coeff(&self, signs: &[bool]) -> C64 {
        assert_eq!(signs.len(), self.n_modes);
        let idx = signs.iter().fold(0usize, |acc, &s| (acc << 1) | usize::from(s));
        self.coeffs[idx]
    }

    /// Coherent amplitude carried by `mode` in basis term `index`.
    pub fn basis_amplitude(&self, index: usize, mode: usize) -> C64 {
        sign_amplitude(self.alpha, index, self.n_modes, mode)
    }

    pub fn gram(&self) -> GramMatrix {
        gram(self.alpha, self.n_modes).expect("register has 1 or 2 modes")
    }

    fn check_compatible(&self, other: &CoherentRegister) -> Result<()> {
        if self.n_modes != other.n_modes || (self.alpha - other.alpha).norm() > 1e-12 {
            return Err(CatError::InvalidArgument(
                "registers differ in basis amplitude or mode count".into(),
            ));
        }
        Ok(())
    }

    /// `u† G v`.
    pub fn inner(&self, other: &CoherentRegister) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(self.gram().form(&self.coeffs, &other.coeffs))
    }

    /// Physical squared norm `c† G c`.
    pub fn norm_sqr(&self) -> f64 {
        self.gram().form(&self.coeffs, &self.coeffs).re.max(0.0)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n < ZERO_NORM_FLOOR {
            return Err(CatError::ZeroNorm("register lies in the Gram kernel"));
        }
        let s = 1.0 / n.sqrt();
        Ok(CoherentRegister {
            alpha: self.alpha,
            n_modes: self.n_modes,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        })
    }

    /// `|u†Gv|² / (u†Gu · v†Gv)`.
    pub fn fidelity(&self, other: &CoherentRegister) -> Result<f64> {
        let ip = self.inner(other)?;
        let nu = self.norm_sqr();
        let nv = other.norm_sqr();
        if nu < ZERO_NORM_FLOOR || nv < ZERO_NORM_FLOOR {
            return Err(CatError::ZeroNorm("fidelity of a zero-norm coherent-basis state"));
        }
        Ok(ip.norm_sqr() / (nu * nv))
    }

    pub fn to_fock(&self, cutoffs: &[usize]) -> Result<PureFockState> {
        self.to_fock_with(cutoffs, &Tolerances::default())
    }

    /// Expands the register as a linear combination of product coherent
    /// states in the truncated Fock space.
    pub fn to_fock_with(&self, cutoffs: &[usize], tol: &Tolerances) -> Result<PureFockState> {
        if cutoffs.len() != self.n_modes {
            return Err(CatError::InvalidArgument(format!(
                "{} cutoffs for a {}-mode register",
                cutoffs.len(),
                self.n_modes
            )));
        }
        let plus: Vec<PureFockState> = cutoffs
            .iter()
            .map(|&n| PureFockState::coherent_with(self.alpha, n, tol))
            .collect::<Result<_>>()?;
        let minus: Vec<PureFockState> = cutoffs
            .iter()
            .map(|&n| PureFockState::coherent_with(-self.alpha, n, tol))
            .collect::<Result<_>>()?;
        let mut acc: Option<PureFockState> = None;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let mut term: Option<PureFockState> = None;
            for mode in 0..self.n_modes {
                let f = if (idx >> (self.n_modes - 1 - mode)) & 1 == 1 {
                    &plus[mode]
                } else {
                    &minus[mode]
                };
                term = Some(match term {
                    None => f.clone(),
                    Some(t) => t.tensor_with(f, tol)?,
                });
            }
            let term = term.expect("at least one mode").scaled(c);
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term)?,
            });
        }
        Ok(acc.expect("at least one coefficient"))
    }
}

/// Single-mode coherent-state qubit `x|α⟩ + y|−α⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentQubit {
    alpha: C64,
    x: C64,
    y: C64,
    normalized: bool,
}

impl CoherentQubit {
    pub fn new(alpha: C64, x: C64, y: C64) -> Self {
        CoherentQubit {
            alpha,
            x,
            y,
            normalized: false,
        }
    }

    /// `(|α⟩ + |−α⟩)/N`.
    pub fn even_cat(alpha: C64) -> Result<Self> {
        Self::new(alpha, C64::new(1.0, 0.0), C64::new(1.0, 0.0)).normalized()
    }

    /// `(|α⟩ − |−α⟩)/N`.
    pub fn odd_cat(alpha: C64) -> Result<Self> {
        Self::new(alpha, C64::new(1.0, 0.0), C64::new(-1.0, 0.0)).normalized()
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn x(&self) -> C64 {
        self.x
    }

    pub fn y(&self) -> C64 {
        self.y
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Same coefficients over a different basis amplitude.
    pub fn with_alpha(&self, alpha: C64) -> Self {
        Self::new(alpha, self.x, self.y)
    }

    pub fn to_register(&self) -> CoherentRegister {
        CoherentRegister {
            alpha: self.alpha,
            n_modes: 1,
            coeffs: vec![self.y, self.x],
        }
    }

    pub fn from_register(r: &CoherentRegister) -> Result<Self> {
        if r.n_modes != 1 {
            return Err(CatError::InvalidArgument("register is not single-mode".into()));
        }
        Ok(Self::new(r.alpha, r.coeffs[1], r.coeffs[0]))
    }

    /// `|x|² + |y|² + 2 Re(x y* ⟨−α|α⟩)`.
    pub fn norm_sqr(&self) -> f64 {
        let ov = coherent_overlap(-self.alpha, self.alpha);
        (self.x.norm_sqr() + self.y.norm_sqr() + 2.0 * (self.x * self.y.conj() * ov).re).max(0.0)
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n < ZERO_NORM_FLOOR {
            return Err(CatError::ZeroNorm("qubit lies in the Gram kernel"));
        }
        let s = 1.0 / n.sqrt();
        Ok(CoherentQubit {
            alpha: self.alpha,
            x: self.x * s,
            y: self.y * s,
            normalized: true,
        })
    }

    pub fn inner(&self, other: &CoherentQubit) -> Result<C64> {
        self.to_register().inner(&other.to_register())
    }

    pub fn fidelity(&self, other: &CoherentQubit) -> Result<f64> {
        self.to_register().fidelity(&other.to_register())
    }

    pub fn to_fock(&self, cutoff: usize) -> Result<PureFockState> {
        self.to_register().to_fock(&[cutoff])
    }

    pub fn to_fock_with(&self, cutoff: usize, tol: &Tolerances) -> Result<PureFockState> {
        self.to_register().to_fock_with(&[cutoff], tol)
    }
}

fn gain(before: f64, after: f64) -> f64 {
    if before > 0.0 {
        after / before
    } else {
        0.0
    }
}

/// `D(−γ) a D(γ)` on the coefficients: `(x, y) → (x(α+γ), y(−α+γ))`.
pub fn ideal_phase_gate(q: &CoherentQubit, gamma: C64) -> Conditioned<CoherentQubit> {
    let out = CoherentQubit::new(q.alpha, q.x * (q.alpha + gamma), q.y * (-q.alpha + gamma));
    Conditioned {
        norm_gain: gain(q.norm_sqr(), out.norm_sqr()),
        state: out,
    }
}

/// `(a + b + γ₂)(a + b + γ₁)` on a two-mode register: each basis term
/// `|s₁α, s₂α⟩` is multiplied by `(s₁α + s₂α + γ₁)(s₁α + s₂α + γ₂)`.
pub fn ideal_cphase(r: &CoherentRegister, gamma1: C64, gamma2: C64) -> Result<Conditioned<CoherentRegister>> {
    if r.n_modes != 2 {
        return Err(CatError::InvalidArgument("controlled phase acts on two modes".into()));
    }
    let coeffs = r
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let sum = r.basis_amplitude(idx, 0) + r.basis_amplitude(idx, 1);
            c * (sum + gamma1) * (sum + gamma2)
        })
        .collect();
    let out = CoherentRegister {
        alpha: r.alpha,
        n_modes: 2,
        coeffs,
    };
    Ok(Conditioned {
        norm_gain: gain(r.norm_sqr(), out.norm_sqr()),
        state: out,
    })
}

/// Hadamard target on the coefficients: `(x, y) → (x + y, x − y)`.
pub fn ideal_hadamard_target(q: &CoherentQubit) -> CoherentQubit {
    CoherentQubit::new(q.alpha, q.x + q.y, q.x - q.y)
}
