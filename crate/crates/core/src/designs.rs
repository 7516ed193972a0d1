//! Parameter solvers for the phase, controlled-phase and Hadamard gates, the
//! assembled ideal gate maps, and the matching ideal Fock-space operator
//! pipelines used for cross-validation.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use crate::coherent::{
    coherent_overlap, ideal_cphase, ideal_hadamard_target, ideal_phase_gate, quadrature_amplitude, CoherentQubit,
    CoherentRegister,
};
use crate::fock::{policy_cutoff, PureFockState, Quadrature, Tolerances};
use crate::{CatError, Result, C64};

/// Phases closer than this to 0 (mod 2π) are rejected.
pub const MIN_PHASE: f64 = 1e-6;

/// Reduces `phi` to `[0, 2π)` and rejects the identity.
pub fn reduce_phase(phi: f64) -> Result<f64> {
    if !phi.is_finite() {
        return Err(CatError::InvalidArgument(format!("phase must be finite, got {phi}")));
    }
    let p = phi.rem_euclid(TAU);
    if p < MIN_PHASE || TAU - p < MIN_PHASE {
        return Err(CatError::DegeneratePhase {
            phi,
            constraint: "phi = 0 mod 2pi needs an infinite displacement (identity is not implementable)",
        });
    }
    Ok(p)
}

fn unit_phase(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

/// `e^{iφ} − 1 = 2i sin(φ/2) e^{iφ/2}`, accurate near φ = 0.
fn phase_minus_one(phi: f64) -> C64 {
    C64::new(0.0, 2.0 * (phi / 2.0).sin()) * unit_phase(phi / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGateParams {
    pub alpha: C64,
    pub phi: f64,
    pub gamma: C64,
}

impl PhaseGateParams {
    /// `|(γ − α)/(γ + α) − e^{iφ}|`.
    pub fn residual(&self) -> f64 {
        ((self.gamma - self.alpha) / (self.gamma + self.alpha) - unit_phase(self.phi)).norm()
    }
}

/// `γ = iα / tan(φ/2)`, with `γ = 0` exactly at φ = π.
pub fn solve_phase_gamma(alpha: C64, phi: f64) -> Result<PhaseGateParams> {
    let p = reduce_phase(phi)?;
    if alpha.norm() < 1e-12 {
        return Err(CatError::InfeasibleCondition("basis amplitude alpha must be nonzero".into()));
    }
    let gamma = if p == PI {
        C64::new(0.0, 0.0)
    } else {
        let (s, c) = (p / 2.0).sin_cos();
        C64::new(0.0, 1.0) * alpha * (c / s)
    };
    Ok(PhaseGateParams { alpha, phi: p, gamma })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CPhaseParams {
    pub alpha: C64,
    pub phi: f64,
    pub gamma1: C64,
    pub gamma2: C64,
}

impl CPhaseParams {
    /// `|γ₁ + γ₂ + 2α|`.
    pub fn sum_residual(&self) -> f64 {
        (self.gamma1 + self.gamma2 + 2.0 * self.alpha).norm()
    }

    /// `|γ₁γ₂ − 8α²/(e^{iφ} − 1)| / |8α²/(e^{iφ} − 1)|`.
    pub fn product_residual(&self) -> f64 {
        let want = 8.0 * self.alpha * self.alpha / phase_minus_one(self.phi);
        (self.gamma1 * self.gamma2 - want).norm() / want.norm()
    }

    /// Same gate with the roots exchanged.
    pub fn swapped(&self) -> Self {
        CPhaseParams {
            gamma1: self.gamma2,
            gamma2: self.gamma1,
            ..*self
        }
    }
}

/// `γ₁,₂ = −α[1 ± √((e^{iφ} − 9)/(e^{iφ} − 1))]`, principal square root,
/// `+` branch assigned to `γ₁`.
pub fn solve_cphase_gammas(alpha: C64, phi: f64) -> Result<CPhaseParams> {
    let p = reduce_phase(phi)?;
    if alpha.norm() < 1e-12 {
        return Err(CatError::InfeasibleCondition("basis amplitude alpha must be nonzero".into()));
    }
    // (e^{iφ} − 9)/(e^{iφ} − 1) = 1 − 8/(e^{iφ} − 1)
    let root = (C64::new(1.0, 0.0) - 8.0 / phase_minus_one(p)).sqrt();
    Ok(CPhaseParams {
        alpha,
        phi: p,
        gamma1: -alpha * (1.0 + root),
        gamma2: -alpha * (1.0 - root),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HadamardVariant {
    /// Controlled phase at π, then `⟨p = 0|` on the input mode.
    ExactHomodyneP,
    /// Controlled phase at π, then projection on the even Fock state `|n⟩`.
    ExactEvenFock(usize),
    /// Joint subtraction `Γa + b` and `⟨x = q|` on the displaced input.
    Approx,
}

impl fmt::Display for HadamardVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HadamardVariant::ExactHomodyneP => f.write_str("exact_homodyne_p"),
            HadamardVariant::ExactEvenFock(n) => write!(f, "exact_even_fock({n})"),
            HadamardVariant::Approx => f.write_str("approx"),
        }
    }
}

impl FromStr for HadamardVariant {
    type Err = String;

    /// Accepts `approx`, `exact_homodyne_p`, `exact_even_fock` (n = 2) and
    /// `exact_even_fock(n)`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "approx" => Ok(HadamardVariant::Approx),
            "exact_homodyne_p" => Ok(HadamardVariant::ExactHomodyneP),
            "exact_even_fock" => Ok(HadamardVariant::ExactEvenFock(2)),
            other => other
                .strip_prefix("exact_even_fock(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|n| n.trim().parse().ok())
                .map(HadamardVariant::ExactEvenFock)
                .ok_or_else(|| format!("unknown Hadamard variant '{other}'")),
        }
    }
}

/// Relative weight of the two joint-subtraction paths, given either directly
/// or through the mixing beam splitter transmissivity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JointWeight {
    Gamma(f64),
    Transmissivity(f64),
}

/// Resolved joint subtraction: `Γ = t_Γ / √(1 − t_Γ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSubtraction {
    pub gamma: f64,
    pub t_gamma: f64,
}

impl JointSubtraction {
    pub fn resolve(weight: JointWeight) -> Result<Self> {
        match weight {
            JointWeight::Gamma(g) => {
                if !(g.is_finite() && g > 0.0) {
                    return Err(CatError::InfeasibleCondition(format!("Gamma must be positive, got {g}")));
                }
                Ok(JointSubtraction {
                    gamma: g,
                    t_gamma: g / (1.0 + g * g).sqrt(),
                })
            }
            JointWeight::Transmissivity(t) => {
                if !(t > 0.0 && t < 1.0) {
                    return Err(CatError::InfeasibleCondition(format!("t_Gamma must lie in (0, 1), got {t}")));
                }
                Ok(JointSubtraction {
                    gamma: t / (1.0 - t * t).sqrt(),
                    t_gamma: t,
                })
            }
        }
    }

    /// `|Γ − t_Γ/√(1 − t_Γ²)|`.
    pub fn residual(&self) -> f64 {
        (self.gamma - self.t_gamma / (1.0 - self.t_gamma * self.t_gamma).sqrt()).abs()
    }
}

/// Post-selecting measurement on the input mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Homodyne { quadrature: Quadrature, value: f64 },
    Fock(usize),
}

impl Projection {
    /// `⟨π|μ⟩` for a coherent state `|μ⟩`.
    pub fn coherent_amplitude(&self, mu: C64) -> C64 {
        match *self {
            Projection::Homodyne { quadrature, value } => quadrature_amplitude(mu, quadrature, value),
            Projection::Fock(n) => {
                let mut amp = C64::new((-0.5 * mu.norm_sqr()).exp(), 0.0);
                for k in 1..=n {
                    amp *= mu / (k as f64).sqrt();
                }
                amp
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardRequest {
    pub alpha: f64,
    pub beta: f64,
    pub weight: Option<JointWeight>,
    pub variant: HadamardVariant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HadamardParams {
    /// Resource amplitude.
    pub alpha: f64,
    /// Amplitude of the displaced input branch.
    pub beta: f64,
    pub variant: HadamardVariant,
    /// Present for the approximate variant only.
    pub joint: Option<JointSubtraction>,
    pub projection: Projection,
}

impl HadamardParams {
    /// Relative residual of `⟨π|β⟩β = ⟨π|0⟩Γα` (approximate variant).
    pub fn condition_residual(&self) -> Option<f64> {
        let joint = self.joint?;
        let lhs = self.projection.coherent_amplitude(C64::new(self.beta, 0.0)) * self.beta;
        let rhs = self.projection.coherent_amplitude(C64::new(0.0, 0.0)) * joint.gamma * self.alpha;
        Some((lhs - rhs).norm() / rhs.norm())
    }

    /// `|⟨π|α⟩ − ⟨π|−α⟩|` (exact variants).
    pub fn symmetry_residual(&self) -> Option<f64> {
        if self.joint.is_some() {
            return None;
        }
        let a = C64::new(self.alpha, 0.0);
        Some((self.projection.coherent_amplitude(a) - self.projection.coherent_amplitude(-a)).norm())
    }

    /// First-order error `|Γα/β|` of the approximate variant.
    pub fn first_order_error(&self) -> Option<f64> {
        self.joint.map(|j| (j.gamma * self.alpha / self.beta).abs())
    }
}

/// Solves the Hadamard measurement. For the approximate variant the `x`
/// acceptance value is `q = (β² − ln(β/(Γα))) / (√2 β)`, which makes
/// `⟨q|β⟩β = ⟨q|0⟩Γα` hold under `x = (a + a†)/√2`.
pub fn solve_hadamard(req: &HadamardRequest) -> Result<HadamardParams> {
    if !(req.alpha.is_finite() && req.alpha > 0.0) {
        return Err(CatError::InfeasibleCondition(format!(
            "Hadamard needs a real positive alpha, got {}",
            req.alpha
        )));
    }
    match req.variant {
        HadamardVariant::Approx => {
            let weight = req
                .weight
                .ok_or_else(|| CatError::InvalidArgument("approximate Hadamard needs Gamma or t_Gamma".into()))?;
            let joint = JointSubtraction::resolve(weight)?;
            let beta = req.beta;
            if !(beta.is_finite() && beta > 0.0) {
                return Err(CatError::InfeasibleCondition(format!("beta must be positive, got {beta}")));
            }
            let q = (beta * beta - (beta / (joint.gamma * req.alpha)).ln()) / (SQRT_2 * beta);
            Ok(HadamardParams {
                alpha: req.alpha,
                beta,
                variant: req.variant,
                joint: Some(joint),
                projection: Projection::Homodyne {
                    quadrature: Quadrature::X,
                    value: q,
                },
            })
        }
        HadamardVariant::ExactHomodyneP => Ok(HadamardParams {
            alpha: req.alpha,
            beta: req.beta,
            variant: req.variant,
            joint: None,
            projection: Projection::Homodyne {
                quadrature: Quadrature::P,
                value: 0.0,
            },
        }),
        HadamardVariant::ExactEvenFock(n) => {
            if n % 2 != 0 {
                return Err(CatError::InfeasibleCondition(format!(
                    "Fock projection must be on an even number state, got {n}"
                )));
            }
            Ok(HadamardParams {
                alpha: req.alpha,
                beta: req.beta,
                variant: req.variant,
                joint: None,
                projection: Projection::Fock(n),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdealGate {
    Phase { phi: f64 },
    CPhase { phi: f64 },
    /// `beta` defaults to twice the input amplitude; `weight` is needed for
    /// the approximate variant only.
    Hadamard {
        variant: HadamardVariant,
        beta: Option<f64>,
        weight: Option<JointWeight>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoherentInput {
    Qubit(CoherentQubit),
    Register(CoherentRegister),
}

impl CoherentInput {
    pub fn fidelity(&self, other: &CoherentInput) -> Result<f64> {
        match (self, other) {
            (CoherentInput::Qubit(a), CoherentInput::Qubit(b)) => a.fidelity(b),
            (CoherentInput::Register(a), CoherentInput::Register(b)) => a.fidelity(b),
            _ => Err(CatError::InvalidArgument("qubit compared with register".into())),
        }
    }

    pub fn to_register(&self) -> CoherentRegister {
        match self {
            CoherentInput::Qubit(q) => q.to_register(),
            CoherentInput::Register(r) => r.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolvedParams {
    Phase(PhaseGateParams),
    CPhase(CPhaseParams),
    Hadamard(HadamardParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdealRunReport {
    pub params: SolvedParams,
    pub output: CoherentInput,
    pub target: CoherentInput,
    /// Fidelity of `output` with `target` in the coherent basis.
    pub fidelity: f64,
    pub conditional_norm_gain: f64,
    /// `|Γα/β|` for the approximate Hadamard.
    pub first_order_error: Option<f64>,
}

/// Runs a gate through the analytic coefficient maps and compares it with the
/// target transformation.
pub fn run_ideal_gate(gate: &IdealGate, input: &CoherentInput) -> Result<IdealRunReport> {
    match (gate, input) {
        (IdealGate::Phase { phi }, CoherentInput::Qubit(q)) => {
            let params = solve_phase_gamma(q.alpha(), *phi)?;
            let out = ideal_phase_gate(q, params.gamma);
            let half = unit_phase(params.phi / 2.0);
            let target = CoherentQubit::new(q.alpha(), q.x() * half.conj(), q.y() * half);
            finish(
                SolvedParams::Phase(params),
                CoherentInput::Qubit(out.state),
                CoherentInput::Qubit(target),
                out.norm_gain,
                None,
            )
        }
        (IdealGate::CPhase { phi }, CoherentInput::Register(r)) => {
            let params = solve_cphase_gammas(r.alpha(), *phi)?;
            let out = ideal_cphase(r, params.gamma1, params.gamma2)?;
            let target = cphase_target(r, params.phi)?;
            finish(
                SolvedParams::CPhase(params),
                CoherentInput::Register(out.state),
                CoherentInput::Register(target),
                out.norm_gain,
                None,
            )
        }
        (IdealGate::Hadamard { variant, beta, weight }, CoherentInput::Qubit(q)) => {
            let alpha = real_positive(q.alpha())?;
            let params = solve_hadamard(&HadamardRequest {
                alpha,
                beta: beta.unwrap_or(2.0 * alpha),
                weight: *weight,
                variant: *variant,
            })?;
            let out = ideal_hadamard(q, &params)?;
            let target = ideal_hadamard_target(q);
            let gain = if q.norm_sqr() > 0.0 { out.norm_sqr() / q.norm_sqr() } else { 0.0 };
            finish(
                SolvedParams::Hadamard(params),
                CoherentInput::Qubit(out),
                CoherentInput::Qubit(target),
                gain,
                params.first_order_error(),
            )
        }
        _ => Err(CatError::InvalidArgument(
            "gate and input do not match (phase/Hadamard take a qubit, cphase a two-mode register)".into(),
        )),
    }
}

fn finish(
    params: SolvedParams,
    output: CoherentInput,
    target: CoherentInput,
    conditional_norm_gain: f64,
    first_order_error: Option<f64>,
) -> Result<IdealRunReport> {
    let fidelity = output.fidelity(&target)?;
    Ok(IdealRunReport {
        params,
        output,
        target,
        fidelity,
        conditional_norm_gain,
        first_order_error,
    })
}

pub(crate) fn real_positive(alpha: C64) -> Result<f64> {
    if alpha.im.abs() > 1e-12 || !(alpha.re > 0.0) {
        return Err(CatError::InfeasibleCondition(format!(
            "Hadamard needs a real positive amplitude, got {alpha}"
        )));
    }
    Ok(alpha.re)
}

/// `(c₁₁, c₁₀, c₀₁, e^{iφ} c₀₀)`.
pub fn cphase_target(r: &CoherentRegister, phi: f64) -> Result<CoherentRegister> {
    let mut coeffs = r.coeffs().to_vec();
    coeffs[0] *= unit_phase(phi);
    CoherentRegister::new(r.alpha(), coeffs)
}

/// Analytic Hadamard output for a solved parameter set, resource `|α⟩ + |−α⟩`.
pub fn ideal_hadamard(q: &CoherentQubit, params: &HadamardParams) -> Result<CoherentQubit> {
    let alpha = C64::new(params.alpha, 0.0);
    match params.joint {
        None => {
            // cphase(π) on input ⊗ even cat, then ⟨π| on the input mode
            let resource = CoherentQubit::new(alpha, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
            let reg = CoherentRegister::product(&q.with_alpha(alpha), &resource)?;
            let cp = solve_cphase_gammas(alpha, PI)?;
            let out = ideal_cphase(&reg, cp.gamma1, cp.gamma2)?.state;
            let wp = params.projection.coherent_amplitude(alpha);
            let wm = params.projection.coherent_amplitude(-alpha);
            let x = wp * out.coeff(&[true, true]) + wm * out.coeff(&[false, true]);
            let y = wp * out.coeff(&[true, false]) + wm * out.coeff(&[false, false]);
            Ok(CoherentQubit::new(alpha, x, y))
        }
        Some(joint) => {
            let (g, b) = (joint.gamma, params.beta);
            let wb = params.projection.coherent_amplitude(C64::new(b, 0.0));
            let w0 = params.projection.coherent_amplitude(C64::new(0.0, 0.0));
            let ga = g * params.alpha;
            let x = q.x() * wb * (b + ga) + q.y() * w0 * ga;
            let y = q.x() * wb * (b - ga) - q.y() * w0 * ga;
            Ok(CoherentQubit::new(alpha, x, y))
        }
    }
}

/// Default cutoff for the single-mode pipeline: covers `±α` and `±α + γ`.
pub fn phase_cutoff(params: &PhaseGateParams) -> usize {
    let a = params.alpha;
    let mu = [a, -a, a + params.gamma, -a + params.gamma]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    policy_cutoff(mu)
}

/// Default cutoffs `[arm, partner]` for the interferometric controlled phase.
pub fn cphase_cutoffs(params: &CPhaseParams) -> [usize; 2] {
    let a = params.alpha;
    let mut arm: f64 = a.norm();
    for s in [2.0, 0.0, -2.0] {
        let sum = a * s;
        arm = arm.max(sum.norm() * FRAC_1_SQRT_2);
        for g in [params.gamma1, params.gamma2] {
            arm = arm.max((sum + g).norm() * FRAC_1_SQRT_2);
        }
    }
    [policy_cutoff(arm), policy_cutoff(SQRT_2 * a.norm())]
}

/// `D(−γ) a D(γ)` applied to the Fock expansion of `q`.
pub fn fock_phase_pipeline(q: &CoherentQubit, params: &PhaseGateParams, cutoff: usize, tol: &Tolerances) -> Result<PureFockState> {
    q.to_fock_with(cutoff, tol)?
        .displace_with(0, params.gamma, tol)?
        .annihilate(0)
        .displace_with(0, -params.gamma, tol)
}

/// `U† D₂† a D₂ D₁† a D₁ U` with a balanced beam splitter `U` and
/// `D_k = D(γ_k/√2)` on the arm mode 0.
pub fn fock_cphase_pipeline(
    r: &CoherentRegister,
    params: &CPhaseParams,
    cutoffs: [usize; 2],
    tol: &Tolerances,
) -> Result<PureFockState> {
    let mut s = r.to_fock_with(&cutoffs, tol)?.beamsplitter_with(0, 1, FRAC_1_SQRT_2, tol)?;
    for g in [params.gamma1, params.gamma2] {
        let d = g * FRAC_1_SQRT_2;
        s = s.displace_with(0, d, tol)?.annihilate(0).displace_with(0, -d, tol)?;
    }
    s.beamsplitter_with(1, 0, FRAC_1_SQRT_2, tol)
}

/// Approximate Hadamard with ideal operators on modes `[resource, input]`:
/// `D(β/2)` on the input, `Γa + b`, then `⟨x = q|` on the input mode. The
/// input qubit's amplitude is taken as `β/2`.
pub fn fock_approx_hadamard_pipeline(
    q: &CoherentQubit,
    params: &HadamardParams,
    cutoffs: [usize; 2],
    tol: &Tolerances,
) -> Result<PureFockState> {
    let joint = params
        .joint
        .ok_or_else(|| CatError::InvalidArgument("pipeline needs the approximate variant".into()))?;
    let Projection::Homodyne { quadrature, value } = params.projection else {
        return Err(CatError::InvalidArgument("approximate variant projects on a quadrature".into()));
    };
    let half = C64::new(params.beta / 2.0, 0.0);
    let resource = CoherentQubit::new(C64::new(params.alpha, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0))
        .to_fock_with(cutoffs[0], tol)?;
    let input = q.with_alpha(half).to_fock_with(cutoffs[1], tol)?.displace_with(0, half, tol)?;
    let joint_state = resource.tensor_with(&input, tol)?;
    let sub = joint_state
        .annihilate(0)
        .scaled(C64::new(joint.gamma, 0.0))
        .add(&joint_state.annihilate(1))?;
    Ok(sub.project_quadrature(1, quadrature, value).0)
}

/// Exact Hadamard with ideal operators: controlled phase at π on
/// `input ⊗ (|α⟩ + |−α⟩)`, then the projection on mode 0.
pub fn fock_exact_hadamard_pipeline(q: &CoherentQubit, params: &HadamardParams, tol: &Tolerances) -> Result<PureFockState> {
    let alpha = C64::new(params.alpha, 0.0);
    let resource = CoherentQubit::new(alpha, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    let reg = CoherentRegister::product(&q.with_alpha(alpha), &resource)?;
    let cp = solve_cphase_gammas(alpha, PI)?;
    let cutoffs = cphase_cutoffs(&cp);
    let s = fock_cphase_pipeline(&reg, &cp, cutoffs, tol)?;
    Ok(match params.projection {
        Projection::Homodyne { quadrature, value } => s.project_quadrature(0, quadrature, value).0,
        Projection::Fock(n) => s.project_fock(0, n).0,
    })
}

/// `⟨−α|α⟩`; exposed for callers building Gram-weighted quantities.
pub fn basis_overlap(alpha: C64) -> C64 {
    coherent_overlap(-alpha, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn phase_solver_examples() {
        let p = solve_phase_gamma(c(1.0, 0.0), PI).unwrap();
        assert_eq!(p.gamma, c(0.0, 0.0));
        let p = solve_phase_gamma(c(1.0, 0.0), PI / 2.0).unwrap();
        assert!((p.gamma - c(0.0, 1.0)).norm() < 1e-15);
        assert!(p.residual() < 1e-15);
        assert!(matches!(
            solve_phase_gamma(c(1.0, 0.0), 1e-7),
            Err(CatError::DegeneratePhase { .. })
        ));
        assert!(matches!(solve_phase_gamma(c(1.0, 0.0), 0.0), Err(CatError::DegeneratePhase { .. })));
        assert!(matches!(solve_phase_gamma(c(1.0, 0.0), TAU), Err(CatError::DegeneratePhase { .. })));
        let small = solve_phase_gamma(c(1.0, 0.0), 1e-3).unwrap();
        assert!(small.gamma.norm() > 1e3);
    }

    #[test]
    fn cphase_solver_examples() {
        let p = solve_cphase_gammas(c(1.0, 0.0), PI).unwrap();
        let s5 = 5f64.sqrt();
        let mut roots = [p.gamma1.re, p.gamma2.re];
        roots.sort_by(f64::total_cmp);
        assert!((roots[0] - (-1.0 - s5)).abs() < 1e-12);
        assert!((roots[1] - (-1.0 + s5)).abs() < 1e-12);
        assert!((roots[1] - 1.23607).abs() < 1e-5);
        assert!(p.gamma1.im.abs() < 1e-12 && p.gamma2.im.abs() < 1e-12);

        let p = solve_cphase_gammas(c(1.0, 0.0), PI / 2.0).unwrap();
        assert!((p.gamma1 * p.gamma2 - c(-4.0, -4.0)).norm() < 1e-12);
        assert!(matches!(solve_cphase_gammas(c(1.0, 0.0), 0.0), Err(CatError::DegeneratePhase { .. })));
    }

    #[test]
    fn cphase_roots_from_independent_root_finding() {
        // γ₁, γ₂ are the roots of z² + 2αz + 8α²/(e^{iφ} − 1); Newton from two
        // starting points, no closed form.
        for &(a, phi) in &[(1.0, PI), (0.7, 1.1), (1.8, 4.0)] {
            let alpha = c(a, 0.0);
            let prod = 8.0 * alpha * alpha / (unit_phase(phi) - 1.0);
            let f = |z: C64| z * z + 2.0 * alpha * z + prod;
            let df = |z: C64| 2.0 * z + 2.0 * alpha;
            let mut found = Vec::new();
            for start in [c(3.0, 1.0), c(-5.0, -1.0)] {
                let mut z = start;
                for _ in 0..100 {
                    z -= f(z) / df(z);
                }
                found.push(z);
            }
            let p = solve_cphase_gammas(alpha, phi).unwrap();
            for z in found {
                let d = (z - p.gamma1).norm().min((z - p.gamma2).norm());
                assert!(d < 1e-10, "a={a} phi={phi}: {z} not a returned root");
            }
        }
    }

    #[test]
    fn swapped_roots_give_same_gate() {
        let p = solve_cphase_gammas(c(1.2, 0.0), 2.0).unwrap();
        let r = CoherentRegister::two_mode(c(1.2, 0.0), c(0.5, 0.1), c(-0.3, 0.2), c(0.1, 0.7), c(0.4, -0.4)).unwrap();
        let a = ideal_cphase(&r, p.gamma1, p.gamma2).unwrap().state;
        let sw = p.swapped();
        let b = ideal_cphase(&r, sw.gamma1, sw.gamma2).unwrap().state;
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn hadamard_solver_examples() {
        let exact = solve_hadamard(&HadamardRequest {
            alpha: 1.0,
            beta: 2.0,
            weight: None,
            variant: HadamardVariant::ExactHomodyneP,
        })
        .unwrap();
        assert_eq!(
            exact.projection,
            Projection::Homodyne {
                quadrature: Quadrature::P,
                value: 0.0
            }
        );
        assert!(exact.symmetry_residual().unwrap() < 1e-15);

        // Γα = β makes the logarithm vanish: q = β/√2
        let p = solve_hadamard(&HadamardRequest {
            alpha: 0.5,
            beta: 1.0,
            weight: Some(JointWeight::Gamma(2.0)),
            variant: HadamardVariant::Approx,
        })
        .unwrap();
        let Projection::Homodyne { value, .. } = p.projection else { panic!() };
        assert!((value - 1.0 / SQRT_2).abs() < 1e-15);

        let p = solve_hadamard(&HadamardRequest {
            alpha: 1.0,
            beta: 2.0,
            weight: Some(JointWeight::Gamma(0.2)),
            variant: HadamardVariant::Approx,
        })
        .unwrap();
        let Projection::Homodyne { value, quadrature } = p.projection else { panic!() };
        assert_eq!(quadrature, Quadrature::X);
        assert!((value - (4.0 - 10f64.ln()) / (2.0 * SQRT_2)).abs() < 1e-15);
        assert!((value - 0.6001).abs() < 1e-4);
        assert!(p.condition_residual().unwrap() < 1e-10);
        // engine-side check of the same condition
        let b = PureFockState::coherent(c(2.0, 0.0), 40).unwrap();
        let v = PureFockState::vacuum(&[40]);
        let lhs = b.project_quadrature(0, Quadrature::X, value).0.amplitudes()[0] * 2.0;
        let rhs = v.project_quadrature(0, Quadrature::X, value).0.amplitudes()[0] * 0.2;
        assert!(((lhs - rhs) / rhs).norm() < 1e-10);
    }

    #[test]
    fn hadamard_solver_errors() {
        let base = HadamardRequest {
            alpha: 1.0,
            beta: 2.0,
            weight: Some(JointWeight::Gamma(0.1)),
            variant: HadamardVariant::Approx,
        };
        assert!(matches!(
            solve_hadamard(&HadamardRequest { beta: 0.0, ..base }),
            Err(CatError::InfeasibleCondition(_))
        ));
        assert!(matches!(
            solve_hadamard(&HadamardRequest { weight: Some(JointWeight::Gamma(0.0)), ..base }),
            Err(CatError::InfeasibleCondition(_))
        ));
        assert!(matches!(
            solve_hadamard(&HadamardRequest { weight: Some(JointWeight::Transmissivity(1.0)), ..base }),
            Err(CatError::InfeasibleCondition(_))
        ));
        assert!(matches!(
            solve_hadamard(&HadamardRequest { variant: HadamardVariant::ExactEvenFock(3), ..base }),
            Err(CatError::InfeasibleCondition(_))
        ));
        assert!(matches!(
            solve_hadamard(&HadamardRequest { alpha: -1.0, ..base }),
            Err(CatError::InfeasibleCondition(_))
        ));
    }

    #[test]
    fn joint_weight_relation() {
        let j = JointSubtraction::resolve(JointWeight::Transmissivity(0.6)).unwrap();
        assert!((j.gamma - 0.75).abs() < 1e-15);
        assert!(j.residual() < 1e-12);
        let k = JointSubtraction::resolve(JointWeight::Gamma(0.75)).unwrap();
        assert!((k.t_gamma - 0.6).abs() < 1e-15);
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("approx".parse::<HadamardVariant>().unwrap(), HadamardVariant::Approx);
        assert_eq!(
            "exact_even_fock(4)".parse::<HadamardVariant>().unwrap(),
            HadamardVariant::ExactEvenFock(4)
        );
        assert!("exact".parse::<HadamardVariant>().is_err());
    }

    #[test]
    fn ideal_phase_gate_example() {
        let alpha = c(1.0, 0.0);
        let q = CoherentQubit::new(alpha, c(1.0, 0.0), c(1.0, 0.0)).normalized().unwrap();
        let rep = run_ideal_gate(&IdealGate::Phase { phi: PI / 2.0 }, &CoherentInput::Qubit(q.clone())).unwrap();
        let want = CoherentQubit::new(alpha, unit_phase(-PI / 4.0), unit_phase(PI / 4.0));
        let CoherentInput::Qubit(out) = &rep.output else { panic!() };
        assert!(out.fidelity(&want).unwrap() >= 1.0 - 1e-12);
        assert!(rep.fidelity >= 1.0 - 1e-10);
        // x' = 1+i, y' = −1+i: cross term x'*y' = 2i drops out of the real part
        let e = (-2.0f64).exp();
        assert!((rep.conditional_norm_gain - 4.0 / (2.0 + 2.0 * e)).abs() < 1e-12);
    }

    #[test]
    fn ideal_cphase_example() {
        let alpha = c(1.0, 0.0);
        let one = c(1.0, 0.0);
        let r = CoherentRegister::two_mode(alpha, one, one, one, one).unwrap();
        let rep = run_ideal_gate(&IdealGate::CPhase { phi: PI }, &CoherentInput::Register(r)).unwrap();
        let want = CoherentRegister::two_mode(alpha, one, one, one, -one).unwrap();
        let CoherentInput::Register(out) = &rep.output else { panic!() };
        assert!(out.fidelity(&want).unwrap() >= 1.0 - 1e-12);
        // c′₀₀/c₀₀ = −c′₁₁/c₁₁ at φ = π
        assert!((out.coeff(&[false, false]) + out.coeff(&[true, true])).norm() < 1e-12);
    }

    #[test]
    fn ideal_exact_hadamard_example() {
        let alpha = c(1.0, 0.0);
        let q = CoherentQubit::new(alpha, c(1.0, 0.0), c(0.0, 0.0));
        for variant in [HadamardVariant::ExactHomodyneP, HadamardVariant::ExactEvenFock(2), HadamardVariant::ExactEvenFock(0)] {
            let rep = run_ideal_gate(
                &IdealGate::Hadamard {
                    variant,
                    beta: None,
                    weight: None,
                },
                &CoherentInput::Qubit(q.clone()),
            )
            .unwrap();
            let CoherentInput::Qubit(out) = &rep.output else { panic!() };
            assert!(out.fidelity(&CoherentQubit::even_cat(alpha).unwrap()).unwrap() >= 1.0 - 1e-12);
            assert!(rep.fidelity >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn ideal_approx_hadamard_reports_first_order_error() {
        let q = CoherentQubit::new(c(1.0, 0.0), c(0.6, 0.0), c(0.8, 0.0));
        let rep = run_ideal_gate(
            &IdealGate::Hadamard {
                variant: HadamardVariant::Approx,
                beta: None,
                weight: Some(JointWeight::Gamma(0.1)),
            },
            &CoherentInput::Qubit(q),
        )
        .unwrap();
        assert!((rep.first_order_error.unwrap() - 0.05).abs() < 1e-15);
        assert!(rep.fidelity > 0.99 && rep.fidelity < 1.0);
    }

    #[test]
    fn mismatched_gate_and_input() {
        let q = CoherentQubit::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        assert!(run_ideal_gate(&IdealGate::CPhase { phi: 1.0 }, &CoherentInput::Qubit(q)).is_err());
    }

    #[test]
    fn exact_hadamard_at_fock_level() {
        let tol = Tolerances::default();
        let alpha = 1.0;
        let inputs = [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8), (0.3, 0.9)];
        for (x, y) in inputs {
            let q = CoherentQubit::new(c(alpha, 0.0), c(x, 0.0), c(y, 0.0));
            for variant in [HadamardVariant::ExactEvenFock(2), HadamardVariant::ExactEvenFock(4), HadamardVariant::ExactHomodyneP] {
                let params = solve_hadamard(&HadamardRequest {
                    alpha,
                    beta: 2.0 * alpha,
                    weight: None,
                    variant,
                })
                .unwrap();
                let got = fock_exact_hadamard_pipeline(&q, &params, &tol).unwrap();
                let n = got.cutoffs()[0];
                let want = ideal_hadamard_target(&q).to_fock(n).unwrap();
                let f = want.fidelity(&got).unwrap();
                assert!(f >= 1.0 - 1e-9, "({x},{y}) {variant}: {f}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn solver_outputs_satisfy_constraints(a in 0.2f64..2.5, ai in -1.0f64..1.0, phi in 0.01f64..(TAU - 0.01)) {
            let alpha = c(a, ai);
            let p = solve_phase_gamma(alpha, phi).unwrap();
            prop_assert!(p.residual() <= 1e-12);
            let cp = solve_cphase_gammas(alpha, phi).unwrap();
            prop_assert!(cp.sum_residual() <= 1e-12);
            prop_assert!(cp.product_residual() <= 1e-12);
        }

        #[test]
        fn phase_gates_compose(phi1 in 0.1f64..3.0, phi2 in 0.1f64..3.0, x in -1.0f64..1.0, y in 0.1f64..1.0) {
            prop_assume!((phi1 + phi2 - PI).abs() > 1e-3 && (phi1 + phi2 - TAU).abs() > 1e-3);
            let alpha = c(1.0, 0.0);
            let q = CoherentQubit::new(alpha, c(x, 0.3), c(y, -0.2));
            let g1 = solve_phase_gamma(alpha, phi1).unwrap().gamma;
            let g2 = solve_phase_gamma(alpha, phi2).unwrap().gamma;
            let g12 = solve_phase_gamma(alpha, phi1 + phi2).unwrap().gamma;
            let two = ideal_phase_gate(&ideal_phase_gate(&q, g1).state, g2).state;
            let one = ideal_phase_gate(&q, g12).state;
            let r_two = two.y() / two.x();
            let r_one = one.y() / one.x();
            prop_assert!(((r_two - r_one) / r_one).norm() < 1e-12);
        }

        #[test]
        fn cphase_inverse_restores_ratios(phi in 0.05f64..(TAU - 0.05), cs in proptest::collection::vec(0.1f64..1.0, 4)) {
            let alpha = c(1.0, 0.0);
            let r = CoherentRegister::two_mode(alpha, c(cs[0], 0.1), c(cs[1], -0.2), c(cs[2], 0.3), c(cs[3], 0.0)).unwrap();
            let fwd = solve_cphase_gammas(alpha, phi).unwrap();
            let back = solve_cphase_gammas(alpha, -phi).unwrap();
            let mid = ideal_cphase(&r, fwd.gamma1, fwd.gamma2).unwrap().state;
            let out = ideal_cphase(&mid, back.gamma1, back.gamma2).unwrap().state;
            let ratios: Vec<C64> = out.coeffs().iter().zip(r.coeffs()).map(|(o, i)| o / i).collect();
            for z in &ratios[1..] {
                prop_assert!(((z - ratios[0]) / ratios[0]).norm() < 1e-10);
            }
        }
    }
}
