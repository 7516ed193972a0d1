use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::coherent::{ideal_hadamard_target, CoherentQubit, CoherentRegister};
use crate::designs::{
    cphase_cutoffs, ideal_hadamard, phase_cutoff, real_positive, run_ideal_gate, solve_cphase_gammas, solve_hadamard,
    CPhaseParams, CoherentInput, HadamardRequest, HadamardVariant, IdealGate, IdealRunReport, Projection, SolvedParams,
};
use crate::fock::{policy_cutoff, PureFockState};
use crate::physical::{
    Architecture, CircuitSpec, CircuitState, Cutoffs, Diagnostics, HomodyneSetting, JointWeightReport,
    RunReport,
};
use crate::{CatError, Result, C64};

/// Runs the architecture named in `spec`. Phase and Hadamard circuits take a
/// qubit, the controlled-phase circuits a two-mode register.
pub fn simulate(spec: &CircuitSpec, input: &CoherentInput) -> Result<RunReport> {
    match (spec.architecture, input) {
        (Architecture::PhaseFig1, CoherentInput::Qubit(q)) => simulate_phase_fig1(spec, q),
        (Architecture::CPhaseFig2, CoherentInput::Register(r)) => simulate_cphase_fig2(spec, r),
        (Architecture::CPhaseFig3, CoherentInput::Register(r)) => simulate_cphase_fig3(spec, r),
        (Architecture::HadamardFig4 | Architecture::HadamardExact, CoherentInput::Qubit(q)) => simulate_hadamard(spec, q),
        (arch, _) => Err(CatError::InvalidArgument(format!(
            "{arch} expects a {} input",
            if arch.signal_modes() == 1 || matches!(arch, Architecture::HadamardFig4 | Architecture::HadamardExact) {
                "single-qubit"
            } else {
                "two-mode register"
            }
        ))),
    }
}

fn check_amplitude(input: C64, spec: C64) -> Result<()> {
    if (input - spec).norm() > 1e-12 * spec.norm().max(1.0) {
        return Err(CatError::InvalidArgument(format!(
            "input amplitude {input} differs from the circuit amplitude {spec}"
        )));
    }
    Ok(())
}

/// Extra levels on top of the coherent-state policy: subtracted states carry
/// heavier photon-number tails than the coherent states they come from.
pub const SUBTRACTION_MARGIN: usize = 4;

fn signal_cutoffs(spec: &CircuitSpec, auto: Vec<usize>) -> Vec<usize> {
    match &spec.cutoffs {
        Cutoffs::Auto => auto.into_iter().map(|c| c + SUBTRACTION_MARGIN).collect(),
        Cutoffs::Manual(c) => c.clone(),
    }
}

/// Everything a circuit hands to the report besides its output.
struct Outcome {
    params: SolvedParams,
    output: CircuitState,
    target: CoherentInput,
    success_probability: f64,
    conditional_norm_gain: f64,
    cutoffs: Vec<usize>,
    homodyne: Option<HomodyneSetting>,
    joint_weight: Option<JointWeightReport>,
}

fn report(spec: &CircuitSpec, architecture: Architecture, o: Outcome) -> Result<RunReport> {
    let tol = &spec.tolerances;
    let out_cutoffs = o.output.cutoffs().to_vec();
    let target = match &o.target {
        CoherentInput::Qubit(q) => q.to_fock_with(out_cutoffs[0], tol)?,
        CoherentInput::Register(r) => r.to_fock_with(&out_cutoffs, tol)?,
    };
    let fidelity_vs_ideal = o.output.fidelity_with_pure(&target)?;
    Ok(RunReport {
        architecture,
        params: o.params,
        purity: o.output.purity(),
        diagnostics: Diagnostics {
            tail_masses: o.output.tail_masses(),
            cutoffs: o.cutoffs,
            ancilla_cutoff: spec.ancilla_cutoff,
            detector: spec.detector,
        },
        output: o.output,
        target,
        success_probability: o.success_probability,
        fidelity_vs_ideal,
        conditional_norm_gain: o.conditional_norm_gain,
        homodyne: o.homodyne,
        joint_weight: o.joint_weight,
    })
}

fn prepared(state: PureFockState) -> Result<CircuitState> {
    Ok(CircuitState::Pure(state.normalized()?))
}

/// `D(−γ) [tap + click] D(γ)` on a single mode.
pub fn simulate_phase_fig1(spec: &CircuitSpec, q: &CoherentQubit) -> Result<RunReport> {
    spec.validate()?;
    check_amplitude(q.alpha(), spec.alpha)?;
    let tol = &spec.tolerances;
    let ideal = run_ideal_gate(&IdealGate::Phase { phi: spec.phi }, &CoherentInput::Qubit(q.clone()))?;
    let SolvedParams::Phase(params) = ideal.params else {
        unreachable!("phase gate solved to other parameters")
    };
    let cutoffs = signal_cutoffs(spec, vec![phase_cutoff(&params)]);
    let st = prepared(q.to_fock_with(cutoffs[0], tol)?)?
        .displace(0, params.gamma, tol)?
        .with_vacuum(spec.ancilla_cutoff, tol)?
        // ancilla first, so it receives +rμ
        .beamsplitter(1, 0, spec.transmissivity(), tol)?;
    let (st, p) = st.detect(1, spec.detector)?;
    let output = st.displace(0, -params.gamma, tol)?;
    report(
        spec,
        Architecture::PhaseFig1,
        Outcome {
            params: ideal.params,
            output,
            target: ideal.target,
            success_probability: p,
            conditional_norm_gain: ideal.conditional_norm_gain,
            cutoffs,
            homodyne: None,
            joint_weight: None,
        },
    )
}

/// Balanced beam splitter, two displaced subtractions on the arm `m0`, and
/// the inverse beam splitter. Ancillas are appended after the last mode and
/// consumed by the detector.
fn cphase_interferometer(
    st: CircuitState,
    (m0, m1): (usize, usize),
    params: &CPhaseParams,
    spec: &CircuitSpec,
) -> Result<(CircuitState, f64)> {
    let tol = &spec.tolerances;
    let mut st = st.beamsplitter(m0, m1, FRAC_1_SQRT_2, tol)?;
    let mut prob = 1.0;
    for g in [params.gamma1, params.gamma2] {
        let d = g * FRAC_1_SQRT_2;
        st = st.displace(m0, d, tol)?.with_vacuum(spec.ancilla_cutoff, tol)?;
        let anc = st.cutoffs().len() - 1;
        let (next, p) = st
            .beamsplitter(anc, m0, spec.transmissivity(), tol)?
            .detect(anc, spec.detector)?;
        prob *= p;
        st = next.displace(m0, -d, tol)?;
    }
    Ok((st.beamsplitter(m1, m0, FRAC_1_SQRT_2, tol)?, prob))
}

fn register_params(spec: &CircuitSpec, r: &CoherentRegister) -> Result<(CPhaseParams, IdealRunReport)> {
    spec.validate()?;
    check_amplitude(r.alpha(), spec.alpha)?;
    let ideal = run_ideal_gate(&IdealGate::CPhase { phi: spec.phi }, &CoherentInput::Register(r.clone()))?;
    let SolvedParams::CPhase(params) = ideal.params else {
        unreachable!("controlled phase solved to other parameters")
    };
    Ok((params, ideal))
}

/// Controlled phase with the subtractions inside a balanced interferometer.
pub fn simulate_cphase_fig2(spec: &CircuitSpec, r: &CoherentRegister) -> Result<RunReport> {
    let (params, ideal) = register_params(spec, r)?;
    let tol = &spec.tolerances;
    let cutoffs = signal_cutoffs(spec, cphase_cutoffs(&params).to_vec());
    let st = prepared(r.to_fock_with(&cutoffs, tol)?)?;
    let (output, p) = cphase_interferometer(st, (0, 1), &params, spec)?;
    report(
        spec,
        Architecture::CPhaseFig2,
        Outcome {
            params: ideal.params,
            output,
            target: ideal.target,
            success_probability: p,
            conditional_norm_gain: ideal.conditional_norm_gain,
            cutoffs,
            homodyne: None,
            joint_weight: None,
        },
    )
}

/// Ancilla-displacement circuit up to the detectors, on modes `[s1, s2, a1, a3]`: both signals are
/// tapped, the taps are mixed, the difference port is traced out, the sum
/// port is split in two, and the halves are displaced by `γ₁r/2`, `γ₂r/2`.
pub(crate) fn fig3_before_detection(
    spec: &CircuitSpec,
    params: &CPhaseParams,
    input: PureFockState,
) -> Result<CircuitState> {
    let tol = &spec.tolerances;
    let t = spec.transmissivity();
    let half_r = spec.r / 2.0;
    prepared(input)?
        .with_vacuum(spec.ancilla_cutoff, tol)?
        .with_vacuum(spec.ancilla_cutoff, tol)?
        .beamsplitter(2, 0, t, tol)?
        .beamsplitter(3, 1, t, tol)?
        .beamsplitter(2, 3, FRAC_1_SQRT_2, tol)?
        .partial_trace(&[3])
        .with_vacuum(spec.ancilla_cutoff, tol)?
        .beamsplitter(3, 2, FRAC_1_SQRT_2, tol)?
        .displace(2, params.gamma1 * half_r, tol)?
        .displace(3, params.gamma2 * half_r, tol)
}

/// Controlled phase with displaced ancillas; the output is mixed.
pub fn simulate_cphase_fig3(spec: &CircuitSpec, r: &CoherentRegister) -> Result<RunReport> {
    let (params, ideal) = register_params(spec, r)?;
    let tol = &spec.tolerances;
    let c = policy_cutoff(spec.alpha.norm());
    let cutoffs = signal_cutoffs(spec, vec![c, c]);
    let st = fig3_before_detection(spec, &params, r.to_fock_with(&cutoffs, tol)?)?;
    let (st, p3) = st.detect(3, spec.detector)?;
    let (output, p2) = st.detect(2, spec.detector)?;
    report(
        spec,
        Architecture::CPhaseFig3,
        Outcome {
            params: ideal.params,
            output,
            target: ideal.target,
            success_probability: p3 * p2,
            conditional_norm_gain: ideal.conditional_norm_gain,
            cutoffs,
            homodyne: None,
            joint_weight: None,
        },
    )
}

/// Hadamard on a qubit with the even-cat resource `|α⟩ + |−α⟩` at the
/// circuit amplitude. `HadamardFig4` is the approximate joint-subtraction
/// circuit, for which the input amplitude is `β/2`; `HadamardExact` runs the
/// interferometric controlled phase at π followed by the projection.
pub fn simulate_hadamard(spec: &CircuitSpec, q: &CoherentQubit) -> Result<RunReport> {
    spec.validate()?;
    let alpha = real_positive(spec.alpha)?;
    match spec.architecture {
        Architecture::HadamardFig4 => hadamard_fig4(spec, alpha, q),
        Architecture::HadamardExact => hadamard_exact(spec, alpha, q),
        other => Err(CatError::InvalidArgument(format!("{other} is not a Hadamard architecture"))),
    }
}

fn even_cat(alpha: f64) -> Result<CoherentQubit> {
    CoherentQubit::new(C64::new(alpha, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0)).normalized()
}

fn hadamard_target(alpha: f64, q: &CoherentQubit) -> CoherentInput {
    CoherentInput::Qubit(ideal_hadamard_target(&q.with_alpha(C64::new(alpha, 0.0))))
}

fn hadamard_fig4(spec: &CircuitSpec, alpha: f64, q: &CoherentQubit) -> Result<RunReport> {
    let tol = &spec.tolerances;
    let input_amp = real_positive(q.alpha())?;
    let beta = spec.hadamard.beta.unwrap_or(2.0 * input_amp);
    if (beta - 2.0 * input_amp).abs() > 1e-12 * beta.abs().max(1.0) {
        return Err(CatError::InvalidArgument(format!(
            "beta = {beta} must be twice the input amplitude {input_amp}"
        )));
    }
    let params = solve_hadamard(&HadamardRequest {
        alpha,
        beta,
        weight: spec.hadamard.weight,
        variant: HadamardVariant::Approx,
    })?;
    let joint = params.joint.expect("approximate variant carries a joint weight");
    let Projection::Homodyne { quadrature, value } = params.projection else {
        unreachable!("approximate variant projects on a quadrature")
    };
    let value = spec.homodyne_value.unwrap_or(value);
    let gain = {
        let n = q.norm_sqr();
        if n > 0.0 { ideal_hadamard(q, &params)?.norm_sqr() / n } else { 0.0 }
    };

    let cutoffs = signal_cutoffs(spec, vec![policy_cutoff(alpha), policy_cutoff(beta)]);
    let t = spec.transmissivity();
    let resource = even_cat(alpha)?.to_fock_with(cutoffs[0], tol)?;
    let signal = q.normalized()?.to_fock_with(cutoffs[1], tol)?;
    // modes [resource, input, tap of resource, tap of input]
    let st = prepared(resource.tensor_with(&signal, tol)?)?
        .displace(1, C64::new(input_amp, 0.0), tol)?
        .with_vacuum(spec.ancilla_cutoff, tol)?
        .with_vacuum(spec.ancilla_cutoff, tol)?
        .beamsplitter(2, 0, t, tol)?
        .beamsplitter(3, 1, t, tol)?
        // port 2 now carries r(t_Γ a + √(1 − t_Γ²) b) ∝ Γa + b
        .beamsplitter(2, 3, joint.t_gamma, tol)?
        .partial_trace(&[3]);
    let (st, p_click) = st.detect(2, spec.detector)?;
    let (output, density) = st.project_quadrature(1, quadrature, value, spec.homodyne_window)?;

    let r_gamma = (1.0 - joint.t_gamma * joint.t_gamma).sqrt();
    let achieved = (spec.r * joint.t_gamma) / (spec.r * r_gamma);
    report(
        spec,
        Architecture::HadamardFig4,
        Outcome {
            params: SolvedParams::Hadamard(params),
            output,
            target: hadamard_target(alpha, q),
            success_probability: p_click * density,
            conditional_norm_gain: gain,
            cutoffs,
            homodyne: Some(HomodyneSetting {
                quadrature,
                value,
                half_width: spec.homodyne_window,
            }),
            joint_weight: Some(JointWeightReport {
                requested: joint.gamma,
                achieved,
                t_gamma: joint.t_gamma,
            }),
        },
    )
}

fn hadamard_exact(spec: &CircuitSpec, alpha: f64, q: &CoherentQubit) -> Result<RunReport> {
    let tol = &spec.tolerances;
    check_amplitude(q.alpha(), spec.alpha)?;
    let variant = match spec.hadamard.even_fock {
        Some(n) => HadamardVariant::ExactEvenFock(n),
        None => HadamardVariant::ExactHomodyneP,
    };
    let params = solve_hadamard(&HadamardRequest {
        alpha,
        beta: 2.0 * alpha,
        weight: None,
        variant,
    })?;
    let gain = {
        let n = q.norm_sqr();
        if n > 0.0 { ideal_hadamard(q, &params)?.norm_sqr() / n } else { 0.0 }
    };
    let a = C64::new(alpha, 0.0);
    let cp = solve_cphase_gammas(a, PI)?;
    let cutoffs = signal_cutoffs(spec, cphase_cutoffs(&cp).to_vec());
    let reg = CoherentRegister::product(&q.normalized()?, &even_cat(alpha)?)?;
    let st = prepared(reg.to_fock_with(&cutoffs, tol)?)?;
    let (st, p_sub) = cphase_interferometer(st, (0, 1), &cp, spec)?;
    let (output, p_meas, homodyne) = match params.projection {
        Projection::Homodyne { quadrature, value } => {
            let value = spec.homodyne_value.unwrap_or(value);
            let (o, p) = st.project_quadrature(0, quadrature, value, spec.homodyne_window)?;
            (
                o,
                p,
                Some(HomodyneSetting {
                    quadrature,
                    value,
                    half_width: spec.homodyne_window,
                }),
            )
        }
        Projection::Fock(n) => {
            let (o, p) = st.project_fock(0, n)?;
            (o, p, None)
        }
    };
    report(
        spec,
        Architecture::HadamardExact,
        Outcome {
            params: SolvedParams::Hadamard(params),
            output,
            target: hadamard_target(alpha, q),
            success_probability: p_sub * p_meas,
            conditional_norm_gain: gain,
            cutoffs,
            homodyne,
            joint_weight: None,
        },
    )
}
