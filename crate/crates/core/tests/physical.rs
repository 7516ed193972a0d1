use std::f64::consts::{FRAC_PI_2, PI};

use catgate_core::coherent::{CoherentQubit, CoherentRegister};
use catgate_core::designs::{CoherentInput, JointWeight};
use catgate_core::fock::{PureFockState, Tolerances};
use catgate_core::physical::*;
use catgate_core::{CatError, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

const ALPHA: C64 = C64 { re: 1.0, im: 0.0 };

fn rand_c(rng: &mut StdRng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_qubit(rng: &mut StdRng) -> CoherentQubit {
    CoherentQubit::new(ALPHA, rand_c(rng), rand_c(rng)).normalized().unwrap()
}

fn random_register(rng: &mut StdRng) -> CoherentRegister {
    CoherentRegister::new(ALPHA, (0..4).map(|_| rand_c(rng)).collect()).unwrap().normalized().unwrap()
}

fn basis_register(idx: usize) -> CoherentRegister {
    let mut coeffs = vec![c(0.0, 0.0); 4];
    coeffs[idx] = c(1.0, 0.0);
    CoherentRegister::new(ALPHA, coeffs).unwrap()
}

fn spec(arch: Architecture) -> CircuitSpec {
    CircuitSpec::new(arch, ALPHA)
}

fn even_cat_input() -> CoherentQubit {
    CoherentQubit::even_cat(ALPHA).unwrap()
}

fn weighted(g: f64) -> HadamardSettings {
    HadamardSettings {
        weight: Some(JointWeight::Gamma(g)),
        ..Default::default()
    }
}

#[test]
fn phase_fig1_at_pi_turns_even_cat_into_odd_cat() {
    let rep = simulate_phase_fig1(&spec(Architecture::PhaseFig1).with_r(0.05), &even_cat_input()).unwrap();
    let odd = CoherentQubit::odd_cat(ALPHA).unwrap().to_fock(rep.output.cutoffs()[0]).unwrap();
    let f = rep.output.fidelity_with_pure(&odd).unwrap();
    assert!(f >= 0.999, "{f}");
    assert!((f - rep.fidelity_vs_ideal).abs() < 1e-10);
}

#[test]
fn phase_fig1_converges_as_tap_weakens() {
    let q = CoherentQubit::new(ALPHA, c(0.6, 0.2), c(0.5, -0.3)).normalized().unwrap();
    let mut last_f = 0.0;
    let mut last_p = 1.0;
    for r in [0.2, 0.1, 0.05] {
        let rep = simulate_phase_fig1(&spec(Architecture::PhaseFig1).with_phi(FRAC_PI_2).with_r(r), &q).unwrap();
        assert!(rep.fidelity_vs_ideal > last_f, "r={r}");
        assert!(rep.success_probability < last_p, "r={r}");
        last_f = rep.fidelity_vs_ideal;
        last_p = rep.success_probability;
    }
}

#[test]
fn phase_fig1_success_probability_matches_single_photon_reflection() {
    // P(one photon reflected | n) = n r² t^{2(n−1)}, summed over the displaced
    // input's photon-number distribution
    let q = CoherentQubit::new(ALPHA, c(0.3, 0.1), c(0.8, 0.0)).normalized().unwrap();
    let s = spec(Architecture::PhaseFig1).with_phi(FRAC_PI_2).with_r(0.1);
    let rep = simulate_phase_fig1(&s, &q).unwrap();
    let n = rep.diagnostics.cutoffs[0];
    let displaced = q.to_fock(n).unwrap().normalized().unwrap().displace(0, c(0.0, 1.0)).unwrap();
    let t2: f64 = 1.0 - 0.01;
    let want: f64 = displaced
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| a.norm_sqr() * k as f64 * 0.01 * t2.powi(k as i32 - 1))
        .sum();
    assert!((rep.success_probability - want).abs() < 1e-12 * want.max(1.0), "{} vs {want}", rep.success_probability);
}

#[test]
fn cphase_fig2_example_and_detector_ordering() {
    let one = c(1.0, 0.0);
    let input = CoherentRegister::two_mode(ALPHA, one, one, one, one).unwrap().normalized().unwrap();
    let s = spec(Architecture::CPhaseFig2).with_r(0.05);
    let rep = simulate_cphase_fig2(&s, &input).unwrap();
    let target = CoherentRegister::two_mode(ALPHA, one, one, one, -one).unwrap();
    let f = rep.output.fidelity_with_pure(&target.to_fock(rep.output.cutoffs()).unwrap()).unwrap();
    assert!(f >= 0.995, "{f}");

    let strong = s.clone().with_r(0.2);
    let ideal_click = simulate_cphase_fig2(&strong, &input).unwrap();
    let onoff = simulate_cphase_fig2(&strong.with_detector(DetectorModel::OnOffPovm), &input).unwrap();
    assert!(onoff.fidelity_vs_ideal < ideal_click.fidelity_vs_ideal);
    assert!(matches!(onoff.output, CircuitState::Mixed(_)));
}

#[test]
fn cphase_architectures_preserve_computational_basis() {
    for arch in [Architecture::CPhaseFig2, Architecture::CPhaseFig3] {
        for idx in 0..4 {
            let input = basis_register(idx);
            let rep = simulate(&spec(arch).with_r(0.05).with_phi(1.3), &CoherentInput::Register(input.clone())).unwrap();
            let ket = input.to_fock(rep.output.cutoffs()).unwrap();
            let f = rep.output.fidelity_with_pure(&ket).unwrap();
            assert!(f >= 1.0 - 5e-3, "{arch} basis {idx}: {f}");
        }
    }
}

#[test]
fn cphase_fig3_product_inputs_purity_and_agreement_with_fig2() {
    let s3 = spec(Architecture::CPhaseFig3).with_r(0.02);
    for idx in [0, 1, 3] {
        // (α′+β′+γ₁)(α′+β′+γ₂)|α′,β′⟩ is the same ket up to a scalar
        let input = basis_register(idx);
        let rep = simulate_cphase_fig3(&s3, &input).unwrap();
        let ket = input.to_fock(rep.output.cutoffs()).unwrap();
        assert!(rep.output.fidelity_with_pure(&ket).unwrap() >= 0.999);
    }
    let one = c(1.0, 0.0);
    let input = CoherentRegister::two_mode(ALPHA, one, one, one, one).unwrap().normalized().unwrap();
    let f3 = simulate_cphase_fig3(&s3, &input).unwrap();
    let f2 = simulate_cphase_fig2(&CircuitSpec { architecture: Architecture::CPhaseFig2, ..s3.clone() }, &input).unwrap();
    assert!(f3.purity >= 0.99, "purity {}", f3.purity);
    assert!(f3.purity < 1.0);
    assert!(f3.output.fidelity(&f2.output).unwrap() >= 0.995);
}

#[test]
fn cphase_fig3_respects_size_limit() {
    let mut s = spec(Architecture::CPhaseFig3);
    s.tolerances = Tolerances { max_dim: 10_000, ..Default::default() };
    let r = basis_register(0);
    assert!(matches!(simulate_cphase_fig3(&s, &r), Err(CatError::SizeOverflow { .. })));
}

#[test]
fn hadamard_exact_on_alpha_gives_even_cat() {
    let q = CoherentQubit::new(ALPHA, c(1.0, 0.0), c(0.0, 0.0));
    for even_fock in [None, Some(2)] {
        let s = spec(Architecture::HadamardExact).with_r(0.02).with_hadamard(HadamardSettings {
            even_fock,
            ..Default::default()
        });
        let rep = simulate_hadamard(&s, &q).unwrap();
        let cat = even_cat_input().to_fock(rep.output.cutoffs()[0]).unwrap();
        let f = rep.output.fidelity_with_pure(&cat).unwrap();
        assert!(f >= 0.999, "{even_fock:?}: {f}");
        assert!(rep.success_probability > 0.0);
    }
    let odd = spec(Architecture::HadamardExact).with_hadamard(HadamardSettings {
        even_fock: Some(3),
        ..Default::default()
    });
    assert!(matches!(simulate_hadamard(&odd, &q), Err(CatError::InfeasibleCondition(_))));
}

#[test]
fn hadamard_approx_examples() {
    let x_only = CoherentQubit::new(ALPHA, c(1.0, 0.0), c(0.0, 0.0));
    let y_only = CoherentQubit::new(ALPHA, c(0.0, 0.0), c(1.0, 0.0));
    let run = |g: f64, q: &CoherentQubit| {
        simulate_hadamard(&spec(Architecture::HadamardFig4).with_r(0.02).with_hadamard(weighted(g)), q).unwrap()
    };
    let a = run(0.1, &x_only);
    assert!(a.fidelity_vs_ideal >= 0.99);
    assert!(run(0.05, &x_only).fidelity_vs_ideal > a.fidelity_vs_ideal);
    let jw = a.joint_weight.unwrap();
    assert!((jw.requested - 0.1).abs() < 1e-15 && (jw.achieved - jw.requested).abs() < 1e-12);

    let b = run(0.1, &y_only);
    let odd = CoherentQubit::odd_cat(ALPHA).unwrap().to_fock(b.output.cutoffs()[0]).unwrap();
    assert!(b.output.fidelity_with_pure(&odd).unwrap() >= 0.995);
    let h = b.homodyne.unwrap();
    assert!((h.value - (4.0 - 20f64.ln()) / (2.0 * 2f64.sqrt())).abs() < 1e-12);
}

#[test]
fn hadamard_approx_accepts_mixing_transmissivity() {
    let q = CoherentQubit::new(ALPHA, c(0.6, 0.0), c(0.8, 0.0));
    let t = 0.1 / (1.0f64 + 0.01).sqrt();
    let by_t = HadamardSettings {
        weight: Some(JointWeight::Transmissivity(t)),
        ..Default::default()
    };
    let s = spec(Architecture::HadamardFig4).with_r(0.05);
    let a = simulate_hadamard(&s.clone().with_hadamard(by_t), &q).unwrap();
    let b = simulate_hadamard(&s.with_hadamard(weighted(0.1)), &q).unwrap();
    assert!((a.fidelity_vs_ideal - b.fidelity_vs_ideal).abs() < 1e-10);
    assert!((a.joint_weight.unwrap().t_gamma - t).abs() < 1e-15);
}

#[test]
fn homodyne_window_gives_a_probability() {
    let q = CoherentQubit::new(ALPHA, c(0.6, 0.0), c(0.8, 0.0));
    let mut s = spec(Architecture::HadamardFig4).with_hadamard(weighted(0.1));
    let sharp = simulate_hadamard(&s, &q).unwrap();
    assert!(!sharp.is_discrete());
    s.homodyne_window = Some(0.01);
    let windowed = simulate_hadamard(&s, &q).unwrap();
    assert!(windowed.is_discrete());
    // a narrow window is the density times its width
    let ratio = windowed.success_probability / (sharp.success_probability * 0.02);
    assert!((ratio - 1.0).abs() < 1e-3, "{ratio}");
    assert!((windowed.fidelity_vs_ideal - sharp.fidelity_vs_ideal).abs() < 1e-4);
}

#[test]
fn reports_are_bounded() {
    let mut rng = StdRng::seed_from_u64(3);
    for det in [DetectorModel::Fock1Projection, DetectorModel::OnOffPovm] {
        for _ in 0..5 {
            let q = random_qubit(&mut rng);
            let rep = simulate_phase_fig1(&spec(Architecture::PhaseFig1).with_phi(2.0).with_r(0.1).with_detector(det), &q).unwrap();
            assert!((0.0..=1.0).contains(&rep.success_probability));
            assert!(rep.fidelity_vs_ideal >= 0.0 && rep.fidelity_vs_ideal <= 1.0 + 1e-10);
            assert!(rep.tail_mass_max() < 1e-8);
            assert!(rep.conditional_norm_gain > 0.0);
        }
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let q = even_cat_input();
    for r in [0.0, 0.6, f64::NAN] {
        assert!(matches!(
            simulate_phase_fig1(&spec(Architecture::PhaseFig1).with_r(r), &q),
            Err(CatError::InvalidArgument(_))
        ));
    }
    assert!(simulate(&spec(Architecture::CPhaseFig2), &CoherentInput::Qubit(q.clone())).is_err());
    assert!(matches!(
        simulate_phase_fig1(&spec(Architecture::PhaseFig1).with_phi(0.0), &q),
        Err(CatError::DegeneratePhase { .. })
    ));
    let wrong_amp = q.with_alpha(c(1.5, 0.0));
    assert!(simulate_phase_fig1(&spec(Architecture::PhaseFig1), &wrong_amp).is_err());
    assert!(matches!(
        simulate_phase_fig1(&spec(Architecture::PhaseFig1).with_cutoffs(Cutoffs::Manual(vec![3])), &q),
        Err(CatError::CutoffTooSmall { .. })
    ));
}

#[test]
fn sweep_contracts() {
    let q = CoherentInput::Qubit(even_cat_input());
    let s = spec(Architecture::PhaseFig1).with_phi(FRAC_PI_2);
    let values = [0.2, 0.1, 0.05, 0.02, 0.01];
    let pts = sweep(&s, &q, SweepAxis::R, &values);
    assert_eq!(pts.iter().map(|p| p.value).collect::<Vec<_>>(), values);
    let fids: Vec<f64> = pts.iter().map(|p| p.outcome.as_ref().unwrap().fidelity_vs_ideal).collect();
    for w in fids.windows(2) {
        assert!(w[1] >= w[0] - 1e-6);
    }
    assert!(sweep(&s, &q, SweepAxis::R, &[]).is_empty());

    // alpha = 3 overflows a fixed small cutoff; the neighbours still run
    let fixed = s.with_cutoffs(Cutoffs::Manual(vec![25]));
    let pts = sweep(&fixed, &q, SweepAxis::Alpha, &[1.0, 3.0, 0.8]);
    assert!(pts[0].outcome.is_ok() && pts[2].outcome.is_ok());
    assert!(matches!(pts[1].outcome, Err(CatError::CutoffTooSmall { .. })));
}

#[test]
fn sweep_over_phi_and_gamma() {
    let q = CoherentInput::Qubit(CoherentQubit::new(ALPHA, c(0.6, 0.0), c(0.8, 0.0)));
    let pts = sweep(&spec(Architecture::PhaseFig1), &q, SweepAxis::Phi, &[PI, 0.0]);
    assert!(pts[0].outcome.is_ok());
    assert!(matches!(pts[1].outcome, Err(CatError::DegeneratePhase { .. })));
    let pts = sweep(&spec(Architecture::HadamardFig4).with_r(0.02), &q, SweepAxis::Gamma, &[0.2, 0.1]);
    let f: Vec<f64> = pts.iter().map(|p| p.outcome.as_ref().unwrap().fidelity_vs_ideal).collect();
    assert!(f[1] > f[0]);
}

#[test]
fn infidelity_falls_with_tap_reflectivity_for_every_architecture() {
    let mut rng = StdRng::seed_from_u64(2024);
    for arch in Architecture::ALL {
        for _ in 0..10 {
            let input = match arch {
                Architecture::CPhaseFig2 | Architecture::CPhaseFig3 => CoherentInput::Register(random_register(&mut rng)),
                _ => CoherentInput::Qubit(random_qubit(&mut rng)),
            };
            let s = spec(arch).with_phi(2.2).with_hadamard(weighted(0.1));
            let mut last = f64::INFINITY;
            for r in [0.2, 0.1, 0.05, 0.02] {
                let rep = simulate(&s.clone().with_r(r), &input).unwrap();
                let inf = 1.0 - rep.fidelity_vs_ideal;
                assert!(inf <= last + 1e-6, "{arch} r={r}: {inf} after {last}");
                last = inf;
            }
        }
    }
}

#[test]
fn target_is_the_ideal_map_in_fock_space() {
    let q = CoherentQubit::new(ALPHA, c(0.6, 0.0), c(0.8, 0.0));
    let rep = simulate_phase_fig1(&spec(Architecture::PhaseFig1).with_phi(FRAC_PI_2), &q).unwrap();
    let half = C64::from_polar(1.0, PI / 4.0);
    let want = CoherentQubit::new(ALPHA, q.x() * half.conj(), q.y() * half)
        .to_fock(rep.target.cutoffs()[0])
        .unwrap();
    assert!(want.fidelity(&rep.target).unwrap() > 1.0 - 1e-12);
    let _: &PureFockState = &rep.target;
}
