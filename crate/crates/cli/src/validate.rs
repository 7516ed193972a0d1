//! Cross-layer invariant suite behind `catgate validate`. Inputs come from a
//! fixed low-discrepancy sequence, so runs are reproducible.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use catgate_core::coherent::{ideal_cphase, ideal_phase_gate, CoherentQubit, CoherentRegister};
use catgate_core::designs::{
    cphase_cutoffs, fock_approx_hadamard_pipeline, fock_cphase_pipeline, fock_exact_hadamard_pipeline,
    fock_phase_pipeline, ideal_hadamard, phase_cutoff, run_ideal_gate, solve_cphase_gammas, solve_hadamard,
    solve_phase_gamma, CoherentInput, HadamardRequest, HadamardVariant, IdealGate, JointWeight,
};
use catgate_core::fock::{policy_cutoff, PureFockState, Tolerances};
use catgate_core::physical::{simulate_cphase_fig2, simulate_phase_fig1, Architecture, CircuitSpec};
use catgate_core::{CatError, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    Solvers,
    Ideal,
    Equivalence,
    Operators,
    Convergence,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::Solvers, Group::Ideal, Group::Equivalence, Group::Operators, Group::Convergence];

    pub fn name(&self) -> &'static str {
        match self {
            Group::Solvers => "solvers",
            Group::Ideal => "ideal",
            Group::Equivalence => "equivalence",
            Group::Operators => "operators",
            Group::Convergence => "convergence",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Group::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown group '{s}' (solvers, ideal, equivalence, operators, convergence)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Largest measured error; NaN when the check could not run.
    pub measured: f64,
    pub tolerance: f64,
    pub note: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.measured <= self.tolerance
    }
}

/// Weyl sequence in `[0, 1)`, component `k` of point `i`.
fn weyl(i: usize, k: usize) -> f64 {
    const ROOTS: [f64; 6] = [
        0.6180339887498949,
        0.4142135623730951,
        0.7320508075688772,
        0.2360679774997898,
        0.6457513110645907,
        0.3166247903554,
    ];
    ((i + 1) as f64 * ROOTS[k % ROOTS.len()] + 0.1 * (k / ROOTS.len()) as f64).fract()
}

fn coeff(i: usize, k: usize) -> C64 {
    C64::new(2.0 * weyl(i, 2 * k) - 1.0, 2.0 * weyl(i, 2 * k + 1) - 1.0)
}

fn failed(name: &'static str, tolerance: f64, e: CatError) -> Check {
    Check {
        name,
        measured: f64::NAN,
        tolerance,
        note: Some(e.to_string()),
    }
}

fn check(name: &'static str, tolerance: f64, f: impl FnOnce() -> Result<f64, CatError>) -> Check {
    match f() {
        Ok(measured) => Check {
            name,
            measured,
            tolerance,
            note: None,
        },
        Err(e) => failed(name, tolerance, e),
    }
}

/// Runs one group. `tolerance` overrides every built-in threshold.
pub fn run_group(group: Group, tolerance: Option<f64>) -> Vec<Check> {
    let tol = |t: f64| tolerance.unwrap_or(t);
    match group {
        Group::Solvers => solvers(tol(1e-12)),
        Group::Ideal => ideal(tol(1e-10)),
        Group::Equivalence => equivalence(tol(1e-8)),
        Group::Operators => operators(tol(1e-8)),
        Group::Convergence => convergence(tol(1e-6), tol(5e-3)),
    }
}

fn draws() -> impl Iterator<Item = (f64, f64)> {
    (0..100).map(|i| (0.5 + 1.5 * weyl(i, 0), 0.05 + (TAU - 0.1) * weyl(i, 1)))
}

fn solvers(tol: f64) -> Vec<Check> {
    vec![
        check("phase condition residual", tol, || {
            let mut worst: f64 = 0.0;
            for (a, phi) in draws() {
                worst = worst.max(solve_phase_gamma(C64::new(a, 0.0), phi)?.residual());
            }
            Ok(worst)
        }),
        check("cphase sum and product residuals", tol, || {
            let mut worst: f64 = 0.0;
            for (a, phi) in draws() {
                let p = solve_cphase_gammas(C64::new(a, 0.0), phi)?;
                worst = worst.max(p.sum_residual()).max(p.product_residual());
            }
            Ok(worst)
        }),
        check("hadamard homodyne condition residual", tol, || {
            let mut worst: f64 = 0.0;
            for i in 0..20 {
                let p = solve_hadamard(&HadamardRequest {
                    alpha: 0.5 + weyl(i, 0),
                    beta: 1.0 + 2.0 * weyl(i, 1),
                    weight: Some(JointWeight::Gamma(0.02 + 0.4 * weyl(i, 2))),
                    variant: HadamardVariant::Approx,
                })?;
                worst = worst.max(p.condition_residual().unwrap_or(f64::NAN));
            }
            Ok(worst)
        }),
    ]
}

fn ideal(tol: f64) -> Vec<Check> {
    vec![
        check("phase gate output vs target (1 - F)", tol, || {
            let mut worst: f64 = 0.0;
            for (i, (a, phi)) in draws().enumerate() {
                let q = CoherentQubit::new(C64::new(a, 0.0), coeff(i, 2), coeff(i, 3));
                let rep = run_ideal_gate(&IdealGate::Phase { phi }, &CoherentInput::Qubit(q))?;
                worst = worst.max(1.0 - rep.fidelity);
            }
            Ok(worst)
        }),
        check("cphase coefficient ratios", tol, || {
            let mut worst: f64 = 0.0;
            for (i, (a, phi)) in draws().enumerate() {
                let alpha = C64::new(a, 0.0);
                let r = CoherentRegister::new(alpha, (0..4).map(|k| coeff(i, k + 2)).collect())?;
                let p = solve_cphase_gammas(alpha, phi)?;
                let out = ideal_cphase(&r, p.gamma1, p.gamma2)?.state;
                let ratio: Vec<C64> = out.coeffs().iter().zip(r.coeffs()).map(|(o, c)| o / c).collect();
                // storage order [c00, c01, c10, c11]
                let want = [C64::from_polar(1.0, phi), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
                for k in 0..4 {
                    let rel = ratio[k] / ratio[3];
                    worst = worst.max((rel - want[k]).norm());
                }
            }
            Ok(worst)
        }),
    ]
}

fn equivalence(tol: f64) -> Vec<Check> {
    let t = Tolerances::default();
    vec![
        check("phase gate: analytic vs Fock pipeline", tol, || {
            let mut worst: f64 = 0.0;
            for i in 0..10 {
                let alpha = C64::new(0.5 + 1.5 * weyl(i, 0), 0.0);
                let q = CoherentQubit::new(alpha, coeff(i, 1), coeff(i, 2));
                let p = solve_phase_gamma(alpha, 0.3 + 5.0 * weyl(i, 5))?;
                let n = phase_cutoff(&p);
                let fock = fock_phase_pipeline(&q, &p, n, &t)?;
                let analytic = ideal_phase_gate(&q, p.gamma).state.to_fock_with(n, &t)?;
                worst = worst.max(1.0 - analytic.fidelity(&fock)?);
            }
            Ok(worst)
        }),
        check("cphase: analytic vs Fock pipeline", tol, || {
            let mut worst: f64 = 0.0;
            for i in 0..4 {
                let alpha = C64::new(0.5 + 1.5 * weyl(i, 0), 0.0);
                let r = CoherentRegister::new(alpha, (0..4).map(|k| coeff(i, k + 1)).collect())?;
                let p = solve_cphase_gammas(alpha, 0.3 + 5.0 * weyl(i, 5))?;
                let cut = cphase_cutoffs(&p);
                let fock = fock_cphase_pipeline(&r, &p, cut, &t)?;
                let analytic = ideal_cphase(&r, p.gamma1, p.gamma2)?.state.to_fock_with(&cut, &t)?;
                worst = worst.max(1.0 - analytic.fidelity(&fock)?);
            }
            Ok(worst)
        }),
        check("hadamard: analytic vs Fock pipeline", tol, || {
            let mut worst: f64 = 0.0;
            for i in 0..4 {
                let a = 0.6 + weyl(i, 0);
                let q = CoherentQubit::new(C64::new(a, 0.0), coeff(i, 1), coeff(i, 2));
                for variant in [HadamardVariant::ExactHomodyneP, HadamardVariant::ExactEvenFock(2)] {
                    let p = solve_hadamard(&HadamardRequest {
                        alpha: a,
                        beta: 2.0 * a,
                        weight: None,
                        variant,
                    })?;
                    let fock = fock_exact_hadamard_pipeline(&q, &p, &t)?;
                    let analytic = ideal_hadamard(&q, &p)?.to_fock_with(fock.cutoffs()[0], &t)?;
                    worst = worst.max(1.0 - analytic.fidelity(&fock)?);
                }
                let p = solve_hadamard(&HadamardRequest {
                    alpha: a,
                    beta: 2.0 * a,
                    weight: Some(JointWeight::Gamma(0.1)),
                    variant: HadamardVariant::Approx,
                })?;
                let cut = [policy_cutoff(a), policy_cutoff(2.0 * a)];
                let fock = fock_approx_hadamard_pipeline(&q, &p, cut, &t)?;
                let analytic = ideal_hadamard(&q, &p)?.to_fock_with(cut[0], &t)?;
                worst = worst.max(1.0 - analytic.fidelity(&fock)?);
            }
            Ok(worst)
        }),
        check("exact hadamard maps onto (x+y, x-y)", tol, || {
            let q = CoherentQubit::new(C64::new(1.0, 0.0), coeff(7, 0), coeff(7, 1));
            let rep = run_ideal_gate(
                &IdealGate::Hadamard {
                    variant: HadamardVariant::ExactHomodyneP,
                    beta: None,
                    weight: None,
                },
                &CoherentInput::Qubit(q.clone()),
            )?;
            Ok(1.0 - rep.fidelity)
        }),
    ]
}

fn operators(tol: f64) -> Vec<Check> {
    vec![check("D(-g) a D(g) = a + g on cutoff 25", tol, || {
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            let mut amps = vec![C64::new(0.0, 0.0); 26];
            for (k, a) in amps.iter_mut().take(4).enumerate() {
                *a = coeff(i, k);
            }
            let s = PureFockState::from_amplitudes(&[25], amps)?.normalized()?;
            let g = coeff(i, 5) * 0.7;
            let lhs = s.displace(0, g)?.annihilate(0).displace(0, -g)?;
            let rhs = s.annihilate(0).add(&s.scaled(g))?;
            let dev = lhs
                .amplitudes()
                .iter()
                .zip(rhs.amplitudes())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            worst = worst.max(dev);
        }
        Ok(worst)
    })]
}

fn convergence(mono_tol: f64, final_tol: f64) -> Vec<Check> {
    let one = C64::new(1.0, 0.0);
    let q = CoherentQubit::new(one, C64::new(0.6, 0.2), C64::new(0.5, -0.3));
    let rs = [0.2, 0.1, 0.05, 0.02];
    let sweep = |arch: Architecture, phi: f64| -> Result<Vec<f64>, CatError> {
        let reg = CoherentRegister::two_mode(one, one, one, one, one)?;
        let mut out = Vec::new();
        for r in rs {
            let spec = CircuitSpec::new(arch, one).with_phi(phi).with_r(r);
            let f = match arch {
                Architecture::PhaseFig1 => simulate_phase_fig1(&spec, &q)?.fidelity_vs_ideal,
                _ => simulate_cphase_fig2(&spec, &reg)?.fidelity_vs_ideal,
            };
            out.push(1.0 - f);
        }
        Ok(out)
    };
    let cases = [
        (Architecture::PhaseFig1, FRAC_PI_2, "phase_fig1, phi = pi/2: infidelity monotone in r", "phase_fig1, phi = pi/2: infidelity at r = 0.02"),
        (Architecture::PhaseFig1, PI, "phase_fig1, phi = pi: infidelity monotone in r", "phase_fig1, phi = pi: infidelity at r = 0.02"),
        (Architecture::CPhaseFig2, FRAC_PI_2, "cphase_fig2, phi = pi/2: infidelity monotone in r", "cphase_fig2, phi = pi/2: infidelity at r = 0.02"),
        (Architecture::CPhaseFig2, PI, "cphase_fig2, phi = pi: infidelity monotone in r", "cphase_fig2, phi = pi: infidelity at r = 0.02"),
    ];
    let mut checks = Vec::new();
    for (arch, phi, mono_name, final_name) in cases {
        match sweep(arch, phi) {
            Ok(inf) => {
                let rise = inf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max);
                checks.push(Check {
                    name: mono_name,
                    measured: rise,
                    tolerance: mono_tol,
                    note: None,
                });
                checks.push(Check {
                    name: final_name,
                    measured: inf[inf.len() - 1],
                    tolerance: final_tol,
                    note: None,
                });
            }
            Err(e) => {
                checks.push(failed(mono_name, mono_tol, e.clone()));
                checks.push(failed(final_name, final_tol, e));
            }
        }
    }
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_groups_pass() {
        for g in [Group::Solvers, Group::Ideal, Group::Operators] {
            for c in run_group(g, None) {
                assert!(c.passed(), "{g}/{}: {} > {}", c.name, c.measured, c.tolerance);
            }
        }
    }

    #[test]
    fn zero_tolerance_reports_residuals() {
        let checks = run_group(Group::Solvers, Some(0.0));
        assert!(checks.iter().any(|c| !c.passed()));
        assert!(checks.iter().all(|c| c.measured.is_finite()));
    }

    #[test]
    fn weyl_points_stay_in_range() {
        for (a, phi) in draws() {
            assert!((0.5..=2.0).contains(&a));
            assert!(phi > 0.05 && phi < TAU - 0.05);
        }
    }
}
