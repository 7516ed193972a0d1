//! Quadrature eigenstates in the Fock basis.
//!
//! Convention: `x = (a + a†)/√2`, `p = (a − a†)/(i√2)`, `[x, p] = i`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quadrature {
    X,
    P,
}

impl fmt::Display for Quadrature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quadrature::X => "x",
            Quadrature::P => "p",
        })
    }
}

impl FromStr for Quadrature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" | "X" => Ok(Quadrature::X),
            "p" | "P" => Ok(Quadrature::P),
            other => Err(format!("unknown quadrature '{other}' (expected x or p)")),
        }
    }
}

/// Hermite functions `ψ_n(q) = π^{−1/4} (2ⁿ n!)^{−1/2} H_n(q) e^{−q²/2}` for
/// `n = 0..=n_max`, via the normalized three-term recurrence.
pub fn hermite_functions(q: f64, n_max: usize) -> Vec<f64> {
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(PI.powf(-0.25) * (-0.5 * q * q).exp());
    if n_max >= 1 {
        psi.push(std::f64::consts::SQRT_2 * q * psi[0]);
    }
    for n in 1..n_max {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * q * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
        psi.push(next);
    }
    psi
}

/// Components `⟨quad = q|n⟩` for `n = 0..=cutoff`.
///
/// For `x` these are the Hermite functions; for `p` the extra factor `(−i)ⁿ`
/// comes from the Fourier transform of `ψ_n`.
pub fn quadrature_bra(quadrature: Quadrature, q: f64, cutoff: usize) -> Vec<C64> {
    let psi = hermite_functions(q, cutoff);
    match quadrature {
        Quadrature::X => psi.into_iter().map(|v| C64::new(v, 0.0)).collect(),
        Quadrature::P => {
            const PHASES: [C64; 4] = [
                C64::new(1.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.0, 1.0),
            ];
            psi.into_iter().enumerate().map(|(n, v)| PHASES[n % 4] * v).collect()
        }
    }
}
