use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::coherent::CoherentRegister;
use crate::designs::{CoherentInput, JointWeight};
use crate::physical::{simulate, CircuitSpec, RunReport};
use crate::{Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    R,
    Gamma,
    Phi,
    Alpha,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::R => "r",
            SweepAxis::Gamma => "Gamma",
            SweepAxis::Phi => "phi",
            SweepAxis::Alpha => "alpha",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "r" => Ok(SweepAxis::R),
            "Gamma" | "gamma" => Ok(SweepAxis::Gamma),
            "phi" => Ok(SweepAxis::Phi),
            "alpha" => Ok(SweepAxis::Alpha),
            other => Err(format!("unknown sweep axis '{other}' (expected r, Gamma, phi or alpha)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub spec: CircuitSpec,
    pub outcome: Result<RunReport>,
}

/// Copy of `spec` and `input` with one axis set to `value`. Sweeping `alpha`
/// keeps the input coefficients and moves them to the new amplitude; for the
/// approximate Hadamard the input sits at half of `β`, so an explicit `β` is
/// dropped.
fn point(spec: &CircuitSpec, input: &CoherentInput, axis: SweepAxis, value: f64) -> Result<(CircuitSpec, CoherentInput)> {
    let mut spec = spec.clone();
    let mut input = input.clone();
    match axis {
        SweepAxis::R => spec.r = value,
        SweepAxis::Phi => spec.phi = value,
        SweepAxis::Gamma => spec.hadamard.weight = Some(JointWeight::Gamma(value)),
        SweepAxis::Alpha => {
            let a = C64::new(value, 0.0);
            spec.alpha = a;
            spec.hadamard.beta = None;
            input = match input {
                CoherentInput::Qubit(q) => CoherentInput::Qubit(q.with_alpha(a)),
                CoherentInput::Register(r) => CoherentInput::Register(CoherentRegister::new(a, r.coeffs().to_vec())?),
            };
        }
    }
    Ok((spec, input))
}

/// Runs one simulation per value, in parallel. Results keep the order of
/// `values`, and a failing point does not stop the others.
pub fn sweep(spec: &CircuitSpec, input: &CoherentInput, axis: SweepAxis, values: &[f64]) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&value| match point(spec, input, axis, value) {
            Ok((s, i)) => SweepPoint {
                value,
                outcome: simulate(&s, &i),
                spec: s,
            },
            Err(e) => SweepPoint {
                value,
                spec: spec.clone(),
                outcome: Err(e),
            },
        })
        .collect()
}

