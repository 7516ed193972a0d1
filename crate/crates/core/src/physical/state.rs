use crate::fock::{DensityOperator, PureFockState, Quadrature, Tolerances};
use crate::physical::DetectorModel;
use crate::{CatError, Result, C64};

/// Circuit state that stays a vector until a measurement or partial trace
/// forces a mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitState {
    Pure(PureFockState),
    Mixed(DensityOperator),
}

impl CircuitState {
    pub fn cutoffs(&self) -> &[usize] {
        match self {
            CircuitState::Pure(s) => s.cutoffs(),
            CircuitState::Mixed(r) => r.cutoffs(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            CircuitState::Pure(s) => s.norm_sqr(),
            CircuitState::Mixed(r) => r.trace(),
        }
    }

    pub fn purity(&self) -> f64 {
        match self {
            CircuitState::Pure(_) => 1.0,
            CircuitState::Mixed(r) => r.purity(),
        }
    }

    pub fn tail_masses(&self) -> Vec<f64> {
        match self {
            CircuitState::Pure(s) => s.tail_masses(),
            CircuitState::Mixed(r) => r.tail_masses(),
        }
    }

    pub fn to_density(&self) -> DensityOperator {
        match self {
            CircuitState::Pure(s) => DensityOperator::from_pure(s),
            CircuitState::Mixed(r) => r.clone(),
        }
    }

    pub fn fidelity_with_pure(&self, target: &PureFockState) -> Result<f64> {
        match self {
            CircuitState::Pure(s) => target.fidelity(s),
            CircuitState::Mixed(r) => r.fidelity_with_pure(target),
        }
    }

    /// Uhlmann fidelity; reduces to the overlap when either side is pure.
    pub fn fidelity(&self, other: &CircuitState) -> Result<f64> {
        match (self, other) {
            (CircuitState::Pure(a), b) | (b, CircuitState::Pure(a)) => b.fidelity_with_pure(a),
            (CircuitState::Mixed(a), CircuitState::Mixed(b)) => a.fidelity(b),
        }
    }

    pub(crate) fn normalized(self) -> Result<Self> {
        let tr = self.trace();
        if tr < 1e-300 {
            return Err(CatError::ZeroNorm("conditioned state vanished"));
        }
        Ok(match self {
            CircuitState::Pure(s) => CircuitState::Pure(s.scaled(C64::new(1.0 / tr.sqrt(), 0.0))),
            CircuitState::Mixed(r) => CircuitState::Mixed(r.scaled(1.0 / tr)),
        })
    }

    pub(crate) fn displace(self, mode: usize, beta: C64, tol: &Tolerances) -> Result<Self> {
        if beta == C64::new(0.0, 0.0) {
            return Ok(self);
        }
        Ok(match self {
            CircuitState::Pure(s) => CircuitState::Pure(s.displace_with(mode, beta, tol)?),
            CircuitState::Mixed(r) => CircuitState::Mixed(r.displace_with(mode, beta, tol)?),
        })
    }

    pub(crate) fn beamsplitter(self, p: usize, q: usize, t: f64, tol: &Tolerances) -> Result<Self> {
        Ok(match self {
            CircuitState::Pure(s) => CircuitState::Pure(s.beamsplitter_with(p, q, t, tol)?),
            CircuitState::Mixed(r) => CircuitState::Mixed(r.beamsplitter_with(p, q, t, tol)?),
        })
    }

    /// Appends a vacuum mode.
    pub(crate) fn with_vacuum(self, cutoff: usize, tol: &Tolerances) -> Result<Self> {
        let vac = PureFockState::vacuum(&[cutoff]);
        Ok(match self {
            CircuitState::Pure(s) => CircuitState::Pure(s.tensor_with(&vac, tol)?),
            CircuitState::Mixed(r) => CircuitState::Mixed(r.tensor_pure_with(&vac, tol)?),
        })
    }

    pub(crate) fn partial_trace(self, modes: &[usize]) -> Self {
        CircuitState::Mixed(self.to_density().partial_trace(modes))
    }

    /// Click on `mode` (removed); returns the normalized state and the click
    /// probability.
    pub(crate) fn detect(self, mode: usize, detector: DetectorModel) -> Result<(Self, f64)> {
        let (out, p) = match (detector, self) {
            (DetectorModel::Fock1Projection, CircuitState::Pure(s)) => {
                let (s, p) = s.project_fock(mode, 1);
                (CircuitState::Pure(s), p)
            }
            (DetectorModel::Fock1Projection, CircuitState::Mixed(r)) => {
                let (r, p) = r.project_fock(mode, 1);
                (CircuitState::Mixed(r), p)
            }
            (DetectorModel::OnOffPovm, st) => {
                let (r, p) = st.to_density().apd_click(mode);
                (CircuitState::Mixed(r), p)
            }
        };
        Ok((out.normalized()?, p))
    }

    pub(crate) fn project_fock(self, mode: usize, n: usize) -> Result<(Self, f64)> {
        let (out, p) = match self {
            CircuitState::Pure(s) => {
                let (s, p) = s.project_fock(mode, n);
                (CircuitState::Pure(s), p)
            }
            CircuitState::Mixed(r) => {
                let (r, p) = r.project_fock(mode, n);
                (CircuitState::Mixed(r), p)
            }
        };
        Ok((out.normalized()?, p))
    }

    /// Quadrature post-selection at `q`, or over `[q − w, q + w]` when a
    /// half-width is given. The second value is a density or a probability
    /// accordingly.
    pub(crate) fn project_quadrature(
        self,
        mode: usize,
        quadrature: Quadrature,
        q: f64,
        half_width: Option<f64>,
    ) -> Result<(Self, f64)> {
        let (out, p) = match (half_width, self) {
            (Some(w), st) => {
                let (r, p) = st.to_density().project_quadrature_window(mode, quadrature, q, w);
                (CircuitState::Mixed(r), p)
            }
            (None, CircuitState::Pure(s)) => {
                let (s, p) = s.project_quadrature(mode, quadrature, q);
                (CircuitState::Pure(s), p)
            }
            (None, CircuitState::Mixed(r)) => {
                let (r, p) = r.project_quadrature(mode, quadrature, q);
                (CircuitState::Mixed(r), p)
            }
        };
        Ok((out.normalized()?, p))
    }
}
