//! Fock-space simulations of the gate circuits built from tap beam splitters,
//! photodetectors, displacements and homodyne post-selection.

mod circuits;
mod state;
mod sweep;

use std::fmt;
use std::str::FromStr;

pub use circuits::{
    simulate, simulate_cphase_fig2, simulate_cphase_fig3, simulate_hadamard, simulate_phase_fig1,
};
pub use state::CircuitState;
pub use sweep::{sweep, SweepAxis, SweepPoint};

use crate::designs::{JointWeight, SolvedParams};
use crate::fock::{PureFockState, Quadrature, Tolerances};
use crate::{CatError, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// Single-mode phase gate with one subtraction.
    PhaseFig1,
    /// Controlled phase inside a balanced interferometer.
    CPhaseFig2,
    /// Controlled phase with displaced ancillas instead of in-arm displacements.
    CPhaseFig3,
    /// Approximate Hadamard from a joint subtraction.
    HadamardFig4,
    /// Hadamard from a controlled phase at π plus a projection.
    HadamardExact,
}

impl Architecture {
    pub const ALL: [Architecture; 5] = [
        Architecture::PhaseFig1,
        Architecture::CPhaseFig2,
        Architecture::CPhaseFig3,
        Architecture::HadamardFig4,
        Architecture::HadamardExact,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Architecture::PhaseFig1 => "phase_fig1",
            Architecture::CPhaseFig2 => "cphase_fig2",
            Architecture::CPhaseFig3 => "cphase_fig3",
            Architecture::HadamardFig4 => "hadamard_fig4",
            Architecture::HadamardExact => "hadamard_exact",
        }
    }

    /// Number of signal modes the circuit takes as input.
    pub fn signal_modes(&self) -> usize {
        match self {
            Architecture::PhaseFig1 => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.as_str() == s.trim())
            .ok_or_else(|| format!("unknown architecture '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorModel {
    /// Click POVM `1 − |0⟩⟨0|`.
    OnOffPovm,
    /// Idealized click as the projection on `|1⟩`.
    Fock1Projection,
}

impl DetectorModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorModel::OnOffPovm => "onoff_povm",
            DetectorModel::Fock1Projection => "fock1_projection",
        }
    }
}

impl fmt::Display for DetectorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetectorModel {
    type Err = String;

    /// Accepts the full names and the short forms `onoff` and `fock1`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "onoff" | "onoff_povm" => Ok(DetectorModel::OnOffPovm),
            "fock1" | "fock1_projection" => Ok(DetectorModel::Fock1Projection),
            other => Err(format!("unknown detector model '{other}' (expected onoff or fock1)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Cutoffs {
    #[default]
    Auto,
    /// One cutoff per signal mode.
    Manual(Vec<usize>),
}

/// Settings read by the two Hadamard architectures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HadamardSettings {
    /// Displaced input amplitude; defaults to twice the input amplitude.
    pub beta: Option<f64>,
    pub weight: Option<JointWeight>,
    /// Exact variant: project on this even Fock level instead of `p = 0`.
    pub even_fock: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec {
    pub architecture: Architecture,
    pub alpha: C64,
    /// Ignored by the Hadamard architectures.
    pub phi: f64,
    /// Tap reflectivity; transmissivity is `√(1 − r²)`.
    pub r: f64,
    pub detector: DetectorModel,
    pub hadamard: HadamardSettings,
    /// Replaces the solved homodyne value when set.
    pub homodyne_value: Option<f64>,
    /// Half-width of a finite homodyne acceptance window.
    pub homodyne_window: Option<f64>,
    pub cutoffs: Cutoffs,
    pub ancilla_cutoff: usize,
    pub tolerances: Tolerances,
}

pub const DEFAULT_ANCILLA_CUTOFF: usize = 8;

impl CircuitSpec {
    pub fn new(architecture: Architecture, alpha: C64) -> Self {
        CircuitSpec {
            architecture,
            alpha,
            phi: std::f64::consts::PI,
            r: 0.05,
            detector: DetectorModel::Fock1Projection,
            hadamard: HadamardSettings::default(),
            homodyne_value: None,
            homodyne_window: None,
            cutoffs: Cutoffs::Auto,
            ancilla_cutoff: DEFAULT_ANCILLA_CUTOFF,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn with_detector(mut self, detector: DetectorModel) -> Self {
        self.detector = detector;
        self
    }

    pub fn with_hadamard(mut self, hadamard: HadamardSettings) -> Self {
        self.hadamard = hadamard;
        self
    }

    pub fn with_cutoffs(mut self, cutoffs: Cutoffs) -> Self {
        self.cutoffs = cutoffs;
        self
    }

    pub fn transmissivity(&self) -> f64 {
        (1.0 - self.r * self.r).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CatError::InvalidArgument(msg));
        if !(self.alpha.re.is_finite() && self.alpha.im.is_finite()) || self.alpha.norm() == 0.0 {
            return bad(format!("alpha must be finite and nonzero, got {}", self.alpha));
        }
        if !self.phi.is_finite() {
            return bad(format!("phi must be finite, got {}", self.phi));
        }
        if !(self.r > 0.0 && self.r <= 0.5) {
            return bad(format!("tap reflectivity r must lie in (0, 0.5], got {}", self.r));
        }
        if self.ancilla_cutoff == 0 {
            return bad("ancilla cutoff must be at least 1".into());
        }
        if let Some(w) = self.homodyne_window {
            if !(w.is_finite() && w > 0.0) {
                return bad(format!("homodyne window half-width must be positive, got {w}"));
            }
        }
        if let Some(q) = self.homodyne_value {
            if !q.is_finite() {
                return bad(format!("homodyne value must be finite, got {q}"));
            }
        }
        if let Cutoffs::Manual(c) = &self.cutoffs {
            if c.len() != self.architecture.signal_modes() {
                return bad(format!(
                    "{} takes {} signal cutoffs, got {}",
                    self.architecture,
                    self.architecture.signal_modes(),
                    c.len()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneSetting {
    pub quadrature: Quadrature,
    pub value: f64,
    pub half_width: Option<f64>,
}

/// Requested joint-subtraction weight against the one realized by the tap
/// and mixing beam splitters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointWeightReport {
    pub requested: f64,
    pub achieved: f64,
    pub t_gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Top-level weight of each output mode.
    pub tail_masses: Vec<f64>,
    /// Signal-mode cutoffs used.
    pub cutoffs: Vec<usize>,
    pub ancilla_cutoff: usize,
    pub detector: DetectorModel,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub architecture: Architecture,
    pub params: SolvedParams,
    pub output: CircuitState,
    pub target: PureFockState,
    /// Product of all conditioning probabilities and densities.
    pub success_probability: f64,
    pub fidelity_vs_ideal: f64,
    /// Norm gain of the ideal coefficient map.
    pub conditional_norm_gain: f64,
    pub purity: f64,
    pub homodyne: Option<HomodyneSetting>,
    pub joint_weight: Option<JointWeightReport>,
    pub diagnostics: Diagnostics,
}

impl RunReport {
    pub fn tail_mass_max(&self) -> f64 {
        self.diagnostics.tail_masses.iter().copied().fold(0.0, f64::max)
    }

    /// Whether every conditioning step had a discrete outcome.
    pub fn is_discrete(&self) -> bool {
        self.homodyne.is_none_or(|h| h.half_width.is_some())
    }
}
