//! CSV rows and the human-readable run report.

use std::fmt::Write as _;
use std::io;

use catgate_core::designs::{JointSubtraction, SolvedParams};
use catgate_core::physical::{Architecture, CircuitSpec, RunReport};
use catgate_core::{CatError, C64};

pub const HEADER: [&str; 12] = [
    "architecture",
    "alpha",
    "phi",
    "r",
    "Gamma",
    "q",
    "detector_model",
    "success_probability",
    "fidelity",
    "conditional_norm_gain",
    "tail_mass_max",
    "status",
];

/// Twelve significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}

/// Real amplitudes print as a number, complex ones as `re+imi`.
pub fn complex(z: C64) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else {
        format!("{}{}{}i", num(z.re), if z.im < 0.0 { "" } else { "+" }, num(z.im))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow(pub [String; 12]);

impl CsvRow {
    pub fn new(spec: &CircuitSpec, outcome: &Result<RunReport, CatError>) -> Self {
        let hadamard = matches!(spec.architecture, Architecture::HadamardFig4 | Architecture::HadamardExact);
        let phi = if hadamard { String::new() } else { num(spec.phi) };
        let requested_gamma = match spec.architecture {
            Architecture::HadamardFig4 => spec
                .hadamard
                .weight
                .and_then(|w| JointSubtraction::resolve(w).ok())
                .map(|j| num(j.gamma))
                .unwrap_or_default(),
            _ => String::new(),
        };
        let mut cells = [
            spec.architecture.to_string(),
            complex(spec.alpha),
            phi,
            num(spec.r),
            requested_gamma,
            String::new(),
            spec.detector.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ];
        match outcome {
            Ok(rep) => {
                if let Some(h) = rep.homodyne {
                    cells[5] = num(h.value);
                }
                cells[7] = num(rep.success_probability);
                cells[8] = num(rep.fidelity_vs_ideal);
                cells[9] = num(rep.conditional_norm_gain);
                cells[10] = num(rep.tail_mass_max());
                cells[11] = "ok".into();
            }
            Err(e) => cells[11] = format!("error: {e}"),
        }
        CsvRow(cells)
    }
}

pub fn write_csv<W: io::Write>(w: W, rows: &[CsvRow], header: bool) -> io::Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    if header {
        wr.write_record(HEADER)?;
    }
    for row in rows {
        wr.write_record(&row.0)?;
    }
    wr.flush()
}

fn fmt_c(z: C64) -> String {
    format!("{:.9}{:+.9}i", z.re, z.im)
}

pub fn describe_params(params: &SolvedParams) -> String {
    let mut s = String::new();
    match params {
        SolvedParams::Phase(p) => {
            let _ = writeln!(s, "gamma      = {}", fmt_c(p.gamma));
            let _ = writeln!(s, "residual   = {:.3e}", p.residual());
        }
        SolvedParams::CPhase(p) => {
            let _ = writeln!(s, "gamma1     = {}", fmt_c(p.gamma1));
            let _ = writeln!(s, "gamma2     = {}", fmt_c(p.gamma2));
            let _ = writeln!(s, "sum residual     = {:.3e}", p.sum_residual());
            let _ = writeln!(s, "product residual = {:.3e}", p.product_residual());
        }
        SolvedParams::Hadamard(p) => {
            let _ = writeln!(s, "variant    = {}", p.variant);
            let _ = writeln!(s, "alpha      = {}", p.alpha);
            let _ = writeln!(s, "beta       = {}", p.beta);
            if let Some(j) = p.joint {
                let _ = writeln!(s, "Gamma      = {}", j.gamma);
                let _ = writeln!(s, "t_Gamma    = {}", j.t_gamma);
            }
            match p.projection {
                catgate_core::designs::Projection::Homodyne { quadrature, value } => {
                    let _ = writeln!(s, "projection = <{quadrature} = {value:.12}|");
                }
                catgate_core::designs::Projection::Fock(n) => {
                    let _ = writeln!(s, "projection = <{n}|");
                }
            }
            if let Some(res) = p.condition_residual() {
                let _ = writeln!(s, "condition residual = {res:.3e}");
            }
            if let Some(res) = p.symmetry_residual() {
                let _ = writeln!(s, "symmetry residual  = {res:.3e}");
            }
            if let Some(e) = p.first_order_error() {
                let _ = writeln!(s, "first-order error  = {e:.6}");
            }
        }
    }
    s
}

pub fn render_report(rep: &RunReport) -> String {
    let mut s = format!("architecture        {}\n", rep.architecture);
    for line in describe_params(&rep.params).lines() {
        let _ = writeln!(s, "  {line}");
    }
    let _ = writeln!(s, "detector            {}", rep.diagnostics.detector);
    let _ = writeln!(s, "success probability {:.6e}", rep.success_probability);
    let _ = writeln!(s, "fidelity            {:.10}", rep.fidelity_vs_ideal);
    let _ = writeln!(s, "norm gain (ideal)   {:.6}", rep.conditional_norm_gain);
    let _ = writeln!(s, "purity              {:.10}", rep.purity);
    if let Some(h) = rep.homodyne {
        let window = h.half_width.map(|w| format!(" +/- {w}")).unwrap_or_default();
        let _ = writeln!(s, "homodyne            {} = {:.10}{window}", h.quadrature, h.value);
    }
    if let Some(j) = rep.joint_weight {
        let _ = writeln!(s, "Gamma               requested {:.6}, achieved {:.6} (t_Gamma {:.6})", j.requested, j.achieved, j.t_gamma);
    }
    let _ = writeln!(
        s,
        "cutoffs             {:?} (ancilla {})",
        rep.diagnostics.cutoffs, rep.diagnostics.ancilla_cutoff
    );
    let _ = writeln!(s, "tail mass           {:?}", rep.diagnostics.tail_masses.iter().map(|t| format!("{t:.2e}")).collect::<Vec<_>>());
    s
}
