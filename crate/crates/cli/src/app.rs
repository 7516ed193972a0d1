//! Subcommand dispatch and exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | I/O failure (reading the config, writing CSV) |
//! | 2 | solver error (degenerate phase, infeasible condition) |
//! | 3 | configuration or usage error |
//! | 4 | simulation error (cutoff, size limit); rows are still written |
//! | 5 | validation failure |

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use catgate_core::designs::{
    solve_cphase_gammas, solve_hadamard, solve_phase_gamma, HadamardRequest, HadamardVariant, JointWeight,
    SolvedParams,
};
use catgate_core::physical::{simulate, sweep, DetectorModel};
use catgate_core::{CatError, C64};
use clap::{Args, Parser, Subcommand};

use crate::config::{apply_dim_limit, dim_limit_from_env, parse_angle, parse_config, ExperimentConfig};
use crate::output::{describe_params, render_report, write_csv, CsvRow};
use crate::validate::{run_group, Group};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_SIMULATION: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "catgate", version, about = "Gates on coherent-state qubits: solve, simulate, sweep, validate")]
pub struct Cli {
    /// Suppress human-readable output.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve gate parameters and print the constraint residuals.
    Solve {
        #[command(subcommand)]
        gate: SolveGate,
    },
    /// Run one simulation from a config file.
    Run(RunArgs),
    /// Run the sweep described in a config file.
    Sweep(RunArgs),
    /// Run the cross-layer invariant suite.
    Validate {
        /// Run a single group: solvers, ideal, equivalence, operators, convergence.
        #[arg(long)]
        group: Option<String>,
        /// Replace every built-in threshold.
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// CSV output path; overrides `out` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Detector model: onoff or fock1.
    #[arg(long)]
    pub detector: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum SolveGate {
    Phase {
        /// Amplitude, e.g. 1 or 1+0.5i.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Angle: pi, pi/2 or radians.
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
    },
    Cphase {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
    },
    Hadamard {
        #[arg(long)]
        alpha: f64,
        /// Displaced input amplitude (default 2 alpha).
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long = "gamma", visible_alias = "Gamma")]
        gamma: Option<f64>,
        #[arg(long = "t-gamma", visible_alias = "t_Gamma")]
        t_gamma: Option<f64>,
        /// approx, exact_homodyne_p, exact_even_fock or exact_even_fock(n).
        #[arg(long, default_value = "approx")]
        variant: String,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
    quiet: bool,
}

impl Io<'_> {
    fn say(&mut self, text: &str) {
        if !self.quiet {
            let _ = self.out.write_all(text.as_bytes());
        }
    }

    fn fail(&mut self, code: i32, msg: impl std::fmt::Display) -> i32 {
        let _ = writeln!(self.err, "catgate: {msg}");
        code
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(shown.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(shown.as_bytes());
                    EXIT_CONFIG
                }
            };
        }
    };
    let mut io = Io {
        out,
        err,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Solve { gate } => cmd_solve(&gate, &mut io),
        Command::Run(args) => cmd_run(&args, false, &mut io),
        Command::Sweep(args) => cmd_run(&args, true, &mut io),
        Command::Validate { group, tolerance } => cmd_validate(group.as_deref(), tolerance, &mut io),
    }
}

fn solver_code(e: &CatError) -> i32 {
    match e {
        CatError::InvalidArgument(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn parse_alpha(s: &str) -> Result<C64, String> {
    s.trim()
        .parse::<C64>()
        .ok()
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .ok_or_else(|| format!("cannot read alpha '{s}' (use e.g. 1, -0.5 or 1+0.5i)"))
}

fn cmd_solve(gate: &SolveGate, io: &mut Io<'_>) -> i32 {
    let solved = match gate {
        SolveGate::Phase { alpha, phi } | SolveGate::Cphase { alpha, phi } => {
            let alpha = match parse_alpha(alpha) {
                Ok(a) => a,
                Err(m) => return io.fail(EXIT_CONFIG, m),
            };
            let Some(phi) = parse_angle(phi) else {
                return io.fail(EXIT_CONFIG, format!("cannot read phi '{phi}' (use pi, pi/2 or radians)"));
            };
            if matches!(gate, SolveGate::Phase { .. }) {
                solve_phase_gamma(alpha, phi).map(SolvedParams::Phase)
            } else {
                solve_cphase_gammas(alpha, phi).map(SolvedParams::CPhase)
            }
        }
        SolveGate::Hadamard {
            alpha,
            beta,
            gamma,
            t_gamma,
            variant,
        } => {
            let variant: HadamardVariant = match variant.parse() {
                Ok(v) => v,
                Err(m) => return io.fail(EXIT_CONFIG, m),
            };
            let weight = match (gamma, t_gamma) {
                (Some(_), Some(_)) => return io.fail(EXIT_CONFIG, "give exactly one of --gamma and --t-gamma"),
                (Some(g), None) => Some(JointWeight::Gamma(*g)),
                (None, Some(t)) => Some(JointWeight::Transmissivity(*t)),
                (None, None) => None,
            };
            solve_hadamard(&HadamardRequest {
                alpha: *alpha,
                beta: beta.unwrap_or(2.0 * alpha),
                weight,
                variant,
            })
            .map(SolvedParams::Hadamard)
        }
    };
    match solved {
        Ok(p) => {
            io.say(&describe_params(&p));
            EXIT_OK
        }
        Err(e) => io.fail(solver_code(&e), e),
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, (i32, String)> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| (EXIT_IO, format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text).map_err(|e| (EXIT_CONFIG, format!("{}: {e}", args.config.display())))?;
    if let Some(d) = &args.detector {
        cfg.spec.detector = d.parse::<DetectorModel>().map_err(|m| (EXIT_CONFIG, m))?;
    }
    let limit = dim_limit_from_env().map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    apply_dim_limit(&mut cfg.spec.tolerances, limit);
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    Ok(cfg)
}

fn append_rows(path: &Path, rows: &[CsvRow]) -> io::Result<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    write_csv(file, rows, fresh)
}

fn cmd_run(args: &RunArgs, is_sweep: bool, io: &mut Io<'_>) -> i32 {
    let cfg = match load(args) {
        Ok(c) => c,
        Err((code, m)) => return io.fail(code, m),
    };
    let started = Instant::now();
    let (rows, failures) = if is_sweep {
        let Some((axis, values)) = &cfg.sweep else {
            return io.fail(EXIT_CONFIG, "sweep needs sweep_axis and sweep_values in the config");
        };
        let points = sweep(&cfg.spec, &cfg.input, *axis, values);
        let rows: Vec<CsvRow> = points.iter().map(|p| CsvRow::new(&p.spec, &p.outcome)).collect();
        let failures: Vec<String> = points
            .iter()
            .filter_map(|p| p.outcome.as_ref().err().map(|e| format!("{axis} = {}: {e}", p.value)))
            .collect();
        (rows, failures)
    } else {
        let outcome = simulate(&cfg.spec, &cfg.input);
        if let Ok(rep) = &outcome {
            io.say(&render_report(rep));
        }
        let failures = outcome.as_ref().err().map(|e| e.to_string()).into_iter().collect();
        (vec![CsvRow::new(&cfg.spec, &outcome)], failures)
    };

    let written = match &cfg.out {
        // sweeps rewrite their file; single runs append a row
        Some(path) if is_sweep => fs::File::create(path).and_then(|f| write_csv(f, &rows, true)),
        Some(path) => append_rows(path, &rows),
        None if is_sweep => write_csv(&mut *io.out, &rows, true),
        None => Ok(()),
    };
    if let Err(e) = written {
        return io.fail(EXIT_IO, format!("cannot write CSV: {e}"));
    }
    if is_sweep && cfg.out.is_some() {
        io.say(&format!("{} rows in {:.1?}\n", rows.len(), started.elapsed()));
    }
    if failures.is_empty() {
        EXIT_OK
    } else {
        for f in &failures {
            let _ = writeln!(io.err, "catgate: simulation failed: {f}");
        }
        EXIT_SIMULATION
    }
}

fn cmd_validate(group: Option<&str>, tolerance: Option<f64>, io: &mut Io<'_>) -> i32 {
    let groups = match group {
        None => Group::ALL.to_vec(),
        Some(name) => match name.parse::<Group>() {
            Ok(g) => vec![g],
            Err(m) => return io.fail(EXIT_CONFIG, m),
        },
    };
    if let Some(t) = tolerance {
        if !(t >= 0.0) {
            return io.fail(EXIT_CONFIG, format!("tolerance must be nonnegative, got {t}"));
        }
    }
    let mut all_ok = true;
    for g in groups {
        let started = Instant::now();
        let checks = run_group(g, tolerance);
        let ok = checks.iter().all(|c| c.passed());
        all_ok &= ok;
        let mut text = format!("[{}] {g} ({:.1?})\n", if ok { "PASS" } else { "FAIL" }, started.elapsed());
        for c in &checks {
            text.push_str(&format!(
                "    {} {}: measured {:.3e}, tolerance {:.1e}{}\n",
                if c.passed() { "ok  " } else { "FAIL" },
                c.name,
                c.measured,
                c.tolerance,
                c.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default()
            ));
        }
        // failures are shown even with --quiet
        if ok {
            io.say(&text);
        } else {
            let _ = io.out.write_all(text.as_bytes());
        }
    }
    if all_ok {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    }
}
