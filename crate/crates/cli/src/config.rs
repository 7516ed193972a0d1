//! Flat TOML experiment configuration.
//!
//! ```toml
//! gate = "cphase_fig2"        # or phase | cphase | hadamard and the other architecture names
//! alpha = 1.0                 # number or [re, im]
//! phi = "pi/2"                # "pi", "pi/2", "-3pi/4" or radians
//! r = 0.05
//! detector_model = "fock1"    # fock1 | onoff
//! c11 = 1.0                   # qubit gates take x and y instead
//! c10 = 1.0
//! c01 = 1.0
//! c00 = 1.0
//! sweep_axis = "r"
//! sweep_values = [0.2, 0.1, 0.05]
//! out = "results.csv"
//! ```

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use catgate_core::coherent::{CoherentQubit, CoherentRegister};
use catgate_core::designs::{CoherentInput, JointWeight};
use catgate_core::fock::Tolerances;
use catgate_core::physical::{Architecture, CircuitSpec, Cutoffs, DetectorModel, SweepAxis};
use catgate_core::C64;
use toml::{Table, Value};

pub const KEYS: &[&str] = &[
    "gate",
    "alpha",
    "phi",
    "r",
    "Gamma",
    "t_Gamma",
    "beta",
    "even_fock",
    "detector_model",
    "homodyne_q",
    "homodyne_window",
    "x",
    "y",
    "c11",
    "c10",
    "c01",
    "c00",
    "cutoffs",
    "ancilla_cutoff",
    "sweep_axis",
    "sweep_values",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " in field '{field}'")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: CircuitSpec,
    pub input: CoherentInput,
    pub sweep: Option<(SweepAxis, Vec<f64>)>,
    pub out: Option<PathBuf>,
}

/// Parses `"pi"`, `"pi/2"`, `"-pi/4"`, `"3pi/4"`, `"3*pi/4"` or plain radians.
pub fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok().filter(|d| *d != 0.0)?),
        None => (s, 1.0),
    };
    let coeff = num.strip_suffix("pi")?.trim().trim_end_matches('*').trim();
    let k = match coeff {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().ok()?,
    };
    let v = k * PI / den;
    v.is_finite().then_some(v)
}

struct Reader<'a> {
    text: &'a str,
    table: Table,
}

impl<'a> Reader<'a> {
    fn line_of(&self, key: &str) -> Option<usize> {
        self.text.lines().position(|l| {
            l.trim_start()
                .strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            field: Some(key.to_string()),
            line: self.line_of(key),
            message: message.into(),
        }
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some(v) = self.table.get(key) else { return Ok(None) };
        let x = match v {
            Value::Float(f) => *f,
            Value::Integer(i) => *i as f64,
            _ => return Err(self.err(key, "expected a number")),
        };
        if !x.is_finite() {
            return Err(self.err(key, "must be finite"));
        }
        Ok(Some(x))
    }

    fn angle(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => parse_angle(s)
                .map(Some)
                .ok_or_else(|| self.err(key, format!("cannot read '{s}' as an angle (use pi, pi/2 or radians)"))),
            Some(_) => self.real(key),
        }
    }

    fn complex(&self, key: &str) -> Result<Option<C64>, ConfigError> {
        let Some(v) = self.table.get(key) else { return Ok(None) };
        let num = |v: &Value| match v {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => None,
        };
        let z = match v {
            Value::Array(a) if a.len() == 2 => match (num(&a[0]), num(&a[1])) {
                (Some(re), Some(im)) => C64::new(re, im),
                _ => return Err(self.err(key, "expected [re, im] with numeric entries")),
            },
            other => match num(other) {
                Some(re) => C64::new(re, 0.0),
                None => return Err(self.err(key, "expected a number or [re, im]")),
            },
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(self.err(key, "must be finite"));
        }
        Ok(Some(z))
    }

    fn string(&self, key: &str) -> Result<Option<&str>, ConfigError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(self.err(key, "expected a string")),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
            Some(_) => Err(self.err(key, "expected a nonnegative integer")),
        }
    }
}

fn architecture(name: &str) -> Option<Architecture> {
    match name.trim() {
        "phase" => Some(Architecture::PhaseFig1),
        "cphase" => Some(Architecture::CPhaseFig2),
        "hadamard" => Some(Architecture::HadamardFig4),
        other => other.parse().ok(),
    }
}

/// Parses and validates a configuration file's text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        field: None,
        line: e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1),
        message: e.message().to_string(),
    })?;
    let rd = Reader { text, table };
    if let Some(unknown) = rd.table.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(rd.err(unknown, "unknown field"));
    }

    let gate = rd.string("gate")?.ok_or_else(|| rd.err("gate", "missing required field"))?;
    let arch = architecture(gate).ok_or_else(|| {
        rd.err(
            "gate",
            format!("unknown gate '{gate}' (phase, cphase, hadamard, phase_fig1, cphase_fig2, cphase_fig3, hadamard_fig4, hadamard_exact)"),
        )
    })?;
    let alpha = rd.complex("alpha")?.ok_or_else(|| rd.err("alpha", "missing required field"))?;
    if alpha.norm() == 0.0 {
        return Err(rd.err("alpha", "must be nonzero"));
    }
    let mut spec = CircuitSpec::new(arch, alpha);

    let hadamard = matches!(arch, Architecture::HadamardFig4 | Architecture::HadamardExact);
    match rd.angle("phi")? {
        Some(phi) => spec.phi = phi,
        None if !hadamard => return Err(rd.err("phi", "missing required field")),
        None => {}
    }
    if let Some(r) = rd.real("r")? {
        if !(r > 0.0 && r <= 0.5) {
            return Err(rd.err("r", format!("tap reflectivity must lie in (0, 0.5], got {r}")));
        }
        spec.r = r;
    }
    if let Some(d) = rd.string("detector_model")? {
        spec.detector = d.parse::<DetectorModel>().map_err(|e| rd.err("detector_model", e))?;
    }

    let sweep = match (rd.string("sweep_axis")?, rd.table.get("sweep_values")) {
        (None, None) => None,
        (Some(_), None) => return Err(rd.err("sweep_values", "sweep_axis given without sweep_values")),
        (None, Some(_)) => return Err(rd.err("sweep_axis", "sweep_values given without sweep_axis")),
        (Some(axis), Some(values)) => {
            let axis: SweepAxis = axis.parse().map_err(|e| rd.err("sweep_axis", e))?;
            let Value::Array(items) = values else {
                return Err(rd.err("sweep_values", "expected an array"));
            };
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                let v = match item {
                    Value::Float(f) => Some(*f),
                    Value::Integer(i) => Some(*i as f64),
                    Value::String(s) if axis == SweepAxis::Phi => parse_angle(s),
                    _ => None,
                };
                match v {
                    Some(v) if v.is_finite() => out.push(v),
                    _ => return Err(rd.err("sweep_values", format!("cannot read {item} as a finite number"))),
                }
            }
            Some((axis, out))
        }
    };

    match (rd.real("Gamma")?, rd.real("t_Gamma")?) {
        (Some(_), Some(_)) => return Err(rd.err("t_Gamma", "give exactly one of Gamma and t_Gamma")),
        (Some(g), None) => spec.hadamard.weight = Some(JointWeight::Gamma(g)),
        (None, Some(t)) => spec.hadamard.weight = Some(JointWeight::Transmissivity(t)),
        (None, None) => {
            let swept = matches!(sweep, Some((SweepAxis::Gamma, _)));
            if arch == Architecture::HadamardFig4 && !swept {
                return Err(rd.err("Gamma", "approximate Hadamard needs one of Gamma and t_Gamma"));
            }
        }
    }
    spec.hadamard.beta = rd.real("beta")?;
    spec.hadamard.even_fock = rd.count("even_fock")?;
    spec.homodyne_value = rd.real("homodyne_q")?;
    if let Some(w) = rd.real("homodyne_window")? {
        if w <= 0.0 {
            return Err(rd.err("homodyne_window", "half-width must be positive"));
        }
        spec.homodyne_window = Some(w);
    }
    if let Some(n) = rd.count("ancilla_cutoff")? {
        spec.ancilla_cutoff = n;
    }
    spec.cutoffs = match rd.table.get("cutoffs") {
        None => Cutoffs::Auto,
        Some(Value::String(s)) if s == "auto" => Cutoffs::Auto,
        Some(Value::Array(a)) => {
            let parsed: Option<Vec<usize>> = a
                .iter()
                .map(|v| v.as_integer().filter(|i| *i > 0).map(|i| i as usize))
                .collect();
            let c = parsed.ok_or_else(|| rd.err("cutoffs", "expected positive integers"))?;
            if c.len() != arch.signal_modes() {
                return Err(rd.err(
                    "cutoffs",
                    format!("{arch} takes {} signal cutoffs, got {}", arch.signal_modes(), c.len()),
                ));
            }
            Cutoffs::Manual(c)
        }
        Some(_) => return Err(rd.err("cutoffs", "expected \"auto\" or a list of integers")),
    };

    let input = read_input(&rd, &spec)?;
    let out = rd.string("out")?.map(PathBuf::from);
    spec.validate().map_err(|e| ConfigError {
        field: None,
        line: None,
        message: e.to_string(),
    })?;
    Ok(ExperimentConfig { spec, input, sweep, out })
}

fn read_input(rd: &Reader<'_>, spec: &CircuitSpec) -> Result<CoherentInput, ConfigError> {
    let zero = C64::new(0.0, 0.0);
    let all_zero = |cs: &[C64]| cs.iter().all(|c| c.norm() == 0.0);
    match spec.architecture {
        Architecture::CPhaseFig2 | Architecture::CPhaseFig3 => {
            let keys = ["c11", "c10", "c01", "c00"];
            if !keys.iter().any(|k| rd.has(k)) {
                return Err(rd.err("c11", "two-mode gates need input coefficients c11, c10, c01, c00"));
            }
            let mut cs = Vec::with_capacity(4);
            for k in keys {
                cs.push(rd.complex(k)?.unwrap_or(zero));
            }
            if all_zero(&cs) {
                return Err(rd.err("c11", "input coefficients are all zero"));
            }
            let reg = CoherentRegister::two_mode(spec.alpha, cs[0], cs[1], cs[2], cs[3])
                .map_err(|e| rd.err("c11", e.to_string()))?;
            Ok(CoherentInput::Register(reg))
        }
        _ => {
            if !rd.has("x") && !rd.has("y") {
                return Err(rd.err("x", "single-qubit gates need input coefficients x and y"));
            }
            let x = rd.complex("x")?.unwrap_or(zero);
            let y = rd.complex("y")?.unwrap_or(zero);
            if all_zero(&[x, y]) {
                return Err(rd.err("x", "input coefficients are all zero"));
            }
            // the approximate Hadamard displaces an input of amplitude β/2 to β
            let amp = match (spec.architecture, spec.hadamard.beta) {
                (Architecture::HadamardFig4, Some(beta)) => C64::new(beta / 2.0, 0.0),
                _ => spec.alpha,
            };
            Ok(CoherentInput::Qubit(CoherentQubit::new(amp, x, y)))
        }
    }
}

/// Tensor size cap from `CATGATE_DIM_LIMIT`, if set.
pub fn dim_limit_from_env() -> Result<Option<usize>, ConfigError> {
    match std::env::var("CATGATE_DIM_LIMIT") {
        Err(_) => Ok(None),
        Ok(s) => s.trim().parse::<usize>().ok().filter(|n| *n > 0).map(Some).ok_or(ConfigError {
            field: Some("CATGATE_DIM_LIMIT".into()),
            line: None,
            message: format!("expected a positive integer, got '{s}'"),
        }),
    }
}

pub fn apply_dim_limit(tol: &mut Tolerances, limit: Option<usize>) {
    if let Some(n) = limit {
        tol.max_dim = n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PHASE: &str = "gate = \"phase\"\nalpha = 1.0\nphi = \"pi/2\"\nr = 0.05\nx = 1.0\ny = [0.0, 1.0]\n";

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("pi/2"), Some(PI / 2.0));
        assert_eq!(parse_angle("-pi/4"), Some(-PI / 4.0));
        assert_eq!(parse_angle("3pi/4"), Some(3.0 * PI / 4.0));
        assert_eq!(parse_angle("3*pi/4"), Some(3.0 * PI / 4.0));
        assert_eq!(parse_angle(" 1.25 "), Some(1.25));
        assert_eq!(parse_angle("pi/0"), None);
        assert_eq!(parse_angle("tau"), None);
    }

    #[test]
    fn phase_config() {
        let c = parse_config(PHASE).unwrap();
        assert_eq!(c.spec.architecture, Architecture::PhaseFig1);
        assert_eq!(c.spec.phi, PI / 2.0);
        let CoherentInput::Qubit(q) = c.input else { panic!() };
        assert_eq!(q.y(), C64::new(0.0, 1.0));
        assert!(c.sweep.is_none() && c.out.is_none());
    }

    #[test]
    fn missing_alpha_names_the_field() {
        let text = PHASE.replace("alpha = 1.0\n", "");
        let e = parse_config(&text).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("alpha"));
        assert!(e.to_string().contains("alpha"));
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_config(&PHASE.replace("r = 0.05", "r = 0.9")).unwrap_err();
        assert_eq!((e.field.as_deref(), e.line), (Some("r"), Some(4)));
        let e = parse_config(&PHASE.replace("r = 0.05", "r = = 1")).unwrap_err();
        assert_eq!(e.line, Some(4));
        let e = parse_config(&format!("{PHASE}colour = 1\n")).unwrap_err();
        assert_eq!(e.field.as_deref(), Some("colour"));
    }

    #[test]
    fn joint_weight_rules() {
        let base = "gate = \"hadamard\"\nalpha = 1\nx = 1\n";
        assert_eq!(parse_config(base).unwrap_err().field.as_deref(), Some("Gamma"));
        let both = format!("{base}Gamma = 0.1\nt_Gamma = 0.1\n");
        assert!(parse_config(&both).is_err());
        let t = parse_config(&format!("{base}t_Gamma = 0.6\n")).unwrap();
        assert_eq!(t.spec.hadamard.weight, Some(JointWeight::Transmissivity(0.6)));
        let swept = format!("{base}sweep_axis = \"Gamma\"\nsweep_values = [0.2, 0.1]\n");
        assert!(parse_config(&swept).is_ok());
    }

    #[test]
    fn register_and_sweep() {
        let text = "gate = \"cphase_fig3\"\nalpha = 1\nphi = \"pi\"\nc00 = 1\nsweep_axis = \"r\"\nsweep_values = [0.2, 0.1]\ncutoffs = [20, 20]\nout = \"a.csv\"\n";
        let c = parse_config(text).unwrap();
        let CoherentInput::Register(r) = &c.input else { panic!() };
        assert_eq!(r.coeffs()[0], C64::new(1.0, 0.0));
        assert_eq!(c.sweep, Some((SweepAxis::R, vec![0.2, 0.1])));
        assert_eq!(c.spec.cutoffs, Cutoffs::Manual(vec![20, 20]));
        let zero = text.replace("c00 = 1", "c00 = 0");
        assert!(parse_config(&zero).is_err());
    }
}
