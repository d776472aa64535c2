//! Run configuration: `key = value` files with per-experiment sections,
//! layered under command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use copolymer::{DisorderLaw, Endpoint, ModelParams, Variant};
use serde::Serialize;

use crate::Command;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn field(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: Some(field.to_string()),
            line: None,
            message: message.into(),
        }
    }

    fn at_line(line: usize, message: impl Into<String>) -> Self {
        Self {
            field: None,
            line: Some(line),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.field) {
            (Some(l), Some(k)) => write!(f, "line {l}: `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "`{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Every accepted key with its base default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("lambda", "1", "coupling, >= 0"),
    ("h", "0.5", "asymmetry"),
    ("n", "200", "chain length, positive even"),
    ("endpoint", "free", "free | constrained"),
    ("variant", "copolymer", "copolymer | pinning"),
    ("law", "gaussian", "bernoulli | gaussian | uniform"),
    ("law2", "gaussian", "second law for check-interpolation"),
    ("n_grid", "40:400:40", "chain lengths, list or a:b:step"),
    ("m_grid", "2:40:2", "occupation levels checked by check-deloc-tail"),
    ("ell_grid", "4:128:4", "last-exit levels"),
    ("lambda_grid", "1", "couplings for critical-point, slope-origin, check-interpolation"),
    ("replicas", "200", "disorder replicas"),
    ("replica", "0", "disorder stream used by single-disorder commands"),
    ("seed", "1", "master seed"),
    ("out", "", "output root (default: $COPOLAB_OUT, else ./runs)"),
    ("enumeration_cap", "16", "largest N enumerated exhaustively"),
    ("spectrum_cap", "600", "largest N for the occupation spectrum"),
    ("workers", "0", "worker threads, 0 = available parallelism"),
    ("engine", "excursion", "partition engine: excursion | position | long | enumeration"),
    ("tol", "0.01", "bisection tolerance on h"),
    ("q_hat", "3", "interior tail cut m >= q_hat ln N"),
    ("m", "20", "occupation level for check-concentration"),
    ("lipschitz_trials", "1000", "perturbation trials for check-concentration"),
    ("v", "0.8", "h = v lambda in check-interpolation"),
    ("two_sided", "false", "also compute two-sided exit partitions"),
    ("q", "-0.2", "stretch level, q < h"),
    ("delta_prime", "0", "exponent slack in check-stretch"),
    ("max_len", "134217728", "disorder cap per replica in check-stretch"),
    ("draws", "10000", "skeletons drawn by sample-paths"),
];

/// Per-command defaults layered over [`KEYS`].
pub fn command_defaults(cmd: Command) -> &'static [(&'static str, &'static str)] {
    use Command::*;
    match cmd {
        GenDisorder => &[("replicas", "1")],
        Partition => &[("replicas", "1")],
        Spectrum | SamplePaths => &[],
        FreeEnergy => &[("law", "bernoulli")],
        CriticalPoint => &[
            ("law", "bernoulli"),
            ("endpoint", "constrained"),
            ("lambda_grid", "0.5,1,1.5"),
        ],
        SlopeOrigin => &[
            ("law", "bernoulli"),
            ("endpoint", "constrained"),
            ("lambda_grid", "0.1:0.5:0.1"),
            ("tol", "0.005"),
        ],
        CheckDelocTail => &[("h", "1.5")],
        CheckLastExit => &[("h", "1.5"), ("n", "400")],
        CheckConcentration => &[("n", "100")],
        CheckInterpolation => &[
            ("law", "bernoulli"),
            ("lambda_grid", "0.1:0.8:0.1"),
            ("replicas", "1000"),
        ],
        CheckStretch => &[
            ("law", "bernoulli"),
            ("lambda", "0.5"),
            ("h", "0.4"),
            ("n_grid", "1000,10000,100000"),
            ("replicas", "50"),
        ],
        CheckMeander => &[("h", "1.5"), ("n", "400")],
        CheckAnnealed => &[
            ("law", "bernoulli"),
            ("lambda", "0.6"),
            ("h", "0.3"),
            ("n", "40"),
            ("replicas", "10000"),
        ],
        OracleVerify => &[("n", "12"), ("replicas", "50")],
    }
}

fn known_key(k: &str) -> bool {
    KEYS.iter().any(|(name, _, _)| *name == k)
}

/// Raw layers of a config file: top-level keys and one map per section.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct ConfigFile {
    pub global: BTreeMap<String, (usize, String)>,
    pub sections: BTreeMap<String, BTreeMap<String, (usize, String)>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ConfigFile::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at_line(line_no, "unterminated section header"))?
                    .trim();
                if Command::from_name(name).is_none() {
                    return Err(ConfigError::at_line(line_no, format!("unknown section `{name}`")));
                }
                cfg.sections.entry(name.to_string()).or_default();
                section = Some(name.to_string());
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::at_line(line_no, "expected `key = value`"))?;
            let (k, v) = (k.trim().replace('-', "_"), v.trim().to_string());
            if !known_key(&k) {
                return Err(ConfigError {
                    field: Some(k),
                    line: Some(line_no),
                    message: "unknown key".into(),
                });
            }
            let map = match &section {
                Some(s) => cfg.sections.get_mut(s).expect("section inserted"),
                None => &mut cfg.global,
            };
            if map.insert(k.clone(), (line_no, v)).is_some() {
                return Err(ConfigError {
                    field: Some(k),
                    line: Some(line_no),
                    message: "duplicate key".into(),
                });
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::field("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Fully validated settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub experiment: String,
    pub lambda: f64,
    pub h: f64,
    pub n: usize,
    pub endpoint: Endpoint,
    pub variant: Variant,
    pub law: DisorderLaw,
    pub law2: DisorderLaw,
    pub n_grid: Vec<usize>,
    pub m_grid: Vec<usize>,
    pub ell_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub replicas: usize,
    pub replica: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub enumeration_cap: usize,
    pub spectrum_cap: usize,
    pub workers: usize,
    pub engine: String,
    pub tol: f64,
    pub q_hat: f64,
    pub m: usize,
    pub lipschitz_trials: usize,
    pub v: f64,
    pub two_sided: bool,
    pub q: f64,
    pub delta_prime: f64,
    pub max_len: usize,
    pub draws: usize,
}

impl RunConfig {
    /// Layers, lowest first: base defaults, command defaults, file top level,
    /// file section for `cmd`, then `overrides` (from flags).
    pub fn resolve(
        cmd: Command,
        file: Option<&ConfigFile>,
        overrides: &[(String, String)],
        env_out: Option<PathBuf>,
    ) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, (Option<usize>, String)> = KEYS
            .iter()
            .map(|(k, v, _)| (k.to_string(), (None, v.to_string())))
            .collect();
        for (k, v) in command_defaults(cmd) {
            values.insert(k.to_string(), (None, v.to_string()));
        }
        if let Some(f) = file {
            for (k, (l, v)) in &f.global {
                values.insert(k.clone(), (Some(*l), v.clone()));
            }
            if let Some(sec) = f.sections.get(cmd.name()) {
                for (k, (l, v)) in sec {
                    values.insert(k.clone(), (Some(*l), v.clone()));
                }
            }
        }
        for (k, v) in overrides {
            let k = k.replace('-', "_");
            if !known_key(&k) {
                return Err(ConfigError::field(&k, "unknown key"));
            }
            values.insert(k, (None, v.clone()));
        }
        let p = Parser { values: &values };
        let out = match p.raw("out") {
            "" => env_out.unwrap_or_else(|| PathBuf::from("runs")),
            s => PathBuf::from(s),
        };
        let cfg = RunConfig {
            experiment: cmd.name().to_string(),
            lambda: p.num("lambda")?,
            h: p.num("h")?,
            n: p.num("n")?,
            endpoint: p.parse_with("endpoint", str::parse::<Endpoint>)?,
            variant: p.parse_with("variant", str::parse::<Variant>)?,
            law: p.parse_with("law", str::parse::<DisorderLaw>)?,
            law2: p.parse_with("law2", str::parse::<DisorderLaw>)?,
            n_grid: p.grid_usize("n_grid")?,
            m_grid: p.grid_usize("m_grid")?,
            ell_grid: p.grid_usize("ell_grid")?,
            lambda_grid: p.grid_f64("lambda_grid")?,
            replicas: p.num("replicas")?,
            replica: p.num("replica")?,
            seed: p.num("seed")?,
            out,
            enumeration_cap: p.num("enumeration_cap")?,
            spectrum_cap: p.num("spectrum_cap")?,
            workers: p.num("workers")?,
            engine: p.parse_with("engine", |s| match s {
                "excursion" | "position" | "long" | "enumeration" => Ok(s.to_string()),
                _ => Err("expected excursion | position | long | enumeration"),
            })?,
            tol: p.num("tol")?,
            q_hat: p.num("q_hat")?,
            m: p.num("m")?,
            lipschitz_trials: p.num("lipschitz_trials")?,
            v: p.num("v")?,
            two_sided: p.num("two_sided")?,
            q: p.num("q")?,
            delta_prime: p.num("delta_prime")?,
            max_len: p.num("max_len")?,
            draws: p.num("draws")?,
        };
        cfg.validate().map_err(|(k, msg)| ConfigError {
            field: Some(k.to_string()),
            line: values[k].0,
            message: msg,
        })?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let must = |ok: bool, k: &'static str, msg: &str| if ok { Ok(()) } else { Err((k, msg.to_string())) };
        must(self.lambda.is_finite() && self.lambda >= 0.0, "lambda", "must satisfy lambda >= 0")?;
        must(self.h.is_finite(), "h", "must be finite")?;
        must(self.n > 0 && self.n % 2 == 0, "n", "must be positive and even")?;
        must(self.replicas >= 1, "replicas", "must be at least 1")?;
        must(self.tol > 0.0, "tol", "must be positive")?;
        must(self.q_hat > 0.0, "q_hat", "must be positive")?;
        must(self.q.is_finite(), "q", "must be finite")?;
        must(self.v.is_finite() && self.v >= 0.0, "v", "must satisfy v >= 0")?;
        must(self.delta_prime >= 0.0, "delta_prime", "must be >= 0")?;
        must(self.draws >= 1, "draws", "must be at least 1")?;
        for (k, g) in [("n_grid", &self.n_grid), ("ell_grid", &self.ell_grid)] {
            must(g.iter().all(|&x| x > 0 && x % 2 == 0), k, "entries must be positive and even")?;
            must(increasing(g), k, "must be strictly increasing")?;
        }
        must(increasing(&self.m_grid), "m_grid", "must be strictly increasing")?;
        must(
            self.lambda_grid.iter().all(|&l| l.is_finite() && l >= 0.0),
            "lambda_grid",
            "entries must satisfy lambda >= 0",
        )?;
        must(increasing(&self.lambda_grid), "lambda_grid", "must be strictly increasing")?;
        Ok(())
    }

    pub fn params(&self) -> Result<ModelParams, copolymer::Error> {
        match self.variant {
            Variant::Copolymer => ModelParams::copolymer(self.lambda, self.h, self.n, self.endpoint),
            Variant::Pinning => ModelParams::pinning(self.lambda, self.h, self.n, self.endpoint),
        }
    }
}

fn increasing<T: PartialOrd>(g: &[T]) -> bool {
    !g.is_empty() && g.windows(2).all(|w| w[0] < w[1])
}

struct Parser<'a> {
    values: &'a BTreeMap<String, (Option<usize>, String)>,
}

impl Parser<'_> {
    fn raw(&self, k: &str) -> &str {
        &self.values[k].1
    }

    fn err(&self, k: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError {
            field: Some(k.to_string()),
            line: self.values[k].0,
            message: msg.into(),
        }
    }

    fn parse_with<T, E: fmt::Display>(&self, k: &str, f: impl Fn(&str) -> Result<T, E>) -> Result<T, ConfigError> {
        let v = self.raw(k);
        f(v).map_err(|e| self.err(k, format!("cannot parse `{v}`: {e}")))
    }

    fn num<T: std::str::FromStr>(&self, k: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.parse_with(k, str::parse::<T>)
    }

    fn grid_usize(&self, k: &str) -> Result<Vec<usize>, ConfigError> {
        self.parse_with(k, parse_grid_usize)
    }

    fn grid_f64(&self, k: &str) -> Result<Vec<f64>, ConfigError> {
        self.parse_with(k, parse_grid_f64)
    }
}

/// Comma-separated items, each a number or an inclusive range `a:b:step`.
pub fn parse_grid_usize(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
        match parts.as_slice() {
            [x] => out.push(num(x)?),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if step == 0 || b < a {
                    return Err(format!("bad range `{item}`"));
                }
                out.extend((a..=b).step_by(step));
            }
            _ => return Err(format!("bad grid item `{item}`, expected x or a:b:step")),
        }
    }
    Ok(out)
}

/// As [`parse_grid_usize`]; ranges include `b` up to a relative slack of 1e-9 steps.
pub fn parse_grid_f64(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
        match parts.as_slice() {
            [x] => out.push(num(x)?),
            [a, b, step] => {
                let (a, b, step) = (num(a)?, num(b)?, num(step)?);
                if !(step > 0.0) || b < a {
                    return Err(format!("bad range `{item}`"));
                }
                let k = ((b - a) / step + 1e-9).floor() as usize;
                // round to suppress accumulated binary noise in e.g. 0.1 * 3
                out.extend((0..=k).map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12));
            }
            _ => return Err(format!("bad grid item `{item}`, expected x or a:b:step")),
        }
    }
    Ok(out)
}

pub fn defaults_help() -> String {
    let mut s = String::from("Configuration keys (file `key = value`, or --set key=value); base defaults:\n");
    for (k, v, d) in KEYS {
        let v = if v.is_empty() { "-" } else { v };
        s.push_str(&format!("  {k:<17} {v:<18} {d}\n"));
    }
    s.push_str("\nPer-command defaults override the base:\n");
    for cmd in Command::ALL {
        let d = command_defaults(cmd);
        if !d.is_empty() {
            let items: Vec<String> = d.iter().map(|(k, v)| format!("{k}={v}")).collect();
            s.push_str(&format!("  {:<20} {}\n", cmd.name(), items.join(" ")));
        }
    }
    s.push_str(
        "\nA config file may contain `[command-name]` sections whose keys apply only to that\n\
         command. Flags override the file. Exit status: 0 ok, 2 invalid configuration,\n\
         3 experiment failed or check did not pass, 4 budget exceeded, 1 i/o error.\n",
    );
    s
}
