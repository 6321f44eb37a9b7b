//! Optional TOML configuration file and the flag/config/default merge.
//!
//! The file is a flat key = value table; command-line flags override its
//! keys, and keys irrelevant to the invoked subcommand are ignored (so one
//! file can drive a whole study). Unknown keys are rejected to catch typos.

use std::fs;
use std::path::Path;

use gha_coherent::powerlaw::Exponent;
use num_complex::Complex64;

/// Parsed configuration file. Every field is optional; `None` means "not
/// set", letting the merge fall through to the flag default.
#[derive(Debug, Default)]
pub struct FileConfig {
    pub k: Option<Vec<Exponent>>,
    pub gamma: Option<f64>,
    pub v0: Option<f64>,
    pub a: Option<f64>,
    pub mass: Option<f64>,
    pub physical: Option<bool>,
    pub z: Option<String>,
    pub log_grid: Option<bool>,
    pub rel_tol: Option<f64>,
    pub max_terms: Option<usize>,
    pub tol: Option<f64>,
    pub n_max: Option<usize>,
    pub weight: Option<Vec<String>>,
    pub output: Option<String>,
    pub format: Option<String>,
    pub emit_plot_script: Option<bool>,
    pub threads: Option<usize>,
}

const KNOWN_KEYS: &[&str] = &[
    "k",
    "gamma",
    "v0",
    "a",
    "mass",
    "physical",
    "z",
    "log_grid",
    "rel_tol",
    "max_terms",
    "tol",
    "n_max",
    "weight",
    "output",
    "format",
    "emit_plot_script",
    "threads",
];

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("config file {}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let table: toml::Table = text.parse().map_err(|e| format!("invalid TOML: {e}"))?;
        for key in table.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!(
                    "unknown key '{key}' (known keys: {})",
                    KNOWN_KEYS.join(", ")
                ));
            }
        }
        let mut cfg = FileConfig::default();
        if let Some(v) = table.get("k") {
            cfg.k = Some(parse_k_value(v)?);
        }
        cfg.gamma = opt_f64(&table, "gamma")?;
        cfg.v0 = opt_f64(&table, "v0")?;
        cfg.a = opt_f64(&table, "a")?;
        cfg.mass = opt_f64(&table, "mass")?;
        cfg.physical = opt_bool(&table, "physical")?;
        cfg.z = opt_string(&table, "z")?;
        cfg.log_grid = opt_bool(&table, "log_grid")?;
        cfg.rel_tol = opt_f64(&table, "rel_tol")?;
        cfg.max_terms = opt_usize(&table, "max_terms")?;
        cfg.tol = opt_f64(&table, "tol")?;
        cfg.n_max = opt_usize(&table, "n_max")?;
        if let Some(v) = table.get("weight") {
            cfg.weight = Some(parse_string_list(v, "weight")?);
        }
        cfg.output = opt_string(&table, "output")?;
        cfg.format = opt_string(&table, "format")?;
        cfg.emit_plot_script = opt_bool(&table, "emit_plot_script")?;
        cfg.threads = opt_usize(&table, "threads")?;
        Ok(cfg)
    }
}

/// `k` accepts a number, the string "inf", or an array of either.
fn parse_k_value(v: &toml::Value) -> Result<Vec<Exponent>, String> {
    match v {
        toml::Value::Array(items) => items.iter().map(parse_k_scalar).collect(),
        _ => Ok(vec![parse_k_scalar(v)?]),
    }
}

fn parse_k_scalar(v: &toml::Value) -> Result<Exponent, String> {
    let text = match v {
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(x) => x.to_string(),
        toml::Value::String(s) => s.clone(),
        other => return Err(format!("k must be a number or \"inf\", got {other}")),
    };
    text.parse::<Exponent>().map_err(|e| e.to_string())
}

fn parse_string_list(v: &toml::Value, key: &str) -> Result<Vec<String>, String> {
    match v {
        toml::Value::String(s) => Ok(vec![s.clone()]),
        toml::Value::Array(items) => items
            .iter()
            .map(|item| match item {
                toml::Value::String(s) => Ok(s.clone()),
                other => Err(format!("{key} entries must be strings, got {other}")),
            })
            .collect(),
        other => Err(format!("{key} must be a string or array of strings, got {other}")),
    }
}

fn opt_f64(table: &toml::Table, key: &str) -> Result<Option<f64>, String> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Float(x)) => Ok(Some(*x)),
        Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(other) => Err(format!("{key} must be a number, got {other}")),
    }
}

fn opt_usize(table: &toml::Table, key: &str) -> Result<Option<usize>, String> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
        Some(other) => Err(format!("{key} must be a non-negative integer, got {other}")),
    }
}

fn opt_bool(table: &toml::Table, key: &str) -> Result<Option<bool>, String> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::Boolean(b)) => Ok(Some(*b)),
        Some(other) => Err(format!("{key} must be a boolean, got {other}")),
    }
}

fn opt_string(table: &toml::Table, key: &str) -> Result<Option<String>, String> {
    match table.get(key) {
        None => Ok(None),
        Some(toml::Value::String(s)) => Ok(Some(s.clone())),
        Some(other) => Err(format!("{key} must be a string, got {other}")),
    }
}

/// `|z|` grid specification `min:max:count`, linear by default.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl Grid {
    pub fn parse(text: &str, log: bool) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid must be min:max:count, got '{text}'"));
        }
        let min: f64 = parts[0]
            .parse()
            .map_err(|_| format!("bad grid minimum '{}'", parts[0]))?;
        let max: f64 = parts[1]
            .parse()
            .map_err(|_| format!("bad grid maximum '{}'", parts[1]))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad grid count '{}'", parts[2]))?;
        if !(min.is_finite() && max.is_finite()) || min <= 0.0 {
            return Err(format!("grid minimum must be finite and > 0, got {min}"));
        }
        if max <= min {
            return Err(format!("grid maximum must exceed the minimum, got {min}:{max}"));
        }
        if count < 2 {
            return Err(format!("grid count must be at least 2, got {count}"));
        }
        Ok(Grid { min, max, count, log })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        let step = |i: usize| i as f64 / (n - 1) as f64;
        if self.log {
            let (lo, hi) = (self.min.ln(), self.max.ln());
            (0..n).map(|i| (lo + (hi - lo) * step(i)).exp()).collect()
        } else {
            (0..n)
                .map(|i| self.min + (self.max - self.min) * step(i))
                .collect()
        }
    }
}

/// Parses a coherent-state label. Accepted forms: `2`, `-1.5`, `1,0.5`
/// (re,im), `1+0.5i`, `1-2i`, `0.5i`, `i`, `-i`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty complex number".into());
    }
    if let Some((re, im)) = s.split_once(',') {
        let re: f64 = re.trim().parse().map_err(|_| format!("bad real part '{re}'"))?;
        let im: f64 = im.trim().parse().map_err(|_| format!("bad imaginary part '{im}'"))?;
        return Ok(Complex64::new(re, im));
    }
    if let Some(body) = s.strip_suffix(['i', 'I']) {
        // Find the sign separating re from im, skipping an exponent's sign
        // and a leading sign.
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx] as char;
            if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = Some(idx);
                break;
            }
        }
        let (re_part, im_part) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("0", body),
        };
        let re: f64 = re_part
            .trim()
            .parse()
            .map_err(|_| format!("bad real part '{re_part}'"))?;
        let im_text = im_part.trim();
        let im: f64 = match im_text {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => im_text
                .parse()
                .map_err(|_| format!("bad imaginary part '{im_text}'"))?,
        };
        return Ok(Complex64::new(re, im));
    }
    let re: f64 = s
        .parse()
        .map_err(|_| format!("cannot parse complex number '{text}'"))?;
    Ok(Complex64::new(re, 0.0))
}

/// Flag value if given, else config value, else the default.
pub fn pick<T>(flag: Option<T>, cfg: Option<T>, default: T) -> T {
    flag.or(cfg).unwrap_or(default)
}

/// Flag value if given, else config value.
pub fn pick_opt<T>(flag: Option<T>, cfg: Option<T>) -> Option<T> {
    flag.or(cfg)
}
