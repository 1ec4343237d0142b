use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flows::{Constraint, FlowKind};
use crate::sources::SourceKind;

/// Flow family plus the roll wavenumber, written `roll[:n]`, `branching` or `energy-roll`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowSpec {
    pub kind: FlowKind,
    /// Roll wavenumber; ignored by the other families.
    pub n: usize,
}

impl FlowSpec {
    pub const DEFAULT_ROLL_N: usize = 4;
}

impl fmt::Display for FlowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FlowKind::Roll => write!(f, "roll:{}", self.n),
            k => write!(f, "{k}"),
        }
    }
}

impl FromStr for FlowSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let kind: FlowKind = name.parse()?;
        let n = match (kind, param) {
            (_, None) => Self::DEFAULT_ROLL_N,
            (FlowKind::Roll, Some(p)) => p
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::InvalidParameter(format!("bad roll wavenumber '{p}'")))?,
            (k, Some(_)) => return Err(Error::InvalidParameter(format!("flow '{k}' takes no parameter"))),
        };
        Ok(Self { kind, n })
    }
}

/// Number of Fourier modes per row: fixed, or max(256, 8/l_n) re-planned at each Pe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModesPolicy {
    Auto,
    Fixed(usize),
}

impl fmt::Display for ModesPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModesPolicy::Auto => f.write_str("auto"),
            ModesPolicy::Fixed(m) => write!(f, "{m}"),
        }
    }
}

impl FromStr for ModesPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(ModesPolicy::Auto);
        }
        s.parse::<usize>()
            .map(ModesPolicy::Fixed)
            .map_err(|_| Error::InvalidParameter(format!("modes must be a positive integer or 'auto' (got '{s}')")))
    }
}

/// Everything a sweep depends on. Serialises to line-oriented `key=value` text.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub source: String,
    pub flow: FlowSpec,
    pub constraint: Constraint,
    pub pe: Vec<f64>,
    pub nr: usize,
    pub modes: ModesPolicy,
    pub stretch: f64,
    /// Coupled solves run only for Pe at or below this value.
    pub exact_cap: f64,
}

/// Pe = 10², 10^{2.5}, …, 10⁵.
pub fn default_pe_list() -> Vec<f64> {
    (0..7).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect()
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            source: "constant".into(),
            flow: FlowSpec { kind: FlowKind::Branching, n: FlowSpec::DEFAULT_ROLL_N },
            constraint: Constraint::Enstrophy,
            pe: default_pe_list(),
            nr: 1024,
            modes: ModesPolicy::Auto,
            stretch: 2.0,
            exact_cap: 1e3,
        }
    }
}

/// Keys accepted in config files, in serialisation order.
pub const CONFIG_KEYS: [&str; 8] = ["source", "flow", "constraint", "pe", "nr", "modes", "stretch", "exact_cap"];

fn parse_pe_item(s: &str) -> Result<f64> {
    let v = match s.split_once('^') {
        Some((b, e)) => b.trim().parse::<f64>().ok().zip(e.trim().parse::<f64>().ok()).map(|(b, e)| b.powf(e)),
        None => s.parse::<f64>().ok(),
    };
    v.filter(|v| v.is_finite() && *v > 0.0)
        .ok_or_else(|| Error::InvalidParameter(format!("bad Pe value '{s}'")))
}

/// Parses a comma-separated Pe list; items may be written `1e3` or `10^2.5`.
pub fn parse_pe_list(s: &str) -> Result<Vec<f64>> {
    let list = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse_pe_item)
        .collect::<Result<Vec<f64>>>()?;
    if list.is_empty() {
        return Err(Error::InvalidParameter("empty Pe list".into()));
    }
    Ok(list)
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::InvalidParameter(format!("bad value '{v}' for {key}")))
}

impl SweepConfig {
    /// Sets one key. Hyphens and underscores are interchangeable in key names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "source" => {
                SourceKind::<f64>::parse(value)?;
                self.source = value.to_string();
            }
            "flow" => self.flow = value.parse()?,
            "constraint" => self.constraint = value.parse()?,
            "pe" => self.pe = parse_pe_list(value)?,
            "nr" => self.nr = parse_num(key, value)?,
            "modes" => self.modes = value.parse()?,
            "stretch" => self.stretch = parse_num(key, value)?,
            "exact_cap" => self.exact_cap = parse_num(key, value)?,
            other => return Err(Error::InvalidParameter(format!("unknown config keys: {other}"))),
        }
        Ok(())
    }

    /// Applies `key=value` lines; `#` starts a comment. All unknown keys are
    /// reported together.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let mut unknown = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::InvalidParameter(format!("line {}: expected key=value, got '{line}'", i + 1)));
            };
            let k = k.trim();
            if !CONFIG_KEYS.contains(&k.replace('-', "_").as_str()) {
                unknown.push(k.to_string());
                continue;
            }
            self.set(k, v).map_err(|e| Error::InvalidParameter(format!("line {}: {e}", i + 1)))?;
        }
        if !unknown.is_empty() {
            return Err(Error::InvalidParameter(format!("unknown config keys: {}", unknown.join(", "))));
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    /// `key=value` lines in a fixed order; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let pe: Vec<String> = self.pe.iter().map(|p| p.to_string()).collect();
        let values = [
            self.source.clone(),
            self.flow.to_string(),
            self.constraint.to_string(),
            pe.join(","),
            self.nr.to_string(),
            self.modes.to_string(),
            self.stretch.to_string(),
            self.exact_cap.to_string(),
        ];
        CONFIG_KEYS.iter().zip(values).map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        SourceKind::<f64>::parse(&self.source)?;
        if self.pe.is_empty() || self.pe.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidParameter("Pe list must be non-empty and positive".into()));
        }
        if !(self.exact_cap >= 0.0) {
            return Err(Error::InvalidParameter("exact_cap must be non-negative".into()));
        }
        Ok(())
    }
}
