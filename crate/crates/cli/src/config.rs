//! `key = value` run configuration.
//!
//! Blank lines and anything after `#` are ignored. Keys:
//!
//! | key            | value                                            | default        |
//! |----------------|--------------------------------------------------|----------------|
//! | `model`        | `qr`, `gqr`, `a2`, `van_hove`                    | `gqr`          |
//! | `omega_c`      | cavity frequency, > 0                            | 1              |
//! | `omega_a`      | tunnel splitting, ≥ 0                            | 1              |
//! | `epsilon`      | bias (must be 0 for `qr`)                        | 0              |
//! | `g`            | coupling for single-point commands, ≥ 0          | 1              |
//! | `hbar`         | > 0                                              | 1              |
//! | `zero_point`   | `true` / `false`                                 | `true`         |
//! | `coupling`     | `none`, `linear:C`, `constant:C_g`, `table:g:C_g,…` | `none`      |
//! | `sign`         | van Hove sign, `plus` / `minus`                  | `plus`         |
//! | `g_grid`       | comma-separated couplings                        | empty          |
//! | `epsilon_grid` | comma-separated biases                           | 81 points on [−ω_a, ω_a] |
//! | `trunc`        | `auto:TOL:CEILING` or `fixed:N`                  | `auto:1e-8:512`|
//! | `levels`       | ≥ 2                                              | 6              |
//! | `out`          | output path                                      | stdout         |
//! | `format`       | `csv`                                            | `csv`          |
//! | `seed`         | seed for sampled `verify` points                 | 0              |
//! | `samples`      | sampled `verify` points per invariant            | 3              |

use std::path::PathBuf;

use rabicat_core::adiabatic::ApproxModel;
use rabicat_core::fock::Truncation;
use rabicat_core::models::{CouplingPolicy, ModelParams, Sign};
use rabicat_core::spectra::default_epsilon_grid;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("{}{msg}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Range { line: Option<usize>, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// ε = 0 quantum Rabi model.
    Qr,
    Gqr,
    A2,
    VanHove,
}

impl ModelKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "qr" => ModelKind::Qr,
            "gqr" => ModelKind::Gqr,
            "a2" => ModelKind::A2,
            "van_hove" => ModelKind::VanHove,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Qr => "qr",
            ModelKind::Gqr => "gqr",
            ModelKind::A2 => "a2",
            ModelKind::VanHove => "van_hove",
        }
    }

    /// The atom-cavity model this kind maps to; `None` for van Hove.
    pub fn approx_model(self) -> Option<ApproxModel> {
        match self {
            ModelKind::Qr | ModelKind::Gqr => Some(ApproxModel::GqrNoA2),
            ModelKind::A2 => Some(ApproxModel::A2Renormalized),
            ModelKind::VanHove => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub params: ModelParams,
    pub sign: Sign,
    pub g_grid: Vec<f64>,
    pub epsilon_grid: Vec<f64>,
    pub trunc: Truncation,
    pub levels: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
    pub samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("empty config is valid")
    }
}

impl RunConfig {
    /// Couplings for grid-aware commands: `g_grid`, or the single `g`.
    pub fn couplings(&self) -> Vec<f64> {
        if self.g_grid.is_empty() {
            vec![self.params.g]
        } else {
            self.g_grid.clone()
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        msg: msg.into(),
    }
}

fn range_err(line: usize, msg: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        line: Some(line),
        msg: msg.into(),
    }
}

fn real(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v
        .parse()
        .map_err(|_| parse_err(line, format!("`{key}` expects a number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(range_err(line, format!("`{key}` must be finite")));
    }
    Ok(x)
}

fn reals(line: usize, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| real(line, key, s))
        .collect()
}

fn integer(line: usize, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse().map_err(|_| {
        parse_err(
            line,
            format!("`{key}` expects a non-negative integer, got `{v}`"),
        )
    })
}

fn parse_trunc(line: usize, v: &str) -> Result<Truncation, ConfigError> {
    let parts: Vec<&str> = v.split(':').collect();
    let bad = || {
        parse_err(
            line,
            format!("`trunc` expects auto:TOL:CEILING or fixed:N, got `{v}`"),
        )
    };
    match parts.as_slice() {
        ["auto", tol, ceiling] => {
            let tol = real(line, "trunc", tol)?;
            let ceiling = integer(line, "trunc", ceiling)?;
            if !(tol > 0.0) {
                return Err(range_err(line, "truncation tolerance must be > 0"));
            }
            if ceiling < 2 {
                return Err(range_err(line, "truncation ceiling must be >= 2"));
            }
            Truncation::auto(2, tol, ceiling).map_err(|e| range_err(line, e.to_string()))
        }
        ["fixed", n] => {
            let n = integer(line, "trunc", n)?;
            if n < 2 {
                return Err(range_err(line, "fixed truncation needs N >= 2"));
            }
            Ok(Truncation::fixed(n))
        }
        _ => Err(bad()),
    }
}

fn parse_coupling(line: usize, v: &str) -> Result<CouplingPolicy, ConfigError> {
    let (kind, rest) = v.split_once(':').unwrap_or((v, ""));
    match kind {
        "none" if rest.is_empty() => Ok(CouplingPolicy::None),
        "linear" => {
            let c = real(line, "coupling", rest)?;
            if c < 0.0 {
                return Err(range_err(line, "linear coupling constant must be >= 0"));
            }
            Ok(CouplingPolicy::Linear { c })
        }
        "constant" => {
            let c = real(line, "coupling", rest)?;
            if c < 0.0 {
                return Err(range_err(line, "C_g must be >= 0"));
            }
            Ok(CouplingPolicy::constant(c))
        }
        "table" => {
            let table = rest
                .split(',')
                .map(|pair| {
                    let (g, c) = pair.split_once(':').ok_or_else(|| {
                        parse_err(line, format!("table entry `{pair}` is not g:C_g"))
                    })?;
                    Ok((
                        real(line, "coupling", g.trim())?,
                        real(line, "coupling", c.trim())?,
                    ))
                })
                .collect::<Result<Vec<_>, ConfigError>>()?;
            CouplingPolicy::custom(table).map_err(|e| range_err(line, e.to_string()))
        }
        _ => Err(parse_err(
            line,
            format!(
                "`coupling` expects none, linear:C, constant:C_g or table:g:C_g,..., got `{v}`"
            ),
        )),
    }
}

/// Parses a configuration, filling documented defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut model = ModelKind::Gqr;
    let mut p = ModelParams {
        g: 1.0,
        ..ModelParams::default()
    };
    let mut sign = Sign::Plus;
    let mut g_grid = Vec::new();
    let mut epsilon_grid = None;
    let mut trunc = parse_trunc(0, "auto:1e-8:512")?;
    let mut levels = 6;
    let mut out = None;
    let mut seed = 0;
    let mut samples = 3;
    let mut epsilon_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| parse_err(line, format!("expected key=value, got `{content}`")))?;
        match key {
            "model" => {
                model = ModelKind::parse(value)
                    .ok_or_else(|| parse_err(line, format!("unknown model `{value}`")))?
            }
            "omega_c" => p.omega_c = real(line, key, value)?,
            "omega_a" => p.omega_a = real(line, key, value)?,
            "epsilon" => {
                p.epsilon = real(line, key, value)?;
                epsilon_line = line;
            }
            "g" => p.g = real(line, key, value)?,
            "hbar" => p.hbar = real(line, key, value)?,
            "zero_point" => {
                p.zero_point = value
                    .parse()
                    .map_err(|_| parse_err(line, "`zero_point` expects true or false"))?
            }
            "coupling" => p.coupling = parse_coupling(line, value)?,
            "sign" => {
                sign = match value {
                    "plus" => Sign::Plus,
                    "minus" => Sign::Minus,
                    _ => return Err(parse_err(line, "`sign` expects plus or minus")),
                }
            }
            "g_grid" => {
                g_grid = reals(line, key, value)?;
                if g_grid.iter().any(|&g| g < 0.0) {
                    return Err(range_err(line, "couplings must be >= 0"));
                }
            }
            "epsilon_grid" => epsilon_grid = Some(reals(line, key, value)?),
            "trunc" => trunc = parse_trunc(line, value)?,
            "levels" => {
                levels = integer(line, key, value)?;
                if levels < 2 {
                    return Err(range_err(line, "`levels` must be >= 2"));
                }
            }
            "out" => out = Some(PathBuf::from(value)),
            "format" => {
                if value != "csv" {
                    return Err(range_err(line, format!("unsupported format `{value}`")));
                }
            }
            "seed" => {
                seed = value
                    .parse()
                    .map_err(|_| parse_err(line, "`seed` expects an unsigned integer"))?
            }
            "samples" => samples = integer(line, key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
    }

    let p = p.validated().map_err(|e| ConfigError::Range {
        line: None,
        msg: e.to_string(),
    })?;
    if model == ModelKind::Qr && p.epsilon != 0.0 {
        return Err(range_err(epsilon_line, "model qr requires epsilon = 0"));
    }
    if model == ModelKind::A2 && p.coupling.is_none() {
        return Err(ConfigError::Range {
            line: None,
            msg: "model a2 requires a `coupling` policy".into(),
        });
    }
    let epsilon_grid = epsilon_grid.unwrap_or_else(|| default_epsilon_grid(p.omega_a));
    Ok(RunConfig {
        model,
        params: p,
        sign,
        g_grid,
        epsilon_grid,
        trunc,
        levels,
        out,
        format: OutputFormat::Csv,
        seed,
        samples,
    })
}
