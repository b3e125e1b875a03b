//! Subcommands that emit CSV tables.

use rabicat_core::adiabatic::Branch;
use rabicat_core::fock::{LinearOperator, Truncation};
use rabicat_core::models::{build_a2, build_gqr, build_van_hove};
use rabicat_core::spectra::{
    auto_truncation, bias_scan, catness_table, coupling_sweep, diagonalize_with, SweepRow,
};

use crate::config::{ConfigError, ModelKind, RunConfig};
use crate::RunError;

/// `%.12e` as in C: `1.234567890123e+00`.
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn cell(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

fn row(cells: impl IntoIterator<Item = String>) -> String {
    let mut line = cells.into_iter().collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

fn unsupported(cmd: &str, model: ModelKind, allowed: &str) -> RunError {
    RunError::Config(ConfigError::Range {
        line: None,
        msg: format!(
            "`{cmd}` does not support model {}; use {allowed}",
            model.name()
        ),
    })
}

/// Lowest `levels` eigenvalues for every coupling in the grid (or `g`).
///
/// The `reference` column holds the closed-form van Hove energies and is
/// empty for the other models.
pub fn spectrum(cfg: &RunConfig) -> Result<String, RunError> {
    let mut out = row(["g", "level", "energy", "converged", "reference"].map(String::from));
    for g in cfg.couplings() {
        let p = cfg.params.with_g(g);
        let (disp, squeeze) = match cfg.model {
            ModelKind::A2 => {
                let (omega_g, g_tilde) =
                    rabicat_core::renormalization::renormalized_frequencies(&p)?;
                (g_tilde / omega_g, 0.5 * (omega_g / p.omega_c).ln())
            }
            _ => (g / p.omega_c, 0.0),
        };
        let start = auto_truncation(disp, squeeze, &cfg.trunc);
        let build = |t: &Truncation| -> Result<LinearOperator, rabicat_core::Error> {
            match cfg.model {
                ModelKind::Qr | ModelKind::Gqr => Ok(build_gqr(&p, p.omega_c, g, t)),
                ModelKind::A2 => build_a2(&p, t),
                ModelKind::VanHove => Ok(build_van_hove(cfg.sign, &p, t)),
            }
        };
        let dec = diagonalize_with(build, cfg.levels, &start)?;
        let zp = if p.zero_point { 0.5 } else { 0.0 };
        for (k, e) in dec.eigenvalues.iter().enumerate() {
            let reference = (cfg.model == ModelKind::VanHove)
                .then(|| p.hbar * p.omega_c * (k as f64 + zp) - p.hbar * g * g / p.omega_c);
            out += &row([
                format_real(g),
                k.to_string(),
                format_real(*e),
                dec.level_converged[k].to_string(),
                cell(reference),
            ]);
        }
    }
    Ok(out)
}

pub fn sweep(cfg: &RunConfig) -> Result<String, RunError> {
    let model = cfg
        .model
        .approx_model()
        .ok_or_else(|| unsupported("sweep", cfg.model, "qr, gqr or a2"))?;
    if cfg.g_grid.is_empty() {
        return Err(RunError::Config(ConfigError::Range {
            line: None,
            msg: "`sweep` needs a nonempty g_grid".into(),
        }));
    }
    let rows = coupling_sweep(&cfg.params, &cfg.g_grid, model, &cfg.trunc);
    Ok(sweep_csv(&rows))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = row(SweepRow::COLUMNS.map(String::from));
    for r in rows {
        let mut cells: Vec<String> = r.values().into_iter().map(cell).collect();
        cells.push(r.status.clone());
        out += &row(cells);
    }
    out
}

pub fn bias(cfg: &RunConfig) -> Result<String, RunError> {
    let model = match cfg.model {
        ModelKind::Gqr | ModelKind::A2 => cfg.model.approx_model().expect("atom-cavity model"),
        other => return Err(unsupported("bias-scan", other, "gqr or a2")),
    };
    if cfg.epsilon_grid.is_empty() {
        return Err(RunError::Config(ConfigError::Range {
            line: None,
            msg: "`bias-scan` needs a nonempty epsilon_grid".into(),
        }));
    }
    let rows = bias_scan(&cfg.params, &cfg.epsilon_grid, model, &cfg.trunc)?;
    let mut out = row(["epsilon", "exact_gap", "approx_gap"].map(String::from));
    for r in rows {
        out += &row([
            format_real(r.epsilon),
            format_real(r.exact_gap),
            format_real(r.approx_gap),
        ]);
    }
    Ok(out)
}

pub fn catness(cfg: &RunConfig) -> Result<String, RunError> {
    let model = cfg
        .model
        .approx_model()
        .ok_or_else(|| unsupported("catness", cfg.model, "qr, gqr or a2"))?;
    let mut out = row([
        "g",
        "level",
        "energy",
        "entropy",
        "parity",
        "photon_number",
        "best_n",
        "best_branch",
        "best_fidelity",
        "approx_energy",
    ]
    .map(String::from));
    for g in cfg.couplings() {
        let p = cfg.params.with_g(g);
        for r in catness_table(model, &p, cfg.levels, &cfg.trunc)? {
            let branch = match r.best_branch {
                Branch::Plus => "plus",
                Branch::Minus => "minus",
            };
            out += &row([
                format_real(g),
                r.level.to_string(),
                format_real(r.energy),
                format_real(r.entropy),
                format_real(r.parity),
                format_real(r.photon_number),
                r.best_n.to_string(),
                branch.to_string(),
                format_real(r.best_fidelity),
                format_real(r.approx_energy),
            ]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(format_real(1.0), "1.000000000000e+00");
        assert_eq!(format_real(-0.00123), "-1.230000000000e-03");
        assert_eq!(format_real(6.02e23), "6.020000000000e+23");
        assert_eq!(format_real(1e-100), "1.000000000000e-100");
        assert_eq!(format_real(0.0), "0.000000000000e+00");
    }
}
