//! Renormalization of the `(a + a†)²` term.
//!
//! The quadratic photon sector ħω_c(a†a + ½) + ħgC_g(a + a†)² is a free
//! oscillator at ω_g = √(ω_c² + 4ω_c g C_g). The squeeze U_HB = S(r) with
//! r = ½ ln(ω_g/ω_c) maps it there, and the linear coupling picks up the
//! factor √(ω_c/ω_g):
//!
//! ```text
//! U_HB† ℋ_A² U_HB = ℋ(ω_g, g̃),   g̃ = g √(ω_c/ω_g).
//! ```
//!
//! This direction (U_HB† on the left) is the one that holds numerically;
//! physical states are therefore U_HB† applied to bare eigenvectors.

use crate::error::{Error, Result};
use crate::fock::{
    apply_squeeze, op_norm, quadrature, squeeze, squeezed_columns, LinearOperator, StateVector,
    Truncation,
};
use crate::models::{
    atom_hamiltonian, build_a2, build_gqr, photon_hamiltonian, quadrature_squared, ModelParams,
};
use crate::spectra::diagonalize;
use crate::C64;
use faer::Mat;

/// Tolerance on |√(ω_c/gC_g) − 2| below which Δ_g is treated as undefined.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Tail mass allowed on the padded space used for squeeze conjugations.
pub const PAD_TAIL_TOL: f64 = 1e-14;

/// Tail tolerance for squeezing a single state; the sparse flow is cheap.
const FLOW_TAIL_TOL: f64 = 1e-20;

/// Derived parameters at one (g, C_g).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormalizedParams {
    pub omega_g: f64,
    pub g_tilde: f64,
    /// Δ_g = √(ω_g² − 4ω_c√(gC_gω_c))
    pub delta_g: f64,
    /// δ_g, the bound on |ω_c − (ω_g − Δ_g)|/ω_c.
    pub small_delta_g: f64,
    /// ħg̃²/ω_g
    pub self_energy: f64,
    pub c_infinity: Option<f64>,
    /// G = g̃/ω_g
    pub polaron_g: f64,
    pub c_g: f64,
    /// Squeeze parameter ½ ln(ω_g/ω_c).
    pub squeeze_r: f64,
}

impl RenormalizedParams {
    /// c₁ = √(ω_g/ω_c) = e^r
    pub fn c1(&self) -> f64 {
        self.squeeze_r.exp()
    }

    /// c₂ = 1/c₁
    pub fn c2(&self) -> f64 {
        (-self.squeeze_r).exp()
    }

    /// Closed-form dressed-photon number g̃²/ω_g².
    pub fn n0_app(&self) -> f64 {
        self.polaron_g * self.polaron_g
    }
}

/// (ω_g, g̃) only. Accepts C_g = 0, where ω_g = ω_c and g̃ = g.
pub fn renormalized_frequencies(p: &ModelParams) -> Result<(f64, f64)> {
    let c_g = p.c_g()?;
    if c_g < 0.0 {
        return Err(Error::InvalidParams(format!("C_g = {c_g} must be ≥ 0")));
    }
    let omega_g = (p.omega_c * p.omega_c + 4.0 * p.omega_c * p.g * c_g).sqrt();
    Ok((omega_g, p.g * (p.omega_c / omega_g).sqrt()))
}

/// Full renormalized parameter set. Needs g > 0 and C_g > 0.
pub fn renormalize(p: &ModelParams) -> Result<RenormalizedParams> {
    let c_g = p.c_g()?;
    if !(p.g > 0.0) {
        return Err(Error::InvalidParams(format!(
            "renormalization needs g > 0, got {}",
            p.g
        )));
    }
    if !(c_g > 0.0) {
        return Err(Error::InvalidParams(format!(
            "renormalization needs C_g > 0, got {c_g}"
        )));
    }
    let gc = p.g * c_g;
    if ((p.omega_c / gc).sqrt() - 2.0).abs() <= DEGENERATE_TOL {
        return Err(Error::DegenerateDelta);
    }
    let (omega_g, g_tilde) = renormalized_frequencies(p)?;
    let radicand = omega_g * omega_g - 4.0 * p.omega_c * (gc * p.omega_c).sqrt();
    if radicand < 0.0 {
        // Algebraically ω_c(√ω_c − 2√(gC_g))² ≥ 0; only roundoff gets here.
        if radicand < -1e-12 * omega_g * omega_g {
            return Err(Error::NegativeRadicand(radicand));
        }
    }
    let delta_g = radicand.max(0.0).sqrt();
    let q = (p.omega_c / (4.0 * gc)).sqrt();
    let small_delta_g = (1.0 - 1.0 / (1.0 - q).abs())
        .abs()
        .max((1.0 - 1.0 / (1.0 + q * q).sqrt()).abs());
    Ok(RenormalizedParams {
        omega_g,
        g_tilde,
        delta_g,
        small_delta_g,
        self_energy: p.hbar * g_tilde * g_tilde / omega_g,
        c_infinity: p.coupling.c_infinity(),
        polaron_g: g_tilde / omega_g,
        c_g,
        squeeze_r: 0.5 * (omega_g / p.omega_c).ln(),
    })
}

fn squeeze_r(p: &ModelParams) -> Result<f64> {
    let (omega_g, _) = renormalized_frequencies(p)?;
    Ok(0.5 * (omega_g / p.omega_c).ln())
}

/// The renormalized model ℋ(ω_g, g̃) at the same ε, ω_a.
pub fn build_renormalized(p: &ModelParams, trunc: &Truncation) -> Result<LinearOperator> {
    let (omega_g, g_tilde) = renormalized_frequencies(p)?;
    Ok(build_gqr(p, omega_g, g_tilde, trunc))
}

/// U_HB = exp[(r/2)(a² − a†²)] on the photon space, r = ½ ln(ω_g/ω_c).
///
/// Built from the truncated generator, so it only represents the exact
/// transformation on levels whose squeezed image fits inside the cutoff.
pub fn hopfield_bogoliubov(p: &ModelParams, trunc: &Truncation) -> Result<LinearOperator> {
    squeeze(squeeze_r(p)?, trunc)
}

/// U_HB†·bare, returned at the cutoff of `bare`.
///
/// The squeeze is applied on a padded space large enough for the support of
/// `bare`, then cut back. Fails with `TruncationTooSmall` if more than
/// `trunc.tail_tol` of the probability would be cut off.
pub fn physical_state(
    bare: &StateVector,
    p: &ModelParams,
    trunc: &Truncation,
) -> Result<StateVector> {
    let r = squeeze_r(p)?;
    if r == 0.0 {
        return Ok(bare.clone());
    }
    let basis = bare.basis();
    let n_max = basis.n_max();
    let stride = n_max + 1;
    let sectors = if basis.is_spin_photon() { 2 } else { 1 };

    let mut amps = vec![C64::new(0.0, 0.0); basis.dim()];
    let mut kept = 0.0;
    let mut needed = n_max;
    for s in 0..sectors {
        let src = &bare.amplitudes()[s * stride..(s + 1) * stride];
        // The cutoff already left this much in the top levels; padding the
        // flow further than that buys no accuracy.
        let start = Truncation::fixed(n_max.max(2)).tail_start();
        let src_tail: f64 = src[start..].iter().map(|z| z.norm_sqr()).sum();
        let src_total: f64 = src.iter().map(|z| z.norm_sqr()).sum();
        let tol = FLOW_TAIL_TOL.max(src_tail / src_total.max(f64::MIN_POSITIVE));
        let out = apply_squeeze(-r, src, tol)?;
        needed = needed.max(out.len() - 1);
        for (i, v) in out.into_iter().take(stride).enumerate() {
            amps[s * stride + i] = v;
            kept += v.norm_sqr();
        }
    }
    let lost = bare.norm().powi(2) - kept;
    if lost > trunc.tail_tol {
        return Err(Error::TruncationTooSmall {
            what: "physical state",
            needed,
            have: n_max,
        });
    }
    Ok(StateVector::from_amplitudes(basis, amps)?.normalized())
}

/// ‖P(U_HB† ℋ_A² U_HB − ℋ(ω_g, g̃))P‖ / ‖P ℋ(ω_g, g̃) P‖ on the lowest
/// `levels` Fock levels of each spin sector, using the operator norm.
///
/// The conjugated photon blocks are computed on a padded cutoff, so the
/// result measures the operator identity itself rather than the truncation.
pub fn conjugation_residual(p: &ModelParams, levels: usize) -> Result<f64> {
    let c_g = p.c_g()?;
    let (omega_g, g_tilde) = renormalized_frequencies(p)?;
    let r = 0.5 * (omega_g / p.omega_c).ln();
    let hbar = p.hbar;

    let field = |t: &Truncation| {
        &photon_hamiltonian(p.omega_c, hbar, p.zero_point, t)
            + &quadrature_squared(t).scale(hbar * p.g * c_g)
    };
    let (n_pad, cols) = squeezed_columns(r, levels, PAD_TAIL_TOL)?;
    let pad = Truncation::fixed(n_pad);
    let sandwich = |x: LinearOperator| cols.adjoint() * (x.entries() * &cols);
    let b_id = cols.adjoint() * &cols;
    let b_field = sandwich(field(&pad));
    let b_x = sandwich(quadrature(&pad));

    let atom = atom_hamiltonian(p);
    let sz = [1.0, -1.0];
    let conj = spin_block(levels, |s, t, i, j| {
        let mut v = atom.get(s, t) * b_id[(i, j)];
        if s == t {
            v += b_field[(i, j)] + C64::new(hbar * p.g * sz[s], 0.0) * b_x[(i, j)];
        }
        v
    });

    let small = Truncation::fixed(levels.max(3) - 1);
    let mut target = build_gqr(p, omega_g, g_tilde, &small);
    if !p.zero_point {
        // Without the zero-point term the two sides differ by ħ(ω_g − ω_c)/2.
        target = target.shifted(C64::new(0.5 * hbar * (omega_g - p.omega_c), 0.0));
    }
    let target = target.low_block(levels);
    let diff = &conj - &target;
    Ok(op_norm(diff.as_ref()) / op_norm(target.as_ref()))
}

fn spin_block(levels: usize, f: impl Fn(usize, usize, usize, usize) -> C64) -> Mat<C64> {
    Mat::from_fn(2 * levels, 2 * levels, |a, b| {
        f(a / levels, b / levels, a % levels, b % levels)
    })
}

/// Lowest `k` eigenvalues of ℋ_A² and of ℋ(ω_g, g̃) at the same cutoff.
pub fn spectrum_comparison(
    p: &ModelParams,
    k: usize,
    trunc: &Truncation,
) -> Result<Vec<(f64, f64)>> {
    let bare = diagonalize(&build_a2(p, trunc)?, k, trunc)?;
    let ren = diagonalize(&build_renormalized(p, trunc)?, k, trunc)?;
    Ok(bare.eigenvalues.into_iter().zip(ren.eigenvalues).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, photon_identity, squeeze_conjugated_block};
    use crate::models::CouplingPolicy;

    fn linear(g: f64, epsilon: f64) -> ModelParams {
        ModelParams::new(1.0, 1.0, epsilon, g)
            .unwrap()
            .with_coupling(CouplingPolicy::Linear { c: 1.0 })
    }

    #[test]
    fn derived_parameters_at_g4() {
        let rp = renormalize(&linear(4.0, 0.0)).unwrap();
        assert!((rp.omega_g - 65f64.sqrt()).abs() < 1e-12);
        assert!((rp.g_tilde - 4.0 * 65f64.powf(-0.25)).abs() < 1e-12);
        assert!((rp.delta_g - 7.0).abs() < 1e-12);
        assert!((rp.omega_g - rp.delta_g - 1.06226).abs() < 1e-5);
        // q = √(1/64) = 1/8: max{|1 − 8/7|, |1 − 1/√(65/64)|}
        let want = (1.0f64 / 7.0).max(1.0 - 1.0 / (65.0f64 / 64.0).sqrt());
        assert!((rp.small_delta_g - want).abs() < 1e-12);
        assert!((rp.self_energy - 16.0 / 65.0).abs() < 1e-12);
        assert!((rp.self_energy - 0.24615).abs() < 1e-5);
        assert_eq!(rp.c_infinity, Some(1.0));
        assert!((1.0 - (rp.omega_g - rp.delta_g)).abs() <= rp.small_delta_g);
    }

    #[test]
    fn hyperbolic_coefficients() {
        let rp = renormalize(&linear(4.0, 0.0)).unwrap();
        assert!((rp.c1() - 2.83942).abs() < 1e-5);
        assert!((rp.c2() - 0.35218).abs() < 1e-5);
        let r = rp.squeeze_r;
        assert!((0.5 * (rp.c1() + rp.c2()) - r.cosh()).abs() < 1e-14);
        assert!((0.5 * (rp.c1() - rp.c2()) - r.sinh()).abs() < 1e-14);
    }

    #[test]
    fn polaron_displacement_shrinks() {
        let gs: Vec<f64> = [4.0, 8.0, 16.0, 32.0]
            .iter()
            .map(|&g| renormalize(&linear(g, 0.0)).unwrap().polaron_g)
            .collect();
        assert!(gs.windows(2).all(|w| w[1] < w[0]), "{gs:?}");
    }

    #[test]
    fn degenerate_and_invalid_points() {
        // √(ω_c / g C_g) = 2 at g C_g = 1/4.
        let p = ModelParams::new(1.0, 1.0, 0.0, 0.5)
            .unwrap()
            .with_coupling(CouplingPolicy::Linear { c: 1.0 });
        assert_eq!(renormalize(&p), Err(Error::DegenerateDelta));
        let none = ModelParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(renormalize(&none), Err(Error::PolicyMissing));
        let zero_c = none.with_coupling(CouplingPolicy::constant(0.0));
        assert!(matches!(renormalize(&zero_c), Err(Error::InvalidParams(_))));
        assert_eq!(renormalized_frequencies(&zero_c).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn squeeze_realizes_bogoliubov_map() {
        let p = linear(4.0, 0.0);
        let rp = renormalize(&p).unwrap();
        let t = Truncation::fixed(240);
        let a = annihilation(&t);
        let b = &a.scale(0.5 * (rp.c1() + rp.c2())) + &a.adjoint().scale(0.5 * (rp.c1() - rp.c2()));
        // U_HB a U_HB† = U_HB(−r)† a U_HB(−r)
        let conj = squeeze_conjugated_block(-rp.squeeze_r, 20, PAD_TAIL_TOL, annihilation).unwrap();
        let dev = crate::fock::max_abs((conj - b.low_block(20)).as_ref());
        assert!(dev < 1e-9, "{dev}");
    }

    #[test]
    fn identity_when_quadratic_term_vanishes() {
        let p = linear(1.0, 0.2).with_coupling(CouplingPolicy::constant(0.0));
        let t = Truncation::fixed(20);
        assert_eq!(hopfield_bogoliubov(&p, &t).unwrap(), photon_identity(&t));
        let psi = StateVector::spin_fock(crate::fock::Spin::Down, 3, &t);
        assert_eq!(physical_state(&psi, &p, &t).unwrap(), psi);
    }

    #[test]
    fn conjugation_identity_on_padded_block() {
        let p = linear(2.0, 0.3);
        let res = conjugation_residual(&p, 30).unwrap();
        assert!(res < 1e-10, "{res}");
        let mut p0 = p.clone();
        p0.zero_point = false;
        assert!(conjugation_residual(&p0, 30).unwrap() < 1e-10);
    }

    #[test]
    fn physical_ground_state_is_renormalized_eigenvector() {
        let p = linear(2.0, 0.3);
        let t = Truncation::fixed(120);
        let bare = diagonalize(&build_a2(&p, &t).unwrap(), 2, &t).unwrap();
        let ren_h = build_renormalized(&p, &t).unwrap();
        for (e, v) in bare.eigenvalues.iter().zip(&bare.eigenvectors) {
            let phys = physical_state(v, &p, &t).unwrap();
            assert!((phys.norm() - 1.0).abs() < 1e-10);
            let hv = ren_h.apply(&phys).unwrap();
            let resid = hv.try_sub(&phys.scale(C64::new(*e, 0.0))).unwrap().norm();
            assert!(resid < 1e-6, "{resid}");
        }
    }

    #[test]
    fn spectra_agree_at_moderate_coupling() {
        let p = linear(2.0, 0.3);
        let t = Truncation::fixed(160);
        for (a, b) in spectrum_comparison(&p, 10, &t).unwrap() {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn delta_bound_holds_and_shrinks_on_grid() {
        let mut prev = f64::INFINITY;
        for g in [4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0] {
            let rp = renormalize(&linear(g, 0.0)).unwrap();
            assert!((1.0 - (rp.omega_g - rp.delta_g)).abs() <= rp.small_delta_g);
            assert!(rp.small_delta_g < prev);
            prev = rp.small_delta_g;
        }
    }

    #[test]
    fn self_energy_approaches_limit_monotonically() {
        let mut prev = 0.0;
        for g in [1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0] {
            let rp = renormalize(&linear(g, 0.0)).unwrap();
            assert!(rp.self_energy > prev && rp.self_energy < 0.25);
            prev = rp.self_energy;
        }
        assert!((0.25 - prev).abs() < 1e-3);
    }
}
