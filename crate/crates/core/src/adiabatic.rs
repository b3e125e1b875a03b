//! Polaron frame, displaced-Fock approximants and resolvent diagnostics.
//!
//! The polaron unitary U(G) = |↑⟩⟨↑|D(G) + |↓⟩⟨↓|D(−G) with G = g/ω removes
//! the linear coupling:
//!
//! ```text
//! U(G)(ℋ(ω, g) + ħg²/ω)U(G)† = ħω(a†a + ½) − (ħ/2)εσ_z − (ħ/2)ω_a Ξ₀(G),
//! Ξ₀(G) = σ₊D(G)² + σ₋D(−G)².
//! ```
//!
//! Dropping the tunnelling term leaves displaced Fock states as
//! eigenvectors, which is what the approximant families below are built from.
//!
//! Approximant energies are taken literally from their closed forms, so
//! consecutive photon numbers are spaced by exactly ħω (ħω_g for the
//! renormalized model); no Δ_g correction is folded into the spacing.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;

use crate::error::{Error, Result};
use crate::fock::{
    displacement, op_norm, photon_identity, spin_block_diag, spin_only, tensor, LinearOperator,
    SpinOp, StateVector, Truncation,
};
use crate::models::{atom_hamiltonian, build_gqr, photon_hamiltonian, ModelParams};
use crate::renormalization::{renormalize, renormalized_frequencies};
use crate::spectra::SpectralDecomposition;
use crate::C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// U(G) = |↑⟩⟨↑| D(G) + |↓⟩⟨↓| D(−G)
pub fn polaron_unitary(big_g: f64, trunc: &Truncation) -> Result<LinearOperator> {
    spin_block_diag(&displacement(big_g, trunc)?, &displacement(-big_g, trunc)?)
}

/// Ξ₀(G) = σ₊D(G)² + σ₋D(−G)²
pub fn xi0(big_g: f64, trunc: &Truncation) -> Result<LinearOperator> {
    let d = displacement(big_g, trunc)?;
    let dm = displacement(-big_g, trunc)?;
    let up = tensor(&SpinOp::sigma_plus(), &(&d * &d))?;
    let down = tensor(&SpinOp::sigma_minus(), &(&dm * &dm))?;
    up.try_add(&down)
}

/// Ξ₁(G) = σ_x − Ξ₀(G)
pub fn xi1(big_g: f64, trunc: &Truncation) -> Result<LinearOperator> {
    spin_only(&SpinOp::sigma_x(), trunc).try_sub(&xi0(big_g, trunc)?)
}

/// Right-hand side of the polaron identity at (ω, g):
/// ħω(a†a + ½) − (ħ/2)εσ_z − (ħ/2)ω_a Ξ₀(g/ω).
pub fn polaron_frame_hamiltonian(
    p: &ModelParams,
    omega: f64,
    g: f64,
    trunc: &Truncation,
) -> Result<LinearOperator> {
    let field = tensor(
        &SpinOp::identity(),
        &photon_hamiltonian(omega, p.hbar, p.zero_point, trunc),
    )?;
    let bias = spin_only(&SpinOp::sigma_z().scale(-0.5 * p.hbar * p.epsilon), trunc);
    let tunnel = xi0(g / omega, trunc)?.scale(-0.5 * p.hbar * p.omega_a);
    Ok(&(&field + &bias) + &tunnel)
}

/// max-abs deviation of U(G)(ℋ(ω, g) + ħg²/ω)U(G)† from
/// [`polaron_frame_hamiltonian`] on the lowest `levels` Fock levels.
pub fn polaron_identity_residual(
    p: &ModelParams,
    omega: f64,
    g: f64,
    levels: usize,
    trunc: &Truncation,
) -> Result<f64> {
    let u = polaron_unitary(g / omega, trunc)?;
    let h = build_gqr(p, omega, g, trunc).shifted(c(p.hbar * g * g / omega));
    u.conjugate(&h)
        .block_deviation(&polaron_frame_hamiltonian(p, omega, g, trunc)?, levels)
}

/// Which Hamiltonian an approximant targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApproxModel {
    /// ℋ(ω_c, g) without the quadratic term.
    GqrNoA2,
    /// ℋ(ω_g, g̃), the renormalized form of the model with the quadratic term.
    A2Renormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bias {
    Zero,
    Nonzero,
}

/// `Plus` is always the lower-energy member of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// −1 for plus, +1 for minus: the sign in front of the splitting.
    pub fn offset_sign(self) -> f64 {
        match self {
            Branch::Plus => -1.0,
            Branch::Minus => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ApproximantFamily {
    pub model: ApproxModel,
    pub bias: Bias,
    pub branch: Branch,
    pub n: usize,
}

impl ApproximantFamily {
    pub fn new(model: ApproxModel, bias: Bias, branch: Branch, n: usize) -> Self {
        Self {
            model,
            bias,
            branch,
            n,
        }
    }

    /// The zero- or nonzero-bias family matching `epsilon`.
    pub fn for_params(model: ApproxModel, branch: Branch, n: usize, epsilon: f64) -> Self {
        let bias = if epsilon == 0.0 {
            Bias::Zero
        } else {
            Bias::Nonzero
        };
        Self {
            model,
            bias,
            branch,
            n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ApproximantState {
    pub state: StateVector,
    pub energy: f64,
    pub family: ApproximantFamily,
    /// Overall amplitude factor: 1/√2 for the symmetric cats, 1 for the
    /// product states and c_{±ε,ω_a} for the biased cats.
    pub normalization_c: f64,
}

/// Spin amplitudes and c for the biased cat: c(−ω_a, ε ∓ √(ε² + ω_a²)),
/// with 1/c² = 2(ω_a² + ε² ∓ ε√(ω_a² + ε²)).
pub fn biased_spin_vector(omega_a: f64, epsilon: f64, branch: Branch) -> Result<([f64; 2], f64)> {
    let root = omega_a.hypot(epsilon);
    let s = branch.offset_sign();
    let inv_c_sq = 2.0 * (omega_a * omega_a + epsilon * epsilon + s * epsilon * root);
    if !(inv_c_sq > 1e-300) {
        return Err(Error::InvalidParams(format!(
            "spin vector vanishes for ω_a = {omega_a}, ε = {epsilon}, {branch:?}"
        )));
    }
    let norm_c = inv_c_sq.sqrt().recip();
    Ok(([-omega_a * norm_c, (epsilon + s * root) * norm_c], norm_c))
}

/// Builds the approximant state and energy for `family` at `p`.
pub fn approximant(
    family: ApproximantFamily,
    p: &ModelParams,
    trunc: &Truncation,
) -> Result<ApproximantState> {
    let zero_bias = p.epsilon == 0.0;
    match (family.bias, zero_bias) {
        (Bias::Zero, false) => {
            return Err(Error::FamilyParamMismatch(format!(
                "zero-bias family with ε = {}",
                p.epsilon
            )))
        }
        (Bias::Nonzero, true) => {
            return Err(Error::FamilyParamMismatch(
                "nonzero-bias family with ε = 0".into(),
            ))
        }
        _ => {}
    }
    if family.n > trunc.n_max {
        return Err(Error::TruncationTooSmall {
            what: "approximant photon index",
            needed: family.n,
            have: trunc.n_max,
        });
    }
    let (omega, g) = match family.model {
        ApproxModel::GqrNoA2 => (p.omega_c, p.g),
        ApproxModel::A2Renormalized => renormalized_frequencies(p)?,
    };
    let big_g = g / omega;
    let hb = p.hbar;
    let zp = if p.zero_point { 0.5 } else { 0.0 };
    let base = hb * omega * (family.n as f64 + zp) - hb * g * g / omega;

    let fock = StateVector::fock(family.n, trunc);
    let left = displacement(-big_g, trunc)?.apply(&fock)?;
    let right = displacement(big_g, trunc)?.apply(&fock)?;
    let s = family.branch.offset_sign();
    let h = std::f64::consts::FRAC_1_SQRT_2;

    let (state, energy, norm_c) = match (family.model, family.bias) {
        (_, Bias::Zero) => {
            let sign = if family.branch == Branch::Plus {
                1.0
            } else {
                -1.0
            };
            let state = StateVector::spin_superposition(c(h), &left, c(sign * h), &right)?;
            let energy = match family.model {
                ApproxModel::GqrNoA2 => base,
                ApproxModel::A2Renormalized => base + s * 0.5 * hb * p.omega_a,
            };
            (state, energy, h)
        }
        (ApproxModel::GqrNoA2, Bias::Nonzero) => {
            // Lower member is |↑⟩ for ε > 0 and |↓⟩ for ε < 0.
            let up_is_plus = p.epsilon > 0.0;
            let want_up = (family.branch == Branch::Plus) == up_is_plus;
            let state = if want_up {
                StateVector::spin_superposition(c(1.0), &left, c(0.0), &right)?
            } else {
                StateVector::spin_superposition(c(0.0), &left, c(1.0), &right)?
            };
            (state, base + s * 0.5 * hb * p.epsilon.abs(), 1.0)
        }
        (ApproxModel::A2Renormalized, Bias::Nonzero) => {
            let (spin, norm_c) = biased_spin_vector(p.omega_a, p.epsilon, family.branch)?;
            let state = StateVector::spin_superposition(c(spin[0]), &left, c(spin[1]), &right)?;
            (state, base + s * 0.5 * hb * p.atom_splitting(), norm_c)
        }
    };
    Ok(ApproximantState {
        state: state.normalized(),
        energy,
        family,
        normalization_c: norm_c,
    })
}

/// The Hamiltonian an approximant family is compared against.
pub fn target_hamiltonian(
    model: ApproxModel,
    p: &ModelParams,
    trunc: &Truncation,
) -> Result<LinearOperator> {
    match model {
        ApproxModel::GqrNoA2 => Ok(build_gqr(p, p.omega_c, p.g, trunc)),
        ApproxModel::A2Renormalized => crate::renormalization::build_renormalized(p, trunc),
    }
}

/// ‖(H − E)ψ‖ against the target Hamiltonian.
pub fn approximant_residual(
    approx: &ApproximantState,
    p: &ModelParams,
    trunc: &Truncation,
) -> Result<f64> {
    let h = target_hamiltonian(approx.family.model, p, trunc)?;
    let hv = h.apply(&approx.state)?;
    Ok(hv.try_sub(&approx.state.scale(c(approx.energy)))?.norm())
}

/// The residual restricted to exact eigenvectors within `window` of the
/// approximant energy: √(Σ_{|E_k − E| ≤ window} (E_k − E)² |⟨k|ψ⟩|²).
///
/// For the bare-coupling cats the plain residual is exactly ħω_a/2 at every
/// g, because the tunnelling term sends the approximant to far-off states.
/// This windowed form measures only the near-resonant error.
pub fn windowed_residual(
    approx: &ApproximantState,
    exact: &SpectralDecomposition,
    window: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (e, v) in exact.eigenvalues.iter().zip(&exact.eigenvectors) {
        let d = e - approx.energy;
        if d.abs() <= window {
            total += d * d * v.inner(&approx.state)?.norm_sqr();
        }
    }
    Ok(total.sqrt())
}

/// Operators entering the resolvent comparison.
#[derive(Debug, Clone)]
pub struct EffectiveHamiltonians {
    /// H̃(g) = ħ ω_eff a†a − (ħ/2)εσ_z − (ħ/2)ω_a Ξ₀(G)
    pub h_g: LinearOperator,
    /// H̃₀ = ℋ_atm + ħω_c a†a
    pub h_0: LinearOperator,
    pub xi0: LinearOperator,
    pub xi1: LinearOperator,
    /// K = ħ(ω_c − ω_eff) a†a, so that H̃(g) = H̃₀ − K + (ħω_a/2)Ξ₁.
    pub k: LinearOperator,
    pub omega_eff: f64,
    pub polaron_g: f64,
}

/// H̃(g) and H̃₀ with ω_eff = ω_g − Δ_g and G = g̃/ω_g.
pub fn effective_hamiltonians(
    p: &ModelParams,
    trunc: &Truncation,
) -> Result<EffectiveHamiltonians> {
    let rp = renormalize(p)?;
    effective_hamiltonians_with(p, rp.omega_g - rp.delta_g, rp.polaron_g, trunc)
}

/// Same construction with ω_eff and G given directly.
pub fn effective_hamiltonians_with(
    p: &ModelParams,
    omega_eff: f64,
    big_g: f64,
    trunc: &Truncation,
) -> Result<EffectiveHamiltonians> {
    let hb = p.hbar;
    let free = |omega: f64| {
        tensor(
            &SpinOp::identity(),
            &photon_hamiltonian(omega, hb, false, trunc),
        )
    };
    let xi0 = xi0(big_g, trunc)?;
    let xi1 = spin_only(&SpinOp::sigma_x(), trunc).try_sub(&xi0)?;
    let bias = spin_only(&SpinOp::sigma_z().scale(-0.5 * hb * p.epsilon), trunc);
    let h_g = &(&free(omega_eff)? + &bias) + &xi0.scale(-0.5 * hb * p.omega_a);
    let h_0 = &spin_only(&atom_hamiltonian(p), trunc) + &free(p.omega_c)?;
    let k = free(p.omega_c - omega_eff)?;
    Ok(EffectiveHamiltonians {
        h_g,
        h_0,
        xi0,
        xi1,
        k,
        omega_eff,
        polaron_g: big_g,
    })
}

/// (H − iħ)⁻¹ by LU; non-finite entries mean the solve broke down.
pub fn shifted_resolvent(h: &LinearOperator, hbar: f64) -> Result<Mat<C64>> {
    let shifted = h.shifted(C64::new(0.0, -hbar));
    let inv = shifted.entries().partial_piv_lu().inverse();
    let finite = (0..inv.ncols()).all(|j| {
        (0..inv.nrows()).all(|i| inv[(i, j)].re.is_finite() && inv[(i, j)].im.is_finite())
    });
    if !finite {
        return Err(Error::SolveFailure(format!(
            "non-finite inverse of {}-dimensional shifted operator",
            h.dim()
        )));
    }
    Ok(inv)
}

/// ‖(H̃(g) − iħ)⁻¹ − (H̃₀ − iħ)⁻¹‖_op
pub fn resolvent_gap(p: &ModelParams, trunc: &Truncation) -> Result<f64> {
    resolvent_gap_of(&effective_hamiltonians(p, trunc)?, p.hbar)
}

pub fn resolvent_gap_of(eff: &EffectiveHamiltonians, hbar: f64) -> Result<f64> {
    let rg = shifted_resolvent(&eff.h_g, hbar)?;
    let r0 = shifted_resolvent(&eff.h_0, hbar)?;
    Ok(op_norm((rg - r0).as_ref()))
}

/// One term of R = Σ I_j with its analytic bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermBound {
    pub norm: f64,
    pub bound: f64,
}

impl TermBound {
    pub fn holds(&self, slack: f64) -> bool {
        self.norm <= self.bound + slack
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofDiagnostics {
    /// ‖R‖_op
    pub resolvent_gap: f64,
    /// I₁ … I₆
    pub terms: [TermBound; 6],
    /// ‖R − Σ I_j‖_op, zero up to roundoff.
    pub decomposition_error: f64,
    /// ‖(H̃₀ − iħ)⁻¹‖ against 1/ħ.
    pub r0_norm: TermBound,
    /// ‖H̃₀(H̃₀ − iħ)⁻¹‖ against 1.
    pub h0_r0_norm: TermBound,
    /// ‖K(H̃₀ − iħ)⁻¹‖ against δ_g(1 + ½√(ω_a² + ε²)).
    pub k_r0_norm: TermBound,
    /// ‖Ξ₁‖ against 2.
    pub xi1_norm: TermBound,
    pub small_delta_g: f64,
}

impl ProofDiagnostics {
    pub fn terms_hold(&self, slack: f64) -> bool {
        self.terms.iter().all(|t| t.holds(slack))
    }

    pub fn sum_of_term_norms(&self) -> f64 {
        self.terms.iter().map(|t| t.norm).sum()
    }
}

/// Norms of the six terms of the second-order resolvent expansion and the
/// bounds they are expected to satisfy.
pub fn proof_diagnostics(p: &ModelParams, trunc: &Truncation) -> Result<ProofDiagnostics> {
    let rp = renormalize(p)?;
    let eff = effective_hamiltonians(p, trunc)?;
    proof_diagnostics_of(&eff, p, rp.small_delta_g)
}

pub fn proof_diagnostics_of(
    eff: &EffectiveHamiltonians,
    p: &ModelParams,
    small_delta_g: f64,
) -> Result<ProofDiagnostics> {
    let hb = p.hbar;
    let rg = shifted_resolvent(&eff.h_g, hb)?;
    let r0 = shifted_resolvent(&eff.h_0, hb)?;
    let k = eff.k.entries();
    let xi1 = eff.xi1.entries();
    let half_wa = C64::new(0.5 * hb * p.omega_a, 0.0);

    let k_r0 = k * &r0;
    let xi1_r0 = xi1 * &r0;
    let r0_xi1_r0 = &r0 * &xi1_r0;

    let i1 = &r0 * &k_r0;
    let i2 = faer::Scale(-half_wa) * &r0_xi1_r0;
    let i3 = &rg * (&k_r0 * &k_r0);
    let i4 = faer::Scale(-half_wa) * (&rg * (&k_r0 * &xi1_r0));
    let i5 = faer::Scale(-half_wa) * (&rg * (&xi1_r0 * &k_r0));
    let i6 = faer::Scale(half_wa * half_wa) * (&rg * (&xi1_r0 * &xi1_r0));

    let r = &rg - &r0;
    let sum = &i1 + &i2 + &i3 + &i4 + &i5 + &i6;
    let decomposition_error = op_norm((&r - &sum).as_ref());

    let a = 1.0 + 0.5 * p.atom_splitting();
    let wa = p.omega_a;
    let dg = small_delta_g;
    let r0xr0 = op_norm(r0_xi1_r0.as_ref());
    let bounds = [
        dg / hb * a,
        0.5 * hb * wa * r0xr0,
        dg * dg / hb * a * a,
        wa * dg / hb * a,
        wa * dg / hb * a,
        0.5 * hb * wa * wa * r0xr0,
    ];
    let mats = [&i1, &i2, &i3, &i4, &i5, &i6];
    let terms = std::array::from_fn(|j| TermBound {
        norm: op_norm(mats[j].as_ref()),
        bound: bounds[j],
    });

    let h0_r0 = eff.h_0.entries() * &r0;
    Ok(ProofDiagnostics {
        resolvent_gap: op_norm(r.as_ref()),
        terms,
        decomposition_error,
        r0_norm: TermBound {
            norm: op_norm(r0.as_ref()),
            bound: 1.0 / hb,
        },
        h0_r0_norm: TermBound {
            norm: op_norm(h0_r0.as_ref()),
            bound: 1.0,
        },
        k_r0_norm: TermBound {
            norm: op_norm(k_r0.as_ref()),
            bound: dg * a,
        },
        xi1_norm: TermBound {
            norm: eff.xi1.op_norm(),
            bound: 2.0,
        },
        small_delta_g: dg,
    })
}

/// Identity on the photon space tensored with the spin identity.
pub fn spin_photon_identity(trunc: &Truncation) -> LinearOperator {
    tensor(&SpinOp::identity(), &photon_identity(trunc)).expect("photon operand")
}
