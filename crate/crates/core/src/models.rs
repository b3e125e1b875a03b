//! Hamiltonian builders.
//!
//! Two equivalent forms of the biased Rabi Hamiltonian are provided. The
//! σ_x-coupled form
//!
//! ```text
//! H = (ħ/2)(ω_a σ_z − ε σ_x) + ħω(a†a + ½) + ħg σ_x (a + a†)
//! ```
//!
//! and the σ_z-coupled form used everywhere else,
//!
//! ```text
//! ℋ = −(ħ/2)(ω_a σ_x + ε σ_z) + ħω(a†a + ½) + ħg σ_z (a + a†).
//! ```
//!
//! They are related by `ℋ = U_xz H U_xz†` with `U_xz = (1/√2)[[1, 1], [−1, 1]]`
//! exactly as written: `U_xz σ_z U_xz† = −σ_x` and `U_xz σ_x U_xz† = σ_z`, so no
//! extra sign on ε is needed.

use crate::error::{Error, Result};
use crate::fock::{
    number, photon_identity, photon_parity, quadrature, spin_only, tensor, LinearOperator, SpinOp,
    Truncation,
};

/// How the `(a + a†)²` coefficient C_g depends on g.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum CouplingPolicy {
    /// No quadratic term configured.
    #[default]
    None,
    /// C_g = C·g.
    Linear { c: f64 },
    /// Piecewise-linear interpolation on `(g, C_g)` pairs sorted by g.
    Custom(Vec<(f64, f64)>),
}

impl CouplingPolicy {
    pub fn custom(mut table: Vec<(f64, f64)>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidParams("empty coupling table".into()));
        }
        if table
            .iter()
            .any(|&(g, c)| !g.is_finite() || !c.is_finite() || c < 0.0)
        {
            return Err(Error::InvalidParams(
                "coupling table needs finite g and C_g ≥ 0".into(),
            ));
        }
        table.sort_by(|a, b| a.0.total_cmp(&b.0));
        if table.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams("duplicate g in coupling table".into()));
        }
        Ok(CouplingPolicy::Custom(table))
    }

    /// Same C_g for every g; handy for fixing the A² strength in tests.
    pub fn constant(c_g: f64) -> Self {
        CouplingPolicy::Custom(vec![(f64::NEG_INFINITY, c_g), (f64::INFINITY, c_g)])
    }

    pub fn is_none(&self) -> bool {
        matches!(self, CouplingPolicy::None)
    }

    pub fn c_g(&self, g: f64) -> Result<f64> {
        match self {
            CouplingPolicy::None => Err(Error::PolicyMissing),
            CouplingPolicy::Linear { c } => Ok(c * g),
            CouplingPolicy::Custom(table) => interpolate(table, g),
        }
    }

    /// lim C_g/g, defined for the linear policy only.
    pub fn c_infinity(&self) -> Option<f64> {
        match self {
            CouplingPolicy::Linear { c } => Some(*c),
            _ => None,
        }
    }
}

fn interpolate(table: &[(f64, f64)], g: f64) -> Result<f64> {
    let (first, last) = (table[0], table[table.len() - 1]);
    if g < first.0 || g > last.0 || g.is_nan() {
        return Err(Error::PolicyOutOfRange(g));
    }
    if table.len() == 1 || g == last.0 {
        return Ok(last.1);
    }
    let k = table.partition_point(|&(x, _)| x <= g) - 1;
    let (g0, c0) = table[k];
    let (g1, c1) = table[k + 1];
    if g0.is_infinite() || g1.is_infinite() {
        // Constant extension between infinite knots.
        return Ok(if g0.is_infinite() { c1 } else { c0 });
    }
    Ok(c0 + (c1 - c0) * (g - g0) / (g1 - g0))
}

/// Physical parameters. Frequencies are angular; energies carry ħ explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub omega_c: f64,
    /// Tunnel splitting.
    pub omega_a: f64,
    /// Energy bias; either sign.
    pub epsilon: f64,
    pub g: f64,
    pub hbar: f64,
    pub coupling: CouplingPolicy,
    /// Include ħω/2 in the photon Hamiltonian.
    pub zero_point: bool,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            omega_c: 1.0,
            omega_a: 1.0,
            epsilon: 0.0,
            g: 0.0,
            hbar: 1.0,
            coupling: CouplingPolicy::None,
            zero_point: true,
        }
    }
}

impl ModelParams {
    pub fn new(omega_c: f64, omega_a: f64, epsilon: f64, g: f64) -> Result<Self> {
        Self {
            omega_c,
            omega_a,
            epsilon,
            g,
            ..Self::default()
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let finite = [self.omega_c, self.omega_a, self.epsilon, self.g, self.hbar]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.omega_c <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega_c = {} must be > 0",
                self.omega_c
            )));
        }
        if self.omega_a < 0.0 {
            return Err(Error::InvalidParams(format!(
                "omega_a = {} must be ≥ 0",
                self.omega_a
            )));
        }
        if self.hbar <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "hbar = {} must be > 0",
                self.hbar
            )));
        }
        if self.g < 0.0 {
            return Err(Error::InvalidParams(format!("g = {} must be ≥ 0", self.g)));
        }
        if let CouplingPolicy::Linear { c } = self.coupling {
            if !(c > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "linear coupling C = {c} must be > 0"
                )));
            }
        }
        Ok(self)
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..self.clone() }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_coupling(&self, coupling: CouplingPolicy) -> Self {
        Self {
            coupling,
            ..self.clone()
        }
    }

    /// C_g at the configured g.
    pub fn c_g(&self) -> Result<f64> {
        self.coupling.c_g(self.g)
    }

    /// √(ω_a² + ε²)
    pub fn atom_splitting(&self) -> f64 {
        self.omega_a.hypot(self.epsilon)
    }
}

/// −(ħ/2)(ω_a σ_x + ε σ_z)
pub fn atom_hamiltonian(p: &ModelParams) -> SpinOp {
    (SpinOp::sigma_x().scale(p.omega_a) + SpinOp::sigma_z().scale(p.epsilon)).scale(-0.5 * p.hbar)
}

/// (ħ/2)(ω_a σ_z − ε σ_x)
pub fn atom_hamiltonian_sigma_x(p: &ModelParams) -> SpinOp {
    (SpinOp::sigma_z().scale(p.omega_a) - SpinOp::sigma_x().scale(p.epsilon)).scale(0.5 * p.hbar)
}

/// ħω(a†a + ½), or ħω a†a when `zero_point` is off.
pub fn photon_hamiltonian(
    omega: f64,
    hbar: f64,
    zero_point: bool,
    trunc: &Truncation,
) -> LinearOperator {
    let shift = if zero_point { 0.5 } else { 0.0 };
    LinearOperator::diagonal(crate::fock::Basis::Photon(trunc.n_max), |n| {
        hbar * omega * (n as f64 + shift)
    })
}

/// (a + a†)² in normal-ordered form a² + a†² + 2a†a + 1.
pub fn quadrature_squared(trunc: &Truncation) -> LinearOperator {
    let a = crate::fock::annihilation(trunc);
    let a2 = &a * &a;
    let n2 = number(trunc).scale(2.0);
    &(&a2 + &a2.adjoint()) + &(&n2 + &photon_identity(trunc))
}

/// σ_z-coupled Hamiltonian at photon frequency `omega` and coupling `g`.
pub fn build_gqr(p: &ModelParams, omega: f64, g: f64, trunc: &Truncation) -> LinearOperator {
    let atom = spin_only(&atom_hamiltonian(p), trunc);
    let field = tensor(
        &SpinOp::identity(),
        &photon_hamiltonian(omega, p.hbar, p.zero_point, trunc),
    )
    .expect("photon operand");
    let coupling =
        tensor(&SpinOp::sigma_z(), &quadrature(trunc).scale(p.hbar * g)).expect("photon operand");
    &(&atom + &field) + &coupling
}

/// σ_x-coupled Hamiltonian at (ω_c, g).
pub fn build_gqr_sigma_x(p: &ModelParams, trunc: &Truncation) -> LinearOperator {
    let atom = spin_only(&atom_hamiltonian_sigma_x(p), trunc);
    let field = tensor(
        &SpinOp::identity(),
        &photon_hamiltonian(p.omega_c, p.hbar, p.zero_point, trunc),
    )
    .expect("photon operand");
    let coupling =
        tensor(&SpinOp::sigma_x(), &quadrature(trunc).scale(p.hbar * p.g)).expect("photon operand");
    &(&atom + &field) + &coupling
}

/// ℋ(ω_c, g) + ħ g C_g (a + a†)².
pub fn build_a2(p: &ModelParams, trunc: &Truncation) -> Result<LinearOperator> {
    let c_g = p.c_g()?;
    let base = build_gqr(p, p.omega_c, p.g, trunc);
    let a2 = tensor(
        &SpinOp::identity(),
        &quadrature_squared(trunc).scale(p.hbar * p.g * c_g),
    )?;
    Ok(&base + &a2)
}

/// Sign of the linear source term in a van Hove Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// ħω_c(a†a + ½) ± ħg(a + a†) on the photon space.
///
/// Its eigenstates are D(∓g/ω_c)|n⟩ with energies ħω_c(n + ½) − ħg²/ω_c.
pub fn build_van_hove(sign: Sign, p: &ModelParams, trunc: &Truncation) -> LinearOperator {
    let field = photon_hamiltonian(p.omega_c, p.hbar, p.zero_point, trunc);
    &field + &quadrature(trunc).scale(sign.value() * p.hbar * p.g)
}

/// −(−1)^{a†a} σ_x, the parity of the σ_z-coupled form at ε = 0.
pub fn parity_operator(trunc: &Truncation) -> LinearOperator {
    tensor(&SpinOp::sigma_x().scale(-1.0), &photon_parity(trunc)).expect("photon operand")
}

/// (−1)^{a†a} σ_z, the parity of the σ_x-coupled form at ε = 0.
pub fn parity_operator_sigma_x(trunc: &Truncation) -> LinearOperator {
    tensor(&SpinOp::sigma_z(), &photon_parity(trunc)).expect("photon operand")
}

/// (U_xz ⊗ I) op (U_xz ⊗ I)†
pub fn rotate_xz(op: &LinearOperator, trunc: &Truncation) -> LinearOperator {
    spin_only(&SpinOp::u_xz(), trunc).conjugate(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{annihilation, Basis};
    use crate::C64;

    fn eigenvalues(h: &LinearOperator) -> Vec<f64> {
        let mut v = h
            .entries()
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .unwrap();
        v.sort_by(f64::total_cmp);
        v
    }

    fn params(omega_a: f64, epsilon: f64, g: f64) -> ModelParams {
        ModelParams::new(1.0, omega_a, epsilon, g).unwrap()
    }

    #[test]
    fn free_spectrum_is_atom_plus_oscillator() {
        let t = Truncation::fixed(20);
        let h = build_gqr(&params(1.0, 0.0, 0.0), 1.0, 0.0, &t);
        let ev = eigenvalues(&h);
        let mut want: Vec<f64> = (0..=20).flat_map(|n| [n as f64, n as f64 + 1.0]).collect();
        want.sort_by(f64::total_cmp);
        for (e, w) in ev.iter().zip(&want) {
            assert!((e - w).abs() < 1e-12, "{e} vs {w}");
        }
    }

    #[test]
    fn coupling_entry() {
        let t = Truncation::fixed(6);
        let mut p = params(1.0, 0.2, 0.7);
        p.hbar = 1.3;
        let h = build_gqr(&p, 1.0, p.g, &t);
        // ⟨↑,1|H|↑,0⟩ = ħg·√1
        assert!((h.get(1, 0) - C64::new(1.3 * 0.7, 0.0)).norm() < 1e-15);
        assert!(h.hermiticity_residual() < 1e-15);
    }

    #[test]
    fn sigma_x_form_rotates_into_sigma_z_form() {
        let t = Truncation::fixed(40);
        let p = params(0.8, -0.35, 1.7);
        let hx = build_gqr_sigma_x(&p, &t);
        let hz = build_gqr(&p, p.omega_c, p.g, &t);
        let diff = (&rotate_xz(&hx, &t) - &hz).max_abs();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn sigma_x_form_matches_free_spectrum() {
        let t = Truncation::fixed(15);
        let p = params(1.0, 0.0, 0.0);
        let ex = eigenvalues(&build_gqr_sigma_x(&p, &t));
        let ez = eigenvalues(&build_gqr(&p, 1.0, 0.0, &t));
        for (a, b) in ex.iter().zip(&ez) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_x_parity_commutes_at_zero_bias() {
        let t = Truncation::fixed(30);
        let h = build_gqr_sigma_x(&params(1.0, 0.0, 2.0), &t);
        let comm = h.commutator(&parity_operator_sigma_x(&t));
        assert!(comm.max_abs() < 1e-12);
    }

    #[test]
    fn parity_is_an_involution_commuting_with_rabi() {
        let t = Truncation::fixed(30);
        let par = parity_operator(&t);
        let sq = &par * &par;
        assert_eq!(sq, LinearOperator::identity(Basis::SpinPhoton(30)));
        assert!(par.is_hermitian());
        for g in [0.0, 1.0, 3.0] {
            let h = build_gqr(&params(1.0, 0.0, g), 1.0, g, &t);
            assert!(h.commutator(&par).max_abs() < 1e-12);
        }
    }

    #[test]
    fn a2_matrix_elements() {
        let t = Truncation::fixed(10);
        let p = params(1.0, 0.0, 2.0).with_coupling(CouplingPolicy::constant(2.0));
        let h = build_a2(&p, &t).unwrap();
        // ⟨↑,0|ħgC_g(a+a†)²|↑,2⟩ = ħgC_g·√2
        assert!((h.get(0, 2).re - 4.0 * 2f64.sqrt()).abs() < 1e-13);
        let x = quadrature(&t);
        let xx = &x * &x;
        // Normal-ordered square agrees with x·x away from the top row.
        assert!(quadrature_squared(&t).block_deviation(&xx, 10).unwrap() < 1e-13);
    }

    #[test]
    fn a2_with_zero_coefficient_is_plain_gqr() {
        let t = Truncation::fixed(12);
        let p = params(1.0, 0.4, 1.5).with_coupling(CouplingPolicy::constant(0.0));
        assert_eq!(build_a2(&p, &t).unwrap(), build_gqr(&p, 1.0, 1.5, &t));
    }

    #[test]
    fn a2_requires_policy() {
        let t = Truncation::fixed(4);
        assert_eq!(
            build_a2(&params(1.0, 0.0, 1.0), &t),
            Err(Error::PolicyMissing)
        );
    }

    #[test]
    fn van_hove_spectrum() {
        let t = Truncation::fixed(80);
        let p = params(1.0, 0.0, 1.5);
        for sign in [Sign::Plus, Sign::Minus] {
            let ev = eigenvalues(&build_van_hove(sign, &p, &t));
            for (n, e) in ev.iter().take(9).enumerate() {
                assert!((e - (n as f64 + 0.5 - 2.25)).abs() < 1e-6, "{sign:?} n={n}");
            }
        }
    }

    #[test]
    fn zero_point_flag_shifts_by_half_quantum() {
        let t = Truncation::fixed(8);
        let mut p = params(1.0, 0.0, 0.5);
        let with = build_gqr(&p, 2.0, p.g, &t);
        p.zero_point = false;
        let without = build_gqr(&p, 2.0, p.g, &t);
        let diff = &with - &without;
        assert_eq!(diff, LinearOperator::identity(Basis::SpinPhoton(8)));
    }

    #[test]
    fn policy_interpolation() {
        let p = CouplingPolicy::custom(vec![(4.0, 2.0), (0.0, 0.0)]).unwrap();
        assert_eq!(p.c_g(1.0).unwrap(), 0.5);
        assert_eq!(p.c_g(4.0).unwrap(), 2.0);
        assert_eq!(p.c_g(5.0), Err(Error::PolicyOutOfRange(5.0)));
        assert_eq!(CouplingPolicy::Linear { c: 1.5 }.c_g(2.0).unwrap(), 3.0);
        assert_eq!(CouplingPolicy::constant(0.7).c_g(123.0).unwrap(), 0.7);
        assert!(CouplingPolicy::custom(vec![]).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, -1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.3, 1.0).is_ok());
        let bad = ModelParams {
            coupling: CouplingPolicy::Linear { c: 0.0 },
            ..Default::default()
        };
        assert!(bad.validated().is_err());
    }

    #[test]
    fn matrix_ccr_for_sigma_z_a() {
        let t = Truncation::fixed(25);
        let alpha = tensor(&SpinOp::sigma_z(), &annihilation(&t)).unwrap();
        let comm = alpha.commutator(&alpha.adjoint());
        let dev = comm.block_deviation(&LinearOperator::identity(Basis::SpinPhoton(25)), 25);
        assert!(dev.unwrap() < 1e-13);
    }
}
