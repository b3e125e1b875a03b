//! Truncated bosonic and spin operator algebra.
//!
//! Photon operators act on `|0⟩ … |n_max⟩`. Spin⊗photon operators use the
//! index layout `s·(n_max+1) + n` with `s = 0` for `|↑⟩` and `s = 1` for
//! `|↓⟩`, where `|↑⟩ = (1,0)` and `|↓⟩ = (0,1)`. That layout is part of the
//! dump format and must not change.
//!
//! Truncation corrupts the top rows of every operator built from `a`, so
//! operator identities are compared on the low-index block (see
//! [`LinearOperator::low_block`]).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use faer::{Mat, MatRef, Scale};

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::C64;

/// Default fraction of Fock levels on which operator identities are checked.
pub const DEFAULT_BLOCK_FRACTION: f64 = 0.8;

/// Relative tolerance for hermiticity flags.
pub const HERMITIAN_TOL: f64 = 1e-12;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Photon cutoff and the convergence policy attached to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Highest retained Fock level.
    pub n_max: usize,
    /// Maximum probability mass allowed on levels above `0.9·n_max`.
    pub tail_tol: f64,
    /// Whether pipelines may rebuild at a larger cutoff.
    pub auto_grow: bool,
    /// Hard cap for `n_max` when growing.
    pub n_ceiling: usize,
}

impl Truncation {
    pub fn new(n_max: usize, tail_tol: f64, auto_grow: bool, n_ceiling: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidTruncation(format!("n_max = {n_max} < 2")));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidTruncation(format!(
                "tail_tol = {tail_tol} must be > 0"
            )));
        }
        if n_ceiling < n_max {
            return Err(Error::InvalidTruncation(format!(
                "n_ceiling = {n_ceiling} < n_max = {n_max}"
            )));
        }
        Ok(Self {
            n_max,
            tail_tol,
            auto_grow,
            n_ceiling,
        })
    }

    /// Fixed cutoff with the default tail tolerance.
    ///
    /// Panics if `n_max < 2`.
    pub fn fixed(n_max: usize) -> Self {
        Self::new(n_max, 1e-8, false, n_max).expect("fixed truncation needs n_max >= 2")
    }

    /// Growable cutoff starting at `n_max`.
    pub fn auto(n_max: usize, tail_tol: f64, n_ceiling: usize) -> Result<Self> {
        Self::new(n_max, tail_tol, true, n_ceiling.max(n_max))
    }

    pub fn photon_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Same policy at a different cutoff; the ceiling is raised if needed.
    pub fn with_n_max(&self, n_max: usize) -> Self {
        Self {
            n_max,
            n_ceiling: self.n_ceiling.max(n_max),
            ..*self
        }
    }

    /// The next cutoff in the ×1.5 growth sequence, or `None` at the ceiling.
    pub fn grown(&self) -> Option<Self> {
        if self.n_max >= self.n_ceiling {
            return None;
        }
        let next = ((self.n_max as f64) * 1.5).ceil() as usize;
        Some(Self {
            n_max: next.min(self.n_ceiling),
            ..*self
        })
    }

    /// First Fock index counted as tail (`n > 0.9·n_max`).
    pub fn tail_start(&self) -> usize {
        (0.9 * self.n_max as f64).floor() as usize + 1
    }

    /// Number of Fock levels in the default comparison block.
    pub fn block_levels(&self, fraction: f64) -> usize {
        ((fraction * self.photon_dim() as f64).floor() as usize).clamp(1, self.photon_dim())
    }
}

impl Default for Truncation {
    fn default() -> Self {
        Self {
            n_max: 64,
            tail_tol: 1e-8,
            auto_grow: true,
            n_ceiling: 512,
        }
    }
}

/// Basis tag carried by operators and states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Photon(usize),
    SpinPhoton(usize),
}

impl Basis {
    pub fn dim(&self) -> usize {
        match *self {
            Basis::Photon(n) => n + 1,
            Basis::SpinPhoton(n) => 2 * (n + 1),
        }
    }

    pub fn n_max(&self) -> usize {
        match *self {
            Basis::Photon(n) | Basis::SpinPhoton(n) => n,
        }
    }

    pub fn is_spin_photon(&self) -> bool {
        matches!(self, Basis::SpinPhoton(_))
    }

    fn spin_sectors(&self) -> usize {
        if self.is_spin_photon() {
            2
        } else {
            1
        }
    }

    /// Indices of photon levels `< levels` in every spin sector.
    pub fn low_indices(&self, levels: usize) -> Vec<usize> {
        let stride = self.n_max() + 1;
        let levels = levels.min(stride);
        (0..self.spin_sectors())
            .flat_map(|s| (0..levels).map(move |n| s * stride + n))
            .collect()
    }

    pub fn parse_tag(tag: &str) -> Option<Basis> {
        let (name, rest) = tag.split_once('(')?;
        let n: usize = rest.strip_suffix(')')?.parse().ok()?;
        match name {
            "photon" => Some(Basis::Photon(n)),
            "spin_photon" => Some(Basis::SpinPhoton(n)),
            _ => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Photon(n) => write!(f, "photon({n})"),
            Basis::SpinPhoton(n) => write!(f, "spin_photon({n})"),
        }
    }
}

/// Two-level atom basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    /// Eigenvalue of σ_z.
    pub fn sigma_z(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }
}

/// A 2×2 complex matrix acting on the atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOp(pub [[C64; 2]; 2]);

impl SpinOp {
    pub const fn from_real(m: [[f64; 2]; 2]) -> Self {
        SpinOp([
            [
                C64 {
                    re: m[0][0],
                    im: 0.0,
                },
                C64 {
                    re: m[0][1],
                    im: 0.0,
                },
            ],
            [
                C64 {
                    re: m[1][0],
                    im: 0.0,
                },
                C64 {
                    re: m[1][1],
                    im: 0.0,
                },
            ],
        ])
    }

    pub const fn identity() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 1.0]])
    }

    pub const fn sigma_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub const fn sigma_y() -> Self {
        SpinOp([
            [C64 { re: 0.0, im: 0.0 }, C64 { re: 0.0, im: -1.0 }],
            [C64 { re: 0.0, im: 1.0 }, C64 { re: 0.0, im: 0.0 }],
        ])
    }

    pub const fn sigma_z() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, -1.0]])
    }

    /// σ₊ = (σ_x + iσ_y)/2, maps |↓⟩ to |↑⟩.
    pub const fn sigma_plus() -> Self {
        Self::from_real([[0.0, 1.0], [0.0, 0.0]])
    }

    pub const fn sigma_minus() -> Self {
        Self::from_real([[0.0, 0.0], [1.0, 0.0]])
    }

    /// σ₊σ₋ = |↑⟩⟨↑|
    pub const fn proj_up() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, 0.0]])
    }

    /// σ₋σ₊ = |↓⟩⟨↓|
    pub const fn proj_down() -> Self {
        Self::from_real([[0.0, 0.0], [0.0, 1.0]])
    }

    /// U_xz = (1/√2)[[1, 1], [−1, 1]], rotating σ_x-coupling into σ_z-coupling.
    pub fn u_xz() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real([[h, h], [-h, h]])
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        SpinOp([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, x: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= x);
        out
    }

    /// Eigenvalues of a hermitian 2×2 matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1].norm();
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - half, mean + half]
    }
}

impl Mul for SpinOp {
    type Output = SpinOp;
    fn mul(self, rhs: SpinOp) -> SpinOp {
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        SpinOp(out)
    }
}

impl Add for SpinOp {
    type Output = SpinOp;
    fn add(self, rhs: SpinOp) -> SpinOp {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for SpinOp {
    type Output = SpinOp;
    fn sub(self, rhs: SpinOp) -> SpinOp {
        self + rhs.scale(-1.0)
    }
}

/// Dense operator on a truncated photon or spin⊗photon space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    basis: Basis,
    entries: Mat<C64>,
}

impl LinearOperator {
    pub fn from_mat(basis: Basis, entries: Mat<C64>) -> Result<Self> {
        let d = basis.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::InvalidParams(format!(
                "{}x{} matrix does not fit basis {basis} (dim {d})",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { basis, entries })
    }

    pub fn from_fn(basis: Basis, f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = basis.dim();
        Self {
            basis,
            entries: Mat::from_fn(d, d, f),
        }
    }

    pub fn zeros(basis: Basis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            entries: Mat::zeros(d, d),
        }
    }

    pub fn identity(basis: Basis) -> Self {
        let d = basis.dim();
        Self {
            basis,
            entries: Mat::identity(d, d),
        }
    }

    pub fn diagonal(basis: Basis, diag: impl Fn(usize) -> f64) -> Self {
        Self::from_fn(basis, |i, j| if i == j { c(diag(i)) } else { c(0.0) })
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn entries(&self) -> MatRef<'_, C64> {
        self.entries.as_ref()
    }

    pub fn into_entries(self) -> Mat<C64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            entries: self.entries.adjoint().to_owned(),
        }
    }

    pub fn scale(&self, x: f64) -> Self {
        self.scale_complex(c(x))
    }

    pub fn scale_complex(&self, z: C64) -> Self {
        Self {
            basis: self.basis,
            entries: Scale(z) * &self.entries,
        }
    }

    /// `self + z·I`
    pub fn shifted(&self, z: C64) -> Self {
        let mut out = self.clone();
        for i in 0..out.dim() {
            out.entries[(i, i)] += z;
        }
        out
    }

    fn check_basis(&self, other: Basis) -> Result<()> {
        if self.basis != other {
            return Err(Error::BasisMismatch {
                expected: self.basis,
                found: other,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_basis(other.basis)?;
        Ok(Self {
            basis: self.basis,
            entries: &self.entries + &other.entries,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_basis(other.basis)?;
        Ok(Self {
            basis: self.basis,
            entries: &self.entries - &other.entries,
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_basis(other.basis)?;
        Ok(Self {
            basis: self.basis,
            entries: &self.entries * &other.entries,
        })
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    /// `self · other · self†`
    pub fn conjugate(&self, other: &Self) -> Self {
        &(self * other) * &self.adjoint()
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check_basis(state.basis)?;
        let d = self.dim();
        let amps = (0..d)
            .map(|i| (0..d).map(|j| self.entries[(i, j)] * state.amps[j]).sum())
            .collect();
        Ok(StateVector {
            basis: self.basis,
            amps,
        })
    }

    /// ⟨ψ|A|ψ⟩
    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        let applied = self.apply(state)?;
        state.inner(&applied)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(self.entries.as_ref())
    }

    /// max|A − A†| / max|A|, zero for the zero operator.
    pub fn hermiticity_residual(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst / scale
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_residual() <= HERMITIAN_TOL
    }

    /// Matrix restricted to photon levels `< levels` in every spin sector.
    pub fn low_block(&self, levels: usize) -> Mat<C64> {
        let idx = self.basis.low_indices(levels);
        Mat::from_fn(idx.len(), idx.len(), |i, j| self.entries[(idx[i], idx[j])])
    }

    /// max|A − B| on the low block.
    pub fn block_deviation(&self, other: &Self, levels: usize) -> Result<f64> {
        self.check_basis(other.basis)?;
        let diff = self.low_block(levels) - other.low_block(levels);
        Ok(max_abs(diff.as_ref()))
    }

    /// max|U†U − I| on the low block.
    pub fn unitarity_deviation(&self, levels: usize) -> f64 {
        let prod = self.adjoint() * self;
        let id = Self::identity(self.basis);
        prod.block_deviation(&id, levels).expect("same basis")
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        op_norm(self.entries.as_ref())
    }

    /// Keeps photon levels `0..=n_max` of every spin sector.
    pub fn truncated(&self, n_max: usize) -> Self {
        let basis = match self.basis {
            Basis::Photon(_) => Basis::Photon(n_max.min(self.basis.n_max())),
            Basis::SpinPhoton(_) => Basis::SpinPhoton(n_max.min(self.basis.n_max())),
        };
        let idx = self.basis.low_indices(basis.n_max() + 1);
        Self {
            basis,
            entries: Mat::from_fn(idx.len(), idx.len(), |i, j| self.entries[(idx[i], idx[j])]),
        }
    }

    /// Matrix exponential of `self`.
    pub fn exp(&self) -> Self {
        Self {
            basis: self.basis,
            entries: expm(self.entries.as_ref()),
        }
    }
}

impl<'a> Mul<&'a LinearOperator> for &'a LinearOperator {
    type Output = LinearOperator;
    fn mul(self, rhs: &'a LinearOperator) -> LinearOperator {
        self.try_mul(rhs).expect("operator product across bases")
    }
}

impl Mul<&LinearOperator> for LinearOperator {
    type Output = LinearOperator;
    fn mul(self, rhs: &LinearOperator) -> LinearOperator {
        &self * rhs
    }
}

impl<'a> Add<&'a LinearOperator> for &'a LinearOperator {
    type Output = LinearOperator;
    fn add(self, rhs: &'a LinearOperator) -> LinearOperator {
        self.try_add(rhs).expect("operator sum across bases")
    }
}

impl Add<&LinearOperator> for LinearOperator {
    type Output = LinearOperator;
    fn add(self, rhs: &LinearOperator) -> LinearOperator {
        &self + rhs
    }
}

impl Add for LinearOperator {
    type Output = LinearOperator;
    fn add(self, rhs: LinearOperator) -> LinearOperator {
        &self + &rhs
    }
}

impl<'a> Sub<&'a LinearOperator> for &'a LinearOperator {
    type Output = LinearOperator;
    fn sub(self, rhs: &'a LinearOperator) -> LinearOperator {
        self.try_sub(rhs).expect("operator difference across bases")
    }
}

impl Sub for LinearOperator {
    type Output = LinearOperator;
    fn sub(self, rhs: LinearOperator) -> LinearOperator {
        &self - &rhs
    }
}

impl Sub<&LinearOperator> for LinearOperator {
    type Output = LinearOperator;
    fn sub(self, rhs: &LinearOperator) -> LinearOperator {
        &self - rhs
    }
}

impl Neg for LinearOperator {
    type Output = LinearOperator;
    fn neg(self) -> LinearOperator {
        self.scale(-1.0)
    }
}

pub fn max_abs(m: MatRef<'_, C64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Largest singular value of a dense matrix.
pub fn op_norm(m: MatRef<'_, C64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let sv = m
        .singular_values()
        .expect("singular value decomposition did not converge");
    sv.into_iter().fold(0.0, f64::max)
}

/// Normalized or unnormalized amplitude vector with a basis tag.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    basis: Basis,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(basis: Basis, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::InvalidParams(format!(
                "{} amplitudes do not fit basis {basis}",
                amps.len()
            )));
        }
        Ok(Self { basis, amps })
    }

    pub fn zeros(basis: Basis) -> Self {
        Self {
            basis,
            amps: vec![c(0.0); basis.dim()],
        }
    }

    /// Photon Fock state |n⟩.
    pub fn fock(n: usize, trunc: &Truncation) -> Self {
        assert!(
            n <= trunc.n_max,
            "Fock level {n} above cutoff {}",
            trunc.n_max
        );
        let mut s = Self::zeros(Basis::Photon(trunc.n_max));
        s.amps[n] = c(1.0);
        s
    }

    /// |s⟩|n⟩
    pub fn spin_fock(spin: Spin, n: usize, trunc: &Truncation) -> Self {
        Self::tensor(
            [spin_amp(spin, Spin::Up), spin_amp(spin, Spin::Down)],
            &Self::fock(n, trunc),
        )
        .expect("photon basis")
    }

    /// (α|↑⟩ + β|↓⟩) ⊗ |φ⟩
    pub fn tensor(spin: [C64; 2], photon: &StateVector) -> Result<Self> {
        let Basis::Photon(n) = photon.basis else {
            return Err(Error::BasisMismatch {
                expected: Basis::Photon(photon.basis.n_max()),
                found: photon.basis,
            });
        };
        let amps = spin
            .iter()
            .flat_map(|&s| photon.amps.iter().map(move |&p| s * p))
            .collect();
        Ok(Self {
            basis: Basis::SpinPhoton(n),
            amps,
        })
    }

    /// `a·|↑⟩|up⟩ + b·|↓⟩|down⟩`
    pub fn spin_superposition(
        a: C64,
        up: &StateVector,
        b: C64,
        down: &StateVector,
    ) -> Result<Self> {
        if up.basis != down.basis {
            return Err(Error::BasisMismatch {
                expected: up.basis,
                found: down.basis,
            });
        }
        let mut out = Self::tensor([a, c(0.0)], up)?;
        let lower = Self::tensor([c(0.0), b], down)?;
        out.amps
            .iter_mut()
            .zip(&lower.amps)
            .for_each(|(x, y)| *x += y);
        Ok(out)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        assert!(n > 0.0, "cannot normalize the zero vector");
        self.scale(c(1.0 / n))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            basis: self.basis,
            amps: self.amps.iter().map(|a| a * z).collect(),
        }
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis,
                found: other.basis,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn try_add(&self, other: &StateVector) -> Result<Self> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis,
                found: other.basis,
            });
        }
        Ok(Self {
            basis: self.basis,
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &StateVector) -> Result<Self> {
        self.try_add(&other.scale(c(-1.0)))
    }

    /// Photon amplitudes in one spin sector.
    pub fn spin_component(&self, spin: Spin) -> Result<&[C64]> {
        let Basis::SpinPhoton(n) = self.basis else {
            return Err(Error::BasisMismatch {
                expected: Basis::SpinPhoton(self.basis.n_max()),
                found: self.basis,
            });
        };
        let start = spin.index() * (n + 1);
        Ok(&self.amps[start..start + n + 1])
    }

    /// Probability mass on Fock levels `n > 0.9·n_max`, summed over spin.
    pub fn tail_mass(&self) -> f64 {
        let n_max = self.basis.n_max();
        let start = Truncation::fixed(n_max.max(2)).tail_start();
        let stride = n_max + 1;
        (0..self.basis.spin_sectors())
            .flat_map(|s| (start..stride).map(move |n| s * stride + n))
            .map(|i| self.amps[i].norm_sqr())
            .sum()
    }

    /// Embeds into a larger (or equal) cutoff, padding with zeros.
    pub fn padded(&self, n_max: usize) -> Self {
        let old = self.basis.n_max();
        assert!(n_max >= old, "padding cannot shrink the cutoff");
        let basis = match self.basis {
            Basis::Photon(_) => Basis::Photon(n_max),
            Basis::SpinPhoton(_) => Basis::SpinPhoton(n_max),
        };
        let mut out = Self::zeros(basis);
        for s in 0..self.basis.spin_sectors() {
            for n in 0..=old {
                out.amps[s * (n_max + 1) + n] = self.amps[s * (old + 1) + n];
            }
        }
        out
    }
}

fn spin_amp(spin: Spin, component: Spin) -> C64 {
    if spin == component {
        c(1.0)
    } else {
        c(0.0)
    }
}

/// Photon annihilation operator: ⟨n−1|a|n⟩ = √n.
pub fn annihilation(trunc: &Truncation) -> LinearOperator {
    LinearOperator::from_fn(Basis::Photon(trunc.n_max), |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt())
        } else {
            c(0.0)
        }
    })
}

pub fn creation(trunc: &Truncation) -> LinearOperator {
    annihilation(trunc).adjoint()
}

/// a†a, diagonal with entries 0…n_max.
pub fn number(trunc: &Truncation) -> LinearOperator {
    LinearOperator::diagonal(Basis::Photon(trunc.n_max), |n| n as f64)
}

pub fn photon_identity(trunc: &Truncation) -> LinearOperator {
    LinearOperator::identity(Basis::Photon(trunc.n_max))
}

/// a + a†
pub fn quadrature(trunc: &Truncation) -> LinearOperator {
    let a = annihilation(trunc);
    &a + &a.adjoint()
}

/// (−1)^{a†a}
pub fn photon_parity(trunc: &Truncation) -> LinearOperator {
    LinearOperator::diagonal(Basis::Photon(trunc.n_max), |n| {
        if n % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    })
}

/// D(β) = exp[β(a† − a)] for real β.
///
/// Requires β² ≤ n_max/2 unless the truncation may grow.
pub fn displacement(beta: f64, trunc: &Truncation) -> Result<LinearOperator> {
    let needed = (2.0 * beta * beta).ceil() as usize;
    if needed > trunc.n_max && !trunc.auto_grow {
        return Err(Error::TruncationTooSmall {
            what: "displacement",
            needed,
            have: trunc.n_max,
        });
    }
    if beta == 0.0 {
        return Ok(photon_identity(trunc));
    }
    let a = annihilation(trunc);
    let generator = (&a.adjoint() - &a).scale(beta);
    Ok(generator.exp())
}

/// S(r) = exp[(r/2)(a² − a†²)], so that S a S† = cosh(r) a + sinh(r) a†.
///
/// Requires e^{2|r|} ≤ n_max/8 unless the truncation may grow.
pub fn squeeze(r: f64, trunc: &Truncation) -> Result<LinearOperator> {
    let needed = (8.0 * (2.0 * r.abs()).exp()).ceil() as usize;
    if needed > trunc.n_max && !trunc.auto_grow {
        return Err(Error::TruncationTooSmall {
            what: "squeeze",
            needed,
            have: trunc.n_max,
        });
    }
    if r == 0.0 {
        return Ok(photon_identity(trunc));
    }
    let a = annihilation(trunc);
    let a2 = &a * &a;
    let generator = (&a2 - &a2.adjoint()).scale(0.5 * r);
    Ok(generator.exp())
}

/// Largest cutoff [`squeezed_columns`] will pad to.
pub const PAD_CEILING: usize = 4096;

/// Columns `S(r)|j⟩` for `j < levels`, computed on a padded cutoff.
///
/// A squeeze built at cutoff N only reproduces the infinite-dimensional one
/// on levels whose squeezed image stays well inside N (about N/(4e^{2|r|})).
/// Here the cutoff starts at `1.5·(levels+½)·e^{2|r|} + 64` and grows ×1.5
/// until every returned column has at most `tail_tol` mass on its top 10%.
/// Returns the padded cutoff and the `(n_pad+1) × levels` column block.
pub fn squeezed_columns(r: f64, levels: usize, tail_tol: f64) -> Result<(usize, Mat<C64>)> {
    let mut n_pad = (1.5 * (levels as f64 + 0.5) * (2.0 * r.abs()).exp()).ceil() as usize + 64;
    loop {
        let trunc = Truncation::fixed(n_pad);
        let s = squeeze(
            r,
            &Truncation {
                auto_grow: true,
                ..trunc
            },
        )?;
        let cols = s.entries().submatrix(0, 0, n_pad + 1, levels).to_owned();
        let start = trunc.tail_start();
        let worst_tail = (0..levels)
            .map(|j| {
                (start..=n_pad)
                    .map(|i| cols[(i, j)].norm_sqr())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        if worst_tail <= tail_tol {
            return Ok((n_pad, cols));
        }
        if n_pad >= PAD_CEILING {
            return Err(Error::TruncationCeiling {
                ceiling: PAD_CEILING,
            });
        }
        n_pad = ((n_pad as f64 * 1.5).ceil() as usize).min(PAD_CEILING);
    }
}

/// ⟨i|S(r)† X S(r)|j⟩ for `i, j < levels`, with `X` built by `build` at the
/// padded cutoff chosen by [`squeezed_columns`].
pub fn squeeze_conjugated_block(
    r: f64,
    levels: usize,
    tail_tol: f64,
    build: impl Fn(&Truncation) -> LinearOperator,
) -> Result<Mat<C64>> {
    let (n_pad, cols) = squeezed_columns(r, levels, tail_tol)?;
    let x = build(&Truncation::fixed(n_pad));
    Ok(cols.adjoint() * (x.entries() * &cols))
}

/// S(r)·v for a photon amplitude vector, without forming S(r).
///
/// Integrates v' = K v with the sparse generator K = (r/2)(a² − a†²) on a
/// padded cutoff, in steps with ‖hK‖ ≤ 1 and a Taylor series per step. The
/// cutoff starts at `1.5·len + 64` and grows ×1.5 until the top 10% of the
/// padded result holds at most `tail_tol` of its mass. Returns the padded
/// amplitudes.
pub fn apply_squeeze(r: f64, v: &[C64], tail_tol: f64) -> Result<Vec<C64>> {
    if r == 0.0 {
        return Ok(v.to_vec());
    }
    let mut n_pad = (1.5 * v.len() as f64).ceil() as usize + 64;
    loop {
        let out = squeeze_flow(r, v, n_pad);
        let start = Truncation::fixed(n_pad).tail_start();
        let tail: f64 = out[start..].iter().map(|z| z.norm_sqr()).sum();
        let total: f64 = out.iter().map(|z| z.norm_sqr()).sum();
        if tail <= tail_tol * total.max(f64::MIN_POSITIVE) {
            return Ok(out);
        }
        if n_pad >= PAD_CEILING {
            return Err(Error::TruncationCeiling {
                ceiling: PAD_CEILING,
            });
        }
        n_pad = ((n_pad as f64 * 1.5).ceil() as usize).min(PAD_CEILING);
    }
}

fn squeeze_flow(r: f64, v: &[C64], n_pad: usize) -> Vec<C64> {
    let dim = n_pad + 1;
    let half = 0.5 * r;
    // (a²)_{n,n+2} = √((n+1)(n+2))
    let up: Vec<f64> = (0..dim)
        .map(|n| (((n + 1) * (n + 2)) as f64).sqrt())
        .collect();
    let apply_k = |x: &[C64], y: &mut [C64]| {
        for n in 0..dim {
            let mut acc = C64::new(0.0, 0.0);
            if n + 2 < dim {
                acc += x[n + 2] * up[n];
            }
            if n >= 2 {
                acc -= x[n - 2] * up[n - 2];
            }
            y[n] = acc * half;
        }
    };
    let k_norm = r.abs() * up[dim - 1];
    let steps = k_norm.ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;

    let mut x = vec![C64::new(0.0, 0.0); dim];
    let m = v.len().min(dim);
    x[..m].copy_from_slice(&v[..m]);
    let mut term = vec![C64::new(0.0, 0.0); dim];
    let mut next = vec![C64::new(0.0, 0.0); dim];
    for _ in 0..steps {
        term.copy_from_slice(&x);
        let scale: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for j in 1..60 {
            apply_k(&term, &mut next);
            let f = h / j as f64;
            let mut size = 0.0;
            for (t, n) in term.iter_mut().zip(&next) {
                *t = n * f;
                size += t.norm_sqr();
            }
            for (xi, t) in x.iter_mut().zip(&term) {
                *xi += t;
            }
            if size.sqrt() <= 1e-18 * scale {
                break;
            }
        }
    }
    x
}

/// spin_op ⊗ photon_op in the `s·(N+1)+n` layout.
pub fn tensor(spin_op: &SpinOp, photon_op: &LinearOperator) -> Result<LinearOperator> {
    let Basis::Photon(n) = photon_op.basis() else {
        return Err(Error::BasisMismatch {
            expected: Basis::Photon(photon_op.basis().n_max()),
            found: photon_op.basis(),
        });
    };
    let stride = n + 1;
    Ok(LinearOperator::from_fn(Basis::SpinPhoton(n), |i, j| {
        let (si, ni) = (i / stride, i % stride);
        let (sj, nj) = (j / stride, j % stride);
        spin_op.get(si, sj) * photon_op.get(ni, nj)
    }))
}

/// |↑⟩⟨↑| ⊗ up + |↓⟩⟨↓| ⊗ down
pub fn spin_block_diag(up: &LinearOperator, down: &LinearOperator) -> Result<LinearOperator> {
    let u = tensor(&SpinOp::proj_up(), up)?;
    let d = tensor(&SpinOp::proj_down(), down)?;
    u.try_add(&d)
}

/// spin_op ⊗ I
pub fn spin_only(spin_op: &SpinOp, trunc: &Truncation) -> LinearOperator {
    tensor(spin_op, &photon_identity(trunc)).expect("photon identity")
}
