//! Two-qubit (spin ⊗ path) Hilbert-space primitives.
//!
//! Everything in this crate lives on a fixed 4-dimensional space with basis
//! order (|↑,I⟩, |↑,II⟩, |↓,I⟩, |↓,II⟩): the spin factor is the slow index,
//! the beam-path factor the fast one. With that convention a basis index is
//! `2 * spin + arm` and all phase conventions below are literal.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for algebra constructed in closed form (tensor products,
/// projectors, basis states).
pub const TOL_ALGEBRA: f64 = 1e-12;
/// Tolerance for quantities accumulated through several floating-point
/// operations (expectation values, probability sums).
pub const TOL_NUMERIC: f64 = 1e-10;
/// Tolerance applied when validating caller-supplied matrices and vectors.
pub const TOL_INPUT: f64 = 1e-9;

#[inline]
fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Errors from constructing or validating states and observables.
#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("matrix `{label}` is not Hermitian (residual {residual:.3e})")]
    NotHermitian { label: String, residual: f64 },
    #[error("state vector is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("cannot normalize the zero vector")]
    ZeroVector,
    #[error("density matrix trace is {trace}, expected 1")]
    NotUnitTrace { trace: f64 },
    #[error("density matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("mixture weights must be nonnegative and not all zero")]
    BadMixtureWeights,
}

// ---------------------------------------------------------------------------
// Small complex matrices
// ---------------------------------------------------------------------------

/// A 2×2 complex matrix, used for the single-qubit Pauli factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        Mat2([[cr(1.0), cr(0.0)], [cr(0.0), cr(1.0)]])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let mut out = [[cr(0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        Mat2(out)
    }
}

/// Pauli X on a single qubit.
pub fn sigma_x() -> Mat2 {
    Mat2([[cr(0.0), cr(1.0)], [cr(1.0), cr(0.0)]])
}

/// Pauli Y on a single qubit.
pub fn sigma_y() -> Mat2 {
    Mat2([[cr(0.0), c(0.0, -1.0)], [c(0.0, 1.0), cr(0.0)]])
}

/// Pauli Z on a single qubit.
pub fn sigma_z() -> Mat2 {
    Mat2([[cr(1.0), cr(0.0)], [cr(0.0), cr(-1.0)]])
}

/// A 4×4 complex matrix on the spin ⊗ path space.
#[derive(Debug, Clone, Copy)]
pub struct Mat4(pub [[Complex64; 4]; 4]);

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[cr(0.0); 4]; 4])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..4 {
            m.0[i][i] = cr(1.0);
        }
        m
    }

    pub fn add(&self, rhs: &Mat4) -> Mat4 {
        let mut out = self.0;
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] += rhs.0[i][j];
            }
        }
        Mat4(out)
    }

    pub fn sub(&self, rhs: &Mat4) -> Mat4 {
        let mut out = self.0;
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] -= rhs.0[i][j];
            }
        }
        Mat4(out)
    }

    pub fn scale(&self, factor: Complex64) -> Mat4 {
        let mut out = self.0;
        for row in out.iter_mut() {
            for entry in row.iter_mut() {
                *entry *= factor;
            }
        }
        Mat4(out)
    }

    pub fn mul(&self, rhs: &Mat4) -> Mat4 {
        let mut out = [[cr(0.0); 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let mut acc = cr(0.0);
                for k in 0..4 {
                    acc += self.0[i][k] * rhs.0[k][j];
                }
                *entry = acc;
            }
        }
        Mat4(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Mat4 {
        let mut out = [[cr(0.0); 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = self.0[j][i].conj();
            }
        }
        Mat4(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    /// Matrix-vector action on an amplitude vector.
    pub fn apply(&self, v: &[Complex64; 4]) -> [Complex64; 4] {
        let mut out = [cr(0.0); 4];
        for (i, entry) in out.iter_mut().enumerate() {
            *entry = (0..4).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &Mat4) -> f64 {
        let mut max = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                max = max.max((self.0[i][j] - rhs.0[i][j]).norm());
            }
        }
        max
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Outer product |v⟩⟨w|.
    pub fn outer(v: &[Complex64; 4], w: &[Complex64; 4]) -> Mat4 {
        let mut out = [[cr(0.0); 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = v[i] * w[j].conj();
            }
        }
        Mat4(out)
    }

    /// Eigenvalues of a Hermitian matrix, ascending, by cyclic complex
    /// Jacobi rotations. The caller is responsible for Hermiticity; the
    /// off-diagonal part is annihilated to well below [`TOL_ALGEBRA`].
    pub fn hermitian_eigenvalues(&self) -> [f64; 4] {
        let mut a = *self;
        for _sweep in 0..60 {
            let mut off = 0.0;
            for p in 0..4 {
                for q in (p + 1)..4 {
                    off += a.0[p][q].norm_sqr();
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..4 {
                for q in (p + 1)..4 {
                    let apq = a.0[p][q];
                    let r = apq.norm();
                    if r < 1e-150 {
                        continue;
                    }
                    let phase = apq / r;
                    let tau = (a.0[q][q].re - a.0[p][p].re) / (2.0 * r);
                    let t = -tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let cos_t = 1.0 / (1.0 + t * t).sqrt();
                    let sin_t = t * cos_t;
                    // Unitary rotation in the (p, q) plane carrying the
                    // phase of the pivot entry.
                    let mut u = Mat4::identity();
                    u.0[p][p] = cr(cos_t);
                    u.0[p][q] = -phase * sin_t;
                    u.0[q][p] = phase.conj() * sin_t;
                    u.0[q][q] = cr(cos_t);
                    a = u.adjoint().mul(&a).mul(&u);
                }
            }
        }
        let mut eig = [a.0[0][0].re, a.0[1][1].re, a.0[2][2].re, a.0[3][3].re];
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }
}

/// Commutator [a, b] = ab − ba.
pub fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a.mul(b).sub(&b.mul(a))
}

/// Anticommutator {a, b} = ab + ba.
pub fn anticommutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a.mul(b).add(&b.mul(a))
}

/// Kronecker product of two single-qubit operators, spin factor first.
///
/// `tensor(a, b)[2i+k, 2j+l] = a[i,j] * b[k,l]`, so an operator written as
/// σ_spin σ_path becomes `tensor(σ_spin, σ_path)` in the fixed basis order.
pub fn tensor(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[cr(0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    Mat4(out)
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Spin eigenstates along the guide field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Up,
    Down,
}

/// Interferometer beam path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    I,
    II,
}

/// A normalized pure state on the spin ⊗ path space.
#[derive(Debug, Clone, Copy)]
pub struct PureState {
    amplitudes: [Complex64; 4],
}

impl PureState {
    /// Wraps an amplitude vector, requiring norm² = 1 within [`TOL_INPUT`].
    pub fn try_new(amplitudes: [Complex64; 4]) -> Result<Self, HilbertError> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOL_INPUT {
            return Err(HilbertError::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero amplitude vector.
    pub fn normalized(amplitudes: [Complex64; 4]) -> Result<Self, HilbertError> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(HilbertError::ZeroVector);
        }
        let inv = cr(1.0 / norm_sq.sqrt());
        let mut amps = amplitudes;
        for a in amps.iter_mut() {
            *a *= inv;
        }
        Ok(Self { amplitudes: amps })
    }

    /// Basis state |spin, arm⟩.
    pub fn basis(spin: Spin, arm: Arm) -> Self {
        let idx = 2 * (spin == Spin::Down) as usize + (arm == Arm::II) as usize;
        let mut amps = [cr(0.0); 4];
        amps[idx] = cr(1.0);
        Self { amplitudes: amps }
    }

    /// Product state from single-qubit amplitude pairs (spin ⊗ path).
    pub fn product(spin: [Complex64; 2], path: [Complex64; 2]) -> Result<Self, HilbertError> {
        Self::normalized([
            spin[0] * path[0],
            spin[0] * path[1],
            spin[1] * path[0],
            spin[1] * path[1],
        ])
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }

    /// Inner product ⟨self|other⟩.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Overlap probability |⟨self|other⟩|².
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Haar-like random pure state from independent Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let mut amps = [cr(0.0); 4];
        loop {
            for a in amps.iter_mut() {
                *a = c(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
            if let Ok(state) = Self::normalized(amps) {
                return state;
            }
        }
    }
}

/// The maximally entangled state prepared in the first interferometer half:
/// (|↓,I⟩ − |↑,II⟩)/√2.
pub fn entangled_state() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    PureState {
        amplitudes: [cr(0.0), cr(-s), cr(s), cr(0.0)],
    }
}

/// The four common eigenstates of the two product observables, named by the
/// spin-analysis channel that selects them in the beamline.
#[derive(Debug, Clone, Copy)]
pub struct BellBasis {
    /// (|↓,I⟩ + i|↑,II⟩)/√2
    pub down_plus: PureState,
    /// (|↓,I⟩ − i|↑,II⟩)/√2
    pub down_minus: PureState,
    /// (|↑,I⟩ + i|↓,II⟩)/√2
    pub up_plus: PureState,
    /// (|↑,I⟩ − i|↓,II⟩)/√2
    pub up_minus: PureState,
}

impl BellBasis {
    pub fn all(&self) -> [PureState; 4] {
        [self.down_plus, self.down_minus, self.up_plus, self.up_minus]
    }
}

/// The orthonormal basis of entangled eigenstates shared by the two product
/// observables in the six-observable set.
pub fn bell_basis() -> BellBasis {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = c(0.0, 1.0);
    BellBasis {
        down_plus: PureState {
            amplitudes: [cr(0.0), i * s, cr(s), cr(0.0)],
        },
        down_minus: PureState {
            amplitudes: [cr(0.0), -i * s, cr(s), cr(0.0)],
        },
        up_plus: PureState {
            amplitudes: [cr(s), cr(0.0), cr(0.0), i * s],
        },
        up_minus: PureState {
            amplitudes: [cr(s), cr(0.0), cr(0.0), -i * s],
        },
    }
}

/// Joint analysis state ((|↑⟩ + e^{iα}|↓⟩)/√2) ⊗ ((|I⟩ + e^{iχ}|II⟩)/√2):
/// the projection realized by the Larmor phase α and the phase shifter χ.
pub fn analysis_product_state(alpha: f64, chi: f64) -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let spin = [cr(s), Complex64::from_polar(s, alpha)];
    let path = [cr(s), Complex64::from_polar(s, chi)];
    PureState::product(spin, path).expect("product of unit vectors is normalized")
}

/// A mixed state, stored as its 4×4 density matrix.
#[derive(Debug, Clone, Copy)]
pub struct DensityState {
    matrix: Mat4,
}

impl DensityState {
    /// Validates Hermiticity, unit trace, and positive semidefiniteness
    /// (eigenvalues ≥ −1e-10).
    pub fn try_new(matrix: Mat4) -> Result<Self, HilbertError> {
        if !matrix.is_hermitian(TOL_ALGEBRA) {
            return Err(HilbertError::NotHermitian {
                label: "density matrix".into(),
                residual: matrix.max_abs_diff(&matrix.adjoint()),
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > TOL_ALGEBRA || trace.im.abs() > TOL_ALGEBRA {
            return Err(HilbertError::NotUnitTrace { trace: trace.re });
        }
        let min_eigenvalue = matrix.hermitian_eigenvalues()[0];
        if min_eigenvalue < -1e-10 {
            return Err(HilbertError::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &PureState) -> Self {
        Self {
            matrix: Mat4::outer(state.amplitudes(), state.amplitudes()),
        }
    }

    /// Convex mixture of density states; weights are normalized by their sum.
    pub fn mixture(components: &[(f64, DensityState)]) -> Result<Self, HilbertError> {
        let total: f64 = components.iter().map(|(w, _)| *w).sum();
        if total <= 0.0 || components.iter().any(|(w, _)| *w < 0.0) {
            return Err(HilbertError::BadMixtureWeights);
        }
        let mut matrix = Mat4::zero();
        for (w, rho) in components {
            matrix = matrix.add(&rho.matrix.scale(cr(w / total)));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Mat4::identity().scale(cr(0.25)),
        }
    }

    /// Isotropic admixture retention·ρ + (1 − retention)·1/4; a valid state
    /// for retention ∈ [0, 1].
    pub fn depolarized(&self, retention: f64) -> Self {
        Self {
            matrix: self
                .matrix
                .scale(cr(retention))
                .add(&Mat4::identity().scale(cr((1.0 - retention) / 4.0))),
        }
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure reference state.
    pub fn fidelity(&self, state: &PureState) -> f64 {
        let v = self.matrix.apply(state.amplitudes());
        state
            .amplitudes()
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Random mixed state: convex mixture of `components` random pure states.
    pub fn random_mixed<R: Rng + ?Sized>(rng: &mut R, components: usize) -> Self {
        let parts: Vec<(f64, DensityState)> = (0..components.max(1))
            .map(|_| {
                (
                    rng.gen_range(0.01..1.0),
                    DensityState::from_pure(&PureState::random(rng)),
                )
            })
            .collect();
        Self::mixture(&parts).expect("positive weights")
    }
}

/// Either a pure or a mixed state; most operations accept both.
#[derive(Debug, Clone, Copy)]
pub enum State {
    Pure(PureState),
    Density(DensityState),
}

impl From<PureState> for State {
    fn from(s: PureState) -> Self {
        State::Pure(s)
    }
}

impl From<DensityState> for State {
    fn from(s: DensityState) -> Self {
        State::Density(s)
    }
}

/// Anything that can produce the expectation value of a 4×4 operator:
/// ⟨ψ|M|ψ⟩ for pure states, Tr(ρM) for mixed ones.
pub trait QuantumState {
    fn expectation_of(&self, m: &Mat4) -> Complex64;
}

impl QuantumState for PureState {
    fn expectation_of(&self, m: &Mat4) -> Complex64 {
        let v = m.apply(self.amplitudes());
        self.amplitudes()
            .iter()
            .zip(v.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl QuantumState for DensityState {
    fn expectation_of(&self, m: &Mat4) -> Complex64 {
        let mut acc = cr(0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += self.matrix().0[i][j] * m.0[j][i];
            }
        }
        acc
    }
}

impl QuantumState for State {
    fn expectation_of(&self, m: &Mat4) -> Complex64 {
        match self {
            State::Pure(s) => s.expectation_of(m),
            State::Density(s) => s.expectation_of(m),
        }
    }
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// A labeled Hermitian operator.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: Mat4,
    label: String,
}

impl Observable {
    /// Rejects matrices that are not Hermitian within [`TOL_INPUT`].
    pub fn new(label: impl Into<String>, matrix: Mat4) -> Result<Self, HilbertError> {
        let label = label.into();
        let residual = matrix.max_abs_diff(&matrix.adjoint());
        if residual > TOL_INPUT {
            return Err(HilbertError::NotHermitian { label, residual });
        }
        Ok(Self { matrix, label })
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// True when the operator squares to the identity within [`TOL_ALGEBRA`],
    /// i.e. has spectrum contained in {−1, +1}.
    pub fn is_dichotomic(&self) -> bool {
        self.matrix
            .mul(&self.matrix)
            .max_abs_diff(&Mat4::identity())
            <= TOL_ALGEBRA
    }
}

/// Expectation value of a Hermitian observable; the imaginary residue must
/// stay below [`TOL_NUMERIC`] and is discarded.
pub fn expectation<S: QuantumState>(obs: &Observable, state: &S) -> f64 {
    let value = state.expectation_of(obs.matrix());
    assert!(
        value.im.abs() < TOL_NUMERIC,
        "expectation of Hermitian observable `{}` has imaginary residue {:.3e}",
        obs.label(),
        value.im
    );
    value.re
}

/// Projector |ψ⟩⟨ψ| onto a pure state, packaged as an observable.
pub fn projector(state: &PureState) -> Observable {
    Observable {
        matrix: Mat4::outer(state.amplitudes(), state.amplitudes()),
        label: "projector".into(),
    }
}

/// The six dichotomic observables of the noncontextuality test, plus the
/// conventions needed to resolve each label to one canonical operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PmLabel {
    /// σ_x on the spin factor.
    #[serde(rename = "sx")]
    SpinX,
    /// σ_y on the spin factor.
    #[serde(rename = "sy")]
    SpinY,
    /// σ_x on the path factor.
    #[serde(rename = "px")]
    PathX,
    /// σ_y on the path factor.
    #[serde(rename = "py")]
    PathY,
    /// The product observable σ_x ⊗ σ_y, measured as a single quantity.
    #[serde(rename = "sxpy")]
    SpinXPathY,
    /// The product observable σ_y ⊗ σ_x, measured as a single quantity.
    #[serde(rename = "sypx")]
    SpinYPathX,
}

impl PmLabel {
    pub const ALL: [PmLabel; 6] = [
        PmLabel::SpinX,
        PmLabel::SpinY,
        PmLabel::PathX,
        PmLabel::PathY,
        PmLabel::SpinXPathY,
        PmLabel::SpinYPathX,
    ];

    /// Position in [`PmLabel::ALL`]; used to index assignments.
    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|l| l == self).unwrap()
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PmLabel::SpinX => "sx",
            PmLabel::SpinY => "sy",
            PmLabel::PathX => "px",
            PmLabel::PathY => "py",
            PmLabel::SpinXPathY => "sxpy",
            PmLabel::SpinYPathX => "sypx",
        }
    }

    /// The canonical matrix for this label; every part of the pipeline
    /// resolves labels through this one function.
    pub fn matrix(&self) -> Mat4 {
        let id = Mat2::identity();
        match self {
            PmLabel::SpinX => tensor(&sigma_x(), &id),
            PmLabel::SpinY => tensor(&sigma_y(), &id),
            PmLabel::PathX => tensor(&id, &sigma_x()),
            PmLabel::PathY => tensor(&id, &sigma_y()),
            PmLabel::SpinXPathY => tensor(&sigma_x(), &sigma_y()),
            PmLabel::SpinYPathX => tensor(&sigma_y(), &sigma_x()),
        }
    }

    pub fn observable(&self) -> Observable {
        Observable {
            matrix: self.matrix(),
            label: self.as_str().into(),
        }
    }
}

impl std::fmt::Display for PmLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for PmLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PmLabel::ALL
            .iter()
            .find(|l| l.as_str() == s)
            .copied()
            .ok_or_else(|| format!("unknown observable label `{s}`"))
    }
}

/// σ_z on the spin factor, completing the single-qubit inventory.
pub fn spin_z() -> Observable {
    Observable {
        matrix: tensor(&sigma_z(), &Mat2::identity()),
        label: "sz".into(),
    }
}

/// σ_z on the path factor.
pub fn path_z() -> Observable {
    Observable {
        matrix: tensor(&Mat2::identity(), &sigma_z()),
        label: "pz".into(),
    }
}
