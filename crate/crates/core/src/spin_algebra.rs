//! Linear algebra on the J = 1 spin space.
//!
//! Components are always ordered (m = +1, 0, -1) top to bottom. All
//! quantization axes lie in one plane through the z axis and are labelled
//! by their angle from +z. Rotations within that plane are generated by a
//! single fixed generator `J_g`, chosen so that `exp(-i θ J_g)` is real:
//!
//! ```text
//!           1   [  0   1   0 ]
//! J_g = ------- [ -1   0   1 ]
//!        i √2   [  0  -1   0 ]
//! ```
//!
//! With this choice `|m_θ⟩ = exp(-i θ J_g) |m_z⟩` and
//! `⟨m_α | m_β⟩ = d¹_{m_α, m_β}(β − α)`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix3 = Matrix3<Complex64>;
pub type CVector3 = Vector3<Complex64>;

/// Tolerance used when validating Hermiticity of user-supplied matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row/column index of projection `m` in the (+1, 0, -1) ordering.
pub fn index_of(m: i32) -> Result<usize> {
    match m {
        1 => Ok(0),
        0 => Ok(1),
        -1 => Ok(2),
        other => Err(Error::InvalidProjection(other)),
    }
}

/// Projection quantum number stored at row `i`.
pub fn projection_at(i: usize) -> i32 {
    1 - i as i32
}

/// All three projections in basis order.
pub const PROJECTIONS: [i32; 3] = [1, 0, -1];

/// Angle in radians of a quantization axis measured from +z.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn from_radians(theta: f64) -> Self {
        Angle(theta)
    }

    pub fn from_degrees(deg: f64) -> Self {
        Angle(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Representative of this angle in [0, 2π).
    pub fn wrapped(self) -> Angle {
        let r = self.0.rem_euclid(std::f64::consts::TAU);
        // rem_euclid can round up to exactly TAU
        Angle(if r >= std::f64::consts::TAU { 0.0 } else { r })
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}°", self.degrees())
    }
}

impl Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle(self.0 + rhs.0)
    }
}

impl Sub for Angle {
    type Output = Angle;
    fn sub(self, rhs: Angle) -> Angle {
        Angle(self.0 - rhs.0)
    }
}

/// Normalized pure state of a spin-1 system in the z basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinState {
    amps: CVector3,
}

impl SpinState {
    /// Builds a state from raw amplitudes, normalizing them.
    pub fn new(amps: [Complex64; 3]) -> Result<Self> {
        Self::from_vector(CVector3::from(amps))
    }

    pub fn from_vector(v: CVector3) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        Ok(SpinState {
            amps: v.unscale(norm),
        })
    }

    /// `|m_z = m⟩`.
    pub fn z_basis(m: i32) -> Result<Self> {
        let mut amps = CVector3::zeros();
        amps[index_of(m)?] = ONE;
        Ok(SpinState { amps })
    }

    pub fn amps(&self) -> &CVector3 {
        &self.amps
    }

    /// Amplitude on `|m_z = m⟩`.
    pub fn amp(&self, m: i32) -> Result<Complex64> {
        Ok(self.amps[index_of(m)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// Multiplies by a global phase `e^{iχ}`.
    pub fn with_phase(&self, chi: f64) -> SpinState {
        SpinState {
            amps: self.amps * Complex64::from_polar(1.0, chi),
        }
    }

    /// Applies a unitary. The result is renormalized to absorb round-off.
    pub fn evolve(&self, u: &CMatrix3) -> Result<SpinState> {
        SpinState::from_vector(u * self.amps)
    }
}

/// ⟨a|b⟩, conjugate-linear in `a`.
pub fn overlap(a: &SpinState, b: &SpinState) -> Complex64 {
    a.amps.dotc(&b.amps)
}

/// A Hermitian operator on the spin-1 space.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    mat: CMatrix3,
}

impl Observable {
    /// Validates Hermiticity within [`HERMITIAN_TOL`] and stores the exactly
    /// symmetrized matrix.
    pub fn new(mat: CMatrix3) -> Result<Self> {
        let deviation = (mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !deviation.is_finite() || deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Observable {
            mat: (mat + mat.adjoint()) * Complex64::new(0.5, 0.0),
        })
    }

    pub fn identity() -> Self {
        Observable {
            mat: CMatrix3::identity(),
        }
    }

    pub fn zero() -> Self {
        Observable {
            mat: CMatrix3::zeros(),
        }
    }

    /// `J_z = diag(+1, 0, -1)`.
    pub fn jz() -> Self {
        Observable {
            mat: CMatrix3::from_diagonal(&Vector3::new(ONE, ZERO, -ONE)),
        }
    }

    /// The fixed in-plane rotation generator `J_g`.
    pub fn generator() -> Self {
        let s = Complex64::new(0.0, -FRAC_1_SQRT_2);
        #[rustfmt::skip]
        let mat = CMatrix3::new(
            ZERO,  s,    ZERO,
            -s,    ZERO, s,
            ZERO,  -s,   ZERO,
        );
        Observable { mat }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector_onto(state: &SpinState) -> Self {
        Observable {
            mat: state.amps * state.amps.adjoint(),
        }
    }

    pub fn mat(&self) -> &CMatrix3 {
        &self.mat
    }

    /// ⟨bra| O |ket⟩.
    pub fn matrix_element(&self, bra: &SpinState, ket: &SpinState) -> Complex64 {
        bra.amps.dotc(&(self.mat * ket.amps))
    }

    pub fn scale(&self, a: f64) -> Observable {
        Observable {
            mat: self.mat * Complex64::new(a, 0.0),
        }
    }

    /// Operator product `self · other`, valid as an observable only when the
    /// two commute (e.g. a spin operator times a path projector).
    pub fn compose(&self, other: &Observable) -> Result<Observable> {
        Observable::new(self.mat * other.mat)
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    /// Spectral decomposition: real eigenvalues and orthonormal eigenvectors
    /// (as columns).
    pub fn eigen(&self) -> ([f64; 3], CMatrix3) {
        let eig = SymmetricEigen::new(self.mat);
        let vals = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        (vals, eig.eigenvectors)
    }

    /// `exp(-i t O)` by exact spectral decomposition.
    pub fn exp_i(&self, t: f64) -> CMatrix3 {
        let (vals, vecs) = self.eigen();
        let phases = CMatrix3::from_diagonal(&Vector3::from_iterator(
            vals.iter().map(|&l| Complex64::from_polar(1.0, -t * l)),
        ));
        vecs * phases * vecs.adjoint()
    }
}

impl Add for &Observable {
    type Output = Observable;
    fn add(self, rhs: &Observable) -> Observable {
        Observable {
            mat: self.mat + rhs.mat,
        }
    }
}

impl Sub for &Observable {
    type Output = Observable;
    fn sub(self, rhs: &Observable) -> Observable {
        Observable {
            mat: self.mat - rhs.mat,
        }
    }
}

impl Mul<f64> for &Observable {
    type Output = Observable;
    fn mul(self, rhs: f64) -> Observable {
        self.scale(rhs)
    }
}

/// `U(θ) = exp(-i θ J_g)`.
///
/// The generator has eigenvalues exactly {+1, 0, -1} with the closed-form
/// eigenvectors below, so the exponential is assembled spectrally without
/// any series truncation.
pub fn rotation_operator(theta: Angle) -> CMatrix3 {
    let h = Complex64::new(0.5, 0.0);
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let i_r = Complex64::new(0.0, FRAC_1_SQRT_2);
    // eigenvectors of J_g for eigenvalues +1, 0, -1
    let v_plus = CVector3::new(h, i_r, -h);
    let v_zero = CVector3::new(r, ZERO, r);
    let v_minus = CVector3::new(h, -i_r, -h);
    let t = theta.radians();
    v_plus * v_plus.adjoint() * Complex64::from_polar(1.0, -t)
        + v_zero * v_zero.adjoint()
        + v_minus * v_minus.adjoint() * Complex64::from_polar(1.0, t)
}

/// Reduced Wigner matrix d¹(θ), rows and columns ordered (+1, 0, -1).
pub fn wigner_d_small(theta: Angle) -> Matrix3<f64> {
    rotation_operator(theta).map(|z| z.re)
}

/// `|m_θ⟩`, the eigenstate of `J_θ` with eigenvalue `m`, in the z basis.
pub fn basis_state(theta: Angle, m: i32) -> Result<SpinState> {
    let col = index_of(m)?;
    let u = rotation_operator(theta);
    SpinState::from_vector(u.column(col).into_owned())
}

/// `J_θ = U(θ) J_z U(θ)†`.
pub fn j_component(theta: Angle) -> Observable {
    let u = rotation_operator(theta);
    let mat = u * Observable::jz().mat * u.adjoint();
    Observable {
        mat: (mat + mat.adjoint()) * Complex64::new(0.5, 0.0),
    }
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix3, b: &CMatrix3) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
