//! Weak values between pre- and post-selected spin-1 states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin_algebra::{basis_state, overlap, Angle, Observable, SpinState};

/// Default threshold below which `|⟨post|pre⟩|` counts as orthogonal.
pub const DEFAULT_ORTHOGONALITY_TOL: f64 = 1e-10;

/// A weak value together with the post-selection amplitude it was divided by.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakValue {
    pub value: Complex64,
    pub postselection_amp: Complex64,
}

impl WeakValue {
    /// Probability `|⟨ψ_f|ψ_i⟩|²` that post-selection succeeds.
    pub fn postselection_probability(&self) -> f64 {
        self.postselection_amp.norm_sqr()
    }

    /// Builds a weak value from an already computed transition numerator.
    pub fn from_parts(numerator: Complex64, postselection_amp: Complex64, tol: f64) -> Result<Self> {
        check_orthogonality(postselection_amp, tol)?;
        Ok(WeakValue {
            value: numerator / postselection_amp,
            postselection_amp,
        })
    }

    pub fn scaled(self, factor: f64) -> Self {
        WeakValue {
            value: self.value * factor,
            ..self
        }
    }
}

pub(crate) fn check_orthogonality(amp: Complex64, tol: f64) -> Result<()> {
    let overlap = amp.norm();
    if overlap < tol || !overlap.is_finite() {
        return Err(Error::OrthogonalPrePost {
            overlap,
            tolerance: tol,
        });
    }
    Ok(())
}

/// `⟨post|O|pre⟩ / ⟨post|pre⟩` with the default orthogonality tolerance.
pub fn weak_value(pre: &SpinState, post: &SpinState, obs: &Observable) -> Result<WeakValue> {
    weak_value_with_tol(pre, post, obs, DEFAULT_ORTHOGONALITY_TOL)
}

pub fn weak_value_with_tol(
    pre: &SpinState,
    post: &SpinState,
    obs: &Observable,
    tol: f64,
) -> Result<WeakValue> {
    let amp = overlap(post, pre);
    WeakValue::from_parts(obs.matrix_element(post, pre), amp, tol)
}

/// `|m_θ⟩⟨m_θ|`.
pub fn spin_projector(theta: Angle, m: i32) -> Result<Observable> {
    Ok(Observable::projector_onto(&basis_state(theta, m)?))
}

/// Sum of `|m_θ⟩⟨m_θ|` over a set of projections (e.g. `Π_Ā` = m ∈ {0, -1}).
pub fn group_projector(theta: Angle, ms: &[i32]) -> Result<Observable> {
    ms.iter().try_fold(Observable::zero(), |acc, &m| {
        Ok(&acc + &spin_projector(theta, m)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin_algebra::{max_abs_diff, CMatrix3};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_weak_value_is_one() {
        let pre = SpinState::new([c(0.3, 0.1), c(0.5, -0.2), c(0.1, 0.7)]).unwrap();
        let post = SpinState::new([c(-0.2, 0.4), c(0.9, 0.0), c(0.0, 0.3)]).unwrap();
        let wv = weak_value(&pre, &post, &Observable::identity()).unwrap();
        assert!((wv.value - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn orthogonal_states_rejected() {
        let pre = SpinState::z_basis(0).unwrap();
        let post = SpinState::z_basis(1).unwrap();
        let err = weak_value(&pre, &post, &Observable::jz()).unwrap_err();
        assert!(matches!(err, Error::OrthogonalPrePost { .. }));
        assert!(err.is_physical());
    }

    #[test]
    fn projector_properties() {
        let p = spin_projector(Angle::ZERO, 0).unwrap();
        let expect = CMatrix3::from_diagonal(&nalgebra::Vector3::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)));
        assert!(max_abs_diff(p.mat(), &expect) < 1e-15);

        let p = spin_projector(Angle::from_radians(1.1), 1).unwrap();
        assert!(max_abs_diff(&(p.mat() * p.mat()), p.mat()) < 1e-12);

        let t = Angle::from_radians(2.2);
        let total = group_projector(t, &[1, 0, -1]).unwrap();
        assert!(max_abs_diff(total.mat(), &CMatrix3::identity()) < 1e-12);

        assert!(matches!(spin_projector(t, -2), Err(Error::InvalidProjection(-2))));
    }

    #[test]
    fn probability_carried_alongside() {
        let pre = SpinState::z_basis(0).unwrap();
        let post = basis_state(Angle::from_radians(0.4), 0).unwrap();
        let wv = weak_value(&pre, &post, &Observable::jz()).unwrap();
        assert!((wv.postselection_probability() - 0.4f64.cos().powi(2)).abs() < 1e-15);
    }
}
