//! Destructive-interference angle conditions for the three-box and
//! Cheshire-cat arrangements, and solvers for them.
//!
//! Notation: `|m_i⟩` is the pre-selected state (default `|m_z = 0⟩`),
//! `|m_f⟩ = |m_φ = post_m⟩` the post-selected one (default `post_m = +1`),
//! and `|m_α = k⟩` the Stern-Gerlach output basis. Path A carries `k = +1`,
//! B carries `k = 0` and C carries `k = -1`.
//!
//! The numerical root searches are authoritative; the closed-form phi
//! expression is kept as a cross-check.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::periodic_roots;
use crate::spin_algebra::{basis_state, j_component, overlap, Angle, SpinState, PROJECTIONS};

/// Residual magnitude a numerically found root must reach to be reported.
pub const ROOT_ACCEPT_TOL: f64 = 1e-10;
/// Residual below which a closed-form branch counts as agreeing.
pub const CLOSED_FORM_TOL: f64 = 1e-8;
/// Threshold on `|(tan²(α/4) − 1)³|` (and `cos(α/4)`) marking the closed form singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Pre-selected state and post-selected projection.
///
/// The post-selection axis is always φ, which is the unknown of the
/// condition solvers, so only its projection is fixed here.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub pre_axis: Angle,
    pub pre_m: i32,
    pub post_m: i32,
}

impl Default for Selection {
    fn default() -> Self {
        Selection {
            pre_axis: Angle::ZERO,
            pre_m: 0,
            post_m: 1,
        }
    }
}

impl Selection {
    pub fn pre_state(&self) -> Result<SpinState> {
        basis_state(self.pre_axis, self.pre_m)
    }

    pub fn post_state(&self, phi: Angle) -> Result<SpinState> {
        basis_state(phi, self.post_m)
    }

    fn validate(&self) -> Result<()> {
        self.pre_state()?;
        self.post_state(Angle::ZERO)?;
        Ok(())
    }
}

/// Per-path transition amplitudes `⟨m_f|m_α=k⟩⟨m_α=k|m_i⟩` for k = +1, 0, -1.
pub fn transition_terms(sel: &Selection, alpha: Angle, phi: Angle) -> Result<[Complex64; 3]> {
    let pre = sel.pre_state()?;
    let post = sel.post_state(phi)?;
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (slot, &k) in out.iter_mut().zip(PROJECTIONS.iter()) {
        let mid = basis_state(alpha, k)?;
        *slot = overlap(&post, &mid) * overlap(&mid, &pre);
    }
    Ok(out)
}

/// Sum of transition terms over the listed `k` values.
pub fn path_sum(sel: &Selection, alpha: Angle, phi: Angle, ks: &[i32]) -> Result<Complex64> {
    let terms = transition_terms(sel, alpha, phi)?;
    ks.iter().try_fold(Complex64::new(0.0, 0.0), |acc, &k| {
        Ok(acc + terms[crate::spin_algebra::index_of(k)?])
    })
}

/// Condition on path A: the B and C amplitudes cancel.
pub fn residual_condition1_with(sel: &Selection, alpha: Angle, phi: Angle) -> Result<Complex64> {
    path_sum(sel, alpha, phi, &[0, -1])
}

/// Condition on path B: the A and C amplitudes cancel.
pub fn residual_condition2_with(sel: &Selection, alpha: Angle, phi: Angle) -> Result<Complex64> {
    path_sum(sel, alpha, phi, &[1, -1])
}

pub fn residual_condition1(alpha: Angle, phi: Angle) -> Complex64 {
    residual_condition1_with(&Selection::default(), alpha, phi).expect("default selection is valid")
}

pub fn residual_condition2(alpha: Angle, phi: Angle) -> Complex64 {
    residual_condition2_with(&Selection::default(), alpha, phi).expect("default selection is valid")
}

/// `⟨m_f| J_γ |m_α = +1⟩`: vanishes when the spin component `J_γ` cannot be
/// seen on path A.
pub fn residual_cheshire_with(sel: &Selection, alpha: Angle, phi: Angle, gamma: Angle) -> Result<Complex64> {
    let post = sel.post_state(phi)?;
    let path_a = basis_state(alpha, 1)?;
    Ok(j_component(gamma).matrix_element(&post, &path_a))
}

pub fn residual_cheshire(alpha: Angle, phi: Angle, gamma: Angle) -> Complex64 {
    residual_cheshire_with(&Selection::default(), alpha, phi, gamma).expect("default selection is valid")
}

/// Closed-form φ(α) for the default selection, branch `n`:
///
/// ```text
/// φ = 4 atan( (8 tan³(α/4) − √(3cos2α + 5) sec⁶(α/4) / (2√2)) / (tan²(α/4) − 1)³ ) + 4πn
/// ```
pub fn phi_closed_form(alpha: Angle, n: i64) -> Result<Angle> {
    let a = alpha.radians();
    let quarter = a / 4.0;
    let cos_q = quarter.cos();
    let t = quarter.tan();
    let denom = (t * t - 1.0).powi(3);
    if cos_q.abs() < SINGULAR_TOL || denom.abs() < SINGULAR_TOL || !denom.is_finite() {
        return Err(Error::SingularAlpha { alpha: a });
    }
    let sec6 = cos_q.powi(-6);
    let radicand = 3.0 * (2.0 * a).cos() + 5.0;
    let numer = 8.0 * t.powi(3) - radicand.sqrt() * sec6 / (2.0 * SQRT_2);
    Ok(Angle::from_radians(
        4.0 * (numer / denom).atan() + 4.0 * PI * n as f64,
    ))
}

/// All φ in [0, 2π) with `residual_condition1(α, φ) = 0`.
pub fn solve_phi(alpha: Angle) -> Vec<Angle> {
    solve_phi_with(&Selection::default(), alpha).expect("default selection is valid")
}

pub fn solve_phi_with(sel: &Selection, alpha: Angle) -> Result<Vec<Angle>> {
    sel.validate()?;
    let f = |phi: f64| {
        residual_condition1_with(sel, alpha, Angle::from_radians(phi))
            .map(|c| c.re)
            .unwrap_or(f64::NAN)
    };
    Ok(accept_roots(periodic_roots(f), |phi| {
        residual_condition1_with(sel, alpha, phi).map(|c| c.norm())
    }))
}

/// All γ in [0, 2π) with `residual_cheshire(α, φ, γ) = 0`.
pub fn solve_gamma(alpha: Angle, phi: Angle) -> Vec<Angle> {
    solve_gamma_with(&Selection::default(), alpha, phi).expect("default selection is valid")
}

pub fn solve_gamma_with(sel: &Selection, alpha: Angle, phi: Angle) -> Result<Vec<Angle>> {
    sel.validate()?;
    let f = |g: f64| {
        residual_cheshire_with(sel, alpha, phi, Angle::from_radians(g))
            .map(|c| c.re)
            .unwrap_or(f64::NAN)
    };
    Ok(accept_roots(periodic_roots(f), |g| {
        residual_cheshire_with(sel, alpha, phi, g).map(|c| c.norm())
    }))
}

fn accept_roots<F: Fn(Angle) -> Result<f64>>(candidates: Vec<f64>, residual: F) -> Vec<Angle> {
    candidates
        .into_iter()
        .map(Angle::from_radians)
        .filter(|&x| matches!(residual(x), Ok(r) if r < ROOT_ACCEPT_TOL))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub c1: Complex64,
    pub c2: Complex64,
    pub cc: Option<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSolution {
    pub alpha: Angle,
    pub phi: Angle,
    pub gamma: Option<Angle>,
    /// Branch of the closed-form phi expression that reproduces `phi`.
    pub branch_n: i64,
    pub residuals: Residuals,
}

/// The angles satisfying both path conditions simultaneously:
/// α = 2 acos √(1/2 + √5/10), φ = 2 acos √(1/2 − 1/√5).
pub fn joint_solution() -> AngleSolution {
    let s5 = 5f64.sqrt();
    let alpha = Angle::from_radians(2.0 * (0.5 + s5 / 10.0).sqrt().acos());
    let phi = Angle::from_radians(2.0 * (0.5 - 1.0 / s5).sqrt().acos());
    AngleSolution {
        alpha,
        phi,
        gamma: None,
        branch_n: 0,
        residuals: Residuals {
            c1: residual_condition1(alpha, phi),
            c2: residual_condition2(alpha, phi),
            cc: None,
        },
    }
}

/// Joint solution completed with the first γ root in [0, 2π).
pub fn cheshire_solution() -> AngleSolution {
    let mut sol = joint_solution();
    if let Some(&gamma) = solve_gamma(sol.alpha, sol.phi).first() {
        sol.gamma = Some(gamma);
        sol.residuals.cc = Some(residual_cheshire(sol.alpha, sol.phi, gamma));
    }
    sol
}

/// Outcome of checking the closed-form phi against the condition residual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ClosedFormCheck {
    Agrees {
        branch_n: i64,
        phi: Angle,
        residual: f64,
        /// Numerical root matching the closed-form value modulo 2π, if any.
        numeric_match: Option<Angle>,
    },
    Discrepancy {
        best_branch: i64,
        best_residual: f64,
    },
    Singular,
}

/// Tries branches n ∈ {−1, 0, 1} of [`phi_closed_form`] at `alpha`.
pub fn closed_form_cross_check(alpha: Angle) -> ClosedFormCheck {
    let mut best: Option<(i64, Angle, f64)> = None;
    for n in [-1, 0, 1] {
        let phi = match phi_closed_form(alpha, n) {
            Ok(p) => p,
            Err(_) => return ClosedFormCheck::Singular,
        };
        let r = residual_condition1(alpha, phi).norm();
        if best.is_none_or(|(_, _, b)| r < b) {
            best = Some((n, phi, r));
        }
    }
    let (n, phi, r) = best.expect("three branches evaluated");
    if r < CLOSED_FORM_TOL {
        let wrapped = phi.wrapped().radians();
        let numeric_match = solve_phi(alpha).into_iter().find(|root| {
            let d = (root.radians() - wrapped).abs();
            d.min(std::f64::consts::TAU - d) < CLOSED_FORM_TOL
        });
        ClosedFormCheck::Agrees {
            branch_n: n,
            phi,
            residual: r,
            numeric_match,
        }
    } else {
        ClosedFormCheck::Discrepancy {
            best_branch: n,
            best_residual: r,
        }
    }
}
