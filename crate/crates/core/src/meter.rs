//! Pointer (meter) side of a weak measurement.
//!
//! The meter is a 1D wavefunction on a uniform grid. Coupling `exp(−i g O ⊗ P)`
//! is applied exactly: `O` is diagonalized and each eigencomponent of the
//! meter is translated by `g λ` with a spectral (FFT) shift, so there is no
//! time stepping anywhere.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interferometer::{prepare, recombine, split_with_phases, Location, Mode, Path, Recombination, ScenarioConfig};
use crate::spin_algebra::{j_component, overlap, Observable, SpinState};
use crate::weak_values::weak_value;

pub const DEFAULT_SIGMA: f64 = 1.0;
pub const DEFAULT_POINTS: usize = 4096;
/// Grid half-extent in units of sigma.
pub const DEFAULT_EXTENT_SIGMAS: f64 = 12.0;
/// Required clearance between the (shifted) packet and the grid edge, in sigma.
pub const EDGE_MARGIN_SIGMAS: f64 = 8.0;
/// Below this the post-selection is treated as never succeeding.
pub const MIN_POSTSELECTION_PROBABILITY: f64 = 1e-14;
/// Round-off floor for pointer-ratio errors; differences below it are noise.
pub const ERROR_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeterGrid {
    pub x_min: f64,
    pub dx: f64,
    pub n: usize,
}

impl MeterGrid {
    pub fn position(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.position(self.n - 1)
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.position(i))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeterState {
    grid: MeterGrid,
    amps: Vec<Complex64>,
    sigma: f64,
    center: f64,
}

impl MeterState {
    /// Gaussian pointer `∝ exp(−(x − center)² / 4σ²)` (position spread σ) on
    /// a grid of `n` points covering `center ± half_extent`.
    pub fn gaussian(center: f64, sigma: f64, n: usize, half_extent: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) || n < 16 || !(half_extent.is_finite() && half_extent > 0.0) {
            return Err(Error::Config(format!(
                "invalid meter parameters (sigma {sigma}, points {n}, half-extent {half_extent})"
            )));
        }
        if half_extent < EDGE_MARGIN_SIGMAS * sigma {
            return Err(Error::GridTooSmall {
                shift: 0.0,
                half_extent,
            });
        }
        let dx = 2.0 * half_extent / n as f64;
        let grid = MeterGrid {
            x_min: center - half_extent,
            dx,
            n,
        };
        let amps: Vec<Complex64> = grid
            .positions()
            .map(|x| {
                let u = (x - center) / sigma;
                Complex64::new((-0.25 * u * u).exp(), 0.0)
            })
            .collect();
        let mut state = MeterState {
            grid,
            amps,
            sigma,
            center,
        };
        state.normalize()?;
        Ok(state)
    }

    /// σ-wide pointer at the origin on the default grid.
    pub fn with_sigma(sigma: f64) -> Result<Self> {
        Self::gaussian(0.0, sigma, DEFAULT_POINTS, DEFAULT_EXTENT_SIGMAS * sigma)
    }

    pub fn grid(&self) -> &MeterGrid {
        &self.grid
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    /// `Σ |ψ(x)|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        mass(&self.amps, self.grid.dx)
    }

    fn normalize(&mut self) -> Result<f64> {
        let p = self.norm_sqr();
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let s = p.sqrt();
        self.amps.iter_mut().for_each(|a| *a /= s);
        Ok(p)
    }

    /// Largest shift magnitude this grid can absorb while keeping the
    /// required edge clearance.
    pub fn max_shift(&self) -> f64 {
        let room_right = self.grid.x_max() - self.center;
        let room_left = self.center - self.grid.x_min;
        room_left.min(room_right) - EDGE_MARGIN_SIGMAS * self.sigma
    }
}

fn mass(amps: &[Complex64], dx: f64) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx
}

/// Translates `amps` by `shift` (in position units) via the Fourier shift
/// theorem.
fn translate(amps: &[Complex64], dx: f64, shift: f64, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    if shift == 0.0 {
        return amps.to_vec();
    }
    let n = amps.len();
    let mut buf = amps.to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    let dk = TAU / (n as f64 * dx);
    for (j, z) in buf.iter_mut().enumerate() {
        let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        let k = signed * dk;
        // the Nyquist bin has no well-defined sign; use the symmetric choice
        let phase = if 2 * j == n { (k * shift).cos().into() } else { Complex64::from_polar(1.0, -k * shift) };
        *z *= phase;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// System ⊗ meter state, one meter field per z-basis spin component.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    grid: MeterGrid,
    sigma: f64,
    center: f64,
    components: [Vec<Complex64>; 3],
}

impl JointState {
    pub fn product(system: &SpinState, meter: &MeterState) -> Self {
        let components = std::array::from_fn(|i| {
            let c = system.amps()[i];
            meter.amps.iter().map(|a| a * c).collect()
        });
        JointState {
            grid: meter.grid,
            sigma: meter.sigma,
            center: meter.center,
            components,
        }
    }

    pub fn components(&self) -> &[Vec<Complex64>; 3] {
        &self.components
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| mass(c, self.grid.dx)).sum()
    }
}

/// Applies `exp(−i g O ⊗ P)`: each eigencomponent of `obs` drags the pointer
/// by `g λ`.
pub fn couple(system: &SpinState, meter: &MeterState, obs: &Observable, g: f64) -> Result<JointState> {
    if !g.is_finite() {
        return Err(Error::Config(format!("coupling strength must be finite (got {g})")));
    }
    let (vals, vecs) = obs.eigen();
    let max_shift = vals.iter().map(|l| (g * l).abs()).fold(0.0, f64::max);
    if max_shift > meter.max_shift() {
        return Err(Error::GridTooSmall {
            shift: max_shift,
            half_extent: 0.5 * meter.grid.n as f64 * meter.grid.dx,
        });
    }

    let mut planner = FftPlanner::new();
    let n = meter.grid.n;
    let mut components: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]);
    for (j, &lambda) in vals.iter().enumerate() {
        let v = vecs.column(j);
        let weight = v.dotc(system.amps());
        if weight == Complex64::new(0.0, 0.0) {
            continue;
        }
        let shifted = translate(&meter.amps, meter.grid.dx, g * lambda, &mut planner);
        for (i, comp) in components.iter_mut().enumerate() {
            let c = v[i] * weight;
            for (out, s) in comp.iter_mut().zip(&shifted) {
                *out += c * s;
            }
        }
    }
    Ok(JointState {
        grid: meter.grid,
        sigma: meter.sigma,
        center: meter.center,
        components,
    })
}

/// Projects the system on `post`; returns the renormalized pointer and the
/// success probability.
pub fn postselect(joint: &JointState, post: &SpinState) -> Result<(MeterState, f64)> {
    let n = joint.grid.n;
    let mut amps = vec![Complex64::new(0.0, 0.0); n];
    for (i, comp) in joint.components.iter().enumerate() {
        let c = post.amps()[i].conj();
        for (out, a) in amps.iter_mut().zip(comp) {
            *out += c * a;
        }
    }
    let probability = mass(&amps, joint.grid.dx);
    if probability.is_nan() || probability < MIN_POSTSELECTION_PROBABILITY {
        return Err(Error::PostselectionImpossible { probability });
    }
    let mut meter = MeterState {
        grid: joint.grid,
        amps,
        sigma: joint.sigma,
        center: joint.center,
    };
    meter.normalize()?;
    Ok((meter, probability))
}

/// `Σ x |ψ(x)|² dx`.
pub fn pointer_mean(meter: &MeterState) -> f64 {
    let weighted: f64 = meter
        .grid
        .positions()
        .zip(&meter.amps)
        .map(|(x, a)| x * a.norm_sqr())
        .sum();
    weighted * meter.grid.dx / meter.norm_sqr()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub g: f64,
    pub shift_over_g: f64,
    pub target: f64,
    pub abs_error: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub sigma: f64,
    pub weak_value_re: f64,
    pub weak_value_im: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Errors never grow (beyond [`ERROR_FLOOR`]) as g decreases.
    pub monotone: bool,
    /// Least-squares slope of ln(error) against ln(g), over rows whose error
    /// is above the round-off floor.
    pub fitted_order: Option<f64>,
}

impl ConvergenceReport {
    pub const CSV_COLUMNS: &'static str = "g,shift_over_g,target,abs_error,postselection_probability";

    /// CSV body (no metadata); the fitted order goes in a `#` footer line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(Self::CSV_COLUMNS);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{:e},{:.15e},{:.15e},{:.6e},{:.15e}\n",
                r.g, r.shift_over_g, r.target, r.abs_error, r.probability
            ));
        }
        match self.fitted_order {
            Some(order) => out.push_str(&format!("# fitted_order={order:.6}\n")),
            None => out.push_str("# fitted_order=none\n"),
        }
        out.push_str(&format!("# monotone={}\n", self.monotone));
        out
    }
}

/// Pointer shift per unit coupling against `Re⟨obs⟩_w` over decreasing `g`.
pub fn weak_limit_report(
    system: &SpinState,
    post: &SpinState,
    obs: &Observable,
    g_list: &[f64],
    sigma: f64,
) -> Result<ConvergenceReport> {
    if g_list.is_empty() || g_list.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(Error::Config("g list must contain positive finite values".into()));
    }
    if g_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("g list must be sorted in strictly descending order".into()));
    }
    let wv = weak_value(system, post, obs)?;
    let target = wv.value.re;
    let meter = MeterState::with_sigma(sigma)?;

    let mut rows = Vec::with_capacity(g_list.len());
    for &g in g_list {
        let joint = couple(system, &meter, obs, g)?;
        let (pointer, probability) = postselect(&joint, post)?;
        let shift_over_g = (pointer_mean(&pointer) - meter.center) / g;
        rows.push(ConvergenceRow {
            g,
            shift_over_g,
            target,
            abs_error: (shift_over_g - target).abs(),
            probability,
        });
    }

    let monotone = rows.windows(2).all(|w| w[1].abs_error <= w[0].abs_error + ERROR_FLOOR);
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_error > ERROR_FLOOR)
        .map(|r| (r.g.ln(), r.abs_error.ln()))
        .collect();
    let fitted_order = (fit.len() >= 2).then(|| least_squares_slope(&fit));

    Ok(ConvergenceReport {
        sigma,
        weak_value_re: wv.value.re,
        weak_value_im: wv.value.im,
        rows,
        monotone,
        fitted_order,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Post-selection probability after a rotation `exp(−i ε J_γ)` is applied at
/// one Cheshire probe location: the whole beam before splitting (C0), the
/// recombined B+C arm (C2), arm A (C3) or the whole beam before the final
/// projection (C5).
pub fn epsilon_rotation_probability(config: &ScenarioConfig, location: Location, eps: f64) -> Result<f64> {
    config.validate()?;
    let gamma = config.require_gamma()?;
    let u = j_component(gamma).exp_i(eps);
    let post = config.post_state()?;

    let mut state = prepare(config)?;
    if location == Location::C0 {
        state.apply_spin_unitary(&u, |_| true)?;
    }
    let split = split_with_phases(&state, config.alpha, config.path_phases)?;
    let mut bc = recombine(&split, Recombination::Bc)?;
    match location {
        Location::C2 => bc.apply_spin_unitary(&u, |b| b.mode == Mode::RecombinedBc)?,
        Location::C3 => bc.apply_spin_unitary(&u, |b| b.mode == Mode::Arm(Path::A))?,
        Location::C0 | Location::C5 => {}
        other => {
            return Err(Error::Config(format!(
                "{other} is not a Cheshire rotation location"
            )))
        }
    }
    let mut closed = recombine(&bc, Recombination::All)?;
    if location == Location::C5 {
        closed.apply_spin_unitary(&u, |_| true)?;
    }
    Ok(closed.postselection_amplitude(&post)?.norm_sqr())
}

/// Response of the post-selection statistics to a small rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpsilonResponse {
    pub location: Location,
    pub eps: f64,
    pub p0: f64,
    pub p_eps: f64,
    /// `(P(ε) − P(0)) / P(0)`.
    pub relative_change: f64,
    /// Central difference `(P(ε) − P(−ε)) / 2ε`, the first-order slope.
    pub first_order: f64,
}

pub fn epsilon_response(config: &ScenarioConfig, location: Location, eps: f64) -> Result<EpsilonResponse> {
    let p0 = epsilon_rotation_probability(config, location, 0.0)?;
    let p_eps = epsilon_rotation_probability(config, location, eps)?;
    let p_neg = epsilon_rotation_probability(config, location, -eps)?;
    Ok(EpsilonResponse {
        location,
        eps,
        p0,
        p_eps,
        relative_change: (p_eps - p0) / p0,
        first_order: (p_eps - p_neg) / (2.0 * eps),
    })
}

/// `|⟨post|pre⟩|²`, the weak-coupling limit of the post-selection probability.
pub fn ideal_postselection_probability(pre: &SpinState, post: &SpinState) -> f64 {
    overlap(post, pre).norm_sqr()
}
