//! Sign-bracketing root search on a periodic interval.

use std::f64::consts::TAU;

/// Grid used to bracket sign changes over [0, 2π).
pub const BRACKET_POINTS: usize = 2000;
/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_XTOL: f64 = 1e-13;
/// Roots closer than this (modulo 2π) are merged.
pub const MERGE_TOL: f64 = 1e-9;
/// A local minimum of |f| without a sign change counts as a (touching) root
/// when |f| drops below this.
pub const TOUCH_TOL: f64 = 1e-12;

/// Bisection on `[lo, hi]`; the caller guarantees `f(lo)` and `f(hi)` differ
/// in sign (or one of them is zero).
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        if hi - lo <= xtol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes `|f|` on `[lo, hi]` by golden-section search.
fn golden_min_abs<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - r * (hi - lo);
    let mut b = lo + r * (hi - lo);
    let (mut fa, mut fb) = (f(a).abs(), f(b).abs());
    for _ in 0..200 {
        if hi - lo <= xtol {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - r * (hi - lo);
            fa = f(a).abs();
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + r * (hi - lo);
            fb = f(b).abs();
        }
    }
    0.5 * (lo + hi)
}

/// All roots of a 2π-periodic `f` in [0, 2π), sorted ascending: sign changes
/// on the grid, refined by bisection, plus touching (even-multiplicity) roots
/// found as local minima of |f| that reach [`TOUCH_TOL`].
pub fn periodic_roots<F: Fn(f64) -> f64>(f: F) -> Vec<f64> {
    let step = TAU / BRACKET_POINTS as f64;
    let samples: Vec<(f64, f64)> = (0..=BRACKET_POINTS)
        .map(|i| {
            let x = i as f64 * step;
            (x, f(x))
        })
        .collect();

    let mut roots = Vec::new();
    for pair in samples.windows(2) {
        let (x0, f0) = pair[0];
        let (x1, f1) = pair[1];
        if f0 == 0.0 {
            roots.push(x0);
        } else if f1 != 0.0 && (f0 < 0.0) != (f1 < 0.0) {
            roots.push(bisect(&f, x0, x1, BISECTION_XTOL));
        }
    }
    let changes = |a: f64, b: f64| a == 0.0 || b == 0.0 || (a < 0.0) != (b < 0.0);
    for w in samples.windows(3) {
        let ((x0, f0), (_, f1), (x2, f2)) = (w[0], w[1], w[2]);
        if f1.abs() <= f0.abs() && f1.abs() <= f2.abs() && !changes(f0, f1) && !changes(f1, f2) {
            let x = golden_min_abs(&f, x0, x2, BISECTION_XTOL);
            if f(x).abs() < TOUCH_TOL {
                roots.push(x);
            }
        }
    }

    let mut out: Vec<f64> = Vec::with_capacity(roots.len());
    for r in roots.into_iter().map(|r| if r >= TAU { r - TAU } else { r }) {
        if !out.iter().any(|&q| periodic_distance(q, r) < MERGE_TOL) {
            out.push(r);
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out
}

fn periodic_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_roots() {
        let r = periodic_roots(|x: f64| (x - 0.3).sin());
        assert_eq!(r.len(), 2);
        assert!((r[0] - 0.3).abs() < 1e-12);
        assert!((r[1] - (0.3 + std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn touching_root() {
        let r = periodic_roots(|x: f64| 1.0 - (x - 1.234).cos());
        assert_eq!(r.len(), 1);
        assert!((r[0] - 1.234).abs() < 1e-6);
        assert!(periodic_roots(|x: f64| 1.5 - x.cos()).is_empty());
    }

    #[test]
    fn root_on_grid_point_and_wraparound() {
        // zeros at 0 and π; 0 is also sampled at 2π and must be merged
        let r = periodic_roots(|x: f64| x.sin());
        assert_eq!(r.len(), 2);
        assert!(r[0].abs() < 1e-12);
    }

    #[test]
    fn no_roots() {
        assert!(periodic_roots(|x: f64| 2.0 + x.cos()).is_empty());
    }
}
