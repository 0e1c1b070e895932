//! Property-based invariants of the spin algebra, weak values, interferometer
//! and meter coupling.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use proptest::prelude::*;
use weakspin::conditions::Selection;
use weakspin::interferometer::{
    path_group_weak_value, spin_weak_value_on_path, Location, Path, ScenarioConfig, ScenarioKind,
};
use weakspin::meter::{couple, MeterState};
use weakspin::spin_algebra::{
    basis_state, j_component, max_abs_diff, overlap, rotation_operator, wigner_d_small, CMatrix3, PROJECTIONS,
};
use weakspin::weak_values::{spin_projector, weak_value};
use weakspin::{Angle, Complex64, Observable, SpinState};

const TOL: f64 = 1e-12;

fn angle() -> impl Strategy<Value = f64> {
    -TAU..TAU
}

fn state() -> impl Strategy<Value = SpinState> {
    prop::array::uniform6(-1.0f64..1.0)
        .prop_filter("non-degenerate", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| {
            SpinState::new([
                Complex64::new(v[0], v[1]),
                Complex64::new(v[2], v[3]),
                Complex64::new(v[4], v[5]),
            ])
            .unwrap()
        })
}

fn hermitian() -> impl Strategy<Value = Observable> {
    prop::array::uniform18(-2.0f64..2.0).prop_map(|v| {
        let m = CMatrix3::from_fn(|i, j| Complex64::new(v[3 * i + j], v[9 + 3 * i + j]));
        Observable::new((m + m.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
    })
}

fn m_index() -> impl Strategy<Value = i32> {
    prop::sample::select(PROJECTIONS.to_vec())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() < tol
}

proptest! {
    #[test]
    fn d_matrix_is_orthogonal_and_composes(a in angle(), b in angle()) {
        let da = wigner_d_small(Angle::from_radians(a));
        let db = wigner_d_small(Angle::from_radians(b));
        let dab = wigner_d_small(Angle::from_radians(a + b));
        let gram = da.transpose() * da;
        let prod = da * db;
        for i in 0..3 {
            for j in 0..3 {
                let id = f64::from(u8::from(i == j));
                prop_assert!((gram[(i, j)] - id).abs() < TOL);
                prop_assert!((prod[(i, j)] - dab[(i, j)]).abs() < TOL);
            }
        }
    }

    #[test]
    fn rotation_is_unitary_and_conjugates_jz(t in angle()) {
        let th = Angle::from_radians(t);
        let u = rotation_operator(th);
        prop_assert!(max_abs_diff(&(u.adjoint() * u), &CMatrix3::identity()) < TOL);
        let conj = u * Observable::jz().mat() * u.adjoint();
        prop_assert!(max_abs_diff(&conj, j_component(th).mat()) < TOL);
    }

    #[test]
    fn rotated_basis_states_are_eigenvectors(t in angle(), m in m_index()) {
        let th = Angle::from_radians(t);
        let v = basis_state(th, m).unwrap();
        let jv = j_component(th).mat() * v.amps();
        for i in 0..3 {
            prop_assert!(close(jv[i], v.amps()[i] * m as f64, TOL));
        }
    }

    #[test]
    fn overlaps_follow_the_d_matrix(a in angle(), b in angle(), m in m_index(), n in m_index()) {
        let (aa, bb) = (Angle::from_radians(a), Angle::from_radians(b));
        let va = basis_state(aa, m).unwrap();
        let vb = basis_state(bb, n).unwrap();
        let ov = overlap(&va, &vb);
        let d = wigner_d_small(Angle::from_radians(b - a));
        let idx = |k: i32| (1 - k) as usize;
        prop_assert!(close(ov, Complex64::new(d[(idx(m), idx(n))], 0.0), TOL));
        // Same axis: orthonormal.
        let same = overlap(&va, &basis_state(aa, n).unwrap());
        let delta = Complex64::new(f64::from(u8::from(m == n)), 0.0);
        prop_assert!(close(same, delta, TOL));
    }

    #[test]
    fn projectors_are_complete(t in angle()) {
        let th = Angle::from_radians(t);
        let mut sum = CMatrix3::zeros();
        for m in PROJECTIONS {
            let p = spin_projector(th, m).unwrap();
            prop_assert!(max_abs_diff(&(p.mat() * p.mat()), p.mat()) < TOL);
            sum += p.mat();
        }
        prop_assert!(max_abs_diff(&sum, &CMatrix3::identity()) < TOL);
    }

    #[test]
    fn weak_value_is_linear(pre in state(), post in state(), a in hermitian(), b in hermitian(), x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(overlap(&post, &pre).norm() > 1e-3);
        let combo = &(&a * x) + &(&b * y);
        let lhs = weak_value(&pre, &post, &combo).unwrap().value;
        let rhs = weak_value(&pre, &post, &a).unwrap().value * x + weak_value(&pre, &post, &b).unwrap().value * y;
        let scale = 1.0 + rhs.norm();
        prop_assert!((lhs - rhs).norm() < 1e-9 * scale);
    }

    #[test]
    fn weak_value_ignores_global_phases(pre in state(), post in state(), o in hermitian(), c1 in angle(), c2 in angle()) {
        prop_assume!(overlap(&post, &pre).norm() > 1e-3);
        let w0 = weak_value(&pre, &post, &o).unwrap().value;
        let w1 = weak_value(&pre.with_phase(c1), &post.with_phase(c2), &o).unwrap().value;
        prop_assert!((w0 - w1).norm() < 1e-9 * (1.0 + w0.norm()));
    }

    #[test]
    fn coupling_is_unitary(s in state(), o in hermitian(), g in -2.0f64..2.0) {
        let meter = MeterState::with_sigma(1.0).unwrap();
        prop_assume!(g.abs() * o.eigen().0.iter().fold(0.0f64, |m, e| m.max(e.abs())) < 3.5);
        let joint = couple(&s, &meter, &o, g).unwrap();
        prop_assert!((joint.norm_sqr() - meter.norm_sqr()).abs() < 1e-10);
    }
}

fn random_config(alpha: f64, phi: f64, gamma: f64, pre_axis: f64, pre_m: i32, post_m: i32) -> ScenarioConfig {
    // The default runs the γ solver; build it once.
    static BASE: OnceLock<ScenarioConfig> = OnceLock::new();
    let mut c = BASE.get_or_init(ScenarioConfig::cheshire_default).clone();
    c.kind = ScenarioKind::Cheshire;
    c.alpha = Angle::from_radians(alpha);
    c.phi = Angle::from_radians(phi);
    c.gamma = Some(Angle::from_radians(gamma));
    c.selection = Selection { pre_axis: Angle::from_radians(pre_axis), pre_m, post_m };
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn projector_weak_values_sum_to_one(pre in state(), post in state(), t in angle()) {
        prop_assume!(overlap(&post, &pre).norm() > 1e-3);
        let th = Angle::from_radians(t);
        let total: Complex64 = PROJECTIONS
            .iter()
            .map(|&m| weak_value(&pre, &post, &spin_projector(th, m).unwrap()).unwrap().value)
            .sum();
        prop_assert!(close(total, Complex64::new(1.0, 0.0), TOL), "sum = {total}");
    }
}

proptest! {
    #[test]
    fn arm_spin_weak_values_add_up(
        alpha in 0.0..PI, phi in angle(), gamma in angle(), pre_axis in angle(),
        pre_m in m_index(), post_m in m_index(),
    ) {
        let c = random_config(alpha, phi, gamma, pre_axis, pre_m, post_m);
        prop_assume!(c.postselection_amplitude().unwrap().norm() > 1e-3);
        let a = spin_weak_value_on_path(&c, Location::C3).unwrap().value;
        let abar = spin_weak_value_on_path(&c, Location::C2).unwrap().value;
        let t0 = spin_weak_value_on_path(&c, Location::C0).unwrap().value;
        let t5 = spin_weak_value_on_path(&c, Location::C5).unwrap().value;
        let scale = 1.0 + t0.norm();
        prop_assert!((a + abar - t0).norm() < 1e-10 * scale);
        prop_assert!((t0 - t5).norm() < 1e-10 * scale);
    }

    #[test]
    fn path_weak_values_sum_to_one_and_closeout_reproduces_overlap(
        alpha in 0.0..PI, phi in angle(), pre_axis in angle(), pre_m in m_index(), post_m in m_index(),
    ) {
        let c = random_config(alpha, phi, 0.3, pre_axis, pre_m, post_m);
        let amp = c.postselection_amplitude().unwrap();
        let direct = overlap(&c.post_state().unwrap(), &c.pre_state().unwrap());
        prop_assert!(close(amp, direct, TOL));
        prop_assume!(amp.norm() > 1e-3);
        let total: Complex64 = Path::ALL
            .iter()
            .map(|&p| path_group_weak_value(&c, &[p]).unwrap().value)
            .sum();
        prop_assert!((total - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        let bbar = path_group_weak_value(&c, &[Path::A, Path::C]).unwrap().value;
        let b = path_group_weak_value(&c, &[Path::B]).unwrap().value;
        prop_assert!((bbar + b - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }
}
