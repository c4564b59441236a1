use ecdg::algebra::Mat;
use ecdg::flux::{build_boundary_flux, build_face_flux, primitive_rows, BoundaryKind, FluxCache, FluxKind, FluxSpec};
use ecdg::systems::{self, augment, AugmentMode, SymmetricSystem};
use proptest::prelude::*;

fn quad_form(j: &Mat, v: &[f64]) -> f64 {
    v.iter().zip(j.matvec(v)).map(|(a, b)| a * b).sum()
}

/// Systems with every flux kind that applies to them.
fn cases() -> Vec<(SymmetricSystem, Vec<FluxKind>)> {
    use FluxKind::*;
    let dissipative = vec![Upwind, LaxFriedrichs, Central];
    let with = |extra: &[FluxKind]| {
        let mut v = dissipative.clone();
        v.extend_from_slice(extra);
        v
    };
    vec![
        (systems::acoustics2d(0.0, 0.0, 1.0, 1.0).unwrap(), with(&[EnergyConserving, Alternating(None)])),
        (systems::maxwell_tm(1.0, 2.0).unwrap(), with(&[EnergyConserving, Alternating(None)])),
        (systems::elastodynamics(2.0, 1.0, 1.0).unwrap(), with(&[EnergyConserving, Alternating(None)])),
        (
            augment(&systems::acoustics2d(0.5, 0.0, 1.0, 1.0).unwrap(), AugmentMode::AcousticPairing2D).unwrap(),
            with(&[EnergyConserving]),
        ),
        (augment(&systems::advection2d(1.0, 0.5).unwrap(), AugmentMode::FullDouble).unwrap(), with(&[Doubling])),
        (augment(&systems::linearized_euler(0.5, 0.2).unwrap(), AugmentMode::FullDouble).unwrap(), with(&[Doubling])),
        (systems::linearized_euler(0.5, 0.2).unwrap(), dissipative.clone()),
    ]
}

fn conserving(kind: FluxKind) -> bool {
    matches!(kind, FluxKind::EnergyConserving | FluxKind::Doubling | FluxKind::Central | FluxKind::Alternating(_))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn consistency_and_energy_classification(angle in 0.0f64..std::f64::consts::TAU, state in proptest::collection::vec(-3.0f64..3.0, 20)) {
        let n = [angle.cos(), angle.sin()];
        for (sys, kinds) in cases() {
            let m = sys.m;
            let um = &state[..m];
            let up = &state[10..10 + m];
            let bn = sys.b_n(n);
            let exact = bn.mat().matvec(um);
            for kind in kinds {
                let f = build_face_flux(&sys, n, kind).unwrap();
                // Constant state: the flux is B_n u.
                let same = f.eval(um, um);
                for (a, b) in same.iter().zip(&exact) {
                    prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{} {kind:?}", sys.name);
                }
                prop_assert_eq!(f.mean.as_slice(), bn.mat().as_slice());
                let jump: Vec<f64> = um.iter().zip(up).map(|(a, b)| b - a).collect();
                let q = quad_form(&f.jump, &jump);
                let scale = 1.0 + jump.iter().map(|v| v * v).sum::<f64>() * f.jump.max_abs();
                if conserving(kind) {
                    prop_assert!(q.abs() <= 1e-12 * scale, "{} {kind:?} q = {q}", sys.name);
                    prop_assert!(f.conserves_energy(1e-12));
                } else {
                    prop_assert!(q <= 1e-12 * scale, "{} {kind:?} q = {q}", sys.name);
                    prop_assert!(f.jump.sub(&f.jump.transpose()).max_abs() <= 1e-12 * scale);
                }
            }
        }
    }

    #[test]
    fn boundary_split_identities(angle in 0.0f64..std::f64::consts::TAU) {
        let n = [angle.cos(), angle.sin()];
        for (sys, _) in cases() {
            let bn = sys.b_n(n);
            let inflow = build_boundary_flux(&sys, n, BoundaryKind::Inflow).unwrap();
            let (plus, minus) = (&inflow.interior, &inflow.data);
            prop_assert!(plus.add(minus).sub(bn.mat()).max_abs() <= 1e-12);
            let up = build_face_flux(&sys, n, FluxKind::Upwind).unwrap();
            // B+ - B- = |B_n| = -2 F_jump(upwind).
            prop_assert!(plus.sub(minus).add(&up.jump.scale(2.0)).max_abs() <= 1e-12);
            prop_assert!(quad_form(plus, &vec![1.0; sys.m]) >= -1e-12);
            let out = build_boundary_flux(&sys, n, BoundaryKind::Outflow).unwrap();
            prop_assert_eq!(out.data.max_abs(), 0.0);
            prop_assert_eq!(out.interior.as_slice(), plus.as_slice());
        }
    }
}

#[test]
fn central_and_upwind_scalar_advection() {
    let s = systems::advection1d(2.0).unwrap();
    let c = build_face_flux(&s, [1.0, 0.0], FluxKind::Central).unwrap();
    assert_eq!(c.jump.as_slice(), &[0.0]);
    assert_eq!(c.mean.as_slice(), &[1.0]);
    // In primitive rows the flux is c {u}.
    let (mean, _) = primitive_rows(&s, 0, &c).unwrap();
    assert!((mean[(0, 0)] - 2.0).abs() < 1e-15);
}

#[test]
fn doubled_scalar_advection_couples_through_half_jumps() {
    let s = augment(&systems::advection1d(1.0).unwrap(), AugmentMode::FullDouble).unwrap();
    let f = build_face_flux(&s, [1.0, 0.0], FluxKind::Doubling).unwrap();
    assert_eq!(f.jump.as_slice(), &[0.0, 0.5, -0.5, 0.0]);
    // u-: 1, u+: 3, phi-: 0, phi+: 4 -> u flux {u} + [phi]/2 = 2 + 2.
    let v = f.eval(&[1.0, 0.0], &[3.0, 4.0]);
    assert!((v[0] - 4.0).abs() < 1e-15);
    assert!((v[1] - (-2.0 - 1.0)).abs() < 1e-15);

    let b = [0.7, -1.3];
    let s2 = augment(&systems::advection2d(b[0], b[1]).unwrap(), AugmentMode::FullDouble).unwrap();
    let n = [0.6, 0.8];
    let f2 = build_face_flux(&s2, n, FluxKind::Doubling).unwrap();
    let bn: f64 = b[0] * n[0] + b[1] * n[1];
    assert!((f2.jump[(0, 1)] - 0.5 * bn.abs()).abs() < 1e-15);
    assert!((f2.jump[(1, 0)] + 0.5 * bn.abs()).abs() < 1e-15);
}

#[test]
fn acoustics_alternating_1d() {
    let s = systems::acoustics1d(0.5, 1.0, 1.0).unwrap();
    let f = build_face_flux(&s, [1.0, 0.0], FluxKind::Alternating(None)).unwrap();
    let a = 0.5 * 0.75f64.sqrt();
    assert!((f.jump[(0, 1)] - a).abs() < 1e-15 && (f.jump[(1, 0)] + a).abs() < 1e-15);
    assert!((a - 0.43301).abs() < 1e-5);
    let zero = build_face_flux(&s, [1.0, 0.0], FluxKind::Alternating(Some(0.0))).unwrap();
    assert_eq!(zero.jump.max_abs(), 0.0);
    // Without background flow and alpha = 1/2 the flux takes p from K- and u from K+.
    let still = systems::acoustics1d(0.0, 1.0, 1.0).unwrap();
    let alt = build_face_flux(&still, [1.0, 0.0], FluxKind::Alternating(None)).unwrap();
    let v = alt.eval(&[3.0, -1.0], &[7.0, 2.0]);
    assert!((v[0] - 2.0).abs() < 1e-15 && (v[1] - 3.0).abs() < 1e-15);
    // The coupler of the paired characteristics is the same flux.
    let ec = build_face_flux(&s, [1.0, 0.0], FluxKind::EnergyConserving).unwrap();
    assert!(ec.jump.sub(&f.jump).max_abs() < 1e-14);
}

#[test]
fn alternating_2d_examples() {
    let ac = systems::acoustics2d(0.0, 0.0, 1.0, 1.0).unwrap();
    let f = build_face_flux(&ac, [1.0, 0.0], FluxKind::Alternating(None)).unwrap();
    let v = f.eval(&[3.0, 0.0, 0.0], &[0.0, 2.0, 0.0]);
    assert_eq!(v, vec![2.0, 3.0, 0.0]);

    let el = systems::elastodynamics(2.0, 1.0, 1.0).unwrap();
    let f = build_face_flux(&el, [0.0, 1.0], FluxKind::Alternating(None)).unwrap();
    let um = [1.0, 2.0, 3.0, 4.0, 5.0];
    let up = [10.0, 20.0, 30.0, 40.0, 50.0];
    let v = f.eval(&um, &up);
    let want = [0.0, -up[4], -up[3], -um[2], -um[1]];
    for (a, b) in v.iter().zip(want) {
        assert!((a - b).abs() < 1e-13, "{v:?}");
    }

    let mx = systems::maxwell_tm(1.0, 1.0).unwrap();
    let f = build_face_flux(&mx, [1.0, 0.0], FluxKind::Alternating(None)).unwrap();
    // Hy row takes Ez from K-; Ez row takes Hy from K+.
    let v = f.eval(&[0.0, 1.0, 2.0], &[0.0, 5.0, 9.0]);
    assert_eq!(v, vec![0.0, -2.0, -5.0]);

    assert!(build_face_flux(&systems::acoustics2d(0.5, 0.0, 1.0, 1.0).unwrap(), [1.0, 0.0], FluxKind::Alternating(None)).is_err());
}

#[test]
fn pairing_errors_and_preconditions() {
    // Background flow leaves the acoustic spectrum unpaired without the auxiliary.
    let flow = systems::acoustics2d(0.5, 0.0, 1.0, 1.0).unwrap();
    assert!(build_face_flux(&flow, [1.0, 0.0], FluxKind::EnergyConserving).is_err());
    assert!(build_face_flux(&systems::advection1d(1.0).unwrap(), [1.0, 0.0], FluxKind::EnergyConserving).is_err());
    assert!(build_face_flux(&systems::advection2d(1.0, 1.0).unwrap(), [1.0, 0.0], FluxKind::Doubling).is_err());
    let part = augment(&systems::advection1d(1.0).unwrap(), AugmentMode::Partial1D).unwrap();
    let f = build_face_flux(&part, [1.0, 0.0], FluxKind::EnergyConserving).unwrap();
    assert_eq!(f.jump.as_slice(), &[0.0, 0.5, -0.5, 0.0]);
}

#[test]
fn advection_inflow_and_outflow_ends() {
    let s = systems::advection1d(1.0).unwrap();
    // Left end: outward normal -1, pure inflow.
    let left = build_boundary_flux(&s, [-1.0, 0.0], BoundaryKind::Inflow).unwrap();
    assert_eq!(left.interior.as_slice(), &[0.0]);
    assert_eq!(left.data.as_slice(), &[-1.0]);
    let right = build_boundary_flux(&s, [1.0, 0.0], BoundaryKind::Inflow).unwrap();
    assert_eq!(right.interior.as_slice(), &[1.0]);
    assert_eq!(right.data.as_slice(), &[0.0]);
}

#[test]
fn acoustic_wall() {
    let s = systems::acoustics2d(0.0, 0.0, 1.0, 1.0).unwrap();
    let u = [3.0, 0.4, -0.7];
    // Relative to +y the wall flux is (0, 0, p); the bottom wall has outward normal -y.
    let up = build_boundary_flux(&s, [0.0, 1.0], BoundaryKind::Wall).unwrap();
    assert_eq!(up.interior.matvec(&u), vec![0.0, 0.0, 3.0]);
    let bottom = build_boundary_flux(&s, [0.0, -1.0], BoundaryKind::Wall).unwrap();
    assert_eq!(bottom.interior.matvec(&u), vec![0.0, 0.0, -3.0]);
    assert!(build_boundary_flux(&systems::acoustics2d(0.5, 0.0, 1.0, 1.0).unwrap(), [0.0, 1.0], BoundaryKind::Wall).is_err());
}

#[test]
fn cache_returns_one_spec_per_normal() {
    let s = systems::maxwell_tm(1.0, 1.0).unwrap();
    let cache = FluxCache::new();
    let build = |n| build_face_flux(&s, n, FluxKind::Upwind);
    let a = cache.get_or_build([0.6, 0.8], build).unwrap();
    let b = cache.get_or_build([0.6 + 1e-15, 0.8], build).unwrap();
    assert!(std::sync::Arc::ptr_eq(&a, &b));
    let _ = cache.get_or_build([0.8, 0.6], build).unwrap();
    assert_eq!(cache.len(), 2);
    let direct: FluxSpec = build([0.6, 0.8]).unwrap();
    assert_eq!(direct.jump.as_slice(), a.jump.as_slice());
}

#[test]
fn flux_names_parse() {
    for (name, kind) in [
        ("ec", FluxKind::EnergyConserving),
        ("double", FluxKind::Doubling),
        ("upwind", FluxKind::Upwind),
        ("lf", FluxKind::LaxFriedrichs),
        ("central", FluxKind::Central),
        ("alt", FluxKind::Alternating(None)),
    ] {
        assert_eq!(name.parse::<FluxKind>().unwrap(), kind);
    }
    assert!("roe".parse::<FluxKind>().is_err());
}
