use ecdg::basis::{line_quadrature, volume_quadrature, RefElement, ReferenceBasis};
use proptest::prelude::*;

const ELEMS: [RefElement; 3] = [RefElement::Interval, RefElement::Quad, RefElement::Triangle];

fn quad_sum(elem: RefElement, exactness: usize, f: impl Fn([f64; 2]) -> f64) -> f64 {
    let q = volume_quadrature(elem, exactness);
    q.points.iter().zip(&q.weights).map(|(p, w)| w * f(*p)).sum()
}

/// Exact integral of `x^a y^b` over the reference element.
fn monomial_integral(elem: RefElement, a: u32, b: u32) -> f64 {
    let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
    match elem {
        RefElement::Interval => {
            if b == 0 {
                1.0 / f64::from(a + 1)
            } else {
                0.0
            }
        }
        RefElement::Quad => 1.0 / f64::from((a + 1) * (b + 1)),
        RefElement::Triangle => fact(a) * fact(b) / fact(a + b + 2),
    }
}

proptest! {
    #[test]
    fn quadrature_is_exact_to_declared_degree(e in 0usize..14, a in 0u32..14, b in 0u32..14, which in 0usize..3) {
        let elem = ELEMS[which];
        let (a, b) = match elem {
            RefElement::Interval => (a.min(e as u32), 0),
            RefElement::Quad => (a.min(e as u32), b.min(e as u32)),
            RefElement::Triangle => {
                let a = a.min(e as u32);
                (a, b.min(e as u32 - a))
            }
        };
        let got = quad_sum(elem, e, |p| p[0].powi(a as i32) * p[1].powi(b as i32));
        prop_assert!((got - monomial_integral(elem, a, b)).abs() <= 1e-13, "{elem:?} e={e} a={a} b={b}");
    }

    #[test]
    fn basis_reproduces_polynomials(k in 0usize..5, which in 0usize..3, coefs in proptest::collection::vec(-2.0f64..2.0, 45)) {
        let elem = ELEMS[which];
        let basis = ReferenceBasis::new(elem, k).unwrap();
        // A random polynomial in the space: total degree k (tensor degree k on quads).
        let f = |p: [f64; 2]| -> f64 {
            let mut s = 0.0;
            let mut t = 0;
            for a in 0..=k {
                for b in 0..=k {
                    let inside = match elem {
                        RefElement::Interval => b == 0,
                        RefElement::Quad => true,
                        RefElement::Triangle => a + b <= k,
                    };
                    if inside {
                        s += coefs[t % coefs.len()] * p[0].powi(a as i32) * p[1].powi(b as i32);
                        t += 1;
                    }
                }
            }
            s
        };
        let q = volume_quadrature(elem, 2 * k + 2);
        let mut c = vec![0.0; basis.n_modes()];
        for (p, w) in q.points.iter().zip(&q.weights) {
            let phi = basis.eval(*p);
            for i in 0..c.len() {
                c[i] += w * f(*p) * phi[i];
            }
        }
        for p in [[0.1, 0.2], [0.3, 0.6], [0.05, 0.9]] {
            let p = if elem == RefElement::Interval { [p[0], 0.0] } else if elem == RefElement::Triangle { [p[0] * 0.5, p[1] * 0.5] } else { p };
            let phi = basis.eval(p);
            let v: f64 = c.iter().zip(&phi).map(|(a, b)| a * b).sum();
            prop_assert!((v - f(p)).abs() <= 1e-12 * (1.0 + f(p).abs()));
        }
    }
}

#[test]
fn bases_are_orthonormal() {
    for elem in ELEMS {
        for k in 0..=8 {
            let b = ReferenceBasis::new(elem, k).unwrap();
            let q = volume_quadrature(elem, 2 * k + 2);
            let n = b.n_modes();
            let mut mass = vec![0.0; n * n];
            for (p, w) in q.points.iter().zip(&q.weights) {
                let phi = b.eval(*p);
                for i in 0..n {
                    for j in 0..n {
                        mass[i * n + j] += w * phi[i] * phi[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((mass[i * n + j] - expect).abs() < 1e-13, "{elem:?} k={k} ({i},{j}) {}", mass[i * n + j]);
                }
            }
        }
    }
}

#[test]
fn mode_counts() {
    assert_eq!(ReferenceBasis::new(RefElement::Interval, 0).unwrap().n_modes(), 1);
    assert_eq!(ReferenceBasis::new(RefElement::Interval, 2).unwrap().n_modes(), 3);
    assert_eq!(ReferenceBasis::new(RefElement::Quad, 2).unwrap().n_modes(), 9);
    assert_eq!(ReferenceBasis::new(RefElement::Triangle, 1).unwrap().n_modes(), 3);
    assert!(ReferenceBasis::new(RefElement::Interval, 40).is_err());
}

#[test]
fn gradients_match_central_differences() {
    let h = 1e-6;
    for elem in ELEMS {
        let b = ReferenceBasis::new(elem, 4).unwrap();
        for p in [[0.21, 0.13], [0.4, 0.35], [0.11, 0.52]] {
            let g = b.grad(p);
            for d in 0..elem.dim() {
                let mut pp = p;
                let mut pm = p;
                pp[d] += h;
                pm[d] -= h;
                let (vp, vm) = (b.eval(pp), b.eval(pm));
                for i in 0..b.n_modes() {
                    let fd = (vp[i] - vm[i]) / (2.0 * h);
                    assert!((fd - g[i][d]).abs() < 1e-6 * (1.0 + fd.abs()), "{elem:?} mode {i} dir {d}");
                }
            }
        }
    }
}

#[test]
fn interval_trace_at_right_end() {
    let b = ReferenceBasis::new(RefElement::Interval, 1).unwrap();
    let t = b.face_trace(1, &[0.0]);
    assert!((t[0][0] - 1.0).abs() < 1e-15);
    assert!((t[0][1] - 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn face_traces_agree_with_volume_evaluation() {
    for elem in [RefElement::Quad, RefElement::Triangle] {
        let b = ReferenceBasis::new(elem, 3).unwrap();
        for f in 0..elem.n_faces() {
            let params = [0.0, 0.3, 0.77, 1.0];
            let traces = b.face_trace(f, &params);
            for (s, tr) in params.iter().zip(&traces) {
                let v = b.eval(elem.face_point(f, *s));
                for i in 0..b.n_modes() {
                    assert!((tr[i] - v[i]).abs() < 1e-13);
                }
                // The constant mode is the same constant everywhere.
                assert!((tr[0] - traces[0][0]).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn small_rules() {
    let q = line_quadrature(3);
    assert_eq!(q.len(), 2);
    let q1 = line_quadrature(1);
    assert_eq!(q1.len(), 1);
    assert!((q1.points[0][0] - 0.5).abs() < 1e-15);
    let xy = quad_sum(RefElement::Triangle, 2, |p| p[0] * p[1]);
    assert!((xy - 1.0 / 24.0).abs() < 1e-15);
    for elem in ELEMS {
        let q = volume_quadrature(elem, 5);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        assert!((q.weights.iter().sum::<f64>() - elem.measure()).abs() < 1e-14);
    }
}
