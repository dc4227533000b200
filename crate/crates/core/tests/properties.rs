use std::f64::consts::PI;

use lagrangian_lab::ambient::{holomorphic_volume, hyperkahler_rotate, kahler_form, liouville_form};
use lagrangian_lab::curves::{
    blow_down_poly, classify_degree2, factor_top, homogeneous_parts, parse_poly, poly_total_curvature,
    rescale_poly, singular_points, BiPoly, ConicKind,
};
use lagrangian_lab::gallery::{make_plane, PlaneSpec};
use lagrangian_lab::{Complex, Poly, Vector};
use proptest::prelude::*;

fn vector(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-3.0..3.0f64, 2 * n).prop_map(|v| Vector::new(v).unwrap())
}

fn complex() -> impl Strategy<Value = Complex> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex::new(a, b))
}

fn sparse_poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec(((0u32..5, 0u32..5), complex()), 1..6)
        .prop_map(|terms| terms.into_iter().fold(Poly::zero(), |p, ((i, j), c)| &p + &BiPoly::monomial(c, i, j)))
        .prop_filter("nonzero", |p| !p.is_zero())
}

proptest! {
    #[test]
    fn liouville_differential_is_twice_omega(u in vector(3), v in vector(3)) {
        // λ is linear in the base point, so dλ(u, v) = λ_u(v) − λ_v(u).
        let d = liouville_form(&u, &v).unwrap() - liouville_form(&v, &u).unwrap();
        let w = kahler_form(&u, &v).unwrap();
        prop_assert!((d - 2.0 * w).abs() < 1e-12 * (1.0 + u.norm() * v.norm()));
    }

    #[test]
    fn rotation_is_an_isometry(u in vector(2), v in vector(2)) {
        let (ru, rv) = (hyperkahler_rotate(&u).unwrap(), hyperkahler_rotate(&v).unwrap());
        prop_assert!((ru.dot(&rv) - u.dot(&v)).abs() < 1e-12 * (1.0 + u.norm() * v.norm()));
    }

    #[test]
    fn planes_are_lagrangian_with_angle_sum(phi in prop::collection::vec(0.0..2.0 * PI, 3)) {
        let spec = PlaneSpec::new(phi.clone()).unwrap();
        let frame: Vec<Vector> = (0..3).map(|a| spec.direction(a)).collect();
        for a in 0..3 {
            for b in 0..3 {
                prop_assert!(kahler_form(&frame[a], &frame[b]).unwrap().abs() < 1e-14);
            }
        }
        let vol = holomorphic_volume(&frame).unwrap();
        let sum: f64 = phi.iter().sum();
        prop_assert!((vol - Complex::from_polar(1.0, sum)).norm() < 1e-12);
        let p = make_plane(&spec, 2.0).unwrap();
        prop_assert!(p.second_fundamental_norm(&[0.3, -0.2, 0.1]).unwrap() < 1e-12);
    }

    #[test]
    fn rescaling_round_trips(p in sparse_poly(), lambda in 0.1..10.0f64) {
        let back = rescale_poly(&rescale_poly(&p, lambda).unwrap(), 1.0 / lambda).unwrap();
        prop_assert!(back.relative_distance(&p) < 1e-12);
    }

    #[test]
    fn blow_down_converges_to_the_top_part(p in sparse_poly()) {
        let d = p.degree().unwrap();
        let top = homogeneous_parts(&p).unwrap()[d as usize].clone();
        let mut last = f64::INFINITY;
        for k in 1..5 {
            let dist = rescale_poly(&p, 10f64.powi(-k)).unwrap().relative_distance(&top);
            prop_assert!(dist <= last + 1e-15);
            last = dist;
        }
        prop_assert!(last < 1e-3);
    }

    #[test]
    fn top_factorization_reconstructs(
        lines in prop::collection::vec((complex(), complex()), 1..5),
        scale in complex(),
    ) {
        prop_assume!(scale.norm() > 0.1 && lines.iter().all(|(a, b)| a.norm() + b.norm() > 0.1));
        let h = lines.iter().fold(BiPoly::constant(scale), |acc, &(a, b)| {
            &acc * &BiPoly::from_terms([((1, 0), a), ((0, 1), b)])
        });
        match factor_top(&h) {
            Ok(f) => {
                prop_assert_eq!(f.degree(), lines.len() as u32);
                prop_assert!(f.expand().relative_distance(&h) < 1e-8);
            }
            // nearly coincident random lines are legitimately ambiguous
            Err(e) => prop_assert!(e.to_string().contains("cluster"), "{e}"),
        }
    }

    #[test]
    fn parser_round_trip(p in sparse_poly()) {
        let q = parse_poly::<f64>(&p.to_string()).unwrap();
        prop_assert_eq!(q, p);
    }
}

/// Random irreducible conics: the predicted and measured total curvature agree, both respect the
/// `8π` ceiling and none has a singular point.
#[test]
fn classifier_and_curvature_are_coherent() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let mut c = || Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    for k in 0..100 {
        let p = if k % 2 == 0 {
            [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)]
                .into_iter()
                .fold(Poly::zero(), |acc, (i, j)| &acc + &BiPoly::monomial(c(), i, j))
        } else {
            let l = BiPoly::from_terms([((1, 0), c()), ((0, 1), c())]);
            &(&l.pow(2) + &BiPoly::from_terms([((1, 0), c()), ((0, 1), c())])) + &BiPoly::constant(c())
        };
        let r = classify_degree2(&p).unwrap();
        let want = if k % 2 == 0 { ConicKind::LawlorType } else { ConicKind::ParabolaType };
        assert_eq!(r.kind(), want, "{p}");
        let predicted = r.predicted_total_curvature();
        assert!(predicted <= 8.0 * PI + 1e-12);
        let measured = poly_total_curvature(&p, 40.0, 48).unwrap().value;
        assert!((measured - predicted).abs() <= 0.02 * predicted, "{p}: {measured} vs {predicted}");
        assert!(singular_points(&p).unwrap().is_empty(), "{p}");
        let lines = blow_down_poly(&p).unwrap();
        assert_eq!(lines.distinct(), if k % 2 == 0 { 2 } else { 1 });
    }
}
