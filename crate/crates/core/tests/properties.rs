use core::f64::consts::PI;

use loewner_core::analysis::{beltrami_from_formula, BeltramiCircle, BeltramiField, MuSource};
use loewner_core::becker::{circle_fourier, classify_becker};
use loewner_core::geometry::{angle, cross_ratio, hyperbolic_distance_halfplane, BeckerDisk, Mobius, Point};
use loewner_core::Complex64;
use proptest::prelude::*;

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(re, im)| Complex64::new(re, im))
}

fn mobius() -> impl Strategy<Value = Mobius> {
    (complex(2.0), complex(2.0), complex(2.0), complex(2.0))
        .prop_filter("well conditioned", |(a, b, c, d)| (a * d - b * c).norm() > 0.2)
        .prop_map(|(a, b, c, d)| Mobius::new(a, b, c, d).unwrap())
}

/// Trigonometric polynomial `Σ c_m e^{imθ}`, `|m| ≤ 8`, scaled to `sup ≤ 0.9`.
fn trace(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    proptest::collection::vec(complex(1.0), 17).prop_map(move |coeffs| {
        let raw: Vec<Complex64> = (0..n)
            .map(|j| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(m, c)| c * Complex64::from_polar(1.0, (m as f64 - 8.0) * angle(j, n)))
                    .sum()
            })
            .collect();
        let sup = raw.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        raw.into_iter().map(|v| v * (0.9 / sup)).collect()
    })
}

proptest! {
    #[test]
    fn mobius_inverse_round_trip(m in mobius(), z in complex(3.0)) {
        let [_, _, c, d] = m.coefficients();
        prop_assume!((c * z + d).norm() > 0.1);
        let back = m.inverse().apply(m.apply(z));
        prop_assert!((back - z).norm() <= 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn cross_ratio_is_mobius_invariant(m in mobius(), z in proptest::array::uniform4(complex(2.0))) {
        for i in 0..4 {
            for j in 0..i {
                prop_assume!((z[i] - z[j]).norm() > 0.1);
            }
        }
        let [_, _, c, d] = m.coefficients();
        prop_assume!(z.iter().all(|w| (c * w + d).norm() > 0.1));
        let w: Vec<Complex64> = z.iter().map(|v| m.apply(*v)).collect();
        let (Point::Finite(a), Point::Finite(b)) = (cross_ratio(z[0], z[1], z[2], z[3]), cross_ratio(w[0], w[1], w[2], w[3])) else {
            return Err(TestCaseError::reject("infinite cross-ratio"));
        };
        prop_assert!((a - b).norm() <= 1e-7 * (1.0 + a.norm()));
    }

    #[test]
    fn disk_automorphisms_preserve_the_disk(a in complex(0.7), r in 0.0..0.999f64, t in 0.0..(2.0 * PI)) {
        prop_assume!(a.norm() < 0.95);
        let m = Mobius::disk_automorphism(a).unwrap();
        prop_assert!(m.apply(Complex64::from_polar(r, t)).norm() < 1.0 + 1e-12);
        prop_assert!((m.apply(Complex64::from_polar(1.0, t)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn becker_disk_is_a_hyperbolic_ball(k in 0.01..0.99f64, re in 0.01..20.0f64, im in -20.0..20.0f64) {
        let w = Complex64::new(re, im);
        let disk = BeckerDisk::new(k).unwrap();
        let d = hyperbolic_distance_halfplane(w, Complex64::new(1.0, 0.0)).unwrap();
        let r = disk.hyperbolic_radius();
        prop_assume!((d - r).abs() > 1e-9);
        prop_assert_eq!(disk.contains(w), d < r);
    }

    #[test]
    fn rotation_multiplies_coefficients(t in trace(64)) {
        let n = 64;
        let shift = n / 8;
        let alpha = 2.0 * PI / 8.0;
        let rotated: Vec<Complex64> = (0..n).map(|j| t[(j + shift) % n]).collect();
        let a = circle_fourier(&t).unwrap();
        let b = circle_fourier(&rotated).unwrap();
        for (idx, (x, y)) in a.iter().zip(&b).enumerate() {
            let m = idx as f64 - 32.0;
            prop_assert!((y - x * Complex64::from_polar(1.0, m * alpha)).norm() < 1e-13);
        }
        let field = |tr: &Vec<Complex64>| {
            let circles = [1.5, 2.0, 3.0].iter().map(|&rho| BeltramiCircle { rho, trace: tr.clone() }).collect();
            BeltramiField::from_circles(circles, MuSource::ClosedForm).unwrap()
        };
        let va = classify_becker(&field(&t), Some(1e-6)).unwrap();
        let vb = classify_becker(&field(&rotated), Some(1e-6)).unwrap();
        prop_assert_eq!(va.is_becker, vb.is_becker);
    }

    #[test]
    fn coefficients_are_bounded_by_the_dilatation(t in trace(128)) {
        let sup = t.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for a in circle_fourier(&t).unwrap() {
            prop_assert!(a.norm() <= sup * (1.0 + 1e-12));
        }
    }

    #[test]
    fn becker_fields_stay_becker_under_rotation(k in 0.0..0.95f64, alpha in 0.0..(2.0 * PI), m in 2u32..6) {
        let mu = move |z: Complex64| {
            let zeta = z / z.norm() * Complex64::from_polar(1.0, alpha);
            -k * zeta.powu(m)
        };
        let field = beltrami_from_formula(mu, &[1.1, 2.0, 4.0], 64).unwrap();
        prop_assert!(classify_becker(&field, None).unwrap().is_becker);
    }
}
