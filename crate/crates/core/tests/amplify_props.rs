//! Invariants of the amplification measurements on random Herglotz fields.

use gradamp::amplify::{grad_sup, holder_c1half_norm, superlevel_measure, FieldSamples, DEFAULT_PAIR_BUDGET};
use gradamp::geometry::{Region, SetExpr};
use gradamp::herglotz::HerglotzKernel;
use gradamp::schrodinger::{ComplexField, Grid2D};
use gradamp::Complex64;
use proptest::prelude::*;

fn kernel(coeffs: &[(f64, f64)]) -> HerglotzKernel {
    let mut k = HerglotzKernel::zeros(2, coeffs.len()).unwrap();
    for (g, (a, b)) in k.coeffs.iter_mut().zip(coeffs) {
        *g = Complex64::new(*a, *b);
    }
    k
}

fn samples(k: &HerglotzKernel, region: &SetExpr, h: f64) -> FieldSamples {
    FieldSamples::from_fn(region, h, |p| {
        let j = k.jet2(p);
        (j.v, [j.dx, j.dy])
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn measurements_scale_with_the_field(c in coeffs(), s in 0.1f64..10.0) {
        let disk: SetExpr = Region::Disk { center: [0.3, -0.2], radius: 0.8 }.into();
        let a = samples(&kernel(&c), &disk, 0.1);
        let b = a.scaled(s);
        let (ga, _) = grad_sup(&a).unwrap();
        let (gb, _) = grad_sup(&b).unwrap();
        prop_assert!((gb - s * ga).abs() <= 1e-12 * s * ga);
        let ha = holder_c1half_norm(&a, DEFAULT_PAIR_BUDGET).unwrap();
        let hb = holder_c1half_norm(&b, DEFAULT_PAIR_BUDGET).unwrap();
        prop_assert!((hb - s * ha).abs() <= 1e-12 * s * ha);
        prop_assert_eq!(superlevel_measure(&a, 0.5 * ga), superlevel_measure(&b, 0.5 * gb));
    }

    #[test]
    fn sup_over_a_subregion_is_smaller(c in coeffs(), r in 0.1f64..0.8) {
        let k = kernel(&c);
        let g = Grid2D::new([-1.0, -1.0], [1.0, 1.0], 41, 41, 0.1, 0.1).unwrap();
        let field = ComplexField::from_fn(&g, 0.0, |p| k.eval_h(&p).unwrap());
        let big: SetExpr = Region::Disk { center: [0.0, 0.0], radius: 0.8 }.into();
        let small: SetExpr = Region::Disk { center: [0.0, 0.0], radius: r }.into();
        // Grid nodes of the small disk are a subset of those of the big one.
        let (gb, _) = grad_sup(&FieldSamples::from_grid(&field, &big).unwrap()).unwrap();
        let (gs, _) = grad_sup(&FieldSamples::from_grid(&field, &small).unwrap()).unwrap();
        prop_assert!(gs <= gb);
    }

    #[test]
    fn superlevel_area_is_monotone_and_bounded(c in coeffs(), l1 in 0.0f64..5.0, dl in 0.0f64..5.0) {
        let sq: SetExpr = Region::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] }.into();
        let s = samples(&kernel(&c), &sq, 0.05);
        let a1 = superlevel_measure(&s, l1);
        let a2 = superlevel_measure(&s, l1 + dl);
        prop_assert!(a2 <= a1);
        prop_assert!(a1 <= 1.0 + 1e-12);
        prop_assert!(a2 >= 0.0);
    }

    #[test]
    fn holder_norm_dominates_its_sup_parts(c in coeffs()) {
        let disk: SetExpr = Region::Disk { center: [1.0, 1.0], radius: 0.5 }.into();
        let s = samples(&kernel(&c), &disk, 0.05);
        let sup_u = s.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let (g, _) = grad_sup(&s).unwrap();
        let full = holder_c1half_norm(&s, DEFAULT_PAIR_BUDGET).unwrap();
        prop_assert!(full >= sup_u + g);
        // Random pairs plus neighbours never exceed the exhaustive maximum.
        let sampled = holder_c1half_norm(&s, 50).unwrap();
        prop_assert!(sampled <= full && sampled >= sup_u + g);
    }
}
