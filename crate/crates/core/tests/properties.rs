//! Invariance and agreement properties on dyadic data, where every
//! residual and transform is exact in floating point.

use proptest::prelude::*;
use regdepth::depth::rd_over_cells;
use regdepth::{
    fit_exact_p2, rd_count_bh99, rd_normalized, rd_sign_bh992, transform_affine,
    transform_regression, transform_scale, ObservationSet, ParamVector,
};

fn dyadic(range: i32) -> impl Strategy<Value = f64> {
    (-range..=range).prop_map(|k| k as f64 / 8.0)
}

fn dataset() -> impl Strategy<Value = ObservationSet> {
    prop::collection::vec((dyadic(24), dyadic(24)), 3..24).prop_map(|pts| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        ObservationSet::from_xy(&x, &y).unwrap()
    })
}

fn beta() -> impl Strategy<Value = ParamVector> {
    (dyadic(16), dyadic(16)).prop_map(|(a, b)| ParamVector::new(vec![a, b]).unwrap())
}

fn depth(set: &ObservationSet, b: &ParamVector) -> f64 {
    rd_normalized(set, b, None).unwrap().normalized
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn regression_invariance(set in dataset(), b in beta(), shift in beta()) {
        let moved = transform_regression(&set, shift.as_slice()).unwrap();
        let moved_beta = b.shifted(shift.as_slice()).unwrap();
        prop_assert_eq!(depth(&moved, &moved_beta), depth(&set, &b));
    }

    #[test]
    fn scale_invariance(set in dataset(), b in beta(), s in prop::sample::select(vec![-2.0, -1.0, 0.5, 4.0])) {
        let scaled = transform_scale(&set, s).unwrap();
        prop_assert_eq!(depth(&scaled, &b.scaled(s)), depth(&set, &b));
    }

    #[test]
    fn affine_invariance(set in dataset(), b in beta(), a in prop::sample::select(vec![-2.0, -0.5, 2.0])) {
        let mapped = transform_affine(&set, &[vec![a]]).unwrap();
        let mapped_beta = ParamVector::new(vec![b.intercept(), b.slopes()[0] / a]).unwrap();
        prop_assert_eq!(depth(&mapped, &mapped_beta), depth(&set, &b));
    }

    #[test]
    fn formulations_agree(set in dataset(), b in beta()) {
        let n = set.len() as f64;
        let d = rd_normalized(&set, &b, None).unwrap();
        let cells = rd_over_cells(&set, &b).unwrap();
        prop_assert_eq!(d.normalized, cells.normalized);
        prop_assert!((0.0..=1.0).contains(&d.normalized));
        let cut = rd_count_bh99(&set, &b).unwrap().count.unwrap();
        let sign = rd_sign_bh992(&set, &b, None).unwrap().count.unwrap();
        prop_assert!(cut <= n && sign <= n);
        prop_assert_eq!((2.0 * sign).fract(), 0.0);
    }

    #[test]
    fn deepest_candidate_dominates(set in dataset(), b in beta()) {
        match fit_exact_p2(&set) {
            Ok(fit) => {
                prop_assert!(fit.candidate_depth >= depth(&set, &b));
                prop_assert!(fit.candidate_depth >= fit.depth.normalized);
                let n = set.len();
                prop_assert!(fit.candidate_depth * n as f64 >= (n as f64 / 3.0).ceil() - 1e-9);
            }
            Err(_) => prop_assert!(set.xs().windows(2).all(|w| w[0] == w[1])),
        }
    }
}
