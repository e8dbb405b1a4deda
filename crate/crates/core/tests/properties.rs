use gq_core::baselines::scalar::{lloyd_scalar, Density};
use gq_core::eval::voronoi::{polygon_area, voronoi_cells};
use gq_core::highrate::{analytic_rate_echr, analytic_rate_hr, entropy_model, highrate_radius, rd_rate};
use gq_core::io::{codebook_from_json, codebook_to_json};
use gq_core::lloydmax::{isotonic_nondecreasing, lm_update};
use gq_core::nn::nearest_linear;
use gq_core::{
    build_highrate, quantize, quantize_batch, spiral_angle, spiral_centroids, Codebook, Complex, LloydMaxState,
    QuadratureGrid, RadiusConvention, Scheme, SourceModel,
};
use proptest::prelude::*;

fn radii(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..4.0f64, 1..max_n)
}

fn points(max_n: usize) -> impl Strategy<Value = Vec<Complex>> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Complex::new(x, y)), 1..max_n)
}

fn any_scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![
        Just(Scheme::HighRateGQ),
        Just(Scheme::LloydMaxGQ),
        Just(Scheme::RectProduct),
        Just(Scheme::PolarProduct),
        Just(Scheme::LBG),
    ]
}

proptest! {
    #[test]
    fn quantize_is_idempotent_on_centroids(r in radii(200)) {
        let cb = spiral_centroids(&r, Scheme::HighRateGQ, 1.0).unwrap();
        let idx = quantize_batch(&cb, cb.centroids());
        for (k, &c) in cb.centroids().iter().enumerate() {
            // coincident centroids resolve to the first copy
            let first = cb.centroids().iter().position(|&o| o == c).unwrap();
            prop_assert_eq!(quantize(&cb, c), first + 1);
            prop_assert_eq!(idx[k], first + 1);
        }
    }

    #[test]
    fn quantize_is_rotation_invariant(c in points(60), p in points(20), theta in 0.0..std::f64::consts::TAU) {
        let cb = Codebook::new(Scheme::LBG, 1.0, c.clone()).unwrap();
        let rot = Complex::from_polar(1.0, theta);
        let turned = cb.transformed(rot, 1.0).unwrap();
        for &q in &p {
            let mut d: Vec<f64> = c.iter().map(|&x| (q - x).norm_sqr()).collect();
            d.sort_by(f64::total_cmp);
            // skip near-ties, where rounding may legitimately flip the winner
            if d.len() > 1 && d[1] - d[0] < 1e-9 {
                continue;
            }
            prop_assert_eq!(quantize(&cb, q), quantize(&turned, q * rot));
        }
    }

    #[test]
    fn batch_equals_brute_force(c in points(120), p in points(300)) {
        let cb = Codebook::new(Scheme::LBG, 1.0, c.clone()).unwrap();
        let want: Vec<usize> = p.iter().map(|&q| nearest_linear(&c, q) + 1).collect();
        prop_assert_eq!(quantize_batch(&cb, &p), want);
    }

    #[test]
    fn codebook_json_round_trip(c in points(50), scheme in any_scheme(), sigma2 in 0.01..100.0f64, iters in 0u64..1000) {
        let cb = if scheme.is_golden() {
            let r: Vec<f64> = c.iter().map(|z| z.norm()).collect();
            spiral_centroids(&r, scheme, sigma2).unwrap()
        } else {
            Codebook::new(scheme, sigma2, c).unwrap()
        }
        .with_meta("iterations", iters)
        .with_meta("note", "x");
        let back = codebook_from_json(&codebook_to_json(&cb)).unwrap();
        prop_assert_eq!(back.scheme(), cb.scheme());
        prop_assert_eq!(back.sigma2().to_bits(), cb.sigma2().to_bits());
        prop_assert_eq!(back.metadata(), cb.metadata());
        for (a, b) in back.centroids().iter().zip(cb.centroids()) {
            prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
            prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn golden_angle_increment_is_constant(r in prop::collection::vec(0.1..4.0f64, 2..300)) {
        let cb = spiral_centroids(&r, Scheme::HighRateGQ, 1.0).unwrap();
        prop_assert!(cb.golden_angle_error() <= 1e-12);
        let g = gq_core::golden_angle();
        for n in 1..r.len() {
            let step = (spiral_angle(n + 1) - spiral_angle(n)).rem_euclid(std::f64::consts::TAU);
            prop_assert!((step - g).abs() < 1e-12);
        }
    }

    #[test]
    fn highrate_radii_increase_and_scale(n in 1usize..600, s in 0.01..50.0f64) {
        for conv in [RadiusConvention::Midpoint, RadiusConvention::RawClampLast] {
            let a = build_highrate(n, 1.0, conv).unwrap().radii();
            let b = build_highrate(n, s, conv).unwrap().radii();
            prop_assert!(a.windows(2).all(|w| w[1] > w[0]));
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((y - s.sqrt() * x).abs() <= 1e-12 * y.max(1.0));
            }
        }
        prop_assert!(highrate_radius(n, n + 1, 1.0, RadiusConvention::Midpoint).is_err());
    }

    #[test]
    fn rate_gaps_are_constant(d in 1e-9..1.0f64, s in 0.1..10.0f64) {
        let d = d * s;
        let hr = analytic_rate_hr(d, s).unwrap();
        prop_assert!((hr - rd_rate(d, s).unwrap() - (2.0 * std::f64::consts::PI / 3.0).log2()).abs() < 1e-12);
        let gap = (2.0 / std::f64::consts::E.sqrt()).log2();
        prop_assert!((hr - analytic_rate_echr(d, s).unwrap() - gap).abs() < 1e-12);
    }

    #[test]
    fn entropy_model_is_a_decreasing_distribution(n in 1usize..2000) {
        let m = entropy_model(n).unwrap();
        let p = m.probabilities();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn isotonic_projection(v in prop::collection::vec(-5.0..5.0f64, 1..50), wseed in prop::collection::vec(0.01..3.0f64, 50)) {
        let w = &wseed[..v.len()];
        let p = isotonic_nondecreasing(&v, w);
        prop_assert!(p.windows(2).all(|x| x[1] >= x[0] - 1e-12));
        // weighted mean is preserved and the projection is idempotent
        let mean = |x: &[f64]| x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        prop_assert!((mean(&p) - mean(&v)).abs() < 1e-9);
        let again = isotonic_nondecreasing(&p, w);
        for (a, b) in again.iter().zip(&p) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_levels_interleave(n in 1usize..24, rayleigh in any::<bool>(), v in 0.1..5.0f64) {
        let d = if rayleigh { Density::Rayleigh { sigma2: v } } else { Density::GaussianPerDim { var: v } };
        let q = lloyd_scalar(d, n, 1e-12, 100_000).unwrap();
        prop_assert_eq!(q.boundaries.len(), n - 1);
        for i in 0..n - 1 {
            prop_assert!(q.levels[i] < q.boundaries[i] && q.boundaries[i] < q.levels[i + 1]);
        }
        prop_assert!(q.centroid_error() < 1e-9 * v.sqrt().max(1.0));
    }

    #[test]
    fn voronoi_cells_tile_the_square(c in points(80)) {
        let cells = voronoi_cells(&c, 6.0);
        let total: f64 = cells.iter().map(polygon_area).sum();
        prop_assert!((total - 144.0).abs() < 1e-7, "{}", total);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Lloyd descent from arbitrary radii, with and without the growing-spiral constraint.
    #[test]
    fn lloyd_descent(r in prop::collection::vec(0.0..3.0f64, 1..40), monotone in any::<bool>()) {
        let s = SourceModel::unit();
        let grid = QuadratureGrid::for_source(&s, 128).unwrap();
        let mut start = r.clone();
        if monotone {
            start = isotonic_nondecreasing(&start, &vec![1.0; start.len()]);
        }
        let mut st = LloydMaxState::new(start, monotone);
        for _ in 0..25 {
            st = match lm_update(&st, &s, &grid) {
                Ok(next) => next,
                // a random start may leave a centroid without grid points
                Err(gq_core::Error::EmptyCell { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            let cb = st.codebook(1.0).unwrap();
            prop_assert!(cb.golden_angle_error() <= 1e-12 || st.radii.iter().all(|&x| x == 0.0));
            if monotone {
                prop_assert!(st.radii.windows(2).all(|w| w[1] >= w[0]));
            }
        }
        let t = &st.distortion_trace;
        prop_assert!(t.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", t);
    }
}
