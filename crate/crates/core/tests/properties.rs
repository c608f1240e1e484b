use haarflow::circle::{FourierFunction, NormSpec};
use haarflow::haar::{analyze, dyadic_shift, synthesize, HaarCoefficients, LatticeHaar};
use haarflow::walk::{run_path, DigitStream, WalkConfig};
use proptest::prelude::*;

fn samples() -> impl Strategy<Value = (Vec<f64>, usize, u32)> {
    (1u32..=8, 1usize..=3).prop_flat_map(|(depth, dim)| {
        (
            prop::collection::vec(-10.0f64..10.0, dim << depth),
            Just(dim),
            Just(depth),
        )
    })
}

fn fourier() -> impl Strategy<Value = FourierFunction> {
    (1usize..=8, 1usize..=3).prop_flat_map(|(degree, dim)| {
        (
            prop::collection::vec(-3.0f64..3.0, dim),
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), degree),
            prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), degree),
        )
            .prop_map(|(a0, cos, sin)| FourierFunction::new(a0, cos, sin).unwrap())
    })
}

fn without_top(c: &HaarCoefficients) -> HaarCoefficients {
    let mut out = c.clone();
    out.mean_mut().iter_mut().for_each(|v| *v = 0.0);
    if let Some(top) = out.coeff_mut(haarflow::haar::DyadicInterval::UNIT) {
        top.iter_mut().for_each(|v| *v = 0.0);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn haar_round_trip((values, dim, depth) in samples()) {
        let c = analyze(&values, dim).unwrap();
        let back = synthesize(&c, depth).unwrap();
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn shift_squares_to_minus_identity_below_the_top((values, dim, _) in samples()) {
        let c = analyze(&values, dim).unwrap();
        let twice = dyadic_shift(&dyadic_shift(&c));
        let expected = without_top(&c);
        for ((_, a), (_, b)) in twice.iter().zip(expected.iter()) {
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(*x, -*y);
            }
        }
        let s = dyadic_shift(&c).coefficient_norm();
        let rest = expected.coefficient_norm();
        prop_assert!((s - rest).abs() <= 1e-12 * (1.0 + rest));
    }

    #[test]
    fn lattice_haar_round_trip(depth in 1u32..=10, seed in any::<u64>()) {
        let n = 1usize << depth;
        let values: Vec<i64> = (0..n as u64)
            .map(|i| ((seed ^ i.wrapping_mul(0x9e37_79b9)) % 41) as i64 - 20)
            .collect();
        let h = LatticeHaar::analyze(&values).unwrap();
        prop_assert_eq!(h.synthesize().unwrap(), values.clone());
        prop_assert_eq!(h.total(), values.iter().sum::<i64>());
    }

    #[test]
    fn conjugate_squared_is_minus_mean_free(f in fourier()) {
        let mean = FourierFunction::constant(f.a0().to_vec()).unwrap();
        let mean_free = f.add(&mean.scale(-1.0)).unwrap();
        prop_assert_eq!(f.conjugate().conjugate(), mean_free.scale(-1.0));
        let ns = NormSpec::new(2.0, 2.0, 128).unwrap();
        let lhs = f.conjugate().lp_norm_boundary(&ns).powi(2);
        let rhs = mean_free.lp_norm_boundary(&ns).powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
    }

    #[test]
    fn walk_moves_one_lattice_unit_and_stays_in_the_disc(seed in any::<u64>(), n in 4u32..=6) {
        let cfg = WalkConfig::new(n, 2.0).unwrap();
        let path = run_path(&cfg, &DigitStream::random(seed, 0, cfg.fine_steps() as usize + 1));
        prop_assert!(!path.exhausted());
        for l in 1..=path.last_fine_index() {
            let [a, b] = path.lattice_increment(l);
            prop_assert_eq!(a.abs() + b.abs(), 1);
        }
        prop_assert_eq!(path.lattice_increment(path.last_fine_index() + 1), [0, 0]);
        for x in path.coarse_positions() {
            prop_assert!(x[0].hypot(x[1]) <= 1.0);
        }
        match path.stop_k() {
            Some(k) => {
                prop_assert_eq!(k, path.last_fine_index());
                let [x, y] = path.terminal_position();
                prop_assert!(x.hypot(y) >= cfg.stop_radius());
            }
            None => prop_assert_eq!(path.last_fine_index(), cfg.fine_steps()),
        }
    }
}
