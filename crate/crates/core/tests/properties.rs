use carleman_lab::carleman_check::{b_term, verify_pointwise, DEFAULT_TOL};
use carleman_lab::discrete_operator::{DiscreteOperator, Grid1D, Sign};
use carleman_lab::experiments::{least_squares, profile_grid, run_params};
use carleman_lab::phase_weight::PhaseWeight;
use carleman_lab::potential::{Decay, EnvelopeSpec, Family, PotentialSpec};
use carleman_lab::resolvent_norms::{weighted_resolvent_norm, WeightSpec};
use carleman_lab::scalar::norm2;
use carleman_lab::{Cplx, Potential};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Potential> {
    prop_oneof![
        Just(PotentialSpec::zero()),
        (-3.0..3.0f64, 0.0..2.0f64, 0.1..0.5f64, 0.0..1.0f64).prop_map(|(depth, inner, ramp, plateau)| {
            PotentialSpec::new(Family::SmoothWell { depth, inner, outer: inner + 2.0 * ramp + plateau, ramp })
                .unwrap()
        }),
        (0.5..3.0f64, 0.3..2.0f64, 0.05..0.3f64).prop_map(|(height, center, half_width)| {
            PotentialSpec::new(Family::DoubleBarrier { height, center: center.max(half_width), half_width }).unwrap()
        }),
        (0.1..2.0f64, 0.0..0.8f64).prop_map(|(amplitude, exponent)| {
            PotentialSpec::new(Family::SingularPower { amplitude, exponent, cutoff: None }).unwrap()
        }),
        (-2.0..2.0f64, 0.2..3.0f64)
            .prop_map(|(amplitude, rho)| PotentialSpec::new(Family::LongRange { amplitude, rho }).unwrap()),
    ]
}

fn compact_family() -> impl Strategy<Value = Potential> {
    family().prop_filter("compact support", |p| p.support_radius().is_some())
}

fn free_env() -> EnvelopeSpec<f64> {
    EnvelopeSpec::trivial(Decay::Power { rho: 1.0 })
}

fn small_operator(spec: &Potential, h: f64, eps: f64, sign: Sign, half_line: bool) -> DiscreteOperator<f64> {
    let grid = if half_line {
        Grid1D::half_line(3, 1, 0.01, 3.0, 160).unwrap()
    } else {
        Grid1D::line(1.5, 161).unwrap()
    };
    // tall potentials would trip the wavelength rule at this size
    DiscreteOperator::discretize(&spec.scaled(0.2), grid, h, 1.0, eps, sign).unwrap()
}

fn vector(seed: &[(f64, f64)]) -> Vec<Cplx<f64>> {
    seed.iter().map(|&(re, im)| Cplx::new(re, im)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn slope_matches_finite_differences(spec in family(), r in 0.01..20.0f64) {
        let step = 1e-5;
        let fd = (spec.eval_v(r + step).unwrap() - spec.eval_v(r - step).unwrap()) / (2.0 * step);
        let dv = spec.eval_dv(r).unwrap();
        prop_assert!((fd - dv).abs() <= 1e-6 * dv.abs().max(1.0), "r = {r}: fd {fd} vs {dv}");
    }

    #[test]
    fn doubling_never_decreases_b(spec in compact_family(), energy in 0.25..4.0f64) {
        let grid: Vec<f64> = (0..=12_000).map(|i| 1.0 + 1e-3 * i as f64).collect();
        let b1 = spec.compute_b(energy, &grid).unwrap();
        let b2 = spec.scaled(2.0).compute_b(energy, &grid).unwrap();
        prop_assert!(b2 >= b1);
    }

    #[test]
    fn free_profile_shape(energy in 0.25..4.0f64, s in 0.6..3.0f64) {
        let params = run_params(&PotentialSpec::zero(), &free_env(), energy, s).unwrap();
        let grid = profile_grid(&params, 1e-3, 3000);
        let p = PhaseWeight::new(params, free_env()).build_profile(&grid).unwrap();
        for i in 0..p.len() {
            let r = p.grid[i];
            prop_assert!(p.w[i] > 0.0 && p.w_prime[i] > 0.0 && p.phi_prime[i] >= 0.0);
            if i > 0 {
                prop_assert!(p.phi[i] >= p.phi[i - 1]);
            }
            if r > params.outer {
                prop_assert_eq!(p.phi_prime[i], 0.0);
                prop_assert!(p.w_prime[i] >= (r + 1.0).powf(-2.0 * s));
            } else {
                prop_assert!(2.0 * p.w[i] / r >= p.w_prime[i]);
            }
        }
        prop_assert!((p.w[0] - grid[0]).abs() <= 1e-12);
    }

    #[test]
    fn b_term_shrinks_with_h(energy in 0.25..4.0f64, idx in 0usize..3000) {
        let params = run_params(&PotentialSpec::zero(), &free_env(), energy, 1.0).unwrap();
        let grid = profile_grid(&params, 1e-3, 3000);
        let p = PhaseWeight::new(params, free_env()).build_profile(&grid).unwrap();
        let sample = p.sample(idx % p.len());
        let bs: Vec<f64> = [0.2, 0.1, 0.05].iter().map(|&h| b_term(&sample, h)).collect();
        prop_assert!(bs[1] <= bs[0] && bs[2] <= bs[1]);
    }

    #[test]
    fn free_inequality_holds_dyadically(energy in 0.25..4.0f64, k in 0u32..5) {
        let params = run_params(&PotentialSpec::zero(), &free_env(), energy, 1.0).unwrap();
        let grid = profile_grid(&params, 1e-3, 3000);
        let p = PhaseWeight::new(params, free_env()).build_profile(&grid).unwrap();
        let h = params.h0 / 2f64.powi(k as i32);
        prop_assert!(verify_pointwise(&p, &PotentialSpec::zero(), h, DEFAULT_TOL).unwrap().passed());
    }

    #[test]
    fn operator_is_complex_symmetric(
        spec in compact_family(),
        xs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 161),
        ys in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 161),
        half_line in any::<bool>(),
    ) {
        let op = small_operator(&spec, 0.3, 0.1, Sign::Plus, half_line);
        let n = op.n();
        let (x, y) = (vector(&xs[..n]), vector(&ys[..n]));
        let dot = |a: &[Cplx<f64>], b: &[Cplx<f64>]| a.iter().zip(b).fold(Cplx::new(0.0, 0.0), |acc, (p, q)| acc + p * q);
        let (l, r) = (dot(&x, &op.apply(&y)), dot(&y, &op.apply(&x)));
        prop_assert!((l - r).norm() <= 1e-12 * l.norm().max(1.0));
    }

    #[test]
    fn solves_respect_eps_bound(
        spec in compact_family(),
        rhs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 161),
        eps in 0.01..1.0f64,
        minus in any::<bool>(),
    ) {
        let sign = if minus { Sign::Minus } else { Sign::Plus };
        let op = small_operator(&spec, 0.3, eps, sign, false);
        let f = vector(&rhs[..op.n()]);
        let u = op.solve(&f).unwrap();
        prop_assert!(norm2(&u) <= norm2(&f) / eps + 1e-9);
    }

    #[test]
    fn weights_lie_in_unit_interval(s in 0.51..4.0f64, cut in prop::option::of(0.0..5.0f64), x in -20.0..20.0f64) {
        let w = WeightSpec::new(s, cut).unwrap().eval(x);
        prop_assert!((0.0..=1.0).contains(&w));
        if let Some(m) = cut {
            if x.abs() < m {
                prop_assert_eq!(w, 0.0);
            }
        }
    }

    #[test]
    fn fitted_r_squared_is_a_fraction(ys in prop::collection::vec(-5.0..5.0f64, 3..10)) {
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
        let (_, _, r2) = least_squares(&pts).unwrap();
        prop_assert!((0.0..=1.0).contains(&r2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norms_are_monotone_and_sign_symmetric(spec in compact_family(), eps in 0.05..0.5f64, half_line in any::<bool>()) {
        let plus = small_operator(&spec, 0.3, eps, Sign::Plus, half_line);
        let minus = small_operator(&spec, 0.3, eps, Sign::Minus, half_line);
        let norm = |op: &DiscreteOperator<f64>, s: f64, m: Option<f64>| {
            weighted_resolvent_norm(op, &WeightSpec::new(s, m).unwrap(), 1e-11, 100_000, 5).unwrap().value
        };
        let mut last = f64::INFINITY;
        for s in [0.6, 1.0, 2.0] {
            let g = norm(&plus, s, None);
            prop_assert!(g <= 1.0 / eps + 1e-9);
            prop_assert!(g <= last * (1.0 + 1e-8));
            prop_assert!((g - norm(&minus, s, None)).abs() <= 1e-10 * g);
            last = g;
        }
        let mut last = f64::INFINITY;
        for m in [0.0, 0.5, 1.0] {
            let g = norm(&plus, 1.0, Some(m));
            prop_assert!(g <= last * (1.0 + 1e-8));
            last = g;
        }
    }
}
