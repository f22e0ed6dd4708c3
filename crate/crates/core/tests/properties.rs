mod common;

use std::collections::BTreeSet;

use common::{contexts, random_measure, random_point_measure, random_xi};
use hecke_walk::algebra::{lambda_generators, CosetKey, FieldContext, GroupElem, Mode, XiElem};
use hecke_walk::characters::{eval_character, CharacterSpec, CycloValue};
use hecke_walk::measures::{absorb_lift, affine_step_measure, commuting_average};
use hecke_walk::rational::{int, rat, Rational};
use hecke_walk::spectrum::{
    plan_spectrum, spectrum_value, subsum_enumerate, subsum_member, BetaSeq, Membership,
};
use hecke_walk::walk::{rng_from_seed, BallMeasure, WalkRng};
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

fn each_context(seed: u64, mut f: impl FnMut(FieldContext, &mut WalkRng)) {
    let mut rng = rng_from_seed(seed);
    for ctx in contexts() {
        f(ctx, &mut rng);
    }
}

fn random_elem(ctx: FieldContext, rng: &mut WalkRng) -> GroupElem {
    GroupElem::new(random_xi(ctx, rng), rng.random_range(-3..=3))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn field_is_a_ring_with_ultrametric_valuation(seed in any::<u64>()) {
        each_context(seed, |ctx, rng| {
            let (a, b, c) = (random_xi(ctx, rng), random_xi(ctx, rng), random_xi(ctx, rng));
            assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            assert_eq!(&a * &b, &b * &a);
            assert!((&a - &a).is_zero());
            assert_eq!(&a + &(-&a), XiElem::zero(ctx));
            if let (Some(va), Some(vb)) = (a.valuation(), b.valuation()) {
                assert_eq!((&a * &b).valuation(), Some(va + vb));
            }
            assert!((&a + &b).abs() <= a.abs().max(b.abs()));
            let parsed = XiElem::parse(ctx, &a.to_string()).unwrap();
            assert_eq!(parsed, a);
        });
    }

    #[test]
    fn group_laws_and_action(seed in any::<u64>()) {
        each_context(seed, |ctx, rng| {
            let (g, h, k) = (random_elem(ctx, rng), random_elem(ctx, rng), random_elem(ctx, rng));
            assert_eq!(g.mul(&h).mul(&k), g.mul(&h.mul(&k)));
            assert!(g.mul(&g.inverse()).is_identity());
            assert!(g.inverse().mul(&g).is_identity());
            let y = random_xi(ctx, rng);
            assert_eq!(g.mul(&h).act(&y), g.act(&h.act(&y)));
            let (section, lambda) = g.decompose().unwrap();
            assert!(lambda.in_lambda());
            assert_eq!(section.mul(&lambda), g);
            assert_eq!(section.coset_key(), g.coset_key());
        });
    }

    #[test]
    fn coset_key_is_constant_on_right_lambda_cosets(seed in any::<u64>()) {
        each_context(seed, |ctx, rng| {
            let g = random_elem(ctx, rng);
            for l in lambda_generators(ctx, 2) {
                assert_eq!(g.mul(&l).coset_key(), g.coset_key());
            }
            let key = g.coset_key();
            assert_eq!(key.section().coset_key(), key);
        });
    }

    #[test]
    fn convolution_is_associative_and_mass_preserving(seed in any::<u64>()) {
        each_context(seed, |ctx, rng| {
            let (a, b, c) = (random_measure(ctx, rng), random_measure(ctx, rng), random_measure(ctx, rng));
            let left = a.convolve(&b).unwrap().convolve(&c).unwrap();
            let right = a.convolve(&b.convolve(&c).unwrap()).unwrap();
            assert_eq!(left, right);
            assert!(left.is_probability());
            assert_eq!(a.convolve(&b).unwrap().z_drift(), a.z_drift() + b.z_drift());
        });
    }

    #[test]
    fn constructors_produce_absorbing_measures(seed in any::<u64>()) {
        each_context(seed, |ctx, rng| {
            let t = random_measure(ctx, rng);
            for (name, m) in [("absorb_lift", absorb_lift(&t).unwrap()), ("commuting_average", commuting_average(&t).unwrap())] {
                assert!(m.is_absorbing().absorbing, "{name} of {t}");
                assert!(m.is_probability());
            }
            let kappa = random_point_measure(ctx, rng);
            let t_minus = random_point_measure(ctx, rng);
            let delta = rat(rng.random_range(1..=9), 10);
            let m = affine_step_measure(ctx, &kappa, &t_minus, &delta).unwrap();
            assert!(m.is_absorbing().absorbing);
            assert!(m.is_probability());
        });
    }

    #[test]
    fn coarsening_preserves_mass(seed in any::<u64>(), level in 1i64..5) {
        each_context(seed, |ctx, _| {
            let nu = BallMeasure::haar_o(ctx, -1, level).unwrap();
            assert!(nu.is_l_invariant());
            let coarse = nu.coarsen().unwrap();
            assert_eq!(coarse.total(), nu.total());
            assert_eq!(coarse, BallMeasure::haar_o(ctx, -1, level - 1).unwrap());
        });
    }

    #[test]
    fn truncated_subsums_are_subsums(rho_den in 2i64..6, a_den in 1i64..5, mask in 0u32..1 << 10) {
        let beta = BetaSeq::geometric(rat(1, a_den), rat(1, rho_den)).unwrap();
        let sums = subsum_enumerate(&beta, 10).unwrap();
        let v = sums.to_vec();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v[0].is_zero() && v[v.len() - 1] <= beta.total());
        let subset: Rational = (1..=10).filter(|k| mask >> (k - 1) & 1 == 1).map(|k| beta.term(k)).sum();
        assert!(sums.contains(&subset));
        let verdict = subsum_member(&beta, &subset, 12).unwrap();
        assert!(matches!(verdict, Membership::In { .. }), "{verdict:?}");
    }

    #[test]
    fn slow_geometric_series_cover_the_interval(num in 0i64..=1000, rho_num in 5i64..10) {
        let beta = BetaSeq::geometric(int(1), rat(rho_num, 10)).unwrap();
        let target = beta.total() * rat(num, 1000);
        let verdict = subsum_member(&beta, &target, 24).unwrap();
        assert!(matches!(verdict, Membership::In { .. }), "{target}: {verdict:?}");
    }

    #[test]
    fn spectrum_value_matches_its_cross_check(
        a_den in 1i64..6,
        rho_den in 2i64..6,
        h_num in 1i64..30,
        mask in 0u32..1 << 12,
        m in 1usize..14,
    ) {
        let beta = BetaSeq::geometric(rat(1, a_den), rat(1, rho_den)).unwrap();
        let plan = plan_spectrum(&beta, &rat(h_num, 10)).unwrap();
        let subset: BTreeSet<usize> = (1..=12).filter(|k| mask >> (k - 1) & 1 == 1).collect();
        let v = spectrum_value(&plan, &subset, m).unwrap();
        let direct: Rational = subset.iter().map(|k| beta.term(*k)).sum();
        assert_eq!(v.value, direct);
        assert_eq!(v.cross_check, direct);
    }

    #[test]
    fn characters_are_homomorphisms(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        for q in [2u32, 3, 5] {
            for mode in [Mode::Carry, Mode::Modular] {
                let ctx = FieldContext::new(q, mode).unwrap();
                let spec = CharacterSpec::standard(ctx);
                let (x, y) = (random_xi(ctx, &mut rng), random_xi(ctx, &mut rng));
                let (lx, ly) = (eval_character(&spec, &x).unwrap(), eval_character(&spec, &y).unwrap());
                assert_eq!(eval_character(&spec, &(&x + &y)).unwrap(), &lx * &ly);
                assert!((&lx * &lx.conj()).is_one());
                assert!((lx.abs() - 1.0).abs() < 1e-9);
                assert!(eval_character(&spec, &(-&x)).unwrap() == lx.conj());
            }
        }
    }

    #[test]
    fn cyclotomic_embedding_is_multiplicative(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        for q in [2u32, 3, 5] {
            let random_value = |rng: &mut WalkRng| {
                let mut v = CycloValue::zero(q);
                for _ in 0..3 {
                    let r = rng.random_range(1..=3);
                    let e = rng.random_range(0..(q as u64).pow(r));
                    let c = rat(rng.random_range(-5..=5), rng.random_range(1..=4));
                    v = &v + &CycloValue::root(q, r, e).unwrap().scale(&c);
                }
                v
            };
            let (a, b) = (random_value(&mut rng), random_value(&mut rng));
            let p = (&a * &b).to_complex();
            let (ar, ai) = a.to_complex();
            let (br, bi) = b.to_complex();
            assert!((p.0 - (ar * br - ai * bi)).abs() < 1e-9);
            assert!((p.1 - (ar * bi + ai * br)).abs() < 1e-9);
            assert!((&a + &a.scale(&int(-1))).is_zero());
        }
    }
}

#[test]
fn lambda_orbit_sizes() {
    for ctx in contexts() {
        for n in -4..=6 {
            let key = CosetKey::new(n, &XiElem::zero(ctx));
            let expected = (ctx.q() as usize).pow(n.max(0) as u32);
            assert_eq!(key.lambda_orbit().len(), expected, "q = {}, n = {n}", ctx.q());
            assert_eq!(key.orbit_size() as usize, expected);
        }
    }
}
