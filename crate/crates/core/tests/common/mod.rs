#![allow(dead_code)]

use hecke_walk::algebra::{FieldContext, GroupElem, Mode, XiElem};
use hecke_walk::measures::{PointMeasure, SparseMeasure};
use hecke_walk::rational::Rational;
use rand::Rng;

pub fn contexts() -> Vec<FieldContext> {
    let mut out = Vec::new();
    for q in [2, 3] {
        for mode in [Mode::Carry, Mode::Modular] {
            out.push(FieldContext::new(q, mode).unwrap());
        }
    }
    out
}

pub fn random_xi<R: Rng>(ctx: FieldContext, rng: &mut R) -> XiElem {
    let lo = rng.random_range(-2..=1);
    let width = rng.random_range(0..=3);
    let digits: Vec<u32> = (0..width).map(|_| rng.random_range(0..ctx.q())).collect();
    XiElem::from_digits(ctx, lo, &digits)
}

fn random_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<Rational> {
    let raw: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = raw.iter().sum();
    raw.iter().map(|w| Rational::new((*w).into(), total.into())).collect()
}

/// A probability measure with 1–4 atoms, exponents in `[-2, 2]`.
pub fn random_measure<R: Rng>(ctx: FieldContext, rng: &mut R) -> SparseMeasure {
    let atoms = rng.random_range(1..=4);
    let weights = random_weights(atoms, rng);
    let pairs = weights
        .into_iter()
        .map(|w| (GroupElem::new(random_xi(ctx, rng), rng.random_range(-2..=2)), w));
    SparseMeasure::from_pairs(ctx, pairs).unwrap()
}

pub fn random_point_measure<R: Rng>(ctx: FieldContext, rng: &mut R) -> PointMeasure {
    let atoms = rng.random_range(1..=3);
    let mut out = PointMeasure::new();
    for w in random_weights(atoms, rng) {
        *out.entry(random_xi(ctx, rng)).or_default() += w;
    }
    out
}
