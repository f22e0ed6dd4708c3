//! Exact arithmetic in `Q(ζ_{q^R})`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, Rational};

/// Largest root order `q^R` accepted.
pub const MAX_ORDER: u64 = 1 << 40;

/// `Σ c_e ζ^e` with `ζ = exp(2πi / q^R)`, reduced to exponents
/// `e < (q−1) q^{R−1}`, a basis of the cyclotomic field. Zero iff every
/// coefficient vanishes.
#[derive(Clone, Debug)]
pub struct CycloValue {
    q: u32,
    r: u32,
    coeffs: BTreeMap<u64, Rational>,
}

impl CycloValue {
    pub fn zero(q: u32) -> Self {
        CycloValue { q, r: 0, coeffs: BTreeMap::new() }
    }

    pub fn rational(q: u32, c: Rational) -> Self {
        let mut v = Self::zero(q);
        if !c.is_zero() {
            v.coeffs.insert(0, c);
        }
        v
    }

    pub fn one(q: u32) -> Self {
        Self::rational(q, Rational::one())
    }

    /// `ζ_{q^r}^e`.
    pub fn root(q: u32, r: u32, e: u64) -> Result<Self> {
        let order = order(q, r)?;
        let mut v = CycloValue { q, r, coeffs: BTreeMap::new() };
        v.coeffs.insert(e % order, Rational::one());
        v.reduce();
        Ok(v)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `R` in the order `q^R` this value is expressed in.
    pub fn order_exponent(&self) -> u32 {
        self.r
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, Rational> {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(|c| c.is_one())
    }

    fn reduce(&mut self) {
        if self.r == 0 {
            let total = self.coeffs.values().fold(Rational::zero(), |a, b| a + b);
            self.coeffs.clear();
            if !total.is_zero() {
                self.coeffs.insert(0, total);
            }
            return;
        }
        let step = (self.q as u64).pow(self.r - 1);
        let bound = (self.q as u64 - 1) * step;
        // ζ^e = −Σ_{i=1}^{q−1} ζ^{e − i q^{R−1}} for e ≥ (q−1) q^{R−1}
        while let Some((&e, _)) = self.coeffs.range(bound..).next_back() {
            let c = self.coeffs.remove(&e).expect("present");
            for i in 1..self.q as u64 {
                let slot = self.coeffs.entry(e - i * step).or_insert_with(Rational::zero);
                *slot -= &c;
            }
        }
        self.coeffs.retain(|_, c| !c.is_zero());
    }

    /// The same value expressed with order `q^r`, `r ≥ self.r`.
    fn lift(&self, r: u32) -> CycloValue {
        if r == self.r {
            return self.clone();
        }
        assert!(r > self.r, "cannot lower the order");
        let f = (self.q as u64).pow(r - self.r);
        let mut v = CycloValue { q: self.q, r, coeffs: self.coeffs.iter().map(|(e, c)| (e * f, c.clone())).collect() };
        v.reduce();
        v
    }

    pub fn scale(&self, c: &Rational) -> CycloValue {
        let mut v = self.clone();
        for x in v.coeffs.values_mut() {
            *x *= c;
        }
        v.coeffs.retain(|_, c| !c.is_zero());
        v
    }

    /// Complex conjugate: `ζ^e ↦ ζ^{−e}`.
    pub fn conj(&self) -> CycloValue {
        let order = (self.q as u64).pow(self.r);
        let mut v = CycloValue { q: self.q, r: self.r, coeffs: BTreeMap::new() };
        for (e, c) in &self.coeffs {
            *v.coeffs.entry((order - e) % order).or_insert_with(Rational::zero) += c;
        }
        v.reduce();
        v
    }

    /// Floating-point embedding `(re, im)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let order = (self.q as f64).powi(self.r as i32);
        self.coeffs.iter().fold((0.0, 0.0), |(re, im), (e, c)| {
            let angle = std::f64::consts::TAU * (*e as f64) / order;
            let c = to_f64(c);
            (re + c * angle.cos(), im + c * angle.sin())
        })
    }

    pub fn abs(&self) -> f64 {
        let (re, im) = self.to_complex();
        re.hypot(im)
    }
}

fn order(q: u32, r: u32) -> Result<u64> {
    (q as u64)
        .checked_pow(r)
        .filter(|o| *o <= MAX_ORDER)
        .ok_or_else(|| Error::Budget(format!("root of unity order {q}^{r} exceeds {MAX_ORDER}")))
}

impl PartialEq for CycloValue {
    fn eq(&self, other: &Self) -> bool {
        let r = self.r.max(other.r);
        self.q == other.q && self.lift(r).coeffs == other.lift(r).coeffs
    }
}

impl Eq for CycloValue {}

impl Add for &CycloValue {
    type Output = CycloValue;
    fn add(self, other: &CycloValue) -> CycloValue {
        assert_eq!(self.q, other.q, "cyclotomic values over different q");
        let r = self.r.max(other.r);
        let mut v = self.lift(r);
        for (e, c) in other.lift(r).coeffs {
            *v.coeffs.entry(e).or_insert_with(Rational::zero) += c;
        }
        v.coeffs.retain(|_, c| !c.is_zero());
        v
    }
}

impl Mul for &CycloValue {
    type Output = CycloValue;
    fn mul(self, other: &CycloValue) -> CycloValue {
        assert_eq!(self.q, other.q, "cyclotomic values over different q");
        let r = self.r.max(other.r);
        let (a, b) = (self.lift(r), other.lift(r));
        let order = (self.q as u64).pow(r);
        let mut v = CycloValue { q: self.q, r, coeffs: BTreeMap::new() };
        for (e1, c1) in &a.coeffs {
            for (e2, c2) in &b.coeffs {
                *v.coeffs.entry((e1 + e2) % order).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        v.reduce();
        v
    }
}

impl fmt::Display for CycloValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(e, c)| if *e == 0 { format_rational(c) } else { format!("{}·ζ^{e}", format_rational(c)) })
            .collect();
        write!(f, "{}", terms.join(" + "))?;
        if self.r > 0 {
            write!(f, " (ζ = e^(2πi/{}^{}))", self.q, self.r)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn roots_sum_to_zero() {
        for (q, r) in [(2, 1), (2, 3), (3, 2), (5, 1), (5, 2)] {
            let order = (q as u64).pow(r);
            let total = (0..order).fold(CycloValue::zero(q), |acc, e| &acc + &CycloValue::root(q, r, e).unwrap());
            assert!(total.is_zero(), "q={q} r={r}");
        }
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = CycloValue::root(2, 2, 1).unwrap();
        assert_eq!(&i * &i, CycloValue::rational(2, rat(-1, 1)));
        let (re, im) = i.to_complex();
        assert!(re.abs() < 1e-15 && (im - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lifting_preserves_value() {
        let z = CycloValue::root(3, 1, 2).unwrap();
        assert_eq!(z, CycloValue::root(3, 3, 18).unwrap());
        assert_eq!(&z * &z.conj(), CycloValue::one(3));
        assert!(CycloValue::root(2, 60, 1).is_err());
    }

    #[test]
    fn float_embedding_matches() {
        let a = &CycloValue::root(5, 2, 7).unwrap() + &CycloValue::root(5, 1, 3).unwrap().scale(&rat(-2, 3));
        let b = &a * &a.conj();
        let (re, im) = b.to_complex();
        assert!((re - a.abs().powi(2)).abs() < 1e-12 && im.abs() < 1e-12);
    }
}
