//! The field fragment Ξ ⊂ K.
//!
//! Two arithmetic modes share one element type:
//!
//! * [`Mode::Carry`]: Ξ = Z[1/q] inside K = Q_q, stored as a reduced fraction
//!   `num / q^exp`. Negative elements have no finite digit expansion, so digit
//!   views are computed on demand for a bounded window of positions.
//! * [`Mode::Modular`]: Ξ = ⊕_Z F_q inside K = F_q((t)), stored as the finite
//!   map `position -> digit` with zero digits omitted.
//!
//! In both modes the uniformizer ϖ is `q` (resp. `t`), the digit set is
//! `{0, .., q-1}` and the distinguished digit generator `x_o` is `1`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{pow_int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Q_q with integer carries (Baumslag–Solitar family).
    Carry,
    /// F_q((t)), digit-wise arithmetic (lamplighter family).
    Modular,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Carry => f.write_str("carry"),
            Mode::Modular => f.write_str("modular"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "carry" => Ok(Mode::Carry),
            "modular" => Ok(Mode::Modular),
            other => Err(Error::parse(format!("unknown mode {other:?} (expected carry|modular)"))),
        }
    }
}

/// The pair `(q, mode)` fixing K, its ring of integers O and uniformizer ϖ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FieldContext {
    q: u32,
    mode: Mode,
}

impl FieldContext {
    pub fn new(q: u32, mode: Mode) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::precondition(format!("residue order q = {q} is not prime")));
        }
        Ok(FieldContext { q, mode })
    }

    /// K = Q_q.
    pub fn baumslag_solitar(q: u32) -> Result<Self> {
        Self::new(q, Mode::Carry)
    }

    /// K = F_q((t)).
    pub fn lamplighter(q: u32) -> Result<Self> {
        Self::new(q, Mode::Modular)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The digit set S = {0, x_o, .., (q-1) x_o} with x_o = 1.
    pub fn digit_set(&self) -> Vec<XiElem> {
        (0..self.q).map(|d| XiElem::monomial(*self, d, 0)).collect()
    }

    pub fn x_o(&self) -> XiElem {
        XiElem::one(*self)
    }

    pub fn uniformizer(&self) -> XiElem {
        XiElem::monomial(*self, 1, 1)
    }

    pub(crate) fn check(&self, other: &FieldContext) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ContextMismatch(*self, *other))
        }
    }
}

impl fmt::Display for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={} {}", self.q, self.mode)
    }
}

/// All digit tuples of the given width, the first entry varying fastest.
pub fn digit_tuples(q: u32, width: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::with_capacity((q as usize).saturating_pow(width as u32));
    let mut digits = vec![0u32; width];
    loop {
        out.push(digits.clone());
        let mut i = 0;
        while i < width {
            digits[i] += 1;
            if digits[i] < q {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == width {
            return out;
        }
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= q as u64 {
        if q.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Repr {
    /// `num / q^exp`, with `q ∤ num` whenever `exp > 0`, and `exp = 0` for zero.
    Carry { num: BigInt, exp: u32 },
    /// Nonzero digits by position.
    Modular(BTreeMap<i64, u32>),
}

/// An element of Ξ in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XiElem {
    ctx: FieldContext,
    repr: Repr,
}

impl XiElem {
    pub fn zero(ctx: FieldContext) -> Self {
        let repr = match ctx.mode {
            Mode::Carry => Repr::Carry { num: BigInt::zero(), exp: 0 },
            Mode::Modular => Repr::Modular(BTreeMap::new()),
        };
        XiElem { ctx, repr }
    }

    pub fn one(ctx: FieldContext) -> Self {
        Self::monomial(ctx, 1, 0)
    }

    /// `digit · ϖ^pos`; the digit is reduced modulo q in modular mode.
    pub fn monomial(ctx: FieldContext, digit: u32, pos: i64) -> Self {
        match ctx.mode {
            Mode::Carry => Self::carry(ctx, BigInt::from(digit), 0).scale_pow(pos),
            Mode::Modular => {
                let mut m = BTreeMap::new();
                let d = digit % ctx.q;
                if d != 0 {
                    m.insert(pos, d);
                }
                XiElem { ctx, repr: Repr::Modular(m) }
            }
        }
    }

    /// The image of an integer: exact in carry mode, reduced mod q in modular mode.
    pub fn from_int(ctx: FieldContext, n: i64) -> Self {
        match ctx.mode {
            Mode::Carry => Self::carry(ctx, BigInt::from(n), 0),
            Mode::Modular => Self::monomial(ctx, n.rem_euclid(ctx.q as i64) as u32, 0),
        }
    }

    /// `Σ digits[i] ϖ^{lo+i}`.
    pub fn from_digits(ctx: FieldContext, lo: i64, digits: &[u32]) -> Self {
        match ctx.mode {
            Mode::Carry => {
                let q = BigInt::from(ctx.q);
                let mut acc = BigInt::zero();
                for d in digits.iter().rev() {
                    acc = acc * &q + BigInt::from(*d);
                }
                Self::carry(ctx, acc, 0).scale_pow(lo)
            }
            Mode::Modular => {
                let m = digits
                    .iter()
                    .enumerate()
                    .filter(|(_, d)| **d % ctx.q != 0)
                    .map(|(i, d)| (lo + i as i64, d % ctx.q))
                    .collect();
                XiElem { ctx, repr: Repr::Modular(m) }
            }
        }
    }

    /// Carry-mode constructor from `num / q^exp`; normalizes.
    pub fn from_fraction(ctx: FieldContext, num: BigInt, exp: u32) -> Result<Self> {
        if ctx.mode != Mode::Carry {
            return Err(Error::precondition("fractions only exist in carry mode"));
        }
        Ok(Self::carry(ctx, num, exp))
    }

    fn carry(ctx: FieldContext, num: BigInt, exp: u32) -> Self {
        let mut x = XiElem { ctx, repr: Repr::Carry { num, exp } };
        x.normalize();
        x
    }

    fn normalize(&mut self) {
        let q = BigInt::from(self.ctx.q);
        if let Repr::Carry { num, exp } = &mut self.repr {
            if num.is_zero() {
                *exp = 0;
                return;
            }
            while *exp > 0 && num.is_multiple_of(&q) {
                *num /= &q;
                *exp -= 1;
            }
        }
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Carry { num, .. } => num.is_zero(),
            Repr::Modular(m) => m.is_empty(),
        }
    }

    /// v(x), with `None` standing for +∞ at zero.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Carry { num, exp } => {
                if num.is_zero() {
                    None
                } else if *exp > 0 {
                    Some(-(*exp as i64))
                } else {
                    let q = BigInt::from(self.ctx.q);
                    let mut n = num.abs();
                    let mut v = 0;
                    while n.is_multiple_of(&q) {
                        n /= &q;
                        v += 1;
                    }
                    Some(v)
                }
            }
            Repr::Modular(m) => m.keys().next().copied(),
        }
    }

    /// |x| = q^{-v(x)}.
    pub fn abs(&self) -> f64 {
        match self.valuation() {
            None => 0.0,
            Some(v) => (self.ctx.q as f64).powi(-(v as i32)),
        }
    }

    /// x ∈ O, i.e. v(x) ≥ 0.
    pub fn is_integral(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    /// v(x) ≥ level.
    pub fn in_ball(&self, level: i64) -> bool {
        self.valuation().is_none_or(|v| v >= level)
    }

    pub fn checked_add(&self, other: &XiElem) -> Result<XiElem> {
        self.ctx.check(&other.ctx)?;
        Ok(self.add_unchecked(other))
    }

    pub fn checked_sub(&self, other: &XiElem) -> Result<XiElem> {
        self.ctx.check(&other.ctx)?;
        Ok(self.add_unchecked(&other.negate()))
    }

    pub fn checked_mul(&self, other: &XiElem) -> Result<XiElem> {
        self.ctx.check(&other.ctx)?;
        Ok(self.mul_unchecked(other))
    }

    fn add_unchecked(&self, other: &XiElem) -> XiElem {
        match (&self.repr, &other.repr) {
            (Repr::Carry { num: a, exp: ea }, Repr::Carry { num: b, exp: eb }) => {
                let e = (*ea).max(*eb);
                let a = a * pow_int(self.ctx.q, e - ea);
                let b = b * pow_int(self.ctx.q, e - eb);
                Self::carry(self.ctx, a + b, e)
            }
            (Repr::Modular(a), Repr::Modular(b)) => {
                let q = self.ctx.q;
                let mut out = a.clone();
                for (pos, d) in b {
                    let e = out.entry(*pos).or_insert(0);
                    *e = (*e + d) % q;
                    if *e == 0 {
                        out.remove(pos);
                    }
                }
                XiElem { ctx: self.ctx, repr: Repr::Modular(out) }
            }
            _ => unreachable!("representation does not match context"),
        }
    }

    fn mul_unchecked(&self, other: &XiElem) -> XiElem {
        match (&self.repr, &other.repr) {
            (Repr::Carry { num: a, exp: ea }, Repr::Carry { num: b, exp: eb }) => {
                Self::carry(self.ctx, a * b, ea + eb)
            }
            (Repr::Modular(a), Repr::Modular(b)) => {
                let q = self.ctx.q as u64;
                let mut out: BTreeMap<i64, u32> = BTreeMap::new();
                for (pa, da) in a {
                    for (pb, db) in b {
                        let e = out.entry(pa + pb).or_insert(0);
                        *e = ((*e as u64 + *da as u64 * *db as u64) % q) as u32;
                    }
                }
                out.retain(|_, d| *d != 0);
                XiElem { ctx: self.ctx, repr: Repr::Modular(out) }
            }
            _ => unreachable!("representation does not match context"),
        }
    }

    pub fn negate(&self) -> XiElem {
        match &self.repr {
            Repr::Carry { num, exp } => XiElem {
                ctx: self.ctx,
                repr: Repr::Carry { num: -num, exp: *exp },
            },
            Repr::Modular(m) => {
                let q = self.ctx.q;
                XiElem {
                    ctx: self.ctx,
                    repr: Repr::Modular(m.iter().map(|(p, d)| (*p, q - d)).collect()),
                }
            }
        }
    }

    /// ϖ^k · x.
    pub fn scale_pow(&self, k: i64) -> XiElem {
        match &self.repr {
            Repr::Carry { num, exp } => {
                if num.is_zero() {
                    return self.clone();
                }
                let e = *exp as i64 - k;
                if e >= 0 {
                    Self::carry(self.ctx, num.clone(), e as u32)
                } else {
                    Self::carry(self.ctx, num * pow_int(self.ctx.q, (-e) as u32), 0)
                }
            }
            Repr::Modular(m) => XiElem {
                ctx: self.ctx,
                repr: Repr::Modular(m.iter().map(|(p, d)| (p + k, *d)).collect()),
            },
        }
    }

    /// The canonical representative of `x mod ϖ^n Ξ_o`.
    ///
    /// Carry mode: with `x = a / q^e` this is `(a mod q^{n+e}) / q^e`, the
    /// numerator normalized into `[0, q^{n+e})`; zero when `n + e ≤ 0`.
    /// Modular mode: the digits of `x` at positions `< n`.
    pub fn residue_below(&self, n: i64) -> XiElem {
        match &self.repr {
            Repr::Carry { num, exp } => {
                let width = n + *exp as i64;
                if width <= 0 {
                    return XiElem::zero(self.ctx);
                }
                let m = pow_int(self.ctx.q, width as u32);
                Self::carry(self.ctx, num.mod_floor(&m), *exp)
            }
            Repr::Modular(m) => XiElem {
                ctx: self.ctx,
                repr: Repr::Modular(m.range(..n).map(|(p, d)| (*p, *d)).collect()),
            },
        }
    }

    /// Digits of `x` at positions `lo..hi` (index 0 is position `lo`), or
    /// `None` when `v(x) < lo`.
    pub fn digits(&self, lo: i64, hi: i64) -> Option<Vec<u32>> {
        if !self.in_ball(lo) {
            return None;
        }
        let width = (hi - lo).max(0) as usize;
        match &self.repr {
            Repr::Carry { num, exp } => {
                // x · q^{-lo} is an integer because v(x) ≥ lo.
                let shift = -lo - *exp as i64;
                let scaled = if shift >= 0 {
                    num * pow_int(self.ctx.q, shift as u32)
                } else {
                    num / pow_int(self.ctx.q, (-shift) as u32)
                };
                let q = BigInt::from(self.ctx.q);
                let mut n = scaled.mod_floor(&pow_int(self.ctx.q, width as u32));
                let mut out = Vec::with_capacity(width);
                for _ in 0..width {
                    let (quo, rem) = n.div_mod_floor(&q);
                    out.push(rem.to_u32().expect("digit fits"));
                    n = quo;
                }
                Some(out)
            }
            Repr::Modular(m) => {
                let mut out = vec![0; width];
                for (p, d) in m.range(lo..hi) {
                    out[(p - lo) as usize] = *d;
                }
                Some(out)
            }
        }
    }

    /// The digit at one position, for elements with `v(x) ≤ pos` handled by
    /// the same truncation rule as [`XiElem::digits`].
    pub fn digit(&self, pos: i64) -> u32 {
        let lo = self.valuation().unwrap_or(pos).min(pos);
        self.digits(lo, pos + 1).map(|d| d[(pos - lo) as usize]).unwrap_or(0)
    }

    /// Carry mode: the element as an exact rational.
    pub fn to_rational(&self) -> Option<Rational> {
        match &self.repr {
            Repr::Carry { num, exp } => Some(Rational::new(num.clone(), pow_int(self.ctx.q, *exp))),
            Repr::Modular(_) => None,
        }
    }

    /// Modular mode: the nonzero digits.
    pub fn digit_map(&self) -> Option<&BTreeMap<i64, u32>> {
        match &self.repr {
            Repr::Modular(m) => Some(m),
            Repr::Carry { .. } => None,
        }
    }

    /// Parses the text encoding: `"a"` or `"a/q^e"` in carry mode (the
    /// denominator must be a power of q), `"j:c;j:c"` in modular mode.
    pub fn parse(ctx: FieldContext, s: &str) -> Result<XiElem> {
        let s = s.trim();
        match ctx.mode {
            Mode::Carry => {
                let (n, d) = match s.split_once('/') {
                    Some((n, d)) => (n.trim(), d.trim()),
                    None => (s, "1"),
                };
                let num: BigInt = n.parse().map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
                let mut den: BigInt = d.parse().map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
                let q = BigInt::from(ctx.q);
                let mut exp = 0u32;
                while den > BigInt::one() && den.is_multiple_of(&q) {
                    den /= &q;
                    exp += 1;
                }
                if !den.is_one() {
                    return Err(Error::parse(format!("denominator of {s:?} is not a power of {}", ctx.q)));
                }
                Ok(Self::carry(ctx, num, exp))
            }
            Mode::Modular => {
                if s.is_empty() || s == "0" {
                    return Ok(XiElem::zero(ctx));
                }
                let mut m = BTreeMap::new();
                for part in s.split(';').filter(|p| !p.trim().is_empty()) {
                    let (p, c) = part
                        .split_once(':')
                        .ok_or_else(|| Error::parse(format!("expected position:digit in {part:?}")))?;
                    let p: i64 = p.trim().parse().map_err(|_| Error::parse(format!("bad position in {part:?}")))?;
                    let c: u32 = c.trim().parse().map_err(|_| Error::parse(format!("bad digit in {part:?}")))?;
                    if c >= ctx.q {
                        return Err(Error::parse(format!("digit {c} out of range for q = {}", ctx.q)));
                    }
                    if m.insert(p, c).is_some() {
                        return Err(Error::parse(format!("position {p} repeated in {s:?}")));
                    }
                }
                m.retain(|_, c| *c != 0);
                Ok(XiElem { ctx, repr: Repr::Modular(m) })
            }
        }
    }
}

impl fmt::Display for XiElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Carry { num, exp } => {
                if *exp == 0 {
                    write!(f, "{num}")
                } else {
                    write!(f, "{num}/{}", pow_int(self.ctx.q, *exp))
                }
            }
            Repr::Modular(m) => {
                if m.is_empty() {
                    return f.write_str("0");
                }
                let parts: Vec<String> = m.iter().map(|(p, d)| format!("{p}:{d}")).collect();
                f.write_str(&parts.join(";"))
            }
        }
    }
}

// Operator forms panic on mixed contexts; use the `checked_*` methods when
// the contexts are not known to agree.
impl Add for &XiElem {
    type Output = XiElem;
    fn add(self, rhs: &XiElem) -> XiElem {
        self.checked_add(rhs).expect("XiElem + XiElem")
    }
}

impl Sub for &XiElem {
    type Output = XiElem;
    fn sub(self, rhs: &XiElem) -> XiElem {
        self.checked_sub(rhs).expect("XiElem - XiElem")
    }
}

impl Mul for &XiElem {
    type Output = XiElem;
    fn mul(self, rhs: &XiElem) -> XiElem {
        self.checked_mul(rhs).expect("XiElem * XiElem")
    }
}

impl Neg for &XiElem {
    type Output = XiElem;
    fn neg(self) -> XiElem {
        self.negate()
    }
}
