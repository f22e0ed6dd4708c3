//! Γ = Ξ ⋊ ⟨ϖ⟩, its Hecke subgroup Λ = Ξ_o ⋊ {1}, and the coset space Γ/Λ.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

use super::field::{digit_tuples, FieldContext, Mode, XiElem};

/// `(x, n)` standing for `(x, ϖ^n)`; `n` is pr_Z of the element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElem {
    pub x: XiElem,
    pub n: i64,
}

impl GroupElem {
    pub fn new(x: XiElem, n: i64) -> Self {
        GroupElem { x, n }
    }

    pub fn identity(ctx: FieldContext) -> Self {
        GroupElem { x: XiElem::zero(ctx), n: 0 }
    }

    pub fn ctx(&self) -> FieldContext {
        self.x.ctx()
    }

    pub fn is_identity(&self) -> bool {
        self.n == 0 && self.x.is_zero()
    }

    /// Λ = Ξ_o ⋊ {1}.
    pub fn in_lambda(&self) -> bool {
        self.n == 0 && self.x.is_integral()
    }

    /// `(x1, n1)(x2, n2) = (x1 + ϖ^{n1} x2, n1 + n2)`.
    pub fn checked_mul(&self, other: &GroupElem) -> Result<GroupElem> {
        let x = self.x.checked_add(&other.x.scale_pow(self.n))?;
        Ok(GroupElem { x, n: self.n + other.n })
    }

    pub fn mul(&self, other: &GroupElem) -> GroupElem {
        self.checked_mul(other).expect("GroupElem * GroupElem")
    }

    /// `(x, n)^{-1} = (-ϖ^{-n} x, -n)`.
    pub fn inverse(&self) -> GroupElem {
        GroupElem { x: self.x.negate().scale_pow(-self.n), n: -self.n }
    }

    pub fn pow(&self, k: u32) -> GroupElem {
        let mut acc = GroupElem::identity(self.ctx());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// The affine action `(x, ϖ^n) y = x + ϖ^n y`.
    pub fn checked_act(&self, y: &XiElem) -> Result<XiElem> {
        self.x.checked_add(&y.scale_pow(self.n))
    }

    pub fn act(&self, y: &XiElem) -> XiElem {
        self.checked_act(y).expect("GroupElem acting on XiElem")
    }

    /// The key of the right coset gΛ.
    pub fn coset_key(&self) -> CosetKey {
        CosetKey { n: self.n, r: self.x.residue_below(self.n) }
    }

    /// `g = β(gΛ) · λ_g` with β the canonical section; returns `(β(gΛ), λ_g)`.
    pub fn decompose(&self) -> Result<(GroupElem, GroupElem)> {
        let key = self.coset_key();
        let beta = key.section();
        // λ = β^{-1} g = (ϖ^{-n}(x - r), 0)
        let lam = GroupElem { x: self.x.checked_sub(&key.r)?.scale_pow(-self.n), n: 0 };
        if !lam.in_lambda() {
            return Err(Error::Invariant(format!("decompose({self}): λ = {lam} is not in Λ")));
        }
        if beta.checked_mul(&lam)? != *self {
            return Err(Error::Invariant(format!("decompose({self}): β·λ ≠ g")));
        }
        Ok((beta, lam))
    }

    /// Parses `"(x | n)"`.
    pub fn parse(ctx: FieldContext, s: &str) -> Result<GroupElem> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Error::parse(format!("group element {s:?} must look like (x | n)")))?;
        let (x, n) = inner
            .rsplit_once('|')
            .ok_or_else(|| Error::parse(format!("group element {s:?} must look like (x | n)")))?;
        let n: i64 = n.trim().parse().map_err(|_| Error::parse(format!("bad exponent in {s:?}")))?;
        Ok(GroupElem { x: XiElem::parse(ctx, x)?, n })
    }
}

impl fmt::Display for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} | {})", self.x, self.n)
    }
}

/// A point of Γ/Λ ≅ H/L: the level `n` and the residue `r` of `x` modulo
/// ϖ^n Ξ_o in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CosetKey {
    pub n: i64,
    pub r: XiElem,
}

impl CosetKey {
    pub fn new(n: i64, r: &XiElem) -> Self {
        CosetKey { n, r: r.residue_below(n) }
    }

    pub fn ctx(&self) -> FieldContext {
        self.r.ctx()
    }

    /// The canonical section β(c) = (r, n).
    pub fn section(&self) -> GroupElem {
        GroupElem { x: self.r.clone(), n: self.n }
    }

    /// `q^{max(n, 0)}`, saturating.
    pub fn orbit_size(&self) -> u64 {
        (self.ctx().q() as u64).saturating_pow(self.n.max(0) as u32)
    }

    /// A label shared by exactly the keys of one Λ-orbit: keys at level
    /// `n > 0` are in one orbit iff they agree strictly below position 0.
    pub fn orbit_label(&self) -> CosetKey {
        if self.n <= 0 {
            self.clone()
        } else {
            CosetKey { n: self.n, r: self.r.residue_below(0) }
        }
    }

    /// The full Λ-orbit, sorted. Its size is [`CosetKey::orbit_size`], so
    /// callers should keep `n` small.
    pub fn lambda_orbit(&self) -> Vec<CosetKey> {
        if self.n <= 0 {
            return vec![self.clone()];
        }
        let ctx = self.ctx();
        let base = self.r.residue_below(0);
        let out: BTreeSet<CosetKey> = digit_tuples(ctx.q(), self.n as usize)
            .iter()
            .map(|d| CosetKey::new(self.n, &(&base + &XiElem::from_digits(ctx, 0, d))))
            .collect();
        out.into_iter().collect()
    }

    /// Left translation by `λ ∈ Λ`.
    pub fn translate(&self, lambda: &GroupElem) -> Result<CosetKey> {
        if !lambda.in_lambda() {
            return Err(Error::precondition(format!("{lambda} is not in Λ")));
        }
        Ok(lambda.checked_mul(&self.section())?.coset_key())
    }

    /// Parses `"[n | r]"`.
    pub fn parse(ctx: FieldContext, s: &str) -> Result<CosetKey> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::parse(format!("coset key {s:?} must look like [n | r]")))?;
        let (n, r) = inner
            .split_once('|')
            .ok_or_else(|| Error::parse(format!("coset key {s:?} must look like [n | r]")))?;
        let n: i64 = n.trim().parse().map_err(|_| Error::parse(format!("bad level in {s:?}")))?;
        let r = XiElem::parse(ctx, r)?;
        if r.residue_below(n) != r {
            return Err(Error::parse(format!("{s:?}: residue is not in canonical form")));
        }
        Ok(CosetKey { n, r })
    }
}

impl fmt::Display for CosetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} | {}]", self.n, self.r)
    }
}

/// Generators of Λ used for invariance checks: `{1}` in carry mode, and
/// `{ϖ^j : 0 ≤ j < n_max}` in modular mode (positions ≥ n act trivially on
/// level-n keys).
pub fn lambda_generators(ctx: FieldContext, n_max: i64) -> Vec<GroupElem> {
    match ctx.mode() {
        Mode::Carry => vec![GroupElem::new(XiElem::one(ctx), 0)],
        Mode::Modular => (0..n_max.max(1))
            .map(|j| GroupElem::new(XiElem::monomial(ctx, 1, j), 0))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bs2() -> FieldContext {
        FieldContext::baumslag_solitar(2).unwrap()
    }

    fn lamp(q: u32) -> FieldContext {
        FieldContext::lamplighter(q).unwrap()
    }

    fn ge(ctx: FieldContext, s: &str) -> GroupElem {
        GroupElem::parse(ctx, s).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let c = bs2();
        assert_eq!(ge(c, "(1 | 1)").mul(&ge(c, "(1 | 0)")), ge(c, "(3 | 1)"));
        let g = ge(c, "(5/4 | -3)");
        assert_eq!(GroupElem::identity(c).mul(&g), g);
        assert!(g.mul(&g.inverse()).is_identity());
    }

    #[test]
    fn action_examples() {
        let c = bs2();
        let y = XiElem::parse(c, "1/2").unwrap();
        assert_eq!(ge(c, "(1 | 1)").act(&y), XiElem::from_int(c, 2));
        assert_eq!(GroupElem::identity(c).act(&y), y);
        let l = lamp(2);
        assert_eq!(
            ge(l, "(0:1 | 1)").act(&XiElem::parse(l, "0:1").unwrap()),
            XiElem::parse(l, "0:1;1:1").unwrap()
        );
    }

    #[test]
    fn coset_key_examples() {
        let l = lamp(2);
        assert_eq!(ge(l, "(0:1;2:1 | 1)").coset_key().to_string(), "[1 | 0:1]");
        assert_eq!(ge(l, "(-3:1;-1:1;0:1 | -1)").coset_key().to_string(), "[-1 | -3:1]");
        let c = bs2();
        assert_eq!(ge(c, "(3 | 1)").coset_key().to_string(), "[1 | 1]");
        // brute force: (1,1)·λ = (3,1) for λ = (1,0) ∈ Λ
        let lam = ge(c, "(1 | 0)");
        assert!(lam.in_lambda());
        assert_eq!(ge(c, "(1 | 1)").mul(&lam), ge(c, "(3 | 1)"));
    }

    #[test]
    fn orbit_examples() {
        let l = lamp(2);
        let k = CosetKey::new(-1, &XiElem::parse(l, "-3:1").unwrap());
        assert_eq!(k.lambda_orbit(), vec![k.clone()]);

        let k = CosetKey::new(1, &XiElem::zero(l));
        let orbit: Vec<String> = k.lambda_orbit().iter().map(|k| k.to_string()).collect();
        assert_eq!(orbit, vec!["[1 | 0]", "[1 | 0:1]"]);

        // brute force over Ξ_o representatives mod ϖ^2 Ξ_o: translate by 0..3
        let c = bs2();
        let k = CosetKey::new(2, &XiElem::parse(c, "1/2").unwrap());
        let brute: BTreeSet<CosetKey> = (0..4)
            .map(|a| k.translate(&GroupElem::new(XiElem::from_int(c, a), 0)).unwrap())
            .collect();
        assert_eq!(brute.len(), 4);
        assert_eq!(k.lambda_orbit(), brute.into_iter().collect::<Vec<_>>());
    }

    #[test]
    fn orbit_sizes() {
        for ctx in [bs2(), lamp(2), lamp(3), FieldContext::baumslag_solitar(3).unwrap()] {
            for n in -4..=6i64 {
                if ctx.q() == 3 && n > 4 {
                    continue;
                }
                let k = CosetKey::new(n, &XiElem::monomial(ctx, 1, -2));
                assert_eq!(k.lambda_orbit().len() as u64, k.orbit_size(), "{ctx} n={n}");
                for other in k.lambda_orbit() {
                    assert_eq!(other.orbit_label(), k.orbit_label());
                }
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let l = lamp(2);
        let g = ge(l, "(0:1;3:1 | 0)");
        let (beta, lam) = g.decompose().unwrap();
        assert!(beta.is_identity());
        assert_eq!(lam, g);

        let (beta, lam) = ge(l, "(0:1 | -1)").decompose().unwrap();
        assert_eq!(beta, ge(l, "(0 | -1)"));
        assert_eq!(lam, ge(l, "(1:1 | 0)"));

        let c = bs2();
        let (beta, lam) = ge(c, "(3 | 1)").decompose().unwrap();
        assert_eq!(beta, ge(c, "(1 | 1)"));
        assert_eq!(lam, ge(c, "(1 | 0)"));
    }

    #[test]
    fn text_round_trip() {
        let c = bs2();
        assert_eq!(ge(c, "(-3/8 | -2)").to_string(), "(-3/8 | -2)");
        let k = CosetKey::parse(c, "[2 | 3]").unwrap();
        assert_eq!(k.to_string(), "[2 | 3]");
        assert!(CosetKey::parse(c, "[1 | 3]").is_err());
    }
}
