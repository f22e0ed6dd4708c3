use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::algebra::{CosetKey, FieldContext, GroupElem};
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

/// A finitely supported measure on Γ with exact rational weights.
///
/// Only strictly positive weights are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMeasure {
    ctx: FieldContext,
    weights: BTreeMap<GroupElem, Rational>,
}

impl SparseMeasure {
    pub fn empty(ctx: FieldContext) -> Self {
        SparseMeasure { ctx, weights: BTreeMap::new() }
    }

    /// δ_g.
    pub fn point(g: GroupElem) -> Self {
        let ctx = g.ctx();
        let mut weights = BTreeMap::new();
        weights.insert(g, Rational::one());
        SparseMeasure { ctx, weights }
    }

    /// δ_e.
    pub fn identity(ctx: FieldContext) -> Self {
        Self::point(GroupElem::identity(ctx))
    }

    /// Uniform on the given elements; repeated elements accumulate mass.
    pub fn uniform(ctx: FieldContext, elems: impl IntoIterator<Item = GroupElem>) -> Result<Self> {
        let elems: Vec<GroupElem> = elems.into_iter().collect();
        if elems.is_empty() {
            return Err(Error::precondition("uniform measure on an empty set"));
        }
        let w = Rational::new(1.into(), elems.len().into());
        Self::from_pairs(ctx, elems.into_iter().map(|g| (g, w.clone())))
    }

    /// Sums repeated elements and drops zero weights; rejects negative weights.
    pub fn from_pairs(ctx: FieldContext, pairs: impl IntoIterator<Item = (GroupElem, Rational)>) -> Result<Self> {
        let mut m = SparseMeasure::empty(ctx);
        for (g, w) in pairs {
            ctx.check(&g.ctx())?;
            if w.is_negative() {
                return Err(Error::precondition(format!("negative weight {w} at {g}")));
            }
            m.add_mass(g, w);
        }
        Ok(m)
    }

    pub(crate) fn add_mass(&mut self, g: GroupElem, w: Rational) {
        if w.is_zero() {
            return;
        }
        *self.weights.entry(g).or_insert_with(Rational::zero) += w;
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn weights(&self) -> &BTreeMap<GroupElem, Rational> {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElem, &Rational)> {
        self.weights.iter()
    }

    pub fn weight(&self, g: &GroupElem) -> Rational {
        self.weights.get(g).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> BTreeSet<GroupElem> {
        self.weights.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.weights.values().fold(Rational::zero(), |acc, w| acc + w)
    }

    pub fn is_probability(&self) -> bool {
        self.total().is_one()
    }

    pub(crate) fn require_probability(&self, what: &str) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(Error::precondition(format!("{what}: total mass is {}, not 1", self.total())))
        }
    }

    /// `a·self + (1-a)·other`.
    pub fn mix(&self, a: &Rational, other: &SparseMeasure) -> Result<SparseMeasure> {
        self.ctx.check(&other.ctx)?;
        if a.is_negative() || *a > Rational::one() {
            return Err(Error::precondition(format!("mixing weight {a} outside [0, 1]")));
        }
        let b = Rational::one() - a;
        let mut out = SparseMeasure::empty(self.ctx);
        for (g, w) in &self.weights {
            out.add_mass(g.clone(), w * a);
        }
        for (g, w) in &other.weights {
            out.add_mass(g.clone(), w * &b);
        }
        Ok(out)
    }

    /// `(t1 * t2)(g) = Σ_h t1(h) t2(h⁻¹ g)`.
    pub fn convolve(&self, other: &SparseMeasure) -> Result<SparseMeasure> {
        self.ctx.check(&other.ctx)?;
        let mut out = SparseMeasure::empty(self.ctx);
        for (g, a) in &self.weights {
            for (h, b) in &other.weights {
                out.add_mass(g.mul(h), a * b);
            }
        }
        Ok(out)
    }

    /// The k-fold convolution power, `k = 0` giving δ_e.
    pub fn convolution_power(&self, k: u32) -> Result<SparseMeasure> {
        let mut acc = SparseMeasure::identity(self.ctx);
        for _ in 0..k {
            acc = acc.convolve(self)?;
        }
        Ok(acc)
    }

    /// τ̄ = α_*τ: `τ̄(c) = Σ_{g ∈ c} τ(g)`.
    pub fn pushforward_coset(&self) -> CosetMeasure {
        let mut out = CosetMeasure::empty(self.ctx);
        for (g, w) in &self.weights {
            out.add_mass(g.coset_key(), w.clone());
        }
        out
    }

    /// Whether τ̄ is constant on every Λ-orbit meeting its support.
    pub fn is_absorbing(&self) -> AbsorptionCheck {
        self.pushforward_coset().invariance_check()
    }

    /// `Σ_g τ(g) · pr_Z(g)`.
    pub fn z_drift(&self) -> Rational {
        self.weights
            .iter()
            .fold(Rational::zero(), |acc, (g, w)| acc + w * Rational::from_integer(g.n.into()))
    }

    /// Exponential moment `Σ_g τ(g) q^{-pr_Z(g)}`, the per-step contraction factor.
    pub fn contraction_moment(&self) -> Rational {
        let q = Rational::from_integer(self.ctx.q().into());
        self.weights
            .iter()
            .fold(Rational::zero(), |acc, (g, w)| acc + w * crate::rational::pow_rat(&q, -g.n))
    }

    pub fn to_f64_weights(&self) -> Vec<(GroupElem, f64)> {
        self.weights
            .iter()
            .map(|(g, w)| (g.clone(), crate::rational::to_f64(w)))
            .collect()
    }
}

impl fmt::Display for SparseMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|(g, w)| format!("{g}: {w}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// A finitely supported measure on Γ/Λ ≅ H/L.
///
/// For a Λ-invariant measure this is θ̄, which determines the bi-L-invariant
/// measure θ on H by spreading each coset's mass as a translate of Haar
/// measure on L.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetMeasure {
    ctx: FieldContext,
    weights: BTreeMap<CosetKey, Rational>,
}

/// An orbit on which a coset measure is not constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitWitness {
    pub orbit: Vec<(String, String)>,
}

impl OrbitWitness {
    fn new(orbit: &[CosetKey], measure: &CosetMeasure) -> Self {
        OrbitWitness {
            orbit: orbit
                .iter()
                .map(|k| (k.to_string(), format_rational(&measure.weight(k))))
                .collect(),
        }
    }
}

impl fmt::Display for OrbitWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.orbit.iter().map(|(k, w)| format!("{k} -> {w}")).collect();
        write!(f, "orbit {{{}}}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbsorptionCheck {
    pub absorbing: bool,
    pub witness: Option<OrbitWitness>,
}

impl CosetMeasure {
    pub fn empty(ctx: FieldContext) -> Self {
        CosetMeasure { ctx, weights: BTreeMap::new() }
    }

    pub fn point(key: CosetKey) -> Self {
        let ctx = key.ctx();
        let mut weights = BTreeMap::new();
        weights.insert(key, Rational::one());
        CosetMeasure { ctx, weights }
    }

    pub fn from_pairs(ctx: FieldContext, pairs: impl IntoIterator<Item = (CosetKey, Rational)>) -> Result<Self> {
        let mut m = CosetMeasure::empty(ctx);
        for (k, w) in pairs {
            ctx.check(&k.ctx())?;
            if w.is_negative() {
                return Err(Error::precondition(format!("negative weight {w} at {k}")));
            }
            m.add_mass(k, w);
        }
        Ok(m)
    }

    pub(crate) fn add_mass(&mut self, k: CosetKey, w: Rational) {
        if w.is_zero() {
            return;
        }
        *self.weights.entry(k).or_insert_with(Rational::zero) += w;
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn weights(&self) -> &BTreeMap<CosetKey, Rational> {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CosetKey, &Rational)> {
        self.weights.iter()
    }

    pub fn weight(&self, k: &CosetKey) -> Rational {
        self.weights.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> BTreeSet<CosetKey> {
        self.weights.keys().cloned().collect()
    }

    pub fn total(&self) -> Rational {
        self.weights.values().fold(Rational::zero(), |acc, w| acc + w)
    }

    pub fn is_probability(&self) -> bool {
        self.total().is_one()
    }

    pub fn z_drift(&self) -> Rational {
        self.weights
            .iter()
            .fold(Rational::zero(), |acc, (k, w)| acc + w * Rational::from_integer(k.n.into()))
    }

    /// `a·self + (1-a)·other`.
    pub fn mix(&self, a: &Rational, other: &CosetMeasure) -> Result<CosetMeasure> {
        self.ctx.check(&other.ctx)?;
        let b = Rational::one() - a;
        let mut out = CosetMeasure::empty(self.ctx);
        for (k, w) in &self.weights {
            out.add_mass(k.clone(), w * a);
        }
        for (k, w) in &other.weights {
            out.add_mass(k.clone(), w * &b);
        }
        Ok(out)
    }

    /// Checks Λ-invariance orbit by orbit over the support.
    pub fn invariance_check(&self) -> AbsorptionCheck {
        let mut seen = BTreeSet::new();
        for key in self.weights.keys() {
            if key.n <= 0 || !seen.insert(key.orbit_label()) {
                continue;
            }
            let orbit = key.lambda_orbit();
            let first = self.weight(&orbit[0]);
            if orbit.iter().any(|k| self.weight(k) != first) {
                return AbsorptionCheck { absorbing: false, witness: Some(OrbitWitness::new(&orbit, self)) };
            }
        }
        AbsorptionCheck { absorbing: true, witness: None }
    }

    pub fn is_lambda_invariant(&self) -> bool {
        self.invariance_check().absorbing
    }

    /// Averages the mass over every Λ-orbit meeting the support.
    pub fn orbit_average(&self) -> CosetMeasure {
        let mut orbits: BTreeMap<CosetKey, Rational> = BTreeMap::new();
        for (k, w) in &self.weights {
            *orbits.entry(k.orbit_label()).or_insert_with(Rational::zero) += w;
        }
        let mut out = CosetMeasure::empty(self.ctx);
        for (label, mass) in orbits {
            let orbit = label.lambda_orbit();
            let share = mass / Rational::from_integer(orbit.len().into());
            for k in orbit {
                out.add_mass(k, share.clone());
            }
        }
        out
    }

    /// `(a * b)(γΛ) = Σ_{ηΛ} a(ηΛ) b(η⁻¹γΛ)`, computed through the canonical
    /// section. Requires `b` to be Λ-invariant so the sum does not depend on
    /// the representative η.
    pub fn coset_convolve(&self, b: &CosetMeasure) -> Result<CosetMeasure> {
        self.ctx.check(&b.ctx)?;
        let check = b.invariance_check();
        if let Some(w) = check.witness {
            return Err(Error::precondition(format!("right factor of coset_convolve is not Λ-invariant: {w}")));
        }
        let mut out = CosetMeasure::empty(self.ctx);
        for (c1, w1) in &self.weights {
            let eta = c1.section();
            for (c2, w2) in &b.weights {
                out.add_mass(eta.mul(&c2.section()).coset_key(), w1 * w2);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for CosetMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.weights.iter().map(|(k, w)| format!("{k}: {w}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::XiElem;
    use crate::measures::{e_bs, e_lamp};
    use crate::rational::rat;

    fn ge(ctx: FieldContext, s: &str) -> GroupElem {
        GroupElem::parse(ctx, s).unwrap()
    }

    #[test]
    fn convolution_examples() {
        let t = e_lamp();
        let ctx = t.ctx();
        assert_eq!(SparseMeasure::identity(ctx).convolve(&t).unwrap(), t);
        let g = ge(ctx, "(0:1 | 1)");
        let h = ge(ctx, "(0:1;3:1 | -2)");
        assert_eq!(
            SparseMeasure::point(g.clone()).convolve(&SparseMeasure::point(h.clone())).unwrap(),
            SparseMeasure::point(g.mul(&h))
        );
        // brute force: s1 + ϖ s2 over the 2x2 table
        let sq = t.convolve(&t).unwrap();
        assert_eq!(sq.len(), 4);
        for s1 in 0..2 {
            for s2 in 0..2 {
                let x = XiElem::from_digits(ctx, 0, &[s1, s2]);
                assert_eq!(sq.weight(&GroupElem::new(x, 2)), rat(1, 4));
            }
        }
    }

    #[test]
    fn pushforward_examples() {
        let t = e_lamp();
        let ctx = t.ctx();
        let id = SparseMeasure::identity(ctx).pushforward_coset();
        assert_eq!(id, CosetMeasure::point(CosetKey::new(0, &XiElem::zero(ctx))));
        let in_lambda = SparseMeasure::uniform(ctx, [ge(ctx, "(0:1 | 0)"), ge(ctx, "(2:1 | 0)")]).unwrap();
        assert_eq!(in_lambda.pushforward_coset(), id);
        let p = t.pushforward_coset();
        assert_eq!(p.weight(&CosetKey::parse(ctx, "[1 | 0]").unwrap()), rat(1, 2));
        assert_eq!(p.weight(&CosetKey::parse(ctx, "[1 | 0:1]").unwrap()), rat(1, 2));
    }

    #[test]
    fn absorption_examples() {
        let ctx = FieldContext::baumslag_solitar(2).unwrap();
        assert!(SparseMeasure::point(ge(ctx, "(0 | -1)")).is_absorbing().absorbing);
        let check = SparseMeasure::point(ge(ctx, "(1 | 1)")).is_absorbing();
        assert!(!check.absorbing);
        let w = check.witness.unwrap();
        assert_eq!(
            w.orbit,
            vec![("[1 | 0]".to_string(), "0".to_string()), ("[1 | 1]".to_string(), "1".to_string())]
        );
        assert!(e_lamp().is_absorbing().absorbing);
    }

    #[test]
    fn coset_convolution_examples() {
        let t = e_lamp();
        let ctx = t.ctx();
        let a = t.pushforward_coset();
        let unit = CosetMeasure::point(CosetKey::new(0, &XiElem::zero(ctx)));
        assert_eq!(a.coset_convolve(&unit).unwrap(), a);
        let sq = a.coset_convolve(&a).unwrap();
        assert_eq!(sq, t.convolve(&t).unwrap().pushforward_coset());
        assert!(sq.iter().all(|(k, w)| k.n == 2 && *w == rat(1, 4)));

        let b = e_bs();
        let lhs = b.pushforward_coset().coset_convolve(&b.pushforward_coset()).unwrap();
        assert_eq!(lhs, b.convolve(&b).unwrap().pushforward_coset());

        let bad = SparseMeasure::point(ge(ctx, "(0:1 | 1)")).pushforward_coset();
        assert!(matches!(a.coset_convolve(&bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn drift_and_moments() {
        assert_eq!(e_lamp().z_drift(), rat(1, 1));
        assert_eq!(e_bs().z_drift(), rat(1, 2));
        assert_eq!(e_bs().contraction_moment(), rat(7, 8));
        let ctx = FieldContext::lamplighter(2).unwrap();
        assert_eq!(SparseMeasure::point(ge(ctx, "(0 | -1)")).z_drift(), rat(-1, 1));
    }
}
