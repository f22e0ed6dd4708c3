//! Realizing a prescribed subsum set as the boundary entropy spectrum of an
//! infinite product walk `τ_β = Σ_n α_n σ_1 ⊗ ⋯ ⊗ σ_n`, with
//! `σ_k = (1 − p_k) δ_e + p_k σ` and `β_k = p_k q_k h(σ)`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::GroupElem;
use crate::error::{Error, Result};
use crate::measures::SparseMeasure;
use crate::rational::{format_rational, pow_rat, sqrt_floor, Rational};

use super::subsum::BetaSeq;

/// `w_k = c · u_k` where `u_k` is a dyadic lower approximation of `1/√R_k`
/// for `k ≤ P + 1` (P the prefix length) and `u_{P+1+j} = u_{P+1} s^j` on
/// the geometric tail, with `s` a rational approximation of `1/√ρ` in
/// `(1, 1/ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumPlan {
    beta: BetaSeq,
    u_head: Vec<Rational>,
    s: Rational,
    c: Rational,
    h_sigma: Rational,
    h_sigma_o: Rational,
    eps: Rational,
    big_n: u64,
    /// `u_k`, `q_k`, `h_k` for `k ≤ CACHED`.
    u_cache: Vec<Rational>,
    q_cache: Vec<Rational>,
    h_cache: Vec<Rational>,
    alpha_cache: Vec<Rational>,
}

const CACHED: usize = 64;

pub fn plan_spectrum(beta: &BetaSeq, h_sigma_o: &Rational) -> Result<SpectrumPlan> {
    let Some((_, rho)) = beta.tail().cloned() else {
        return Err(Error::precondition("plan_spectrum needs a geometric tail so that q_k → 0"));
    };
    if !h_sigma_o.is_positive() {
        return Err(Error::precondition(format!("h(σ_o) must be positive, got {h_sigma_o}")));
    }
    let head = beta.prefix_len() + 1;
    let mut bits = 32;
    let (u_head, s) = loop {
        let u: Vec<Rational> = (1..=head).map(|k| sqrt_floor(&beta.remainder(k - 1), bits).recip()).collect();
        let s = sqrt_floor(&rho, bits).recip();
        let increasing = u.windows(2).all(|w| w[0] < w[1]);
        if increasing && s > Rational::one() && &s * &rho < Rational::one() {
            break (u, s);
        }
        bits *= 2;
        if bits > 1 << 16 {
            return Err(Error::Invariant("could not separate the weights w_k".into()));
        }
    };
    // β_k u_k decreases along the tail because sρ < 1, so the maximum is in the head
    let max_bu = (1..=head).map(|k| beta.term(k) * &u_head[k - 1]).max().expect("head is nonempty");
    let c = (Rational::from_integer(2.into()) * max_bu).recip();
    let w1 = &c * &u_head[0];
    let h_sigma = w1.recip();
    let ratio = &h_sigma / h_sigma_o;
    let big_n = ratio.floor().to_integer().to_u64().ok_or_else(|| Error::Budget("N does not fit in u64".into()))? + 1;
    let eps = &ratio / Rational::from_integer(big_n.into());
    let mut plan = SpectrumPlan {
        beta: beta.clone(),
        u_head,
        s,
        c,
        h_sigma,
        h_sigma_o: h_sigma_o.clone(),
        eps,
        big_n,
        u_cache: Vec::new(),
        q_cache: Vec::new(),
        h_cache: Vec::new(),
        alpha_cache: Vec::new(),
    };
    plan.u_cache = (1..=CACHED + 1).map(|k| plan.u(k)).collect();
    plan.q_cache = (1..=CACHED + 1).map(|k| plan.q(k)).collect();
    plan.h_cache = (1..=CACHED).map(|k| plan.h(k)).collect();
    plan.alpha_cache = (1..=CACHED).map(|n| plan.alpha(n)).collect();
    Ok(plan)
}

impl SpectrumPlan {
    pub fn beta(&self) -> &BetaSeq {
        &self.beta
    }

    pub fn h_sigma(&self) -> &Rational {
        &self.h_sigma
    }

    pub fn h_sigma_o(&self) -> &Rational {
        &self.h_sigma_o
    }

    pub fn eps(&self) -> &Rational {
        &self.eps
    }

    /// Power `N` in `σ = (1 − ε) δ_e + ε σ_o^{*N}`.
    pub fn big_n(&self) -> u64 {
        self.big_n
    }

    fn u(&self, k: usize) -> Rational {
        assert!(k >= 1, "plan indices start at 1");
        if let Some(u) = self.u_cache.get(k - 1) {
            return u.clone();
        }
        let head = self.u_head.len();
        if k <= head {
            self.u_head[k - 1].clone()
        } else {
            &self.u_head[head - 1] * pow_rat(&self.s, (k - head) as i64)
        }
    }

    pub fn w(&self, k: usize) -> Rational {
        &self.c * self.u(k)
    }

    pub fn p(&self, k: usize) -> Rational {
        self.beta.term(k) * self.w(k)
    }

    /// `q_k = w_1 / w_k`.
    pub fn q(&self, k: usize) -> Rational {
        if let Some(q) = k.checked_sub(1).and_then(|i| self.q_cache.get(i)) {
            return q.clone();
        }
        self.u(1) / self.u(k)
    }

    pub fn alpha(&self, n: usize) -> Rational {
        if let Some(a) = n.checked_sub(1).and_then(|i| self.alpha_cache.get(i)) {
            return a.clone();
        }
        self.q(n) - self.q(n + 1)
    }

    /// `h_k = p_k h(σ)`, the entropy contributed by coordinate k.
    pub fn h(&self, k: usize) -> Rational {
        if let Some(h) = k.checked_sub(1).and_then(|i| self.h_cache.get(i)) {
            return h.clone();
        }
        self.p(k) * &self.h_sigma
    }

    /// Checks every stated invariant exactly for `k ≤ upto`; returns the
    /// first violation.
    pub fn check_invariants(&self, upto: usize) -> std::result::Result<(), String> {
        let one = Rational::one();
        if !self.q(1).is_one() {
            return Err(format!("q_1 = {}", self.q(1)));
        }
        if self.eps <= Rational::zero() || self.eps >= one {
            return Err(format!("ε = {} outside (0,1)", self.eps));
        }
        if &self.eps * Rational::from_integer(self.big_n.into()) * &self.h_sigma_o != self.h_sigma {
            return Err("ε N h(σ_o) ≠ h(σ)".into());
        }
        let mut alpha_sum = Rational::zero();
        for k in 1..=upto {
            let p = self.p(k);
            if !p.is_positive() || p >= one {
                return Err(format!("p_{k} = {p} outside (0,1)"));
            }
            if self.w(k) >= self.w(k + 1) {
                return Err(format!("w not increasing at {k}"));
            }
            if self.beta.term(k) != &p * self.q(k) * &self.h_sigma {
                return Err(format!("β_{k} ≠ p_k q_k h(σ)"));
            }
            alpha_sum += self.alpha(k);
            if alpha_sum != &one - self.q(k + 1) {
                return Err(format!("Σ_{{n≤{k}}} α_n ≠ 1 − q_{}", k + 1));
            }
        }
        Ok(())
    }

    pub fn summary(&self, upto: usize) -> PlanSummary {
        let f = |g: &dyn Fn(usize) -> Rational| (1..=upto).map(|k| format_rational(&g(k))).collect();
        PlanSummary {
            beta: self.beta.to_string(),
            h_sigma_o: format_rational(&self.h_sigma_o),
            h_sigma: format_rational(&self.h_sigma),
            eps: format_rational(&self.eps),
            n: self.big_n,
            w: f(&|k| self.w(k)),
            p: f(&|k| self.p(k)),
            q: f(&|k| self.q(k)),
            alpha: f(&|k| self.alpha(k)),
            invariants: self.check_invariants(upto).err().unwrap_or_else(|| "ok".into()),
        }
    }
}

/// Serializable view of the first terms of a plan.
#[derive(Clone, Debug, Serialize)]
pub struct PlanSummary {
    pub beta: String,
    pub h_sigma_o: String,
    pub h_sigma: String,
    pub eps: String,
    #[serde(rename = "N")]
    pub n: u64,
    pub w: Vec<String>,
    pub p: Vec<String>,
    pub q: Vec<String>,
    pub alpha: Vec<String>,
    pub invariants: String,
}

/// `σ_k = (1 − p_k) δ_e + p_k σ`.
pub fn sigma_k_measure(plan: &SpectrumPlan, k: usize, sigma: &SparseMeasure) -> Result<SparseMeasure> {
    sigma.require_probability("sigma_k_measure")?;
    mixture(&plan.p(k), sigma)
}

fn mixture(p: &Rational, sigma: &SparseMeasure) -> Result<SparseMeasure> {
    if !p.is_positive() || *p >= Rational::one() {
        return Err(Error::precondition(format!("mixing weight {p} outside (0,1)")));
    }
    SparseMeasure::identity(sigma.ctx()).mix(&(Rational::one() - p), sigma)
}

/// A measure on `Γ^M`, keyed by tuples.
pub type ProductMeasure = BTreeMap<Vec<GroupElem>, Rational>;

pub const MAX_PRODUCT_SUPPORT: usize = 1 << 21;

/// `Σ_{n≤M} α_n σ_1 ⊗ ⋯ ⊗ σ_n ⊗ δ_e^{⊗(M−n)}` and the omitted mass
/// `q_{M+1}`.
pub fn tau_beta_truncate(plan: &SpectrumPlan, m: usize, sigma: &SparseMeasure) -> Result<(ProductMeasure, Rational)> {
    if m == 0 {
        return Err(Error::precondition("tau_beta_truncate needs M ≥ 1"));
    }
    sigma.require_probability("tau_beta_truncate")?;
    let ctx = sigma.ctx();
    let e = GroupElem::identity(ctx);
    let mut out = ProductMeasure::new();
    // prefix[n] = σ_1 ⊗ ⋯ ⊗ σ_n, built incrementally
    let mut prefix: Vec<(Vec<GroupElem>, Rational)> = vec![(Vec::new(), Rational::one())];
    for n in 1..=m {
        let sk = sigma_k_measure(plan, n, sigma)?;
        if prefix.len().saturating_mul(sk.len()) > MAX_PRODUCT_SUPPORT {
            return Err(Error::Budget(format!("product support exceeds {MAX_PRODUCT_SUPPORT} tuples at n = {n}")));
        }
        prefix = prefix
            .iter()
            .flat_map(|(tuple, w)| {
                sk.iter().map(move |(g, v)| {
                    let mut t = tuple.clone();
                    t.push(g.clone());
                    (t, w * v)
                })
            })
            .collect();
        let alpha = plan.alpha(n);
        for (tuple, w) in &prefix {
            let mut padded = tuple.clone();
            padded.resize(m, e.clone());
            *out.entry(padded).or_insert_with(Rational::zero) += &alpha * w;
        }
    }
    Ok((out, plan.q(m + 1)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectrumValue {
    pub value: Rational,
    pub cross_check: Rational,
}

/// `Σ_{k∈I} β_k`, cross-checked through
/// `Σ_{n≤M} α_n Σ_{k∈I, k≤n} h_k + Σ_{k∈I} h_k q_{max(k, M+1)}`.
pub fn spectrum_value(plan: &SpectrumPlan, subset: &BTreeSet<usize>, m: usize) -> Result<SpectrumValue> {
    let k_max = subset.iter().next_back().copied().unwrap_or(1);
    SpectrumTable::new(plan, m, k_max)?.value(subset)
}

/// Every term of both sides of [`spectrum_value`] for coordinates
/// `k ≤ k_max`, brought over one common denominator, so that evaluating many
/// subsets costs only integer additions.
#[derive(Clone, Debug)]
pub struct SpectrumTable {
    m: usize,
    beta_den: BigInt,
    beta_num: Vec<BigInt>,
    cross_den: BigInt,
    /// Row k: numerators of `α_n h_k` for `k ≤ n ≤ M`, then `h_k q_{max(k, M+1)}`.
    cross_num: Vec<Vec<BigInt>>,
}

impl SpectrumTable {
    pub fn new(plan: &SpectrumPlan, m: usize, k_max: usize) -> Result<Self> {
        let betas: Vec<Rational> = (1..=k_max).map(|k| plan.beta().term(k)).collect();
        let rows: Vec<Vec<Rational>> = (1..=k_max)
            .map(|k| {
                let hk = plan.h(k);
                let mut row: Vec<Rational> = (k..=m).map(|n| plan.alpha(n) * &hk).collect();
                row.push(&hk * plan.q(k.max(m + 1)));
                row
            })
            .collect();
        let (beta_den, beta_num) = over_common_denominator(betas.iter());
        let (cross_den, flat) = over_common_denominator(rows.iter().flatten());
        let mut flat = flat.into_iter();
        let cross_num = rows.iter().map(|r| flat.by_ref().take(r.len()).collect()).collect();
        Ok(SpectrumTable { m, beta_den, beta_num, cross_den, cross_num })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn value(&self, subset: &BTreeSet<usize>) -> Result<SpectrumValue> {
        if subset.contains(&0) {
            return Err(Error::precondition("subset indices start at 1"));
        }
        if let Some(k) = subset.iter().find(|k| **k > self.beta_num.len()) {
            return Err(Error::precondition(format!("index {k} beyond the table size {}", self.beta_num.len())));
        }
        let mut value = BigInt::zero();
        let mut cross = BigInt::zero();
        for k in subset {
            value += &self.beta_num[k - 1];
            for t in &self.cross_num[k - 1] {
                cross += t;
            }
        }
        Ok(SpectrumValue {
            value: Rational::new(value, self.beta_den.clone()),
            cross_check: Rational::new(cross, self.cross_den.clone()),
        })
    }
}

fn over_common_denominator<'a>(xs: impl Iterator<Item = &'a Rational> + Clone) -> (BigInt, Vec<BigInt>) {
    let den = xs.clone().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let nums = xs.map(|x| x.numer() * (&den / x.denom())).collect();
    (den, nums)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::FieldContext;
    use crate::rational::{int, rat};

    fn halves() -> BetaSeq {
        BetaSeq::geometric(rat(1, 2), rat(1, 2)).unwrap()
    }

    #[test]
    fn dyadic_plan_invariants() {
        let plan = plan_spectrum(&halves(), &rat(1, 3)).unwrap();
        plan.check_invariants(32).unwrap();
        assert!(plan.eps() < &int(1) && plan.eps().is_positive());
        // w_k grows like 2^{k/2}
        let r = crate::rational::to_f64(&(plan.w(20) / plan.w(18)));
        assert!((r - 2.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn plan_with_prefix() {
        let beta = BetaSeq::parse("list:1,1/2,1/3+geometric:a=1/9,rho=1/3").unwrap();
        plan_spectrum(&beta, &int(2)).unwrap().check_invariants(32).unwrap();
        assert!(plan_spectrum(&BetaSeq::parse("list:1,1/2").unwrap(), &int(1)).is_err());
    }

    #[test]
    fn spectrum_value_examples() {
        let plan = plan_spectrum(&halves(), &int(1)).unwrap();
        let v = spectrum_value(&plan, &BTreeSet::new(), 5).unwrap();
        assert_eq!((v.value.clone(), v.cross_check.clone()), (int(0), int(0)));
        let v = spectrum_value(&plan, &[1, 3].into_iter().collect(), 5).unwrap();
        assert_eq!(v.value, rat(5, 8));
        assert_eq!(v.cross_check, v.value);
        let v = spectrum_value(&plan, &[2, 9].into_iter().collect(), 4).unwrap();
        assert_eq!(v.cross_check, v.value);
    }

    #[test]
    fn sigma_k_mixture() {
        let ctx = FieldContext::baumslag_solitar(2).unwrap();
        let g = GroupElem::parse(ctx, "(1 | 1)").unwrap();
        let m = mixture(&rat(1, 3), &SparseMeasure::point(g.clone())).unwrap();
        assert_eq!(m.weight(&GroupElem::identity(ctx)), rat(2, 3));
        assert_eq!(m.weight(&g), rat(1, 3));
        assert!(mixture(&int(0), &SparseMeasure::point(g)).is_err());
    }

    #[test]
    fn truncation_masses() {
        let ctx = FieldContext::baumslag_solitar(2).unwrap();
        let sigma = crate::measures::e_bs();
        let plan = plan_spectrum(&halves(), &int(1)).unwrap();
        let (t1, tail1) = tau_beta_truncate(&plan, 1, &sigma).unwrap();
        assert_eq!(tail1, plan.q(2));
        assert_eq!(t1.values().fold(Rational::zero(), |a, b| a + b), int(1) - plan.q(2));
        let (t, tail) = tau_beta_truncate(&plan, 6, &sigma).unwrap();
        let total = t.values().fold(Rational::zero(), |a, b| a + b);
        assert_eq!(total + &tail, int(1));
        let e = vec![GroupElem::identity(ctx); 6];
        let bound = (1..=6).fold(Rational::one(), |a, k| a * (int(1) - plan.p(k))) * (int(1) - tail);
        assert!(t[&e] >= bound);
    }
}
