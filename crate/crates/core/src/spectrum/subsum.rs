//! Subsum sets `SubSum(β) = {Σ_{n∈S} β_n : S ⊆ N}` of positive summable
//! sequences.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{format_rational, parse_rational, pow_rat, Rational};

/// β as a finite prefix followed by an optional geometric tail
/// `a, aρ, aρ², …`. Indices start at 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaSeq {
    prefix: Vec<Rational>,
    tail: Option<(Rational, Rational)>,
}

impl BetaSeq {
    pub fn new(prefix: Vec<Rational>, tail: Option<(Rational, Rational)>) -> Result<Self> {
        if prefix.iter().any(|b| !b.is_positive()) {
            return Err(Error::precondition("β must be positive"));
        }
        if let Some((a, rho)) = &tail {
            if !a.is_positive() || !crate::rational::is_unit_interval_open(rho) {
                return Err(Error::precondition(format!("geometric tail needs a > 0 and 0 < ρ < 1, got a = {a}, ρ = {rho}")));
            }
        }
        if prefix.is_empty() && tail.is_none() {
            return Err(Error::precondition("β is empty"));
        }
        Ok(BetaSeq { prefix, tail })
    }

    /// `β_k = a ρ^{k-1}`.
    pub fn geometric(a: Rational, rho: Rational) -> Result<Self> {
        Self::new(Vec::new(), Some((a, rho)))
    }

    pub fn list(values: Vec<Rational>) -> Result<Self> {
        Self::new(values, None)
    }

    /// `geometric:a=<rat>,rho=<rat>`, `list:<rat>,…`, `file:<path>`, or a
    /// list followed by a tail: `list:1,1/2+geometric:a=1/8,rho=1/2`.
    pub fn parse(descriptor: &str) -> Result<Self> {
        let d = descriptor.trim();
        if let Some(path) = d.strip_prefix("file:") {
            return Self::read_file(Path::new(path.trim()));
        }
        let (list_part, geo_part) = match d.split_once('+') {
            Some((l, g)) => (Some(l.trim()), Some(g.trim())),
            None if d.starts_with("list:") => (Some(d), None),
            None => (None, Some(d)),
        };
        let prefix = match list_part {
            Some(l) => {
                let body = l
                    .strip_prefix("list:")
                    .ok_or_else(|| Error::parse(format!("expected list:… in {descriptor:?}")))?;
                body.split(',').filter(|s| !s.trim().is_empty()).map(parse_rational).collect::<Result<_>>()?
            }
            None => Vec::new(),
        };
        let tail = match geo_part {
            Some(g) => Some(parse_geometric(g)?),
            None => None,
        };
        Self::new(prefix, tail)
    }

    /// One rational per line (or comma separated); a line
    /// `geometric:a=…,rho=…` sets the tail. `#` starts a comment.
    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut prefix = Vec::new();
        let mut tail = None;
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with("geometric:") {
                tail = Some(parse_geometric(line)?);
            } else {
                for v in line.split(',').filter(|s| !s.trim().is_empty()) {
                    prefix.push(parse_rational(v)?);
                }
            }
        }
        Self::new(prefix, tail)
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn tail(&self) -> Option<&(Rational, Rational)> {
        self.tail.as_ref()
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    /// β_k for `k ≥ 1`; zero past the end of a finite sequence.
    pub fn term(&self, k: usize) -> Rational {
        assert!(k >= 1, "β is indexed from 1");
        if k <= self.prefix.len() {
            return self.prefix[k - 1].clone();
        }
        match &self.tail {
            Some((a, rho)) => a * pow_rat(rho, (k - self.prefix.len() - 1) as i64),
            None => Rational::zero(),
        }
    }

    /// `B_n = Σ_{k > n} β_k`, in closed form.
    pub fn remainder(&self, n: usize) -> Rational {
        let p = self.prefix.len();
        let mut acc: Rational = self.prefix.iter().skip(n).fold(Rational::zero(), |a, b| a + b);
        if let Some((a, rho)) = &self.tail {
            let j = n.saturating_sub(p) as i64;
            acc += a * pow_rat(rho, j) / (Rational::one() - rho);
        }
        acc
    }

    pub fn total(&self) -> Rational {
        self.remainder(0)
    }

    /// Non-increasing, including across the prefix/tail boundary.
    pub fn is_non_increasing(&self) -> bool {
        let upto = self.prefix.len() + if self.tail.is_some() { 1 } else { 0 };
        (1..upto).all(|k| self.term(k) >= self.term(k + 1))
    }
}

impl fmt::Display for BetaSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list: Vec<String> = self.prefix.iter().map(format_rational).collect();
        match (&self.tail, list.is_empty()) {
            (Some((a, rho)), true) => write!(f, "geometric:a={a},rho={rho}"),
            (Some((a, rho)), false) => write!(f, "list:{}+geometric:a={a},rho={rho}", list.join(",")),
            (None, _) => write!(f, "list:{}", list.join(",")),
        }
    }
}

fn parse_geometric(s: &str) -> Result<(Rational, Rational)> {
    let body = s
        .trim()
        .strip_prefix("geometric:")
        .ok_or_else(|| Error::parse(format!("expected geometric:a=…,rho=… in {s:?}")))?;
    let (mut a, mut rho) = (None, None);
    for part in body.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(format!("expected key=value in {part:?}")))?;
        match k.trim() {
            "a" => a = Some(parse_rational(v)?),
            "rho" => rho = Some(parse_rational(v)?),
            other => return Err(Error::parse(format!("unknown geometric parameter {other:?}"))),
        }
    }
    match (a, rho) {
        (Some(a), Some(rho)) => Ok((a, rho)),
        _ => Err(Error::parse(format!("geometric descriptor {s:?} needs both a and rho"))),
    }
}

/// The sorted distinct subset sums of `β_1..β_N`, stored as numerators over
/// a common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsumSet {
    den: BigInt,
    nums: Vec<u128>,
}

impl SubsumSet {
    pub fn len(&self) -> usize {
        self.nums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nums.is_empty()
    }

    pub fn get(&self, i: usize) -> Rational {
        Rational::new(BigInt::from(self.nums[i]), self.den.clone())
    }

    pub fn to_vec(&self) -> Vec<Rational> {
        (0..self.len()).map(|i| self.get(i)).collect()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self.scaled(x) {
            Some(n) => self.nums.binary_search(&n).is_ok(),
            None => false,
        }
    }

    fn scaled(&self, x: &Rational) -> Option<u128> {
        let s = x * Rational::from_integer(self.den.clone());
        if s.is_integer() {
            s.to_integer().to_u128()
        } else {
            None
        }
    }

    /// Distance from `x` to the nearest listed sum.
    pub fn distance(&self, x: &Rational) -> Rational {
        let den = Rational::from_integer(self.den.clone());
        let sx = x * &den;
        // first index with nums[i] ≥ x
        let i = self.nums.partition_point(|n| Rational::from_integer(BigInt::from(*n)) < sx);
        let mut best: Option<Rational> = None;
        for j in [i.checked_sub(1), Some(i)].into_iter().flatten() {
            if j < self.nums.len() {
                let d = (self.get(j) - x).abs();
                if best.as_ref().is_none_or(|b| d < *b) {
                    best = Some(d);
                }
            }
        }
        best.expect("a subsum set always contains 0")
    }
}

pub const MAX_ENUMERATION: usize = 24;

/// All subset sums of `β_1..β_N`, exact, sorted and deduplicated.
pub fn subsum_enumerate(beta: &BetaSeq, n: usize) -> Result<SubsumSet> {
    if n > MAX_ENUMERATION {
        return Err(Error::Budget(format!("subset enumeration is capped at N = {MAX_ENUMERATION}, got {n}")));
    }
    let terms: Vec<Rational> = (1..=n).map(|k| beta.term(k)).collect();
    let den = terms.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.denom()));
    let scaled = terms
        .iter()
        .map(|t| (t.numer() * (&den / t.denom())).to_u128())
        .collect::<Option<Vec<u128>>>()
        .ok_or_else(|| Error::Budget("common denominator too large for subset enumeration".into()))?;
    if scaled.iter().try_fold(0u128, |a, b| a.checked_add(*b)).is_none() {
        return Err(Error::Budget("subset sums overflow the fixed-width enumeration".into()));
    }
    let mut nums = vec![0u128];
    for b in scaled {
        let shifted: Vec<u128> = nums.iter().map(|x| x + b).collect();
        nums = merge_dedup(&nums, &shifted);
    }
    Ok(SubsumSet { den, nums })
}

fn merge_dedup(a: &[u128], b: &[u128]) -> Vec<u128> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x <= y => {
                i += 1;
                if x == y {
                    j += 1;
                }
                *x
            }
            (Some(_), Some(y)) => {
                j += 1;
                *y
            }
            (Some(x), None) => {
                i += 1;
                *x
            }
            (None, Some(y)) => {
                j += 1;
                *y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// `β_n ≤ B_n` for all n: SubSum(β) = [0, B_0].
    Interval,
    /// `β_n > B_n` for all n: a Cantor set.
    Cantor,
    /// Neither holds for every n: a finite union of intervals, a Cantor set
    /// or a Cantorval.
    FiniteUnionOrCantorvalUndetermined,
    /// A finite sequence: SubSum(β) is a finite set of points.
    FinitePoints,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsumReport {
    pub classification: Classification,
    #[serde(rename = "B0")]
    pub b0: String,
    /// `lim 2^n B_n` for Cantor sets (their Lebesgue measure).
    pub measure_limit: Option<String>,
    pub truncation_level: usize,
    pub truncated_sums: Vec<String>,
}

/// Classifies SubSum(β) by comparing each β_n with the remainder B_n.
pub fn subsum_classify(beta: &BetaSeq, n: usize) -> Result<SubsumReport> {
    if !beta.is_non_increasing() {
        return Err(Error::precondition(format!("β = {beta} is not non-increasing")));
    }
    let p = beta.prefix_len();
    let (classification, measure_limit) = match beta.tail() {
        None => (Classification::FinitePoints, Some("0".to_string())),
        Some((_, rho)) => {
            // on the tail β_n > B_n ⟺ ρ < 1/2, uniformly in n
            let half = Rational::new(1.into(), 2.into());
            let tail_cantor = *rho < half;
            let prefix_cantor: Vec<bool> = (1..=p).map(|k| beta.term(k) > beta.remainder(k)).collect();
            if tail_cantor && prefix_cantor.iter().all(|c| *c) {
                // 2^n B_n = 2^p B_p (2ρ)^{n-p} → 0
                (Classification::Cantor, Some("0".to_string()))
            } else if !tail_cantor && prefix_cantor.iter().all(|c| !*c) {
                (Classification::Interval, None)
            } else {
                (Classification::FiniteUnionOrCantorvalUndetermined, None)
            }
        }
    };
    let sums = subsum_enumerate(beta, n)?;
    Ok(SubsumReport {
        classification,
        b0: format_rational(&beta.total()),
        measure_limit,
        truncation_level: n,
        truncated_sums: sums.to_vec().iter().map(format_rational).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "verdict")]
pub enum Membership {
    /// A certificate was found: indices of a finite subset, plus whether the
    /// full tail after `N` or an interval-type tail closes the gap.
    In { subset: Vec<usize>, remainder: String },
    /// `target ∉ ∪_S [Σ_S, Σ_S + B_N]`, hence not a subsum.
    Out,
    /// Some truncated sum leaves a remainder in `(0, B_N)` that the
    /// truncation cannot decide.
    Boundary { subset: Vec<usize>, remainder: String, tolerance: String },
}

/// Depth-first search over `S ⊆ {1..N}`, pruning whenever the remainder
/// `target − Σ_S` leaves `[0, B_k]`.
pub fn subsum_member(beta: &BetaSeq, target: &Rational, n: usize) -> Result<Membership> {
    if !beta.is_non_increasing() {
        return Err(Error::precondition(format!("β = {beta} is not non-increasing")));
    }
    let terms: Vec<Rational> = (1..=n).map(|k| beta.term(k)).collect();
    let rems: Vec<Rational> = (0..=n).map(|k| beta.remainder(k)).collect();
    let b_n = rems[n].clone();
    let tail_interval = tail_is_interval(beta, n);
    let mut boundary: Option<(Vec<usize>, Rational)> = None;
    let mut chosen = Vec::new();
    let mut budget: u64 = 1 << 24;
    let found = dfs(&terms, &rems, target.clone(), 0, &mut chosen, tail_interval, &mut boundary, &mut budget);
    if let Some((subset, r)) = found {
        return Ok(Membership::In { subset, remainder: format_rational(&r) });
    }
    match boundary {
        Some((subset, r)) => Ok(Membership::Boundary {
            subset,
            remainder: format_rational(&r),
            tolerance: format_rational(&b_n),
        }),
        None if budget == 0 => Err(Error::Budget("membership search exhausted its node budget".into())),
        None => Ok(Membership::Out),
    }
}

/// Whether `β_k ≤ B_k` for every `k > n`, so that the tail subsums fill
/// `[0, B_n]`.
fn tail_is_interval(beta: &BetaSeq, n: usize) -> bool {
    let p = beta.prefix_len();
    let prefix_ok = (n + 1..=p).all(|k| beta.term(k) <= beta.remainder(k));
    let tail_ok = match beta.tail() {
        Some((_, rho)) => *rho >= Rational::new(1.into(), 2.into()),
        None => n >= p,
    };
    prefix_ok && tail_ok
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    terms: &[Rational],
    rems: &[Rational],
    r: Rational,
    k: usize,
    chosen: &mut Vec<usize>,
    tail_interval: bool,
    boundary: &mut Option<(Vec<usize>, Rational)>,
    budget: &mut u64,
) -> Option<(Vec<usize>, Rational)> {
    if r.is_negative() || r > rems[k] || *budget == 0 {
        return None;
    }
    *budget -= 1;
    if r.is_zero() || r == rems[k] && k == terms.len() {
        return Some((chosen.clone(), r));
    }
    if k == terms.len() {
        if tail_interval {
            return Some((chosen.clone(), r));
        }
        if boundary.is_none() {
            *boundary = Some((chosen.clone(), r));
        }
        return None;
    }
    if r == rems[k] {
        // everything from k+1 on, including the whole tail
        let mut all = chosen.clone();
        all.extend(k + 1..=terms.len());
        return Some((all, rems[terms.len()].clone()));
    }
    chosen.push(k + 1);
    let with = dfs(terms, rems, &r - &terms[k], k + 1, chosen, tail_interval, boundary, budget);
    chosen.pop();
    if with.is_some() {
        return with;
    }
    dfs(terms, rems, r, k + 1, chosen, tail_interval, boundary, budget)
}
