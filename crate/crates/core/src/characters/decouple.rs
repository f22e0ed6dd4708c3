//! Additive characters of K and the integrals
//! `∫_K F_{z1}(y + ϖ^m x) · conj F_{z2}(x) dm_K(x)` with `F_z(x) = λ(xz) χ_O(x)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{digit_tuples, FieldContext, Mode, XiElem};
use crate::error::{Error, Result};
use crate::rational::{pow_int, Rational};

use super::cyclo::CycloValue;

/// `λ(x) = λ'(x ϖ^{shift})`, where `λ'` reads the digits below position 0:
/// `exp(2πi {x}_q)` in carry mode and `exp(2πi a_{−1} / q)` in modular mode.
/// `shift = −(N+1)`; the default `N = 1` makes λ non-trivial on `ϖO`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CharacterSpec {
    pub ctx: FieldContext,
    pub shift: i64,
}

impl CharacterSpec {
    pub fn new(ctx: FieldContext, shift: i64) -> Result<Self> {
        if shift > -1 {
            return Err(Error::precondition(format!("character shift must be ≤ −1, got {shift}")));
        }
        Ok(CharacterSpec { ctx, shift })
    }

    pub fn standard(ctx: FieldContext) -> Self {
        CharacterSpec { ctx, shift: -2 }
    }

    /// `N` in `shift = −(N+1)`; λ is trivial exactly on `ϖ^{N+1} O`.
    pub fn n(&self) -> i64 {
        -self.shift - 1
    }

    /// An `x ∈ ϖO` with `λ(x) ≠ 1`, if the character admits one.
    pub fn nontriviality_witness(&self) -> Result<Option<XiElem>> {
        let x = XiElem::monomial(self.ctx, 1, self.n());
        Ok((self.n() >= 1 && !eval_character(self, &x)?.is_one()).then_some(x))
    }
}

pub fn eval_character(spec: &CharacterSpec, x: &XiElem) -> Result<CycloValue> {
    spec.ctx.check(&x.ctx())?;
    let q = spec.ctx.q();
    let y = x.scale_pow(spec.shift);
    let Some(v) = y.valuation() else {
        return Ok(CycloValue::one(q));
    };
    if v >= 0 {
        return Ok(CycloValue::one(q));
    }
    let r = u32::try_from(-v).map_err(|_| Error::Budget("character order overflow".into()))?;
    let digits = y.digits(v, 0).expect("v(y) = v");
    let e = match spec.ctx.mode() {
        Mode::Carry => digits.iter().rev().fold(0u64, |acc, d| acc.saturating_mul(q as u64).saturating_add(*d as u64)),
        Mode::Modular => (digits[r as usize - 1] as u64).saturating_mul((q as u64).saturating_pow(r - 1)),
    };
    CycloValue::root(q, r, e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    /// `m ≥ 0`, `y ∈ O`: the domain is all of `O`.
    I,
    /// `m < 0`, `y ∈ ϖ^m O`: the domain is a ball of level `−m`.
    II,
    #[serde(rename = "empty")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecoupleValue {
    pub value: CycloValue,
    pub case: Case,
    /// `w_m = ϖ^m z1 − z2`.
    pub w: XiElem,
    /// Integration level `R`: the integrand is constant on `ϖ^R O` cosets.
    pub level: i64,
}

/// Domain `ϖ^{−m}(O − y) ∩ O`, as `(center, level)` or `None` when empty.
fn domain(y: &XiElem, m: i64) -> Option<(XiElem, i64)> {
    if m >= 0 {
        y.in_ball(0).then(|| (XiElem::zero(y.ctx()), 0))
    } else {
        y.in_ball(m).then(|| (y.scale_pow(-m).negate(), -m))
    }
}

pub fn decouple_integral(spec: &CharacterSpec, z1: &XiElem, z2: &XiElem, y: &XiElem, m: i64) -> Result<DecoupleValue> {
    for z in [z1, z2, y] {
        spec.ctx.check(&z.ctx())?;
    }
    if !z1.is_integral() || !z2.is_integral() {
        return Err(Error::precondition("z1 and z2 must lie in O"));
    }
    let q = spec.ctx.q();
    let w = &z1.scale_pow(m) - z2;
    let Some((center, j)) = domain(y, m) else {
        return Ok(DecoupleValue { value: CycloValue::zero(q), case: Case::Empty, w, level: 0 });
    };
    let case = if m >= 0 { Case::I } else { Case::II };
    let level = match w.valuation() {
        Some(v) => j.max(spec.n() + 1 - v),
        None => j,
    };
    let width = usize::try_from(level - j).expect("level ≥ j");
    if (q as f64).powi(width as i32) > 1e7 {
        return Err(Error::Budget(format!("{q}^{width} coset representatives")));
    }
    let mut sum = CycloValue::zero(q);
    for digits in digit_tuples(q, width) {
        let rep = &center + &XiElem::from_digits(spec.ctx, j, &digits);
        sum = &sum + &eval_character(spec, &(&w * &rep))?;
    }
    let haar = Rational::new(1.into(), pow_int(q, level as u32));
    let value = &eval_character(spec, &(y * z1))? * &sum.scale(&haar);
    Ok(DecoupleValue { value, case, w, level })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridEntry {
    pub m: i64,
    pub y: String,
    pub value: String,
    pub value_float: [f64; 2],
    pub exact_zero: bool,
    pub case: Case,
    /// `v(w_m) ≤ 1` for `m ≥ 0`, `v(w_m) ≤ m + 1` for `m < 0`.
    pub case_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypotheses {
    /// `|z1 − z2| ≥ 1/q`.
    pub separated: bool,
    pub nontrivial_witness: Option<String>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridReport {
    pub z1: String,
    pub z2: String,
    pub shift: i64,
    pub m_range: (i64, i64),
    pub hypotheses: Hypotheses,
    /// Set when some `m` had more representatives than `reps_per_m`.
    pub capped: bool,
    pub entries: Vec<GridEntry>,
    pub all_zero: bool,
    pub pass: bool,
}

/// Evaluates the integral for every `m` in the half-open `m_range` and every
/// `y` in `ϖ^{min(m,0)} O / ϖ^{N+1} O` (the integral only depends on that
/// class), plus one `y` just outside, where the domain is empty.
pub fn verify_decoupled_grid(
    spec: &CharacterSpec,
    z1: &XiElem,
    z2: &XiElem,
    m_range: (i64, i64),
    reps_per_m: usize,
) -> Result<GridReport> {
    let separated = (z1 - z2).valuation().is_some_and(|v| v <= 1);
    let witness = spec.nontriviality_witness()?;
    let ok = separated && witness.is_some();
    let hypotheses = Hypotheses {
        separated,
        nontrivial_witness: witness.as_ref().map(|x| x.to_string()),
        status: if ok { "ok".into() } else { "hypotheses violated".into() },
    };
    let q = spec.ctx.q();
    let mut jobs = Vec::new();
    let mut capped = false;
    for m in m_range.0..m_range.1 {
        let lo = m.min(0);
        let width = usize::try_from(spec.n() + 1 - lo).expect("N + 1 > lo");
        let full = (q as u64).checked_pow(width as u32).unwrap_or(u64::MAX);
        if full > reps_per_m as u64 {
            capped = true;
        }
        if full > 1 << 24 {
            return Err(Error::Budget(format!("{q}^{width} representatives for m = {m}")));
        }
        let mut ys: Vec<XiElem> =
            digit_tuples(q, width).into_iter().take(reps_per_m).map(|d| XiElem::from_digits(spec.ctx, lo, &d)).collect();
        ys.push(XiElem::monomial(spec.ctx, 1, lo - 1));
        jobs.extend(ys.into_iter().map(|y| (m, y)));
    }
    let entries = jobs
        .par_iter()
        .map(|(m, y)| {
            let d = decouple_integral(spec, z1, z2, y, *m)?;
            let case_bound = match d.w.valuation() {
                Some(v) if *m >= 0 => v <= 1,
                Some(v) => v <= m + 1,
                None => false,
            };
            Ok(GridEntry {
                m: *m,
                y: y.to_string(),
                value: d.value.to_string(),
                value_float: d.value.to_complex().into(),
                exact_zero: d.value.is_zero(),
                case: d.case,
                case_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_zero = entries.iter().all(|e| e.exact_zero);
    Ok(GridReport {
        z1: z1.to_string(),
        z2: z2.to_string(),
        shift: spec.shift,
        m_range,
        hypotheses,
        capped,
        pass: ok && all_zero,
        all_zero,
        entries,
    })
}
