use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{digit_tuples, FieldContext, XiElem};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Digits on positions `[lo, M)`; index 0 is position `lo`.
pub type BallKey = Vec<u32>;

/// A ball `center + ϖ^level O`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ball {
    pub center: XiElem,
    pub level: i64,
}

impl Ball {
    pub fn new(center: XiElem, level: i64) -> Self {
        Ball { center, level }
    }

    pub fn contains(&self, x: &XiElem) -> bool {
        x.checked_sub(&self.center).map(|d| d.in_ball(self.level)).unwrap_or(false)
    }
}

/// A measure on K at the resolution of level-`M` balls inside `ϖ^lo O`, with
/// the mass outside `ϖ^lo O` kept as `escape`.
///
/// Masses are read as piecewise constant: inside each level-`M` ball the mass
/// is spread like Haar measure. An O-invariant measure is exactly of this form
/// whenever `M ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallMeasure {
    ctx: FieldContext,
    lo: i64,
    level: i64,
    masses: BTreeMap<BallKey, Rational>,
    escape: Rational,
    samples: Option<u64>,
}

/// Two same-coset balls with different masses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvarianceWitness {
    pub ball_a: String,
    pub mass_a: String,
    pub ball_b: String,
    pub mass_b: String,
}

impl fmt::Display for InvarianceWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ball {} has mass {} but ball {} has mass {}", self.ball_a, self.mass_a, self.ball_b, self.mass_b)
    }
}

#[derive(Serialize, Deserialize)]
struct CsvRow {
    ball_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_num: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_den: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass_float: Option<String>,
}

pub const ESCAPE_KEY: &str = "escape";

impl BallMeasure {
    pub fn new(ctx: FieldContext, lo: i64, level: i64) -> Result<Self> {
        if lo >= level {
            return Err(Error::precondition(format!("ball window needs lo < M, got [{lo}, {level})")));
        }
        Ok(BallMeasure {
            ctx,
            lo,
            level,
            masses: BTreeMap::new(),
            escape: Rational::zero(),
            samples: None,
        })
    }

    /// Haar measure m_O normalized to 1. Needs `lo ≤ 0 ≤ M`.
    pub fn haar_o(ctx: FieldContext, lo: i64, level: i64) -> Result<Self> {
        if lo > 0 || level < 0 {
            return Err(Error::precondition(format!("m_O needs lo ≤ 0 ≤ M, got [{lo}, {level})")));
        }
        let mut m = Self::new(ctx, lo, level)?;
        let prefix = vec![0u32; (-lo) as usize];
        let tuples = digit_tuples(ctx.q(), level as usize);
        let share = Rational::new(1.into(), tuples.len().into());
        for t in tuples {
            let mut key = prefix.clone();
            key.extend(t);
            m.masses.insert(key, share.clone());
        }
        Ok(m)
    }

    pub fn point(ctx: FieldContext, lo: i64, level: i64, key: BallKey) -> Result<Self> {
        let mut m = Self::new(ctx, lo, level)?;
        m.check_key(&key)?;
        m.masses.insert(key, Rational::one());
        Ok(m)
    }

    /// The normalized histogram of `counts` (escapes under `None`).
    pub fn from_counts(
        ctx: FieldContext,
        lo: i64,
        level: i64,
        counts: &BTreeMap<Option<BallKey>, u64>,
    ) -> Result<Self> {
        let mut m = Self::new(ctx, lo, level)?;
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(Error::precondition("histogram with no samples"));
        }
        for (k, c) in counts {
            let w = Rational::new((*c).into(), total.into());
            match k {
                Some(key) => {
                    m.check_key(key)?;
                    m.add_mass(key.clone(), w);
                }
                None => m.escape += w,
            }
        }
        m.samples = Some(total);
        Ok(m)
    }

    fn check_key(&self, key: &BallKey) -> Result<()> {
        if key.len() != self.width() || key.iter().any(|d| *d >= self.ctx.q()) {
            return Err(Error::precondition(format!(
                "ball key {} does not fit window [{}, {}) for q = {}",
                self.format_key(key),
                self.lo,
                self.level,
                self.ctx.q()
            )));
        }
        Ok(())
    }

    pub(crate) fn add_mass(&mut self, key: BallKey, w: Rational) {
        if w.is_zero() {
            return;
        }
        *self.masses.entry(key).or_insert_with(Rational::zero) += w;
    }

    pub(crate) fn add_escape(&mut self, w: Rational) {
        self.escape += w;
    }

    pub fn ctx(&self) -> FieldContext {
        self.ctx
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// The resolution M.
    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn width(&self) -> usize {
        (self.level - self.lo) as usize
    }

    pub fn samples(&self) -> Option<u64> {
        self.samples
    }

    pub fn masses(&self) -> &BTreeMap<BallKey, Rational> {
        &self.masses
    }

    pub fn mass(&self, key: &BallKey) -> Rational {
        self.masses.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn escape_mass(&self) -> &Rational {
        &self.escape
    }

    pub fn in_window_mass(&self) -> Rational {
        self.masses.values().fold(Rational::zero(), |a, w| a + w)
    }

    pub fn total(&self) -> Rational {
        self.in_window_mass() + &self.escape
    }

    /// The key of the ball containing `x`, or `None` if `v(x) < lo`.
    pub fn key_of(&self, x: &XiElem) -> Option<BallKey> {
        x.digits(self.lo, self.level)
    }

    pub fn center(&self, key: &BallKey) -> XiElem {
        XiElem::from_digits(self.ctx, self.lo, key)
    }

    pub fn ball(&self, key: &BallKey) -> Ball {
        Ball::new(self.center(key), self.level)
    }

    /// Every key in the window whose ball lies in O.
    pub fn o_window_keys(&self) -> Vec<BallKey> {
        let below_zero = (-self.lo).max(0) as usize;
        let prefix = vec![0u32; below_zero];
        digit_tuples(self.ctx.q(), (self.level.max(0) - self.lo.max(0)) as usize)
            .into_iter()
            .map(|t| {
                let mut k = prefix.clone();
                k.extend(t);
                k
            })
            .collect()
    }

    /// Mass of `center + ϖ^level O` under the piecewise-constant reading.
    /// Balls larger than the window only see the in-window mass.
    pub fn mass_of_ball(&self, ball: &Ball) -> Rational {
        let Ball { center, level } = ball;
        if *level >= self.level {
            return match self.key_of(center) {
                Some(k) => {
                    self.mass(&k)
                        * rational::pow_rat(&Rational::from_integer(self.ctx.q().into()), self.level - level)
                }
                None => Rational::zero(),
            };
        }
        if *level <= self.lo {
            return if center.in_ball(*level) { self.in_window_mass() } else { Rational::zero() };
        }
        match center.digits(self.lo, *level) {
            None => Rational::zero(),
            Some(prefix) => self
                .masses
                .range(prefix.clone()..)
                .take_while(|(k, _)| k.starts_with(&prefix))
                .fold(Rational::zero(), |a, (_, w)| a + w),
        }
    }

    /// Sums the q sub-balls of every level-(M-1) ball.
    pub fn coarsen(&self) -> Result<BallMeasure> {
        let mut out = BallMeasure::new(self.ctx, self.lo, self.level - 1)?;
        for (k, w) in &self.masses {
            out.add_mass(k[..k.len() - 1].to_vec(), w.clone());
        }
        out.escape = self.escape.clone();
        out.samples = self.samples;
        Ok(out)
    }

    /// Checks L-invariance: balls in the same O-coset must carry equal mass.
    /// Needs `lo ≤ 0`, so that O-cosets are unions of window balls.
    pub fn l_invariance_witness(&self) -> Result<Option<InvarianceWitness>> {
        if self.lo > 0 {
            return Err(Error::precondition("L-invariance needs a window with lo ≤ 0"));
        }
        if self.level <= 0 {
            return Ok(None);
        }
        let split = (-self.lo) as usize;
        let mut cosets: BTreeMap<&[u32], Vec<(&BallKey, &Rational)>> = BTreeMap::new();
        for (k, w) in &self.masses {
            cosets.entry(&k[..split]).or_default().push((k, w));
        }
        let per_coset = (self.ctx.q() as usize).pow(self.level as u32);
        for (prefix, balls) in cosets {
            let (k0, w0) = balls[0];
            if balls.len() < per_coset {
                let missing = digit_tuples(self.ctx.q(), self.level as usize)
                    .into_iter()
                    .map(|t| [prefix, &t[..]].concat())
                    .find(|k| !self.masses.contains_key(k))
                    .expect("a missing ball exists");
                return Ok(Some(self.witness(k0, w0, &missing, &Rational::zero())));
            }
            if let Some((k1, w1)) = balls.iter().find(|(_, w)| *w != w0) {
                return Ok(Some(self.witness(k0, w0, k1, w1)));
            }
        }
        Ok(None)
    }

    fn witness(&self, a: &BallKey, wa: &Rational, b: &BallKey, wb: &Rational) -> InvarianceWitness {
        InvarianceWitness {
            ball_a: self.format_key(a),
            mass_a: rational::format_rational(wa),
            ball_b: self.format_key(b),
            mass_b: rational::format_rational(wb),
        }
    }

    pub fn is_l_invariant(&self) -> bool {
        matches!(self.l_invariance_witness(), Ok(None))
    }

    /// Total variation `½ Σ |a(B) − b(B)|` over in-window balls.
    pub fn tv_distance(&self, other: &BallMeasure) -> Result<Rational> {
        self.check_same_window(other)?;
        let mut acc = Rational::zero();
        for (k, w) in &self.masses {
            acc += (w - other.mass(k)).abs();
        }
        for (k, w) in &other.masses {
            if !self.masses.contains_key(k) {
                acc += w;
            }
        }
        Ok(acc / Rational::from_integer(2.into()))
    }

    pub(crate) fn check_same_window(&self, other: &BallMeasure) -> Result<()> {
        self.ctx.check(&other.ctx)?;
        if (self.lo, self.level) != (other.lo, other.level) {
            return Err(Error::precondition(format!(
                "ball windows differ: [{}, {}) vs [{}, {})",
                self.lo, self.level, other.lo, other.level
            )));
        }
        Ok(())
    }

    /// `"lo:digits"`, digits from position lo upward; dot-separated when q > 10.
    pub fn format_key(&self, key: &BallKey) -> String {
        let digits: Vec<String> = key.iter().map(|d| d.to_string()).collect();
        let sep = if self.ctx.q() > 10 { "." } else { "" };
        format!("{}:{}", self.lo, digits.join(sep))
    }

    fn parse_key(ctx: FieldContext, s: &str) -> Result<(i64, BallKey)> {
        let (lo, digits) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("ball key {s:?} must look like lo:digits")))?;
        let lo: i64 = lo.trim().parse().map_err(|_| Error::parse(format!("bad window start in {s:?}")))?;
        let digits = digits.trim();
        let key: Result<BallKey> = if digits.contains('.') || ctx.q() > 10 {
            digits
                .split('.')
                .map(|d| d.parse().map_err(|_| Error::parse(format!("bad digit in {s:?}"))))
                .collect()
        } else {
            digits
                .chars()
                .map(|c| c.to_digit(10).ok_or_else(|| Error::parse(format!("bad digit in {s:?}"))))
                .collect()
        };
        Ok((lo, key?))
    }

    /// CSV with columns `ball_key, mass_num, mass_den` (or `mass_float`),
    /// plus one `escape` row.
    pub fn write_csv<W: Write>(&self, w: W, float: bool) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let row = |key: String, m: &Rational| {
            if float {
                CsvRow { ball_key: key, mass_num: None, mass_den: None, mass_float: Some(format!("{:.16e}", rational::to_f64(m))) }
            } else {
                CsvRow {
                    ball_key: key,
                    mass_num: Some(m.numer().to_string()),
                    mass_den: Some(m.denom().to_string()),
                    mass_float: None,
                }
            }
        };
        for (k, m) in &self.masses {
            wr.serialize(row(self.format_key(k), m))?;
        }
        wr.serialize(row(ESCAPE_KEY.to_string(), &self.escape))?;
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV form. The window is taken from the keys, with `M = lo +
    /// key length`; float masses are converted exactly.
    pub fn read_csv<R: Read>(ctx: FieldContext, r: R) -> Result<BallMeasure> {
        let mut rd = csv::Reader::from_reader(r);
        let mut window: Option<(i64, usize)> = None;
        let mut masses = BTreeMap::new();
        let mut escape = Rational::zero();
        for row in rd.deserialize::<CsvRow>() {
            let row = row?;
            let mass = match (&row.mass_num, &row.mass_den, &row.mass_float) {
                (Some(n), Some(d), _) => rational::parse_rational(&format!("{n}/{d}"))?,
                (_, _, Some(f)) => float_to_rational(f)?,
                _ => return Err(Error::parse(format!("row {:?} has no mass", row.ball_key))),
            };
            if mass.is_negative() {
                return Err(Error::parse(format!("negative mass in row {:?}", row.ball_key)));
            }
            if row.ball_key == ESCAPE_KEY {
                escape += mass;
                continue;
            }
            let (lo, key) = Self::parse_key(ctx, &row.ball_key)?;
            match window {
                None => window = Some((lo, key.len())),
                Some(w) if w != (lo, key.len()) => {
                    return Err(Error::parse(format!("ball key {:?} does not match the window", row.ball_key)))
                }
                _ => {}
            }
            if !mass.is_zero() {
                *masses.entry(key).or_insert_with(Rational::zero) += mass;
            }
        }
        let (lo, width) = window.ok_or_else(|| Error::parse("ball-measure CSV has no ball rows"))?;
        let mut m = BallMeasure::new(ctx, lo, lo + width as i64)?;
        for (k, w) in masses {
            m.check_key(&k)?;
            m.masses.insert(k, w);
        }
        m.escape = escape;
        Ok(m)
    }
}

fn float_to_rational(s: &str) -> Result<Rational> {
    let f: f64 = s.trim().parse().map_err(|_| Error::parse(format!("bad float mass {s:?}")))?;
    Rational::from_float(f).ok_or_else(|| Error::parse(format!("mass {s:?} is not finite")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn lamp2() -> FieldContext {
        FieldContext::lamplighter(2).unwrap()
    }

    #[test]
    fn haar_is_uniform_and_invariant() {
        let m = BallMeasure::haar_o(lamp2(), -1, 3).unwrap();
        assert_eq!(m.masses().len(), 8);
        assert_eq!(m.total(), Rational::one());
        assert!(m.is_l_invariant());
        assert_eq!(m.coarsen().unwrap().mass(&vec![0, 1, 1]), rat(1, 4));
    }

    #[test]
    fn point_mass_is_not_invariant() {
        let m = BallMeasure::point(lamp2(), 0, 2, vec![1, 0]).unwrap();
        let w = m.l_invariance_witness().unwrap().unwrap();
        assert_eq!(w.mass_a, "1");
        assert_eq!(w.mass_b, "0");
    }

    #[test]
    fn ball_masses_piecewise_constant() {
        let ctx = lamp2();
        let m = BallMeasure::haar_o(ctx, -2, 2).unwrap();
        let zero = XiElem::zero(ctx);
        assert_eq!(m.mass_of_ball(&Ball::new(zero.clone(), 4)), rat(1, 16));
        assert_eq!(m.mass_of_ball(&Ball::new(zero.clone(), 1)), rat(1, 2));
        assert_eq!(m.mass_of_ball(&Ball::new(zero.clone(), -5)), Rational::one());
        let outside = XiElem::parse(ctx, "-1:1").unwrap();
        assert_eq!(m.mass_of_ball(&Ball::new(outside.clone(), 0)), Rational::zero());
        assert_eq!(m.mass_of_ball(&Ball::new(outside, -1)), Rational::one());
    }

    #[test]
    fn csv_round_trip() {
        let ctx = FieldContext::baumslag_solitar(3).unwrap();
        let mut counts = BTreeMap::new();
        counts.insert(Some(vec![0, 2, 1]), 5);
        counts.insert(Some(vec![1, 0, 0]), 2);
        counts.insert(None, 1);
        let m = BallMeasure::from_counts(ctx, -1, 2, &counts).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf, false).unwrap();
        let back = BallMeasure::read_csv(ctx, buf.as_slice()).unwrap();
        assert_eq!(back.masses(), m.masses());
        assert_eq!(back.escape_mass(), m.escape_mass());
        assert_eq!((back.lo(), back.level()), (-1, 2));

        let mut fbuf = Vec::new();
        m.write_csv(&mut fbuf, true).unwrap();
        let approx = BallMeasure::read_csv(ctx, fbuf.as_slice()).unwrap();
        assert!(rational::to_f64(&(approx.mass(&vec![0, 2, 1]) - rat(5, 8))).abs() < 1e-15);
    }
}
