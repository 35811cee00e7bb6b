//! High-precision support: outward-rounded intervals on MPFR floats and exact
//! polynomial forms in logarithms of primes.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rug::float::Round;
use rug::integer::Order;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

/// Default number of significant decimal digits carried internally.
pub const DEFAULT_DIGITS: u32 = 50;

/// Working precision in bits for `digits` significant decimal digits, with a
/// guard margin for accumulated rounding.
pub fn bits_for_digits(digits: u32) -> u32 {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as u32 + 32
}

pub fn to_rug_int(v: &BigInt) -> Integer {
    let (sign, bytes) = v.to_bytes_le();
    let mut out = Integer::from_digits(&bytes, Order::Lsf);
    if sign == Sign::Minus {
        out = -out;
    }
    out
}

pub fn from_rug_int(v: &Integer) -> BigInt {
    let bytes: Vec<u8> = v.to_digits(Order::Lsf);
    let mag = BigUint::from_bytes_le(&bytes);
    if v.cmp0() == Ordering::Less {
        -BigInt::from(mag)
    } else {
        BigInt::from(mag)
    }
}

fn rug_rational(q: &BigRational) -> rug::Rational {
    rug::Rational::from((to_rug_int(q.numer()), to_rug_int(q.denom())))
}

/// Closed interval `[lo, hi]` whose endpoints are rounded outward.
#[derive(Clone, Debug)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

impl Interval {
    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        let r = rug_rational(q);
        let lo = Float::with_val_round(prec, &r, Round::Down).0;
        let hi = Float::with_val_round(prec, &r, Round::Up).0;
        Interval { lo, hi }
    }

    pub fn from_u64(v: u64, prec: u32) -> Self {
        let lo = Float::with_val_round(prec, v, Round::Down).0;
        let hi = Float::with_val_round(prec, v, Round::Up).0;
        Interval { lo, hi }
    }

    /// Enclosure of `ln q` for `q > 0`.
    pub fn ln_rational(q: &BigRational, prec: u32) -> Self {
        assert!(q.is_positive(), "logarithm of a non-positive rational");
        let base = Interval::from_rational(q, prec);
        base.ln()
    }

    pub fn ln_u64(v: u64, prec: u32) -> Self {
        assert!(v > 0, "logarithm of zero");
        Interval::from_u64(v, prec).ln()
    }

    /// Enclosure of `ln x` over the interval; requires `lo > 0`.
    pub fn ln(&self) -> Self {
        assert!(self.lo.is_sign_positive() && !self.lo.is_zero(), "logarithm of a non-positive interval");
        let mut lo = self.lo.clone();
        lo.ln_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.ln_round(Round::Up);
        Interval { lo, hi }
    }

    pub fn exp(&self) -> Self {
        let mut lo = self.lo.clone();
        lo.exp_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.exp_round(Round::Up);
        Interval { lo, hi }
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec()
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn add(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        Interval {
            lo: Float::with_val_round(p, &self.lo + &o.lo, Round::Down).0,
            hi: Float::with_val_round(p, &self.hi + &o.hi, Round::Up).0,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        Interval {
            lo: Float::with_val_round(p, &self.lo - &o.hi, Round::Down).0,
            hi: Float::with_val_round(p, &self.hi - &o.lo, Round::Up).0,
        }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let p = self.prec().max(o.prec());
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let d = Float::with_val_round(p, a * b, Round::Down).0;
            let u = Float::with_val_round(p, a * b, Round::Up).0;
            lo = Some(match lo {
                Some(c) if c <= d => c,
                _ => d,
            });
            hi = Some(match hi {
                Some(c) if c >= u => c,
                _ => u,
            });
        }
        Interval { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    /// Quotient, or `None` when the divisor straddles zero.
    pub fn checked_div(&self, o: &Interval) -> Option<Interval> {
        if o.contains_zero() {
            return None;
        }
        let p = self.prec().max(o.prec());
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (a, b) in pairs {
            let d = Float::with_val_round(p, a / b, Round::Down).0;
            let u = Float::with_val_round(p, a / b, Round::Up).0;
            lo = Some(match lo {
                Some(c) if c <= d => c,
                _ => d,
            });
            hi = Some(match hi {
                Some(c) if c >= u => c,
                _ => u,
            });
        }
        Some(Interval { lo: lo.unwrap(), hi: hi.unwrap() })
    }

    pub fn scale_rational(&self, q: &BigRational) -> Interval {
        self.mul(&Interval::from_rational(q, self.prec()))
    }

    pub fn powi(&self, k: u32) -> Interval {
        let mut acc = Interval::from_u64(1, self.prec());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo <= x && self.hi >= x
    }

    /// Certified ordering, `None` when the intervals overlap.
    pub fn certified_cmp(&self, o: &Interval) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && o.lo == o.hi && self.lo == o.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn mid(&self) -> Float {
        let p = self.prec() + 2;
        let sum = Float::with_val(p, &self.lo + &self.hi);
        sum / 2u32
    }

    pub fn mid_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64_round(Round::Down)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64_round(Round::Up)
    }

    pub fn width(&self) -> Float {
        Float::with_val_round(self.prec(), &self.hi - &self.lo, Round::Up).0
    }

    pub fn lower_rational(&self) -> BigRational {
        float_to_rational(&self.lo)
    }

    pub fn upper_rational(&self) -> BigRational {
        float_to_rational(&self.hi)
    }

    /// Midpoint rendered with `digits` significant decimal digits.
    pub fn to_decimal(&self, digits: u32) -> String {
        format_float(&self.mid(), digits)
    }
}

fn float_to_rational(f: &Float) -> BigRational {
    let r = f.to_rational().expect("interval endpoints are finite");
    let (num, den) = r.into_numer_denom();
    BigRational::new(from_rug_int(&num), from_rug_int(&den))
}

/// Plain (non-scientific) decimal rendering with `digits` significant digits.
pub fn format_float(x: &Float, digits: u32) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let (neg, s, exp) = x.to_sign_string_exp(10, Some(digits.max(1) as usize));
    let exp = exp.unwrap_or(0);
    let body = if exp <= 0 {
        format!("0.{}{}", "0".repeat((-exp) as usize), s)
    } else if exp as usize >= s.len() {
        format!("{}{}", s, "0".repeat(exp as usize - s.len()))
    } else {
        let (a, b) = s.split_at(exp as usize);
        format!("{a}.{b}")
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn factor(mut v: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= v {
        let mut e = 0;
        while v % p == 0 {
            v /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if v > 1 {
        out.push((v, 1));
    }
    out
}

/// Monomial in the variables `log p`: sorted `(prime, power)` pairs.
type Monomial = Vec<(u64, u32)>;

/// Polynomial with rational coefficients in the logarithms of primes.
///
/// Logarithms of positive rationals expand into this basis, so two quantities
/// built from logs of integers are formally equal exactly when their
/// polynomials coincide.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LogPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl LogPoly {
    pub fn zero() -> Self {
        LogPoly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = LogPoly::zero();
        p.push(Vec::new(), c);
        p
    }

    pub fn one() -> Self {
        LogPoly::constant(BigRational::one())
    }

    /// `log v` for a positive integer `v`.
    pub fn log_int(v: u64) -> Self {
        assert!(v > 0, "logarithm of zero");
        let mut p = LogPoly::zero();
        for (prime, e) in factor(v) {
            p.push(vec![(prime, 1)], BigRational::from_integer(e.into()));
        }
        p
    }

    /// `log(a / b)` for positive integers.
    pub fn log_ratio(a: u64, b: u64) -> Self {
        LogPoly::log_int(a).sub(&LogPoly::log_int(b))
    }

    fn push(&mut self, mono: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(mono).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &LogPoly) -> LogPoly {
        let mut out = self.clone();
        for (mono, c) in &o.terms {
            out.push(mono.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &LogPoly) -> LogPoly {
        self.add(&o.scale(&-BigRational::one()))
    }

    pub fn scale(&self, q: &BigRational) -> LogPoly {
        let mut out = LogPoly::zero();
        if q.is_zero() {
            return out;
        }
        for (mono, c) in &self.terms {
            out.terms.insert(mono.clone(), c * q);
        }
        out
    }

    pub fn mul(&self, o: &LogPoly) -> LogPoly {
        let mut out = LogPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let mut merged: BTreeMap<u64, u32> = ma.iter().copied().collect();
                for &(p, e) in mb {
                    *merged.entry(p).or_insert(0) += e;
                }
                out.push(merged.into_iter().collect(), ca * cb);
            }
        }
        out
    }

    pub fn eval(&self, prec: u32) -> Interval {
        let mut logs: BTreeMap<u64, Interval> = BTreeMap::new();
        let mut acc = Interval::from_u64(0, prec);
        for (mono, c) in &self.terms {
            let mut term = Interval::from_rational(c, prec);
            for &(p, e) in mono {
                let l = logs.entry(p).or_insert_with(|| Interval::ln_u64(p, prec)).clone();
                term = term.mul(&l.powi(e));
            }
            acc = acc.add(&term);
        }
        acc
    }

    fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next()
    }
}

impl fmt::Display for LogPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (mono, c)) in self.terms.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            let vars: Vec<String> = mono
                .iter()
                .map(|&(p, e)| if e == 1 { format!("log({p})") } else { format!("log({p})^{e}") })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", crate::scalar::fmt_ratio(c))?;
            } else if c.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "({})*{}", crate::scalar::fmt_ratio(c), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Quotient of two [`LogPoly`] values with a formally nonzero denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogRatio {
    pub num: LogPoly,
    pub den: LogPoly,
}

impl LogRatio {
    pub fn new(num: LogPoly, den: LogPoly) -> Self {
        assert!(!den.is_zero(), "formally zero denominator");
        LogRatio { num, den }
    }

    pub fn zero() -> Self {
        LogRatio::new(LogPoly::zero(), LogPoly::one())
    }

    pub fn rational(q: BigRational) -> Self {
        LogRatio::new(LogPoly::constant(q), LogPoly::one())
    }

    pub fn is_formally_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn mul(&self, o: &LogRatio) -> LogRatio {
        LogRatio::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn scale(&self, q: &BigRational) -> LogRatio {
        LogRatio::new(self.num.scale(q), self.den.clone())
    }

    /// Enclosure at `prec` bits, refining until the denominator excludes zero.
    pub fn eval(&self, prec: u32) -> Interval {
        let mut p = prec;
        loop {
            let den = self.den.eval(p);
            if let Some(v) = self.num.eval(p).checked_div(&den) {
                return v;
            }
            assert!(p < 1 << 16, "denominator not separated from zero");
            p *= 2;
        }
    }

    pub fn formally_equals(&self, o: &LogRatio) -> bool {
        self.num.mul(&o.den) == o.num.mul(&self.den)
    }

    /// The exact rational value when numerator and denominator are proportional.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num.is_zero() {
            return Some(BigRational::zero());
        }
        let (mono, cd) = self.den.leading()?;
        let cn = self.num.terms.get(mono)?;
        let c = cn / cd;
        (self.den.scale(&c) == self.num).then_some(c)
    }
}

impl fmt::Display for LogRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Three-valued outcome of an equality test between exact forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "value", rename_all = "kebab-case")]
pub enum Decision {
    Equal,
    NotEqual,
    Indeterminate { bits: u32 },
}

/// Decides `a == b`: formal identity first, then interval separation at
/// `bits` and `4 * bits`.
pub fn decide_equal(a: &LogRatio, b: &LogRatio, bits: u32) -> Decision {
    if a.formally_equals(b) {
        return Decision::Equal;
    }
    let mut p = bits;
    for _ in 0..2 {
        let diff = a.eval(p).sub(&b.eval(p));
        if !diff.contains_zero() {
            return Decision::NotEqual;
        }
        p *= 4;
    }
    Decision::Indeterminate { bits: p / 4 }
}

/// Decides `a == 0` for a single polynomial.
pub fn decide_zero(a: &LogPoly, bits: u32) -> Decision {
    decide_equal(&LogRatio::new(a.clone(), LogPoly::one()), &LogRatio::zero(), bits)
}
