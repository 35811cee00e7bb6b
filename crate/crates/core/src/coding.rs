//! Eventually periodic codings, the coding map and random digit streams.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carpet::{Carpet, Digit};
use crate::error::CodingError;
use crate::scalar::{fmt_ratio, ipow, parse_ratio, Scalar};

/// A point of the plane over a generic scalar.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }
}

impl<T: Scalar> Point<T> {
    pub fn from_exact(p: &Point<BigRational>) -> Self {
        Point::new(T::from_rational(&p.x), T::from_rational(&p.y))
    }
}

impl Point<BigRational> {
    /// Parses `"p/q,p/q"`.
    pub fn parse(s: &str) -> Result<Self, CodingError> {
        let (a, b) = s.split_once(',').ok_or_else(|| CodingError::BadPoint(s.to_string()))?;
        let x = parse_ratio(a).ok_or_else(|| CodingError::BadPoint(s.to_string()))?;
        let y = parse_ratio(b).ok_or_else(|| CodingError::BadPoint(s.to_string()))?;
        Ok(Point::new(x, y))
    }
}

impl fmt::Display for Point<BigRational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", fmt_ratio(&self.x), fmt_ratio(&self.y))
    }
}

/// An infinite word `prefix period period ...` in canonical form: the period
/// is primitive and the prefix is as short as possible.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Coding {
    prefix: Vec<Digit>,
    period: Vec<Digit>,
}

#[derive(Deserialize)]
struct RawCoding {
    #[serde(default)]
    prefix: Vec<Digit>,
    period: Vec<Digit>,
}

impl<'de> Deserialize<'de> for Coding {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawCoding::deserialize(d)?;
        Coding::new(raw.prefix, raw.period).map_err(serde::de::Error::custom)
    }
}

/// Canonical `(prefix, period)` for any eventually periodic sequence.
pub(crate) fn canonical<T: PartialEq + Clone>(mut prefix: Vec<T>, period: Vec<T>) -> (Vec<T>, Vec<T>) {
    let len = period.len();
    let root = (1..=len)
        .find(|&p| len % p == 0 && (p..len).all(|t| period[t] == period[t - p]))
        .unwrap_or(len);
    let mut period: Vec<T> = period[..root].to_vec();
    while let Some(last) = prefix.last() {
        if *last != period[root - 1] {
            break;
        }
        prefix.pop();
        period.rotate_right(1);
    }
    (prefix, period)
}

impl Coding {
    pub fn new(prefix: Vec<Digit>, period: Vec<Digit>) -> Result<Coding, CodingError> {
        if period.is_empty() {
            return Err(CodingError::EmptyPeriod);
        }
        let (prefix, period) = canonical(prefix, period);
        Ok(Coding { prefix, period })
    }

    pub fn periodic(period: Vec<Digit>) -> Result<Coding, CodingError> {
        Coding::new(Vec::new(), period)
    }

    /// Builds a coding from `(i, j)` pairs.
    pub fn from_pairs(prefix: &[(u32, u32)], period: &[(u32, u32)]) -> Result<Coding, CodingError> {
        Coding::new(prefix.iter().map(|&p| p.into()).collect(), period.iter().map(|&p| p.into()).collect())
    }

    pub fn prefix(&self) -> &[Digit] {
        &self.prefix
    }

    pub fn period(&self) -> &[Digit] {
        &self.period
    }

    /// Checks every letter against the carpet's digit set.
    pub fn validate(&self, carpet: &Carpet) -> Result<(), CodingError> {
        match self.prefix.iter().chain(&self.period).find(|&&d| !carpet.contains(d)) {
            Some(d) => Err(CodingError::ForeignDigit { i: d.i, j: d.j }),
            None => Ok(()),
        }
    }

    /// The `t`-th digit, `t >= 1`.
    pub fn digit(&self, t: u64) -> Digit {
        assert!(t >= 1, "positions start at 1");
        let idx = (t - 1) as usize;
        if idx < self.prefix.len() {
            self.prefix[idx]
        } else {
            self.period[(idx - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn x(&self, t: u64) -> u32 {
        self.digit(t).i
    }

    pub fn y(&self, t: u64) -> u32 {
        self.digit(t).j
    }

    /// The first `len` digits.
    pub fn take(&self, len: usize) -> Vec<Digit> {
        (1..=len as u64).map(|t| self.digit(t)).collect()
    }

    /// The y-projection as an eventually periodic word.
    pub fn y_word(&self) -> PeriodicWord {
        PeriodicWord::new(self.prefix.iter().map(|d| d.j).collect(), self.period.iter().map(|d| d.j).collect())
    }

    pub fn x_word(&self) -> PeriodicWord {
        PeriodicWord::new(self.prefix.iter().map(|d| d.i).collect(), self.period.iter().map(|d| d.i).collect())
    }

    /// Image under the vertical flip `(i, j) -> (i, m - 1 - j)`.
    pub fn flip_vertical(&self, m: u32) -> Coding {
        let f = |d: &Digit| Digit::new(d.i, m - 1 - d.j);
        Coding::new(self.prefix.iter().map(f).collect(), self.period.iter().map(f).collect())
            .expect("period stays nonempty")
    }

    /// The coding map: exact coordinates by geometric-series summation.
    pub fn pi(&self, carpet: &Carpet) -> Point<BigRational> {
        Point::new(self.x_word().value(carpet.n()), self.y_word().value(carpet.m()))
    }

    pub fn omega_class(&self, carpet: &Carpet) -> OmegaClass {
        let top = carpet.m() - 1;
        if self.period.iter().all(|d| d.j == 0) {
            OmegaClass::InOmega0
        } else if self.period.iter().all(|d| d.j == top) {
            OmegaClass::InOmegaM1
        } else {
            OmegaClass::Neither
        }
    }
}

impl fmt::Display for Coding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.prefix {
            write!(f, "{d}")?;
        }
        write!(f, "[")?;
        for d in &self.period {
            write!(f, "{d}")?;
        }
        write!(f, "]^inf")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaClass {
    /// y-sequence ends with `0^inf`.
    InOmega0,
    /// y-sequence ends with `(m-1)^inf`.
    InOmegaM1,
    Neither,
}

/// Eventually periodic word over small integers, positions starting at 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeriodicWord {
    pub prefix: Vec<u32>,
    pub period: Vec<u32>,
}

impl PeriodicWord {
    pub fn new(prefix: Vec<u32>, period: Vec<u32>) -> Self {
        assert!(!period.is_empty(), "period must be nonempty");
        let (prefix, period) = canonical(prefix, period);
        PeriodicWord { prefix, period }
    }

    pub fn at(&self, t: u64) -> u32 {
        let idx = (t - 1) as usize;
        if idx < self.prefix.len() {
            self.prefix[idx]
        } else {
            self.period[(idx - self.prefix.len()) % self.period.len()]
        }
    }

    /// `sum_t w_t base^{-t}` as an exact rational.
    pub fn value(&self, base: u32) -> BigRational {
        let b = BigInt::from(base);
        let mut pre = BigInt::zero();
        for &d in &self.prefix {
            pre = pre * &b + d;
        }
        let mut per = BigInt::zero();
        for &d in &self.period {
            per = per * &b + d;
        }
        let scale = ipow(base.into(), self.prefix.len() as u64);
        let cycle = ipow(base.into(), self.period.len() as u64) - 1;
        BigRational::new(pre, scale.clone()) + BigRational::new(per, scale * cycle)
    }
}

/// All base-`base` expansions of `q` in `[0, 1]` (one or two).
pub fn expansions(q: &BigRational, base: u32) -> Vec<PeriodicWord> {
    assert!(!q.is_negative() && *q <= BigRational::one(), "expansion outside [0, 1]");
    if q.is_one() {
        return vec![PeriodicWord::new(Vec::new(), vec![base - 1])];
    }
    let den = q.denom().clone();
    let mut num = q.numer().clone();
    let b = BigInt::from(base);
    let mut seen: std::collections::HashMap<BigInt, usize> = std::collections::HashMap::new();
    let mut digits: Vec<u32> = Vec::new();
    let start = loop {
        if let Some(&at) = seen.get(&num) {
            break at;
        }
        seen.insert(num.clone(), digits.len());
        let scaled = &num * &b;
        let (d, r) = scaled.div_rem(&den);
        digits.push(d.to_u32().expect("digit below base"));
        num = r;
    };
    let greedy = PeriodicWord::new(digits[..start].to_vec(), digits[start..].to_vec());
    let mut out = vec![greedy.clone()];
    if greedy.period == [0] && !q.is_zero() {
        let mut alt = greedy.prefix.clone();
        let last = alt.last_mut().expect("nonzero value has a nonzero prefix digit");
        *last -= 1;
        out.push(PeriodicWord::new(alt, vec![base - 1]));
    }
    out
}

fn lcm(a: usize, b: usize) -> usize {
    a / a.gcd(&b) * b
}

/// Every coding over the carpet whose image is `p` (at most four).
pub fn codings_of_point(carpet: &Carpet, p: &Point<BigRational>) -> Vec<Coding> {
    let zero = BigRational::zero();
    let one = BigRational::one();
    if p.x < zero || p.x > one || p.y < zero || p.y > one {
        return Vec::new();
    }
    let mut out = Vec::new();
    for xe in expansions(&p.x, carpet.n()) {
        for ye in expansions(&p.y, carpet.m()) {
            let pre = xe.prefix.len().max(ye.prefix.len());
            let per = lcm(xe.period.len(), ye.period.len());
            let word: Vec<Digit> = (1..=(pre + per) as u64).map(|t| Digit::new(xe.at(t), ye.at(t))).collect();
            if word.iter().all(|&d| carpet.contains(d)) {
                let c = Coding::new(word[..pre].to_vec(), word[pre..].to_vec()).expect("nonempty period");
                out.push(c);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// All codings sharing the image of `c`.
pub fn all_codings(carpet: &Carpet, c: &Coding) -> Vec<Coding> {
    codings_of_point(carpet, &c.pi(carpet))
}

/// Whether the point coded by `c` has two codings with different y-sequences.
pub fn in_ve(carpet: &Carpet, c: &Coding) -> bool {
    let all = all_codings(carpet, c);
    let first = all[0].y_word();
    all.iter().any(|o| o.y_word() != first)
}

/// Deterministic i.i.d. uniform digits.
///
/// The generator is ChaCha8 seeded through `seed_from_u64`; each draw is a
/// uniform index into the row-major digit list.
#[derive(Clone, Debug)]
pub struct DigitStream<'a> {
    digits: &'a [Digit],
    rng: ChaCha8Rng,
}

impl<'a> DigitStream<'a> {
    pub fn new(carpet: &'a Carpet, seed: u64) -> Self {
        DigitStream { digits: carpet.digits(), rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Independent stream `stream` of the generator seeded by `seed`.
    pub fn with_stream(carpet: &'a Carpet, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        DigitStream { digits: carpet.digits(), rng }
    }
}

impl Iterator for DigitStream<'_> {
    type Item = Digit;

    fn next(&mut self) -> Option<Digit> {
        Some(self.digits[self.rng.gen_range(0..self.digits.len())])
    }
}

pub fn random_coding(carpet: &Carpet, seed: u64, length: usize) -> Result<Vec<Digit>, CodingError> {
    if length == 0 {
        return Err(CodingError::ZeroLength);
    }
    Ok(DigitStream::new(carpet, seed).take(length).collect())
}

/// Evaluates the finite word `digits` as a point, in any scalar type.
pub fn word_point<T: Scalar>(carpet: &Carpet, digits: &[Digit]) -> Point<T> {
    let (n, m) = (T::from_count(carpet.n().into()), T::from_count(carpet.m().into()));
    let (mut x, mut y) = (T::zero(), T::zero());
    for d in digits.iter().rev() {
        x = (x + T::from_count(d.i.into())) / n.clone();
        y = (y + T::from_count(d.j.into())) / m.clone();
    }
    Point::new(x, y)
}
