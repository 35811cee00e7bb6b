//! Carpet definition, fiber sequence, the rank map `ell`, the non-doubling
//! criterion and the closed-form scalar invariants.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use rug::ops::Pow;
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::error::CarpetError;
use crate::hp::{bits_for_digits, Interval, LogPoly, LogRatio};

/// Largest grid (`n * m` cells) accepted by validation.
pub const MAX_CELLS: u64 = 1 << 20;

/// One cell `(i, j)` of the `n x m` grid: column `i`, row `j`.
///
/// Ordered row-major: by `j`, then by `i`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct Digit {
    pub i: u32,
    pub j: u32,
}

impl Digit {
    pub const fn new(i: u32, j: u32) -> Self {
        Digit { i, j }
    }
}

impl From<(u32, u32)> for Digit {
    fn from((i, j): (u32, u32)) -> Self {
        Digit { i, j }
    }
}

impl From<Digit> for (u32, u32) {
    fn from(d: Digit) -> Self {
        (d.i, d.j)
    }
}

impl Ord for Digit {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.j, self.i).cmp(&(other.j, other.i))
    }
}

impl PartialOrd for Digit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Raw, unvalidated carpet description as read from JSON.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarpetSpec {
    pub n: u32,
    pub m: u32,
    pub digits: Vec<Digit>,
}

impl CarpetSpec {
    pub fn validate(self) -> Result<Carpet, CarpetError> {
        Carpet::new(self.n, self.m, self.digits)
    }
}

/// Per-row digit counts `a_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiberSequence(pub Vec<u32>);

impl FiberSequence {
    /// Counts digits per row; works on any digit list, validated or not.
    pub fn from_digits(m: u32, digits: &[Digit]) -> Self {
        let mut a = vec![0u32; m as usize];
        for d in digits {
            if let Some(slot) = a.get_mut(d.j as usize) {
                *slot += 1;
            }
        }
        FiberSequence(a)
    }

    pub fn get(&self, j: u32) -> u32 {
        self.0[j as usize]
    }

    pub fn rows(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn first(&self) -> u32 {
        self.0[0]
    }

    pub fn last(&self) -> u32 {
        *self.0.last().unwrap()
    }

    pub fn occupied_rows(&self) -> u32 {
        self.0.iter().filter(|&&a| a > 0).count() as u32
    }

    pub fn is_permutation_of(&self, other: &FiberSequence) -> bool {
        let mut a = self.0.clone();
        let mut b = other.0.clone();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// Distinct nonzero values in decreasing order with their multiplicities.
    pub fn distinct_nonzero(&self) -> Vec<(u32, u32)> {
        let mut vals: Vec<u32> = self.0.iter().copied().filter(|&a| a > 0).collect();
        vals.sort_unstable_by(|a, b| b.cmp(a));
        let mut out: Vec<(u32, u32)> = Vec::new();
        for v in vals {
            match out.last_mut() {
                Some((w, c)) if *w == v => *c += 1,
                _ => out.push((v, 1)),
            }
        }
        out
    }

    pub fn reversed(&self) -> FiberSequence {
        FiberSequence(self.0.iter().rev().copied().collect())
    }
}

/// Which clause of the non-doubling criterion decided the outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "kebab-case")]
pub enum DoublingWitness {
    /// `a_0 * a_{m-1} = 0`.
    EmptyEndRow,
    /// `a_0 = a_{m-1}`.
    EqualEndRows,
    /// No `j` with `a_j * a_{j+1} > 0`.
    NoAdjacentRows,
    /// All clauses hold; `j` is the first index with `a_j * a_{j+1} > 0`.
    AdjacentRows { j: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonDoubling {
    pub holds: bool,
    pub witness: DoublingWitness,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum EllRule {
    /// `sigma = u / v` in lowest terms.
    Rational { u: u64, v: u64 },
    /// Directed f64 bounds on `log n / log m`.
    Irrational { lo: f64, hi: f64 },
}

/// A validated Bedford-McMullen carpet.
#[derive(Clone, Debug)]
pub struct Carpet {
    n: u32,
    m: u32,
    digits: Vec<Digit>,
    member: Vec<bool>,
    fiber: FiberSequence,
    rule: EllRule,
    common_base: Option<(u32, u32, u32)>,
}

impl PartialEq for Carpet {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.m == other.m && self.digits == other.digits
    }
}

impl Eq for Carpet {}

/// Writes `v = r^e` with `e` maximal.
fn perfect_power(v: u32) -> (u32, u32) {
    let mut best = (v, 1);
    for e in 2..=31u32 {
        let r = (f64::from(v)).powf(1.0 / f64::from(e)).round() as u64;
        for cand in [r.saturating_sub(1), r, r + 1] {
            if cand >= 2 && cand.checked_pow(e) == Some(u64::from(v)) {
                best = (cand as u32, e);
            }
        }
    }
    best
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Carpet {
    pub fn new(n: u32, m: u32, digits: impl IntoIterator<Item = Digit>) -> Result<Carpet, CarpetError> {
        if m < 2 || n <= m {
            return Err(CarpetError::BadBases { n, m });
        }
        if u64::from(n) * u64::from(m) > MAX_CELLS {
            return Err(CarpetError::TooLarge { n, m });
        }
        let mut member = vec![false; (n * m) as usize];
        let mut list = Vec::new();
        for d in digits {
            if d.i >= n || d.j >= m {
                return Err(CarpetError::RangeError { i: d.i, j: d.j, n, m });
            }
            let idx = (d.j * n + d.i) as usize;
            if member[idx] {
                return Err(CarpetError::DuplicateDigit { i: d.i, j: d.j });
            }
            member[idx] = true;
            list.push(d);
        }
        if list.len() < 2 {
            return Err(CarpetError::TooFewDigits(list.len()));
        }
        list.sort();
        let fiber = FiberSequence::from_digits(m, &list);

        let (rm, em) = perfect_power(m);
        let (rn, en) = perfect_power(n);
        let (rule, common_base) = if rm == rn {
            let g = gcd(u64::from(em), u64::from(en));
            let (u, v) = (u64::from(em) / g, u64::from(en) / g);
            let base = rm.pow(g as u32);
            (EllRule::Rational { u, v }, Some((base, u as u32, v as u32)))
        } else {
            let bits = 160;
            let ratio = Interval::ln_u64(u64::from(n), bits)
                .checked_div(&Interval::ln_u64(u64::from(m), bits))
                .expect("log m > 0");
            (EllRule::Irrational { lo: ratio.lo_f64(), hi: ratio.hi_f64() }, None)
        };
        Ok(Carpet { n, m, digits: list, member, fiber, rule, common_base })
    }

    pub fn from_pairs(n: u32, m: u32, pairs: &[(u32, u32)]) -> Result<Carpet, CarpetError> {
        Carpet::new(n, m, pairs.iter().map(|&p| Digit::from(p)))
    }

    pub fn spec(&self) -> CarpetSpec {
        CarpetSpec { n: self.n, m: self.m, digits: self.digits.clone() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Number of digits `N`.
    pub fn big_n(&self) -> u32 {
        self.digits.len() as u32
    }

    /// Digits in row-major order.
    pub fn digits(&self) -> &[Digit] {
        &self.digits
    }

    pub fn contains(&self, d: Digit) -> bool {
        d.i < self.n && d.j < self.m && self.member[(d.j * self.n + d.i) as usize]
    }

    pub fn fiber(&self) -> &FiberSequence {
        &self.fiber
    }

    pub fn a(&self, j: u32) -> u32 {
        self.fiber.get(j)
    }

    /// `y` is in `SE + 1`: `y >= 1` and row `y - 1` is occupied.
    pub fn in_se_plus(&self, y: u32) -> bool {
        y >= 1 && self.a(y - 1) > 0
    }

    /// `y` is in `SE - 1`: `y <= m - 2` and row `y + 1` is occupied.
    pub fn in_se_minus(&self, y: u32) -> bool {
        y + 1 < self.m && self.a(y + 1) > 0
    }

    /// `sigma = u / v` when `log m / log n` is rational.
    pub fn sigma_ratio(&self) -> Option<(u64, u64)> {
        match self.rule {
            EllRule::Rational { u, v } => Some((u, v)),
            EllRule::Irrational { .. } => None,
        }
    }

    /// Common base `b` with `m = b^u`, `n = b^v`, when it exists.
    pub fn common_base(&self) -> Option<(u32, u32, u32)> {
        self.common_base
    }

    pub fn sigma_f64(&self) -> f64 {
        f64::from(self.m).ln() / f64::from(self.n).ln()
    }

    pub fn sigma_form(&self) -> LogRatio {
        LogRatio::new(LogPoly::log_int(self.m.into()), LogPoly::log_int(self.n.into()))
    }

    /// `ell(k)`: the unique integer with `m^ell <= n^k < m^(ell+1)`.
    pub fn ell(&self, k: u64) -> u64 {
        match self.rule {
            EllRule::Rational { u, v } => ((u128::from(k) * u128::from(v)) / u128::from(u)) as u64,
            EllRule::Irrational { lo, hi } => {
                let kf = k as f64;
                let a = (kf * lo * (1.0 - 4.0 * f64::EPSILON)).floor();
                let b = (kf * hi * (1.0 + 4.0 * f64::EPSILON)).floor();
                if a == b && kf < 1e15 {
                    a as u64
                } else {
                    self.ell_exact(k, a.max(0.0) as u64, b as u64 + 1)
                }
            }
        }
    }

    fn ell_exact(&self, k: u64, lo: u64, hi: u64) -> u64 {
        let nk = Integer::from(self.n).pow(k as u32);
        (lo..=hi)
            .rev()
            .find(|&c| Integer::from(self.m).pow(c as u32) <= nk)
            .expect("ell lies in the bracket")
    }

    /// Lemma-style test: `a_0 a_{m-1} > 0`, `a_0 != a_{m-1}`, some `a_j a_{j+1} > 0`.
    pub fn non_doubling(&self) -> NonDoubling {
        let (a0, top) = (self.fiber.first(), self.fiber.last());
        let witness = if a0 == 0 || top == 0 {
            DoublingWitness::EmptyEndRow
        } else if a0 == top {
            DoublingWitness::EqualEndRows
        } else {
            match (0..self.m - 1).find(|&j| self.a(j) > 0 && self.a(j + 1) > 0) {
                Some(j) => DoublingWitness::AdjacentRows { j },
                None => DoublingWitness::NoAdjacentRows,
            }
        };
        NonDoubling { holds: matches!(witness, DoublingWitness::AdjacentRows { .. }), witness }
    }

    pub fn is_non_doubling(&self) -> bool {
        self.non_doubling().holds
    }

    pub fn is_normalized(&self) -> bool {
        self.fiber.first() > self.fiber.last()
    }

    /// Mirror image under `(i, j) -> (i, m - 1 - j)`.
    pub fn flip_vertical(&self) -> Carpet {
        let m = self.m;
        Carpet::new(self.n, m, self.digits.iter().map(|d| Digit::new(d.i, m - 1 - d.j)))
            .expect("a flip of a valid carpet is valid")
    }

    /// Returns the orientation with `a_0 > a_{m-1}` and whether a flip happened.
    pub fn normalize_orientation(&self) -> Result<(Carpet, bool), CarpetError> {
        let (a0, top) = (self.fiber.first(), self.fiber.last());
        match a0.cmp(&top) {
            Ordering::Greater => Ok((self.clone(), false)),
            Ordering::Less => Ok((self.flip_vertical(), true)),
            Ordering::Equal => Err(CarpetError::NotApplicable(format!(
                "end rows have equal counts a_0 = a_(m-1) = {a0}"
            ))),
        }
    }

    /// `H`: columns holding digits in two vertically adjacent rows.
    pub fn set_h(&self) -> Vec<u32> {
        (0..self.n)
            .filter(|&i| (0..self.m - 1).any(|j| self.contains(Digit::new(i, j)) && self.contains(Digit::new(i, j + 1))))
            .collect()
    }

    /// `I`: columns holding digits in both the bottom and the top row.
    pub fn set_i(&self) -> Vec<u32> {
        (0..self.n)
            .filter(|&i| self.contains(Digit::new(i, 0)) && self.contains(Digit::new(i, self.m - 1)))
            .collect()
    }

    fn require_normalized(&self) -> Result<(), CarpetError> {
        if !self.is_non_doubling() {
            return Err(CarpetError::NotApplicable("carpet is of doubling type".into()));
        }
        if !self.is_normalized() {
            return Err(CarpetError::NotApplicable("carpet must satisfy a_0 > a_(m-1)".into()));
        }
        Ok(())
    }

    /// `log(a_0 / a_{m-1})`.
    pub fn log_end_ratio(&self) -> LogPoly {
        LogPoly::log_ratio(self.fiber.first().into(), self.fiber.last().into())
    }

    /// `delta_max = (1/sigma - 1) log(a_0/a_{m-1}) / log n`.
    pub fn delta_max_form(&self) -> Result<LogRatio, CarpetError> {
        self.require_normalized()?;
        let (ln, lm) = (LogPoly::log_int(self.n.into()), LogPoly::log_int(self.m.into()));
        Ok(LogRatio::new(ln.sub(&lm).mul(&self.log_end_ratio()), lm.mul(&ln)))
    }

    /// `Delta_aver = log(a_0/a_{m-1}) / log(N/a_0)`.
    pub fn delta_aver_form(&self) -> Result<LogRatio, CarpetError> {
        self.require_normalized()?;
        let den = LogPoly::log_ratio(self.big_n().into(), self.fiber.first().into());
        Ok(LogRatio::new(self.log_end_ratio(), den))
    }

    /// `gamma_max = (log N - (1-sigma) log a_{m-1}) / (log N - (1-sigma) log a_0)`.
    pub fn gamma_max_form(&self) -> Result<LogRatio, CarpetError> {
        self.require_normalized()?;
        let (ln, lm) = (LogPoly::log_int(self.n.into()), LogPoly::log_int(self.m.into()));
        let l_big = LogPoly::log_int(self.big_n().into());
        let gap = ln.sub(&lm);
        let num = ln.mul(&l_big).sub(&gap.mul(&LogPoly::log_int(self.fiber.last().into())));
        let den = ln.mul(&l_big).sub(&gap.mul(&LogPoly::log_int(self.fiber.first().into())));
        Ok(LogRatio::new(num, den))
    }

    /// `C_0 = n N^(1 + 1/sigma)` as an outward-rounded enclosure.
    pub fn c0(&self, bits: u32) -> Interval {
        let ln_n = Interval::ln_u64(self.n.into(), bits);
        let ln_m = Interval::ln_u64(self.m.into(), bits);
        let ln_big = Interval::ln_u64(self.big_n().into(), bits);
        let inv_sigma = ln_n.checked_div(&ln_m).expect("log m > 0");
        let one = Interval::from_u64(1, bits);
        let ln_c0 = ln_n.add(&ln_big.mul(&one.add(&inv_sigma)));
        ln_c0.exp()
    }

    /// Closed-form invariants of a normalized non-doubling carpet.
    pub fn invariants(&self, digits: u32) -> Result<Invariants, CarpetError> {
        let bits = bits_for_digits(digits);
        let delta_max = HpValue::new(self.delta_max_form()?, bits);
        let delta_aver = HpValue::new(self.delta_aver_form()?, bits);
        let gamma_max = HpValue::new(self.gamma_max_form()?, bits);
        Ok(Invariants {
            delta_max,
            delta_aver,
            gamma_max,
            dim_ve: crate::classify::dim_ve(self, digits),
            set_h: self.set_h(),
            set_i: self.set_i(),
        })
    }
}

impl Serialize for Carpet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.spec().serialize(s)
    }
}

/// Exact form plus a certified enclosure at the requested precision.
#[derive(Clone, Debug)]
pub struct HpValue {
    pub exact: LogRatio,
    pub interval: Interval,
}

impl HpValue {
    pub fn new(exact: LogRatio, bits: u32) -> Self {
        let interval = exact.eval(bits);
        HpValue { exact, interval }
    }

    pub fn rational(&self) -> Option<BigRational> {
        self.exact.as_rational()
    }

    pub fn to_f64(&self) -> f64 {
        self.interval.mid_f64()
    }

    pub fn decimal(&self, digits: u32) -> String {
        self.interval.to_decimal(digits)
    }
}

/// How `V_E` was classified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VeKind {
    /// `H` nonempty and `#I >= 2`: dimension `log #I / log n`.
    Formula,
    Countable,
    Empty,
}

#[derive(Clone, Debug)]
pub struct DimVe {
    pub kind: VeKind,
    pub value: HpValue,
}

#[derive(Clone, Debug)]
pub struct Invariants {
    pub delta_max: HpValue,
    pub delta_aver: HpValue,
    pub gamma_max: HpValue,
    pub dim_ve: DimVe,
    pub set_h: Vec<u32>,
    pub set_i: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1a() -> Carpet {
        Carpet::from_pairs(
            8,
            4,
            &[(0, 0), (1, 0), (7, 0), (3, 1), (4, 1), (6, 1), (7, 1), (2, 2), (4, 2), (5, 2), (6, 2), (1, 3), (2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn validation_errors() {
        assert_eq!(Carpet::from_pairs(4, 4, &[(0, 0), (1, 1)]), Err(CarpetError::BadBases { n: 4, m: 4 }));
        assert_eq!(Carpet::from_pairs(3, 1, &[(0, 0), (1, 0)]), Err(CarpetError::BadBases { n: 3, m: 1 }));
        assert_eq!(
            Carpet::from_pairs(8, 4, &[(8, 0), (1, 1)]),
            Err(CarpetError::RangeError { i: 8, j: 0, n: 8, m: 4 })
        );
        assert_eq!(Carpet::from_pairs(8, 4, &[(1, 1), (1, 1)]), Err(CarpetError::DuplicateDigit { i: 1, j: 1 }));
        assert_eq!(Carpet::from_pairs(8, 4, &[(1, 1)]), Err(CarpetError::TooFewDigits(1)));
    }

    #[test]
    fn digits_sorted_row_major() {
        let c = Carpet::from_pairs(3, 2, &[(2, 1), (0, 1), (1, 0)]).unwrap();
        assert_eq!(c.digits(), &[Digit::new(1, 0), Digit::new(0, 1), Digit::new(2, 1)]);
    }

    #[test]
    fn fibers() {
        assert_eq!(fig1a().fiber().0, vec![3, 4, 4, 2]);
        assert_eq!(FiberSequence::from_digits(2, &[Digit::new(0, 0)]).0, vec![1, 0]);
        assert_eq!(FiberSequence(vec![3, 4, 4, 2]).distinct_nonzero(), vec![(4, 2), (3, 1), (2, 1)]);
    }

    #[test]
    fn ell_examples() {
        let c = fig1a();
        assert_eq!(c.sigma_ratio(), Some((2, 3)));
        assert_eq!(c.ell(1), 1);
        assert_eq!(c.ell(2), 3);
        assert_eq!(c.ell(5), 7);
    }

    #[test]
    fn ell_irrational_matches_exact() {
        let c = Carpet::from_pairs(5, 3, &[(0, 0), (1, 2)]).unwrap();
        assert!(c.sigma_ratio().is_none());
        for k in 1..300u64 {
            let l = c.ell(k);
            let nk = Integer::from(5).pow(k as u32);
            assert!(Integer::from(3).pow(l as u32) <= nk && nk < Integer::from(3).pow(l as u32 + 1));
        }
    }

    #[test]
    fn non_doubling_and_flip() {
        let c = fig1a();
        assert_eq!(c.non_doubling().witness, DoublingWitness::AdjacentRows { j: 0 });
        let f = Carpet::from_pairs(4, 3, &[(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (0, 2), (1, 2), (2, 2)]).unwrap();
        assert_eq!(f.fiber().0, vec![2, 3, 3]);
        let (g, flipped) = f.normalize_orientation().unwrap();
        assert!(flipped);
        assert_eq!(g.fiber().0, vec![3, 3, 2]);
        let eq = Carpet::from_pairs(4, 3, &[(0, 0), (1, 0), (0, 2), (3, 2)]).unwrap();
        assert!(eq.normalize_orientation().is_err());
    }

    #[test]
    fn c0_encloses() {
        let c = fig1a().c0(128);
        let expect = 8.0 * 13f64.powf(2.5);
        assert!((c.mid_f64() - expect).abs() < 1e-9);
        assert!(c.lo_f64() <= c.hi_f64());
    }
}
