//! Approximate squares, their exact measures and the certified ball oracle.

pub mod geometry;
pub mod oracle;
pub mod sampling;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::carpet::{Carpet, Digit};
use crate::coding::{Coding, Point};
use crate::error::MeasureError;
use crate::hp::Interval;
use crate::scalar::{fmt_ratio, ipow, upow, Scalar};

pub use geometry::{Ball, LatticeBall, Rect, Relation};
pub use oracle::{
    ball_measure_bounds, big_u, check_lemmas, xi_k, CylinderChecker, LemmaCheck, LemmaReport, OracleConfig, UBounds,
};
pub use sampling::{monte_carlo_ball, BallEstimate};

/// Rank at which the measure representation switches to log space.
pub const LOG_SWITCH_RANK: u64 = 64;

/// Rank-`k` approximate square: `k` x-digits and `ell(k)` y-digits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ApproxSquare {
    k: u64,
    x: Vec<u32>,
    y: Vec<u32>,
}

impl ApproxSquare {
    /// Checks lengths and that the square meets the carpet.
    pub fn new(carpet: &Carpet, x: Vec<u32>, y: Vec<u32>) -> Result<Self, MeasureError> {
        let k = x.len() as u64;
        let ell = carpet.ell(k.max(1)) * u64::from(k > 0);
        if y.len() as u64 != ell {
            return Err(MeasureError::LengthMismatch { x: x.len(), y: y.len(), k: k as u32, ell });
        }
        let paired_ok = x.iter().zip(&y).all(|(&i, &j)| carpet.contains(Digit::new(i, j)));
        let free_ok = y[x.len()..].iter().all(|&j| j < carpet.m() && carpet.a(j) > 0);
        if !(paired_ok && free_ok) {
            return Err(MeasureError::EmptySquare);
        }
        Ok(ApproxSquare { k, x, y })
    }

    /// The rank-`k` square containing the point coded by `c`.
    pub fn of_coding(carpet: &Carpet, c: &Coding, k: u64) -> Self {
        let ell = carpet.ell(k);
        ApproxSquare { k, x: (1..=k).map(|t| c.x(t)).collect(), y: (1..=ell).map(|t| c.y(t)).collect() }
    }

    pub fn rank(&self) -> u64 {
        self.k
    }

    pub fn ell(&self) -> u64 {
        self.y.len() as u64
    }

    pub fn x_digits(&self) -> &[u32] {
        &self.x
    }

    pub fn y_digits(&self) -> &[u32] {
        &self.y
    }

    /// Column index `X` with `x0 = X / n^k`.
    pub fn column(&self, carpet: &Carpet) -> BigUint {
        self.x.iter().fold(BigUint::zero(), |acc, &d| acc * carpet.n() + d)
    }

    /// Row index `Y` with `y0 = Y / m^ell`.
    pub fn row(&self, carpet: &Carpet) -> BigUint {
        self.y.iter().fold(BigUint::zero(), |acc, &d| acc * carpet.m() + d)
    }

    pub fn rect<T: Scalar>(&self, carpet: &Carpet) -> Rect<T> {
        let wx = ipow(carpet.n().into(), self.k);
        let wy = ipow(carpet.m().into(), self.ell());
        let x = BigInt::from(self.column(carpet));
        let y = BigInt::from(self.row(carpet));
        Rect {
            x0: T::from_ratio(&x, &wx),
            x1: T::from_ratio(&(&x + 1), &wx),
            y0: T::from_ratio(&y, &wy),
            y1: T::from_ratio(&(&y + 1), &wy),
        }
    }

    /// `prod_{j=k+1}^{ell} a_{y_j}`, the numerator of the measure over `N^ell`.
    pub fn numerator(&self, carpet: &Carpet) -> BigUint {
        self.y[self.k as usize..].iter().fold(BigUint::one(), |acc, &j| acc * carpet.a(j))
    }

    /// Exact measure by the product formula.
    pub fn mu(&self, carpet: &Carpet) -> BigRational {
        BigRational::new(self.numerator(carpet).into(), ipow(carpet.big_n().into(), self.ell()))
    }

    /// Measure in any scalar type, multiplied out factor by factor.
    pub fn mu_as<T: Scalar>(&self, carpet: &Carpet) -> T {
        let big_n = T::from_count(carpet.big_n().into());
        let mut acc = T::one();
        for &j in &self.y[self.k as usize..] {
            acc = acc * T::from_count(carpet.a(j).into()) / big_n.clone();
        }
        for _ in 0..self.k {
            acc = acc / big_n.clone();
        }
        acc
    }

    /// Enclosure of `ln mu` at `bits` precision.
    pub fn ln_mu(&self, carpet: &Carpet, bits: u32) -> Interval {
        let mut counts = vec![0u64; carpet.m() as usize];
        for &j in &self.y[self.k as usize..] {
            counts[j as usize] += 1;
        }
        let mut acc = Interval::ln_u64(carpet.big_n().into(), bits).scale_rational(&BigRational::from_integer(
            BigInt::from(self.ell()),
        ));
        acc = acc.neg();
        for (j, &c) in counts.iter().enumerate() {
            if c > 0 {
                let term = Interval::ln_u64(carpet.a(j as u32).into(), bits)
                    .scale_rational(&BigRational::from_integer(BigInt::from(c)));
                acc = acc.add(&term);
            }
        }
        acc
    }

    /// Exact below the switch rank, log-space above it.
    pub fn measure(&self, carpet: &Carpet, bits: u32, switch: u64) -> MeasureValue {
        if self.ell() > switch {
            MeasureValue::Log(self.ln_mu(carpet, bits))
        } else {
            MeasureValue::Exact(self.mu(carpet))
        }
    }

    /// A coding of a point inside the square: the square's digits, then the
    /// lowest digit in each remaining y-row, then `tail`.
    pub fn coding_with_tail(&self, carpet: &Carpet, tail_prefix: &[Digit], tail_period: &[Digit]) -> Coding {
        let mut prefix: Vec<Digit> = self.x.iter().zip(&self.y).map(|(&i, &j)| Digit::new(i, j)).collect();
        for &j in &self.y[self.k as usize..] {
            let i = carpet.digits().iter().find(|d| d.j == j).expect("row is occupied").i;
            prefix.push(Digit::new(i, j));
        }
        prefix.extend_from_slice(tail_prefix);
        Coding::new(prefix, tail_period.to_vec()).expect("tail period is nonempty")
    }
}

/// A measure either as an exact rational or as a log-space enclosure.
#[derive(Clone, Debug)]
pub enum MeasureValue {
    Exact(BigRational),
    Log(Interval),
}

impl MeasureValue {
    pub fn ln_f64(&self) -> f64 {
        match self {
            MeasureValue::Exact(q) => {
                let (n, d) = (q.numer(), q.denom());
                ln_big(n) - ln_big(d)
            }
            MeasureValue::Log(iv) => iv.mid_f64(),
        }
    }
}

/// `ln` of a positive big integer without overflow.
pub fn ln_big(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits < 1000 {
        return v.to_f64().unwrap().ln();
    }
    let shift = bits - 900;
    let top: BigInt = v >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Certified enclosure `[lower, upper]` of a measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureInterval {
    pub lower: BigRational,
    pub upper: BigRational,
}

impl MeasureInterval {
    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lower <= q && q <= &self.upper
    }

    pub fn is_within(&self, other: &MeasureInterval) -> bool {
        other.lower <= self.lower && self.upper <= other.upper
    }
}

impl Serialize for MeasureInterval {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MeasureInterval", 2)?;
        st.serialize_field("lower", &fmt_ratio(&self.lower))?;
        st.serialize_field("upper", &fmt_ratio(&self.upper))?;
        st.end()
    }
}

/// `k(r)`: the integer `k >= 0` with `n^{-(k+2)} < r <= n^{-(k+1)}`.
pub fn k_of_r(carpet: &Carpet, r: &BigRational) -> Result<u64, MeasureError> {
    let n = BigInt::from(carpet.n());
    if *r <= BigRational::zero() || r.clone() * BigRational::from_integer(n.clone()) > BigRational::one() {
        return Err(MeasureError::OutOfRange(fmt_ratio(r)));
    }
    let mut k = 0u64;
    let mut scale = BigRational::from_integer(&n * &n);
    while r * &scale <= BigRational::one() {
        k += 1;
        scale *= BigRational::from_integer(n.clone());
    }
    Ok(k)
}

/// `k0` with `n^{-(k0+1)} < rho <= n^{-k0}`.
pub fn k_zero(carpet: &Carpet, rho: &BigRational) -> Result<u64, MeasureError> {
    if *rho <= BigRational::zero() || *rho >= BigRational::one() {
        return Err(MeasureError::BadRho(fmt_ratio(rho)));
    }
    let n = BigRational::from_integer(carpet.n().into());
    let mut k0 = 0u64;
    let mut scale = n.clone();
    while rho * &scale <= BigRational::one() {
        k0 += 1;
        scale *= &n;
    }
    Ok(k0)
}

/// Grid cell in the traversal: rank `k`, column `X`, row `Y` and the y-digits
/// at positions `k+1..=ell(k)` that still await their x partners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Cell {
    pub k: u64,
    pub ell: u64,
    pub x: BigUint,
    pub y: BigUint,
    pub pending: Vec<u32>,
}

/// Row contents and occupied rows, precomputed once per traversal.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub n: u32,
    pub m: u32,
    pub rows: Vec<Vec<u32>>,
    pub occupied: Vec<u32>,
    pub a: Vec<u32>,
}

impl Layout {
    pub fn new(carpet: &Carpet) -> Self {
        let m = carpet.m();
        let mut rows = vec![Vec::new(); m as usize];
        for d in carpet.digits() {
            rows[d.j as usize].push(d.i);
        }
        Layout {
            n: carpet.n(),
            m,
            occupied: (0..m).filter(|&j| carpet.a(j) > 0).collect(),
            a: carpet.fiber().0.clone(),
            rows,
        }
    }
}

impl Cell {
    pub fn root() -> Self {
        Cell { k: 0, ell: 0, x: BigUint::zero(), y: BigUint::zero(), pending: Vec::new() }
    }

    pub fn from_square(carpet: &Carpet, q: &ApproxSquare) -> Self {
        Cell {
            k: q.k,
            ell: q.ell(),
            x: q.column(carpet),
            y: q.row(carpet),
            pending: q.y[q.k as usize..].to_vec(),
        }
    }

    pub fn numerator(&self, layout: &Layout) -> BigUint {
        self.pending.iter().fold(BigUint::one(), |acc, &j| acc * layout.a[j as usize])
    }

    pub fn to_square(&self, carpet: &Carpet) -> ApproxSquare {
        ApproxSquare {
            k: self.k,
            x: digits_of(&self.x, carpet.n(), self.k as usize),
            y: digits_of(&self.y, carpet.m(), self.ell as usize),
        }
    }

    pub fn children(&self, carpet: &Carpet, layout: &Layout) -> Vec<Cell> {
        let k1 = self.k + 1;
        let l1 = carpet.ell(k1);
        let mut heads: Vec<(u32, Option<u32>)> = Vec::new();
        let (rest, free): (&[u32], u64) = if self.ell >= k1 {
            let y = self.pending[0];
            heads.extend(layout.rows[y as usize].iter().map(|&i| (i, None)));
            (&self.pending[1..], l1 - self.ell)
        } else {
            for (j, row) in layout.rows.iter().enumerate() {
                heads.extend(row.iter().map(|&i| (i, Some(j as u32))));
            }
            (&[][..], l1 - self.ell - 1)
        };
        let tails = free_words(&layout.occupied, free as usize);
        let mut out = Vec::with_capacity(heads.len() * tails.len());
        let shift = upow(layout.m.into(), l1 - self.ell);
        for &(i, joint) in &heads {
            let x = &self.x * layout.n + i;
            for tail in &tails {
                let mut y = BigUint::zero();
                if let Some(j) = joint {
                    y = y * layout.m + j;
                }
                for &j in tail {
                    y = y * layout.m + j;
                }
                let mut pending = rest.to_vec();
                pending.extend_from_slice(tail);
                out.push(Cell { k: k1, ell: l1, x: x.clone(), y: &self.y * &shift + y, pending });
            }
        }
        out
    }
}

fn free_words(letters: &[u32], len: usize) -> Vec<Vec<u32>> {
    let mut words = vec![Vec::new()];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                letters.iter().map(move |&l| {
                    let mut v = w.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    words
}

/// Base-`b` digits of `v`, most significant first, padded to `len`.
pub(crate) fn digits_of(v: &BigUint, b: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0u32; len];
    let mut rest = v.clone();
    for slot in out.iter_mut().rev() {
        *slot = (&rest % b).to_u32().unwrap();
        rest /= b;
    }
    out
}

/// Sum of the measures of all rank-`k` approximate squares.
pub fn partition_sum(carpet: &Carpet, k: u64) -> BigRational {
    use rayon::prelude::*;
    let layout = Layout::new(carpet);
    let target = carpet.ell(k.max(1)) * u64::from(k > 0);
    fn walk(c: &Cell, carpet: &Carpet, layout: &Layout, k: u64) -> BigUint {
        if c.k == k {
            return c.numerator(layout);
        }
        c.children(carpet, layout).iter().map(|ch| walk(ch, carpet, layout, k)).sum()
    }
    let root = Cell::root();
    let total: BigUint = if k == 0 {
        BigUint::one()
    } else {
        root.children(carpet, &layout).par_iter().map(|c| walk(c, carpet, &layout, k)).sum()
    };
    BigRational::new(total.into(), ipow(carpet.big_n().into(), target))
}

/// Point coded by the witness `square (i1,0) (i2,m-1)^inf`, or
/// the mirrored tail when `top_first`.
pub(crate) fn row_boundary_point(carpet: &Carpet, q: &ApproxSquare, top_first: bool) -> Option<Point<BigRational>> {
    let bottom = carpet.digits().iter().find(|d| d.j == 0).copied();
    let top = carpet.digits().iter().find(|d| d.j == carpet.m() - 1).copied();
    let (b, t) = (bottom?, top?);
    let c = if top_first { q.coding_with_tail(carpet, &[t], &[b]) } else { q.coding_with_tail(carpet, &[b], &[t]) };
    Some(c.pi(carpet))
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

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn product_formula_examples() {
        let c = fig1a();
        let sq = ApproxSquare::new(&c, vec![0, 1], vec![0, 0, 0]).unwrap();
        assert_eq!(sq.mu(&c), q(3, 2197));
        let one = ApproxSquare::new(&c, vec![7], vec![1]).unwrap();
        assert_eq!(one.mu(&c), q(1, 13));
        assert_eq!(one.mu_as::<f64>(&c), 1.0 / 13.0);
        assert_eq!(ApproxSquare::new(&c, vec![7], vec![2]), Err(MeasureError::EmptySquare));
        assert!(matches!(ApproxSquare::new(&c, vec![7], vec![1, 1]), Err(MeasureError::LengthMismatch { .. })));
    }

    #[test]
    fn k_of_r_examples() {
        let c = fig1a();
        assert_eq!(k_of_r(&c, &q(1, 100)), Ok(1));
        assert_eq!(k_of_r(&c, &q(1, 64)), Ok(1));
        assert_eq!(k_of_r(&c, &q(1, 65)), Ok(1));
        assert_eq!(k_of_r(&c, &q(1, 8)), Ok(0));
        assert!(k_of_r(&c, &q(1, 7)).is_err());
        assert_eq!(k_zero(&c, &q(1, 600)), Ok(3));
        assert_eq!(k_zero(&c, &q(1, 512)), Ok(3));
    }

    #[test]
    fn children_partition_measure() {
        let c = fig1a();
        let layout = Layout::new(&c);
        let root = Cell::root();
        let mut level = vec![root];
        for k in 1..=3u64 {
            level = level.iter().flat_map(|cell| cell.children(&c, &layout)).collect();
            let total: BigRational = level.iter().map(|cell| cell.to_square(&c).mu(&c)).sum();
            assert_eq!(total, BigRational::one(), "rank {k}");
            for cell in &level {
                let sq = cell.to_square(&c);
                assert_eq!(Cell::from_square(&c, &sq), *cell);
                assert!(ApproxSquare::new(&c, sq.x_digits().to_vec(), sq.y_digits().to_vec()).is_ok());
            }
        }
    }

    #[test]
    fn log_measure_agrees() {
        let c = fig1a();
        let coding = Coding::from_pairs(&[(7, 1), (2, 2)], &[(1, 0), (3, 1)]).unwrap();
        for k in 1..30 {
            let sq = ApproxSquare::of_coding(&c, &coding, k);
            let exact = sq.mu(&c);
            let ln = sq.ln_mu(&c, 128);
            let reference = MeasureValue::Exact(exact).ln_f64();
            assert!(ln.contains_f64(reference) || (ln.mid_f64() - reference).abs() < 1e-12);
        }
    }
}
