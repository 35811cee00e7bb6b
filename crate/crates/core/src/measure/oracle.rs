//! Brute-force certified bounds on ball measures and on the doubling
//! quotient `U(z; r, rho)`.
//!
//! The lower bound of `U` comes from finitely many candidate sub-ball
//! centers; the upper bound follows the covering chain through the rank
//! `k(r) + k0 + 4` square at the sub-ball center. The two sides are therefore
//! not symmetric in quality.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::geometry::{Ball, LatticeBall, LatticeFrame, Relation};
use super::{digits_of, k_of_r, k_zero, row_boundary_point, ApproxSquare, Cell, Layout, MeasureInterval};
use crate::carpet::Carpet;
use crate::coding::{codings_of_point, Coding, Point};
use crate::error::MeasureError;
use crate::hp::{bits_for_digits, Interval, DEFAULT_DIGITS};
use crate::runlength::beta_parts;
use crate::scalar::{fmt_ratio, ipow, upow};

/// Tuning knobs for [`big_u`]. The effective refinement depth of each ball is
/// `min(K, k + slack)`; every choice keeps the bounds certified.
#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub outer_slack: u64,
    pub inner_slack: u64,
    pub xi_refine: u64,
    pub max_candidates: usize,
    pub digits: u32,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { outer_slack: 4, inner_slack: 3, xi_refine: 4, max_candidates: 6, digits: DEFAULT_DIGITS }
    }
}

struct Traversal<'a> {
    carpet: &'a Carpet,
    layout: Layout,
    frames: Vec<LatticeFrame>,
    depth: u64,
    weights: Vec<BigUint>,
}

impl<'a> Traversal<'a> {
    fn new(carpet: &'a Carpet, center: &Point<BigRational>, radius: &BigRational, depth: u64) -> Self {
        let lat = LatticeBall::new(center, radius);
        let frames = (0..=depth)
            .map(|k| lat.frame(carpet.n(), k, carpet.m(), if k == 0 { 0 } else { carpet.ell(k) }))
            .collect();
        let top = if depth == 0 { 0 } else { carpet.ell(depth) };
        let weights = (0..=top).map(|e| upow(carpet.big_n().into(), e)).collect();
        Traversal { carpet, layout: Layout::new(carpet), frames, depth, weights }
    }

    fn relation(&self, c: &Cell) -> Relation {
        self.frames[c.k as usize].relation(&c.x, &c.y)
    }

    /// `(lower, upper)` numerators over `N^ell(depth)`.
    fn sums(&self, c: &Cell) -> (BigUint, BigUint) {
        let top = self.weights.len() - 1;
        match self.relation(c) {
            Relation::Disjoint => (BigUint::zero(), BigUint::zero()),
            Relation::Inside => {
                let w = c.numerator(&self.layout) * &self.weights[top - c.ell as usize];
                (w.clone(), w)
            }
            Relation::Straddles if c.k == self.depth => {
                (BigUint::zero(), c.numerator(&self.layout) * &self.weights[top - c.ell as usize])
            }
            Relation::Straddles => {
                let mut lo = BigUint::zero();
                let mut hi = BigUint::zero();
                for ch in c.children(self.carpet, &self.layout) {
                    let (a, b) = self.sums(&ch);
                    lo += a;
                    hi += b;
                }
                (lo, hi)
            }
        }
    }

    fn run(&self) -> MeasureInterval {
        let root = Cell::root();
        let mut frontier = vec![root];
        let mut lo = BigUint::zero();
        let mut hi = BigUint::zero();
        let top = self.weights.len() - 1;
        while frontier.len() < 64 && frontier.iter().all(|c| c.k < self.depth) && !frontier.is_empty() {
            let mut next = Vec::new();
            for c in frontier {
                match self.relation(&c) {
                    Relation::Disjoint => {}
                    Relation::Inside => {
                        let w = c.numerator(&self.layout) * &self.weights[top - c.ell as usize];
                        lo += &w;
                        hi += w;
                    }
                    Relation::Straddles => next.extend(c.children(self.carpet, &self.layout)),
                }
            }
            frontier = next;
        }
        let (a, b) = frontier
            .par_iter()
            .map(|c| self.sums(c))
            .reduce(|| (BigUint::zero(), BigUint::zero()), |x, y| (x.0 + y.0, x.1 + y.1));
        lo += a;
        hi += b;
        let den = BigInt::from(self.weights[top].clone());
        MeasureInterval { lower: BigRational::new(lo.into(), den.clone()), upper: BigRational::new(hi.into(), den) }
    }

    /// Some descendant at rank `c.k + extra` meets the ball.
    fn survives(&self, c: &Cell, extra: u64) -> bool {
        match self.relation(c) {
            Relation::Disjoint => false,
            Relation::Inside => true,
            Relation::Straddles if extra == 0 => true,
            Relation::Straddles => c.children(self.carpet, &self.layout).iter().any(|ch| self.survives(ch, extra - 1)),
        }
    }

    /// Cells of rank `depth` that meet the ball.
    fn collect(&self, c: &Cell, out: &mut Vec<Cell>) {
        if self.relation(c) == Relation::Disjoint {
            return;
        }
        if c.k == self.depth {
            out.push(c.clone());
            return;
        }
        for ch in c.children(self.carpet, &self.layout) {
            self.collect(&ch, out);
        }
    }
}

/// Certified `[lower, upper]` for `mu(B_r(z))` from rank-`depth` squares.
pub fn ball_measure_bounds(
    carpet: &Carpet,
    z: &Point<BigRational>,
    r: &BigRational,
    depth: u64,
) -> Result<MeasureInterval, MeasureError> {
    if *r <= BigRational::zero() {
        return Err(MeasureError::OutOfRange(fmt_ratio(r)));
    }
    if let Ok(k) = k_of_r(carpet, r) {
        if depth < k {
            return Err(MeasureError::DepthTooShallow { depth: depth as u32, required: k as u32 });
        }
    }
    Ok(Traversal::new(carpet, z, r, depth).run())
}

/// Rank-`k(r)` squares meeting `B_r(z)`, each kept only if a descendant
/// `refine` ranks deeper still meets the ball.
pub fn xi_k(
    carpet: &Carpet,
    z: &Point<BigRational>,
    r: &BigRational,
    refine: u64,
) -> Result<Vec<ApproxSquare>, MeasureError> {
    let k = k_of_r(carpet, r)?;
    let ell = if k == 0 { 0 } else { carpet.ell(k) };
    let tr = Traversal::new(carpet, z, r, k + refine);
    let span = |c: &BigRational, scale: BigInt| -> Vec<BigUint> {
        let s = BigRational::from_integer(scale.clone());
        let lo = ((c - r) * &s).floor().to_integer().max(BigInt::zero());
        let hi = ((c + r) * &s).floor().to_integer().min(scale - 1);
        let mut out = Vec::new();
        let mut v = lo;
        while v <= hi {
            out.push(v.to_biguint().unwrap());
            v += 1;
        }
        out
    };
    let xs = span(&z.x, ipow(carpet.n().into(), k));
    let ys = span(&z.y, ipow(carpet.m().into(), ell));
    let mut out = Vec::new();
    for x in &xs {
        for y in &ys {
            let xd = digits_of(x, carpet.n(), k as usize);
            let yd = digits_of(y, carpet.m(), ell as usize);
            if let Ok(sq) = ApproxSquare::new(carpet, xd, yd) {
                let cell = Cell::from_square(carpet, &sq);
                if tr.survives(&cell, refine) {
                    out.push(sq);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Certified bounds on `U(z; r, rho)` with the data the lemma checks need.
#[derive(Clone, Debug, Serialize)]
pub struct UBounds {
    #[serde(serialize_with = "ser_ratio")]
    pub lower: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub upper: BigRational,
    pub k_of_r: u64,
    pub k0: u64,
    pub xi: Vec<ApproxSquare>,
    #[serde(serialize_with = "ser_ratio")]
    pub xi_min: BigRational,
    #[serde(serialize_with = "ser_ratio")]
    pub xi_max: BigRational,
    pub outer: MeasureInterval,
    #[serde(serialize_with = "ser_point")]
    pub best_center: Point<BigRational>,
    pub candidates: usize,
}

fn ser_ratio<S: serde::Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fmt_ratio(q))
}

fn ser_point<S: serde::Serializer>(p: &Point<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

/// Candidate sub-ball centers inside `B_{(1-rho) r}(z)`, in a fixed order.
fn candidate_centers(
    carpet: &Carpet,
    z: &Point<BigRational>,
    r: &BigRational,
    rho: &BigRational,
    k: u64,
    xi: &[ApproxSquare],
    cfg: &OracleConfig,
) -> Vec<Point<BigRational>> {
    let inner = Ball::new(z.clone(), (BigRational::one() - rho) * r);
    let admissible = |p: &Point<BigRational>| {
        let dx = &p.x - &z.x;
        let dy = &p.y - &z.y;
        dx.clone() * dx + dy.clone() * dy <= inner.radius.clone() * inner.radius.clone()
    };
    let mut pts: Vec<Point<BigRational>> = Vec::new();
    if !codings_of_point(carpet, z).is_empty() {
        pts.push(z.clone());
    }
    let depth = k + 2;
    let tr = Traversal::new(carpet, z, &inner.radius, depth);
    let mut cells = Vec::new();
    tr.collect(&Cell::root(), &mut cells);
    let mut squares: Vec<(BigUint, ApproxSquare)> =
        cells.iter().map(|c| (c.numerator(&tr.layout), c.to_square(carpet))).collect();
    squares.sort();
    let picks = xi.iter().cloned().chain(squares.into_iter().take(cfg.max_candidates).map(|(_, s)| s));
    for sq in picks {
        for top_first in [false, true] {
            if let Some(p) = row_boundary_point(carpet, &sq, top_first) {
                if admissible(&p) && !pts.contains(&p) {
                    pts.push(p);
                }
            }
        }
        let rep = sq.coding_with_tail(carpet, &[], &[carpet.digits()[0]]).pi(carpet);
        if admissible(&rep) && !pts.contains(&rep) {
            pts.push(rep);
        }
    }
    pts
}

/// Certified bounds on the doubling quotient `U(z; r, rho)` at depth `depth`.
pub fn big_u(
    carpet: &Carpet,
    z: &Point<BigRational>,
    r: &BigRational,
    rho: &BigRational,
    depth: u64,
    cfg: &OracleConfig,
) -> Result<UBounds, MeasureError> {
    let k0 = k_zero(carpet, rho)?;
    let k = k_of_r(carpet, r)?;
    let small = rho * r;
    let ks = k_of_r(carpet, &small)?;
    if depth < ks {
        return Err(MeasureError::DepthTooShallow { depth: depth as u32, required: ks as u32 });
    }
    let outer = Traversal::new(carpet, z, r, depth.min(k + cfg.outer_slack)).run();
    let xi = xi_k(carpet, z, r, cfg.xi_refine)?;
    if xi.is_empty() {
        return Err(MeasureError::OutOfRange(format!("ball of radius {} misses the carpet", fmt_ratio(r))));
    }
    let measures: Vec<BigRational> = xi.iter().map(|q| q.mu(carpet)).collect();
    let xi_min = measures.iter().min().unwrap().clone();
    let xi_max = measures.iter().max().unwrap().clone();

    let bits = bits_for_digits(cfg.digits);
    let c0_up = carpet.c0(bits).upper_rational();
    let upper = &outer.upper * num_traits::pow(c0_up, (k0 + 4) as usize) / &xi_min;

    let centers = candidate_centers(carpet, z, r, rho, k, &xi, cfg);
    let inner_depth = depth.min(ks + cfg.inner_slack);
    let best = centers
        .par_iter()
        .map(|p| (Traversal::new(carpet, p, &small, inner_depth).run().upper, p.clone()))
        .filter(|(u, _)| !u.is_zero())
        .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let (small_upper, best_center) = best.ok_or(MeasureError::NoAdmissibleCenter(depth as u32))?;
    // Any admissible center in E gives a quotient of at least 1.
    let lower = (&outer.lower / small_upper).max(BigRational::one());
    Ok(UBounds {
        lower,
        upper,
        k_of_r: k,
        k0,
        xi,
        xi_min,
        xi_max,
        outer,
        best_center,
        candidates: centers.len(),
    })
}

/// One inequality check: `lhs` against the enclosure `rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaCheck {
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

impl LemmaCheck {
    fn at_most(lhs: &BigRational, rhs: &Interval, digits: u32) -> Self {
        LemmaCheck { lhs: fmt_ratio(lhs), rhs: rhs.to_decimal(digits), pass: *lhs <= rhs.lower_rational() }
    }

    fn at_least(lhs: &BigRational, rhs: &Interval, digits: u32) -> Self {
        LemmaCheck { lhs: fmt_ratio(lhs), rhs: rhs.to_decimal(digits), pass: *lhs >= rhs.upper_rational() }
    }
}

/// Outcome of both sandwich inequalities at one `(z, r, rho)`.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub u: UBounds,
    pub beta: u64,
    pub ratio_upper: LemmaCheck,
    pub ratio_lower: Option<LemmaCheck>,
    pub beta_upper: Option<LemmaCheck>,
    pub beta_lower: Option<LemmaCheck>,
}

impl LemmaReport {
    /// The ratio sandwich (upper and, when evaluated, lower side).
    pub fn ratio_pass(&self) -> bool {
        self.ratio_upper.pass && self.ratio_lower.as_ref().map_or(true, |c| c.pass)
    }

    /// The run-length sandwich; vacuous on carpets it does not cover.
    pub fn beta_pass(&self) -> bool {
        self.beta_upper.as_ref().map_or(true, |c| c.pass) && self.beta_lower.as_ref().map_or(true, |c| c.pass)
    }
}

/// Checks both sandwich inequalities for the point coded by `coding`.
///
/// The lower sides use `U` at the enlarged radii `n^3 r` and `n^6 r`; they
/// are evaluated only when those radii still lie in the range of `k`.
pub fn check_lemmas(
    carpet: &Carpet,
    coding: &Coding,
    r: &BigRational,
    rho: &BigRational,
    depth: u64,
    cfg: &OracleConfig,
) -> Result<LemmaReport, MeasureError> {
    let z = coding.pi(carpet);
    let u = big_u(carpet, &z, r, rho, depth, cfg)?;
    let bits = bits_for_digits(cfg.digits);
    let digits = cfg.digits;
    let k = u.k_of_r;
    let c0 = carpet.c0(bits);
    let c1 = c0.powi((u.k0 + 4) as u32).scale_rational(&BigRational::from_integer(4.into()));
    let ratio = Interval::from_rational(&(&u.xi_max / &u.xi_min), bits);
    let ratio_upper = LemmaCheck::at_most(&u.lower, &c1.mul(&ratio), digits);

    let n = BigRational::from_integer(carpet.n().into());
    let n3 = &n * &n * &n;
    let ratio_lower = if k >= 3 {
        let u3 = big_u(carpet, &z, &(r * &n3), rho, depth - 3, cfg)?;
        let rhs = ratio.checked_div(&c1).expect("C1 > 0");
        Some(LemmaCheck::at_least(&u3.lower, &rhs, digits))
    } else {
        None
    };

    let beta = if k == 0 { 0 } else { beta_parts(carpet, coding, k).beta };
    let (beta_upper, beta_lower) = if carpet.is_non_doubling() && carpet.is_normalized() {
        let a0 = u64::from(carpet.fiber().first());
        let top = u64::from(carpet.fiber().last());
        let q = Interval::from_rational(&BigRational::new(a0.into(), top.into()), bits);
        let ln_q = q.ln();
        let inv_sigma = Interval::ln_u64(carpet.n().into(), bits)
            .checked_div(&Interval::ln_u64(carpet.m().into(), bits))
            .expect("log m > 0");
        let four = Interval::from_u64(4, bits);
        let c2 = c1.mul(&Interval::from_u64(carpet.n().into(), bits)).mul(&ln_q.mul(&four.mul(&inv_sigma)).exp());
        let growth = q.powi(beta as u32);
        let upper = LemmaCheck::at_most(&u.lower, &c2.mul(&growth), digits);
        let ell = if k == 0 { 0 } else { carpet.ell(k) };
        let lower = if k >= 6 && beta + k < ell {
            let n6 = &n3 * &n3;
            let u6 = big_u(carpet, &z, &(r * n6), rho, depth - 6, cfg)?;
            let rhs = growth.checked_div(&c2).expect("C2 > 0");
            Some(LemmaCheck::at_least(&u6.lower, &rhs, digits))
        } else {
            None
        };
        (Some(upper), lower)
    } else {
        (None, None)
    };
    Ok(LemmaReport { u, beta, ratio_upper, ratio_lower, beta_upper, beta_lower })
}

/// Exact check of `mu(Q_{k+1}) / mu(Q_k) >= 1 / C_0` with `C_0` rounded down,
/// so a pass is certain.
#[derive(Clone, Debug)]
pub struct CylinderChecker {
    c0_low: BigRational,
}

impl CylinderChecker {
    pub fn new(carpet: &Carpet, digits: u32) -> Self {
        CylinderChecker { c0_low: carpet.c0(bits_for_digits(digits)).lower_rational() }
    }

    pub fn c0_lower(&self) -> &BigRational {
        &self.c0_low
    }

    pub fn ratio(carpet: &Carpet, coding: &Coding, k: u64) -> BigRational {
        let a = ApproxSquare::of_coding(carpet, coding, k + 1).mu(carpet);
        let b = ApproxSquare::of_coding(carpet, coding, k).mu(carpet);
        a / b
    }

    pub fn check(&self, carpet: &Carpet, coding: &Coding, k: u64) -> bool {
        Self::ratio(carpet, coding, k) * &self.c0_low >= BigRational::one()
    }
}
