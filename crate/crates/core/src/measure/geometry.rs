//! Rectangle and open-ball predicates.
//!
//! [`Ball`] works over any [`Scalar`]; [`LatticeBall`] answers the same
//! questions for grid-aligned rectangles using integer arithmetic only, which
//! is what the oracle's inner loop runs on.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::coding::Point;
use crate::scalar::{ipow, Scalar};

/// Closed axis-parallel rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rect<T> {
    pub x0: T,
    pub y0: T,
    pub x1: T,
    pub y1: T,
}

impl<T: Scalar> Rect<T> {
    pub fn corners(&self) -> [Point<T>; 4] {
        [
            Point::new(self.x0.clone(), self.y0.clone()),
            Point::new(self.x1.clone(), self.y0.clone()),
            Point::new(self.x0.clone(), self.y1.clone()),
            Point::new(self.x1.clone(), self.y1.clone()),
        ]
    }

    pub fn contains(&self, p: &Point<T>) -> bool {
        self.x0 <= p.x && p.x <= self.x1 && self.y0 <= p.y && p.y <= self.y1
    }
}

fn clamp_gap<T: Scalar>(c: &T, lo: &T, hi: &T) -> T {
    if c < lo {
        lo.clone() - c.clone()
    } else if c > hi {
        c.clone() - hi.clone()
    } else {
        T::zero()
    }
}

fn far_gap<T: Scalar>(c: &T, lo: &T, hi: &T) -> T {
    let a = (c.clone() - lo.clone()).abs();
    let b = (hi.clone() - c.clone()).abs();
    if a > b {
        a
    } else {
        b
    }
}

/// Open Euclidean ball.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball<T> {
    pub center: Point<T>,
    pub radius: T,
}

/// Position of a closed rectangle relative to an open ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Disjoint,
    Inside,
    Straddles,
}

impl<T: Scalar> Ball<T> {
    pub fn new(center: Point<T>, radius: T) -> Self {
        Ball { center, radius }
    }

    pub fn contains_point(&self, p: &Point<T>) -> bool {
        let dx = p.x.clone() - self.center.x.clone();
        let dy = p.y.clone() - self.center.y.clone();
        dx.clone() * dx + dy.clone() * dy < self.radius.clone() * self.radius.clone()
    }

    /// The closed rectangle meets the open ball.
    pub fn meets(&self, r: &Rect<T>) -> bool {
        let dx = clamp_gap(&self.center.x, &r.x0, &r.x1);
        let dy = clamp_gap(&self.center.y, &r.y0, &r.y1);
        dx.clone() * dx + dy.clone() * dy < self.radius.clone() * self.radius.clone()
    }

    /// The closed rectangle lies inside the open ball.
    pub fn contains(&self, r: &Rect<T>) -> bool {
        let dx = far_gap(&self.center.x, &r.x0, &r.x1);
        let dy = far_gap(&self.center.y, &r.y0, &r.y1);
        dx.clone() * dx + dy.clone() * dy < self.radius.clone() * self.radius.clone()
    }

    pub fn relation(&self, r: &Rect<T>) -> Relation {
        if !self.meets(r) {
            Relation::Disjoint
        } else if self.contains(r) {
            Relation::Inside
        } else {
            Relation::Straddles
        }
    }

    /// `other` is a subset of `self` (both open).
    pub fn contains_ball(&self, other: &Ball<T>) -> bool {
        if other.radius > self.radius {
            return false;
        }
        let dx = other.center.x.clone() - self.center.x.clone();
        let dy = other.center.y.clone() - self.center.y.clone();
        let slack = self.radius.clone() - other.radius.clone();
        dx.clone() * dx + dy.clone() * dy <= slack.clone() * slack
    }
}

/// Per-rank scaled copy of a ball with rational center and radius.
///
/// At rank `k` a cell is `[X/n^k, (X+1)/n^k] x [Y/m^l, (Y+1)/m^l]`; scaling x
/// by `n^k q_x` and y by `m^l q_y` turns every coordinate into an integer.
#[derive(Clone, Debug)]
pub struct LatticeFrame {
    qx: BigInt,
    qy: BigInt,
    cx: BigInt,
    cy: BigInt,
    a: BigInt,
    b: BigInt,
    c: BigInt,
}

#[derive(Clone, Debug)]
pub struct LatticeBall {
    px: BigInt,
    qx: BigInt,
    py: BigInt,
    qy: BigInt,
    rn: BigInt,
    rd: BigInt,
}

impl LatticeBall {
    pub fn new(center: &Point<BigRational>, radius: &BigRational) -> Self {
        LatticeBall {
            px: center.x.numer().clone(),
            qx: center.x.denom().clone(),
            py: center.y.numer().clone(),
            qy: center.y.denom().clone(),
            rn: radius.numer().clone(),
            rd: radius.denom().clone(),
        }
    }

    /// Frame for cells of width `n^{-k}` and height `m^{-l}`.
    pub fn frame(&self, n: u32, k: u64, m: u32, l: u64) -> LatticeFrame {
        let nk = ipow(n.into(), k);
        let ml = ipow(m.into(), l);
        let sx = &nk * &self.qx;
        let sy = &ml * &self.qy;
        let rs = &self.rn * &sx * &sy;
        LatticeFrame {
            qx: self.qx.clone(),
            qy: self.qy.clone(),
            cx: &self.px * &nk,
            cy: &self.py * &ml,
            a: &sy * &self.rd,
            b: &sx * &self.rd,
            c: &rs * &rs,
        }
    }
}

fn gaps(c: &BigInt, cell: &BigUint, q: &BigInt) -> (BigInt, BigInt) {
    let lo = BigInt::from(cell.clone()) * q;
    let hi = &lo + q;
    let near = if c < &lo {
        &lo - c
    } else if c > &hi {
        c - &hi
    } else {
        BigInt::zero()
    };
    let a = c - &lo;
    let b = &hi - c;
    let far = if a.magnitude() > b.magnitude() { a } else { b };
    (near, far)
}

impl LatticeFrame {
    /// Relation of the closed cell `(X, Y)` to the open ball.
    pub fn relation(&self, x: &BigUint, y: &BigUint) -> Relation {
        let (nx, fx) = gaps(&self.cx, x, &self.qx);
        let (ny, fy) = gaps(&self.cy, y, &self.qy);
        let near = {
            let u = &nx * &self.a;
            let v = &ny * &self.b;
            &u * &u + &v * &v
        };
        if near >= self.c {
            return Relation::Disjoint;
        }
        let far = {
            let u = &fx * &self.a;
            let v = &fy * &self.b;
            &u * &u + &v * &v
        };
        if far < self.c {
            Relation::Inside
        } else {
            Relation::Straddles
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn generic_predicates() {
        let b = Ball::new(Point::new(0.5, 0.5), 0.25);
        let inside = Rect { x0: 0.45, y0: 0.45, x1: 0.55, y1: 0.55 };
        let far = Rect { x0: 0.9, y0: 0.9, x1: 1.0, y1: 1.0 };
        let edge = Rect { x0: 0.7, y0: 0.4, x1: 0.8, y1: 0.6 };
        assert_eq!(b.relation(&inside), Relation::Inside);
        assert_eq!(b.relation(&far), Relation::Disjoint);
        assert_eq!(b.relation(&edge), Relation::Straddles);
    }

    #[test]
    fn open_ball_boundary_is_excluded() {
        let b = Ball::new(Point::new(q(0, 1), q(0, 1)), q(1, 2));
        let touching = Rect { x0: q(1, 2), y0: q(0, 1), x1: q(1, 1), y1: q(1, 4) };
        assert_eq!(b.relation(&touching), Relation::Disjoint);
        let corner_on_circle = Rect { x0: q(0, 1), y0: q(0, 1), x1: q(1, 2), y1: q(0, 1) };
        assert_eq!(b.relation(&corner_on_circle), Relation::Straddles);
    }

    #[test]
    fn lattice_matches_generic() {
        let center = Point::new(q(3, 7), q(2, 5));
        let radius = q(1, 9);
        let ball = Ball::new(center.clone(), radius.clone());
        let lat = LatticeBall::new(&center, &radius);
        let (n, m, k, l) = (4u32, 3u32, 2u64, 3u64);
        let frame = lat.frame(n, k, m, l);
        for xi in 0..16u32 {
            for yi in 0..27u32 {
                let rect = Rect {
                    x0: q(xi.into(), 16),
                    x1: q((xi + 1).into(), 16),
                    y0: q(yi.into(), 27),
                    y1: q((yi + 1).into(), 27),
                };
                assert_eq!(frame.relation(&BigUint::from(xi), &BigUint::from(yi)), ball.relation(&rect));
            }
        }
    }

    #[test]
    fn ball_inclusion() {
        let big = Ball::new(Point::new(q(0, 1), q(0, 1)), q(1, 1));
        let small = Ball::new(Point::new(q(1, 2), q(0, 1)), q(1, 2));
        assert!(big.contains_ball(&small));
        let shifted = Ball::new(Point::new(q(3, 5), q(0, 1)), q(1, 2));
        assert!(!big.contains_ball(&shifted));
    }
}
