//! Explicit codings with prescribed reverse run lengths.
//!
//! With checkpoints `p_1 < p_2 < ...`, `p_{k+1} = ell(p_k)`, the extremal
//! coding is
//!
//! ```text
//! (i0,0)^(p_1 - 1) (i,j+1)  prod_k [ (i,j+1)^(ell(p_k) - p_k - floor(t p_k)) (i0,0)^floor(t p_k) ]
//! ```
//!
//! so that `beta(p_k) = floor(t p_k)`. Ending the head with `(i,j+1)` keeps
//! that identity when a block has no `(i,j+1)` letters. The `gamma` variant
//! uses blocks `(i,j+1) (i0,0)^(ell(p_k) - p_k - 1)`, giving
//! `beta(p_k) = ell(p_k) - p_k - 1`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::carpet::{Carpet, Digit, DoublingWitness};
use crate::error::IndexError;
use crate::hp::{bits_for_digits, LogPoly, LogRatio};
use crate::scalar::{fmt_ratio, upow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveVariant {
    Extremal,
    GammaAttaining,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurveCoding {
    pub variant: CurveVariant,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub t_prime: Option<BigRational>,
    pub p1: u64,
    /// Checkpoint ranks `p_k <= depth`.
    pub checkpoints: Vec<u64>,
    pub bottom: Digit,
    pub upper: Digit,
    /// The first `ell(depth)` digits of the coding.
    #[serde(skip)]
    pub digits: Vec<Digit>,
}

fn ser_opt_ratio<S: serde::Serializer>(q: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&fmt_ratio(q)),
        None => s.serialize_none(),
    }
}

impl CurveCoding {
    pub fn y_letters(&self) -> impl Iterator<Item = u32> + '_ {
        self.digits.iter().map(|d| d.j)
    }

    /// The predicted `beta(p_k)` at checkpoint `p_k`.
    pub fn predicted_beta(&self, carpet: &Carpet, p: u64) -> u64 {
        match (&self.t_prime, self.variant) {
            (Some(t), CurveVariant::Extremal) => floor_mul(t, p),
            _ => carpet.ell(p) - p - 1,
        }
    }
}

fn floor_mul(t: &BigRational, p: u64) -> u64 {
    let v = t.numer() * BigInt::from(p);
    v.div_floor(t.denom()).to_u64().expect("nonnegative")
}

/// Smallest integer `p > sigma / (1 - sigma)`, i.e. the least `p >= 1` with
/// `n^p > m^(p+1)`.
pub fn first_checkpoint(carpet: &Carpet) -> u64 {
    let (n, m) = (u64::from(carpet.n()), u64::from(carpet.m()));
    (1..).find(|&p| upow(n, p) > upow(m, p + 1)).expect("n > m")
}

/// `(i0, 0)` and `(i, j+1)` with `a_j a_{j+1} > 0` (`j` the first such row).
fn anchor_digits(carpet: &Carpet) -> Result<(Digit, Digit), IndexError> {
    let nd = carpet.non_doubling();
    let DoublingWitness::AdjacentRows { j } = nd.witness else {
        return Err(IndexError::NotApplicable("carpet is of doubling type".into()));
    };
    if !carpet.is_normalized() {
        return Err(IndexError::NotApplicable("carpet must satisfy a_0 > a_(m-1); flip it first".into()));
    }
    let first_in = |row: u32| *carpet.digits().iter().find(|d| d.j == row).expect("occupied row");
    Ok((first_in(0), first_in(j + 1)))
}

fn checkpoints(carpet: &Carpet, p1: u64, depth: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = p1;
    while p <= depth {
        out.push(p);
        p = carpet.ell(p);
    }
    out
}

fn build(carpet: &Carpet, p1: u64, depth: u64, bottom: Digit, upper: Digit, block: impl Fn(u64) -> (u64, u64, bool)) -> Vec<Digit> {
    let target = carpet.ell(depth.max(p1)) as usize;
    let mut digits = Vec::with_capacity(target + 1);
    let mut p = p1;
    let (_, _, upper_head) = block(p1);
    if upper_head {
        digits.extend(std::iter::repeat(bottom).take((p1 - 1) as usize));
        digits.push(upper);
    } else {
        digits.extend(std::iter::repeat(bottom).take(p1 as usize));
    }
    while digits.len() < target {
        let (ups, zeros, _) = block(p);
        digits.extend(std::iter::repeat(upper).take(ups as usize));
        digits.extend(std::iter::repeat(bottom).take(zeros as usize));
        p = carpet.ell(p);
    }
    digits.truncate(carpet.ell(depth) as usize);
    digits
}

/// The extremal coding for `t'` in `[0, 1/sigma - 1]`, to rank `depth`.
pub fn curve_coding(carpet: &Carpet, t_prime: &BigRational, depth: u64, p1: Option<u64>) -> Result<CurveCoding, IndexError> {
    let (bottom, upper) = anchor_digits(carpet)?;
    check_t(carpet, t_prime)?;
    let p1 = p1.unwrap_or_else(|| first_checkpoint(carpet));
    if p1 < first_checkpoint(carpet) {
        return Err(IndexError::DepthTooSmall { min: first_checkpoint(carpet), got: p1 });
    }
    let digits = build(carpet, p1, depth, bottom, upper, |p| {
        let zeros = floor_mul(t_prime, p);
        (carpet.ell(p) - p - zeros, zeros, true)
    });
    Ok(CurveCoding {
        variant: CurveVariant::Extremal,
        t_prime: Some(t_prime.clone()),
        p1,
        checkpoints: checkpoints(carpet, p1, depth),
        bottom,
        upper,
        digits,
    })
}

/// The adjusted coding with `beta(p_k) = ell(p_k) - p_k - 1` at every checkpoint.
pub fn gamma_coding(carpet: &Carpet, depth: u64, p1: Option<u64>) -> Result<CurveCoding, IndexError> {
    let (bottom, upper) = anchor_digits(carpet)?;
    let p1 = p1.unwrap_or_else(|| first_checkpoint(carpet));
    if p1 < first_checkpoint(carpet) {
        return Err(IndexError::DepthTooSmall { min: first_checkpoint(carpet), got: p1 });
    }
    let digits = build(carpet, p1, depth, bottom, upper, |p| (1, carpet.ell(p) - p - 1, false));
    Ok(CurveCoding {
        variant: CurveVariant::GammaAttaining,
        t_prime: None,
        p1,
        checkpoints: checkpoints(carpet, p1, depth),
        bottom,
        upper,
        digits,
    })
}

/// Rejects `t'` outside `[0, 1/sigma - 1]`.
fn check_t(carpet: &Carpet, t: &BigRational) -> Result<(), IndexError> {
    let bad = || IndexError::BadT(fmt_ratio(t));
    if *t < BigRational::zero() {
        return Err(bad());
    }
    let top_ok = match carpet.sigma_ratio() {
        Some((u, v)) => *t <= BigRational::new(BigInt::from(v - u), BigInt::from(u)),
        None => {
            let (ln, lm) = (LogPoly::log_int(carpet.n().into()), LogPoly::log_int(carpet.m().into()));
            let bound = LogRatio::new(ln.sub(&lm), lm).eval(bits_for_digits(40));
            *t <= bound.lower_rational()
        }
    };
    if top_ok {
        Ok(())
    } else {
        Err(bad())
    }
}
