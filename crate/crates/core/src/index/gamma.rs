//! The `gamma` index: closed-form lower value and an empirical upper estimate.
//!
//! The estimate at rank `k` is
//!
//! ```text
//! g_k = 1 + beta log(a_0/a_{m-1}) / (ell log N - (ell - k - beta) log a* - beta log a_0)
//! ```
//!
//! with `a* = max a_j`, i.e. the covering bound with the bounded constants
//! dropped. `g_k <= gamma_max` holds for every `k`, and `g_k -> gamma_max`
//! along checkpoints where `beta = ell - k - 1`.

use num_rational::BigRational;
use num_traits::{Float, One};
use serde::Serialize;

use super::delta::{Accumulator, Empirical};
use crate::carpet::{Carpet, HpValue};
use crate::coding::{in_ve, Coding, OmegaClass};
use crate::error::IndexError;
use crate::hp::{bits_for_digits, LogRatio};
use crate::report::{DecimalValue, SCHEMA};
use crate::runlength::BetaSequence;

#[derive(Clone, Debug, Serialize)]
pub struct GammaReport<T = f64> {
    pub schema: String,
    pub gamma_max: DecimalValue,
    /// `max(gamma_max * 1_{V_E}, 1)`.
    pub lower: DecimalValue,
    /// Equal to `lower` for codings in either boundary class.
    pub upper_closed: Option<DecimalValue>,
    pub empirical: Option<Empirical<T>>,
    /// Empirical tail sup clamped to `[1, gamma_max]`.
    pub upper_estimate: Option<T>,
}

/// Empirical `g_k` for `k = 1..=depth` over a y-letter stream.
pub fn gamma_empirical<T: Float, I: Iterator<Item = u32>>(carpet: &Carpet, letters: I, depth: u64) -> Empirical<T> {
    let ln = |v: u32| T::from(f64::from(v).ln()).unwrap();
    let (a0, top) = (carpet.fiber().first(), carpet.fiber().last());
    let a_star = carpet.fiber().0.iter().copied().max().unwrap_or(1);
    let log_ratio = ln(a0) - ln(top);
    let (l_big, l_star, l_a0) = (ln(carpet.big_n()), ln(a_star), ln(a0));
    let mut acc = Accumulator::new(depth);
    for parts in BetaSequence::new(carpet, letters).take(depth as usize) {
        let (k, ell, beta) = (parts.k, parts.ell, parts.beta);
        let t = |v: u64| T::from(v).unwrap();
        let den = t(ell) * l_big - t(ell - k - beta) * l_star - t(beta) * l_a0;
        let g = T::one() + t(beta) * log_ratio / den;
        acc.push(k, beta, g);
    }
    acc.finish()
}

fn clamp<T: Float>(v: T, hi: T) -> T {
    v.max(T::one()).min(hi)
}

/// Closed-form `gamma` data for `coding` plus the empirical estimate to `depth`.
pub fn gamma_bounds<T: Float>(carpet: &Carpet, coding: &Coding, depth: u64, digits: u32) -> Result<GammaReport<T>, IndexError> {
    coding.validate(carpet).map_err(|e| IndexError::NotApplicable(e.to_string()))?;
    let (c, w) = match carpet.normalize_orientation() {
        Ok((c, true)) if carpet.is_non_doubling() => (c, coding.flip_vertical(carpet.m())),
        Ok((c, false)) if carpet.is_non_doubling() => (c, coding.clone()),
        _ => return Err(IndexError::NotApplicable("gamma needs a non-doubling carpet".into())),
    };
    let bits = bits_for_digits(digits);
    let gmax = HpValue::new(c.gamma_max_form().expect("normalized"), bits);
    let lower_form = if in_ve(&c, &w) { gmax.exact.clone() } else { LogRatio::rational(BigRational::one()) };
    let lower = DecimalValue::from_hp(&HpValue::new(lower_form, bits), digits);
    let upper_closed = match w.omega_class(&c) {
        OmegaClass::InOmega0 | OmegaClass::InOmegaM1 => Some(lower.clone()),
        OmegaClass::Neither => None,
    };
    let emp = (depth > 0).then(|| gamma_empirical::<T, _>(&c, (1..).map(|t| w.y(t)), depth));
    let hi = T::from(gmax.to_f64()).unwrap();
    let upper_estimate = emp.as_ref().map(|e| clamp(e.tail_sup, hi));
    Ok(GammaReport {
        schema: SCHEMA.into(),
        gamma_max: DecimalValue::from_hp(&gmax, digits),
        lower,
        upper_closed,
        empirical: emp,
        upper_estimate,
    })
}

/// Empirical `gamma` report for a streamed coding on a normalized carpet.
pub fn gamma_stream<T: Float, I: Iterator<Item = u32>>(
    carpet: &Carpet,
    letters: I,
    depth: u64,
    digits: u32,
) -> Result<GammaReport<T>, IndexError> {
    if !carpet.is_non_doubling() || !carpet.is_normalized() {
        return Err(IndexError::NotApplicable("streamed indices need a normalized non-doubling carpet".into()));
    }
    let bits = bits_for_digits(digits);
    let gmax = HpValue::new(carpet.gamma_max_form().expect("normalized"), bits);
    let emp = gamma_empirical::<T, _>(carpet, letters, depth);
    let hi = T::from(gmax.to_f64()).unwrap();
    Ok(GammaReport {
        schema: SCHEMA.into(),
        gamma_max: DecimalValue::from_hp(&gmax, digits),
        lower: DecimalValue::from_hp(&HpValue::new(LogRatio::rational(BigRational::one()), bits), digits),
        upper_closed: None,
        upper_estimate: Some(clamp(emp.tail_sup, hi)),
        empirical: Some(emp),
    })
}
