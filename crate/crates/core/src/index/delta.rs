//! Closed-form and empirical point-wise doubling indices.

use num_traits::Float;
use serde::Serialize;

use super::gauge::{Gauge, GaugeKind, SLimit};
use crate::carpet::{Carpet, HpValue};
use crate::coding::{in_ve, Coding, OmegaClass};
use crate::error::IndexError;
use crate::hp::{bits_for_digits, LogPoly, LogRatio};
use crate::report::{DecimalValue, SCHEMA};
use crate::runlength::{BetaParts, BetaSequence};

/// Which closed-form case produced a value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// The measure is doubling: every index vanishes.
    Doubling,
    /// `s (1/sigma - 1) log(a_0/a_{m-1})` times the `V_E` indicator.
    VeIndicator,
    /// Eventually periodic coding outside both boundary classes: `beta` is
    /// bounded, so the limsup vanishes.
    BoundedRun,
    /// `s = 0`: reported as the lower index with a warning.
    ZeroLimit,
}

/// An index value: finite (exact form plus decimal) or `+inf`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IndexValue {
    Finite {
        value: DecimalValue,
        #[serde(skip)]
        exact: LogRatio,
    },
    Infinite,
}

impl IndexValue {
    pub fn zero(digits: u32) -> Self {
        IndexValue::from_form(LogRatio::zero(), digits)
    }

    pub fn from_form(exact: LogRatio, digits: u32) -> Self {
        let value = DecimalValue::from_hp(&HpValue::new(exact.clone(), bits_for_digits(digits)), digits);
        IndexValue::Finite { value, exact }
    }

    pub fn exact(&self) -> Option<&LogRatio> {
        match self {
            IndexValue::Finite { exact, .. } => Some(exact),
            IndexValue::Infinite => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            IndexValue::Finite { value, .. } => value.to_f64(),
            IndexValue::Infinite => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClosedForm {
    pub branch: Branch,
    pub value: IndexValue,
}

/// One evaluated rank of the empirical sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sample<T> {
    pub k: u64,
    pub beta: u64,
    pub value: T,
    pub running_sup: T,
}

/// Truncated limsup estimate: a thinned sample of the sequence, the running
/// sup and the sup over the top decade `k in [K/10, K]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Empirical<T> {
    pub depth: u64,
    pub tail_from: u64,
    pub running_sup: T,
    pub tail_sup: T,
    pub samples: Vec<Sample<T>>,
}

/// Ranks kept in [`Empirical::samples`]: all small ranks, a log-spaced grid,
/// and every rank where the running sup grows.
fn keep(k: u64, grew: bool, depth: u64) -> bool {
    if k <= 100 || grew || k == depth {
        return true;
    }
    let step = 10f64.powf(((k as f64).log10() * 20.0).floor() / 20.0).round() as u64;
    k == step
}

/// Folds `(k, beta, value)` rows into an [`Empirical`] summary.
#[derive(Clone, Debug)]
pub struct Accumulator<T> {
    depth: u64,
    tail_from: u64,
    running_sup: T,
    tail_sup: T,
    samples: Vec<Sample<T>>,
}

impl<T: Float> Accumulator<T> {
    pub fn new(depth: u64) -> Self {
        Accumulator {
            depth,
            tail_from: (depth / 10).max(1),
            running_sup: T::neg_infinity(),
            tail_sup: T::neg_infinity(),
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, k: u64, beta: u64, value: T) {
        let grew = value > self.running_sup;
        if grew {
            self.running_sup = value;
        }
        if k >= self.tail_from && value > self.tail_sup {
            self.tail_sup = value;
        }
        if keep(k, grew, self.depth) {
            self.samples.push(Sample { k, beta, value, running_sup: self.running_sup });
        }
    }

    pub fn finish(self) -> Empirical<T> {
        Empirical {
            depth: self.depth,
            tail_from: self.tail_from,
            running_sup: self.running_sup,
            tail_sup: self.tail_sup,
            samples: self.samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndexReport<T = f64> {
    pub schema: String,
    pub index: String,
    pub gauge: GaugeKind,
    pub s: String,
    pub closed_form: Option<ClosedForm>,
    pub empirical: Option<Empirical<T>>,
    /// The closed form when available, else the empirical tail sup.
    pub estimate: f64,
    pub warnings: Vec<String>,
}

/// `s (1/sigma - 1) log(a_0/a_{m-1})` for a normalized non-doubling carpet.
fn ve_value(carpet: &Carpet, s: &SLimit, digits: u32) -> IndexValue {
    let dm = carpet.delta_max_form().expect("normalized non-doubling carpet");
    match s {
        SLimit::Zero => IndexValue::zero(digits),
        SLimit::InverseLogN => IndexValue::from_form(dm, digits),
        SLimit::Rational(q) => {
            let ln = LogPoly::log_int(carpet.n().into());
            IndexValue::from_form(LogRatio::new(dm.num.mul(&ln).scale(q), dm.den), digits)
        }
        SLimit::Infinite => IndexValue::Infinite,
    }
}

/// The carpet in normalized orientation and the coding carried along.
fn oriented(carpet: &Carpet, coding: &Coding) -> (Carpet, Coding) {
    match carpet.normalize_orientation() {
        Ok((c, true)) => (c, coding.flip_vertical(carpet.m())),
        _ => (carpet.clone(), coding.clone()),
    }
}

/// Lower index: `s (1/sigma - 1) log(a_0/a_{m-1})` on `V_E`, `0` elsewhere.
/// Doubling carpets give `0`.
pub fn delta_lower(carpet: &Carpet, coding: &Coding, gauge: &Gauge, digits: u32) -> Result<ClosedForm, IndexError> {
    coding.validate(carpet).map_err(|e| IndexError::NotApplicable(e.to_string()))?;
    if !carpet.is_non_doubling() {
        return Ok(ClosedForm { branch: Branch::Doubling, value: IndexValue::zero(digits) });
    }
    let (c, w) = oriented(carpet, coding);
    let value = if in_ve(&c, &w) { ve_value(&c, gauge.s(), digits) } else { IndexValue::zero(digits) };
    let branch = if *gauge.s() == SLimit::Zero { Branch::ZeroLimit } else { Branch::VeIndicator };
    Ok(ClosedForm { branch, value })
}

/// Empirical sequence `beta(k) / phi(n^{-k}) * log(a_0/a_{m-1})` for
/// `k = 1..=depth` over a stream of y-letters. `on_row` sees every rank.
pub fn empirical<T: Float, I: Iterator<Item = u32>>(
    carpet: &Carpet,
    letters: I,
    gauge: &Gauge,
    depth: u64,
    mut on_row: impl FnMut(&BetaParts, T),
) -> Empirical<T> {
    let (a0, top) = (carpet.fiber().first(), carpet.fiber().last());
    let factor = if a0 > 0 && top > 0 { (f64::from(a0) / f64::from(top)).ln() } else { 0.0 };
    let factor = T::from(factor).unwrap();
    let mut acc = Accumulator::new(depth);
    for parts in BetaSequence::new(carpet, letters).take(depth as usize) {
        let Some(phi) = gauge.phi(carpet.n(), parts.k) else { break };
        let value = T::from(parts.beta).unwrap() / T::from(phi).unwrap() * factor;
        on_row(&parts, value);
        acc.push(parts.k, parts.beta, value);
    }
    acc.finish()
}

fn finish_report<T: Float>(
    index: &str,
    gauge: &Gauge,
    closed_form: Option<ClosedForm>,
    empirical: Option<Empirical<T>>,
    mut warnings: Vec<String>,
) -> IndexReport<T> {
    warnings.extend(gauge.warnings().iter().cloned());
    let estimate = match (&closed_form, &empirical) {
        (Some(c), _) => c.value.to_f64(),
        (None, Some(e)) => e.tail_sup.to_f64().unwrap_or(f64::NAN),
        (None, None) => f64::NAN,
    };
    IndexReport {
        schema: SCHEMA.into(),
        index: index.into(),
        gauge: gauge.kind(),
        s: gauge.s().label(),
        closed_form,
        empirical,
        estimate,
        warnings,
    }
}

/// Upper index for an eventually periodic coding: the closed form plus the
/// empirical sequence up to `depth`.
pub fn delta_upper<T: Float>(
    carpet: &Carpet,
    coding: &Coding,
    gauge: &Gauge,
    depth: u64,
    digits: u32,
) -> Result<IndexReport<T>, IndexError> {
    coding.validate(carpet).map_err(|e| IndexError::NotApplicable(e.to_string()))?;
    if depth == 0 {
        return Err(IndexError::DepthTooSmall { min: 1, got: 0 });
    }
    let mut warnings = Vec::new();
    if !carpet.is_non_doubling() {
        let closed = ClosedForm { branch: Branch::Doubling, value: IndexValue::zero(digits) };
        let emp = empirical(carpet, (1..).map(|t| coding.y(t)), gauge, depth, |_, _| {});
        return Ok(finish_report("delta_upper", gauge, Some(closed), Some(emp), warnings));
    }
    let (c, w) = oriented(carpet, coding);
    let closed = if *gauge.s() == SLimit::Zero {
        warnings.push("s = 0 lies outside the upper-index formula; reporting the lower index".into());
        let value = if in_ve(&c, &w) { ve_value(&c, gauge.s(), digits) } else { IndexValue::zero(digits) };
        ClosedForm { branch: Branch::ZeroLimit, value }
    } else {
        match w.omega_class(&c) {
            OmegaClass::InOmega0 | OmegaClass::InOmegaM1 => {
                let value = if in_ve(&c, &w) { ve_value(&c, gauge.s(), digits) } else { IndexValue::zero(digits) };
                ClosedForm { branch: Branch::VeIndicator, value }
            }
            OmegaClass::Neither => ClosedForm { branch: Branch::BoundedRun, value: IndexValue::zero(digits) },
        }
    };
    let emp = empirical(&c, (1..).map(|t| w.y(t)), gauge, depth, |_, _| {});
    Ok(finish_report("delta_upper", gauge, Some(closed), Some(emp), warnings))
}

/// Lower index as a report with no empirical part.
pub fn delta_lower_report(carpet: &Carpet, coding: &Coding, gauge: &Gauge, digits: u32) -> Result<IndexReport<f64>, IndexError> {
    let closed = delta_lower(carpet, coding, gauge, digits)?;
    Ok(finish_report::<f64>("delta_lower", gauge, Some(closed), None, Vec::new()))
}

/// Feeds every rank of the empirical upper-index sequence to `on_row`, in
/// the orientation the closed forms use.
pub fn delta_rows(carpet: &Carpet, coding: &Coding, gauge: &Gauge, depth: u64, on_row: impl FnMut(&BetaParts, f64)) {
    let (c, w) = oriented(carpet, coding);
    empirical::<f64, _>(&c, (1..).map(|t| w.y(t)), gauge, depth, on_row);
}

/// Upper index of a streamed coding: empirical only. The carpet must be
/// normalized and non-doubling.
pub fn delta_upper_stream<T: Float, I: Iterator<Item = u32>>(
    carpet: &Carpet,
    letters: I,
    gauge: &Gauge,
    depth: u64,
) -> Result<IndexReport<T>, IndexError> {
    if !carpet.is_non_doubling() || !carpet.is_normalized() {
        return Err(IndexError::NotApplicable("streamed indices need a normalized non-doubling carpet".into()));
    }
    let emp = empirical(carpet, letters, gauge, depth, |_, _| {});
    Ok(finish_report("delta_upper", gauge, None, Some(emp), Vec::new()))
}
