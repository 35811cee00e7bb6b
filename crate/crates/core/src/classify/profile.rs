//! Lipschitz-invariant profiles, structure flags and the multifractal test.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use super::automaton::{ve_witness, vsc_check, VeWitness};
use super::topology::{totally_disconnected, Tristate};
use crate::carpet::{Carpet, DimVe, HpValue, NonDoubling, VeKind};
use crate::hp::{bits_for_digits, decide_zero, Decision, LogPoly, LogRatio};
use crate::report::{DecimalValue, SCHEMA};

/// Refinement rounds used for the total-disconnectedness flag by default.
pub const DEFAULT_TOPOLOGY_DEPTH: u32 = 6;

/// `dim_H V_E`: `log #I / log n` when `H` is nonempty and `#I >= 2`, else 0
/// with the empty/countable split decided by the pair automaton.
pub fn dim_ve(carpet: &Carpet, digits: u32) -> DimVe {
    let bits = bits_for_digits(digits);
    let i = carpet.set_i().len() as u64;
    if !carpet.set_h().is_empty() && i >= 2 {
        let form = LogRatio::new(LogPoly::log_int(i), LogPoly::log_int(carpet.n().into()));
        return DimVe { kind: VeKind::Formula, value: HpValue::new(form, bits) };
    }
    let kind = if vsc_check(carpet) { VeKind::Empty } else { VeKind::Countable };
    DimVe { kind, value: HpValue::new(LogRatio::zero(), bits) }
}

/// `sigma = u / v` with `m = b^u`, `n = b^v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaWitness {
    pub u: u64,
    pub v: u64,
    pub base: u32,
}

/// The four class flags plus the doubling witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureFlags {
    pub non_doubling: NonDoubling,
    pub vacant_rows: bool,
    pub sigma_rational: Option<SigmaWitness>,
    pub totally_disconnected: Tristate,
}

impl StructureFlags {
    /// Membership in the class that is totally disconnected, has vacant
    /// rows, is of doubling type and has rational `sigma`; `None` when the
    /// topology flag is undecided and matters.
    pub fn in_tvdr_class(&self, assume_t: Option<bool>) -> Option<bool> {
        let others = self.vacant_rows && !self.non_doubling.holds && self.sigma_rational.is_some();
        if !others {
            return Some(false);
        }
        match (self.totally_disconnected, assume_t) {
            (Tristate::Yes, _) => Some(true),
            (Tristate::No, _) => Some(false),
            (Tristate::Indeterminate { .. }, Some(t)) => Some(t),
            (Tristate::Indeterminate { .. }, None) => None,
        }
    }
}

pub fn class_flags(carpet: &Carpet, depth: u32) -> StructureFlags {
    StructureFlags {
        non_doubling: carpet.non_doubling(),
        vacant_rows: carpet.fiber().0.contains(&0),
        sigma_rational: carpet
            .common_base()
            .map(|(base, u, v)| SigmaWitness { u: u.into(), v: v.into(), base }),
        totally_disconnected: totally_disconnected(carpet, depth),
    }
}

/// A distinct nonzero fiber value and its number of occurrences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberClass {
    pub value: u32,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimVeRecord {
    pub kind: VeKind,
    pub value: DecimalValue,
}

/// Everything `analyze` reports about one carpet.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantProfile {
    pub schema: String,
    pub n: u32,
    pub m: u32,
    pub digit_count: u32,
    pub occupied_rows: u32,
    pub fiber: Vec<u32>,
    pub distinct_fibers: Vec<FiberClass>,
    pub sigma: DecimalValue,
    pub flags: StructureFlags,
    /// The closed forms below refer to the vertically flipped carpet.
    pub flipped: bool,
    pub a0: u32,
    pub a_top: u32,
    pub delta_max: Option<DecimalValue>,
    pub delta_aver: Option<DecimalValue>,
    pub gamma_max: Option<DecimalValue>,
    pub dim_ve: DimVeRecord,
    pub vsc: bool,
    pub ve_witness: Option<VeWitness>,
    pub set_h: Vec<u32>,
    pub set_i: Vec<u32>,
    pub c0: DecimalValue,
}

pub fn profile(carpet: &Carpet, digits: u32, topology_depth: u32) -> InvariantProfile {
    let bits = bits_for_digits(digits);
    let flags = class_flags(carpet, topology_depth);
    let (oriented, flipped) = match carpet.normalize_orientation() {
        Ok(pair) if carpet.is_non_doubling() => pair,
        _ => (carpet.clone(), false),
    };
    let closed = |f: fn(&Carpet) -> Result<LogRatio, crate::error::CarpetError>| {
        f(&oriented).ok().map(|form| DecimalValue::from_hp(&HpValue::new(form, bits), digits))
    };
    let dv = dim_ve(carpet, digits);
    let witness = ve_witness(carpet);
    InvariantProfile {
        schema: SCHEMA.to_string(),
        n: carpet.n(),
        m: carpet.m(),
        digit_count: carpet.big_n(),
        occupied_rows: carpet.fiber().occupied_rows(),
        fiber: carpet.fiber().0.clone(),
        distinct_fibers: carpet
            .fiber()
            .distinct_nonzero()
            .into_iter()
            .map(|(value, count)| FiberClass { value, count })
            .collect(),
        sigma: DecimalValue::from_hp(&HpValue::new(carpet.sigma_form(), bits), digits),
        flags,
        flipped,
        a0: oriented.fiber().first(),
        a_top: oriented.fiber().last(),
        delta_max: closed(Carpet::delta_max_form),
        delta_aver: closed(Carpet::delta_aver_form),
        gamma_max: closed(Carpet::gamma_max_form),
        dim_ve: DimVeRecord { kind: dv.kind, value: DecimalValue::from_hp(&dv.value, digits) },
        vsc: witness.is_none(),
        ve_witness: witness,
        set_h: carpet.set_h(),
        set_i: carpet.set_i(),
        c0: DecimalValue::from_interval(&carpet.c0(bits), digits),
    }
}

/// How the multifractal clauses were decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Exact integer identities (rational `sigma`).
    Exact,
    /// Log-linear identities in interval arithmetic.
    Interval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultifractalCheck {
    pub decision: Decision,
    pub route: Route,
    /// The first clause that failed or could not be decided.
    pub clause: Option<String>,
}

fn ratio(a: u32, b: u32) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

fn rpow(q: &BigRational, e: u64) -> BigRational {
    Pow::pow(q, e as u32)
}

/// Clauses shared by both routes: per distinct fiber index `i`,
/// `X = a*_i / b*_i`, `(M'_i / M_i)`, `(s' / s)` and `(N / N')`.
struct Clauses {
    rows: Vec<(u32, u32, u32, u32)>,
    s: (u32, u32),
    big_n: (u32, u32),
}

impl Clauses {
    fn new(e: &Carpet, f: &Carpet) -> Option<Self> {
        let de = e.fiber().distinct_nonzero();
        let df = f.fiber().distinct_nonzero();
        if de.len() != df.len() {
            return None;
        }
        Some(Clauses {
            rows: de.iter().zip(&df).map(|(&(a, ma), &(b, mb))| (a, b, ma, mb)).collect(),
            s: (e.fiber().occupied_rows(), f.fiber().occupied_rows()),
            big_n: (e.big_n(), f.big_n()),
        })
    }
}

/// Tests `a*_i / b*_i = (M'_i / M_i)^(1/sigma) = (s'/s)^(1/sigma) = (N/N')^(1/(1-sigma))`
/// for every `i`, plus equal numbers of distinct fibers.
pub fn multifractal_equal(e: &Carpet, f: &Carpet, digits: u32) -> MultifractalCheck {
    match e.sigma_ratio() {
        Some((u, v)) => multifractal_exact(e, f, u, v),
        None => multifractal_interval(e, f, digits),
    }
}

pub(crate) fn multifractal_exact(e: &Carpet, f: &Carpet, u: u64, v: u64) -> MultifractalCheck {
    let fail = |clause: String| MultifractalCheck { decision: Decision::NotEqual, route: Route::Exact, clause: Some(clause) };
    let Some(cl) = Clauses::new(e, f) else {
        return fail("number of distinct fiber values".into());
    };
    let s_ratio = ratio(cl.s.1, cl.s.0);
    let n_ratio = ratio(cl.big_n.0, cl.big_n.1);
    for (i, &(a, b, ma, mb)) in cl.rows.iter().enumerate() {
        let x = ratio(a, b);
        let xu = rpow(&x, u);
        if xu != rpow(&ratio(mb, ma), v) {
            return fail(format!("fiber value {} vs occurrence ratio", i + 1));
        }
        if xu != rpow(&s_ratio, v) {
            return fail(format!("fiber value {} vs occupied-row ratio", i + 1));
        }
        if rpow(&x, v - u) != rpow(&n_ratio, v) {
            return fail(format!("fiber value {} vs digit-count ratio", i + 1));
        }
    }
    MultifractalCheck { decision: Decision::Equal, route: Route::Exact, clause: None }
}

pub(crate) fn multifractal_interval(e: &Carpet, f: &Carpet, digits: u32) -> MultifractalCheck {
    let bits = bits_for_digits(digits);
    let Some(cl) = Clauses::new(e, f) else {
        return MultifractalCheck {
            decision: Decision::NotEqual,
            route: Route::Interval,
            clause: Some("number of distinct fiber values".into()),
        };
    };
    let (ln, lm) = (LogPoly::log_int(e.n().into()), LogPoly::log_int(e.m().into()));
    let gap = ln.sub(&lm);
    let log_s = LogPoly::log_ratio(cl.s.1.into(), cl.s.0.into());
    let log_big = LogPoly::log_ratio(cl.big_n.0.into(), cl.big_n.1.into());
    let mut pending = None;
    for (i, &(a, b, ma, mb)) in cl.rows.iter().enumerate() {
        let lx = LogPoly::log_ratio(a.into(), b.into());
        let checks = [
            ("occurrence ratio", lm.mul(&lx).sub(&ln.mul(&LogPoly::log_ratio(mb.into(), ma.into())))),
            ("occupied-row ratio", lm.mul(&lx).sub(&ln.mul(&log_s))),
            ("digit-count ratio", gap.mul(&lx).sub(&ln.mul(&log_big))),
        ];
        for (name, poly) in checks {
            match decide_zero(&poly, bits) {
                Decision::Equal => {}
                Decision::NotEqual => {
                    return MultifractalCheck {
                        decision: Decision::NotEqual,
                        route: Route::Interval,
                        clause: Some(format!("fiber value {} vs {name}", i + 1)),
                    }
                }
                Decision::Indeterminate { bits } => {
                    pending.get_or_insert((format!("fiber value {} vs {name}", i + 1), bits));
                }
            }
        }
    }
    match pending {
        Some((clause, bits)) => {
            MultifractalCheck { decision: Decision::Indeterminate { bits }, route: Route::Interval, clause: Some(clause) }
        }
        None => MultifractalCheck { decision: Decision::Equal, route: Route::Interval, clause: None },
    }
}
