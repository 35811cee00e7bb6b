//! Pairwise comparison: necessary conditions for bi-Lipschitz equivalence.
//!
//! The comparator only ever certifies non-equivalence. A passing verdict
//! means every implemented necessary condition holds.

use serde::{Deserialize, Serialize};

use super::automaton::vsc_check;
use super::profile::{class_flags, dim_ve, multifractal_equal, StructureFlags, DEFAULT_TOPOLOGY_DEPTH};
use super::topology::Tristate;
use crate::carpet::{Carpet, VeKind};
use crate::error::{CarpetError, ClassifyError};
use crate::hp::{bits_for_digits, decide_equal, Decision, LogRatio};
use crate::report::{DecimalValue, SCHEMA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    NotEquivalent,
    NecessaryConditionsPass,
    Indeterminate,
}

/// One invariant that differs between the two carpets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub invariant: String,
    pub value_e: String,
    pub value_f: String,
    /// The invariance result the certificate rests on.
    pub basis: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub schema: String,
    pub outcome: Outcome,
    pub certificates: Vec<Certificate>,
    pub notes: Vec<String>,
    /// The verdict used a user-supplied total-disconnectedness flag.
    pub assumed_t: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct CompareOptions {
    pub digits: u32,
    pub assume_t: Option<bool>,
    pub topology_depth: u32,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { digits: crate::hp::DEFAULT_DIGITS, assume_t: None, topology_depth: DEFAULT_TOPOLOGY_DEPTH }
    }
}

const BASIS_SPECTRUM: &str = "equivalent carpets carry measures with the same multifractal spectrum";
const BASIS_FLAGS: &str = "total disconnectedness, vacant rows and doubling type are Lipschitz invariants";
const BASIS_INDICES: &str = "point-wise doubling indices are preserved by bi-Lipschitz maps";
const BASIS_ENDS: &str = "non-doubling equivalent carpets have equal end-row fibers after orientation";
const BASIS_FIBERS: &str = "outside the t,v,d,r class equivalent carpets have permuted fiber sequences";
const BASIS_VE: &str = "bi-Lipschitz maps carry double vertical coding points onto each other";

struct Builder {
    certs: Vec<Certificate>,
    notes: Vec<String>,
    undecided: bool,
    digits: u32,
}

impl Builder {
    fn cert(&mut self, invariant: &str, e: String, f: String, basis: &str) {
        self.certs.push(Certificate { invariant: invariant.into(), value_e: e, value_f: f, basis: basis.into() });
    }

    fn compare_forms(&mut self, name: &str, e: &LogRatio, f: &LogRatio, basis: &str) {
        let bits = bits_for_digits(self.digits);
        match decide_equal(e, f, bits) {
            Decision::Equal => {}
            Decision::NotEqual => {
                let show = |r: &LogRatio| DecimalValue::from_hp(&crate::carpet::HpValue::new(r.clone(), bits), self.digits);
                let (de, df) = (show(e), show(f));
                self.cert(name, de.exact.unwrap_or(de.decimal), df.exact.unwrap_or(df.decimal), basis);
            }
            Decision::Indeterminate { bits } => {
                self.undecided = true;
                self.notes.push(format!("{name}: equality undecided at {bits} bits"));
            }
        }
    }

    fn flag(&mut self, name: &str, e: bool, f: bool, basis: &str) {
        if e != f {
            self.cert(name, e.to_string(), f.to_string(), basis);
        }
    }
}

fn tristate(t: Tristate) -> String {
    match t {
        Tristate::Yes => "yes".into(),
        Tristate::No => "no".into(),
        Tristate::Indeterminate { depth } => format!("indeterminate at depth {depth}"),
    }
}

fn forms(c: &Carpet) -> Result<[LogRatio; 3], CarpetError> {
    Ok([c.delta_max_form()?, c.delta_aver_form()?, c.gamma_max_form()?])
}

/// Runs every implemented necessary condition for `e ~ f`.
pub fn compare(e: &Carpet, f: &Carpet, opts: &CompareOptions) -> Result<Verdict, ClassifyError> {
    if (e.n(), e.m()) != (f.n(), f.m()) {
        return Err(ClassifyError::BaseMismatch(e.n(), e.m(), f.n(), f.m()));
    }
    let mut b = Builder { certs: Vec::new(), notes: Vec::new(), undecided: false, digits: opts.digits };
    let mut assumed_t = false;

    let mf = multifractal_equal(e, f, opts.digits);
    match mf.decision {
        Decision::Equal => {}
        Decision::NotEqual => b.cert(
            "multifractal spectrum",
            format!("{:?}", e.fiber().0),
            format!("{:?}", f.fiber().0),
            BASIS_SPECTRUM,
        ),
        Decision::Indeterminate { bits } => {
            b.undecided = true;
            b.notes.push(format!("multifractal clause undecided at {bits} bits"));
        }
    }
    if let (Decision::NotEqual, Some(clause)) = (mf.decision, &mf.clause) {
        b.notes.push(format!("multifractal clause failed: {clause}"));
    }

    let fe: StructureFlags = class_flags(e, opts.topology_depth);
    let ff: StructureFlags = class_flags(f, opts.topology_depth);
    b.flag("doubling type", !fe.non_doubling.holds, !ff.non_doubling.holds, BASIS_FLAGS);
    b.flag("vacant rows", fe.vacant_rows, ff.vacant_rows, BASIS_FLAGS);
    let definite = |t: Tristate| match t {
        Tristate::Yes => Some(true),
        Tristate::No => Some(false),
        Tristate::Indeterminate { .. } => None,
    };
    if let (Some(te), Some(tf)) = (definite(fe.totally_disconnected), definite(ff.totally_disconnected)) {
        if te != tf {
            b.cert("totally disconnected", tristate(fe.totally_disconnected), tristate(ff.totally_disconnected), BASIS_FLAGS);
        }
    }

    match (fe.non_doubling.holds, ff.non_doubling.holds) {
        (true, true) => {
            let (ne, _) = e.normalize_orientation().expect("non-doubling carpets orient");
            let (nf, _) = f.normalize_orientation().expect("non-doubling carpets orient");
            if !ne.fiber().is_permutation_of(nf.fiber()) {
                b.cert("fiber sequence", format!("{:?}", ne.fiber().0), format!("{:?}", nf.fiber().0), BASIS_FIBERS);
            }
            if ne.fiber().first() != nf.fiber().first() {
                b.cert("a_0", ne.fiber().first().to_string(), nf.fiber().first().to_string(), BASIS_ENDS);
            }
            if ne.fiber().last() != nf.fiber().last() {
                b.cert("a_(m-1)", ne.fiber().last().to_string(), nf.fiber().last().to_string(), BASIS_ENDS);
            }
            let [dm_e, da_e, gm_e] = forms(&ne).expect("normalized");
            let [dm_f, da_f, gm_f] = forms(&nf).expect("normalized");
            b.compare_forms("delta_max", &dm_e, &dm_f, BASIS_INDICES);
            b.compare_forms("Delta_aver", &da_e, &da_f, BASIS_INDICES);
            b.compare_forms("gamma_max", &gm_e, &gm_f, BASIS_INDICES);

            let (ve, vf) = (dim_ve(e, opts.digits), dim_ve(f, opts.digits));
            let (se, sf) = (vsc_check(e), vsc_check(f));
            b.flag("vertical separation", se, sf, BASIS_VE);
            let formula = |k: VeKind| k == VeKind::Formula;
            if formula(ve.kind) || formula(vf.kind) {
                b.compare_forms("dim V", &ve.value.exact, &vf.value.exact, BASIS_VE);
            } else if ve.kind != vf.kind && se == sf {
                b.cert("V kind", format!("{:?}", ve.kind), format!("{:?}", vf.kind), BASIS_VE);
            }
        }
        (false, false) => {
            let member = |flags: &StructureFlags, used: &mut bool| {
                let r = flags.in_tvdr_class(None);
                if r.is_none() && opts.assume_t.is_some() {
                    *used = true;
                }
                flags.in_tvdr_class(opts.assume_t)
            };
            let me = member(&fe, &mut assumed_t);
            let mf_ = member(&ff, &mut assumed_t);
            let permuted = e.fiber().is_permutation_of(f.fiber());
            match (me, mf_) {
                (Some(false), _) | (_, Some(false)) if !permuted => {
                    b.cert("fiber sequence", format!("{:?}", e.fiber().0), format!("{:?}", f.fiber().0), BASIS_FIBERS);
                }
                (Some(true), Some(true)) if !permuted => {
                    b.notes.push("both carpets lie in the t,v,d,r class; fiber mismatch is not conclusive".into());
                }
                (None, _) | (_, None) if !permuted => {
                    b.undecided = true;
                    b.notes.push("total disconnectedness undecided; fiber mismatch is conclusive only outside the t,v,d,r class".into());
                }
                _ => {}
            }
        }
        _ => {}
    }

    let outcome = if !b.certs.is_empty() {
        Outcome::NotEquivalent
    } else if b.undecided {
        Outcome::Indeterminate
    } else {
        Outcome::NecessaryConditionsPass
    };
    Ok(Verdict { schema: SCHEMA.into(), outcome, certificates: b.certs, notes: b.notes, assumed_t })
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

    fn fig1b() -> Carpet {
        Carpet::from_pairs(
            8,
            4,
            &[(0, 0), (1, 0), (2, 0), (7, 0), (4, 1), (5, 1), (6, 1), (2, 2), (3, 2), (4, 2), (5, 2), (0, 3), (7, 3)],
        )
        .unwrap()
    }

    #[test]
    fn figure_pair_is_not_equivalent() {
        let v = compare(&fig1a(), &fig1b(), &CompareOptions::default()).unwrap();
        assert_eq!(v.outcome, Outcome::NotEquivalent);
        let names: Vec<&str> = v.certificates.iter().map(|c| c.invariant.as_str()).collect();
        assert!(names.contains(&"a_0"));
        assert!(names.contains(&"dim V"));
        assert!(names.contains(&"delta_max"));
    }

    #[test]
    fn self_comparison_passes() {
        let v = compare(&fig1a(), &fig1a(), &CompareOptions::default()).unwrap();
        assert_eq!(v.outcome, Outcome::NecessaryConditionsPass);
        assert!(v.certificates.is_empty());
    }

    #[test]
    fn doubling_flag_differs() {
        let d = Carpet::from_pairs(8, 4, &[(0, 0), (1, 0), (0, 1), (1, 3), (2, 3)]).unwrap();
        let v = compare(&fig1a(), &d, &CompareOptions::default()).unwrap();
        assert_eq!(v.outcome, Outcome::NotEquivalent);
        assert!(v.certificates.iter().any(|c| c.invariant == "doubling type"));
    }

    #[test]
    fn base_mismatch() {
        let other = Carpet::from_pairs(9, 4, &[(0, 0), (1, 1)]).unwrap();
        assert!(compare(&fig1a(), &other, &CompareOptions::default()).is_err());
    }
}
