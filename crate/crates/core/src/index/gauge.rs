//! Gauge functions, evaluated at the radii `r = n^{-k}`.

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::IndexError;
use crate::scalar::{fmt_ratio, parse_ratio};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeKind {
    /// `phi(r) = -log r`.
    NegLog,
    /// `phi(r) = log |log r|`.
    LogLog,
    Tabulated,
}

/// The limit `s = lim k / phi(n^{-k})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SLimit {
    Zero,
    /// `s = 1 / log n`.
    InverseLogN,
    /// A declared positive rational.
    Rational(BigRational),
    Infinite,
}

impl SLimit {
    pub fn parse(s: &str) -> Result<Self, IndexError> {
        match s.trim() {
            "inf" | "infinity" => Ok(SLimit::Infinite),
            t => {
                let q = parse_ratio(t).ok_or_else(|| IndexError::BadGauge(format!("cannot parse s = {t:?}")))?;
                if q < BigRational::zero() {
                    Err(IndexError::BadGauge(format!("s = {} is negative", fmt_ratio(&q))))
                } else if q.is_zero() {
                    Ok(SLimit::Zero)
                } else {
                    Ok(SLimit::Rational(q))
                }
            }
        }
    }

    fn to_f64(&self, n: u32) -> f64 {
        match self {
            SLimit::Zero => 0.0,
            SLimit::InverseLogN => 1.0 / f64::from(n).ln(),
            SLimit::Rational(q) => q.to_f64().unwrap_or(f64::NAN),
            SLimit::Infinite => f64::INFINITY,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SLimit::Zero => "0".into(),
            SLimit::InverseLogN => "1/log n".into(),
            SLimit::Rational(q) => fmt_ratio(q),
            SLimit::Infinite => "inf".into(),
        }
    }
}

/// A gauge `phi`, sampled only at `r = n^{-k}`.
#[derive(Clone, Debug)]
pub struct Gauge {
    kind: GaugeKind,
    s: SLimit,
    /// `(k, phi(n^{-k}))`, strictly increasing in both entries.
    table: Vec<(u64, f64)>,
    warnings: Vec<String>,
}

/// Relative mismatch between `k / phi` at the end of a table and the
/// declared `s` above which a warning is recorded.
const S_TOLERANCE: f64 = 0.1;

impl Gauge {
    pub fn neg_log() -> Self {
        Gauge { kind: GaugeKind::NegLog, s: SLimit::InverseLogN, table: Vec::new(), warnings: Vec::new() }
    }

    pub fn log_log() -> Self {
        Gauge { kind: GaugeKind::LogLog, s: SLimit::Infinite, table: Vec::new(), warnings: Vec::new() }
    }

    /// A tabulated gauge with its declared limit `s`. The table must be
    /// strictly increasing in `phi`; the declared `s` is compared against
    /// the last entries and a mismatch only produces a warning.
    pub fn tabulated(mut table: Vec<(u64, f64)>, s: SLimit, n: u32) -> Result<Self, IndexError> {
        table.sort_by_key(|e| e.0);
        if table.len() < 2 {
            return Err(IndexError::BadGauge("a table needs at least two entries".into()));
        }
        for w in table.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(IndexError::BadGauge(format!("rank {} listed twice", w[0].0)));
            }
            if w[1].1.partial_cmp(&w[0].1) != Some(std::cmp::Ordering::Greater) {
                return Err(IndexError::BadGauge(format!("phi is not strictly decreasing in r at rank {}", w[1].0)));
            }
        }
        if table[0].0 == 0 || !table[0].1.is_finite() {
            return Err(IndexError::BadGauge("table ranks start at 1 and values must be finite".into()));
        }
        let mut warnings = Vec::new();
        let (k, phi) = *table.last().unwrap();
        let observed = k as f64 / phi;
        let declared = s.to_f64(n);
        let off = if declared.is_infinite() || declared == 0.0 {
            let first = table[0].0 as f64 / table[0].1;
            (declared.is_infinite() && observed <= first) || (declared == 0.0 && observed >= first)
        } else {
            ((observed - declared) / declared).abs() > S_TOLERANCE
        };
        if off {
            warnings.push(format!(
                "declared s = {} does not match k/phi = {observed:.6} at the end of the table",
                s.label()
            ));
        }
        if s == SLimit::Zero {
            warnings.push("s = 0: the upper index is not covered by the closed form".into());
        }
        Ok(Gauge { kind: GaugeKind::Tabulated, s, table, warnings })
    }

    /// Reads a table as lines `k,phi` (blank lines and `#` comments skipped).
    pub fn parse_table(text: &str) -> Result<Vec<(u64, f64)>, IndexError> {
        let mut out = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || IndexError::BadGauge(format!("line {}: expected `k,phi`", no + 1));
            let (a, b) = line.split_once(',').ok_or_else(bad)?;
            let k = a.trim().parse().map_err(|_| bad())?;
            let v = b.trim().parse().map_err(|_| bad())?;
            out.push((k, v));
        }
        Ok(out)
    }

    pub fn kind(&self) -> GaugeKind {
        self.kind
    }

    pub fn s(&self) -> &SLimit {
        &self.s
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// `phi(n^{-k})`, or `None` beyond a table's range.
    pub fn phi(&self, n: u32, k: u64) -> Option<f64> {
        let ln = f64::from(n).ln();
        match self.kind {
            GaugeKind::NegLog => Some(k as f64 * ln),
            GaugeKind::LogLog => Some((k as f64 * ln).ln()),
            GaugeKind::Tabulated => {
                let pos = self.table.partition_point(|e| e.0 < k);
                match self.table.get(pos) {
                    Some(&(kk, v)) if kk == k => Some(v),
                    Some(&(k1, v1)) if pos > 0 => {
                        let (k0, v0) = self.table[pos - 1];
                        Some(v0 + (v1 - v0) * (k - k0) as f64 / (k1 - k0) as f64)
                    }
                    _ => None,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_values() {
        let g = Gauge::neg_log();
        assert!((g.phi(8, 3).unwrap() - 3.0 * 8f64.ln()).abs() < 1e-12);
        let h = Gauge::log_log();
        assert!((h.phi(8, 3).unwrap() - (3.0 * 8f64.ln()).ln()).abs() < 1e-12);
    }

    #[test]
    fn tabulated_checks() {
        let t: Vec<(u64, f64)> = (1..=50).map(|k| (k, 2.0 * k as f64)).collect();
        let g = Gauge::tabulated(t.clone(), SLimit::parse("1/2").unwrap(), 8).unwrap();
        assert!(g.warnings().is_empty());
        assert_eq!(g.phi(8, 7), Some(14.0));
        assert_eq!(g.phi(8, 51), None);
        let w = Gauge::tabulated(t, SLimit::parse("3").unwrap(), 8).unwrap();
        assert_eq!(w.warnings().len(), 1);
        let bad = Gauge::tabulated(vec![(1, 2.0), (2, 1.0)], SLimit::Infinite, 8);
        assert!(matches!(bad, Err(IndexError::BadGauge(_))));
    }

    #[test]
    fn interpolates_between_entries() {
        let g = Gauge::tabulated(vec![(1, 1.0), (3, 5.0)], SLimit::parse("1").unwrap(), 8).unwrap();
        assert_eq!(g.phi(8, 2), Some(3.0));
    }
}
