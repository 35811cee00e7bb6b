//! Monte Carlo check of the almost-everywhere run-length statements.

use rayon::prelude::*;
use serde::Serialize;
use statrs::statistics::{Data, Median, OrderStatistics};

use crate::carpet::Carpet;
use crate::coding::DigitStream;
use crate::error::IndexError;
use crate::report::SCHEMA;
use crate::runlength::BetaSequence;

/// Per-trial maxima over the tail window `k in [K/10, K]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrialStats {
    pub trial: u64,
    /// `max beta(k) / k`.
    pub beta_over_k: f64,
    /// `max beta(k) / (-log_{p_0}(k / sigma))` with `p_0 = a_0 / N`.
    pub beta_over_log: f64,
    /// `max beta(k) log(a_0/a_{m-1}) / log k`.
    pub delta_aver: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    fn of(values: Vec<f64>) -> Self {
        let mut d = Data::new(values);
        Quartiles { q1: d.lower_quartile(), median: d.median(), q3: d.upper_quartile() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MonteCarloReport {
    pub schema: String,
    pub trials: u64,
    pub depth: u64,
    pub seed: u64,
    pub tail_from: u64,
    pub beta_over_k: Quartiles,
    pub beta_over_log: Quartiles,
    pub delta_aver: Quartiles,
    pub per_trial: Vec<TrialStats>,
}

fn run_trial(carpet: &Carpet, depth: u64, seed: u64, trial: u64) -> TrialStats {
    let (a0, top, big_n) = (
        f64::from(carpet.fiber().first()),
        f64::from(carpet.fiber().last()),
        f64::from(carpet.big_n()),
    );
    let ln_inv_p0 = (big_n / a0).ln();
    let ln_ratio = (a0 / top).ln();
    let sigma = carpet.sigma_f64();
    let tail_from = (depth / 10).max(2);
    let letters = DigitStream::with_stream(carpet, seed, trial).map(|d| d.j);
    let mut s = TrialStats { trial, beta_over_k: 0.0, beta_over_log: 0.0, delta_aver: 0.0 };
    for parts in BetaSequence::new(carpet, letters).take(depth as usize) {
        if parts.k < tail_from {
            continue;
        }
        let (k, beta) = (parts.k as f64, parts.beta as f64);
        s.beta_over_k = s.beta_over_k.max(beta / k);
        let scale = (k / sigma).ln() / ln_inv_p0;
        if scale > 0.0 {
            s.beta_over_log = s.beta_over_log.max(beta / scale);
        }
        s.delta_aver = s.delta_aver.max(beta * ln_ratio / k.ln());
    }
    s
}

/// Runs `trials` independent uniform codings to rank `depth`. Trial `t`
/// draws from stream `t` of the generator seeded with `seed`, so results do
/// not depend on scheduling.
pub fn monte_carlo_delta(carpet: &Carpet, trials: u64, depth: u64, seed: u64) -> Result<MonteCarloReport, IndexError> {
    if trials == 0 {
        return Err(IndexError::DepthTooSmall { min: 1, got: 0 });
    }
    if depth < 20 {
        return Err(IndexError::DepthTooSmall { min: 20, got: depth });
    }
    let c = match carpet.normalize_orientation() {
        Ok((c, _)) if carpet.is_non_doubling() => c,
        _ => return Err(IndexError::NotApplicable("Monte Carlo indices need a non-doubling carpet".into())),
    };
    let per_trial: Vec<TrialStats> = (0..trials).into_par_iter().map(|t| run_trial(&c, depth, seed, t)).collect();
    let pick = |f: fn(&TrialStats) -> f64| Quartiles::of(per_trial.iter().map(f).collect());
    Ok(MonteCarloReport {
        schema: SCHEMA.into(),
        trials,
        depth,
        seed,
        tail_from: (depth / 10).max(2),
        beta_over_k: pick(|s| s.beta_over_k),
        beta_over_log: pick(|s| s.beta_over_log),
        delta_aver: pick(|s| s.delta_aver),
        per_trial,
    })
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
    fn deterministic_and_small() {
        let c = fig1a();
        let a = monte_carlo_delta(&c, 8, 5000, 11).unwrap();
        let b = monte_carlo_delta(&c, 8, 5000, 11).unwrap();
        assert_eq!(a.per_trial, b.per_trial);
        assert!(a.beta_over_k.median < 0.05);
    }

    #[test]
    fn doubling_rejected() {
        let d = Carpet::from_pairs(3, 2, &[(0, 0), (1, 0), (0, 1), (2, 1)]).unwrap();
        assert!(monte_carlo_delta(&d, 2, 100, 1).is_err());
    }
}
