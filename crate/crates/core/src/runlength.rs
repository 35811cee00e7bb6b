//! Run lengths of y-words and the reverse run length `beta(k; w)`.

use serde::Serialize;

use crate::carpet::Carpet;
use crate::coding::{Coding, PeriodicWord};
use crate::error::RunLengthError;

/// A y-word: either a finite slice or an eventually periodic infinite word.
#[derive(Clone, Copy, Debug)]
pub enum Word<'a> {
    Finite(&'a [u32]),
    Periodic(&'a PeriodicWord),
}

impl Word<'_> {
    fn get(&self, t: u64) -> Option<u32> {
        match self {
            Word::Finite(w) => w.get((t - 1) as usize).copied(),
            Word::Periodic(w) => Some(w.at(t)),
        }
    }

    fn len(&self) -> Option<u64> {
        match self {
            Word::Finite(w) => Some(w.len() as u64),
            Word::Periodic(_) => None,
        }
    }

    fn need(&self, t: u64) -> Result<u32, RunLengthError> {
        self.get(t).ok_or(RunLengthError::InsufficientWord { len: self.len().unwrap_or(0), needed: t })
    }
}

/// Length of a run, possibly unbounded on eventually periodic words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RunLength {
    Finite(u64),
    Infinite,
}

/// `l_theta(k; y)`: length of the run of `theta` starting at position `k`.
pub fn run_length(theta: u32, k: u64, word: Word<'_>) -> Result<RunLength, RunLengthError> {
    if k == 0 {
        return Err(RunLengthError::BadPosition(k, 1));
    }
    if word.need(k)? != theta {
        return Ok(RunLength::Finite(0));
    }
    match word {
        Word::Finite(w) => {
            let len = w.len() as u64;
            let mut t = k;
            while t <= len && w[(t - 1) as usize] == theta {
                t += 1;
            }
            if t > len {
                Err(RunLengthError::InsufficientWord { len, needed: len + 1 })
            } else {
                Ok(RunLength::Finite(t - k))
            }
        }
        Word::Periodic(w) => {
            let tail_start = w.prefix.len() as u64 + 1;
            if w.period.iter().all(|&y| y == theta) && (k..tail_start).all(|t| w.at(t) == theta) {
                return Ok(RunLength::Infinite);
            }
            let mut t = k;
            while w.at(t) == theta {
                t += 1;
            }
            Ok(RunLength::Finite(t - k))
        }
    }
}

/// `l_{theta0, theta}(k; y)`: the run length at `k` when `y_{k-1} = theta0`, else 0.
pub fn modified_run_length(theta0: u32, theta: u32, k: u64, word: Word<'_>) -> Result<RunLength, RunLengthError> {
    if k < 2 {
        return Err(RunLengthError::BadPosition(k, 2));
    }
    if word.need(k - 1)? != theta0 {
        return Ok(RunLength::Finite(0));
    }
    run_length(theta, k, word)
}

/// Components of the reverse run length at rank `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BetaParts {
    pub k: u64,
    pub ell: u64,
    pub h_zero: u64,
    pub h_top: u64,
    pub beta_zero: u64,
    pub beta_top: u64,
    pub beta: u64,
}

impl BetaParts {
    /// Assembles the parts from `h_0`, `h_{m-1}` and the letters found there.
    fn assemble(carpet: &Carpet, k: u64, ell: u64, h0: (u64, u32), htop: (u64, u32)) -> BetaParts {
        let beta_zero = if h0.0 >= 1 && carpet.in_se_plus(h0.1) { ell - k.max(h0.0) } else { 0 };
        let beta_top = if htop.0 >= 1 && carpet.in_se_minus(htop.1) { ell - k.max(htop.0) } else { 0 };
        BetaParts {
            k,
            ell,
            h_zero: h0.0,
            h_top: htop.0,
            beta_zero,
            beta_top,
            beta: beta_zero.max(beta_top),
        }
    }
}

/// Largest `h <= upto` with `w_h != p` and the letter there, or `(0, p)`.
fn last_not(word: Word<'_>, p: u32, upto: u64) -> Result<(u64, u32), RunLengthError> {
    match word {
        Word::Finite(_) => {
            word.need(upto.max(1))?;
            let mut h = upto;
            while h >= 1 {
                let y = word.need(h)?;
                if y != p {
                    return Ok((h, y));
                }
                h -= 1;
            }
            Ok((0, p))
        }
        Word::Periodic(w) => {
            let pre = w.prefix.len() as u64;
            let mut h = upto;
            let stop = if upto > pre { pre.max(upto.saturating_sub(w.period.len() as u64)) } else { 0 };
            while h > stop {
                let y = w.at(h);
                if y != p {
                    return Ok((h, y));
                }
                h -= 1;
            }
            let mut h = h.min(pre);
            while h >= 1 {
                let y = w.at(h);
                if y != p {
                    return Ok((h, y));
                }
                h -= 1;
            }
            Ok((0, p))
        }
    }
}

/// `beta(k; w)` and its parts for a y-word holding at least `ell(k)` letters.
pub fn beta_parts_word(carpet: &Carpet, word: Word<'_>, k: u64) -> Result<BetaParts, RunLengthError> {
    if k == 0 {
        return Err(RunLengthError::BadPosition(k, 1));
    }
    let ell = carpet.ell(k);
    let h0 = last_not(word, 0, ell)?;
    let htop = last_not(word, carpet.m() - 1, ell)?;
    Ok(BetaParts::assemble(carpet, k, ell, h0, htop))
}

/// `beta(k; w)` for an eventually periodic coding.
pub fn beta_parts(carpet: &Carpet, coding: &Coding, k: u64) -> BetaParts {
    let y = coding.y_word();
    beta_parts_word(carpet, Word::Periodic(&y), k).expect("periodic words never run out")
}

/// Incremental evaluator over a streamed y-word: remembers the last letters
/// differing from `0` and from `m - 1`.
#[derive(Clone, Debug)]
pub struct BetaTracker {
    top: u32,
    len: u64,
    last_non_zero: (u64, u32),
    last_non_top: (u64, u32),
}

impl BetaTracker {
    pub fn new(carpet: &Carpet) -> Self {
        let top = carpet.m() - 1;
        BetaTracker { top, len: 0, last_non_zero: (0, 0), last_non_top: (0, top) }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, y: u32) {
        self.len += 1;
        if y != 0 {
            self.last_non_zero = (self.len, y);
        }
        if y != self.top {
            self.last_non_top = (self.len, y);
        }
    }

    /// Parts at rank `k`; the tracker must hold exactly `ell(k)` letters.
    pub fn parts(&self, carpet: &Carpet, k: u64) -> BetaParts {
        let ell = carpet.ell(k);
        assert_eq!(self.len, ell, "tracker must hold exactly ell(k) letters");
        BetaParts::assemble(carpet, k, ell, self.last_non_zero, self.last_non_top)
    }

    /// Last position `<= len` whose letter differs from `0`, with that letter.
    pub fn last_non_zero(&self) -> (u64, u32) {
        self.last_non_zero
    }

    pub fn last_non_top(&self) -> (u64, u32) {
        self.last_non_top
    }
}

/// Yields `beta` parts for `k = 1, 2, ...` while consuming a y-letter stream.
pub struct BetaSequence<'a, I> {
    carpet: &'a Carpet,
    letters: I,
    tracker: BetaTracker,
    k: u64,
}

impl<'a, I: Iterator<Item = u32>> BetaSequence<'a, I> {
    pub fn new(carpet: &'a Carpet, letters: I) -> Self {
        BetaSequence { carpet, letters, tracker: BetaTracker::new(carpet), k: 0 }
    }

    pub fn tracker(&self) -> &BetaTracker {
        &self.tracker
    }
}

impl<I: Iterator<Item = u32>> Iterator for BetaSequence<'_, I> {
    type Item = BetaParts;

    fn next(&mut self) -> Option<BetaParts> {
        self.k += 1;
        let ell = self.carpet.ell(self.k);
        while self.tracker.len() < ell {
            self.tracker.push(self.letters.next()?);
        }
        Some(self.tracker.parts(self.carpet, self.k))
    }
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
    fn run_length_examples() {
        let w = [0, 0, 0, 1];
        assert_eq!(run_length(0, 1, Word::Finite(&w)), Ok(RunLength::Finite(3)));
        assert_eq!(run_length(0, 1, Word::Finite(&[2, 0])), Ok(RunLength::Finite(0)));
        let p = PeriodicWord::new(vec![], vec![0, 0, 1]);
        assert_eq!(run_length(0, 4, Word::Periodic(&p)), Ok(RunLength::Finite(2)));
        assert_eq!(
            run_length(0, 1, Word::Finite(&[0, 0])),
            Err(RunLengthError::InsufficientWord { len: 2, needed: 3 })
        );
        let z = PeriodicWord::new(vec![1], vec![0]);
        assert_eq!(run_length(0, 2, Word::Periodic(&z)), Ok(RunLength::Infinite));
    }

    #[test]
    fn modified_examples() {
        assert_eq!(modified_run_length(2, 0, 2, Word::Finite(&[2, 0, 0, 1])), Ok(RunLength::Finite(2)));
        assert_eq!(modified_run_length(2, 0, 2, Word::Finite(&[1, 0, 0, 1])), Ok(RunLength::Finite(0)));
        let p = PeriodicWord::new(vec![], vec![2, 0]);
        assert_eq!(modified_run_length(2, 0, 4, Word::Periodic(&p)), Ok(RunLength::Finite(1)));
        assert_eq!(modified_run_length(2, 0, 1, Word::Periodic(&p)), Err(RunLengthError::BadPosition(1, 2)));
    }

    #[test]
    fn beta_examples() {
        let c = fig1a();
        let b = beta_parts_word(&c, Word::Finite(&[1, 0, 0, 0, 0, 0]), 4).unwrap();
        assert_eq!((b.h_zero, b.beta_zero, b.h_top, b.beta_top, b.beta), (1, 2, 6, 0, 2));
        let b = beta_parts_word(&c, Word::Finite(&[2, 3, 3, 3, 3, 3]), 4).unwrap();
        assert_eq!((b.h_top, b.beta_top, b.beta_zero, b.beta), (1, 2, 0, 2));
        let b = beta_parts_word(&c, Word::Finite(&[0, 0, 0, 0, 0, 2]), 4).unwrap();
        assert_eq!(b.beta, 0);
    }

    #[test]
    fn tracker_matches_direct() {
        let c = fig1a();
        let coding = Coding::from_pairs(&[(7, 1), (2, 2)], &[(1, 0), (1, 0), (3, 1), (1, 3)]).unwrap();
        let letters = (1..).map(|t| coding.y(t));
        for parts in BetaSequence::new(&c, letters).take(60) {
            assert_eq!(parts, beta_parts(&c, &coding, parts.k));
        }
    }
}
