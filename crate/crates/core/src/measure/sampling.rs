//! Monte Carlo estimate of a ball measure from random codings.

use rayon::prelude::*;
use serde::Serialize;

use crate::carpet::Carpet;
use crate::coding::{word_point, DigitStream, Point};

/// Digits drawn per sample; the truncation error is below `m^{-48}`.
const SAMPLE_DIGITS: usize = 48;
const CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BallEstimate {
    pub samples: u64,
    pub hits: u64,
    pub mean: f64,
    pub std_err: f64,
}

impl BallEstimate {
    /// `mean -/+ sigmas * std_err`, clipped to `[0, 1]`.
    pub fn band(&self, sigmas: f64) -> (f64, f64) {
        ((self.mean - sigmas * self.std_err).max(0.0), (self.mean + sigmas * self.std_err).min(1.0))
    }
}

/// Fraction of `samples` mu-random points that fall in the open ball
/// `B_r(z)`. Chunk `c` draws from stream `c` of the seeded generator, so the
/// result does not depend on the worker count.
pub fn monte_carlo_ball(carpet: &Carpet, z: &Point<f64>, r: f64, samples: u64, seed: u64) -> BallEstimate {
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(samples - c * CHUNK);
            let mut stream = DigitStream::with_stream(carpet, seed, c);
            let mut word = Vec::with_capacity(SAMPLE_DIGITS);
            let mut hits = 0u64;
            for _ in 0..count {
                word.clear();
                word.extend(stream.by_ref().take(SAMPLE_DIGITS));
                let p: Point<f64> = word_point(carpet, &word);
                let (dx, dy) = (p.x - z.x, p.y - z.y);
                if dx * dx + dy * dy < r * r {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let mean = hits as f64 / samples as f64;
    let std_err = (mean * (1.0 - mean) / samples as f64).sqrt();
    BallEstimate { samples, hits, mean, std_err }
}
