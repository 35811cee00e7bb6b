#![allow(dead_code)]

use carpet_lab::{Carpet, Coding, Digit};
use proptest::prelude::*;

pub const FIG1A: &[(u32, u32)] =
    &[(0, 0), (1, 0), (7, 0), (3, 1), (4, 1), (6, 1), (7, 1), (2, 2), (4, 2), (5, 2), (6, 2), (1, 3), (2, 3)];
pub const FIG1B: &[(u32, u32)] =
    &[(0, 0), (1, 0), (2, 0), (7, 0), (4, 1), (5, 1), (6, 1), (2, 2), (3, 2), (4, 2), (5, 2), (0, 3), (7, 3)];

pub fn fig1a() -> Carpet {
    Carpet::from_pairs(8, 4, FIG1A).unwrap()
}

pub fn fig1b() -> Carpet {
    Carpet::from_pairs(8, 4, FIG1B).unwrap()
}

/// Equal end rows, so the measure is doubling.
pub fn doubling() -> Carpet {
    Carpet::from_pairs(4, 2, &[(0, 0), (2, 0), (1, 1), (3, 1)]).unwrap()
}

/// Small valid carpets: `3 <= n <= 6`, `2 <= m < n`, at least two digits.
pub fn carpets() -> impl Strategy<Value = Carpet> {
    (3u32..=6)
        .prop_flat_map(|n| (Just(n), 2u32..n))
        .prop_flat_map(|(n, m)| {
            let cells = (n * m) as usize;
            (Just(n), Just(m), proptest::collection::vec(any::<bool>(), cells))
        })
        .prop_filter_map("needs two digits", |(n, m, mask)| {
            let digits: Vec<Digit> =
                (0..n * m).filter(|&c| mask[c as usize]).map(|c| Digit::new(c % n, c / n)).collect();
            Carpet::new(n, m, digits).ok()
        })
}

/// An eventually periodic coding over `carpet` built from digit indices.
pub fn coding_from(carpet: &Carpet, prefix: &[usize], period: &[usize]) -> Coding {
    let d = carpet.digits();
    let pick = |v: &[usize]| v.iter().map(|&i| d[i % d.len()]).collect::<Vec<_>>();
    Coding::new(pick(prefix), pick(period)).unwrap()
}

pub fn carpet_and_coding() -> impl Strategy<Value = (Carpet, Coding)> {
    (
        carpets(),
        proptest::collection::vec(0usize..64, 0..6),
        proptest::collection::vec(0usize..64, 1..5),
    )
        .prop_map(|(c, pre, per)| {
            let w = coding_from(&c, &pre, &per);
            (c, w)
        })
}

/// Two carpets on the same grid.
pub fn carpet_pairs() -> impl Strategy<Value = (Carpet, Carpet)> {
    (3u32..=6)
        .prop_flat_map(|n| (Just(n), 2u32..n))
        .prop_flat_map(|(n, m)| {
            let cells = (n * m) as usize;
            let mask = proptest::collection::vec(any::<bool>(), cells);
            (Just(n), Just(m), mask.clone(), mask)
        })
        .prop_filter_map("needs two digits each", |(n, m, a, b)| {
            let build = |mask: &[bool]| {
                let digits: Vec<Digit> =
                    (0..n * m).filter(|&c| mask[c as usize]).map(|c| Digit::new(c % n, c / n)).collect();
                Carpet::new(n, m, digits).ok()
            };
            Some((build(&a)?, build(&b)?))
        })
}
