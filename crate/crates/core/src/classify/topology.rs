//! Total disconnectedness from the shapes of connected cylinder clusters.
//!
//! A cluster is a connected set of same-rank cylinders under the relation
//! "their parts of `E` intersect". Clusters refine independently, so it is
//! enough to track cluster shapes up to translation. If the shapes close up
//! into a finite family, cluster diameters shrink to zero and `E` is totally
//! disconnected.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::automaton::touch_table;
use crate::carpet::{Carpet, Digit};

/// Outcome of the total-disconnectedness test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "value", rename_all = "kebab-case")]
pub enum Tristate {
    Yes,
    No,
    Indeterminate { depth: u32 },
}

type Shape = Vec<(i64, i64)>;

const MAX_SHAPE: usize = 4096;

fn normalize(mut cells: Vec<(i64, i64)>) -> Shape {
    let x0 = cells.iter().map(|c| c.0).min().unwrap_or(0);
    let y0 = cells.iter().map(|c| c.1).min().unwrap_or(0);
    for c in &mut cells {
        c.0 -= x0;
        c.1 -= y0;
    }
    cells.sort();
    cells
}

fn components(cells: &[(i64, i64)], touch: &[(i8, i8)]) -> Vec<Shape> {
    let set: BTreeSet<(i64, i64)> = cells.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &c in cells {
        if !seen.insert(c) {
            continue;
        }
        let mut comp = vec![c];
        let mut queue = VecDeque::from([c]);
        while let Some(p) = queue.pop_front() {
            for &(dx, dy) in touch {
                let q = (p.0 + i64::from(dx), p.1 + i64::from(dy));
                if set.contains(&q) && seen.insert(q) {
                    comp.push(q);
                    queue.push_back(q);
                }
            }
        }
        out.push(normalize(comp));
    }
    out
}

/// Decides total disconnectedness, exploring at most `depth` refinement
/// rounds of cluster shapes.
pub fn totally_disconnected(carpet: &Carpet, depth: u32) -> Tristate {
    let (n, m) = (carpet.n(), carpet.m());
    let full_row = (0..m).any(|j| carpet.a(j) == n);
    let full_column = (0..n).any(|i| (0..m).all(|j| carpet.contains(Digit::new(i, j))));
    if full_row || full_column {
        return Tristate::No;
    }
    let touch = touch_table(carpet);
    let mut known: BTreeSet<Shape> = BTreeSet::new();
    let mut frontier = vec![vec![(0i64, 0i64)]];
    known.insert(frontier[0].clone());
    for _ in 0..depth {
        let mut next = Vec::new();
        for shape in &frontier {
            let children: Vec<(i64, i64)> = shape
                .iter()
                .flat_map(|&(x, y)| {
                    carpet
                        .digits()
                        .iter()
                        .map(move |d| (x * i64::from(n) + i64::from(d.i), y * i64::from(m) + i64::from(d.j)))
                })
                .collect();
            for comp in components(&children, &touch) {
                if comp.len() > MAX_SHAPE {
                    return Tristate::Indeterminate { depth };
                }
                if known.insert(comp.clone()) {
                    next.push(comp);
                }
            }
        }
        if next.is_empty() {
            return Tristate::Yes;
        }
        frontier = next;
    }
    Tristate::Indeterminate { depth }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_digits_are_disconnected() {
        let c = Carpet::from_pairs(4, 2, &[(0, 0), (2, 1)]).unwrap();
        assert_eq!(totally_disconnected(&c, 4), Tristate::Yes);
    }

    #[test]
    fn full_row_is_connected() {
        let c = Carpet::from_pairs(3, 2, &[(0, 0), (1, 0), (2, 0), (1, 1)]).unwrap();
        assert_eq!(totally_disconnected(&c, 4), Tristate::No);
    }

    #[test]
    fn full_column_is_connected() {
        let c = Carpet::from_pairs(3, 2, &[(1, 0), (1, 1)]).unwrap();
        assert_eq!(totally_disconnected(&c, 4), Tristate::No);
    }
}
