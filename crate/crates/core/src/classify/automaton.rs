//! Pair automaton deciding whether two digit sequences code the same point.
//!
//! Reading digit pairs `(a, b)` left to right, the scaled difference of the
//! partial sums evolves as `c' = base * c + (a - b)` in each coordinate. Two
//! infinite words code the same point iff both differences stay in
//! `{-1, 0, 1}` forever, so nine states suffice.

use serde::{Deserialize, Serialize};

use crate::carpet::{Carpet, Digit};
use crate::coding::Coding;

/// Scaled coordinate difference `(cx, cy)`, each in `{-1, 0, 1}`.
pub type State = (i8, i8);

const STATES: [State; 9] = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 0), (0, 1), (1, -1), (1, 0), (1, 1)];

fn index(s: State) -> usize {
    ((s.0 + 1) * 3 + (s.1 + 1)) as usize
}

/// Edges of the automaton, each labelled by the digit pair read.
#[derive(Clone, Debug)]
pub struct PairAutomaton {
    edges: Vec<Vec<(State, Digit, Digit)>>,
    live: [bool; 9],
}

impl PairAutomaton {
    pub fn new(carpet: &Carpet) -> Self {
        let (n, m) = (i64::from(carpet.n()), i64::from(carpet.m()));
        let mut edges = vec![Vec::new(); 9];
        for &s in &STATES {
            for &a in carpet.digits() {
                for &b in carpet.digits() {
                    let cx = n * i64::from(s.0) + i64::from(a.i) - i64::from(b.i);
                    let cy = m * i64::from(s.1) + i64::from(a.j) - i64::from(b.j);
                    if cx.abs() <= 1 && cy.abs() <= 1 {
                        edges[index(s)].push(((cx as i8, cy as i8), a, b));
                    }
                }
            }
        }
        // Greatest fixpoint: keep states with an edge into the kept set.
        let mut live = [true; 9];
        loop {
            let mut changed = false;
            for &s in &STATES {
                if live[index(s)] && !edges[index(s)].iter().any(|(t, _, _)| live[index(*t)]) {
                    live[index(s)] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        PairAutomaton { edges, live }
    }

    /// An infinite run starts at `s`.
    pub fn is_live(&self, s: State) -> bool {
        self.live[index(s)]
    }

    fn live_edges(&self, s: State) -> impl Iterator<Item = &(State, Digit, Digit)> {
        self.edges[index(s)].iter().filter(move |(t, _, _)| self.live[index(*t)])
    }

    /// Lasso from `start` to the first live state satisfying `target`, then
    /// around a cycle. Returns the digit pairs of the stem and of the cycle.
    fn lasso(&self, start: State, target: impl Fn(State) -> bool) -> Option<(Vec<(Digit, Digit)>, Vec<(Digit, Digit)>)> {
        if !self.is_live(start) {
            return None;
        }
        let mut parent: [Option<(State, Digit, Digit)>; 9] = [None; 9];
        let mut seen = [false; 9];
        seen[index(start)] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut hit = None;
        while let Some(s) = queue.pop_front() {
            if target(s) {
                hit = Some(s);
                break;
            }
            for &(t, a, b) in self.live_edges(s) {
                if !seen[index(t)] {
                    seen[index(t)] = true;
                    parent[index(t)] = Some((s, a, b));
                    queue.push_back(t);
                }
            }
        }
        let hit = hit?;
        let mut stem = Vec::new();
        let mut cur = hit;
        while let Some((p, a, b)) = parent[index(cur)] {
            stem.push((a, b));
            cur = p;
        }
        stem.reverse();
        // Walk live edges (smallest label first) until a state repeats.
        let mut order = vec![hit];
        let mut labels = Vec::new();
        let mut cur = hit;
        loop {
            let &(t, a, b) = self.live_edges(cur).next().expect("live states have live successors");
            labels.push((a, b));
            if let Some(pos) = order.iter().position(|&s| s == t) {
                stem.extend_from_slice(&labels[..pos]);
                return Some((stem, labels[pos..].to_vec()));
            }
            order.push(t);
            cur = t;
        }
    }
}

/// Two codings of one point with different y-sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VeWitness {
    pub first: Coding,
    pub second: Coding,
}

/// `true` iff `V_E` is empty (the vertical separation condition).
pub fn vsc_check(carpet: &Carpet) -> bool {
    ve_witness(carpet).is_none()
}

/// A pair of codings proving `V_E` nonempty, if one exists.
pub fn ve_witness(carpet: &Carpet) -> Option<VeWitness> {
    let aut = PairAutomaton::new(carpet);
    let (stem, cycle) = aut.lasso((0, 0), |s| s.1 != 0)?;
    let split = |pairs: &[(Digit, Digit)]| -> (Vec<Digit>, Vec<Digit>) { pairs.iter().copied().unzip() };
    let (p1, p2) = split(&stem);
    let (c1, c2) = split(&cycle);
    let first = Coding::new(p1, c1).expect("cycle is nonempty");
    let second = Coding::new(p2, c2).expect("cycle is nonempty");
    Some(if first <= second { VeWitness { first, second } } else { VeWitness { first: second, second: first } })
}

/// Offsets `d` with `E` meeting `E + d` at cylinder scale, i.e. two sibling
/// cylinders whose positions differ by `d` share a point of `E`.
pub fn touch_table(carpet: &Carpet) -> Vec<State> {
    let aut = PairAutomaton::new(carpet);
    STATES.iter().copied().filter(|&s| s != (0, 0) && aut.is_live(s)).collect()
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
    fn witness_codes_one_point() {
        let c = fig1a();
        let w = ve_witness(&c).unwrap();
        assert_eq!(w.first.pi(&c), w.second.pi(&c));
        assert_ne!(w.first.y_word(), w.second.y_word());
        w.first.validate(&c).unwrap();
        w.second.validate(&c).unwrap();
    }

    #[test]
    fn separated_rows_satisfy_vsc() {
        let c = Carpet::from_pairs(4, 3, &[(0, 0), (1, 0), (2, 2)]).unwrap();
        assert!(vsc_check(&c));
    }

    #[test]
    fn full_row_touches_horizontally() {
        let c = Carpet::from_pairs(3, 2, &[(0, 0), (1, 0), (2, 0)]).unwrap();
        let t = touch_table(&c);
        assert!(t.contains(&(1, 0)) && t.contains(&(-1, 0)));
        assert!(!t.contains(&(0, 1)));
    }
}
