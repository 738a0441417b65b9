use std::collections::{HashMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{admissibility, allowed_directions, count_visits, in_a, in_d, is_terminal_word, Word};
use crate::error::{Error, Result};
use crate::lattice::{Direction, Label, Vertex, ORIGIN};

/// Labels on the 5×5 square centred at `x`, one bit per site (set = V).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalLabels {
    x: Vertex,
    mask: u32,
}

impl LocalLabels {
    pub fn new(x: Vertex, mask: u32) -> Self {
        LocalLabels { x, mask: mask & ((1 << 25) - 1) }
    }

    pub fn from_fn(x: Vertex, f: impl Fn(Vertex) -> Label) -> Self {
        let mut l = LocalLabels { x, mask: 0 };
        for j in -2..=2 {
            for i in -2..=2 {
                let v = x + Vertex::new(i, j);
                l.set(v, f(v));
            }
        }
        l
    }

    pub fn random<G: Rng>(x: Vertex, rng: &mut G) -> Self {
        Self::new(x, rng.random::<u32>())
    }

    pub fn centre(&self) -> Vertex {
        self.x
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    fn bit(&self, v: Vertex) -> u32 {
        let d = v - self.x;
        debug_assert!(d.x.abs() <= 2 && d.y.abs() <= 2, "{v} outside the window of {}", self.x);
        ((d.y + 2) * 5 + (d.x + 2)) as u32
    }

    pub fn contains(&self, v: Vertex) -> bool {
        let d = v - self.x;
        d.x.abs() <= 2 && d.y.abs() <= 2
    }

    pub fn get(&self, v: Vertex) -> Label {
        if self.mask >> self.bit(v) & 1 == 1 {
            Label::V
        } else {
            Label::H
        }
    }

    pub fn set(&mut self, v: Vertex, l: Label) {
        let b = self.bit(v);
        match l {
            Label::V => self.mask |= 1 << b,
            Label::H => self.mask &= !(1 << b),
        }
    }

    /// Apply an admissible word starting at `start`.
    pub fn advance(&mut self, start: Vertex, w: &[Vertex]) {
        let mut here = start;
        for &next in w {
            let d = here.direction_to(next).expect("word steps are unit steps");
            self.set(here, d.label());
            here = next;
        }
    }
}

/// Shortest admissible word from `(start, η)` ending at `target`, with every
/// position inside `region` and length at most `max_len`. Ties break by the
/// canonical direction order.
pub fn find_word(
    start: Vertex,
    eta: LocalLabels,
    region: &dyn Fn(Vertex) -> bool,
    target: Vertex,
    max_len: usize,
) -> Option<Word> {
    let mut frontier: Vec<(Vertex, LocalLabels, Word)> = vec![(start, eta, Vec::new())];
    for _ in 0..max_len {
        let mut next_frontier = Vec::with_capacity(frontier.len() * 2);
        for (pos, labels, word) in frontier {
            let here = labels.get(pos);
            for d in allowed_directions(here) {
                let np = pos.step(d);
                if !region(np) {
                    continue;
                }
                let mut nl = labels;
                nl.set(pos, d.label());
                let mut nw = word.clone();
                nw.push(np);
                if np == target {
                    return Some(nw);
                }
                next_frontier.push((np, nl, nw));
            }
        }
        frontier = next_frontier;
    }
    None
}

/// A word of length at most 5 inside `A(x)` taking `(y, η)` to the
/// neighbor `y2`.
pub fn find_word_lemma1(y: Vertex, y2: Vertex, eta: LocalLabels, x: Vertex) -> Result<Word> {
    if !in_a(x, y) || !in_a(x, y2) || !y.is_neighbor(y2) || eta.centre() != x {
        return Err(Error::Usage(format!("need y, y' adjacent in A({x}); got {y}, {y2}")));
    }
    find_word(y, eta, &|v| in_a(x, v), y2, 5)
        .ok_or_else(|| Error::Construction(format!("no word of length <= 5 from {y} to {y2} in A({x})")))
}

/// Shortest lattice route (excluding `from`) inside `region` to the first
/// vertex satisfying `goal`.
pub fn lattice_route(
    from: Vertex,
    region: &dyn Fn(Vertex) -> bool,
    goal: &dyn Fn(Vertex) -> bool,
) -> Option<Vec<Vertex>> {
    let mut prev: HashMap<Vertex, Vertex> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    prev.insert(from, from);
    while let Some(v) = queue.pop_front() {
        if v != from && goal(v) {
            let mut route = vec![v];
            let mut u = v;
            while prev[&u] != from {
                u = prev[&u];
                route.push(u);
            }
            route.reverse();
            return Some(route);
        }
        for d in Direction::ALL {
            let u = v.step(d);
            if region(u) && !prev.contains_key(&u) {
                prev.insert(u, v);
                queue.push_back(u);
            }
        }
    }
    None
}

/// Follow a lattice route hop by hop, one short word per hop.
fn chain(x: Vertex, start: Vertex, eta: &mut LocalLabels, route: &[Vertex]) -> Result<Word> {
    let mut word = Vec::new();
    let mut here = start;
    for &hop in route {
        let w = find_word_lemma1(here, hop, *eta, x)?;
        eta.advance(here, &w);
        word.extend_from_slice(&w);
        here = hop;
    }
    Ok(word)
}

/// A loop at `y` inside `A(x)` that visits `y` only at its end and so flips
/// the label at `y` exactly once: one forced step that stays in `A(x)`, then
/// a shortest word back.
fn flip_loop(x: Vertex, y: Vertex, eta: &mut LocalLabels) -> Result<Word> {
    let d = allowed_directions(eta.get(y))
        .into_iter()
        .find(|d| in_a(x, y.step(*d)))
        .ok_or_else(|| Error::Construction(format!("no move from {y} stays in A({x})")))?;
    let first = y.step(d);
    let mut w = vec![first];
    eta.set(y, d.label());
    let back = find_word_lemma1(first, y, *eta, x)?;
    eta.advance(first, &back);
    w.extend(back);
    Ok(w)
}

/// Per-stage length budgets of the six-stage loop construction.
pub const STAGE_BUDGETS: [usize; 6] = [15, 6, 1, 1, 25, 10];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma2Word {
    pub word: Word,
    pub stages: [usize; 6],
}

/// A loop from `y ∈ D(x)` back to `y` inside `A(x) ∪ {x}` that restores the
/// label of `y` and passes through `x` exactly once.
pub fn find_word_lemma2(y: Vertex, eta: LocalLabels, x: Vertex) -> Result<Lemma2Word> {
    if !in_d(x, y) || eta.centre() != x {
        return Err(Error::Usage(format!("{y} is not in D({x})")));
    }
    let in_ax = |v: Vertex| in_a(x, v);
    let mut labels = eta;
    let mut stages = [0usize; 6];
    let mut word = Vec::new();

    // w1: to a neighbor of x.
    let route = lattice_route(y, &in_ax, &|v| v.is_neighbor(x))
        .ok_or_else(|| Error::Construction("A(x) is disconnected".into()))?;
    let w1 = chain(x, y, &mut labels, &route)?;
    let y1 = *route.last().expect("route is nonempty");
    stages[0] = w1.len();
    word.extend(w1);

    // w2: make the step into x admissible.
    let into_x = y1.direction_to(x).expect("y1 neighbors x");
    if !allowed_directions(labels.get(y1)).contains(&into_x) {
        let w2 = flip_loop(x, y1, &mut labels)?;
        stages[1] = w2.len();
        word.extend(w2);
    }

    // w3: step into x.
    labels.set(y1, into_x.label());
    word.push(x);
    stages[2] = 1;

    // w4: step out of x.
    let out = match labels.get(x) {
        Label::V => Direction::East,
        Label::H => Direction::North,
    };
    labels.set(x, out.label());
    let y4 = x.step(out);
    word.push(y4);
    stages[3] = 1;

    // w5: back to y.
    let route = lattice_route(y4, &in_ax, &|v| v == y)
        .ok_or_else(|| Error::Construction("A(x) is disconnected".into()))?;
    let w5 = chain(x, y4, &mut labels, &route)?;
    stages[4] = w5.len();
    word.extend(w5);

    // w6: restore the label at y.
    if labels.get(y) != eta.get(y) {
        let w6 = flip_loop(x, y, &mut labels)?;
        stages[5] = w6.len();
        word.extend(w6);
    }

    for (i, (&s, &b)) in stages.iter().zip(STAGE_BUDGETS.iter()).enumerate() {
        if s > b {
            return Err(Error::Construction(format!("stage {} has length {s} > {b}", i + 1)));
        }
    }
    Ok(Lemma2Word { word, stages })
}

/// `φ(w)`: splice a loop through `x` in at the last visit of `w` to `D(x)`.
/// `w` must be a terminal admissible word from the origin under `rho` that
/// visits `x`.
pub fn phi(w: &[Vertex], rho: &dyn Fn(Vertex) -> Label, x: Vertex, k: u64, r: f64) -> Result<Word> {
    if admissibility(w, ORIGIN, rho).is_err() || !is_terminal_word(w, k, r) || count_visits(w, x) == 0 {
        return Err(Error::Usage("phi needs a terminal admissible word that visits x".into()));
    }
    let ell = w
        .iter()
        .rposition(|&v| in_d(x, v))
        .ok_or_else(|| Error::Construction("word visits x but never D(x)".into()))?;
    let state = admissibility(&w[..=ell], ORIGIN, rho)?;
    let local = LocalLabels::from_fn(x, |v| state.label(v, rho));
    let loop_word = find_word_lemma2(w[ell], local, x)?;
    let mut out = Vec::with_capacity(w.len() + loop_word.word.len());
    out.extend_from_slice(&w[..=ell]);
    out.extend_from_slice(&loop_word.word);
    out.extend_from_slice(&w[ell + 1..]);
    Ok(out)
}

/// Outcome of applying `φ` to a list of words.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiCheck {
    pub words: usize,
    /// Images that failed admissibility or termination.
    pub not_in_j1: usize,
    /// Images whose visit count to `x` is not one more.
    pub bad_increment: usize,
    pub max_growth: usize,
    pub max_preimage: usize,
}

impl PhiCheck {
    pub fn holds(&self) -> bool {
        self.not_in_j1 == 0 && self.bad_increment == 0 && self.max_growth <= 58 && self.max_preimage <= 58
    }
}

pub fn check_phi(words: &[Word], rho: &dyn Fn(Vertex) -> Label, x: Vertex, k: u64, r: f64) -> Result<PhiCheck> {
    let mut report = PhiCheck { words: words.len(), ..Default::default() };
    let mut images: HashMap<Word, usize> = HashMap::new();
    for w in words {
        let img = phi(w, rho, x, k, r)?;
        if admissibility(&img, ORIGIN, rho).is_err() || !is_terminal_word(&img, k, r) {
            report.not_in_j1 += 1;
        }
        if count_visits(&img, x) != count_visits(w, x) + 1 {
            report.bad_increment += 1;
        }
        report.max_growth = report.max_growth.max(img.len() - w.len());
        *images.entry(img).or_insert(0) += 1;
    }
    report.max_preimage = images.values().copied().max().unwrap_or(0);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    fn x0() -> Vertex {
        Vertex::new(3, 1)
    }

    fn rel(i: i32, j: i32) -> Vertex {
        x0() + Vertex::new(i, j)
    }

    #[test]
    fn local_labels_roundtrip() {
        let mut l = LocalLabels::new(x0(), 0);
        l.set(rel(2, -2), Label::V);
        assert_eq!(l.get(rel(2, -2)), Label::V);
        assert_eq!(l.get(rel(-2, 2)), Label::H);
        l.set(rel(2, -2), Label::H);
        assert_eq!(l.mask(), 0);
    }

    #[test]
    fn short_word_single_step_case() {
        let mut l = LocalLabels::new(x0(), 0);
        l.set(rel(2, 2), Label::V);
        let w = find_word_lemma1(rel(2, 2), rel(1, 2), l, x0()).unwrap();
        assert_eq!(w, vec![rel(1, 2)]);
    }

    #[test]
    fn short_word_random_windows() {
        let mut rng = seed::rng(12);
        let x = x0();
        for _ in 0..2000 {
            let eta = LocalLabels::random(x, &mut rng);
            let a = super::super::a_set(x);
            let y = a[rng.random_range(0..a.len())];
            let nbrs: Vec<Vertex> = crate::lattice::neighbors(y).into_iter().filter(|&u| in_a(x, u)).collect();
            let y2 = nbrs[rng.random_range(0..nbrs.len())];
            let w = find_word_lemma1(y, y2, eta, x).unwrap();
            assert!(w.len() <= 5);
            assert_eq!(*w.last().unwrap(), y2);
            assert!(w.iter().all(|&v| in_a(x, v)));
            assert!(admissibility(&w, y, &|v| eta.get(v)).is_ok());
        }
    }

    #[test]
    fn loop_word_postconditions() {
        let mut rng = seed::rng(5);
        let x = x0();
        for y in super::super::d_set(x) {
            for _ in 0..100 {
                let eta = LocalLabels::random(x, &mut rng);
                let out = find_word_lemma2(y, eta, x).unwrap();
                let w = &out.word;
                assert!(w.len() <= 58);
                assert_eq!(*w.last().unwrap(), y);
                assert_eq!(count_visits(w, x), 1);
                assert!(w.iter().all(|&v| v == x || in_a(x, v)));
                let ev = admissibility(w, y, &|v| eta.get(v)).unwrap();
                assert_eq!(ev.label(y, &|v| eta.get(v)), eta.get(y));
                assert_ne!(ev.label(x, &|v| eta.get(v)), eta.get(x));
                assert_eq!(out.stages.iter().sum::<usize>(), w.len());
            }
        }
    }

    #[test]
    fn word_inputs_validated() {
        let eta = LocalLabels::new(x0(), 0);
        assert!(find_word_lemma1(rel(1, 1), rel(1, 3), eta, x0()).is_err());
        assert!(find_word_lemma2(rel(1, 1), eta, x0()).is_err());
    }

    #[test]
    fn phi_rejects_words_missing_x() {
        let rho = |_: Vertex| Label::V;
        let w = vec![Vertex::new(1, 0), ORIGIN];
        assert!(phi(&w, &rho, x0(), 1, 7.0).is_err());
    }

    #[test]
    fn route_avoids_centre() {
        let x = x0();
        let r = lattice_route(rel(-2, 0), &|v| in_a(x, v), &|v| v == rel(2, 0)).unwrap();
        assert!(!r.contains(&x));
        assert_eq!(r.len(), 6);
    }
}
