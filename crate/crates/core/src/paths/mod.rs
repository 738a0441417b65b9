//! Admissible paths of the q = 1 walk, the neighborhoods `A(x)` and `D(x)`,
//! word constructions inside them, the surgery map `φ`, and exact parity
//! enumeration.
//!
//! At q = 1 the walker at a site labeled H must step vertically and one at a
//! site labeled V must step horizontally; the site then carries the label of
//! the step taken. A word is the sequence of positions after each step.

mod enumeration;
mod words;

pub use enumeration::{
    collect_j1, enumerate_parities, mc_parities, ParityEstimate, PathEnumeration, TreeEvent, TreeWalker,
};
pub use words::{
    check_phi, find_word, find_word_lemma1, find_word_lemma2, lattice_route, phi, Lemma2Word, LocalLabels,
    PhiCheck, STAGE_BUDGETS,
};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::{Direction, Label, Vertex, ORIGIN};

pub type Word = Vec<Vertex>;

/// The step directions a q = 1 walker may take from a site with `label`.
pub fn allowed_directions(label: Label) -> [Direction; 2] {
    label.flip().directions()
}

/// `A(x)`: the 5×5 square around `x`, without `x`.
pub fn in_a(x: Vertex, v: Vertex) -> bool {
    let d = v - x;
    d.x.abs() <= 2 && d.y.abs() <= 2 && d != ORIGIN
}

/// `D(x)`: the outer ring of `A(x)`.
pub fn in_d(x: Vertex, v: Vertex) -> bool {
    let d = v - x;
    in_a(x, v) && (d.x.abs() == 2 || d.y.abs() == 2)
}

pub fn a_set(x: Vertex) -> Vec<Vertex> {
    (-2..=2)
        .flat_map(|j| (-2..=2).map(move |i| x + Vertex::new(i, j)))
        .filter(|&v| v != x)
        .collect()
}

pub fn d_set(x: Vertex) -> Vec<Vertex> {
    a_set(x).into_iter().filter(|&v| in_d(x, v)).collect()
}

/// Labels `η_m` after a word, stored as changes over the initial labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Evolved {
    pub end: Vertex,
    pub changes: HashMap<Vertex, Label>,
}

impl Evolved {
    pub fn label(&self, v: Vertex, initial: &dyn Fn(Vertex) -> Label) -> Label {
        self.changes.get(&v).copied().unwrap_or_else(|| initial(v))
    }
}

/// Check that `w` is admissible for `(start, η)` and return the evolved
/// state; the error carries the first offending index.
pub fn admissibility(w: &[Vertex], start: Vertex, eta: &dyn Fn(Vertex) -> Label) -> Result<Evolved> {
    let mut state = Evolved { end: start, changes: HashMap::new() };
    for (i, &next) in w.iter().enumerate() {
        let here = state.end;
        let d = here.direction_to(next).ok_or(Error::NotAdmissible { index: i })?;
        let label = state.label(here, eta);
        if !allowed_directions(label).contains(&d) {
            return Err(Error::NotAdmissible { index: i });
        }
        state.changes.insert(here, d.label());
        state.end = next;
    }
    Ok(state)
}

pub fn is_admissible(w: &[Vertex], start: Vertex, eta: &dyn Fn(Vertex) -> Label) -> bool {
    admissibility(w, start, eta).is_ok()
}

/// Whether `w` records a frozen walk from the origin stopped exactly at
/// its `k`-th return or on first reaching `∂B_r`.
pub fn is_terminal_word(w: &[Vertex], k: u64, r: f64) -> bool {
    let Some((&last, body)) = w.split_last() else {
        return k == 0;
    };
    let on_b = |v: Vertex| crate::lattice::on_boundary(v, r);
    let returns = |s: &[Vertex]| s.iter().filter(|v| v.is_origin()).count() as u64;
    if body.iter().any(|&v| on_b(v)) || returns(body) >= k {
        return false;
    }
    (last.is_origin() && returns(w) == k) || on_b(last)
}

/// Number of occurrences of `x` in `w`.
pub fn count_visits(w: &[Vertex], x: Vertex) -> usize {
    w.iter().filter(|&&v| v == x).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_sizes() {
        let x = Vertex::new(3, 1);
        assert_eq!(a_set(x).len(), 24);
        assert_eq!(d_set(x).len(), 16);
        assert!(!in_a(x, x));
        assert!(in_d(x, x + Vertex::new(2, -1)));
        assert!(!in_d(x, x + Vertex::new(1, 1)));
    }

    #[test]
    fn empty_word_admissible() {
        let eta = |_: Vertex| Label::H;
        let ev = admissibility(&[], ORIGIN, &eta).unwrap();
        assert_eq!(ev.end, ORIGIN);
        assert!(ev.changes.is_empty());
    }

    #[test]
    fn h_site_forbids_horizontal() {
        let eta = |_: Vertex| Label::H;
        assert!(!is_admissible(&[Vertex::new(1, 0)], ORIGIN, &eta));
        assert!(is_admissible(&[Vertex::new(0, 1)], ORIGIN, &eta));
        assert!(matches!(
            admissibility(&[Vertex::new(0, 1), Vertex::new(0, 3)], ORIGIN, &eta),
            Err(Error::NotAdmissible { index: 1 })
        ));
    }

    #[test]
    fn labels_flip_on_each_visit() {
        let eta = |_: Vertex| Label::V;
        // (0,0) V -> east; (1,0) V -> west back; (0,0) now H -> north.
        let w = [Vertex::new(1, 0), ORIGIN, Vertex::new(0, 1)];
        let ev = admissibility(&w, ORIGIN, &eta).unwrap();
        assert_eq!(ev.changes[&ORIGIN], Label::V);
        assert_eq!(ev.changes[&Vertex::new(1, 0)], Label::H);
    }

    #[test]
    fn terminal_words() {
        assert!(is_terminal_word(&[Vertex::new(1, 0), ORIGIN], 1, 5.0));
        assert!(!is_terminal_word(&[Vertex::new(1, 0), ORIGIN], 2, 5.0));
        assert!(is_terminal_word(&[Vertex::new(1, 0)], 1, 1.0));
        assert!(!is_terminal_word(&[Vertex::new(1, 0), Vertex::new(2, 0)], 1, 1.0));
    }
}
