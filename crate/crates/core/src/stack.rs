//! Stack walks: deterministic multi-walker walks driven by per-vertex stacks,
//! turn orders, popping operations, and sink-absorbed walks on small finite
//! graphs.
//!
//! A stack is never materialized. It is a rule `(vertex, index) -> neighbor`
//! plus a per-vertex count of items already popped; the top of the stack at
//! `v` is `rule(v, popped[v])`. A step pops the walker's current stack and
//! moves the walker to the new top.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{neighbors, Vertex};
use crate::seed;

/// Source of stack items: `item(v, m)` is the `m`-th card under `v`.
pub trait StackRule<V> {
    fn item(&self, v: V, index: u64) -> V;
}

impl<V, F: Fn(V, u64) -> V> StackRule<V> for F {
    fn item(&self, v: V, index: u64) -> V {
        self(v, index)
    }
}

/// A lazy stack: a generating rule plus popped counters.
#[derive(Clone, Debug)]
pub struct Stack<V, R> {
    rule: R,
    popped: HashMap<V, u64>,
}

impl<V: Copy + Eq + Hash, R: StackRule<V>> Stack<V, R> {
    pub fn new(rule: R) -> Self {
        Stack { rule, popped: HashMap::new() }
    }

    pub fn popped(&self, v: V) -> u64 {
        self.popped.get(&v).copied().unwrap_or(0)
    }

    /// `ξ(v, m)` for the current (partially popped) stack.
    pub fn item(&self, v: V, m: u64) -> V {
        self.rule.item(v, self.popped(v) + m)
    }

    pub fn top(&self, v: V) -> V {
        self.item(v, 0)
    }

    /// The popping operation at `v`.
    pub fn pop_at(&mut self, v: V) {
        *self.popped.entry(v).or_insert(0) += 1;
    }

    /// `pop_at` returning a new stack.
    pub fn popped_at(&self, v: V) -> Self
    where
        R: Clone,
    {
        let mut s = self.clone();
        s.pop_at(v);
        s
    }

    pub fn rule(&self) -> &R {
        &self.rule
    }

    pub fn popped_counts(&self) -> &HashMap<V, u64> {
        &self.popped
    }
}

/// Which walker moves at step `t >= 1`. Walkers are numbered `1..=n`; `0`
/// means nobody moves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TurnOrder {
    /// `o_t ≡ t (mod n)`, taking values in `1..=n`.
    Cyclic(usize),
    /// Uniform over `1..=n`, from a counter-based hash of `(seed, t)`.
    Random { n: usize, seed: u64 },
    /// Repeats the listed walkers forever; an empty list never moves anyone.
    CycleOver(Vec<usize>),
    /// Follows `prefix` for the first `prefix.len()` steps, then `then`.
    Prefixed { prefix: Vec<usize>, then: Box<TurnOrder> },
}

impl TurnOrder {
    pub fn cyclic(n: usize) -> Self {
        TurnOrder::Cyclic(n)
    }

    pub fn at(&self, t: u64) -> usize {
        debug_assert!(t >= 1);
        match self {
            TurnOrder::Cyclic(n) => ((t - 1) % *n as u64) as usize + 1,
            TurnOrder::Random { n, seed } => (seed::derive(*seed, 0, t) % *n as u64) as usize + 1,
            TurnOrder::CycleOver(list) => {
                if list.is_empty() {
                    0
                } else {
                    list[((t - 1) % list.len() as u64) as usize]
                }
            }
            TurnOrder::Prefixed { prefix, then } => {
                if (t as usize) <= prefix.len() {
                    prefix[t as usize - 1]
                } else {
                    then.at(t - prefix.len() as u64)
                }
            }
        }
    }

    /// True when every walker in `1..=n` is scheduled infinitely often.
    pub fn is_regular(&self, n: usize) -> bool {
        match self {
            TurnOrder::Cyclic(m) => *m == n,
            TurnOrder::Random { n: m, .. } => *m == n,
            TurnOrder::CycleOver(list) => (1..=n).all(|i| list.contains(&i)),
            TurnOrder::Prefixed { then, .. } => then.is_regular(n),
        }
    }
}

/// Multi-walker stack walk state.
#[derive(Clone, Debug)]
pub struct StackWalk<V, R> {
    pub positions: Vec<V>,
    pub stack: Stack<V, R>,
    visits: HashMap<V, u64>,
    time: u64,
}

impl<V: Copy + Eq + Hash, R: StackRule<V>> StackWalk<V, R> {
    pub fn new(positions: Vec<V>, stack: Stack<V, R>) -> Self {
        StackWalk { positions, stack, visits: HashMap::new(), time: 0 }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Move walker `i` (0-based): pop its stack and go to the new top.
    pub fn step(&mut self, i: usize) -> V {
        let from = self.positions[i];
        self.stack.pop_at(from);
        let to = self.stack.top(from);
        self.positions[i] = to;
        *self.visits.entry(to).or_insert(0) += 1;
        self.time += 1;
        to
    }

    /// Let time pass without moving anyone.
    pub fn idle(&mut self) {
        self.time += 1;
    }

    /// `R_t(v)`: transitions into `v` so far.
    pub fn visits(&self, v: V) -> u64 {
        self.visits.get(&v).copied().unwrap_or(0)
    }

    pub fn visit_counts(&self) -> &HashMap<V, u64> {
        &self.visits
    }
}

/// The state reached after one step of a single walker from `(x, ξ)`:
/// position `φ_x(ξ)(x, 0)` with stack `φ_x(ξ)`.
pub fn continuation<V: Copy + Eq + Hash, R: StackRule<V> + Clone>(x: V, stack: &Stack<V, R>) -> (V, Stack<V, R>) {
    let next = stack.popped_at(x);
    (next.top(x), next)
}

/// A stack on Z² whose items are seeded uniform neighbors.
#[derive(Clone, Copy, Debug)]
pub struct SeededLatticeRule {
    pub seed: u64,
}

impl StackRule<Vertex> for SeededLatticeRule {
    fn item(&self, v: Vertex, index: u64) -> Vertex {
        let h = seed::site_hash(seed::mix64(self.seed ^ index.wrapping_mul(0xA24B_AED4_963E_E407)), v.x, v.y);
        neighbors(v)[(h >> 62) as usize]
    }
}

/// Simple connected undirected graph on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGraph {
    adj: Vec<Vec<usize>>,
}

impl FiniteGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a == b || a >= n || b >= n {
                return Err(Error::Parameter(format!("bad edge ({a},{b})")));
            }
            sets[a].insert(b);
            sets[b].insert(a);
        }
        let g = FiniteGraph { adj: sets.into_iter().map(|s| s.into_iter().collect()).collect() };
        if !g.is_connected() {
            return Err(Error::Parameter("graph is not connected".into()));
        }
        Ok(g)
    }

    /// Random spanning tree plus `extra` random chords.
    pub fn random_connected<G: Rng>(n: usize, extra: usize, rng: &mut G) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut edges = Vec::new();
        for k in 1..n {
            let parent = order[rng.random_range(0..k)];
            edges.push((order[k], parent));
        }
        for _ in 0..extra {
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                edges.push((a, b));
            }
        }
        FiniteGraph::from_edges(n, &edges).expect("tree plus chords is connected")
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.adj.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Regular stack rules on a finite graph.
#[derive(Clone, Debug)]
pub enum FiniteStackKind {
    /// Neighbors in cyclic order, starting at a per-vertex offset.
    Cyclic { offsets: Vec<usize> },
    /// Each consecutive block of `deg(v)` cards is a seeded shuffle of the
    /// neighbors of `v`.
    Shuffled { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct FiniteStackRule {
    graph: FiniteGraph,
    kind: FiniteStackKind,
}

impl FiniteStackRule {
    pub fn new(graph: FiniteGraph, kind: FiniteStackKind) -> Self {
        FiniteStackRule { graph, kind }
    }
}

impl StackRule<usize> for FiniteStackRule {
    fn item(&self, v: usize, index: u64) -> usize {
        let nbrs = self.graph.neighbors(v);
        let deg = nbrs.len() as u64;
        match &self.kind {
            FiniteStackKind::Cyclic { offsets } => nbrs[((offsets[v] as u64 + index) % deg) as usize],
            FiniteStackKind::Shuffled { seed } => {
                let block = index / deg;
                let mut perm = nbrs.to_vec();
                let mut rng = seed::rng(seed::derive(*seed, v as u64, block));
                perm.shuffle(&mut rng);
                perm[(index % deg) as usize]
            }
        }
    }
}

/// A stack walk on a finite graph whose walkers freeze on reaching a sink.
#[derive(Clone, Debug)]
pub struct FiniteSinkInstance {
    pub graph: FiniteGraph,
    pub walkers: Vec<usize>,
    pub stack: FiniteStackKind,
    pub sinks: BTreeSet<usize>,
}

/// Outcome of running a sink instance until every walker is frozen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbsorptionResult {
    /// Number of walkers frozen on each sink.
    pub final_positions: BTreeMap<usize, u64>,
    /// Transitions into each vertex.
    pub odometer: BTreeMap<usize, u64>,
    pub total_moves: u64,
}

pub const DEFAULT_MOVE_CAP: u64 = 1_000_000;

impl FiniteSinkInstance {
    /// Random instance: 6–20 vertices, 1–4 walkers, 1–3 sinks.
    pub fn random<G: Rng>(rng: &mut G) -> Self {
        let n = rng.random_range(6..=20);
        let extra = rng.random_range(0..=n);
        let graph = FiniteGraph::random_connected(n, extra, rng);
        let mut vertices: Vec<usize> = (0..n).collect();
        vertices.shuffle(rng);
        let n_sinks = rng.random_range(1..=3);
        let sinks: BTreeSet<usize> = vertices[..n_sinks].iter().copied().collect();
        let n_walkers = rng.random_range(1..=4);
        let walkers = (0..n_walkers).map(|_| rng.random_range(0..n)).collect();
        let stack = if rng.random_bool(0.5) {
            FiniteStackKind::Cyclic { offsets: (0..n).map(|v| rng.random_range(0..graph.neighbors(v).len())).collect() }
        } else {
            FiniteStackKind::Shuffled { seed: rng.random() }
        };
        FiniteSinkInstance { graph, walkers, stack, sinks }
    }

    fn fresh_walk(&self) -> StackWalk<usize, FiniteStackRule> {
        let rule = FiniteStackRule::new(self.graph.clone(), self.stack.clone());
        StackWalk::new(self.walkers.clone(), Stack::new(rule))
    }

    /// Run with `order` until all walkers sit on sinks.
    pub fn run_to_absorption(&self, order: &TurnOrder) -> Result<AbsorptionResult> {
        self.run_capped(order, DEFAULT_MOVE_CAP)
    }

    pub fn run_capped(&self, order: &TurnOrder, move_cap: u64) -> Result<AbsorptionResult> {
        let mut walk = self.fresh_walk();
        let n = self.walkers.len();
        let mut moves = 0u64;
        let mut t = 0u64;
        // Turns landing on frozen walkers or on 0 are idle; bound them too.
        let idle_cap = move_cap.saturating_mul(16).max(1 << 20);
        while !walk.positions.iter().all(|p| self.sinks.contains(p)) {
            t += 1;
            let who = order.at(t);
            if who == 0 || who > n || self.sinks.contains(&walk.positions[who - 1]) {
                walk.idle();
                if t - moves > idle_cap {
                    return Err(Error::MoveCap { cap: move_cap });
                }
                continue;
            }
            walk.step(who - 1);
            moves += 1;
            if moves > move_cap {
                return Err(Error::MoveCap { cap: move_cap });
            }
        }
        Ok(self.summarize(&walk, moves))
    }

    /// Run `order` for at most `horizon` turns (stopping early once all
    /// walkers are frozen) and return the visit counts.
    pub fn run_for(&self, order: &TurnOrder, horizon: u64) -> BTreeMap<usize, u64> {
        let mut walk = self.fresh_walk();
        let n = self.walkers.len();
        for t in 1..=horizon {
            if walk.positions.iter().all(|p| self.sinks.contains(p)) {
                break;
            }
            let who = order.at(t);
            if who == 0 || who > n || self.sinks.contains(&walk.positions[who - 1]) {
                walk.idle();
            } else {
                walk.step(who - 1);
            }
        }
        walk.visit_counts().iter().map(|(&v, &c)| (v, c)).collect()
    }

    fn summarize(&self, walk: &StackWalk<usize, FiniteStackRule>, moves: u64) -> AbsorptionResult {
        let mut final_positions = BTreeMap::new();
        for &p in &walk.positions {
            *final_positions.entry(p).or_insert(0) += 1;
        }
        AbsorptionResult {
            final_positions,
            odometer: walk.visit_counts().iter().map(|(&v, &c)| (v, c)).collect(),
            total_moves: moves,
        }
    }
}

/// Vertex-wise comparison of visit counts between two turn orders.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonotonicityReport {
    pub vertices_checked: usize,
    /// `(vertex, visits under A, visits under B)` where A exceeded B.
    pub violations: Vec<(usize, u64, u64)>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check `R(x; order_a) <= R_∞(x; order_b)` for every vertex, where `order_a`
/// is run for `horizon` turns and `order_b` (regular) to absorption.
pub fn check_monotonicity(
    inst: &FiniteSinkInstance,
    order_a: &TurnOrder,
    order_b: &TurnOrder,
    horizon: u64,
) -> Result<MonotonicityReport> {
    if !order_b.is_regular(inst.walkers.len()) {
        return Err(Error::Parameter("reference turn order must be regular".into()));
    }
    let a = inst.run_for(order_a, horizon);
    let b = inst.run_to_absorption(order_b)?.odometer;
    let mut report = MonotonicityReport { vertices_checked: inst.graph.len(), violations: Vec::new() };
    for v in 0..inst.graph.len() {
        let ra = a.get(&v).copied().unwrap_or(0);
        let rb = b.get(&v).copied().unwrap_or(0);
        if ra > rb {
            report.violations.push((v, ra, rb));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ORIGIN;

    fn path_graph(n: usize) -> FiniteGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        FiniteGraph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn step_pops_then_moves_to_new_top() {
        // index 0 is the current rotor; the first step reads index 1.
        let rule = |v: Vertex, m: u64| if m == 1 { v + Vertex::new(1, 0) } else { v + Vertex::new(0, 1) };
        let mut walk = StackWalk::new(vec![ORIGIN], Stack::new(rule));
        let to = walk.step(0);
        assert_eq!(to, Vertex::new(1, 0));
        assert_eq!(walk.stack.popped(ORIGIN), 1);
        assert_eq!(walk.visits(Vertex::new(1, 0)), 1);
    }

    #[test]
    fn consecutive_pops_consume_indices_in_order() {
        let rule = |v: Vertex, m: u64| neighbors(v)[(m % 4) as usize];
        let mut s = Stack::new(rule);
        assert_eq!(s.top(ORIGIN), Vertex::new(1, 0));
        s.pop_at(ORIGIN);
        assert_eq!(s.top(ORIGIN), Vertex::new(-1, 0));
        s.pop_at(ORIGIN);
        assert_eq!(s.top(ORIGIN), Vertex::new(0, 1));
        // φ_x shifts by one: the new top is the old item 1.
        let old = Stack::new(rule);
        let popped = old.popped_at(ORIGIN);
        assert_eq!(popped.top(ORIGIN), old.item(ORIGIN, 1));
    }

    #[test]
    fn pops_commute() {
        let rule = SeededLatticeRule { seed: 5 };
        let (x, y) = (ORIGIN, Vertex::new(3, -2));
        let mut a = Stack::new(rule);
        a.pop_at(x);
        a.pop_at(y);
        let mut b = Stack::new(rule);
        b.pop_at(y);
        b.pop_at(x);
        for v in [x, y, Vertex::new(1, 1)] {
            for m in 0..20 {
                assert_eq!(a.item(v, m), b.item(v, m));
            }
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let run = || {
            let mut w = StackWalk::new(vec![ORIGIN, ORIGIN], Stack::new(SeededLatticeRule { seed: 11 }));
            let order = TurnOrder::cyclic(2);
            (1..=500).map(|t| w.step(order.at(t) - 1)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn turn_orders() {
        let c = TurnOrder::cyclic(3);
        assert_eq!((1..=7).map(|t| c.at(t)).collect::<Vec<_>>(), vec![1, 2, 3, 1, 2, 3, 1]);
        let p = TurnOrder::Prefixed { prefix: vec![0, 2], then: Box::new(TurnOrder::cyclic(2)) };
        assert_eq!((1..=5).map(|t| p.at(t)).collect::<Vec<_>>(), vec![0, 2, 1, 2, 1]);
        assert!(p.is_regular(2));
        assert!(!TurnOrder::CycleOver(vec![1]).is_regular(2));
        let r = TurnOrder::Random { n: 4, seed: 3 };
        assert!((1..=1000).all(|t| (1..=4).contains(&r.at(t))));
    }

    #[test]
    fn no_walkers_no_moves() {
        let inst = FiniteSinkInstance {
            graph: path_graph(4),
            walkers: vec![],
            stack: FiniteStackKind::Cyclic { offsets: vec![0; 4] },
            sinks: [3].into(),
        };
        let res = inst.run_to_absorption(&TurnOrder::CycleOver(vec![])).unwrap();
        assert_eq!(res.total_moves, 0);
        assert!(res.odometer.is_empty());
    }

    #[test]
    fn walker_on_sink_is_frozen() {
        let inst = FiniteSinkInstance {
            graph: path_graph(4),
            walkers: vec![3],
            stack: FiniteStackKind::Cyclic { offsets: vec![0; 4] },
            sinks: [3].into(),
        };
        let res = inst.run_to_absorption(&TurnOrder::cyclic(1)).unwrap();
        assert_eq!(res.total_moves, 0);
        assert_eq!(res.final_positions, BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn path_walk_absorbs() {
        // Path 0-1-2-3, sinks at both ends, walker at 1. Cyclic stacks
        // starting at offset 0: vertex 1 has neighbors [0, 2].
        let inst = FiniteSinkInstance {
            graph: path_graph(4),
            walkers: vec![1],
            stack: FiniteStackKind::Cyclic { offsets: vec![0; 4] },
            sinks: [0, 3].into(),
        };
        let res = inst.run_to_absorption(&TurnOrder::cyclic(1)).unwrap();
        // First pop at 1 reads index 1 -> vertex 2; at 2 ([1,3]) reads 3.
        assert_eq!(res.final_positions, BTreeMap::from([(3, 1)]));
        assert_eq!(res.total_moves, 2);
    }

    #[test]
    fn shuffled_stack_is_regular_per_block() {
        let g = path_graph(5);
        let rule = FiniteStackRule::new(g.clone(), FiniteStackKind::Shuffled { seed: 9 });
        for v in 0..5 {
            let deg = g.neighbors(v).len() as u64;
            for block in 0..10 {
                let mut seen: Vec<usize> = (0..deg).map(|j| rule.item(v, block * deg + j)).collect();
                seen.sort();
                assert_eq!(seen, g.neighbors(v));
            }
        }
    }

    #[test]
    fn disconnected_graph_rejected() {
        assert!(FiniteGraph::from_edges(4, &[(0, 1), (2, 3)]).is_err());
    }

    #[test]
    fn same_order_gives_equal_counts() {
        let mut rng = seed::rng(17);
        for _ in 0..20 {
            let inst = FiniteSinkInstance::random(&mut rng);
            let o = TurnOrder::cyclic(inst.walkers.len());
            let rep = check_monotonicity(&inst, &o, &o, 1 << 24).unwrap();
            assert!(rep.holds());
            let a = inst.run_for(&o, 1 << 24);
            let b = inst.run_to_absorption(&o).unwrap().odometer;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn non_regular_reference_rejected() {
        let mut rng = seed::rng(1);
        let mut inst = FiniteSinkInstance::random(&mut rng);
        inst.walkers = vec![0, 1];
        assert!(check_monotonicity(&inst, &TurnOrder::cyclic(2), &TurnOrder::CycleOver(vec![1]), 10).is_err());
    }
}
