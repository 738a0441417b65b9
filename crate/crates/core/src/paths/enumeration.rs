use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{allowed_directions, Word};
use crate::error::{Error, Result};
use crate::lattice::{DiskMask, Label, Vertex, ORIGIN};
use crate::rwlm::{FrozenEngine, FrozenParams, LocalMechanism, StepEvent, StepObserver};
use crate::seed;

/// A leaf of the q = 1 outcome tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeEvent<'a> {
    /// A terminal word: stopped at the `k`-th return or on `∂B_r`.
    Terminal { word: &'a [Vertex], marked: u32 },
    /// A prefix cut off at the depth cap.
    Truncated { word: &'a [Vertex], marked: u32 },
}

/// Depth-first walker over the binary tree of q = 1 frozen walks from the
/// origin, with labels kept in a dense array and restored on backtrack.
#[derive(Clone, Debug)]
pub struct TreeWalker {
    k: u64,
    mask: DiskMask,
    half: i32,
    side: usize,
    labels: Vec<Label>,
    max_depth: usize,
    marked: Option<Vertex>,
    path: Vec<Vertex>,
    returns: u64,
    marked_count: u32,
    nodes: u64,
}

impl TreeWalker {
    pub fn new(rho: &dyn Fn(Vertex) -> Label, k: u64, r: f64, max_depth: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Parameter("k must be >= 1".into()));
        }
        if !(r >= 1.0) {
            return Err(Error::Parameter(format!("radius must be >= 1, got {r}")));
        }
        let mask = DiskMask::new(r);
        let half = mask.half_width();
        let side = (2 * half + 1) as usize;
        let mut labels = Vec::with_capacity(side * side);
        for y in -half..=half {
            for x in -half..=half {
                labels.push(rho(Vertex::new(x, y)));
            }
        }
        Ok(TreeWalker {
            k,
            mask,
            half,
            side,
            labels,
            max_depth,
            marked: None,
            path: Vec::with_capacity(max_depth),
            returns: 0,
            marked_count: 0,
            nodes: 0,
        })
    }

    /// Count visits to `x` along each word.
    pub fn mark(mut self, x: Vertex) -> Self {
        self.marked = Some(x);
        self
    }

    pub fn node_count(&self) -> u64 {
        self.nodes
    }

    #[inline]
    fn slot(&self, v: Vertex) -> usize {
        ((v.y + self.half) as usize) * self.side + (v.x + self.half) as usize
    }

    fn push(&mut self, from: Vertex, to: Vertex, label: Label) {
        let s = self.slot(from);
        self.labels[s] = label;
        self.path.push(to);
        if to.is_origin() {
            self.returns += 1;
        }
        if Some(to) == self.marked {
            self.marked_count += 1;
        }
    }

    fn pop(&mut self, from: Vertex, old: Label) {
        let to = self.path.pop().expect("nonempty path");
        if to.is_origin() {
            self.returns -= 1;
        }
        if Some(to) == self.marked {
            self.marked_count -= 1;
        }
        let s = self.slot(from);
        self.labels[s] = old;
    }

    /// Apply a fixed prefix; returns false if it is not admissible.
    fn enter(&mut self, prefix: &[Vertex]) -> bool {
        for &next in prefix {
            let here = *self.path.last().unwrap_or(&ORIGIN);
            let Some(d) = here.direction_to(next) else { return false };
            if !allowed_directions(self.labels[self.slot(here)]).contains(&d) {
                return false;
            }
            self.push(here, next, d.label());
        }
        true
    }

    /// Visit every leaf below the empty word.
    pub fn walk(&mut self, f: &mut dyn FnMut(TreeEvent<'_>)) {
        self.visit(f);
    }

    /// Visit every leaf below `prefix`.
    pub fn walk_from(&mut self, prefix: &[Vertex], f: &mut dyn FnMut(TreeEvent<'_>)) -> Result<()> {
        let saved = (self.labels.clone(), self.path.clone(), self.returns, self.marked_count);
        if !self.enter(prefix) {
            (self.labels, self.path, self.returns, self.marked_count) = saved;
            return Err(Error::NotAdmissible { index: 0 });
        }
        self.visit(f);
        (self.labels, self.path, self.returns, self.marked_count) = saved;
        Ok(())
    }

    fn visit(&mut self, f: &mut dyn FnMut(TreeEvent<'_>)) {
        self.nodes += 1;
        let pos = *self.path.last().unwrap_or(&ORIGIN);
        if !self.path.is_empty() && ((pos.is_origin() && self.returns == self.k) || self.mask.on_boundary(pos)) {
            f(TreeEvent::Terminal { word: &self.path, marked: self.marked_count });
            return;
        }
        if self.path.len() >= self.max_depth {
            f(TreeEvent::Truncated { word: &self.path, marked: self.marked_count });
            return;
        }
        let s = self.slot(pos);
        let old = self.labels[s];
        for d in allowed_directions(old) {
            self.push(pos, pos.step(d), d.label());
            self.visit(f);
            self.pop(pos, old);
        }
    }
}

/// Parity masses of visits to `x` over terminal words, with the mass of
/// prefixes cut at the depth cap kept apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathEnumeration {
    pub p_even: f64,
    pub p_odd: f64,
    pub p_zero: f64,
    pub residual: f64,
    pub depth: usize,
    pub node_count: u64,
    pub partial: bool,
}

impl PathEnumeration {
    pub fn total(&self) -> f64 {
        self.p_even + self.p_odd + self.p_zero + self.residual
    }

    /// Range of `p_even / p_odd` consistent with any split of the residual.
    pub fn ratio_bracket(&self) -> (f64, f64) {
        let lo = self.p_even / (self.p_odd + self.residual);
        let hi = if self.p_odd > 0.0 { (self.p_even + self.residual) / self.p_odd } else { f64::INFINITY };
        (lo, hi)
    }
}

#[derive(Clone, Copy, Default)]
struct Buckets {
    even: u128,
    odd: u128,
    zero: u128,
    residual: u128,
    nodes: u64,
}

impl Buckets {
    fn merge(self, o: Buckets) -> Buckets {
        Buckets {
            even: self.even + o.even,
            odd: self.odd + o.odd,
            zero: self.zero + o.zero,
            residual: self.residual + o.residual,
            nodes: self.nodes + o.nodes,
        }
    }
}

const SPLIT_LEVELS: usize = 8;
const MAX_DEPTH: usize = 100;

/// Exact parity masses for the q = 1 frozen walk to depth `depth`. The top
/// levels of the tree are expanded first and their subtrees run in parallel;
/// the result does not depend on the thread count.
pub fn enumerate_parities(
    rho: &(dyn Fn(Vertex) -> Label + Sync),
    x: Vertex,
    k: u64,
    r: f64,
    depth: usize,
) -> Result<PathEnumeration> {
    if depth > MAX_DEPTH {
        return Err(Error::Parameter(format!("depth must be <= {MAX_DEPTH}, got {depth}")));
    }
    let base = TreeWalker::new(rho, k, r, depth)?.mark(x);
    let unit = |len: usize| 1u128 << (depth - len);
    let tally = |b: &mut Buckets, ev: TreeEvent<'_>| match ev {
        TreeEvent::Terminal { word, marked } => {
            let u = unit(word.len());
            match marked {
                0 => b.zero += u,
                m if m % 2 == 0 => b.even += u,
                _ => b.odd += u,
            }
        }
        TreeEvent::Truncated { word, .. } => b.residual += unit(word.len()),
    };

    let split = SPLIT_LEVELS.min(depth);
    let mut top = Buckets::default();
    let mut frontier: Vec<Word> = Vec::new();
    {
        let mut w = base.clone();
        w.max_depth = split;
        w.walk(&mut |ev| match ev {
            TreeEvent::Truncated { word, .. } if split < depth => frontier.push(word.to_vec()),
            other => tally(&mut top, other),
        });
        top.nodes = w.node_count() - frontier.len() as u64;
    }
    let total = frontier
        .par_iter()
        .map_init(
            || base.clone(),
            |w, prefix| {
                let mut b = Buckets::default();
                let before = w.node_count();
                w.walk_from(prefix, &mut |ev| tally(&mut b, ev)).expect("prefix came from the tree");
                b.nodes = w.node_count() - before;
                b
            },
        )
        .collect::<Vec<_>>()
        .into_iter()
        .fold(top, Buckets::merge);

    let scale = (2.0f64).powi(-(depth as i32));
    Ok(PathEnumeration {
        p_even: total.even as f64 * scale,
        p_odd: total.odd as f64 * scale,
        p_zero: total.zero as f64 * scale,
        residual: total.residual as f64 * scale,
        depth,
        node_count: total.nodes,
        partial: total.residual > 0,
    })
}

/// Terminal words of length at most `depth` that visit `x`.
pub fn collect_j1(rho: &dyn Fn(Vertex) -> Label, x: Vertex, k: u64, r: f64, depth: usize) -> Result<Vec<Word>> {
    let mut walker = TreeWalker::new(rho, k, r, depth)?.mark(x);
    let mut out = Vec::new();
    walker.walk(&mut |ev| {
        if let TreeEvent::Terminal { word, marked } = ev {
            if marked > 0 {
                out.push(word.to_vec());
            }
        }
    });
    Ok(out)
}

/// Monte Carlo frequencies of the parity of visits to `x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParityEstimate {
    pub runs: u64,
    pub p_even: f64,
    pub p_odd: f64,
    pub p_zero: f64,
    pub se_even: f64,
    pub se_odd: f64,
}

struct VisitCounter {
    x: Vertex,
    count: u64,
}

impl StepObserver for VisitCounter {
    fn on_step(&mut self, ev: &StepEvent) {
        if ev.to == self.x {
            self.count += 1;
        }
    }
}

/// Run `runs` single-walker frozen walks at q = 1 on the fixed labels `rho`.
pub fn mc_parities(
    rho: &(dyn Fn(Vertex) -> Label + Sync),
    x: Vertex,
    k: u64,
    r: f64,
    runs: u64,
    seed: u64,
) -> Result<ParityEstimate> {
    if runs == 0 {
        return Err(Error::Parameter("runs must be >= 1".into()));
    }
    let mech = LocalMechanism::hv(1.0)?;
    let params = FrozenParams::new(1, k, r);
    FrozenEngine::new(params)?;
    let source = |v: Vertex| rho(v).canonical_direction();
    let counts = (0..runs)
        .into_par_iter()
        .map_init(
            || FrozenEngine::new(params).expect("validated"),
            |engine, i| {
                let mut rng = seed::rng(seed::derive(seed, seed::TAG_WALK, i));
                let mut obs = VisitCounter { x, count: 0 };
                engine.run_counts(&source, &mech, &mut rng, &mut obs).map(|_| obs.count)
            },
        )
        .collect::<Result<Vec<u64>>>()?;
    let (mut even, mut odd, mut zero) = (0u64, 0u64, 0u64);
    for c in counts {
        match c {
            0 => zero += 1,
            c if c % 2 == 0 => even += 1,
            _ => odd += 1,
        }
    }
    let n = runs as f64;
    let p = |c: u64| c as f64 / n;
    let se = |c: u64| (p(c) * (1.0 - p(c)) / n).sqrt();
    Ok(ParityEstimate { runs, p_even: p(even), p_odd: p(odd), p_zero: p(zero), se_even: se(even), se_odd: se(odd) })
}
