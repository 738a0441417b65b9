//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

/// Four-term far-field expansion, written out here rather than taken from
/// the crate.
pub fn asymptotic(x: i32, y: i32) -> f64 {
    const GAMMA: f64 = 0.577_215_664_901_532_9;
    let r2 = (x * x + y * y) as f64;
    let r = r2.sqrt();
    let theta = (y as f64).atan2(x as f64);
    2.0 / PI * r.ln() + (2.0 * GAMMA + 8f64.ln()) / PI - (4.0 * theta).cos() / (6.0 * PI * r2)
}

pub const DENSE_HALF: i32 = 20;

/// Potential kernel on the square |x|,|y| <= 20 by one dense LU solve:
/// `a(0) = 0`, discrete harmonic at other interior sites, and the far-field
/// expansion on the square's border.
pub fn dense_kernel() -> &'static HashMap<(i32, i32), f64> {
    static K: OnceLock<HashMap<(i32, i32), f64>> = OnceLock::new();
    K.get_or_init(|| {
        let h = DENSE_HALF;
        let side = (2 * h + 1) as usize;
        let idx = |x: i32, y: i32| ((y + h) as usize) * side + (x + h) as usize;
        let n = side * side;
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for y in -h..=h {
            for x in -h..=h {
                let i = idx(x, y);
                m[(i, i)] = 1.0;
                if x == 0 && y == 0 {
                    continue;
                }
                if x.abs() == h || y.abs() == h {
                    b[i] = asymptotic(x, y);
                    continue;
                }
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    m[(i, idx(x + dx, y + dy))] = -0.25;
                }
            }
        }
        let sol = m.lu().solve(&b).expect("nonsingular system");
        let mut out = HashMap::new();
        for y in -h..=h {
            for x in -h..=h {
                out.insert((x, y), sol[idx(x, y)]);
            }
        }
        out
    })
}

/// All spanning trees of the 3×3 grid centred at the origin, each given as
/// the parent of every non-root site when oriented toward the origin.
pub fn grid3_spanning_trees() -> Vec<Vec<((i32, i32), (i32, i32))>> {
    let sites: Vec<(i32, i32)> = (-1..=1).flat_map(|y| (-1..=1).map(move |x| (x, y))).collect();
    let mut edges = Vec::new();
    for &(x, y) in &sites {
        if x < 1 {
            edges.push(((x, y), (x + 1, y)));
        }
        if y < 1 {
            edges.push(((x, y), (x, y + 1)));
        }
    }
    assert_eq!(edges.len(), 12);
    let pos = |s: (i32, i32)| sites.iter().position(|&t| t == s).unwrap();
    let mut trees = Vec::new();
    for mask in 0u32..(1 << 12) {
        if mask.count_ones() != 8 {
            continue;
        }
        let mut parent: Vec<usize> = (0..9).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        let mut acyclic = true;
        for (e, &(a, b)) in edges.iter().enumerate() {
            if mask >> e & 1 == 1 {
                let (ra, rb) = (find(&mut parent, pos(a)), find(&mut parent, pos(b)));
                if ra == rb {
                    acyclic = false;
                    break;
                }
                parent[ra] = rb;
            }
        }
        if !acyclic {
            continue;
        }
        // Orient toward the origin by breadth-first search from it.
        let chosen: Vec<_> = edges.iter().enumerate().filter(|(e, _)| mask >> e & 1 == 1).map(|(_, &e)| e).collect();
        let mut up = vec![((0, 0), (0, 0)); 0];
        let mut frontier = vec![(0, 0)];
        let mut seen = vec![(0, 0)];
        while let Some(v) = frontier.pop() {
            for &(a, b) in &chosen {
                let other = if a == v { b } else if b == v { a } else { continue };
                if !seen.contains(&other) {
                    seen.push(other);
                    up.push((other, v));
                    frontier.push(other);
                }
            }
        }
        assert_eq!(up.len(), 8);
        up.sort();
        trees.push(up);
    }
    trees
}
