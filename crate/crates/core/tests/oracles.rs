mod common;

use std::collections::HashMap;
use std::f64::consts::PI;

use hvlab::configs::UstpConfig;
use hvlab::kernel::KernelTable;
use hvlab::lattice::{Direction, Vertex, ORIGIN};
use hvlab::rwlm::RotorSource;

#[test]
fn dense_solve_matches_table() {
    let dense = common::dense_kernel();
    let table = KernelTable::build(40).unwrap();
    assert!((dense[&(1, 0)] - 1.0).abs() < 1e-5);
    assert!((dense[&(1, 1)] - 4.0 / PI).abs() < 1e-5);
    for y in -10..=10 {
        for x in -10..=10 {
            let t = table.value(Vertex::new(x, y)).unwrap();
            assert!((t - dense[&(x, y)]).abs() < 1e-5, "({x},{y}): {t} vs {}", dense[&(x, y)]);
        }
    }
}

#[test]
fn grid3_has_192_spanning_trees() {
    assert_eq!(common::grid3_spanning_trees().len(), 192);
}

#[test]
fn axis_neighbor_does_not_always_point_home() {
    // (1,0) may also hang off (1,1) or (1,-1).
    let trees = common::grid3_spanning_trees();
    let home = trees.iter().filter(|t| t.contains(&((1, 0), (0, 0)))).count();
    assert!(home > 0 && home < trees.len());
}

#[test]
fn wilson_samples_uniform_over_trees() {
    let trees = common::grid3_spanning_trees();
    let index: HashMap<_, _> = trees.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let samples = 38_400u64;
    let mut counts = vec![0u64; trees.len()];
    for s in 0..samples {
        let u = UstpConfig::sample(2, s).unwrap();
        let mut key: Vec<((i32, i32), (i32, i32))> = (-1..=1)
            .flat_map(|y| (-1..=1).map(move |x| Vertex::new(x, y)))
            .filter(|v| *v != ORIGIN)
            .map(|v| {
                let p = v.step(u.rotor(v));
                ((v.x, v.y), (p.x, p.y))
            })
            .collect();
        key.sort();
        counts[*index.get(&key).expect("sample is a spanning tree of the 3x3 grid")] += 1;
    }
    let expected = samples as f64 / trees.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 191 degrees of freedom: mean 191, sd ~19.5.
    assert!(chi2 < 191.0 + 5.0 * 19.55, "chi2 = {chi2}");
}

#[test]
fn wilson_axis_neighbor_frequency_matches_count() {
    let trees = common::grid3_spanning_trees();
    let p = trees.iter().filter(|t| t.contains(&((1, 0), (0, 0)))).count() as f64 / trees.len() as f64;
    let samples = 20_000u64;
    let hits = (0..samples).filter(|&s| UstpConfig::sample(2, 1_000_000 + s).unwrap().rotor(Vertex::new(1, 0)) == Direction::West).count();
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    assert!((hits as f64 / samples as f64 - p).abs() < 4.0 * se);
}
