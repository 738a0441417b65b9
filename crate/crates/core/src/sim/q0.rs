use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{output_file, write_json, ExperimentSpec};
use crate::configs::{Config, ConfigKind};
use crate::error::Result;
use crate::lattice::{ball, Direction, Label, Vertex};
use crate::rwlm::{FreeWalk, LocalMechanism, RotorSource};
use crate::seed;

/// Two-step increments of the q = 0 walk on the alternating configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternatingReport {
    pub steps: u64,
    pub pairs: u64,
    pub diagonal: u64,
    /// Counts of (1,1), (1,−1), (−1,1), (−1,−1).
    pub counts: [u64; 4],
    pub max_abs_z: f64,
}

impl AlternatingReport {
    pub fn all_diagonal(&self) -> bool {
        self.diagonal == self.pairs
    }

    pub fn uniform_within(&self, sigmas: f64) -> bool {
        self.max_abs_z <= sigmas
    }
}

pub fn alternating_increments(steps: u64, walk_seed: u64) -> AlternatingReport {
    let config = Config::Lazy { kind: ConfigKind::Alternating, seed: 0 };
    let mut walk = FreeWalk::new(&config, LocalMechanism::hv_frozen_labels(), 256);
    let mut rng = seed::rng(walk_seed);
    let mut counts = [0u64; 4];
    let (mut pairs, mut diagonal) = (0, 0);
    let mut last = walk.position();
    for t in 1..=steps {
        let here = walk.step(&mut rng).to;
        if t % 2 == 0 {
            let d = here - last;
            pairs += 1;
            if d.x.abs() == 1 && d.y.abs() == 1 {
                diagonal += 1;
                counts[((d.x < 0) as usize) * 2 + (d.y < 0) as usize] += 1;
            }
            last = here;
        }
    }
    let n = pairs as f64;
    let sd = (n * 3.0 / 16.0).sqrt();
    let max_abs_z = counts.iter().map(|&c| ((c as f64 - n / 4.0) / sd).abs()).fold(0.0, f64::max);
    AlternatingReport { steps, pairs, diagonal, counts, max_abs_z }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxReport {
    pub steps: u64,
    pub returns: u64,
}

pub fn box_returns(steps: u64, walk_seed: u64) -> BoxReport {
    let config = Config::Lazy { kind: ConfigKind::Box, seed: 0 };
    let mut walk = FreeWalk::new(&config, LocalMechanism::hv_frozen_labels(), 512);
    let mut rng = seed::rng(walk_seed);
    let returns = (0..steps).filter(|_| walk.step(&mut rng).to.is_origin()).count() as u64;
    BoxReport { steps, returns }
}

/// East and west neighbors V, north and south neighbors H. At q = 0 no
/// walker can step into such a site.
pub fn is_blocked(src: &dyn RotorSource, v: Vertex) -> bool {
    src.label(v.step(Direction::East)) == Label::V
        && src.label(v.step(Direction::West)) == Label::V
        && src.label(v.step(Direction::North)) == Label::H
        && src.label(v.step(Direction::South)) == Label::H
}

/// The blocked site of `B_radius ∖ {0}` closest to the origin.
pub fn find_blocked_site(src: &dyn RotorSource, radius: f64) -> Option<Vertex> {
    let mut sites = ball(radius);
    sites.sort_by_key(|v| (v.norm_sq(), *v));
    sites.into_iter().find(|v| !v.is_origin() && is_blocked(src, *v))
}

pub fn blocked_site_visits(src: &dyn RotorSource, site: Vertex, steps: u64, walk_seed: u64) -> u64 {
    let mut walk = FreeWalk::new(src, LocalMechanism::hv_frozen_labels(), 1024);
    let mut rng = seed::rng(walk_seed);
    (0..steps).filter(|_| walk.step(&mut rng).to == site).count() as u64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockedReport {
    pub site: Option<Vertex>,
    pub steps: u64,
    pub visits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Q0Report {
    pub alternating: AlternatingReport,
    pub box_config: BoxReport,
    pub blocked: BlockedReport,
}

/// The three q = 0 experiments. The blocked-site run uses the spec's
/// configuration and ten times the step count.
pub fn cmd_q0_experiments(spec: &ExperimentSpec) -> Result<(Q0Report, PathBuf)> {
    spec.validate()?;
    let walk_seed = |i| seed::derive(spec.seed, seed::TAG_WALK, i);
    let config = spec.generator().build()?;
    let site = find_blocked_site(&config, 50.0);
    let blocked_steps = spec.steps * 10;
    let blocked = BlockedReport {
        site,
        steps: blocked_steps,
        visits: site.map_or(0, |s| blocked_site_visits(&config, s, blocked_steps, walk_seed(2))),
    };
    let report = Q0Report {
        alternating: alternating_increments(spec.steps, walk_seed(0)),
        box_config: box_returns(spec.steps, walk_seed(1)),
        blocked,
    };
    let path = output_file(spec, "q0.json")?;
    write_json(&report, &path)?;
    Ok((report, path))
}
